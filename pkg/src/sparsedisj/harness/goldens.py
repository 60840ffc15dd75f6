"""
Golden transcripts: runs on fixed intersecting inputs with frozen seeds whose
wire contents do not depend on sampling luck.  The stored JSON must match a
fresh run byte for byte; any change to the channel, the randomness
derivation or a schedule constant shows up as a mismatch.
"""
from dataclasses import dataclass, field
from pathlib import Path
import json
import logging

from ..channel import run
from ..disjointness import KSet, make_protocol
from ..disjointness.schedule import DEFAULT_C
from ..resources import ResourceBase, SCHEMA_VERSION, dumps

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GoldenCase():
    """Alice holds {1..k}, Bob holds {k..2k-1}, both inside [4k]."""
    name: str
    protocol: str
    k: int
    seed: int
    r: int = 1
    c: float = DEFAULT_C

    def inputs(self) -> tuple[KSet, KSet]:
        m = 4 * self.k
        return KSet(m, tuple(range(1, self.k + 1))), KSet(m, tuple(range(self.k, 2 * self.k)))

    def transcript(self) -> dict:
        protocol = make_protocol(self.protocol, self.k, self.r, self.c)
        _, transcript = run(protocol, *self.inputs(), self.seed)
        return transcript.to_base()


GOLDEN_CASES = (
    GoldenCase("sparse-k16-r1", "sparse", 16, seed=3),
    GoldenCase("sparse-k256-r1", "sparse", 256, seed=11),
    GoldenCase("sparse-k256-r2", "sparse", 256, seed=12, r=2),
    GoldenCase("folklore-k16", "folklore", 16, seed=5),
)


def golden_record(cases: tuple[GoldenCase, ...] = GOLDEN_CASES) -> dict:
    return {
        'schema_version': SCHEMA_VERSION,
        'cases': [{'name': c.name, 'transcript': c.transcript()} for c in cases],
    }


@dataclass
class GoldenCheck(ResourceBase):
    path: str
    cases: int
    mismatches: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return not self.mismatches and not self.missing

    def __bool__(self) -> bool:
        return self.verdict

    def to_base(self) -> dict:
        return super().to_base() | {'verdict': self.verdict}


def record_goldens(path: str|Path, cases: tuple[GoldenCase, ...] = GOLDEN_CASES) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(golden_record(cases)))
    logger.info(f"recorded {len(cases)} golden transcripts to {path}")


def golden_transcripts(path: str|Path, cases: tuple[GoldenCase, ...] = GOLDEN_CASES) -> GoldenCheck:
    """Compare fresh runs of `cases` with the stored file, text for text."""
    path = Path(path)
    stored_text = path.read_text()
    fresh = golden_record(cases)
    check = GoldenCheck(str(path), len(cases))
    stored = {c['name']: c for c in json.loads(stored_text).get('cases', [])}
    for case in fresh['cases']:
        old = stored.get(case['name'])
        if old is None:
            check.missing.append(case['name'])
        elif dumps(old) != dumps(case):
            check.mismatches.append(case['name'])
    if check.verdict and stored_text != dumps(fresh):
        check.mismatches.append("<file>")
    if not check.verdict:
        logger.warning(f"golden transcripts differ: {check.mismatches + check.missing}")
    return check
