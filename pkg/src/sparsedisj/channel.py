"""
Two-party channel with exact bit accounting and a shared random source.

Protocols never see each other's inputs through the channel; they only
append Messages whose bit lengths are what the protocol would actually put
on the wire.  Randomness is shared through labelled streams derived from
one master seed, so it costs nothing to communicate and a run is fully
determined by its seed.
"""
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from hashlib import blake2b
from multiprocessing import Pool
from typing import Any, Callable
import logging

import numpy as np
from scipy import stats

from .grid import GridPoint, exists_equal
from .resources import ResourceBase, SCHEMA_VERSION, to_jsonable

logger = logging.getLogger(__name__)

SEED_MASK = 2 ** 64 - 1


class ProtocolError(RuntimeError):
    """A protocol broke the channel rules or got inputs it cannot run on."""
    pass


class InvariantViolation(AssertionError):
    """A self-check inside a simulation or construction failed."""
    pass


class Party(Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> 'Party':
        return Party.B if self is Party.A else Party.A


class MessageKind(Enum):
    INDEX = "index"
    ERROR_SIGNAL = "error-signal"
    RAW = "raw"


class Output(Enum):
    DISJOINT = "disjoint"
    INTERSECTING = "intersecting"


@dataclass
class Message(ResourceBase):
    sender: Party
    bits: int
    kind: MessageKind = MessageKind.INDEX

    def __post_init__(self) -> None:
        self.fixup()

    def fixup(self) -> None:
        self.sender = Party(self.sender)
        self.kind = MessageKind(self.kind)
        self.bits = int(self.bits)
        if self.bits < 1:
            raise ValueError(f"a sent message carries at least one bit, got {self.bits}")


@dataclass
class Transcript(ResourceBase):
    """
    Everything a run put on the wire, plus the declared output.
    Serialises to {seed, protocol, params, rounds:[{sender,bits,kind}], output, total_bits}.
    """
    seed: int
    protocol: str
    params: dict
    messages: list[Message] = field(default_factory=list)
    output: Output|None = None
    max_rounds: int = 0

    def __len__(self) -> int:
        return len(self.messages)

    def __str__(self) -> str:
        return f"{self.protocol}[seed={self.seed}]:{self.output.value if self.output else None}/{self.total_bits}b"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    @property
    def rounds_used(self) -> int:
        return len(self.messages)

    @property
    def per_round_bits(self) -> list[int]:
        return [m.bits for m in self.messages]

    @property
    def total_bits(self) -> int:
        return sum(self.per_round_bits)

    @property
    def max_message(self) -> int:
        return max(self.per_round_bits, default=0)

    def to_base(self) -> dict:
        self.fixup()
        return {
            'schema_version': SCHEMA_VERSION,
            'seed': self.seed,
            'protocol': self.protocol,
            'params': to_jsonable(self.params),
            'rounds': [m.to_base() for m in self.messages],
            'rounds_used': self.rounds_used,
            'output': self.output.value if self.output else None,
            'total_bits': self.total_bits,
        }


class SharedRandomness():
    """
    The common random source.  stream(label, index) is a numpy Generator seeded
    with the first 8 bytes of blake2b(master || label || index); both parties
    asking for the same label get the same stream.  Changing this derivation
    changes every golden transcript.
    """
    def __init__(self, seed: int) -> None:
        self._seed = int(seed) & SEED_MASK

    def __str__(self) -> str:
        return f"{self._seed:#018x}"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    @property
    def seed(self) -> int:
        return self._seed

    def derive(self, label: str, index: int = 0) -> int:
        h = blake2b(digest_size=8)
        h.update(self._seed.to_bytes(8, 'little'))
        h.update(label.encode())
        h.update(b'\x00')
        h.update((int(index) & SEED_MASK).to_bytes(8, 'little'))
        return int.from_bytes(h.digest(), 'little')

    def stream(self, label: str, index: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.derive(label, index))


class Channel():
    """
    The wire between the two parties for one run.  Senders must alternate and
    at most max_rounds messages may be sent.
    """
    def __init__(self, max_rounds: int, randomness: SharedRandomness) -> None:
        self._max_rounds = int(max_rounds)
        self._randomness = randomness
        self._messages: list[Message] = []

    def __len__(self) -> int:
        return len(self._messages)

    @property
    def randomness(self) -> SharedRandomness:
        return self._randomness

    @property
    def messages(self) -> list[Message]:
        return list(self._messages)

    @property
    def rounds_used(self) -> int:
        return len(self._messages)

    @property
    def max_rounds(self) -> int:
        return self._max_rounds

    def send(self, sender: Party, bits: int, kind: MessageKind = MessageKind.INDEX) -> Message:
        if len(self._messages) >= self._max_rounds:
            raise ProtocolError(f"round {len(self._messages) + 1} exceeds the limit of {self._max_rounds}")
        if self._messages and self._messages[-1].sender == sender:
            raise ProtocolError(f"party {sender.value} sent twice in a row")
        msg = Message(sender, bits, kind)
        self._messages.append(msg)
        return msg


def ground_truth(a: Any, b: Any) -> Output:
    """Correct answer: exists-equal on grid points, intersection on sets."""
    if isinstance(a, GridPoint) and isinstance(b, GridPoint):
        return Output.INTERSECTING if exists_equal(a, b) else Output.DISJOINT
    return Output.INTERSECTING if set(a) & set(b) else Output.DISJOINT


class Protocol(ABC):
    """
    A two-party protocol.  execute() receives both inputs but must treat the
    channel as the only link between the parties.
    """
    name = "protocol"

    @property
    @abstractmethod
    def params(self) -> dict:
        pass

    @property
    @abstractmethod
    def max_rounds(self) -> int:
        pass

    @abstractmethod
    def execute(self, a: Any, b: Any, channel: Channel) -> Output:
        pass

    def truth(self, a: Any, b: Any) -> Output:
        return ground_truth(a, b)

    def __str__(self) -> str:
        return f"{self.name}{self.params}"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"


class ConstantProtocol(Protocol):
    """Zero rounds, always the same answer."""
    name = "constant"

    def __init__(self, output: Output = Output.DISJOINT) -> None:
        self._output = Output(output)

    @property
    def params(self) -> dict:
        return {'output': self._output.value}

    @property
    def max_rounds(self) -> int:
        return 0

    def execute(self, a: Any, b: Any, channel: Channel) -> Output:
        return self._output


def run(protocol: Protocol, a: Any, b: Any, seed: int) -> tuple[Output, Transcript]:
    """One run of the protocol, fully determined by the seed."""
    channel = Channel(protocol.max_rounds, SharedRandomness(seed))
    output = Output(protocol.execute(a, b, channel))
    transcript = Transcript(seed=int(seed) & SEED_MASK, protocol=protocol.name, params=dict(protocol.params),
                            messages=channel.messages, output=output, max_rounds=protocol.max_rounds)
    if transcript.rounds_used > protocol.max_rounds:
        raise ProtocolError(f"{protocol} used {transcript.rounds_used} rounds")
    return output, transcript


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence, method='wilson')
    return (float(ci.low), float(ci.high))


@dataclass
class TrialSummary(ResourceBase):
    """
    Mergeable counters over many runs.  Only sums, maxima and histograms are
    kept so merging is order independent.
    """
    protocol: str
    params: dict
    trials: int = 0
    errors: int = 0
    false_disjoint: int = 0
    false_intersecting: int = 0
    outputs: dict = field(default_factory=dict)
    bits_total: int = 0
    bits_max_total: int = 0
    max_message: int = 0
    per_round_bits: list[int] = field(default_factory=list)
    rounds_histogram: dict = field(default_factory=dict)

    def add(self, truth: Output, transcript: Transcript) -> None:
        self.trials += 1
        out = transcript.output
        self.outputs[out.value] = self.outputs.get(out.value, 0) + 1
        if out != truth:
            self.errors += 1
            if out == Output.DISJOINT:
                self.false_disjoint += 1
            else:
                self.false_intersecting += 1
        total = transcript.total_bits
        self.bits_total += total
        self.bits_max_total = max(self.bits_max_total, total)
        self.max_message = max(self.max_message, transcript.max_message)
        for i, bits in enumerate(transcript.per_round_bits):
            if i >= len(self.per_round_bits):
                self.per_round_bits.append(0)
            self.per_round_bits[i] += bits
        r = str(transcript.rounds_used)
        self.rounds_histogram[r] = self.rounds_histogram.get(r, 0) + 1

    def merge(self, other: 'TrialSummary') -> None:
        self.trials += other.trials
        self.errors += other.errors
        self.false_disjoint += other.false_disjoint
        self.false_intersecting += other.false_intersecting
        self.outputs = dict(Counter(self.outputs) + Counter(other.outputs))
        self.bits_total += other.bits_total
        self.bits_max_total = max(self.bits_max_total, other.bits_max_total)
        self.max_message = max(self.max_message, other.max_message)
        width = max(len(self.per_round_bits), len(other.per_round_bits))
        mine = self.per_round_bits + [0] * (width - len(self.per_round_bits))
        theirs = other.per_round_bits + [0] * (width - len(other.per_round_bits))
        self.per_round_bits = [a + b for a, b in zip(mine, theirs)]
        self.rounds_histogram = dict(Counter(self.rounds_histogram) + Counter(other.rounds_histogram))

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials)

    @property
    def mean_bits(self) -> float:
        return self.bits_total / self.trials if self.trials else 0.0

    def to_base(self) -> dict:
        b = super().to_base()
        b['schema_version'] = SCHEMA_VERSION
        b['error_rate'] = self.error_rate
        b['ci95'] = list(self.ci95)
        b['bits'] = {
            'per_round': b.pop('per_round_bits'),
            'total': self.bits_total,
            'mean_total': self.mean_bits,
            'max_total': b.pop('bits_max_total'),
            'max_message': b.pop('max_message'),
        }
        del b['bits_total']
        b['outputs'] = dict(sorted(self.outputs.items()))
        b['rounds_used_histogram'] = dict(sorted(b.pop('rounds_histogram').items(), key=lambda kv: int(kv[0])))
        return b


InputFactory = Callable[[np.random.Generator], tuple[Any, Any]]


@dataclass
class _TrialRange():
    protocol: Protocol
    inputs: InputFactory
    seed: int
    start: int
    stop: int


def trial_seed(seed: int, index: int) -> int:
    return (int(seed) ^ int(index)) & SEED_MASK


def _run_range(work: _TrialRange) -> TrialSummary:
    summary = TrialSummary(work.protocol.name, dict(work.protocol.params))
    for i in range(work.start, work.stop):
        s = trial_seed(work.seed, i)
        a, b = work.inputs(SharedRandomness(s).stream("inputs"))
        _, transcript = run(work.protocol, a, b, s)
        summary.add(work.protocol.truth(a, b), transcript)
    return summary


def run_trials(protocol: Protocol, inputs: InputFactory, trials: int, seed: int,
               jobs: int = 1) -> TrialSummary:
    """
    `trials` independent runs, trial i using seed ^ i for both its inputs and
    its shared randomness.  `inputs` draws an input pair from a generator and
    must be picklable when jobs > 1.  The summary does not depend on jobs.
    """
    trials = int(trials)
    jobs = max(1, min(int(jobs), trials)) if trials else 1
    bounds = [trials * j // jobs for j in range(jobs + 1)]
    work = [_TrialRange(protocol, inputs, seed, lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    logger.debug(f"{protocol}: {trials} trials over {len(work)} workers")
    if len(work) > 1:
        with Pool(len(work)) as pool:
            parts = pool.map(_run_range, work)
    else:
        parts = [_run_range(w) for w in work]
    summary = TrialSummary(protocol.name, dict(protocol.params))
    for part in parts:
        summary.merge(part)
    logger.info(f"{protocol}: {summary.trials} trials, {summary.errors} errors, mean {summary.mean_bits:.1f} bits")
    return summary


@dataclass
class ZeroRoundBaseline(ResourceBase):
    """Best constant answer for exists-equal on uniform inputs, t = 4n."""
    n: int
    t: int
    pr_zero: Fraction
    error: Fraction

    def to_base(self) -> dict:
        b = super().to_base()
        b['pr_zero_float'] = float(self.pr_zero)
        b['error_float'] = float(self.error)
        return b


def zero_round_baseline_error(n: int) -> ZeroRoundBaseline:
    """
    Pr[EE(x,y)=0] = (1-1/t)^n exactly, and the error min(p, 1-p) of the
    best constant output.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"zero round baseline needs n >= 1, got {n}")
    t = 4 * n
    p = Fraction((t - 1) ** n, t ** n)
    return ZeroRoundBaseline(n, t, p, min(p, 1 - p))


@dataclass
class ZeroRoundCurve(ResourceBase):
    n_max: int
    pr_zero_min: float
    pr_zero_max: float
    error_min: float
    error_argmin: int

    def to_base(self) -> dict:
        return super().to_base() | {'schema_version': SCHEMA_VERSION}


def zero_round_curve(n_max: int) -> tuple[np.ndarray, np.ndarray, ZeroRoundCurve]:
    """
    The baseline for every n in 1..n_max in floating point:
    (1-1/(4n))^n = exp(n * log1p(-1/(4n))).
    Returns (pr_zero, error, summary) with arrays indexed by n-1.
    """
    n = np.arange(1, int(n_max) + 1, dtype=np.float64)
    pr = np.exp(n * np.log1p(-1.0 / (4.0 * n)))
    err = np.minimum(pr, 1.0 - pr)
    i = int(np.argmin(err))
    summary = ZeroRoundCurve(int(n_max), float(pr.min()), float(pr.max()), float(err[i]), i + 1)
    return pr, err, summary
