
from pathlib import Path

from sparsedisj.harness import GOLDEN_CASES, GoldenCase, golden_transcripts, record_goldens
from sparsedisj.harness.goldens import golden_record

GOLDENS = Path(__file__).parent / "goldens" / "transcripts.json"

def test_goldens_match():
    check = golden_transcripts(GOLDENS)
    assert(check.verdict)
    assert(check.cases == len(GOLDEN_CASES))
    assert(check.to_base()['verdict'] is True)

def test_golden_inputs():
    S, T = GoldenCase("x", "sparse", 16, seed=0).inputs()
    assert(S.m == 64)
    assert((S & T).elements == (16,))

def test_golden_wire():
    cases = {c['name']: c['transcript'] for c in golden_record()['cases']}
    assert([r['bits'] for r in cases['sparse-k256-r2']['rounds']] == [2313, 2057])
    assert([r['sender'] for r in cases['sparse-k256-r2']['rounds']] == ["B", "A"])
    assert(cases['sparse-k256-r1']['total_bits'] == 6153)
    assert(cases['folklore-k16']['rounds'] == [{'bits': 160, 'kind': "raw", 'sender': "A"}])
    assert(all(c['output'] == "intersecting" for c in cases.values()))

def test_goldens_detect_changes():
    check = golden_transcripts(GOLDENS, (GoldenCase("sparse-k16-r1", "sparse", 16, seed=4),))
    assert(check.mismatches == ["sparse-k16-r1"])
    check = golden_transcripts(GOLDENS, (GoldenCase("sparse-k16-r1", "sparse", 16, seed=3, c=2.5),))
    assert(check.mismatches == ["sparse-k16-r1"])
    check = golden_transcripts(GOLDENS, (GoldenCase("sparse-k32-r1", "sparse", 32, seed=3),))
    assert(check.missing == ["sparse-k32-r1"])
    assert(not check)

def test_goldens_subset_is_file_mismatch():
    check = golden_transcripts(GOLDENS, GOLDEN_CASES[:1])
    assert(check.mismatches == ["<file>"])

def test_record_then_check(tmp_path):
    path = tmp_path / "nested" / "transcripts.json"
    record_goldens(path)
    assert(golden_transcripts(path).verdict)
    assert(path.read_text() == GOLDENS.read_text())
