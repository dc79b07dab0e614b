"""Exit criteria. Each test reports one PASS/FAIL line in the terminal summary."""
import io
import itertools
import time
from fractions import Fraction

import pytest

from shiftsets.asymptotics import GATE_OPEN, thm2_gate
from shiftsets.cli import main
from shiftsets.deltaf import find_delta_f_witness, is_delta_subset, ladder_delta_f_check
from shiftsets.natset import HTuple, NatSet, SequenceSpec, distance_set, realize
from shiftsets.recurrence import Certificate, certificate_check, recurrence_count, rk_set, rkh_membership

_jsonl: dict[str, str] = {}


@pytest.fixture
def criterion(request):
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])
    state = {}

    def start(number, title, limit):
        state.update(number=number, title=title, limit=limit, t0=time.perf_counter())

    yield start
    elapsed = time.perf_counter() - state["t0"]
    failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
    verdict = "FAIL" if failed else "PASS"
    lines.append(f"[{verdict}] {state['number']}. {state['title']} ({elapsed:.2f}s, limit {state['limit']}s)")


def suite_jsonl(name, workers, *extra):
    out = io.StringIO()
    code = main(["--format", "jsonl", "suite", name, "--workers", str(workers), *extra], out=out)
    assert code == 0, f"suite {name} exited {code}"
    return out.getvalue()


def _within(t0, limit):
    elapsed = time.perf_counter() - t0
    assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"


def test_1_worked_examples(criterion):
    criterion(1, "worked example values, exact", 1)
    t0 = time.perf_counter()
    A = NatSet.of([1, 2, 3, 5, 8])
    F = NatSet.of([1, 2, 4])
    assert [recurrence_count(A, x) for x in (1, 2, 3)] == [2, 2, 2]
    assert distance_set(F).elements == (1, 2, 3)
    assert distance_set(F).issubset(rk_set(A, 2, 16))
    assert rkh_membership(A, 2, HTuple(F.elements)) is None
    _within(t0, 1)


def test_2_lemma_bound_suite(criterion):
    import json

    criterion(2, "lemma bound on 1000 seeded instances, exact rationals, forms to 1e-9", 60)
    t0 = time.perf_counter()
    text = suite_jsonl("lemma", 1, "--count", "1000")
    _within(t0, 60)
    records = [json.loads(line) for line in text.splitlines()]
    assert len(records) == 1000
    for r in records:
        assert max(r["k"], 1) <= 4 and r["n"] <= 30 and r["m"] <= 30
        assert max(r["A"] + r["B"]) <= 200
        exact = Fraction(r["exact_bound"])
        assert len(r["Z"]) >= exact
        assert len(r["intersection"]) >= r["k"]
        assert abs(r["root_bound"] - float(exact)) <= 1e-9 * max(1.0, float(exact))
        # replay H0 inside every shifted copy indexed by Z
        A = set(r["A"])
        assert all(x - z in A for z in r["Z"] for x in r["H0"])
    _jsonl["lemma"] = text


def test_3_proposition_property(criterion):
    import json

    criterion(3, "tuple distances recurrent, pruned/brute-force equivalence, 500 instances", 60)
    t0 = time.perf_counter()
    text = suite_jsonl("proposition", 1, "--count", "500")
    _within(t0, 60)
    records = [json.loads(line) for line in text.splitlines()]
    assert len(records) == 500
    for r in records:
        assert r["capacity"] <= 512 and r["k"] <= 3 and r["h"] <= 4 and len(r["B"]) <= 16
        assert r["status"] == "complete"
        assert r["delta_in_rk"] and r["certificates_ok"] and r["matches_oracle"]
    assert sum(len(r["tuples"]) for r in records) > 0
    _jsonl["proposition"] = text


def test_4_odds_obstruction(criterion):
    criterion(4, "no 3-subset of [0,60) has all distances odd", 10)
    t0 = time.perf_counter()
    odds = realize(SequenceSpec("odds", horizon=64))
    hits = [z for z in itertools.combinations(range(60), 3) if is_delta_subset(z, odds)]
    assert hits == []
    assert find_delta_f_witness(odds, 3, 60) is None
    _within(t0, 10)


def test_5_ladder(criterion):
    criterion(5, "ladder blocks A_1..A_6 are size-n witnesses", 10)
    t0 = time.perf_counter()
    horizon = 10**4
    A = realize(SequenceSpec("ladder", horizon=horizon))
    ws = ladder_delta_f_check(6, horizon)
    assert [w.h for w in ws] == [1, 2, 3, 4, 5, 6]
    for w in ws:
        assert len(w.Z) == w.h
        assert all(y - x in A for x, y in itertools.combinations(w.Z, 2))
    _within(t0, 10)


def test_6_partition_regularity(criterion):
    import json

    criterion(6, "500 seeded 2-colourings of |X| = 6 all have a monochromatic triple", 60)
    t0 = time.perf_counter()
    text = suite_jsonl("partition", 1, "--count", "500")
    _within(t0, 60)
    records = [json.loads(line) for line in text.splitlines()]
    assert len(records) == 500
    for r in records:
        assert len(r["X"]) == 6 and r["pieces"] <= 2
        assert r["Y"] is not None and len(r["Y"]) == 3
        colours = {r["coloring"][str(y - x)] for x, y in itertools.combinations(r["Y"], 2)}
        assert colours == {r["piece"]}
    _jsonl["partition"] = text


def test_7_thm2_echo(criterion):
    criterion(7, "a_n = floor(n^1.2), N = 5000, k = 2: gate open, witnesses h = 3, 4, 5 in R_2(A)", 300)
    t0 = time.perf_counter()
    N = 5000
    A_full = realize(SequenceSpec.parse(f"power:c=1,p=6/5@{int(N ** 1.2) + 1}"))
    assert len(A_full) >= N
    assert thm2_gate(A_full, 2, N).verdict == GATE_OPEN
    A = NatSet.of(A_full.elements[:N])
    R2 = rk_set(A, 2, A.capacity)
    members = set(A)
    for h in (3, 4, 5):
        w = find_delta_f_witness(R2, h, 256)
        assert w is not None and len(w.Z) == h
        for x, y in itertools.combinations(w.Z, 2):
            assert sum(1 for a in members if a + (y - x) in members) >= 2
    _within(t0, 300)


def test_8_main_theorem_echo(criterion):
    import json

    criterion(8, "random A (density 1/2, horizon 2000), B = naturals, k = 2, h = 3: gate open, >= 5 certificates", 300)
    t0 = time.perf_counter()
    text = suite_jsonl("echo", 1, "--seed", "42")
    _within(t0, 300)
    records = [json.loads(line) for line in text.splitlines()]
    gate = records[0]
    assert gate["type"] == "gate" and gate["verdict"] == GATE_OPEN
    assert gate["k"] == 2 and gate["h"] == 3
    certs = [r for r in records if r["type"] == "certificate"]
    assert len(certs) >= 5
    A = realize(SequenceSpec.parse("random:d=1/2,seed=42@2000"))

    assert all(certificate_check(A, Certificate.from_dict(c)) for c in certs)
    _jsonl["echo"] = text


def test_9_determinism_across_workers(criterion):
    criterion(9, "criteria 2, 3, 6, 8 byte-identical with 2 workers", 300)
    runs = {
        "lemma": ("--count", "1000"),
        "proposition": ("--count", "500"),
        "partition": ("--count", "500"),
        "echo": ("--seed", "42"),
    }
    for name, extra in runs.items():
        baseline = _jsonl.get(name) or suite_jsonl(name, 1, *extra)
        assert suite_jsonl(name, 2, *extra) == baseline, f"suite {name} differs across worker counts"
