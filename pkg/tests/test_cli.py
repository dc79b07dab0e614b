import io
import json
import shutil
from importlib import resources

import pytest

from shiftsets.cli import RunConfig, main
from shiftsets.natset import NatSet
from shiftsets.recurrence import Certificate, certificate_check


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_rkh_search_empty_exits_1():
    code, out = run("--format", "jsonl", "rkh-search", "--A", "explicit:1,2,3,5,8", "--B", "explicit:1,2,4", "--k", "2", "--h", "3")
    assert code == 1
    recs = jsonl(out)
    assert recs == [{"type": "search-summary", "status": "complete", "examined": 3, "found": 0}]


def test_delta_command():
    code, out = run("--format", "jsonl", "delta", "--A", "explicit:1,2,4")
    assert code == 0
    assert jsonl(out)[0]["elements"] == [1, 2, 3]


def test_gate_thm2_command():
    code, out = run("--format", "jsonl", "gate", "--A", "power:c=1,p=1.2@10000", "--k", "2", "--kind", "thm2")
    assert code == 0
    assert jsonl(out)[0]["verdict"] == "gate-open"


def test_gate_csv_table():
    code, out = run("--format", "csv", "gate", "--A", "naturals@200", "--B", "naturals@200", "--k", "1", "--N", "100", "--k0", "1,50")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("k0,N,infimum")
    assert len(lines) == 3


def test_csv_rejected_outside_gate():
    code, _ = run("--format", "csv", "delta", "--A", "explicit:1,2,4")
    assert code == 2


def test_usage_errors_exit_2():
    assert run("rk", "--A", "nonsense@", "--k", "2")[0] == 2
    assert run("rk", "--A", "explicit:1,2", "--k", "0")[0] == 2
    assert run("no-such-command")[0] == 2
    assert run("lemma", "--A", "explicit:1,2", "--B", "explicit:1", "--k", "3")[0] == 2


def test_horizon_flag_caps_capacity():
    assert run("--horizon", "100", "generate", "primes@1000")[0] == 2
    assert run("--horizon", "1000", "generate", "primes@1000")[0] == 0


def test_env_horizon(monkeypatch):
    monkeypatch.setenv("SHIFTSETS_HORIZON", "50")
    assert run("generate", "primes@100")[0] == 2


def test_certificates_round_trip_through_verify(tmp_path):
    code, out = run("--format", "jsonl", "rkh-search", "--A", "explicit:1,2,3,5,8", "--B", "explicit:1,2,3,4", "--k", "2", "--h", "2")
    assert code == 0
    path = tmp_path / "certs.jsonl"
    path.write_text(out)
    A = NatSet.of([1, 2, 3, 5, 8])
    certs = [Certificate.from_dict(r) for r in jsonl(out) if r["type"] == "certificate"]
    assert len(certs) == 6 and all(certificate_check(A, c) for c in certs)
    assert run("verify", "--certificates", str(path), "--A", "explicit:1,2,3,5,8")[0] == 0


def test_tampered_certificate_fails_verify(tmp_path):
    path = tmp_path / "certs.txt"
    path.write_text("tuple=1,2,3 witnesses=5 k=1\n")
    assert run("verify", "--certificates", str(path), "--A", "explicit:1,2,3,5,8")[0] == 3


def test_verify_suite_passes():
    code, out = run("verify")
    assert code == 0
    assert out.count("PASS") == 10 and "FAIL" not in out


def test_verify_corrupted_instance_exits_2(tmp_path):
    src = resources.files("shiftsets") / "data"
    for name in ("example_A.set", "example_F.set", "lemma_A.set", "lemma_B.set"):
        with resources.as_file(src / name) as p:
            shutil.copy(p, tmp_path / name)
    (tmp_path / "example_A.set").write_text("1\n2\n3\n5\n5\n")
    assert run("verify", "--data-dir", str(tmp_path))[0] == 2


def test_verify_injected_fault_exits_3():
    assert run("verify", "--inject-fault")[0] == 3


def test_lemma_command_json():
    code, out = run("--format", "jsonl", "lemma", "--A", "explicit:1,2,3,5,8", "--B", "explicit:1,2,3,4", "--k", "2")
    assert code == 0
    rec = jsonl(out)[0]
    assert rec["exact_bound"] == "20/33" and rec["Z"] == [1, 2]


def test_deltaf_and_partition_commands():
    assert run("deltaf", "--S", "odds@100", "--h", "3", "--bound", "50")[0] == 1
    code, out = run("--format", "jsonl", "deltaf", "--S", "power:c=1,p=6/5@3000", "--rk", "2", "--h", "4", "--bound", "100")
    assert code == 0 and len(jsonl(out)[0]["Z"]) == 4
    code, out = run("--format", "jsonl", "partition", "--X", "0,1,3", "--coloring", "1:0,3:0,2:1", "--k", "2")
    assert code == 0 and jsonl(out)[0]["Y"] == [0, 1]
    assert run("partition", "--X", "0,1,3", "--coloring", "1:0", "--k", "2")[0] == 2


def test_member_and_ladder_commands():
    code, out = run("member", "--A", "explicit:1,2,3,5,8", "--k", "1", "--tuple", "1,2,3")
    assert code == 0 and out.strip() == "tuple=1,2,3 witnesses=4 k=1 count=1"
    assert run("member", "--A", "explicit:1,2,3,5,8", "--k", "2", "--tuple", "1,2,4")[0] == 1
    code, out = run("--format", "jsonl", "ladder", "--levels", "6")
    assert code == 0 and [len(r["Z"]) for r in jsonl(out)] == [1, 2, 3, 4, 5, 6]


def test_identical_config_gives_identical_bytes():
    argv = ("--format", "jsonl", "suite", "echo", "--seed", "3")
    assert run(*argv) == run(*argv)


@pytest.mark.parametrize(
    "argv",
    [
        ["--format", "jsonl", "rkh-search", "--A", "random:d=1/2,seed=42@2000", "--B", "naturals@100", "--k", "2", "--h", "3", "--cap", "5"],
        ["gate", "--kind", "corollary", "--A", "primes@1000", "--B", "naturals@100", "--k", "2", "--k0", "5,10"],
        ["--horizon", "5000", "rk", "--A", "explicit:1,2,3,5,8", "--k", "2", "--counts"],
        ["verify"],
        ["suite", "partition", "--count", "3", "--workers", "2"],
    ],
)
def test_run_config_round_trip(argv):
    cfg = RunConfig.parse(argv)
    assert RunConfig.parse(cfg.argv()) == cfg
