import json
import os
import subprocess
import sys

import pytest

from miocheck import parse
from miocheck.cli import main

from conftest import DATA

EXCHANGE = str(DATA / "exchange.mio")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", EXCHANGE)
    assert code == 0
    assert out.splitlines() == ["S: ok", "T: ok"]


def test_validate_overlap_is_error(capsys):
    code, out, _ = run(capsys, "validate", str(DATA / "overlap.mio"))
    assert code == 3


def test_missing_file_is_error(capsys):
    code, _, err = run(capsys, "validate", str(DATA / "nope.mio"))
    assert code == 3 and "cannot read" in err


def test_usage_error_exits_3(capsys):
    with pytest.raises(SystemExit) as info:
        main(["compat", EXCHANGE])
    assert info.value.code == 3
    with pytest.raises(SystemExit) as info:
        main(["compat", f"{EXCHANGE}:S", f"{EXCHANGE}:T", "--queue-bound", "0"])
    assert info.value.code == 3


def test_compat_exchange(capsys):
    s, t = f"{EXCHANGE}:S", f"{EXCHANGE}:T"
    code, out, _ = run(capsys, "compat", s, t, "--mode", "strong")
    assert code == 1 and "not strongly compatible" in out
    assert run(capsys, "compat", s, t, "--mode", "weak")[0] == 1
    assert run(capsys, "compat", s, t, "--mode", "async", "--queue-bound", "2")[0] == 0


def test_compat_exchange_async_bound_one_is_inconclusive(capsys):
    code, out, _ = run(capsys, "compat", f"{EXCHANGE}:S", f"{EXCHANGE}:T", "--mode", "async",
                       "--queue-bound", "1", "--json")
    assert code == 2
    payload = json.loads(out)
    assert payload["outcome"] == "InconclusiveAtBound" and payload["saturated"]


def test_compat_burst_and_sender_loop(capsys):
    burst = str(DATA / "burst.mio")
    args = ["compat", f"{burst}:S", f"{burst}:T", "--mode", "async", "--queue-bound"]
    assert run(capsys, *args, "1")[0] == 2
    assert run(capsys, *args, "2")[0] == 0
    loop = str(DATA / "sender_loop.mio")
    code, out, _ = run(capsys, "compat", f"{loop}:S", f"{loop}:T", "--mode", "async")
    assert code == 1 and "Incompatible" in out


def test_compat_not_composable(capsys):
    clash = str(DATA / "clash.mio")
    assert run(capsys, "compat", f"{clash}:P", f"{clash}:Q")[0] == 3


def test_refine(capsys):
    ref = str(DATA / "refinement.mio")
    code, out, _ = run(capsys, "refine", f"{ref}:C_ins", f"{ref}:A", "--mode", "strong",
                       "--json")
    assert code == 1
    cx = json.loads(out)["counterexample"]
    assert (cx["condition"], cx["action"]) == ("mustSim", "a")
    code, out, _ = run(capsys, "refine", f"{ref}:C_ins", f"{ref}:A")
    assert code == 0 and "weakly refines" in out
    code, out, _ = run(capsys, "refine", f"{ref}:C_drop", f"{ref}:A")
    assert code == 1 and "condition: 1" in out


def test_refine_signature_mismatch(capsys):
    assert run(capsys, "refine", f"{EXCHANGE}:S", f"{EXCHANGE}:T")[0] == 3


def test_resolve_errors(capsys):
    assert run(capsys, "refine", EXCHANGE, f"{EXCHANGE}:S")[0] == 3
    code, _, err = run(capsys, "refine", f"{EXCHANGE}:Z", f"{EXCHANGE}:S")
    assert code == 3 and "no MIO named 'Z'" in err


def test_compose_sync_and_async(capsys, tmp_path):
    code, out, _ = run(capsys, "compose", EXCHANGE, "S", "T")
    assert code == 0
    p = parse(out).mios[0]
    assert p.states == {"start_S.start_T"}
    target = tmp_path / "as.mio"
    code, out, _ = run(capsys, "compose", EXCHANGE, "S", "T", "--mode", "async",
                       "--queue-bound", "1", "-o", str(target))
    assert code == 0 and "wrote" in out
    q = parse(target.read_text()).mios[0]
    assert "s.q_n.t.q_m" in q.states


def test_compose_not_composable(capsys):
    clash = str(DATA / "clash.mio")
    assert run(capsys, "compose", clash, "P", "Q")[0] == 3


def test_theorems_pass(capsys):
    code, out, _ = run(capsys, "theorems", "--theorem", "T2", "--iterations", "40",
                       "--seed", "5")
    assert code == 0
    summary = json.loads(out.splitlines()[0])
    assert summary["status"] == "PASS" and summary["tried"] == 40


def test_theorems_failure_exits_1(capsys, monkeypatch):
    from miocheck import check
    monkeypatch.setattr(check, "weak_refines",
                        lambda c, a: check.RefinementVerdict(False, "weak"))
    code, out, _ = run(capsys, "theorems", "--theorem", "ObservationI", "--iterations", "5",
                       "--seed", "1")
    assert code == 1
    records = [json.loads(x) for x in out.splitlines()]
    assert records[0]["status"] == "FAIL"
    assert all(r["record"] == "failure" and "seed" in r for r in records[1:])
    assert len(records) > 1


def test_theorems_seed_from_env(capsys, monkeypatch):
    monkeypatch.setenv("MIOCHECK_SEED", "12")
    _, out, _ = run(capsys, "theorems", "--iterations", "3", "--json")
    assert json.loads(out)["seed"] == 12
    monkeypatch.setenv("MIOCHECK_SEED", "twelve")
    assert run(capsys, "theorems", "--iterations", "3")[0] == 3


def test_entry_point_subprocess():
    proc = subprocess.run([sys.executable, "-m", "miocheck", "validate", EXCHANGE],
                          capture_output=True, text=True, env={**os.environ})
    assert proc.returncode == 0 and "S: ok" in proc.stdout
