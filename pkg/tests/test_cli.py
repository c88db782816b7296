import json
from pathlib import Path

import pytest

from disclosure.cli import main
from conftest import SET_A, SET_B

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_solve_set_a(capsys):
    code, rep = run(capsys, "solve", "--config", CONFIGS / "set_a.json")
    assert code == 0
    assert rep["case"] == "stationary"
    assert rep["optimal_policy"]["kind"] == "MDD"
    assert rep["W"] == pytest.approx(0.5101781816, abs=1e-9)
    assert set(rep) == {"case", "optimal_policy", "W", "V", "thresholds"}


def test_solve_patient_and_uninformative(capsys, tmp_path):
    code, rep = run(capsys, "solve", "--config", write(tmp_path, "a.json", {**SET_A, "r_p": 0.05}))
    assert code == 0 and rep["optimal_policy"]["kind"] == "KG"
    assert rep["W"] == pytest.approx(4 / 7, abs=1e-12)
    code, rep = run(capsys, "solve", "--config", write(tmp_path, "b.json", {**SET_A, "mu": 0.5}))
    assert rep["optimal_policy"]["kind"] == "NONE"
    assert rep["thresholds"]["t_tilde"] == "inf"


def test_solve_pessimistic(capsys):
    code, rep = run(capsys, "solve", "--config", CONFIGS / "set_b.json")
    assert code == 0 and rep["case"] == "pessimistic"


@pytest.mark.parametrize("bad", [
    {**SET_A, "L": 2.0},           # v(L) > 0
    {**SET_A, "surprise": 1},
    {k: v for k, v in SET_A.items() if k != "H"},
])
def test_invalid_input_exit_2(capsys, tmp_path, bad):
    assert run(capsys, "solve", "--config", write(tmp_path, "bad.json", bad))[0] == 2


def test_missing_config_and_bad_flags(capsys, tmp_path):
    assert run(capsys, "solve")[0] == 2
    assert run(capsys, "solve", "--config", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "explode")[0] == 2
    assert run(capsys, "solve", "--config", CONFIGS / "set_a.json", "--grid", "2")[0] == 2
    assert run(capsys, "solve", "--config", CONFIGS / "set_a.json", "--seed", "-1")[0] == 2


@pytest.mark.parametrize("name", ["set_a", "set_b"])
def test_verify_default_sets(capsys, name):
    code, rep = run(capsys, "verify", "--config", CONFIGS / f"{name}.json")
    assert code == 0 and rep["pass"]
    assert all(c["pass"] for c in rep["checks"])


def test_verify_perturbed_delay_fails(capsys):
    code, rep = run(capsys, "verify", "--config", CONFIGS / "set_a_perturbed.json")
    assert code == 1
    ob = next(c for c in rep["checks"] if c["check"] == "obedience")
    assert not ob["pass"] and ob["min_value"] < 0


def test_verify_rejects_zero_paths(capsys, tmp_path):
    cfg = write(tmp_path, "n0.json", {"environment": SET_A, "mc_paths": 0})
    assert run(capsys, "verify", "--config", cfg)[0] == 2


def test_sweep_outputs_and_determinism(capsys, tmp_path):
    cfg = CONFIGS / "set_a.json"
    code, rep = run(capsys, "sweep", "--config", cfg, "--out", tmp_path / "one", "--seed", 5)
    assert code == 0 and rep["pass"] and rep["seed"] == 5
    run(capsys, "sweep", "--config", cfg, "--out", tmp_path / "two", "--seed", 5)
    for name in rep["files"]:
        a = (tmp_path / "one" / name).read_bytes()
        assert a == (tmp_path / "two" / name).read_bytes()
    lines = (tmp_path / "one" / "set_a_mu_sweep_rp0.2.csv").read_text().splitlines()
    assert lines[0] == "mu,W_KG,W_MDD,W_IPD_or_DPD,W_noinfo,W_concavified"
    assert len(lines) == 201


def test_sweep_errors(capsys, tmp_path):
    cfg = write(tmp_path, "e.json", {"environment": SET_A, "sweep": {"mu_points": 0}})
    assert run(capsys, "sweep", "--config", cfg, "--out", tmp_path)[0] == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(capsys, "sweep", "--config", CONFIGS / "set_a.json", "--out", blocker / "sub")[0] == 2


def test_contract_commands(capsys):
    code, rep = run(capsys, "contract", "--config", CONFIGS / "set_a.json")
    assert code == 0 and rep["contract"]["policy"]["kind"] == "MDD"
    assert rep["contract"]["wage_breakpoints"][0][0] == pytest.approx(1.638009, abs=1e-6)
    code, rep = run(capsys, "contract", "--config", CONFIGS / "contract_ifd.json")
    assert code == 0 and rep["contract"]["M"] == pytest.approx(0.118182, abs=1e-6)


def test_contract_needs_stationary(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", {"environment": SET_B, "contract": {"v_bar": 0.3, "B": 2.0}})
    assert run(capsys, "contract", "--config", cfg)[0] == 2


def test_genq_command(capsys, tmp_path):
    code, rep = run(capsys, "genq", "--config", CONFIGS / "genq_uniform.json", "--out", tmp_path)
    assert code == 0 and rep["branch"] == "OIGD"
    assert rep["q_star"] == pytest.approx(0.2, abs=1e-9)
    assert (tmp_path / "genq_uniform_cutoffs.csv").exists()
