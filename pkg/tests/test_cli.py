import io
import json
import math

import pytest
from scipy.special import jv

from multicritical.cli import run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_airy_table_pairs_functions():
    code, out, _ = invoke("airy", "--p", "3", "--z", "-5:5:0.1", "--k", "0")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 102
    header = lines[0].split(",")
    assert header[0] == "z"
    assert len(header) == 3


def test_negative_grid_values_are_accepted():
    code, out, _ = invoke("kernel", "--p", "2", "--x", "-1:1:1", "--y", "-2")
    assert code == 0
    assert len(out.strip().splitlines()) == 4


def test_csv_output_is_reproducible(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert invoke("density", "--p", "3", "--x", "-2:2:1", "-o", str(first))[0] == 0
    assert invoke("density", "--p", "3", "--x", "-2:2:1", "-o", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"p": 2, "interval": "-1,1", "format": "json"}))
    code, out, _ = invoke("gap", "--config", str(cfg))
    assert code == 0
    body = json.loads(out)
    assert 0 < body["F"] < 1
    assert body["config"]["options"]["p"] == 2


def test_unknown_config_key_is_a_usage_error(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"p": 2, "bogus": 1}))
    assert invoke("gap", "--config", str(cfg))[0] == 2


def test_verify_reports_every_check_below_threshold():
    code, out, _ = invoke("verify", "--p", "3", "--interval", "-1,1", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert body["all_ok"]
    assert all(check["value"] <= 1e-6 for check in body["checks"].values())


def test_schur_plancherel_coefficients():
    code, out, _ = invoke("schur", "--plancherel", "1.0", "--n", "5")
    assert code == 0
    body = json.loads(out)
    assert body["J"] == pytest.approx(list(jv(range(-5, 6), 2.0)), abs=1e-12)
    assert body["partition_function"] == pytest.approx(math.e)


def test_fit_reports_exponent():
    code, out, _ = invoke("fit", "--p", "2", "--s", "2:6", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert abs(body["exponent"] - 3.0) <= 0.15
    assert body["C_p"] > 0


@pytest.mark.parametrize(
    "argv",
    [
        ("airy",),
        ("airy", "--p", "3", "--bogus"),
        ("nonsense",),
        ("tw", "--p", "3"),
        ("ode", "--p", "8"),
    ],
)
def test_usage_errors_exit_with_two(argv):
    assert invoke(*argv)[0] == 2


def test_nonconvergence_exits_with_three():
    code, _, err = invoke("tw", "--p", "2", "--s", "0", "--truncation", "1")
    assert code == 3
    assert "not converged" in err


def test_ode_trajectory_columns():
    code, out, _ = invoke("ode", "--p", "3", "--n-points", "5")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "s,q,p,u1,v1,I1,I2,I3,residuals"
    assert len(lines) == 6
    code, out, _ = invoke("ode", "--p", "2", "--n-points", "5")
    assert out.splitlines()[0].endswith(",residuals,F")
