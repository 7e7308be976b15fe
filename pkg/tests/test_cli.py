import csv
import io
import json

import pytest

from langevin_ldp.cli import run
from langevin_ldp.config import ExperimentConfig
from langevin_ldp.errors import ConfigurationError


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("theta, code", [("0.5", 0), ("1.0", 1), ("0.75", 1)])
def test_preserve_dissipation_assert(theta, code):
    assert call("preserve-dissipation", "--theta", theta, "--eps", "1", "--h", "0.1",
                "--assert")[0] == code


def test_preserve_without_assert_exits_zero():
    assert call("preserve-dissipation", "--theta", "1.0")[0] == 0


def test_degenerate_sigma_exit_3():
    code, _, err = call("sigma", "--scheme", "em", "--nu", "2", "--eps", "1", "--h", "0.01",
                        "--method", "closed")
    assert code == 3
    assert "repeated eigenvalues" in err


def test_bad_arguments_exit_2():
    assert call("sigma", "--scheme", "rk4")[0] == 2
    assert call("nonsense")[0] == 2
    assert call("repro", "thm9.9")[0] == 2
    assert call("laplace", "--param", "stiffness")[0] == 2
    assert call("simulate", "--threads", "0", "--steps", "10000")[0] == 2


def test_unstable_exit_3():
    assert call("sigma", "--nu", "3", "--h", "1.0")[0] == 3


def test_sigma_json():
    code, out, _ = call("sigma", "--nu", "3", "--h", "0.01", "--no-meta")
    assert code == 0
    doc = json.loads(out)
    assert doc["rel_difference"] <= 1e-10
    assert set(doc["closed"]) >= {"sigma", "components", "prefactor", "residual"}
    assert "meta" not in doc


def test_meta_present_by_default():
    doc = json.loads(call("sigma")[1])
    assert "timestamp" in doc["meta"]


def test_byte_identical_runs():
    args = ("simulate", "--steps", "30000", "--chains", "3", "--ball-complement", "0.5",
            "--no-meta")
    a = call(*args, "--threads", "1")[1]
    b = call(*args, "--threads", "3")[1]
    assert a == b


def test_stability_csv():
    code, out, _ = call("stability", "--scheme", "theta", "--theta", "0.5", "--points", "4",
                        "--csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["h", "tr", "det", "re_lambda1", "im_lambda1", "re_lambda2",
                       "im_lambda2", "stable"]
    assert len(rows) == 5
    assert all(r[-1] == "1" for r in rows[1:])


def test_csv_full_precision(tmp_path):
    code, _, _ = call("preserve-small-noise", "--nu", "3", "--out", str(tmp_path), "--no-meta")
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "preserve-small-noise.csv")))
    assert rows[0] == ["h_or_nu", "point_p", "point_q", "rate_value", "target", "abs_error"]
    value = rows[1][3]
    assert float(value) == float(format(float(value), ".17g"))
    assert json.load(open(tmp_path / "preserve-small-noise.json"))["verdict"] is True


def test_out_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("LANGEVIN_LDP_OUT", str(tmp_path))
    assert call("laplace", "--potential", "shifted_quartic", "--no-meta")[0] == 0
    rows = list(csv.reader(open(tmp_path / "laplace.csv")))
    assert rows[0] == ["nu", "value", "Z0", "abs_error"]


def test_decay_command():
    code, out, _ = call("decay", "--ball-complement", "1", "--samples", "500000", "--assert",
                        "--no-meta")
    assert code == 0
    doc = json.loads(out)
    assert doc["target"] == -3.0
    assert {"slope", "target", "rel_error"} <= set(doc)


def test_decay_needs_one_set():
    assert call("decay")[0] == 2


def test_rate_command():
    doc = json.loads(call("rate", "--limit", "dissipation", "--theta", "1", "--point", "0.1",
                          "0", "--point", "0", "2", "--no-meta")[1])
    assert doc["values"][0]["rate"] == "inf"
    assert doc["values"][1]["rate"] == pytest.approx(4.0)


def test_repro_tables():
    code, out, _ = call("repro", "thm5.3-dissipation")
    assert code == 0
    for label in ("pass-preserves", "pass-fails-to-preserve"):
        assert label in out
    code, out, _ = call("repro", "lemma3.1-laplace", "--assert")
    assert code == 0
    assert "quadratic" in out


def test_config_round_trip(tmp_path):
    path = tmp_path / "run.json"
    code, first, _ = call("preserve-small-noise", "--nu", "10", "--tol", "0.001",
                          "--save-config", str(path), "--no-meta")
    assert code == 0
    cfg = ExperimentConfig.load(path)
    assert cfg.params["nu"] == 10.0
    assert ExperimentConfig.loads(cfg.dumps()) == cfg
    code, second, _ = call("preserve-small-noise", "--config", str(path), "--no-meta")
    assert second == first


def test_config_flags_override(tmp_path):
    path = tmp_path / "run.json"
    ExperimentConfig("sigma", {"nu": 5.0, "h": 0.02}).save(path)
    doc = json.loads(call("sigma", "--config", str(path), "--h", "0.05", "--no-meta")[1])
    assert doc["config"]["nu"] == 5.0
    assert doc["config"]["h"] == 0.05


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.json"
    ExperimentConfig("sigma", {"nu": 5.0, "colour": "red"}).save(path)
    code, _, err = call("sigma", "--config", str(path))
    assert code == 2
    assert "colour" in err
    with pytest.raises(ConfigurationError):
        ExperimentConfig.loads('{"command": "sigma", "extra": 1}')
    path.write_text('{"command": "laplace", "params": {}}')
    assert call("sigma", "--config", str(path))[0] == 2
