import csv
import json
import math

import numpy as np
import pytest

from zfnet.cli import ExperimentConfig, ConfigError, build_parser, local_slopes, main, resolve_config
from zfnet.network import sample_cloud
from zfnet.sphere import PointCloud, generate, save_points


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_coeffs(tmp_path):
    assert main(["coeffs", "--out", str(tmp_path), "--L", "60"]) == 0
    rows = read_csv(tmp_path / "coeffs.csv")
    assert len(rows) == 61
    assert float(rows[0]["phi_hat"]) == pytest.approx(2 * math.pi, abs=1e-12)
    assert max(float(r["rel_gap"]) for r in rows) < 1e-9
    slopes = [float(r["slope"]) for r in rows[20:61]]
    assert all(abs(s + 2.5) < 0.05 for s in slopes)
    meta = json.loads((tmp_path / "coeffs.csv.meta.json").read_text())
    assert meta["config"]["smoothness"] == 7 and "OMP_NUM_THREADS" in meta["threads"]


def test_local_slopes_power_law():
    v = np.arange(1, 30, dtype=float) ** -3.0
    v = np.concatenate([[1.0], v])
    s = local_slopes(v)
    assert math.isnan(s[0]) and np.allclose(s[3:-1], -3.0, atol=0.05)


def test_quadrature_fibonacci(tmp_path):
    pts = tmp_path / "p.csv"
    save_points(pts, generate(2, "fibonacci-s2", 400))
    assert main(["quadrature", str(pts), "--search", "--tol", "1e-8", "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "quadrature.json").read_text())
    assert d["order"] >= 12 and d["residual"] < 1e-8
    assert {"weights", "weight_sum", "min_weight", "condition", "regularity"} <= set(d)
    assert set(d["regularity"]) == {"d", "value"}


def test_quadrature_single_point(tmp_path):
    pts = tmp_path / "one.csv"
    pts.write_text("0,0,1\n")
    assert main(["quadrature", str(pts), "--search", "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "quadrature.json").read_text())
    assert d["order"] == 0 and d["weights"] == [pytest.approx(4 * math.pi, abs=1e-12)]


def test_quadrature_infeasible(tmp_path, capsys):
    pts = tmp_path / "p.csv"
    save_points(pts, generate(2, "fibonacci-s2", 10))
    assert main(["quadrature", str(pts), "--order", "12", "--out", str(tmp_path)]) == 2
    assert "residual" in capsys.readouterr().err


def test_parse_error_names_line(tmp_path, capsys):
    pts = tmp_path / "bad.csv"
    pts.write_text("0,0,1\n0,oops,1\n")
    assert main(["quadrature", str(pts), "--order", "1", "--out", str(tmp_path)]) == 3
    assert "bad.csv:2" in capsys.readouterr().err


def test_build_constant_and_determinism(tmp_path):
    args = ["build", "--target", "constant", "--N", "8", "--out", str(tmp_path)]
    assert main(args) == 0
    rows = read_csv(tmp_path / "errors.csv")
    assert len(rows) == 20000 and list(rows[0]) == ["index", "f", "G", "abs_error"]
    assert max(float(r["abs_error"]) for r in rows) <= 0.05
    first = (tmp_path / "network.json").read_bytes(), (tmp_path / "errors.csv").read_bytes()
    assert main(args) == 0
    assert first == ((tmp_path / "network.json").read_bytes(), (tmp_path / "errors.csv").read_bytes())
    net = json.loads(first[0])
    assert {"mu_residual", "nu_residual"} <= set(net["build"])


def test_build_uneven_samples(tmp_path, capsys):
    pts = sample_cloud(16).points
    upper = pts[pts[:, 2] > 0]
    f = tmp_path / "s.csv"
    np.savetxt(f, np.column_stack([upper, upper[:, 2]]), delimiter=",")
    assert main(["build", "--samples", str(f), "--N", "4", "--out", str(tmp_path)]) == 0
    assert "warning" in capsys.readouterr().err
    net = json.loads((tmp_path / "network.json").read_text())
    assert any("antipodal" in n for n in net["build"]["notes"])


def test_build_with_centers(tmp_path):
    c = tmp_path / "c.csv"
    save_points(c, PointCloud(sample_cloud(16).points))
    assert main(["build", "--target", "cosh", "--N", "4", "--centers", str(c), "--out", str(tmp_path)]) == 0


def test_rate_study(tmp_path):
    assert main(["rate-study", "--levels", "1,2,3", "--grid-size", "5000", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "rate.csv")
    assert list(rows[0]) == ["n", "error", "l1", "ratio"]
    ratios = [float(r["ratio"]) for r in rows[1:]]
    assert math.exp(np.mean(np.log(ratios))) <= 0.35


def test_kernel_profile(tmp_path):
    assert main(["kernel-profile", "--n", "32", "--theta-points", "401", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "profile.csv")
    v = np.array([float(r["tilted_band"]) for r in rows])
    assert len(rows) == 401 and np.allclose(v, v[::-1], atol=1e-12 * np.abs(v).max())


def test_rotate_check(tmp_path):
    assert main(["rotate-check", "--N", "4", "--trials", "3", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "rotation.csv")
    assert [int(r["trial"]) for r in rows] == [0, 1, 2]
    assert max(float(r["deviation"]) for r in rows) <= 1e-9


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma": 0.25, "q": 3, "L": 10}))
    args = build_parser().parse_args(["coeffs", "--config", str(cfg), "--gamma", "1.0"])
    c = resolve_config(args)
    assert c.gamma == 1.0 and c.q == 3 and c.L == 10 and c.smoothness == 8


def test_config_errors(tmp_path):
    assert main(["coeffs", "--gamma", "0.5", "--out", str(tmp_path)]) == 3
    assert main(["coeffs", "--smoothness", "3", "--out", str(tmp_path)]) == 3
    bad = tmp_path / "cfg.json"
    bad.write_text('{"colour": 1}')
    assert main(["coeffs", "--config", str(bad), "--out", str(tmp_path)]) == 3
    with pytest.raises(SystemExit) as e:
        main(["coeffs", "--q", "two"])
    assert e.value.code == 3


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(seed=None).validate()
    assert ExperimentConfig(q=4).smoothness == 9
