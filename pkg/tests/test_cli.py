import json

import numpy as np
import pytest

from smoothdisc import cli, io
from smoothdisc.errors import NonconvergenceError
from smoothdisc.pointsets import WeightedPointSet


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def zero_set(tmp_path):
    path = tmp_path / "zero.csv"
    io.write_pointset(WeightedPointSet([[0.1, 0.2], [0.6, 0.7]], [0.0, 0.0]), path)
    return path


def test_gen_fibonacci(tmp_path, capsys):
    out = tmp_path / "fib.csv"
    code, _, _ = run(capsys, "gen", "fibonacci", "--n", 10, "--out", out)
    assert code == 0
    ps = io.read_pointset(out)
    assert ps.m == 55
    side = json.loads((tmp_path / "fib.csv.json").read_text())
    assert "config_hash" in side["meta"]


def test_gen_twice_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "gen", "random", "--m", 100, "--d", 2, "--seed", 7, "--out", a)
    run(capsys, "gen", "random", "--m", 100, "--d", 2, "--seed", 7, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.json").read_bytes() == (tmp_path / "b.csv.json").read_bytes()


def test_gen_argument_errors(capsys):
    assert run(capsys, "gen", "frolov", "--d", 2, "--a", 0.5)[0] == 2
    assert run(capsys, "gen", "fibonacci")[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["gen", "nonsense"])
    assert exc.value.code == 2


def test_disc_zero_weights(zero_set, capsys):
    code, out, _ = run(capsys, "disc", zero_set, "--mode", "periodic", "--v", 0.25, "--z-grid", 8, "--u-samples", 2)
    assert code == 0
    rep = json.loads(out)
    assert rep["value"] == pytest.approx(0.0625, abs=1e-15)
    assert "config_hash" in rep and rep["seed"] == 0


def test_disc_reproducible(tmp_path, capsys):
    path = tmp_path / "f.csv"
    run(capsys, "gen", "fibonacci", "--n", 8, "--out", path)
    argv = ("disc", path, "--v", 0.25, "--z-grid", 16, "--u-samples", 4, "--refine-iters", 3)
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_disc_star_three_points(tmp_path, capsys):
    path = tmp_path / "t.csv"
    io.write_pointset(WeightedPointSet([[0.25, 0.5], [0.5, 0.25], [0.75, 0.75]], [1 / 3] * 3), path)
    code, out, _ = run(capsys, "disc", path, "--mode", "star")
    assert code == 0
    # the closed box [0, 0.75]^2 holds all three points: 1 - 9/16
    assert json.loads(out)["value"] == pytest.approx(7 / 16, abs=1e-12)
    assert json.loads(out)["value"] == pytest.approx(_star_oracle([[0.25, 0.5], [0.5, 0.25], [0.75, 0.75]]), abs=1e-12)


def _star_oracle(pts):
    """Local discrepancy of open and closed anchored boxes on the coordinate grid."""
    pts = np.array(pts)
    grid = [sorted(set(pts[:, j]) | {1.0}) for j in range(2)]
    best = 0.0
    for b0 in grid[0]:
        for b1 in grid[1]:
            vol = b0 * b1
            open_ = np.mean((pts[:, 0] < b0) & (pts[:, 1] < b1))
            closed = np.mean((pts[:, 0] <= b0) & (pts[:, 1] <= b1))
            best = max(best, vol - open_, closed - vol)
    return best


def test_disc_needs_volume(zero_set, capsys):
    code, _, err = run(capsys, "disc", zero_set, "--mode", "periodic")
    assert code == 2 and "volume" in err


def test_disc_missing_file(tmp_path, capsys):
    assert run(capsys, "disc", tmp_path / "missing.csv", "--mode", "star")[0] == 2


def test_disp(tmp_path, capsys):
    path = tmp_path / "f.csv"
    run(capsys, "gen", "fibonacci", "--n", 8, "--out", path)
    code, out, _ = run(capsys, "disp", path)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "n,disp,n_disp"
    assert lines[2].startswith("21,")


def test_disp_resource_cap(tmp_path, capsys):
    path = tmp_path / "big.csv"
    run(capsys, "gen", "random", "--m", 600, "--d", 2, "--out", path)
    code, _, err = run(capsys, "disp", path)
    assert code == 3 and "cap" in err


def test_rates_zero_family(tmp_path, capsys):
    cfg = tmp_path / "rates.cfg"
    cfg.write_text("# zero weights\nkind=fibonacci\nn=5,6,7\nmode=periodic\nv=0.25\nweights=zero\nz_grid=8\nu_samples=2\nrefine_iters=0\n")
    code, out, _ = run(capsys, "rates", cfg)
    assert code == 0
    assert "# slope=0" in out
    rows = [l for l in out.splitlines() if l and not l.startswith("#")][1:]
    assert [float(l.split(",")[1]) for l in rows] == [0.0625] * 3


def test_rates_star_fibonacci(tmp_path, capsys):
    cfg = tmp_path / "rates.cfg"
    cfg.write_text("kind=fibonacci\nn=10,11,12,13,14,15\nmode=star\n")
    code, out, _ = run(capsys, "rates", cfg)
    assert code == 0
    slope = float(next(l for l in out.splitlines() if l.startswith("# slope=")).split("=")[1])
    assert slope <= -0.8


def test_rates_partial_output_on_failure(tmp_path, capsys, monkeypatch):
    import smoothdisc.harness as harness

    real = harness.measure

    def flaky(ps, mode, **kw):
        if ps.m == 21:
            raise NonconvergenceError("forced failure")
        return real(ps, mode, **kw)

    monkeypatch.setattr(harness, "measure", flaky)
    cfg = tmp_path / "rates.cfg"
    cfg.write_text("kind=fibonacci\nn=5,6,8\nmode=star\n")
    code, out, err = run(capsys, "rates", cfg)
    assert code == 4 and "forced failure" in err
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert body[0] == "m,value" and [l.split(",")[0] for l in body[1:]] == ["5", "8"]


def test_rates_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kind=fibonacci\nthis line is broken\n")
    code, _, err = run(capsys, "rates", cfg)
    assert code == 2 and ":2:" in err
    cfg.write_text("kind=hexagonal\n")
    assert run(capsys, "rates", cfg)[0] == 2


def test_verify_lattice(capsys):
    code, out, _ = run(capsys, "verify-lattice", "--d", 2, "--a", 8, "--M", 50, "--boxes", 100)
    assert code == 0
    rep = json.loads(out)
    assert rep["pass"] and rep["norm_form_min"] >= 1 - 1e-6
    assert run(capsys, "verify-lattice", "--d", 7, "--a", 8)[0] == 2


def test_fixed_volume_curve_cli(tmp_path, capsys):
    path = tmp_path / "p.csv"
    run(capsys, "gen", "frolov-periodized", "--d", 2, "--a", 4, "--out", path)
    argv = ("fixed-volume-curve", path, "--steps", 1, "--z-grid", 8, "--u-samples", 2, "--refine-iters", 0)
    code, out, _ = run(capsys, *argv)
    assert code == 0
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert body[0] == "j,v,value,ratio" and len(body) == 2
    assert out == run(capsys, *argv)[1]


def test_weights_cli(tmp_path, capsys):
    path = tmp_path / "f.csv"
    wout = tmp_path / "w.csv"
    run(capsys, "gen", "fibonacci", "--n", 6, "--out", path)
    code, out, _ = run(capsys, "weights", path, "--v", 0.25, "--z-grid", 6, "--u-samples", 2, "--weights-out", wout)
    assert code == 0
    rep = json.loads(out)
    assert rep["constraints"] == 72
    assert rep["lp_objective"] <= rep["equal_objective"] + 1e-12
    assert io.read_pointset(wout).m == 8


def test_numerical_failure_exit_code(zero_set, capsys, monkeypatch):
    def boom(ps, cap=None):
        raise NonconvergenceError("did not converge")

    monkeypatch.setattr(cli, "star_discrepancy_exact", boom)
    code, _, err = run(capsys, "disc", zero_set, "--mode", "star")
    assert code == 4 and "did not converge" in err


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "smoothdisc", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify-lattice" in res.stdout
