import math

import numpy as np
import pytest

from ssprkse.errors import ConfigError, DegenerateMetricError
from ssprkse.grid import VectorField
from ssprkse.harness import cli
from ssprkse.harness.config import describe, load_config, parse_config
from ssprkse.harness.convergence import (ConvergenceRow, check_halving, make_reference, nsteps_for,
                                         run_convergence_study)
from ssprkse.harness.metrics import relative_l2
from ssprkse.harness.scenario import build_periodic_scenario
from ssprkse.harness.snapshots import read_sidecar, read_snapshot, write_snapshot
from ssprkse.harness.stability import StabilityRow, largest_stable, run_stability_probe
from ssprkse.harness.tables import format_value, read_table, write_table
from ssprkse.harness.taylor import (cubic_coefficient, printed_cubic_coefficient, run_taylor_check)
from ssprkse.stepper import Scheme
from ssprkse.tendencies import PhysicalParams


def test_relative_l2_examples():
    rng = np.random.default_rng(0)
    ref = rng.normal(size=(5, 7))
    assert relative_l2(ref, ref) == 0
    assert relative_l2(2 * ref, ref) == pytest.approx(1.0, rel=1e-15)
    pert = ref.copy()
    norm = math.sqrt(sum(x * x for x in ref.ravel()))
    pert[0, 0] += 0.25 * norm
    loop = math.sqrt(sum((a - b) ** 2 for a, b in zip(pert.ravel(), ref.ravel()))) / norm
    assert relative_l2(pert, ref) == pytest.approx(loop, rel=1e-14)
    assert relative_l2(pert, ref) == pytest.approx(0.25, rel=1e-14)
    v = VectorField(ref, ref[:4])
    assert relative_l2(v * 3, v) == pytest.approx(2.0, rel=1e-15)


def test_relative_l2_degenerate():
    with pytest.raises(DegenerateMetricError):
        relative_l2(np.ones(3), np.zeros(3))
    with pytest.raises(ValueError):
        relative_l2(np.ones(3), np.ones(4))


def test_format_style():
    assert format_value(3.632e-4, 3) == "3.632E-04"
    assert format_value(math.nan) == ""
    assert format_value(True) == "true" and format_value(7) == "7"


def test_csv_round_trip():
    rows = [ConvergenceRow(64.0, 16.0, 4, 1.234567890123e-3, math.nan, 2.2e-5, math.nan),
            ConvergenceRow(32.0, 8.0, 4, 1 / 3, 2.0000000001, math.pi * 1e-9, 1.99, "ok"),
            ConvergenceRow(16.0, 4.0, 4, math.nan, math.nan, math.nan, math.nan, "N/A")]
    text = write_table(rows, ConvergenceRow.FIELDS)
    assert text.startswith("dt,dt_btr,M,err_u,rate_u,err_h,rate_h,status\r\n")
    header, back = read_table(text)
    assert header == list(ConvergenceRow.FIELDS)
    for r, b in zip(rows, back):
        for name in ConvergenceRow.FIELDS:
            x, y = getattr(r, name), b[name]
            assert (isinstance(x, float) and math.isnan(x) and math.isnan(y)) or x == y


def test_nsteps_and_halving():
    assert nsteps_for(2048, 16) == 128
    with pytest.raises(ConfigError):
        nsteps_for(2048, 7)
    check_halving([8, 4, 2])
    for bad in ([8, 3], [], [4, -2]):
        with pytest.raises(ConfigError):
            check_halving(bad)


@pytest.fixture(scope="module")
def small():
    return build_periodic_scenario(8, 2, seed=7, T=160.0)


def test_convergence_exact_copy_and_rates(small):
    ref = make_reference(small, 0.5)
    assert ref.self_error < 1e-9
    copy = run_convergence_study(small, Scheme.UNSPLIT, [0.5], reference=ref)
    assert copy[0].err_u < 1e-12 and copy[0].err_h < 1e-12
    rows = run_convergence_study(small, Scheme.SSPRK2_SE, [20, 10, 5], M=2, reference=ref)
    assert math.isnan(rows[0].rate_u)
    for a, b in zip(rows, rows[1:]):
        assert b.err_u * 2 ** b.rate_u == pytest.approx(a.err_u, rel=1e-12)
        assert b.err_h * 2 ** b.rate_h == pytest.approx(a.err_h, rel=1e-12)


def test_convergence_marks_blowups():
    sc = build_periodic_scenario(8, 2, seed=7, T=3200.0)
    rows = run_convergence_study(sc, Scheme.FE_SE, [400, 200, 100, 50], M=1, reference=4.0)
    status = [r.status for r in rows]
    assert status == ["N/A", "N/A", "ok", "ok"]
    assert math.isnan(rows[2].rate_u) and math.isfinite(rows[3].rate_u)
    for prev, r in zip(rows, rows[1:]):
        if prev.status != "ok":
            assert math.isnan(r.rate_u)
    assert all(math.isnan(r.err_u) for r in rows if r.status == "N/A")


def test_convergence_rejects_bad_dts(small):
    with pytest.raises(ConfigError):
        run_convergence_study(small, Scheme.SSPRK2_SE, [20, 7], reference=0.5)


def test_taylor_coefficients():
    assert cubic_coefficient(1) == 0 and printed_cubic_coefficient(1) == 0
    assert cubic_coefficient(2) == pytest.approx(1 / 8) and cubic_coefficient(4) == pytest.approx(5 / 32)


def test_taylor_trivial_data():
    rows = run_taylor_check(PhysicalParams(f=0.0, g=9.81), [100.0, 50.0], 4, G=(0.0, 0.0))
    assert all(r.residual < 1e-15 for r in rows)


def test_taylor_kernel_and_coefficient_paths_agree():
    p = PhysicalParams(f=1e-4)
    a = run_taylor_check(p, [2000.0, 1000.0], 3, use_kernel=True)
    b = run_taylor_check(p, [2000.0, 1000.0], 3, use_kernel=False)
    for x, y in zip(a, b):
        assert x.residual == pytest.approx(y.residual, rel=1e-6, abs=1e-16)


def test_taylor_with_ssh_gradient():
    rows = run_taylor_check(PhysicalParams(f=1e-4), [4000.0, 2000.0, 1000.0], 4, grad_zeta=(1e-6, -2e-6))
    assert min(r.exponent for r in rows[1:]) > 3.7


def test_stability_rows_and_largest():
    rows = [StabilityRow("x", b, b, 1, ok, 1.0, 10, "ok" if ok else "N/A")
            for b, ok in ((4, True), (8, True), (16, False), (32, True))]
    assert largest_stable(rows) == 8
    assert largest_stable(rows[2:3]) == 0


def test_stability_probe_records_na(small):
    rows = run_stability_probe(small, Scheme.SSPRK2_SE, [10, 400], M=1, nsteps=50)
    assert rows[0].bounded and rows[0].status == "ok"
    assert not rows[1].bounded and rows[1].status == "N/A"


def test_config_parse_and_errors(tmp_path):
    cfg = parse_config("[scheme]\nscheme = ssprk3se\ndt = 32\nm = 8\n[grid]\nscenario = periodic\n")
    assert cfg["scheme.scheme"] is Scheme.SSPRK3_SE and cfg.scheme_config().dt_btr == 4
    bad = {"[scheme]\ndt = -4\n": "dt", "[scheme]\nfoo = 1\n": "foo", "[scheme]\ndt = 7\n": "dt",
           "[scheme]\ndts = 8,3\n": "dts", "[nowhere]\nx = 1\n": "nowhere", "[scheme]\nm = x\n": "m"}
    for text, key in bad.items():
        with pytest.raises(ConfigError, match=key):
            parse_config(text)
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("[grid]\n[scheme]\ndt = -1\n")
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.cfg")
    assert "[physics]" in describe() and "t_end" in describe()


def test_snapshot_round_trip(tmp_path, small):
    p = write_snapshot(tmp_path / "s", small.state, step=3)
    back = read_snapshot(p)
    assert read_sidecar(p)["step"] == "3"
    assert np.array_equal(back.stack.h, small.state.stack.h)
    assert np.array_equal(back.stack.u.v, small.state.stack.u.v)
    assert np.array_equal(back.zeta, small.state.zeta) and back.grid == small.grid


PERIODIC = ["--set", "grid.scenario=periodic", "--set", "grid.n=8", "--set", "grid.layers=2",
            "--set", "physics.depth=100"]


def test_cli_run_restart_replays(tmp_path):
    full, part = tmp_path / "full", tmp_path / "part"
    args = PERIODIC + ["--scheme", "ssprk3se", "--dt", "20", "--m", "2", "--t-end", "200",
                       "--snapshot-interval", "5"]
    assert cli.main(["run", *args, "--snapshot-dir", str(full), "-o", str(tmp_path / "a.csv")]) == 0
    assert cli.main(["run", *args, "--snapshot-dir", str(part), "--restart", str(full / "snap_0000005.bin"),
                     "-o", str(tmp_path / "b.csv")]) == 0
    assert (full / "snap_0000010.bin").read_bytes() == (part / "snap_0000010.bin").read_bytes()
    _, a = read_table((tmp_path / "a.csv").read_text())
    _, b = read_table((tmp_path / "b.csv").read_text())
    assert a[-1] == b[-1] and b[0]["step"] == 5


def test_cli_converge_header(tmp_path, capsys):
    out = tmp_path / "c.csv"
    rc = cli.main(["converge", *PERIODIC, "--scheme", "ssprk2se", "--m", "4", "--dts", "40,20,10",
                   "--t-end", "80", "-o", str(out)])
    assert rc == 0
    assert out.read_text().splitlines()[0] == "dt,dt_btr,M,err_u,rate_u,err_h,rate_h,status"


def test_cli_taylor_and_stability(tmp_path):
    assert cli.main(["taylor", "--m", "4", "-o", str(tmp_path / "t.csv")]) == 0
    assert cli.main(["stability", *PERIODIC, "--scheme", "ssprk2se", "--m", "1", "--dt-btrs", "10,400",
                     "--nsteps", "20", "-o", str(tmp_path / "s.csv")]) == 0
    _, rows = read_table((tmp_path / "s.csv").read_text())
    assert [r["status"] for r in rows] == ["ok", "N/A"]


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[grid]\nscenario = periodic\n[scheme]\ndt = -16\n")
    assert cli.main(["run", "-c", str(cfg)]) == 2
    assert "dt" in capsys.readouterr().err
    assert cli.main(["run", "-c", str(tmp_path / "nope.cfg")]) == 2
    assert cli.main(["run", "--set", "scheme.bogus=1"]) == 2
    assert cli.main(["run", *PERIODIC, "--dt", "7", "--t-end", "100"]) == 2
    assert cli.main(["run", *PERIODIC, "--dt", "2000", "--m", "1", "--t-end", "400000",
                     "-o", str(tmp_path / "r.csv")]) == 3
    assert "blow-up" in capsys.readouterr().err
    assert cli.main(["keys"]) == 0


@pytest.mark.parametrize("M", [1, 2, 3, 4, 7, 16])
def test_cubic_coefficient_symbolic(M):
    import sympy
    x = sympy.symbols("x")
    poly = sympy.expand((1 + x / M + x ** 2 / (2 * M ** 2)) ** M)
    c3 = poly.coeff(x, 3)
    assert sympy.Rational(c3) == sympy.Rational(cubic_coefficient(M).numerator, cubic_coefficient(M).denominator)
    # the squared and linear terms match the exponential
    assert poly.coeff(x, 2) == sympy.Rational(1, 2) and poly.coeff(x, 1) == 1
