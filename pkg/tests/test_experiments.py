import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrecec.experiments import (CSV_COLUMNS, PointResult, SlopeFitError, SweepError, SweepSpec,
                                emit_csv, fit_slope, read_csv, run_sweep, scale_specs,
                                threshold_specs, zsweep_specs)


def test_quadratic_and_linear_slopes():
    xs = [1e-3, 2e-3, 5e-3, 1e-2]
    f = fit_slope([(x, x * x) for x in xs])
    assert f.slope == pytest.approx(2.0) and f.r2 == pytest.approx(1.0)
    assert fit_slope([(x, x) for x in xs]).slope == pytest.approx(1.0)


def test_fit_rejects_short_or_narrow_data():
    with pytest.raises(SlopeFitError, match="3 usable"):
        fit_slope([(1e-3, 1e-6), (1e-2, 1e-4)])
    with pytest.raises(SlopeFitError, match="decade"):
        fit_slope([(1e-3, 1e-6), (2e-3, 4e-6), (5e-3, 2.5e-5)])
    with pytest.raises(SlopeFitError):
        fit_slope([(1e-3, 0.0), (1e-2, 0.0), (1e-1, 0.0)])


@given(st.floats(0.01, 100), st.lists(st.floats(-0.2, 0.2), min_size=4, max_size=4))
def test_slope_invariant_under_x_rescaling(scale, noise):
    xs = np.array([1e-3, 3e-3, 1e-2, 3e-2])
    ys = xs**2 * np.exp(noise)
    a = fit_slope(zip(xs, ys))
    b = fit_slope(zip(xs * scale, ys))
    assert b.slope == pytest.approx(a.slope, abs=1e-9)
    assert b.intercept == pytest.approx(a.intercept - a.slope * np.log10(scale), abs=1e-9)


def row(v, mode):
    return PointResult("F_2q", v, mode, 10, 0.1 + v / 3, 1 / 7, 0.0123456789, 0.0, v > 0.5)


def test_csv_header_only_for_empty(tmp_path):
    p = tmp_path / "e.csv"
    emit_csv([], p)
    assert p.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_csv_round_trip_is_exact(tmp_path):
    rows = [row(v, m) for v in (0.3, 0.6, 0.9) for m in ("cec", "none")]
    p = tmp_path / "r.csv"
    emit_csv(rows, p)
    assert len(p.read_text().splitlines()) == 7
    back = read_csv(p)
    assert [(r.sweep_var, r.value, r.mode, r.runs, r.mean_fidelity, r.stderr_fidelity,
             r.mean_latency_s, r.failure_rate, r.slope_eligible) for r in back] == \
           [(r.sweep_var, r.value, r.mode, r.runs, r.mean_fidelity, r.stderr_fidelity,
             r.mean_latency_s, r.failure_rate, r.slope_eligible) for r in rows]


def test_csv_io_error_names_path(tmp_path):
    with pytest.raises(OSError, match="nope"):
        emit_csv([], tmp_path / "nope" / "x.csv")


@pytest.mark.parametrize("kwargs, fragment", [
    (dict(kind="single_param", grid=(), variable="F_2q"), "empty"),
    (dict(kind="single_param", grid=(0.9, 0.8), variable="F_2q"), "sorted"),
    (dict(kind="single_param", grid=(0.9,), variable="F_9q"), "unknown"),
    (dict(kind="single_param", grid=(0.9,), variable="F_2q", runs=0), "runs"),
    (dict(kind="distance", grid=(30.0,), link_km=20.0), "whole number"),
    (dict(kind="z", grid=(0.5,), modes=("maybe",)), "modes"),
    (dict(kind="warp", grid=(1.0,)), "kind"),
])
def test_invalid_specs(kwargs, fragment):
    with pytest.raises((SweepError, ValueError), match=fragment):
        SweepSpec(**kwargs)


def test_perfect_point_has_no_variance():
    spec = SweepSpec("single_param", (1.0,), variable="F_2q", n_links=1, runs=30)
    (r,) = run_sweep(spec)
    assert r.mean_fidelity == 1.0 and r.stderr_fidelity == 0.0 and not r.slope_eligible


def test_single_param_zeroes_other_noise():
    spec = SweepSpec("single_param", (0.99,), variable="F_m")
    _, prof = spec.point(0.99)
    assert prof.F_m == 0.99 and prof.F_2q == 1.0 and prof.F_phys == 1.0
    assert np.isinf(prof.T2)


def test_sweep_is_reproducible_and_parallel_safe(tmp_path):
    spec = SweepSpec("z", (0.0, 0.5), n_links=2, runs=24, seed=5, modes=("cec", "none"))
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    run_sweep(spec, out=a)
    run_sweep(spec, out=b)
    run_sweep(spec, jobs=2, out=c)
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    rows = read_csv(a)
    assert [(r.value, r.mode) for r in rows] == [(0.0, "cec"), (0.0, "none"), (0.5, "cec"),
                                                 (0.5, "none")]
    # matched seeds: latency does not depend on the mode
    assert rows[0].mean_latency_s == rows[1].mean_latency_s


def test_stderr_scales_with_inverse_sqrt_runs():
    small = run_sweep(SweepSpec("z", (0.0,), n_links=1, runs=500, seed=1))[0]
    big = run_sweep(SweepSpec("z", (0.0,), n_links=1, runs=2000, seed=2))[0]
    assert 0.8 <= (small.stderr_fidelity / big.stderr_fidelity) / 2.0 <= 1.2


def test_bundles_build():
    assert {s.variable for s in threshold_specs(10, 0)} >= {"F_2q", "F_m", "F_phys"}
    assert [s.n_links for s in zsweep_specs(10, 0)] == [1, 2, 5]
    kinds = [s.kind for s in scale_specs(10, 0)]
    assert kinds == ["num_links", "distance"]
    for spec in threshold_specs(10, 0):
        span = (1 - spec.grid[0]) / (1 - spec.grid[-1])
        assert len(spec.grid) >= 5 and span >= 10 - 1e-9
