import math

import pytest

from isinginfer import ChainConfig, InvalidParameterError
from isinginfer.harness import (
    fit_rates,
    make_ensemble,
    regular_degree,
    run_errorbars,
    run_partition,
    run_power_heatmap,
    RateRow,
)


def test_make_ensemble_kinds():
    assert make_ensemble("cw", 10).kind == "curie_weiss"
    er = make_ensemble("er", 64, seed=3)
    assert er == make_ensemble("er", 64, seed=3)
    assert er.kind == "er_scaled"
    reg = make_ensemble("regular", 100)
    assert reg.kind == "regular_scaled" and regular_degree(100) == 10
    assert make_ensemble("block", 16).kind == "block"
    with pytest.raises(InvalidParameterError):
        make_ensemble("torus", 10)


def test_fit_rates_recovers_slope():
    rows = [RateRow("x", n, 1.0, 1.0, 3.0 * n ** -0.5, 0.0, 10, 10, 0, 0, 0) for n in (100, 400, 1600)]
    (fit,) = fit_rates(rows)
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.sd_ratio == pytest.approx(4.0)


def test_errorbars_sd_over_interior_only():
    rows, _ = run_errorbars("cw", [12], [0.2], reps=100, seed=1)
    (r,) = rows
    assert r.interior + r.boundary_zero + r.infinite + r.degenerate == 100
    assert r.noninterior_fraction == pytest.approx(1 - r.interior / 100)
    assert r.boundary_zero > 0 and math.isfinite(r.sd_beta_hat)


def test_partition_rows_sorted():
    reps = run_partition("cw", 8, [0.5, 0.1, 0.3])
    assert [r.beta for r in reps] == [0.1, 0.3, 0.5]
    assert all(r.sandwich_ok() for r in reps)


def test_power_heatmap_examples():
    rows = run_power_heatmap(300, [0.3, 0.6, 1.0], [0.0, 0.5, 2.5, 5.0], reps=200, alpha=0.05,
                             seed=0, cfg=ChainConfig(burn_in_sweeps=100))
    for r in rows:
        bp = r.beta * r.p
        if r.beta == 0:
            assert abs(r.power - 0.05) <= 0.05
        if bp > 1.3:
            assert r.power >= 0.9
        if bp <= 0.5:
            assert r.power <= 0.5


@pytest.mark.slow
def test_block_ensemble_rates():
    rows, fits = run_errorbars("block", [256, 1024], [1.5, 2.5], reps=200, seed=0)
    ratio = {f.beta: f.sd_ratio for f in fits}
    assert 1.41 * 0.65 <= ratio[1.5] <= 1.41 * 1.35
    assert 2.0 * 0.65 <= ratio[2.5] <= 2.0 * 1.35
