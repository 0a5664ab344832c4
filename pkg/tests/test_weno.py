import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from upwind_sbp.errors import InvalidArgumentError
from upwind_sbp.sbp import build_grid, build_upwind_pair
from upwind_sbp.weno import WenoOperator, apply_dmw, build_flux_grid, dmw_matrix, nonlinear_weights


def test_flux_grid_near_boundaries():
    g = build_grid(13)
    fg = build_flux_grid(3, g)
    assert fg.locations[0] == 0.0 and fg.locations[-1] == pytest.approx(1.0)
    assert fg.locations[1] == pytest.approx(5 / 144)
    assert fg.spacings[1] == pytest.approx(13 / 144)
    assert fg.spacings[5] == pytest.approx(1 / 12)
    fg4 = build_flux_grid(4, build_grid(21))
    assert fg4.locations[2] == pytest.approx(29 / 18 / 20)
    assert fg4.spacings.sum() == pytest.approx(1.0)


def test_interior_weights_for_one_sided_jump():
    # hand evaluation: beta = (0, 1), tau = 1, alpha = (1/3 * 101, 2/3 * 2/1.01)
    u = np.zeros(20)
    u[10] = 1.0
    data = WenoOperator(3, build_grid(20), epsilon=0.01).smoothness(u)
    np.testing.assert_allclose(data.beta[10, :2], [0.0, 1.0])
    assert data.tau[10] == 1.0
    alpha = np.array([101 / 3, 2 / 3 * (1 + 1 / 1.01)])
    np.testing.assert_allclose(alpha, [33.667, 1.3267], atol=1e-3)
    np.testing.assert_allclose(data.weights[10, :2], alpha / alpha.sum(), rtol=1e-14)
    np.testing.assert_allclose(data.weights[10, :2], [0.9621, 0.0379], atol=1e-4)


@pytest.mark.parametrize("p", [3, 4])
def test_linear_data_keeps_linear_interior_weights(p):
    g = build_grid(30)
    op = WenoOperator(p, g)
    w = op.weights(3.0 * g.points - 1.0)
    edge = 4
    np.testing.assert_allclose(w[edge:-edge], op.table.linear_weights[edge:-edge], atol=1e-12)


@pytest.mark.parametrize("p", [3, 4])
@pytest.mark.parametrize("n", [12, 25, 64])
def test_linear_mode_is_the_linear_operator(p, n):
    g = build_grid(n)
    Dm = build_upwind_pair(p, g).Dm
    np.testing.assert_allclose(dmw_matrix(p, g, np.zeros(n), linear=True), Dm, atol=1e-13 / g.h)
    u = np.random.default_rng(n).normal(size=n)
    np.testing.assert_allclose(apply_dmw(p, g, u, linear=True), Dm @ u, atol=1e-12 / g.h)


@settings(max_examples=60)
@given(p=st.sampled_from([3, 4]), u=arrays(np.float64, 24, elements=st.floats(-1e3, 1e3)))
def test_weights_stay_on_the_simplex(p, u):
    w = nonlinear_weights(p, build_grid(24), u).weights
    assert np.all(w >= 0.0)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-14)


@pytest.mark.parametrize("p", [3, 4])
def test_linear_functions_differentiated_exactly(p):
    g = build_grid(40)
    for u, du in ((np.full(40, 2.0), 0.0), (g.points, 1.0)):
        np.testing.assert_allclose(apply_dmw(p, g, u), du, atol=1e-10)


@pytest.mark.parametrize("p", [3, 4])
def test_rows_annihilate_constants_at_any_state(p):
    g = build_grid(30)
    u = np.where(g.points < 0.4, 1.0, -0.5)
    np.testing.assert_allclose(dmw_matrix(p, g, u).sum(axis=1), 0.0, atol=1e-10)


@given(p=st.sampled_from([3, 4]), seed=st.integers(0, 2**31))
def test_conservation_telescopes_to_the_boundary_values(p, seed):
    g = build_grid(30)
    op = WenoOperator(p, g)
    u = np.random.default_rng(seed).uniform(-1, 1, 30)
    assert op.cell_widths @ op.apply(u) == pytest.approx(u[-1] - u[0], abs=1e-12)


def test_step_data_bounded_and_nonnegative_weights():
    g = build_grid(51)
    u = np.where(g.points < 0.5, 1.0, 0.0)
    for p in (3, 4):
        out = apply_dmw(p, g, u)
        assert np.all(np.isfinite(out))
        w = nonlinear_weights(p, g, u).weights
        assert w.min() >= 0.0


def test_smooth_weights_approach_linear_weights_for_fourth_order():
    deviations, hs = [], []
    for n in (41, 81, 161, 321):
        g = build_grid(n)
        op = WenoOperator(4, g)
        w = op.weights(np.sin(2 * np.pi * g.points))
        dev = np.abs(w - op.table.linear_weights)[6:-6]
        deviations.append(dev.max())
        hs.append(g.h)
    slope = np.polyfit(np.log(hs), np.log(deviations), 1)[0]
    assert slope >= 3.5


def test_smooth_state_matrix_approaches_linear_operator():
    gaps = []
    for n in (41, 81, 161):
        g = build_grid(n)
        u = np.sin(2 * np.pi * g.points + 1.0)
        gaps.append(np.max(np.abs(g.h * (dmw_matrix(4, g, u) - build_upwind_pair(4, g).Dm))))
    assert gaps[0] > gaps[1] > gaps[2]


def test_linear_flux_decomposition():
    g = build_grid(20)
    op = WenoOperator(4, g)
    u = np.cos(g.points)
    for i in range(21):
        value, parts = op.linear_flux(u, i)
        assert sum(d for d, _ in parts) == pytest.approx(1.0)
        assert value == pytest.approx(op.fluxes(u, linear=True)[i], abs=1e-14)
    with pytest.raises(InvalidArgumentError):
        op.linear_flux(u, 21)


def test_invalid_inputs():
    g = build_grid(20)
    with pytest.raises(InvalidArgumentError):
        WenoOperator(3, g, epsilon=0.0)
    op = WenoOperator(3, g)
    with pytest.raises(InvalidArgumentError):
        op.apply(np.zeros(19))
    with pytest.raises(InvalidArgumentError):
        op.apply(np.full(20, np.nan))


def test_debug_csv_columns():
    g = build_grid(12)
    buf = io.StringIO()
    WenoOperator(3, g).write_debug_csv(np.arange(12.0) ** 2, buf)
    rows = [line.split(",") for line in buf.getvalue().splitlines()]
    assert rows[0] == ["flux", "location", "beta1", "beta2", "beta3", "tau", "w1", "w2", "w3"]
    assert len(rows) == 14
    # unused third candidate is left blank for p=3
    assert all(r[4] == "" and r[8] == "" for r in rows[1:])
