import io
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from upwind_sbp.errors import InvalidArgumentError, UnsupportedOrderError
from upwind_sbp.sbp import (
    _flux_rows,
    _p3_rows,
    build_grid,
    build_upwind_pair,
    export_pair,
    row_exactness,
    verify_sbp,
    write_sparse_csv,
)


def test_grid_spacing_and_endpoints():
    g = build_grid(11, -1.0, 1.0)
    assert g.h == pytest.approx(0.2)
    assert g.points[0] == -1.0 and g.points[-1] == 1.0
    with pytest.raises(InvalidArgumentError):
        build_grid(1)
    with pytest.raises(InvalidArgumentError):
        build_grid(10, 1.0, 1.0)


@given(p=st.sampled_from([3, 4]), n=st.integers(12, 90))
def test_sbp_identity_and_dissipation(p, n):
    pair = build_upwind_pair(p, build_grid(n))
    report = verify_sbp(pair)
    assert report.sbp_residual < 1e-12
    assert report.qm_min_eig >= -1e-12


@pytest.mark.parametrize("p", [3, 4])
def test_plus_operator_mirrors_minus_operator(p):
    pair = build_upwind_pair(p, build_grid(25))
    J = np.eye(25)[::-1]
    np.testing.assert_allclose(pair.Dp, -J @ pair.Dm @ J, atol=1e-12)


@pytest.mark.parametrize("p", [3, 4])
def test_norm_integrates_constants_exactly(p):
    pair = build_upwind_pair(p, build_grid(33, 0.0, 2.0))
    assert pair.norm_weights.sum() == pytest.approx(2.0, abs=1e-14)


def test_third_order_rows_match_flux_construction():
    # two independent routes to the same operator
    n = 20
    np.testing.assert_allclose(_p3_rows(n), _flux_rows(3, n), atol=1e-14)


def test_third_order_boundary_rows_are_exact_fractions():
    # oracle: flux differences over the exact cell widths
    w = [Fr(5, 12), Fr(13, 12)]
    f = [{1: Fr(1)}, {1: Fr(7, 12), 2: Fr(5, 12)}, {1: Fr(-1, 6), 2: Fr(5, 6), 3: Fr(1, 3)}]

    def row(i):
        out = {}
        for key, c in f[i + 1].items():
            out[key] = out.get(key, 0) + c
        for key, c in f[i].items():
            out[key] = out.get(key, 0) - c
        return [out.get(j, 0) / w[i] for j in range(1, 4)]

    assert row(0) == [-1, 1, 0]
    assert row(1) == [Fr(-9, 13), Fr(5, 13), Fr(4, 13)]
    D = _p3_rows(10)
    np.testing.assert_allclose(D[:2, :3], np.array(row(0) + row(1), dtype=float).reshape(2, 3), atol=1e-15)


@pytest.mark.parametrize("p,boundary,interior", [(3, 1, 3), (4, 2, 4)])
def test_row_accuracy(p, boundary, interior):
    n = 40
    pair = build_upwind_pair(p, build_grid(n))
    orders = verify_sbp(pair).row_orders
    edge = 2 if p == 3 else 4
    assert orders[:edge].min() == boundary and orders[-edge:].min() == boundary
    assert orders[edge:-edge].min() == interior


@given(p=st.sampled_from([3, 4]), k=st.integers(0, 2), n=st.integers(12, 60))
def test_monomials_differentiated_exactly_up_to_boundary_order(p, k, n):
    pair = build_upwind_pair(p, build_grid(n))
    x = pair.grid.points
    if k > pair.b:
        return
    exact = k * x ** (k - 1) if k else np.zeros(n)
    assert np.max(np.abs(pair.Dm @ x**k - exact)) < 1e-10
    assert np.max(np.abs(pair.Dp @ x**k - exact)) < 1e-10


def test_row_exactness_detects_inexact_rows():
    D = np.array([[-1.0, 1.0, 0.0], [-0.5, 0.0, 0.5], [0.0, -1.0, 1.0]])
    np.testing.assert_array_equal(row_exactness(D, 1.0), [1, 2, 1])


def test_unsupported_order_and_small_grids():
    with pytest.raises(UnsupportedOrderError):
        build_upwind_pair(2, build_grid(20))
    with pytest.raises(InvalidArgumentError):
        build_upwind_pair(4, build_grid(11))


def test_operators_are_read_only():
    pair = build_upwind_pair(3, build_grid(12))
    with pytest.raises(ValueError):
        pair.Dm[0, 0] = 1.0


def test_sparse_csv_export(tmp_path):
    pair = build_upwind_pair(3, build_grid(10))
    buf = io.StringIO()
    write_sparse_csv(pair.H, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "row,col,value"
    assert len(lines) == 11
    r, c, v = lines[1].split(",")
    assert (int(r), int(c)) == (0, 0) and float(v) == pytest.approx(5 / 12 / 9)
    paths = export_pair(pair, tmp_path)
    assert sorted(p.name for p in paths) == ["Dm_p3_n10.csv", "Dp_p3_n10.csv", "H_p3_n10.csv"]
    data = np.loadtxt(paths[0], delimiter=",", skiprows=1)
    dense = np.zeros((10, 10))
    dense[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2]
    np.testing.assert_array_equal(dense, pair.Dm)
