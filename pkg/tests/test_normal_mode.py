import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from upwind_sbp.errors import DegenerateParametersError, InvalidArgumentError, UnsupportedOrderError
from upwind_sbp.normal_mode import (
    boundary_determinant_scalar,
    boundary_matrix_scalar,
    characteristic_polynomial,
    characteristic_roots,
    determinant_scalar_closed_form,
    kappa_bound_check,
    outflow_boundary_matrix,
    sigma2_closed_form,
    sigma2_system,
    sigma_scalar,
    solve_system_boundary,
    system_boundary_matrix,
    system_boundary_matrix_at_zero,
    system_determinant_closed_form,
)
from upwind_sbp.sat import system_stability_check
from upwind_sbp.sbp import build_grid, build_upwind_pair

R33 = np.sqrt(33.0)


def test_inflow_polynomial_comes_from_the_interior_stencil():
    # u_j = k^j in s u + h Dm u = 0 with the interior row (1/6, -1, 1/2, 1/3)
    pair = build_upwind_pair(3, build_grid(20))
    row = pair.Dm[10, 8:12] * pair.grid.h
    np.testing.assert_allclose(row, [1 / 6, -1, 1 / 2, 1 / 3], atol=1e-12)
    s = 0.3
    coeffs = characteristic_polynomial("inflow", s)
    np.testing.assert_allclose(-coeffs, [row[3], row[2] + s, row[1], row[0]], atol=1e-12)


def test_inflow_roots_at_zero():
    rs = characteristic_roots(3, "inflow", 0.0)
    expected = sorted([1.0, (-5 + R33) / 4, (-5 - R33) / 4])
    np.testing.assert_allclose(sorted(rs.roots.real), expected, atol=1e-12)
    np.testing.assert_allclose(rs.roots.imag, 0.0, atol=1e-12)
    np.testing.assert_allclose(sorted(rs.admissible_roots.real), [0.186141, 1.0], atol=1e-6)
    assert rs.pick(slow=True) == pytest.approx(1.0)
    assert rs.pick(slow=False).real == pytest.approx(0.186141, abs=1e-6)


def test_outflow_single_admissible_root():
    rs = characteristic_roots(3, "outflow", 0.0)
    assert rs.admissible.sum() == 1
    assert rs.pick(slow=False).real == pytest.approx((5 - R33) / 2, abs=1e-12)
    assert rs.pick(slow=False).real == pytest.approx(-0.372281, abs=1e-6)


def test_slow_root_tracks_the_exponential():
    # the interior scheme is third order, so the slow root is exp(-s) + O(s^4)
    for s in (0.1, 0.01, 0.001):
        k = characteristic_roots(3, "inflow", s).pick(slow=True)
        assert abs(k - np.exp(-s)) < 0.1 * s**4
    assert abs(characteristic_roots(3, "inflow", 0.01).pick(slow=True) - 0.99) < 1e-4


def test_slow_root_perturbation_order():
    ss = np.array([1e-1, 1e-2, 1e-3])
    gaps = [abs(characteristic_roots(3, "inflow", s).pick(slow=True) - (1 - s)) for s in ss]
    assert np.polyfit(np.log(ss), np.log(gaps), 1)[0] >= 1.9


def test_roots_at_complex_arguments_remain_classified():
    rs = characteristic_roots(3, "inflow", 0.05 + 0.4j)
    assert rs.admissible.sum() == 2
    assert np.all(np.abs(rs.admissible_roots) < 1)


@pytest.mark.parametrize("tau,expected", [(-1.0, -1.46413), (-0.5, -0.73207), (-2.0, -2.92826)])
def test_scalar_determinant(tau, expected):
    det = boundary_determinant_scalar(tau, 0.0)
    assert abs(det.imag) < 1e-14
    assert det.real == pytest.approx(determinant_scalar_closed_form(tau), abs=1e-10)
    assert det.real == pytest.approx(expected, abs=1e-5)


@given(tau=st.floats(-5.0, -0.5))
def test_scalar_determinant_condition(tau):
    assert abs(boundary_determinant_scalar(tau, 0.0)) > 0.5
    assert boundary_determinant_scalar(tau, 0.0).real == pytest.approx(determinant_scalar_closed_form(tau), abs=1e-10)


def test_scalar_sigma_examples():
    sol = sigma_scalar(-1.0)
    assert abs(sol.numerical[0]) < 1e-12
    assert sol.closed_form[0] == 0.0
    assert sol.numerical[1] == pytest.approx(0.31523, abs=1e-5)
    assert sigma_scalar(-2.0).numerical[0] == pytest.approx(-0.15762, abs=1e-5)
    assert sigma_scalar(-0.5).numerical[0] == pytest.approx(0.31523, abs=1e-5)
    with pytest.raises(DegenerateParametersError):
        sigma_scalar(0.0)


@given(tau=st.floats(-5.0, -0.5))
def test_scalar_sigma_closed_form(tau):
    assert sigma_scalar(tau).discrepancy < 1e-9


def test_boundary_matrix_columns_follow_root_kind():
    C = boundary_matrix_scalar(-1.0, 0.0)
    k = characteristic_roots(3, "inflow", 0.0).pick(slow=False)
    # the slow root is 1, so its column reduces to the constant entries
    np.testing.assert_allclose(C[:, 0].real, [12 / 5, 0.0], atol=1e-12)
    assert C[1, 1] == pytest.approx(-9 / 13 + 5 / 13 * k + 4 / 13 * k**2)


def test_printed_and_derived_system_matrix_agree():
    for a, t1, t2 in ((0.5, -4 / 3, -1 / 3), (1.0, -2.0, -0.5), (0.0, -1.0, -1.0), (2.0, -0.3, -2.2)):
        np.testing.assert_allclose(system_boundary_matrix(a, t1, t2, 0.0), system_boundary_matrix_at_zero(a, t1, t2), atol=1e-12)


def test_system_determinant():
    for tau1, expected in ((-2.0, -2.30472), (-4 / 3, -1.64623)):
        det = np.linalg.det(system_boundary_matrix_at_zero(0.5, tau1, -1 / 3))
        assert det == pytest.approx(system_determinant_closed_form(0.5, tau1, -1 / 3), abs=1e-10)
        assert det == pytest.approx(expected, abs=1e-5)


def _stable_parameters(alpha0, tau1, frac):
    # tau2 inside the interval where the left energy term is nonpositive
    r = 2.0 * np.sqrt(-alpha0 * tau1)
    return alpha0 * tau1 - 1.0 - r + 2.0 * r * frac


@settings(max_examples=50)
@given(alpha0=st.floats(0.05, 3.0), tau1=st.floats(-5.0, -0.05), frac=st.floats(0.01, 0.99))
def test_system_closed_forms_on_stable_parameters(alpha0, tau1, frac):
    tau2 = _stable_parameters(alpha0, tau1, frac)
    assert system_stability_check(alpha0, 0.0, tau1, tau2, 0.0, 1.0)[1]
    C = system_boundary_matrix_at_zero(alpha0, tau1, tau2)
    assert abs(np.linalg.det(C)) > 0
    assert np.linalg.det(C) == pytest.approx(system_determinant_closed_form(alpha0, tau1, tau2), rel=1e-9, abs=1e-12)
    direct = solve_system_boundary(alpha0, tau1, tau2)[2]
    assert direct == pytest.approx(sigma2_closed_form(alpha0, tau1, tau2), rel=1e-9, abs=1e-12)


def test_sigma2_examples():
    assert sigma2_system(0.5, -4 / 3, -1 / 3) == pytest.approx(0.0, abs=1e-12)
    assert sigma2_system(0.0, -1.0, -1.0) == pytest.approx(0.0, abs=1e-12)
    assert sigma2_system(0.5, -2.0, -1 / 3) == pytest.approx(-0.06004, abs=1e-5)


def test_sigma2_scales_with_the_sum_of_second_derivatives():
    base = solve_system_boundary(0.5, -2.0, -1 / 3, 1.0, 0.0)[2]
    assert solve_system_boundary(0.5, -2.0, -1 / 3, 0.0, 1.0)[2] == pytest.approx(base)
    assert solve_system_boundary(0.5, -2.0, -1 / 3, 2.0, 3.0)[2] == pytest.approx(5 * base)


def test_sigma2_degenerate_and_invalid():
    with pytest.raises(DegenerateParametersError):
        sigma2_closed_form(0.5, -1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        sigma2_system(-0.5, -1.0, -1.0)


def test_outflow_determinant_is_nonzero():
    assert abs(np.linalg.det(outflow_boundary_matrix(0.0))) == pytest.approx(1.79900, abs=1e-5)


def test_kappa_bound():
    lhs, rhs, ok = kappa_bound_check(0.01)
    # independent oracle: the slow root is exp(-s) to third order
    assert lhs == pytest.approx(1 / (1 - np.exp(-0.02)), rel=1e-6)
    assert rhs == 50.0 and ok
    lhs3, rhs3, ok3 = kappa_bound_check(0.001)
    assert ok3 and abs(lhs3 / rhs3 - 1) < abs(lhs / rhs - 1)
    lhs1, rhs1, ok1 = kappa_bound_check(0.1)
    assert rhs1 == 5.0 and lhs1 > rhs1 and not ok1
    with pytest.raises(InvalidArgumentError):
        kappa_bound_check(0.0)


def test_only_third_order_supported():
    with pytest.raises(UnsupportedOrderError):
        characteristic_roots(4, "inflow", 0.0)
    with pytest.raises(InvalidArgumentError):
        characteristic_roots(3, "sideways", 0.0)
