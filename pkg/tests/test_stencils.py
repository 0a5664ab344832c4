from fractions import Fraction as Fr

import numpy as np
import pytest

from upwind_sbp.errors import InvalidArgumentError, UnsupportedOrderError
from upwind_sbp.stencils import (
    _RULES,
    MIN_POINTS,
    exact_linear_weights,
    flux_table,
    spacing_weights,
)


def combined_flux(rule):
    """Exact combined coefficients of one flux rule, keyed like its stencils."""
    out = {}
    for stencil, d in zip(rule.substencils, rule.linear_weights):
        for key, c in stencil.items():
            out[key] = out.get(key, 0) + d * c
    return {k: v for k, v in out.items() if v != 0}


@pytest.mark.parametrize("p", [3, 4])
def test_linear_weights_are_positive_and_sum_to_one(p):
    for name, weights in exact_linear_weights(p).items():
        assert all(w > 0 for w in weights), name
        assert sum(weights) == 1, name


@pytest.mark.parametrize("p", [3, 4])
def test_every_candidate_is_consistent(p):
    # each candidate flux reproduces constants
    left, interior, right = _RULES[p]
    for rule in (*left, interior, *right):
        for stencil in rule.substencils:
            assert sum(stencil.values()) == 1


def test_fourth_order_boundary_fluxes_combine_to_known_stencils():
    left, interior, right = _RULES[4]
    assert combined_flux(left[1]) == {1: Fr(25, 48), 2: Fr(169, 288), 3: Fr(-11, 144), 4: Fr(-1, 32)}
    assert combined_flux(left[2]) == {1: Fr(-55, 288), 2: Fr(235, 288), 3: Fr(95, 288), 4: Fr(13, 288)}
    assert combined_flux(left[3]) == {1: Fr(1, 96), 2: Fr(-31, 144), 3: Fr(269, 288), 4: Fr(13, 48)}
    assert combined_flux(interior) == {-2: Fr(1, 12), -1: Fr(-5, 12), 0: Fr(13, 12), 1: Fr(1, 4)}
    # right frame: key m is grid point n - m
    assert combined_flux(right[0]) == {
        0: Fr(-1, 32), 1: Fr(11, 144), 2: Fr(65, 288), 3: Fr(17, 16), 4: Fr(-5, 12), 5: Fr(1, 12)
    }
    assert combined_flux(right[1]) == {0: Fr(-31, 288), 1: Fr(139, 288), 2: Fr(239, 288), 3: Fr(-83, 288), 4: Fr(1, 12)}
    assert combined_flux(right[2]) == {0: Fr(23, 48), 1: Fr(205, 288), 2: Fr(-29, 144), 3: Fr(1, 96)}


def test_third_order_fluxes_combine_to_known_stencils():
    left, interior, right = _RULES[3]
    assert combined_flux(left[1]) == {1: Fr(7, 12), 2: Fr(5, 12)}
    assert combined_flux(interior) == {-1: Fr(-1, 6), 0: Fr(5, 6), 1: Fr(1, 3)}
    assert combined_flux(right[0]) == {2: Fr(-1, 6), 1: Fr(3, 4), 0: Fr(5, 12)}


@pytest.mark.parametrize("p,edge", [(3, [5 / 12, 13 / 12]), (4, [49 / 144, 61 / 48, 41 / 48, 149 / 144])])
def test_spacing_weights_are_symmetric_and_cover_the_domain(p, edge):
    n = 30
    w = spacing_weights(p, n)
    np.testing.assert_allclose(w[: len(edge)], edge, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(w, w[::-1])
    assert w.sum() == pytest.approx(n - 1, abs=1e-12)


@pytest.mark.parametrize("p", [3, 4])
def test_flux_table_covers_every_flux_point_once(p):
    n = 17
    table = flux_table(p, n)
    indices = np.sort(np.concatenate(list(table.indicator_groups.values())))
    np.testing.assert_array_equal(indices, np.arange(n + 1))
    np.testing.assert_allclose(table.linear_weights.sum(axis=1), 1.0, atol=1e-15)


def test_flux_table_rejects_bad_orders_and_sizes():
    with pytest.raises(UnsupportedOrderError):
        flux_table(5, 40)
    with pytest.raises(InvalidArgumentError):
        flux_table(4, MIN_POINTS[4] - 1)
