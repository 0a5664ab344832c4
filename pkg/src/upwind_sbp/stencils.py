"""Coefficient tables for the candidate fluxes of the third and fourth order schemes.

Each flux point carries up to three candidate (sub)stencils and the linear
weights that combine them into the flux of the underlying linear upwind
operator.  Grid indices are stored in one of three frames:

* ``"left"``: 1-based grid index counted from the left boundary,
* ``"right"``: offset ``m`` meaning grid point ``n - m`` (1-based),
* ``"interior"``: offset relative to the 1-based flux index ``i``.

Flux index ``i`` sits between grid points ``i`` and ``i + 1`` (1-based), so
flux ``0`` is the left boundary and flux ``n`` the right boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Fr
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError, UnsupportedOrderError

SUPPORTED_ORDERS = (3, 4)

#: smallest grid each order can be built on without boundary closures overlapping
MIN_POINTS = {3: 8, 4: 12}

#: number of candidate stencils at interior flux points
MAX_SUBSTENCILS = 3

#: flux ``k`` only touches 0-based grid columns ``k + o`` with ``o`` in this range
WINDOW = (-3, 2)
WINDOW_WIDTH = WINDOW[1] - WINDOW[0] + 1


@dataclass(frozen=True)
class FluxRule:
    """Candidate stencils of one flux point, before it is placed on a grid."""

    frame: str
    anchor: int
    substencils: tuple[dict[int, Fr], ...]
    linear_weights: tuple[Fr, ...]
    indicator: str


def _fixed(frame: str, anchor: int, stencil: dict[int, Fr]) -> FluxRule:
    return FluxRule(frame, anchor, (stencil,), (Fr(1),), "fixed")


_HALF = Fr(1, 2)

_P3_LEFT = (
    _fixed("left", 0, {1: Fr(1)}),
    _fixed("left", 1, {1: Fr(7, 12), 2: Fr(5, 12)}),
)
_P3_INTERIOR = FluxRule(
    "interior",
    0,
    ({-1: -_HALF, 0: Fr(3, 2)}, {0: _HALF, 1: _HALF}),
    (Fr(1, 3), Fr(2, 3)),
    "p3",
)
_P3_RIGHT = (
    FluxRule(
        "right",
        1,
        ({2: Fr(-7, 12), 1: Fr(19, 12)}, {1: Fr(5, 12), 0: Fr(7, 12)}),
        (Fr(2, 7), Fr(5, 7)),
        "p3",
    ),
    _fixed("right", 0, {0: Fr(1)}),
)

_P4_LEFT = (
    _fixed("left", 0, {1: Fr(1)}),
    FluxRule(
        "left",
        1,
        (
            {1: Fr(95, 144), 2: Fr(49, 144)},
            {2: Fr(1741, 1152), 3: Fr(-209, 576), 4: Fr(-19, 128)},
        ),
        (Fr(15, 19), Fr(4, 19)),
        "p4_left1",
    ),
    FluxRule(
        "left",
        2,
        (
            {1: Fr(-11, 18), 2: Fr(29, 18)},
            {2: Fr(5, 11), 3: Fr(95, 198), 4: Fr(13, 198)},
        ),
        (Fr(5, 16), Fr(11, 16)),
        "p4_left2",
    ),
    FluxRule(
        "left",
        3,
        (
            {3: Fr(77, 144), 4: Fr(67, 144)},
            {2: Fr(-67, 144), 3: Fr(211, 144)},
            {1: Fr(9, 32), 2: Fr(-37, 36), 3: Fr(503, 288)},
        ),
        (Fr(39, 67), Fr(689, 1809), Fr(1, 27)),
        "p4_left3",
    ),
)
_P4_INTERIOR = FluxRule(
    "interior",
    0,
    (
        {0: _HALF, 1: _HALF},
        {-1: -_HALF, 0: Fr(3, 2)},
        {-2: Fr(1, 3), -1: Fr(-7, 6), 0: Fr(11, 6)},
    ),
    (_HALF, Fr(1, 4), Fr(1, 4)),
    "p4",
)
_P4_RIGHT = (
    FluxRule(
        "right",
        3,
        (
            {0: Fr(-53, 160), 1: Fr(583, 720), 2: Fr(-131, 1440), 3: Fr(49, 80)},
            {2: Fr(101, 288), 3: Fr(5, 6), 4: Fr(-53, 288)},
            {3: Fr(181, 96), 4: Fr(-89, 72), 5: Fr(101, 288)},
        ),
        (Fr(5, 53), Fr(3576, 5353), Fr(24, 101)),
        "p4_right3",
    ),
    FluxRule(
        "right",
        2,
        (
            {0: Fr(-11, 18), 1: Fr(29, 18)},
            {1: Fr(7, 18), 2: Fr(11, 18)},
            {2: Fr(149, 90), 3: Fr(-83, 90), 4: Fr(24, 90)},
        ),
        (Fr(31, 176), Fr(45, 88), Fr(5, 16)),
        "p4_right2",
    ),
    FluxRule(
        "right",
        1,
        (
            {0: Fr(95, 144), 1: Fr(49, 144)},
            {1: Fr(239, 144), 2: Fr(-95, 144)},
            {1: Fr(619, 288), 2: Fr(-59, 36), 3: Fr(47, 96)},
        ),
        (Fr(69, 95), Fr(1127, 4465), Fr(1, 47)),
        "p4_right1",
    ),
    _fixed("right", 0, {0: Fr(1)}),
)

_RULES = {3: (_P3_LEFT, _P3_INTERIOR, _P3_RIGHT), 4: (_P4_LEFT, _P4_INTERIOR, _P4_RIGHT)}

#: boundary cell widths in units of h; the right end mirrors the left
_BOUNDARY_SPACING = {
    3: (Fr(5, 12), Fr(13, 12)),
    4: (Fr(49, 144), Fr(61, 48), Fr(41, 48), Fr(149, 144)),
}


def check_order(p: int) -> None:
    if p not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(f"order {p} is not supported; choose one of {SUPPORTED_ORDERS}")


def check_points(p: int, n: int) -> None:
    check_order(p)
    if n < MIN_POINTS[p]:
        raise InvalidArgumentError(f"order {p} needs at least {MIN_POINTS[p]} grid points, got {n}")


def spacing_weights(p: int, n: int) -> np.ndarray:
    """Cell widths (diagonal of the norm) in units of the grid spacing."""
    check_points(p, n)
    w = np.ones(n)
    edge = [float(c) for c in _BOUNDARY_SPACING[p]]
    w[: len(edge)] = edge
    w[n - len(edge) :] = edge[::-1]
    return w


def _to_column(frame: str, anchor: int, key: int, n: int) -> int:
    """0-based grid column of a stencil entry."""
    if frame == "left":
        return key - 1
    if frame == "right":
        return n - 1 - key
    return anchor + key - 1


def _flux_index(rule: FluxRule, n: int) -> int:
    return n - rule.anchor if rule.frame == "right" else rule.anchor


@dataclass(frozen=True)
class FluxTable:
    """Candidate stencils placed on an ``n``-point grid.

    ``coefficients[k, j, s]`` multiplies ``u[k + s + WINDOW[0]]`` in candidate
    ``j`` of flux ``k``; ``linear_weights[k, j]`` is zero for unused candidates.
    """

    p: int
    n: int
    coefficients: np.ndarray
    linear_weights: np.ndarray
    indicator_groups: dict[str, np.ndarray]

    @property
    def linear_window(self) -> np.ndarray:
        """Flux coefficients of the linear scheme in window coordinates."""
        return np.einsum("kj,kjs->ks", self.linear_weights, self.coefficients)

    def substencil_columns(self, k: int) -> list[dict[int, float]]:
        """Candidate stencils of flux ``k`` as ``{0-based column: coefficient}``."""
        out = []
        for j in range(MAX_SUBSTENCILS):
            if self.linear_weights[k, j] == 0.0:
                continue
            row = self.coefficients[k, j]
            out.append({k + s + WINDOW[0]: row[s] for s in np.flatnonzero(row)})
        return out


def _rules_on_grid(p: int, n: int) -> list[tuple[int, FluxRule]]:
    left, interior, right = _RULES[p]
    placed = [(_flux_index(r, n), r) for r in left]
    first = len(left)
    last = n - len(right)
    for i in range(first, last + 1):
        placed.append((i, FluxRule("interior", i, interior.substencils, interior.linear_weights, interior.indicator)))
    placed.extend((_flux_index(r, n), r) for r in right)
    return sorted(placed, key=lambda item: item[0])


@lru_cache(maxsize=64)
def flux_table(p: int, n: int) -> FluxTable:
    """Build (and cache) the candidate stencil table for order ``p`` on ``n`` points."""
    check_points(p, n)
    coefficients = np.zeros((n + 1, MAX_SUBSTENCILS, WINDOW_WIDTH))
    weights = np.zeros((n + 1, MAX_SUBSTENCILS))
    groups: dict[str, list[int]] = {}
    placed = _rules_on_grid(p, n)
    assert [k for k, _ in placed] == list(range(n + 1))
    for k, rule in placed:
        for j, (stencil, d) in enumerate(zip(rule.substencils, rule.linear_weights)):
            weights[k, j] = float(d)
            for key, c in stencil.items():
                col = _to_column(rule.frame, rule.anchor, key, n)
                offset = col - k
                if not WINDOW[0] <= offset <= WINDOW[1]:
                    raise AssertionError(f"stencil of flux {k} leaves the window")
                coefficients[k, j, offset - WINDOW[0]] = float(c)
        groups.setdefault(rule.indicator, []).append(k)
    coefficients.setflags(write=False)
    weights.setflags(write=False)
    return FluxTable(p, n, coefficients, weights, {key: np.array(v) for key, v in groups.items()})


def exact_linear_weights(p: int) -> dict[str, tuple[Fr, ...]]:
    """Linear weights of every flux class as exact fractions (used by tests)."""
    left, interior, right = _RULES[p]
    out = {interior.indicator: interior.linear_weights}
    for r in (*left, *right):
        out[f"{r.frame}{r.anchor}"] = r.linear_weights
    return out
