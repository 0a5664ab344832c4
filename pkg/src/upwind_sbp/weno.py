"""Energy-stable WENO fluxes built on the upwind SBP minus operator.

Each flux is a convex combination of candidate stencil fluxes.  With the
linear weights the combination reproduces ``Dm`` exactly; the WENO-Z style
nonlinear weights shift mass away from candidates that straddle a jump.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, TextIO

import numpy as np

from .errors import InvalidArgumentError
from .sbp import Grid, difference_matrix, window_to_dense
from .stencils import MAX_SUBSTENCILS, WINDOW, FluxTable, flux_table, spacing_weights

_PAD_LEFT = -WINDOW[0]
_PAD_RIGHT = WINDOW[1] + 1

IndicatorFn = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _stack(*betas) -> np.ndarray:
    cols = list(betas)
    while len(cols) < MAX_SUBSTENCILS:
        cols.append(np.ones_like(cols[0]))
    return np.stack(cols, axis=-1)


# Indicator functions take the (unpadded) state and 1-based flux indices ``i``
# and return ``(beta, tau)``.  Grid value ``u_j`` (1-based) is ``u[j - 1]``.


def _ind_p3(u, i):
    um, u0, up = u[i - 2], u[i - 1], u[i]
    tau = (up - 2.0 * u0 + um) ** 2
    return _stack((u0 - um) ** 2, (up - u0) ** 2), tau


def _ind_p4(u, i):
    umm, um, u0, up = u[i - 3], u[i - 2], u[i - 1], u[i]
    b1 = (up - u0) ** 2
    b2 = (u0 - um) ** 2
    b3 = 13 / 12 * (u0 - 2.0 * um + umm) ** 2 + 0.25 * (5.0 * u0 - 8.0 * um + 3.0 * umm) ** 2
    tau = (up - 3.0 * u0 + 3.0 * um - umm) ** 2
    return _stack(b1, b2, b3), tau


def _ind_p4_left1(u, i):
    u1, u2, u3, u4 = u[0], u[1], u[2], u[3]
    b1 = (u2 - u1) ** 2
    b2 = (9.0 * u2 - 14.0 * u3 + 5.0 * u4) ** 2 / 16 + 49 / 48 * (u2 - 2.0 * u3 + u4) ** 2
    tau = (b2 - b1) ** 2
    return _stack(np.atleast_1d(b1), np.atleast_1d(b2)), np.atleast_1d(tau)


def _ind_p4_left2(u, i):
    u1, u2, u3, u4 = u[0], u[1], u[2], u[3]
    b1 = (u2 - u1) ** 2
    b2 = 13 / 12 * (u2 - 2.0 * u3 + u4) ** 2 + 0.25 * (3.0 * u2 - 4.0 * u3 + u4) ** 2
    tau = abs(b2 - b1)
    return _stack(np.atleast_1d(b1), np.atleast_1d(b2)), np.atleast_1d(tau)


def _ind_p4_left3(u, i):
    u1, u2, u3, u4 = u[0], u[1], u[2], u[3]
    b1 = (u4 - u3) ** 2
    b2 = (u3 - u2) ** 2
    b3 = 13 / 12 * (u1 - 2.0 * u2 + u3) ** 2 + 0.25 * (u1 - 4.0 * u2 + 3.0 * u3) ** 2
    tau = abs(b1 + b2 - 2.0 * b3)
    return _stack(*np.atleast_1d(b1, b2, b3)), np.atleast_1d(tau)


def _ind_p4_right1(u, i):
    # v[m] is u_{n-m}
    v = u[::-1]
    b1 = (v[0] - v[1]) ** 2
    b2 = (v[1] - v[2]) ** 2
    b3 = 13 / 12 * (v[1] - 2.0 * v[2] + v[3]) ** 2 + 0.25 * (3.0 * v[1] - 4.0 * v[2] + v[3]) ** 2
    tau = abs(b1 + b2 - 2.0 * b3)
    return _stack(*np.atleast_1d(b1, b2, b3)), np.atleast_1d(tau)


def _ind_p4_right2(u, i):
    v = u[::-1]
    b1 = (v[0] - v[1]) ** 2
    b2 = (v[1] - v[2]) ** 2
    b3 = 13 / 12 * (v[2] - 2.0 * v[3] + v[4]) ** 2 + 0.25 * (3.0 * v[2] - 4.0 * v[3] + v[4]) ** 2
    tau = abs(b1 + b2 - 2.0 * b3)
    return _stack(*np.atleast_1d(b1, b2, b3)), np.atleast_1d(tau)


def _ind_p4_right3(u, i):
    v = u[::-1]
    b1 = (
        781 / 720 * (v[0] - 3.0 * v[1] + 3.0 * v[2] - v[3]) ** 2
        + 13 / 12 * (v[0] - 4.0 * v[1] + 5.0 * v[2] - 2.0 * v[3]) ** 2
        + (3.0 * v[0] - 13.0 * v[1] + 25.0 * v[2] - 15.0 * v[3]) ** 2 / 64
    )
    b2 = 13 / 12 * (v[2] - 2.0 * v[3] + v[4]) ** 2 + 0.25 * (v[2] - v[4]) ** 2
    b3 = 13 / 12 * (v[3] - 2.0 * v[4] + v[5]) ** 2 + 0.25 * (3.0 * v[3] - 4.0 * v[4] + v[5]) ** 2
    tau = abs(4.0 * b1 - 3.0 * b2 - b3)
    return _stack(*np.atleast_1d(b1, b2, b3)), np.atleast_1d(tau)


def _ind_fixed(u, i):
    return np.ones((len(i), MAX_SUBSTENCILS)), np.zeros(len(i))


INDICATORS: dict[str, IndicatorFn] = {
    "fixed": _ind_fixed,
    "p3": _ind_p3,
    "p4": _ind_p4,
    "p4_left1": _ind_p4_left1,
    "p4_left2": _ind_p4_left2,
    "p4_left3": _ind_p4_left3,
    "p4_right1": _ind_p4_right1,
    "p4_right2": _ind_p4_right2,
    "p4_right3": _ind_p4_right3,
}


@dataclass(frozen=True)
class FluxGrid:
    """Flux point locations and the cell widths between them."""

    p: int
    locations: np.ndarray
    spacings: np.ndarray


def build_flux_grid(p: int, grid: Grid) -> FluxGrid:
    widths = spacing_weights(p, grid.n) * grid.h
    locations = grid.left + np.concatenate([[0.0], np.cumsum(widths)])
    locations[-1] = grid.right
    return FluxGrid(p, locations, widths)


@dataclass(frozen=True)
class SmoothnessData:
    """Indicators and weights at every flux point (rows) and candidate (columns)."""

    beta: np.ndarray
    tau: np.ndarray
    weights: np.ndarray
    epsilon: float


class WenoOperator:
    """Nonlinear flux-difference operator ``Dmw`` of order ``p`` on ``grid``.

    ``epsilon`` defaults to ``h**2``.  Pass ``linear=True`` to the evaluation
    methods to freeze the weights at their linear values, which recovers ``Dm``.
    """

    def __init__(self, p: int, grid: Grid, epsilon: float | None = None):
        self.p = p
        self.grid = grid
        self.table: FluxTable = flux_table(p, grid.n)
        self.epsilon = grid.h**2 if epsilon is None else float(epsilon)
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}")
        self.cell_widths = spacing_weights(p, grid.n) * grid.h
        k = np.arange(grid.n + 1)
        self._gather = k[:, None] + np.arange(WINDOW[1] - WINDOW[0] + 1)[None, :]
        self._groups = [(INDICATORS[name], idx) for name, idx in self.table.indicator_groups.items()]

    @property
    def n(self) -> int:
        return self.grid.n

    @cached_property
    def linear_window(self) -> np.ndarray:
        return self.table.linear_window

    def _check_state(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise InvalidArgumentError(f"state has shape {u.shape}, expected ({self.n},)")
        if not np.all(np.isfinite(u)):
            raise InvalidArgumentError("state contains non-finite values")
        return u

    def smoothness(self, u: np.ndarray) -> SmoothnessData:
        u = self._check_state(u)
        beta = np.empty((self.n + 1, MAX_SUBSTENCILS))
        tau = np.empty(self.n + 1)
        for fn, idx in self._groups:
            b, t = fn(u, idx)
            beta[idx] = b
            tau[idx] = t
        d = self.table.linear_weights
        alpha = d * (1.0 + tau[:, None] / (self.epsilon + beta))
        weights = alpha / alpha.sum(axis=1, keepdims=True)
        return SmoothnessData(beta, tau, weights, self.epsilon)

    def weights(self, u: np.ndarray, linear: bool = False) -> np.ndarray:
        if linear:
            return np.array(self.table.linear_weights)
        return self.smoothness(u).weights

    def flux_window(self, u: np.ndarray, linear: bool = False) -> np.ndarray:
        """Frozen flux coefficients ``G[k, s]`` multiplying ``u[k + s + WINDOW[0]]``."""
        if linear:
            return self.linear_window
        w = self.weights(u)
        return np.einsum("kj,kjs->ks", w, self.table.coefficients)

    def fluxes_from_window(self, u: np.ndarray, window: np.ndarray) -> np.ndarray:
        padded = np.concatenate([np.zeros(_PAD_LEFT), u, np.zeros(_PAD_RIGHT)])
        return np.einsum("ks,ks->k", window, padded[self._gather])

    def fluxes(self, u: np.ndarray, linear: bool = False) -> np.ndarray:
        u = self._check_state(u)
        return self.fluxes_from_window(u, self.flux_window(u, linear))

    def apply(self, u: np.ndarray, linear: bool = False) -> np.ndarray:
        """``Dmw u`` as flux differences over the cell widths."""
        return np.diff(self.fluxes(u, linear)) / self.cell_widths

    def matrix(self, u: np.ndarray, linear: bool = False) -> np.ndarray:
        """Dense ``Dmw`` with the weights frozen at ``u``."""
        u = self._check_state(u)
        return self.matrix_from_window(self.flux_window(u, linear))

    def matrix_from_window(self, window: np.ndarray) -> np.ndarray:
        flux = window_to_dense(window, self.n)
        return (difference_matrix(self.n) @ flux) / self.cell_widths[:, None]

    def linear_flux(self, u: np.ndarray, i: int) -> tuple[float, list[tuple[float, float]]]:
        """Linear flux at point ``i`` and its ``(d_j, candidate flux)`` decomposition."""
        u = self._check_state(u)
        if not 0 <= i <= self.n:
            raise InvalidArgumentError(f"flux index {i} outside 0..{self.n}")
        parts = []
        for j, stencil in enumerate(self.table.substencil_columns(i)):
            candidate = sum(c * u[col] for col, c in stencil.items())
            parts.append((float(self.table.linear_weights[i, j]), float(candidate)))
        return sum(d * c for d, c in parts), parts

    def write_debug_csv(self, u: np.ndarray, stream: TextIO) -> None:
        """One line per flux point with its indicators, ``tau`` and weights."""
        data = self.smoothness(u)
        active = self.table.linear_weights > 0
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(
            ["flux", "location"]
            + [f"beta{j + 1}" for j in range(MAX_SUBSTENCILS)]
            + ["tau"]
            + [f"w{j + 1}" for j in range(MAX_SUBSTENCILS)]
        )
        locations = build_flux_grid(self.p, self.grid).locations
        for k in range(self.n + 1):
            betas = [repr(float(data.beta[k, j])) if active[k, j] else "" for j in range(MAX_SUBSTENCILS)]
            ws = [repr(float(data.weights[k, j])) if active[k, j] else "" for j in range(MAX_SUBSTENCILS)]
            writer.writerow([k, repr(float(locations[k])), *betas, repr(float(data.tau[k])), *ws])


def nonlinear_weights(p: int, grid: Grid, u: np.ndarray, epsilon: float | None = None) -> SmoothnessData:
    return WenoOperator(p, grid, epsilon).smoothness(u)


def apply_dmw(p: int, grid: Grid, u: np.ndarray, epsilon: float | None = None, linear: bool = False) -> np.ndarray:
    return WenoOperator(p, grid, epsilon).apply(u, linear)


def dmw_matrix(p: int, grid: Grid, u: np.ndarray, epsilon: float | None = None, linear: bool = False) -> np.ndarray:
    return WenoOperator(p, grid, epsilon).matrix(u, linear)
