"""Upwind summation-by-parts operator pairs of order 3 and 4.

The minus operator ``Dm`` is written in conservative form: row ``i`` is the
difference of two neighbouring numerical fluxes divided by the local cell
width.  The plus operator is recovered from the summation-by-parts identity
``H Dm + (H Dp)^T = B``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import TextIO

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError
from .stencils import check_points, flux_table, spacing_weights, WINDOW

#: boundary accuracy ``b`` and interior accuracy ``r`` of each order
ACCURACY = {3: (1, 2), 4: (2, 4)}


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` points on ``[left, right]``."""

    n: int
    h: float
    points: np.ndarray
    left: float = 0.0
    right: float = 1.0

    @property
    def domain(self) -> tuple[float, float]:
        return (self.left, self.right)


def build_grid(n: int, left: float = 0.0, right: float = 1.0) -> Grid:
    if n < 2:
        raise InvalidArgumentError(f"a grid needs at least two points, got {n}")
    if not right > left:
        raise InvalidArgumentError(f"empty domain [{left}, {right}]")
    h = (right - left) / (n - 1)
    x = left + h * np.arange(n)
    x[-1] = right
    x.setflags(write=False)
    return Grid(n, h, x, left, right)


@dataclass(frozen=True)
class UpwindPair:
    """An upwind SBP pair ``(Dm, Dp)`` sharing the diagonal norm ``H``."""

    p: int
    grid: Grid
    Dm: np.ndarray
    Dp: np.ndarray
    H: np.ndarray
    B: np.ndarray

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def b(self) -> int:
        return ACCURACY[self.p][0]

    @property
    def r(self) -> int:
        return ACCURACY[self.p][1]

    @cached_property
    def norm_weights(self) -> np.ndarray:
        """Diagonal of ``H``."""
        return np.diag(self.H).copy()

    @cached_property
    def Qm(self) -> np.ndarray:
        """``Q_-`` with ``H Dm = Q_- + B/2``."""
        return self.H @ self.Dm - 0.5 * self.B

    @cached_property
    def Dm_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.Dm)

    @cached_property
    def Dp_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.Dp)


def boundary_matrix(n: int) -> np.ndarray:
    B = np.zeros((n, n))
    B[0, 0] = -1.0
    B[-1, -1] = 1.0
    return B


def difference_matrix(n: int) -> np.ndarray:
    """The ``n x (n+1)`` matrix taking fluxes to their forward differences."""
    delta = np.zeros((n, n + 1))
    idx = np.arange(n)
    delta[idx, idx] = -1.0
    delta[idx, idx + 1] = 1.0
    return delta


def window_to_dense(window: np.ndarray, n: int) -> np.ndarray:
    """Expand ``(n+1, width)`` window coefficients into the dense flux matrix."""
    dense = np.zeros((n + 1, n))
    for s in range(window.shape[1]):
        k = np.arange(n + 1)
        cols = k + s + WINDOW[0]
        ok = (cols >= 0) & (cols < n)
        dense[k[ok], cols[ok]] = window[k[ok], s]
    return dense


def _p3_rows(n: int) -> np.ndarray:
    """Third order minus operator from its difference rows, in units of 1/h."""
    D = np.zeros((n, n))
    D[0, :2] = [-1.0, 1.0]
    D[1, :3] = [-9 / 13, 5 / 13, 4 / 13]
    for i in range(2, n - 2):
        D[i, i - 2 : i + 2] = [1 / 6, -1.0, 1 / 2, 1 / 3]
    D[n - 2, n - 4 :] = [2 / 13, -12 / 13, 5 / 13, 5 / 13]
    D[n - 1, n - 3 :] = [2 / 5, -9 / 5, 7 / 5]
    return D


def _flux_rows(p: int, n: int) -> np.ndarray:
    """Minus operator from the linear fluxes, in units of 1/h."""
    flux = window_to_dense(flux_table(p, n).linear_window, n)
    return (difference_matrix(n) @ flux) / spacing_weights(p, n)[:, None]


def build_upwind_pair(p: int, grid: Grid) -> UpwindPair:
    """Assemble the order ``p`` upwind SBP pair on ``grid``."""
    check_points(p, grid.n)
    n, h = grid.n, grid.h
    weights = spacing_weights(p, n) * h
    Dm = (_p3_rows(n) if p == 3 else _flux_rows(p, n)) / h
    B = boundary_matrix(n)
    H = np.diag(weights)
    Qm = H @ Dm - 0.5 * B
    Dp = (-Qm.T + 0.5 * B) / weights[:, None]
    for m in (Dm, Dp, H, B):
        m.setflags(write=False)
    return UpwindPair(p, grid, Dm, Dp, H, B)


@dataclass(frozen=True)
class SbpPropertyReport:
    sbp_residual: float
    qm_min_eig: float
    row_orders: np.ndarray

    def holds(self, tol: float = 1e-12) -> bool:
        return self.sbp_residual < tol and self.qm_min_eig >= -tol


def row_exactness(D: np.ndarray, h: float, max_degree: int = 6, tol: float = 1e-9) -> np.ndarray:
    """Largest ``k`` such that each row differentiates all monomials up to degree ``k`` exactly.

    Monomials are centred at the row's own grid point and scaled by ``h`` so
    every row is tested on O(1) data.
    """
    n = D.shape[0]
    orders = np.full(n, -1)
    scaled = D * h
    for i in range(n):
        cols = np.flatnonzero(scaled[i])
        xi = (cols - i).astype(float)
        for k in range(max_degree + 1):
            exact = 1.0 if k == 1 else 0.0
            if abs(scaled[i, cols] @ xi**k - exact) > tol:
                break
            orders[i] = k
    return orders


def verify_sbp(pair: UpwindPair) -> SbpPropertyReport:
    """Measure how well ``pair`` satisfies the SBP identity and dissipation sign."""
    HDm = pair.H @ pair.Dm
    HDp = pair.H @ pair.Dp
    residual = float(np.max(np.abs(HDm + HDp.T - pair.B)))
    sym = pair.Qm + pair.Qm.T
    min_eig = float(np.linalg.eigvalsh(0.5 * (sym + sym.T))[0])
    return SbpPropertyReport(residual, min_eig, row_exactness(pair.Dm, pair.grid.h))


def write_sparse_csv(matrix: np.ndarray, stream: TextIO, name: str | None = None) -> None:
    """Write the nonzeros of ``matrix`` as ``row,col,value`` lines (0-based)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["matrix", "row", "col", "value"] if name else ["row", "col", "value"])
    rows, cols = np.nonzero(matrix)
    for r, c in zip(rows, cols):
        line = [int(r), int(c), repr(float(matrix[r, c]))]
        writer.writerow([name, *line] if name else line)


def export_pair(pair: UpwindPair, directory: str | Path) -> list[Path]:
    """Write ``Dm``, ``Dp`` and ``H`` as CSV files into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for label, matrix in (("Dm", pair.Dm), ("Dp", pair.Dp), ("H", pair.H)):
        path = directory / f"{label}_p{pair.p}_n{pair.n}.csv"
        with path.open("w") as fh:
            write_sparse_csv(matrix, fh)
        written.append(path)
    return written
