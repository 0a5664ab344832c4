"""Stabilization that turns the frozen WENO operator back into an SBP operator.

The symmetric part ``R`` of ``H Dmw`` is written as a sum of weighted outer
products of difference vectors of increasing order.  The same family of
vectors is used to build a nonnegative correction ``Rs`` so that ``R + Rs`` is
positive semidefinite.  Everything is kept in banded form, because ``R`` has
bandwidth three.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DecompositionFailureError, InvalidArgumentError
from .sbp import Grid, boundary_matrix, difference_matrix
from .stencils import WINDOW, check_points, spacing_weights
from .weno import WenoOperator

log = logging.getLogger(__name__)

BANDWIDTH = 3


@dataclass(frozen=True)
class DifferenceVectors:
    """The family ``v_k = sum_j coef[j] e_{k + offset[j]}`` for ``k`` in ``first..n-1-trim``."""

    offsets: tuple[int, ...]
    coefs: tuple[float, ...]
    first: int
    trim: int

    def indices(self, n: int) -> np.ndarray:
        return np.arange(self.first, n - self.trim)


# first differences of fluxes (Delta e_k), second differences on the grid
# (Delta Delta^T e_k) and third differences of fluxes (Delta Delta^T Delta e_k)
FIRST = DifferenceVectors((-1, 0), (1.0, -1.0), 1, 0)
SECOND = DifferenceVectors((-1, 0, 1), (-1.0, 2.0, -1.0), 1, 1)
THIRD = DifferenceVectors((-2, -1, 0, 1), (-1.0, 3.0, -3.0, 1.0), 2, 1)


def _gather(vectors: DifferenceVectors, u: np.ndarray) -> np.ndarray:
    k = vectors.indices(len(u))
    return sum(c * u[k + o] for o, c in zip(vectors.offsets, vectors.coefs))


def apply_outer_sum(vectors: DifferenceVectors, lam: np.ndarray, u: np.ndarray, out: np.ndarray) -> None:
    """``out += sum_k lam[k] v_k (v_k . u)``, with ``lam`` indexed like the family."""
    k = vectors.indices(len(u))
    a = lam[k] * _gather(vectors, u)
    for o, c in zip(vectors.offsets, vectors.coefs):
        out[k + o] += c * a


def outer_sum_bands(vectors: DifferenceVectors, lam: np.ndarray, n: int) -> list[np.ndarray]:
    """Upper bands ``0..BANDWIDTH`` of ``sum_k lam[k] v_k v_k^T``."""
    bands = [np.zeros(n - s) for s in range(BANDWIDTH + 1)]
    k = vectors.indices(n)
    lk = lam[k]
    pairs = list(zip(vectors.offsets, vectors.coefs))
    for a, (oa, ca) in enumerate(pairs):
        for ob, cb in pairs[a:]:
            np.add.at(bands[ob - oa], k + oa, lk * ca * cb)
    return bands


def outer_sum_dense(vectors: DifferenceVectors, lam: np.ndarray, n: int) -> np.ndarray:
    """Dense reference: ``sum_k lam[k] v_k v_k^T`` via the difference matrices."""
    delta = difference_matrix(n)
    if vectors is FIRST:
        left, weights = delta, lam
    elif vectors is SECOND:
        left, weights = delta @ delta.T, lam
    else:
        left, weights = delta @ delta.T @ delta, lam
    mask = np.zeros_like(weights)
    mask[vectors.indices(n)] = 1.0
    return left @ np.diag(weights * mask) @ left.T


def modify_lambda(value, delta):
    """Nonnegative correction ``(sqrt(value**2 + delta**2) - value) / 2``.

    Negative entries are lifted to roughly ``|value|``; positive ones receive
    about ``delta**2 / (4 value)``, so the correction stays small where ``R``
    is already dissipative.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise InvalidArgumentError("delta must be nonnegative")
    value = np.asarray(value, dtype=float)
    out = 0.5 * (np.hypot(value, delta) - value)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SymmetricSplit:
    """``H Dmw = Q + R`` with ``Q - B/2`` skew and ``R`` symmetric."""

    Q: np.ndarray
    R: np.ndarray
    residual: float


def symmetric_split(H: np.ndarray, Dmw: np.ndarray, B: np.ndarray) -> SymmetricSplit:
    HD = H @ Dmw
    Q = 0.5 * (HD - HD.T + B)
    R = 0.5 * (HD + HD.T - B)
    residual = float(np.max(np.abs(Q + R - HD)))
    return SymmetricSplit(Q, R, residual)


@dataclass(frozen=True)
class LambdaFactors:
    """Weights of the first, second and third difference families, before and after modification.

    ``first`` and ``third`` are indexed by flux point (length ``n+1``), ``second``
    by grid point (length ``n``).  Unused entries are zero.
    """

    p: int
    first: np.ndarray
    second: np.ndarray
    third: np.ndarray
    first_s: np.ndarray
    second_s: np.ndarray
    third_s: np.ndarray
    deltas: tuple[float, float, float]
    residual: float

    def families(self, modified: bool = False):
        if modified:
            return ((FIRST, self.first_s), (SECOND, self.second_s), (THIRD, self.third_s))
        return ((FIRST, self.first), (SECOND, self.second), (THIRD, self.third))


def dense_bands(R: np.ndarray) -> list[np.ndarray]:
    return [np.diag(R, s).copy() for s in range(BANDWIDTH + 1)]


def _subtract(bands: list[np.ndarray], vectors: DifferenceVectors, lam: np.ndarray, n: int) -> None:
    for b, c in zip(bands, outer_sum_bands(vectors, lam, n)):
        b -= c


def lambdas_from_bands(bands: list[np.ndarray], p: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Peel the third, second and first difference weights off the bands of ``R``.

    Returns the three weight vectors and the largest leftover entry, which is
    zero (to rounding) whenever ``R`` annihilates constants.
    """
    n = len(bands[0])
    work = [b.copy() for b in bands]
    third = np.zeros(n + 1)
    if p == 4:
        k = THIRD.indices(n)
        third[k] = -work[3][k - 2]
        _subtract(work, THIRD, third, n)
    second = np.zeros(n)
    k = SECOND.indices(n)
    second[k] = work[2][k - 1]
    _subtract(work, SECOND, second, n)
    first = np.zeros(n + 1)
    k = FIRST.indices(n)
    first[k] = -work[1][k - 1]
    _subtract(work, FIRST, first, n)
    residual = max(float(np.max(np.abs(b), initial=0.0)) for b in work)
    return first, second, third, residual


def _modified(p: int, first, second, third, delta: float, deltas=None) -> tuple:
    d1, d2 = (delta, delta) if deltas is None else deltas
    first_s = np.zeros_like(first)
    k = FIRST.indices(len(second))
    first_s[k] = modify_lambda(first[k], d1)
    second_s = np.zeros_like(second)
    k = SECOND.indices(len(second))
    second_s[k] = modify_lambda(second[k], d2)
    # third differences are left alone where already nonnegative
    third_s = np.zeros_like(third)
    if p == 4:
        k = THIRD.indices(len(second))
        third_s[k] = modify_lambda(third[k], 0.0)
    return first_s, second_s, third_s


def extract_lambdas(R: np.ndarray, p: int, delta: float = 0.0, tol: float = 1e-10) -> LambdaFactors:
    """Decompose a symmetric ``R`` of bandwidth at most three into difference families."""
    check_points(p, R.shape[0])
    if np.max(np.abs(R - R.T)) > tol * max(1.0, np.max(np.abs(R))):
        raise InvalidArgumentError("R is not symmetric")
    far = np.triu(R, BANDWIDTH + 1)
    if np.any(far != 0.0):
        raise InvalidArgumentError(f"R has bandwidth larger than {BANDWIDTH}")
    first, second, third, residual = lambdas_from_bands(dense_bands(R), p)
    if residual > tol * max(1.0, float(np.max(np.abs(R)))):
        raise DecompositionFailureError(f"band extraction leaves a residual of {residual:.3e}")
    first_s, second_s, third_s = _modified(p, first, second, third, delta)
    return LambdaFactors(p, first, second, third, first_s, second_s, third_s, (delta, delta, 0.0), residual)


def reconstruct(factors: LambdaFactors, n: int, modified: bool = False) -> np.ndarray:
    """Dense sum of the (optionally modified) difference families."""
    return sum(outer_sum_dense(v, lam, n) for v, lam in factors.families(modified))


def bands_from_window(window: np.ndarray, n: int) -> list[np.ndarray]:
    """Upper bands of ``R = (HD + (HD)^T - B)/2`` where ``HD`` is the flux difference of ``window``."""

    def coef(k: np.ndarray, offset: int) -> np.ndarray:
        slot = offset - WINDOW[0]
        if 0 <= slot < window.shape[1]:
            return window[k, slot]
        return np.zeros(len(k))

    r = np.arange(n)
    diag = coef(r + 1, -1) - coef(r, 0)
    diag[0] += 0.5
    diag[-1] -= 0.5
    bands = [diag]
    for s in range(1, BANDWIDTH + 1):
        r = np.arange(n - s)
        upper = coef(r + 1, s - 1) - coef(r, s)
        lower = coef(r + s + 1, -s - 1) - coef(r + s, -s)
        bands.append(0.5 * (upper + lower))
    return bands


def bands_to_dense(bands: list[np.ndarray]) -> np.ndarray:
    out = np.diag(bands[0])
    for s, b in enumerate(bands[1:], start=1):
        out += np.diag(b, s) + np.diag(b, -s)
    return out


def min_eig_banded(bands: list[np.ndarray]) -> float:
    """Smallest eigenvalue of a symmetric banded matrix given by its upper bands."""
    n = len(bands[0])
    width = len(bands) - 1
    packed = np.zeros((width + 1, n))
    for s, b in enumerate(bands):
        packed[width - s, s:] = b
    return float(sla.eig_banded(packed, lower=False, eigvals_only=True, select="i", select_range=(0, 0))[0])


@dataclass
class StabilizationStats:
    """Running summary of stabilized evaluations."""

    evaluations: int = 0
    fallbacks: int = 0
    max_residual: float = 0.0
    max_correction: float = 0.0
    certified: int = 0
    min_scaled_eig: float = np.inf
    history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class Stabilized:
    """Frozen state of one stabilized evaluation."""

    window: np.ndarray
    bands: list[np.ndarray]
    factors: LambdaFactors | None
    fallback: np.ndarray | None

    def correction_bands(self, n: int) -> list[np.ndarray]:
        """Upper bands of ``Rs``; not available for the full eigenvalue-shift fallback."""
        if self.fallback is not None:
            raise InvalidArgumentError("the eigenvalue-shift correction is not banded")
        total = [np.zeros(n - s) for s in range(BANDWIDTH + 1)]
        for vectors, lam in self.factors.families(modified=True):
            for t, c in zip(total, outer_sum_bands(vectors, lam, n)):
                t += c
        return total

    def correction_dense(self, n: int) -> np.ndarray:
        if self.fallback is not None:
            return self.fallback
        return bands_to_dense(self.correction_bands(n))


class StabilizedWeno:
    """The SBP-WENO operator ``Dmws = H^{-1}(Q + R + Rs)``.

    ``delta`` defaults to ``h**4``.  When the banded decomposition is not exact
    the correction falls back to ``V max(-lambda, 0) V^T`` from an
    eigendecomposition of ``R``; such events are counted in ``stats``.
    """

    def __init__(
        self,
        p: int,
        grid: Grid,
        epsilon: float | None = None,
        delta: float | None = None,
        tol: float = 1e-10,
    ):
        self.weno = WenoOperator(p, grid, epsilon)
        self.p = p
        self.grid = grid
        self.delta = grid.h**4 if delta is None else float(delta)
        if self.delta < 0:
            raise InvalidArgumentError("delta must be nonnegative")
        self.tol = tol
        self.norm_weights = spacing_weights(p, grid.n) * grid.h
        self.stats = StabilizationStats()

    @property
    def n(self) -> int:
        return self.grid.n

    def stabilize(self, u: np.ndarray, linear: bool = False) -> Stabilized:
        u = self.weno._check_state(u)
        window = self.weno.flux_window(u, linear)
        bands = bands_from_window(window, self.n)
        first, second, third, residual = lambdas_from_bands(bands, self.p)
        scale = max(1.0, float(np.max(np.abs(bands[0]))))
        self.stats.evaluations += 1
        self.stats.max_residual = max(self.stats.max_residual, residual)
        if residual <= self.tol * scale:
            mods = _modified(self.p, first, second, third, self.delta)
            factors = LambdaFactors(self.p, first, second, third, *mods, (self.delta, self.delta, 0.0), residual)
            return Stabilized(window, bands, factors, None)
        log.warning("band extraction residual %.3e; using eigenvalue shift", residual)
        self.stats.fallbacks += 1
        vals, vecs = np.linalg.eigh(bands_to_dense(bands))
        shift = (vecs * np.maximum(-vals, 0.0)) @ vecs.T
        return Stabilized(window, bands, None, shift)

    def apply(self, u: np.ndarray, linear: bool = False, track: bool = False) -> np.ndarray:
        """``Dmws u``; with ``track`` the correction size and PSD margin are recorded."""
        state = self.stabilize(u, linear)
        u = np.asarray(u, dtype=float)
        out = self.weno.fluxes_from_window(u, state.window)
        out = np.diff(out)
        if state.fallback is not None:
            out += state.fallback @ u
        else:
            for vectors, lam in state.factors.families(modified=True):
                apply_outer_sum(vectors, lam, u, out)
        if track:
            self._certify(state)
        return out / self.norm_weights

    def _certify(self, state: Stabilized) -> float:
        scale = max(float(np.max(np.abs(b), initial=0.0)) for b in state.bands)
        if state.fallback is not None:
            # the eigenvalue shift is a full matrix, so the banded solver does not apply
            eig = float(np.linalg.eigvalsh(bands_to_dense(state.bands) + state.fallback)[0])
            correction = [state.fallback]
        else:
            correction = state.correction_bands(self.n)
            eig = min_eig_banded([a + b for a, b in zip(state.bands, correction)])
        scaled = eig / scale if scale > 0 else eig
        st = self.stats
        st.certified += 1
        st.min_scaled_eig = min(st.min_scaled_eig, scaled)
        st.max_correction = max(st.max_correction, max(float(np.max(np.abs(c), initial=0.0)) for c in correction))
        st.history.append(scaled)
        return scaled

    def certify(self, u: np.ndarray, linear: bool = False) -> float:
        """``min eig(R + Rs) / max|R|`` at state ``u``."""
        return self._certify(self.stabilize(u, linear))

    def split(self, u: np.ndarray, linear: bool = False) -> SymmetricSplit:
        """Dense skew/symmetric split of ``H Dmw`` at ``u``."""
        H = np.diag(self.norm_weights)
        return symmetric_split(H, self.weno.matrix(u, linear), boundary_matrix(self.n))

    def correction_matrix(self, u: np.ndarray, linear: bool = False) -> np.ndarray:
        return self.stabilize(u, linear).correction_dense(self.n)

    def matrix(self, u: np.ndarray, linear: bool = False) -> np.ndarray:
        """Dense ``Dmws`` with everything frozen at ``u``."""
        Dmw = self.weno.matrix(u, linear)
        return Dmw + self.correction_matrix(u, linear) / self.norm_weights[:, None]


def assemble_dmws(p: int, grid: Grid, u: np.ndarray, **kwargs) -> np.ndarray:
    """``Dmws u`` for a single state."""
    return StabilizedWeno(p, grid, **kwargs).apply(u)


def interior_lambda_formulas(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form interior weights of the fourth order decomposition.

    ``weights[k, j]`` is the nonlinear weight of candidate ``j`` at flux ``k``.
    The results are indexed like :class:`LambdaFactors`: entry ``k`` of each
    family is driven by the weights at fluxes ``k``, ``k+1`` and ``k+2``.
    Entries that would need an out-of-range flux are NaN.
    """
    w2 = weights[:, 1]
    w3 = weights[:, 2]
    m = len(w2)
    third = np.full(m, np.nan)
    third[:-1] = w3[1:] / 6.0
    second = np.full(m - 1, np.nan)
    second[:-1] = w2[1:-1] / 4 + w3[1:-1] / 12 - w3[2:] / 3
    first = np.full(m, np.nan)
    first[:-2] = w2[:-2] / 4 + w3[:-2] / 4 - w2[1:-1] / 4 - 5 * w3[1:-1] / 12 + w3[2:] / 6
    return first, second, third
