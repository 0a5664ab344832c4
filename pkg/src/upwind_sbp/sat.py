"""Semidiscretizations with weakly imposed boundary data.

Two problems are covered: scalar advection ``u_t + u_x = 0`` with inflow at
the left boundary, and the 2x2 system ``U_t + A U_x = 0`` with
``A = [[0, 1], [1, 0]]``, whose flux is split into a right-going part
(handled by ``Dm``) and a left-going part (handled by ``Dp``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError
from .sbp import UpwindPair

BoundaryData = Callable[[float], float]

#: positive and negative parts of the system matrix
A_MINUS = np.array([[0.5, 0.5], [0.5, 0.5]])
A_PLUS = np.array([[-0.5, 0.5], [0.5, -0.5]])


def _zero(t: float) -> float:
    return 0.0


@dataclass(frozen=True)
class AdvectionScheme:
    """``u_t = -Dm u + tau H^{-1} e_0 (u_0 - g(t))``."""

    pair: UpwindPair
    tau: float
    g: BoundaryData = _zero

    @property
    def certified_stable(self) -> bool:
        return self.tau <= -0.5


def advection_rhs(scheme: AdvectionScheme, u: np.ndarray, t: float) -> np.ndarray:
    pair = scheme.pair
    out = -(pair.Dm_sparse @ u)
    out[0] += scheme.tau / pair.norm_weights[0] * (u[0] - scheme.g(t))
    return out


def advection_matrix(scheme: AdvectionScheme) -> np.ndarray:
    """The linear operator ``L`` with ``rhs = L u`` for homogeneous data."""
    pair = scheme.pair
    L = -np.array(pair.Dm)
    L[0, 0] += scheme.tau / pair.norm_weights[0]
    return L


def advection_stability_matrix(scheme: AdvectionScheme) -> np.ndarray:
    """``M`` with ``d/dt |u|_H^2 = u^T M u`` for homogeneous data."""
    pair = scheme.pair
    n = pair.n
    M = -(pair.Qm + pair.Qm.T)
    M[0, 0] += 2.0 * scheme.tau + 1.0
    M[n - 1, n - 1] -= 1.0
    return M


@dataclass(frozen=True)
class SystemScheme:
    """Boundary data ``u + alpha0 v = g1`` at the left and ``u + alpha1 v = gn`` at the right."""

    pair: UpwindPair
    alpha0: float
    alpha1: float
    tau1: float
    tau2: float
    tau3: float
    tau4: float
    g1: BoundaryData = _zero
    gn: BoundaryData = _zero

    def __post_init__(self):
        if self.alpha0 < 0 or self.alpha1 > 0:
            raise InvalidArgumentError("need alpha0 >= 0 and alpha1 <= 0 for a well-posed problem")

    @property
    def certified_stable(self) -> bool:
        return system_stability_check(self.alpha0, self.alpha1, self.tau1, self.tau2, self.tau3, self.tau4)[1]


def _left_boundary_ok(alpha0: float, tau1: float, tau2: float) -> bool:
    if tau1 == 0.0:
        return tau2 == -1.0
    return tau1 < 0 and (alpha0 * tau1 - tau2 - 1.0) ** 2 + 4.0 * alpha0 * tau1 <= 0.0


def _right_boundary_ok(alpha1: float, tau3: float, tau4: float) -> bool:
    if tau3 == 0.0:
        return tau4 == 1.0
    return tau3 < 0 and (alpha1 * tau3 - tau4 + 1.0) ** 2 - 4.0 * alpha1 * tau3 <= 0.0


def system_stability_check(
    alpha0: float, alpha1: float, tau1: float, tau2: float, tau3: float, tau4: float
) -> tuple[bool, bool]:
    """Return ``(well_posed, energy_stable)`` for the boundary and penalty parameters.

    Both boundary terms of the discrete energy rate must be nonpositive.  A
    vanishing ``tau1`` (``tau3``) forces ``tau2 = -1`` (``tau4 = 1``).
    """
    well_posed = alpha0 >= 0 and alpha1 <= 0
    stable = well_posed and _left_boundary_ok(alpha0, tau1, tau2) and _right_boundary_ok(alpha1, tau3, tau4)
    return well_posed, stable


def _system_interior(pair: UpwindPair) -> sp.csr_matrix:
    return sp.csr_matrix(sp.kron(A_PLUS, pair.Dp_sparse) + sp.kron(A_MINUS, pair.Dm_sparse))


def system_matrix(scheme: SystemScheme) -> np.ndarray:
    """Dense ``L`` with ``rhs = L w`` for homogeneous data, ``w = (u, v)``."""
    pair = scheme.pair
    n = pair.n
    L = -_system_interior(pair).toarray()
    w0, wn = pair.norm_weights[0], pair.norm_weights[-1]
    for row, tau in ((0, scheme.tau1), (n, scheme.tau2)):
        L[row, 0] += tau / w0
        L[row, n] += tau * scheme.alpha0 / w0
    for row, tau in ((n - 1, scheme.tau3), (2 * n - 1, scheme.tau4)):
        L[row, n - 1] += tau / wn
        L[row, 2 * n - 1] += tau * scheme.alpha1 / wn
    return L


class SystemRhs:
    """Right-hand side of the system scheme with the interior operator assembled once."""

    def __init__(self, scheme: SystemScheme):
        self.scheme = scheme
        self.interior = _system_interior(scheme.pair)

    def __call__(self, w: np.ndarray, t: float) -> np.ndarray:
        s = self.scheme
        pair = s.pair
        n = pair.n
        out = -(self.interior @ w)
        left = (w[0] + s.alpha0 * w[n] - s.g1(t)) / pair.norm_weights[0]
        right = (w[n - 1] + s.alpha1 * w[2 * n - 1] - s.gn(t)) / pair.norm_weights[-1]
        out[0] += s.tau1 * left
        out[n] += s.tau2 * left
        out[n - 1] += s.tau3 * right
        out[2 * n - 1] += s.tau4 * right
        return out


def system_rhs(scheme: SystemScheme, w: np.ndarray, t: float) -> np.ndarray:
    return SystemRhs(scheme)(w, t)


def system_energy_matrix(scheme: SystemScheme) -> np.ndarray:
    """``M`` with ``d/dt |w|^2 = w^T M w`` in the block norm ``diag(H, H)``."""
    H2 = np.kron(np.eye(2), scheme.pair.H)
    HL = H2 @ system_matrix(scheme)
    return HL + HL.T
