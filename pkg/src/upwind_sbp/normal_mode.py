"""Normal-mode (Laplace transform) analysis of the third order schemes.

The error of the semidiscretization solves a difference recursion whose
general solution is built from the admissible roots of a characteristic
polynomial.  Boundary closures turn the free coefficients into a small linear
system; whether the coefficient of the slowly decaying root vanishes decides
between the two possible convergence rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParametersError, InvalidArgumentError, NumericalFailureError, UnsupportedOrderError

SQRT33 = np.sqrt(33.0)

#: admissibility is decided at this small positive shift of the dual variable
PERTURBATION = 1e-6


def characteristic_polynomial(side: str, s_tilde: complex) -> np.ndarray:
    """Coefficients (highest degree first) of the interior characteristic polynomial.

    ``inflow`` is the recursion of ``Dm``; ``outflow`` is the one for the
    left-going characteristic, discretized with ``Dp``.
    """
    if side == "inflow":
        return np.array([-1 / 3, -(0.5 + s_tilde), 1.0, -1 / 6], dtype=complex)
    if side == "outflow":
        return np.array([1 / 6, -1.0, 0.5 + s_tilde, 1 / 3], dtype=complex)
    raise InvalidArgumentError(f"side must be 'inflow' or 'outflow', got {side!r}")


def _roots(side: str, s_tilde: complex) -> np.ndarray:
    roots = np.roots(characteristic_polynomial(side, s_tilde))
    if len(roots) != 3 or not np.all(np.isfinite(roots)):
        raise NumericalFailureError(f"root finding failed at s_tilde={s_tilde}")
    return roots


def _match(reference: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Reorder ``candidates`` so entry ``i`` is the one nearest ``reference[i]``."""
    out = np.empty_like(reference)
    left = list(candidates)
    for i, r in enumerate(reference):
        j = int(np.argmin([abs(c - r) for c in left]))
        out[i] = left.pop(j)
    return out


@dataclass(frozen=True)
class RootSet:
    side: str
    s_tilde: complex
    roots: np.ndarray
    admissible: np.ndarray
    slow: np.ndarray

    @property
    def admissible_roots(self) -> np.ndarray:
        return self.roots[self.admissible]

    def pick(self, slow: bool) -> complex:
        """The admissible root of the requested kind."""
        mask = self.admissible & (self.slow == slow)
        if mask.sum() != 1:
            kind = "slow" if slow else "fast"
            raise NumericalFailureError(f"expected one admissible {kind} root on the {self.side} side")
        return complex(self.roots[mask][0])


def characteristic_roots(p: int, side: str, s_tilde: complex = 0.0, steps: int = 32) -> RootSet:
    """All roots at ``s_tilde``, which of them are admissible, and which are slow.

    Roots are followed along the straight path from ``0`` to ``s_tilde``; a root
    is slow when it starts at ``1``.  Admissibility is read off at
    ``s_tilde + PERTURBATION``.
    """
    if p != 3:
        raise UnsupportedOrderError("normal-mode analysis is implemented for p=3 only")
    s_tilde = complex(s_tilde)
    track = np.sort_complex(_roots(side, 0.0))
    slow = np.isclose(track, 1.0, atol=1e-8)
    for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
        track = _match(track, _roots(side, t * s_tilde))
    shifted = _match(track, _roots(side, s_tilde + PERTURBATION))
    admissible = np.abs(shifted) < 1.0
    return RootSet(side, s_tilde, track, admissible, slow)


def boundary_matrix_scalar(tau: float, s_tilde: complex = 0.0) -> np.ndarray:
    """``C3`` of the advection scheme: columns belong to the slow and the fast root."""
    rs = characteristic_roots(3, "inflow", s_tilde)
    cols = []
    for k in (rs.pick(slow=True), rs.pick(slow=False)):
        cols.append(
            [
                s_tilde - 1.0 - 12 / 5 * tau + k,
                -9 / 13 + s_tilde * k + 5 / 13 * k + 4 / 13 * k**2,
            ]
        )
    return np.array(cols, dtype=complex).T


#: truncation vector of the scalar boundary system, per unit ``h^2 v_xx``
SCALAR_TRUNCATION = np.array([0.5, -5 / 26])


def boundary_determinant_scalar(tau: float, s_tilde: complex = 0.0) -> complex:
    return complex(np.linalg.det(boundary_matrix_scalar(tau, s_tilde)))


def determinant_scalar_closed_form(tau: float) -> float:
    return float(3.0 * tau * (3.0 + 5.0 * SQRT33) / 65.0)


@dataclass(frozen=True)
class SigmaSolution:
    """Boundary-system coefficients per unit of boundary truncation data."""

    numerical: np.ndarray
    closed_form: np.ndarray

    @property
    def discrepancy(self) -> float:
        return float(np.max(np.abs(self.numerical - self.closed_form)))


def sigma_scalar(tau: float) -> SigmaSolution:
    """Slow and fast coefficients ``(sigma1, sigma2)`` at ``s_tilde = 0``."""
    if tau == 0.0:
        raise DegenerateParametersError("the scalar boundary system is singular at tau=0")
    C = boundary_matrix_scalar(tau, 0.0).real
    numerical = np.linalg.solve(C, SCALAR_TRUNCATION)
    c = 3.0 + 5.0 * SQRT33
    closed = np.array([-10.0 * (1.0 + tau) / (c * tau), 10.0 / c])
    return SigmaSolution(numerical, closed)


def system_boundary_matrix_at_zero(alpha0: float, tau1: float, tau2: float) -> np.ndarray:
    """``C_s(0)`` for the unknowns ``(sigma0, sigma1, sigma2, gamma1)``."""
    r, a = SQRT33, alpha0
    return np.array(
        [
            [(r + 4) / 10, (96 * a * tau1 - 5 * r + 73) / 40, (24 * a * tau1 + 7) / 10, -(12 * tau1 * (a - 1) + 7) / 5],
            [-(r + 4) / 26, (5 * r + 23) / 104, 5 / 26, -5 / 13],
            [-(r + 4) / 10, (96 * a * tau2 - 5 * r + 17) / 40, (24 * a * tau2 - 7) / 10, (7 - 12 * tau2 * (a - 1)) / 5],
            [(r + 4) / 26, (5 * r - 17) / 104, -5 / 26, 5 / 13],
        ]
    )


def system_boundary_matrix(alpha0: float, tau1: float, tau2: float, s_tilde: complex = 0.0) -> np.ndarray:
    """``C_s`` rebuilt from the four boundary error equations at any ``s_tilde``.

    The sum characteristic ``gamma + delta`` uses the fast and slow inflow
    roots, the difference ``gamma - delta`` the admissible outflow root.
    """
    inflow = characteristic_roots(3, "inflow", s_tilde)
    k1, k2 = inflow.pick(slow=False), inflow.pick(slow=True)
    theta = characteristic_roots(3, "outflow", s_tilde).pick(slow=False)
    s = s_tilde

    def gamma(j):
        if j == 1:
            return np.array([0, 0, 0, 1], dtype=complex)
        return 0.5 * np.array([theta ** (j - 2), k1 ** (j - 1), k2 ** (j - 1), 0])

    def delta(j):
        if j == 1:
            return np.array([0, 1, 1, -1], dtype=complex)
        return 0.5 * np.array([-(theta ** (j - 2)), k1 ** (j - 1), k2 ** (j - 1), 0])

    g, d = gamma, delta
    bc = g(1) + alpha0 * d(1)
    rows = [
        -g(1) / 5 + 2 * g(2) / 5 - g(3) / 5 + 6 * d(1) / 5 - 7 * d(2) / 5 + d(3) / 5 + 12 / 5 * tau1 * bc - s * g(1),
        2 * g(1) / 13 - 5 * g(2) / 13 + 4 * g(3) / 13 - g(4) / 13 + 7 * d(1) / 13 - 8 * d(3) / 13 + d(4) / 13 - s * g(2),
        6 * g(1) / 5 - 7 * g(2) / 5 + g(3) / 5 - d(1) / 5 + 2 * d(2) / 5 - d(3) / 5 + 12 / 5 * tau2 * bc - s * d(1),
        7 * g(1) / 13 - 8 * g(3) / 13 + g(4) / 13 + 2 * d(1) / 13 - 5 * d(2) / 13 + 4 * d(3) / 13 - d(4) / 13 - s * d(2),
    ]
    return np.array(rows)


def system_truncation(uxx: float, vxx: float) -> np.ndarray:
    """Right-hand side of the system boundary problem per unit ``h^2``."""
    return np.array(
        [
            -(3 * vxx + 2 * uxx) / 10,
            (3 * vxx + 2 * uxx) / 26,
            -(3 * uxx + 2 * vxx) / 10,
            (3 * uxx + 2 * vxx) / 26,
        ]
    )


def sigma2_closed_form(alpha0: float, tau1: float, tau2: float) -> float:
    """Slow-mode coefficient of the system per unit ``h^2 (u_xx + v_xx)``."""
    if tau1 + tau2 == 0.0 or alpha0 == -1.0:
        raise DegenerateParametersError("the system boundary problem is singular for these parameters")
    return float(-(25 * SQRT33 - 15) * (alpha0 * tau1 + tau2 + 1) / (204 * (tau1 + tau2) * (alpha0 + 1)))


def solve_system_boundary(alpha0: float, tau1: float, tau2: float, uxx: float = 1.0, vxx: float = 0.0) -> np.ndarray:
    """``(sigma0, sigma1, sigma2, gamma1)`` from a direct solve at ``s_tilde = 0``."""
    C = system_boundary_matrix_at_zero(alpha0, tau1, tau2)
    if abs(np.linalg.det(C)) < 1e-13:
        raise DegenerateParametersError("C_s(0) is singular for these parameters")
    return np.linalg.solve(C, system_truncation(uxx, vxx))


def sigma2_system(alpha0: float, tau1: float, tau2: float, tol: float = 1e-9) -> float:
    """Closed-form slow-mode coefficient, confirmed against the direct 4x4 solve."""
    if alpha0 < 0:
        raise InvalidArgumentError("alpha0 must be nonnegative")
    closed = sigma2_closed_form(alpha0, tau1, tau2)
    numerical = solve_system_boundary(alpha0, tau1, tau2)[2]
    if abs(numerical - closed) > tol * max(1.0, abs(closed)):
        raise NumericalFailureError(f"closed form {closed!r} disagrees with direct solve {numerical!r}")
    return closed


def system_determinant_closed_form(alpha0: float, tau1: float, tau2: float) -> float:
    return float(9 * (23 * SQRT33 + 177) * (alpha0 + 1) * (tau1 + tau2) / 4225)


def outflow_boundary_matrix(s_tilde: complex = 0.0) -> np.ndarray:
    """Boundary system of the advection scheme at the outflow end.

    The unknowns are the last error value and the amplitude of the decaying
    root, counted inwards from the boundary.
    """
    k = characteristic_roots(3, "outflow", s_tilde).pick(slow=False)
    return np.array(
        [
            [5 / 13, s_tilde + 5 / 13 - 12 / 13 * k + 2 / 13 * k**2],
            [s_tilde + 7 / 5, 2 / 5 * k - 9 / 5],
        ],
        dtype=complex,
    )


def kappa_bound_check(eta_h: float, slack: float = 0.1) -> tuple[float, float, bool]:
    """Compare ``1/(1-|k|^2)`` for the slow root at ``s_tilde = eta_h`` with ``1/(2 eta_h)``."""
    if not eta_h > 0:
        raise InvalidArgumentError("eta_h must be positive")
    k = characteristic_roots(3, "inflow", eta_h).pick(slow=True)
    lhs = 1.0 / (1.0 - abs(k) ** 2)
    rhs = 1.0 / (2.0 * eta_h)
    return lhs, rhs, lhs <= rhs * (1.0 + slack)
