"""Convergence sweeps with manufactured solutions and the four-shapes benchmark."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError, NumericalBlowupError
from .integrate import IntegratorConfig, Trajectory, integrate
from .sat import AdvectionScheme, SystemRhs, SystemScheme, advection_rhs
from .sbp import Grid, build_grid, build_upwind_pair
from .stabilization import StabilizationStats, StabilizedWeno
from .stencils import spacing_weights

DEFAULT_GRIDS = (41, 81, 161, 321, 641)

#: step size factors; convergence sweeps use a smaller one so time error stays below space error
DEFAULT_CFL = {"linear": 0.5, "weno": 0.3, "convergence": 0.25}

TWO_PI = 2.0 * np.pi


def advection_exact(x, t):
    return np.sin(TWO_PI * (x - t) + 1.0)


def system_exact(x, t):
    u = -np.sin(TWO_PI * (x + t)) + np.cos(TWO_PI * (x - t))
    v = np.sin(TWO_PI * (x + t)) + np.cos(TWO_PI * (x - t))
    return u, v


@dataclass(frozen=True)
class ManufacturedProblem:
    """Smooth exact solution on ``[0, 1]`` with boundary data read off from it."""

    kind: str
    exact: Callable[[np.ndarray, float], np.ndarray]
    t_final: float = 1.0
    domain: tuple[float, float] = (0.0, 1.0)


def advection_problem() -> ManufacturedProblem:
    return ManufacturedProblem("advection", advection_exact)


def system_problem() -> ManufacturedProblem:
    return ManufacturedProblem("system", lambda x, t: np.concatenate(system_exact(x, t)))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    h: float
    error: float
    rate: float = math.nan
    note: str = ""


@dataclass
class ConvergenceTable:
    kind: str
    p: int
    params: dict
    rows: list[ConvergenceRow] = field(default_factory=list)

    @property
    def valid(self) -> list[ConvergenceRow]:
        return [r for r in self.rows if math.isfinite(r.error) and r.error > 0]

    @property
    def slope(self) -> float:
        rows = self.valid
        return fit_rate([r.error for r in rows], [r.h for r in rows])

    def finest_slope(self, count: int = 3) -> float:
        rows = self.valid[-count:]
        return fit_rate([r.error for r in rows], [r.h for r in rows])

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["n", "h", "error", "rate", "note"])
        for r in self.rows:
            writer.writerow([r.n, repr(r.h), repr(r.error), "" if math.isnan(r.rate) else repr(r.rate), r.note])
        valid = self.valid
        if len(valid) >= 2:
            writer.writerow(["# slope", repr(self.slope), "finest3", repr(self.finest_slope()), ""])


def fit_rate(errors, hs) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape:
        raise InvalidArgumentError("errors and hs must have the same length")
    ok = np.isfinite(errors) & (errors > 0) & (hs > 0)
    if ok.sum() < 2:
        raise InsufficientDataError("need at least two positive errors to fit a rate")
    return float(np.polyfit(np.log(hs[ok]), np.log(errors[ok]), 1)[0])


def h_norm_error(v: np.ndarray, u: np.ndarray, weights: np.ndarray) -> float:
    d = v - u
    return float(np.sqrt(d @ (weights * d)))


def _advection_weno_rhs(op: StabilizedWeno, tau: float, g, track_every: int = 0):
    w0 = op.norm_weights[0]
    count = [0]

    def rhs(u, t):
        count[0] += 1
        track = bool(track_every) and count[0] % track_every == 0
        out = -op.apply(u, track=track)
        out[0] += tau / w0 * (u[0] - g(t))
        return out

    return rhs


def _run_single(kind: str, p: int, n: int, params: dict, cfl: float) -> float:
    tau = params.get("tau", -1.0)
    if kind == "system":
        problem = system_problem()
        grid = build_grid(n)
        pair = build_upwind_pair(p, grid)
        a0, a1 = params.get("alpha0", 0.5), params.get("alpha1", 0.0)

        def g1(t):
            u, v = system_exact(0.0, t)
            return u + a0 * v

        def gn(t):
            u, v = system_exact(1.0, t)
            return u + a1 * v

        scheme = SystemScheme(
            pair, a0, a1,
            params.get("tau1", -4 / 3), params.get("tau2", -1 / 3),
            params.get("tau3", 0.0), params.get("tau4", 1.0),
            g1, gn,
        )
        rhs = SystemRhs(scheme)
        weights = np.tile(pair.norm_weights, 2)
    else:
        problem = advection_problem()
        grid = build_grid(n)

        def g(t):
            return advection_exact(0.0, t)

        if kind == "advection":
            scheme = AdvectionScheme(build_upwind_pair(p, grid), tau, g)
            weights = scheme.pair.norm_weights

            def rhs(u, t):
                return advection_rhs(scheme, u, t)

        elif kind == "weno":
            op = StabilizedWeno(p, grid, params.get("epsilon"), params.get("delta"))
            weights = op.norm_weights
            rhs = _advection_weno_rhs(op, tau, g)
        else:
            raise InvalidArgumentError(f"unknown convergence kind {kind!r}")
    u0 = problem.exact(grid.points, 0.0)
    config = IntegratorConfig(problem.t_final, cfl=cfl)
    final = integrate(rhs, u0, config, grid.h, weights).final
    return h_norm_error(final, problem.exact(grid.points, problem.t_final), weights)


def run_convergence(
    kind: str,
    p: int,
    grids=DEFAULT_GRIDS,
    cfl: float | None = None,
    **params,
) -> ConvergenceTable:
    """Errors at ``t = 1`` on each grid, plus pairwise rates.

    ``kind`` is ``advection``, ``system`` or ``weno``.  Parameters are ``tau``
    (advection and weno), ``alpha0, alpha1, tau1..tau4`` (system) and
    ``epsilon, delta`` (weno).  A grid that blows up is kept as a NaN row.
    """
    grids = list(grids)
    if any(b <= a for a, b in zip(grids, grids[1:])):
        raise InvalidArgumentError("grids must be strictly increasing")
    cfl = DEFAULT_CFL["convergence"] if cfl is None else cfl
    table = ConvergenceTable(kind, p, dict(params))
    prev = None
    for n in grids:
        h = 1.0 / (n - 1)
        try:
            err, note = _run_single(kind, p, n, params, cfl), ""
        except NumericalBlowupError as exc:
            err, note = math.nan, f"blowup: {exc}"
        rate = math.nan
        if prev is not None and math.isfinite(err) and math.isfinite(prev.error) and err > 0:
            rate = math.log(prev.error / err) / math.log(prev.h / h)
        row = ConvergenceRow(n, h, err, rate, note)
        table.rows.append(row)
        prev = row
    return table


# four-shapes benchmark on [-1, 1]

_DZ = 0.005
_Z = -1.2
_ALPHA = 10.0
_BETA = math.log(2.0) / (36.0 * _DZ**2)


#: inflow time interval of each shape
SHAPE_TIMES = {"gaussian": (0.0, 0.4), "square": (0.6, 0.8), "triangle": (1.0, 1.2), "ellipse": (1.4, 1.6)}


def four_shapes_inflow(t):
    """Inflow data carrying a Gaussian, a square, a triangle and an ellipse."""
    t = np.asarray(t, dtype=float)
    s = -1.0 - t
    out = np.zeros_like(t)

    def gauss(z):
        return np.exp(-_BETA * (s - z) ** 2)

    def ellipse(a):
        return np.sqrt(np.maximum(0.0, 1.0 - a**2 * (s + 2.5) ** 2))

    m = (t >= 0.0) & (t <= 0.4)
    out = np.where(m, (gauss(_Z - _DZ) + gauss(_Z + _DZ) + 4.0 * gauss(_Z)) / 6.0, out)
    out = np.where((t >= 0.6) & (t <= 0.8), 1.0, out)
    out = np.where((t >= 1.0) & (t <= 1.2), np.maximum(0.0, 1.0 - np.abs(10.0 * (s + 2.1))), out)
    m = (t >= 1.4) & (t <= 1.6)
    out = np.where(m, (ellipse(_ALPHA - _DZ) + ellipse(_ALPHA + _DZ) + 4.0 * ellipse(_ALPHA)) / 6.0, out)
    return float(out) if out.ndim == 0 else out


def four_shapes_exact(x, t):
    """The inflow signal transported to ``x``; zero ahead of the front."""
    x = np.asarray(x, dtype=float)
    arrival = t - (x + 1.0)
    return np.where(arrival >= 0.0, four_shapes_inflow(np.maximum(arrival, 0.0)), 0.0)


def total_variation(u: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(u))))


@dataclass
class FourShapesResult:
    scheme: str
    p: int
    grid: Grid
    t_final: float
    solution: np.ndarray
    exact: np.ndarray
    stats: StabilizationStats | None = None
    trajectory: Trajectory | None = None

    @property
    def overshoot(self) -> float:
        return float(np.max(self.solution) - 1.0)

    @property
    def undershoot(self) -> float:
        return float(-np.min(self.solution))

    @property
    def total_variation(self) -> float:
        return total_variation(self.solution)

    def shape_window(self, shape: str) -> np.ndarray:
        """Grid mask around one of the four shapes at the final time."""
        start, stop = SHAPE_TIMES[shape]
        x = self.grid.points
        lo, hi = self.t_final - stop - 1.0, self.t_final - start - 1.0
        margin = 0.1
        return (x >= lo - margin) & (x <= hi + margin)

    def local_overshoot(self, shape: str) -> float:
        """``max(u) - max(exact)`` near one shape."""
        mask = self.shape_window(shape)
        return float(np.max(self.solution[mask]) - np.max(self.exact[mask]))

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["x", "u", "exact"])
        for x, u, e in zip(self.grid.points, self.solution, self.exact):
            writer.writerow([repr(float(x)), repr(float(u)), repr(float(e))])


def _four_shapes_rhs(scheme: str, p: int, grid: Grid, tau: float, g, track_every: int):
    if scheme == "weno":
        op = StabilizedWeno(p, grid)
        return _advection_weno_rhs(op, tau, g, track_every), op.norm_weights, op.stats
    if scheme == "linear":
        adv = AdvectionScheme(build_upwind_pair(p, grid), tau, g)
        return (lambda u, t: advection_rhs(adv, u, t)), adv.pair.norm_weights, None
    raise InvalidArgumentError(f"scheme must be 'weno' or 'linear', got {scheme!r}")


def run_four_shapes(
    scheme: str = "weno",
    p: int = 4,
    n: int = 401,
    t_final: float = 1.9,
    tau: float = -1.0,
    cfl: float | None = None,
    track_every: int = 10,
    snapshot_every: int = 0,
) -> FourShapesResult:
    """Transport the four shapes into ``[-1, 1]`` from zero initial data.

    For the WENO scheme every ``track_every``-th right-hand side evaluation
    also certifies that the stabilized symmetric part is positive semidefinite.
    """
    if n < 201:
        raise InvalidArgumentError("the four-shapes test needs n >= 201 to resolve the shapes")
    grid = build_grid(n, -1.0, 1.0)
    rhs, weights, stats = _four_shapes_rhs(scheme, p, grid, tau, four_shapes_inflow, track_every)
    cfl = DEFAULT_CFL["weno" if scheme == "weno" else "linear"] if cfl is None else cfl
    traj = integrate(rhs, np.zeros(n), IntegratorConfig(t_final, cfl=cfl), grid.h, weights, snapshot_every)
    exact = four_shapes_exact(grid.points, t_final)
    return FourShapesResult(scheme, p, grid, t_final, traj.final, exact, stats, traj)


def run_energy_decay(
    p: int = 4,
    n: int = 401,
    t_final: float = 0.5,
    tau: float = -1.0,
    cfl: float | None = None,
    start: float = 1.9,
) -> Trajectory:
    """Stabilized WENO advection of the four-shapes profile with zero inflow.

    The profile at time ``start`` is the initial state; the energy is
    recorded after every step and growth beyond ``1e-10`` is flagged.
    """
    grid = build_grid(n, -1.0, 1.0)
    op = StabilizedWeno(p, grid)
    rhs = _advection_weno_rhs(op, tau, lambda t: 0.0)
    u0 = four_shapes_exact(grid.points, start)
    cfl = DEFAULT_CFL["weno"] if cfl is None else cfl
    return integrate(rhs, u0, IntegratorConfig(t_final, cfl=cfl), grid.h, op.norm_weights, monitor_energy=True)


def sample_state(kind: str, grid: Grid) -> np.ndarray:
    """Deterministic test states: ``smooth``, ``step`` or ``random`` (fixed seed)."""
    x = grid.points
    if kind == "smooth":
        return np.sin(TWO_PI * x + 1.0)
    if kind == "step":
        mid = 0.5 * (grid.left + grid.right)
        return np.where(x < mid, 1.0, 0.0)
    if kind == "random":
        return np.random.default_rng(12345).uniform(-1.0, 1.0, grid.n)
    raise InvalidArgumentError(f"state must be smooth, step or random, got {kind!r}")


@dataclass(frozen=True)
class StabilizationReport:
    p: int
    n: int
    state: str
    min_eig_r: float
    min_eig_stabilized: float
    max_correction: float
    fallbacks: int
    residual: float

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        names = ["p", "n", "state", "min_eig_r", "min_eig_r_plus_rs", "max_abs_rs", "fallbacks", "residual"]
        writer.writerow(names)
        writer.writerow(
            [
                self.p, self.n, self.state, repr(self.min_eig_r), repr(self.min_eig_stabilized),
                repr(self.max_correction), self.fallbacks, repr(self.residual),
            ]
        )


def stabilization_report(p: int, n: int, state: str) -> StabilizationReport:
    """Eigenvalue certificate of the stabilized operator at one sample state."""
    grid = build_grid(n)
    op = StabilizedWeno(p, grid)
    u = sample_state(state, grid)
    R = op.split(u).R
    min_r = float(np.linalg.eigvalsh(R)[0])
    Rs = op.correction_matrix(u)
    min_s = float(np.linalg.eigvalsh(R + Rs)[0])
    return StabilizationReport(
        p, n, state, min_r, min_s, float(np.max(np.abs(Rs))), op.stats.fallbacks, op.stats.max_residual
    )


def norm_weights(p: int, grid: Grid) -> np.ndarray:
    return spacing_weights(p, grid.n) * grid.h
