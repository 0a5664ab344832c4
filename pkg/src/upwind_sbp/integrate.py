"""Classical fourth order Runge-Kutta time stepping with energy monitoring."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError, NumericalBlowupError

Rhs = Callable[[np.ndarray, float], np.ndarray]

#: states growing beyond this multiple of the initial size count as blowup
BLOWUP_FACTOR = 1e8


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size is ``cfl * h`` unless ``dt`` is given; the last step is shortened to hit ``t_final``."""

    t_final: float
    cfl: float = 0.5
    dt: float | None = None

    def __post_init__(self):
        if not self.t_final > 0:
            raise InvalidArgumentError(f"t_final must be positive, got {self.t_final}")
        if self.dt is None and not self.cfl > 0:
            raise InvalidArgumentError(f"cfl must be positive, got {self.cfl}")
        if self.dt is not None and not self.dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {self.dt}")

    def step_size(self, h: float) -> float:
        return self.dt if self.dt is not None else self.cfl * h

    def steps(self, h: float) -> list[float]:
        """Step sizes that add up to ``t_final``."""
        dt = self.step_size(h)
        full = math.floor(self.t_final / dt * (1 + 1e-12))
        sizes = [dt] * full
        rest = self.t_final - full * dt
        if rest > 1e-12 * self.t_final:
            sizes.append(rest)
        return sizes


def rk4_step(rhs: Rhs, u: np.ndarray, t: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    k1 = rhs(u, t)
    k2 = rhs(u + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(u + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(u + dt * k3, t + dt)
    out = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError("non-finite state after a Runge-Kutta step")
    return out


@dataclass
class Trajectory:
    """Snapshots, the energy after every step, and steps where the energy grew."""

    times: list[float] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    energy_violations: list[int] = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def max_relative_growth(self) -> float:
        e = np.asarray(self.energies)
        if len(e) < 2:
            return 0.0
        return float(np.max((e[1:] - e[:-1]) / np.maximum(e[:-1], np.finfo(float).tiny)))


def integrate(
    rhs: Rhs,
    u0: np.ndarray,
    config: IntegratorConfig,
    h: float,
    weights: np.ndarray | None = None,
    snapshot_every: int = 0,
    snapshot_times: tuple[float, ...] = (),
    monitor_energy: bool = False,
    growth_tol: float = 1e-10,
    t0: float = 0.0,
) -> Trajectory:
    """Advance ``u0`` from ``t0`` to ``t0 + t_final``.

    ``weights`` is the diagonal of the norm used for the energy (defaults to
    ``h``).  With ``monitor_energy`` every step whose relative energy growth
    exceeds ``growth_tol`` is recorded in ``energy_violations``; this is only
    meaningful for homogeneous boundary data.  Snapshots are taken every
    ``snapshot_every`` steps and at the first step reaching each of
    ``snapshot_times``; the initial and final states are always kept.
    """
    u = np.array(u0, dtype=float)
    w = np.full(len(u), h) if weights is None else np.asarray(weights)
    scale = max(1.0, float(np.max(np.abs(u)))) * BLOWUP_FACTOR
    traj = Trajectory()

    def energy(v):
        return float(v @ (w * v))

    traj.times.append(t0)
    traj.states.append(u.copy())
    traj.energies.append(energy(u))
    pending = sorted(t0 + s for s in snapshot_times)
    t = t0
    sizes = config.steps(h)
    for step, dt in enumerate(sizes, start=1):
        try:
            u = rk4_step(rhs, u, t, dt)
        except NumericalBlowupError as exc:
            raise NumericalBlowupError(f"{exc} (step {step}, t={t:.6g})") from exc
        t = t0 + config.t_final if step == len(sizes) else t + dt
        if np.max(np.abs(u)) > scale:
            raise NumericalBlowupError(f"solution exceeded {scale:.3g} at step {step}, t={t:.6g}")
        e = energy(u)
        if monitor_energy and e - traj.energies[-1] > growth_tol * traj.energies[-1]:
            traj.energy_violations.append(step)
        traj.energies.append(e)
        keep = step == len(sizes) or (snapshot_every and step % snapshot_every == 0)
        while pending and t >= pending[0] - 1e-12:
            pending.pop(0)
            keep = True
        if keep:
            traj.times.append(t)
            traj.states.append(u.copy())
    return traj
