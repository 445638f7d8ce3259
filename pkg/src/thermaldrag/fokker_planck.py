"""Finite-volume solver for the one-component momentum distribution.

Solves ``d pi/dt = d/dp [gamma p pi + D d pi/dp]`` on a uniform grid with
Chang-Cooper flux weighting and no-flux walls. Time stepping is
Crank-Nicolson, preceded by two half-size backward Euler steps to damp
non-smooth initial data.

Chang-Cooper weighting makes the sampled Gaussian ``exp(-gamma p^2 / 2D)``
an exact discrete steady state, and the flux form conserves
``sum(pi) * dp`` to round-off.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .errors import DomainError, GridTooNarrowError

__all__ = [
    "MomentumGrid",
    "DistributionState",
    "gaussian_state",
    "stationary_solution",
    "evolve",
    "generator",
    "read_snapshot",
]

BOUNDARY_TOLERANCE = 1e-12
# half-width in standard deviations at which a Gaussian tail drops below 1e-12
_TAIL_SIGMAS = math.sqrt(2.0 * math.log(1.0 / BOUNDARY_TOLERANCE))


@dataclass(frozen=True)
class MomentumGrid:
    p_min: float
    p_max: float
    n_points: int

    def __post_init__(self):
        if not (self.p_min < 0.0 < self.p_max):
            raise DomainError("grid must satisfy p_min < 0 < p_max")
        if self.n_points < 3:
            raise DomainError("grid needs at least 3 points")

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_points)

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "MomentumGrid":
        return cls(-half_width, half_width, n_points)

    def to_dict(self) -> dict:
        return {"p_min": self.p_min, "p_max": self.p_max, "n_points": self.n_points}


@dataclass
class DistributionState:
    grid: MomentumGrid
    values: np.ndarray
    time: float = 0.0

    @property
    def total(self) -> float:
        return float(self.values.sum() * self.grid.dp)

    def moment(self, order: int) -> float:
        return float((self.grid.points**order * self.values).sum() * self.grid.dp)

    @property
    def mean(self) -> float:
        return self.moment(1) / self.total

    @property
    def variance(self) -> float:
        m = self.mean
        return float(((self.grid.points - m) ** 2 * self.values).sum() * self.grid.dp) / self.total

    def cdf(self, p):
        """Piecewise-linear CDF through the cell edges ``p_i +- dp/2``."""
        dp = self.grid.dp
        edges = np.concatenate([[self.grid.p_min - dp / 2], self.grid.points + dp / 2])
        cum = np.concatenate([[0.0], np.cumsum(self.values) * dp])
        return np.interp(p, edges, cum / cum[-1])

    def to_csv(self, path: str | Path, gamma: float, diffusion: float) -> None:
        """Snapshot as ``p,pi`` rows under a ``# {json}`` header line."""
        header = {"t": self.time, "gamma": gamma, "D": diffusion, "grid": self.grid.to_dict()}
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
            fh.write("p,pi\n")
            for p, v in zip(self.grid.points, self.values):
                fh.write(f"{float(p)!r},{float(v)!r}\n")


def read_snapshot(path: str | Path) -> tuple[DistributionState, dict]:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing JSON header line")
        header = json.loads(first[2:])
        if fh.readline().strip() != "p,pi":
            raise ValueError(f"{path}: expected column header 'p,pi'")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    g = header["grid"]
    grid = MomentumGrid(g["p_min"], g["p_max"], g["n_points"])
    return DistributionState(grid, data[:, 1].copy(), header["t"]), header


def gaussian_state(grid: MomentumGrid, mean: float, variance: float, time: float = 0.0) -> DistributionState:
    """Normalized Gaussian sampled on the grid."""
    if not variance > 0:
        raise DomainError("variance must be positive")
    p = grid.points
    v = np.exp(-((p - mean) ** 2) / (2.0 * variance))
    v /= v.sum() * grid.dp
    return DistributionState(grid, v, time)


def stationary_solution(grid: MomentumGrid, gamma: float, diffusion: float) -> DistributionState:
    """Equilibrium ``exp(-gamma p^2 / 2D)``, normalized on the grid."""
    if not gamma > 0:
        raise DomainError("no stationary state without damping (gamma = 0)")
    if not diffusion > 0:
        raise DomainError("no stationary state without diffusion (D = 0)")
    return gaussian_state(grid, 0.0, diffusion / gamma)


def _chang_cooper_delta(w: np.ndarray) -> np.ndarray:
    # 1/w - 1/(e^w - 1), with the small-w series and the w -> +-inf limits
    out = np.empty_like(w)
    small = np.abs(w) < 1e-3
    ws = w[small]
    out[small] = 0.5 - ws / 12.0 + ws**3 / 720.0
    wl = w[~small]
    with np.errstate(over="ignore", divide="ignore"):
        out[~small] = 1.0 / wl - 1.0 / np.expm1(wl)
    return out


def generator(grid: MomentumGrid, gamma: float, diffusion: float):
    """Tridiagonal ``(lower, diag, upper)`` of the discrete operator ``L``.

    ``d pi_i/dt = (L pi)_i``. Columns of ``L`` sum to zero.
    """
    n, dp = grid.n_points, grid.dp
    p_half = grid.p_min + (np.arange(n - 1) + 0.5) * dp
    drift = gamma * p_half
    if diffusion > 0:
        delta = _chang_cooper_delta(drift * dp / diffusion)
    else:
        delta = np.where(drift > 0, 0.0, np.where(drift < 0, 1.0, 0.5))
    # flux F_{i+1/2} = A_i pi_{i+1} + B_i pi_i
    A = drift * (1.0 - delta) + diffusion / dp
    B = drift * delta - diffusion / dp
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    # (F_{i+1/2} - F_{i-1/2}) / dp, no flux through the walls
    diag[:-1] += B / dp
    upper[:-1] += A / dp
    diag[1:] -= A / dp
    lower[1:] -= B / dp
    return lower, diag, upper


def _required_half_width(mean: float, variance: float) -> float:
    return abs(mean) + _TAIL_SIGMAS * math.sqrt(max(variance, 0.0))


def _check_boundaries(state: DistributionState, when: str, required: float) -> None:
    peak = float(np.max(np.abs(state.values)))
    edge = max(abs(float(state.values[0])), abs(float(state.values[-1])))
    if peak > 0 and edge > BOUNDARY_TOLERANCE * peak:
        raise GridTooNarrowError(
            f"{when}: boundary density {edge / peak:.3g} of peak exceeds {BOUNDARY_TOLERANCE:g}",
            required,
        )


def evolve(state: DistributionState, gamma: float, diffusion: float, t_target: float,
           dt: float | None = None, startup_steps: int = 2,
           backend: str | None = None) -> DistributionState:
    """Advance ``state`` to ``t_target``.

    ``dt`` defaults to ``0.005/gamma`` (or the diffusion time of one grid
    spacing times 100 without damping). Raises :class:`GridTooNarrowError`
    when the distribution reaches the walls at the start or end.
    """
    if not (gamma >= 0 and diffusion >= 0):
        raise DomainError("gamma and D must be non-negative")
    span = t_target - state.time
    if span < 0:
        raise DomainError("t_target is earlier than the state time")
    grid = state.grid

    m0, v0 = state.mean, state.variance
    if gamma > 0:
        m1 = m0 * math.exp(-gamma * span)
        v1 = v0 * math.exp(-2 * gamma * span) + diffusion / gamma * -math.expm1(-2 * gamma * span)
    else:
        m1, v1 = m0, v0 + 2 * diffusion * span
    required = max(_required_half_width(m0, v0), _required_half_width(m1, v1))
    _check_boundaries(state, "initial state", required)
    if required > min(-grid.p_min, grid.p_max):
        raise GridTooNarrowError("predicted distribution exceeds the grid", required)

    if span == 0 or (gamma == 0 and diffusion == 0):
        return DistributionState(grid, state.values.copy(), t_target)

    if dt is None:
        dt = 0.005 / gamma if gamma > 0 else 100.0 * grid.dp**2 / diffusion
    n_steps = max(1, math.ceil(span / dt - 1e-9))
    h = span / n_steps
    kern = _backend.get(backend)
    lower, diag, upper = generator(grid, gamma, diffusion)

    x = state.values
    done = 0
    if startup_steps > 0 and n_steps > 1:
        x = kern.theta_steps(lower, diag, upper, 1.0, h / startup_steps, x, startup_steps)
        done = 1
    x = kern.theta_steps(lower, diag, upper, 0.5, h, x, n_steps - done)

    out = DistributionState(grid, np.asarray(x), t_target)
    _check_boundaries(out, "final state", required)
    return out
