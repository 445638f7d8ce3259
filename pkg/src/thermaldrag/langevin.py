"""Ensemble integration of the momentum Langevin equation.

Each Cartesian component obeys ``dp = (-gamma (p + M u) + F) dt + sqrt(2D) dW``
where ``u`` is the lab velocity relative to the radiation background and ``F``
an external force (both zero in the background frame).

Randomness is counter-based: the three normals used by trajectory ``j`` at
step ``s`` come from Philox4x32-10 with counter ``(s, j, stream)`` and key
``seed``. Trajectories are processed in fixed-size blocks whose partial
moments are merged in block order, so results do not depend on how many
worker threads run the blocks.
"""
from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _backend
from .errors import DomainError, NumericalError
from .physics import TransportCoefficients

__all__ = [
    "SimConfig",
    "TrajectoryStats",
    "step",
    "exact_step",
    "sample_grid",
    "run_ensemble",
    "ou_mean",
    "ou_variance",
    "ks_statistic",
]

STREAM_NOISE = 1
STREAM_INIT = 2
STEPPERS = ("euler", "exact")


def step(p, gamma: float, diffusion: float, dt: float, noise):
    """One Euler-Maruyama update ``p (1 - gamma dt) + sqrt(2 D dt) xi``."""
    p = np.asarray(p, dtype=float)
    return p * (1.0 - gamma * dt) + math.sqrt(2.0 * diffusion * dt) * np.asarray(noise)


def exact_step(p, gamma: float, diffusion: float, dt: float, noise):
    """Exact Ornstein-Uhlenbeck transition over ``dt``."""
    a, _, b = _update_coefficients("exact", gamma, diffusion, 1.0, dt, np.zeros(3), np.zeros(3))
    return np.asarray(p, dtype=float) * a + b * np.asarray(noise)


def _update_coefficients(stepper, gamma, diffusion, mass, dt, drift_velocity, force):
    """``(a, c, b)`` such that one step is ``p <- a p + c + b xi``."""
    drive = np.asarray(force, dtype=float) - gamma * mass * np.asarray(drift_velocity, dtype=float)
    if stepper == "euler" or gamma == 0.0:
        return 1.0 - gamma * dt, drive * dt, math.sqrt(2.0 * diffusion * dt)
    decay = -math.expm1(-gamma * dt)  # 1 - e^{-gamma dt}
    a = 1.0 - decay
    b = math.sqrt(diffusion / gamma * -math.expm1(-2.0 * gamma * dt))
    return a, drive / gamma * decay, b


def sample_grid(n_steps: int, n_linear: int = 20, n_geometric: int = 20) -> np.ndarray:
    """Sorted step indices: ``n_linear`` evenly spaced plus ``n_geometric``
    log-spaced, always including 0 and ``n_steps``."""
    lin = np.linspace(0, n_steps, n_linear + 1) if n_linear else np.array([0.0])
    geo = np.geomspace(1, n_steps, n_geometric) if (n_geometric and n_steps >= 1) else np.array([])
    steps = np.unique(np.concatenate([[0, n_steps], np.rint(lin), np.rint(geo)]).astype(np.int64))
    return steps


def _vec3(x, name) -> tuple[float, float, float]:
    v = tuple(float(c) for c in np.broadcast_to(np.asarray(x, dtype=float), (3,)))
    if not all(math.isfinite(c) for c in v):
        raise DomainError(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class SimConfig:
    gamma: float
    diffusion: float
    dt: float
    n_steps: int
    n_trajectories: int
    mass: float = 1.0
    seed: int = 0
    p0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    initial_variance: float = 0.0  # 0 means a delta at p0
    stepper: str = "euler"
    drift_velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    external_force: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sample_steps: tuple[int, ...] | None = None
    block_size: int = 4096
    record_paths: bool = False
    histogram_bins: int = 64

    def __post_init__(self):
        for name in ("p0", "drift_velocity", "external_force"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))
        if not (self.gamma >= 0 and self.diffusion >= 0):
            raise DomainError("gamma and D must be non-negative")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError("dt must be positive")
        if not (self.mass > 0):
            raise DomainError("mass must be positive")
        if int(self.n_steps) < 0 or int(self.n_steps) >= 2**32:
            raise DomainError("n_steps must lie in [0, 2**32)")
        if int(self.n_trajectories) < 1:
            raise DomainError("n_trajectories must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.initial_variance < 0:
            raise DomainError("initial_variance must be >= 0")
        if self.stepper not in STEPPERS:
            raise DomainError(f"stepper must be one of {STEPPERS}")
        if self.block_size < 1:
            raise DomainError("block_size must be >= 1")
        if self.sample_steps is None:
            object.__setattr__(self, "sample_steps", tuple(int(s) for s in sample_grid(self.n_steps)))
        else:
            steps = tuple(sorted({int(s) for s in self.sample_steps}))
            if not steps or steps[0] < 0 or steps[-1] > self.n_steps:
                raise DomainError("sample_steps must lie within [0, n_steps]")
            object.__setattr__(self, "sample_steps", steps)
        if self.stepper == "euler" and self.gamma * self.dt >= 0.1:
            warnings.warn(
                f"gamma*dt = {self.gamma * self.dt:.3g} >= 0.1; Euler-Maruyama is inaccurate here",
                RuntimeWarning, stacklevel=3,
            )

    @classmethod
    def from_coefficients(cls, coeffs: TransportCoefficients, **kwargs) -> "SimConfig":
        return cls(gamma=coeffs.gamma, diffusion=coeffs.diffusion, mass=coeffs.mass, **kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("p0", "drift_velocity", "external_force", "sample_steps"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(**d)


@dataclass
class TrajectoryStats:
    """Ensemble moments at the sample times.

    ``variance`` is the unbiased per-component sample variance;
    ``mean_p_squared_components`` the plain ensemble average of ``p_a**2``.
    """

    times: np.ndarray
    sample_steps: np.ndarray
    n_trajectories: int
    mean_momentum: np.ndarray  # (n_samples, 3)
    variance: np.ndarray  # (n_samples, 3)
    mean_p_squared_components: np.ndarray  # (n_samples, 3)
    final_momenta: np.ndarray  # (n_trajectories, 3)
    histogram_edges: np.ndarray  # (bins + 1, 3)
    histogram_counts: np.ndarray  # (bins, 3)
    backend: str
    paths: np.ndarray | None = field(default=None, repr=False)

    @property
    def mean_p_squared(self) -> np.ndarray:
        return self.mean_p_squared_components.sum(axis=1)

    @property
    def standard_error(self) -> np.ndarray:
        return np.sqrt(self.variance / self.n_trajectories)

    def moments_csv(self, path: str | Path) -> None:
        cols = ["t", "mean_px", "mean_py", "mean_pz", "var_px", "var_py", "var_pz",
                "p2_x", "p2_y", "p2_z", "p2_total"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for i, t in enumerate(self.times):
                row = [t, *self.mean_momentum[i], *self.variance[i],
                       *self.mean_p_squared_components[i], self.mean_p_squared[i]]
                w.writerow([repr(float(x)) for x in row])

    def histogram_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["component", "bin_left", "bin_right", "count"])
            for a, name in enumerate("xyz"):
                edges = self.histogram_edges[:, a]
                for i, n in enumerate(self.histogram_counts[:, a]):
                    w.writerow([name, repr(float(edges[i])), repr(float(edges[i + 1])), int(n)])


def _merge(count_a, mean_a, m2_a, count_b, mean_b, m2_b):
    total = count_a + count_b
    delta = mean_b - mean_a
    mean = mean_a + delta * (count_b / total)
    m2 = m2_a + m2_b + delta**2 * (count_a * count_b / total)
    return total, mean, m2


def run_ensemble(config: SimConfig, workers: int = 1, backend: str | None = None) -> TrajectoryStats:
    """Evolve ``config.n_trajectories`` independent trajectories.

    ``workers`` threads process blocks concurrently; output is identical for
    any ``workers``.
    """
    kern = _backend.get(backend)
    name = backend or _backend.NAME
    seed = int(config.seed)
    key0, key1 = seed & 0xFFFFFFFF, seed >> 32
    a, c, b = _update_coefficients(
        config.stepper, config.gamma, config.diffusion, config.mass, config.dt,
        config.drift_velocity, config.external_force,
    )
    sample_steps = np.asarray(config.sample_steps, dtype=np.int64)
    ns = sample_steps.size
    n = int(config.n_trajectories)
    bs = int(config.block_size)
    starts = list(range(0, n, bs))

    try:
        final = np.empty((n, 3))
        paths = np.empty((n, ns, 3)) if config.record_paths else None
        block_mean = np.empty((len(starts), ns, 3))
        block_m2 = np.empty((len(starts), ns, 3))
    except MemoryError as exc:
        raise MemoryError(
            f"cannot allocate ensemble buffers for {n} trajectories x {ns} samples"
        ) from exc

    p0 = np.asarray(config.p0)
    sigma0 = math.sqrt(config.initial_variance)

    def run_block(bi: int) -> int:
        start = starts[bi]
        m = min(bs, n - start)
        p = np.empty((m, 3))
        p[:] = p0
        if sigma0 > 0:
            p += sigma0 * kern.philox_normals(0, start, m, key0, key1, STREAM_INIT)
        block_paths = paths[start:start + m] if paths is not None else None
        bad = kern.ensemble_block(
            p, start, key0, key1, STREAM_NOISE, int(config.n_steps), a, b, c,
            sample_steps, block_mean[bi], block_m2[bi], block_paths,
        )
        final[start:start + m] = p
        return bad

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bad = list(pool.map(run_block, range(len(starts))))
    else:
        bad = [run_block(i) for i in range(len(starts))]
    if any(bad):
        first = next(i for i, x in enumerate(bad) if x)
        raise NumericalError(
            f"{sum(bad)} trajectories became non-finite (first in block starting at "
            f"trajectory {starts[first]}); check gamma*dt and D"
        )

    count = min(bs, n)
    mean, m2 = block_mean[0].copy(), block_m2[0].copy()
    for bi in range(1, len(starts)):
        m = min(bs, n - starts[bi])
        count, mean, m2 = _merge(count, mean, m2, m, block_mean[bi], block_m2[bi])
    variance = m2 / (n - 1) if n > 1 else np.zeros_like(m2)
    p2 = m2 / n + mean**2

    edges = np.empty((config.histogram_bins + 1, 3))
    counts = np.empty((config.histogram_bins, 3), dtype=np.int64)
    for alpha in range(3):
        counts[:, alpha], edges[:, alpha] = np.histogram(final[:, alpha], bins=config.histogram_bins)

    return TrajectoryStats(
        times=sample_steps * config.dt,
        sample_steps=sample_steps,
        n_trajectories=n,
        mean_momentum=mean,
        variance=variance,
        mean_p_squared_components=p2,
        final_momenta=final,
        histogram_edges=edges,
        histogram_counts=counts,
        backend=name,
        paths=paths,
    )


def ou_mean(p0, gamma, t, drift=0.0):
    """Mean of the OU process relaxing toward ``drift`` (equilibrium momentum)."""
    t = np.asarray(t, dtype=float)
    return drift + (np.asarray(p0) - drift) * np.exp(-gamma * t)


def ou_variance(var0, gamma, diffusion, t):
    """Per-component variance of the OU process at time ``t``."""
    t = np.asarray(t, dtype=float)
    if gamma == 0:
        return var0 + 2.0 * diffusion * t
    return var0 * np.exp(-2.0 * gamma * t) + diffusion / gamma * -np.expm1(-2.0 * gamma * t)


def ks_statistic(samples: Sequence[float], cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
