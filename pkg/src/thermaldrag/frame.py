"""Galilean frame bookkeeping for a lab moving through the radiation background.

``gamma`` and ``D`` carry no frame dependence; a lab moving at ``u`` relative
to the background only sees the velocity offset in the drag force.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "FrameSpec",
    "lab_frame_force",
    "compensating_force",
    "infer_lab_velocity",
    "measure_compensating_force",
]

MAX_BETA = 0.01


@dataclass(frozen=True)
class FrameSpec:
    """Lab velocity ``u`` relative to the background, nonrelativistic."""

    u: tuple[float, float, float]
    speed_of_light: float

    def __post_init__(self):
        u = tuple(float(x) for x in np.broadcast_to(np.asarray(self.u, dtype=float), (3,)))
        object.__setattr__(self, "u", u)
        if not self.speed_of_light > 0:
            raise DomainError("speed of light must be positive")
        beta = math.sqrt(sum(x * x for x in u)) / self.speed_of_light
        if not beta < MAX_BETA:
            raise DomainError(f"|u|/c = {beta:.3g} is outside the nonrelativistic range (< {MAX_BETA})")


def _check(gamma, mass):
    if not gamma >= 0:
        raise DomainError("gamma must be non-negative")
    if not mass > 0:
        raise DomainError("mass must be positive")


def lab_frame_force(gamma: float, mass: float, u, v_prime) -> np.ndarray:
    """Mean drag on an atom moving at ``v_prime`` in the lab: ``-gamma M (u + v')``."""
    _check(gamma, mass)
    return -gamma * mass * (np.asarray(u, dtype=float) + np.asarray(v_prime, dtype=float))


def compensating_force(gamma: float, mass: float, u) -> np.ndarray:
    """Force ``gamma M u`` that keeps atoms at rest in the lab."""
    _check(gamma, mass)
    return gamma * mass * np.asarray(u, dtype=float)


def infer_lab_velocity(f_comp, gamma: float, mass: float) -> np.ndarray:
    """Lab velocity from a measured compensating force, ``F / (gamma M)``."""
    _check(gamma, mass)
    if gamma == 0:
        raise DomainError("lab velocity is unmeasurable without damping (gamma = 0)")
    return np.asarray(f_comp, dtype=float) / (gamma * mass)


def measure_compensating_force(final_momenta, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Compensating force and its standard error from an equilibrated
    free-running lab-frame ensemble.

    Free atoms settle at mean lab momentum ``-M u``, so ``gamma M u`` is
    estimated as ``-gamma <p'>``.
    """
    p = np.asarray(final_momenta, dtype=float)
    force = -gamma * p.mean(axis=0)
    stderr = gamma * p.std(axis=0, ddof=1) / math.sqrt(p.shape[0])
    return force, stderr
