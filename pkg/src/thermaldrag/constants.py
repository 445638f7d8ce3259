"""Physical constants in SI or natural units."""
from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    c: float
    epsilon0: float
    kB: float
    name: str

    def __post_init__(self):
        for field in ("hbar", "c", "epsilon0", "kB"):
            if not getattr(self, field) > 0:
                raise ValueError(f"{field} must be positive")


SI = PhysicalConstants(
    hbar=_sc.hbar, c=_sc.c, epsilon0=_sc.epsilon_0, kB=_sc.k, name="SI"
)
# hbar = c = epsilon0 = kB = 1
NATURAL = PhysicalConstants(hbar=1.0, c=1.0, epsilon0=1.0, kB=1.0, name="natural")

UNIT_SYSTEMS = {"SI": SI, "si": SI, "natural": NATURAL}


def get_constants(units: str) -> PhysicalConstants:
    try:
        return UNIT_SYSTEMS[units]
    except KeyError:
        raise ValueError(
            f"unknown unit system {units!r}; expected 'SI' or 'natural'"
        ) from None
