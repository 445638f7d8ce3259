"""Transport coefficients of an atom in a thermal photon background.

Bose factors, free-space spontaneous emission, and the damping rate ``gamma``
and momentum diffusion coefficient ``D`` for two-level and multilevel atoms.
The mean radiation force on an atom moving at velocity ``v`` is ``-gamma*M*v``
and the force fluctuations are white with ``<xi_a xi_b> = 2 D delta_ab``.

All functions accept plain floats; the Bose helpers also broadcast over numpy
arrays. Every thermal factor is written in terms of ``expm1`` so that large
``beta*hbar*omega`` (optical lines at room temperature in SI units) underflow
cleanly to zero instead of producing ``inf/inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import SI, PhysicalConstants
from .errors import DomainError

__all__ = [
    "ThermalEnvironment",
    "TwoLevelAtom",
    "Transition",
    "MultilevelAtom",
    "TransportCoefficients",
    "bose_occupation",
    "bose_derivative",
    "spontaneous_rate",
    "dipole_from_rate",
    "sigma_z_expectation",
    "damping_coefficient",
    "diffusion_coefficient",
    "two_level_coefficients",
    "level_populations",
    "multilevel_coefficients",
    "photon_density_of_states",
]


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class ThermalEnvironment:
    """Blackbody background at temperature ``temperature``.

    ``temperature`` is in kelvin for SI constants and in energy units
    (``kB = 1``) for natural constants.
    """

    temperature: float
    constants: PhysicalConstants = SI

    def __post_init__(self):
        if not (self.temperature >= 0 and math.isfinite(self.temperature)):
            raise DomainError(f"temperature must be finite and >= 0, got {self.temperature}")

    @classmethod
    def from_reduced(cls, beta_hbar_omega: float, omega: float,
                     constants: PhysicalConstants = SI) -> "ThermalEnvironment":
        """Environment for which ``beta*hbar*omega`` equals ``beta_hbar_omega``."""
        if not beta_hbar_omega > 0:
            raise DomainError("beta*hbar*omega must be positive")
        return cls(constants.hbar * omega / (constants.kB * beta_hbar_omega), constants)

    @property
    def is_zero(self) -> bool:
        return self.temperature == 0.0

    @property
    def beta(self) -> float:
        if self.is_zero:
            return math.inf
        return 1.0 / (self.constants.kB * self.temperature)

    @property
    def beta_hbar(self) -> float:
        if self.is_zero:
            return math.inf
        return self.constants.hbar / (self.constants.kB * self.temperature)

    @property
    def thermal_energy(self) -> float:
        return self.constants.kB * self.temperature

    def reduced(self, omega):
        """``beta*hbar*omega``; infinite at zero temperature."""
        return self.beta_hbar * np.asarray(omega, dtype=float)


def _check_frequency(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError(f"frequency must be positive, got {omega}")
    return w


def _occupation(x):
    # 1/(e^x - 1); x = inf gives exactly 0
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(x)


def _thermal_ratio(x):
    """n(n+1)/(2n+1) at reduced frequency ``x``; never overflows."""
    n = _occupation(x)
    return n * (n + 1.0) / (2.0 * n + 1.0)


def bose_occupation(omega, env: ThermalEnvironment):
    """Mean photon number per mode, ``1/(exp(beta*hbar*omega) - 1)``."""
    w = _check_frequency(omega)
    return _scalar_or_array(_occupation(env.reduced(w)))


def bose_derivative(omega, env: ThermalEnvironment):
    """``dn/domega = -beta*hbar*n*(n+1)``; zero at ``T = 0``."""
    w = _check_frequency(omega)
    if env.is_zero:
        return _scalar_or_array(np.zeros_like(w))
    n = _occupation(env.reduced(w))
    return _scalar_or_array(-env.beta_hbar * n * (n + 1.0))


def sigma_z_expectation(omega0, env: ThermalEnvironment):
    """Equilibrium inversion ``-1/(2n+1)`` of a two-level atom."""
    w = _check_frequency(omega0)
    return _scalar_or_array(-1.0 / (2.0 * _occupation(env.reduced(w)) + 1.0))


def photon_density_of_states(omega, constants: PhysicalConstants = SI):
    """Free-space mode density per unit volume and angular frequency, both
    polarizations: ``omega**2 / (pi**2 c**3)``."""
    w = np.asarray(omega, dtype=float)
    return _scalar_or_array(w**2 / (math.pi**2 * constants.c**3))


def spontaneous_rate(dipole: float, omega0: float,
                     constants: PhysicalConstants = SI) -> float:
    """Free-space decay rate ``pi*omega0*d**2*N(omega0)/(3*hbar*eps0)``.

    With the free-space density of states this is
    ``omega0**3 d**2 / (3 pi eps0 hbar c**3)``.
    """
    if not (dipole > 0 and omega0 > 0):
        raise DomainError(f"dipole and frequency must be positive (d={dipole}, omega0={omega0})")
    k = constants
    return omega0**3 * dipole**2 / (3.0 * math.pi * k.epsilon0 * k.hbar * k.c**3)


def dipole_from_rate(gamma_sp: float, omega0: float,
                     constants: PhysicalConstants = SI) -> float:
    """Inverse of :func:`spontaneous_rate`."""
    if not (gamma_sp > 0 and omega0 > 0):
        raise DomainError(f"rate and frequency must be positive (Gamma={gamma_sp}, omega0={omega0})")
    k = constants
    return math.sqrt(gamma_sp * 3.0 * math.pi * k.epsilon0 * k.hbar * k.c**3 / omega0**3)


@dataclass(frozen=True)
class TwoLevelAtom:
    """Two-level atom specified by its dipole moment or its decay rate.

    Exactly one of ``dipole`` and ``gamma_sp`` is given; the other is derived
    on construction so both are always populated.
    """

    mass: float
    omega0: float
    dipole: float | None = None
    gamma_sp: float | None = None
    constants: PhysicalConstants = SI

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if not self.omega0 > 0:
            raise DomainError(f"transition frequency must be positive, got {self.omega0}")
        if (self.dipole is None) == (self.gamma_sp is None):
            raise DomainError("specify exactly one of dipole and gamma_sp")
        if self.dipole is not None:
            rate = spontaneous_rate(self.dipole, self.omega0, self.constants)
            object.__setattr__(self, "gamma_sp", rate)
        else:
            d = dipole_from_rate(self.gamma_sp, self.omega0, self.constants)
            object.__setattr__(self, "dipole", d)

    @property
    def k0(self) -> float:
        return self.omega0 / self.constants.c


def _check_env(atom_constants: PhysicalConstants, env: ThermalEnvironment):
    if env.constants != atom_constants:
        raise DomainError(
            f"atom uses {atom_constants.name} constants but environment uses {env.constants.name}"
        )


def _recoil_prefactor(atom: TwoLevelAtom) -> float:
    # hbar k0^2 Gamma / 3
    return atom.constants.hbar * atom.k0**2 * atom.gamma_sp / 3.0


def damping_coefficient(atom: TwoLevelAtom, env: ThermalEnvironment) -> float:
    """Momentum damping rate ``gamma`` (1/s), always >= 0.

    ``gamma = (hbar k0^2 Gamma / 3M) * |dn/domega0| / (2n(omega0) + 1)``.
    """
    _check_env(atom.constants, env)
    if env.is_zero:
        return 0.0
    ratio = float(_thermal_ratio(env.reduced(atom.omega0)))
    return _recoil_prefactor(atom) / atom.mass * env.beta_hbar * ratio


def diffusion_coefficient(atom: TwoLevelAtom, env: ThermalEnvironment) -> float:
    """Momentum diffusion coefficient per Cartesian component.

    ``D = (hbar^2 k0^2 Gamma / 3) * n(n+1)/(2n+1)``; the tensor is ``D*delta_ab``.
    """
    _check_env(atom.constants, env)
    if env.is_zero:
        return 0.0
    ratio = float(_thermal_ratio(env.reduced(atom.omega0)))
    return _recoil_prefactor(atom) * atom.constants.hbar * ratio


@dataclass(frozen=True)
class TransportCoefficients:
    gamma: float
    diffusion: float
    mass: float
    temperature: float
    unit_system: str
    source: str  # "two-level" | "multilevel"
    kB: float = 1.0

    def einstein_residual(self) -> float:
        """Relative deviation ``(D - gamma*M*kB*T) / (gamma*M*kB*T)``.

        Zero when both sides vanish (zero temperature).
        """
        reference = self.gamma * self.mass * self.kB * self.temperature
        if reference == 0.0:
            return 0.0 if self.diffusion == 0.0 else math.inf
        return (self.diffusion - reference) / reference

    @property
    def stationary_variance(self) -> float:
        """``D/gamma``, the equilibrium per-component momentum variance."""
        return self.diffusion / self.gamma

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "diffusion": self.diffusion,
            "mass": self.mass,
            "temperature": self.temperature,
            "unit_system": self.unit_system,
            "source": self.source,
        }


def two_level_coefficients(atom: TwoLevelAtom, env: ThermalEnvironment) -> TransportCoefficients:
    return TransportCoefficients(
        gamma=damping_coefficient(atom, env),
        diffusion=diffusion_coefficient(atom, env),
        mass=atom.mass,
        temperature=env.temperature,
        unit_system=atom.constants.name,
        source="two-level",
        kB=atom.constants.kB,
    )


@dataclass(frozen=True)
class Transition:
    """Dipole-allowed pair with ``upper`` above ``lower``."""

    upper: int
    lower: int
    dipole: float | None = None
    gamma_sp: float | None = None


@dataclass(frozen=True)
class MultilevelAtom:
    """Atom with level frequencies ``levels`` (energies / hbar) and an explicit
    list of dipole-allowed transitions. No selection rules are inferred."""

    mass: float
    levels: tuple[float, ...]
    transitions: tuple[Transition, ...]
    constants: PhysicalConstants = SI
    pair_atoms: tuple[TwoLevelAtom, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(w) for w in self.levels))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if not self.levels:
            raise DomainError("level list is empty")
        if not all(math.isfinite(w) for w in self.levels):
            raise DomainError("level frequencies must be finite")
        seen = set()
        pairs = []
        n = len(self.levels)
        for idx, t in enumerate(self.transitions):
            i, j = t.upper, t.lower
            if not (0 <= i < n and 0 <= j < n):
                raise DomainError(f"transition {idx}: level index out of range")
            if i == j:
                raise DomainError(f"transition {idx}: upper and lower levels coincide")
            if (i, j) in seen or (j, i) in seen:
                raise DomainError(f"transition {idx}: duplicate pair ({i}, {j})")
            seen.add((i, j))
            omega_ij = self.levels[i] - self.levels[j]
            if not omega_ij > 0:
                raise DomainError(
                    f"transition {idx}: upper level {i} is not above lower level {j}"
                )
            pairs.append(TwoLevelAtom(self.mass, omega_ij, t.dipole, t.gamma_sp, self.constants))
        object.__setattr__(self, "pair_atoms", tuple(pairs))

    def transition_frequency(self, idx: int) -> float:
        return self.pair_atoms[idx].omega0

    @classmethod
    def from_two_level(cls, atom: TwoLevelAtom) -> "MultilevelAtom":
        return cls(
            mass=atom.mass,
            levels=(0.0, atom.omega0),
            transitions=(Transition(1, 0, dipole=atom.dipole),),
            constants=atom.constants,
        )


def level_populations(atom: MultilevelAtom, env: ThermalEnvironment) -> np.ndarray:
    """Boltzmann occupation probabilities of the listed levels.

    At ``T = 0`` all weight sits on the lowest level (split evenly between
    degenerate ground levels).
    """
    _check_env(atom.constants, env)
    levels = np.asarray(atom.levels, dtype=float)
    if levels.size == 0:
        raise DomainError("level list is empty")
    shifted = levels - levels.min()
    if env.is_zero:
        w = (shifted == 0.0).astype(float)
    else:
        w = np.exp(-env.beta_hbar * shifted)
    return w / w.sum()


def multilevel_coefficients(atom: MultilevelAtom, env: ThermalEnvironment) -> TransportCoefficients:
    """Population-weighted sum of pair contributions.

    Each listed transition contributes its two-level ``gamma`` and ``D``
    (evaluated with the pair's own dipole and frequency) times
    ``rho_upper + rho_lower``.
    """
    if not atom.transitions:
        raise DomainError("multilevel atom has no transitions")
    rho = level_populations(atom, env)
    gamma = 0.0
    diffusion = 0.0
    for t, pair in zip(atom.transitions, atom.pair_atoms):
        weight = rho[t.upper] + rho[t.lower]
        gamma += damping_coefficient(pair, env) * weight
        diffusion += diffusion_coefficient(pair, env) * weight
    return TransportCoefficients(
        gamma=float(gamma),
        diffusion=float(diffusion),
        mass=atom.mass,
        temperature=env.temperature,
        unit_system=atom.constants.name,
        source="multilevel",
        kB=atom.constants.kB,
    )
