"""Exact mean radiation force on a moving two-level atom.

Resolves the Doppler-shifted resonance condition ``omega_k = omega0 + k.v``
without linearizing in ``v``. With the isotropic dipole average applied and
the azimuth integrated analytically, the force along ``v`` is a single
integral over ``mu = cos(angle(k, v))``::

    F(v) = -(d^2 k0^4 / (12 pi eps0)) * int_{-1}^{1} mu (1 - s mu)^-5 B(mu) dmu

with ``s = v/c``, resonant wavenumber ``k*(mu) = k0/(1 - s mu)`` and thermal
bracket ``B = 1 - (2 n(c k*) + 1)/(2 n(omega0) + 1)``. The internal state is
held at its rest-frame equilibrium.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import DomainError
from .physics import ThermalEnvironment, TwoLevelAtom, _check_env, _occupation

__all__ = ["DragCurve", "exact_drag_force", "drag_curve", "linear_response_slope"]

RELATIVE_STEP = 1e-5  # finite-difference speed for the slope, in units of c


def _bracket(mu, s: float, x0: float, n0: float):
    # B = 2 (1 + n0) n_k expm1(x_k - x0) / (2 n0 + 1), free of cancellation
    den = 1.0 - s * mu
    xk = x0 / den
    dx = x0 * s * mu / den
    return 2.0 * (1.0 + n0) * _occupation(xk) * np.expm1(dx) / (2.0 * n0 + 1.0)


def _integrand(mu, s, x0, n0):
    return mu * (1.0 - s * mu) ** -5 * _bracket(mu, s, x0, n0)


def exact_drag_force(atom: TwoLevelAtom, env: ThermalEnvironment, v: float,
                     full_output: bool = False, tol: float = 1e-12):
    """Signed force component along the velocity, ``-1 < v/c < 1``.

    Returns ``F`` or ``(F, abserr)`` when ``full_output`` is set. The
    quadrature runs to absolute tolerance ``tol`` times the integrand
    magnitude at the endpoints.
    """
    _check_env(atom.constants, env)
    c = atom.constants.c
    s = v / c
    if not abs(s) < 1.0:
        raise DomainError(f"speed must be below c (|v|/c = {abs(s)})")
    if env.is_zero or v == 0.0:
        return (0.0, 0.0) if full_output else 0.0

    x0 = float(env.reduced(atom.omega0))
    n0 = float(_occupation(x0))
    prefactor = atom.dipole**2 * atom.k0**4 / (12.0 * math.pi * atom.constants.epsilon0)

    scale = max(abs(float(_integrand(1.0, s, x0, n0))),
                abs(float(_integrand(-1.0, s, x0, n0))))
    if scale == 0.0:
        return (0.0, 0.0) if full_output else 0.0
    value, err = integrate.quad(
        _integrand, -1.0, 1.0, args=(s, x0, n0),
        epsabs=tol * scale, epsrel=1e-13, limit=200,
    )
    force = -prefactor * value
    if full_output:
        return force, prefactor * err
    return force


def linear_response_slope(atom: TwoLevelAtom, env: ThermalEnvironment) -> float:
    """Damping rate from the symmetric difference quotient of the exact force
    at ``v = +-1e-5 c``."""
    if env.is_zero:
        return 0.0
    h = RELATIVE_STEP * atom.constants.c
    f_plus = exact_drag_force(atom, env, h)
    f_minus = exact_drag_force(atom, env, -h)
    return -(f_plus - f_minus) / (2.0 * h) / atom.mass


@dataclass
class DragCurve:
    speeds: np.ndarray
    forces: np.ndarray
    errors: np.ndarray
    atom: TwoLevelAtom
    temperature: float

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["v", "F_parallel", "quadrature_error"])
            for v, f, e in zip(self.speeds, self.forces, self.errors):
                w.writerow([repr(float(v)), repr(float(f)), repr(float(e))])


def drag_curve(atom: TwoLevelAtom, env: ThermalEnvironment, speeds) -> DragCurve:
    speeds = np.asarray(speeds, dtype=float)
    forces = np.empty_like(speeds)
    errors = np.empty_like(speeds)
    for i, v in enumerate(speeds):
        forces[i], errors[i] = exact_drag_force(atom, env, float(v), full_output=True)
    return DragCurve(speeds, forces, errors, atom, env.temperature)
