"""Species registry files.

A species file is a JSON document holding either one species object or a
registry ``{"species": [...]}``. Two object layouts are accepted.

Two-level::

    {"name": "toy", "units": "natural", "mass": 1.0,
     "transition_frequency": 1.0, "dipole": 1.0}

Multilevel::

    {"name": "toy3", "units": "SI", "mass": 1.4e-25,
     "levels": [0.0, 2.4e15, 3.1e15],
     "transitions": [{"upper": 1, "lower": 0, "dipole": 2.5e-29},
                     {"upper": 2, "lower": 1, "gamma": 3.0e6}]}

Exactly one of ``dipole`` / ``gamma`` per transition. Unknown fields are
rejected.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .constants import get_constants
from .errors import DomainError, SpeciesParseError
from .physics import MultilevelAtom, Transition, TwoLevelAtom

TWO_LEVEL_FIELDS = {"name", "units", "mass", "transition_frequency", "dipole", "gamma"}
MULTILEVEL_FIELDS = {"name", "units", "mass", "levels", "transitions"}
TRANSITION_FIELDS = {"upper", "lower", "dipole", "gamma"}


def _number(obj: dict, key: str, where: str, positive: bool = True) -> float:
    if key not in obj:
        raise SpeciesParseError("missing required field", f"{where}{key}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpeciesParseError(f"expected a number, got {value!r}", f"{where}{key}")
    value = float(value)
    if not math.isfinite(value) or (positive and value <= 0):
        raise SpeciesParseError(f"must be a positive finite number, got {value!r}", f"{where}{key}")
    return value


def _integer(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise SpeciesParseError("missing required field", f"{where}{key}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpeciesParseError(f"expected an integer index, got {value!r}", f"{where}{key}")
    return value


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise SpeciesParseError(f"unknown field(s) {extra}", where.rstrip(".") or "<root>")


def _dipole_or_gamma(obj: dict, where: str) -> tuple[float | None, float | None]:
    has_d, has_g = "dipole" in obj, "gamma" in obj
    if has_d == has_g:
        raise SpeciesParseError("give exactly one of 'dipole' and 'gamma'", where.rstrip(".") or "<root>")
    if has_d:
        return _number(obj, "dipole", where), None
    return None, _number(obj, "gamma", where)


def parse_species(obj: Any, where: str = "") -> TwoLevelAtom | MultilevelAtom:
    """Build an atom from a decoded species object."""
    if not isinstance(obj, dict):
        raise SpeciesParseError("species entry must be an object", where.rstrip(".") or "<root>")
    if "units" not in obj:
        raise SpeciesParseError("missing required field", f"{where}units")
    try:
        constants = get_constants(obj["units"])
    except (ValueError, TypeError):
        raise SpeciesParseError(
            f"units must be 'SI' or 'natural', got {obj['units']!r}", f"{where}units"
        ) from None
    if "name" in obj and not isinstance(obj["name"], str):
        raise SpeciesParseError("name must be a string", f"{where}name")
    mass = _number(obj, "mass", where)

    try:
        if "levels" in obj or "transitions" in obj:
            _reject_unknown(obj, MULTILEVEL_FIELDS, where)
            levels = obj.get("levels")
            if not isinstance(levels, list) or not levels:
                raise SpeciesParseError("must be a non-empty list of frequencies", f"{where}levels")
            parsed_levels = []
            for i, w in enumerate(levels):
                if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w):
                    raise SpeciesParseError(f"expected a finite number, got {w!r}", f"{where}levels[{i}]")
                parsed_levels.append(float(w))
            raw = obj.get("transitions")
            if not isinstance(raw, list) or not raw:
                raise SpeciesParseError("must be a non-empty list", f"{where}transitions")
            transitions = []
            for k, t in enumerate(raw):
                tw = f"{where}transitions[{k}]."
                if not isinstance(t, dict):
                    raise SpeciesParseError("transition must be an object", tw.rstrip("."))
                _reject_unknown(t, TRANSITION_FIELDS, tw)
                upper, lower = _integer(t, "upper", tw), _integer(t, "lower", tw)
                d, g = _dipole_or_gamma(t, tw)
                transitions.append(Transition(upper, lower, dipole=d, gamma_sp=g))
            return MultilevelAtom(mass, tuple(parsed_levels), tuple(transitions), constants)

        _reject_unknown(obj, TWO_LEVEL_FIELDS, where)
        omega0 = _number(obj, "transition_frequency", where)
        d, g = _dipole_or_gamma(obj, where)
        return TwoLevelAtom(mass, omega0, dipole=d, gamma_sp=g, constants=constants)
    except DomainError as exc:
        raise SpeciesParseError(str(exc), where.rstrip(".") or "<root>") from None


def loads_species(text: str, name: str | None = None) -> TwoLevelAtom | MultilevelAtom:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpeciesParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if isinstance(doc, dict) and "species" in doc:
        _reject_unknown(doc, {"species"}, "")
        entries = doc["species"]
        if not isinstance(entries, list) or not entries:
            raise SpeciesParseError("must be a non-empty list", "species")
        if name is None:
            if len(entries) > 1:
                raise SpeciesParseError("registry holds several species; select one by name", "species")
            return parse_species(entries[0], "species[0].")
        for i, entry in enumerate(entries):
            if isinstance(entry, dict) and entry.get("name") == name:
                return parse_species(entry, f"species[{i}].")
        raise SpeciesParseError(f"no species named {name!r}", "species")
    atom = parse_species(doc)
    if name is not None and isinstance(doc, dict) and doc.get("name") != name:
        raise SpeciesParseError(f"no species named {name!r}", "name")
    return atom


def load_species(path: str | Path, name: str | None = None) -> TwoLevelAtom | MultilevelAtom:
    return loads_species(Path(path).read_text(encoding="utf-8"), name)
