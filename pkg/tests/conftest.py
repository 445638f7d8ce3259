import json

import numpy as np
import pytest

from thermaldrag import _backend
from thermaldrag.constants import NATURAL, SI
from thermaldrag.physics import MultilevelAtom, Transition, TwoLevelAtom

BACKENDS = ["python"] + (["compiled"] if _backend.NAME == "compiled" else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def natural_atom():
    return TwoLevelAtom(mass=1.0, omega0=1.0, dipole=1.0, constants=NATURAL)


@pytest.fixture
def rb_like_atom():
    # ~780 nm line, Rb-87 mass, dipole ~ 2.5e-29 C m
    return TwoLevelAtom(mass=1.443e-25, omega0=2.41e15, dipole=2.5e-29, constants=SI)


def multilevel_test_atoms():
    """2-, 3- and 5-level atoms in both unit systems."""
    atoms = [
        MultilevelAtom(1.0, (0.0, 1.3), (Transition(1, 0, dipole=0.7),), NATURAL),
        MultilevelAtom(2.0, (0.0, 0.8, 2.1),
                       (Transition(1, 0, dipole=1.0), Transition(2, 1, dipole=0.4),
                        Transition(2, 0, gamma_sp=0.05)), NATURAL),
        MultilevelAtom(0.5, (0.0, 0.2, 1.0, 1.1, 3.0),
                       (Transition(1, 0, dipole=0.3), Transition(2, 0, dipole=1.2),
                        Transition(3, 1, dipole=0.9), Transition(4, 2, dipole=0.5),
                        Transition(4, 3, gamma_sp=0.02)), NATURAL),
        MultilevelAtom(1.443e-25, (0.0, 2.41e15, 2.45e15, 4.0e15),
                       (Transition(1, 0, dipole=2.5e-29), Transition(2, 0, gamma_sp=3.8e7),
                        Transition(3, 1, dipole=1.0e-29)), SI),
    ]
    return atoms


@pytest.fixture
def species_file(tmp_path):
    def write(doc, name="species.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return path
    return write


def reduced_grid(n=20, lo=1e-6, hi=50.0):
    return np.geomspace(lo, hi, n)
