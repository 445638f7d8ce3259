import numpy as np
import pytest

from thermaldrag.errors import DomainError
from thermaldrag.frame import (
    FrameSpec,
    compensating_force,
    infer_lab_velocity,
    lab_frame_force,
    measure_compensating_force,
)
from thermaldrag.langevin import SimConfig, run_ensemble


def test_lab_force_example():
    f = lab_frame_force(0.1, 2.0, (1.0, 0.0, 0.0), (0.5, 0.0, 0.0))
    np.testing.assert_allclose(f, [-0.3, 0.0, 0.0], rtol=1e-15)


def test_atom_comoving_with_background_feels_nothing():
    u = np.array([0.2, -0.1, 0.05])
    assert np.all(lab_frame_force(0.3, 1.5, u, -u) == 0.0)


def test_force_is_odd_in_velocity():
    a = lab_frame_force(0.3, 1.5, (0.1, 0.2, 0.3), (0.4, 0.0, -0.2))
    b = lab_frame_force(0.3, 1.5, (-0.1, -0.2, -0.3), (-0.4, 0.0, 0.2))
    np.testing.assert_array_equal(a, -b)


def test_compensation_cancels_drag_at_rest():
    u = (0.3, 0.0, -0.2)
    total = lab_frame_force(0.7, 2.0, u, (0, 0, 0)) + compensating_force(0.7, 2.0, u)
    assert np.all(total == 0.0)


@pytest.mark.parametrize("u", [(0.3, 0.0, 0.0), (1e-7, -2e-6, 4.0), (-12.0, 0.5, 0.0)])
def test_inference_round_trip(u):
    g, m = 0.37, 1.9
    back = infer_lab_velocity(compensating_force(g, m, u), g, m)
    np.testing.assert_allclose(back, u, rtol=1e-14, atol=0)


def test_inference_requires_damping():
    with pytest.raises(DomainError):
        infer_lab_velocity((1.0, 0, 0), 0.0, 1.0)


def test_frame_spec_limit():
    FrameSpec((0.009, 0.0, 0.0), 1.0)
    with pytest.raises(DomainError):
        FrameSpec((0.01, 0.0, 0.0), 1.0)
    with pytest.raises(DomainError):
        FrameSpec((300.0, 0.0, 0.0), 3e4)


def test_ensemble_settles_at_minus_mu_and_infers_u():
    u = np.array([0.3, -0.1, 0.0])
    c = SimConfig(gamma=1.0, diffusion=1.0, dt=0.01, n_steps=1000, n_trajectories=40000, mass=1.0,
                  stepper="exact", drift_velocity=tuple(u), seed=11)
    res = run_ensemble(c)
    force, err = measure_compensating_force(res.final_momenta, c.gamma)
    assert np.all(np.abs(force - u) < 4 * err)
    assert np.all(np.abs(infer_lab_velocity(force, 1.0, 1.0) - u) < 4 * err)


def test_boost_is_a_shift_at_matched_seed():
    base = dict(gamma=0.8, diffusion=0.5, dt=0.01, n_steps=300, n_trajectories=500, mass=2.0,
                stepper="exact", seed=5)
    u = np.array([0.25, 0.0, -0.4])
    rest = run_ensemble(SimConfig(**base))
    moving = run_ensemble(SimConfig(**base, drift_velocity=tuple(u),
                                    p0=tuple(-2.0 * u)))
    # the moving-lab trajectories are the rest-frame ones shifted by -M u
    np.testing.assert_allclose(moving.final_momenta, rest.final_momenta - 2.0 * u, atol=1e-12)
