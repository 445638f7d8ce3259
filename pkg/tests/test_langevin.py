import math
import warnings

import numpy as np
import pytest
from scipy import stats

from thermaldrag.errors import DomainError, NumericalError
from thermaldrag.langevin import (
    SimConfig,
    exact_step,
    ks_statistic,
    ou_variance,
    run_ensemble,
    sample_grid,
    step,
)


def cfg(**kw):
    base = dict(gamma=1.0, diffusion=1.0, dt=0.01, n_steps=100, n_trajectories=2000, seed=3)
    base.update(kw)
    return SimConfig(**base)


def test_step_formulas():
    p = np.array([1.0, -2.0, 0.5])
    xi = np.array([0.3, 0.1, -1.0])
    np.testing.assert_allclose(step(p, 2.0, 0.5, 0.01, xi), p * 0.98 + 0.1 * xi)
    a = math.exp(-0.02)
    b = math.sqrt(0.25 * (1 - math.exp(-0.04)))
    np.testing.assert_allclose(exact_step(p, 2.0, 0.5, 0.01, xi), a * p + b * xi, rtol=1e-14)


def test_zero_coefficients_pass_through(backend):
    res = run_ensemble(cfg(gamma=0.0, diffusion=0.0, p0=(1.0, -2.0, 3.0)), backend=backend)
    assert np.all(res.final_momenta == np.array([1.0, -2.0, 3.0]))
    assert np.all(res.variance == 0.0)


def test_deterministic_decay(backend):
    res = run_ensemble(cfg(diffusion=0.0, gamma=2.0, p0=(1.0, 0.5, -1.0), stepper="exact",
                           n_trajectories=10), backend=backend)
    expected = np.outer(np.exp(-2.0 * res.times), [1.0, 0.5, -1.0])
    np.testing.assert_allclose(res.mean_momentum, expected, rtol=1e-10, atol=1e-15)


def test_euler_decay_is_geometric(backend):
    res = run_ensemble(cfg(diffusion=0.0, n_trajectories=4, p0=(1.0, 0, 0)), backend=backend)
    np.testing.assert_allclose(res.mean_momentum[:, 0], 0.99 ** res.sample_steps, rtol=1e-12)


def test_pure_diffusion(backend):
    res = run_ensemble(cfg(gamma=0.0, diffusion=0.5, n_trajectories=20000, n_steps=200), backend=backend)
    t = res.times[-1]
    n = res.n_trajectories
    # variance of a sample variance of Gaussians is 2 s^4 / (n - 1)
    tol = 5 * math.sqrt(2 / (n - 1)) * (2 * 0.5 * t)
    np.testing.assert_allclose(res.variance[-1], 2 * 0.5 * t, atol=tol)


@pytest.mark.parametrize("stepper", ["exact", "euler"])
def test_ou_second_moment(stepper):
    c = cfg(stepper=stepper, n_trajectories=40000, n_steps=300, gamma=2.0, diffusion=0.7)
    res = run_ensemble(c)
    theory = 3 * ou_variance(0.0, 2.0, 0.7, res.times)
    sd = math.sqrt(2 * 3) * theory / math.sqrt(c.n_trajectories)
    bias = 0.0 if stepper == "exact" else 0.02 * theory  # Euler bias ~ gamma dt
    assert np.all(np.abs(res.mean_p_squared - theory) <= 5 * sd + bias + 1e-300)


def test_stationary_variance_and_ks():
    c = cfg(stepper="exact", n_steps=1000, n_trajectories=50000, initial_variance=1.0)
    res = run_ensemble(c)
    np.testing.assert_allclose(res.variance[-1], 1.0, atol=0.03)
    for a in range(3):
        assert ks_statistic(res.final_momenta[:, a], stats.norm.cdf) < 0.01


def test_initial_distribution():
    res = run_ensemble(cfg(n_steps=0, n_trajectories=30000, initial_variance=4.0, p0=(1.0, 0.0, 0.0)))
    np.testing.assert_allclose(res.mean_momentum[0], [1.0, 0.0, 0.0], atol=0.05)
    np.testing.assert_allclose(res.variance[0], 4.0, rtol=0.05)


def test_drift_velocity_relaxes_to_minus_mu():
    res = run_ensemble(cfg(stepper="exact", n_steps=1500, mass=2.0, drift_velocity=(0.3, 0.0, -0.1),
                           n_trajectories=20000))
    np.testing.assert_allclose(res.mean_momentum[-1], [-0.6, 0.0, 0.2], atol=0.03)


def test_external_force_shift():
    res = run_ensemble(cfg(stepper="exact", n_steps=1500, external_force=(0.5, 0, 0), diffusion=0.0,
                           n_trajectories=4))
    assert res.mean_momentum[-1, 0] == pytest.approx(0.5 * (1 - math.exp(-15.0)), rel=1e-12)


def test_identical_across_workers_and_blocks():
    c = cfg(n_trajectories=5000, block_size=512, initial_variance=0.5)
    one = run_ensemble(c, workers=1)
    four = run_ensemble(c, workers=4)
    assert np.array_equal(one.final_momenta, four.final_momenta)
    assert np.array_equal(one.mean_momentum, four.mean_momentum)
    assert np.array_equal(one.variance, four.variance)


def test_block_size_only_changes_rounding():
    a = run_ensemble(cfg(n_trajectories=3000, block_size=256))
    b = run_ensemble(cfg(n_trajectories=3000, block_size=4096))
    assert np.array_equal(a.final_momenta, b.final_momenta)
    np.testing.assert_allclose(a.variance, b.variance, rtol=1e-12)


def test_backends_identical():
    from thermaldrag import _backend
    if _backend.NAME != "compiled":
        pytest.skip("compiled kernels not built")
    c = cfg(n_trajectories=3000, block_size=1000, initial_variance=0.3)
    a = run_ensemble(c, backend="python")
    b = run_ensemble(c, backend="compiled")
    np.testing.assert_allclose(a.final_momenta, b.final_momenta, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(a.variance, b.variance, rtol=1e-12)


def test_seed_changes_output():
    assert not np.array_equal(run_ensemble(cfg(seed=1)).final_momenta,
                              run_ensemble(cfg(seed=2)).final_momenta)


def test_large_seed_accepted():
    run_ensemble(cfg(seed=2**64 - 1, n_trajectories=10))


def test_recorded_paths_match_moments():
    res = run_ensemble(cfg(n_trajectories=700, block_size=300, record_paths=True))
    np.testing.assert_allclose(res.paths.mean(axis=0), res.mean_momentum, rtol=1e-10, atol=1e-13)
    np.testing.assert_array_equal(res.paths[:, -1], res.final_momenta)


def test_non_finite_raises():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        c = cfg(gamma=1e3, dt=1.0, n_steps=400, n_trajectories=10)
    with pytest.raises(NumericalError, match="non-finite"):
        run_ensemble(c)


def test_large_step_warns():
    with pytest.warns(RuntimeWarning, match="gamma\\*dt"):
        cfg(dt=0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cfg(dt=0.2, stepper="exact")


@pytest.mark.parametrize("bad", [
    dict(gamma=-1.0), dict(dt=0.0), dict(n_trajectories=0), dict(mass=0.0),
    dict(stepper="rk4"), dict(seed=-1), dict(initial_variance=-1.0), dict(sample_steps=(0, 101)),
    dict(p0=(np.nan, 0, 0)),
])
def test_config_validation(bad):
    with pytest.raises(DomainError):
        cfg(**bad)


def test_sample_grid():
    g = sample_grid(1000)
    assert g[0] == 0 and g[-1] == 1000
    assert np.all(np.diff(g) > 0)
    assert {1, 2, 50, 500}.issubset(set(g.tolist()))
    assert sample_grid(0).tolist() == [0]


def test_config_round_trip():
    c = cfg(p0=(1, 2, 3), sample_steps=(0, 5, 100))
    assert SimConfig.from_dict(c.to_dict()) == c


def test_csv_outputs(tmp_path):
    res = run_ensemble(cfg(n_trajectories=100))
    res.moments_csv(tmp_path / "m.csv")
    res.histogram_csv(tmp_path / "h.csv")
    rows = (tmp_path / "m.csv").read_text().splitlines()
    assert len(rows) == len(res.times) + 1
    hist = (tmp_path / "h.csv").read_text().splitlines()
    assert len(hist) == 3 * 64 + 1


def test_ks_statistic_exact():
    # two samples at the quartiles of U(0,1)
    assert ks_statistic([0.25, 0.75], lambda x: x) == pytest.approx(0.25)
