"""Compiled kernels against the numpy fallback and reference vectors."""
import numpy as np
import pytest
from scipy import stats

from thermaldrag import _backend

# Philox4x32-10 known-answer vectors (Random123 kat_vectors)
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_philox_known_answers(backend, ctr, key, expected):
    out = _backend.get(backend).philox4x32(np.array([ctr], dtype=np.uint64), key)
    assert tuple(int(x) for x in out[0]) == expected


def test_backends_agree_on_raw_words():
    if _backend.NAME != "compiled":
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(5)
    ctr = rng.integers(0, 2**32, size=(1000, 4), dtype=np.uint64)
    a = _backend.get("python").philox4x32(ctr, (123, 456))
    b = _backend.get("compiled").philox4x32(ctr, (123, 456))
    assert np.array_equal(a, b)


def test_backends_agree_on_normals():
    if _backend.NAME != "compiled":
        pytest.skip("compiled kernels not built")
    a = _backend.get("python").philox_normals(7, 2**32 - 5, 100, 11, 13, 1)
    b = _backend.get("compiled").philox_normals(7, 2**32 - 5, 100, 11, 13, 1)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)


def test_normals_are_standard(backend):
    z = _backend.get(backend).philox_normals(1, 0, 200000, 99, 0, 1)
    for a in range(3):
        assert stats.kstest(z[:, a], "norm").statistic < 0.005
    c = np.corrcoef(z.T)
    assert np.all(np.abs(c[np.triu_indices(3, 1)]) < 0.01)


def test_streams_are_distinct(backend):
    k = _backend.get(backend)
    assert not np.array_equal(k.philox_normals(1, 0, 10, 1, 0, 1), k.philox_normals(1, 0, 10, 1, 0, 2))
    assert not np.array_equal(k.philox_normals(1, 0, 10, 1, 0, 1), k.philox_normals(2, 0, 10, 1, 0, 1))


def test_ensemble_block_agrees_across_backends():
    if _backend.NAME != "compiled":
        pytest.skip("compiled kernels not built")
    steps = np.array([0, 1, 5, 50], dtype=np.int64)
    out = {}
    for name in ("python", "compiled"):
        p = np.full((300, 3), 0.5)
        mean = np.empty((4, 3))
        m2 = np.empty((4, 3))
        paths = np.empty((300, 4, 3))
        bad = _backend.get(name).ensemble_block(p, 1000, 3, 4, 1, 50, 0.99, 0.14, np.array([0.01, 0.0, -0.01]),
                                                steps, mean, m2, paths)
        assert bad == 0
        out[name] = (p, mean, m2, paths)
    for x, y in zip(out["python"], out["compiled"]):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-14)
    # block moments consistent with the recorded paths
    p, mean, m2, paths = out["compiled"]
    np.testing.assert_allclose(mean, paths.mean(axis=0), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(m2, ((paths - paths.mean(axis=0)) ** 2).sum(axis=0), rtol=1e-10)


def test_tridiagonal_solve(backend):
    rng = np.random.default_rng(0)
    n = 50
    lower, upper = rng.normal(size=n), rng.normal(size=n)
    diag = 4 + rng.random(n)
    rhs = rng.normal(size=n)
    dense = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    x = _backend.get(backend).tridiag_solve(lower, diag, upper, rhs)
    np.testing.assert_allclose(dense @ x, rhs, atol=1e-12)


def test_theta_steps_match_dense(backend):
    rng = np.random.default_rng(1)
    n = 30
    lower, upper = rng.random(n), rng.random(n)
    diag = -(lower + upper)
    L = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    x0 = rng.random(n)
    dt, theta = 0.05, 0.5
    A = np.eye(n) - theta * dt * L
    B = np.eye(n) + (1 - theta) * dt * L
    ref = x0.copy()
    for _ in range(7):
        ref = np.linalg.solve(A, B @ ref)
    got = _backend.get(backend).theta_steps(lower, diag, upper, theta, dt, x0, 7)
    np.testing.assert_allclose(got, ref, rtol=1e-12)
