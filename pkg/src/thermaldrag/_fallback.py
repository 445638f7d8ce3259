"""Pure numpy implementations of the hot kernels.

Same signatures and random streams as the compiled ``_kernels`` module.
Integer outputs are bit-identical between the two; floating results agree to
rounding (libm vs numpy transcendental functions).
"""
from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_TWO_PI = 2.0 * np.pi
_INV_2_32 = 2.0**-32


def philox4x32(counter, key):
    """Philox4x32-10 block function.

    ``counter`` has shape ``(n, 4)`` (uint32 words), ``key`` is a pair of
    uint32 words. Returns ``(n, 4)`` uint32.
    """
    ctr = np.asarray(counter, dtype=np.uint64).reshape(-1, 4)
    c0, c1, c2, c3 = (ctr[:, i].copy() for i in range(4))
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for rnd in range(10):
        if rnd:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT) ^ c1 ^ np.uint64(k0),
            p1 & _MASK,
            (p0 >> _SHIFT) ^ c3 ^ np.uint64(k1),
            p0 & _MASK,
        )
    return np.stack([c0, c1, c2, c3], axis=1).astype(np.uint32)


def philox_normals(step: int, traj_start: int, n: int, key0: int, key1: int,
                   stream: int) -> np.ndarray:
    """Three standard normals per trajectory for counter ``(step, j, stream)``.

    Trajectory ``j`` runs over ``traj_start .. traj_start + n - 1``.
    """
    j = np.arange(traj_start, traj_start + n, dtype=np.uint64)
    ctr = np.empty((n, 4), dtype=np.uint64)
    ctr[:, 0] = step
    ctr[:, 1] = j & _MASK
    ctr[:, 2] = j >> _SHIFT
    ctr[:, 3] = stream
    return _box_muller(philox4x32(ctr, (key0, key1)))


def _box_muller(words: np.ndarray) -> np.ndarray:
    u = (words.astype(np.float64) + 0.5) * _INV_2_32
    r0 = np.sqrt(-2.0 * np.log(u[:, 0]))
    r1 = np.sqrt(-2.0 * np.log(u[:, 2]))
    out = np.empty((words.shape[0], 3))
    out[:, 0] = r0 * np.cos(_TWO_PI * u[:, 1])
    out[:, 1] = r0 * np.sin(_TWO_PI * u[:, 1])
    out[:, 2] = r1 * np.cos(_TWO_PI * u[:, 3])
    return out


# divergence is reported through the return value, not FP warnings
@np.errstate(over="ignore", invalid="ignore")
def ensemble_block(p, traj_start, key0, key1, stream, n_steps, a, b, c,
                   sample_steps, mean_out, m2_out, paths=None):
    """Advance a block of trajectories with ``p <- a p + c + b xi``.

    ``p`` (n, 3) is updated in place. At each step listed in ``sample_steps``
    the block mean and centred sum of squares are written to ``mean_out`` and
    ``m2_out`` (and positions to ``paths[:, k, :]`` when given). Returns the
    number of non-finite final momenta.
    """
    n = p.shape[0]
    c = np.asarray(c, dtype=float)
    k = 0
    ns = len(sample_steps)

    def record(k):
        mean = p.mean(axis=0)
        mean_out[k] = mean
        m2_out[k] = ((p - mean) ** 2).sum(axis=0)
        if paths is not None:
            paths[:, k, :] = p

    while k < ns and sample_steps[k] == 0:
        record(k)
        k += 1
    for s in range(1, n_steps + 1):
        xi = philox_normals(s, traj_start, n, key0, key1, stream)
        p *= a
        p += c
        p += b * xi
        while k < ns and sample_steps[k] == s:
            record(k)
            k += 1
    return int(np.count_nonzero(~np.isfinite(p)))


def tridiag_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored."""
    from scipy.linalg import solve_banded

    ab = np.zeros((3, diag.size))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def theta_steps(lower, diag, upper, theta, dt, x, n_steps):
    """``n_steps`` theta-method steps of ``dx/dt = L x`` with tridiagonal ``L``.

    Returns the new state; ``x`` is not modified.
    """
    from scipy.linalg import solve_banded

    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = -theta * dt * upper[:-1]
    ab[1] = 1.0 - theta * dt * diag
    ab[2, :-1] = -theta * dt * lower[1:]
    e = (1.0 - theta) * dt
    x = np.array(x, dtype=float)
    for _ in range(n_steps):
        rhs = x + e * diag * x
        rhs[1:] += e * lower[1:] * x[:-1]
        rhs[:-1] += e * upper[:-1] * x[1:]
        x = solve_banded((1, 1), ab, rhs, check_finite=False)
    return x
