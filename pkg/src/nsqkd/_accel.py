"""Round-sampling kernels for the protocol simulator.

Two implementations with bit-identical output: a numba ``@njit`` loop and a
vectorised numpy path.  Set ``NSQKD_DISABLE_NUMBA=1`` (or run without numba
installed) to force the numpy path.

Randomness is counter based: draw ``k`` of round ``i`` is a SplitMix64 hash
of ``(seed, i, k)``, so any slice of rounds can be generated independently
and in any order.
"""

import os

import numpy as np

DRAWS_PER_ROUND = 8  # x-key, x-index, y-key, y-index, component, outcome, flip, spare
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0

NUMPY_CHUNK = 1 << 17


def _env_disabled() -> bool:
    return os.environ.get("NSQKD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


try:
    if _env_disabled():
        raise ImportError("numba disabled by NSQKD_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _mix64_np(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def seed_key(seed: int) -> np.uint64:
    with np.errstate(over="ignore"):
        return _mix64_np(np.array([seed], dtype=np.uint64))[0]


def uniforms_numpy(key: np.uint64, start: int, n: int) -> np.ndarray:
    """Uniform doubles in [0, 1), shape (n, DRAWS_PER_ROUND)."""
    idx = (
        np.arange(start, start + n, dtype=np.uint64)[:, None] * np.uint64(DRAWS_PER_ROUND)
        + np.arange(DRAWS_PER_ROUND, dtype=np.uint64)[None, :]
        + np.uint64(1)
    )
    with np.errstate(over="ignore"):
        z = _mix64_np(key + idx * _GOLDEN)
    return (z >> _S11).astype(np.float64) * _TWO_M53


def _sample_numpy(key, start, n, N, q, qprime, flip_r, comp_cum, outcome_cum, adversarial):
    x = np.empty(n, np.int8)
    y = np.empty(n, np.int8)
    a = np.empty(n, np.int8)
    b = np.empty(n, np.int8)
    comp = np.empty(n, np.int32)
    for lo in range(0, n, NUMPY_CHUNK):
        m = min(NUMPY_CHUNK, n - lo)
        u = uniforms_numpy(key, start + lo, m)
        xs = np.where(u[:, 0] < q, 0, 1 + np.minimum((u[:, 1] * N).astype(np.int64), N - 1))
        ys = np.where(
            u[:, 2] < qprime, 0, 1 + np.minimum((u[:, 3] * (N - 1)).astype(np.int64), N - 2)
        )
        if adversarial:
            cs = (u[:, 4, None] >= comp_cum[None, :]).sum(axis=1)
            cs = np.minimum(cs, len(comp_cum) - 1)
        else:
            cs = np.zeros(m, np.int64)
        cum = outcome_cum[cs, xs, ys]
        js = np.minimum((u[:, 5, None] >= cum).sum(axis=1), 3)
        as_ = js >> 1
        bs = js & 1
        flip = (xs == 0) & (ys == 0) & (u[:, 6] < flip_r)
        bs = np.where(flip, bs ^ 1, bs)
        sl = slice(lo, lo + m)
        x[sl], y[sl], a[sl], b[sl] = xs, ys, as_, bs
        comp[sl] = cs if adversarial else -1
    return x, y, a, b, comp


def _tally_numpy(x, y, a, b, n_alice, n_bob):
    flat = ((x.astype(np.int64) * n_bob + y) * 2 + a) * 2 + b
    counts = np.bincount(flat, minlength=n_alice * n_bob * 4)
    return counts.reshape(n_alice, n_bob, 2, 2)


if HAVE_NUMBA:

    @njit(cache=True)
    def _mix64_nb(z):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)

    @njit(cache=True)
    def _uniform_nb(key, index):
        z = _mix64_nb(key + (index + np.uint64(1)) * _GOLDEN)
        return np.float64(z >> _S11) * _TWO_M53

    @njit(cache=True)
    def _sample_numba(key, start, n, N, q, qprime, flip_r, comp_cum, outcome_cum, adversarial):
        x = np.empty(n, np.int8)
        y = np.empty(n, np.int8)
        a = np.empty(n, np.int8)
        b = np.empty(n, np.int8)
        comp = np.empty(n, np.int32)
        n_comp = comp_cum.shape[0]
        draws = np.uint64(DRAWS_PER_ROUND)
        for i in range(n):
            base = np.uint64(start + i) * draws
            if _uniform_nb(key, base) < q:
                xi = 0
            else:
                xi = 1 + min(int(_uniform_nb(key, base + np.uint64(1)) * N), N - 1)
            if _uniform_nb(key, base + np.uint64(2)) < qprime:
                yi = 0
            else:
                yi = 1 + min(int(_uniform_nb(key, base + np.uint64(3)) * (N - 1)), N - 2)
            ci = 0
            if adversarial:
                u = _uniform_nb(key, base + np.uint64(4))
                while ci < n_comp - 1 and u >= comp_cum[ci]:
                    ci += 1
            u = _uniform_nb(key, base + np.uint64(5))
            j = 0
            while j < 3 and u >= outcome_cum[ci, xi, yi, j]:
                j += 1
            ai = j >> 1
            bi = j & 1
            if xi == 0 and yi == 0 and _uniform_nb(key, base + np.uint64(6)) < flip_r:
                bi ^= 1
            x[i] = xi
            y[i] = yi
            a[i] = ai
            b[i] = bi
            comp[i] = ci if adversarial else -1
        return x, y, a, b, comp

    @njit(cache=True)
    def _tally_numba(x, y, a, b, n_alice, n_bob):
        counts = np.zeros((n_alice, n_bob, 2, 2), np.int64)
        for i in range(x.shape[0]):
            counts[x[i], y[i], a[i], b[i]] += 1
        return counts


def sample_rounds(key, start, n, N, q, qprime, flip_r, comp_cum, outcome_cum, adversarial, use_numba=None):
    """Sample ``n`` rounds starting at round index ``start``.

    ``comp_cum`` is the cumulative distribution over attack components and
    ``outcome_cum[c, x, y]`` the cumulative distribution over the outcome
    pair ``2a + b``; both must end at exactly 1.
    """
    if use_numba is None:
        use_numba = HAVE_NUMBA
    fn = _sample_numba if use_numba and HAVE_NUMBA else _sample_numpy
    return fn(
        np.uint64(key), int(start), int(n), int(N), float(q), float(qprime), float(flip_r),
        np.ascontiguousarray(comp_cum, dtype=np.float64),
        np.ascontiguousarray(outcome_cum, dtype=np.float64),
        bool(adversarial),
    )


def tally(x, y, a, b, n_alice, n_bob, use_numba=None):
    """Counts indexed [x, y, a, b]."""
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return _tally_numba(x, y, a, b, n_alice, n_bob)
    return _tally_numpy(x, y, a, b, n_alice, n_bob)
