import numpy as np
import pytest

from nsqkd import _accel
from nsqkd.simulator import ProtocolConfig, run

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable or disabled")


def test_uniforms_in_unit_interval():
    u = _accel.uniforms_numpy(_accel.seed_key(7), 0, 10_000)
    assert u.shape == (10_000, _accel.DRAWS_PER_ROUND)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.01


def test_uniform_streams_are_offset_invariant():
    key = _accel.seed_key(99)
    whole = _accel.uniforms_numpy(key, 0, 500)
    part = _accel.uniforms_numpy(key, 200, 300)
    np.testing.assert_array_equal(whole[200:], part)


def test_seeds_give_different_streams():
    a = _accel.uniforms_numpy(_accel.seed_key(1), 0, 100)
    b = _accel.uniforms_numpy(_accel.seed_key(2), 0, 100)
    assert not np.array_equal(a, b)


@needs_numba
@pytest.mark.parametrize("adversarial", [False, True])
@pytest.mark.parametrize("N", [2, 3])
def test_numba_matches_numpy(N, adversarial):
    config = ProtocolConfig(N=N, p=0.93, rounds=30_000, seed=4242, flip_r=0.1, adversarial=adversarial)
    t_nb, r_nb = run(config, use_numba=True)
    t_np, r_np = run(config, use_numba=False)
    for name in ("x", "y", "a", "b", "component"):
        np.testing.assert_array_equal(getattr(t_nb, name), getattr(t_np, name))
    assert r_nb == r_np


@needs_numba
def test_tally_paths_agree():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 4, 1000).astype(np.int8)
    y = rng.integers(0, 3, 1000).astype(np.int8)
    a = rng.integers(0, 2, 1000).astype(np.int8)
    b = rng.integers(0, 2, 1000).astype(np.int8)
    np.testing.assert_array_equal(
        _accel.tally(x, y, a, b, 4, 3, use_numba=True),
        _accel.tally(x, y, a, b, 4, 3, use_numba=False),
    )


def test_env_flag_forces_numpy_path():
    import os
    import subprocess
    import sys

    code = (
        "from nsqkd import _accel\n"
        "from nsqkd.simulator import ProtocolConfig, run\n"
        "t, r = run(ProtocolConfig(N=2, p=0.9, rounds=5000, seed=11))\n"
        "print(_accel.HAVE_NUMBA, int(t.b.sum()), r.key_count)\n"
    )
    env = dict(os.environ, NSQKD_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    flag, b_sum, key_count = out.stdout.split()
    assert flag == "False"
    t, r = run(ProtocolConfig(N=2, p=0.9, rounds=5000, seed=11))
    assert (int(b_sum), int(key_count)) == (int(t.b.sum()), r.key_count)
