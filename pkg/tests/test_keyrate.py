import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsqkd.exceptions import GuardError, InputError
from nsqkd.keyrate import (
    binary_entropy,
    curve,
    key_rate_chain,
    key_rate_chain_unclamped,
    key_rate_preprocessed,
    mutual_info_ab,
    preprocessed_rate,
    threshold,
)

P_GRID = np.round(np.arange(0.70, 1.0 + 1e-9, 0.005), 6)


def test_binary_entropy_examples():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    with pytest.raises(InputError):
        binary_entropy(1.1)
    with pytest.raises(InputError):
        binary_entropy(float("nan"))


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric(q):
    assert binary_entropy(q) == pytest.approx(binary_entropy(1 - q), abs=1e-12)


def test_binary_entropy_vectorised():
    out = binary_entropy(np.array([0.0, 0.11, 0.5]))
    assert out.shape == (3,)
    assert out[1] == pytest.approx(binary_entropy(0.11))


def test_mutual_info_examples():
    assert mutual_info_ab(1.0) == 1.0
    for p in (0.3, 0.9):
        assert mutual_info_ab(p) == pytest.approx(1 - binary_entropy((1 + p) / 2), abs=1e-15)
    assert mutual_info_ab(0.8, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_key_rate_chain_examples():
    assert key_rate_chain(2, 1.0) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert key_rate_chain(2, 0.9038) == pytest.approx(0.0, abs=5e-4)
    exact = 1 - 20 * math.sin(math.pi / 40) ** 2
    assert key_rate_chain(10, 1.0) == pytest.approx(exact, abs=1e-12)
    assert exact == pytest.approx(0.87688, abs=1e-5)
    assert exact >= 1 - math.pi**2 / 80


@given(st.floats(0.0, 1.0))
def test_chsh_rate_formula(p):
    expected = math.sqrt(2) * p - binary_entropy((1 + p) / 2) - 1
    assert key_rate_chain_unclamped(2, p) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_more_settings_beat_chsh(N):
    for p in P_GRID:
        if key_rate_chain(N, p) > 0 or key_rate_chain(2, p) > 0:
            assert key_rate_chain(N, p) >= key_rate_chain(2, p)


def test_noiseless_asymptotics():
    for N in range(2, 51):
        assert key_rate_chain(N, 1.0) >= 1 - math.pi**2 / (8 * N)


def test_preprocessing_noiseless():
    rep = key_rate_preprocessed(2, 1.0)
    assert rep.r_opt == 0.0
    assert rep.key_rate == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    # one-sided finite difference: flipping only hurts a noiseless key
    h = 1e-6
    assert (preprocessed_rate(2, 1.0, h) - preprocessed_rate(2, 1.0, 0.0)) / h <= 0


@pytest.mark.parametrize("N,p_star", [(2, 0.8740), (3, 0.8660)])
def test_preprocessed_rate_vanishes_at_threshold(N, p_star):
    assert key_rate_preprocessed(N, p_star - 5e-4).key_rate == 0.0
    assert key_rate_preprocessed(N, p_star + 5e-4).key_rate > 0.0
    assert key_rate_preprocessed(N, p_star).key_rate < 1e-6


@pytest.mark.parametrize("N", [2, 3, 5, 10])
def test_preprocessing_never_hurts(N):
    for p in P_GRID[::4]:
        rep = key_rate_preprocessed(N, p)
        assert 0.0 <= rep.r_opt <= 0.5
        assert rep.key_rate >= key_rate_chain(N, p) - 1e-12
        assert rep.key_rate == pytest.approx(max(0.0, rep.i_ab - rep.i_be_bound), abs=1e-12)
        assert rep.key_rate >= preprocessed_rate(N, p, 0.0) - 1e-12


@pytest.mark.parametrize(
    "N,pre,expected",
    [(2, False, 0.9038), (3, False, 0.8889), (2, True, 0.8740), (3, True, 0.8660)],
)
def test_threshold_values(N, pre, expected):
    assert threshold(N, pre) == pytest.approx(expected, abs=5e-4)


def test_threshold_rate_positive_above():
    for N in (2, 3, 7):
        t = threshold(N)
        assert key_rate_chain_unclamped(N, t + 1e-5) > 0
        assert key_rate_chain_unclamped(N, t - 1e-5) < 0


def test_threshold_increases_with_n():
    values = [threshold(N) for N in range(3, 11)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_threshold_guard():
    with pytest.raises(GuardError):
        threshold(11)


def test_curve_figure_one():
    ps = np.round(np.arange(0.85, 1.0 + 1e-9, 0.005), 6)
    rows = curve([10, 2, 3], ps)
    assert [(r.N, r.p) for r in rows] == sorted((r.N, r.p) for r in rows)
    by = {(r.N, r.p): r for r in rows}
    for p in ps:
        assert by[3, p].key_rate >= by[2, p].key_rate
    assert by[10, 1.0].key_rate == pytest.approx(0.88, abs=0.01)
    low = by[2, 0.85]
    assert low.key_rate == 0.0 and low.threshold_flag
    assert not by[2, 1.0].threshold_flag


def test_curve_needs_points():
    with pytest.raises(InputError):
        curve([], [0.9])
