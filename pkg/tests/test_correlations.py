import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsqkd.correlations import (
    MeasurementScheme,
    correlator,
    density_matrix_oracle,
    quantum_box,
)
from nsqkd.exceptions import InputError
from nsqkd.nsbox import chain_value, validate

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
purities = st.floats(0.0, 1.0)


def test_scheme_phases():
    s = MeasurementScheme(3)
    assert s.alice_phase[0] == pytest.approx(math.pi / 6)
    np.testing.assert_allclose(s.alice_phase[1:], [math.pi / 3, 2 * math.pi / 3, math.pi])
    np.testing.assert_allclose(s.bob_phase, [math.pi / 6, math.pi / 2, 5 * math.pi / 6])
    assert (s.n_alice, s.n_bob) == (4, 3)


def test_scheme_rejects_small_n():
    with pytest.raises(InputError):
        MeasurementScheme(1)


def test_correlator_examples():
    assert correlator(1.0, 0.3, 0.3) == 1.0
    for N in range(2, 8):
        phi = math.pi / (2 * N)
        assert correlator(1.0, phi, phi) == pytest.approx(1.0)
    assert correlator(0.0, 0.1, 2.0) == 0.0


@given(purities, angles, angles, angles)
def test_correlator_symmetry_and_shift(p, a, b, d):
    assert correlator(p, a, b) == pytest.approx(correlator(p, b, a), abs=1e-12)
    assert correlator(p, a + d, b + d) == pytest.approx(correlator(p, a, b), abs=1e-12)


def test_correlator_rejects_bad_purity():
    with pytest.raises(InputError):
        correlator(1.2, 0.0, 0.0)


def test_uniform_box_at_zero_purity():
    box = quantum_box(0.0, 2)
    assert box.table.shape == (2, 2, 3, 2)
    assert np.all(box.table == 0.25)


def test_chain_value_noiseless_and_noisy():
    assert chain_value(quantum_box(1.0, 2), 2) == pytest.approx(4 * math.sin(math.pi / 8) ** 2, abs=1e-12)
    assert chain_value(quantum_box(0.9, 3), 3) == pytest.approx(3 * (1 - 0.9 * math.cos(math.pi / 6)), abs=1e-12)


@pytest.mark.parametrize("N", range(2, 11))
def test_chain_identity_grid(N):
    for p in np.linspace(0.0, 1.0, 11):
        value = chain_value(quantum_box(p, N), N)
        assert value == pytest.approx(N * (1 - p * math.cos(math.pi / (2 * N))), abs=1e-9)


@pytest.mark.parametrize("N", range(2, 7))
@pytest.mark.parametrize("p", [0.0, 0.3, 0.7071, 0.9, 1.0])
def test_quantum_box_is_valid_no_signalling(N, p):
    box = quantum_box(p, N)
    assert box.table.min() >= 0.0
    np.testing.assert_allclose(box.table.sum(axis=(0, 1)), 1.0, atol=1e-12)
    ok, problems = validate(box, tol=1e-12)
    assert ok, problems


def test_oracle_examples():
    probs = density_matrix_oracle(1.0, 0.0, 0.0)
    assert probs[0, 0] + probs[1, 1] == pytest.approx(1.0, abs=1e-12)
    assert probs[0, 1] + probs[1, 0] == pytest.approx(0.0, abs=1e-12)

    s = MeasurementScheme(2)
    probs = density_matrix_oracle(1.0, s.alice_phase[1], s.bob_phase[0])
    # frozen from an mpmath ket computation, equals (1 - cos(pi/4)) / 2
    assert probs[0, 1] + probs[1, 0] == pytest.approx(0.14644660940672624, abs=1e-12)

    probs = density_matrix_oracle(0.5, 0.4, 1.3)
    assert np.all((probs >= 1 / 8 - 1e-12) & (probs <= 3 / 8 + 1e-12))


@pytest.mark.parametrize("N", range(2, 7))
def test_oracle_agrees_with_closed_form(N):
    s = MeasurementScheme(N)
    for p in (0.0, 0.35, 0.8, 1.0):
        box = quantum_box(p, s)
        for x, y in itertools.product(range(s.n_alice), range(s.n_bob)):
            probs = density_matrix_oracle(p, s.alice_phase[x], s.bob_phase[y])
            np.testing.assert_allclose(box.table[:, :, x, y], probs, atol=1e-12)


def test_box_is_immutable():
    box = quantum_box(0.5, 2)
    with pytest.raises(ValueError):
        box.table[0, 0, 0, 0] = 1.0
