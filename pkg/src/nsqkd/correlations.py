"""Quantum correlations of a Werner state under the chained measurement scheme.

Alice measures x = 0..N in the basis {|0> +- e^{i phi_A(x)} |1>}, Bob measures
y = 0..N-1 in {|0> +- e^{-i phi_B(y)} |1>}.  Outcome 0 is the "+" ket.  On the
Werner state p |phi+><phi+| + (1 - p) I/4 the +-1 correlator is
p cos(phi_A - phi_B), which is all `quantum_box` needs.  The density-matrix
route is kept as an independent check of that closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from nsqkd.exceptions import InputError
from nsqkd.nsbox import ConditionalBox


def check_purity(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise InputError(f"Werner purity must lie in [0, 1], got {p!r}")
    return p


@dataclass(frozen=True)
class MeasurementScheme:
    """Chained scheme with N test settings.

    Alice has N + 1 settings (x = 0 is the key setting), Bob has N.
    """

    N: int
    alice_phase: np.ndarray = field(init=False, repr=False, compare=False)
    bob_phase: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N = int(self.N)
        if N < 2:
            raise InputError(f"chained scheme needs N >= 2, got {N}")
        object.__setattr__(self, "N", N)
        alice = np.pi * np.arange(N + 1, dtype=float) / N
        alice[0] = np.pi / (2 * N)
        bob = np.pi * (np.arange(N, dtype=float) + 0.5) / N
        alice.flags.writeable = False
        bob.flags.writeable = False
        object.__setattr__(self, "alice_phase", alice)
        object.__setattr__(self, "bob_phase", bob)

    @property
    def n_alice(self) -> int:
        return self.N + 1

    @property
    def n_bob(self) -> int:
        return self.N

    @cached_property
    def angle_differences(self) -> np.ndarray:
        """phi_A(x) - phi_B(y), shape (N + 1, N)."""
        return self.alice_phase[:, None] - self.bob_phase[None, :]


def correlator(p: float, phi_a: float, phi_b: float) -> float:
    """Expectation of (-1)^(a + b) for Werner purity `p` and basis angles."""
    return check_purity(p) * float(np.cos(phi_a - phi_b))


def quantum_box(p: float, scheme: MeasurementScheme | int) -> ConditionalBox:
    """P(ab|xy) = (1 + (-1)^(a xor b) E(x, y)) / 4 for every setting pair."""
    p = check_purity(p)
    if not isinstance(scheme, MeasurementScheme):
        scheme = MeasurementScheme(scheme)
    corr = p * np.cos(scheme.angle_differences)
    table = np.empty((2, 2, scheme.n_alice, scheme.n_bob))
    table[0, 0] = table[1, 1] = (1.0 + corr) / 4.0
    table[0, 1] = table[1, 0] = (1.0 - corr) / 4.0
    return ConditionalBox(table)


_PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)


def werner_density_matrix(p: float) -> np.ndarray:
    p = check_purity(p)
    return p * np.outer(_PHI_PLUS, _PHI_PLUS.conj()) + (1.0 - p) * np.eye(4) / 4.0


def _ket(phase: float, outcome: int) -> np.ndarray:
    sign = 1.0 if outcome == 0 else -1.0
    return np.array([1.0, sign * np.exp(1j * phase)]) / np.sqrt(2.0)


def density_matrix_oracle(p: float, phi_a: float, phi_b: float) -> np.ndarray:
    """Born probabilities P(a, b) as a 2x2 array, by explicit trace.

    Bob's kets carry the phase with a minus sign, matching his
    e^{-i phi_B} basis convention.
    """
    rho = werner_density_matrix(p)
    probs = np.empty((2, 2))
    for a in (0, 1):
        for b in (0, 1):
            ket = np.kron(_ket(phi_a, a), _ket(-phi_b, b))
            proj = np.outer(ket, ket.conj())
            probs[a, b] = np.trace(rho @ proj).real
    return probs
