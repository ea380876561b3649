"""Bipartite binary-output boxes P(ab|xy) and their Bell functionals.

Tables are indexed ``table[a, b, x, y]``.  Bell values follow the
"smaller is more nonlocal" orientation: a local box has CHSH >= 1, any
no-signalling box has CHSH >= 0.
"""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from nsqkd.exceptions import GuardError, InputError, SolverError, StructuralError

VALIDATE_TOL = 1e-9
LP_TOL = 1e-7
DUALITY_GAP_TOL = 1e-8
MAX_DETERMINISTIC_SETTINGS = 6
MAX_FAMILY_SIZE = 200_000


@dataclass(frozen=True, eq=False)
class ConditionalBox:
    """Conditional distribution P(ab|xy) with binary outcomes."""

    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 4 or table.shape[:2] != (2, 2):
            raise StructuralError(
                f"box table must have shape (2, 2, nA, nB), got {table.shape}"
            )
        if table.shape[2] < 1 or table.shape[3] < 1:
            raise StructuralError("box needs at least one setting per party")
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    @property
    def n_alice(self) -> int:
        return self.table.shape[2]

    @property
    def n_bob(self) -> int:
        return self.table.shape[3]

    def alice_marginal(self) -> np.ndarray:
        """P(a|xy), shape (2, nA, nB)."""
        return self.table.sum(axis=1)

    def bob_marginal(self) -> np.ndarray:
        """P(b|xy), shape (2, nA, nB)."""
        return self.table.sum(axis=0)

    def mix(self, other: ConditionalBox, weight: float) -> ConditionalBox:
        """weight * self + (1 - weight) * other."""
        if other.table.shape != self.table.shape:
            raise StructuralError("cannot mix boxes of different shapes")
        return ConditionalBox(weight * self.table + (1.0 - weight) * other.table)

    @classmethod
    def uniform(cls, n_alice: int, n_bob: int) -> ConditionalBox:
        return cls(np.full((2, 2, n_alice, n_bob), 0.25))

    def __eq__(self, other):
        if not isinstance(other, ConditionalBox):
            return NotImplemented
        return self.table.shape == other.table.shape and np.array_equal(
            self.table, other.table
        )

    __hash__ = None


@dataclass(frozen=True)
class DeterministicBox:
    """Local deterministic strategy: Alice answers alice[x], Bob answers bob[y]."""

    alice: tuple[int, ...]
    bob: tuple[int, ...]

    def __post_init__(self):
        for bits in (self.alice, self.bob):
            if not bits or any(v not in (0, 1) for v in bits):
                raise StructuralError(f"assignment must be a nonempty 0/1 tuple: {bits}")

    def to_box(self) -> ConditionalBox:
        nA, nB = len(self.alice), len(self.bob)
        table = np.zeros((2, 2, nA, nB))
        xs, ys = np.meshgrid(np.arange(nA), np.arange(nB), indexing="ij")
        a = np.asarray(self.alice)[xs]
        b = np.asarray(self.bob)[ys]
        table[a, b, xs, ys] = 1.0
        return ConditionalBox(table)


def validate(box: ConditionalBox, tol: float = VALIDATE_TOL) -> tuple[bool, list[str]]:
    """Check nonnegativity, normalization and both no-signalling families.

    Returns ``(ok, violations)`` where each violation is a short label.
    """
    if not isinstance(box, ConditionalBox):
        box = ConditionalBox(box)
    t = box.table
    problems = []
    if t.min() < -tol:
        problems.append("nonnegativity")
    if np.max(np.abs(t.sum(axis=(0, 1)) - 1.0)) > tol:
        problems.append("normalization")
    pa = box.alice_marginal()
    if np.max(np.abs(pa - pa[:, :, :1])) > tol:
        problems.append("no-signalling: Alice marginal depends on y")
    pb = box.bob_marginal()
    if np.max(np.abs(pb - pb[:, :1, :])) > tol:
        problems.append("no-signalling: Bob marginal depends on x")
    return not problems, problems


def _require_settings(box: ConditionalBox, n_alice: int, n_bob: int, what: str):
    if box.n_alice < n_alice or box.n_bob < n_bob:
        raise StructuralError(
            f"{what} needs at least {n_alice} Alice and {n_bob} Bob settings, "
            f"box has {box.n_alice} x {box.n_bob}"
        )


def _p_differ(t: np.ndarray, x: int, y: int) -> float:
    return t[0, 1, x, y] + t[1, 0, x, y]


def _p_equal(t: np.ndarray, x: int, y: int) -> float:
    return t[0, 0, x, y] + t[1, 1, x, y]


def chsh_value(box: ConditionalBox) -> float:
    """P(a1 != b0) + P(a1 != b1) + P(a2 != b1) + P(a2 = b0)."""
    _require_settings(box, 3, 2, "CHSH")
    t = box.table
    return float(
        _p_differ(t, 1, 0) + _p_differ(t, 1, 1) + _p_differ(t, 2, 1) + _p_equal(t, 2, 0)
    )


def chain_coefficients(N: int, n_alice: int | None = None, n_bob: int | None = None) -> np.ndarray:
    """Coefficient table c with chain value = sum(c * table).

    Clauses are (x=i, y=i-1) and (x=i, y=i) for i = 1..N, each penalising
    a != b, except the last one where y = N stands for Bob's setting 0 with
    the outcome complemented (so it penalises a == b).
    """
    if N < 2:
        raise InputError(f"chained inequality needs N >= 2, got {N}")
    n_alice = N + 1 if n_alice is None else n_alice
    n_bob = N if n_bob is None else n_bob
    c = np.zeros((2, 2, n_alice, n_bob))
    for i in range(1, N + 1):
        c[0, 1, i, i - 1] += 1.0
        c[1, 0, i, i - 1] += 1.0
        if i < N:
            c[0, 1, i, i] += 1.0
            c[1, 0, i, i] += 1.0
        else:
            c[0, 0, N, 0] += 1.0
            c[1, 1, N, 0] += 1.0
    return c


def chain_value(box: ConditionalBox, N: int) -> float:
    _require_settings(box, N + 1, N, f"CHAIN({N})")
    return float(np.sum(chain_coefficients(N, box.n_alice, box.n_bob) * box.table))


def corr_value(box: ConditionalBox) -> float:
    """P(a0 = b0) - P(a0 != b0) on the key settings."""
    t = box.table
    return float(_p_equal(t, 0, 0) - _p_differ(t, 0, 0))


@dataclass(frozen=True)
class BellValue:
    value: float
    functional_id: str

    def __post_init__(self):
        lo, hi = _bell_range(self.functional_id)
        if not lo - VALIDATE_TOL <= self.value <= hi + VALIDATE_TOL:
            raise InputError(
                f"{self.functional_id} value {self.value} outside [{lo}, {hi}]"
            )


def _bell_range(functional_id: str) -> tuple[float, float]:
    if functional_id == "CHSH":
        return 0.0, 4.0
    if functional_id == "CORR":
        return -1.0, 1.0
    if functional_id.startswith("CHAIN(") and functional_id.endswith(")"):
        return 0.0, 2.0 * int(functional_id[6:-1])
    raise InputError(f"unknown Bell functional {functional_id!r}")


def bell_value(box: ConditionalBox, functional_id: str) -> BellValue:
    if functional_id == "CHSH":
        return BellValue(chsh_value(box), functional_id)
    if functional_id == "CORR":
        return BellValue(corr_value(box), functional_id)
    _bell_range(functional_id)
    N = int(functional_id[6:-1])
    return BellValue(chain_value(box, N), functional_id)


def enumerate_deterministic(n_alice: int, n_bob: int) -> list[DeterministicBox]:
    if n_alice < 1 or n_bob < 1:
        raise StructuralError("need at least one setting per party")
    if n_alice > MAX_DETERMINISTIC_SETTINGS or n_bob > MAX_DETERMINISTIC_SETTINGS:
        raise GuardError(
            f"deterministic enumeration limited to {MAX_DETERMINISTIC_SETTINGS} "
            f"settings per party, got {n_alice} x {n_bob}"
        )
    return [
        DeterministicBox(alice, bob)
        for alice in itertools.product((0, 1), repeat=n_alice)
        for bob in itertools.product((0, 1), repeat=n_bob)
    ]


def pr_box(n_alice: int = 2, n_bob: int = 2, x_pair=(0, 1), y_pair=(0, 1), flip=0) -> ConditionalBox:
    """PR-type box on a 2x2 sub-scenario, uniform independent outputs elsewhere.

    On the chosen pair a xor b = (x == x_pair[1]) * (y == y_pair[1]) xor flip.
    """
    table = np.full((2, 2, n_alice, n_bob), 0.25)
    for i, x in enumerate(x_pair):
        for j, y in enumerate(y_pair):
            parity = (i * j) ^ flip
            table[:, :, x, y] = 0.0
            for a in (0, 1):
                table[a, a ^ parity, x, y] = 0.5
    return ConditionalBox(table)


@dataclass(frozen=True)
class BoxFamily:
    """Stacked candidate vertices of the no-signalling polytope.

    ``tables`` has shape (K, 2, 2, nA, nB); the flags record whether
    Alice's setting 0 and Bob's setting 0 have predetermined outputs.
    """

    tables: np.ndarray
    x0_deterministic: np.ndarray
    y0_deterministic: np.ndarray

    def __len__(self):
        return self.tables.shape[0]


def _local_marginals(n: int, random_mask: int) -> np.ndarray:
    """All response tables P(out|setting) for the given random/deterministic split.

    Random settings answer uniformly; deterministic ones enumerate every
    assignment.  Shape (n_assignments, 2, n).
    """
    det = [s for s in range(n) if not random_mask >> s & 1]
    out = []
    for bits in itertools.product((0, 1), repeat=len(det)):
        m = np.full((2, n), 0.5)
        for s, v in zip(det, bits):
            m[:, s] = 0.0
            m[v, s] = 1.0
        out.append(m)
    return np.array(out)


def _family_size(n_alice: int, n_bob: int) -> int:
    total = 2 ** (n_alice + n_bob)
    for k in range(1, n_alice + 1):
        for l in range(1, n_bob + 1):
            total += (
                comb(n_alice, k) * comb(n_bob, l)
                * 2 ** (n_alice - k) * 2 ** (n_bob - l) * 2 ** (k * l)
            )
    return total


@lru_cache(maxsize=8)
def extremal_family(n_alice: int, n_bob: int) -> BoxFamily:
    """Deterministic boxes plus PR-type boxes spanning the binary NS polytope.

    A PR-type box picks a nonempty set of "random" settings on each side.
    Deterministic settings answer a fixed bit, random ones answer uniformly,
    and on random pairs the outputs are tied by a xor b = f(x, y) for an
    arbitrary parity table f.  Every extremal point of the two-party
    binary-output polytope has this form; the non-extremal members are
    harmless extra columns.  When Bob has only two settings, members with
    Bob's setting 0 deterministic but Alice's setting 0 random are local
    and are left out.
    """
    if _family_size(n_alice, n_bob) > MAX_FAMILY_SIZE:
        raise GuardError(
            f"extremal family for {n_alice} x {n_bob} settings exceeds {MAX_FAMILY_SIZE}"
        )
    tables = [d.to_box().table for d in enumerate_deterministic(n_alice, n_bob)]
    x0_det = [True] * len(tables)
    y0_det = [True] * len(tables)
    tables = [np.array(tables)]

    for mask_a in range(1, 2**n_alice):
        rand_a = [x for x in range(n_alice) if mask_a >> x & 1]
        marg_a = _local_marginals(n_alice, mask_a)
        for mask_b in range(1, 2**n_bob):
            x0_random = bool(mask_a & 1)
            y0_random = bool(mask_b & 1)
            if n_bob <= 2 and x0_random and not y0_random:
                continue
            rand_b = [y for y in range(n_bob) if mask_b >> y & 1]
            marg_b = _local_marginals(n_bob, mask_b)
            # product part, shape (nDA, nDB, 2, 2, nA, nB)
            prod = marg_a[:, None, :, None, :, None] * marg_b[None, :, None, :, None, :]
            k, l = len(rand_a), len(rand_b)
            parities = np.array(list(itertools.product((0, 1), repeat=k * l))).reshape(-1, k, l)
            block = np.zeros((len(parities), 2, 2, k, l))
            for a in (0, 1):
                for b in (0, 1):
                    block[:, a, b] = 0.5 * ((a ^ b) == parities)
            full = np.broadcast_to(
                prod[:, :, None], prod.shape[:2] + (len(parities),) + prod.shape[2:]
            ).copy()
            ix = np.ix_(range(2), range(2), rand_a, rand_b)
            full[(...,) + ix] = block[None, None]
            full = full.reshape((-1, 2, 2, n_alice, n_bob))
            tables.append(full)
            x0_det += [not x0_random] * len(full)
            y0_det += [not y0_random] * len(full)

    stacked = np.concatenate(tables)
    stacked.flags.writeable = False
    return BoxFamily(stacked, np.array(x0_det), np.array(y0_det))


def no_signalling_constraints(n_alice: int, n_bob: int) -> tuple[np.ndarray, np.ndarray]:
    """Equality constraints A_eq @ vec(table) = b_eq for the NS polytope.

    Rows: normalization per (x, y), then Alice's marginal at y against y=0,
    then Bob's marginal at x against x=0.  Nonnegativity is left to bounds.
    """
    shape = (2, 2, n_alice, n_bob)
    rows, rhs = [], []
    for x in range(n_alice):
        for y in range(n_bob):
            r = np.zeros(shape)
            r[:, :, x, y] = 1.0
            rows.append(r.ravel())
            rhs.append(1.0)
    for a in (0, 1):
        for x in range(n_alice):
            for y in range(1, n_bob):
                r = np.zeros(shape)
                r[a, :, x, y] = 1.0
                r[a, :, x, 0] = -1.0
                rows.append(r.ravel())
                rhs.append(0.0)
    for b in (0, 1):
        for y in range(n_bob):
            for x in range(1, n_alice):
                r = np.zeros(shape)
                r[:, b, x, y] = 1.0
                r[:, b, 0, y] = -1.0
                rows.append(r.ravel())
                rhs.append(0.0)
    return np.array(rows), np.array(rhs)


def solve_lp(c, A_eq, b_eq, what: str):
    """Minimise c @ v over v >= 0 with A_eq v = b_eq; checks the duality gap."""
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"{what}: LP failed ({res.message})")
    dual = float(b_eq @ res.eqlin.marginals)
    if abs(res.fun - dual) > DUALITY_GAP_TOL:
        raise SolverError(f"{what}: duality gap {abs(res.fun - dual):.3e}")
    return res


def min_chain_given_marginal(N: int, beta: float) -> float:
    """Minimum chain value over NS boxes with P(b=0|y=0) pinned to `beta`."""
    if not 2 <= N <= 5:
        raise GuardError(f"LP limited to N in 2..5, got {N}")
    if not 0.0 <= beta <= 1.0:
        raise InputError(f"beta must lie in [0, 1], got {beta}")
    n_alice, n_bob = N + 1, N
    A_eq, b_eq = no_signalling_constraints(n_alice, n_bob)
    pin = np.zeros((2, 2, n_alice, n_bob))
    pin[:, 0, 0, 0] = 1.0
    A_eq = np.vstack([A_eq, pin.ravel()])
    b_eq = np.append(b_eq, beta)
    res = solve_lp(chain_coefficients(N).ravel(), A_eq, b_eq, f"min CHAIN({N}) at beta={beta}")
    return float(res.fun)
