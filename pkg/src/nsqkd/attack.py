"""Individual attacks by a no-signalling eavesdropper.

Eve's attack reduces to preparing a convex mixture of extremal boxes. The
strategy classes are named after whether the key settings x=0 and y=0 give
predetermined (D) or locally random (R) outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nsqkd.exceptions import InputError, SolverError, StructuralError
from nsqkd._entropy import binary_entropy
from nsqkd.nsbox import (
    LP_TOL,
    ConditionalBox,
    chain_value,
    corr_value,
    extremal_family,
    solve_lp,
    validate,
)


@dataclass(frozen=True)
class StrategyClass:
    id: str
    chain_lower_bound: float
    corr_upper_bound: float
    corr_exact: bool
    h_a_given_e: float
    h_b_given_e: float
    i_ab_given_e: float


STRATEGY_CLASSES = {
    "DD": StrategyClass("DD", 1.0, 1.0, False, 0.0, 0.0, 0.0),
    "DR": StrategyClass("DR", 0.0, 0.0, True, 0.0, 1.0, 0.0),
    "RR": StrategyClass("RR", 0.0, 1.0, False, 1.0, 1.0, 1.0),
}

# Only reachable with three or more Bob settings; Eve still fixes Bob's key bit.
EXTRA_CLASSES = {
    "RD": StrategyClass("RD", 1.0, 0.0, True, 1.0, 0.0, 0.0),
}


def strategy_class(class_id: str) -> StrategyClass:
    try:
        return STRATEGY_CLASSES[class_id]
    except KeyError:
        return EXTRA_CLASSES[class_id]


@dataclass(frozen=True)
class AttackDecomposition:
    """Weights (p1, p2, p3) on the DD / DR / RR classes, optionally with components.

    ``p1`` collects every component in which Bob's key output is
    predetermined (DD, and RD when it occurs), since that is what Eve's
    information on Bob's key bit depends on.
    """

    weights: tuple[float, float, float]
    components: list[tuple[float, ConditionalBox]] | None = None
    component_classes: list[str] | None = field(default=None)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (3,) or w.min() < -1e-12 or abs(w.sum() - 1.0) > 1e-9:
            raise InputError(f"attack weights must lie on the simplex, got {self.weights}")

    @property
    def p1(self) -> float:
        return self.weights[0]

    @property
    def p2(self) -> float:
        return self.weights[1]

    @property
    def p3(self) -> float:
        return self.weights[2]

    def reconstruct(self) -> ConditionalBox:
        if not self.components:
            raise StructuralError("decomposition carries no components")
        return ConditionalBox(sum(w * box.table for w, box in self.components))

    def eve_information(self) -> float:
        """I(B:E) = 1 - sum_i p_i H_i(B|E) for the recorded classes."""
        if self.component_classes is None:
            return self.p1
        h = sum(
            w * strategy_class(c).h_b_given_e
            for (w, _), c in zip(self.components, self.component_classes)
        )
        return 1.0 - h


def optimal_weights(chain_obs: float, corr_obs: float) -> AttackDecomposition:
    """Weights maximising p1 subject to p1 <= CHAIN and p1 + p3 >= C."""
    if chain_obs < 0:
        raise InputError(f"chain value must be nonnegative, got {chain_obs}")
    if not -1.0 <= corr_obs <= 1.0:
        raise InputError(f"key correlation must lie in [-1, 1], got {corr_obs}")
    p1 = min(chain_obs, 1.0)
    p3 = max(0.0, corr_obs - p1)
    p2 = max(0.0, 1.0 - p1 - p3)
    return AttackDecomposition((p1, p2, p3))


def eve_info_bound(chain_obs: float, flip_r: float = 0.0) -> float:
    """Upper bound on I(B:E) after Bob flips his key bit with probability r.

    Eve holding Bob's pre-flip bit learns it through a binary symmetric
    channel, so each bit she knew is worth 1 - h(r).
    """
    r = np.asarray(flip_r, dtype=float)
    if np.any(~((r >= 0.0) & (r <= 0.5))):
        raise InputError(f"flip probability must lie in [0, 1/2], got {flip_r!r}")
    known = min(max(float(chain_obs), 0.0), 1.0)
    return known * (1.0 - binary_entropy(r))


def intrinsic_info_upper(chain_obs: float, corr_obs: float) -> float:
    """I(A:B down E) <= C - CHAIN, with Eve saturating her optimal attack."""
    return max(0.0, corr_obs - chain_obs)


def classify(x0_deterministic: bool, y0_deterministic: bool) -> str:
    return ("D" if x0_deterministic else "R") + ("D" if y0_deterministic else "R")


def build_attack_mixture(target: ConditionalBox, tol: float = LP_TOL) -> AttackDecomposition:
    """Decompose `target` into extremal boxes, maximising Eve's y=0 knowledge.

    The target must be a valid no-signalling box in the chained layout
    (nA = nB + 1).  Raises SolverError if no decomposition is found.
    """
    ok, problems = validate(target)
    if not ok:
        raise InputError(f"target box is not no-signalling: {problems}")
    n_alice, n_bob = target.n_alice, target.n_bob
    if n_alice != n_bob + 1 or n_bob < 2:
        raise StructuralError(
            f"attack mixture needs the chained layout nA = nB + 1, got {n_alice} x {n_bob}"
        )
    family = extremal_family(n_alice, n_bob)
    A_eq = family.tables.reshape(len(family), -1).T
    b_eq = target.table.ravel()
    res = solve_lp(-family.y0_deterministic.astype(float), A_eq, b_eq, "attack mixture")

    weights = np.clip(res.x, 0.0, None)
    keep = np.flatnonzero(weights > 1e-12)
    weights = weights[keep] / weights[keep].sum()
    classes = [
        classify(family.x0_deterministic[k], family.y0_deterministic[k]) for k in keep
    ]
    components = [(float(w), ConditionalBox(family.tables[k])) for w, k in zip(weights, keep)]

    mix = np.tensordot(weights, family.tables[keep], axes=1)
    residual = float(np.max(np.abs(mix - target.table)))
    if residual > tol:
        raise SolverError(f"attack mixture reproduces target only to {residual:.3e}")

    per_class = {c: 0.0 for c in ("DD", "DR", "RR", "RD")}
    for w, c in zip(weights, classes):
        per_class[c] += float(w)
    p1 = per_class["DD"] + per_class["RD"]
    return AttackDecomposition(
        (p1, per_class["DR"], per_class["RR"]),
        components=components,
        component_classes=classes,
    )


def observed_constraints(box: ConditionalBox) -> tuple[float, float]:
    """(CHAIN, C) for a box in the chained layout."""
    return chain_value(box, box.n_bob), corr_value(box)
