"""One-way key rates against a no-signalling eavesdropper.

Reconciliation runs from Bob to Alice, so the rate is I(A:B) - I(B:E).
For the Werner state the observed key correlation is p and the chained
value is N (1 - p cos(pi / 2N)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from nsqkd._entropy import binary_entropy
from nsqkd.attack import eve_info_bound
from nsqkd.correlations import check_purity
from nsqkd.exceptions import GuardError, InputError, SolverError

__all__ = [
    "KeyRateReport",
    "binary_entropy",
    "chain_quantum",
    "curve",
    "key_rate_chain",
    "key_rate_chain_unclamped",
    "key_rate_preprocessed",
    "mutual_info_ab",
    "preprocessed_rate",
    "threshold",
]

R_GRID_STEP = 1e-3
R_REFINE_TOL = 1e-6
THRESHOLD_BRACKET = (0.5, 1.0)
THRESHOLD_XTOL = 1e-7
_R_GRID = np.linspace(0.0, 0.5, int(round(0.5 / R_GRID_STEP)) + 1)


@dataclass(frozen=True)
class KeyRateReport:
    """Key rate at one (N, p) point.

    ``threshold_flag`` is set when no key survives (p at or below the
    noise threshold, so ``key_rate`` was clamped to zero).
    """

    N: int
    p: float
    r_opt: float
    i_ab: float
    i_be_bound: float
    key_rate: float
    threshold_flag: bool

    CSV_HEADER = "N,p,r_opt,I_AB,I_BE_bound,K"

    def csv_row(self, precision: int | None = 6) -> str:
        values = (self.p, self.r_opt, self.i_ab, self.i_be_bound, self.key_rate)
        if precision is None:
            cells = [repr(float(v)) for v in values]
        else:
            cells = [f"{v:.{precision}f}" for v in values]
        return ",".join([str(self.N), *cells])


def _check_N(N: int) -> int:
    if int(N) != N or N < 2:
        raise InputError(f"number of chained settings must be an integer >= 2, got {N}")
    return int(N)


def chain_quantum(N: int, p: float) -> float:
    """Chained value of the Werner box, N (1 - p cos(pi / 2N))."""
    return N * (1.0 - p * math.cos(math.pi / (2 * N)))


def mutual_info_ab(p: float, r=0.0):
    """I(A:B) = 1 - h(eps) with eps = (1 - p)/2 + r p after Bob's flip."""
    p = check_purity(p)
    r_arr = np.asarray(r, dtype=float)
    if np.any(~((r_arr >= 0.0) & (r_arr <= 0.5))):
        raise InputError(f"flip probability must lie in [0, 1/2], got {r!r}")
    eps = (1.0 - p) / 2.0 + r_arr * p
    return 1.0 - binary_entropy(eps)


def key_rate_chain_unclamped(N: int, p: float) -> float:
    N = _check_N(N)
    p = check_purity(p)
    return 1.0 - binary_entropy((1.0 + p) / 2.0) - chain_quantum(N, p)


def key_rate_chain(N: int, p: float) -> float:
    """max(0, 1 - h((1 + p)/2) - N (1 - p cos(pi / 2N)))."""
    return max(0.0, key_rate_chain_unclamped(N, p))


def preprocessed_rate(N: int, p: float, r):
    """Unclamped rate K(r) = I(A:B) - I(B:E) when Bob flips with probability r."""
    return mutual_info_ab(p, r) - eve_info_bound(chain_quantum(N, p), r)


def _optimise_flip(N: int, p: float) -> tuple[float, float]:
    """Grid scan over r in [0, 1/2] then bounded refinement around the best node."""
    values = preprocessed_rate(N, p, _R_GRID)
    i = int(np.argmax(values))
    best_r, best_k = float(_R_GRID[i]), float(values[i])
    lo = _R_GRID[max(i - 1, 0)]
    hi = _R_GRID[min(i + 1, len(_R_GRID) - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda r: -float(preprocessed_rate(N, p, r)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": R_REFINE_TOL},
        )
        if res.success and -res.fun > best_k:
            best_r, best_k = float(res.x), float(-res.fun)
    return best_r, best_k


def key_rate_preprocessed(N: int, p: float) -> KeyRateReport:
    """Rate with Bob's bit-flip preprocessing, optimised over the flip probability."""
    N = _check_N(N)
    p = check_purity(p)
    r_opt, k = _optimise_flip(N, p)
    chain = chain_quantum(N, p)
    return KeyRateReport(
        N=N,
        p=p,
        r_opt=r_opt,
        i_ab=float(mutual_info_ab(p, r_opt)),
        i_be_bound=float(eve_info_bound(chain, r_opt)),
        key_rate=max(0.0, k),
        threshold_flag=not k > 0.0,
    )


def key_rate_report(N: int, p: float, preprocessed: bool = False) -> KeyRateReport:
    if preprocessed:
        return key_rate_preprocessed(N, p)
    N = _check_N(N)
    p = check_purity(p)
    i_ab = float(mutual_info_ab(p))
    i_be = float(eve_info_bound(chain_quantum(N, p)))
    k = key_rate_chain_unclamped(N, p)
    return KeyRateReport(N, p, 0.0, i_ab, i_be, max(0.0, k), not k > 0.0)


def _preprocessed_score(N: int, p: float) -> float:
    """A function with the sign of sup_{r < 1/2} K(r).

    K(r) -> 0 as r -> 1/2, so K is divided by (1/2 - r)^2; the quotient
    tends to (2 / ln 2) (p^2 - min(CHAIN, 1)) at r = 1/2.
    """
    r = _R_GRID[:-1]
    scaled = preprocessed_rate(N, p, r) / (0.5 - r) ** 2
    limit = 2.0 / math.log(2.0) * (p * p - min(chain_quantum(N, p), 1.0))
    return float(max(scaled.max(), limit))


def threshold(N: int, preprocessed: bool = False) -> float:
    """Smallest purity p giving a positive key rate, by bisection on [0.5, 1]."""
    N = _check_N(N)
    if N > 10:
        raise GuardError(f"thresholds are supported for N in 2..10, got {N}")
    if preprocessed:
        f = lambda p: _preprocessed_score(N, p)
    else:
        f = lambda p: key_rate_chain_unclamped(N, p)
    lo, hi = THRESHOLD_BRACKET
    if not f(lo) < 0.0 < f(hi):
        raise SolverError(f"no sign change of the key rate on [{lo}, {hi}] for N={N}")
    return float(bisect(f, lo, hi, xtol=THRESHOLD_XTOL))


def curve(
    N_list: Iterable[int], p_grid: Iterable[float], preprocessed: bool = False
) -> list[KeyRateReport]:
    """One report per (N, p), sorted by N then p."""
    Ns = sorted({_check_N(N) for N in N_list})
    ps = sorted({float(p) for p in p_grid})
    if not Ns or not ps:
        raise InputError("curve needs at least one N and one p")
    return [key_rate_report(N, p, preprocessed) for N in Ns for p in ps]
