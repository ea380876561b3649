"""Monte-Carlo run of the chained-test QKD protocol.

Each round Alice picks x = 0 with probability q (otherwise uniformly among
1..N) and Bob picks y = 0 with probability q' (otherwise uniformly among
1..N-1).  Outcomes come either from the honest Werner box or, in
adversarial mode, from an extremal component of Eve's optimal mixture drawn
afresh every round.  Key rounds (x = y = 0) may have Bob's bit flipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterator, NamedTuple

import numpy as np

from nsqkd import _accel
from nsqkd._entropy import binary_entropy
from nsqkd.attack import AttackDecomposition, build_attack_mixture, eve_info_bound
from nsqkd.correlations import check_purity, quantum_box
from nsqkd.exceptions import InputError, InsufficientDataError
from nsqkd.nsbox import chain_coefficients

KEY, TEST, DISCARD = 0, 1, 2
SIFT_NAMES = ("KEY", "TEST", "DISCARD")
MIN_EVE_KEY_ROUNDS = 10_000
BOOTSTRAP_SAMPLES = 400


@dataclass(frozen=True)
class ProtocolConfig:
    N: int
    p: float
    rounds: int
    q: float = 0.9
    qprime: float = 0.9
    flip_r: float = 0.0
    seed: int = 0
    adversarial: bool = False

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InputError(f"N must be an integer >= 2, got {self.N}")
        check_purity(self.p)
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise InputError(f"rounds must be a positive integer, got {self.rounds}")
        for name in ("q", "qprime"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InputError(f"{name} must lie strictly between 0 and 1, got {v}")
        if not 0.0 <= self.flip_r <= 0.5:
            raise InputError(f"flip_r must lie in [0, 1/2], got {self.flip_r}")
        if not 0 <= self.seed < 2**64:
            raise InputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


class Round(NamedTuple):
    index: int
    x: int
    y: int
    a: int
    b: int
    sift_tag: str
    eve_component: str | None = None


@dataclass(frozen=True, eq=False)
class Transcript:
    """Per-round record of a run, stored column-wise."""

    config: ProtocolConfig
    x: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray
    component: np.ndarray
    attack: AttackDecomposition | None = None

    def __len__(self):
        return self.x.shape[0]

    @property
    def sift(self) -> np.ndarray:
        tags = np.full(len(self), DISCARD, np.int8)
        tags[self.x > 0] = TEST
        tags[(self.x == 0) & (self.y == 0)] = KEY
        return tags

    def component_class(self, k: int) -> str | None:
        if self.attack is None or k < 0:
            return None
        return self.attack.component_classes[k]

    def rounds(self) -> Iterator[Round]:
        sift = self.sift
        for i in range(len(self)):
            yield Round(
                i, int(self.x[i]), int(self.y[i]), int(self.a[i]), int(self.b[i]),
                SIFT_NAMES[sift[i]], self.component_class(int(self.component[i])),
            )

    def write_csv(self, fh: IO[str]) -> None:
        """round_index,x,y,a,b,sift_tag[,eve_component] with a header line."""
        adversarial = self.attack is not None
        header = "round_index,x,y,a,b,sift_tag"
        fh.write(header + (",eve_component\n" if adversarial else "\n"))
        sift = self.sift
        if adversarial:
            labels = np.array(self.attack.component_classes, dtype=object)[self.component]
        for i in range(len(self)):
            line = f"{i},{self.x[i]},{self.y[i]},{self.a[i]},{self.b[i]},{SIFT_NAMES[sift[i]]}"
            if adversarial:
                line += "," + labels[i]
            fh.write(line + "\n")

    def counts(self) -> np.ndarray:
        """Outcome counts indexed [x, y, a, b]."""
        N = self.config.N
        return _accel.tally(self.x, self.y, self.a, self.b, N + 1, N)


@dataclass(frozen=True)
class EstimationReport:
    chain_est: float
    chain_se: float
    qber_est: float
    qber_se: float
    key_count: int
    rounds: int
    eve_empirical_info: float | None = None
    eve_info_se: float | None = None

    def summary_lines(self) -> list[str]:
        rows = [
            ("rounds", self.rounds),
            ("key_count", self.key_count),
            ("chain_est", self.chain_est),
            ("chain_se", self.chain_se),
            ("qber_est", self.qber_est),
            ("qber_se", self.qber_se),
        ]
        if self.eve_empirical_info is not None:
            rows += [("eve_empirical_info", self.eve_empirical_info), ("eve_info_se", self.eve_info_se)]
        return [f"{k},{v:.6f}" if isinstance(v, float) else f"{k},{v}" for k, v in rows]


@lru_cache(maxsize=16)
def _attack_for(N: int, p: float) -> AttackDecomposition:
    return build_attack_mixture(quantum_box(p, N))


def _outcome_cdf(tables: np.ndarray) -> np.ndarray:
    """Cumulative over the outcome pair 2a + b, shape (K, nA, nB, 4)."""
    k, _, _, n_alice, n_bob = tables.shape
    flat = tables.transpose(0, 3, 4, 1, 2).reshape(k, n_alice, n_bob, 4)
    cum = np.cumsum(flat, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _source(config: ProtocolConfig):
    if not config.adversarial:
        table = quantum_box(config.p, config.N).table[None]
        return None, np.array([1.0]), _outcome_cdf(table)
    attack = _attack_for(config.N, config.p)
    weights = np.array([w for w, _ in attack.components])
    comp_cum = np.cumsum(weights)
    comp_cum[-1] = 1.0
    tables = np.array([box.table for _, box in attack.components])
    return attack, comp_cum, _outcome_cdf(tables)


def estimate(counts: np.ndarray, N: int, rounds: int) -> EstimationReport:
    """Chain value and QBER estimates with binomial standard errors."""
    coeff = chain_coefficients(N)  # [a, b, x, y]
    chain, var = 0.0, 0.0
    for i in range(1, N + 1):
        for y in (i - 1, i if i < N else 0):
            cell = counts[i, y]
            n = int(cell.sum())
            if n == 0:
                chain, var = math.nan, math.nan
                break
            f = float((coeff[:, :, i, y] * cell).sum()) / n
            chain += f
            var += f * (1.0 - f) / n
    key = counts[0, 0]
    key_count = int(key.sum())
    if key_count:
        qber = float(key[0, 1] + key[1, 0]) / key_count
        qber_se = math.sqrt(qber * (1.0 - qber) / key_count)
    else:
        qber, qber_se = math.nan, math.nan
    return EstimationReport(chain, math.sqrt(var), qber, qber_se, key_count, rounds)


def run(config: ProtocolConfig, use_numba: bool | None = None) -> tuple[Transcript, EstimationReport]:
    """Simulate the protocol; deterministic for a given config (seed included)."""
    attack, comp_cum, outcome_cum = _source(config)
    x, y, a, b, comp = _accel.sample_rounds(
        _accel.seed_key(config.seed), 0, config.rounds, config.N, config.q, config.qprime,
        config.flip_r, comp_cum, outcome_cum, config.adversarial, use_numba=use_numba,
    )
    transcript = Transcript(config, x, y, a, b, comp, attack)
    report = estimate(transcript.counts(), config.N, config.rounds)
    if attack is not None and report.key_count >= MIN_EVE_KEY_ROUNDS:
        info = eve_accuracy(transcript)
        report = EstimationReport(
            report.chain_est, report.chain_se, report.qber_est, report.qber_se,
            report.key_count, report.rounds, info.bits, info.stderr,
        )
    return transcript, report


class EveInfo(NamedTuple):
    bits: float
    stderr: float
    key_rounds: int


def _mutual_information(joint: np.ndarray) -> float:
    """Plug-in I(E:B) in bits from a count table, Miller-Madow corrected."""
    n = joint.sum()
    p = joint / n
    pe = p.sum(axis=1, keepdims=True)
    pb = p.sum(axis=0, keepdims=True)
    nz = p > 0
    mi = float(np.sum(p[nz] * np.log2(p[nz] / (pe * pb)[nz])))
    df = nz.sum() - (pe > 0).sum() - (pb > 0).sum() + 1
    return mi - df / (2.0 * n * math.log(2.0))


def eve_accuracy(transcript: Transcript) -> EveInfo:
    """Empirical I(B:E) on key rounds of an adversarial transcript.

    Eve's variable is Bob's pre-flip key bit when her component fixes it
    (y = 0 deterministic), an erasure otherwise.  The standard error comes
    from a multinomial bootstrap of the 3 x 2 count table.
    """
    if transcript.attack is None:
        raise InputError("eve_accuracy needs an adversarial transcript")
    key_mask = transcript.sift == KEY
    n_key = int(key_mask.sum())
    if n_key < MIN_EVE_KEY_ROUNDS:
        raise InsufficientDataError(
            f"need at least {MIN_EVE_KEY_ROUNDS} key rounds, have {n_key}"
        )
    # Eve's guess per component: 0/1 when Bob's y=0 output is fixed, 2 = erasure
    guess = []
    for _, box in transcript.attack.components:
        pb0 = box.table[:, :, 0, 0].sum(axis=0)
        guess.append(int(np.argmax(pb0)) if pb0.max() > 1.0 - 1e-9 else 2)
    e = np.asarray(guess)[transcript.component[key_mask]]
    b = transcript.b[key_mask].astype(np.int64)
    joint = np.bincount(e * 2 + b, minlength=6).reshape(3, 2).astype(float)
    bits = _mutual_information(joint)
    rng = np.random.default_rng(transcript.config.seed)
    boot = rng.multinomial(n_key, joint.ravel() / n_key, size=BOOTSTRAP_SAMPLES)
    samples = [_mutual_information(c.reshape(3, 2).astype(float)) for c in boot]
    return EveInfo(bits, float(np.std(samples, ddof=1)), n_key)


def achievable_key_length(report: EstimationReport, config: ProtocolConfig) -> int:
    """floor(key_count * max(0, 1 - h(QBER) - I(B:E) bound)) at the estimates."""
    if report.key_count == 0 or math.isnan(report.chain_est) or math.isnan(report.qber_est):
        return 0
    rate = 1.0 - binary_entropy(report.qber_est) - eve_info_bound(report.chain_est, config.flip_r)
    return int(math.floor(report.key_count * max(0.0, rate)))
