"""Monte Carlo estimation of P(|S_n| >= t) plus exact small-instance oracles.

Sampling follows a strict determinism contract: replicates are split into
fixed-size batches, batch b draws from the counter-based stream
(seed, scenario, n, b), and batch results are merged in index order.  The
same (config, seed) therefore produces bit-identical output for any worker
count.

Oracles compute the full distribution of the n-step sum by convolution
(Rademacher up to n = 4096 on the integer lattice, small atomic walks via a
support-capped table) and the running-maximum tail by an absorbing-threshold
dynamic program for n <= 64.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from . import distmodel, seeding
from .reports import UNDETERMINED, SeriesReport, SeriesRow
from .seqkit import KahanAccumulator, NormSeq, WeightSeq

WILSON_Z99 = 2.5758293035489004  # 99.5% standard normal quantile

MIN_REPLICATES = 1_000
DEFAULT_BATCH = 65_536
_CHUNK_ELEMENTS = 1 << 22

MAX_RADEMACHER_N = 4096
MAX_ORACLE_SUPPORT = 1_000_000
MAX_MAXIMAL_N = 64


class OracleUnavailable(RuntimeError):
    """Raised when no exact walk oracle exists for a distribution."""


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------


def wilson_interval(hits: int, total: int, z: float = WILSON_Z99) -> tuple[float, float]:
    """Wilson score interval; preferred over Wald because p sits near 0."""
    if total <= 0:
        raise ValueError("total must be positive")
    p = hits / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (p + z2 / (2.0 * total)) / denom
    half = z * math.sqrt(p * (1.0 - p) / total + z2 / (4.0 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    replicates: int
    lo: float
    hi: float
    seed_stream: str
    n: int
    threshold: float

    def __post_init__(self) -> None:
        if not (self.lo <= self.p_hat <= self.hi):
            raise ValueError("interval must bracket the point estimate")

    def to_json_dict(self) -> dict:
        return {"p_hat": self.p_hat, "replicates": self.replicates,
                "lo": self.lo, "hi": self.hi, "seed_stream": self.seed_stream,
                "n": self.n, "threshold": self.threshold}

    @staticmethod
    def from_json_dict(d: dict) -> "Estimate":
        return Estimate(p_hat=float(d["p_hat"]), replicates=int(d["replicates"]),
                        lo=float(d["lo"]), hi=float(d["hi"]),
                        seed_stream=d["seed_stream"], n=int(d["n"]),
                        threshold=float(d["threshold"]))


def _batch_sums(d: distmodel.Dist, n: int, rows: int,
                rng: np.random.Generator) -> np.ndarray:
    """Row sums of an (rows, n) sample matrix, drawn in fixed column chunks."""
    total = np.zeros(rows, dtype=np.float64)
    done = 0
    while done < n:
        cols = min(n - done, max(1, _CHUNK_ELEMENTS // rows))
        x = distmodel.sample(d, rng, rows * cols)
        total += x.reshape(rows, cols).sum(axis=1)
        done += cols
    return total


def _batch_plan(replicates: int, batch_size: int) -> list[int]:
    full, rest = divmod(replicates, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def estimate_tail(d: distmodel.Dist, n: int, threshold: float, replicates: int,
                  seed: int, scenario: int = 0, workers: int = 1,
                  batch_size: int = DEFAULT_BATCH) -> Estimate:
    """Monte Carlo estimate of P(|S_n| >= threshold) with a 99% Wilson interval."""
    if replicates < MIN_REPLICATES:
        raise ValueError(f"need at least {MIN_REPLICATES} replicates")
    if n < 1:
        raise ValueError("n must be >= 1")
    if math.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    plan = _batch_plan(replicates, batch_size)

    def run_batch(b: int) -> int:
        rng = seeding.stream(seed, scenario, n, b)
        sums = _batch_sums(d, n, plan[b], rng)
        return int(np.count_nonzero(np.abs(sums) >= threshold))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run_batch, range(len(plan))))
    else:
        counts = [run_batch(b) for b in range(len(plan))]
    hits = sum(counts)  # integer merge in fixed batch order
    p_hat = hits / replicates
    lo, hi = wilson_interval(hits, replicates)
    return Estimate(p_hat=p_hat, replicates=replicates, lo=lo, hi=hi,
                    seed_stream=seeding.stream_id(seed, scenario, n), n=n,
                    threshold=threshold)


# ---------------------------------------------------------------------------
# Exact oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WalkOracle:
    """Full distribution of S_n as an exact (values, probs) table."""

    n: int
    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        if abs(float(self.probs.sum()) - 1.0) > 1e-12:
            raise ValueError("oracle probabilities do not sum to 1")


def _step_atoms(d: distmodel.Dist) -> list[tuple[float, float]]:
    """One-step atom table (value, prob) including the mass at 0."""
    if d.kind == "rademacher":
        return [(-1.0, 0.5), (1.0, 0.5)]
    if d.kind == "atomic_sym":
        (atoms,) = d.params
        out = []
        for v, p in atoms:
            out.extend([(-v, 0.5 * p), (v, 0.5 * p)])
        rest = 1.0 - sum(p for _, p in atoms)
        if rest > 0.0:
            out.append((0.0, rest))
        return sorted(out)
    if d.kind == "atomic":
        (atoms,) = d.params
        out = list(atoms)
        rest = 1.0 - sum(p for _, p in atoms)
        if rest > 0.0:
            out.append((0.0, rest))
        return sorted(out)
    raise OracleUnavailable(f"no exact walk oracle for kind {d.kind!r}")


def _mirror_symmetrize(values: np.ndarray, probs: np.ndarray) -> np.ndarray:
    # The true table is symmetric; copy the lower half so it holds bitwise.
    out = probs.copy()
    m = len(out)
    for i in range(m // 2):
        out[m - 1 - i] = out[i]
    return out


def exact_walk_oracle(d: distmodel.Dist, n: int) -> WalkOracle:
    """Exact table for S_n; Rademacher up to 4096, atomic walks capped at 10^6 points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if d.kind == "rademacher":
        if n > MAX_RADEMACHER_N:
            raise OracleUnavailable(f"Rademacher oracle capped at n = {MAX_RADEMACHER_N}")
        probs = np.array([1.0], dtype=np.float64)
        half = np.array([0.5, 0.5], dtype=np.float64)
        for _ in range(n):
            probs = np.convolve(probs, half)
        values = np.arange(-n, n + 1, 2, dtype=np.float64)
        probs = _mirror_symmetrize(values, probs)
        return WalkOracle(n=n, values=values, probs=probs)
    steps = _step_atoms(d)
    table: dict[float, float] = {0.0: 1.0}
    for _ in range(n):
        new: dict[float, float] = {}
        for s, ps in sorted(table.items()):
            for v, pv in steps:
                key = s + v
                new[key] = new.get(key, 0.0) + ps * pv
        if len(new) > MAX_ORACLE_SUPPORT:
            raise OracleUnavailable(
                f"walk support exceeds {MAX_ORACLE_SUPPORT} points at this depth")
        table = new
    values = np.array(sorted(table), dtype=np.float64)
    probs = np.array([table[v] for v in values], dtype=np.float64)
    if d.symmetric:
        probs = _mirror_symmetrize(values, probs)
    return WalkOracle(n=n, values=values, probs=probs)


def exact_tail(oracle: WalkOracle, threshold: float) -> float:
    """Exact P(|S_n| >= threshold) by table summation."""
    if math.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    if threshold <= 0:
        return 1.0
    mask = np.abs(oracle.values) >= threshold
    return float(oracle.probs[mask].sum())


def max_tail_profile(d: distmodel.Dist, n_max: int, threshold: float) -> np.ndarray:
    """P(max_{k<=j} |S_k| >= threshold) for j = 1..n_max via an absorbing DP.

    The running maximum is absorbed the moment |S_k| crosses the threshold,
    which is valid for arbitrary atomic steps (no reflection argument).
    """
    if n_max < 1 or n_max > MAX_MAXIMAL_N:
        raise ValueError(f"running-maximum DP supports 1 <= n <= {MAX_MAXIMAL_N}")
    if math.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    if threshold <= 0:
        return np.ones(n_max, dtype=np.float64)
    steps = _step_atoms(d)
    alive: dict[float, float] = {0.0: 1.0}
    absorbed = 0.0
    out = np.empty(n_max, dtype=np.float64)
    for j in range(n_max):
        new: dict[float, float] = {}
        for s, ps in sorted(alive.items()):
            for v, pv in steps:
                key = s + v
                mass = ps * pv
                if abs(key) >= threshold:
                    absorbed += mass
                else:
                    new[key] = new.get(key, 0.0) + mass
        if len(new) > MAX_ORACLE_SUPPORT:
            raise OracleUnavailable(
                f"walk support exceeds {MAX_ORACLE_SUPPORT} points at this depth")
        alive = new
        out[j] = absorbed
    return out


def exact_max_tail(d: distmodel.Dist, n: int, threshold: float) -> float:
    """Exact P(max_{k<=n} |S_k| >= threshold)."""
    return float(max_tail_profile(d, n, threshold)[-1])


# ---------------------------------------------------------------------------
# Medians
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MedianEstimate:
    value: float
    lo: float
    hi: float
    replicates: int
    seed_stream: str


def median_of_sum(d: distmodel.Dist, n: int, replicates: int, seed: int,
                  scenario: int = 0, batch_size: int = DEFAULT_BATCH) -> MedianEstimate:
    """Sample median of S_n with a distribution-free 99% order-statistic interval."""
    if replicates < MIN_REPLICATES:
        raise ValueError(f"need at least {MIN_REPLICATES} replicates")
    plan = _batch_plan(replicates, batch_size)
    parts = []
    for b, rows in enumerate(plan):
        rng = seeding.stream(seed, scenario, n, b)
        parts.append(_batch_sums(d, n, rows, rng))
    sums = np.sort(np.concatenate(parts))
    r = len(sums)
    med = 0.5 * (sums[(r - 1) // 2] + sums[r // 2])
    lo_idx = int(stats.binom.ppf(0.005, r, 0.5))
    hi_idx = min(int(stats.binom.ppf(0.995, r, 0.5)), r - 1)
    return MedianEstimate(value=float(med), lo=float(sums[lo_idx]),
                          hi=float(sums[hi_idx]), replicates=r,
                          seed_stream=seeding.stream_id(seed, scenario, n))


def median_condition_report(d: distmodel.Dist, w: WeightSeq, a: NormSeq,
                            eps: float, n_grid, replicates: int, seed: int,
                            scenario: int = 0) -> dict:
    """Per-n check of |median(S_n)| against eps*a(n).

    Verdicts are issued only when the order-statistic interval excludes the
    threshold; the weight sum over the estimated exceptional set is reported
    without any convergence claim.
    """
    rows = []
    exceptional = KahanAccumulator()
    for n in n_grid:
        est = median_of_sum(d, n, replicates, seed, scenario=scenario)
        bar = eps * a(n)
        if max(abs(est.lo), abs(est.hi)) < bar:
            verdict = "within"
        elif est.lo > bar or est.hi < -bar:
            verdict = "exceeds"
            exceptional.add(w(n))
        else:
            verdict = "inconclusive"
        rows.append({"n": int(n), "median": est.value, "lo": est.lo, "hi": est.hi,
                     "threshold": bar, "verdict": verdict})
    return {"rows": rows, "exceptional_weight_sum": exceptional.total,
            "eps": eps, "replicates": replicates}


# ---------------------------------------------------------------------------
# Empirical series
# ---------------------------------------------------------------------------


def empirical_series(d: distmodel.Dist, w: WeightSeq, a: NormSeq, eps: float,
                     n_grid, replicates: int, seed: int, workers: int = 1,
                     scenario: int = 0, with_exact: bool = False,
                     series_id: str = "weighted-sum-tail") -> SeriesReport:
    """Terms w(n) * p_hat(n) with Wilson intervals propagated into the partial sums.

    Monte Carlo cannot certify an infinite series, so the verdict is always
    Undetermined; certificates come from the analytic layer.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    rows = []
    acc = KahanAccumulator()
    lo_acc = KahanAccumulator()
    hi_acc = KahanAccumulator()
    for n in n_grid:
        n = int(n)
        threshold = eps * a(n)
        est = estimate_tail(d, n, threshold, replicates, seed,
                            scenario=scenario, workers=workers)
        tau = w(n)
        exact = None
        if with_exact:
            try:
                exact = exact_tail(exact_walk_oracle(d, n), threshold)
            except OracleUnavailable:
                exact = None
        rows.append(SeriesRow(n=n, term=tau * est.p_hat,
                              partial_sum=acc.add(tau * est.p_hat),
                              ci_lo=lo_acc.add(tau * est.lo),
                              ci_hi=hi_acc.add(tau * est.hi),
                              exact=exact))
    return SeriesReport(
        series_id=series_id,
        params={"eps": eps, "replicates": replicates,
                "seed_stream": seeding.stream_id(seed, scenario),
                "weights": w.name, "normalizer": a.name},
        rows=tuple(rows), verdict=UNDETERMINED,
        evidence=("Monte Carlo evidence only; intervals are per-term Wilson 99% "
                  "accumulated into partial-sum bounds",))
