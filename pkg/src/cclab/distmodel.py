"""Random-variable models: exact tails, truncated moments, and samplers.

All built-in kinds are symmetric about 0.  Tails and truncated moments are
closed form wherever a closed form exists; the standard normal falls back to
adaptive quadrature at 1e-12 absolute tolerance.  The log-atomic kind keeps
atom positions and weights in the log domain so that masses far below the
smallest subnormal double remain usable; it cannot be sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .seqkit import NormSeq


class SamplingUnavailable(RuntimeError):
    """Raised when a distribution's atom probabilities cannot be realized."""


_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

_MASS_TOL = 1e-12


def log_plus(x: float) -> float:
    """log(2 + x); bounded below by log 2, so it is safe as a denominator."""
    if x < 0:
        raise ValueError("log_plus is defined for x >= 0")
    return math.log(2.0 + x)


def _std_normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _logsumexp(values) -> float:
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    m = max(vals)
    return m + math.log(sum(math.exp(v - m) for v in vals))


@dataclass(frozen=True)
class TruncatedMoment:
    """E[|X|^order 1{|X| < cutoff}]; nondecreasing in the cutoff."""

    order: float
    cutoff: float
    value: float


@dataclass(frozen=True)
class MomentValue:
    """An extended real: either a finite value or a certified divergence."""

    finite: bool
    value: Optional[float]
    reason: str = ""


@dataclass(frozen=True)
class Dist:
    kind: str
    params: tuple
    symmetric: bool
    doc: str = ""


def rademacher() -> Dist:
    return Dist("rademacher", (), True, "P(X = +-1) = 1/2")


def uniform_sym(half_width: float) -> Dist:
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    return Dist("uniform_sym", (float(half_width),), True,
                f"uniform on [-{half_width:g}, {half_width:g}]")


def normal_std() -> Dist:
    return Dist("normal_std", (), True, "standard normal")


def pareto_sym(alpha: float, scale: float = 1.0) -> Dist:
    """Symmetric power tail: P(|X| >= t) = min(1, (scale/t)^alpha)."""
    if alpha <= 0 or scale <= 0:
        raise ValueError("alpha and scale must be positive")
    return Dist("pareto_sym", (float(alpha), float(scale)), True,
                f"symmetric Pareto, tail index {alpha:g}, scale {scale:g}")


def _merge_atoms(atoms) -> tuple:
    table: dict[float, float] = {}
    for v, p in atoms:
        v, p = float(v), float(p)
        if p <= 0:
            raise ValueError("atom weights must be positive")
        table[v] = table.get(v, 0.0) + p
    return tuple(sorted(table.items()))


def atomic_sym(atoms) -> Dist:
    """Atoms at +-v with P(|X| = v) = w; remaining mass sits at 0.

    ``atoms`` is an iterable of (value, weight) with value > 0; the weight is
    the total mass of the +-value pair.
    """
    merged = _merge_atoms(atoms)
    if any(v <= 0 for v, _ in merged):
        raise ValueError("atomic_sym values must be strictly positive")
    total = sum(p for _, p in merged)
    if total > 1.0 + _MASS_TOL:
        raise ValueError(f"atom mass {total} exceeds 1")
    return Dist("atomic_sym", (merged,), True, f"{len(merged)} symmetric atom pairs")


def atomic(atoms) -> Dist:
    """General finite atomic distribution; remaining mass sits at 0.

    ``atoms`` is an iterable of (value, probability) with value != 0.
    """
    merged = _merge_atoms(atoms)
    if any(v == 0 for v, _ in merged):
        raise ValueError("list only nonzero atoms; mass at 0 is implied")
    total = sum(p for _, p in merged)
    if total > 1.0 + _MASS_TOL:
        raise ValueError(f"atom mass {total} exceeds 1")
    table = dict(merged)
    sym = all(abs(table.get(-v, 0.0) - p) <= _MASS_TOL for v, p in merged)
    return Dist("atomic", (merged,), sym, f"{len(merged)} atoms")


def log_atomic_sym(log_atoms) -> Dist:
    """Atoms at +-exp(log_value) with log P(|X| = v) = log_weight.

    The total atom mass must not exceed 1 (checked by log-sum-exp within
    1e-12 in the log domain); the remainder is the implied atom at 0.
    """
    cleaned = tuple(sorted((float(lv), float(lw)) for lv, lw in log_atoms))
    if any(not math.isfinite(lv) or not math.isfinite(lw) for lv, lw in cleaned):
        raise ValueError("log-atoms must be finite in the log domain")
    total_log = _logsumexp(lw for _, lw in cleaned)
    if total_log > 0.0 + _MASS_TOL:
        raise ValueError(f"log-atom mass exp({total_log}) exceeds 1")
    return Dist("log_atomic_sym", (cleaned,), True, f"{len(cleaned)} log-domain atom pairs")


# ---------------------------------------------------------------------------
# Tails
# ---------------------------------------------------------------------------


def tail(d: Dist, lam: float) -> float:
    """Exact P(|X| >= lam); nonincreasing and right-continuous in lam."""
    if lam < 0 or math.isnan(lam):
        raise ValueError("threshold must be a nonnegative real")
    if lam == 0.0:
        return 1.0
    if d.kind == "rademacher":
        return 1.0 if lam <= 1.0 else 0.0
    if d.kind == "uniform_sym":
        (h,) = d.params
        return max(0.0, 1.0 - lam / h)
    if d.kind == "normal_std":
        return math.erfc(lam / _SQRT2)
    if d.kind == "pareto_sym":
        alpha, scale = d.params
        if lam <= scale:
            return 1.0
        return (scale / lam) ** alpha
    if d.kind == "atomic_sym":
        (atoms,) = d.params
        return sum(p for v, p in atoms if v >= lam)
    if d.kind == "atomic":
        (atoms,) = d.params
        return sum(p for v, p in atoms if abs(v) >= lam)
    if d.kind == "log_atomic_sym":
        (atoms,) = d.params
        lt = math.log(lam)
        s = _logsumexp(lw for lv, lw in atoms if lv >= lt)
        return math.exp(s) if s > -math.inf else 0.0
    raise ValueError(f"unknown distribution kind {d.kind!r}")


def log_tail(d: Dist, log_lam: float) -> float:
    """log P(|X| >= exp(log_lam)) for the log-atomic kind."""
    if d.kind != "log_atomic_sym":
        raise ValueError("log_tail only supports the log-atomic kind")
    (atoms,) = d.params
    return _logsumexp(lw for lv, lw in atoms if lv >= log_lam)


# ---------------------------------------------------------------------------
# Truncated moments
# ---------------------------------------------------------------------------


def truncated_moment(d: Dist, nu: float, b: float) -> TruncatedMoment:
    """E[|X|^nu 1{|X| < b}], strict inequality at the cutoff."""
    if nu < 0:
        raise ValueError("moment order must be >= 0")
    if b <= 0:
        raise ValueError("cutoff must be positive")
    if d.kind == "rademacher":
        value = 1.0 if b > 1.0 else 0.0
    elif d.kind == "uniform_sym":
        (h,) = d.params
        c = min(b, h)
        value = c ** (nu + 1.0) / (h * (nu + 1.0))
    elif d.kind == "normal_std":
        if nu == 2.0:
            value = (2.0 * _std_normal_cdf(b) - 1.0) - 2.0 * b * _std_normal_pdf(b)
        elif nu == 0.0:
            value = 2.0 * _std_normal_cdf(b) - 1.0
        else:
            value, _ = integrate.quad(lambda x: 2.0 * x ** nu * _std_normal_pdf(x),
                                      0.0, b, epsabs=1e-12, limit=200)
    elif d.kind == "pareto_sym":
        alpha, scale = d.params
        if b <= scale:
            value = 0.0
        elif nu == alpha:
            value = alpha * scale ** alpha * math.log(b / scale)
        else:
            value = alpha * scale ** alpha * (b ** (nu - alpha) - scale ** (nu - alpha)) / (nu - alpha)
    elif d.kind == "atomic_sym":
        (atoms,) = d.params
        value = sum(p * v ** nu for v, p in atoms if v < b)
    elif d.kind == "atomic":
        (atoms,) = d.params
        value = sum(p * abs(v) ** nu for v, p in atoms if abs(v) < b)
    elif d.kind == "log_atomic_sym":
        (atoms,) = d.params
        lb = math.log(b)
        s = _logsumexp(lw + nu * lv for lv, lw in atoms if lv < lb)
        value = math.exp(s) if s > -math.inf else 0.0
    else:
        raise ValueError(f"unknown distribution kind {d.kind!r}")
    return TruncatedMoment(order=nu, cutoff=b, value=value)


def truncated_second_moment(d: Dist, eps: float, norms: NormSeq, n: int) -> float:
    """E[X^2 1{|X| < eps * a(n)}], the variance proxy behind the exponential terms."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return truncated_moment(d, 2.0, eps * norms(n)).value


# ---------------------------------------------------------------------------
# Weighted second moments
# ---------------------------------------------------------------------------


def _moment_weight(form: str, delta: Optional[float]):
    if form == "inv_logplus":
        return lambda x: x * x / log_plus(x)
    if form == "loglog_delta":
        if delta is None or delta <= 0:
            raise ValueError("loglog_delta form needs delta > 0")
        return lambda x: x * x * log_plus(log_plus(x)) ** (1.0 + delta) / log_plus(x)
    raise ValueError(f"unknown weighted-moment form {form!r}")


def weighted_second_moment(d: Dist, form: str = "inv_logplus",
                           delta: Optional[float] = None) -> MomentValue:
    """E[X^2 / log_plus|X|] or E[X^2 (log_plus log_plus|X|)^(1+delta) / log_plus|X|].

    Returns a certified divergence flag for symmetric Pareto tails that are
    too heavy instead of a sentinel float.
    """
    wf = _moment_weight(form, delta)
    if d.kind == "rademacher":
        return MomentValue(True, wf(1.0))
    if d.kind == "atomic_sym":
        (atoms,) = d.params
        return MomentValue(True, sum(p * wf(v) for v, p in atoms))
    if d.kind == "atomic":
        (atoms,) = d.params
        return MomentValue(True, sum(p * wf(abs(v)) for v, p in atoms))
    if d.kind == "uniform_sym":
        (h,) = d.params
        val, _ = integrate.quad(wf, 0.0, h, epsabs=1e-10, limit=200)
        return MomentValue(True, val / h)
    if d.kind == "normal_std":
        val, _ = integrate.quad(lambda x: 2.0 * wf(x) * _std_normal_pdf(x),
                                0.0, np.inf, epsabs=1e-10, limit=200)
        return MomentValue(True, val)
    if d.kind == "pareto_sym":
        alpha, scale = d.params
        if form == "inv_logplus" and alpha <= 2.0:
            return MomentValue(False, None,
                               f"tail index {alpha:g} <= 2: x^(1-alpha)/log(2+x) is not integrable")
        if form == "loglog_delta" and alpha <= 2.0:
            return MomentValue(False, None,
                               f"tail index {alpha:g} <= 2: iterated-log weight cannot rescue the integral")
        val, _ = integrate.quad(lambda x: wf(x) * alpha * scale ** alpha * x ** (-alpha - 1.0),
                                scale, np.inf, epsabs=1e-10, limit=200)
        return MomentValue(True, val)
    if d.kind == "log_atomic_sym":
        (atoms,) = d.params
        terms = []
        for lv, lw in atoms:
            if lv > 50.0:
                log_lp = math.log(lv)  # log(2+v) = lv within 2e^-lv
            else:
                log_lp = math.log(log_plus(math.exp(lv)))
            t = lw + 2.0 * lv - log_lp
            if form == "loglog_delta":
                lp = lv if lv > 50.0 else log_plus(math.exp(lv))
                t += (1.0 + delta) * math.log(log_plus(lp))
            terms.append(t)
        s = _logsumexp(terms)
        return MomentValue(True, math.exp(s) if s > -math.inf else 0.0)
    raise ValueError(f"unknown distribution kind {d.kind!r}")


# ---------------------------------------------------------------------------
# Structural bounds used by certificate construction
# ---------------------------------------------------------------------------


def support_bound(d: Dist) -> Optional[float]:
    """Least B with P(|X| <= B) = 1, when finite and known."""
    if d.kind == "rademacher":
        return 1.0
    if d.kind == "uniform_sym":
        return d.params[0]
    if d.kind == "atomic_sym":
        (atoms,) = d.params
        return max((v for v, _ in atoms), default=0.0)
    if d.kind == "atomic":
        (atoms,) = d.params
        return max((abs(v) for v, _ in atoms), default=0.0)
    return None


def second_moment_bound(d: Dist) -> Optional[float]:
    """Upper bound on E[X^2], when finite and known in closed form."""
    if d.kind == "rademacher":
        return 1.0
    if d.kind == "normal_std":
        return 1.0
    if d.kind == "uniform_sym":
        return d.params[0] ** 2 / 3.0
    if d.kind == "atomic_sym":
        (atoms,) = d.params
        return sum(p * v * v for v, p in atoms)
    if d.kind == "atomic":
        (atoms,) = d.params
        return sum(p * v * v for v, p in atoms)
    if d.kind == "pareto_sym":
        alpha, scale = d.params
        if alpha > 2.0:
            return alpha * scale ** 2 / (alpha - 2.0)
        return None
    return None


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample(d: Dist, rng: np.random.Generator, count: int) -> np.ndarray:
    """count i.i.d. draws; deterministic given the generator's stream."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return np.empty(0, dtype=np.float64)
    if d.kind == "rademacher":
        return (2.0 * rng.integers(0, 2, size=count, dtype=np.int8) - 1.0).astype(np.float64)
    if d.kind == "uniform_sym":
        (h,) = d.params
        return rng.uniform(-h, h, size=count)
    if d.kind == "normal_std":
        return rng.standard_normal(count)
    if d.kind == "pareto_sym":
        alpha, scale = d.params
        mag = scale * rng.random(count) ** (-1.0 / alpha)
        sign = 2.0 * rng.integers(0, 2, size=count, dtype=np.int8) - 1.0
        return mag * sign
    if d.kind in ("atomic_sym", "atomic"):
        (atoms,) = d.params
        if d.kind == "atomic_sym":
            values, probs = [], []
            for v, p in atoms:
                values.extend([-v, v])
                probs.extend([0.5 * p, 0.5 * p])
        else:
            values = [v for v, _ in atoms]
            probs = [p for _, p in atoms]
        rest = 1.0 - sum(probs)
        values.append(0.0)
        probs.append(max(rest, 0.0))
        cum = np.cumsum(np.asarray(probs))
        cum[-1] = max(cum[-1], 1.0)
        idx = np.searchsorted(cum, rng.random(count), side="right")
        return np.asarray(values, dtype=np.float64)[idx]
    if d.kind == "log_atomic_sym":
        raise SamplingUnavailable(
            "log_atomic_sym: atom probabilities are below the representable floating range")
    raise ValueError(f"unknown distribution kind {d.kind!r}")
