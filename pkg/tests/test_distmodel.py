"""Distribution models against quadrature and closed-form oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from cclab import distmodel as dm
from cclab import seeding
from cclab.cli import spataru_norms
from cclab.seqkit import power_law_norms

ALL_CLOSED = [
    dm.rademacher(),
    dm.uniform_sym(1.0),
    dm.normal_std(),
    dm.pareto_sym(1.5, 1.0),
    dm.atomic_sym([(1.0, 0.5), (3.0, 0.25)]),
]


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------


def test_rademacher_tail_examples():
    d = dm.rademacher()
    assert dm.tail(d, 1.0) == 1.0
    assert dm.tail(d, 1.1) == 0.0


def test_uniform_tail_length_measure():
    assert dm.tail(dm.uniform_sym(1.0), 0.5) == 0.5


def test_tail_at_zero_is_one():
    for d in ALL_CLOSED:
        assert dm.tail(d, 0.0) == 1.0


def test_tail_counts_atom_at_threshold():
    d = dm.atomic_sym([(2.0, 0.5)])
    assert dm.tail(d, 2.0) == 0.5
    assert dm.tail(d, 2.0000001) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.0, max_value=6.0), st.floats(min_value=0.0, max_value=6.0))
def test_tail_nonincreasing(a, b):
    lo, hi = min(a, b), max(a, b)
    for d in ALL_CLOSED:
        assert dm.tail(d, lo) >= dm.tail(d, hi)


def test_pareto_tail_scale_consistency():
    # tail of a scaled model equals the tail of the base model at a scaled point
    a, s, lam = 1.7, 2.5, 4.0
    assert dm.tail(dm.pareto_sym(a, s), lam) == pytest.approx(
        dm.tail(dm.pareto_sym(a, 1.0), lam / s), rel=1e-14)


# ---------------------------------------------------------------------------
# truncated moments
# ---------------------------------------------------------------------------


def test_rademacher_truncated_examples():
    d = dm.rademacher()
    assert dm.truncated_moment(d, 2.0, 2.0).value == 1.0
    assert dm.truncated_moment(d, 2.0, 0.5).value == 0.0


def test_uniform_truncated_second_moment():
    got = dm.truncated_moment(dm.uniform_sym(1.0), 2.0, 0.5).value
    assert got == pytest.approx(1.0 / 24.0, rel=1e-14)


@pytest.mark.parametrize("d,nu,b", [
    (dm.uniform_sym(1.0), 2.0, 0.5),
    (dm.uniform_sym(2.0), 3.0, 1.7),
    (dm.normal_std(), 2.0, 1.3),
    (dm.normal_std(), 3.0, 2.9),
    (dm.pareto_sym(1.5, 1.0), 1.0, 7.0),
    (dm.pareto_sym(2.5, 1.0), 3.0, 40.0),
    (dm.pareto_sym(2.0, 1.0), 2.0, 9.0),
])
def test_truncated_moment_vs_quadrature(d, nu, b):
    # independent oracle: integrate |x|^nu against the density of |X|
    if d.kind == "uniform_sym":
        (h,) = d.params
        oracle, _ = integrate.quad(lambda x: x ** nu / h, 0.0, min(b, h))
    elif d.kind == "normal_std":
        oracle, _ = integrate.quad(
            lambda x: 2.0 * x ** nu * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
            0.0, b)
    else:
        alpha, s = d.params
        oracle, _ = integrate.quad(
            lambda x: x ** nu * alpha * s ** alpha * x ** (-alpha - 1.0), s, b)
    assert dm.truncated_moment(d, nu, b).value == pytest.approx(oracle, abs=1e-10)


def test_truncated_plus_complement_equals_full_moment():
    # closed-form full moments: E|X|^2
    cases = [
        (dm.rademacher(), 2.0, 1.0),
        (dm.uniform_sym(1.0), 2.0, 1.0 / 3.0),
        (dm.normal_std(), 2.0, 1.0),
        (dm.pareto_sym(3.0, 1.0), 2.0, 3.0),       # alpha s^2/(alpha-2)
        (dm.atomic_sym([(1.0, 0.5), (3.0, 0.25)]), 2.0, 0.5 + 9 * 0.25),
    ]
    for d, nu, full in cases:
        for b in (0.5, 1.0, 2.4, 10.0):
            trunc = dm.truncated_moment(d, nu, b).value
            if d.kind == "rademacher":
                comp = (1.0 if b <= 1.0 else 0.0) * 1.0
            elif d.kind == "uniform_sym":
                comp, _ = integrate.quad(lambda x: x ** 2, min(b, 1.0), 1.0)
            elif d.kind == "normal_std":
                comp, _ = integrate.quad(
                    lambda x: 2 * x ** 2 * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
                    b, np.inf)
            elif d.kind == "pareto_sym":
                alpha, s = d.params
                comp, _ = integrate.quad(
                    lambda x: x ** 2 * alpha * s ** alpha * x ** (-alpha - 1), max(b, s), np.inf)
            else:
                (atoms,) = d.params
                comp = sum(p * v ** 2 for v, p in atoms if v >= b)
            assert trunc + comp == pytest.approx(full, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.05, max_value=8.0), st.floats(min_value=0.0, max_value=4.0))
def test_truncated_moment_monotone_in_cutoff(b, extra):
    for d in ALL_CLOSED:
        lo = dm.truncated_moment(d, 2.0, b).value
        hi = dm.truncated_moment(d, 2.0, b + extra).value
        assert hi >= lo - 1e-15


def test_truncated_second_moment_cutoff_examples():
    a = spataru_norms()
    assert dm.truncated_second_moment(dm.rademacher(), 1.0, a, 2) == 1.0
    lin = power_law_norms(1.0)
    assert dm.truncated_second_moment(dm.rademacher(), 0.5, lin, 1) == 0.0


def test_truncated_second_moment_normal_monotone_to_variance():
    a = power_law_norms(1.0)
    vals = [dm.truncated_second_moment(dm.normal_std(), 1.0, a, n) for n in (1, 2, 4, 16, 64)]
    assert all(x <= y + 1e-15 for x, y in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.0, abs=1e-10)


def test_t_monotone_in_eps():
    a = spataru_norms()
    for d in ALL_CLOSED:
        for n in (2, 5, 17):
            small = dm.truncated_second_moment(d, 0.5, a, n)
            large = dm.truncated_second_moment(d, 1.5, a, n)
            assert large >= small - 1e-15


# ---------------------------------------------------------------------------
# log_plus and weighted second moments
# ---------------------------------------------------------------------------


def test_log_plus_values():
    assert dm.log_plus(0.0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert dm.log_plus(math.e - 2.0) == pytest.approx(1.0, rel=1e-14)
    assert dm.log_plus(98.0) == pytest.approx(math.log(100.0), rel=1e-15)
    with pytest.raises(ValueError):
        dm.log_plus(-0.5)


def test_weighted_second_moment_rademacher():
    got = dm.weighted_second_moment(dm.rademacher())
    assert got.finite
    assert got.value == pytest.approx(1.0 / math.log(3.0), rel=1e-14)


def test_weighted_second_moment_empty_atoms():
    got = dm.weighted_second_moment(dm.atomic_sym([]))
    assert got.finite and got.value == 0.0


def test_weighted_second_moment_pareto_diverges():
    got = dm.weighted_second_moment(dm.pareto_sym(1.5, 1.0))
    assert not got.finite and got.value is None
    assert "2" in got.reason
    got2 = dm.weighted_second_moment(dm.pareto_sym(2.0, 1.0), "loglog_delta", delta=1.0)
    assert not got2.finite


def test_weighted_second_moment_quadrature_kinds():
    # uniform oracle: E[X^2/log(2+|X|)] = (1/h) \int_0^h x^2/log(2+x) dx
    h = 1.0
    oracle, _ = integrate.quad(lambda x: x * x / math.log(2 + x), 0, h)
    got = dm.weighted_second_moment(dm.uniform_sym(h))
    assert got.value == pytest.approx(oracle / h, abs=1e-9)


def test_weighted_second_moment_log_atomic_matches_plain():
    atoms = [(1.0, 0.5), (3.0, 0.25)]
    plain = dm.weighted_second_moment(dm.atomic_sym(atoms)).value
    logd = dm.log_atomic_sym([(math.log(v), math.log(w)) for v, w in atoms])
    got = dm.weighted_second_moment(logd).value
    assert got == pytest.approx(plain, rel=1e-12)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def test_atomic_sym_rejects_nonpositive_values():
    with pytest.raises(ValueError):
        dm.atomic_sym([(-1.0, 0.5)])
    with pytest.raises(ValueError):
        dm.atomic_sym([(1.0, 0.0)])


def test_mass_overflow_rejected():
    with pytest.raises(ValueError):
        dm.atomic_sym([(1.0, 0.7), (2.0, 0.5)])
    with pytest.raises(ValueError):
        dm.log_atomic_sym([(0.0, math.log(0.7)), (1.0, math.log(0.5))])


def test_atomic_symmetry_detection():
    sym = dm.atomic([(1.0, 0.25), (-1.0, 0.25)])
    assert sym.symmetric
    skew = dm.atomic([(1.0, 0.5), (-1.0, 0.3)])
    assert not skew.symmetric


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def test_sample_empty():
    rng = seeding.stream(0, 1)
    for d in ALL_CLOSED:
        assert dm.sample(d, rng, 0).size == 0


def test_sample_log_atomic_unavailable():
    d = dm.log_atomic_sym([(5.0, -50.0)])
    with pytest.raises(dm.SamplingUnavailable):
        dm.sample(d, seeding.stream(0), 10)


def test_sample_deterministic_per_stream():
    d = dm.normal_std()
    a = dm.sample(d, seeding.stream(42, 1, 2), 1000)
    b = dm.sample(d, seeding.stream(42, 1, 2), 1000)
    c = dm.sample(d, seeding.stream(42, 1, 3), 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rademacher_clt_mean_bound():
    x = dm.sample(dm.rademacher(), seeding.stream(7, 0), 10 ** 6)
    assert abs(x.mean()) <= 4e-3


def test_uniform_second_moment_bound():
    x = dm.sample(dm.uniform_sym(1.0), seeding.stream(8, 0), 10 ** 6)
    assert abs((x * x).mean() - 1.0 / 3.0) <= 5e-3


def _ks_discrete(samples, points, cdf_vals):
    # two-sided KS for a discrete law: compare the empirical cdf at each atom
    # and just below it
    n = samples.size
    samples = np.sort(samples)
    stat = 0.0
    for v, f in zip(points, cdf_vals):
        emp_at = np.searchsorted(samples, v, side="right") / n
        emp_below = np.searchsorted(samples, v, side="left") / n
        prev = f[0]
        stat = max(stat, abs(emp_at - f[1]), abs(emp_below - prev))
    return stat


KS_CRIT_1E3 = 1.9495 / math.sqrt(10 ** 6)  # two-sided critical value at alpha = 1e-3


def test_sampler_ks_continuous_kinds():
    x = dm.sample(dm.uniform_sym(1.0), seeding.stream(11, 0), 10 ** 6)
    stat = stats.kstest(x, lambda t: np.clip((t + 1.0) / 2.0, 0, 1)).statistic
    assert stat < KS_CRIT_1E3

    x = dm.sample(dm.normal_std(), seeding.stream(12, 0), 10 ** 6)
    assert stats.kstest(x, "norm").statistic < KS_CRIT_1E3

    alpha, s = 1.5, 1.0
    x = dm.sample(dm.pareto_sym(alpha, s), seeding.stream(13, 0), 10 ** 6)

    def cdf(t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= s, 1.0 - 0.5 * (s / np.maximum(t, s)) ** alpha, 0.5)
        out = np.where(t <= -s, 0.5 * (s / np.maximum(-t, s)) ** alpha, out)
        return out

    assert stats.kstest(x, cdf).statistic < KS_CRIT_1E3


def test_sampler_ks_discrete_kinds():
    x = dm.sample(dm.rademacher(), seeding.stream(14, 0), 10 ** 6)
    stat = _ks_discrete(x, [-1.0, 1.0], [(0.0, 0.5), (0.5, 1.0)])
    assert stat < KS_CRIT_1E3

    d = dm.atomic_sym([(1.0, 0.5), (3.0, 0.25)])
    x = dm.sample(d, seeding.stream(15, 0), 10 ** 6)
    pts = [-3.0, -1.0, 0.0, 1.0, 3.0]
    cdf = [(0.0, 0.125), (0.125, 0.375), (0.375, 0.625), (0.625, 0.875), (0.875, 1.0)]
    assert _ks_discrete(x, pts, cdf) < KS_CRIT_1E3


def test_support_and_variance_bounds():
    assert dm.support_bound(dm.rademacher()) == 1.0
    assert dm.support_bound(dm.normal_std()) is None
    assert dm.second_moment_bound(dm.uniform_sym(3.0)) == pytest.approx(3.0)
    assert dm.second_moment_bound(dm.pareto_sym(3.0, 1.0)) == pytest.approx(3.0)
    assert dm.second_moment_bound(dm.pareto_sym(1.5, 1.0)) is None
