"""Sequence regularity checks against independently computed values."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cclab import seqkit as sk
from cclab.seqkit import SlowlyVarying, Verdict


def spataru_norms():
    from cclab.cli import spataru_norms as f
    return f()


# ---------------------------------------------------------------------------
# partial_weight_sum
# ---------------------------------------------------------------------------


def test_partial_sum_constant_weights():
    w = sk.power_law_weights(0.0)
    assert sk.partial_weight_sum(w, 4) == 10.0


def test_partial_sum_harmonic_weights():
    w = sk.power_law_weights(-1.0)
    assert sk.partial_weight_sum(w, 5) == 5.0


def test_partial_sum_inverse_square():
    w = sk.power_law_weights(-2.0)
    # oracle: exact rational arithmetic
    exact = float(sum(Fraction(1, j) for j in range(1, 4)))
    assert sk.partial_weight_sum(w, 3) == pytest.approx(exact, rel=1e-15)


def test_partial_sum_rejects_bad_index():
    with pytest.raises(ValueError):
        sk.partial_weight_sum(sk.power_law_weights(0.0), 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=200), st.integers(min_value=1, max_value=200))
def test_partial_sum_additive_over_splits(j, extra):
    k = j + extra
    w = sk.custom_weights(lambda n: 1.0 / math.sqrt(n) + 0.25 / n, name="mix")
    whole = sk.partial_weight_sum(w, k)
    split = sk.partial_weight_sum(w, j) + sk.kahan_sum(
        i * w(i) for i in range(j + 1, k + 1))
    assert whole == pytest.approx(split, rel=1e-14)


# ---------------------------------------------------------------------------
# dyadic regularity criteria
# ---------------------------------------------------------------------------


def test_dyadic_constant_weights_certified():
    rep = sk.check_dyadic_regularity(sk.power_law_weights(0.0))
    assert rep.verdict is Verdict.CERTIFIED_PASS


def test_dyadic_harmonic_weights_constant_two():
    rep = sk.check_dyadic_regularity(sk.power_law_weights(-1.0))
    assert rep.verdict is Verdict.CERTIFIED_PASS
    # ratios w(2^{j-1})/w(k) and w(k)/w(2^j) both peak at 2 inside a block
    assert rep.constants["dyadic_C"] == pytest.approx(2.0, rel=1e-12)


def test_dyadic_inverse_square_inconclusive():
    rep = sk.check_dyadic_regularity(sk.power_law_weights(-2.0))
    assert rep.verdict is Verdict.INCONCLUSIVE


def test_dyadic_empirical_route():
    w = sk.custom_weights(lambda n: 1.0 / n, name="custom-harmonic")
    rep = sk.check_dyadic_regularity(w, horizon=512)
    assert rep.verdict is Verdict.EMPIRICAL_PASS
    assert rep.constants["dyadic_C"] == pytest.approx(2.0, rel=1e-9)


def test_dyadic_rejects_small_horizon():
    with pytest.raises(ValueError):
        sk.check_dyadic_regularity(sk.power_law_weights(0.0), horizon=3)


# ---------------------------------------------------------------------------
# tail domination
# ---------------------------------------------------------------------------


def test_tail_domination_spataru_theta_one():
    rep = sk.check_tail_domination(sk.power_law_weights(-1.0), spataru_norms(),
                                   theta=1.0, moment_power=3.0, horizon=3000)
    assert rep.verdict is Verdict.CERTIFIED_PASS
    assert math.isfinite(rep.constants["C"])


def test_tail_domination_square_case():
    rep = sk.check_tail_domination(sk.power_law_weights(0.0), sk.power_law_norms(1.0),
                                   theta=2.0, moment_power=2.0, horizon=3000)
    assert rep.verdict is Verdict.CERTIFIED_PASS
    # sum_{k>=n} k^2/k^4 ~ 1/n against T_{n-1} ~ n^2/2 scaled by n^4/n: C stays small
    assert rep.constants["C"] < 20.0


def test_tail_domination_divergent_tail():
    rep = sk.check_tail_domination(sk.power_law_weights(0.0), sk.power_law_norms(0.25),
                                   theta=1.0, moment_power=3.0, horizon=500)
    assert rep.verdict is Verdict.CERTIFIED_FAIL


def test_tail_domination_rejects_theta_below_one():
    with pytest.raises(ValueError):
        sk.check_tail_domination(sk.power_law_weights(0.0), sk.power_law_norms(1.0),
                                 theta=0.5)


def test_tail_domination_custom_without_bound_inconclusive():
    w = sk.custom_weights(lambda n: 1.0 / n)
    rep = sk.check_tail_domination(w, sk.power_law_norms(1.0), horizon=200)
    assert rep.verdict is Verdict.INCONCLUSIVE
    assert rep.constants["C"] > 0.0  # the horizon-limited constant is still reported


def test_tail_domination_custom_with_bound_certified():
    # tau = 1/k with a certified geometric-free bound: sum_{k>=N} k^t/(a_k^p k)
    # for a=n, theta=1, p=3: terms k^-3, tail <= N^-3 + N^-2/2
    def bound(start, g):
        return start ** -3.0 + start ** -2.0 / 2.0

    w = sk.custom_weights(lambda n: 1.0 / n, tail_bound=bound)
    rep = sk.check_tail_domination(w, sk.power_law_norms(1.0), theta=1.0,
                                   moment_power=3.0, horizon=200)
    assert rep.verdict is Verdict.CERTIFIED_PASS


def test_tail_domination_remainder_is_true_upper_bound():
    # certified remainder must dominate a brute-force continuation of the sum
    w = sk.power_law_weights(-1.0)
    a = sk.power_law_norms(1.0)
    shape = sk._combined_tail_shape(w, a, 1.0, 3.0)
    assessment = sk.certified_power_tail(*shape, start=101)
    brute = sum(k ** 1.0 * (1.0 / k) / k ** 3.0 for k in range(101, 400_000))
    assert assessment.kind == "finite"
    assert assessment.bound >= brute


def test_weaker_power_implies_stronger_power():
    # passing with the square power forces passing with the cube power
    cases = [
        (sk.power_law_weights(0.0), sk.power_law_norms(1.0), 2.0),
        (sk.power_law_weights(-1.0), sk.power_law_norms(1.0), 1.0),
        (sk.power_law_weights(1.0), sk.power_law_norms(0.75), 4.0),
    ]
    for w, a, theta in cases:
        two = sk.check_tail_domination(w, a, theta=theta, moment_power=2.0, horizon=500)
        three = sk.check_tail_domination(w, a, theta=theta, moment_power=3.0, horizon=500)
        if two.verdict is Verdict.CERTIFIED_PASS:
            assert three.verdict is Verdict.CERTIFIED_PASS
            assert three.constants["C"] <= two.constants["C"] * (1 + 1e-9)


def test_power_law_corpus_passes_for_some_theta():
    # normalizer exponent above 1/3 with liminf n w(n) > 0: some theta <= 16 certifies
    corpus = [
        (sk.power_law_weights(-1.0), sk.power_law_norms(0.5)),
        (sk.power_law_weights(0.0), sk.power_law_norms(0.4)),
        (sk.power_law_weights(1.0), sk.power_law_norms(0.5)),
        (sk.power_law_weights(-1.0, sv=SlowlyVarying(log2p=1.0)),
         sk.power_law_norms(0.5, sv=SlowlyVarying(log2p=0.5))),
    ]
    for w, a in corpus:
        passed = False
        for theta in range(1, 17):
            rep = sk.check_tail_domination(w, a, theta=float(theta),
                                           moment_power=3.0, horizon=10_000)
            if rep.verdict is Verdict.CERTIFIED_PASS:
                passed = True
                break
        assert passed, (w.name, a.name)


# ---------------------------------------------------------------------------
# infimum growth
# ---------------------------------------------------------------------------


def test_inf_growth_harmonic_sqrt_certified():
    rep = sk.check_inf_growth(sk.power_law_weights(-1.0), sk.power_law_norms(0.5),
                              power=3.0, horizon=2000)
    assert rep.verdict is Verdict.CERTIFIED_PASS
    # infimum sits at k=n, so the floor is T_{n-1}/n = (n-1)/n
    assert rep.constants["liminf_estimate"] == pytest.approx(1.0, rel=1e-2)


def test_inf_growth_linear_square_certified():
    rep = sk.check_inf_growth(sk.power_law_weights(0.0), sk.power_law_norms(1.0),
                              power=2.0, horizon=1000)
    assert rep.verdict is Verdict.CERTIFIED_PASS


def test_inf_growth_collapsing_floor():
    rep = sk.check_inf_growth(sk.power_law_weights(-2.0), sk.power_law_norms(0.5),
                              power=3.0, horizon=1000)
    assert rep.verdict is Verdict.CERTIFIED_FAIL
    assert rep.constants["liminf_estimate"] < 0.05


def test_inf_growth_empirical_for_custom():
    w = sk.custom_weights(lambda n: 1.0)
    rep = sk.check_inf_growth(w, sk.power_law_norms(1.0), power=2.0, horizon=200)
    assert rep.verdict is Verdict.EMPIRICAL_PASS


# ---------------------------------------------------------------------------
# sequence types
# ---------------------------------------------------------------------------


def test_weight_rejects_negative_values():
    w = sk.custom_weights(lambda n: -1.0)
    with pytest.raises(ValueError):
        w(3)


def test_norm_rejects_zero():
    a = sk.custom_norms(lambda n: 0.0)
    with pytest.raises(ValueError):
        a(1)


def test_norm_increasing_check():
    a = sk.custom_norms(lambda n: 10.0 - n)
    with pytest.raises(ValueError):
        a.check_increasing(5)


def test_norm_infinity_certificate():
    assert sk.power_law_norms(0.5).tends_to_infinity() is True
    assert sk.custom_norms(lambda n: float(n)).tends_to_infinity() is None


def test_report_json_round_trip():
    rep = sk.check_dyadic_regularity(sk.power_law_weights(-1.0))
    again = sk.RegularityReport.from_json_dict(rep.to_json_dict())
    assert again == rep


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=-1.5, max_value=1.5),
       st.integers(min_value=4, max_value=400))
def test_sv_growth_envelope_property(g1, g2, start):
    sv = SlowlyVarying(log2p=g1, loglog=g2)
    delta = sv.growth_exponent_bound(start)
    base = sv.value(start)
    for k in (start, start + 3, 2 * start, 17 * start):
        assert sv.value(k) <= base * (k / start) ** delta * (1 + 1e-12)
