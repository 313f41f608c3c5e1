import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussprod.bounds import (
    KINDS,
    InequalityCase,
    evaluate,
    sharp_constant,
    stated_two_negative_lower,
    variance_floor_diagnostics,
)
from gaussprod.errors import DomainError
from gaussprod.moments import abs_moment_1d, mixed_moment, tilted_var_last
from gaussprod.verifier import identity_cases, random_correlation


def corr3(a, b, c):
    return np.array([[1.0, a, b], [a, 1.0, c], [b, c, 1.0]])


def slacks_ok(res, tol=1e-9):
    ok = True
    if res.lower is not None:
        ok &= res.slack_lower >= -(res.err + tol)
    if res.upper is not None:
        ok &= res.slack_upper >= -(res.err + tol)
    return ok


@pytest.mark.parametrize("case", identity_cases(), ids=lambda c: c.kind)
def test_independence_attains_every_bound(case):
    res = evaluate(case)
    marg = np.prod([abs_moment_1d(a) for a in case.alphas])
    assert res.lhs.value == pytest.approx(marg, rel=1e-9)
    if case.kind == "prop1_4":
        # the upper constant exceeds one, so only the lower side is tight
        assert res.lower == pytest.approx(marg, rel=1e-9)
        assert res.upper > marg
    else:
        for side in (res.lower, res.upper):
            if side is not None:
                assert side == pytest.approx(marg, rel=1e-9)


def test_negative_with_squares_example():
    S = np.array([[1.0, 0.6], [0.6, 1.0]])
    res = evaluate(InequalityCase("thm1_1", S, (-0.5, 2.0)))
    assert res.lower == pytest.approx(0.64 * 1.7200799746490391, rel=1e-14)
    assert res.slack_lower > 0 and res.upper is None


def test_negative_with_squares_random():
    rng = np.random.default_rng(42)
    S = random_correlation(3, "gram_normalized", rng)
    res = evaluate(InequalityCase("thm1_1", S, (-0.7, 2.0, 2.0)))
    assert res.method == "quadrature" and slacks_ok(res)


def test_opposite_product_reduces_to_bivariate_case():
    S = np.array([[1.0, -0.45], [-0.45, 1.0]])
    a = evaluate(InequalityCase("thm1_2", S, (-0.3, 1.7)))
    b = evaluate(InequalityCase("opposite_n2", S, (-0.3, 1.7)))
    assert a.upper == pytest.approx(b.upper, rel=1e-12)
    assert a.lhs.value == pytest.approx(b.lhs.value, rel=1e-8)
    assert slacks_ok(a)


def test_opposite_product_mc_for_four_coordinates():
    S = random_correlation(4, "gram_normalized", 5)
    res = evaluate(InequalityCase("thm1_2", S, (-0.3, -0.2, -0.4, 1.5), method="mc", n_samples=50_000, seed=3))
    assert res.method == "monte_carlo"
    assert res.err > 0 and slacks_ok(res)


def test_cholesky_diagonal_hand_case():
    rho = 0.6
    S = np.array([[1.0, rho], [rho, 1.0]])
    res = evaluate(InequalityCase("remark_eq2", S, (-0.5, 1.0)))
    # M = [[1, 0], [rho, sqrt(1 - rho^2)]]: the leading diagonal entry is 1
    assert res.extras["cholesky_diag"] == pytest.approx([1.0, 0.8])
    assert res.upper == pytest.approx(abs_moment_1d(-0.5) * abs_moment_1d(1.0), rel=1e-14)
    S3 = random_correlation(3, "gram_normalized", 9)
    res = evaluate(InequalityCase("remark_eq2", S3, (-0.4, -0.6, 1.0)))
    m = np.linalg.cholesky(S3).diagonal()
    expected = m[1] ** -0.6 * np.prod([abs_moment_1d(a) for a in (-0.4, -0.6, 1.0)])
    assert res.upper == pytest.approx(expected, rel=1e-12)
    assert slacks_ok(res)


def test_negative_with_even_powers():
    S = np.full((4, 4), 0.3)
    np.fill_diagonal(S, 1.0)
    res = evaluate(InequalityCase("prop1_3", S, (-0.5, 2.0, 2.0, 2.0)))
    assert res.lower == pytest.approx(0.91 ** 3 * abs_moment_1d(-0.5), rel=1e-13)
    assert slacks_ok(res)
    res = evaluate(InequalityCase("prop1_3", random_correlation(4, "gram_normalized", 3), (-0.2, 4.0, 2.0, 6.0)))
    assert slacks_ok(res)


def test_sharp_constant_values():
    assert sharp_constant(2, 2) == pytest.approx(3.0, rel=1e-13)
    assert sharp_constant(1, 1) == pytest.approx(math.pi / 2, rel=1e-13)
    assert sharp_constant(0, 3.3) == 1.0


@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0))
@settings(max_examples=200, deadline=None)
def test_sharp_constant_at_least_one(a2, a3):
    C = sharp_constant(a2, a3)
    assert C >= 1.0 - 1e-15
    if a2 * a3 == 0:
        assert C == pytest.approx(1.0, abs=1e-14)
    elif a2 * a3 > 1e-8:
        # below that the excess is under one ulp
        assert C > 1.0


def test_sharp_constant_is_the_perfect_correlation_moment():
    # the upper factor is attained by X_2 = X_3
    for a2, a3 in [(1.0, 1.0), (0.5, 2.3), (3.0, 1.2)]:
        assert sharp_constant(a2, a3) * abs_moment_1d(a2) * abs_moment_1d(a3) == pytest.approx(
            abs_moment_1d(a2 + a3), rel=1e-12)


def test_one_negative_two_positive_sandwich():
    S = corr3(0.3, 0.5, 0.2)
    res = evaluate(InequalityCase("prop1_4", S, (-0.5, 1.0, 1.0)))
    assert res.extras["constant"] == pytest.approx(math.pi / 2)
    assert res.lower < res.lhs.value < res.upper


def test_two_negative_bounds_and_stated_factor():
    S = corr3(0.2, 0.4, -0.3)
    res = evaluate(InequalityCase("prop1_5", S, (-0.5, -0.3, 1.5)))
    assert slacks_ok(res)
    floor = np.linalg.det(S) / (1 - 0.04)
    assert res.lower == pytest.approx(floor ** 0.75 * np.prod([abs_moment_1d(a) for a in (-0.5, -0.3, 1.5)]))
    # for alpha_3 <= 2 the unpowered factor is weaker still
    assert res.extras["lower_stated"] <= res.lower
    assert res.lhs.value >= res.extras["lower_stated"]


def test_stated_two_negative_factor_fails_for_large_power():
    case = InequalityCase("prop1_5", corr3(0.0, 0.6, 0.6), (-0.9, -0.9, 8.0))
    res = evaluate(case)
    stated = stated_two_negative_lower(case)
    assert stated == pytest.approx(1901.1, rel=1e-4)
    assert res.lhs.value == pytest.approx(226.5, rel=1e-3)
    assert res.lhs.value < stated
    # the powered factor holds
    assert res.lower == pytest.approx(41.7, rel=1e-3)
    assert slacks_ok(res)


def test_stated_two_negative_factor_holds_for_power_at_most_two():
    rng = np.random.default_rng(17)
    for _ in range(15):
        S = random_correlation(3, "gram_normalized", rng)
        a = (-float(rng.uniform(0.05, 0.9)), -float(rng.uniform(0.05, 0.9)), float(rng.uniform(0.1, 2.0)))
        case = InequalityCase("prop1_5", S, a)
        res = evaluate(case)
        assert res.lhs.value >= stated_two_negative_lower(case) - res.err - 1e-9


def test_variance_floor_diagnostics_examples():
    d = variance_floor_diagnostics(np.eye(3))
    assert d.K == 0 and d.I1 == 0 and d.I2 == 0 and d.var_floor == 1.0 and d.g_limit == 0.0
    a, b = 0.4, 0.5
    d = variance_floor_diagnostics(corr3(a, b, a * b))
    assert abs(d.I2) < 1e-15 and d.discriminant <= 1e-12
    with pytest.raises(DomainError):
        variance_floor_diagnostics(np.eye(2))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_variance_floor_identities(seed):
    S = random_correlation(3, "gram_normalized", seed)
    d = variance_floor_diagnostics(S)
    assert d.discriminant <= 1e-10
    assert d.I2_identity <= 1e-12 and d.cross_identity <= 1e-12
    assert d.I2 >= -1e-12 and d.cross >= -1e-12
    assert 0 < d.var_floor <= 1.0


@pytest.mark.parametrize("seed", range(10))
def test_variance_floor_below_tilted_variance(seed):
    S = random_correlation(3, "gram_normalized", seed)
    floor = variance_floor_diagnostics(S).var_floor
    for t1 in np.geomspace(1e-3, 1e3, 9):
        for t2 in np.geomspace(1e-3, 1e3, 9):
            assert tilted_var_last(S, [t1, t2]) >= floor - 1e-10


def test_negative_split_bound():
    S = np.array([[1.0, 0.5], [0.5, 1.0]])
    res = evaluate(InequalityCase("wei_a3", S, (-0.4, -0.7)))
    assert res.lower == pytest.approx(abs_moment_1d(-0.4) * abs_moment_1d(-0.7), rel=1e-14)
    assert res.lhs.value == pytest.approx(mixed_moment(S, (-0.4, -0.7), "nabeya").value, rel=1e-7)
    S3 = random_correlation(3, "gram_normalized", 77)
    for k in (1, 2):
        assert slacks_ok(evaluate(InequalityCase("wei_a3", S3, (-0.3, -0.5, -0.2), split=k)))


def test_bivariate_kinds():
    S = np.array([[1.0, 1.0], [1.0, 1.0]]) * 0.999 + np.eye(2) * 0.001
    assert slacks_ok(evaluate(InequalityCase("opposite_n2", S, (-0.3, 2.0))))
    res = evaluate(InequalityCase("gpi_n2", np.array([[1.0, -0.7], [-0.7, 1.0]]), (2.0, 2.0)))
    assert res.lhs.value == pytest.approx(1 + 2 * 0.49, rel=1e-13)
    assert res.slack_lower == pytest.approx(0.98, rel=1e-12)


def test_even_kinds():
    S = random_correlation(3, "gram_normalized", 13)
    res = evaluate(InequalityCase("even_gpi_1_6", S, (2.0, 2.0, 2.0)))
    a, b, c = S[0, 1], S[0, 2], S[1, 2]
    assert res.lhs.value == pytest.approx(1 + 2 * (a * a + b * b + c * c) + 8 * a * b * c, rel=1e-13)
    Sp = random_correlation(4, "nonneg_entries", 13)
    res = evaluate(InequalityCase("even_gpi_subset_1_7", Sp, (2.0, 4.0, 2.0, 2.0), split=2))
    assert res.method == "isserlis" and slacks_ok(res)


@pytest.mark.parametrize("kind, alphas", [
    ("thm1_1", (0.5, 2, 2)), ("thm1_1", (-0.5, 2, 4)), ("thm1_2", (-0.5, -0.2, -0.1)),
    ("prop1_3", (-0.5, 2, 2)), ("prop1_3", (-0.5, 2, 8, 2)), ("prop1_4", (-0.5, -0.1, 1)),
    ("prop1_5", (-0.5, 0.5, 1)), ("wei_a3", (-0.5, 0.0, -0.1)), ("opposite_n2", (0.5, 1)),
    ("gpi_n2", (-0.5, 1)), ("even_gpi_1_6", (2, 3, 2)), ("unknown", (1, 1)),
])
def test_domain_rejected(kind, alphas):
    with pytest.raises(DomainError):
        InequalityCase(kind, np.eye(len(alphas)), alphas)


def test_case_level_checks():
    with pytest.raises(DomainError):
        InequalityCase("even_gpi_subset_1_7", corr3(0.2, -0.1, 0.3), (2, 2, 2))
    with pytest.raises(DomainError):
        InequalityCase("wei_a3", np.eye(3), (-0.5, -0.5, -0.5), split=3)
    with pytest.raises(DomainError):
        InequalityCase("gpi_n2", np.eye(2), (1, 1), split=1)
    with pytest.raises(DomainError):
        InequalityCase("gpi_n2", np.eye(2), (1, 1), method="quad")
    with pytest.raises(DomainError):
        InequalityCase("gpi_n2", 2 * np.eye(2), (1, 1))
    assert set(KINDS) == {c.kind for c in identity_cases()}
