"""Both sides of each Gaussian product inequality, for a given correlation matrix.

Every evaluator returns a ``BoundResult`` holding the moment being bounded
(``lhs``), whichever of ``lower`` / ``upper`` the inequality provides, and an
error budget ``err`` for the slacks.  Deciding pass/fail is left to the
verifier.

Kinds and the inequality each one checks (exponents are the signed powers
``alpha_j`` in ``E prod |X_j|^alpha_j``):

=====================  ==========================================================
thm1_1                 alpha_1 in (-1,0), rest = 2:  lhs >= prod (1-rho_1i^2) * marginals
thm1_2                 alpha_1..n-1 in (-1,0), alpha_n > 0:  lhs <= E[negatives] E|X_n|^a_n
remark_eq2             same exponents:  lhs <= prod m_jj^alpha_j E|X_j|^alpha_j * E|X_n|^a_n
prop1_3                n = 4, alpha_1 in (-1,0), rest even:  lhs >= prod (1-rho_1i^2)^(a_i/2) * marginals
prop1_4                n = 3, alpha_1 in (-1,0), rest > 0:  lower <= lhs <= C * marginals
prop1_5                n = 3, alpha_1,2 in (-1,0), alpha_3 > 0:  variance-floor sandwich
wei_a3                 all in (-1,0):  lhs >= E[first k] E[last n-k]
opposite_n2            n = 2, alpha_1 in (-1,0), alpha_2 > 0:  lhs <= marginals
gpi_n2                 n = 2, both > 0:  lhs >= marginals
even_gpi_1_6           n = 3, even powers:  lhs >= marginals
even_gpi_subset_1_7    even powers, nonnegative correlations:  lhs >= E[first k] E[last n-k]
=====================  ==========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DomainError
from .moments import MomentEstimate, abs_moment_1d, mixed_moment
from .specfun import gauss_2f1_at_one

KINDS = (
    "thm1_1", "thm1_2", "remark_eq2", "prop1_3", "prop1_4", "prop1_5",
    "wei_a3", "opposite_n2", "gpi_n2", "even_gpi_1_6", "even_gpi_subset_1_7",
)
# Stderr multiple folded into the error budget of Monte Carlo evaluations.
MC_SIGMAS = 4.0
DEFAULT_MC_SAMPLES = 200_000


def _is_even(a: float) -> bool:
    return a > 0 and a == math.floor(a) and int(a) % 2 == 0


@dataclass(frozen=True)
class InequalityCase:
    kind: str
    sigma: np.ndarray
    alphas: tuple[float, ...]
    split: int | None = None
    method: str = "auto"
    n_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0

    def __post_init__(self):
        S = linalg.as_correlation(self.sigma)
        object.__setattr__(self, "sigma", S)
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.method not in ("auto", "mc"):
            raise DomainError(f"method must be 'auto' or 'mc', got {self.method!r}")
        validate_domain(self.kind, S, self.alphas, self.split)

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def k(self) -> int:
        return 1 if self.split is None else self.split


def validate_domain(kind: str, S, alphas, split=None) -> None:
    """Raise DomainError unless (S, alphas, split) meet the hypotheses of ``kind``."""
    if kind not in KINDS:
        raise DomainError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    a = list(alphas)
    n = len(a)
    if S.shape != (n, n):
        raise DomainError(f"sigma is {S.shape[0]}x{S.shape[1]} but {n} exponents were given")
    neg = [(-1.0 < x < 0.0) for x in a]

    def need(cond, msg):
        if not cond:
            raise DomainError(f"{kind}: {msg}")

    if kind == "thm1_1":
        need(n >= 2 and neg[0] and all(x == 2.0 for x in a[1:]), "needs alpha_1 in (-1,0) and alpha_i = 2 otherwise")
    elif kind in ("thm1_2", "remark_eq2"):
        need(n >= 2 and all(neg[:-1]) and a[-1] > 0, "needs alpha_1..n-1 in (-1,0) and alpha_n > 0")
    elif kind == "prop1_3":
        need(n == 4 and neg[0] and all(_is_even(x) and x <= 6 for x in a[1:]),
             "needs n = 4, alpha_1 in (-1,0), alpha_2..4 in {2, 4, 6}")
    elif kind == "prop1_4":
        need(n == 3 and neg[0] and a[1] > 0 and a[2] > 0, "needs n = 3, alpha_1 in (-1,0), alpha_2,3 > 0")
    elif kind == "prop1_5":
        need(n == 3 and neg[0] and neg[1] and a[2] > 0, "needs n = 3, alpha_1,2 in (-1,0), alpha_3 > 0")
    elif kind == "wei_a3":
        need(n >= 2 and all(neg), "needs every alpha in (-1,0)")
    elif kind == "opposite_n2":
        need(n == 2 and neg[0] and a[1] > 0, "needs n = 2, alpha_1 in (-1,0), alpha_2 > 0")
    elif kind == "gpi_n2":
        need(n == 2 and a[0] > 0 and a[1] > 0, "needs n = 2 and positive exponents")
    elif kind == "even_gpi_1_6":
        need(n == 3 and all(_is_even(x) for x in a), "needs n = 3 and positive even exponents")
    elif kind == "even_gpi_subset_1_7":
        need(n >= 2 and all(_is_even(x) for x in a), "needs positive even exponents")
        need(bool(np.all(S >= 0.0)), "needs nonnegative correlations")
    if kind in ("wei_a3", "even_gpi_subset_1_7"):
        k = 1 if split is None else split
        need(1 <= k <= n - 1, f"split must be in [1, {n - 1}]")
    elif split is not None:
        raise DomainError(f"{kind} takes no split")


@dataclass(frozen=True)
class VarianceFloorDiagnostics:
    """Quantities from the monotonicity argument behind the two-negative lower bound.

    For ``Sigma = [[1, a, b], [a, 1, c], [b, c, 1]]`` the variance of the third
    tilted coordinate is at least ``var_floor = det(Sigma) / (1 - a^2)``.
    ``I2_identity`` and ``cross_identity`` hold the absolute gaps between the
    two sides of ``I2 = 8(ab - c)^2`` and ``4K(1 - c^2) - 8 det c^2 = 8(ac - b)^2``.
    """

    K: float
    I1: float
    I2: float
    cross: float
    discriminant: float
    g_limit: float
    var_floor: float
    I2_identity: float
    cross_identity: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def variance_floor_diagnostics(S, *, s_grid=None) -> VarianceFloorDiagnostics:
    """Evaluate the two-negative diagnostics for a 3x3 correlation matrix.

    ``discriminant`` is the largest |Delta(s)| over ``s_grid`` (default 64
    points in (0, 2]), where Delta is the discriminant in c of
    ``(1 + 4s + 4s^2) c^2 - (4ab s + 8ab s^2) c + 4 a^2 b^2 s^2``; it vanishes
    identically because that quadratic is ``((1 + 2s) c - 2ab s)^2``.
    """
    S = linalg.as_correlation(S)
    if S.shape != (3, 3):
        raise DomainError("diagnostics need a 3x3 matrix")
    a, b, c = S[0, 1], S[0, 2], S[1, 2]
    det = linalg.det_sym(S)
    K = 2 * b * b + 2 * c * c - 4 * a * b * c
    I1 = 8 * c * c - 8 * a * b * c
    I2 = 4 * K * (1 - b * b) - 8 * det * b * b
    cross = 4 * K * (1 - c * c) - 8 * det * c * c
    s = np.linspace(2.0 / 64, 2.0, 64) if s_grid is None else np.asarray(s_grid, dtype=float)
    lin = -4 * a * b * s - 8 * a * b * s * s
    quad = 1 + 4 * s + 4 * s * s
    disc = lin * lin - 4 * quad * 4 * a * a * b * b * s * s
    return VarianceFloorDiagnostics(
        K=K, I1=I1, I2=I2, cross=cross,
        discriminant=float(np.max(np.abs(disc))),
        g_limit=(1 - a * a) / (2 * det) - 0.5,
        var_floor=det / (1 - a * a),
        I2_identity=abs(I2 - 8 * (a * b - c) ** 2),
        cross_identity=abs(cross - 8 * (a * c - b) ** 2),
    )


@dataclass(frozen=True)
class BoundResult:
    kind: str
    lhs: MomentEstimate
    lower: float | None = None
    upper: float | None = None
    err: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def slack_lower(self) -> float | None:
        return None if self.lower is None else self.lhs.value - self.lower

    @property
    def slack_upper(self) -> float | None:
        return None if self.upper is None else self.upper - self.lhs.value

    @property
    def method(self) -> str:
        return self.lhs.method


class _Evaluator:
    """Computes the moments one case needs and tallies their error budget."""

    def __init__(self, case: InequalityCase):
        self.case = case
        self.S = case.sigma
        self.a = np.array(case.alphas)
        self._mc_calls = 0
        self._det_err = 0.0
        self._mc_var = 0.0

    def moment(self, idx=None, weight: float | None = 1.0) -> MomentEstimate:
        """Moment of the sub-vector ``idx``; ``weight`` is its multiplier in the slack.

        With ``weight=None`` the error is not tallied; call ``account`` later.
        """
        idx = list(range(len(self.a))) if idx is None else list(idx)
        S = self.S[np.ix_(idx, idx)]
        a = self.a[idx]
        if self.case.method == "mc" and len(idx) > 1:
            seed = (self.case.seed + self._mc_calls) % (1 << 63)
            self._mc_calls += 1
            est = mixed_moment(S, a, "mc", n_samples=self.case.n_samples, seed=seed)
        else:
            est = mixed_moment(S, a, allow_mc=False)
        if weight is not None:
            self.account(est, weight)
        return est

    def account(self, est: MomentEstimate, weight: float) -> None:
        if est.method == "monte_carlo":
            self._mc_var += (weight * est.err) ** 2
        else:
            self._det_err += abs(weight) * est.err

    @property
    def err(self) -> float:
        return self._det_err + MC_SIGMAS * math.sqrt(self._mc_var)

    def marginals(self, idx=None) -> float:
        idx = range(len(self.a)) if idx is None else idx
        return float(np.prod([abs_moment_1d(self.a[i]) for i in idx]))


def negative_with_squares_bound(case: InequalityCase) -> BoundResult:
    """One negative power times squares: lhs >= prod_i (1 - rho_1i^2) * marginals."""
    ev = _Evaluator(case)
    lhs = ev.moment()
    rho = case.sigma[0, 1:]
    lower = float(np.prod(1.0 - rho**2)) * ev.marginals()
    return BoundResult(case.kind, lhs, lower=lower, err=ev.err)


def opposite_product_bound(case: InequalityCase) -> BoundResult:
    """Negative powers and one positive power: lhs <= E[negatives] * E|X_n|^alpha_n."""
    ev = _Evaluator(case)
    n = case.n
    lhs = ev.moment()
    last = abs_moment_1d(ev.a[-1])
    neg = ev.moment(range(n - 1), weight=last)
    return BoundResult(case.kind, lhs, upper=neg.value * last, err=ev.err)


def cholesky_diagonal_bound(case: InequalityCase) -> BoundResult:
    """lhs <= prod_{j<n} m_jj^alpha_j E|X_j|^alpha_j * E|X_n|^alpha_n, Sigma = M M'.

    Chains the opposite-product bound with the estimate
    ``E prod_{j<n} |X_j|^alpha_j <= prod (1/m_jj)^|alpha_j| E|X_j|^alpha_j``.
    """
    ev = _Evaluator(case)
    lhs = ev.moment()
    m = np.diag(linalg.cholesky(case.sigma))
    factor = float(np.prod(m[:-1] ** ev.a[:-1]))
    upper = factor * ev.marginals()
    return BoundResult(case.kind, lhs, upper=upper, err=ev.err, extras={"cholesky_diag": m.tolist()})


def negative_with_even_powers_bound(case: InequalityCase) -> BoundResult:
    """n = 4, even positive powers: lhs >= prod (1 - rho_1i^2)^(alpha_i/2) * marginals."""
    ev = _Evaluator(case)
    lhs = ev.moment()
    rho = case.sigma[0, 1:]
    lower = float(np.prod((1.0 - rho**2) ** (0.5 * ev.a[1:]))) * ev.marginals()
    return BoundResult(case.kind, lhs, lower=lower, err=ev.err)


def sharp_constant(alpha2: float, alpha3: float) -> float:
    """Gamma(1/2) Gamma((1+a2+a3)/2) / (Gamma((1+a2)/2) Gamma((1+a3)/2)) = F(-a2/2, -a3/2; 1/2; 1)."""
    return gauss_2f1_at_one(-0.5 * alpha2, -0.5 * alpha3, 0.5)


def one_negative_two_positive_bounds(case: InequalityCase) -> BoundResult:
    """n = 3: prod (1 - rho_1i^2)^(alpha_i/2) * marg <= lhs <= C_{alpha2,alpha3} * marg."""
    ev = _Evaluator(case)
    lhs = ev.moment()
    marg = ev.marginals()
    rho = case.sigma[0, 1:]
    lower = float(np.prod((1.0 - rho**2) ** (0.5 * ev.a[1:]))) * marg
    C = sharp_constant(ev.a[1], ev.a[2])
    return BoundResult(case.kind, lhs, lower=lower, upper=C * marg, err=ev.err, extras={"constant": C})


def stated_two_negative_lower(case: InequalityCase) -> float:
    """The variance floor used without the alpha_3/2 power.

    Only valid when alpha_3 <= 2 (the floor is at most 1); kept for comparison.
    """
    S = case.sigma
    floor = linalg.det_sym(S) / (1.0 - S[0, 1] ** 2)
    return floor * float(np.prod([abs_moment_1d(x) for x in case.alphas]))


def two_negative_one_positive_bounds(case: InequalityCase) -> BoundResult:
    """n = 3: (det/(1-a^2))^(alpha_3/2) * marg <= lhs <= E[|X1|^a1 |X2|^a2] E|X3|^a3.

    The lower bound raises the variance floor det(Sigma)/(1 - a^2) of the third
    tilted coordinate to the power alpha_3/2, as the argument requires.  The
    unpowered floor is reported as ``lower_stated`` in the extras.
    """
    ev = _Evaluator(case)
    lhs = ev.moment()
    diag = variance_floor_diagnostics(case.sigma)
    marg = ev.marginals()
    lower = diag.var_floor ** (0.5 * ev.a[2]) * marg
    last = abs_moment_1d(ev.a[2])
    pair = ev.moment([0, 1], weight=last)
    extras = {"lower_stated": stated_two_negative_lower(case), "diagnostics": diag.to_dict()}
    return BoundResult(case.kind, lhs, lower=lower, upper=pair.value * last, err=ev.err, extras=extras)


def _split_product(ev: _Evaluator, k: int, n: int) -> float:
    first = ev.moment(range(k), weight=None)
    second = ev.moment(range(k, n), weight=None)
    ev.account(first, second.value)
    ev.account(second, first.value)
    return first.value * second.value


def negative_split_bound(case: InequalityCase) -> BoundResult:
    """All powers in (-1, 0): lhs >= E[prod_{j<=k}] * E[prod_{j>k}]."""
    ev = _Evaluator(case)
    lhs = ev.moment()
    return BoundResult(case.kind, lhs, lower=_split_product(ev, case.k, case.n), err=ev.err)


def opposite_bivariate_bound(case: InequalityCase) -> BoundResult:
    """n = 2 with alpha_1 in (-1, 0) < alpha_2: lhs <= E|X1|^a1 E|X2|^a2."""
    ev = _Evaluator(case)
    return BoundResult(case.kind, ev.moment(), upper=ev.marginals(), err=ev.err)


def bivariate_gpi_bound(case: InequalityCase) -> BoundResult:
    """n = 2, positive powers: lhs >= E|X1|^a1 E|X2|^a2."""
    ev = _Evaluator(case)
    return BoundResult(case.kind, ev.moment(), lower=ev.marginals(), err=ev.err)


def even_trivariate_gpi_bound(case: InequalityCase) -> BoundResult:
    """n = 3, even powers: lhs >= product of marginal moments."""
    ev = _Evaluator(case)
    return BoundResult(case.kind, ev.moment(), lower=ev.marginals(), err=ev.err)


def even_split_gpi_bound(case: InequalityCase) -> BoundResult:
    """Even powers, nonnegative correlations: lhs >= E[prod_{j<=k}] * E[prod_{j>k}]."""
    ev = _Evaluator(case)
    lhs = ev.moment()
    return BoundResult(case.kind, lhs, lower=_split_product(ev, case.k, case.n), err=ev.err)


EVALUATORS = {
    "thm1_1": negative_with_squares_bound,
    "thm1_2": opposite_product_bound,
    "remark_eq2": cholesky_diagonal_bound,
    "prop1_3": negative_with_even_powers_bound,
    "prop1_4": one_negative_two_positive_bounds,
    "prop1_5": two_negative_one_positive_bounds,
    "wei_a3": negative_split_bound,
    "opposite_n2": opposite_bivariate_bound,
    "gpi_n2": bivariate_gpi_bound,
    "even_gpi_1_6": even_trivariate_gpi_bound,
    "even_gpi_subset_1_7": even_split_gpi_bound,
}


def evaluate(case: InequalityCase) -> BoundResult:
    return EVALUATORS[case.kind](case)
