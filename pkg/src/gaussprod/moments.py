"""Mixed absolute moments E[prod_j |X_j|^alpha_j] of centered Gaussian vectors.

Four independent routes are provided so that each can check the others:

* closed forms -- one-dimensional moments, the bivariate 2F1 formula, and the
  Wick/Isserlis recursion for even integer powers;
* quadrature -- the Gamma-integral reduction of each negative power;
* Monte Carlo -- plain sampling through a Cholesky factor.

Quadrature parametrization
--------------------------
For ``a`` in (0, 1), ``|x|^-a = Gamma(1 + a/2)^-1 int_0^inf exp(-s x^2) dt`` with
``s = t^(2/a)``.  Substituting ``u = 2s / (1 + 2s)`` turns the t-measure
``(1 + 2s)^(-1/2) dt`` into ``E|X|^-a`` times the Beta(a/2, (1 - a)/2) law, and
the tilted covariance ``(Sigma^-1 + 2T)^-1`` becomes ``Sigma - u t t'`` (one
tilted coordinate).  With several tilted coordinates the Jacobian factor is
``det(I + U (Sigma_1 - I))^(-1/2)`` with ``U = diag(u)``.  Both integrands are
smooth on the closed cube, so Gauss-Jacobi rules converge geometrically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import CapabilityError, DomainError, InternalConsistencyError, NotPositiveDefinite, NumericError
from .quadrature import beta_expectation
from .specfun import gauss_2f1, log_gamma

METHODS = ("closed", "nabeya", "isserlis", "quadrature", "monte_carlo")
MAX_EVEN_HALF_DEGREE = 12
# Relative accuracy requested from the quadrature, and the contract it must meet.
_QUAD_TARGET = {1: 1e-11, 2: 1e-8, 3: 1e-5}
_QUAD_CONTRACT = {1: 1e-8, 2: 1e-6, 3: 1e-4}
# Caps on nodes per axis and tensor points.
_QUAD_NMAX = {1: 8192, 2: 1024, 3: 512}
_QUAD_POINTS = {1: 8192, 2: 1_000_000, 3: 6_000_000}
_MAX_LEVELS = 44
_LOG_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    method: str
    err: float = 0.0
    samples: int | None = None
    seed: int | None = None
    flags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.err >= 0.0:
            raise ValueError("err must be nonnegative")
        if self.method == "monte_carlo" and (self.samples is None or self.seed is None):
            raise ValueError("Monte Carlo estimates carry samples and seed")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "err": self.err,
            "samples": self.samples,
            "seed": self.seed,
            "flags": list(self.flags),
        }

    def scaled(self, factor: float) -> "MomentEstimate":
        return MomentEstimate(self.value * factor, self.method, self.err * abs(factor),
                              self.samples, self.seed, self.flags)


def _is_even_int(a: float) -> bool:
    return a >= 0 and a == math.floor(a) and int(a) % 2 == 0


@dataclass(frozen=True)
class ExponentVector:
    """Per-coordinate exponents, each > -1."""

    alphas: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", vals)
        for a in vals:
            if not math.isfinite(a) or a <= -1.0:
                raise DomainError(f"exponents must be finite and > -1, got {a!r}")

    @classmethod
    def coerce(cls, x) -> "ExponentVector":
        return x if isinstance(x, cls) else cls(tuple(np.ravel(x)))

    def __len__(self):
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    @property
    def negative(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.alphas) if a < 0)

    @property
    def even(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.alphas) if a > 0 and _is_even_int(a))

    @property
    def general(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.alphas) if a > 0 and not _is_even_int(a))

    @property
    def zero(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.alphas) if a == 0)


# ---------------------------------------------------------------- closed forms

def abs_moment_1d(alpha: float, variance=1.0):
    """E|X|^alpha for X ~ N(0, variance): (2 var)^(alpha/2) Gamma((alpha+1)/2) / sqrt(pi)."""
    alpha = float(alpha)
    if not alpha > -1.0:
        raise DomainError(f"E|X|^alpha is infinite for alpha = {alpha} <= -1")
    v = np.asarray(variance, dtype=float)
    if np.any(v <= 0.0):
        raise DomainError("variance must be positive")
    const = math.exp(0.5 * alpha * math.log(2.0) + log_gamma(0.5 * (alpha + 1.0)) - _LOG_SQRT_PI)
    out = const * v ** (0.5 * alpha)
    return float(out) if out.ndim == 0 else out


def bivariate_abs_moment(alpha2: float, alpha3: float, var2=1.0, var3=1.0, rho=0.0):
    """E[|Y2|^a2 |Y3|^a3] = E|Y2|^a2 E|Y3|^a3 F(-a2/2, -a3/2; 1/2; rho^2).

    ``var2``, ``var3`` and ``rho`` broadcast as arrays.
    """
    r = np.asarray(rho, dtype=float)
    if np.any(np.abs(r) > 1.0):
        raise DomainError("|rho| must not exceed 1")
    if np.any(np.abs(r) == 1.0) and alpha2 + alpha3 <= -1.0:
        raise DomainError("moment is infinite at |rho| = 1 when alpha2 + alpha3 <= -1")
    f = gauss_2f1(-0.5 * alpha2, -0.5 * alpha3, 0.5, r * r)
    out = abs_moment_1d(alpha2, var2) * abs_moment_1d(alpha3, var3) * f
    return float(out) if np.ndim(out) == 0 else out


def even_moment(Sigma, m):
    """E[prod_i X_i^(2 m_i)] by the Wick recursion E[x_a P] = sum_b s_ab E[dP/dx_b].

    ``Sigma`` may carry leading batch dimensions ``(..., n, n)``; the result then
    has the batch shape.
    """
    S = np.asarray(Sigma, dtype=float)
    m = [int(x) for x in m]
    n = S.shape[-1]
    if len(m) != n or any(x < 0 for x in m):
        raise DomainError("m must list one nonnegative integer per coordinate")
    if sum(m) > MAX_EVEN_HALF_DEGREE:
        raise CapabilityError(f"total degree 2*{sum(m)} exceeds the cap 2*{MAX_EVEN_HALF_DEGREE}")
    batch = S.shape[:-2]
    memo: dict[tuple[int, ...], np.ndarray] = {tuple([0] * n): np.ones(batch)}

    def rec(k: tuple[int, ...]):
        if k in memo:
            return memo[k]
        i = next(idx for idx, d in enumerate(k) if d > 0)
        rest = list(k)
        rest[i] -= 1
        total = np.zeros(batch)
        for j in range(n):
            if rest[j] == 0:
                continue
            mult = rest[j]
            nxt = list(rest)
            nxt[j] -= 1
            total = total + mult * S[..., i, j] * rec(tuple(nxt))
        memo[k] = total
        return total

    out = rec(tuple(2 * x for x in m))
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------ tilted Gaussians

@dataclass(frozen=True)
class TiltedGaussian:
    """Gaussian with covariance (Sigma^-1 + 2T)^-1 for diagonal T >= 0."""

    base: np.ndarray
    tilt: np.ndarray
    cov: np.ndarray

    @property
    def var_diag(self) -> np.ndarray:
        return np.diag(self.cov).copy()

    @property
    def rho_t(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.cov))
        return self.cov / np.outer(sd, sd)


def tilted_gaussian(Sigma, tilt) -> TiltedGaussian:
    """Build the tilted covariance without inverting Sigma.

    Uses ``Sigma - Sigma G (I + G Sigma G)^-1 G Sigma`` with ``G = sqrt(2T)``,
    which stays well conditioned when Sigma is nearly singular.
    """
    S = linalg.as_correlation(Sigma)
    tv = np.diag(tilt) if np.ndim(tilt) == 2 else np.asarray(tilt, dtype=float)
    if tv.shape != (S.shape[0],) or np.any(tv < 0.0) or not np.all(np.isfinite(tv)):
        raise DomainError("tilt must be a finite nonnegative diagonal of matching size")
    g = np.sqrt(2.0 * tv)
    inner = np.eye(len(g)) + g[:, None] * S * g[None, :]
    SG = S * g[None, :]
    cov = S - SG @ np.linalg.solve(inner, SG.T)
    cov = 0.5 * (cov + cov.T)
    try:
        linalg.cholesky(cov)
    except NotPositiveDefinite as exc:
        raise NumericError("tilted covariance lost positive definiteness") from exc
    untilted = tv == 0.0
    if np.any(np.diag(cov)[untilted] > 1.0 + 1e-12):
        raise InternalConsistencyError("an untilted coordinate gained variance")
    return TiltedGaussian(S, tv, cov)


def tilted_var_last(Sigma, T1) -> float:
    """Variance of the last tilted coordinate when only the first n-1 are tilted.

    ``[1 + 2 t' (T1^-1 + 2 (Sigma_1 - t t'))^-1 t]^-1`` with
    ``Sigma = [[Sigma_1, t], [t', 1]]`` and ``T1`` a positive diagonal.
    """
    S = linalg.as_correlation(Sigma)
    t1 = np.diag(T1) if np.ndim(T1) == 2 else np.asarray(T1, dtype=float)
    if t1.shape != (S.shape[0] - 1,) or np.any(t1 <= 0.0):
        raise DomainError("T1 must be a positive diagonal of size n - 1")
    R = linalg.reduced_schur_complement(S)
    M = np.diag(1.0 / t1) + 2.0 * R
    try:
        linalg.cholesky(0.5 * (M + M.T))
    except NotPositiveDefinite as exc:
        raise InternalConsistencyError("T1^-1 + 2(Sigma_1 - tt') is not PD") from exc
    t = S[:-1, -1]
    return float(1.0 / (1.0 + 2.0 * t @ np.linalg.solve(M, t)))


# --------------------------------------------------------- quadrature routes

def _beta_shape(a: float) -> tuple[float, float]:
    return 0.5 * a, 0.5 * (1.0 - a)


def _grading(S) -> int:
    """Panel levels toward u = 1; near-singular Sigma puts features at scale lambda_min."""
    lam = float(np.linalg.eigvalsh(S)[0])
    if lam >= 0.25:
        return 0
    return min(_MAX_LEVELS, int(math.ceil(math.log2(1.0 / lam))) + 1)


def _finish_quad(res, scale: float, k: int, contract: float | None = None) -> MomentEstimate:
    value = res.value * scale
    err = res.err * abs(scale)
    if not res.converged and err > (contract or _QUAD_CONTRACT[k]) * abs(value):
        raise NumericError(
            f"quadrature stalled at {res.nodes} nodes/panel with relative error {err / abs(value):.2g}",
            partial=value,
        )
    return MomentEstimate(value, "quadrature", err)


def _run_quad(f, alphas, S, k):
    levels = _grading(S)
    # graded k = 3 grids grow fast, so start them coarse
    n_start = 8 if k < 3 else (4 if levels == 0 else 2)
    return beta_expectation(f, [_beta_shape(a) for a in alphas], rtol=_QUAD_TARGET[k], n_max=_QUAD_NMAX[k],
                            n_start=n_start, max_points=_QUAD_POINTS[k], levels=levels, complement=True)


def mixed_moment_one_negative(Sigma, alpha1: float, rest, *, signed_inner: bool = False,
                              contract: float | None = None) -> MomentEstimate:
    """E[|X_1|^-alpha1 prod_{i>=2} |X_i|^rest_i] for a correlation matrix Sigma.

    ``alpha1`` in (0, 1) is the negated exponent of the first coordinate; ``rest``
    holds positive exponents.  The inner moment over the tilted covariance is
    evaluated by the Wick recursion when every entry is an even integer, in
    closed form for a single coordinate, and by the bivariate 2F1 formula for two.

    With ``signed_inner`` the entries of ``rest`` may also lie in (-1, 0); the
    bivariate formula is used unchanged for them.  This turns an n = 3 moment
    with several negative powers into a one-dimensional integral, which stays
    accurate for nearly singular Sigma where the tensor rules cannot.
    ``contract`` overrides the relative accuracy the result must meet.
    """
    S = linalg.as_correlation(Sigma)
    alpha1 = float(alpha1)
    if not 0.0 < alpha1 < 1.0:
        raise DomainError(f"alpha1 must lie in (0, 1), got {alpha1}")
    rest = [float(a) for a in rest]
    if len(rest) != S.shape[0] - 1:
        raise DomainError("rest must have n - 1 entries")
    if any(a < 0 for a in rest) and not signed_inner:
        raise DomainError("rest exponents must be nonnegative")
    if any(a <= -1.0 for a in rest):
        raise DomainError("rest exponents must exceed -1")
    keep = [0] + [i + 1 for i, a in enumerate(rest) if a != 0]
    S = S[np.ix_(keep, keep)]
    pos = [rest[i - 1] for i in keep[1:]]
    t = S[1:, 0]
    # Tilted covariance Sigma_rest - u t t' written as R + v t t' with v = 1 - u,
    # which keeps full relative accuracy when R is nearly singular.
    R = S[1:, 1:] - np.outer(t, t)
    np.fill_diagonal(R, (1.0 - t) * (1.0 + t))
    scale = abs_moment_1d(-alpha1)

    if not pos:
        return MomentEstimate(scale, "closed", 0.0)
    if all(a > 0 and _is_even_int(a) for a in pos):
        half = [int(a) // 2 for a in pos]
        if sum(half) > MAX_EVEN_HALF_DEGREE:
            raise CapabilityError("even inner moment exceeds the degree cap")
        tt = np.outer(t, t)

        def inner(u, v):
            return even_moment(R[None] + v[:, 0, None, None] * tt[None], half)
    elif len(pos) == 1:
        a2 = pos[0]
        c2 = abs_moment_1d(a2)

        def inner(u, v):
            return c2 * (R[0, 0] + v[:, 0] * t[0] ** 2) ** (0.5 * a2)
    elif len(pos) == 2:
        a2, a3 = pos

        def inner(u, v):
            vv = v[:, 0]
            v2 = R[0, 0] + vv * t[0] ** 2
            v3 = R[1, 1] + vv * t[1] ** 2
            # |rho| stays below 1 for PD Sigma; rounding must not push it onto
            # the boundary, where negative powers can make the moment infinite
            lim = 1.0 - 2.0**-52
            rho = np.clip((R[0, 1] + vv * t[0] * t[1]) / np.sqrt(v2 * v3), -lim, lim)
            return bivariate_abs_moment(a2, a3, v2, v3, rho)
    else:
        raise CapabilityError(
            "one-negative quadrature needs all-even positive exponents or at most two general ones"
        )
    return _finish_quad(_run_quad(inner, [alpha1], S, 1), scale, 1, contract)


def multilinear_det(S, k: int) -> list[tuple[tuple[int, ...], float]]:
    """Coefficients of det(S + V (I - S)) as a multilinear polynomial in v_1..v_k.

    ``V = diag(v_1, ..., v_k, 0, ..., 0)``.  Row i of the matrix is
    ``S_i + v_i (e_i - S_i)``, so expanding by rows gives one coefficient per
    subset T of {0..k-1}: the determinant of S with the rows in T replaced by
    rows of ``I - S``.  At v = 0 this is det(S); with ``u = 1 - v`` the matrix is
    ``I + U (S - I)``, the Jacobian of the tilted Gaussian.
    """
    n = S.shape[0]
    E = np.eye(n) - S
    out = []
    for r in range(k + 1):
        for T in itertools.combinations(range(k), r):
            M = S.copy()
            M[list(T)] = E[list(T)]
            out.append((T, float(np.linalg.det(M)) if r else linalg.det_sym(S)))
    return out


def _eval_multilinear(coefs, V):
    total = np.zeros(V.shape[0])
    for T, c in coefs:
        if c != 0.0:
            total = total + c * (np.prod(V[:, list(T)], axis=1) if T else 1.0)
    return total


def mixed_moment_multi_negative(Sigma, neg, pos_last: float | None = None) -> MomentEstimate:
    """E[prod_{i<=k} |X_i|^-neg_i * |X_n|^pos_last] for a correlation matrix Sigma.

    ``neg`` are the negated exponents (each in (0, 1)) of the first ``k <= 3``
    coordinates.  When ``pos_last`` is None, Sigma is k x k and the result is
    the pure negative-power moment; otherwise Sigma is (k+1) x (k+1).

    The integrand is ``D_1(v)^(-1/2) (D(v) / D_1(v))^(pos_last/2)`` where ``D_1``
    and ``D`` are the Jacobian determinants of the leading k x k block and of
    the full matrix; their ratio is the variance of the last tilted coordinate.
    """
    S = linalg.as_correlation(Sigma)
    neg = [float(a) for a in neg]
    k = len(neg)
    if k == 0:
        raise DomainError("need at least one negative exponent")
    if k > 3:
        raise CapabilityError("tensor quadrature is limited to three negative exponents; use Monte Carlo")
    if any(not 0.0 < a < 1.0 for a in neg):
        raise DomainError("negated exponents must lie in (0, 1)")
    has_pos = pos_last is not None and float(pos_last) != 0.0
    if S.shape[0] != k + (1 if pos_last is not None else 0):
        raise DomainError("Sigma size must be len(neg) (+1 with pos_last)")
    if pos_last is not None and not has_pos:
        S = S[:k, :k]
    if has_pos and float(pos_last) < 0:
        raise DomainError("pos_last must be positive")
    d1 = multilinear_det(S[:k, :k], k)
    scale = float(np.prod([abs_moment_1d(-a) for a in neg]))
    if has_pos:
        an = float(pos_last)
        scale *= abs_moment_1d(an)
        dfull = multilinear_det(S, k)

        def f(U, V):
            D1 = _eval_multilinear(d1, V)
            var = np.maximum(_eval_multilinear(dfull, V), 0.0) / D1
            return D1 ** -0.5 * var ** (0.5 * an)
    else:

        def f(U, V):
            return _eval_multilinear(d1, V) ** -0.5

    return _finish_quad(_run_quad(f, neg, S, k), scale, k)


def negative_power_integral(alpha: float, *, epsabs: float = 1e-15, epsrel: float = 1e-13) -> tuple[float, float]:
    """Gamma(1 + a/2)^-1 int_0^inf (1 + 2 t^(2/a))^(-1/2) dt by adaptive Gauss-Kronrod.

    Works in s = t^(2/a), split at s = 1, with v = 1/s on the tail; power
    substitutions on each piece remove the endpoint singularities.  Equals
    E|X|^-a for a standard normal X.
    """
    a = float(alpha)
    if not 0.0 < a < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    # s in [0, 1], s = w^(2/a): integrand (2/a)(1 + 2 w^(2/a))^(-1/2) dw.
    p = 2.0 / a
    head, e1 = _gk(lambda w: p * (1.0 + 2.0 * w**p) ** -0.5, epsabs, epsrel)
    # v = 1/s in [0, 1], v = y^(2/(1-a)): integrand (2/(1-a))(y^(2/(1-a)) + 2)^(-1/2) dy.
    q = 2.0 / (1.0 - a)
    tail, e2 = _gk(lambda y: q * (y**q + 2.0) ** -0.5, epsabs, epsrel)
    # The s-form carries the factor (a/2)/Gamma(1 + a/2) = 1/Gamma(a/2).
    norm = math.exp(-log_gamma(0.5 * a))
    return (head + tail) * norm, (e1 + e2) * norm


def _gk(f, epsabs, epsrel):
    from .quadrature import gauss_kronrod

    return gauss_kronrod(f, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel)


# ------------------------------------------------------------------ Monte Carlo

def mc_mixed_moment(Sigma, alphas, n_samples: int = 200_000, seed: int = 0, *,
                    batch: int = 1 << 16) -> MomentEstimate:
    """Sample mean of prod |x_j|^alpha_j with its standard error.

    Draws ``x = L z`` with ``L`` the Cholesky factor of Sigma (any PD covariance).
    Deterministic for a given seed.  If some alpha_j <= -1/2 the integrand has
    infinite variance and the estimate is flagged ``stderr_unreliable``.
    """
    S = linalg.as_symmetric(Sigma, name="Sigma")
    av = ExponentVector.coerce(alphas)
    alpha = np.array(av.alphas)
    if len(alpha) != S.shape[0]:
        raise DomainError("one exponent per coordinate is required")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise DomainError("need at least two samples")
    try:
        L = linalg.cholesky(S)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(
            "Monte Carlo needs a PD covariance; try linalg.shrink_to_pd", exc.pivot_index, exc.pivot
        ) from exc
    flags = ("stderr_unreliable",) if np.any(alpha <= -0.5) else ()
    if np.all(alpha == 0.0):
        return MomentEstimate(1.0, "monte_carlo", 0.0, n_samples, int(seed), flags)
    active = alpha != 0.0
    rng = np.random.default_rng(int(seed))
    count = 0
    mean = 0.0
    m2 = 0.0
    remaining = n_samples
    while remaining > 0:
        b = min(batch, remaining)
        z = rng.standard_normal((b, S.shape[0]))
        x = z @ L.T
        logv = np.log(np.abs(x[:, active])) @ alpha[active]
        vals = np.exp(logv)
        bmean = float(vals.mean())
        bm2 = float(((vals - bmean) ** 2).sum())
        delta = bmean - mean
        total = count + b
        mean += delta * b / total
        m2 += bm2 + delta * delta * count * b / total
        count = total
        remaining -= b
    stderr = math.sqrt(m2 / (count - 1) / count)
    return MomentEstimate(mean, "monte_carlo", stderr, n_samples, int(seed), flags)


# ------------------------------------------------------------------ dispatcher

_METHOD_ALIASES = {"auto": "auto", "quad": "quadrature", "quadrature": "quadrature", "mc": "monte_carlo",
                   "monte_carlo": "monte_carlo", "isserlis": "isserlis", "nabeya": "nabeya",
                   "closed": "closed"}


def mixed_moment(Sigma, alphas, method: str = "auto", *, n_samples: int = 200_000, seed: int = 0,
                 allow_mc: bool = True) -> MomentEstimate:
    """E[prod_j |X_j|^alpha_j] for any PD covariance, choosing a route.

    The covariance is standardized first: the moment of Sigma equals
    ``prod_j sigma_jj^(alpha_j/2)`` times the moment of its correlation matrix.
    ``auto`` prefers exact routes (closed, Isserlis, bivariate 2F1 for positive
    exponents), then quadrature, then Monte Carlo when ``allow_mc``.
    """
    try:
        method = _METHOD_ALIASES[method]
    except KeyError:
        raise DomainError(f"unknown method {method!r}") from None
    S = linalg.as_symmetric(Sigma, name="Sigma")
    av = ExponentVector.coerce(alphas)
    if len(av) != S.shape[0]:
        raise DomainError("one exponent per coordinate is required")
    if method == "monte_carlo":
        return mc_mixed_moment(S, av, n_samples, seed)
    if method == "isserlis":
        if av.negative or av.general:
            raise CapabilityError("Isserlis needs nonnegative even integer exponents")
        return MomentEstimate(even_moment(S, [int(a) // 2 for a in av]), "isserlis", 0.0)

    R, sd = linalg.correlation_from_covariance(S)
    alpha = np.array(av.alphas)
    scale = float(np.prod(sd ** alpha))
    keep = [i for i, a in enumerate(alpha) if a != 0.0]
    R = R[np.ix_(keep, keep)]
    alpha = alpha[keep]
    est = _standardized(R, alpha, method)
    if est is None:
        if method == "auto" and allow_mc:
            est = mc_mixed_moment(R, alpha, n_samples, seed) if len(alpha) else None
            if est is not None:
                est = MomentEstimate(est.value, est.method, est.err, est.samples, est.seed,
                                     est.flags + ("mc_fallback",))
        if est is None:
            raise CapabilityError(f"no {method} route for exponents {tuple(av.alphas)}")
    return est.scaled(scale)


def _standardized(R, alpha, method):
    n = len(alpha)
    if n == 0:
        return MomentEstimate(1.0, "closed", 0.0)
    if n == 1 and method in ("auto", "closed", "quadrature", "nabeya"):
        return MomentEstimate(abs_moment_1d(alpha[0]), "closed", 0.0)
    if method == "closed":
        return None
    negs = [i for i in range(n) if alpha[i] < 0]
    poss = [i for i in range(n) if alpha[i] > 0]
    all_even = not negs and all(_is_even_int(a) for a in alpha)
    if method == "auto" and all_even and sum(int(a) // 2 for a in alpha) <= MAX_EVEN_HALF_DEGREE:
        return MomentEstimate(even_moment(R, [int(a) // 2 for a in alpha]), "isserlis", 0.0)
    if method == "nabeya" or (method == "auto" and n == 2 and (not negs or abs(R[0, 1]) == 1.0)):
        if n != 2:
            raise CapabilityError("the bivariate formula needs exactly two active coordinates")
        return MomentEstimate(bivariate_abs_moment(alpha[0], alpha[1], 1.0, 1.0, R[0, 1]), "nabeya", 0.0)
    # quadrature (explicit or auto)
    if len(negs) == 1:
        pos_vals = [alpha[i] for i in poss]
        if all(_is_even_int(a) for a in pos_vals) or len(pos_vals) <= 2:
            order = negs + poss
            return mixed_moment_one_negative(R[np.ix_(order, order)], -alpha[negs[0]], pos_vals)
    if 2 <= len(negs) <= 3 and len(poss) <= 1:
        order = negs + poss
        try:
            return mixed_moment_multi_negative(R[np.ix_(order, order)], [-alpha[i] for i in negs],
                                               alpha[poss[0]] if poss else None)
        except NumericError:
            if n != 3:
                raise
            # nearly singular Sigma: integrate out one negative power and use
            # the bivariate formula with signed exponents for the other two
            rest = [i for i in order if i != negs[0]]
            idx = [negs[0]] + rest
            est = mixed_moment_one_negative(R[np.ix_(idx, idx)], -alpha[negs[0]], [alpha[i] for i in rest],
                                            signed_inner=True, contract=_QUAD_CONTRACT[len(negs)])
            return MomentEstimate(est.value, est.method, est.err, flags=("signed_bivariate_inner",))
    if method == "quadrature":
        raise CapabilityError(f"no quadrature reduction for exponents {tuple(alpha)}")
    return None
