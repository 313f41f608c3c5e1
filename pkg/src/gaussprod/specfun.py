"""Special functions: log-gamma, digamma, Pochhammer symbols and Gauss 2F1.

Everything here works in double precision without external special-function
libraries.  ``gauss_2f1`` accepts a scalar or an ndarray ``z``; the heavy
callers (quadrature over tilted covariances) pass whole node arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError

EULER_GAMMA = 0.57721566490153286060651209008240243
LOG_SQRT_2PI = 0.91893853320467274178032973640561764
LOG_PI = 1.14472988584940017414342735135305871

MAX_TERMS = 10_000
SERIES_RTOL = 1e-16
# Above this z the direct series gets slow; switch to the 1 - z expansion.
Z_SWITCH = 0.9
# |c - a - b - m| below this is treated by interpolation around the integer m.
NEAR_INT = 1e-4

# B_{2j} for j = 1..8
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)


def _zeta_minus_one(k: int, cutoff: int = 40) -> float:
    """zeta(k) - 1 for integer k >= 2, by direct sum plus Euler-Maclaurin tail."""
    tail = cutoff ** (1 - k) / (k - 1) + 0.5 * cutoff ** (-k)
    rising = float(k)
    fact = 2.0
    for j, b2j in enumerate(_BERNOULLI[:5], start=1):
        tail += b2j / fact * rising * cutoff ** (-k - 2 * j + 1)
        rising *= (k + 2 * j - 1) * (k + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    head = 0.0
    for n in range(cutoff - 1, 1, -1):
        head += n ** (-k)
    return head + tail


_ZETA_M1 = tuple(_zeta_minus_one(k) for k in range(2, 66))


def _lgamma_near_two(eps: float) -> float:
    # ln Gamma(2 + eps) = eps (1 - gamma) + sum_{k>=2} (-1)^k (zeta(k) - 1) eps^k / k, |eps| < 2
    total = 0.0
    power = -eps
    terms = []
    for k, zm1 in enumerate(_ZETA_M1, start=2):
        power *= -eps
        term = zm1 * power / k
        terms.append(term)
        if abs(term) < 1e-18 * max(abs(eps), 1e-300):
            break
    for term in reversed(terms):
        total += term
    return total + eps * (1.0 - EULER_GAMMA)


def _lgamma_stirling(x: float) -> float:
    corr = 0.0
    inv = 1.0 / x
    inv2 = inv * inv
    power = inv
    for j, b2j in enumerate(_BERNOULLI, start=1):
        corr += b2j / (2 * j * (2 * j - 1)) * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + LOG_SQRT_2PI + corr


def _check_real(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    x = _check_real(x)
    if x <= 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    if x < 1.5:
        return _lgamma_near_two(x - 1.0) - math.log(x)
    if x <= 2.5:
        return _lgamma_near_two(x - 2.0)
    if x < 8.0:
        shift = int(math.ceil(x - 2.5))
        prod = 1.0
        for j in range(1, shift + 1):
            prod *= x - j
        return _lgamma_near_two(x - shift - 2.0) + math.log(prod)
    return _lgamma_stirling(x)


def _is_nonpos_int(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _sin_pi(x: float) -> float:
    r = round(x)
    s = math.sin(math.pi * (x - r))
    return -s if r % 2 else s


def lgamma_signed(x: float) -> tuple[float, float]:
    """Return ``(log|Gamma(x)|, sign(Gamma(x)))`` for any real non-pole ``x``."""
    x = _check_real(x)
    if x > 0.0:
        return log_gamma(x), 1.0
    if _is_nonpos_int(x):
        raise DomainError(f"Gamma has a pole at {x!r}")
    s = _sin_pi(x)
    return LOG_PI - math.log(abs(s)) - log_gamma(1.0 - x), math.copysign(1.0, s)


def gamma_fn(x: float) -> float:
    """Gamma(x) for real non-pole x."""
    lg, sign = lgamma_signed(x)
    return sign * math.exp(lg)


def rgamma(x: float) -> float:
    """1 / Gamma(x); zero at the poles."""
    x = _check_real(x)
    if _is_nonpos_int(x):
        return 0.0
    lg, sign = lgamma_signed(x)
    return sign * math.exp(-lg)


def digamma(x: float) -> float:
    """psi(x) = d/dx ln Gamma(x) for real non-pole x."""
    x = _check_real(x)
    if _is_nonpos_int(x):
        raise DomainError(f"digamma has a pole at {x!r}")
    if x <= 0.0:
        r = round(x)
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * (x - r))
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    power = inv2
    series = 0.0
    for j, b2j in enumerate(_BERNOULLI, start=1):
        series += b2j / (2 * j) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def pochhammer(alpha: float, n: int) -> float:
    """Rising factorial (alpha)_n = alpha (alpha + 1) ... (alpha + n - 1)."""
    if n < 0 or int(n) != n:
        raise DomainError(f"pochhammer needs a nonnegative integer n, got {n!r}")
    out = 1.0
    for k in range(int(n)):
        out *= alpha + k
    return out


@dataclass(frozen=True)
class HyperParams:
    """Parameters of F(a, b; c; z) restricted to real z in [-1, 1]."""

    a: float
    b: float
    c: float
    z: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "z"):
            _check_real(getattr(self, name), name)
        if _is_nonpos_int(self.c) and not self.terminates_before_pole():
            raise DomainError(f"c = {self.c!r} is a non-positive integer")
        if not -1.0 <= self.z <= 1.0:
            raise DomainError(f"z must lie in [-1, 1], got {self.z!r}")
        if self.z == 1.0 and self.c - self.a - self.b <= 0.0 and not self.terminating:
            raise DomainError("series diverges at z = 1 unless c - a - b > 0")

    @property
    def terminating(self) -> bool:
        return _is_nonpos_int(self.a) or _is_nonpos_int(self.b)

    def terminates_before_pole(self) -> bool:
        degree = _terminating_degree(self.a, self.b)
        return degree is not None and degree < -self.c


def _terminating_degree(a: float, b: float) -> int | None:
    degs = [int(-x) for x in (a, b) if _is_nonpos_int(x)]
    return min(degs) if degs else None


def _polynomial(a, b, c, z, degree):
    total = np.ones_like(z)
    term = np.ones_like(z)
    for n in range(degree):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + term
    return total


def _series(a, b, c, z, max_terms=MAX_TERMS, rtol=SERIES_RTOL):
    """Plain power series in z; z is an ndarray with |z| < 1."""
    total = np.ones_like(z)
    term = np.ones_like(z)
    absz = np.abs(z)
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + term
        ratio = abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2.0)))
        small = np.abs(term) <= rtol * np.abs(total)
        if np.all(small | (term == 0.0)) and np.all(ratio * absz < 1.0):
            return total
    raise NumericError(
        f"2F1 series did not converge in {max_terms} terms (a={a}, b={b}, c={c})",
        partial=float(np.max(total)) if total.size else None,
    )


def _connection(a, b, c, w):
    """F(a,b;c;1-w) via the w = 1 - z expansion, c - a - b not an integer."""
    s = c - a - b
    lg_c, sg_c = lgamma_signed(c)
    out = np.zeros_like(w)
    r1 = rgamma(c - a) * rgamma(c - b)
    if r1 != 0.0:
        lg_s, sg_s = lgamma_signed(s)
        coef1 = sg_c * sg_s * math.exp(lg_c + lg_s) * r1
        out = out + coef1 * _series(a, b, 1.0 - s, w)
    r2 = rgamma(a) * rgamma(b)
    if r2 != 0.0:
        lg_ms, sg_ms = lgamma_signed(-s)
        coef2 = sg_c * sg_ms * math.exp(lg_c + lg_ms) * r2
        out = out + coef2 * w**s * _series(c - a, c - b, 1.0 + s, w)
    return out


def _log_case(a, b, m, w, max_terms=MAX_TERMS, rtol=SERIES_RTOL):
    """F(a, b; a + b + m; 1 - w) for integer m >= 0 (logarithmic case)."""
    c = a + b + m
    gc = gamma_fn(c)
    zm1 = -w
    finite = np.zeros_like(w)
    if m > 0:
        r = rgamma(a + m) * rgamma(b + m)
        if r != 0.0:
            coef = 1.0
            power = np.ones_like(w)
            for k in range(m):
                finite = finite + coef * math.factorial(m - k - 1) * power
                coef *= (a + k) * (b + k) / (k + 1.0)
                power = power * zm1
            finite = finite * r
    r0 = rgamma(a) * rgamma(b)
    if r0 == 0.0:
        return gc * finite
    logw = np.log(w)
    psi1 = digamma(1.0)
    psim = digamma(m + 1.0)
    psia = digamma(a + m)
    psib = digamma(b + m)
    coef = 1.0 / math.factorial(m)
    power = np.ones_like(w)
    acc = np.zeros_like(w)
    for k in range(max_terms):
        term = coef * power * (logw - psi1 - psim + psia + psib)
        acc = acc + term
        if k > 2 and np.all(np.abs(term) <= rtol * np.maximum(np.abs(acc), 1e-300)):
            break
        coef *= (a + m + k) * (b + m + k) / ((k + 1.0) * (k + m + 1.0))
        power = power * w
        psi1 += 1.0 / (k + 1.0)
        psim += 1.0 / (k + m + 1.0)
        psia += 1.0 / (a + m + k)
        psib += 1.0 / (b + m + k)
    else:
        raise NumericError("2F1 logarithmic expansion did not converge")
    return gc * (finite - zm1**m * r0 * acc)


def _near_one(a, b, c, w):
    s = c - a - b
    m = round(s)
    delta = s - m
    if abs(delta) >= NEAR_INT:
        return _connection(a, b, c, w)
    if m < 0:
        # Euler: F(a,b;c;z) = w^s F(c-a, c-b; c; z) turns s into -s > 0.
        return w**s * _near_one(c - a, c - b, c, w)
    # F is analytic in c; interpolate through c - a - b = m - h, m, m + h.
    h = NEAR_INT
    f_mid = _log_case(a, b, m, w)
    if delta == 0.0:
        return f_mid
    base = a + b + m
    f_lo = _connection(a, b, base - h, w)
    f_hi = _connection(a, b, base + h, w)
    x = delta / h
    return f_mid + 0.5 * x * (f_hi - f_lo) + 0.5 * x * x * (f_hi - 2.0 * f_mid + f_lo)


def _hyp2f1(a, b, c, z):
    z = np.asarray(z, dtype=float)
    degree = _terminating_degree(a, b)
    if degree is not None:
        return _polynomial(a, b, c, z, degree)
    if _is_nonpos_int(c):
        raise DomainError(f"c = {c!r} is a non-positive integer")
    if np.any(z > 1.0) or np.any(z < -1.0):
        raise DomainError("z must lie in [-1, 1]")
    out = np.empty_like(z)
    at_one = z == 1.0
    neg = z < 0.0
    mid = (~at_one) & (~neg) & (z <= Z_SWITCH)
    high = (~at_one) & (z > Z_SWITCH)
    if np.any(at_one):
        out[at_one] = gauss_2f1_at_one(a, b, c)
    if np.any(mid):
        out[mid] = _series(a, b, c, z[mid])
    if np.any(high):
        out[high] = _near_one(a, b, c, 1.0 - z[high])
    if np.any(neg):
        zn = z[neg]
        # Pfaff: F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1)), image in (0, 1/2].
        out[neg] = (1.0 - zn) ** (-a) * _hyp2f1(a, c - b, c, zn / (zn - 1.0))
    return out


def _unpack(p, b, c, z):
    if isinstance(p, HyperParams):
        return p.a, p.b, p.c, p.z
    if b is None or c is None or z is None:
        raise TypeError("pass a HyperParams or all of a, b, c, z")
    return float(p), float(b), float(c), z


def gauss_2f1(p, b=None, c=None, z=None):
    """Gauss hypergeometric function F(a, b; c; z) for real z in [-1, 1].

    Call as ``gauss_2f1(HyperParams(a, b, c, z))`` or ``gauss_2f1(a, b, c, z)``;
    in the second form ``z`` may be an ndarray and an ndarray is returned.

    Terminating series are summed exactly.  For 0 < z <= 0.9 the power series
    is summed directly, for 0.9 < z < 1 the expansion in powers of 1 - z is
    used (with its logarithmic form when c - a - b is an integer), z = 1 uses
    Gauss's summation, and z < 0 goes through the Pfaff transformation.
    """
    a, b, c, z = _unpack(p, b, c, z)
    scalar = np.ndim(z) == 0
    zf = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zf == 1.0) and c - a - b <= 0.0 and _terminating_degree(a, b) is None:
        raise DomainError(f"F({a}, {b}; {c}; 1) diverges: c - a - b = {c - a - b} <= 0")
    out = _hyp2f1(a, b, c, zf)
    return float(out[0]) if scalar else out


def gauss_2f1_at_one(a: float, b: float, c: float) -> float:
    """Gauss summation F(a,b;c;1) = G(c)G(c-a-b) / (G(c-a)G(c-b)), needs c-a-b > 0."""
    s = c - a - b
    if s <= 0.0:
        raise DomainError(f"F(a,b;c;1) diverges for c - a - b = {s} <= 0")
    r = rgamma(c - a) * rgamma(c - b)
    if r == 0.0:
        return 0.0
    lg_c, sg_c = lgamma_signed(c)
    lg_s = log_gamma(s)
    lg_ca, sg_ca = lgamma_signed(c - a)
    lg_cb, sg_cb = lgamma_signed(c - b)
    return sg_c * sg_ca * sg_cb * math.exp(lg_c + lg_s - lg_ca - lg_cb)


def d_gauss_2f1_dz(p, b=None, c=None, z=None):
    """dF/dz = (ab/c) F(a+1, b+1; c+1; z)."""
    a, b, c, z = _unpack(p, b, c, z)
    if a == 0.0 or b == 0.0:
        return 0.0 if np.ndim(z) == 0 else np.zeros_like(np.asarray(z, dtype=float))
    return (a * b / c) * gauss_2f1(a + 1.0, b + 1.0, c + 1.0, z)
