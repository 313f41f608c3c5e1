"""Quadrature rules used by the moment reductions.

Two integrators live here:

* ``gauss_kronrod`` -- adaptive 7/15-point Gauss-Kronrod bisection on a finite
  interval, with a vectorized integrand.
* ``beta_expectation`` -- tensor Gauss-Jacobi rules for expectations under a
  product of Beta laws, refined by doubling the node count until two successive
  rules agree.  This is the workhorse for the negative-power reductions, whose
  measures become products of Beta(alpha/2, (1 - alpha)/2) laws.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import NumericError
from .specfun import log_gamma

# Kronrod abscissae on [0, 1] (symmetric about 0); odd indices are the Gauss points.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk_panels(f, lo, hi):
    """Apply the 15-point rule to every panel [lo_i, hi_i] with one call to f."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    kron = half * (fx @ _KWEIGHTS)
    gauss = half * (fx @ _GWEIGHTS)
    return kron, np.abs(kron - gauss)


def gauss_kronrod(f, a: float, b: float, *, epsabs: float = 1e-13, epsrel: float = 1e-12,
                  limit: int = 2000, initial: int = 4):
    """Adaptive G7/K15 integration of a vectorized ``f`` over ``[a, b]``.

    Returns ``(value, error_estimate)``.  The panel with the largest local error
    is bisected until the summed error meets ``max(epsabs, epsrel * |value|)``.
    Raises ``NumericError`` if ``limit`` panels are not enough.
    """
    edges = np.linspace(a, b, initial + 1)
    kron, err = _gk_panels(f, edges[:-1], edges[1:])
    counter = itertools.count()
    heap = [(-e, next(counter), lo, hi, k) for lo, hi, k, e in zip(edges[:-1], edges[1:], kron, err)]
    heapq.heapify(heap)
    total = float(np.sum(kron))
    total_err = float(np.sum(err))
    while total_err > max(epsabs, epsrel * abs(total)):
        if len(heap) >= limit:
            raise NumericError(f"gauss_kronrod hit the {limit}-panel limit (err {total_err:.3g})",
                               partial=total)
        # Split a batch of the worst panels at once to keep numpy calls few.
        batch = [heapq.heappop(heap) for _ in range(min(len(heap), 8))]
        los = np.array([p[2] for p in batch])
        his = np.array([p[3] for p in batch])
        mids = 0.5 * (los + his)
        k2, e2 = _gk_panels(f, np.concatenate([los, mids]), np.concatenate([mids, his]))
        m = len(batch)
        for i, p in enumerate(batch):
            total += k2[i] + k2[m + i] - p[4]
            total_err += e2[i] + e2[m + i] + p[0]
            heapq.heappush(heap, (-e2[i], next(counter), los[i], mids[i], k2[i]))
            heapq.heappush(heap, (-e2[m + i], next(counter), mids[i], his[i], k2[m + i]))
    # fresh sums; the running totals above accumulate cancellation
    return float(np.sum([p[4] for p in heap])), float(np.sum([-p[0] for p in heap]))


@lru_cache(maxsize=4096)
def beta_rule(n: int, p: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes/weights on [0, 1] for the density of Beta(p, q).

    The weights sum to one, so ``w @ f(u)`` approximates ``E f(U)``.
    """
    u, _, w = graded_beta_rule(n, p, q, 0)
    return u, w


def _log_beta(p: float, q: float) -> float:
    return log_gamma(p) + log_gamma(q) - log_gamma(p + q)


@lru_cache(maxsize=4096)
def graded_beta_rule(m: int, p: float, q: float, levels: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composite Beta(p, q) rule on panels that shrink geometrically toward u = 1.

    Panel edges are 0, 1/2, 3/4, ..., 1 - 2^-levels, 1, with ``m`` nodes each.
    The end panels absorb the endpoint powers into Gauss-Jacobi weights; interior
    panels use Gauss-Legendre.  Returns ``(u, v, w)`` with ``v = 1 - u`` computed
    without cancellation, which matters when an integrand varies on a scale
    much smaller than 1 near u = 1.  ``levels = 0`` is the plain Gauss-Jacobi rule.
    """
    lb = _log_beta(p, q)
    if levels == 0:
        x, wx = roots_jacobi(m, q - 1.0, p - 1.0)
        u, v = 0.5 * (1.0 + x), 0.5 * (1.0 - x)
        return _frozen(u, v, wx / wx.sum())
    us, vs, ws = [], [], []
    # [0, 1/2]: weight u^(p-1), smooth factor (1-u)^(q-1)
    x, wx = roots_jacobi(m, 0.0, p - 1.0)
    u = 0.25 * (1.0 + x)
    us.append(u)
    vs.append(1.0 - u)
    ws.append(wx * 0.25**p * (1.0 - u) ** (q - 1.0) * np.exp(-lb))
    # interior panels [1 - 2^-j, 1 - 2^-(j+1)]
    x, wx = np.polynomial.legendre.leggauss(m)
    for j in range(1, levels):
        h = 2.0 ** -(j + 1)
        v = h + h * 0.5 * (1.0 - x)
        u = 1.0 - v
        us.append(u)
        vs.append(v)
        ws.append(wx * 0.5 * h * u ** (p - 1.0) * v ** (q - 1.0) * np.exp(-lb))
    # [1 - h, 1]: weight (1-u)^(q-1), smooth factor u^(p-1)
    h = 2.0 ** -levels
    x, wx = roots_jacobi(m, q - 1.0, 0.0)
    v = 0.5 * h * (1.0 - x)
    u = 1.0 - v
    us.append(u)
    vs.append(v)
    ws.append(wx * (0.5 * h) ** q * u ** (p - 1.0) * np.exp(-lb))
    return _frozen(np.concatenate(us), np.concatenate(vs), np.concatenate(ws))


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays


@dataclass(frozen=True)
class QuadResult:
    value: float
    err: float
    nodes: int
    converged: bool


def _tensor_sum(f, rules, complement: bool, chunk: int) -> float:
    """Sum of w * f over the tensor grid, evaluated in slabs of at most ``chunk`` points."""
    k = len(rules)
    if k == 1:
        u, v, w = rules[0]
        vals = f(u[:, None], v[:, None]) if complement else f(u[:, None])
        return float(w @ np.asarray(vals, dtype=float))
    rest = rules[1:]
    ru = np.stack([g.ravel() for g in np.meshgrid(*[r[0] for r in rest], indexing="ij")], axis=1)
    rv = np.stack([g.ravel() for g in np.meshgrid(*[r[1] for r in rest], indexing="ij")], axis=1)
    rw = np.ones(1)
    for r in rest:
        rw = np.outer(rw, r[2]).ravel()
    u0, v0, w0 = rules[0]
    step = max(1, chunk // len(rw))
    total = 0.0
    for s in range(0, len(u0), step):
        b = len(u0[s:s + step])
        U = np.concatenate([np.repeat(u0[s:s + step], len(rw))[:, None], np.tile(ru, (b, 1))], axis=1)
        if complement:
            V = np.concatenate([np.repeat(v0[s:s + step], len(rw))[:, None], np.tile(rv, (b, 1))], axis=1)
            vals = f(U, V)
        else:
            vals = f(U)
        total += float(np.outer(w0[s:s + step], rw).ravel() @ np.asarray(vals, dtype=float))
    return total


def beta_expectation(f, shapes, *, rtol: float = 1e-10, atol: float = 1e-300, n_start: int = 8,
                     n_max: int = 1024, max_points: int = 2_500_000, levels=0, complement: bool = False,
                     chunk: int = 1 << 18):
    """E f(U_1, ..., U_k) for independent U_i ~ Beta(p_i, q_i).

    ``f`` takes an ``(m, k)`` array of node coordinates and returns ``m`` values;
    with ``complement=True`` it is called as ``f(U, V)`` where ``V = 1 - U`` is
    supplied to full relative accuracy.  ``levels`` (an int or one per axis)
    selects graded panels toward 1, see ``graded_beta_rule``.

    The per-panel rule size doubles from ``n_start`` until two successive tensor
    rules differ by at most ``max(atol, rtol * |value|)``; that difference is the
    reported error.  The loop also stops when the next rule would exceed
    ``n_max`` nodes per axis or ``max_points`` nodes in total; ``converged`` is
    then False.
    """
    shapes = [(float(p), float(q)) for p, q in shapes]
    k = len(shapes)
    lv = [int(levels)] * k if np.ndim(levels) == 0 else [int(x) for x in levels]
    prev = None
    n = n_start
    while True:
        rules = [graded_beta_rule(n, p, q, L) for (p, q), L in zip(shapes, lv)]
        value = _tensor_sum(f, rules, complement, chunk)
        if prev is not None:
            err = abs(value - prev)
            if err <= max(atol, rtol * abs(value)):
                return QuadResult(value, err, n, True)
        nxt = 2 * n
        sizes = [nxt * (L + 1) for L in lv]
        if max(sizes) > n_max or np.prod(sizes, dtype=float) > max_points:
            err = abs(value - prev) if prev is not None else abs(value)
            return QuadResult(value, err, n, False)
        prev = value
        n = nxt
