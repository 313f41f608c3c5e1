"""Randomized inequality sweeps, a Monte Carlo hunt for GPI violations, and reports.

Every case draws its matrix, exponents and Monte Carlo seed from one generator
seeded with ``master_seed ^ case_index``, so a case can be re-run in
isolation and results do not depend on execution order.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import linalg
from .bounds import KINDS, BoundResult, InequalityCase, evaluate
from .errors import CapabilityError, DomainError, NumericError
from .moments import abs_moment_1d, mc_mixed_moment

FAMILIES = ("gram_normalized", "equicorrelated", "near_singular", "nonneg_entries")
CSV_COLUMNS = ("case_id", "kind", "n", "alphas", "lhs", "lower", "upper", "slack_lower", "slack_upper",
               "method", "err", "pass", "seed")

# Admissible dimensions per kind and the defaults a sweep starts from.
KIND_N_LIMITS = {
    "thm1_1": (2, 5), "thm1_2": (2, 4), "remark_eq2": (2, 4), "prop1_3": (4, 4), "prop1_4": (3, 3),
    "prop1_5": (3, 3), "wei_a3": (2, 3), "opposite_n2": (2, 2), "gpi_n2": (2, 2), "even_gpi_1_6": (3, 3),
    "even_gpi_subset_1_7": (2, 5),
}
EDGE = 1e-3
DEFAULT_ALPHA = {
    "neg": [EDGE, 1.0 - EDGE],   # magnitudes of negative exponents
    "neg_mc": [EDGE, 0.45],      # ... when Monte Carlo evaluates the case (finite variance)
    "pos": [EDGE, 6.0],
    "even": [2, 4, 6],
}
KIND_DEFAULTS = {
    "thm1_2": {"mc_from_n": 4},
    "remark_eq2": {"n": [2, 3], "alpha": {"last": [1.0, 1.0]}},
    "even_gpi_subset_1_7": {"family": "nonneg_entries", "alpha": {"even": [2, 4]}},
}


# ----------------------------------------------------------------- matrices

def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _normalize(G: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.diag(G))
    R = G / np.outer(d, d)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R


def equicorrelation(n: int, rho: float) -> np.ndarray:
    """Unit diagonal with every off-diagonal entry rho; PD iff -1/(n-1) < rho < 1."""
    if n < 2 or not -1.0 / (n - 1) < rho < 1.0:
        raise DomainError(f"equicorrelation needs -1/(n-1) < rho < 1, got rho = {rho} for n = {n}")
    S = np.full((n, n), float(rho))
    np.fill_diagonal(S, 1.0)
    return S


def random_correlation(n: int, family: str = "gram_normalized", seed=0) -> np.ndarray:
    """Draw a PD correlation matrix from one of ``FAMILIES``.

    ``seed`` is an int or a ``numpy.random.Generator``.  Draws that fail the
    Cholesky test are resampled up to 100 times, after which the last draw is
    pulled toward the identity with ``shrink_to_pd``.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    rng = _rng(seed)
    R = None
    for _ in range(100):
        if family == "gram_normalized":
            W = rng.standard_normal((n, n))
            R = _normalize(W @ W.T)
        elif family == "equicorrelated":
            lo = -1.0 / (n - 1)
            R = equicorrelation(n, rng.uniform(lo + EDGE, 1.0 - EDGE))
        elif family == "near_singular":
            # rank n-1 Gram matrix pulled just inside the PD cone
            W = rng.standard_normal((n, n - 1))
            m = 10.0 ** rng.uniform(1.0, 3.0)
            R = linalg.shrink_to_pd(_normalize(W @ W.T), m)
        else:
            C = np.abs(rng.standard_normal((n, n)))
            R = _normalize(C.T @ C)
        if linalg.is_positive_definite(R):
            return R
    return linalg.shrink_to_pd(R, 100.0)


# ------------------------------------------------------------------- config

@dataclass
class SweepConfig:
    kinds: tuple[str, ...] = KINDS
    trials: int = 1000
    master_seed: int = 0
    matrix_family: str = "gram_normalized"
    tolerance_abs: float = 1e-7
    mc_fallback: bool = True
    mc_samples: int = 200_000
    n_range: tuple[int, int] | None = None
    per_kind: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        self.kinds = tuple(self.kinds)
        unknown = [k for k in self.kinds if k not in KINDS]
        if unknown:
            raise DomainError(f"unknown kinds: {unknown}")
        if self.trials < 0:
            raise DomainError("trials must be nonnegative")
        if not self.tolerance_abs > 0:
            raise DomainError("tolerance_abs must be positive")
        if self.matrix_family not in FAMILIES:
            raise DomainError(f"unknown family {self.matrix_family!r}")
        if self.n_range is not None:
            lo, hi = (int(x) for x in self.n_range)
            if not 2 <= lo <= hi:
                raise DomainError("n_range must satisfy 2 <= lo <= hi")
            self.n_range = (lo, hi)
        for k in self.per_kind:
            if k not in KINDS:
                raise DomainError(f"per_kind names unknown kind {k!r}")

    def settings(self, kind: str) -> dict:
        """Effective n range, family, exponent ranges and MC switch for one kind."""
        base = copy.deepcopy(KIND_DEFAULTS.get(kind, {}))
        over = self.per_kind.get(kind, {})
        alpha = dict(DEFAULT_ALPHA)
        alpha.update(base.get("alpha", {}))
        alpha.update(over.get("alpha", {}))
        lo, hi = KIND_N_LIMITS[kind]
        n = over.get("n", base.get("n"))
        if n is None and self.n_range is not None:
            n = self.n_range
        if n is not None:
            lo, hi = max(lo, int(n[0])), min(hi, int(n[1]))
        if lo > hi:
            raise DomainError(f"{kind}: empty dimension range")
        return {
            "n": (lo, hi),
            "family": over.get("family", base.get("family", self.matrix_family)),
            "alpha": alpha,
            "mc_from_n": over.get("mc_from_n", base.get("mc_from_n")),
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kinds"] = list(self.kinds)
        d["n_range"] = list(self.n_range) if self.n_range else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown config keys: {sorted(extra)}")
        d = dict(d)
        if d.get("n_range") is not None:
            d["n_range"] = tuple(d["n_range"])
        return cls(**d)


def load_config(path) -> SweepConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"config is not valid JSON: {exc}") from exc
    return SweepConfig.from_dict(data)


def default_config() -> SweepConfig:
    text = resources.files("gaussprod").joinpath("data/default_sweep.json").read_text()
    return SweepConfig.from_dict(json.loads(text))


# ------------------------------------------------------------------ results

@dataclass
class CaseResult:
    case_id: int
    kind: str
    n: int
    sigma: list
    alphas: list
    lhs: float | None
    lower: float | None
    upper: float | None
    slack_lower: float | None
    slack_upper: float | None
    method: str | None
    err: float | None
    passed: bool | None
    seed: int
    split: int | None = None
    status: str = "pass"
    note: str = ""
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        order = ["case_id", "kind", "n", "alphas", "split", "lhs", "lower", "upper", "slack_lower",
                 "slack_upper", "method", "err", "pass", "status", "seed", "note", "sigma", "extras"]
        return {k: d[k] for k in order}

    @classmethod
    def from_dict(cls, d: dict) -> "CaseResult":
        d = dict(d)
        d["passed"] = d.pop("pass")
        return cls(**d)


@dataclass
class Report:
    config: dict
    results: list[CaseResult]

    @property
    def summary(self) -> dict:
        status = [r.status for r in self.results]
        return {
            "total": len(status),
            "passed": status.count("pass"),
            "failed": status.count("fail"),
            "skipped": status.count("skipped"),
        }

    @property
    def failures(self) -> list[CaseResult]:
        return [r for r in self.results if r.status == "fail"]

    def by_kind(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for r in self.results:
            s = out.setdefault(r.kind, {"total": 0, "passed": 0, "failed": 0, "skipped": 0})
            s["total"] += 1
            s[{"pass": "passed", "fail": "failed", "skipped": "skipped"}[r.status]] += 1
        return out

    def to_dict(self, *, timestamp: bool = False) -> dict:
        d = {"config": self.config, "results": [r.to_dict() for r in self.results], "summary": self.summary}
        if timestamp:
            d["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(d["config"], [CaseResult.from_dict(r) for r in d["results"]])


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _result_from_bound(case_id, case: InequalityCase, res: BoundResult, tol: float, seed: int) -> CaseResult:
    slack_ok = []
    for slack in (res.slack_lower, res.slack_upper):
        if slack is not None:
            slack_ok.append(slack >= -(res.err + tol))
    passed = all(slack_ok)
    extras = dict(res.extras)
    if res.lhs.flags:
        extras["flags"] = list(res.lhs.flags)
    return CaseResult(
        case_id=case_id, kind=case.kind, n=case.n, sigma=case.sigma.tolist(), alphas=list(case.alphas),
        lhs=res.lhs.value, lower=_finite(res.lower), upper=_finite(res.upper),
        slack_lower=_finite(res.slack_lower), slack_upper=_finite(res.slack_upper),
        method=res.method, err=res.err, passed=passed, seed=seed, split=case.split,
        status="pass" if passed else "fail", extras=extras,
    )


def _corrupt(res: BoundResult, factor: float) -> BoundResult:
    """Tighten each bound by ``factor``: lower * factor, upper / factor."""
    return replace(
        res,
        lower=None if res.lower is None else res.lower * factor,
        upper=None if res.upper is None else res.upper / factor,
        extras={**res.extras, "corrupted_by": factor},
    )


def check_case(case: InequalityCase, tolerance_abs: float = 1e-7, *, case_id: int = 0,
               mc_fallback: bool = False, corrupt: float | None = None) -> CaseResult:
    """Evaluate one case and decide pass: every slack >= -(err + tolerance_abs).

    Capability errors fall back to Monte Carlo when ``mc_fallback`` is set and
    are otherwise recorded as skipped, as are numeric errors.  ``corrupt``
    tightens the bounds by that factor, for checking that the harness can fail.
    """
    note = ""
    try:
        try:
            res = evaluate(case)
        except CapabilityError as exc:
            if not mc_fallback or case.method == "mc":
                raise
            note = f"mc fallback: {exc}"
            case = replace(case, method="mc")
            res = evaluate(case)
    except (CapabilityError, NumericError) as exc:
        return CaseResult(
            case_id=case_id, kind=case.kind, n=case.n, sigma=case.sigma.tolist(), alphas=list(case.alphas),
            lhs=None, lower=None, upper=None, slack_lower=None, slack_upper=None, method=None, err=None,
            passed=None, seed=case.seed, split=case.split, status="skipped",
            note=f"{type(exc).__name__}: {exc}",
        )
    if corrupt is not None:
        res = _corrupt(res, corrupt)
    out = _result_from_bound(case_id, case, res, tolerance_abs, case.seed)
    out.note = note
    return out


# -------------------------------------------------------------------- sweeps

def _uniform(rng, bounds, size=None):
    lo, hi = bounds
    return rng.uniform(lo, hi, size) if hi > lo else np.full(size if size else (), float(lo))


def sample_alphas(kind: str, n: int, rng, alpha: dict, mc: bool = False) -> list[float]:
    """Signed exponents meeting ``kind``'s hypotheses, drawn from the ``alpha`` ranges."""
    neg_range = alpha["neg_mc"] if mc else alpha["neg"]

    def neg(size=None):
        return -_uniform(rng, neg_range, size)

    def pos(size=None):
        return _uniform(rng, alpha["pos"], size)

    def even(size):
        return rng.choice(np.asarray(alpha["even"], dtype=float), size)

    if kind == "thm1_1":
        a = [neg()] + [2.0] * (n - 1)
    elif kind in ("thm1_2", "remark_eq2"):
        last = alpha.get("last", alpha["pos"])
        a = list(neg(n - 1)) + [float(_uniform(rng, last))]
    elif kind == "prop1_3":
        a = [neg()] + list(even(3))
    elif kind == "prop1_4":
        a = [neg()] + list(pos(2))
    elif kind == "prop1_5":
        a = list(neg(2)) + [pos()]
    elif kind == "wei_a3":
        a = list(neg(n))
    elif kind == "opposite_n2":
        a = [neg(), pos()]
    elif kind == "gpi_n2":
        a = list(pos(2))
    else:
        a = list(even(n))
    return [float(x) for x in a]


def build_case(kind: str, case_id: int, config: SweepConfig) -> InequalityCase:
    seed = config.master_seed ^ case_id
    rng = np.random.default_rng(seed)
    st = config.settings(kind)
    lo, hi = st["n"]
    n = int(rng.integers(lo, hi + 1))
    S = random_correlation(n, st["family"], rng)
    mc = st["mc_from_n"] is not None and n >= st["mc_from_n"]
    alphas = sample_alphas(kind, n, rng, st["alpha"], mc)
    split = int(rng.integers(1, n)) if kind in ("wei_a3", "even_gpi_subset_1_7") else None
    return InequalityCase(kind, S, alphas, split=split, method="mc" if mc else "auto",
                          n_samples=config.mc_samples, seed=seed)


def _run_one(args):
    kind, case_id, config = args
    case = build_case(kind, case_id, config)
    return check_case(case, config.tolerance_abs, case_id=case_id, mc_fallback=config.mc_fallback)


def sweep(config: SweepConfig, *, progress=None) -> Report:
    """One CaseResult per (kind, trial), in case-index order."""
    jobs = [(kind, i * config.trials + t, config) for i, kind in enumerate(config.kinds)
            for t in range(config.trials)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=16))
    else:
        results = []
        for job in jobs:
            results.append(_run_one(job))
            if progress is not None:
                progress(results[-1])
    return Report(config.to_dict(), results)


def identity_cases() -> list[InequalityCase]:
    """One case per kind on independent coordinates, where every bound is attained."""
    alphas = {
        "thm1_1": (-0.5, 2, 2), "thm1_2": (-0.5, -0.3, 1.5), "remark_eq2": (-0.5, -0.3, 1.0),
        "prop1_3": (-0.5, 2, 4, 2), "prop1_4": (-0.5, 1.0, 1.0), "prop1_5": (-0.5, -0.3, 3.0),
        "wei_a3": (-0.5, -0.3, -0.7), "opposite_n2": (-0.5, 1.5), "gpi_n2": (0.7, 1.5),
        "even_gpi_1_6": (2, 4, 2), "even_gpi_subset_1_7": (2, 2, 4),
    }
    return [InequalityCase(k, np.eye(len(a)), a, split=1 if k in ("wei_a3", "even_gpi_subset_1_7") else None)
            for k, a in alphas.items()]


def self_test(factor: float = 1.5, tolerance_abs: float = 1e-7) -> Report:
    """Corrupted-bound cases; a working checker fails every one of them."""
    results = [check_case(c, tolerance_abs, case_id=i, corrupt=factor) for i, c in enumerate(identity_cases())]
    return Report({"self_test": True, "factor": factor}, results)


# -------------------------------------------------------------------- hunter

def hunt_gpi(n: int = 3, alpha_bounds: tuple[float, float] = (EDGE, 4.0), trials: int = 1000,
             master_seed: int = 0, *, n_samples: int = 20_000, sigmas: float = 6.0, retest_factor: int = 100,
             even_only: bool = False, family: str = "gram_normalized", inject=None) -> Report:
    """Monte Carlo search for E prod |X_j|^a_j < prod E|X_j|^a_j with positive exponents.

    A trial is a candidate when ``lhs + sigmas * stderr < rhs``; candidates are
    re-sampled with ``retest_factor`` times more draws and an independent seed,
    and fail only if the violation persists.  ``inject(trial, estimate)`` may
    replace the lhs estimate, which lets tests plant a fake violation.
    ``even_only`` draws exponents from {2, 4, 6}, where the inequality is known.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    lo, hi = alpha_bounds
    if not 0 < lo < hi:
        raise DomainError("alpha bounds must satisfy 0 < lo < hi")
    results = []
    for t in range(trials):
        seed = master_seed ^ t
        rng = np.random.default_rng(seed)
        S = random_correlation(n, family, rng)
        if even_only:
            a = rng.choice([2.0, 4.0, 6.0], n)
        else:
            a = rng.uniform(lo, hi, n)
            while np.any(np.mod(a, 2.0) == 0.0):
                a = rng.uniform(lo, hi, n)
        rhs = float(np.prod([abs_moment_1d(x) for x in a]))

        def estimate(samples, s):
            est = mc_mixed_moment(S, a, samples, s)
            return inject(t, est) if inject is not None else est

        est = estimate(n_samples, seed)
        candidate = est.value + sigmas * est.err < rhs
        note = ""
        status = "pass"
        if candidate:
            est = estimate(n_samples * retest_factor, seed ^ (1 << 32))
            if est.value + sigmas * est.err < rhs:
                status, note = "fail", "candidate violation persisted on re-test"
            else:
                note = "candidate cleared on re-test"
        results.append(CaseResult(
            case_id=t, kind="gpi_hunt", n=n, sigma=S.tolist(), alphas=[float(x) for x in a], lhs=est.value,
            lower=rhs, upper=None, slack_lower=est.value - rhs, slack_upper=None, method=est.method,
            err=sigmas * est.err, passed=status == "pass", seed=seed, status=status, note=note,
            extras={"samples": est.samples, "candidate": bool(candidate)},
        ))
    config = {"n": n, "alpha_bounds": [lo, hi], "trials": trials, "master_seed": master_seed,
              "n_samples": n_samples, "sigmas": sigmas, "retest_factor": retest_factor,
              "even_only": even_only, "family": family}
    return Report(config, results)


# ------------------------------------------------------------------- output

def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.results:
        d = r.to_dict()
        d["alphas"] = ";".join(repr(float(a)) for a in r.alphas)
        d["pass"] = "skipped" if r.status == "skipped" else d["pass"]
        w.writerow([_csv_value(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def report_to_json(report: Report, *, timestamp: bool = False) -> str:
    return json.dumps(report.to_dict(timestamp=timestamp), indent=2) + "\n"


def emit_report(report: Report, fmt: str = "json", path=None, *, timestamp: bool = False) -> None:
    """Write the report as JSON or CSV to ``path`` (stdout when None or "-")."""
    if fmt == "json":
        text = report_to_json(report, timestamp=timestamp)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise DomainError(f"format must be json or csv, got {fmt!r}")
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def load_report(path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text()))
