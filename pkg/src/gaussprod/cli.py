"""Command-line front end: ``gaussprod {moment,bound,verify,sweep,hunt}``.

Data (JSON or CSV) goes to stdout or ``--out``; diagnostics go to stderr.
Exit codes: 0 success, 1 violation or candidate found, 2 usage or input
error, 3 numeric or capability error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .bounds import KINDS, InequalityCase
from .errors import CapabilityError, DomainError, NumericError
from .linalg import load_matrix
from .moments import mixed_moment
from .verifier import (
    SweepConfig,
    check_case,
    default_config,
    emit_report,
    hunt_gpi,
    load_config,
    self_test,
    sweep,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _alphas(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _attach_values(argv: list[str]) -> list[str]:
    """Glue ``--alpha -0.5,1`` into ``--alpha=-0.5,1`` so argparse does not read it as a flag."""
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--alpha" and i + 1 < len(argv):
            out.append(f"--alpha={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaussprod", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("moment", help="estimate E prod |X_j|^alpha_j")
    m.add_argument("--sigma", required=True, help='covariance JSON {"n": n, "rows": [[...]]}')
    m.add_argument("--alpha", required=True, type=_alphas, help="comma-separated exponents")
    m.add_argument("--method", default="auto", choices=["auto", "quad", "mc", "isserlis", "nabeya"])
    m.add_argument("--samples", type=int, default=200_000)
    m.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bound", help="check one inequality")
    b.add_argument("--kind", required=True, choices=KINDS)
    b.add_argument("--sigma", required=True)
    b.add_argument("--alpha", required=True, type=_alphas)
    b.add_argument("--split", type=int)
    b.add_argument("--method", default="auto", choices=["auto", "mc"])
    b.add_argument("--samples", type=int, default=200_000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--tolerance", type=float, default=1e-7)

    for name, text in (("sweep", "randomized checks of every inequality kind"),
                       ("verify", "harness self-test followed by a sweep")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", help="sweep config JSON (default: the shipped config)")
        s.add_argument("--out", default="-")
        s.add_argument("--format", default="json", choices=["json", "csv"])
        s.add_argument("--trials", type=int, help="override trials per kind")
        s.add_argument("--seed", type=int, help="override master seed")
        s.add_argument("--kinds", help="comma-separated subset of kinds")
        s.add_argument("--timestamp", action="store_true", help="add a timestamp to JSON output")

    h = sub.add_parser("hunt", help="Monte Carlo search for GPI violations")
    h.add_argument("--n", type=int, default=3)
    h.add_argument("--trials", type=int, default=1000)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--samples", type=int, default=20_000)
    h.add_argument("--alpha-max", type=float, default=4.0)
    h.add_argument("--even-only", action="store_true")
    h.add_argument("--out", default="-")
    h.add_argument("--format", default="json", choices=["json", "csv"])
    return p


def _config(args) -> SweepConfig:
    cfg = load_config(args.config) if args.config else default_config()
    d = cfg.to_dict()
    if args.trials is not None:
        d["trials"] = args.trials
    if args.seed is not None:
        d["master_seed"] = args.seed
    if args.kinds:
        d["kinds"] = [k.strip() for k in args.kinds.split(",") if k.strip()]
    return SweepConfig.from_dict(d)


def _log_summary(report, label: str) -> None:
    for kind, s in report.by_kind().items():
        print(f"{label} {kind}: {s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped",
              file=sys.stderr)


def _cmd_moment(args) -> int:
    S = load_matrix(args.sigma)
    est = mixed_moment(S, args.alpha, args.method, n_samples=args.samples, seed=args.seed)
    print(json.dumps(est.to_dict()))
    return EXIT_OK


def _cmd_bound(args) -> int:
    S = load_matrix(args.sigma)
    case = InequalityCase(args.kind, S, tuple(args.alpha), split=args.split, method=args.method,
                          n_samples=args.samples, seed=args.seed)
    res = check_case(case, args.tolerance)
    print(json.dumps(res.to_dict()))
    if res.status == "skipped":
        print(res.note, file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK if res.passed else EXIT_VIOLATION


def _cmd_sweep(args, with_self_test: bool) -> int:
    cfg = _config(args)
    if with_self_test:
        st = self_test()
        caught = sum(r.status == "fail" for r in st.results)
        print(f"self-test: {caught}/{len(st.results)} corrupted bounds rejected", file=sys.stderr)
        if caught != len(st.results):
            print("self-test failed: the checker accepted a corrupted bound", file=sys.stderr)
            return EXIT_VIOLATION
    report = sweep(cfg)
    emit_report(report, args.format, args.out, timestamp=args.timestamp)
    _log_summary(report, "sweep")
    return EXIT_VIOLATION if report.summary["failed"] else EXIT_OK


def _cmd_hunt(args) -> int:
    report = hunt_gpi(args.n, (1e-3, args.alpha_max), args.trials, args.seed, n_samples=args.samples,
                      even_only=args.even_only)
    emit_report(report, args.format, args.out)
    flagged = sum(bool(r.extras.get("candidate")) for r in report.results)
    print(f"hunt: {flagged} candidates, {report.summary['failed']} persisted on re-test", file=sys.stderr)
    return EXIT_VIOLATION if report.summary["failed"] else EXIT_OK


def run(argv=None) -> int:
    argv = _attach_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "moment":
            return _cmd_moment(args)
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command in ("sweep", "verify"):
            return _cmd_sweep(args, args.command == "verify")
        return _cmd_hunt(args)
    except (DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
