"""Command-line entry point: ``bestprox {check,solve,oracle,corpus,validate}``.

Exit codes:
  0  every requested check holds (or is vacuous), the solver converged, the
     oracle agrees, or every corpus entry passes
  1  a check fails, the solver stops without converging, the oracle
     disagrees, or a corpus entry fails
  2  invalid invocation (bad flags, unknown check, bad tolerance)
  3  problem file not found or unreadable
  4  problem file invalid (diagnostics carry line numbers)
  5  evaluation error while running (e.g. division by zero in Phi or F)
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import checkers, corpus, reports, solver
from .core import DEFAULT_EPS_EQ, ProblemInstance, as_point, proximal_indices, range_warnings
from .expr import ExprError
from .oracle import oracle_vs_solver
from .problem_file import ProblemFileError, validate_file

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_PARSE, EXIT_EVAL = range(6)

log = logging.getLogger("bestprox")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    builtin: Optional[str] = None
    file: Optional[str] = None
    defs: list = field(default_factory=list)
    eps_eq: Optional[float] = None
    conv_tol: float = solver.DEFAULT_CONV_TOL
    max_iters: int = solver.DEFAULT_MAX_ITERS
    fmt: str = "text"
    trace: Optional[str] = None
    threads: int = 1
    start: Optional[tuple] = None
    rate: bool = False
    names: list = field(default_factory=list)
    export: Optional[str] = None

    def validate(self) -> None:
        if self.command in ("check", "solve", "oracle"):
            if (self.builtin is None) == (self.file is None):
                raise UsageError("give exactly one of --builtin NAME or --file PATH")
        if self.command == "validate" and self.file is None:
            raise UsageError("validate needs --file PATH")
        unknown = [d for d in self.defs if d not in checkers.CHECKS]
        if unknown:
            raise UsageError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(checkers.CHECKS)}")
        if self.builtin is not None and self.builtin not in corpus.NAMES:
            raise UsageError(f"unknown builtin {self.builtin!r}; choose from {', '.join(corpus.NAMES)}")
        bad = [n for n in self.names if n not in corpus.NAMES]
        if bad:
            raise UsageError(f"unknown builtin(s): {', '.join(bad)}")
        if self.eps_eq is not None and not self.eps_eq > 0:
            raise UsageError("--eps-eq must be > 0")
        if not self.conv_tol >= 0:
            raise UsageError("--conv-tol must be >= 0")
        if self.max_iters < 1:
            raise UsageError("--max-iters must be a positive integer")
        if self.threads < 1:
            raise UsageError("--threads must be a positive integer")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _point(text: str) -> tuple:
    try:
        return as_point(float(c) for c in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated coordinates, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bestprox",
        description="Check proximal-contraction conditions, run the proximal iteration and "
                    "compare with a brute-force oracle on finite instances.",
        epilog="Exit codes: 0 ok, 1 verdict failure, 2 invalid invocation, 3 file not found, "
               "4 invalid problem file, 5 evaluation error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--builtin", metavar="NAME", help=f"built-in instance: {', '.join(corpus.NAMES)}")
    src.add_argument("--file", metavar="PATH", help="problem-definition file (YAML)")
    common.add_argument("--eps-eq", type=float, metavar="X",
                        help=f"override the |Phi| = D matching tolerance (instance default, usually {DEFAULT_EPS_EQ:g})")
    common.add_argument("--format", dest="fmt", choices=("text", "structured"), default="text",
                        help="output format (default: text)")
    common.add_argument("--threads", type=_positive_int, default=1, metavar="N",
                        help="worker threads for pairwise scans (default: 1; output is identical for any N)")
    common.add_argument("-v", "--verbose", action="store_true", help="log warnings to stderr")

    solve_opts = argparse.ArgumentParser(add_help=False)
    solve_opts.add_argument("--conv-tol", type=float, default=solver.DEFAULT_CONV_TOL, metavar="X",
                            help=f"stop when |Phi(x_n, x_n+1)| <= X (default: {solver.DEFAULT_CONV_TOL:g})")
    solve_opts.add_argument("--max-iters", type=_positive_int, default=solver.DEFAULT_MAX_ITERS, metavar="N",
                            help=f"iteration cap (default: {solver.DEFAULT_MAX_ITERS})")
    solve_opts.add_argument("--start", type=_point, metavar="X1,X2,...",
                            help="start point in Re_Phi (default: first point of Re_Phi)")
    solve_opts.add_argument("--trace", metavar="PATH", help="write the iteration trace as CSV")

    p = sub.add_parser("check", parents=[common], help="run contraction/axiom checks")
    p.add_argument("--def", dest="defs", action="append", default=[], metavar="NAME",
                   help=f"check to run, repeatable (default: all): {', '.join(checkers.CHECKS)}")

    p = sub.add_parser("solve", parents=[common, solve_opts], help="run the proximal iteration")
    p.add_argument("--rate", action="store_true",
                   help="also check the geometric rate bound using min_c of the p-proximal contraction check")

    sub.add_parser("oracle", parents=[common, solve_opts], help="compare the solver with the brute-force oracle")

    p = sub.add_parser("corpus", parents=[common], help="run the built-in regression corpus")
    p.add_argument("--name", dest="names", action="append", default=[], metavar="NAME",
                   help="restrict to these entries (repeatable)")
    p.add_argument("--export", metavar="DIR", help="write every builtin as a problem file into DIR and exit")

    sub.add_parser("validate", parents=[common], help="validate a problem file")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        builtin=ns.builtin,
        file=ns.file,
        defs=list(getattr(ns, "defs", [])),
        eps_eq=ns.eps_eq,
        conv_tol=getattr(ns, "conv_tol", solver.DEFAULT_CONV_TOL),
        max_iters=getattr(ns, "max_iters", solver.DEFAULT_MAX_ITERS),
        fmt=ns.fmt,
        trace=getattr(ns, "trace", None),
        threads=ns.threads,
        start=getattr(ns, "start", None),
        rate=getattr(ns, "rate", False),
        names=list(getattr(ns, "names", [])),
        export=getattr(ns, "export", None),
    )


def load_instance(cfg: RunConfig) -> ProblemInstance:
    if cfg.builtin is not None:
        inst = corpus.load_builtin(cfg.builtin).instance
    else:
        inst = validate_file(cfg.file)
    if cfg.eps_eq is not None:
        inst = inst.with_eps(cfg.eps_eq)
    return inst


def _warnings(inst: ProblemInstance) -> list:
    out = range_warnings(inst)
    if not out:
        return []
    worst = max(d for _, _, d in out)
    return [f"F maps {len(out)} of {len(inst.Re)} point(s) of Re outside Om (max distance {worst:.6g})"]


def _solve_body(inst, cfg) -> tuple:
    trace = solver.iterate(inst, cfg.start, cfg.max_iters, cfg.conv_tol)
    if cfg.trace:
        with open(cfg.trace, "w", newline="") as fh:
            fh.write(trace.to_csv())
    return trace, trace.summary()


def run(cfg: RunConfig) -> tuple:
    """Execute ``cfg``; returns ``(exit_status, document)``."""
    cfg.validate()
    if cfg.command == "corpus":
        if cfg.export:
            paths = corpus.export_all(cfg.export)
            return EXIT_OK, reports.document("export", None, {"files": [str(p) for p in paths]})
        names = cfg.names or list(corpus.NAMES)
        results = corpus.run_regressions(names, threads=cfg.threads)
        entries = [r.to_dict() for r in results]
        passed = sum(r.passed for r in results)
        body = {"entries": entries, "summary": {"total": len(results), "passed": passed}}
        return (EXIT_OK if passed == len(results) else EXIT_FAIL), reports.document("corpus", None, body)

    inst = load_instance(cfg)
    if cfg.command == "validate":
        return EXIT_OK, reports.document("validate", inst, {"valid": True})

    D, _, _ = proximal_indices(inst)
    body = {"d_phi": D, "warnings": _warnings(inst)}
    if cfg.command == "check":
        reps = checkers.run_checks(inst, cfg.defs or None, cfg.threads)
        body["reports"] = [r.to_dict() for r in reps]
        status = EXIT_FAIL if any(r.verdict == checkers.FAILS for r in reps) else EXIT_OK
        return status, reports.document("check", inst, body)

    if cfg.command == "solve":
        trace, summary = _solve_body(inst, cfg)
        status = EXIT_OK if trace.status == solver.CONVERGED else EXIT_FAIL
        if cfg.rate:
            rep = checkers.check_p_proximal_contraction(inst, cfg.threads)
            exact = trace.exact_prefix(inst.eps_eq)
            if rep.verdict == checkers.HOLDS and rep.min_c < 1 and len(exact.points) >= 2:
                # the bound covers steps that meet |Phi| = D exactly, not grid-slack steps
                rr = solver.rate_check(exact, rep.min_c)
                summary["rate"] = {"c": rep.min_c, "factor": rr.factor, "holds": rr.holds,
                                   "first_violation": rr.first_violation, "steps_checked": exact.iterations}
            elif rep.verdict == checkers.HOLDS and rep.min_c < 1:
                summary["rate"] = {"c": rep.min_c, "factor": 2 * rep.min_c / (1 + rep.min_c), "holds": True,
                                   "first_violation": None, "steps_checked": 0}
                if not rr.holds:
                    status = EXIT_FAIL
            else:
                summary["rate"] = {"c": rep.min_c, "factor": None, "holds": False, "first_violation": None,
                                   "reason": f"p-proximal-contraction {rep.verdict}"}
                status = EXIT_FAIL
        body["solve"] = summary
        return status, reports.document("solve", inst, body)

    if cfg.command == "oracle":
        trace, summary = _solve_body(inst, cfg)
        agreement = oracle_vs_solver(inst, trace, threads=cfg.threads)
        body["solve"] = summary
        body["oracle"] = agreement.to_dict()
        return (EXIT_OK if agreement.agree else EXIT_FAIL), reports.document("oracle", inst, body)

    raise UsageError(f"unknown command {cfg.command!r}")


def _emit(doc: dict, fmt: str, out) -> None:
    if fmt == "structured":
        out.write(reports.dumps(doc))
    elif doc["command"] == "export":
        out.write("".join(f"wrote {p}\n" for p in doc["files"]))
    else:
        out.write(reports.render_text(doc))


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if ns.verbose else logging.ERROR,
                        format="%(levelname)s: %(message)s")
    cfg = config_from_args(ns)
    err = sys.stderr
    try:
        status, doc = run(cfg)
    except UsageError as exc:
        parser.print_usage(err)
        err.write(f"bestprox: error: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        err.write(f"bestprox: file not found: {exc.filename or exc}\n")
        return EXIT_NOT_FOUND
    except (IsADirectoryError, PermissionError) as exc:
        err.write(f"bestprox: cannot read {exc.filename or exc}\n")
        return EXIT_NOT_FOUND
    except ProblemFileError as exc:
        err.write(f"bestprox: {exc}\n")
        return EXIT_PARSE
    except (ExprError, solver.SolverError) as exc:
        err.write(f"bestprox: evaluation error: {exc}\n")
        return EXIT_EVAL
    _emit(doc, cfg.fmt, sys.stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())
