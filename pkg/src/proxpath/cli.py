"""Command-line front end: ``proxpath solve ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
from typing import List, Optional

import numpy as np

from . import graphio, pathfollow, problems
from .errors import GraphParseError, InitializationError, InvalidInputError, ProxPathError

EXIT_OK = 0
EXIT_CAP = 2
EXIT_SUBSOLVER = 3
EXIT_USAGE = 64
EXIT_PARSE = 65

STATUS_EXIT = {
    pathfollow.STATUS_CONVERGED: EXIT_OK,
    pathfollow.STATUS_CAP: EXIT_CAP,
    pathfollow.STATUS_SUBSOLVER: EXIT_SUBSOLVER,
}
TRACE_HEADER = ["k", "t", "objective", "sub_iters", "gap_bound", "wall_ms"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default, which collides with the
    # iteration-cap code
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> List[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of reals, got {text!r}")


def _t0(text: str):
    if text == "auto":
        return None
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--t0 must be 'auto' or a positive real, got {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("--t0 must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="proxpath", description="Proximal path-following interior-point solver.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    s = sub.add_parser("solve", help="solve one problem instance")
    s.add_argument("--problem", required=True, choices=["maxcut", "maxkcut", "boxlp"])
    s.add_argument("--graph", help="graph file for maxcut/maxkcut")
    s.add_argument("--c", type=_float_list, help="boxlp cost vector, comma separated")
    s.add_argument("--l", type=_float_list, help="boxlp lower bounds")
    s.add_argument("--u", type=_float_list, help="boxlp upper bounds")
    s.add_argument("--k", type=int, help="number of parts for maxkcut")
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--t0", type=_t0, default=None, metavar="{auto|REAL}")
    s.add_argument("--x0", choices=["auto", "identity"], default="auto")
    s.add_argument("--exact-variant", action="store_true")
    s.add_argument("--max-iters", type=int, default=100_000)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--trace", metavar="PATH.csv")
    s.add_argument("--out", metavar="PATH.json")
    s.add_argument("--quiet", action="store_true")
    return p


def _load_problem(ns):
    if ns.problem == "boxlp":
        if ns.c is None or ns.l is None or ns.u is None:
            raise UsageError("boxlp needs --c, --l and --u")
        if ns.graph is not None:
            raise UsageError("--graph is not used by boxlp")
        return problems.box_lp(ns.c, ns.l, ns.u)
    if ns.graph is None:
        raise UsageError(f"{ns.problem} needs --graph")
    try:
        with open(ns.graph, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read graph file: {exc}")
    L = graphio.laplacian(graphio.parse_graph(text))
    signed = bool(np.any(L[~np.eye(L.shape[0], dtype=bool)] > 0))
    if ns.problem == "maxcut":
        return problems.maxcut(L, allow_negative_weights=signed)
    if ns.k is None:
        raise UsageError("maxkcut needs --k")
    return problems.maxkcut(L, ns.k, allow_negative_weights=signed)


def _config(ns, problem) -> pathfollow.SolverConfig:
    has_center = problem.barrier.kind in ("box", "matrix_interval")
    if ns.t0 is None:
        if not has_center:
            raise UsageError(
                "--t0 auto needs a barrier with an analytic center; for SDP relaxations "
                "pass a manual value, e.g. --t0 0.025 --x0 identity")
        mode = "theoretical"
    else:
        mode = "manual"
    x0 = None
    if ns.x0 == "identity":
        if problem.matrix_shape is None:
            raise UsageError("--x0 identity only applies to matrix problems")
        x0 = problems.pack_sym(np.eye(problem.matrix_shape[0]))
    return pathfollow.SolverConfig(
        beta=ns.beta, epsilon=ns.eps, init_mode=mode, t0=ns.t0, x0=x0,
        exact_variant=ns.exact_variant, delta=ns.delta, max_iters=ns.max_iters)


def result_json(result: pathfollow.SolveResult, config: pathfollow.SolverConfig) -> dict:
    cert = result.cert
    out = {
        "status": result.status,
        "objective": result.objective,
        "iterations": result.iterations,
        "t_final": result.t_final,
        "epsilon": config.epsilon,
        "beta": cert.beta,
        "sigma_beta": cert.sigma_beta,
        "psi": cert.psi,
        "t0": cert.t0,
        "wall_ms": result.wall_ms,
    }
    out.update(cert.flags())
    return out


def write_trace(path: str, trace: pathfollow.SolveTrace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for r in trace.records:
            w.writerow([r.k, repr(r.t), repr(r.objective), r.sub_iters, repr(r.gap_bound),
                        f"{r.wall_ms:.3f}"])


_VALUE_FLAGS = {"--c", "--l", "--u", "--t0", "--eps", "--beta", "--delta"}
_NUMERIC = re.compile(r"^-[0-9.]")


def _glue_negative_values(argv: List[str]) -> List[str]:
    # "--l -1,-1" would otherwise be read as an unknown option
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and _NUMERIC.match(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(_glue_negative_values(argv))
        if ns.command != "solve":
            raise UsageError("expected a subcommand: solve")
        logging.basicConfig(level=logging.ERROR if ns.quiet else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        problem = _load_problem(ns)
        config = _config(ns, problem)
        result = pathfollow.solve(problem, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidInputError, InitializationError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProxPathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUBSOLVER

    payload = result_json(result, config)
    text = json.dumps(payload, sort_keys=True, indent=2)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if ns.trace:
        write_trace(ns.trace, result.trace)
    if not ns.quiet:
        print(text)
    if result.failure is not None:
        print(f"subsolver failure: {result.failure}", file=sys.stderr)
    return STATUS_EXIT[result.status]


def main() -> None:
    sys.exit(run())
