"""Command-line client for the design service.

Each subcommand reads and writes local CSV/JSON files and delegates the
actual work to the service layer: in-process by default, or over HTTP when
--server (or COMARS_SERVER) points at a running instance.  Exit codes
partition the failure classes:

  2  validation or parse failure
  3  file I/O failure
  4  the CC pass bound was hit during optimization (outputs still written)
  5  a theory check found violations
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import __version__
from .designs import load_design_csv, save_csv
from .errors import ComarsError

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CC_BOUND = 4
EXIT_THEORY = 5


class ServiceClient:
    """Thin transport wrapper: in-process handlers or a remote server."""

    def __init__(self, server: str | None):
        self.server = server

    def call(self, endpoint: str, payload: dict) -> dict:
        if self.server is None:
            return self._local(endpoint, payload)
        import httpx

        response = httpx.post(f"{self.server.rstrip('/')}{endpoint}", json=payload, timeout=None)
        if response.status_code != 200:
            body = response.json()
            raise ComarsError(f"{body.get('error', 'ServiceError')}: {body.get('message', '')}")
        return response.json()

    def _local(self, endpoint: str, payload: dict) -> dict:
        from .service import schemas
        from .service.app import (
            handle_compare,
            handle_evaluate,
            handle_generate,
            handle_optimize,
        )

        routes = {
            "/generate": (handle_generate, schemas.GenerateRequest),
            "/optimize": (handle_optimize, schemas.OptimizeRequest),
            "/evaluate": (handle_evaluate, schemas.EvaluateRequest),
            "/compare": (handle_compare, schemas.CompareRequest),
        }
        handler, model = routes[endpoint]
        return handler(model(**payload)).model_dump()


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _write_manifest(path: str, command: str, args: argparse.Namespace, artifacts: dict,
                    started: float) -> None:
    flags = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func", "verbose") and value is not None
    }
    manifest = {
        "command": command,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "artifacts": artifacts,
        "version": __version__,
        "duration_s": round(time.time() - started, 3),
    }
    _write_json(path, manifest)


def cmd_generate(args: argparse.Namespace) -> int:
    started = time.time()
    payload: dict = {"factors": args.factors}
    if args.order is not None:
        payload["order"] = args.order
    else:
        payload["entries"] = load_design_csv(args.file).tolist()
    result = ServiceClient(args.server).call("/generate", payload)
    save_csv(result["entries"], args.out)
    _write_manifest(args.out + ".manifest.json", "generate", args, {"design": args.out}, started)
    print(
        f"conference design: {result['runs']} runs x {result['factors']} factors -> {args.out}"
    )
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    started = time.time()
    payload = {
        "conference": load_design_csv(args.conference).tolist(),
        "n0": args.n0,
        "objective": args.objective,
        "restarts": args.restarts,
        "seed": args.seed,
        "max_cc_passes": args.max_cc_passes,
    }
    if args.conference2 is not None:
        payload["conference2"] = load_design_csv(args.conference2).tolist()
    result = ServiceClient(args.server).call("/optimize", payload)
    save_csv(result["design"]["entries"], args.out)
    _write_json(args.report, result["report"])
    _write_manifest(
        args.out + ".manifest.json",
        "optimize",
        args,
        {"design": args.out, "report": args.report},
        started,
    )
    objective = result["objective"]
    counts = dict(zip(objective["grid"], objective["f_counts"]))
    print(f"objective={objective['kind']} ssq={objective['ssq']} counts={counts}")
    print(f"design -> {args.out}, report -> {args.report}")
    if result["cc_bound_hit"]:
        print("warning: CC pass bound hit; result may not be locally optimal", file=sys.stderr)
        return EXIT_CC_BOUND
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    started = time.time()
    payload = {
        "entries": load_design_csv(args.design).tolist(),
        "n": args.n,
        "n0": args.n0,
        "check_theory": args.check_theory,
    }
    result = ServiceClient(args.server).call("/evaluate", payload)
    if result["n_inferred"]:
        print(
            f"warning: parent run size inferred as n={result['report']['n']} from zero counts",
            file=sys.stderr,
        )
    _write_json(args.report, result["report"])
    _write_manifest(args.report + ".manifest.json", "evaluate", args, {"report": args.report}, started)
    quartiles = result["report"]["quartiles"]
    print(
        f"runs={result['report']['runs']} ssq_2fi={result['report']['ssq_2fi']}"
        f" ssq_all_so={result['report']['ssq_all_so']}"
        f" q2={quartiles['q2']} q3={quartiles['q3']} max={quartiles['max']}"
    )
    if args.check_theory:
        for line in result["violations"]:
            print(f"violation: {line}", file=sys.stderr)
        if result["violations"]:
            return EXIT_THEORY
        print("theory checks: all classified correlations match the closed forms")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    started = time.time()
    payload = {
        "design_a": load_design_csv(args.design_a).tolist(),
        "design_b": load_design_csv(args.design_b).tolist(),
        "n0_a": args.n0_a,
        "n0_b": args.n0_b,
    }
    result = ServiceClient(args.server).call("/compare", payload)
    print(json.dumps(result, indent=2, sort_keys=False))
    if args.report is not None:
        _write_json(args.report, result)
        _write_manifest(args.report + ".manifest.json", "compare", args, {"report": args.report}, started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comars", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"comars {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--server", default=os.environ.get("COMARS_SERVER"),
                       help="base URL of a running service; default: run in-process")
        p.add_argument("--verbose", action="store_true", help="log optimizer moves to stderr")

    p = sub.add_parser("generate", help="source a conference design and write it as CSV")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--order", type=int, help="odd prime p; builds the (p+1)-run design")
    group.add_argument("--file", help="CSV with an explicit conference design")
    p.add_argument("--factors", type=int, default=None, help="keep this many leading columns")
    p.add_argument("--out", required=True, help="output CSV path")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("optimize", help="concatenate two DSD bodies, minimizing aliasing")
    p.add_argument("--conference", required=True, help="parent conference design CSV")
    p.add_argument("--conference2", default=None, help="second (non-isomorphic) parent CSV")
    p.add_argument("--n0", type=int, default=1, help="number of center runs (default 1)")
    p.add_argument("--objective", choices=("ssq", "f"), default="ssq")
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-cc-passes", type=int, default=500, dest="max_cc_passes")
    p.add_argument("--out", required=True, help="best design CSV path")
    p.add_argument("--report", required=True, help="aliasing report JSON path")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="full aliasing report for a design CSV")
    p.add_argument("--design", required=True, help="design CSV path")
    p.add_argument("--n", type=int, default=None, help="parent run size (inferred if omitted)")
    p.add_argument("--n0", type=int, default=None, help="center runs (validated against the file)")
    p.add_argument("--report", required=True, help="report JSON path")
    p.add_argument("--check-theory", action="store_true", dest="check_theory",
                   help="assert every classified correlation against the closed forms")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="side-by-side aliasing and efficiency comparison")
    p.add_argument("--design-a", required=True, dest="design_a")
    p.add_argument("--design-b", required=True, dest="design_b")
    p.add_argument("--n0-a", type=int, required=True, dest="n0_a")
    p.add_argument("--n0-b", type=int, required=True, dest="n0_b")
    p.add_argument("--report", default=None, help="also write the comparison JSON here")
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "verbose", False):
        logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                            format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ComarsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
