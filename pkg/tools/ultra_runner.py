#!/usr/bin/env python3
"""
Batch runner for the ultrametric toolkit.

- One subcommand per operation; every run prints a JSON report (or writes it to --out).
- Exit codes: 0 all verdicts pass, 2 a verdict fails, 1 input error, 64 usage error.
- Domain errors become failed verdicts carrying the error's witness.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

if __package__ in (None, ""):
    # running as a script: make the repository root importable
    sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config import RUN_CONFIG
from SERVICE.errors import MalformedMatrix, UltrametricError
from SERVICE.report_service import Report

logger = logging.getLogger("ultra_runner")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERDICT = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--range-set", dest="range_set", help="range set JSON file or inline document")
    p.add_argument("--seed", type=int, default=RUN_CONFIG["seed"])
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--pdf", help="also export the resulting matrix as a PDF table")
    p.add_argument("--log-level", dest="log_level", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ultra_runner", description="Exact ultrametric toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name: str, *positionals: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name)
        for pos in positionals:
            p.add_argument(pos)
        _common(p)
        return p

    cmd("validate", "space")
    cmd("dlps")
    cmd("truncate", "space").add_argument("--eps", required=True)
    cmd("product", "space", "other")
    cmd("ud", "space", "other")
    cmd("dmax", "space", "other")
    cmd("amalgam", "space", "other").add_argument("--r", required=True)
    cmd("glue", "space", "other").add_argument("--s", required=True)
    cmd("copy-amalgam", "space", "other").add_argument("--r", required=True)
    cmd("key-amalgam", "problem").add_argument("--eta")
    cmd("embed", "space")
    cmd("independence", "space")
    cmd("interpolate", "problem").add_argument("--minimal", action="store_true",
                                               help="also brute-force the least achievable UD")
    cmd("extend", "problem")
    cmd("telescope", "spec").add_argument("--blocks", type=int, default=3)
    cmd("prefix", "spec").add_argument("--k", type=int, required=True)
    p = cmd("doubling", "space")
    p.add_argument("--C", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--exhaustive", action="store_true")
    p = cmd("witness", "target")
    p.add_argument("--C", nargs="+")
    p.add_argument("--alpha", nargs="+")
    p = cmd("approx", "space")
    p.add_argument("--eps", required=True)
    p.add_argument("--target-range", dest="target_range", required=True)
    p = cmd("perturb", "spec")
    p.add_argument("--eps", required=True)
    p.add_argument("--C", nargs="+")
    p.add_argument("--alpha", nargs="+")
    p = cmd("demo-niemytzki")
    p.add_argument("--tol", required=True)
    p.add_argument("--radii", choices=["harmonic", "geometric"], default="harmonic")
    p.add_argument("--spec", help="sequence spec JSON with a radii rule")
    return parser


HANDLERS = {
    "validate": "validate", "dlps": "dlps", "truncate": "truncate", "product": "product",
    "ud": "ud", "dmax": "dmax", "amalgam": "amalgam", "glue": "glue", "copy-amalgam": "copy_amalgam",
    "key-amalgam": "key_amalgam", "embed": "embed", "independence": "independence",
    "interpolate": "interpolate", "extend": "extend", "telescope": "telescope", "prefix": "prefix",
    "doubling": "doubling", "witness": "witness", "approx": "approx", "perturb": "perturb",
    "demo-niemytzki": "demo_niemytzki",
}


def _emit(store, report: Report, out: Optional[str]) -> None:
    if store is not None:
        store.write(out, report.to_json())
    else:
        sys.stdout.write(json.dumps(report.to_json(), indent=2) + "\n")


def run(argv: List[str], services: Optional[Dict] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("ultra_runner: a subcommand is required")
    except UsageError as err:
        sys.stderr.write(f"{err}\n")
        return EXIT_USAGE
    if args.log_level:
        logging.getLogger().setLevel(args.log_level.upper())
    if services is None:
        from main import build_services
        services = build_services()
    reporter = services["report"]
    store = services.get("store")
    report = Report(args.command)
    code = EXIT_OK
    try:
        getattr(reporter, HANDLERS[args.command])(args, report)
        code = EXIT_OK if report.passed else EXIT_VERDICT
    except MalformedMatrix as err:
        report.verdict(err.name, False, err.witness)
        code = EXIT_INPUT
    except UltrametricError as err:
        report.verdict(err.name, False, err.witness)
        code = EXIT_VERDICT
    except (json.JSONDecodeError, KeyError, OSError, ValueError, ZeroDivisionError) as err:
        logger.error("input error in %s: %s", args.command, err)
        report.outputs["error"] = f"{type(err).__name__}: {err}"
        code = EXIT_INPUT
    if args.pdf and code != EXIT_INPUT:
        reporter.export_to_pdf(args.pdf, report)
    _emit(store, report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
