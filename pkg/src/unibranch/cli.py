"""Command line front end: ``unibranch run|verify|list-builtins``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, systems
from .config import RunConfig, load_config
from .continuation import Classification, base_crossings, trace
from .degree import degree_balance, is_balanced
from .errors import ConfigError, OracleError
from .report import write_branch, write_json, write_summary
from .verification import run_checks

log = logging.getLogger("unibranch")

EXIT_OK, EXIT_ERROR, EXIT_STALLED, EXIT_CONFIG, EXIT_ORACLE = 0, 1, 2, 3, 4


def _prepare(args) -> RunConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.max_steps is not None:
        changes["max_steps"] = args.max_steps
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _outdir(args, cfg: RunConfig | None) -> Path:
    if cfg is not None:
        return Path(cfg.output_dir)
    return Path(args.out or "out")


def _verify(cfg, system, start, mesh, seed, outdir: Path) -> bool:
    checks = run_checks(system, start, mesh, np.random.default_rng(seed))
    ok = all(c.passed for c in checks)
    write_json(outdir / "verify.json", {"problem": cfg.problem, "seed": seed, "passed": ok,
                                        "checks": [c.to_dict() for c in checks]})
    for c in checks:
        log.info("verify %-22s %s", c.name, "pass" if c.passed else "FAIL")
    return ok


def cmd_run(args) -> int:
    cfg = _prepare(args)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    system, start, mesh = cfg.build()
    ctl = cfg.step_control()

    with ThreadPoolExecutor(max_workers=len(cfg.sides)) as pool:
        futures = [pool.submit(trace, system, None, start, side, ctl) for side in cfg.sides]
        branches = [f.result() for f in futures]

    records = {br.side.value: write_branch(outdir, system, br, mesh) for br in branches}
    write_summary(outdir, records)
    write_json(outdir / "events.json",
               {br.side.value: [e.to_dict() for e in br.events] for br in branches})
    write_json(outdir / "classification.json",
               {br.side.value: {"classification": br.classification.value,
                                "evidence": br.evidence} for br in branches})
    if any(br.base_returns() for br in branches):
        crossings = base_crossings(system, branches)
        write_json(outdir / "balance.json",
                   {"crossings": [c.to_dict() for c in crossings],
                    "index_sum": degree_balance(crossings),
                    "balanced": is_balanced(crossings)})
    for br in branches:
        log.info("%s: %s (%d points, %s)", br.side.value, br.classification.value,
                 len(br.points), br.termination)
        print(f"{br.side.value}\t{br.classification.value}\t{len(br.points)}")

    if args.figures:
        from .plotting import render_all

        for path in render_all(branches, outdir, mesh, system.name):
            log.info("figure %s", path)

    if cfg.verify and not _verify(cfg, system, start, mesh, args.seed, outdir):
        return EXIT_ORACLE
    if any(br.classification is Classification.STALLED for br in branches):
        return EXIT_STALLED
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _prepare(args)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    system, start, mesh = cfg.build()
    ok = _verify(cfg, system, start, mesh, args.seed, outdir)
    print("verify\t" + ("pass" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_ORACLE


def cmd_list_builtins(args) -> int:
    print("mcbvp\tfinite-difference mean curvature / Minkowski Dirichlet problem")
    for name, factory in systems.BUILTINS.items():
        print(f"builtin:{name}\t{factory().description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, default=0, help="seed for multistart and sampling")
    common.add_argument("--max-steps", type=int, dest="max_steps",
                        help="continuation step budget (overrides max_steps)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="unibranch", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="trace branches and classify them")
    p.add_argument("config")
    p.add_argument("--figures", action="store_true",
                   help="also render PNG branch diagrams into the output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", parents=[common], help="run oracle cross-checks")
    p.add_argument("config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("list-builtins", parents=[common], help="list available problems")
    p.set_defaults(func=cmd_list_builtins)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        code, exc_ = EXIT_CONFIG, exc
    except OracleError as exc:
        code, exc_ = EXIT_ORACLE, exc
    except Exception as exc:  # noqa: BLE001  reported in errors.json
        code, exc_ = EXIT_ERROR, exc
    print(f"error: {exc_}", file=sys.stderr)
    if hasattr(args, "config"):
        outdir = Path(args.out) if args.out else None
        if outdir is None:
            try:
                outdir = Path(load_config(args.config).output_dir)
            except ConfigError:
                outdir = Path("out")
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            write_json(outdir / "errors.json",
                       {"exit_code": code, "type": type(exc_).__name__, "message": str(exc_),
                        "traceback": traceback.format_exception_only(type(exc_), exc_)})
        except OSError:
            pass
    return code
