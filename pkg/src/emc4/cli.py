"""Command line front end.

Exit codes: 0 every check ok, 1 a proof-critical failure, 2 a configuration
or resource error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import certio
from .pipeline import CheckReport, ConfigError, RunConfig, parse_branch, run_all, run_check

log = logging.getLogger("emc4")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--full", dest="full", action="store_true", default=True, help="discover and verify (default)")
    mode.add_argument("--fast", dest="full", action="store_false", help="verify stored artifacts only")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--json", action="store_true", help="print reports as JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="emc4", description="Finite checks for the 4-uniform matching threshold.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run-all", help="run every check and write a manifest")
    _common(p)
    p.add_argument("--topstar-branches", help="comma-separated subset, e.g. c0,c29,c23_l4 (default: all 63)")
    for name in ("pair-ferrers", "triple-ferrers", "notopstar", "threshold"):
        _common(sub.add_parser(name))
    p = sub.add_parser("topstar")
    _common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--branch", help="c=<K>")
    g.add_argument("--all", action="store_true")
    p.add_argument("--ell", type=int)
    p.add_argument("--emit-cert", type=Path)
    p.add_argument("--verify-cert", type=Path)
    for name in ("board15", "board11"):
        p = sub.add_parser(name)
        _common(p)
        p.add_argument("--emit-cert", type=Path)
        p.add_argument("--verify-cert", type=Path)
    p = sub.add_parser("manifest")
    p.add_argument("action", choices=("emit", "verify"))
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--json", action="store_true")
    return ap


def _print(reports: list[CheckReport], as_json: bool):
    if as_json:
        body = [
            {**r.file_body(), "seconds_ms": int(r.seconds * 1000), "digest": r.digest}
            for r in reports
        ]
        print(json.dumps(body, indent=1, sort_keys=True))
        return
    for r in reports:
        print(f"[{r.status:>6}] {r.name:<15} {r.seconds:8.2f}s")
        for k, v in r.markers.items():
            if k != "gaps":
                print(f"         {k}={v}")
        if r.error:
            print(f"         error: {r.error}")


def _topstar_selection(args):
    if args.branch is None:
        return None
    text = args.branch if args.ell is None else f"{args.branch}:{args.ell}"
    return [parse_branch(text)]


def _verify_single(args) -> int:
    """--verify-cert PATH: check one certificate file against freshly regenerated rows."""
    from .board import dual_report

    try:
        if args.command == "topstar":
            from .topstar import check_certificate

            sel = _topstar_selection(args)
            if not sel:
                raise ConfigError("--verify-cert needs --branch")
            res = check_certificate(sel[0], certio.read_certificate(args.verify_cert, "farkas"))
            ok, detail = res.verified, f"gap={res.gap}"
        elif args.command == "board11":
            from .board11 import build_system

            rep = dual_report(build_system(), certio.read_certificate(args.verify_cert, "dual-cut"))
            ok, detail = rep.ok and rep.max_load <= 625, f"max_load={rep.max_load}"
        else:
            from . import board15 as b15

            group, rows = b15.symmetry_group(), b15.regenerate_labelled_rows()
            q = b15.quotient_rows(group, rows)
            cert = certio.read_certificate(args.verify_cert, "dual-cut")
            rep = dual_report(b15.quotient_system(q), cert, {o.name: o.size for o in q.orbits})
            lift = b15.lift_check(q, cert, group, rows)
            ok, detail = rep.ok and lift["ok"], f"min_slack={rep.min_slack}"
    except FileNotFoundError as e:
        raise ConfigError(str(e)) from e
    except (certio.SchemaError, KeyError, ValueError) as e:
        print(f"certificate rejected: {e}")
        return EXIT_FAIL
    print(f"{'ok' if ok else 'FAILED'}: {args.verify_cert} {detail}")
    return EXIT_OK if ok else EXIT_FAIL


def _emit_single(args, cfg: RunConfig):
    name = "farkas" if args.command == "topstar" else "dual-cut"
    if args.command == "topstar":
        sel = cfg.topstar_branches or []
        if len(sel) != 1:
            raise ConfigError("--emit-cert needs a single --branch")
        src = cfg.out / "topstar" / f"{sel[0].id}.json"
    else:
        src = cfg.out / args.command / "dual.json"
    cert = certio.read_certificate(src, name)
    certio.write_certificate(args.emit_cert, cert, name, certio.read_json(src).get("meta", {}))


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "manifest":
            if args.action == "emit":
                if not args.out.is_dir():
                    raise ConfigError(f"{args.out} is not a directory")
                path = certio.emit_manifest(args.out)
                print(f"wrote {path}")
                return EXIT_OK
            ok, problems = certio.verify_manifest(args.out)
            for p in problems:
                print(p)
            print("manifest ok" if ok else "manifest FAILED")
            return EXIT_OK if ok else EXIT_FAIL
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if getattr(args, "verify_cert", None):
            return _verify_single(args)
        cfg = RunConfig(args.out, args.full, args.workers)
        if args.command == "run-all":
            if args.topstar_branches:
                cfg.topstar_branches = [parse_branch(t) for t in args.topstar_branches.split(",") if t]
            reports = run_all(cfg)
        else:
            if args.command == "topstar":
                cfg.topstar_branches = _topstar_selection(args)
            cfg.out.mkdir(parents=True, exist_ok=True)
            rep = run_check(args.command, cfg)
            reports = [rep]
            if getattr(args, "emit_cert", None) and rep.ok:
                _emit_single(args, cfg)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _print(reports, args.json)
    failed = [r.name for r in reports if not r.ok]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
