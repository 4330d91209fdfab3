"""Checks run by the command line, each writing its artifacts under one output directory.

Full mode discovers certificates and reruns every search. Fast mode only
reloads stored artifacts and verifies them. Files hold markers and exact
data only; timings are returned to the caller but never written, so two runs
produce identical bytes.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from . import certio

STATUSES = ("ok", "failed", "skipped")


class ConfigError(RuntimeError):
    """Bad configuration or missing inputs (exit code 2)."""


@dataclass
class RunConfig:
    out: Path = Path("out")
    full: bool = True
    workers: int = 1
    topstar_branches: Optional[list] = None  # None means all 63


@dataclass
class CheckReport:
    name: str
    status: str
    markers: dict = field(default_factory=dict)
    seconds: float = 0.0
    artifacts: list = field(default_factory=list)
    digest: str = ""
    error: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status}")

    @property
    def ok(self) -> bool:
        return self.status != "failed"

    def file_body(self) -> dict:
        return certio.tagged(
            "report",
            {"check": self.name, "status": self.status, "markers": self.markers, "artifacts": self.artifacts, "error": self.error},
        )


def _finish(cfg: RunConfig, name: str, ok: bool, markers: dict, artifacts: list, t0: float, error: str = "") -> CheckReport:
    rep = CheckReport(name, "ok" if ok else "failed", markers, time.perf_counter() - t0, sorted(artifacts), error=error)
    path = cfg.out / "reports" / f"{name}.json"
    certio.write_json(path, rep.file_body())
    rep.digest = certio.sha256_file(path)
    return rep


def _rel(cfg: RunConfig, p: Path) -> str:
    return Path(p).relative_to(cfg.out).as_posix()


def _require_file(p: Path) -> Path:
    if not p.exists():
        raise ConfigError(f"missing artifact {p}; run in full mode first")
    return p


# ---------------------------------------------------------------- Ferrers audits


def check_pair_ferrers(cfg: RunConfig) -> CheckReport:
    from .ferrers import audit_pairs

    t0 = time.perf_counter()
    r = audit_pairs()
    m = r.markers()
    ok = (r.downsets_checked, r.legal_count, r.max_legal_size) == (70, 10, 4)
    m["pair_ferrers_ok"] = ok
    return _finish(cfg, "pair-ferrers", ok, m, [], t0)


def check_triple_ferrers(cfg: RunConfig) -> CheckReport:
    from .ferrers import audit_triples

    t0 = time.perf_counter()
    r = audit_triples()
    m = r.markers()
    ok = (
        (r.downsets_checked, r.bad_matchings, r.legal_count, r.max_legal_size, len(r.equality_diagrams))
        == (232848, 2016, 26893, 32, 4)
        and r.macmahon_count == r.downsets_checked
    )
    m["triple_ferrers_ok"] = ok
    return _finish(cfg, "triple-ferrers", ok, m, [], t0)


# ---------------------------------------------------------------- top-star


def _branch_path(cfg: RunConfig, bid: str) -> Path:
    return cfg.out / "topstar" / f"{bid}.json"


def parse_branch(text: str):
    """'c=29', 'c29', '23:4', 'c23_l4' or 'c=23,ell=4' to a TopstarBranch."""
    from .topstar import TopstarBranch

    t = text.replace("c=", "").replace("ell=", "").replace("c", "").replace("_l", ":").replace(",", ":")
    parts = [p for p in t.split(":") if p]
    try:
        nums = [int(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"bad branch {text!r}") from e
    try:
        return TopstarBranch(*nums)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad branch {text!r}: {e}") from e


def check_topstar(cfg: RunConfig) -> CheckReport:
    from .topstar import branches, check_certificate, run_all_branches

    t0 = time.perf_counter()
    selection = cfg.topstar_branches or branches()
    gaps, failed, artifacts = {}, [], []
    if cfg.full:
        results = run_all_branches(cfg.workers, selection)
        for r in results:
            if r.certificate is not None:
                meta = {"c": r.branch.c, "ell": r.branch.ell, "bound": 40000}
                artifacts.append(_rel(cfg, certio.write_certificate(_branch_path(cfg, r.branch.id), r.certificate, "farkas", meta)))
    else:
        results = []
        for b in selection:
            p = _require_file(_branch_path(cfg, b.id))
            try:
                cert = certio.read_certificate(p, "farkas")
                results.append(check_certificate(b, cert))
            except (certio.SchemaError, KeyError, ValueError) as e:
                failed.append(b.id)
                gaps[b.id] = f"error: {e}"
            artifacts.append(_rel(cfg, p))
    for r in results:
        gaps[r.branch.id] = str(r.gap) if r.gap is not None else None
        if not (r.verified and r.gap is not None and Fraction(r.gap) >= 0):
            failed.append(r.branch.id)
    ok = not failed
    good = [Fraction(g) for g in gaps.values() if g is not None and not g.startswith("error")]
    markers = {
        "all_ok": ok,
        "branches": len(selection),
        "failed_branches": sorted(failed),
        "min_gap": str(min(good)) if good else None,
        "gaps": gaps,
    }
    return _finish(cfg, "topstar", ok, markers, artifacts, t0, "" if ok else f"failed branches: {sorted(failed)}")


# ---------------------------------------------------------------- no-top-star


def _search_json(res) -> dict:
    from .lattice import mask_cells

    return {
        "optimum": res.optimum,
        "witness": sorted(mask_cells(res.witness)) if res.witness is not None else None,
        "nodes": res.nodes,
        "clauses": res.clauses_in,
        "clauses_after_reduction": res.clauses_used,
        "bound": res.bound,
    }


def notopstar_transcript(rep) -> dict:
    from .lattice import mask_cells

    return certio.tagged(
        "search-transcript",
        {
            "blocker": {
                "max_present": rep.blocker.max_present,
                "min_blocker": rep.blocker.min_blocker,
                "witness_layers": [[list(r) for r in m] for m in rep.blocker.witness],
                "branch_bound_minimum": rep.blocker.branch_bound_minimum,
            },
            "minima": [
                {
                    "kind": tm.orbit.kind,
                    "support": list(tm.orbit.representative.support),
                    "values": list(tm.orbit.representative.values),
                    "orbit_size": tm.orbit.size,
                    **_search_json(tm.result),
                }
                for tm in rep.minima
            ],
            "patterns": [{"name": p.name, "kind": p.kind, "expected": p.expected, **_search_json(p.result)} for p in rep.patterns],
            "rectangles": [
                {"rectangle": list(c.rectangle), "cells": sorted(mask_cells(c.m_mask)), "t3": c.t3, "p2": c.p2}
                for c in rep.rectangles.cases
            ],
            "table": {str(m): list(v) for m, v in sorted(rep.table.rows.items())},
        },
    )


def verify_notopstar_transcript(data: dict) -> tuple[bool, dict, list]:
    """Verify a stored transcript without the expensive enumerations.

    The blocker witness is checked directly, the single-trace searches and the
    pattern searches are rerun (seconds), stored rectangle cases are
    re-evaluated from their masks, and the threshold table is recombined.
    """
    from .clauses import UNIT_TOP_MASK, upper_clauses
    from .lattice import mask_is_up_set, mask_of
    from .notopstar import (
        all_trace_minima,
        combine_thresholds,
        critical_pattern_checks,
        evaluate_case,
        present_mask_from_layers,
        rectangle_mask,
    )

    problems = []
    b = data["blocker"]
    layers = tuple(tuple(tuple(r) for r in m) for m in b["witness_layers"])
    present = present_mask_from_layers(layers)
    if present.bit_count() != b["max_present"] or b["min_blocker"] != 81 - b["max_present"]:
        problems.append("blocker: witness size does not match")
    if present & UNIT_TOP_MASK != UNIT_TOP_MASK:
        problems.append("blocker: witness misses a required cell")
    if any(present & mask_of(c) == mask_of(c) for c in upper_clauses()):
        problems.append("blocker: witness contains an upper 3-matching")
    minima = all_trace_minima()
    stored = data["minima"]
    if len(stored) != len(minima):
        problems.append("minima: count differs")
    for tm, s in zip(minima, stored):
        if (tm.orbit.kind, list(tm.orbit.representative.values), tm.mu) != (s["kind"], s["values"], s["optimum"]):
            problems.append(f"minima: {s['kind']} {s['values']} differs")
    patterns = critical_pattern_checks()
    for p, s in zip(patterns, data["patterns"]):
        if p.name != s["name"] or p.result.optimum != s["optimum"] or not p.ok:
            problems.append(f"pattern: {s['name']} differs")
    worst = None
    for s in data["rectangles"]:
        i, j = s["rectangle"]
        m = mask_of(s["cells"])
        if not mask_is_up_set(m, 4) or m & rectangle_mask(i, j) != rectangle_mask(i, j):
            problems.append(f"rectangle: bad mask for {i}{j}")
            continue
        c = evaluate_case(i, j, m)
        if (c.t3, c.p2) != (s["t3"], s["p2"]):
            problems.append(f"rectangle: values differ for {i}{j}")
        worst = c.margin if worst is None or c.margin > worst else worst
    table = combine_thresholds(minima)
    if {str(k): list(v) for k, v in table.rows.items()} != data["table"]:
        problems.append("table: recombined table differs from stored one")
    ok = (
        not problems
        and b["max_present"] == 48
        and len(stored) == 30
        and len(patterns) == 9
        and len(data["rectangles"]) == 72
        and worst is not None
        and worst < 0
        and table.ok
    )
    markers = {
        "exact_upper_blocker_branch_bound_ok": b["branch_bound_minimum"] == b["min_blocker"] == 33,
        "upper_blocker_max_present": b["max_present"],
        "upper_blocker_min_blocker": b["min_blocker"],
        "trace_threshold_checks": len(stored),
        "critical_pattern_checks": len(patterns),
        "rectangle_cases": len(data["rectangles"]),
        "rectangle_worst_margin": worst,
        "threshold_table_matches_reference": table.matches_expected,
        "exact_no_topstar_threshold_certificate_ok": ok,
    }
    return ok, markers, problems


def check_notopstar(cfg: RunConfig) -> CheckReport:
    t0 = time.perf_counter()
    path = cfg.out / "notopstar" / "transcript.json"
    if cfg.full:
        from .notopstar import assemble_no_topstar

        rep = assemble_no_topstar()
        certio.write_json(path, notopstar_transcript(rep))
        ok, markers, problems = rep.ok, rep.markers(), []
    else:
        try:
            data = certio.read_tagged(_require_file(path), "search-transcript")
            ok, markers, problems = verify_notopstar_transcript(data)
        except (certio.SchemaError, KeyError, TypeError, ValueError) as e:
            ok, markers, problems = False, {"exact_no_topstar_threshold_certificate_ok": False}, [f"transcript: {e}"]
    return _finish(cfg, "notopstar", ok, markers, [_rel(cfg, path)], t0, "; ".join(problems))


# ---------------------------------------------------------------- boards


def check_board15(cfg: RunConfig) -> CheckReport:
    from . import board15 as b15
    from .board import dual_report

    t0 = time.perf_counter()
    path = cfg.out / "board15" / "dual.json"
    problems = []
    if cfg.full:
        rep = b15.run_board15()
        certio.write_certificate(path, rep.dual.certificate, "dual-cut", {"board": 15})
        ok, markers = rep.ok, rep.markers()
    else:
        group = b15.symmetry_group()
        rows = b15.regenerate_labelled_rows()
        counts = b15.check_counts(rows)
        q = b15.quotient_rows(group, rows)
        try:
            cert = certio.read_certificate(_require_file(path), "dual-cut")
            sys = b15.quotient_system(q)
            dual = dual_report(sys, cert, {o.name: o.size for o in q.orbits})
            lift = b15.lift_check(q, cert, group, rows)
        except (certio.SchemaError, KeyError, ValueError) as e:
            return _finish(cfg, "board15", False, {"board15_ok": False}, [_rel(cfg, path)], t0, f"certificate: {e}")
        rep = b15.Board15Report(counts, group.verify(), q.counts(), dual, lift, True, b15.layer2_assembly())
        ok, markers = rep.ok, rep.markers()
    if not ok:
        problems.append("dual or counts failed")
    return _finish(cfg, "board15", ok, markers, [_rel(cfg, path)], t0, "; ".join(problems))


def check_board11(cfg: RunConfig) -> CheckReport:
    from . import board11 as b11
    from .board import dual_report

    t0 = time.perf_counter()
    path = cfg.out / "board11" / "dual.json"
    if cfg.full:
        rep = b11.run_board11()
        certio.write_certificate(path, rep.dual.certificate, "dual-cut", {"board": 11})
    else:
        cuts = b11.regenerate_residual_cuts()
        try:
            cert = certio.read_certificate(_require_file(path), "dual-cut")
            dual = dual_report(b11.build_system(cuts), cert)
        except (certio.SchemaError, KeyError, ValueError) as e:
            return _finish(cfg, "board11", False, {"board11_ok": False}, [_rel(cfg, path)], t0, f"certificate: {e}")
        rep = b11.Board11Report(
            b11.variable_counts(),
            len(cuts),
            sum(1 for c in cuts if not c.rhs),
            all(c.witness_ok() for c in cuts),
            dual,
            b11.layer3_assembly(),
        )
    return _finish(cfg, "board11", rep.ok, rep.markers(), [_rel(cfg, path)], t0, "" if rep.ok else "dual failed")


# ---------------------------------------------------------------- threshold


def check_threshold(cfg: RunConfig) -> CheckReport:
    from .threshold import run_threshold

    t0 = time.perf_counter()
    rep = run_threshold()
    markers = rep.markers()
    markers["s_a"] = list(rep.residues.s_a)
    return _finish(cfg, "threshold", rep.ok, markers, [], t0)


CHECKS: dict[str, Callable[[RunConfig], CheckReport]] = {
    "pair-ferrers": check_pair_ferrers,
    "triple-ferrers": check_triple_ferrers,
    "topstar": check_topstar,
    "board15": check_board15,
    "board11": check_board11,
    "notopstar": check_notopstar,
    "threshold": check_threshold,
}


def run_check(name: str, cfg: RunConfig) -> CheckReport:
    try:
        return CHECKS[name](cfg)
    except ConfigError:
        raise
    except Exception as e:  # a crash inside a proof-critical check is a failure, reported by name
        return CheckReport(name, "failed", {}, 0.0, [], error=f"{type(e).__name__}: {e}")


def _run_named(args):
    name, cfg = args
    return run_check(name, cfg)


def run_all(cfg: RunConfig, names=None) -> list[CheckReport]:
    names = list(names or CHECKS)
    cfg.out.mkdir(parents=True, exist_ok=True)
    pre = []
    if not cfg.full:
        if not (cfg.out / certio.MANIFEST).exists():
            raise ConfigError(f"no manifest in {cfg.out}; run in full mode first")
        good, problems = certio.verify_manifest(cfg.out)
        pre.append(CheckReport("manifest", "ok" if good else "failed", {"manifest_ok": good}, error="; ".join(problems)))
    if cfg.workers > 1 and len(names) > 1:
        from concurrent.futures import ProcessPoolExecutor

        # each check runs in its own worker process
        inner = RunConfig(cfg.out, cfg.full, 1, cfg.topstar_branches)
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            reports = list(ex.map(_run_named, [(n, inner) for n in names]))
    else:
        reports = [run_check(n, cfg) for n in names]
    reports = pre + reports
    summary = certio.tagged(
        "report",
        {
            "check": "run-all",
            "status": "ok" if all(r.ok for r in reports) else "failed",
            "checks": {r.name: r.status for r in sorted(reports, key=lambda r: r.name)},
            "mode": "full" if cfg.full else "fast",
        },
    )
    certio.write_json(cfg.out / "reports" / "run-all.json", summary)
    if all(r.ok for r in pre):
        # an altered tree keeps its old manifest as evidence
        certio.emit_manifest(cfg.out)
    return reports


def manifest_digest(directory) -> str:
    return hashlib.sha256((Path(directory) / certio.MANIFEST).read_bytes()).hexdigest()
