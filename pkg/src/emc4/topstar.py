"""Top-star branch relaxations and their Farkas certificates.

The branch fixes every upper top-slice cell (x, 3) with x in {1,2,3}^3 as
missing. Variables (608 in total):

* ``y<abc>``: top-slice quad (x, 3) present, x in [4]^3
* ``m<abc>_<t>``: lower quad (x, t) missing, t in {0, 1, 2}
* ``t<I>_<v>``: triple trace value v on support I
* ``p<J>_<u>``: pair trace value u on support J

Rows are produced by registered generators so that any row can be rebuilt
from its metadata. The residual seed family (T8) is kept as a sparse matrix
and materialized lazily.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from .clauses import residual_seed_clauses
from .exact_lp import (
    Certified,
    FarkasCertificate,
    RationalSystem,
    Row,
    register_generator,
    regenerate_and_match,
    solve_with_certificate,
    verify_certificate,
)
from .ferrers import enumerate_bad_triples, is_pair_obstruction
from .lattice import SupportedTrace, decode, pair_supports, points, triple_supports

BOUND = 40000
OBJ = {"y": 625, "m": -625, "t": 300, "p": 144}


def _s(x) -> str:
    return "".join(map(str, x))


def yvar(x) -> str:
    return f"y{_s(x)}"


def mvar(x, t: int) -> str:
    return f"m{_s(x)}_{t}"


def zvar(h: SupportedTrace) -> str:
    return f"{'t' if h.kind == 'triple' else 'p'}{_s(h.support)}_{_s(h.values)}"


def parse_trace(name: str) -> SupportedTrace:
    sup, val = name[1:].split("_")
    return SupportedTrace(tuple(map(int, sup)), tuple(map(int, val)))


@lru_cache(maxsize=None)
def top_domain() -> tuple:
    """Z: points of [4]^3 with a zero coordinate (37 of them)."""
    return tuple(x for x in points(3) if 0 in x)


@lru_cache(maxsize=None)
def all_supported_traces() -> tuple:
    out = [SupportedTrace(I, v) for I in triple_supports() for v in points(3)]
    out += [SupportedTrace(J, u) for J in pair_supports() for u in points(2)]
    return tuple(out)


@lru_cache(maxsize=None)
def variables() -> tuple:
    out = [yvar(x) for x in points(3)]
    out += [mvar(x, t) for x in points(3) for t in range(3)]
    out += [zvar(h) for h in all_supported_traces()]
    return tuple(out)


def objective() -> dict:
    return {v: OBJ[v[0]] for v in variables()}


def quad_var(idx: int):
    """Variable of a wide quad and whether it is top-slice."""
    q = decode(idx, 4)
    if q[3] == 3:
        return yvar(q[:3]), True
    return mvar(q[:3], q[3]), False


@dataclass(frozen=True)
class TopstarBranch:
    c: int
    ell: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.c <= 37:
            raise ValueError(f"c must lie in 0..37, got {self.c}")
        if self.c == 23:
            if self.ell is None or not 0 <= self.ell <= 25:
                raise ValueError("branch c=23 needs ell in 0..25")
        elif self.ell is not None:
            raise ValueError("ell is only used when c=23")

    @property
    def id(self) -> str:
        return f"c{self.c}" if self.ell is None else f"c{self.c}_l{self.ell}"


def branches() -> list[TopstarBranch]:
    out = []
    for c in range(38):
        if c == 23:
            out.extend(TopstarBranch(23, ell) for ell in range(26))
        else:
            out.append(TopstarBranch(c))
    return out


# ---------------------------------------------------------------- row generators


def _row(gen: str, rid: str, coeffs: dict, rhs, tag: str, **args) -> Row:
    return Row(rid, coeffs, rhs, tag, {"gen": gen, "args": args})


@register_generator("topstar.T1.support")
def row_t1_support(x) -> Row:
    x = tuple(x)
    return _row("topstar.T1.support", f"T1s|{_s(x)}", {yvar(x): 1}, 0, "T1", x=x)


@register_generator("topstar.T1.down")
def row_t1_down(x, i) -> Row:
    x = tuple(x)
    xm = list(x)
    xm[i] -= 1
    return _row("topstar.T1.down", f"T1d|{_s(x)}|{i}", {yvar(x): 1, yvar(xm): -1}, 0, "T1", x=x, i=i)


@register_generator("topstar.T2.compat")
def row_t2_compat(x, t) -> Row:
    x = tuple(x)
    return _row("topstar.T2.compat", f"T2c|{_s(x)}|{t}", {mvar(x, t): 1, yvar(x): 1}, 1, "T2", x=x, t=t)


@register_generator("topstar.T2.up")
def row_t2_up(x, t, i) -> Row:
    # immediate successor inside the lower region: coordinate i < 3 of x, or i == 3 for t -> t + 1
    x = tuple(x)
    if i == 3:
        succ = mvar(x, t + 1)
    else:
        xp = list(x)
        xp[i] += 1
        succ = mvar(xp, t)
    return _row("topstar.T2.up", f"T2u|{_s(x)}|{t}|{i}", {mvar(x, t): 1, succ: -1}, 0, "T2", x=x, t=t, i=i)


@register_generator("topstar.T2.top")
def row_t2_top(x) -> Row:
    x = tuple(x)
    return _row("topstar.T2.top", f"T2t|{_s(x)}", {mvar(x, 2): 1, yvar(x): 1}, 1, "T2", x=x)


@register_generator("topstar.T3")
def row_t3() -> Row:
    coeffs = {mvar(x, t): 1 for x in points(3) for t in range(3)}
    coeffs.update({yvar(x): -1 for x in points(3)})
    return _row("topstar.T3", "T3", coeffs, 2, "T3")


@register_generator("topstar.T4")
def row_t4(trace, i) -> Row:
    h = parse_trace(trace)
    v = list(h.values)
    v[i] -= 1
    lower = SupportedTrace(h.support, tuple(v))
    return _row("topstar.T4", f"T4|{trace}|{i}", {trace: 1, zvar(lower): -1}, 0, "T4", trace=trace, i=i)


@register_generator("topstar.T5")
def row_t5(trace, q) -> Row:
    qv, top = quad_var(q)
    if top:
        return _row("topstar.T5", f"T5|{trace}|{q}", {trace: 1, qv: -1}, 0, "T5", trace=trace, q=q)
    return _row("topstar.T5", f"T5|{trace}|{q}", {trace: 1, qv: 1}, 1, "T5", trace=trace, q=q)


@register_generator("topstar.T6")
def row_t6(support, a, b) -> Row:
    za = zvar(SupportedTrace(tuple(support), tuple(a)))
    zb = zvar(SupportedTrace(tuple(support), tuple(b)))
    return _row("topstar.T6", f"T6|{_s(support)}|{_s(a)}|{_s(b)}", {za: 1, zb: 1}, 1, "T6", support=tuple(support), a=tuple(a), b=tuple(b))


@register_generator("topstar.T7")
def row_t7(support, a, b, c) -> Row:
    coeffs = {zvar(SupportedTrace(tuple(support), tuple(v))): 1 for v in (a, b, c)}
    rid = f"T7|{_s(support)}|{_s(a)}|{_s(b)}|{_s(c)}"
    return _row("topstar.T7", rid, coeffs, 2, "T7", support=tuple(support), a=tuple(a), b=tuple(b), c=tuple(c))


@register_generator("topstar.T8")
def row_t8(trace, clause) -> Row:
    coeffs = {trace: 1}
    rhs = 0
    for q in clause:
        qv, top = quad_var(q)
        if top:
            coeffs[qv] = 1
            rhs += 1
        else:
            coeffs[qv] = -1
    rid = f"T8|{trace}|{'.'.join(map(str, clause))}"
    return _row("topstar.T8", rid, coeffs, rhs, "T8", trace=trace, clause=tuple(clause))


@register_generator("topstar.T9")
def row_t9(support) -> Row:
    support = tuple(support)
    d = len(support)
    coeffs = {zvar(SupportedTrace(support, v)): 1 for v in points(d)}
    return _row("topstar.T9", f"T9|{_s(support)}", coeffs, 4 if d == 2 else 32, "T9", support=support)


@register_generator("topstar.T10.card")
def row_t10_card(family, value, sense) -> Row:
    names = [yvar(x) for x in points(3)] if family == "y" else [mvar(x, t) for x in points(3) for t in range(3)]
    coeffs = {v: sense for v in names}
    rid = f"T10{family}|{'le' if sense > 0 else 'ge'}|{value}"
    return _row("topstar.T10.card", rid, coeffs, sense * value, "T10", family=family, value=value, sense=sense)


@register_generator("topstar.T10.force")
def row_t10_force(var, present) -> Row:
    # present=True encodes var >= 1 as -var <= -1
    if present:
        return _row("topstar.T10.force", f"T10f|{var}|1", {var: -1}, -1, "T10", var=var, present=True)
    return _row("topstar.T10.force", f"T10f|{var}|0", {var: 1}, 0, "T10", var=var, present=False)


def ideal_forcing_rows(c: int, ell: Optional[int] = None) -> list[Row]:
    """Unit rows implied by the cardinalities alone.

    The present top cells form a down-set of size c inside Z, so a cell whose
    principal down-set exceeds c is absent, and a cell whose principal up-set
    in Z cannot be avoided at size c is present. With ell fixed, the missing
    lower cells form an up-set of size ell inside [4]^3 x {0,1,2}, with the
    dual rule.
    """
    rows = []
    z = top_domain()
    for x in z:
        down = math.prod(v + 1 for v in x)
        up_in_z = sum(1 for w in z if all(a >= b for a, b in zip(w, x)))
        if down > c:
            rows.append(row_t10_force(yvar(x), False))
        if len(z) - up_in_z < c:
            rows.append(row_t10_force(yvar(x), True))
    if ell is not None:
        for x in points(3):
            for t in range(3):
                up = math.prod(4 - v for v in x) * (3 - t)
                down = math.prod(v + 1 for v in x) * (t + 1)
                if up > ell:
                    rows.append(row_t10_force(mvar(x, t), False))
                if 192 - down < ell:
                    rows.append(row_t10_force(mvar(x, t), True))
    return rows


def _base_rows() -> Iterator[Row]:
    zset = set(top_domain())
    for x in points(3):
        if x not in zset:
            yield row_t1_support(x)
        for i in range(3):
            if x[i] > 0:
                yield row_t1_down(x, i)
    for x in points(3):
        for t in range(3):
            yield row_t2_compat(x, t)
            for i in range(3):
                if x[i] < 3:
                    yield row_t2_up(x, t, i)
            if t < 2:
                yield row_t2_up(x, t, 3)
        yield row_t2_top(x)
    yield row_t3()
    for h in all_supported_traces():
        name = zvar(h)
        for i, v in enumerate(h.values):
            if v > 0:
                yield row_t4(name, i)
    for h in all_supported_traces():
        name = zvar(h)
        ext = h.extension_mask()
        for q in range(256):
            if ext >> q & 1:
                yield row_t5(name, q)
    for J in pair_supports():
        for a, b in itertools.combinations(points(2), 2):
            if is_pair_obstruction(a, b):
                yield row_t6(J, a, b)
    bad = enumerate_bad_triples()
    for I in triple_supports():
        for m in bad:
            yield row_t7(I, m.a, m.b, m.c)
    for J in pair_supports():
        yield row_t9(J)
    for I in triple_supports():
        yield row_t9(I)


def branch_rows(branch: TopstarBranch) -> list[Row]:
    rows = [row_t10_card("y", branch.c, 1), row_t10_card("y", branch.c, -1)]
    if branch.ell is not None:
        rows += [row_t10_card("m", branch.ell, 1), row_t10_card("m", branch.ell, -1)]
    return rows + ideal_forcing_rows(branch.c, branch.ell)


# ---------------------------------------------------------------- lazy residual seed family


@dataclass
class _T8Table:
    traces: list  # trace variable names
    trace_of: np.ndarray  # row -> trace position
    clauses: np.ndarray  # row -> 3 cell indices
    matrix: object  # scipy CSR over variables()
    rhs: np.ndarray
    index: dict = field(default_factory=dict)  # (trace, clause) -> row


@lru_cache(maxsize=1)
def t8_table() -> _T8Table:
    import scipy.sparse as sp

    var_index = {v: i for i, v in enumerate(variables())}
    names, tr, cls = [], [], []
    for h in all_supported_traces():
        names.append(zvar(h))
        for cl in residual_seed_clauses(h):
            tr.append(len(names) - 1)
            cls.append(cl)
    n = len(tr)
    ri, ci, data = [], [], []
    rhs = np.zeros(n)
    for k in range(n):
        ri.append(k)
        ci.append(var_index[names[tr[k]]])
        data.append(1.0)
        for q in cls[k]:
            qv, top = quad_var(q)
            ri.append(k)
            ci.append(var_index[qv])
            data.append(1.0 if top else -1.0)
            rhs[k] += 1 if top else 0
    mat = sp.csr_matrix((data, (ri, ci)), shape=(n, len(var_index)))
    table = _T8Table(names, np.array(tr), np.array(cls, dtype=np.int64), mat, rhs)
    table.index = {(names[tr[k]], tuple(cls[k])): k for k in range(n)}
    return table


class ResidualSeedFamily:
    """All (T8) rows; members are addressed by trace name and clause."""

    tag = "T8"

    def __len__(self) -> int:
        return len(t8_table().rhs)

    def owns(self, row_id: str) -> bool:
        return row_id.startswith("T8|")

    def materialize(self, row_id: str) -> Row:
        _, trace, cl = row_id.split("|")
        clause = tuple(int(q) for q in cl.split("."))
        # membership is checked against the regenerated clause list, not the id
        h = parse_trace(trace)
        if clause not in set(residual_seed_clauses(h)):
            raise KeyError(f"{row_id} is not a residual seed matching of {trace}")
        return row_t8(trace, clause)

    def _row_at(self, k: int) -> Row:
        tab = t8_table()
        return row_t8(tab.traces[tab.trace_of[k]], tuple(int(q) for q in tab.clauses[k]))

    def separate(self, x, var_index, tol: float, limit: int) -> list[Row]:
        tab = t8_table()
        viol = tab.matrix @ np.asarray(x, dtype=float) - tab.rhs
        idx = np.flatnonzero(viol > tol)
        if len(idx) > limit:
            idx = idx[np.argsort(-viol[idx], kind="stable")[:limit]]
            idx.sort()
        return [self._row_at(int(k)) for k in idx]

    def all_rows(self) -> Iterator[Row]:
        for k in range(len(self)):
            yield self._row_at(k)


# ---------------------------------------------------------------- systems and runs


def build_relaxation(branch: TopstarBranch) -> RationalSystem:
    rows = {}
    for r in itertools.chain(_base_rows(), branch_rows(branch)):
        if r.id in rows:
            raise ValueError(f"duplicate row id {r.id}")
        rows[r.id] = r
    return RationalSystem(
        list(variables()),
        rows,
        objective(),
        BOUND,
        name=f"topstar-{branch.id}",
        lazy=[ResidualSeedFamily()],
        params={"c": branch.c, "ell": branch.ell},
    )


def row_counts(sys: RationalSystem) -> dict:
    out: dict = {}
    for r in sys.rows.values():
        out[r.tag] = out.get(r.tag, 0) + 1
    out["T8"] = len(ResidualSeedFamily())
    return out


@dataclass
class BranchResult:
    branch: TopstarBranch
    certificate: Optional[FarkasCertificate]
    verified: bool
    gap: Optional[object]
    regenerated_ok: bool
    lp_value: Optional[float] = None
    materialized_t8: int = 0
    outcome: str = ""

    def marker(self) -> dict:
        return {
            "branch": self.branch.id,
            "verified": self.verified,
            "gap": str(self.gap) if self.gap is not None else None,
            "support_rows": len(self.certificate.rows) if self.certificate else 0,
        }


def check_certificate(branch: TopstarBranch, cert: FarkasCertificate, sys: Optional[RationalSystem] = None) -> BranchResult:
    """Verification only: rebuild the branch, check every listed row regenerates, check the arithmetic."""
    sys = sys or build_relaxation(branch)
    ver = verify_certificate(sys, cert)
    regen = all(regenerate_and_match(sys, rid) for rid in cert.rows)
    return BranchResult(branch, cert, ver.ok and regen, ver.gap, regen, outcome="checked")


def run_branch(branch: TopstarBranch) -> BranchResult:
    sys = build_relaxation(branch)
    out = solve_with_certificate(sys, method="highs")
    if not isinstance(out, Certified):
        return BranchResult(branch, None, False, None, False, outcome=type(out).__name__)
    res = check_certificate(branch, out.certificate, sys)
    res.lp_value = out.optimum_estimate
    res.materialized_t8 = out.materialized_lazy
    res.outcome = "certified"
    return res


def _run(args):
    c, ell = args
    return run_branch(TopstarBranch(c, ell))


def run_all_branches(workers: int = 1, selection=None) -> list[BranchResult]:
    todo = [(b.c, b.ell) for b in (selection or branches())]
    if workers <= 1:
        return [_run(a) for a in todo]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run, todo))
