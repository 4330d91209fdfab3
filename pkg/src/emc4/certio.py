"""Canonical JSON files for certificates, transcripts and reports, plus SHA-256 manifests.

Every number in a file is a JSON integer; rationals are written as
``{"num": ..., "den": ...}`` or as a common denominator with integer
numerators. Floats are rejected on read.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .exact_lp import FarkasCertificate

KINDS = ("farkas", "dual-cut", "search-transcript", "report")
MANIFEST = "MANIFEST.sha256"


class SchemaError(ValueError):
    pass


def _reject_float(token: str):
    raise SchemaError(f"floating-point literal {token!r} is not allowed")


def _reject_constant(token: str):
    raise SchemaError(f"non-finite literal {token!r} is not allowed")


def dumps(obj: Any) -> str:
    _check_exact(obj, "$")
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text, parse_float=_reject_float, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise SchemaError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e


def _check_exact(obj, where: str):
    if isinstance(obj, float):
        raise SchemaError(f"float at {where}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            if not isinstance(k, str):
                raise SchemaError(f"non-string key at {where}")
            _check_exact(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_exact(v, f"{where}[{i}]")
    elif not (obj is None or isinstance(obj, (bool, int, str))):
        raise SchemaError(f"unsupported value {type(obj).__name__} at {where}")


def fraction_json(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def fraction_from(obj, where: str = "$") -> Fraction:
    if not isinstance(obj, dict) or set(obj) != {"num", "den"}:
        raise SchemaError(f"expected a fraction object at {where}")
    num, den = obj["num"], obj["den"]
    if not _is_int(num) or not _is_int(den) or den <= 0:
        raise SchemaError(f"bad fraction at {where}")
    return Fraction(num, den)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field {key!r} at {where}")
    return obj[key]


def _numerators(obj, where: str) -> dict:
    if not isinstance(obj, list):
        raise SchemaError(f"expected a list of [id, numerator] at {where}")
    out = {}
    for i, item in enumerate(obj):
        loc = f"{where}[{i}]"
        if not isinstance(item, list) or len(item) != 2 or not isinstance(item[0], str):
            raise SchemaError(f"expected [id, numerator] at {loc}")
        if not _is_int(item[1]):
            raise SchemaError(f"numerator must be an integer at {loc}")
        if item[1] < 0:
            raise SchemaError(f"negative numerator at {loc}")
        if item[0] in out:
            raise SchemaError(f"duplicate id {item[0]!r} at {loc}")
        out[item[0]] = item[1]
    return out


# ---------------------------------------------------------------- certificates


def certificate_to_json(cert: FarkasCertificate, kind: str = "farkas", meta: dict | None = None) -> dict:
    if kind not in ("farkas", "dual-cut"):
        raise SchemaError(f"certificate kind must be farkas or dual-cut, got {kind}")
    return {
        "kind": kind,
        "name": cert.name,
        "denominator": cert.denominator,
        "rows": [[k, v] for k, v in sorted(cert.rows.items())],
        "upper": [[k, v] for k, v in sorted(cert.upper.items())],
        "meta": meta or {},
    }


def certificate_from_json(obj: dict, kind: str | None = None) -> FarkasCertificate:
    k = _require(obj, "kind", "$")
    if k not in ("farkas", "dual-cut") or (kind is not None and k != kind):
        raise SchemaError(f"unexpected certificate kind {k!r} at $.kind")
    den = _require(obj, "denominator", "$")
    if not _is_int(den) or den <= 0:
        raise SchemaError("denominator must be a positive integer at $.denominator")
    name = _require(obj, "name", "$")
    if not isinstance(name, str):
        raise SchemaError("name must be a string at $.name")
    rows = _numerators(_require(obj, "rows", "$"), "$.rows")
    upper = _numerators(_require(obj, "upper", "$"), "$.upper")
    return FarkasCertificate(den, rows, upper, name)


def write_json(path: Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def read_json(path: Path) -> Any:
    return loads(Path(path).read_text())


def write_certificate(path: Path, cert: FarkasCertificate, kind: str = "farkas", meta: dict | None = None) -> Path:
    return write_json(path, certificate_to_json(cert, kind, meta))


def read_certificate(path: Path, kind: str | None = None) -> FarkasCertificate:
    return certificate_from_json(read_json(path), kind)


def tagged(kind: str, body: dict) -> dict:
    if kind not in KINDS:
        raise SchemaError(f"unknown kind {kind}")
    return {"kind": kind, **body}


def read_tagged(path: Path, kind: str) -> dict:
    obj = read_json(path)
    if _require(obj, "kind", "$") != kind:
        raise SchemaError(f"{path}: expected kind {kind!r}, got {obj.get('kind')!r}")
    return obj


# ---------------------------------------------------------------- manifests


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _tracked(directory: Path) -> list[Path]:
    return sorted(p for p in directory.rglob("*") if p.is_file() and p.name != MANIFEST)


def emit_manifest(directory) -> Path:
    directory = Path(directory)
    lines = [f"{sha256_file(p)}  {p.relative_to(directory).as_posix()}" for p in _tracked(directory)]
    out = directory / MANIFEST
    out.write_text("".join(line + "\n" for line in lines))
    return out


def verify_manifest(directory) -> tuple[bool, list[str]]:
    """Recompute digests; problems name the offending relative paths."""
    directory = Path(directory)
    mf = directory / MANIFEST
    if not mf.exists():
        return False, [f"missing {MANIFEST}"]
    listed = {}
    for n, line in enumerate(mf.read_text().splitlines(), 1):
        digest, sep, rel = line.partition("  ")
        if not sep or len(digest) != 64:
            return False, [f"{MANIFEST}:{n}: malformed line"]
        listed[rel] = digest
    problems = []
    for rel, digest in sorted(listed.items()):
        p = directory / rel
        if not p.is_file():
            problems.append(f"missing: {rel}")
        elif sha256_file(p) != digest:
            problems.append(f"altered: {rel}")
    for p in _tracked(directory):
        rel = p.relative_to(directory).as_posix()
        if rel not in listed:
            problems.append(f"unlisted: {rel}")
    return not problems, problems
