"""Manifest files: YAML documents describing a submanifold problem.

Layout (keys marked ? are optional)::

    name: bronze16
    ambient: {dim, index, coord_prefix?, timelike_positions?, printed_signature?}
    params: {count, domain: [[lo, hi], ...]}
    embedding: [expr, ...]                  # one per ambient coordinate
    bronze: {matrix: rows} | {diagonal: [...], blocks?: [{at: i, block: 2x2}]}
    lm: {l, m, eta: [...]}
    frame?: {matrix: rows} | {fields: [[expr, ...] | {coord: expr}, ...]}
    claimed?: {rad_dim, rad_indices, classification, screen_generic, proper,
               minimal, b0_dim, bprime_dim, mu_dim}
    notes?: [text, ...]

Numbers may be given as constant expressions ("sigma", "3-sigma",
"sqrt(3)/2").  Coordinate and frame positions are 1-based.  When
``timelike_positions`` is absent the signature is inferred from the claimed
radical and must be unique.
"""
from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .exprdsl import ExpressionError, eval_constant, parse_expression
from .semilinalg import NoConsistentSignature, SignatureMetric, gram, infer_signature, kernel_basis
from .structure import BronzeStructure, LMParams, StructureError, verify_bronze, verify_compatibility
from .submanifold import GeometryError, ManifoldSpec, frame_vectors

BUILTIN_NAMES = ("bronze16", "minimal11")
CLAIM_KEYS = {
    "rad_dim", "rad_indices", "classification", "screen_generic", "proper",
    "minimal", "b0_dim", "bprime_dim", "mu_dim",
}


class ManifestError(ValueError):
    pass


class ParseError(ManifestError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"parse error{where}: {message}")


class ValidationError(ManifestError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class AmbiguousSignature(ManifestError):
    def __init__(self, candidates):
        self.candidates = candidates
        super().__init__(f"{len(candidates)} consistent signatures; give ambient.timelike_positions")


@dataclass(frozen=True)
class LoadedManifest:
    spec: ManifoldSpec
    document: dict
    signature_candidates: tuple[tuple[int, ...], ...]
    discrepancies: tuple[str, ...]


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _need(doc: dict, key: str, path: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError(f"{path}.{key}" if path else key, "missing")
    return doc[key]


def _number(x, path: str) -> float:
    if isinstance(x, bool):
        raise ValidationError(path, "expected a number")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return eval_constant(x)
        except ExpressionError as exc:
            raise ValidationError(path, f"bad constant {x!r}: {exc}") from None
    raise ValidationError(path, "expected a number or constant expression")


def _int(x, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValidationError(path, "expected an integer")
    return x


def _matrix(rows, path: str, shape=None) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValidationError(path, "expected a list of rows")
    if len({len(r) for r in rows}) != 1:
        raise ValidationError(path, "rows have different lengths")
    M = np.array([[_number(v, f"{path}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)])
    if shape is not None and M.shape != shape:
        raise ValidationError(path, f"expected shape {shape}, got {M.shape}")
    return M


def _expr(text, count: int, path: str):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise ValidationError(path, "expected an expression string")
    try:
        return parse_expression(text, count)
    except ExpressionError as exc:
        raise ValidationError(path, str(exc)) from None


def _coord_index(key, prefix: str, n: int, path: str) -> int:
    if isinstance(key, int) and not isinstance(key, bool):
        i = key
    elif isinstance(key, str) and key.startswith(prefix) and key[len(prefix):].isdigit():
        i = int(key[len(prefix):])
    else:
        raise ValidationError(path, f"bad coordinate name {key!r}")
    if not 1 <= i <= n:
        raise ValidationError(path, f"coordinate {key!r} out of range 1..{n}")
    return i - 1


def _field_row(row, count: int, n: int, prefix: str, path: str):
    if isinstance(row, list):
        if len(row) != n:
            raise ValidationError(path, f"expected {n} components, got {len(row)}")
        return tuple(_expr(v, count, f"{path}[{j}]") for j, v in enumerate(row))
    if isinstance(row, dict):
        comps = ["0"] * n
        for k, v in row.items():
            comps[_coord_index(k, prefix, n, f"{path}.{k}")] = v
        return tuple(_expr(v, count, f"{path}.{j}") for j, v in enumerate(comps))
    raise ValidationError(path, "frame field must be a list or a coordinate mapping")


def _bronze(doc, n: int) -> np.ndarray:
    if "matrix" in doc:
        return _matrix(doc["matrix"], "bronze.matrix", (n, n))
    diag = _need(doc, "diagonal", "bronze")
    if not isinstance(diag, list) or len(diag) != n:
        raise ValidationError("bronze.diagonal", f"expected {n} entries")
    J = np.diag([_number(v, f"bronze.diagonal[{i}]") for i, v in enumerate(diag)])
    for bi, blk in enumerate(doc.get("blocks") or []):
        p = f"bronze.blocks[{bi}]"
        at = _int(_need(blk, "at", p), f"{p}.at") - 1
        B = _matrix(_need(blk, "block", p), f"{p}.block")
        k = B.shape[0]
        if B.shape != (k, k) or at < 0 or at + k > n:
            raise ValidationError(p, "block does not fit")
        J[at:at + k, at:at + k] = B
    return J


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------


def parse_text(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        msg = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            raise ParseError(msg, mark.line + 1, mark.column + 1) from None
        raise ParseError(msg) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a mapping")
    return doc


@dataclass
class _Parsed:
    n: int
    q: int
    prefix: str
    count: int
    dom: np.ndarray
    embedding: tuple
    J: np.ndarray
    l: float
    m: float
    eta: np.ndarray
    frame_matrix: np.ndarray | None
    frame_fields: tuple | None
    claimed: dict


def _parse(doc: dict) -> _Parsed:
    """Field-by-field validation of everything except the signature."""
    amb = _need(doc, "ambient", "")
    n = _int(_need(amb, "dim", "ambient"), "ambient.dim")
    q = _int(_need(amb, "index", "ambient"), "ambient.index")
    if n < 2:
        raise ValidationError("ambient.dim", "must be at least 2")
    if not 1 <= q <= n - 1:
        raise ValidationError("ambient.index", f"must lie in 1..{n - 1}")
    prefix = str(amb.get("coord_prefix", "x"))

    par = _need(doc, "params", "")
    m = _int(_need(par, "count", "params"), "params.count")
    dom = _matrix(_need(par, "domain", "params"), "params.domain", (m, 2))
    if np.any(dom[:, 1] < dom[:, 0]):
        raise ValidationError("params.domain", "intervals must satisfy lo <= hi")

    emb = _need(doc, "embedding", "")
    if not isinstance(emb, list) or len(emb) != n:
        raise ValidationError("embedding", f"expected {n} expressions, got {len(emb) if isinstance(emb, list) else 0}")
    embedding = tuple(_expr(e, m, f"embedding[{i}]") for i, e in enumerate(emb))

    J = _bronze(_need(doc, "bronze", ""), n)

    lmd = _need(doc, "lm", "")
    l_ = _number(_need(lmd, "l", "lm"), "lm.l")
    m_ = _number(_need(lmd, "m", "lm"), "lm.m")
    eta_raw = _need(lmd, "eta", "lm")
    if not isinstance(eta_raw, list) or len(eta_raw) != n:
        raise ValidationError("lm.eta", f"expected {n} components")
    eta = np.array([_number(v, f"lm.eta[{i}]") for i, v in enumerate(eta_raw)])
    if l_ == 0.0 and m_ == 0.0:
        raise ValidationError("lm", "(l, m) must not be (0, 0)")

    frame_matrix = frame_fields = None
    fr = doc.get("frame") or {}
    if "matrix" in fr and "fields" in fr:
        raise ValidationError("frame", "give either matrix or fields")
    if "matrix" in fr:
        frame_matrix = _matrix(fr["matrix"], "frame.matrix")
        if frame_matrix.shape[1] != m:
            raise ValidationError("frame.matrix", f"rows must have {m} entries")
        if np.linalg.svd(frame_matrix, compute_uv=False)[-1] <= 1e-9:
            raise ValidationError("frame.matrix", "not of full row rank")
    elif "fields" in fr:
        rows = fr["fields"]
        if not isinstance(rows, list) or not rows:
            raise ValidationError("frame.fields", "expected a non-empty list")
        frame_fields = tuple(_field_row(r, m, n, prefix, f"frame.fields[{i}]") for i, r in enumerate(rows))

    claimed = dict(doc.get("claimed") or {})
    unknown = set(claimed) - CLAIM_KEYS
    if unknown:
        raise ValidationError(f"claimed.{sorted(unknown)[0]}", "unknown claim")
    return _Parsed(n, q, prefix, m, dom, embedding, J, l_, m_, eta, frame_matrix, frame_fields, claimed)


def _probe_frame(p: _Parsed) -> np.ndarray:
    """Frame at the domain center under a placeholder signature (the frame does not depend on it)."""
    probe = ManifoldSpec(
        name="probe",
        metric=SignatureMetric.from_timelike(p.n, list(range(p.q))),
        embedding=p.embedding,
        bronze=BronzeStructure(p.J),
        lm=LMParams(p.l, p.m, p.eta),
        sample_domain=p.dom,
        frame_matrix=p.frame_matrix,
        frame_fields=p.frame_fields,
        coord_prefix=p.prefix,
    )
    return frame_vectors(probe, p.dom.mean(axis=1))


def _claimed_radical(p: _Parsed, k: int) -> tuple[list[int], int | None]:
    rad_idx = p.claimed.get("rad_indices")
    rad_dim = p.claimed.get("rad_dim")
    if rad_idx is None and rad_dim is None:
        raise ValidationError("ambient.timelike_positions", "missing, and no claimed radical to infer it from")
    idx = []
    for i, a in enumerate(rad_idx or []):
        a = _int(a, f"claimed.rad_indices[{i}]")
        if not 1 <= a <= k:
            raise ValidationError(f"claimed.rad_indices[{i}]", "frame index out of range")
        idx.append(a - 1)
    return idx, (None if rad_dim is None else _int(rad_dim, "claimed.rad_dim"))


def signature_listing(doc: dict, index: int | None = None) -> list[tuple[tuple[int, ...], int]]:
    """Every timelike position set consistent with the claimed radical, with the
    dimension of the tangent kernel it induces at the domain center.

    Raises NoConsistentSignature when there is none.
    """
    p = _parse(doc)
    q = p.q if index is None else index
    if not 1 <= q <= p.n - 1:
        raise ValidationError("index", f"must lie in 1..{p.n - 1}")
    B = _probe_frame(p)
    idx, rad_dim = _claimed_radical(p, B.shape[0])
    out = []
    for combo in infer_signature(B, idx, q, rad_dim=rad_dim):
        metric = SignatureMetric.from_timelike(p.n, combo)
        out.append((combo, kernel_basis(gram(metric, B)).shape[0]))
    return out


def build(doc: dict, source: str = "<manifest>") -> LoadedManifest:
    """Validate a parsed manifest and build the spec."""
    notes: list[str] = [str(x) for x in (doc.get("notes") or [])]
    p = _parse(doc)
    n, q, prefix, dom, embedding, J = p.n, p.q, p.prefix, p.dom, p.embedding, p.J
    l_, m_, eta, frame_matrix, frame_fields, claimed = p.l, p.m, p.eta, p.frame_matrix, p.frame_fields, p.claimed
    amb = doc["ambient"]

    # bronze axioms and compatibility are checked once the signature is known
    candidates: tuple[tuple[int, ...], ...] = ()
    if amb.get("timelike_positions") is not None:
        tp = amb["timelike_positions"]
        if not isinstance(tp, list) or len(tp) != q:
            raise ValidationError("ambient.timelike_positions", f"expected {q} positions")
        pos = [_coord_index(x, prefix, n, f"ambient.timelike_positions[{i}]") for i, x in enumerate(tp)]
        metric = SignatureMetric.from_timelike(n, pos)
    else:
        B = _probe_frame(p)
        idx, rad_dim = _claimed_radical(p, B.shape[0])
        found = infer_signature(B, idx, q, rad_dim=rad_dim)
        candidates = tuple(found)
        if len(found) > 1:
            raise AmbiguousSignature(found)
        metric = SignatureMetric.from_timelike(n, found[0])
        names = ",".join(f"{prefix}{i + 1}" for i in found[0])
        notes.append(f"signature inferred from the claimed radical: timelike coordinates {{{names}}}")
    printed = amb.get("printed_signature")
    if printed is not None:
        notes.append(_printed_signature_note(str(printed), metric, prefix))

    try:
        bronze = BronzeStructure(J)
        lm = LMParams(l_, m_, eta)
    except StructureError as exc:
        raise ValidationError("bronze" if "bronze" in str(exc) else "lm", str(exc)) from None
    if verify_bronze(J) > 1e-12:
        raise ValidationError("bronze", f"J^2 - 3J - I has residual {verify_bronze(J):.3e}")
    sym, _ = verify_compatibility(J, metric)
    if sym > 1e-12:
        raise ValidationError("bronze", "matrix is not self-adjoint for the metric")
    try:
        lm.check_unit(metric)
    except StructureError:
        raise ValidationError("lm.eta", "lm.eta not unit spacelike") from None

    try:
        spec = ManifoldSpec(
            name=str(doc.get("name", Path(source).stem)),
            metric=metric,
            embedding=embedding,
            bronze=bronze,
            lm=lm,
            sample_domain=dom,
            frame_matrix=frame_matrix,
            frame_fields=frame_fields,
            claimed=claimed,
            notes=tuple(notes),
            coord_prefix=prefix,
        )
    except GeometryError as exc:
        raise ValidationError("frame", str(exc)) from None
    return LoadedManifest(spec, doc, candidates, tuple(notes))


def _printed_signature_note(printed: str, metric: SignatureMetric, prefix: str) -> str:
    inner_text = printed.strip().strip("()")
    parts = [p.strip() for p in inner_text.split(",")]
    empty = sum(1 for p in parts if p == "")
    signs = [p for p in parts if p]
    issues = []
    if empty:
        issues.append(f"{empty} empty slot(s)")
    if len(signs) != metric.dim:
        issues.append(f"{len(signs)} signs for {metric.dim} coordinates")
    neg = [i for i, p in enumerate(signs) if p == "-"]
    if tuple(neg) != metric.timelike:
        issues.append(
            "timelike positions {" + ",".join(f"{prefix}{i + 1}" for i in neg) + "} differ from the adopted {"
            + ",".join(f"{prefix}{i + 1}" for i in metric.timelike) + "}"
        )
    verdict = "; ".join(issues) if issues else "consistent with the adopted signature"
    return f"printed signature {printed}: {verdict}"


def load_manifest(path) -> LoadedManifest:
    p = Path(path)
    try:
        text = p.read_text(encoding="ascii")
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {p}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"non-ASCII byte at offset {exc.start}") from None
    return build(parse_text(text), str(p))


def builtin_text(name: str) -> str:
    if name not in BUILTIN_NAMES:
        raise ManifestError(f"unknown built-in example {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return importlib.resources.files("nullframe").joinpath("data", f"{name}.yaml").read_text(encoding="ascii")


def load_builtin(name: str) -> LoadedManifest:
    return build(parse_text(builtin_text(name)), f"{name}.yaml")


def resolve(name_or_path: str) -> LoadedManifest:
    """A built-in example name or a path to a manifest file."""
    if name_or_path in BUILTIN_NAMES and not Path(name_or_path).exists():
        return load_builtin(name_or_path)
    return load_manifest(name_or_path)


__all__ = [
    "AmbiguousSignature", "BUILTIN_NAMES", "LoadedManifest", "ManifestError", "NoConsistentSignature",
    "ParseError", "ValidationError", "build", "builtin_text", "load_builtin", "load_manifest",
    "parse_text", "resolve", "signature_listing",
]
