"""Command-line interface: ``nullframe check|identities|infer-signature|example``.

Exit codes: 0 pass, 1 input error, 2 residual or claim failure, 3 signature failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.stats import qmc

from . import __version__
from .connection import PointGeometry
from .manifest import (
    AmbiguousSignature,
    ManifestError,
    ParseError,
    ValidationError,
    builtin_text,
    load_manifest,
    parse_text,
    resolve,
    signature_listing,
)
from .semilinalg import NoConsistentSignature, gram
from .submanifold import FrameDiscontinuity, GeometryError, ManifoldSpec
from .verify import (
    DEFAULT_TOL,
    DistributionTooSmall,
    ResidualReport,
    bronze_entries,
    geodesicity_check,
    integrability_check,
    minimality_check,
    parallelism_check,
    point_identities,
    umbilical_fit,
)

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_INPUT, EXIT_RESIDUAL, EXIT_SIGNATURE = 0, 1, 2, 3
EDGE_OFFSET = 0.05


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


def sample_points(domain: np.ndarray, count: int, seed: int) -> np.ndarray:
    """Scrambled Halton points in the domain, kept 5% away from every edge."""
    domain = np.asarray(domain, dtype=float)
    u = qmc.Halton(d=domain.shape[0], scramble=True, seed=seed).random(count)
    lo, hi = domain[:, 0], domain[:, 1]
    return lo + (EDGE_OFFSET + (1.0 - 2.0 * EDGE_OFFSET) * u) * (hi - lo)


def lm_draws(spec: ManifoldSpec, count: int, seed: int) -> list[tuple[float, float]]:
    """The manifest's (l, m) followed by ``count`` seeded draws from [-2, 2]^2 minus a disc around 0."""
    rng = np.random.default_rng([seed, 0x1A])
    out = [(float(spec.lm.l), float(spec.lm.m))]
    while len(out) < count + 1:
        l, m = rng.uniform(-2.0, 2.0, size=2)
        if abs(l) + abs(m) > 1e-3:
            out.append((float(l), float(m)))
    return out


def worker_count() -> int:
    env = os.environ.get("NULLFRAME_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


# --------------------------------------------------------------------------
# per-point evaluation
# --------------------------------------------------------------------------


def _radical_frame_indices(geom: PointGeometry, tol: float = 1e-9) -> list[int]:
    B = geom.B / np.linalg.norm(geom.B, axis=1, keepdims=True)
    G = gram(geom.g, B)
    return [a + 1 for a in range(B.shape[0]) if np.max(np.abs(G[a])) <= tol]


def _theorem_checks(spec: ManifoldSpec, geom: PointGeometry, tol: float) -> dict:
    out: dict = {}
    rep = geom.decomp.generic
    if rep is None or not rep.screen_generic:
        return {"skipped": "not screen generic at this point"}
    for dist in ("B0", "Bprime", "B"):
        try:
            out[f"integrable_{dist}"] = integrability_check(spec, dist, geom=geom, tol=tol).to_dict()
        except DistributionTooSmall as exc:
            out[f"integrable_{dist}"] = {"skipped": str(exc)}
    for dist in ("B0", "Bprime"):
        out[f"parallel_{dist}"] = parallelism_check(spec, dist, geom=geom, tol=tol).to_dict()
    for mode in ("B_geodesic", "mixed_geodesic"):
        out[mode] = geodesicity_check(spec, mode, geom=geom, tol=tol).to_dict()
    return out


def evaluate_point(spec: ManifoldSpec, t, index: int, lm_samples, seed: int, tol: float,
                   full: bool = True) -> tuple[dict, ResidualReport]:
    """Decomposition summary, identities and (for ``check``) theorem, umbilicity and minimality data."""
    rng = np.random.default_rng([seed, index])
    try:
        geom = PointGeometry(spec, t)
        ids = point_identities(spec, t, lm_samples, rng, tol=tol, geom=geom)
    except FrameDiscontinuity as exc:
        r = ResidualReport(tolerance=tol)
        r.note(f"point {index} skipped: {exc}")
        return {"t": np.asarray(t).tolist(), "skipped": str(exc)}, r
    d = geom.decomp
    info = d.summary()
    info["rad_indices"] = _radical_frame_indices(geom)
    if d.generic is not None:
        info["frame_direction_mismatch"] = float(geom.fj.direction_mismatch)
    if full:
        info["theorems"] = _theorem_checks(spec, geom, tol)
        u = umbilical_fit(spec, geom=geom)
        info["umbilical"] = u.to_dict()
        if d.stm.dim:
            info["minimality"] = minimality_check(spec, geom=geom, tol=tol).to_dict()
    return info, ids


# --------------------------------------------------------------------------
# claims
# --------------------------------------------------------------------------


def _found_value(key: str, info: dict):
    sg = info.get("screen_generic") or {}
    if key == "rad_dim":
        return info["dims"]["rad"]
    if key == "rad_indices":
        return info["rad_indices"]
    if key == "classification":
        return info["classification"]
    if key in ("screen_generic", "proper", "b0_dim", "bprime_dim", "mu_dim"):
        return sg.get(key)
    if key == "minimal":
        mv = info.get("minimality")
        return None if mv is None else mv["minimal"]
    return None


def claims_table(spec: ManifoldSpec, infos: list[dict]) -> list[dict]:
    rows = []
    live = [i for i in infos if "skipped" not in i]
    for key in sorted(spec.claimed):
        claimed = spec.claimed[key]
        values = [_found_value(key, i) for i in live]
        distinct = []
        for v in values:
            if v not in distinct:
                distinct.append(v)
        found = distinct[0] if len(distinct) == 1 else distinct
        match = bool(live) and all(v == claimed for v in values)
        rows.append({"claim": key, "claimed": claimed, "found": found, "match": match,
                     "points_matching": sum(v == claimed for v in values), "points": len(live)})
    return rows


# --------------------------------------------------------------------------
# report assembly
# --------------------------------------------------------------------------


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    return str(o)


def run(spec: ManifoldSpec, loaded_notes, document: dict, source: str, command: str, points: int, seed: int,
        tol: float, draws: int) -> tuple[dict, int]:
    pts = sample_points(spec.sample_domain, points, seed)
    lms = lm_draws(spec, draws, seed)
    full = command == "check"
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(lambda i: evaluate_point(spec, pts[i], i, lms, seed, tol, full), range(len(pts))))
    total = bronze_entries(spec)
    total.tolerance = tol
    for note in loaded_notes:
        total.note(note)
    infos = []
    for info, r in results:
        infos.append(info)
        total.merge(r)
    if spec.frame_fields is not None:
        mism = [i.get("frame_direction_mismatch", 0.0) for i in infos if "skipped" not in i]
        if mism and max(mism) > 1e-8:
            total.note(f"derivatives along frame vectors outside the parameter tangent space use least-squares "
                       f"parameter directions; max direction mismatch {max(mism):.3e}")
    claims = claims_table(spec, infos) if full else []
    failures = [e.name for e in total.failures()]
    claim_fail = [c["claim"] for c in claims if not c["match"]]
    code = EXIT_OK if not failures and not claim_fail else EXIT_RESIDUAL
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "manifest": {"name": spec.name, "source": source, "document": document},
        "settings": {"points": points, "seed": seed, "tol": tol, "lm_samples": [list(x) for x in lms]},
        "points": infos,
        "identities": total.to_dict()["entries"],
        "claims": claims,
        "discrepancies": total.discrepancies,
        "result": {"exit_code": code, "failed_identities": failures, "failed_claims": claim_fail},
    }
    return doc, code


def render_text(doc: dict) -> str:
    lines = [f"{doc['manifest']['name']}: {doc['command']} at {doc['settings']['points']} points "
             f"(seed {doc['settings']['seed']}, tol {doc['settings']['tol']:g})"]
    live = [p for p in doc["points"] if "skipped" not in p]
    if live:
        kinds = sorted({p["classification"] for p in live})
        lines.append(f"classification: {', '.join(kinds)}")
    if doc["claims"]:
        lines.append("claims:")
        for c in doc["claims"]:
            mark = "ok  " if c["match"] else "FAIL"
            lines.append(f"  {mark} {c['claim']}: claimed {c['claimed']!r}, found {c['found']!r}")
    lines.append("identities:")
    for e in doc["identities"]:
        st = e["status"]
        mark = "ok  " if st == "pass" else ("skip" if st.startswith("skipped") else "FAIL")
        extra = f" [{st}]" if mark == "skip" else f" {e['max_residual']:.3e}"
        lines.append(f"  {mark} {e['anchor']:<7} {e['name']}{extra}")
    if doc["discrepancies"]:
        lines.append("notes:")
        lines.extend(f"  - {d}" for d in doc["discrepancies"])
    lines.append(f"exit code {doc['result']['exit_code']}")
    return "\n".join(lines)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _cmd_run(args, command: str) -> int:
    loaded = resolve(args.manifest)
    doc, code = run(loaded.spec, loaded.discrepancies, loaded.document, args.manifest, command, args.points,
                    args.seed, args.tol, args.lm_draws)
    print(render_text(doc))
    if args.json:
        with open(args.json, "w", encoding="ascii") as fh:
            fh.write(dumps(doc))
    return code


def _cmd_infer(args) -> int:
    if os.path.exists(args.manifest):
        try:
            with open(args.manifest, encoding="ascii") as fh:
                text = fh.read()
        except UnicodeDecodeError as exc:
            raise ParseError(f"non-ASCII byte at offset {exc.start}") from None
    else:
        text = builtin_text(args.manifest)
    doc = parse_text(text)
    prefix = str((doc.get("ambient") or {}).get("coord_prefix", "x"))
    for combo, kdim in signature_listing(doc, args.index):
        names = ",".join(f"{prefix}{i + 1}" for i in combo)
        print(f"{{{names}}}  kernel dimension {kdim}")
    return EXIT_OK


def _cmd_example(args) -> int:
    sys.stdout.write(builtin_text(args.name))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nullframe",
                                description="Numerical checks for lightlike submanifolds of bronze semi-Riemannian spaces.")
    p.add_argument("--version", action="version", version=f"nullframe {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("check", "decomposition, claims, identities and theorem conditions"),
                           ("identities", "identity suite only")):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("manifest", help="manifest path or built-in example name")
        c.add_argument("--points", type=int, default=20, help="number of sample points (default 20)")
        c.add_argument("--seed", type=int, default=0, help="seed for sampling and random arguments")
        c.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance (default 1e-8)")
        c.add_argument("--lm-draws", type=int, default=5, help="random (l, m) pairs besides the manifest's")
        c.add_argument("--json", metavar="PATH", help="write the JSON report here")
    s = sub.add_parser("infer-signature", help="list timelike position sets consistent with the claimed radical")
    s.add_argument("manifest")
    s.add_argument("--index", type=int, default=None, help="number of timelike coordinates (default: ambient.index)")
    e = sub.add_parser("example", help="print a built-in example manifest")
    e.add_argument("name", choices=("bronze16", "minimal11"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "points", 1) < 1:
        print("error: --points must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command in ("check", "identities"):
            return _cmd_run(args, args.command)
        if args.command == "infer-signature":
            return _cmd_infer(args)
        return _cmd_example(args)
    except (AmbiguousSignature, NoConsistentSignature) as exc:
        print(f"signature error: {exc}", file=sys.stderr)
        if isinstance(exc, AmbiguousSignature):
            for combo in exc.candidates:
                print("  candidate {" + ",".join(str(i + 1) for i in combo) + "}", file=sys.stderr)
        return EXIT_SIGNATURE
    except ParseError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as exc:
        print(f"invalid manifest: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ManifestError, GeometryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["main", "build_parser", "run", "sample_points", "lm_draws", "claims_table", "dumps", "load_manifest"]
