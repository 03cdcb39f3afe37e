"""Command line front end: one manifest, one operation, one run directory.

Usage::

    lorlab <command> --manifest run.json [--out DIR] [--seed N] [--strict] [--jobs N]
    lorlab run --manifest run.json

A manifest is a JSON object::

    {
      "command": "scan",                       # optional if given on the command line
      "space": {"kind": "sprinkle", "region": {...}, "n": 500, "seed": 1, "include_tips": true},
      "cfg": {"K": 0.0, "tol": 1e-6},
      "params": {...},                         # command specific, see PARAM_SCHEMAS
      "seed": 0,
      "output": "runs/scan"
    }

Every run writes ``result.json`` (the payload), ``summary.csv``, any
command-specific tables or TSV series, and ``stamp.json`` holding the seed,
package versions, manifest hash and a timestamp.  Only the stamp varies
between identical runs.

Exit status: 0 on success, 1 when ``--strict`` is given and a verdict fails,
2 on manifest or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import platform
import re
import sys
import time
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .comparison import (
    ComparisonReport,
    check_angle_condition,
    check_hinge_condition,
    check_triangle_condition,
    make_triangle,
    verify_alexandrov_future,
)
from .errors import LorlabError, ManifestError
from .gh import BoundedLorentzianSpace, NORMALISATION, diamond_to_bounded, gh_distance, stability_experiment
from .globalisation import (
    bonnet_myers_check,
    cats_cradle,
    diameter_refinement,
    gluing_subdivide,
    greedy_cover,
    lebesgue_number,
    lebesgue_violations,
    scan_global_bound,
)
from .model_space import ModelConfig
from .null_distance import check_piecewise_connectivity, export_csv
from .spaces import AnalyticSpace, DiscreteSpace, Region, load_space, save_space, sprinkle

COMMANDS = ("sprinkle", "tau", "nulldist", "check", "alexandrov", "glue", "cradle", "lebesgue", "scan",
            "diameter", "gh", "stability")

_point = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_vertex = {"oneOf": [{"type": "integer", "minimum": 0}, _point]}
_triangle = {"type": "array", "items": _vertex, "minItems": 3, "maxItems": 3}
_region = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["flat-diamond", "flat-slab", "model-patch"]},
        "lo": _point,
        "hi": _point,
        "K": {"type": "number"},
    },
    "required": ["kind", "lo", "hi"],
    "additionalProperties": False,
}
_space = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["sprinkle", "load", "analytic"]},
        "region": _region,
        "n": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "include_tips": {"type": "boolean"},
        "path": {"type": "string"},
    },
    "required": ["kind"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "sprinkle"}}}, "then": {"required": ["region", "n"]}},
        {"if": {"properties": {"kind": {"const": "load"}}}, "then": {"required": ["path"]}},
        {"if": {"properties": {"kind": {"const": "analytic"}}}, "then": {"required": ["region"]}},
    ],
}

MANIFEST_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "space": _space,
        "cfg": {
            "type": "object",
            "properties": {"K": {"type": "number"}, "tol": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "params": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
    },
    "additionalProperties": False,
}


def _params(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_triangles = {"type": "array", "items": _triangle}
_count = {"type": "integer", "minimum": 1}
_frac = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}

PARAM_SCHEMAS = {
    "sprinkle": _params({"save_tau": {"type": "boolean"}}),
    "tau": _params({"pairs": {"type": "array", "items": {"type": "array", "items": _vertex,
                                                         "minItems": 2, "maxItems": 2}}}),
    "nulldist": _params({}),
    "check": _params({"mode": {"enum": ["angle", "hinge", "triangle"]}, "triangles": _triangles,
                      "random": _count, "samples": _count, "vertices": {"type": "array",
                                                                       "items": {"enum": ["p", "q", "r"]}}}),
    "alexandrov": _params({"triangles": _triangles, "random": _count, "fraction": _frac,
                           "side": {"enum": ["pq", "qr"]}}),
    "glue": _params({"triangle": _triangle, "fraction": _frac, "vertex": {"enum": ["p", "r"]}}, ["triangle"]),
    "cradle": _params({"triangle": _triangle, "epsilon": {"type": "number"}, "max_steps": _count}, ["triangle"]),
    "lebesgue": _params({"x": {"type": "integer", "minimum": 0}, "y": {"type": "integer", "minimum": 0},
                         "radius": {"type": "number", "exclusiveMinimum": 0}, "check": {"type": "boolean"}}),
    "scan": _params({"triangles": _count, "max_size": {"type": "number", "exclusiveMinimum": 0}}),
    "diameter": _params({"ns": {"type": "array", "items": _count, "minItems": 1}}),
    "gh": _params({"spaces": {"type": "array", "items": {"oneOf": [_space, {
        "type": "object", "properties": {"bounded": {"type": "string"}}, "required": ["bounded"],
        "additionalProperties": False}]}, "minItems": 2, "maxItems": 2},
                   "mode": {"enum": ["exact", "search"]}, "restarts": _count}, ["spaces"]),
    "stability": _params({"ns": {"type": "array", "items": _count, "minItems": 2},
                          "mode": {"enum": ["exact", "search"]}, "restarts": _count, "triangles": _count}),
}

#: Commands that need a space in the manifest.
NEEDS_SPACE = {c for c in COMMANDS if c != "gh"}


# ---------------------------------------------------------------------------
# manifest handling


def _field_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate_manifest(doc, command: str | None = None) -> dict:
    """Schema-check ``doc`` and return it with ``command`` filled in.

    Raises
    ------
    ManifestError
        With the JSON path of the first offending field.
    """
    v = jsonschema.Draft202012Validator(MANIFEST_SCHEMA)
    errs = sorted(v.iter_errors(doc), key=lambda e: _field_path(e))
    if errs:
        e = errs[0]
        raise ManifestError(f"{_field_path(e)}: {e.message}", _field_path(e))
    doc = dict(doc)
    cmd = doc.get("command", None if command == "run" else command)
    if cmd is None:
        raise ManifestError("command: missing (give it in the manifest or on the command line)", "command")
    if command is not None and command != "run" and cmd != command:
        raise ManifestError(f"command: manifest says {cmd!r} but {command!r} was requested", "command")
    doc["command"] = cmd
    pv = jsonschema.Draft202012Validator(PARAM_SCHEMAS[cmd])
    errs = sorted(pv.iter_errors(doc.get("params", {})), key=lambda e: _field_path(e))
    if errs:
        e = errs[0]
        path = "params/" + _field_path(e) if e.absolute_path else "params"
        raise ManifestError(f"{path}: {e.message}", path)
    if cmd in NEEDS_SPACE and "space" not in doc:
        raise ManifestError("space: required for command " + repr(cmd), "space")
    return doc


def load_manifest(path, command: str | None = None) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return validate_manifest(doc, command)


def build_space(spec: dict, seed_override: int | None = None):
    kind = spec["kind"]
    if kind == "load":
        return load_space(spec["path"])
    region = Region.from_dict(spec["region"])
    if kind == "analytic":
        return AnalyticSpace(region)
    seed = seed_override if seed_override is not None else spec.get("seed", 0)
    return sprinkle(region, spec["n"], seed, spec.get("include_tips", False))


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """JSON-ready copy: numpy scalars unwrapped, non-finite floats as strings, tuples as lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


class RunDir:
    def __init__(self, path: Path):
        self.path = path
        path.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, obj) -> None:
        (self.path / name).write_text(json.dumps(_clean(obj), sort_keys=True, indent=1) + "\n")

    def csv(self, name: str, header, rows) -> None:
        with open(self.path / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])

    def tsv(self, name: str, xs, ys) -> None:
        """Two-column series for plotting."""
        with open(self.path / name, "w") as fh:
            for x, y in zip(xs, ys):
                fh.write(f"{x!r}\t{float(y)!r}\n")


def _versions() -> dict:
    out = {"python": platform.python_version(), "lorlab": __version__}
    for pkg in ("numpy", "scipy", "numba", "networkx", "jsonschema"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


# ---------------------------------------------------------------------------
# published artifact schemas

_num = {"oneOf": [{"type": "number"}, {"enum": ["nan", "inf", "-inf"]}]}

RESULT_SCHEMA = {
    "type": "object",
    "required": ["command", "seed", "K", "result", "verdict_failures"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0},
        "K": {"type": "number"},
        "result": {"type": "object"},
        "verdict_failures": {"type": "integer", "minimum": 0},
    },
}

STAMP_SCHEMA = {
    "type": "object",
    "required": ["seed", "seed_override", "versions", "manifest_sha256", "jobs", "timestamp"],
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "seed_override": {"type": ["integer", "null"]},
        "versions": {"type": "object", "additionalProperties": {"type": "string"}},
        "manifest_sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "jobs": {"type": "integer", "minimum": 1},
        "timestamp": {"type": "string", "pattern": r"^\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ$"},
    },
}

_triple = {"type": "array", "prefixItems": [{"type": "integer"}, {"type": "integer"}, {"type": "number"}],
           "minItems": 3, "maxItems": 3}
SPACE_SCHEMA = {
    "type": "object",
    "required": ["version", "region", "seed", "K", "points", "edges"],
    "additionalProperties": False,
    "properties": {
        "version": {"type": "integer"},
        "region": {"type": ["object", "null"]},
        "seed": {"type": ["integer", "null"]},
        "K": {"type": "number"},
        "points": {"type": "array", "items": {
            "type": "object", "required": ["id", "coords"], "additionalProperties": False,
            "properties": {"id": {"type": "integer"}, "coords": {"oneOf": [{"type": "null"}, _point]}}}},
        "edges": {"type": "array", "items": _triple},
        "tau": {"type": "array", "items": _triple},
        "time_function": {"type": "array", "items": {"type": "number"}},
    },
}

JSON_SCHEMAS = {"result.json": RESULT_SCHEMA, "stamp.json": STAMP_SCHEMA, "space.json": SPACE_SCHEMA}

_INT = r"-?\d+"
_FLOAT = r"-?(\d+\.\d*|\d*\.\d+|\d+)(e[-+]?\d+)?|nan|-?inf"
_ANY = r".*"
# header (None: header is the column ids 0..n-1), column patterns (a single pattern repeats), comment lines
CSV_SCHEMAS = {
    "summary.csv": (["key", "value"], [r"\w+", _ANY]),
    "report.csv": (["triangle_id", "vertex", "mode", "margin", "verdict"],
                   [_ANY, r"[pqr*]", r"angle|hinge|triangle", _FLOAT, r"holds|fails"]),
    "summary_rows.csv": (["triangle_id", "by_angle", "by_tau", "agree"],
                         [_ANY, r"|convex|concave|degenerate", r"|convex|concave|degenerate", r"|True|False"]),
    "gh.csv": (["i", "j", "mode", "value", "is_upper_bound"], [_INT, _INT, r"exact|search", _FLOAT, r"true|false"]),
    "tau.csv": (None, [_FLOAT]),
    "nulldist.csv": (None, [_FLOAT]),
}
TSV_PATTERN = (_FLOAT, _FLOAT)


def _check_csv(path: Path, header, cols) -> list[str]:
    probs = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        return [f"{path.name}: empty"]
    want = header if header is not None else [str(i) for i in range(len(rows[0]))]
    if rows[0] != want:
        probs.append(f"{path.name}: header {rows[0]} != {want}")
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(want):
            probs.append(f"{path.name}:{k}: {len(row)} fields, expected {len(want)}")
            continue
        pats = cols if len(cols) == len(row) else cols * len(row)
        for c, (v, pat) in enumerate(zip(row, pats)):
            if not re.fullmatch(pat, v):
                probs.append(f"{path.name}:{k}:{c + 1}: {v!r} does not match {pat!r}")
    return probs


def validate_run_dir(path) -> list[str]:
    """Check every artifact of a run directory against its published schema; returns the problems found."""
    path = Path(path)
    probs = []
    for f in sorted(path.iterdir()):
        if f.name in JSON_SCHEMAS:
            try:
                doc = json.loads(f.read_text())
            except json.JSONDecodeError as exc:
                probs.append(f"{f.name}: {exc}")
                continue
            for err in jsonschema.Draft202012Validator(JSON_SCHEMAS[f.name]).iter_errors(doc):
                probs.append(f"{f.name}: {_field_path(err)}: {err.message}")
        elif f.name in CSV_SCHEMAS:
            probs.extend(_check_csv(f, *CSV_SCHEMAS[f.name]))
        elif f.suffix == ".tsv":
            for k, line in enumerate(f.read_text().splitlines(), start=1):
                parts = line.split("\t")
                if len(parts) != 2 or not all(re.fullmatch(p, v) for p, v in zip(TSV_PATTERN, parts)):
                    probs.append(f"{f.name}:{k}: not a two-column numeric row")
        else:
            probs.append(f"{f.name}: no published schema")
    return probs


# ---------------------------------------------------------------------------
# operations; each returns (payload, failures)


def _vertex_of(space, v):
    if isinstance(space, DiscreteSpace):
        if not isinstance(v, int):
            raise ManifestError("triangle vertices of a discrete space are point indices")
        if not 0 <= v < space.n:
            raise ManifestError(f"point {v} is outside 0..{space.n - 1}")
        return v
    if isinstance(v, int):
        raise ManifestError("triangle vertices of an analytic space are [t, x] pairs")
    return (float(v[0]), float(v[1]))


def _triangles(space, params, cfg, seed):
    tris = []
    for k, t in enumerate(params.get("triangles", [])):
        tris.append(make_triangle(space, *(_vertex_of(space, v) for v in t), cfg, id=k))
    if "random" in params:
        from .globalisation import _candidate_triangles

        rng = np.random.default_rng(seed)
        base = len(tris)
        for k, t in enumerate(_candidate_triangles(space, params["random"], rng)):
            if space.tau(t[0], t[2]) < cfg.D_K:
                tris.append(make_triangle(space, *t, cfg, id=base + k))
    if not tris:
        raise ManifestError("params: give 'triangles' or 'random'", "params")
    return tris


def op_sprinkle(ctx):
    sp = ctx.space
    if not isinstance(sp, DiscreteSpace):
        raise ManifestError("space: sprinkle needs a discrete space", "space/kind")
    save_space(sp, ctx.out.path / "space.json", ctx.params.get("save_tau", True))
    viol = sp.check_regularity()
    return {"n": sp.n, "edges": int(sp.edge.sum()), "timelike_pairs": int((sp.tau_matrix > 0).sum()),
            "regularity_violations": len(viol)}, 0


def op_tau(ctx):
    sp = ctx.space
    pairs = ctx.params.get("pairs")
    if pairs is None:
        if not isinstance(sp, DiscreteSpace):
            raise ManifestError("params/pairs: required for analytic spaces", "params/pairs")
        ctx.out.csv("tau.csv", list(range(sp.n)), sp.tau_matrix.tolist())
        return {"n": sp.n, "max_tau": float(sp.tau_matrix.max())}, 0
    rows = []
    for a, b in pairs:
        x, y = _vertex_of(sp, a), _vertex_of(sp, b)
        row = {"p": a, "q": b, "tau": sp.tau(x, y)}
        if isinstance(sp, DiscreteSpace) and sp.leq(x, y):
            ch = sp.realiser(x, y)
            row["realiser"] = list(ch.vertices)
            row["realiser_timelike"] = ch.timelike
        rows.append(row)
    return {"pairs": rows}, 0


def op_nulldist(ctx):
    sp = ctx.space
    if not isinstance(sp, DiscreteSpace):
        raise ManifestError("space: nulldist needs a discrete space", "space/kind")
    D = sp.nulldist.matrix
    export_csv(D, ctx.out.path / "nulldist.csv")
    comps = check_piecewise_connectivity(sp)
    finite = np.isfinite(D)
    return {"n": sp.n, "components": len(comps), "component_sizes": [len(c) for c in comps],
            "max_finite": float(D[finite].max()) if finite.any() else 0.0}, 0


def op_check(ctx):
    mode = ctx.mode or ctx.params.get("mode", "angle")
    verts = ctx.params.get("vertices", ["p", "q", "r"])
    rep = ComparisonReport()
    for tri in _triangles(ctx.space, ctx.params, ctx.cfg, ctx.seed):
        if mode == "triangle":
            rep.add(check_triangle_condition(ctx.space, tri, ctx.cfg, ctx.params.get("samples", 64), ctx.seed,
                                             ctx.tol))
            continue
        fn = check_angle_condition if mode == "angle" else check_hinge_condition
        for v in verts:
            if tri.has_angle(v):
                rep.add(fn(ctx.space, tri, ctx.cfg, v, ctx.tol))
    rep = rep.sorted()
    rep.write_csv(ctx.out.path / "report.csv")
    entries = json.loads(rep.to_json())
    return {"mode": mode, "entries": entries, "failures": len(rep.failures)}, len(rep.failures)


def op_alexandrov(ctx):
    frac = ctx.params.get("fraction", 0.5)
    side = ctx.params.get("side", "pq")
    rows = []
    disagree = 0
    for tri in _triangles(ctx.space, ctx.params, ctx.cfg, ctx.seed):
        a, b = (tri.p, tri.q) if side == "pq" else (tri.q, tri.r)
        x = ctx.space.point_along(a, b, frac)
        try:
            res = verify_alexandrov_future(ctx.space, tri, x, ctx.cfg, side)
        except LorlabError as exc:
            rows.append({"triangle_id": tri.id, "error": str(exc)})
            continue
        disagree += not res.agree
        rows.append({"triangle_id": tri.id, "by_angle": res.by_angle, "by_tau": res.by_tau,
                     "angle_far": res.angle_far, "angle_near": res.angle_near, "tau_xr": res.tau_xr,
                     "tau_tilde": res.tau_tilde, "agree": res.agree})
    ctx.out.csv("summary_rows.csv", ["triangle_id", "by_angle", "by_tau", "agree"],
                [[r["triangle_id"], r.get("by_angle", ""), r.get("by_tau", ""), r.get("agree", "")] for r in rows])
    return {"rows": rows, "disagreements": disagree}, disagree


def op_glue(ctx):
    sp = ctx.space
    tri = make_triangle(sp, *(_vertex_of(sp, v) for v in ctx.params["triangle"]), ctx.cfg)
    vertex = ctx.params.get("vertex", "p")
    a, b = (tri.p, tri.q) if vertex == "p" else (tri.q, tri.r)
    x = sp.point_along(a, b, ctx.params.get("fraction", 0.5))
    g = gluing_subdivide(sp, tri, x, ctx.cfg, vertex, ctx.tol)
    names = ["x in (p,x,r)", "p in (p,x,r)", "x in (x,q,r)"]
    return {"vertex": vertex, "x": x, "parent_margin": g.parent.margin, "parent_holds": g.parent.holds,
            "sub": [{"name": n, "margin": e.margin, "holds": e.holds} for n, e in zip(names, g.entries)],
            "contract_ok": g.contract_ok}, int(not g.contract_ok)


def op_cradle(ctx):
    sp = ctx.space
    tri = make_triangle(sp, *(_vertex_of(sp, v) for v in ctx.params["triangle"]), ctx.cfg)
    tr = cats_cradle(sp, tri, ctx.cfg, ctx.params.get("epsilon", 0.25), ctx.params.get("max_steps", 200))
    steps = list(range(len(tr.l)))
    ctx.out.tsv("l_n.tsv", steps, tr.l)
    ctx.out.tsv("model_side.tsv", steps, tr.model_side)
    d = tr.to_dict()
    d["q"] = tr.q
    d["initial_excess"] = tr.initial_excess
    bad = int(not tr.ls5_ok()) + int(not tr.ls6_ok()) + int(tr.initial_excess > 1e-6)
    return d, bad


def op_lebesgue(ctx):
    sp = ctx.space
    if not isinstance(sp, DiscreteSpace) or sp.coords is None:
        raise ManifestError("space: lebesgue needs a discrete space with coordinates", "space/kind")
    x = ctx.params.get("x", 0)
    y = ctx.params.get("y", sp.n - 1)
    cov = greedy_cover(sp, x, y, ctx.params.get("radius", 0.25))
    res = lebesgue_number(sp, cov)
    out = {"x": x, "y": y, "elements": [list(map(list, e)) for e in cov.elements], "epsilon": res.epsilon,
           "unconstrained": res.unconstrained}
    bad = 0
    if ctx.params.get("check", True) and not res.unconstrained:
        viol = lebesgue_violations(sp, cov, res.epsilon)
        out["violations"] = viol
        bad = len(viol) + int(not res.epsilon > 0)
    return out, bad


def op_scan(ctx):
    res = scan_global_bound(ctx.space, ctx.cfg, ctx.params.get("triangles", 1000), ctx.seed, ctx.tol,
                            ctx.params.get("max_size"), jobs=ctx.jobs)
    res.report.write_csv(ctx.out.path / "report.csv")
    ctx.out.tsv("deciles.tsv", list(range(10)), res.per_decile)
    fails = res.failures
    return {"triangles": res.triangles, "failures": len(fails), "max_abs_margin": res.max_abs_margin,
            "per_decile": res.per_decile,
            "failing": [{"triangle_id": e.triangle_id, "vertex": e.vertex, "margin": e.margin} for e in fails]}, \
        len(fails)


def op_diameter(ctx):
    spec = ctx.manifest["space"]
    if ctx.cfg.K >= 0:
        raise ManifestError("cfg/K: the diameter bound needs K < 0", "cfg/K")
    if spec["kind"] == "sprinkle" and "ns" in ctx.params:
        res = diameter_refinement(Region.from_dict(spec["region"]), ctx.cfg, ctx.params["ns"], ctx.seed)
        ctx.out.tsv("diameter.tsv", res.ns, res.diameters)
        ok = res.nondecreasing and res.within_bound
        return {"ns": res.ns, "diameters": res.diameters, "bound": res.bound, "nondecreasing": res.nondecreasing,
                "within_bound": res.within_bound}, int(not ok)
    v = bonnet_myers_check(ctx.space, ctx.cfg)
    return {"diameter": v.diameter, "bound": v.bound, "holds": v.holds, "attained_at": v.attained_at}, \
        int(not v.holds)


def _bounded(spec, seed):
    if "bounded" in spec:
        try:
            doc = json.loads(Path(spec["bounded"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestError(f"cannot read bounded space {spec['bounded']}: {exc}") from exc
        return BoundedLorentzianSpace.from_json_dict(doc)
    sp = build_space(spec, seed)
    if not isinstance(sp, DiscreteSpace):
        raise ManifestError("params/spaces: gh needs discrete or bounded spaces", "params/spaces")
    return diamond_to_bounded(sp, 0, sp.n - 1)


def op_gh(ctx):
    X, Y = (_bounded(s, None) for s in ctx.params["spaces"])
    res = gh_distance(X, Y, ctx.params.get("mode", "exact"), restarts=ctx.params.get("restarts", 32), seed=ctx.seed)
    with open(ctx.out.path / "gh.csv", "w", newline="") as fh:
        fh.write(f"# {NORMALISATION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "mode", "value", "is_upper_bound"])
        w.writerow([0, 1, res.mode, repr(res.value), str(res.is_upper_bound).lower()])
    return {"normalisation": NORMALISATION, "sizes": [len(X), len(Y)], "value": res.value, "mode": res.mode,
            "is_upper_bound": res.is_upper_bound, "correspondence": [list(p) for p in res.pairs]}, 0


def op_stability(ctx):
    spec = ctx.manifest["space"]
    if spec["kind"] != "sprinkle":
        raise ManifestError("space/kind: stability sprinkles its own sequence", "space/kind")
    region = Region.from_dict(spec["region"])
    seed = ctx.seed_override if ctx.seed_override is not None else spec.get("seed", 0)
    spaces = [sprinkle(region, n, seed, include_tips=True) for n in ctx.params.get("ns", [50, 100, 200])]
    rep = stability_experiment(spaces, ctx.cfg, mode=ctx.params.get("mode", "search"), seed=ctx.seed,
                               restarts=ctx.params.get("restarts", 32), triangles=ctx.params.get("triangles", 10),
                               tol=0.05 if ctx.tol is None else ctx.tol)
    rep.write_csv(ctx.out.path / "gh.csv")
    ctx.out.tsv("gh_consecutive.tsv", [s.n for s in spaces[1:]], rep.consecutive())
    return rep.to_dict(), int(not rep.final_holds)


OPS = {"sprinkle": op_sprinkle, "tau": op_tau, "nulldist": op_nulldist, "check": op_check,
       "alexandrov": op_alexandrov, "glue": op_glue, "cradle": op_cradle, "lebesgue": op_lebesgue,
       "scan": op_scan, "diameter": op_diameter, "gh": op_gh, "stability": op_stability}


class Context:
    def __init__(self, manifest, out, seed_override, mode, jobs):
        self.manifest = manifest
        self.out = out
        self.seed_override = seed_override
        self.seed = seed_override if seed_override is not None else manifest.get("seed", 0)
        self.mode = mode
        self.jobs = jobs
        cfg = manifest.get("cfg", {})
        self.cfg = ModelConfig(cfg.get("K", 0.0))
        self.params = manifest.get("params", {})
        self.space = build_space(manifest["space"], seed_override) if "space" in manifest else None
        self.tol = cfg.get("tol")


def run(manifest: dict, out_dir, seed: int | None = None, strict: bool = False, mode: str | None = None,
        jobs: int = 1) -> int:
    """Execute one validated manifest into ``out_dir``; returns the exit status."""
    out = RunDir(Path(out_dir))
    ctx = Context(manifest, out, seed, mode, jobs)
    payload, failures = OPS[manifest["command"]](ctx)
    result = {"command": manifest["command"], "seed": ctx.seed, "K": ctx.cfg.K, "result": payload,
              "verdict_failures": failures}
    out.json("result.json", result)
    summary = [["command", manifest["command"]], ["seed", ctx.seed], ["K", ctx.cfg.K],
               ["verdict_failures", failures]]
    for k, v in sorted(payload.items()):
        if isinstance(v, (int, float, str, bool)) or v is None:
            summary.append([k, v])
    out.csv("summary.csv", ["key", "value"], summary)
    canon = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    out.json("stamp.json", {"seed": ctx.seed, "seed_override": seed, "versions": _versions(),
                            "manifest_sha256": hashlib.sha256(canon).hexdigest(), "jobs": jobs,
                            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())})
    return 1 if strict and failures else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lorlab", description="Lorentzian comparison geometry experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run",) + COMMANDS:
        p = sub.add_parser(name, help="execute the manifest's command" if name == "run" else f"run '{name}'")
        p.add_argument("--manifest", required=True, help="JSON manifest")
        p.add_argument("--out", help="run directory (default: manifest 'output', $LORLAB_OUT, or runs/<command>)")
        p.add_argument("--seed", type=int, help="override every seed in the manifest")
        p.add_argument("--strict", action="store_true", help="exit 1 when a verdict fails")
        p.add_argument("--jobs", type=int, default=1, help="worker threads for scans")
        if name == "check":
            p.add_argument("--mode", choices=["angle", "hinge", "triangle"])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ManifestError("--seed must be an unsigned 64-bit integer", "--seed")
        manifest = load_manifest(args.manifest, args.command)
        out = args.out or manifest.get("output") or os.environ.get("LORLAB_OUT") or \
            os.path.join("runs", manifest["command"])
        return run(manifest, out, args.seed, args.strict, getattr(args, "mode", None), max(1, args.jobs))
    except ManifestError as exc:
        print(f"lorlab: manifest error: {exc}", file=sys.stderr)
        return 2
    except (LorlabError, ValueError, OSError) as exc:
        print(f"lorlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
