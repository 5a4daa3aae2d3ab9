"""Named experiments, canonical report serialisation and schema validation.

A configuration names an experiment, optional group and multiplier specs,
experiment parameters and a seed.  Keys at the top level that are not part
of the envelope are folded into ``params`` before validation, so
``{"experiment": "rieffel", "theta": 0.3}`` is accepted.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from .algebra import AlgebraElement, convolve, l1_norm, norms, random_element
from .errors import CapacityError, SchemaError, UnwritablePathError, ValidationError
from .groups import GroupModel, make_group
from .heat import (
    DiracSystem,
    GoodCompletionSpec,
    L1_SPEC,
    completion_certificate,
    decay_fit,
    growth_constants,
    heat_coefficients,
    magnetic_torus,
    supertrace_index,
    wasserman_idempotent,
)
from .multipliers import make_multiplier, phase_from_two_form, verify_multiplier
from .projections import (
    canonical_idempotent,
    cosine_root,
    indicator_root,
    rieffel_projection,
    triangular_root,
)
from .rapid_decay import rd_constant_estimate
from .spectral import monotonicity_check, spectral_radius
from .trace_range import TraceSubgroup, subgroup_membership, trace_range

ENVELOPE = {"experiment", "group", "multiplier", "params", "seed", "output"}
EXPERIMENTS = (
    "verify-cocycle", "convolve", "norms", "rd-scan", "spectral",
    "heat", "index", "idempotent", "rieffel", "trace-range",
)


# schemas ----------------------------------------------------------------------
def load_schema(name: str) -> dict:
    text = resources.files("twistlab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _strip_ids(schema: dict) -> dict:
    return {k: v for k, v in schema.items() if k not in ("$schema", "$id")}


def _validate(doc: Any, schema: dict, prefix: str = "") -> None:
    errors = sorted(Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = prefix + "".join(f"/{p}" for p in e.absolute_path)
        raise SchemaError(e.message, pointer)


def normalise_config(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise SchemaError("configuration must be a JSON object", "")
    cfg = {k: copy.deepcopy(v) for k, v in raw.items() if k in ENVELOPE}
    extra = {k: copy.deepcopy(v) for k, v in raw.items() if k not in ENVELOPE}
    if extra:
        params = dict(cfg.get("params", {}))
        params.update(extra)
        cfg["params"] = params
    cfg.setdefault("params", {})
    cfg.setdefault("seed", 0)
    return cfg


def validate_config(raw: dict) -> dict:
    """Normalise and validate; raises :class:`SchemaError` with a JSON pointer."""
    cfg = normalise_config(raw)
    schema = load_schema("config")
    _validate({k: v for k, v in cfg.items() if k != "params"} | {"params": {}}, schema)
    exp = cfg["experiment"]
    _validate(cfg["params"], {"$defs": schema["$defs"], "$ref": f"#/$defs/params/{exp}"}, "/params")
    if "group" in cfg:
        _validate(cfg["group"], _strip_ids(load_schema("group")), "/group")
    if "multiplier" in cfg:
        _validate(cfg["multiplier"], _strip_ids(load_schema("multiplier")), "/multiplier")
    if exp == "trace-range":
        _validate(cfg["params"]["cohomology"], _strip_ids(load_schema("cohomology")), "/params/cohomology")
    for key in ("f", "g"):
        if key in cfg["params"]:
            _validate(cfg["params"][key], _strip_ids(load_schema("element")), f"/params/{key}")
    return cfg


# canonical serialisation -----------------------------------------------------
def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def canonical_json(obj: Any, indent: int = 2) -> str:
    """Sorted keys, floats with 17 significant digits, trailing newline."""

    def enc(v, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v[k], level + 1)}" for k in sorted(v)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(v, list):
            if not v:
                return "[]"
            if all(not isinstance(x, (dict, list)) for x in v):
                return "[" + ", ".join(enc(x, level) for x in v) + "]"
            return "[\n" + ",\n".join(pad + enc(x, level + 1) for x in v) + "\n" + end + "]"
        if isinstance(v, bool) or v is None:
            return json.dumps(v)
        if isinstance(v, int):
            return str(v)
        if isinstance(v, float):
            return format_float(v)
        return json.dumps(v)

    return enc(_plain(obj), 0) + "\n"


def _csv_text(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_float(float(row[c])) if isinstance(row[c], (float, np.floating)) else row[c]
                    for c in columns])
    return buf.getvalue()


# reports -----------------------------------------------------------------------
@dataclass
class Report:
    experiment: str
    config: dict
    results: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    series: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    status: str = "complete"

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def check(self, name: str, passed: bool, value: Any = None, tolerance: Any = None) -> None:
        self.checks[name] = {"passed": bool(passed), "value": value, "tolerance": tolerance}

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "version": __version__,
            "status": self.status,
            "passed": self.passed,
            "checks": self.checks,
            "results": self.results,
            "series": {"columns": self.columns, "rows": self.series},
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_csv(self) -> str:
        return _csv_text(self.columns, self.series)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        rep = cls(d["experiment"], d["config"], d["results"], d["checks"],
                  d["series"]["rows"], d["series"]["columns"], d["status"])
        return rep


def _atomic_write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise UnwritablePathError(f"cannot write {path}: {exc}") from exc


def emit(report: Report, out_dir: str | os.PathLike, fmt: str = "json") -> list[Path]:
    """Write ``<experiment>.json`` and, for csv, ``<experiment>.csv`` atomically."""
    out = Path(out_dir)
    paths = [out / f"{report.experiment}.json"]
    _atomic_write(paths[0], report.to_json())
    if fmt == "csv":
        paths.append(out / f"{report.experiment}.csv")
        _atomic_write(paths[1], report.to_csv())
    return paths


# experiments -------------------------------------------------------------------
def _model(cfg: dict, default: dict) -> GroupModel:
    return make_group(cfg.get("group", default))


def _element(sigma, params: dict, key: str, seed: int, default: Callable | None = None) -> AlgebraElement:
    if key in params:
        return AlgebraElement.from_json(sigma, params[key])
    if f"{key}_file" in params:
        try:
            items = json.loads(Path(params[f"{key}_file"]).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read element file: {exc}") from exc
        _validate(items, _strip_ids(load_schema("element")), f"/params/{key}_file")
        return AlgebraElement.from_json(sigma, items)
    if default is not None:
        return default()
    rng = np.random.default_rng([seed, ord(key)])
    return random_element(sigma, int(params.get("radius", 2)), rng)


def _generator_sum(sigma) -> AlgebraElement:
    m = sigma.model
    return AlgebraElement(sigma, {x: 1.0 for x in m.symmetric_generators})


def _verify_cocycle(cfg, rep):
    p = cfg["params"]
    model = _model(cfg, {"kind": "Z^n", "n": 2})
    spec = cfg.get("multiplier") or {k: p[k] for k in ("kind", "theta", "kappa") if k in p} or {"kind": "theta", "theta": 0.0}
    sigma = make_multiplier(spec, model)
    if "n_random" in p:
        r = verify_multiplier(sigma, samples=int(p.get("radius", 2)), n_random=int(p["n_random"]),
                              seed=cfg["seed"], tolerance=p.get("tolerance"))
    else:
        r = verify_multiplier(sigma, samples=int(p.get("radius", 2)), tolerance=p.get("tolerance"))
    rep.results["verification"] = r.to_dict()
    rep.check("cocycle", r.passed, r.max_residual, r.tolerance)


def _convolve(cfg, rep):
    p = cfg["params"]
    model = _model(cfg, {"kind": "Z^n", "n": 1})
    sigma = make_multiplier(cfg.get("multiplier", {"kind": "trivial"}), model)
    f = _element(sigma, p, "f", cfg["seed"])
    g = _element(sigma, p, "g", cfg["seed"])
    h = convolve(f, g)
    rep.results["product"] = h.to_json()
    lhs, rhs = l1_norm(h), l1_norm(f) * l1_norm(g)
    rep.check("l1_submultiplicative", lhs <= rhs * (1 + 1e-12), lhs, rhs)


def _norms(cfg, rep):
    p = cfg["params"]
    model = _model(cfg, {"kind": "Z^n", "n": 1})
    sigma = make_multiplier(cfg.get("multiplier", {"kind": "trivial"}), model)
    f = _element(sigma, p, "f", cfg["seed"])
    s_list = [float(s) for s in p.get("s", [0.0, 0.5, 1.0, 2.0])]
    nr = norms(f, s_list, p.get("truncation_radius"))
    rep.results["norms"] = nr.to_dict()
    rep.columns = ["s", "sobolev_norm"]
    rep.series = [{"s": s, "sobolev_norm": nr.sobolev[s]} for s in sorted(nr.sobolev)]
    vals = [nr.sobolev[s] for s in sorted(nr.sobolev)]
    rep.check("sobolev_monotone_in_s", all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:])))
    if nr.op_lower is not None:
        rep.check("operator_bounds_ordered", nr.op_lower <= nr.op_upper * (1 + 1e-12), nr.op_lower, nr.op_upper)


def _rd_scan(cfg, rep):
    p = cfg["params"]
    model = _model(cfg, {"kind": "Z^n", "n": 2})
    sigma = make_multiplier(cfg.get("multiplier", {"kind": "trivial"}), model)
    radii = [int(r) for r in p.get("radii", [2, 4, 6])]
    try:
        r = rd_constant_estimate(model, sigma, radii, trials=int(p.get("trials", 2)), seed=cfg["seed"],
                                 rounds=int(p.get("rounds", 5)))
    except CapacityError as exc:
        if exc.partial is not None:
            rep.results["rd"] = _plain(exc.partial)
        raise
    rep.results["rd"] = r.to_dict()
    rep.columns = ["r", "C_r", "fit"]
    rep.series = r.csv_rows()
    if "exponent_range" in p:
        lo, hi = (float(v) for v in p["exponent_range"])
        rep.check("rd_exponent_in_range", lo <= r.fit_exponent <= hi, r.fit_exponent, [lo, hi])
    rep.check("constants_finite", all(np.isfinite(r.constants)))


def _spectral(cfg, rep):
    p = cfg["params"]
    model = _model(cfg, {"kind": "Z^n", "n": 1})
    sigma = make_multiplier(cfg.get("multiplier", {"kind": "trivial"}), model)
    f = _element(sigma, p, "f", cfg["seed"], default=lambda: _generator_sum(sigma))
    md = int(p.get("max_doublings", 6))
    s_list = sorted(float(s) for s in p.get("s", [0.0, 1.0]))
    try:
        traces = [spectral_radius(f, s, md) for s in s_list]
    except CapacityError as exc:
        if exc.partial is not None:
            rep.results["partial_trace"] = _plain(exc.partial)
        raise
    rep.results["traces"] = [t.to_dict() for t in traces]
    rep.columns = ["s", "rho"]
    rep.series = [{"s": t.s, "rho": t.extrapolated} for t in traces]
    for a, b in zip(traces, traces[1:]):
        mono = monotonicity_check(f, a.s, b.s, md)
        rep.check(f"monotone_{format_float(a.s)}_{format_float(b.s)}", mono["passed"], mono)


def _heat(cfg, rep):
    p = cfg["params"]
    model = _model(cfg, {"kind": "Z^n", "n": 1})
    sigma = make_multiplier(cfg.get("multiplier", {"kind": "trivial"}), model)
    weights = {int(k): float(v) for k, v in p["weights"].items()} if "weights" in p else None
    radius = int(p.get("radius", 10))
    kwargs = {"tol": float(p["tolerance"])} if "tolerance" in p else {}
    h = heat_coefficients(sigma, float(p.get("t", 1.0)), radius, weights, **kwargs)
    fit = decay_fit(h)
    spec = GoodCompletionSpec(**p["completion"]) if "completion" in p else L1_SPEC
    cert = completion_certificate(fit, spec, growth_constants(model, radius), N=int(p.get("N", 60)))
    rep.results.update({"heat": h.to_dict(), "decay_fit": fit.to_dict(), "certificate": cert.to_dict()})
    rep.columns = ["length", "log_abs_h"]
    rep.series = h.csv_rows()
    rep.check("gaussian_decay", fit.passed, fit.C6_hat, 0.0)
    rep.check("certificate_finite", cert.certified, cert.bound)


def _index(cfg, rep):
    p = cfg["params"]
    t_list = [float(t) for t in p.get("t", [0.1, 1.0, 10.0])]
    if "magnetic" in p:
        mt = magnetic_torus(int(p["magnetic"].get("p", 1)), int(p["magnetic"]["q"]))
        D = mt.dirac()
        comm = mt.commutator_norm()
        rep.results["magnetic_commutator"] = comm
        rep.check("magnetic_commutation", comm < 1e-12, comm, 1e-12)
    elif "D_plus" in p:
        arr = np.asarray(p["D_plus"], dtype=float)
        D = DiracSystem(arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 3 else arr)
    else:
        spec = p.get("random", {"rows": 10, "cols": 7})
        rng = np.random.default_rng(cfg["seed"])
        rows, cols = int(spec["rows"]), int(spec["cols"])
        rank = int(spec.get("rank", min(rows, cols)))
        A = rng.normal(size=(rows, rank)) + 1j * rng.normal(size=(rows, rank))
        B = rng.normal(size=(rank, cols)) + 1j * rng.normal(size=(rank, cols))
        D = DiracSystem(A @ B)
    res = supertrace_index(D, t_list)
    w = wasserman_idempotent(D, t_list[0])
    rep.results.update({"index": res.to_dict(), "wasserman": w.to_dict()})
    rep.columns = ["t", "supertrace"]
    rep.series = [{"t": t, "supertrace": v} for t, v in zip(res.t_values, res.values)]
    rep.check("supertrace_constant", res.integer_verdict, res.spread, 1e-9)
    rep.check("wasserman_idempotent", w.idempotency_residual < 1e-10, w.idempotency_residual, 1e-10)
    rep.check("trace_matches_index", abs(w.trace_difference - res.kernel_index) < 1e-9, w.trace_difference)


PROFILES = {"triangular": triangular_root, "cosine": cosine_root, "indicator": indicator_root}


def _idempotent(cfg, rep):
    from .groups import FreeAbelianGroup
    from .projections import Grid

    p = cfg["params"]
    d = int(p.get("dim", 1))
    model = FreeAbelianGroup(d)
    phase = phase_from_two_form(float(p["flux"]), model=model) if d == 2 and p.get("flux") else None
    grid = Grid(d, int(p["points_per_unit"]), 2) if "points_per_unit" in p else None
    traces = []
    for name in p.get("profiles", ["triangular", "cosine"]):
        r = canonical_idempotent(model, PROFILES[name], phase, grid)
        rep.results[name] = r.to_dict()
        rep.check(f"idempotent_{name}", r.residual < 1e-8, r.residual, 1e-8)
        traces.append(r.trace)
    spread = max(traces) - min(traces)
    rep.check("trace_independent_of_profile", spread < 1e-9, spread, 1e-9)


def _rieffel(cfg, rep):
    p = cfg["params"]
    theta = float(p["theta"])
    r = rieffel_projection(theta, p.get("edge_width"), int(p.get("samples", 1 << 14)))
    rep.results["rieffel"] = r.to_dict()
    rep.check("trace_equals_theta", abs(r.trace - theta) < 1e-9, r.trace, 1e-9)
    rep.check("idempotent_l1", r.idempotency < 1e-8, r.idempotency, 1e-8)
    rep.check("selfadjoint_l1", r.selfadjointness < 1e-8, r.selfadjointness, 1e-8)
    S = TraceSubgroup([1.0, theta])
    for name, x in (("tau", r.trace), ("one_minus_tau", 1 - r.trace)):
        m = subgroup_membership(x, S, 10)
        rep.check(f"{name}_in_subgroup", m.member, m.to_dict())


def _trace_range(cfg, rep):
    p = cfg["params"]
    S = trace_range(p["cohomology"])
    rep.results["subgroup"] = S.to_dict()
    rep.columns = ["index", "generator"]
    rep.series = [{"index": i, "generator": g} for i, g in enumerate(S.generators)]
    for x in S.raw_generators:
        m = subgroup_membership(x, S, int(p.get("coeff_bound", 10)))
        rep.check(f"raw_{format_float(x)}_in_range", m.member, m.distance, S.tolerance)
    for x in p.get("members", []):
        m = subgroup_membership(float(x), S, int(p.get("coeff_bound", 10)))
        rep.results.setdefault("membership", []).append({"x": float(x)} | m.to_dict())


RUNNERS: dict[str, Callable] = {
    "verify-cocycle": _verify_cocycle,
    "convolve": _convolve,
    "norms": _norms,
    "rd-scan": _rd_scan,
    "spectral": _spectral,
    "heat": _heat,
    "index": _index,
    "idempotent": _idempotent,
    "rieffel": _rieffel,
    "trace-range": _trace_range,
}


def run(config: dict) -> Report:
    """Validate and run; capacity failures return a report with status "capacity".

    The report carries the validated config echo and no timing data, so
    identical inputs give byte-identical output.
    """
    cfg = validate_config(config)
    rep = Report(cfg["experiment"], cfg)
    try:
        RUNNERS[cfg["experiment"]](cfg, rep)
    except CapacityError as exc:
        rep.status = "capacity"
        rep.results["capacity"] = {"message": str(exc), "completed": exc.completed}
        rep.check("capacity", False, str(exc))
    return rep
