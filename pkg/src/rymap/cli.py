"""Batch front end: one ``key = value`` configuration file per run.

Layout::

    command = ry-eval

    [flow]
    kind = poincare
    n = 2

    [params]
    alpha = 1
    beta = 0

    [eval]
    t = 0
    point = 0, 1

Top-level keys precede any ``[section]`` header.  Lists are comma separated;
point lists separate points with ``;``.  ``#`` starts a comment.  Every key
is listed in :data:`SCHEMA`; unknown keys and sections are rejected with
their line number.

Exit codes: 0 pass, 1 verdict failure, 2 configuration error or stability
refusal, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import flows as fl
from . import geometry as geo
from . import ry
from . import variation as var
from .discrepancy import discrepancy_records
from .errors import BlowUpError, CFLViolation, ConfigError, RYMapError
from .pde import io as pio
from .pde import residuals as res
from .pde.solver import BC, BoundaryCondition, Chart, ConformalGridState, Scheme, SolverConfig, run_flow

__all__ = ["RunConfig", "SCHEMA", "COMMANDS", "parse_config", "render_config", "execute", "main",
           "ExecutionResult", "dumps_report"]

log = logging.getLogger(__name__)

COMMANDS = ("curvature", "ry-eval", "classify", "verify", "flow-run", "residuals")
EXIT_PASS, EXIT_VERDICT, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# key schema


@dataclass(frozen=True)
class Key:
    kind: str  # float, pos_float, int, pos_int, bool, choice, str, floats, points
    default: Any = None
    choices: Tuple[str, ...] = ()
    doc: str = ""


SCHEMA: Dict[str, Dict[str, Key]] = {
    "": {
        "command": Key("choice", None, COMMANDS, "what to run"),
    },
    "flow": {
        "kind": Key("choice", "cigar", ("cigar", "poincare", "conformal", "cone", "convex", "warped"),
                    "flow family"),
        "n": Key("pos_int", 2, doc="dimension (poincare, conformal, cone)"),
        "base": Key("choice", "euclidean", ("euclidean", "hyperbolic", "sphere"), "base metric (conformal, cone)"),
        "potential": Key("choice", "steady", ("steady", "exp", "constant", "linear", "power"),
                         "time profile f; 'steady' is exp(4 (alpha + beta) t) for the cigar"),
        "rate": Key("float", 1.0, doc="rate c of f = exp(c t)"),
        "intercept": Key("pos_float", 1.0, doc="linear potential intercept"),
        "slope": Key("float", 1.0, doc="linear potential slope"),
        "exponent": Key("float", 1.0, doc="power potential exponent"),
        "value": Key("pos_float", 1.0, doc="constant potential value"),
        "k": Key("float", 0.0, doc="curvature of the warped sn_k profile"),
        "amplitude": Key("float", 0.5, doc="bump amplitude of the convex-Euclidean flow"),
    },
    "params": {
        "alpha": Key("float", 1.0),
        "beta": Key("float", 0.0),
    },
    "eval": {
        "t": Key("float", 0.0),
        "point": Key("floats", None, doc="evaluation point"),
        "curvature": Key("choice", "auto", ("auto", "engine", "exact"), "curvature source"),
        "step": Key("pos_float", 1e-3, doc="finite-difference step"),
        "order": Key("choice", "2", ("2", "4"), "finite-difference order"),
        "richardson": Key("bool", True),
    },
    "classify": {
        "times": Key("floats", (0.0,)),
        "points": Key("points", None),
        "tol": Key("pos_float", 1e-8, doc="steady band"),
        "uniform_tol": Key("pos_float", 1e-6),
    },
    "verify": {
        "t": Key("float", 0.0),
        "points": Key("points", None),
        "steps": Key("floats", (0.07, 0.035, 0.0175), doc="refinement ladder, strictly decreasing"),
        "min_order": Key("float", 1.8),
        "tol": Key("pos_float", 1e-5, doc="finest-level residual bound"),
        "strict": Key("bool", True, doc="refuse flows that are not RY flows"),
        "discrepancies": Key("bool", True, doc="append printed-vs-engine records"),
    },
    "grid": {
        "chart": Key("choice", "Cartesian", ("Cartesian", "ParabolicUV")),
        "n1": Key("pos_int", 41),
        "n2": Key("pos_int", 41),
        "lower1": Key("float", -2.0),
        "upper1": Key("float", 2.0),
        "lower2": Key("float", -2.0),
        "upper2": Key("float", 2.0),
        "bc": Key("choice", "Dirichlet", ("Dirichlet", "Periodic")),
        "initial": Key("choice", "cigar", ("cigar", "sine", "constant")),
        "amplitude": Key("float", 1.0, doc="amplitude of the sine or constant initial data"),
    },
    "solver": {
        "dt": Key("pos_float", None),
        "steps": Key("int", None),
        "scheme": Key("choice", "RK4", ("ExplicitEuler", "RK4", "SemiImplicit")),
        "cfl_guard": Key("bool", True),
        "snapshot_every": Key("pos_int", 1),
        "curvature_stop": Key("pos_float", None),
        "lower_bound_safety": Key("pos_float", 10.0),
    },
    "probes": {
        "points": Key("points", ()),
        "times": Key("floats", ()),
    },
    "residuals": {
        "field": Key("choice", "cigar", ("cigar", "quadratic", "linear", "constant"),
                     "h for the flow residuals"),
        "phi": Key("floats", (0.0, 0.0, 1.0), doc="polynomial coefficients of the travelling-wave profile"),
        "f": Key("floats", (0.0, 0.0, 1.0), doc="polynomial coefficients of the first separable factor"),
        "g": Key("floats", (0.0, 0.0, 1.0), doc="polynomial coefficients of the second separable factor"),
        "slope": Key("float", 1.0, doc="travelling-wave slope a"),
        "scale": Key("pos_float", 1.0, doc="elliptic scale c"),
        "t": Key("float", 0.0),
        "polar_points": Key("points", ((0.8, 0.6),)),
        "parabolic_points": Key("points", ((3.0, 4.0),)),
        "cartesian_points": Key("points", ((0.5, 0.5),)),
        "elliptic_points": Key("points", ((-0.7, 0.3),)),
    },
    "output": {
        "dir": Key("str", "."),
        "report": Key("str", "report.json"),
        "csv": Key("str", None, doc="probe/field CSV file name"),
        "series": Key("bool", False, doc="also write one CSV per snapshot"),
    },
}


@dataclass
class RunConfig:
    """Parsed configuration: the command plus every explicitly set key."""

    command: str
    values: Dict[Tuple[str, str], Any] = field(default_factory=dict)

    def get(self, section: str, key: str):
        if (section, key) in self.values:
            return self.values[(section, key)]
        return SCHEMA[section][key].default

    def require(self, section: str, key: str):
        v = self.get(section, key)
        if v is None:
            raise ConfigError(f"[{section}] {key} is required for command {self.command}", key=f"{section}.{key}")
        return v

    def with_value(self, section: str, key: str, value) -> "RunConfig":
        vals = dict(self.values)
        vals[(section, key)] = value
        return RunConfig(self.command, vals)


# ---------------------------------------------------------------------------
# parsing and rendering


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_float(text, where):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {text!r}")
    return v


def _coerce(spec: Key, raw: str, where: str, line=None):
    raw = raw.strip()
    try:
        if spec.kind == "float":
            return _parse_float(raw, where)
        if spec.kind == "pos_float":
            v = _parse_float(raw, where)
            if v <= 0:
                raise ConfigError(f"{where} must be positive, got {raw}")
            return v
        if spec.kind in ("int", "pos_int"):
            try:
                v = int(raw)
            except ValueError:
                raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None
            if v < 0 or (spec.kind == "pos_int" and v == 0):
                raise ConfigError(f"{where} must be {'positive' if spec.kind == 'pos_int' else 'non-negative'}, got {v}")
            return v
        if spec.kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ConfigError(f"{where}: expected true or false, got {raw!r}")
        if spec.kind == "choice":
            if raw not in spec.choices:
                raise ConfigError(f"{where}: {raw!r} is not one of {', '.join(spec.choices)}")
            return raw
        if spec.kind == "str":
            if not raw:
                raise ConfigError(f"{where}: empty value")
            return raw
        if spec.kind == "floats":
            if not raw:
                return ()
            return tuple(_parse_float(x, where) for x in raw.split(","))
        if spec.kind == "points":
            if not raw:
                return ()
            pts = tuple(tuple(_parse_float(x, where) for x in chunk.split(",")) for chunk in raw.split(";"))
            if len({len(p) for p in pts}) != 1:
                raise ConfigError(f"{where}: points must share one dimension")
            return pts
    except ConfigError as exc:
        raise ConfigError(str(exc), line=line, key=where) from None
    raise AssertionError(spec.kind)


def _render_value(spec: Key, v) -> str:
    if spec.kind in ("float", "pos_float"):
        return _fmt(v)
    if spec.kind == "bool":
        return "true" if v else "false"
    if spec.kind == "floats":
        return ", ".join(_fmt(x) for x in v)
    if spec.kind == "points":
        return "; ".join(", ".join(_fmt(x) for x in p) for p in v)
    return str(v)


def _validate(cfg: RunConfig, lines: Dict[Tuple[str, str], int]):
    def fail(section, key, msg):
        raise ConfigError(msg, line=lines.get((section, key)), key=f"{section}.{key}")

    steps = cfg.get("verify", "steps")
    if any(b >= a for a, b in zip(steps, steps[1:])):
        fail("verify", "steps", "[verify] steps must be strictly decreasing")
    for k in ("1", "2"):
        if cfg.get("grid", "upper" + k) <= cfg.get("grid", "lower" + k):
            fail("grid", "upper" + k, f"[grid] upper{k} must exceed lower{k}")
    pt = cfg.get("eval", "point")
    if pt is not None and len(pt) == 0:
        fail("eval", "point", "[eval] point is empty")
    if cfg.get("flow", "kind") == "poincare" and cfg.get("flow", "n") < 2:
        fail("flow", "n", "[flow] n must be at least 2")


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    section = ""
    values: Dict[Tuple[str, str], Any] = {}
    lines: Dict[Tuple[str, str], int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"malformed section header {stripped!r}", line=lineno)
            section = stripped[1:-1].strip()
            if section not in SCHEMA or section == "":
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", line=lineno)
        key, raw = (s.strip() for s in stripped.split("=", 1))
        label = f"[{section}] {key}" if section else key
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {label}", line=lineno, key=f"{section}.{key}" if section else key)
        if (section, key) in values:
            raise ConfigError(f"duplicate key {label}", line=lineno, key=key)
        values[(section, key)] = _coerce(SCHEMA[section][key], raw, label, lineno)
        lines[(section, key)] = lineno
    command = values.pop(("", "command"), None)
    if command is None:
        raise ConfigError("missing top-level 'command'")
    cfg = RunConfig(command, values)
    _validate(cfg, lines)
    return cfg


def render_config(cfg: RunConfig) -> str:
    """Configuration text that parses back to ``cfg``."""
    out = [f"command = {cfg.command}"]
    for section, keys in SCHEMA.items():
        if not section:
            continue
        present = [k for k in keys if (section, k) in cfg.values]
        if not present:
            continue
        out.append("")
        out.append(f"[{section}]")
        for k in present:
            out.append(f"{k} = {_render_value(keys[k], cfg.values[(section, k)])}")
    return "\n".join(out) + "\n"


def apply_override(cfg: RunConfig, assignment: str) -> RunConfig:
    """Apply ``section.key=value`` (or ``command=...``) to ``cfg``."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form section.key=value")
    dotted, raw = assignment.split("=", 1)
    dotted = dotted.strip()
    if dotted == "command":
        spec = SCHEMA[""]["command"]
        return RunConfig(_coerce(spec, raw, "command"), dict(cfg.values))
    if "." not in dotted:
        raise ConfigError(f"override key {dotted!r} needs a section prefix")
    section, key = dotted.split(".", 1)
    if section not in SCHEMA or key not in SCHEMA[section]:
        raise ConfigError(f"unknown key [{section}] {key}", key=dotted)
    out = cfg.with_value(section, key, _coerce(SCHEMA[section][key], raw, f"[{section}] {key}"))
    _validate(out, {})
    return out


# ---------------------------------------------------------------------------
# deterministic JSON


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(float(obj))
    return obj


class _Float(float):
    pass


def _encode(obj, indent=0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, _Float):
        if math.isfinite(obj):
            return _fmt(obj)
        return json.dumps(str(float(obj)))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 1) for v in obj) + "\n" + pad + "]"
    return json.dumps(obj)


def dumps_report(report: dict) -> str:
    """JSON text with floats at 17 significant digits and keys in insertion order."""
    return _encode(_to_jsonable(report)) + "\n"


# ---------------------------------------------------------------------------
# building objects from a config


def _potential(cfg: RunConfig, params: ry.RYParams) -> fl.Potential:
    kind = cfg.get("flow", "potential")
    if kind == "steady":
        return fl.cigar_steady_potential(params)
    if kind == "exp":
        return fl.Potential.exponential(cfg.get("flow", "rate"))
    if kind == "constant":
        return fl.Potential.constant(cfg.get("flow", "value"))
    if kind == "linear":
        return fl.Potential.linear(cfg.get("flow", "intercept"), cfg.get("flow", "slope"))
    return fl.Potential.power(cfg.get("flow", "exponent"))


def build_flow_kind(cfg: RunConfig, params: ry.RYParams):
    kind = cfg.get("flow", "kind")
    n = cfg.get("flow", "n")
    bases = {"euclidean": fl.euclidean, "hyperbolic": fl.hyperbolic, "sphere": fl.round_sphere}
    if kind == "cigar":
        return fl.GeneralizedCigar(_potential(cfg, params))
    if kind == "poincare":
        return fl.Poincare(n)
    if kind == "conformal":
        return fl.Conformal(_potential(cfg, params), bases[cfg.get("flow", "base")](n))
    if kind == "cone":
        return fl.Cone(bases[cfg.get("flow", "base")](n))
    if kind == "convex":
        return fl.ConvexEuclidean.gaussian_bump(cfg.get("flow", "amplitude"))
    return fl.WarpedRotSym(_potential(cfg, params), cfg.get("flow", "k"))


def _params(cfg):
    return ry.RYParams(cfg.get("params", "alpha"), cfg.get("params", "beta"))


def _spec(cfg):
    return geo.DiffSpec(cfg.get("eval", "step"), int(cfg.get("eval", "order")), cfg.get("eval", "richardson"))


def _point(cfg, dim):
    p = cfg.require("eval", "point")
    if len(p) != dim:
        raise ConfigError(f"[eval] point has {len(p)} coordinates, the flow has dimension {dim}", key="eval.point")
    return np.array(p)


def _echo(cfg: RunConfig) -> dict:
    out = {"command": cfg.command}
    for (section, key), v in sorted(cfg.values.items()):
        out[f"{section}.{key}"] = v
    return out


# ---------------------------------------------------------------------------
# commands


@dataclass
class ExecutionResult:
    status: int
    report: dict
    artifacts: List[Path] = field(default_factory=list)


def _cmd_curvature(cfg, report):
    params = _params(cfg)
    kind = build_flow_kind(cfg, params)
    flow = fl.make_flow(kind)
    t, p, spec = cfg.get("eval", "t"), _point(cfg, flow.dim), _spec(cfg)
    bundle = ry.flow_curvature(flow, t, p, spec, cfg.get("eval", "curvature"))
    out = {"christoffel": bundle.christoffel, "ricci": bundle.ricci, "scalar": bundle.scalar}
    if bundle.gauss is not None:
        out["gauss"] = bundle.gauss
    try:
        ric, scal = fl.printed_ric_scalar(kind, t, p)
        out["printed"] = {"ricci": ric, "scalar": scal}
    except RYMapError:
        pass
    report["result"] = out
    return EXIT_PASS


def _cmd_ry_eval(cfg, report):
    params = _params(cfg)
    kind = build_flow_kind(cfg, params)
    flow = fl.make_flow(kind)
    t, p, spec = cfg.get("eval", "t"), _point(cfg, flow.dim), _spec(cfg)
    source = cfg.get("eval", "curvature")
    T = ry.ry_eval(flow, t, p, params, spec, source)
    sig = ry.classify_signature(T)
    out = {
        "ry": T,
        "signature": sig.kind.value,
        "eigenvalues": [sig.min_eigenvalue, sig.max_eigenvalue],
        "volume_variation_rate": ry.volume_variation_rate(flow, t, p, params, spec, source),
        "steady_residual": ry.steady_residual(flow, t, p, params, spec, source),
    }
    try:
        printed = fl.printed_ry(kind, t, p, params)
        out["printed_ry"] = printed
        out["printed_relative_gap"] = float(np.linalg.norm(printed - T) / max(np.linalg.norm(T), np.linalg.norm(printed), 1e-300))
    except RYMapError:
        pass
    report["result"] = out
    return EXIT_PASS


def _cmd_classify(cfg, report):
    params = _params(cfg)
    kind = build_flow_kind(cfg, params)
    flow = fl.make_flow(kind)
    points = cfg.require("classify", "points")
    samples = [(t, np.array(p)) for t in cfg.get("classify", "times") for p in points]
    ch = ry.classify_character(flow, params, samples, _spec(cfg), cfg.get("classify", "tol"),
                               cfg.get("eval", "curvature"), cfg.get("classify", "uniform_tol"))
    rows = []
    for (t, p, rate) in ch.rates:
        row = {"t": t, "point": list(p), "rate": rate}
        try:
            printed, _ = fl.printed_volume_variation(kind, t, np.array(p), params)
            row["printed_rate"] = printed
            row["printed_to_numeric_ratio"] = rate / printed if printed != 0 else None
        except RYMapError:
            pass
        rows.append(row)
    report["result"] = {"character": ch.kind.value, "uniform": ch.uniform, "samples": rows}
    return EXIT_PASS


IDENTITIES = (
    ("christoffel_variation", var.christoffel_variation_residual),
    ("scalar_variation", var.scalar_variation_residual),
    ("volume_form_variation", var.volume_form_variation_residual),
)


def _cmd_verify(cfg, report):
    params = _params(cfg)
    flow = fl.make_flow(build_flow_kind(cfg, params))
    t = cfg.get("verify", "t")
    steps = cfg.get("verify", "steps")
    min_order, tol, strict = cfg.get("verify", "min_order"), cfg.get("verify", "tol"), cfg.get("verify", "strict")
    records, passed = [], True
    for p in cfg.require("verify", "points"):
        for name, op in IDENTITIES:
            r = var.refine(op, steps, flow, t, np.array(p), params, strict=strict)
            order = r.observed_order
            verdict = bool(order is not None and order >= min_order and r.residual_norm <= tol)
            if r.report_only:
                verdict_text = "report-only"
            else:
                verdict_text = "pass" if verdict else "fail"
                passed &= verdict
            rec = r.to_dict()
            rec.update(point=list(p), t=t, verdict=verdict_text, source="engine")
            records.append(rec)
    report["identities"] = records
    if cfg.get("verify", "discrepancies"):
        report["discrepancies"] = [d.to_dict() for d in discrepancy_records()]
    report["verdict"] = "pass" if passed else "fail"
    return EXIT_PASS if passed else EXIT_VERDICT


def _initial_state(cfg, params):
    chart = Chart(cfg.get("grid", "chart"))
    n1, n2 = cfg.get("grid", "n1"), cfg.get("grid", "n2")
    lo1, hi1, lo2, hi2 = (cfg.get("grid", k) for k in ("lower1", "upper1", "lower2", "upper2"))
    periodic = cfg.get("grid", "bc") == "Periodic"
    # periodic grids exclude the right endpoint
    d1 = (hi1 - lo1) / (n1 if periodic else n1 - 1)
    d2 = (hi2 - lo2) / (n2 if periodic else n2 - 1)
    A, B = np.meshgrid(lo1 + d1 * np.arange(n1), lo2 + d2 * np.arange(n2), indexing="ij")
    init, amp = cfg.get("grid", "initial"), cfg.get("grid", "amplitude")
    if init == "cigar":
        rate = 4.0 * params.sum

        def exact(t, a, b):
            if chart is Chart.PARABOLIC_UV:
                a, b = 0.5 * (a * a - b * b), a * b
            return -np.log(np.exp(rate * t) + a * a + b * b)

        h0 = exact(0.0, A, B)
        bc = BoundaryCondition.periodic() if periodic else BoundaryCondition.dirichlet(exact)
    elif init == "sine":
        L1, L2 = hi1 - lo1, hi2 - lo2
        h0 = amp * np.sin(2 * np.pi * (A - lo1) / L1) * np.sin(2 * np.pi * (B - lo2) / L2)
        bc = BoundaryCondition.periodic() if periodic else BoundaryCondition.dirichlet()
    else:
        h0 = np.full_like(A, amp)
        bc = BoundaryCondition.periodic() if periodic else BoundaryCondition.dirichlet()
    return ConformalGridState(chart, h0, (d1, d2), (lo1, lo2), 0.0, bc)


def _cmd_flow_run(cfg, report, outdir):
    params = _params(cfg)
    state = _initial_state(cfg, params)
    config = SolverConfig(params, cfg.require("solver", "dt"), cfg.require("solver", "steps"),
                          Scheme(cfg.get("solver", "scheme")), cfg.get("solver", "cfl_guard"))
    points = cfg.get("probes", "points")
    times = cfg.get("probes", "times") or tuple(config.dt * k for k in range(config.steps + 1))
    probes = [(t, p) for t in times for p in points]
    traj = run_flow(state, config, probes, cfg.get("solver", "snapshot_every"),
                    cfg.get("solver", "curvature_stop"))
    artifacts = []
    csv_name = cfg.get("output", "csv") or "probes.csv"
    artifacts.append(pio.write_probes(traj.probes, outdir / csv_name))
    if cfg.get("output", "series"):
        artifacts += pio.write_series(traj.snapshots, outdir / "snapshots")
    out = {
        "final_t": traj.final.t,
        "snapshots": len(traj.snapshots),
        "probes": traj.probes,
        "h_min": float(np.min(traj.final.h)),
        "h_max": float(np.max(traj.final.h)),
        "aborted": traj.aborted,
        "last_valid_t": traj.last_valid_t,
    }
    if traj.aborted:
        out["abort_reason"] = traj.abort_reason
    status = EXIT_PASS
    if state.bc.kind is BC.PERIODIC and params.sum >= 1.0 and state.chart is Chart.CARTESIAN:
        lb = var.curvature_lower_bound_check(traj, params, safety=cfg.get("solver", "lower_bound_safety"))
        out["curvature_lower_bound"] = lb.to_dict()
        if not lb.passed:
            status = EXIT_VERDICT
    report["result"] = out
    if traj.aborted:
        report["incomplete"] = True
        return EXIT_ABORT, artifacts
    return status, artifacts


def _field(name):
    if name == "cigar":
        def jet(t, a, b):
            s = math.exp(4 * t) + a * a + b * b
            return res.Jet(-math.log(s), -4 * math.exp(4 * t) / s, -2 * a / s, -2 * b / s,
                           -2 / s + 4 * a * a / s**2, 4 * a * b / s**2, -2 / s + 4 * b * b / s**2)
        return res.Field(lambda t, a, b: -math.log(math.exp(4 * t) + a * a + b * b), jet)
    if name == "quadratic":
        return res.Field(lambda t, a, b: a * a + b * b, lambda t, a, b: res.Jet(a * a + b * b, 0, 2 * a, 2 * b, 2, 0, 2))
    if name == "linear":
        return res.Field(lambda t, a, b: a, lambda t, a, b: res.Jet(a, 0, 1, 0, 0, 0, 0))
    return res.Field.constant(1.0)


def _cmd_residuals(cfg, report):
    params = _params(cfg)
    h = _field(cfg.get("residuals", "field"))
    t, a, c = cfg.get("residuals", "t"), cfg.get("residuals", "slope"), cfg.get("residuals", "scale")
    phi = res.Profile.polynomial(cfg.get("residuals", "phi"))
    f = res.Profile.polynomial(cfg.get("residuals", "f"))
    g = res.Profile.polynomial(cfg.get("residuals", "g"))
    rows = []

    def add(form, point, value):
        rows.append({"form": form, "point": list(point), "residual": value})

    for p in cfg.get("residuals", "polar_points"):
        add("polar", p, res.residual_polar(h, p, t, params))
        add("polar_full", p, res.residual_polar(h, p, t, params, form="full"))
        add("polar_first_order_term", p, res.polar_first_order_term(h, p, t))
        add("polar_solitonic", p, res.solitonic_residual("Polar", phi, a, p, t, c, params))
    for p in cfg.get("residuals", "parabolic_points"):
        add("parabolic", p, res.residual_parabolic(h, p, t, params))
        add("parabolic_solitonic", p, res.solitonic_residual("ParabolicUV", phi, a, p, t, c, params))
    for p in cfg.get("residuals", "elliptic_points"):
        add("elliptic", p, res.residual_elliptic(h, p, c, t, params))
        add("elliptic_solitonic", p, res.solitonic_residual("EllipticUV", phi, a, p, t, c, params))
    for chart, key in (("Cartesian", "cartesian_points"), ("Polar", "polar_points"),
                       ("ParabolicUV", "parabolic_points"), ("EllipticUV", "elliptic_points")):
        for p in cfg.get("residuals", key):
            for mode in ("Product", "Sum"):
                add(f"separable_{chart}_{mode}", p, res.separable_residual(chart, mode, f, g, p, t, c))
    report["result"] = {"residuals": rows}
    report["discrepancies"] = [d.to_dict() for d in discrepancy_records()]
    return EXIT_PASS


def execute(cfg: RunConfig, write: bool = True) -> ExecutionResult:
    """Dispatch ``cfg.command``; write the JSON report (and CSVs) under ``[output] dir``."""
    outdir = Path(cfg.get("output", "dir"))
    report: dict = {"tool": "rymap", "version": __version__, "config": _echo(cfg)}
    artifacts: List[Path] = []
    try:
        if write:
            outdir.mkdir(parents=True, exist_ok=True)
        if cfg.command == "curvature":
            status = _cmd_curvature(cfg, report)
        elif cfg.command == "ry-eval":
            status = _cmd_ry_eval(cfg, report)
        elif cfg.command == "classify":
            status = _cmd_classify(cfg, report)
        elif cfg.command == "verify":
            status = _cmd_verify(cfg, report)
        elif cfg.command == "flow-run":
            status, artifacts = _cmd_flow_run(cfg, report, outdir)
        else:
            status = _cmd_residuals(cfg, report)
    except ConfigError as exc:
        report.update(error=str(exc), incomplete=True)
        status = EXIT_CONFIG
    except CFLViolation as exc:
        report.update(error=str(exc), suggested_dt=exc.suggested_dt, incomplete=True)
        status = EXIT_CONFIG
    except (RYMapError, ArithmeticError, np.linalg.LinAlgError) as exc:
        report.update(error=f"{type(exc).__name__}: {exc}", incomplete=True)
        if isinstance(exc, BlowUpError):
            report["last_valid_t"] = exc.last_valid_t
        status = EXIT_ABORT
    report["exit_status"] = status
    if write:
        path = outdir / cfg.get("output", "report")
        path.write_text(dumps_report(report))
        artifacts.append(path)
    return ExecutionResult(status, report, artifacts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="rymap", description="Run one configured Ricci-Yamabe computation.")
    parser.add_argument("config", help="configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a configuration key (repeatable)")
    parser.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(Path(args.config).read_text())
        for assignment in args.set:
            cfg = apply_override(cfg, assignment)
    except (ConfigError, OSError) as exc:
        print(f"rymap: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(render_config(cfg))
        return EXIT_PASS
    result = execute(cfg)
    if "error" in result.report:
        print(f"rymap: {result.report['error']}", file=sys.stderr)
    for path in result.artifacts:
        print(path)
    return result.status
