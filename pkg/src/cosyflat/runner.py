"""Run configurations and the grid sweep behind ``cosyflat verify``.

A configuration is one JSON document::

    {
      "family": {"name": "z2", "a": 1},
      "grid": {"x": [-1, 1, 5], "y": [-1, 1, 5], "z": [0.5, 2, 5]},
      "checks": ["compat", "cotton"],
      "tolerance": 1e-8,
      "tolerances": {"cotton": 1e-9},
      "killing_field": [0, 1, 0],
      "kappa": null,
      "exclude": [{"axis": "z", "bound": 0.1}],
      "output": "report.jsonl"
    }

Only ``family`` and ``checks`` are required.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acm import (
    AcmStructure,
    a_property_residuals,
    adapted_frame,
    closedness_of_phi,
    compat_residuals,
    constsec_terms,
    curvature_phi_commutation,
    frame_residual,
    jacobi_residuals,
    nabla_phi_residuals,
    ricci_crosscheck,
    theorem_point,
    LAMBDA_MIN,
)
from .chart import ChartBox, HalfSpace, VectorFieldDef
from .curvature import killing_residual
from .errors import (
    BuildError,
    ConfigError,
    CosyflatError,
    DegenerateA,
    DomainError,
    InterpolationRange,
    ParseError,
    PreconditionFailed,
    SingularMetric,
)
from .exprlang import parse_expr
from .families import FAMILIES, build_family
from .report import ResidualReport, Summary, summarize

CHECKS = (
    "compat",
    "closedness",
    "a-props",
    "nabla-phi",
    "commutation",
    "adapted-frame",
    "jacobi",
    "ricci-crosscheck",
    "cotton",
    "constsec",
    "killing",
    "theorem",
    "ode-integral",
)
FRAME_CHECKS = {"adapted-frame", "jacobi", "ricci-crosscheck"}
AXES = "xyz"
DEFAULT_GRID = {"x": (-1.0, 1.0, 5), "y": (-1.0, 1.0, 5), "z": (0.5, 2.0, 5)}
FAMILY_KEYS = {
    "z2": {"a"},
    "fu": {"f", "u"},
    "custom": {"f", "u"},
    "kappa0": {"u", "A", "B", "C", "D", "x_ref"},
    "kappa_nonzero": {"kappa", "C", "D", "u", "t0", "sign", "h"},
    "product": {"leaf_curvature"},
}
CONFIG_KEYS = {"family", "grid", "checks", "tolerance", "tolerances", "killing_field", "kappa", "exclude", "output"}


@dataclass(frozen=True)
class RunConfig:
    family: dict
    grid: dict[str, tuple[float, float, int]]
    checks: tuple[str, ...]
    tolerance: float = 1e-8
    tolerances: dict[str, float] = field(default_factory=dict)
    killing_field: tuple = (0, 1, 0)
    kappa: float | None = None
    exclude: tuple[HalfSpace, ...] = (HalfSpace(2, 0.1),)
    output: str | None = None

    @property
    def domain(self) -> ChartBox:
        lower = tuple(self.grid[a][0] for a in AXES)
        upper = tuple(self.grid[a][1] for a in AXES)
        return ChartBox(lower, upper, self.exclude)

    @property
    def counts(self) -> tuple[int, int, int]:
        return tuple(self.grid[a][2] for a in AXES)

    def tolerance_for(self, check: str) -> float:
        return self.tolerances.get(check, self.tolerance)


def _real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _positive(value, where: str) -> float:
    v = _real(value, where)
    if v <= 0:
        raise ConfigError(f"{where}: must be positive, got {value!r}")
    return v


def parse_config(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"config: unknown field(s) {', '.join(unknown)}")

    family = data.get("family")
    if isinstance(family, str):
        family = {"name": family}
    if not isinstance(family, dict) or family.get("name") not in FAMILIES:
        raise ConfigError(f"family: expected a name in {', '.join(FAMILIES)}, got {family!r}")
    extra = sorted(set(family) - FAMILY_KEYS[family["name"]] - {"name"})
    if extra:
        raise ConfigError(f"family: unknown parameter(s) {', '.join(extra)} for {family['name']!r}")
    for key, value in family.items():
        if key not in ("name", "f", "u"):
            _real(value, f"family.{key}")
    if "sign" in family and family["sign"] not in (1, -1):
        raise ConfigError("family.sign: must be 1 or -1")
    for key in ("f", "u"):
        if key in family:
            if not isinstance(family[key], str):
                raise ConfigError(f"family.{key}: expected an expression string")
            try:
                parse_expr(family[key])
            except ParseError as exc:
                raise ConfigError(f"family.{key}: {exc}") from exc
    if family["name"] in ("fu", "custom") and not {"f", "u"} <= set(family):
        raise ConfigError("family: the custom family needs both f and u")

    grid_raw = data.get("grid", {})
    if not isinstance(grid_raw, dict) or set(grid_raw) - set(AXES):
        raise ConfigError("grid: expected an object with keys among x, y, z")
    grid = {}
    for a in AXES:
        axis_spec = grid_raw.get(a, DEFAULT_GRID[a])
        if not isinstance(axis_spec, (list, tuple)) or len(axis_spec) != 3:
            raise ConfigError(f"grid.{a}: expected [min, max, count]")
        lo, hi = _real(axis_spec[0], f"grid.{a}[0]"), _real(axis_spec[1], f"grid.{a}[1]")
        n = axis_spec[2]
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise ConfigError(f"grid.{a}: count must be an integer >= 2, got {n!r}")
        if not lo < hi:
            raise ConfigError(f"grid.{a}: min must be below max")
        grid[a] = (lo, hi, n)

    checks = data.get("checks")
    if not isinstance(checks, list) or not checks:
        raise ConfigError("checks: expected a nonempty list of check names")
    for c in checks:
        if c not in CHECKS:
            raise ConfigError(f"checks: unknown check {c!r}; expected one of {', '.join(CHECKS)}")
    checks = tuple(dict.fromkeys(checks))

    tolerance = _positive(data.get("tolerance", 1e-8), "tolerance")
    tols = data.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ConfigError("tolerances: expected an object")
    for k, v in tols.items():
        if k not in CHECKS:
            raise ConfigError(f"tolerances: unknown check {k!r}")
    tolerances = {k: _positive(v, f"tolerances.{k}") for k, v in tols.items()}

    kf = data.get("killing_field", [0, 1, 0])
    if not isinstance(kf, list) or len(kf) != 3:
        raise ConfigError("killing_field: expected three components")
    comps = []
    for i, c in enumerate(kf):
        if isinstance(c, str):
            try:
                comps.append(parse_expr(c))
            except ParseError as exc:
                raise ConfigError(f"killing_field[{i}]: {exc}") from exc
        else:
            comps.append(_real(c, f"killing_field[{i}]"))

    kappa = data.get("kappa")
    kappa = None if kappa is None else _real(kappa, "kappa")

    exclude = (HalfSpace(2, 0.1),)
    if "exclude" in data:
        if not isinstance(data["exclude"], list):
            raise ConfigError("exclude: expected a list of half-spaces")
        exclude = []
        for i, h in enumerate(data["exclude"]):
            if not isinstance(h, dict) or h.get("axis") not in AXES or set(h) - {"axis", "bound", "upper"}:
                raise ConfigError(f"exclude[{i}]: expected {{axis, bound, upper?}}")
            exclude.append(HalfSpace(AXES.index(h["axis"]), _real(h.get("bound"), f"exclude[{i}].bound"), bool(h.get("upper", False))))
        exclude = tuple(exclude)

    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a path string")

    return RunConfig(dict(family), grid, checks, tolerance, tolerances, tuple(comps), kappa, exclude, output)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON: {exc}") from exc
    return parse_config(data)


def build_structure(config: RunConfig) -> AcmStructure:
    try:
        return build_family(config.family, config.domain)
    except BuildError:
        raise
    except (CosyflatError, ValueError, KeyError, TypeError) as exc:
        raise BuildError(f"cannot build family {config.family.get('name')!r}: {exc}") from exc


def thread_count() -> int:
    raw = os.environ.get("COSYFLAT_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"COSYFLAT_THREADS: expected an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("COSYFLAT_THREADS must be at least 1")
    return n


SKIP = object()


def _point_values(S: AcmStructure, p, checks, killing: VectorFieldDef) -> dict:
    """Raw per-point outcome of every requested check.

    Most entries are final residuals.  ``constsec`` and ``theorem`` hold
    intermediate data that needs a grid-wide kappa before it becomes a residual.
    """
    out: dict = {}
    frame = None
    for c in checks:
        try:
            if c == "compat":
                r = compat_residuals(S, p)
                out[c] = max(r["phi_squared"], r["eta_xi"], r["metric"])
            elif c == "closedness":
                pt = S.at(p)
                out[c] = max(compat_residuals(S, p)["d_eta"], closedness_of_phi(pt))
            elif c == "a-props":
                out[c] = max(a_property_residuals(S, p).values())
            elif c == "nabla-phi":
                r = nabla_phi_residuals(S, p)
                out[c] = max(r.kahler_leaves, r.fundamental)
            elif c == "commutation":
                out[c] = curvature_phi_commutation(S, p)
            elif c in FRAME_CHECKS:
                if frame is None:
                    frame = adapted_frame(S, p)
                if c == "adapted-frame":
                    out[c] = frame_residual(frame)
                elif c == "jacobi":
                    out[c] = max(abs(v) for v in jacobi_residuals(frame))
                else:
                    out[c] = ricci_crosscheck(S, p, frame)
            elif c == "cotton":
                out[c] = S.at(p).geometry.cotton.normalized
            elif c == "constsec":
                out[c] = constsec_terms(S.warp.f, S.warp.u, p)
            elif c == "killing":
                out[c] = killing_residual(S.metric, killing, p)
            elif c == "theorem":
                out[c] = theorem_point(S, killing, p)
            elif c == "ode-integral":
                sol = S.params["ode"]
                t, dt, _, _ = sol.derivatives(p[2])
                out[c] = abs(float(sol.first_integral(t, dt)) - sol.conserved_value)
        except DegenerateA:
            out[c] = SKIP
        except (SingularMetric, DomainError, InterpolationRange, PreconditionFailed, ArithmeticError):
            out[c] = math.inf
    return out


@dataclass
class RunResult:
    reports: list[ResidualReport]
    summary: Summary

    @property
    def passed(self) -> bool:
        return self.summary.passed


def _validate_family_checks(S: AcmStructure, config: RunConfig) -> None:
    if "constsec" in config.checks and S.warp is None:
        raise ConfigError(f"checks: constsec needs a warped family, {S.name!r} has no (f, u) profile")
    if "ode-integral" in config.checks and "ode" not in S.params:
        raise ConfigError(f"checks: ode-integral needs the kappa_nonzero family, not {S.name!r}")


def run(config: RunConfig, structure: AcmStructure | None = None) -> RunResult:
    S = structure or build_structure(config)
    _validate_family_checks(S, config)
    points = config.domain.grid(config.counts)
    killing = VectorFieldDef.from_components(list(config.killing_field))

    workers = thread_count()
    if workers == 1:
        values = [_point_values(S, p, config.checks, killing) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda p: _point_values(S, p, config.checks, killing), points))

    summary = Summary()
    finals = _finalize(S, config, values, summary)

    reports = []
    skipped: dict[str, int] = {}
    for p, row in zip(points, finals):
        for c in config.checks:
            v = row[c]
            if v is SKIP:
                skipped[c] = skipped.get(c, 0) + 1
                continue
            reports.append(ResidualReport(c, tuple(p), float(v), config.tolerance_for(c)))
    full = summarize(reports, notes=summary.notes, kappa_hat=summary.kappa_hat, skipped=skipped)
    return RunResult(reports, full)


def _finalize(S: AcmStructure, config: RunConfig, values: list[dict], summary: Summary) -> list[dict]:
    rows = [dict(v) for v in values]
    if "constsec" in config.checks:
        terms = [r["constsec"] for r in rows if isinstance(r["constsec"], tuple)]
        kappa = config.kappa if config.kappa is not None else S.kappa
        if kappa is None:
            kappa = float(np.median([-lhs / w for lhs, w in terms])) if terms else 0.0
            summary.notes["constsec"] = f"kappa fitted by median: {kappa!r}"
        for r in rows:
            if isinstance(r["constsec"], tuple):
                lhs, w = r["constsec"]
                r["constsec"] = abs(lhs + kappa * w)
    if "theorem" in config.checks:
        tps = [r["theorem"] for r in rows if not isinstance(r["theorem"], float)]
        kappas = [tp.kappa for tp in tps]
        kappa_hat = float(np.median(kappas)) if kappas else None
        summary.kappa_hat = kappa_hat
        branches = sorted({"+lambda" if tp.eigenvalue > 0 else "-lambda" for tp in tps if tp.lam >= LAMBDA_MIN})
        note = [f"K on branch {'/'.join(branches) or 'none'}"]
        if kappas:
            note.append(f"kappa variance {float(np.var(kappas)):.3e}")
        if any(tp.lam < LAMBDA_MIN for tp in tps):
            note.append("hypothesis 'A != 0 everywhere' violated")
        summary.notes["theorem"] = ", ".join(note)
        for r in rows:
            tp = r["theorem"]
            if isinstance(tp, float):
                continue
            if tp.lam < LAMBDA_MIN:
                r["theorem"] = math.inf
                continue
            eq = abs(tp.laplacian - 0.5 * kappa_hat * tp.inv_norm**3)
            r["theorem"] = max(eq, tp.eigen_residual, tp.killing_residual, tp.corollary_residual)
    return rows
