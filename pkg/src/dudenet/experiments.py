"""Named parameter sweeps comparing the analytic and Monte Carlo engines.

An :class:`ExperimentSpec` sweeps one quantity (a configuration field in its
configuration unit, the density ratio ``ratio`` = lambda_s / lambda_m, or a
threshold ``tau_db`` / ``rate``) and evaluates a list of metrics with one or
both engines.  :func:`run_experiment` writes one CSV per (metric, engine)
and a JSON report with the engine discrepancies.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .association import Criterion, Direction, assoc_brp, assoc_rate
from .coverage import percentile_rate, percentile_sinr, rate_coverage, scell_coverage, sinr_coverage
from .montecarlo import LinkSamples, empirical_ccdf, proportion_ci, simulate
from .montecarlo.empirical import Z95
from .params import CONFIG_UNITS, SystemParams, _parse_value, load_config

__all__ = [
    "ENGINES",
    "METRICS",
    "ExperimentSpec",
    "Curve",
    "ExperimentReport",
    "SpecError",
    "apply_swept",
    "run_experiment",
    "crossing_point",
    "CrossingError",
    "decoupling_gain_sweep",
    "LIBRARY",
    "library_spec",
    "load_spec",
]

ENGINES = ("analytic", "mc")
THRESHOLD_SWEEPS = ("tau_db", "rate")


class SpecError(ValueError):
    pass


class CrossingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# metric catalogue

@dataclass(frozen=True)
class Metric:
    name: str
    analytic: Callable | None        # (params, x) -> float ; x only for threshold sweeps
    mc: Callable | None              # (LinkSamples, x) -> (est, lo, hi)
    full_field: bool = False         # MC needs every UE associated
    mmwave_interference: bool = False
    threshold: str | None = None     # which threshold sweep the metric belongs to


def _dirs():
    return ((Direction.UL, "ul"), (Direction.DL, "dl"))


def _prop(values: np.ndarray):
    p, hw = proportion_ci(int(np.count_nonzero(values)), len(values))
    return p, max(p - hw, 0.0), min(p + hw, 1.0)


def _ccdf(values, x):
    p, hw = empirical_ccdf(values, [x])
    return float(p[0]), max(float(p[0] - hw[0]), 0.0), min(float(p[0] + hw[0]), 1.0)


def _quantile(values, q):
    """Sample quantile with a distribution-free 95% interval from order statistics."""
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    half = Z95 * math.sqrt(n * q * (1.0 - q))
    lo = v[max(int(math.floor(n * q - half)), 0)]
    hi = v[min(int(math.ceil(n * q + half)), n - 1)]
    return float(np.quantile(v, q)), float(lo), float(hi)


def _build_metrics() -> dict[str, Metric]:
    out: dict[str, Metric] = {}
    for d, tag in _dirs():
        for crit, cname, fn in ((Criterion.MAX_BRP, "brp", assoc_brp),
                                (Criterion.MAX_RATE, "rate", assoc_rate)):
            prefix = "tier" if crit is Criterion.MAX_BRP else "rate_tier"
            out[f"assoc_{cname}_scell_{tag}"] = Metric(
                f"assoc_{cname}_scell_{tag}",
                lambda p, x, d=d, fn=fn: fn(d, p).p_scell,
                lambda s, x, attr=f"{prefix}_{tag}": _prop(getattr(s, attr) == 1))
            out[f"assoc_{cname}_mcell_{tag}"] = Metric(
                f"assoc_{cname}_mcell_{tag}",
                lambda p, x, d=d, fn=fn: fn(d, p).p_mcell,
                lambda s, x, attr=f"{prefix}_{tag}": _prop(getattr(s, attr) == 0))
        out[f"sinr_ccdf_{tag}"] = Metric(
            f"sinr_ccdf_{tag}",
            lambda p, x, d=d: sinr_coverage(d, p, 10 ** (x / 10)).total,
            lambda s, x, d=d: _ccdf(s.get("sinr", d), 10 ** (x / 10)),
            full_field=d is Direction.UL, threshold="tau_db")
        out[f"rate_ccdf_{tag}"] = Metric(
            f"rate_ccdf_{tag}",
            lambda p, x, d=d: rate_coverage(d, p, x).total,
            lambda s, x, d=d: _ccdf(s.get("rate", d), x),
            full_field=True, threshold="rate")
        # mmWave-served UEs only (conditional on the Scell tier)
        out[f"mmw_snr_ccdf_{tag}"] = Metric(
            f"mmw_snr_ccdf_{tag}",
            lambda p, x, d=d: scell_coverage(d, 10 ** (x / 10), p) / assoc_brp(d, p).p_scell,
            lambda s, x, d=d: _ccdf(s.get("snr", d)[s.get("tier", d) == 1], 10 ** (x / 10)),
            full_field=d is Direction.UL, mmwave_interference=True, threshold="tau_db")
        out[f"mmw_sinr_ccdf_{tag}"] = Metric(
            f"mmw_sinr_ccdf_{tag}", None,
            lambda s, x, d=d: _ccdf(s.get("sinr", d)[s.get("tier", d) == 1], 10 ** (x / 10)),
            full_field=d is Direction.UL, mmwave_interference=True, threshold="tau_db")
        for pct, level in ((5, 0.95), (50, 0.5)):
            out[f"p{pct}_rate_{tag}"] = Metric(
                f"p{pct}_rate_{tag}",
                lambda p, x, d=d, level=level: percentile_rate(d, level, p),
                lambda s, x, d=d, level=level: _quantile(s.get("rate", d), 1.0 - level),
                full_field=True)
            out[f"p{pct}_sinr_{tag}"] = Metric(
                f"p{pct}_sinr_{tag}",
                lambda p, x, d=d, level=level: 10 * math.log10(percentile_sinr(d, level, p)),
                lambda s, x, d=d, level=level: tuple(
                    10 * math.log10(v) for v in _quantile(s.get("sinr", d), 1.0 - level)),
                full_field=d is Direction.UL)
        out[f"crossing_ratio_{tag}"] = Metric(
            f"crossing_ratio_{tag}",
            lambda p, x, d=d: _crossing_ratio(d, p), None)
    for cname, prefix in (("brp", "tier"), ("rate", "rate_tier")):
        fn = assoc_brp if cname == "brp" else assoc_rate
        out[f"decoupling_{cname}"] = Metric(
            f"decoupling_{cname}",
            lambda p, x, fn=fn: abs(fn(Direction.UL, p).p_scell - fn(Direction.DL, p).p_scell),
            lambda s, x, prefix=prefix: _prop(getattr(s, f"{prefix}_ul") != getattr(s, f"{prefix}_dl")))
    return out


CROSSING_RATIOS = tuple(float(v) for v in np.logspace(-1, 3, 81))


def _crossing_ratio(direction: Direction, params: SystemParams) -> float:
    pm, ps = [], []
    for r in CROSSING_RATIOS:
        res = assoc_brp(direction, params.replace(lambda_s=r * params.lambda_m))
        pm.append(res.p_mcell)
        ps.append(res.p_scell)
    return crossing_point(CROSSING_RATIOS, pm, ps)[0]


METRICS = _build_metrics()


# ---------------------------------------------------------------------------
# specs

@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    swept: str
    grid: tuple[float, ...]
    metrics: tuple[str, ...]
    n_drops: int = 20000
    seed: int = 1
    engines: tuple[str, ...] = ENGINES
    base: dict = field(default_factory=dict)   # configuration overrides
    tolerance: float = 0.03

    def __post_init__(self):
        if not self.grid:
            raise SpecError(f"{self.name}: empty grid")
        if list(self.grid) != sorted(self.grid):
            raise SpecError(f"{self.name}: grid must be sorted")
        if self.swept not in CONFIG_UNITS and self.swept not in ("ratio", *THRESHOLD_SWEEPS):
            raise SpecError(f"{self.name}: unknown swept quantity {self.swept!r}")
        for m in self.metrics:
            if m not in METRICS:
                raise SpecError(f"{self.name}: unknown metric {m!r}")
            want = METRICS[m].threshold
            if (want or self.swept in THRESHOLD_SWEEPS) and want != self.swept:
                raise SpecError(f"{self.name}: metric {m!r} cannot be swept over {self.swept!r}")
        for e in self.engines:
            if e not in ENGINES:
                raise SpecError(f"{self.name}: unknown engine {e!r}")
        if self.n_drops < 1:
            raise SpecError(f"{self.name}: n_drops must be >= 1")

    def replace(self, **changes) -> "ExperimentSpec":
        from dataclasses import replace
        return replace(self, **changes)


def apply_swept(params: SystemParams, swept: str, value: float) -> SystemParams:
    """Parameters at one grid point (thresholds leave them unchanged)."""
    if swept in THRESHOLD_SWEEPS:
        return params
    if swept == "ratio":
        return params.replace(lambda_s=value * params.lambda_m)
    return params.replace(**{swept: _parse_value(swept, value)})


@dataclass
class Curve:
    x: np.ndarray
    estimate: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    curves: dict[tuple[str, str], Curve]
    errors: dict[str, list[str]]
    comparison: dict[str, dict[str, Any]]
    runtime_s: float
    files: list[Path] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(c["passed"] for c in self.comparison.values())


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _run_mc(spec: ExperimentSpec, params: SystemParams, metrics: list[Metric],
            errors: dict[str, list[str]]) -> dict[str, Curve]:
    full = any(m.full_field for m in metrics)
    mmw = any(m.mmwave_interference for m in metrics)
    grid = list(spec.grid)
    points = [apply_swept(params, spec.swept, x) for x in grid]
    samples: list[LinkSamples | None]
    try:
        if spec.swept in THRESHOLD_SWEEPS:
            one = simulate(params, spec.n_drops, spec.seed, full_field=full,
                           include_mmwave_interference=mmw)
            samples = [one] * len(grid)
        elif all(p.geometry == params.geometry for p in points):
            # Same point patterns at every grid point: common realizations.
            samples = simulate(points[0], spec.n_drops, spec.seed, variants=points,
                               full_field=full, include_mmwave_interference=mmw)
        else:
            samples = []
            for i, p in enumerate(points):
                try:
                    samples.append(simulate(p, spec.n_drops, _point_seed(spec.seed, i),
                                            full_field=full, include_mmwave_interference=mmw))
                except Exception as exc:  # recorded, the sweep continues
                    errors.setdefault("mc", []).append(f"{spec.swept}={grid[i]}: {exc!r}")
                    samples.append(None)
    except Exception as exc:
        errors.setdefault("mc", []).append(f"simulation failed: {exc!r}")
        samples = [None] * len(grid)

    curves = {}
    for m in metrics:
        est, lo, hi = (np.full(len(grid), np.nan) for _ in range(3))
        for i, (x, s) in enumerate(zip(grid, samples)):
            if s is None:
                continue
            try:
                est[i], lo[i], hi[i] = m.mc(s, x)
            except Exception as exc:
                errors.setdefault(m.name, []).append(f"mc at {x}: {exc!r}")
        curves[m.name] = Curve(np.array(grid), est, lo, hi)
    return curves


def _run_analytic(spec: ExperimentSpec, params: SystemParams, metrics: list[Metric],
                  errors: dict[str, list[str]]) -> dict[str, Curve]:
    curves = {}
    for m in metrics:
        est = np.full(len(spec.grid), np.nan)
        for i, x in enumerate(spec.grid):
            try:
                est[i] = m.analytic(apply_swept(params, spec.swept, x), x)
            except Exception as exc:
                errors.setdefault(m.name, []).append(f"analytic at {x}: {exc!r}")
        curves[m.name] = Curve(np.array(spec.grid, dtype=float), est, est.copy(), est.copy())
    return curves


def _fmt(v: float) -> str:
    return repr(float(v))


def write_curve_csv(curve: Curve, swept: str, path: Path) -> Path:
    order = np.argsort(curve.x, kind="stable")
    lines = [f"{swept},estimate,ci_low,ci_high"]
    for i in order:
        lines.append(",".join(_fmt(v) for v in (curve.x[i], curve.estimate[i],
                                                 curve.ci_low[i], curve.ci_high[i])))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def run_experiment(spec: ExperimentSpec, params: SystemParams | None = None,
                   out_dir: str | Path | None = None) -> ExperimentReport:
    """Evaluate every metric with every requested engine that supports it."""
    t0 = time.perf_counter()
    base = load_config(spec.base) if params is None else params
    if params is not None and spec.base:
        base = params.replace(**{k: _parse_value(k, v) for k, v in spec.base.items()})
    errors: dict[str, list[str]] = {}
    curves: dict[tuple[str, str], Curve] = {}
    metrics = [METRICS[m] for m in spec.metrics]
    if "analytic" in spec.engines:
        for name, c in _run_analytic(spec, base, [m for m in metrics if m.analytic], errors).items():
            curves[(name, "analytic")] = c
    if "mc" in spec.engines:
        for name, c in _run_mc(spec, base, [m for m in metrics if m.mc], errors).items():
            curves[(name, "mc")] = c

    comparison = {}
    for m in spec.metrics:
        if (m, "analytic") in curves and (m, "mc") in curves:
            a, s = curves[(m, "analytic")], curves[(m, "mc")]
            gap = np.abs(a.estimate - s.estimate)
            flagged = [float(x) for x, g in zip(a.x, gap) if not g <= spec.tolerance]
            comparison[m] = {
                "max_abs_discrepancy": float(np.nanmax(gap)) if np.any(np.isfinite(gap)) else None,
                "tolerance": spec.tolerance,
                "flagged": flagged,
                "passed": not flagged,
            }

    report = ExperimentReport(spec, curves, errors, comparison, time.perf_counter() - t0)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for (m, engine), c in sorted(curves.items()):
            report.files.append(write_curve_csv(c, spec.swept, out / f"{spec.name}_{m}_{engine}.csv"))
        doc = {
            "experiment": spec.name,
            "swept": spec.swept,
            "grid": list(spec.grid),
            "n_drops": spec.n_drops,
            "seed": spec.seed,
            "engines": list(spec.engines),
            "comparison": comparison,
            "errors": errors,
            "passed": report.passed,
        }
        path = out / f"{spec.name}_report.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        report.files.append(path)
    return report


# ---------------------------------------------------------------------------
# derived sweeps

def crossing_point(grid, p_mcell, p_scell) -> tuple[float, bool]:
    """First sign change of p_scell - p_mcell, linearly interpolated.

    Returns (value, multiple) where ``multiple`` flags further sign changes.
    """
    x = np.asarray(grid, dtype=float)
    diff = np.asarray(p_scell, dtype=float) - np.asarray(p_mcell, dtype=float)
    if not (len(x) == len(diff) == len(np.asarray(p_mcell))):
        raise ValueError("curves must share the grid")
    sign = np.sign(diff)
    changes = [i for i in range(len(x) - 1)
               if sign[i] != sign[i + 1] and not (sign[i] == 0 and i > 0)]
    exact = np.flatnonzero(diff == 0)
    if not changes and not len(exact):
        raise CrossingError(
            f"no crossing: p_scell - p_mcell ranges over [{diff.min():.4g}, {diff.max():.4g}]")
    if len(exact) and (not changes or exact[0] <= changes[0]):
        return float(x[exact[0]]), len(changes) > 1
    i = changes[0]
    t = diff[i] / (diff[i] - diff[i + 1])
    return float(x[i] + t * (x[i + 1] - x[i])), len(changes) > 1


def decoupling_gain_sweep(params: SystemParams, alpha_n=(3.0, 4.0), alpha_m=(3.0, 4.0),
                          mu=(100.0, 200.0), ratios=tuple(range(1, 101))) -> list[dict]:
    """Max-over-density Max-BRP decoupling gain for each (alpha_n, alpha_m, mu)."""
    rows = []
    for an in alpha_n:
        for am in alpha_m:
            for m in mu:
                p = params.replace(alpha_n=an, alpha_m=am, mu=m)
                gains = [abs(assoc_brp(Direction.UL, q).p_scell - assoc_brp(Direction.DL, q).p_scell)
                         for q in (p.replace(lambda_s=r * p.lambda_m) for r in ratios)]
                k = int(np.argmax(gains))
                rows.append({"alpha_n": an, "alpha_m": am, "mu": m,
                             "max_gain": float(gains[k]), "at_ratio": float(ratios[k])})
    return rows


# ---------------------------------------------------------------------------
# built-in library

_RATIOS = (1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 70.0, 100.0)
_BIAS_DB = tuple(float(b) for b in range(0, 65, 5))
_TAU_DB = tuple(float(t) for t in range(-10, 31, 2))
_RATES = tuple(float(r) for r in np.logspace(5, 10, 21))


def _assoc_metrics(kind: str) -> tuple[str, ...]:
    return tuple(f"assoc_{kind}_{t}cell_{d}" for t in ("s", "m") for d in ("ul", "dl")) + (
        f"decoupling_{kind}",)


LIBRARY: dict[str, list[ExperimentSpec]] = {
    "fig2a": [ExperimentSpec("fig2a", "ratio", _RATIOS, _assoc_metrics("brp"),
                             base={"g_s_max": 23.0})],
    "fig2b": [ExperimentSpec("fig2b", "ratio", _RATIOS, _assoc_metrics("brp"),
                             base={"g_s_max": 0.0})],
    "fig3": [ExperimentSpec("fig3", "g_s_max", tuple(float(g) for g in range(0, 31, 5)),
                            ("crossing_ratio_ul", "crossing_ratio_dl"), engines=("analytic",))],
    "fig4": [ExperimentSpec("fig4", "ratio", _RATIOS, _assoc_metrics("rate"),
                            base={"g_s_max": 23.0})],
    "fig5": [
        ExperimentSpec("fig5a", "tau_db", _TAU_DB, ("sinr_ccdf_ul", "sinr_ccdf_dl"),
                       base={"joint_bias": True}),
        ExperimentSpec("fig5b", "rate", _RATES, ("rate_ccdf_ul", "rate_ccdf_dl"),
                       base={"joint_bias": True}),
    ],
    "fig7": [
        ExperimentSpec(f"fig7_{ls}", "tau_db", tuple(float(t) for t in range(-20, 41, 2)),
                       ("mmw_snr_ccdf_ul", "mmw_snr_ccdf_dl", "mmw_sinr_ccdf_ul", "mmw_sinr_ccdf_dl"),
                       base={"lambda_s": float(ls), "joint_bias": True})
        for ls in (30, 200)
    ],
    "fig8": [ExperimentSpec("fig8", "t_s", _BIAS_DB,
                            ("p5_rate_ul", "p5_rate_dl", "p5_sinr_ul", "p5_sinr_dl"),
                            base={"joint_bias": True}, tolerance=math.inf)],
    "fig9": [ExperimentSpec("fig9", "t_s", _BIAS_DB,
                            ("p50_rate_ul", "p50_rate_dl", "p50_sinr_ul", "p50_sinr_dl"),
                            base={"joint_bias": True}, tolerance=math.inf)],
    "fig10": [
        ExperimentSpec(f"fig10_{ls}", "t_s", _BIAS_DB, ("p5_rate_ul", "p5_rate_dl"),
                       base={"lambda_s": float(ls), "joint_bias": True}, tolerance=math.inf)
        for ls in (30, 50, 100)
    ],
}
LIBRARY["fig6"] = [LIBRARY["fig3"][0].replace(name="fig6")]


def library_spec(name: str) -> list[ExperimentSpec]:
    try:
        return LIBRARY[name]
    except KeyError:
        raise SpecError(f"unknown experiment {name!r}; known: {', '.join(sorted(LIBRARY))}") from None


def load_spec(source: str | Path | dict) -> list[ExperimentSpec]:
    """Experiment specs from a JSON object (or a list of objects)."""
    doc = source
    if not isinstance(source, (dict, list)):
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    items = doc if isinstance(doc, list) else [doc]
    specs = []
    for item in items:
        try:
            specs.append(ExperimentSpec(
                name=item["name"], swept=item["swept"],
                grid=tuple(float(v) for v in item["grid"]),
                metrics=tuple(item["metrics"]),
                n_drops=int(item.get("n_drops", 20000)),
                seed=int(item.get("seed", 1)),
                engines=tuple(item.get("engines", ENGINES)),
                base=dict(item.get("base", {})),
                tolerance=float(item.get("tolerance", 0.03)),
            ))
        except KeyError as exc:
            raise SpecError(f"experiment spec misses field {exc.args[0]!r}") from None
    return specs
