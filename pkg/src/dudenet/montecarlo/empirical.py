"""Empirical estimators on top of :func:`simulate`, plus sample dumps."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..association import AssocResult, Criterion, Direction
from ..params import SystemParams
from .engine import WINDOW_RADIUS, LinkSamples, simulate

__all__ = [
    "Z95",
    "proportion_ci",
    "EmpiricalAssoc",
    "empirical_assoc",
    "empirical_sinr",
    "empirical_rate",
    "empirical_ccdf",
    "empirical_quantile",
    "ks_distance",
    "write_samples_csv",
    "write_summary_json",
    "summarize",
]

Z95 = 1.959963984540054


def proportion_ci(successes: int, n: int) -> tuple[float, float]:
    """Point estimate and normal-approximation 95% half-width."""
    if n < 1:
        raise ValueError("need at least one trial")
    p = successes / n
    return p, Z95 * math.sqrt(p * (1.0 - p) / n)


@dataclass(frozen=True)
class EmpiricalAssoc:
    ul: AssocResult
    dl: AssocResult
    decoupling_gain: float
    decoupling_ci: float

    def __getitem__(self, direction: Direction) -> AssocResult:
        return self.ul if direction is Direction.UL else self.dl


def _assoc_from(samples: LinkSamples, criterion: Criterion) -> EmpiricalAssoc:
    prefix = "tier" if criterion is Criterion.MAX_BRP else "rate_tier"
    ul = getattr(samples, f"{prefix}_ul")
    dl = getattr(samples, f"{prefix}_dl")
    n = samples.n_drops
    res = {}
    for name, tiers in (("ul", ul), ("dl", dl)):
        n_s = int(np.count_nonzero(tiers))
        p_s, hw = proportion_ci(n_s, n)
        # Complement by counts so the two probabilities sum to one exactly.
        res[name] = AssocResult((n - n_s) / n, n_s / n, "monte_carlo", hw)
    gain, gain_hw = proportion_ci(int(np.count_nonzero(ul != dl)), n)
    return EmpiricalAssoc(res["ul"], res["dl"], gain, gain_hw)


def empirical_assoc(params: SystemParams, criterion: Criterion, n_drops: int, seed: int,
                    window_radius: float = WINDOW_RADIUS) -> EmpiricalAssoc:
    """Association fractions of the typical UE in both directions.

    Only the typical UE is resolved, which is all association needs.  The
    decoupling gain is the fraction of drops whose UL and DL tiers differ.
    """
    samples = simulate(params, n_drops, seed, full_field=False, window_radius=window_radius)
    return _assoc_from(samples, criterion)


def empirical_sinr(params: SystemParams, direction: Direction, n_drops: int, seed: int,
                   include_mmwave_interference: bool = False,
                   window_radius: float = WINDOW_RADIUS) -> LinkSamples:
    """Per-drop SINR and SNR samples (all UEs associated, so UL is resolved)."""
    full = direction is Direction.UL
    return simulate(params, n_drops, seed, full_field=full,
                    include_mmwave_interference=include_mmwave_interference,
                    window_radius=window_radius)


def empirical_rate(params: SystemParams, direction: Direction, n_drops: int, seed: int,
                   window_radius: float = WINDOW_RADIUS) -> LinkSamples:
    """Per-drop rates using each serving cell's realised load."""
    return simulate(params, n_drops, seed, full_field=True, window_radius=window_radius)


def empirical_ccdf(values, thresholds) -> tuple[np.ndarray, np.ndarray]:
    """P(value > threshold) with 95% half-widths, on a grid of thresholds."""
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    thr = np.asarray(thresholds, dtype=float)
    p = (n - np.searchsorted(v, thr, side="right")) / n
    return p, Z95 * np.sqrt(p * (1.0 - p) / n)


def empirical_quantile(values, q: float) -> float:
    return float(np.quantile(np.asarray(values, dtype=float), q))


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between samples and a vectorised CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    f = np.asarray(cdf(x), dtype=float)
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


def _db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def write_samples_csv(samples: LinkSamples, path: str | Path) -> Path:
    """One row per drop and direction."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["drop", "direction", "serving_tier", "sinr_db", "snr_db", "rate_bps", "load"])
        for k in range(samples.n_drops):
            for d in (Direction.DL, Direction.UL):
                tier = "scell" if samples.get("tier", d)[k] else "mcell"
                w.writerow([k, d.value, tier,
                            f"{_db(samples.get('sinr', d)[k]):.6g}",
                            f"{_db(samples.get('snr', d)[k]):.6g}",
                            f"{samples.get('rate', d)[k]:.6g}",
                            f"{samples.get('load', d)[k]:.6g}"])
    return path


def summarize(samples: LinkSamples) -> dict:
    """Point estimates and 95% CIs of the association fractions, plus SINR/rate digests."""
    summary = {"n_drops": samples.n_drops, "rejected_realizations": samples.rejected,
               "silent_cell_fraction": (samples.silent_cells / samples.other_cells
                                        if samples.other_cells else None)}
    for criterion in Criterion:
        est = _assoc_from(samples, criterion)
        summary[criterion.value] = {
            d.value: {"p_mcell": est[d].p_mcell, "p_scell": est[d].p_scell,
                      "ci_halfwidth": est[d].ci_halfwidth}
            for d in Direction
        }
        summary[criterion.value]["decoupling_gain"] = est.decoupling_gain
        summary[criterion.value]["decoupling_ci"] = est.decoupling_ci
    for d in Direction:
        sinr = samples.get("sinr", d)
        if np.all(np.isnan(sinr)):
            continue
        summary[f"median_sinr_db_{d.value}"] = float(np.nanmedian(_db(sinr)))
        rate = samples.get("rate", d)
        if not np.all(np.isnan(rate)):
            summary[f"p5_rate_{d.value}"] = float(np.nanquantile(rate, 0.05))
    return summary


def write_summary_json(samples: LinkSamples, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summarize(samples), indent=2), encoding="utf-8")
    return path
