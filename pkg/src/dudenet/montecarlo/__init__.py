"""Monte Carlo engine: network drops around a typical UE."""

from .empirical import (
    EmpiricalAssoc,
    empirical_assoc,
    empirical_ccdf,
    empirical_quantile,
    empirical_rate,
    empirical_sinr,
    ks_distance,
    proportion_ci,
    summarize,
    write_samples_csv,
    write_summary_json,
)
from .engine import (
    WINDOW_RADIUS,
    LinkSamples,
    NetworkRealization,
    Stream,
    associate,
    sample_realization,
    simulate,
    stream_rng,
)

__all__ = [
    "EmpiricalAssoc",
    "LinkSamples",
    "NetworkRealization",
    "Stream",
    "WINDOW_RADIUS",
    "associate",
    "empirical_assoc",
    "empirical_ccdf",
    "empirical_quantile",
    "empirical_rate",
    "empirical_sinr",
    "ks_distance",
    "proportion_ci",
    "sample_realization",
    "simulate",
    "stream_rng",
    "summarize",
    "write_samples_csv",
    "write_summary_json",
]
