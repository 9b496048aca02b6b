"""Cell association and coverage in a sub-6GHz macro / mmWave small-cell network.

Analytic evaluators (``association``, ``coverage``) and a Monte Carlo
engine (``montecarlo``) over the same :class:`~dudenet.params.SystemParams`.
"""

__version__ = "0.1.0"
