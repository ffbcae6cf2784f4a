"""Fixed defaults for grids, seeds and tolerances.

Every randomized sweep reads its seed from here unless one is passed
explicitly, so reports are reproducible run to run.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Defaults:
    seed: int = 20240611
    grid_points: int = 512
    log_p_span: tuple[float, float] = (-40.0, 40.0)
    float_tol: float = 1e-9
    slack_tol: float = 1e-12
    trials: int = 500
    deltas: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    # truncated geometric grid used by the closed-form and deviation sweeps
    geom_ps: tuple[float, ...] = tuple(round(0.05 * j, 2) for j in range(1, 20)) + (1.0, 1.5, 2.0, 4.0, 10.0)
    geom_ks: tuple[int, ...] = (0, 3)
    geom_max_len: int = 200
    # log-affine ratios for the exhaustive dilation sweep
    dilation_log_ps: tuple[float, ...] = tuple(round(-3.0 + 3.0 * j / 7, 6) for j in range(15))
    pl_ts: tuple[float, ...] = (0.25, 0.5, 0.75)
    rj_pairs: tuple[tuple[float, float], ...] = ((1, 2), (1, 3), (2, 4), (1, 8))


DEFAULTS = Defaults()
