"""Basins of attraction, critical-mass thresholds and escape rates."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import moran, simplex
from .game import GameParams, payoff_arrays
from .moran import MoranConfig
from .parallel import pmap
from .perception import (
    IDENTITY,
    PerceptionSpec,
    format_perception,
    is_stochastic,
    make_rng,
    perceived_cost_array,
    spec_to_dict,
)
from .replicator import replicator_flow
from .simplex import Stability

log = logging.getLogger(__name__)

DEFECTION = "defection"
COOPERATIVE = "cooperative"
UNRESOLVED = "unresolved"
LABELS = (DEFECTION, COOPERATIVE, UNRESOLVED)

REPLICATOR = "replicator"
MORAN = "moran"

ANALYTIC = "analytic-bisection"
SIMULATED = "simulated"


@dataclass
class BasinReport:
    resolution: int
    points: np.ndarray
    labels: np.ndarray
    fractions: dict[str, float]
    spec: PerceptionSpec = IDENTITY
    dynamics: str = REPLICATOR
    seed: int | None = None
    attractors: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "fractions": {k: float(v) for k, v in self.fractions.items()},
            "resolution": self.resolution,
            "spec": spec_to_dict(self.spec),
            "seed": self.seed,
            "dynamics": self.dynamics,
        }


@dataclass
class ThresholdReport:
    """Critical monitor fraction on the D-CM edge.

    ``m_star`` is None when the edge payoff difference keeps one sign
    (``interior`` False) or when the computation failed (``error`` set).
    """

    spec: PerceptionSpec
    m_star: float | None
    method: str
    interior: bool = True
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "spec": spec_to_dict(self.spec),
            "perception": format_perception(self.spec),
            "m_star": self.m_star,
            "method": self.method,
            "interior": self.interior,
            "error": self.error,
        }


def _label_endpoint(x) -> str:
    if x[0] > 0.99:
        return DEFECTION
    if x[0] < 0.01:
        return COOPERATIVE
    return UNRESOLVED


def basin_map(
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    resolution: int = 100,
    dynamics: str = REPLICATOR,
    config: MoranConfig | None = None,
    step: float = 0.05,
    max_steps: int = 20000,
) -> BasinReport:
    """Label each of the ``resolution**2`` equal-area cells by the attractor its centroid reaches.

    The flow is the replicator equation or, for ``dynamics="moran"``, the
    Moran expected motion (noise averaged over a fixed bank of draws).
    A cell is *defection* or *cooperative* when its trajectory is captured
    within 1e-4 of a stable rest point with ``x_d > 0.99`` or ``x_d < 0.01``
    respectively; everything else, including budget exhaustion, is
    *unresolved*.
    """
    if dynamics == REPLICATOR:
        flow = replicator_flow(params, spec)
        seed = None
    elif dynamics == MORAN:
        config = config or MoranConfig.from_params(params)
        flow = moran.expected_motion_flow(params, spec, config)
        seed = config.seed if is_stochastic(spec) else None
    else:
        raise ValueError(f"unknown dynamics {dynamics!r}")

    fps = simplex.search_fixed_points(flow).points
    stable = [fp for fp in fps if fp.stability is Stability.STABLE]
    targets = np.array([fp.location for fp in stable]).reshape(-1, 3)
    cells = simplex.cell_centroids(resolution)
    hit, end = simplex.follow_flow(flow, cells, targets, step=step, max_steps=max_steps)

    labels = np.array([UNRESOLVED] * len(cells), dtype=object)
    for t, fp in enumerate(stable):
        labels[hit == t] = _label_endpoint(fp.location)

    # rest points the multi-start search missed
    missed = np.flatnonzero(hit < 0)
    if len(missed):
        speed = np.max(np.abs(flow(end[missed])), axis=1)
        for c in missed[speed < 1e-9]:
            if simplex.analyse_point(flow, end[c]).stability is Stability.STABLE:
                labels[c] = _label_endpoint(end[c])

    n = len(cells)
    fractions = {lab: float(np.count_nonzero(labels == lab)) / n for lab in LABELS}
    return BasinReport(resolution, cells, labels.astype(str), fractions, spec, dynamics, seed, fps)


# --- thresholds ------------------------------------------------------------


def edge_payoff_gap(m, params: GameParams, spec: PerceptionSpec = IDENTITY) -> np.ndarray:
    """``U_CM - U_D`` at the states ``(1 - m, 0, m)``."""
    m = np.asarray(m, dtype=float)
    n = params.n_group
    n_mon = m * n
    true_cf = params.p_checks * (n_mon / n) * params.s
    cf = perceived_cost_array(true_cf, n_mon / n, params, spec)
    u = payoff_arrays(params, n_mon, n_mon, cf)
    return u[..., 2] - u[..., 0]


def _bisect(fn: Callable[[float], float], a: float, b: float, xtol: float = 1e-12) -> float:
    fa = fn(a)
    while b - a > xtol:
        mid = 0.5 * (a + b)
        fm = fn(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def _analytic_threshold(params, spec) -> ThresholdReport:
    grid = np.linspace(0.0, 1.0, 4001)
    grid[0] = 1e-12
    g = edge_payoff_gap(grid, params, spec)
    up = np.flatnonzero((g[:-1] < 0) & (g[1:] >= 0))
    if not len(up):
        return ThresholdReport(spec, None, ANALYTIC, interior=False)
    i = up[0]
    root = _bisect(lambda m: float(edge_payoff_gap(m, params, spec)), grid[i], grid[i + 1])
    return ThresholdReport(spec, float(root), ANALYTIC)


def edge_drift(params: GameParams, spec: PerceptionSpec, config: MoranConfig) -> np.ndarray:
    """Moran selection gradient at the D-CM edge states ``(Z - k, 0, k)``, ``k = 0..Z``."""
    z = config.z_pop
    states = np.array([(z - k, 0, k) for k in range(z + 1)])
    return moran.gradients_at(states, params, spec, config)


def _simulated_threshold(params, spec, config) -> ThresholdReport:
    z = config.z_pop
    d = edge_drift(params, spec, config)[:, 0]
    for k in range(1, z - 1):
        if d[k] > 0 and d[k + 1] <= 0:
            m = (k + d[k] / (d[k] - d[k + 1])) / z
            return ThresholdReport(spec, float(m), SIMULATED)
    return ThresholdReport(spec, None, SIMULATED, interior=False)


def edge_threshold(
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    method: str = "auto",
    config: MoranConfig | None = None,
) -> ThresholdReport:
    """Critical mass of monitors on the D-CM edge.

    ``analytic`` bisects the deterministic payoff gap ``U_CM - U_D``;
    ``simulated`` locates where the Monte-Carlo Moran drift of defectors
    turns from positive to negative.  ``auto`` picks by whether the spec is
    stochastic.
    """
    if method == "auto":
        method = SIMULATED if is_stochastic(spec) else ANALYTIC
    if method in ("analytic", ANALYTIC):
        if is_stochastic(spec):
            raise ValueError("the analytic threshold needs a deterministic perception")
        return _analytic_threshold(params, spec)
    if method == SIMULATED:
        return _simulated_threshold(params, spec, config or MoranConfig.from_params(params))
    raise ValueError(f"unknown threshold method {method!r}")


def threshold_sweep(
    params: GameParams,
    specs: Sequence[PerceptionSpec],
    config: MoranConfig | None = None,
    method: str = "auto",
    threads: int | None = None,
) -> list[ThresholdReport]:
    """:func:`edge_threshold` per spec, all with the same Moran config and seed."""

    def one(spec):
        try:
            return edge_threshold(params, spec, method, config)
        except Exception as exc:  # one bad spec must not sink the sweep
            log.warning("threshold failed for %s: %s", spec, exc)
            return ThresholdReport(spec, None, method, interior=False, error=str(exc))

    return pmap(one, specs, threads)


# --- escape ----------------------------------------------------------------


def defector_majority(states: np.ndarray, z_pop: int) -> np.ndarray:
    return states[:, 0] / z_pop > 0.9


def basin_escape_rate(
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    config: MoranConfig | None = None,
    start_region: Callable[[np.ndarray, int], np.ndarray] | None = None,
    horizon: int = 100_000,
    n_runs: int = 1000,
) -> float:
    """Fraction of Moran runs that leave the defector region for ``k_d / Z < 0.1``.

    Starts are drawn uniformly from the count states selected by
    ``start_region(states, z_pop)`` (default ``k_d / Z > 0.9``).  A run ends
    on reaching the target, on absorption (``mu = 0`` and a homogeneous
    state) or after ``horizon`` steps.
    """
    config = config or MoranConfig.from_params(params)
    z = config.z_pop
    region = start_region or defector_majority
    states = moran.count_states(z)
    pool = states[region(states, z)]
    if not len(pool):
        raise ValueError("start region contains no states")
    rng = make_rng(config.seed)
    starts = pool[rng.integers(len(pool), size=n_runs)]

    def stop(k):
        done = k[:, 0] / z < 0.1
        if config.mu == 0:
            done |= k.max(axis=1) == z
        return done

    final, _ = moran.run_until(starts, params, spec, config, horizon, rng, stop)
    return float(np.mean(final[:, 0] / z < 0.1))
