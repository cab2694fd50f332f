"""Deterministic replicator dynamics of the institution game."""

from __future__ import annotations

import numpy as np

from . import simplex
from .game import GameParams, payoff_arrays
from .perception import IDENTITY, PerceptionSpec, is_stochastic, perceived_cost_array
from .simplex import FixedPoint, GradientField, Stability


def _require_deterministic(spec: PerceptionSpec):
    if is_stochastic(spec):
        raise ValueError(
            "replicator dynamics need a deterministic perception; use the Moran process for noise"
        )


def payoffs_at(x, params: GameParams, spec: PerceptionSpec = IDENTITY) -> np.ndarray:
    """Utilities at frequency vectors ``x`` (shape ``(..., 3)``), counts scaled by ``n_group``."""
    x = np.asarray(x, dtype=float)
    n = params.n_group
    n_contrib = (x[..., 1] + x[..., 2]) * n
    n_mon = x[..., 2] * n
    catch = n_mon / n
    true_cf = params.p_checks * catch * params.s
    cf = perceived_cost_array(true_cf, catch, params, spec)
    return payoff_arrays(params, n_contrib, n_mon, cf)


def replicator_from_payoffs(x, payoffs) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    mean = np.sum(x * payoffs, axis=-1, keepdims=True)
    return x * (payoffs - mean)


def replicator_derivative(x, params: GameParams, spec: PerceptionSpec = IDENTITY) -> np.ndarray:
    """``dx_i/dt = x_i (u_i - mean payoff)``; vectorised over leading axes."""
    _require_deterministic(spec)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return replicator_from_payoffs(x, payoffs_at(x, params, spec))


def replicator_flow(params: GameParams, spec: PerceptionSpec = IDENTITY) -> simplex.Flow:
    _require_deterministic(spec)

    def flow(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return replicator_from_payoffs(x, payoffs_at(x, params, spec))

    return flow


def integrate_trajectory(
    x0,
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    step: float = 0.01,
    n_steps: int = 1000,
) -> np.ndarray:
    """RK4 path with clip-and-renormalise after every step; row 0 is ``x0``."""
    return simplex.integrate(replicator_flow(params, spec), x0, step, n_steps)


def gradient_field(
    params: GameParams, spec: PerceptionSpec = IDENTITY, resolution: int = 20
) -> GradientField:
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    pts = simplex.lattice(resolution)
    return GradientField(resolution, pts, replicator_derivative(pts, params, spec))


def search_fixed_points(
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    seed_resolution: int = 10,
    tol: float = 1e-8,
) -> simplex.FixedPointSearch:
    return simplex.search_fixed_points(replicator_flow(params, spec), seed_resolution, tol)


def find_fixed_points(
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    seed_resolution: int = 10,
    tol: float = 1e-8,
) -> list[FixedPoint]:
    """Rest points with their stability; see :func:`search_fixed_points` for failed seeds."""
    return search_fixed_points(params, spec, seed_resolution, tol).points


def classify_fixed_point(
    location, params: GameParams, spec: PerceptionSpec = IDENTITY, tol: float = 1e-8
) -> Stability:
    return simplex.analyse_point(replicator_flow(params, spec), location, tol).stability
