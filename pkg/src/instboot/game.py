"""The three-strategy institution game.

Strategies are defector (D), contributor (C) and contributor-monitor (CM).
Utilities are group-level expressions of the number of contributors
(``n_contrib``, which includes monitors), the number of monitors
(``n_mon``) and the group size (``n_group``).

The scalar functions mirror the individual cost/benefit terms; the
``*_array`` helpers evaluate the same formulas on numpy arrays of
real-valued counts and are what the dynamics modules call in bulk.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np


class Strategy(enum.IntEnum):
    """Index of each strategy in every 3-vector used by the package."""

    DEFECTOR = 0
    CONTRIBUTOR = 1
    CONTRIBUTOR_MONITOR = 2

    @property
    def label(self) -> str:
        return ("D", "C", "CM")[self.value]


STRATEGY_LABELS = ("D", "C", "CM")


class ParameterError(ValueError):
    """Raised when game or perception parameters violate their domain."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class GameParams:
    """World parameters plus the finite-population dynamics parameters.

    Attributes:
        alpha: cost of contributing to the common pool.
        beta: fraction of the pool paid out to monitors, in [0, 1].
        delta: cost to a monitor per check.
        p_checks: number of checks each monitor makes.
        s: cost of being punished.
        n_group: group size used inside the payoff formulas.
        z_pop: population size of the Moran process.
        gamma: selection intensity of the Fermi rule.
        mu: mutation probability per revision.
    """

    alpha: float = 1.0
    beta: float = 0.2
    delta: float = 0.1
    p_checks: float = 5.0
    s: float = 1.0
    n_group: int = 20
    z_pop: int = 40
    gamma: float = 1.0
    mu: float = 1e-3

    def __post_init__(self):
        def bad(key, why):
            raise ParameterError(f"invalid {key}={getattr(self, key)!r}: {why}", key)

        for key in ("alpha", "beta", "delta", "p_checks", "s", "gamma", "mu"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                bad(key, "must be a number")
            if not math.isfinite(value):
                bad(key, "must be finite")
        for key in ("n_group", "z_pop"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                if isinstance(value, float) and value.is_integer():
                    object.__setattr__(self, key, int(value))
                else:
                    bad(key, "must be an integer")
        if not 0.0 <= self.beta <= 1.0:
            bad("beta", "must lie in [0, 1]")
        for key in ("alpha", "delta", "p_checks", "s", "gamma"):
            if getattr(self, key) < 0:
                bad(key, "must be >= 0")
        if self.n_group < 1:
            bad("n_group", "must be >= 1")
        if self.z_pop < 2:
            bad("z_pop", "must be >= 2")
        if not 0.0 <= self.mu <= 1.0:
            bad("mu", "must lie in [0, 1]")

    def replace(self, **changes) -> "GameParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any], base: "GameParams | None" = None) -> "GameParams":
        """Build parameters from a mapping, optionally overriding ``base`` field by field.

        Unknown keys are rejected with a :class:`ParameterError` naming the key.
        """
        if not isinstance(data, dict):
            raise ParameterError("parameters must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ParameterError(f"unknown parameter key {key!r}", key)
        merged = (base or cls()).to_dict()
        merged.update(data)
        return cls(**merged)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str, base: "GameParams | None" = None) -> "GameParams":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed parameter JSON: {exc}") from exc
        return cls.from_dict(data, base=base)


PRESETS: dict[str, GameParams] = {
    "favourable": GameParams(delta=0.1),
    "unfavourable": GameParams(delta=0.5),
}


def preset(name: str) -> GameParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "preset"
        ) from None


@dataclass(frozen=True)
class PopulationState:
    """Group composition as strategy counts (real-valued counts are allowed)."""

    n_d: float
    n_c_only: float
    n_cm: float

    def __post_init__(self):
        for key in ("n_d", "n_c_only", "n_cm"):
            if getattr(self, key) < 0:
                raise ParameterError(f"{key} must be >= 0", key)

    @property
    def n_contrib(self) -> float:
        return self.n_c_only + self.n_cm

    @property
    def n_mon(self) -> float:
        return self.n_cm

    @property
    def total(self) -> float:
        return self.n_d + self.n_c_only + self.n_cm

    @classmethod
    def from_frequencies(cls, x, n_group: float) -> "PopulationState":
        x_d, x_c, x_cm = (float(v) for v in x)
        return cls(x_d * n_group, x_c * n_group, x_cm * n_group)


@dataclass(frozen=True)
class PayoffBreakdown:
    b_g: float
    c_c: float
    b_m: float
    c_m: float
    c_f: float
    u_d: float
    u_c: float
    u_cm: float


def benefit_group(params: GameParams, state: PopulationState) -> float:
    return (1.0 - params.beta) * params.alpha * state.n_contrib / params.n_group


def benefit_monitor(params: GameParams, state: PopulationState) -> float:
    """Per-monitor share of the pool; 0 when there are no monitors."""
    if state.n_mon == 0:
        return 0.0
    return params.alpha * params.beta * state.n_contrib / state.n_mon


def cost_contributing(params: GameParams) -> float:
    return params.alpha


def cost_monitoring(params: GameParams) -> float:
    return params.p_checks * params.delta


def catch_probability(params: GameParams, state: PopulationState) -> float:
    return state.n_mon / params.n_group


def expected_freeride_cost(params: GameParams, state: PopulationState) -> float:
    """True (undistorted) expected cost of free-riding."""
    return params.p_checks * catch_probability(params, state) * params.s


def payoff_breakdown(
    params: GameParams, state: PopulationState, perceived_cf: float | None = None
) -> PayoffBreakdown:
    b_g = benefit_group(params, state)
    c_c = cost_contributing(params)
    b_m = benefit_monitor(params, state)
    c_m = cost_monitoring(params)
    c_f = expected_freeride_cost(params, state) if perceived_cf is None else perceived_cf
    return PayoffBreakdown(
        b_g=b_g,
        c_c=c_c,
        b_m=b_m,
        c_m=c_m,
        c_f=c_f,
        u_d=b_g - c_f,
        u_c=b_g - c_c,
        u_cm=b_g - c_c + b_m - c_m,
    )


def payoff_vector(
    params: GameParams, state: PopulationState, perceived_cf: float
) -> tuple[float, float, float]:
    """Utilities ``(u_d, u_c, u_cm)``; perception enters only through the defector's term."""
    pb = payoff_breakdown(params, state, perceived_cf)
    return pb.u_d, pb.u_c, pb.u_cm


# Array versions. Counts may be real-valued; B_m uses the smooth extension
# for any nonzero n_mon (finite-difference Jacobians step across zero).


def benefit_group_array(params: GameParams, n_contrib, n_group) -> np.ndarray:
    return (1.0 - params.beta) * params.alpha * np.asarray(n_contrib, dtype=float) / n_group


def benefit_monitor_array(params: GameParams, n_contrib, n_mon) -> np.ndarray:
    n_contrib = np.asarray(n_contrib, dtype=float)
    n_mon = np.asarray(n_mon, dtype=float)
    nonzero = n_mon != 0
    safe = np.where(nonzero, n_mon, 1.0)
    return np.where(nonzero, params.alpha * params.beta * n_contrib / safe, 0.0)


def payoff_arrays(
    params: GameParams, n_contrib, n_mon, perceived_cf, n_group=None
) -> np.ndarray:
    """Stacked utilities with the strategy axis last: ``shape + (3,)``."""
    if n_group is None:
        n_group = params.n_group
    b_g = benefit_group_array(params, n_contrib, n_group)
    b_m = benefit_monitor_array(params, n_contrib, n_mon)
    c_c = params.alpha
    c_m = params.p_checks * params.delta
    u_d = b_g - np.asarray(perceived_cf, dtype=float)
    u_c = b_g - c_c
    u_cm = b_g - c_c + b_m - c_m
    u_d, u_c, u_cm = np.broadcast_arrays(u_d, u_c, u_cm)
    return np.stack([u_d, u_c, u_cm], axis=-1)
