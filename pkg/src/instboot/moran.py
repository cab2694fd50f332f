"""Finite-population pairwise-comparison (Moran) dynamics.

Each timestep one focal agent is drawn uniformly.  With probability ``mu``
it mutates to one of the two other strategies; otherwise it draws a model
among the remaining ``Z - 1`` agents and copies the model's strategy with
the Fermi probability ``1 / (1 + exp(-gamma * (f_model - f_focal)))``.

Under a noisy perception every fitness evaluation of a defector uses a
fresh draw of the perceived free-riding cost.  Rate computations average
the Fermi term over ``mc_samples`` such draws; the simulators draw once per
step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .game import GameParams, PopulationState, payoff_arrays, payoff_vector
from .perception import (
    IDENTITY,
    PerceptionSpec,
    derive_rng,
    is_stochastic,
    make_rng,
    perceive_freeride_cost,
    perceived_cost_array,
)
from .parallel import pmap
from .simplex import GradientField

N_STRATEGIES = 3
MAX_MATRIX_Z = 100

# ordered (focal, model) pairs in which a defector's payoff is involved
_D_PAIRS = ((0, 1), (0, 2), (1, 0), (2, 0))


class StationaryConvergenceError(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"power iteration did not converge: residual {residual:.3e} after {iterations} iterations"
        )
        self.residual = residual


@dataclass(frozen=True)
class MoranConfig:
    z_pop: int = 40
    gamma: float = 1.0
    mu: float = 1e-3
    mc_samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if self.z_pop < 2:
            raise ValueError("z_pop must be >= 2")

    @classmethod
    def from_params(cls, params: GameParams, mc_samples: int = 1000, seed: int = 0) -> "MoranConfig":
        return cls(params.z_pop, params.gamma, params.mu, mc_samples, seed)


@dataclass
class TransitionRates:
    """``rate[j, i]``: probability that one ``j``-agent becomes an ``i``-agent this step."""

    rate: np.ndarray

    def __getitem__(self, pair):
        return float(self.rate[pair])

    @property
    def outgoing(self) -> np.ndarray:
        return self.rate.sum(axis=-1)

    @property
    def stay(self) -> float:
        return 1.0 - float(self.rate.sum())


def fermi_probability(f_model, f_focal, gamma: float):
    """Probability that the focal agent imitates the model."""
    out = expit(gamma * (np.asarray(f_model, dtype=float) - np.asarray(f_focal, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def moran_params(params: GameParams, config: MoranConfig | None = None) -> GameParams:
    """Parameters as used inside the Moran payoffs: the group is the whole population."""
    z = params.z_pop if config is None else config.z_pop
    return params.replace(n_group=z, z_pop=z)


def count_states(z_pop: int) -> np.ndarray:
    """All ``(k_d, k_c, k_cm)`` with sum ``z_pop``, ``k_d`` outermost."""
    return np.array(
        [(i, j, z_pop - i - j) for i in range(z_pop + 1) for j in range(z_pop + 1 - i)], dtype=int
    )


def state_index(counts, z_pop: int):
    """Row of ``counts`` in :func:`count_states` (vectorised)."""
    counts = np.asarray(counts)
    i, j = counts[..., 0], counts[..., 1]
    return i * (z_pop + 1) - (i * (i - 1)) // 2 + j


def _true_cost(params, counts, z):
    catch = counts[..., 2] / z
    return params.p_checks * catch * params.s, catch


def fitness_vector(
    counts,
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    rng: np.random.Generator | None = None,
) -> tuple[float, float, float]:
    """Strategy fitnesses at integer counts, with ``n_group = z_pop``."""
    counts = np.asarray(counts)
    z = int(counts.sum())
    mp = params.replace(n_group=z, z_pop=max(z, 2))
    state = PopulationState(*(float(c) for c in counts))
    true_cf, catch = _true_cost(mp, counts.astype(float), z)
    cf = perceive_freeride_cost(float(true_cf), float(catch), mp, spec, rng)
    return payoff_vector(mp, state, cf)


def fermi_matrix(
    counts,
    params: GameParams,
    spec: PerceptionSpec,
    gamma: float,
    z_pop: int,
    uniforms=None,
) -> np.ndarray:
    """Mean Fermi imitation term ``F[..., j, i]`` for focal ``j`` and model ``i``.

    ``uniforms`` has shape ``(..., 4, n_samples)`` for stochastic specs:
    one independent bank of draws per ordered pair involving a defector.
    Counts may be real-valued.
    """
    counts = np.asarray(counts, dtype=float)
    mp = params.replace(n_group=z_pop, z_pop=z_pop)
    n_contrib = counts[..., 1] + counts[..., 2]
    n_mon = counts[..., 2]
    true_cf, catch = _true_cost(mp, counts, z_pop)
    with np.errstate(divide="ignore", invalid="ignore"):
        det_cf = perceived_cost_array(true_cf, catch, mp, spec) if not is_stochastic(spec) else true_cf
        f = payoff_arrays(mp, n_contrib, n_mon, det_cf, n_group=z_pop)
    fermi = expit(gamma * (f[..., None, :] - f[..., :, None]))
    if not is_stochastic(spec):
        return fermi
    if uniforms is None:
        raise ValueError("stochastic perception needs uniforms")
    # defector fitness samples: B_g - perceived C_f
    b_g = f[..., 0] + true_cf
    cf = perceived_cost_array(true_cf[..., None, None], catch[..., None, None], mp, spec,
                              uniforms=uniforms)
    f_d = b_g[..., None, None] - cf
    for p, (j, i) in enumerate(_D_PAIRS):
        f_other = f[..., i if j == 0 else j][..., None]
        diff = f_other - f_d[..., p, :] if j == 0 else f_d[..., p, :] - f_other
        fermi[..., j, i] = expit(gamma * diff).mean(axis=-1)
    return fermi


def rates_from_fermi(counts, fermi, z_pop: int, mu: float) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    k_j = counts[..., :, None]
    k_i = counts[..., None, :]
    # no mask on k_j > 0: the factor k_j already zeroes empty strategies, and
    # the unmasked polynomial is what finite differences at faces need
    rate = (k_j / z_pop) * ((1.0 - mu) * (k_i / (z_pop - 1)) * fermi + mu / (N_STRATEGIES - 1))
    eye = np.eye(N_STRATEGIES, dtype=bool)
    return np.where(eye, 0.0, rate)


def _draw_uniforms(spec, config, rng, shape=()):
    if not is_stochastic(spec):
        return None
    return rng.random(shape + (len(_D_PAIRS), config.mc_samples))


def _state_rng(config: MoranConfig, counts) -> np.random.Generator:
    return derive_rng(config.seed, int(state_index(np.asarray(counts), config.z_pop)))


def transition_rates(
    counts,
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    config: MoranConfig | None = None,
    rng: np.random.Generator | None = None,
) -> TransitionRates:
    """One-step switching probabilities at a count state.

    Without an explicit ``rng`` the noise draws come from a generator
    derived from ``config.seed`` and the state's lattice index.
    """
    config = config or MoranConfig.from_params(params)
    counts = np.asarray(counts)
    if is_stochastic(spec) and rng is None:
        rng = _state_rng(config, counts)
    u = _draw_uniforms(spec, config, rng)
    fermi = fermi_matrix(counts, params, spec, config.gamma, config.z_pop, u)
    return TransitionRates(rates_from_fermi(counts, fermi, config.z_pop, config.mu))


def gradient_from_rates(rate: np.ndarray) -> np.ndarray:
    """Expected one-step change in counts: inflow minus outflow per strategy."""
    return rate.sum(axis=-2) - rate.sum(axis=-1)


def selection_gradient(
    counts,
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    config: MoranConfig | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    return gradient_from_rates(transition_rates(counts, params, spec, config, rng).rate)


def _rates_for_states(states, params, spec, config) -> np.ndarray:
    """Rates at many integer states, each with its own derived noise stream."""
    if not is_stochastic(spec):
        fermi = fermi_matrix(states, params, spec, config.gamma, config.z_pop)
        return rates_from_fermi(states, fermi, config.z_pop, config.mu)
    idx = state_index(states, config.z_pop)
    u = np.stack([_draw_uniforms(spec, config, derive_rng(config.seed, int(k))) for k in idx])
    fermi = fermi_matrix(states, params, spec, config.gamma, config.z_pop, u)
    return rates_from_fermi(states, fermi, config.z_pop, config.mu)


def gradients_at(states, params, spec, config, chunk: int = 64, threads: int | None = None):
    """Selection gradients at integer states, evaluated in chunks (optionally threaded)."""
    states = np.asarray(states)
    if not len(states):
        return np.empty((0, 3))
    parts = pmap(
        lambda s: gradient_from_rates(_rates_for_states(states[s : s + chunk], params, spec, config)),
        range(0, len(states), chunk),
        threads,
    )
    return np.concatenate(parts)


def sub_lattice_counts(z_pop: int, resolution: int) -> np.ndarray:
    """Integer states nearest to the resolution-``r`` lattice (duplicates removed, order kept)."""
    r = resolution
    out, seen = [], set()
    for i in range(r + 1):
        for j in range(r + 1 - i):
            k_d = int(round(i * z_pop / r))
            k_c = int(round(j * z_pop / r))
            k_c = min(k_c, z_pop - k_d)
            key = (k_d, k_c)
            if key not in seen:
                seen.add(key)
                out.append((k_d, k_c, z_pop - k_d - k_c))
    return np.array(out, dtype=int)


def drift_field(
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    config: MoranConfig | None = None,
    resolution: int | None = None,
    threads: int | None = None,
) -> GradientField:
    """Selection gradient (per-step change in frequencies) over count states.

    With ``resolution=None`` every integer state is used, otherwise the
    states nearest to the resolution lattice.  Noise streams are derived
    per state from ``config.seed``, so the field does not depend on
    evaluation order.
    """
    config = config or MoranConfig.from_params(params)
    z = config.z_pop
    states = count_states(z) if resolution is None else sub_lattice_counts(z, resolution)
    grad = gradients_at(states, params, spec, config, threads=threads)
    n_samples = config.mc_samples if is_stochastic(spec) else 1
    m = len(states)
    return GradientField(
        resolution=z if resolution is None else resolution,
        points=states / z,
        vectors=grad / z,
        extra={"samples": np.full(m, n_samples), "seed": np.full(m, config.seed)},
    )


def expected_motion_flow(
    params: GameParams, spec: PerceptionSpec = IDENTITY, config: MoranConfig | None = None
):
    """Deterministic flow on frequencies: expected count change per step at ``x * Z``.

    Noisy specs are averaged over one fixed bank of ``mc_samples`` draws
    (common random numbers), which keeps the flow smooth in ``x``.
    """
    config = config or MoranConfig.from_params(params)
    z = config.z_pop
    bank = None
    if is_stochastic(spec):
        bank = derive_rng(config.seed, 2**31).random((len(_D_PAIRS), config.mc_samples))

    def flow(x):
        counts = np.asarray(x, dtype=float) * z
        fermi = fermi_matrix(counts, params, spec, config.gamma, z, bank)
        return gradient_from_rates(rates_from_fermi(counts, fermi, z, config.mu))

    return flow


# --- simulation ------------------------------------------------------------


def _sim_step(k: np.ndarray, u: np.ndarray, params: GameParams, spec, config: MoranConfig):
    """Advance integer states ``k`` (R, 3) in place using uniforms ``u`` (R, 6)."""
    z = config.z_pop
    rows = np.arange(len(k))
    cum = np.cumsum(k, axis=1)
    focal = np.argmax(np.floor(u[:, 0] * z)[:, None] < cum, axis=1)
    others = k.copy()
    others[rows, focal] -= 1
    model = np.argmax(np.floor(u[:, 1] * (z - 1))[:, None] < np.cumsum(others, axis=1), axis=1)

    mutate = u[:, 2] < config.mu
    target = np.where(mutate, (focal + 1 + (u[:, 3] * 2).astype(int)) % 3, model)

    imitate = ~mutate & (model != focal)
    if np.any(imitate):
        kk = k[imitate].astype(float)
        true_cf, catch = _true_cost(params, kk, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            cf = perceived_cost_array(true_cf, catch, params, spec, uniforms=u[imitate, 4])
            f = payoff_arrays(params, kk[:, 1] + kk[:, 2], kk[:, 2], cf, n_group=z)
        sub = np.arange(len(kk))
        p = expit(config.gamma * (f[sub, model[imitate]] - f[sub, focal[imitate]]))
        accept = np.zeros(len(k), dtype=bool)
        accept[imitate] = u[imitate, 5] < p
    else:
        accept = np.zeros(len(k), dtype=bool)
    move = mutate | accept
    move &= target != focal
    k[rows[move], focal[move]] -= 1
    k[rows[move], target[move]] += 1


def run_until(
    starts,
    params: GameParams,
    spec: PerceptionSpec,
    config: MoranConfig,
    max_steps: int,
    rng: np.random.Generator,
    stop=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate many independent chains in lockstep.

    Each chain stops as soon as ``stop(states) -> bool mask`` is true for it
    or after ``max_steps`` steps.  Returns final states and the number of
    steps each chain took.
    """
    mp = moran_params(params, config)
    k = np.array(starts, dtype=np.int64).reshape(-1, 3)
    if np.any(k.sum(axis=1) != config.z_pop) or np.any(k < 0):
        raise ValueError("start states must be non-negative and sum to z_pop")
    steps = np.zeros(len(k), dtype=np.int64)
    active = np.arange(len(k))
    if stop is not None:
        active = active[~stop(k)]
    for _ in range(max_steps):
        if not len(active):
            break
        sub = k[active]
        _sim_step(sub, rng.random((len(active), 6)), mp, spec, config)
        k[active] = sub
        steps[active] += 1
        if stop is not None:
            active = active[~stop(sub)]
    return k, steps


def simulate(
    counts0,
    params: GameParams,
    spec: PerceptionSpec = IDENTITY,
    config: MoranConfig | None = None,
    n_steps: int = 1000,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """One trajectory of ``n_steps`` steps; row 0 is ``counts0``."""
    config = config or MoranConfig.from_params(params)
    rng = rng if rng is not None else make_rng(config.seed)
    mp = moran_params(params, config)
    k = np.array(counts0, dtype=np.int64).reshape(1, 3)
    if k.sum() != config.z_pop or np.any(k < 0):
        raise ValueError("counts0 must be non-negative and sum to z_pop")
    path = np.empty((n_steps + 1, 3), dtype=np.int64)
    path[0] = k[0]
    block = 4096
    for start in range(0, n_steps, block):
        n = min(block, n_steps - start)
        u = rng.random((n, 6))
        for s in range(n):
            _sim_step(k, u[s : s + 1], mp, spec, config)
            path[start + s + 1] = k[0]
    return path


# --- exact chain -----------------------------------------------------------


def transition_matrix(
    params: GameParams, spec: PerceptionSpec = IDENTITY, config: MoranConfig | None = None
) -> np.ndarray:
    """Dense row-stochastic matrix over :func:`count_states` order."""
    config = config or MoranConfig.from_params(params)
    z = config.z_pop
    if z > MAX_MATRIX_Z:
        raise ValueError(f"z_pop={z} exceeds the dense-matrix limit {MAX_MATRIX_Z}")
    states = count_states(z)
    m = len(states)
    rates = np.concatenate(
        [_rates_for_states(states[s : s + 64], params, spec, config) for s in range(0, m, 64)]
    )
    P = np.zeros((m, m))
    rows = np.arange(m)
    for j in range(3):
        for i in range(3):
            if i == j:
                continue
            r = rates[:, j, i]
            ok = states[:, j] > 0
            dest = states[ok].copy()
            dest[:, j] -= 1
            dest[:, i] += 1
            P[rows[ok], state_index(dest, z)] += r[ok]
    P[rows, rows] = 1.0 - P.sum(axis=1)
    return P


def stationary_distribution(
    matrix: np.ndarray,
    tol: float = 1e-15,
    max_iter: int = 1_000_000,
    squarings: int | None = None,
) -> np.ndarray:
    """Left eigenvector for eigenvalue 1 by power iteration.

    The iteration runs on ``Q = P ** (2 ** squarings)`` while the residual
    is always measured as ``max |pi P - pi|`` against ``P`` itself.  By
    default (chains up to 1500 states) ``P`` is squared until the rows of
    ``Q`` agree, which handles the slow mixing caused by rare mutation.
    The distance to the true distribution is roughly the residual divided
    by the spectral gap, hence the tight default ``tol``.
    """
    P = np.asarray(matrix, dtype=float)
    m = P.shape[0]
    adaptive = squarings is None
    limit = (64 if m <= 1500 else 0) if adaptive else squarings
    Q = P
    for _ in range(limit):
        if adaptive and np.max(np.ptp(Q, axis=0)) < tol:
            break
        Q = Q @ Q
        Q /= Q.sum(axis=1, keepdims=True)
    pi = Q.mean(axis=0) if adaptive and limit else np.full(m, 1.0 / m)
    pi /= pi.sum()
    residual = np.inf
    for it in range(1, max_iter + 1):
        residual = float(np.max(np.abs(pi @ P - pi)))
        if residual < tol:
            pi = np.clip(pi, 0.0, None)
            return pi / pi.sum()
        nxt = pi @ Q
        pi = nxt / nxt.sum()
    raise StationaryConvergenceError(residual, max_iter)
