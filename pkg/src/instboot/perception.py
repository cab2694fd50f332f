"""Distorted perception of the expected cost of free-riding.

A :class:`PerceptionSpec` says how a defector estimates ``C_f``.  The
deterministic kinds (identity, coarse bias, Prelec weighting) are plain
functions of the true cost; the two noise kinds draw a fresh random
distortion for every evaluation.

Every random draw goes through a single uniform variate that is mapped by
inverse transform (:func:`noise_from_uniform`), so batch simulators can
pre-draw blocks of uniforms and stay reproducible from one seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np

from .game import GameParams, ParameterError

PER_CHECK = "per_check"
TOTAL = "total"
TWO_SIDED = "two_sided"
LOG_UNIFORM = "log_uniform"


@dataclass(frozen=True)
class Identity:
    kind = "identity"


@dataclass(frozen=True)
class CoarseBias:
    factor: float
    kind = "coarse"

    def __post_init__(self):
        if not self.factor > 0:
            raise ParameterError(f"coarse bias factor must be > 0, got {self.factor}", "factor")


@dataclass(frozen=True)
class Prelec:
    zeta: float = 1.0
    lam: float = 1.0
    target: str = PER_CHECK
    kind = "prelec"

    def __post_init__(self):
        if not self.zeta > 0:
            raise ParameterError(f"Prelec zeta must be > 0, got {self.zeta}", "zeta")
        if not self.lam > 0:
            raise ParameterError(f"Prelec lambda must be > 0, got {self.lam}", "lambda")
        if self.target not in (PER_CHECK, TOTAL):
            raise ParameterError(f"unknown Prelec target {self.target!r}", "target")


@dataclass(frozen=True)
class ProportionalNoise:
    lo: float
    hi: float
    scheme: str = TWO_SIDED
    kind = "propnoise"

    def __post_init__(self):
        if not (0 < self.lo <= 1 <= self.hi) or not math.isfinite(self.hi):
            raise ParameterError(
                f"proportional noise needs 0 < lo <= 1 <= hi, got [{self.lo}, {self.hi}]", "lo"
            )
        if self.scheme not in (TWO_SIDED, LOG_UNIFORM):
            raise ParameterError(f"unknown noise scheme {self.scheme!r}", "scheme")


@dataclass(frozen=True)
class AbsoluteNoise:
    width: float
    clamp: bool = False
    kind = "absnoise"

    def __post_init__(self):
        if not (self.width >= 0) or not math.isfinite(self.width):
            raise ParameterError(f"absolute noise width must be >= 0, got {self.width}", "width")


PerceptionSpec = Union[Identity, CoarseBias, Prelec, ProportionalNoise, AbsoluteNoise]

IDENTITY = Identity()


def make_rng(seed: int | None) -> np.random.Generator:
    """Seeded PCG64 generator; same seed gives the same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for a sub-task, keyed by e.g. a lattice index."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def is_stochastic(spec: PerceptionSpec) -> bool:
    if isinstance(spec, ProportionalNoise):
        return spec.lo < spec.hi
    if isinstance(spec, AbsoluteNoise):
        return spec.width > 0
    return False


def prelec_weight(q, zeta: float, lam: float):
    """Prelec probability weighting ``exp(-zeta * (-ln q) ** lam)``.

    Accepts scalars or arrays.  ``q = 0`` maps to 0 (the continuous limit).
    With ``lam == 1`` the weight reduces to ``q ** zeta``, which is evaluated
    directly so that ``zeta = lam = 1`` returns ``q`` bit for bit.
    """
    arr = np.asarray(q, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise ParameterError("Prelec weight needs probabilities in [0, 1]", "q")
    if lam == 1.0:
        out = arr**zeta
    else:
        with np.errstate(divide="ignore"):
            neg_log = -np.log(arr)
        out = np.exp(-zeta * neg_log**lam)
    if np.ndim(q) == 0:
        return float(out)
    return out


def noise_from_uniform(spec: PerceptionSpec, u):
    """Map uniforms on [0, 1) to the spec's noise variable.

    For proportional noise this is the multiplier, for absolute noise the
    additive offset.  The two-sided scheme puts half the mass uniformly on
    ``[lo, 1]`` and half on ``[1, hi]``.
    """
    u = np.asarray(u, dtype=float)
    if isinstance(spec, ProportionalNoise):
        if spec.scheme == LOG_UNIFORM:
            a, b = math.log(spec.lo), math.log(spec.hi)
            return np.exp(a + (b - a) * u)
        below = spec.lo + (1.0 - spec.lo) * (2.0 * u)
        above = 1.0 + (spec.hi - 1.0) * (2.0 * u - 1.0)
        return np.where(u < 0.5, below, above)
    if isinstance(spec, AbsoluteNoise):
        return spec.width * (2.0 * u - 1.0)
    raise TypeError(f"{type(spec).__name__} has no noise variable")


def sample_proportional_multiplier(
    lo: float, hi: float, rng: np.random.Generator, size=None, scheme: str = TWO_SIDED
):
    spec = ProportionalNoise(lo, hi, scheme)
    out = noise_from_uniform(spec, rng.random(size))
    return float(out) if size is None else out


def sample_absolute_offset(width: float, rng: np.random.Generator, size=None):
    spec = AbsoluteNoise(width)
    out = noise_from_uniform(spec, rng.random(size))
    return float(out) if size is None else out


def perceived_cost_array(
    true_cf,
    catch_prob,
    params: GameParams,
    spec: PerceptionSpec,
    rng: np.random.Generator | None = None,
    uniforms=None,
) -> np.ndarray:
    """Vectorised perceived ``C_f``.

    For stochastic specs one independent draw is made per element, either
    from ``uniforms`` (already drawn, broadcastable to the output) or from
    ``rng``.
    """
    true_cf = np.asarray(true_cf, dtype=float)
    if isinstance(spec, Identity):
        return true_cf
    if isinstance(spec, CoarseBias):
        return spec.factor * true_cf
    if isinstance(spec, Prelec):
        if spec.target == PER_CHECK:
            q = np.clip(np.asarray(catch_prob, dtype=float), 0.0, 1.0)
            return params.p_checks * prelec_weight(q, spec.zeta, spec.lam) * params.s
        q = np.clip(params.p_checks * np.asarray(catch_prob, dtype=float), 0.0, 1.0)
        return prelec_weight(q, spec.zeta, spec.lam) * params.s
    if not is_stochastic(spec):
        return true_cf
    if uniforms is None:
        if rng is None:
            raise ValueError("a stochastic perception spec needs an rng")
        uniforms = rng.random(true_cf.shape)
    noise = noise_from_uniform(spec, uniforms)
    if isinstance(spec, ProportionalNoise):
        return noise * true_cf
    out = true_cf + noise
    if spec.clamp:
        out = np.maximum(out, 0.0)
    return out


def perceive_freeride_cost(
    true_cf: float,
    catch_prob: float,
    params: GameParams,
    spec: PerceptionSpec,
    rng: np.random.Generator | None = None,
) -> float:
    if true_cf < 0:
        raise ParameterError("true free-riding cost must be >= 0", "true_cf")
    if not 0.0 <= catch_prob <= 1.0:
        raise ParameterError("catch probability must lie in [0, 1]", "catch_prob")
    return float(perceived_cost_array(true_cf, catch_prob, params, spec, rng))


# --- serialisation ---------------------------------------------------------

_KINDS = {
    "identity": Identity,
    "coarse": CoarseBias,
    "prelec": Prelec,
    "propnoise": ProportionalNoise,
    "absnoise": AbsoluteNoise,
}


def spec_to_dict(spec: PerceptionSpec) -> dict:
    data = {"kind": spec.kind}
    fields = asdict(spec)
    if isinstance(spec, Prelec):
        fields["lambda"] = fields.pop("lam")
    data.update(fields)
    return data


def spec_from_dict(data: dict) -> PerceptionSpec:
    if not isinstance(data, dict) or "kind" not in data:
        raise ParameterError("perception spec must be an object with a 'kind' key", "kind")
    data = dict(data)
    kind = data.pop("kind")
    if kind not in _KINDS:
        raise ParameterError(f"unknown perception kind {kind!r}", "kind")
    if kind == "prelec" and "lambda" in data:
        data["lam"] = data.pop("lambda")
    try:
        return _KINDS[kind](**data)
    except TypeError as exc:
        raise ParameterError(f"bad fields for perception {kind!r}: {exc}", kind) from exc


def parse_perception(text: str) -> PerceptionSpec:
    """Parse CLI shorthand such as ``coarse:1.5``, ``prelec:1.0:0.8`` or ``absnoise:8``.

    Prelec accepts an optional third field ``per_check`` or ``total``;
    proportional noise accepts an optional ``log_uniform`` scheme.
    """
    parts = text.strip().split(":")
    kind, args = parts[0].lower(), parts[1:]

    def nums(n_min, n_max):
        if not n_min <= len(args) <= n_max:
            raise ParameterError(f"bad perception shorthand {text!r}", kind)
        try:
            return [float(a) for a in args[:n_max]]
        except ValueError:
            raise ParameterError(f"bad number in perception shorthand {text!r}", kind) from None

    if kind == "identity" and not args:
        return IDENTITY
    if kind == "coarse":
        return CoarseBias(*nums(1, 1))
    if kind == "prelec":
        target = PER_CHECK
        if len(args) == 3:
            target = args.pop()
        zeta, lam = nums(2, 2)
        return Prelec(zeta, lam, target)
    if kind == "propnoise":
        scheme = TWO_SIDED
        if len(args) == 3:
            scheme = args.pop()
        lo, hi = nums(2, 2)
        return ProportionalNoise(lo, hi, scheme)
    if kind == "absnoise":
        return AbsoluteNoise(*nums(1, 1))
    raise ParameterError(f"unknown perception shorthand {text!r}", "perception")


def format_perception(spec: PerceptionSpec) -> str:
    """Inverse of :func:`parse_perception` (non-default options included)."""
    if isinstance(spec, Identity):
        return "identity"
    if isinstance(spec, CoarseBias):
        return f"coarse:{spec.factor:g}"
    if isinstance(spec, Prelec):
        tail = "" if spec.target == PER_CHECK else f":{spec.target}"
        return f"prelec:{spec.zeta:g}:{spec.lam:g}{tail}"
    if isinstance(spec, ProportionalNoise):
        tail = "" if spec.scheme == TWO_SIDED else f":{spec.scheme}"
        return f"propnoise:{spec.lo:g}:{spec.hi:g}{tail}"
    return f"absnoise:{spec.width:g}"
