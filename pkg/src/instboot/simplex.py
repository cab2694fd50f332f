"""Geometry and numerics on the 3-strategy simplex.

A *flow* here is any callable mapping an array of frequency vectors with
shape ``(..., 3)`` to drift vectors of the same shape whose components sum
to zero.  The replicator equation and the Moran expected motion are both
flows, so lattice evaluation, integration, fixed-point search and basin
labelling are written once against that interface.

Points are ordered ``(x_d, x_c, x_cm)``.  Local analysis uses the tangent
coordinates ``(x_c, x_cm)``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)

Flow = Callable[[np.ndarray], np.ndarray]

SUM_TOL = 1e-12
DEDUP_TOL = 1e-6
FD_STEP = 1e-6


class IntegrationError(RuntimeError):
    pass


def as_frequency(x) -> np.ndarray:
    """Validate a frequency vector: three entries in [0, 1] summing to 1."""
    arr = np.asarray(x, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"frequency vector must have 3 components, got shape {arr.shape}")
    if np.any(arr < 0) or np.any(arr > 1) or abs(arr.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"not a point of the simplex: {arr.tolist()}")
    return arr


def project(x: np.ndarray) -> np.ndarray:
    """Clip negatives at 0 and renormalise each row to sum 1."""
    x = np.clip(x, 0.0, None)
    return x / x.sum(axis=-1, keepdims=True)


def lattice(resolution: int) -> np.ndarray:
    """Points ``(i, j, r - i - j) / r`` with ``i + j <= r``, ``i`` outermost."""
    r = int(resolution)
    if r < 1:
        raise ValueError("resolution must be >= 1")
    idx = [(i, j, r - i - j) for i in range(r + 1) for j in range(r + 1 - i)]
    return np.array(idx, dtype=float) / r


def cell_centroids(resolution: int) -> np.ndarray:
    """Centroids of the ``r**2`` congruent sub-triangles of the lattice.

    Every cell has the same area, so label counts over these points are
    area fractions.  All centroids lie strictly inside the simplex.
    """
    r = int(resolution)
    pts = []
    for i in range(r):
        for j in range(r - i):
            # upward cell with corners (i,j), (i+1,j), (i,j+1)
            pts.append((3 * i + 1, 3 * j + 1))
            if i + j <= r - 2:
                # downward cell with corners (i+1,j), (i,j+1), (i+1,j+1)
                pts.append((3 * i + 2, 3 * j + 2))
    a = np.array(pts, dtype=float) / (3 * r)
    return np.column_stack([a[:, 0], a[:, 1], 1.0 - a[:, 0] - a[:, 1]])


def from_tangent(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.stack([1.0 - y[..., 0] - y[..., 1], y[..., 0], y[..., 1]], axis=-1)


def rk4_step(flow: Flow, x: np.ndarray, h: float) -> np.ndarray:
    k1 = flow(x)
    k2 = flow(x + 0.5 * h * k1)
    k3 = flow(x + 0.5 * h * k2)
    k4 = flow(x + h * k3)
    return project(x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def integrate(flow: Flow, x0, step: float, n_steps: int) -> np.ndarray:
    """Classical RK4 path of ``n_steps`` steps, including ``x0`` as row 0."""
    if step <= 0:
        raise ValueError("step must be > 0")
    path = np.empty((n_steps + 1, 3))
    x = as_frequency(x0)
    path[0] = x
    for n in range(1, n_steps + 1):
        x = rk4_step(flow, x, step)
        if not np.all(np.isfinite(x)):
            raise IntegrationError(f"non-finite state after {n} steps")
        path[n] = x
    return path


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    SADDLE = "saddle"
    NONHYPERBOLIC = "nonhyperbolic"


@dataclass
class FixedPoint:
    location: np.ndarray
    eigenvalues: np.ndarray
    stability: Stability

    def to_dict(self) -> dict:
        return {
            "location": [float(v) for v in self.location],
            "eigenvalues": [[float(e.real), float(e.imag)] for e in self.eigenvalues],
            "stability": self.stability.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FixedPoint":
        return cls(
            location=np.array(data["location"], dtype=float),
            eigenvalues=np.array([complex(re, im) for re, im in data["eigenvalues"]]),
            stability=Stability(data["stability"]),
        )


@dataclass
class FixedPointSearch:
    points: list[FixedPoint]
    nonconvergent: list[np.ndarray] = field(default_factory=list)


@dataclass
class GradientField:
    """Drift vectors on a set of simplex points.

    ``extra`` holds additional per-row CSV columns (e.g. Monte-Carlo
    sample counts and seeds for Moran fields).
    """

    resolution: int
    points: np.ndarray
    vectors: np.ndarray
    extra: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)


def tangent_jacobian(flow: Flow, x, h: float = FD_STEP) -> np.ndarray:
    """2x2 Jacobian of ``(dx_c, dx_cm)`` with respect to ``(x_c, x_cm)``.

    Central differences, switching to a one-sided difference when the
    backward step would make ``x_c`` or ``x_cm`` negative.
    """
    y = np.asarray(x, dtype=float)[1:]
    jac = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        if y[k] - h < 0:
            lo, hi, span = y, y + e, h
        else:
            lo, hi, span = y - e, y + e, 2 * h
        f_hi = flow(from_tangent(hi))[1:]
        f_lo = flow(from_tangent(lo))[1:]
        jac[:, k] = (f_hi - f_lo) / span
    return jac


def classify_eigenvalues(eigs, tol: float = 1e-8) -> Stability:
    re = np.real(eigs)
    if np.any(np.abs(re) < tol):
        return Stability.NONHYPERBOLIC
    if np.all(re < 0):
        return Stability.STABLE
    if np.all(re > 0):
        return Stability.UNSTABLE
    return Stability.SADDLE


def analyse_point(flow: Flow, x, tol: float = 1e-8) -> FixedPoint:
    x = np.asarray(x, dtype=float)
    eigs = np.linalg.eigvals(tangent_jacobian(flow, x))
    eigs = np.array(sorted(eigs, key=lambda z: (z.real, z.imag)))
    return FixedPoint(location=x, eigenvalues=eigs, stability=classify_eigenvalues(eigs, tol))


VERTICES = np.eye(3)

# (start vertex, end vertex) for each edge; points are (1 - t) * a + t * b
EDGES = ((0, 1), (0, 2), (1, 2))


def _edge_point(edge, t):
    a, b = EDGES[edge]
    return (1.0 - t) * VERTICES[a] + t * VERTICES[b]


def _edge_roots(flow: Flow, edge: int, n_grid: int, residual_tol: float) -> list[np.ndarray]:
    a, b = EDGES[edge]
    ts = np.linspace(0.0, 1.0, n_grid + 1)[1:-1]
    pts = _edge_point(edge, ts[:, None])
    g = flow(pts)[:, b]
    roots = [pts[i] for i in np.flatnonzero(g == 0.0)]

    def scalar(t):
        return float(flow(_edge_point(edge, t)[None, :])[0, b])

    for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
        t = brentq(scalar, ts[i], ts[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)
        x = _edge_point(edge, t)
        # sign changes across a discontinuity are not roots
        if np.max(np.abs(flow(x[None, :])[0])) < residual_tol:
            roots.append(x)
    return roots


def _newton(flow: Flow, x0, max_iter: int, residual_tol: float):
    def resid(y):
        return flow(from_tangent(y))[1:]

    y = np.asarray(x0, dtype=float)[1:].copy()
    f = resid(y)
    for _ in range(max_iter):
        norm = np.max(np.abs(f))
        if norm < residual_tol:
            return from_tangent(y)
        jac = tangent_jacobian(flow, from_tangent(y))
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        while t > 1e-6:
            cand = y + t * step
            x = from_tangent(cand)
            if np.all(x > 0):
                fc = resid(cand)
                if np.max(np.abs(fc)) < norm:
                    y, f = cand, fc
                    break
            t *= 0.5
        else:
            return None
    return from_tangent(y) if np.max(np.abs(f)) < residual_tol else None


def search_fixed_points(
    flow: Flow,
    seed_resolution: int = 10,
    tol: float = 1e-8,
    residual_tol: float = 1e-10,
    edge_grid: int = 2000,
    max_iter: int = 100,
) -> FixedPointSearch:
    """Multi-start search for rest points of ``flow``.

    Interior points come from damped Newton runs seeded at the interior
    lattice points and the centroid; boundary points from root bracketing
    of the along-edge drift on each invariant edge.  The three vertices are
    included whenever they are rest points, which they always are for the
    replicator equation.  Seeds whose Newton run fails are returned in
    ``nonconvergent``.
    """
    # vertices are rest points of the replicator flow but not under mutation
    vert_drift = np.max(np.abs(flow(VERTICES)), axis=1)
    found = [VERTICES[i] for i in range(3) if vert_drift[i] < residual_tol]
    for edge in range(3):
        found.extend(_edge_roots(flow, edge, edge_grid, residual_tol))

    seeds = [p for p in lattice(seed_resolution) if np.all(p > 0)]
    seeds.append(np.full(3, 1.0 / 3.0))
    # mutation pushes vertex attractors slightly inside, closer than the lattice resolves
    for eps in (1e-3, 1e-2):
        seeds.extend(project(v * (1 - 3 * eps) + eps) for v in VERTICES)
    failed = []
    for seed in seeds:
        root = _newton(flow, seed, max_iter, residual_tol)
        if root is None:
            failed.append(seed)
        else:
            found.append(root)

    unique: list[np.ndarray] = []
    for x in found:
        if all(np.max(np.abs(x - u)) > DEDUP_TOL for u in unique):
            unique.append(x)
    unique.sort(key=lambda p: (-p[0], -p[1]))
    if failed:
        log.info("%d of %d Newton seeds did not converge", len(failed), len(seeds))
    return FixedPointSearch([analyse_point(flow, x, tol) for x in unique], failed)


def follow_flow(
    flow: Flow,
    starts: np.ndarray,
    targets: np.ndarray,
    step: float = 0.05,
    max_steps: int = 20000,
    capture: float = 1e-4,
    stall: float = 1e-15,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate many starting points until each comes within ``capture`` of a target.

    Returns ``(target_index, endpoint)``; ``target_index`` is -1 where the
    step budget ran out first or the point stopped moving (``stall``)
    away from every target.
    """
    x = np.array(starts, dtype=float)
    hit = np.full(len(x), -1)
    active = np.arange(len(x))
    targets = np.asarray(targets, dtype=float).reshape(-1, 3)

    def check():
        nonlocal active
        if len(targets):
            d = np.max(np.abs(x[active, None, :] - targets[None, :, :]), axis=-1)
            close = d < capture
            done = close.any(axis=1)
            hit[active[done]] = np.argmax(close[done], axis=1)
            active = active[~done]

    check()
    for _ in range(max_steps):
        if not len(active):
            break
        nxt = rk4_step(flow, x[active], step)
        moving = np.max(np.abs(nxt - x[active]), axis=1) >= stall
        x[active] = nxt
        active = active[moving]
        check()
    return hit, x
