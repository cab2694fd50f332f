"""Independent reference implementations used only by the tests.

Written from the model definitions with plain Python loops, ``fractions``
and ``mpmath`` so they share no code with the package.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np


def utilities(n_d, n_c, n_cm, alpha=1.0, beta=0.2, delta=0.1, p=5, s=1.0, n=None, cf=None):
    """Scalar ``(u_d, u_c, u_cm)`` for counts of pure contributors ``n_c`` and monitors ``n_cm``."""
    n = n_d + n_c + n_cm if n is None else n
    contrib = n_c + n_cm
    b_g = (1 - beta) * alpha * contrib / n
    b_m = alpha * beta * contrib / n_cm if n_cm else 0.0
    if cf is None:
        cf = p * (n_cm / n) * s
    return b_g - cf, b_g - alpha, b_g - alpha + b_m - p * delta


def exact_utilities(n_d, n_c, n_cm, alpha=1, beta=Fraction(1, 5), delta=Fraction(1, 10), p=5, s=1):
    n = n_d + n_c + n_cm
    return utilities(Fraction(n_d), Fraction(n_c), Fraction(n_cm), Fraction(alpha), beta, delta, p, s, Fraction(n))


def prelec(q, zeta, lam):
    q = mpmath.mpf(q)
    if q == 0:
        return mpmath.mpf(0)
    return mpmath.e ** (-zeta * (-mpmath.log(q)) ** lam)


def prelec_threshold(zeta, lam, alpha=1.0, beta=0.2, delta=0.1, p=5, s=1.0):
    """Root of ``U_CM - U_D`` on the D-CM edge with per-check Prelec weighting (mpmath)."""
    mpmath.mp.dps = 30

    def gap(m):
        # on the edge every contributor monitors, so B_m = alpha * beta
        u_cm = -alpha + alpha * beta - p * delta
        u_d = -p * prelec(m, zeta, lam) * s
        return (u_cm + (1 - beta) * alpha * m) - ((1 - beta) * alpha * m + u_d)

    # gap is increasing in m; bracket by scanning
    grid = [mpmath.mpf(k) / 1000 for k in range(1, 1000)]
    for a, b in zip(grid, grid[1:]):
        if gap(a) < 0 <= gap(b):
            return float(mpmath.findroot(gap, (a, b), solver="anderson"))
    raise ValueError("no sign change")


def fermi(a_model, a_focal, gamma):
    return 1.0 / (1.0 + math.exp(-gamma * (a_model - a_focal)))


def moran_rates(k, gamma=1.0, mu=0.0, **game):
    """Loop implementation of ``rate[j][i]`` at counts ``k`` (identity perception)."""
    z = sum(k)
    u = utilities(*k, n=z, **game)
    rate = [[0.0] * 3 for _ in range(3)]
    for j in range(3):
        for i in range(3):
            if i == j or k[j] == 0:
                continue
            imit = k[i] / (z - 1) * fermi(u[i], u[j], gamma)
            rate[j][i] = k[j] / z * ((1 - mu) * imit + mu / 2)
    return rate


def moran_matrix(z, gamma=1.0, mu=1e-3, **game):
    states = [(i, j, z - i - j) for i in range(z + 1) for j in range(z + 1 - i)]
    index = {s: n for n, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for a, s in enumerate(states):
        r = moran_rates(s, gamma, mu, **game)
        for j in range(3):
            for i in range(3):
                if r[j][i]:
                    t = list(s)
                    t[j] -= 1
                    t[i] += 1
                    P[a, index[tuple(t)]] += r[j][i]
        P[a, a] = 1.0 - P[a].sum()
    return states, P


def stationary_eig(P):
    """Dense eigen-solve: left eigenvector of the eigenvalue closest to 1."""
    w, v = np.linalg.eig(P.T)
    k = int(np.argmin(np.abs(w - 1.0)))
    pi = np.real(v[:, k])
    return pi / pi.sum()


def escape_probability(P, states, z, start_mask):
    """Mean probability, over uniformly chosen start states, of reaching ``k_d / z < 0.1``
    before absorption in a homogeneous state (``mu = 0`` chain, unbounded horizon)."""
    states = np.asarray(states)
    target = states[:, 0] / z < 0.1
    absorbing = states.max(axis=1) == z
    done = target | absorbing
    free = ~done
    # h = P_ff h + P_ft 1
    A = np.eye(free.sum()) - P[np.ix_(free, free)]
    b = P[np.ix_(free, target)].sum(axis=1)
    h = np.zeros(len(states))
    h[free] = np.linalg.solve(A, b)
    h[target] = 1.0
    return float(h[start_mask].mean())
