import numpy as np
import pytest

import oracles
from instboot.analysis import (
    ANALYTIC,
    COOPERATIVE,
    DEFECTION,
    SIMULATED,
    basin_escape_rate,
    basin_map,
    edge_payoff_gap,
    edge_threshold,
    threshold_sweep,
)
from instboot.moran import MoranConfig, count_states, transition_matrix
from instboot.perception import AbsoluteNoise, CoarseBias, Prelec, ProportionalNoise


def test_edge_gap_identity_is_linear(fav):
    m = np.linspace(0.01, 1, 50)
    assert np.allclose(edge_payoff_gap(m, fav), 5 * m - 1.3, atol=1e-13)


@pytest.mark.parametrize("b", [0.75, 1.0, 1.5, 2.0])
def test_coarse_threshold(fav, b):
    rep = edge_threshold(fav, CoarseBias(b))
    assert rep.method == ANALYTIC
    assert rep.m_star == pytest.approx(0.26 / b, abs=1e-9)


@pytest.mark.parametrize("lam", [0.6, 0.8, 1.2, 1.5])
def test_prelec_threshold_against_mpmath(fav, lam):
    assert edge_threshold(fav, Prelec(1.0, lam)).m_star == pytest.approx(
        oracles.prelec_threshold(1.0, lam), abs=1e-9
    )


def test_no_interior_threshold(fav):
    # monitoring so costly that defectors win on the whole edge
    rep = edge_threshold(fav.replace(delta=2.0))
    assert rep.m_star is None and not rep.interior
    assert edge_threshold(fav, CoarseBias(100.0)).m_star == pytest.approx(0.0026)


def test_analytic_rejects_noise(fav):
    with pytest.raises(ValueError):
        edge_threshold(fav, AbsoluteNoise(8.0), method="analytic")


def test_simulated_identity_close_to_analytic(fav):
    cfg = MoranConfig(40, 1.0, 0.0)
    rep = edge_threshold(fav, CoarseBias(1.0), method=SIMULATED, config=cfg)
    assert rep.m_star == pytest.approx(0.26, abs=0.01)


def test_sweep_keeps_order_and_errors(fav):
    cfg = MoranConfig(40, 1.0, 0.0, mc_samples=500)
    specs = [CoarseBias(1.0), ProportionalNoise(0.25, 4.0), AbsoluteNoise(8.0)]
    reps = threshold_sweep(fav, specs, cfg, threads=3)
    assert [r.spec for r in reps] == specs
    assert reps[0].method == ANALYTIC and reps[1].method == SIMULATED
    bad = threshold_sweep(fav, [ProportionalNoise(0.25, 4.0)], cfg, method="analytic")
    assert bad[0].error and bad[0].m_star is None


def test_basins_small_grid(fav, unfav):
    rep = basin_map(fav, resolution=20)
    assert len(rep.labels) == 400
    assert sum(rep.fractions.values()) == pytest.approx(1.0)
    assert 0.6 < rep.fractions[COOPERATIVE] < 0.9
    assert basin_map(unfav, resolution=20).fractions[DEFECTION] == 1.0


def test_moran_expected_motion_basins_agree(fav):
    rep = basin_map(fav, resolution=20)
    for gamma in (1.0, 10.0):
        cfg = MoranConfig(40, gamma, 0.0)
        mor = basin_map(fav, resolution=20, dynamics="moran", config=cfg)
        assert np.mean(mor.labels == rep.labels) > 0.95


def test_basin_summary_is_plain(fav):
    s = basin_map(fav, resolution=5).summary()
    assert s["dynamics"] == "replicator" and s["resolution"] == 5


def test_escape_rate_tracks_exact_chain(fav):
    cfg = MoranConfig(40, 1.0, 0.0, mc_samples=1000, seed=0)
    states = count_states(40)
    mask = states[:, 0] / 40 > 0.9
    spec = AbsoluteNoise(16.0)
    exact = oracles.escape_probability(transition_matrix(fav, spec, cfg), states, 40, mask)
    rate = basin_escape_rate(fav, spec, cfg, n_runs=2000)
    sd = np.sqrt(exact * (1 - exact) / 2000)
    assert abs(rate - exact) < 4 * sd


def test_exact_escape_ordering(fav):
    # the exact absorbing-chain escape probabilities, free of sampling error
    cfg = MoranConfig(40, 1.0, 0.0, mc_samples=2000, seed=0)
    states, ident = oracles.moran_matrix(40, 1.0, 0.0)
    states = np.array(states)
    mask = states[:, 0] / 40 > 0.9
    q0 = oracles.escape_probability(ident, states, 40, mask)
    q8 = oracles.escape_probability(transition_matrix(fav, AbsoluteNoise(8.0), cfg), states, 40, mask)
    q16 = oracles.escape_probability(transition_matrix(fav, AbsoluteNoise(16.0), cfg), states, 40, mask)
    assert q16 > q8 > q0 > 0
    assert q0 == pytest.approx(8.66e-4, rel=0.01)


def test_escape_region_must_be_nonempty(fav):
    with pytest.raises(ValueError):
        basin_escape_rate(fav, start_region=lambda s, z: s[:, 0] > z)
