import math

import numpy as np
import pytest
from scipy import special

from gtrcell import montecarlo
from gtrcell.ase import LinkConfig, conditional_se
from gtrcell.errors import ConfigError, DomainError
from gtrcell.fading import GtrParams, Truncated, rayleigh
from gtrcell.interference import NetworkParams
from gtrcell.montecarlo import (
    AseEstimate,
    SimConfig,
    realize_network,
    simulate_ase,
    simulate_conditional_se,
)

LAM = 3e-6
NET = NetworkParams(LAM, 3.0, 4.0, 1e-11)
RAY = LinkConfig(rayleigh(1.0), rayleigh(1.0))
GTR = LinkConfig(GtrParams(5, 1.0, 1.0, Truncated(0.5)), GtrParams(5, 1.0, 1.0))


class TestRealizeNetwork:
    def test_count_and_radius(self):
        rng = np.random.default_rng(7)
        radius = 5000.0
        counts, r2 = [], []
        for _ in range(10_000):
            pts = realize_network(LAM, radius, rng)
            counts.append(len(pts))
            r2.extend((pts ** 2).sum(axis=1))
        mean = LAM * math.pi * radius ** 2
        assert mean == pytest.approx(235.62, abs=0.01)
        assert abs(np.mean(counts) - mean) < 3 * math.sqrt(mean / len(counts))
        # r² is uniform on [0, R²]
        se = radius ** 2 / math.sqrt(12 * len(r2))
        assert abs(np.mean(r2) - radius ** 2 / 2) < 4 * se
        assert np.max(r2) <= radius ** 2

    def test_shape(self):
        pts = realize_network(LAM, 1000.0, np.random.default_rng(0))
        assert pts.ndim == 2 and pts.shape[1] == 2

    def test_domain(self):
        with pytest.raises(DomainError):
            realize_network(LAM, 0.0, np.random.default_rng(0))


class TestSimConfig:
    @pytest.mark.parametrize("kw", [
        {"realizations": 0}, {"realizations": 2.5}, {"region_radius_factor": 4.0},
        {"seed": -1}, {"hybrid_nearest": -1},
    ])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SimConfig(**kw)

    def test_radius(self):
        assert SimConfig(region_radius_factor=10).radius(LAM) == pytest.approx(10 / math.sqrt(math.pi * LAM))


class TestSimulateAse:
    def test_zero_power(self):
        est = simulate_ase(SimConfig(realizations=2000), NetworkParams(LAM, 0.0, 4.0, 1e-11), RAY)
        assert est.mean == 0.0 and est.std_err == 0.0

    def test_estimate_record(self):
        est = simulate_ase(SimConfig(realizations=1000, seed=3), NET, RAY)
        assert isinstance(est, AseEstimate)
        assert est.n == 1000 and est.discards == 0
        assert est.std_err > 0

    def test_reproducible(self):
        sim = SimConfig(realizations=3000, seed=11)
        a = simulate_ase(sim, NET, GTR)
        assert simulate_ase(sim, NET, GTR) == a
        assert simulate_ase(sim, NET, GTR, threads=3) == a

    def test_seed_matters(self):
        a = simulate_ase(SimConfig(realizations=2000, seed=1), NET, RAY)
        b = simulate_ase(SimConfig(realizations=2000, seed=2), NET, RAY)
        assert a.mean != b.mean

    def test_region_invariant(self):
        small = simulate_ase(SimConfig(realizations=20_000, region_radius_factor=10, seed=5), NET, RAY)
        large = simulate_ase(SimConfig(realizations=20_000, region_radius_factor=20, seed=5), NET, RAY)
        assert abs(small.mean - large.mean) < large.std_err

    def test_hybrid_close_to_full(self):
        sim = SimConfig(realizations=20_000, seed=9)
        full = simulate_ase(sim, NET, GTR)
        hyb = simulate_ase(SimConfig(realizations=20_000, seed=9, hybrid_nearest=5), NET, GTR)
        assert abs(full.mean - hyb.mean) < 2 * full.std_err

    def test_zero_noise_rejected(self):
        with pytest.raises(DomainError):
            simulate_ase(SimConfig(realizations=10), NetworkParams(LAM, 3.0, 4.0, 0.0), RAY)

    def test_discard_limit(self, monkeypatch):
        monkeypatch.setattr(montecarlo, "MAX_DISCARD_FRACTION", -1.0)
        with pytest.raises(ConfigError):
            simulate_ase(SimConfig(realizations=100), NET, RAY)


class TestConditional:
    @pytest.mark.parametrize("mu", [1.0, 10.0])
    def test_noise_limited(self, mu):
        net = NetworkParams(1e-16, 3.0, 4.0, 1e-11)
        r0 = (2.0 * net.power / (mu * net.noise)) ** 0.25
        est = simulate_conditional_se(SimConfig(realizations=20_000, seed=4), net, RAY, r0)
        ref = math.exp(1 / mu) * special.exp1(1 / mu)
        assert abs(est.mean - ref) < 3 * est.std_err

    @pytest.mark.parametrize("link", [RAY, GTR], ids=["rayleigh", "gtr_t"])
    def test_matches_numeric(self, link):
        r0 = 288.675
        est = simulate_conditional_se(SimConfig(realizations=20_000, region_radius_factor=30, seed=8),
                                      NET, link, r0)
        assert abs(est.mean - conditional_se(NET, link, r0)) < 2 * est.std_err

    def test_r0_range(self):
        with pytest.raises(DomainError):
            simulate_conditional_se(SimConfig(realizations=10), NET, RAY, 0.0)
        with pytest.raises(DomainError):
            simulate_conditional_se(SimConfig(realizations=10), NET, RAY, 1e9)
