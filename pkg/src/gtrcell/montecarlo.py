"""System-level Monte-Carlo estimates of the downlink spectral efficiency.

Each realization drops a PPP of base stations on a disk around the user
at the origin, serves the user from the nearest one, draws one complex
gain per link and records ``ln(1 + SINR)``.

Base stations are generated as arrivals of a unit-rate Poisson process in
``t = πλr²``, which is the PPP seen radially from the user; the first
arrival is the nearest BS. Realizations are grouped in fixed-size blocks.
Block ``b`` draws from ``SeedSequence(seed, spawn_key=(b,))`` and blocks
are reduced in index order, so the estimate does not depend on the
number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ase import LinkConfig
from .errors import ConfigError, DomainError
from .fading import rayleigh, sample_gain
from .interference import NetworkParams

BLOCK_SIZE = 512
CHUNK = 64
MAX_DISCARD_FRACTION = 0.01


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo settings.

    The simulation region is a disk of radius
    ``region_radius_factor / sqrt(pi * lambda)``. With ``hybrid_nearest = n``
    only the ``n`` closest interferers use the interferer fading law; the
    rest are Rayleigh with the same mean power.
    """

    realizations: int = 50_000
    region_radius_factor: float = 15.0
    seed: int = 0
    hybrid_nearest: Optional[int] = None

    def __post_init__(self):
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise DomainError(f"realizations must be a positive integer, got {self.realizations}")
        if not self.region_radius_factor >= 5:
            raise DomainError(f"region_radius_factor must be at least 5, got {self.region_radius_factor}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must fit in 64 unsigned bits")
        if self.hybrid_nearest is not None and self.hybrid_nearest < 0:
            raise DomainError("hybrid_nearest must be non-negative")

    def radius(self, lam):
        return self.region_radius_factor / math.sqrt(math.pi * lam)


@dataclass(frozen=True)
class AseEstimate:
    mean: float
    std_err: float
    n: int
    discards: int = 0


def realize_network(lam, radius, rng):
    """BS positions of one PPP realization on the disk of ``radius``, shape (N, 2)."""
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if not lam >= 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    n = rng.poisson(lam * math.pi * radius * radius)
    r = radius * np.sqrt(rng.uniform(size=n))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def _check_inputs(net, link):
    if not isinstance(net, NetworkParams):
        raise DomainError("net must be NetworkParams")
    if not isinstance(link, LinkConfig):
        raise DomainError("link must be LinkConfig")
    if not net.noise > 0:
        raise DomainError("noise power must be positive")


def _arrivals(rng, size, t0, t_max):
    """Unit-rate Poisson arrivals after ``t0``, one row per realization.

    Drawn in chunks of ``CHUNK`` columns until every row has passed
    ``t_max``; a larger ``t_max`` only appends chunks, so smaller regions
    see a prefix of the same network.
    """
    chunks = []
    last = np.full(size, float(t0))
    while True:
        cum = last[:, None] + np.cumsum(rng.standard_exponential((size, CHUNK)), axis=1)
        chunks.append(cum)
        last = cum[:, -1]
        if last.min() > t_max:
            return np.concatenate(chunks, axis=1)


def _power_gains(params, rng, shape):
    # chunk-wise for the same prefix property as the arrivals
    cols = [np.abs(sample_gain(params, rng, (shape[0], CHUNK))) ** 2
            for _ in range(shape[1] // CHUNK)]
    return np.concatenate(cols, axis=1)


def _interference(sim, net, link, t, first_rank, streams):
    """Aggregate interference power per row from arrival matrix ``t``."""
    g = _power_gains(link.interferer, streams[0], t.shape)
    if sim.hybrid_nearest is not None:
        far = _power_gains(rayleigh(link.interferer.omega / 2.0), streams[1], t.shape)
        rank = first_rank + np.arange(t.shape[1])
        g = np.where(rank[None, :] > sim.hybrid_nearest, far, g)
    return (g * _path_loss(net, t)).sum(axis=1)


def _path_loss(net, t):
    # t = πλ r² is the unit-rate radial coordinate
    return (t / (math.pi * net.lam)) ** (-net.eta / 2.0)


def _streams(seed_seq):
    return [np.random.default_rng(s) for s in seed_seq.spawn(4)]


def _block_ase(sim, net, link, size, seed_seq):
    """ln(1 + SINR) for ``size`` realizations; empty ones are dropped."""
    arr, des, inter, far = _streams(seed_seq)
    t_max = sim.region_radius_factor ** 2
    t = _arrivals(arr, size, 0.0, t_max)
    kept = t[:, 0] <= t_max
    # serving BS is the first arrival; only the interferers go beyond CHUNK
    t_int = np.where(t[:, 1:] <= t_max, t[:, 1:], np.inf)
    t_int = np.pad(t_int, ((0, 0), (0, 1)), constant_values=np.inf)
    g0 = np.abs(sample_gain(link.desired, des, size)) ** 2
    interference = _interference(sim, net, link, t_int, 1, (inter, far))
    signal = g0 * _path_loss(net, t[:, 0])
    sinr = net.power * signal / (net.power * interference + net.noise)
    return np.log1p(sinr[kept]), int(size - kept.sum())


def _block_conditional(sim, net, link, r0, size, seed_seq):
    arr, des, inter, far = _streams(seed_seq)
    t_max = sim.region_radius_factor ** 2
    t0 = math.pi * net.lam * r0 * r0
    t = _arrivals(arr, size, t0, t_max)
    t = np.where(t <= t_max, t, np.inf)
    g0 = np.abs(sample_gain(link.desired, des, size)) ** 2
    interference = _interference(sim, net, link, t, 1, (inter, far))
    sinr = net.power * g0 * r0 ** (-net.eta) / (net.power * interference + net.noise)
    return np.log1p(sinr), 0


def _run_blocks(sim, work, threads):
    n_blocks = -(-sim.realizations // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, sim.realizations - b * BLOCK_SIZE) for b in range(n_blocks)]

    def one(b):
        return work(sizes[b], np.random.SeedSequence(sim.seed, spawn_key=(b,)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(n_blocks)))
    else:
        parts = [one(b) for b in range(n_blocks)]

    samples = np.concatenate([p[0] for p in parts])
    discards = sum(p[1] for p in parts)
    if discards > MAX_DISCARD_FRACTION * sim.realizations:
        raise ConfigError(
            f"{discards} of {sim.realizations} realizations had no base station; "
            "enlarge region_radius_factor")
    n = samples.size
    mean = float(samples.mean())
    std_err = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return AseEstimate(mean=mean, std_err=std_err, n=n, discards=discards)


def simulate_ase(sim, net, link, threads=1):
    """Estimate the average spectral efficiency [nats/s/Hz] by simulation."""
    _check_inputs(net, link)
    return _run_blocks(sim, lambda size, ss: _block_ase(sim, net, link, size, ss), threads)


def simulate_conditional_se(sim, net, link, r0, threads=1):
    """As :func:`simulate_ase` with the serving BS pinned at distance ``r0``."""
    _check_inputs(net, link)
    radius = sim.radius(net.lam)
    if not 0 < r0 < radius:
        raise DomainError(f"r0 must lie in (0, {radius:.6g}), got {r0}")
    return _run_blocks(
        sim, lambda size, ss: _block_conditional(sim, net, link, r0, size, ss), threads)
