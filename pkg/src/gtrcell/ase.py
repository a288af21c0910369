"""Average spectral efficiency of the typical downlink user.

The conditional ergodic rate given the serving distance ``r0`` is the
single integral

    ∫_0^∞ L_I(z/N0) (1 - L_S(z/N0)) e^{-z} / z dz,

and the network average weights it with the nearest-BS distance law.
All rates are in nats/s/Hz.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError
from .fading import GtrParams, SevereParams, signal_lt_complement
from .interference import NetworkParams, log_lt
from .numerics import QuadratureSpec, integrate, integrate_semi_infinite

LT_METHODS = ("exact", "lower_bound", "severe")

# e^{-z}/z makes the tail beyond Z_MAX smaller than e^{-50}.
Z_MAX = 50.0
Z_SPEC = QuadratureSpec(rel_tol=1e-7, abs_tol=1e-12)
R_SPEC = QuadratureSpec(rel_tol=1e-6, abs_tol=1e-10)
# serving-distance breakpoints in units of 1/sqrt(πλ)
R_BREAKS = (1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 3.0)


@dataclass(frozen=True)
class LinkConfig:
    desired: GtrParams
    interferer: Union[GtrParams, SevereParams]

    def __post_init__(self):
        if not isinstance(self.desired, GtrParams):
            raise DomainError("the desired link must be a finite-k GtrParams")
        if not isinstance(self.interferer, (GtrParams, SevereParams)):
            raise DomainError("interferer must be GtrParams or SevereParams")


@dataclass(frozen=True)
class AseResult:
    nats: float
    err_est: float
    method: str


def serving_distance_pdf(lam, r):
    """Density ``2πλ r exp(-πλ r²)`` of the distance to the nearest BS."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("r must be non-negative")
    out = 2.0 * math.pi * lam * r * np.exp(-math.pi * lam * r * r)
    return float(out) if out.ndim == 0 else out


def _check_method(link, lt_method):
    if lt_method not in LT_METHODS:
        raise DomainError(f"unknown LT method {lt_method!r}")
    severe = isinstance(link.interferer, SevereParams)
    if severe != (lt_method == "severe"):
        raise DomainError("the severe method pairs with SevereParams interferers only")


def _breakpoints(net, link, p_bar):
    # decades around the inverse mean SNR, where 1 - L_S switches on
    z_snr = net.noise / (link.desired.omega * p_bar)
    lo = math.floor(math.log10(z_snr)) - 3
    pts = 10.0 ** np.arange(lo, 2)
    return pts[pts < Z_MAX]


def _conditional_se(net, link, r0, lt_method, spec):
    if net.power == 0.0:
        return 0.0, 0.0
    p_bar = net.power * r0 ** (-net.eta)

    def integrand(z):
        s = z / net.noise
        log_l, _ = log_lt(lt_method, net, link.interferer, r0, s)
        comp = np.asarray(signal_lt_complement(link.desired, p_bar, s))
        return np.exp(log_l - z) * comp / z

    return integrate(integrand, 0.0, Z_MAX, spec, points=_breakpoints(net, link, p_bar))


def conditional_se(net, link, r0, lt_method="exact", spec=Z_SPEC):
    """Ergodic rate [nats/s/Hz] of a user served from distance ``r0``."""
    _check_method(link, lt_method)
    if not r0 > 0:
        raise DomainError(f"serving distance must be positive, got {r0}")
    if not net.noise > 0:
        raise DomainError("noise power must be positive")
    return _conditional_se(net, link, r0, lt_method, spec)[0]


def average_se(net, link, lt_method="exact", spec=R_SPEC, z_spec=Z_SPEC, threads=1):
    """Spatially averaged spectral efficiency.

    Parameters
    ----------
    net : NetworkParams
    link : LinkConfig
    lt_method : {"exact", "lower_bound", "severe"}
        Interference LT used inside the rate integral.
    threads : int
        Worker threads for the serving-distance nodes; the result does not
        depend on it.

    Returns
    -------
    AseResult
    """
    _check_method(link, lt_method)
    if not net.noise > 0:
        raise DomainError("noise power must be positive (interference-limited case unsupported)")
    if net.power == 0.0:
        return AseResult(0.0, 0.0, lt_method)

    inner_err = []

    def one(r0):
        return _conditional_se(net, link, float(r0), lt_method, z_spec)

    def f(r):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                res = list(pool.map(one, r))
        else:
            res = [one(x) for x in r]
        inner_err.append(max(e for _, e in res))
        return np.array([v for v, _ in res]) * serving_distance_pdf(net.lam, r)

    # the rate grows like log(1/r0) near the origin, so split geometrically
    scale = 1.0 / math.sqrt(math.pi * net.lam)
    pts = [scale * x for x in R_BREAKS]
    value, err = integrate_semi_infinite(f, 0.0, scale, spec, points=pts)
    # inner errors are averaged against a probability density, so the
    # largest one bounds their contribution
    err = float(err) + max(inner_err, default=0.0)
    return AseResult(float(value), err, lt_method)
