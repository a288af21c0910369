"""Generalized two-ray (GTR) fading.

A GTR link carries two specular rays plus a circular Gaussian diffuse
term. It is parameterised by the specular-to-diffuse power ratio ``k``,
the peak-to-average specular power ratio ``delta``, half the diffuse
power ``sigma_sq`` and the law of the phase difference between the rays.
Rician (``delta = 0``) and Rayleigh (``k = 0``) are degenerate cases and
take the closed-form fast paths below.

The ζ-functions are expectations over the phase difference ``α`` of
functions of ``c(α) = 1 + delta*cos(α)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import special

from .errors import DomainError
from .numerics import (
    QuadratureSpec,
    bessel_i0_scaled,
    bessel_i1_scaled,
    integrate,
    kummer_1f1,
    lower_incomplete_gamma,
)

TWO_PI = 2.0 * math.pi

# Inner α-expectations are the innermost loop of every nested integral.
PHASE_SPEC = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-300)


# ---------------------------------------------------------------------------
# Phase-difference distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    """α uniform on [0, 2π) (GTR-U)."""

    def pdf(self, alpha):
        return np.full_like(np.asarray(alpha, dtype=float), 1.0 / TWO_PI)

    def sample(self, rng, size):
        return rng.uniform(0.0, TWO_PI, size)


@dataclass(frozen=True)
class Truncated:
    """α uniform on [π(1-p), π(1+p)] (GTR-T)."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"truncation p must lie in (0, 1], got {self.p}")

    def pdf(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        inside = (alpha >= math.pi * (1 - self.p)) & (alpha <= math.pi * (1 + self.p))
        return np.where(inside, 1.0 / (TWO_PI * self.p), 0.0)

    def sample(self, rng, size):
        return rng.uniform(math.pi * (1 - self.p), math.pi * (1 + self.p), size)


@dataclass(frozen=True)
class VonMises:
    """α with density exp(-κ cos α) / (2π I0(κ)) (GTR-V); κ = ``concentration``."""

    concentration: float

    def __post_init__(self):
        if not self.concentration >= 0:
            raise DomainError("von Mises concentration must be non-negative")

    def pdf(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        k = self.concentration
        return np.exp(-k * (1.0 + np.cos(alpha))) / (TWO_PI * bessel_i0_scaled(k))

    def sample(self, rng, size):
        # exp(-κ cos α) is a von Mises law centred on π
        return np.mod(rng.vonmises(math.pi, self.concentration, size), TWO_PI)


PhaseDifferenceDistribution = Union[Uniform, Truncated, VonMises]


def pdf_alpha(phase, alpha):
    """Density of the phase difference at ``alpha`` in [0, 2π]."""
    a = np.asarray(alpha, dtype=float)
    if np.any((a < 0) | (a > TWO_PI)) or not np.all(np.isfinite(a)):
        raise DomainError("alpha must lie in [0, 2π]")
    out = phase.pdf(a)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Link parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GtrParams:
    """One link's fading law.

    Attributes
    ----------
    k : float
        Specular-to-diffuse power ratio, ``(V1² + V2²) / (2σ²)``.
    delta : float
        Peak-to-average specular power ratio, ``2 V1 V2 / (V1² + V2²)``.
    sigma_sq : float
        Variance of each quadrature of the diffuse term.
    phase : PhaseDifferenceDistribution
    """

    k: float
    delta: float
    sigma_sq: float
    phase: PhaseDifferenceDistribution = Uniform()

    def __post_init__(self):
        if not self.k >= 0:
            raise DomainError(f"k must be non-negative, got {self.k}")
        if not 0.0 <= self.delta <= 1.0:
            raise DomainError(f"delta must lie in [0, 1], got {self.delta}")
        if not self.sigma_sq >= 0:
            raise DomainError(f"sigma_sq must be non-negative, got {self.sigma_sq}")
        if not self.omega > 0:
            raise DomainError("mean power (k+1)*2*sigma_sq must be positive")

    @property
    def omega(self):
        """Mean channel power gain ``(k + 1) 2σ²``."""
        return (self.k + 1.0) * 2.0 * self.sigma_sq

    @classmethod
    def from_omega(cls, k, delta, omega, phase=Uniform()):
        return cls(k, delta, omega / (2.0 * (k + 1.0)), phase)


@dataclass(frozen=True)
class SevereParams:
    """Two rays without a diffuse part: the ``k → ∞`` limit at fixed ``omega``."""

    omega: float
    delta: float
    phase: PhaseDifferenceDistribution = Uniform()

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if not 0.0 <= self.delta <= 1.0:
            raise DomainError(f"delta must lie in [0, 1], got {self.delta}")


def rayleigh(sigma_sq):
    return GtrParams(0.0, 0.0, sigma_sq)


def rician(k, sigma_sq):
    return GtrParams(k, 0.0, sigma_sq)


# ---------------------------------------------------------------------------
# Expectations over α
# ---------------------------------------------------------------------------

def phase_expectation(phase, h, spec=PHASE_SPEC):
    """Return ``E[h(cos α)]`` for a vectorised ``h``.

    ``h`` receives a 1-D array of cosines and returns an array whose first
    axis matches it. Every supported law is symmetric under α → 2π - α, so
    only [lo, π] is integrated.
    """
    if isinstance(phase, Uniform):
        lo, norm = 0.0, 1.0 / math.pi

        def weight(alpha):
            return np.full_like(alpha, norm)
    elif isinstance(phase, Truncated):
        lo, norm = math.pi * (1.0 - phase.p), 1.0 / (math.pi * phase.p)

        def weight(alpha):
            return np.full_like(alpha, norm)
    elif isinstance(phase, VonMises):
        lo = 0.0
        kappa = phase.concentration
        norm = 1.0 / (math.pi * bessel_i0_scaled(kappa))

        def weight(alpha):
            return norm * np.exp(-kappa * (1.0 + np.cos(alpha)))
    else:
        raise DomainError(f"unknown phase distribution {phase!r}")

    def integrand(alpha):
        vals = np.asarray(h(np.cos(alpha)), dtype=float)
        w = weight(alpha).reshape((-1,) + (1,) * (vals.ndim - 1))
        return w * vals

    value, _ = integrate(integrand, lo, math.pi, spec)
    return value


_GL_ORDERS = (16, 32, 64, 128, 256)
_GL_NODES = {n: np.polynomial.legendre.leggauss(n) for n in _GL_ORDERS}


def _gl_moments(flat, delta, beta, w):
    one_minus_cos = 2.0 * np.sin(0.5 * beta) ** 2
    e = np.exp(-flat[:, None] * one_minus_cos)
    return (e * w).sum(axis=1), (e * w * ((1.0 - delta) + delta * one_minus_cos)).sum(axis=1)


def _truncated_terms(p, delta, z):
    """Scaled GTR-T moments ``(E[e^{z(cos β - 1)}], E[(1 - Δ cos β) e^{z(cos β - 1)}])``.

    ``β`` is uniform on ``[0, πp]`` with ``α = π ± β``. Gauss-Legendre on
    the whole range with the order picked from ``z``; past the largest
    order, Bessel closed forms when the truncated mass is negligible and
    composite Gauss-Legendre on panels of a few ``1/sqrt(z)`` otherwise.
    """
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    m0 = np.full(flat.shape, np.nan)
    mc = np.full(flat.shape, np.nan)
    span = math.pi * p
    half = 0.5 * span
    need = 0.75 * flat * half + 12.0
    done = np.zeros(flat.shape, dtype=bool)
    for n in _GL_ORDERS:
        sel = ~done & (need <= n)
        if np.any(sel):
            x, w = _GL_NODES[n]
            m0[sel], mc[sel] = _gl_moments(flat[sel], delta, half * (x + 1.0), 0.5 * w)
            done |= sel
    # mass beyond πp is below e^{-z(1 - cos πp)}
    tail = ~done & ((flat * (1.0 - math.cos(span)) > 745.0) | (p == 1.0))
    if np.any(tail):
        i0, i1 = special.i0e(flat[tail]), special.i1e(flat[tail])
        m0[tail] = i0 / p
        mc[tail] = (i0 - delta * i1) / p
        done |= tail
    rest = ~done
    if np.any(rest):
        zr = flat[rest]
        panels = math.ceil(span * math.sqrt(float(zr.max())) / 4.0)
        x, w = _GL_NODES[32]
        edges = np.linspace(0.0, span, panels + 1)
        lo, width = edges[:-1, None], (edges[1:] - edges[:-1])[:, None]
        beta = (lo + 0.5 * width * (x + 1.0)).ravel()
        weights = (0.5 * width * w / span).ravel()
        m0[rest], mc[rest] = _gl_moments(zr, delta, beta, weights)
    return m0.reshape(z.shape), mc.reshape(z.shape)


def _check_nonneg(y, name="y"):
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise DomainError(f"{name} must be finite and non-negative")
    return y


def _out(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _expect_over_c(params, fn, y):
    """E_α[fn(c, y)] for an array ``y``, broadcasting over its shape."""
    flat = y.ravel()
    delta = params.delta

    def h(cos_a):
        c = 1.0 + delta * cos_a
        return fn(c[:, None], flat[None, :])

    return phase_expectation(params.phase, h).reshape(y.shape)


def zeta1(params, y):
    """``E_α[exp(-y c(α))]`` with closed forms for Rician, GTR-U and GTR-V."""
    y = _check_nonneg(y)
    d = params.delta
    phase = params.phase
    if d == 0.0:
        out = np.exp(-y)
    elif isinstance(phase, Uniform):
        out = np.exp(-y * (1.0 - d)) * bessel_i0_scaled(y * d)
    elif isinstance(phase, VonMises):
        kappa = phase.concentration
        out = (np.exp(-y * (1.0 - d)) * bessel_i0_scaled(y * d + kappa)
               / bessel_i0_scaled(kappa))
    else:
        out = np.exp(-y * (1.0 - d)) * _truncated_terms(phase.p, d, y * d)[0]
    return _out(out)


def zeta1_prime(params, u):
    """Derivative of :func:`zeta1` with respect to its argument, at ``u``.

    Equal to ``-E_α[c(α) exp(-u c(α))]`` and never positive.
    """
    u = _check_nonneg(u, "u")
    d = params.delta
    phase = params.phase
    if d == 0.0:
        out = -np.exp(-u)
    elif isinstance(phase, Uniform):
        out = np.exp(-u * (1.0 - d)) * (d * bessel_i1_scaled(u * d) - bessel_i0_scaled(u * d))
    elif isinstance(phase, VonMises):
        kappa = phase.concentration
        z = u * d + kappa
        out = (np.exp(-u * (1.0 - d)) * (d * bessel_i1_scaled(z) - bessel_i0_scaled(z))
               / bessel_i0_scaled(kappa))
    else:
        out = -np.exp(-u * (1.0 - d)) * _truncated_terms(phase.p, d, u * d)[1]
    return _out(out)


def zeta1_and_prime(params, u):
    """``(zeta1(u), zeta1_prime(u))`` sharing the Bessel evaluations."""
    u = _check_nonneg(u, "u")
    d = params.delta
    phase = params.phase
    if d == 0.0:
        return zeta1(params, u), zeta1_prime(params, u)
    if isinstance(phase, Truncated):
        terms = _truncated_terms(phase.p, d, u * d)
        scale = np.exp(-u * (1.0 - d))
        return _out(scale * terms[0]), _out(-scale * terms[1])
    kappa = phase.concentration if isinstance(phase, VonMises) else 0.0
    z = u * d + kappa
    scale = np.exp(-u * (1.0 - d)) / bessel_i0_scaled(kappa)
    i0 = bessel_i0_scaled(z)
    return _out(scale * i0), _out(scale * (d * bessel_i1_scaled(z) - i0))


# Closed forms lose relative accuracy in 1 - ζ1 below this argument.
_SMALL_ARG = 0.5


def one_minus_zeta1(params, y):
    """``1 - zeta1(y)`` without cancellation at small ``y``."""
    y = _check_nonneg(y)
    if params.delta == 0.0:
        return _out(-np.expm1(-y))
    out = np.empty_like(y)
    small = y < _SMALL_ARG
    if np.any(~small):
        out[~small] = 1.0 - np.asarray(zeta1(params, y[~small]))
    if np.any(small):
        ys = y[small]
        if isinstance(params.phase, Truncated):
            # smooth on the truncated range for these small arguments
            x, w = _GL_NODES[32]
            beta = 0.5 * math.pi * params.phase.p * (x + 1.0)
            c = 1.0 - params.delta * np.cos(beta)
            out[small] = 0.5 * (-np.expm1(-ys[:, None] * c[None, :]) @ w)
        else:
            out[small] = _expect_over_c(params, lambda c, v: -np.expm1(-v * c), ys)
    return _out(out)


def _check_eta(eta):
    if not eta > 2:
        raise DomainError(f"path-loss exponent must exceed 2, got {eta}")


def _zeta2_kernel(k_hat, eta):
    a = 1.0 - 2.0 / eta
    return (kummer_1f1(a, 2.0, -k_hat)
            + k_hat * (eta + 2.0) / (2.0 * eta) * kummer_1f1(a, 3.0, -k_hat))


@lru_cache(maxsize=256)
def _zeta2_cached(params, eta):
    if params.k == 0.0:
        return 1.0
    if params.delta == 0.0:
        return float(_zeta2_kernel(np.asarray(params.k), eta))
    k, d = params.k, params.delta
    return float(phase_expectation(params.phase, lambda cos_a: _zeta2_kernel(k * (1.0 + d * cos_a), eta)))


def zeta2(params, eta):
    """Constant of the lower-bound Laplace transform; depends only on the fading law."""
    _check_eta(eta)
    return _zeta2_cached(params, float(eta))


def zeta3(params, eta, x):
    """``E_α[γ(1 - 2/η, x c(α))]``."""
    _check_eta(eta)
    x = _check_nonneg(x, "x")
    s = 1.0 - 2.0 / eta
    if params.delta == 0.0:
        return _out(lower_incomplete_gamma(s, x))
    return _out(_expect_over_c(params, lambda c, v: lower_incomplete_gamma(s, v * c), x))


def zeta3_weighted(params, eta, x):
    """``E_α[c(α)^{2/η} γ(1 - 2/η, x c(α))]``, the kernel of the severe-fading LT.

    Reduces to :func:`zeta3` when ``delta = 0``. Swapping the α-average
    with the integral defining γ gives ``∫_0^x y^{-2/η} (-ζ1'(y)) dy``,
    which avoids the sharp step of γ in α when ``x`` is large.
    """
    _check_eta(eta)
    x = _check_nonneg(x, "x")
    s = 1.0 - 2.0 / eta
    if params.delta == 0.0:
        return _out(lower_incomplete_gamma(s, x))
    flat = np.atleast_1d(x).ravel()
    out = np.zeros_like(flat)
    live = flat > 0
    if np.any(live):
        xl = flat[live]
        m = 1.0 / s

        # y = x w^m removes the y^{-2/η} singularity
        def integrand(w):
            return -m * xl ** s * np.asarray(zeta1_prime(params, xl[None, :] * (w ** m)[:, None]))

        # the mass sits near w ~ x^{-1/m}; give the subdivision decades to start from
        top = math.log10(float(xl.max())) / m
        pts = 10.0 ** -np.arange(1, math.ceil(top) + 1) if top > 1 else None
        out[live] = integrate(integrand, 0.0, 1.0, PHASE_SPEC, points=pts)[0]
    return _out(out.reshape(x.shape))


# ---------------------------------------------------------------------------
# Desired-signal Laplace transform
# ---------------------------------------------------------------------------

def _signal_args(params, p_bar, s):
    if not isinstance(params, GtrParams):
        raise DomainError("the desired link needs a diffuse component (GtrParams)")
    if not p_bar > 0:
        raise DomainError(f"mean received power must be positive, got {p_bar}")
    s = _check_nonneg(s, "s")
    beta = 2.0 * params.sigma_sq * s * p_bar
    return beta, params.k * beta / (1.0 + beta)


def signal_lt(params, p_bar, s):
    """``E[exp(-s p_bar |g|²)]`` for a GTR link with mean received power scale ``p_bar``."""
    beta, w = _signal_args(params, p_bar, s)
    return _out(np.asarray(zeta1(params, w)) / (1.0 + beta))


def signal_lt_complement(params, p_bar, s):
    """``1 - signal_lt`` computed without cancellation for small ``s``."""
    beta, w = _signal_args(params, p_bar, s)
    return _out((beta + np.asarray(one_minus_zeta1(params, w))) / (1.0 + beta))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def specular_amplitudes(params):
    """Ray amplitudes ``(V1, V2)`` with ``V1 >= V2`` reproducing ``k`` and ``delta``."""
    if isinstance(params, SevereParams):
        total = params.omega
    else:
        total = 2.0 * params.k * params.sigma_sq
    root = math.sqrt(max(0.0, 1.0 - params.delta ** 2))
    return math.sqrt(total * (1.0 + root) / 2.0), math.sqrt(total * (1.0 - root) / 2.0)


def sample_gain(params, rng, size=None):
    """Draw complex channel gains ``V1 e^{jφ1} + V2 e^{jφ2} + X + jY``.

    ``φ1`` is uniform, ``φ2 = φ1 - α`` with ``α`` from the phase law, and
    ``X, Y ~ N(0, σ²)``; severe links have no diffuse part.
    """
    v1, v2 = specular_amplitudes(params)
    phi1 = rng.uniform(0.0, TWO_PI, size)
    alpha = params.phase.sample(rng, size)
    g = v1 * np.exp(1j * phi1) + v2 * np.exp(1j * (phi1 - alpha))
    if isinstance(params, GtrParams):
        sigma = math.sqrt(params.sigma_sq)
        g = g + sigma * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
    return g
