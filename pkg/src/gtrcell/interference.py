"""Conditional Laplace transforms of the aggregate downlink interference.

Interferers form a PPP of intensity ``lambda`` outside the serving
distance ``r0``. Four evaluations are provided:

* ``direct``: the PGFL integral over interferer distance, kept as the
  reference form.
* ``exact``: the same quantity after the change of variables
  ``y = a / (r^η + a)`` with ``a = 2σ² s P`` and integration by parts.
* ``lower_bound``: the y-integral extended to 1, closed form via ζ2.
* ``severe``: the two-ray limit ``k → ∞``, ``σ² → 0`` at fixed Ω.

Internally everything is computed as log-transforms vectorised over ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fading import (
    GtrParams,
    SevereParams,
    one_minus_zeta1,
    zeta1,
    zeta1_and_prime,
    zeta2,
    zeta3_weighted,
)
from .numerics import QuadratureSpec, integrate

METHODS = ("exact", "direct", "lower_bound", "severe")

# Inner y-integrals: log L needs small absolute error, so relative error
# on the integral itself suffices.
INNER_SPEC = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-300)


@dataclass(frozen=True)
class NetworkParams:
    """BS intensity [1/m²], transmit power [W], path-loss exponent, noise [W]."""

    lam: float
    power: float
    eta: float = 4.0
    noise: float = 1e-11

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not self.power >= 0:
            raise DomainError(f"power must be non-negative, got {self.power}")
        if not self.eta > 2:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.eta}")
        if not self.noise >= 0:
            raise DomainError(f"noise must be non-negative, got {self.noise}")


@dataclass(frozen=True)
class LtEvaluation:
    value: float
    method: str
    err_est: float


def _check(net, r0, s):
    if not r0 > 0:
        raise DomainError(f"serving distance must be positive, got {r0}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise DomainError("s must be finite and non-negative")
    return s


def _need_gtr(fading):
    if not isinstance(fading, GtrParams):
        raise DomainError("this Laplace transform needs finite-k GtrParams")


def _y0_parts(net, fading, r0, s):
    """Return ``(a, y0, 1 - y0)`` with ``a = 2σ² s P``; ``1 - y0`` is formed directly."""
    a = 2.0 * fading.sigma_sq * s * net.power
    r_eta = r0 ** net.eta
    return a, a / (r_eta + a), r_eta / (r_eta + a)


def y0(net, fading, r0, s):
    """``2σ² s P / (r0^η + 2σ² s P)``."""
    _need_gtr(fading)
    s = _check(net, r0, s)
    out = _y0_parts(net, fading, r0, s)[1]
    return float(out) if out.ndim == 0 else out


def _boundary_term(fading, r0, y0v, omy0):
    """``r0² (1 - (1 - y0) ζ1(k y0))`` written without cancellation."""
    u = fading.k * y0v
    return r0 * r0 * (np.asarray(one_minus_zeta1(fading, u)) + y0v * np.asarray(zeta1(fading, u)))


def _bracket(fading, y, omy):
    """``ζ1(k y) - k (1-y) ζ1'(k y)``, the y-derivative of the PGFL integrand."""
    z1, z1p = zeta1_and_prime(fading, fading.k * y)
    return np.asarray(z1) - fading.k * omy * np.asarray(z1p)


def _full_bracket_integral(fading, eta):
    """The y-integral over [0, 1], in closed form via ζ2."""
    return (2.0 * math.pi / eta) / math.sin(2.0 * math.pi / eta) * zeta2(fading, eta)


def log_lt_exact(net, fading, r0, s, spec=INNER_SPEC):
    """log of the exact LT for an array of ``s``; returns ``(log_l, err)``.

    The integral ``J = ∫_0^{y0} (1-y)^{2/η} y^{-2/η} [ζ1 - k(1-y)ζ1'] dy``
    is taken directly for ``y0 <= 1/2`` and as the [0, 1] integral minus
    the piece over ``[y0, 1]`` otherwise, each after a substitution that
    makes the integrand smooth at the endpoint it approaches.
    """
    _need_gtr(fading)
    s = np.atleast_1d(_check(net, r0, s)).astype(float)
    eta = net.eta
    c = 2.0 / eta
    a, y0v, omy0 = _y0_parts(net, fading, r0, s)
    j = np.zeros_like(s)
    j_err = np.zeros_like(s)

    low = (a > 0) & (y0v <= 0.5)
    if np.any(low):
        yl, ol = y0v[low], omy0[low]
        m = 1.0 / (1.0 - c)

        # y = y0 w^m cancels y^{-2/η}
        def lower(w):
            y = yl[None, :] * (w ** m)[:, None]
            omy = ol[None, :] + yl[None, :] * (-np.expm1(m * np.log(w)))[:, None]
            return m * yl ** (1.0 - c) * omy ** c * _bracket(fading, y, omy)

        j[low], j_err[low] = integrate(lower, 0.0, 1.0, spec)

    high = y0v > 0.5
    if np.any(high):
        oh = omy0[high]
        n = 1.0 / (1.0 + c)

        # 1 - y = (1 - y0) v^n cancels (1-y)^{2/η}
        def upper(v):
            omy = oh[None, :] * (v ** n)[:, None]
            y = 1.0 - omy
            return n * oh ** (1.0 + c) * y ** (-c) * _bracket(fading, y, omy)

        tail, tail_err = integrate(upper, 0.0, 1.0, spec)
        j[high] = _full_bracket_integral(fading, eta) - tail
        j_err[high] = tail_err

    # a^{2/η} = r0² (y0 / (1 - y0))^{2/η}
    with np.errstate(divide="ignore"):
        pref = np.where(a > 0, r0 * r0 * (y0v / omy0) ** c, 0.0)
    boundary = _boundary_term(fading, r0, y0v, omy0)
    log_l = math.pi * net.lam * (boundary - pref * j)
    return log_l, math.pi * net.lam * pref * j_err


def log_lt_direct(net, fading, r0, s, spec=INNER_SPEC):
    """log of the LT straight from the PGFL integral over ``r in [r0, ∞)``."""
    _need_gtr(fading)
    s = np.atleast_1d(_check(net, r0, s)).astype(float)
    eta = net.eta
    q = 1.0 / (eta - 2.0)
    a = 2.0 * fading.sigma_sq * s * net.power
    r0_eta = r0 ** eta
    log_l = np.zeros_like(s)
    err = np.zeros_like(s)
    live = a > 0
    if not np.any(live):
        return log_l, err
    al = a[live]

    # r = r0 u^{-1/(η-2)} maps [r0, ∞) onto (0, 1] with a bounded integrand
    def integrand(u):
        uu = u[:, None]
        au = al[None, :] * uu ** (eta * q)
        y = au / (r0_eta + au)
        ky = fading.k * y
        g = np.asarray(one_minus_zeta1(fading, ky)) + y * np.asarray(zeta1(fading, ky))
        return q * r0 * r0 * uu ** (-2.0 * q - 1.0) * g

    val, val_err = integrate(integrand, 0.0, 1.0, spec)
    log_l[live] = -2.0 * math.pi * net.lam * val
    err[live] = 2.0 * math.pi * net.lam * val_err
    return log_l, err


def log_lt_lower_bound(net, fading, r0, s):
    _need_gtr(fading)
    s = np.atleast_1d(_check(net, r0, s)).astype(float)
    eta = net.eta
    a, y0v, omy0 = _y0_parts(net, fading, r0, s)
    tail = (2.0 * math.pi ** 2 / eta) * zeta2(fading, eta) * net.lam / math.sin(2.0 * math.pi / eta)
    log_l = math.pi * net.lam * _boundary_term(fading, r0, y0v, omy0) - tail * a ** (2.0 / eta)
    return log_l, np.zeros_like(s)


def log_lt_severe(net, fading, r0, s):
    if not isinstance(fading, SevereParams):
        raise DomainError("the severe-fading LT needs SevereParams")
    s = np.atleast_1d(_check(net, r0, s)).astype(float)
    eta = net.eta
    b = s * net.power * fading.omega
    x = b * r0 ** (-eta)
    log_l = math.pi * net.lam * (r0 * r0 * np.asarray(one_minus_zeta1(fading, x))
                                 - b ** (2.0 / eta) * np.asarray(zeta3_weighted(fading, eta, x)))
    return log_l, np.zeros_like(s)


_LOG_LT = {
    "exact": log_lt_exact,
    "direct": log_lt_direct,
    "lower_bound": log_lt_lower_bound,
    "severe": log_lt_severe,
}


def log_lt(method, net, fading, r0, s):
    try:
        fn = _LOG_LT[method]
    except KeyError:
        raise DomainError(f"unknown LT method {method!r}") from None
    return fn(net, fading, r0, s)


def _evaluate(method, net, fading, r0, s):
    log_l, err = log_lt(method, net, fading, r0, float(s))
    value = math.exp(log_l[0])
    return LtEvaluation(value=value, method=method, err_est=value * float(err[0]))


def lt_interference_direct(net, fading, r0, s):
    """Reference LT of the interference, conditional on ``r0``."""
    return _evaluate("direct", net, fading, r0, s)


def lt_interference_exact(net, fading, r0, s):
    """Exact LT of the interference, conditional on ``r0``."""
    return _evaluate("exact", net, fading, r0, s)


def lt_interference_lower_bound(net, fading, r0, s):
    """Closed-form lower bound on :func:`lt_interference_exact`."""
    return _evaluate("lower_bound", net, fading, r0, s)


def lt_interference_severe(net, fading, r0, s):
    """LT in the two-ray (no diffuse part) limit."""
    return _evaluate("severe", net, fading, r0, s)
