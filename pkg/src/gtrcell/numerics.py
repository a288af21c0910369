"""Special-function kernels and adaptive quadrature.

Everything here is vectorised over numpy arrays and free of shared state.
The quadrature routines accept vector-valued integrands: ``f`` maps a 1-D
array of nodes of shape ``(n,)`` to an array of shape ``(n, *m)`` and the
result has shape ``m``. Subintervals are refined in batches so a single
call to ``f`` evaluates every pending subinterval at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, NumericError

__all__ = [
    "QuadratureSpec",
    "KERNEL_SPEC",
    "NESTED_SPEC",
    "bessel_i0_scaled",
    "bessel_i1_scaled",
    "kummer_1f1",
    "lower_incomplete_gamma",
    "integrate",
    "integrate_semi_infinite",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`integrate`."""

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise DomainError(f"abs_tol must be non-negative, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


KERNEL_SPEC = QuadratureSpec(rel_tol=1e-8)
NESTED_SPEC = QuadratureSpec(rel_tol=1e-6)


def _as_finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _unwrap(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _partial(values, x):
    # partial results cover the failing subset; a scalar call gets a scalar back
    values = np.asarray(values, dtype=float)
    return float(values.ravel()[0]) if np.ndim(x) == 0 else values


# ---------------------------------------------------------------------------
# Modified Bessel functions, exponentially scaled
# ---------------------------------------------------------------------------

def _bessel_scaled(x, fn):
    out = fn(_as_finite(x))
    return _unwrap(np.asarray(out))


def bessel_i0_scaled(x):
    """Return ``exp(-|x|) * I0(x)``.

    Parameters
    ----------
    x : float or array_like
        Finite real argument.

    Returns
    -------
    float or ndarray
        Values in ``(0, 1]``; even in ``x``.
    """
    return _bessel_scaled(x, special.i0e)


def bessel_i1_scaled(x):
    """Return ``exp(-|x|) * I1(x)`` (odd in ``x``)."""
    return _bessel_scaled(x, special.i1e)


# ---------------------------------------------------------------------------
# Confluent hypergeometric function 1F1
# ---------------------------------------------------------------------------

_KUMMER_ASYMPTOTIC_MIN = 50.0
_KUMMER_MAX_TERMS = 20000


def _kummer_series(c, b, y):
    """Sum 1F1(c; b; y) for y >= 0 with the positive-term Taylor series."""
    term = np.ones_like(y)
    total = np.ones_like(y)
    small_run = np.zeros(y.shape, dtype=int)
    for k in range(1, _KUMMER_MAX_TERMS):
        term = term * (c + k - 1) / (b + k - 1) * y / k
        total = total + term
        small_run = np.where(np.abs(term) < _EPS * np.abs(total), small_run + 1, 0)
        if np.all(small_run >= 3):
            return total
    raise NumericError("1F1 series did not converge", value=total)


def _kummer_asymptotic(a, b, y):
    """Leading large-y expansion of 1F1(a; b; -y); the e^{-y} branch is dropped."""
    term = np.ones_like(y)
    total = np.ones_like(y)
    active = np.ones(y.shape, dtype=bool)
    for s in range(200):
        nxt = term * (a + s) * (a - b + 1 + s) / ((s + 1) * y)
        # each element stops at convergence or at its smallest term
        active &= (np.abs(nxt) < np.abs(term)) & (np.abs(nxt) > _EPS * np.abs(total))
        if not np.any(active):
            break
        total = np.where(active, total + nxt, total)
        term = np.where(active, nxt, term)
    return math.gamma(b) / math.gamma(b - a) * y ** (-a) * total


def kummer_1f1(a, b, x):
    """Confluent hypergeometric function ``1F1(a; b; x)``.

    For ``x <= 0`` the Kummer transformation
    ``1F1(a; b; x) = e^x 1F1(b - a; b; -x)`` turns the Taylor series into
    one with positive terms. Arguments with ``-x`` above 50 use the
    algebraic large-argument expansion, whose neglected part is of order
    ``e^{x}``.
    """
    a = float(a)
    b = float(b)
    if b <= 0 and b == math.floor(b):
        raise DomainError(f"b must not be a non-positive integer, got {b}")
    x = _as_finite(x)
    flat = np.atleast_1d(x).astype(float)
    out = np.empty_like(flat)

    pos = flat > 0
    if np.any(pos):
        if a < 0:
            raise DomainError("positive arguments require a >= 0")
        try:
            out[pos] = _kummer_series(a, b, flat[pos])
        except NumericError as exc:
            raise NumericError(str(exc), value=_partial(exc.value, x)) from None

    neg = ~pos
    if np.any(neg):
        y = -flat[neg]
        res = np.empty_like(y)
        big = y > _KUMMER_ASYMPTOTIC_MIN
        if b - a <= 0:
            big[:] = False
        if np.any(~big):
            ys = y[~big]
            try:
                res[~big] = np.exp(-ys) * _kummer_series(b - a, b, ys)
            except NumericError as exc:
                raise NumericError(str(exc), value=_partial(np.exp(-ys) * exc.value, x)) from None
        if np.any(big):
            res[big] = _kummer_asymptotic(a, b, y[big])
        out[neg] = res

    return _unwrap(out.reshape(x.shape))


# ---------------------------------------------------------------------------
# Lower incomplete gamma
# ---------------------------------------------------------------------------

def lower_incomplete_gamma(s, x):
    """Unregularised lower incomplete gamma ``γ(s, x)``.

    Series expansion for ``x < s + 1``; otherwise the continued fraction for
    the upper function, subtracted from ``Γ(s)``.
    """
    s = float(s)
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    x = _as_finite(x)
    if np.any(x < 0):
        raise DomainError("x must be non-negative")
    flat = np.atleast_1d(x).astype(float)
    out = np.zeros_like(flat)
    gamma_s = math.gamma(s)

    ser = (flat > 0) & (flat < s + 1)
    if np.any(ser):
        xs = flat[ser]
        term = np.full_like(xs, 1.0 / s)
        total = term.copy()
        for n in range(1, 1000):
            term = term * xs / (s + n)
            total += term
            if np.all(term < _EPS * total):
                break
        out[ser] = total * np.exp(-xs + s * np.log(xs))

    cf = flat >= s + 1
    if np.any(cf):
        xc = flat[cf]
        tiny = 1e-300
        bb = xc + 1.0 - s
        c = np.full_like(xc, 1.0 / tiny)
        d = 1.0 / bb
        h = d.copy()
        for i in range(1, 1000):
            an = -i * (i - s)
            bb = bb + 2.0
            d = an * d + bb
            d = np.where(np.abs(d) < tiny, tiny, d)
            c = bb + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            d = 1.0 / d
            delta = d * c
            h = h * delta
            if np.all(np.abs(delta - 1.0) < _EPS):
                break
        upper = np.exp(-xc + s * np.log(xc)) * h
        out[cf] = gamma_s - upper

    return _unwrap(out.reshape(x.shape))


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature (G7/K15)
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
    -0.207784955007898467600689403773245,
    -0.405845151377397166906606412076961,
    -0.586087235467691130294144838258730,
    -0.741531185599394439863864773280788,
    -0.864864423359769072789712788640926,
    -0.949107912342758524526189684047851,
    -0.991455371120812639206854697526329,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])
_GAUSS_IDX = np.arange(1, 15, 2)


def _gk15(f, lo, hi):
    """Apply the 15-point Kronrod rule to every interval [lo_i, hi_i]."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = center[:, None] + half[:, None] * _XGK[None, :]
    fx = np.asarray(f(nodes.ravel()), dtype=float)
    fx = fx.reshape((lo.size, 15) + fx.shape[1:])
    tail = (1,) * (fx.ndim - 2)
    wk = _WGK.reshape((1, 15) + tail)
    h = half.reshape((lo.size,) + tail)

    k_sum = np.tensordot(_WGK, fx, axes=([0], [1]))
    g_sum = np.tensordot(_WG, fx[:, _GAUSS_IDX], axes=([0], [1]))
    resabs = np.sum(wk * np.abs(fx), axis=1)
    mean = 0.5 * k_sum
    resasc = np.sum(wk * np.abs(fx - mean[:, None]), axis=1)

    value = h * k_sum
    err = h * np.abs(k_sum - g_sum)
    resasc = h * resasc
    resabs = h * resabs
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.maximum(err, 50.0 * _EPS * resabs)
    return value, err


def integrate(f, a, b, spec=KERNEL_SPEC, points=None):
    """Adaptive quadrature of ``f`` over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Vectorised integrand; never evaluated at ``a`` or ``b`` (or at any
        breakpoint), so integrable endpoint singularities are allowed.
    a, b : float
        Finite limits with ``a < b``.
    spec : QuadratureSpec
        Tolerances. Convergence means ``err <= max(abs_tol, rel_tol*|value|)``
        componentwise.
    points : sequence of float, optional
        Interior breakpoints where the integrand changes character.

    Returns
    -------
    value, err_est : float or ndarray

    Raises
    ------
    NumericError
        If the subdivision cap is reached or intervals can no longer be
        bisected; carries the best estimate.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")

    edges = [a, b]
    if points is not None:
        edges += [float(p) for p in points if a < p < b]
    edges = np.unique(np.asarray(edges))
    lo, hi = edges[:-1], edges[1:]
    vals, errs = _gk15(f, lo, hi)

    while True:
        total = vals.sum(axis=0)
        err = errs.sum(axis=0)
        if not (np.all(np.isfinite(total)) and np.all(np.isfinite(err))):
            raise NumericError("non-finite integrand values", value=_unwrap(total),
                               err_est=_unwrap(err))
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(err <= tol):
            return _unwrap(total), _unwrap(err)

        n = lo.size
        if n >= spec.max_subdivisions:
            raise NumericError("subdivision limit reached", value=_unwrap(total),
                               err_est=_unwrap(err))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(errs == 0, 0.0, errs / tol)
        score = ratio.reshape(n, -1).max(axis=1)
        order = np.argsort(-score, kind="stable")
        chosen = order[score[order] > 1.0 / n]
        if chosen.size == 0:
            chosen = order[:1]
        chosen = np.sort(chosen[: max(1, spec.max_subdivisions - n)])

        mid = 0.5 * (lo[chosen] + hi[chosen])
        if np.any((mid <= lo[chosen]) | (mid >= hi[chosen])):
            raise NumericError("interval too small to bisect", value=_unwrap(total),
                               err_est=_unwrap(err))
        keep = np.ones(n, dtype=bool)
        keep[chosen] = False
        new_lo = np.concatenate([lo[chosen], mid])
        new_hi = np.concatenate([mid, hi[chosen]])
        nv, ne = _gk15(f, new_lo, new_hi)
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])


def integrate_semi_infinite(f, a, decay_scale, spec=KERNEL_SPEC, points=None):
    """Integrate ``f`` over ``[a, inf)``.

    Uses ``t = exp(-(x - a) / decay_scale)``, which maps the range onto
    ``(0, 1]``; the integrand must be damped at least exponentially on the
    scale ``decay_scale`` for the transformed integrand to stay bounded.
    ``points`` are breakpoints in ``x``.
    """
    a = float(a)
    scale = float(decay_scale)
    if not scale > 0:
        raise DomainError(f"decay_scale must be positive, got {decay_scale}")

    def g(t):
        x = a - scale * np.log(t)
        fx = np.asarray(f(x), dtype=float)
        shape = (slice(None),) + (None,) * (fx.ndim - 1)
        return scale * fx / t[shape]

    t_points = None
    if points is not None:
        t_points = [math.exp(-(float(p) - a) / scale) for p in points if p > a]
    return integrate(g, 0.0, 1.0, spec, points=t_points)
