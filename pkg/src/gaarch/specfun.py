"""
Special functions and quadrature used by the residual distribution.

The scalar kernels (``_log_gamma``, ``_reg_inc_beta``, ...) are plain Python
compiled by numba when it is enabled, so they can be called from the other
compiled kernels. The public wrappers validate arguments and broadcast over
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from gaarch._jit import jit
from gaarch.exceptions import DomainError, NumericError

__all__ = [
    "QuadratureRule",
    "gauss_legendre",
    "integrate",
    "inv_reg_inc_beta",
    "log_beta",
    "log_gamma",
    "reg_inc_beta",
]

_HALF_LOG_2PI = 0.91893853320467274178
# B_{2k} / (2k (2k-1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_C1, _C2, _C3, _C4, _C5, _C6, _C7, _C8 = _STIRLING

_CF_MAXIT = 10000
_CF_EPS = 1e-16
_FPMIN = 1e-300


def _log_gamma_python(x: float) -> float:
    # recurrence up to x >= 10, then the asymptotic series (error < 1e-17 there)
    shift = 0.0
    if x < 10.0:
        prod = 1.0
        while x < 10.0:
            prod *= x
            x += 1.0
        shift = math.log(prod)
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv * (
        _C1
        + inv2
        * (_C2 + inv2 * (_C3 + inv2 * (_C4 + inv2 * (_C5 + inv2 * (_C6 + inv2 * (_C7 + inv2 * _C8))))))
    )
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series - shift


_log_gamma = jit(_log_gamma_python)


def _log_beta_python(a: float, b: float) -> float:
    return _log_gamma(a) + _log_gamma(b) - _log_gamma(a + b)


_log_beta = jit(_log_beta_python)


def _betacf_python(z: float, a: float, b: float) -> float:
    """Modified Lentz evaluation of the incomplete beta continued fraction."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * z / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * z / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * z / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


_betacf = jit(_betacf_python)


def _reg_inc_beta_pair_python(z: float, zc: float, a: float, b: float) -> float:
    # I(z; a, b) given z and zc = 1 - z, each carried at full relative precision
    if z <= 0.0:
        return 0.0
    if zc <= 0.0:
        return 1.0
    log_front = a * math.log(z) + b * math.log(zc) - _log_beta(a, b)
    if z < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(z, a, b) / a
    return 1.0 - math.exp(log_front) * _betacf(zc, b, a) / b


_reg_inc_beta_pair = jit(_reg_inc_beta_pair_python)


def _reg_inc_beta_python(z: float, a: float, b: float) -> float:
    return _reg_inc_beta_pair(z, 1.0 - z, a, b)


_reg_inc_beta = jit(_reg_inc_beta_python)


def _inv_guess_python(p: float, a: float, b: float) -> float:
    # Numerical Recipes starting point for the inverse
    if a >= 1.0 and b >= 1.0:
        pp = p if p < 0.5 else 1.0 - p
        t = math.sqrt(-2.0 * math.log(pp))
        x = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        if p < 0.5:
            x = -x
        al = (x * x - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        w = x * math.sqrt(al + h) / h - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (
            al + 5.0 / 6.0 - 2.0 / (3.0 * h)
        )
        return a / (a + b * math.exp(2.0 * w))
    lna = math.log(a / (a + b))
    lnb = math.log(b / (a + b))
    t = math.exp(a * lna) / a
    u = math.exp(b * lnb) / b
    w = t + u
    if p < t / w:
        return (a * w * p) ** (1.0 / a)
    return 1.0 - (b * w * (1.0 - p)) ** (1.0 / b)


_inv_guess = jit(_inv_guess_python)


def _inv_reg_inc_beta_python(p: float, a: float, b: float) -> float:
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    if p > 0.5:
        # 1 - p is exact here and the complementary problem is better conditioned
        return 1.0 - _inv_reg_inc_beta_lower(1.0 - p, b, a)
    return _inv_reg_inc_beta_lower(p, a, b)


def _inv_reg_inc_beta_lower_python(p: float, a: float, b: float) -> float:
    lbeta = _log_beta(a, b)
    lo = 0.0
    hi = 1.0
    x = _inv_guess(p, a, b)
    if not (x > 0.0 and x < 1.0):
        x = 0.5
    for _ in range(400):
        f = _reg_inc_beta(x, a, b) - p
        if f == 0.0:
            return x
        if f < 0.0:
            lo = x
        else:
            hi = x
        if x <= 0.0:
            return 0.0
        log_dens = (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - lbeta
        x_new = -1.0
        if log_dens > -700.0:
            x_new = x - f / math.exp(log_dens)
        if not (x_new > lo and x_new < hi):
            # bisect, geometrically when the bracket spans decades near 0
            if lo == 0.0:
                x_new = 0.1 * hi if hi < 0.1 else 0.5 * hi
            elif hi / lo > 4.0:
                x_new = math.sqrt(lo * hi)
            else:
                x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4e-16 * x_new or hi - lo <= 4e-16 * hi:
            return x_new
        x = x_new
    return x


_inv_reg_inc_beta_lower = jit(_inv_reg_inc_beta_lower_python)
_inv_reg_inc_beta = jit(_inv_reg_inc_beta_python)


# --------------------------------------------------------------------------
# public wrappers


def _check_positive(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return arr


def _scalar_or_array(out: np.ndarray):
    return float(out) if out.ndim == 0 else out


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    arr = _check_positive("x", x)
    out = np.vectorize(_log_gamma, otypes=[float])(arr)
    return _scalar_or_array(np.asarray(out))


def log_beta(a, b):
    """``log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b)``."""
    a_arr = _check_positive("a", a)
    b_arr = _check_positive("b", b)
    out = np.vectorize(_log_beta, otypes=[float])(a_arr, b_arr)
    return _scalar_or_array(np.asarray(out))


def reg_inc_beta(z, a, b):
    """
    Regularized incomplete beta function ``I(z; a, b)``.

    Parameters
    ----------
    z : float or ndarray
        Upper limit of integration, in ``[0, 1]``.
    a, b : float or ndarray
        Positive shape parameters.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr >= 0.0) | ~(z_arr <= 1.0)):
        raise DomainError(f"z must lie in [0, 1], got {z!r}")
    a_arr = _check_positive("a", a)
    b_arr = _check_positive("b", b)
    out = np.vectorize(_reg_inc_beta, otypes=[float])(z_arr, a_arr, b_arr)
    return _scalar_or_array(np.asarray(out))


def inv_reg_inc_beta(p, a, b):
    """Inverse of :func:`reg_inc_beta` in its first argument."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr >= 0.0) | ~(p_arr <= 1.0)):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    a_arr = _check_positive("a", a)
    b_arr = _check_positive("b", b)
    out = np.vectorize(_inv_reg_inc_beta, otypes=[float])(p_arr, a_arr, b_arr)
    return _scalar_or_array(np.asarray(out))


# --------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of an interpolatory rule on (-1, 1)."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if np.any(np.diff(nodes) <= 0.0) or nodes[0] <= -1.0 or nodes[-1] >= 1.0:
            raise ValueError("nodes must be strictly increasing inside (-1, 1)")
        if np.any(weights <= 0.0) or abs(weights.sum() - 2.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 2")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size


@lru_cache(maxsize=8)
def gauss_legendre(n: int = 256) -> QuadratureRule:
    """n-point Gauss-Legendre rule (exact for polynomials of degree ``2n - 1``)."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(nodes, weights)


def _map_nodes(t: np.ndarray, transform: str) -> tuple[np.ndarray, np.ndarray]:
    if transform == "unit-interval":
        return 0.5 * (t + 1.0), np.full_like(t, 0.5)
    if transform == "half-line":
        return (1.0 + t) / (1.0 - t), 2.0 / (1.0 - t) ** 2
    if transform == "full-line":
        one_m = 1.0 - t * t
        return t / one_m, (1.0 + t * t) / (one_m * one_m)
    raise ValueError(f"unknown transform {transform!r}")


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    rule: QuadratureRule | None = None,
    transform: str = "full-line",
) -> float:
    """
    Integrate a vectorized ``f`` with ``rule`` after a change of variables.

    ``transform`` selects the domain: ``"unit-interval"`` (0, 1),
    ``"half-line"`` (0, inf) via ``x = (1 + t)/(1 - t)``, or ``"full-line"``
    (-inf, inf) via ``x = t/(1 - t**2)``.
    """
    if rule is None:
        rule = gauss_legendre(256)
    x, jac = _map_nodes(rule.nodes, transform)
    values = np.asarray(f(x), dtype=float)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape)
    if not np.all(np.isfinite(values)):
        bad = x[~np.isfinite(values)][0]
        raise NumericError(f"integrand is not finite at x={bad!r}")
    return float(np.sum(rule.weights * jac * values))
