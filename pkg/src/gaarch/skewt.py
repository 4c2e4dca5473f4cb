"""
Jones-Faddy skewed Student's t distribution.

The raw law has density

    f(x) = (1 + x/r)^((nu_minus + 1)/2) (1 - x/r)^((nu_plus + 1)/2)
           / (2^(nu - 1) sqrt(nu) B(nu_minus/2, nu_plus/2)),

with ``nu = (nu_minus + nu_plus)/2`` and ``r = sqrt(nu + x**2)``. The left
tail decays like ``|x|^-(nu_minus + 1)`` and the right tail like
``|x|^-(nu_plus + 1)``; equal tail parameters give the Student t.

Residuals of the volatility model use the standardized version with zero
mean and unit variance, ``eps = (X - location)/scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from gaarch._jit import jit
from gaarch.exceptions import DomainError, StandardizationError
from gaarch.specfun import (
    _inv_reg_inc_beta,
    _log_beta,
    _reg_inc_beta_pair,
    gauss_legendre,
    integrate,
)

__all__ = [
    "NU_CAP",
    "NU_FLOOR",
    "SkewTParams",
    "StandardizedSkewT",
    "raw_cdf",
    "raw_logpdf",
    "raw_pdf",
    "raw_quantile",
    "sample",
    "standardize",
    "std_logpdf",
    "std_pdf",
]

NU_CAP = 200.0
NU_FLOOR = 2.05

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class SkewTParams:
    """Left and right tail degrees of freedom."""

    nu_minus: float
    nu_plus: float

    def __post_init__(self) -> None:
        for name in ("nu_minus", "nu_plus"):
            value = float(getattr(self, name))
            if not (2.0 < value <= NU_CAP):
                raise DomainError(f"{name} must lie in (2, {NU_CAP:g}], got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def nu(self) -> float:
        return 0.5 * (self.nu_minus + self.nu_plus)

    @property
    def a(self) -> float:
        return 0.5 * self.nu_minus

    @property
    def b(self) -> float:
        return 0.5 * self.nu_plus

    @property
    def log_norm(self) -> float:
        """Log of the reciprocal normalizing constant."""
        nu = self.nu
        return -(nu - 1.0) * _LOG2 - 0.5 * math.log(nu) - _log_beta(self.a, self.b)

    @property
    def is_symmetric(self) -> bool:
        return self.nu_minus == self.nu_plus


@dataclass(frozen=True)
class StandardizedSkewT:
    """Zero-mean, unit-variance version of a :class:`SkewTParams` law."""

    params: SkewTParams
    location: float
    scale: float
    m2_minus: float
    m2_plus: float

    @property
    def log_norm(self) -> float:
        return self.params.log_norm


# --------------------------------------------------------------------------
# scalar kernels


def _raw_logpdf_python(x: float, nu_minus: float, nu_plus: float, log_norm: float) -> float:
    nu = 0.5 * (nu_minus + nu_plus)
    r = math.hypot(x, math.sqrt(nu))
    # log(r + x) and log(r - x) without cancellation
    if x < 0.0:
        log_rm = math.log(r - x)
        log_rp = math.log(nu) - log_rm
    else:
        log_rp = math.log(r + x)
        log_rm = math.log(nu) - log_rp
    log_r = math.log(r)
    return 0.5 * (nu_minus + 1.0) * (log_rp - log_r) + 0.5 * (nu_plus + 1.0) * (log_rm - log_r) + log_norm


_raw_logpdf = jit(_raw_logpdf_python)


def _raw_cdf_python(t: float, nu_minus: float, nu_plus: float) -> float:
    if t == -math.inf:
        return 0.0
    if t == math.inf:
        return 1.0
    nu = 0.5 * (nu_minus + nu_plus)
    r = math.hypot(t, math.sqrt(nu))
    # z = (1 + t/r)/2 and its complement, whichever is small without cancellation
    if t < 0.0:
        z = 0.5 * nu / (r * (r - t))
        zc = 0.5 * (1.0 - t / r)
    else:
        zc = 0.5 * nu / (r * (r + t))
        z = 0.5 * (1.0 + t / r)
    return _reg_inc_beta_pair(z, zc, 0.5 * nu_minus, 0.5 * nu_plus)


_raw_cdf = jit(_raw_cdf_python)


def _raw_quantile_python(u: float, nu_minus: float, nu_plus: float) -> float:
    nu = 0.5 * (nu_minus + nu_plus)
    a = 0.5 * nu_minus
    b = 0.5 * nu_plus
    if u <= 0.5:
        z = _inv_reg_inc_beta(u, a, b)
        zc = 1.0 - z
    else:
        zc = _inv_reg_inc_beta(1.0 - u, b, a)
        z = 1.0 - zc
    return (z - zc) * math.sqrt(nu) / (2.0 * math.sqrt(z * zc))


_raw_quantile = jit(_raw_quantile_python)


def _raw_logpdf_array_python(x, nu_minus, nu_plus, log_norm):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _raw_logpdf(x[i], nu_minus, nu_plus, log_norm)
    return out


def _raw_cdf_array_python(t, nu_minus, nu_plus):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        out[i] = _raw_cdf(t[i], nu_minus, nu_plus)
    return out


def _raw_quantile_array_python(u, nu_minus, nu_plus):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = _raw_quantile(u[i], nu_minus, nu_plus)
    return out


_raw_logpdf_array = jit(_raw_logpdf_array_python)
_raw_cdf_array = jit(_raw_cdf_array_python)
_raw_quantile_array = jit(_raw_quantile_array_python)


def _apply(kernel, values, *args):
    arr = np.asarray(values, dtype=float)
    out = kernel(np.ascontiguousarray(arr.ravel()), *args).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# raw distribution


def raw_logpdf(x, p: SkewTParams):
    """Log density of the raw (unstandardized) law."""
    return _apply(_raw_logpdf_array, x, p.nu_minus, p.nu_plus, p.log_norm)


def raw_pdf(x, p: SkewTParams):
    """Density of the raw law; scalar in, scalar out."""
    return np.exp(raw_logpdf(x, p))


def raw_cdf(t, p: SkewTParams):
    """``I((1 + t/sqrt(nu + t**2))/2; nu_minus/2, nu_plus/2)``."""
    return _apply(_raw_cdf_array, t, p.nu_minus, p.nu_plus)


def raw_quantile(u, p: SkewTParams):
    """Inverse of :func:`raw_cdf` for ``0 < u < 1``."""
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 0.0) | ~(arr < 1.0)):
        raise DomainError("quantile level must lie strictly inside (0, 1)")
    return _apply(_raw_quantile_array, arr, p.nu_minus, p.nu_plus)


# --------------------------------------------------------------------------
# standardization


def _log_density_sinh(s: np.ndarray, p: SkewTParams) -> np.ndarray:
    # density of S where X = sqrt(nu) sinh(S); (1 +- tanh s) written via softplus
    log1p_tanh = _LOG2 - np.logaddexp(0.0, -2.0 * s)
    log1m_tanh = _LOG2 - np.logaddexp(0.0, 2.0 * s)
    abs_s = np.abs(s)
    log_cosh = abs_s + np.log1p(np.exp(-2.0 * abs_s)) - _LOG2
    return (
        0.5 * (p.nu_minus + 1.0) * log1p_tanh
        + 0.5 * (p.nu_plus + 1.0) * log1m_tanh
        + log_cosh
        + p.log_norm
        + 0.5 * math.log(p.nu)
    )


def _log_abs_dev(s: np.ndarray, center: float, p: SkewTParams) -> np.ndarray:
    """``log|sqrt(nu) sinh(s) - center|``, safe for very large ``|s|``."""
    root_nu = math.sqrt(p.nu)
    out = np.empty_like(s)
    small = np.abs(s) < 300.0
    with np.errstate(divide="ignore"):
        out[small] = np.log(np.abs(root_nu * np.sinh(s[small]) - center))
    out[~small] = math.log(root_nu) + np.abs(s[~small]) - _LOG2
    return out


@lru_cache(maxsize=4096)
def _standardize_cached(nu_minus: float, nu_plus: float) -> StandardizedSkewT:
    p = SkewTParams(nu_minus, nu_plus)
    rule = gauss_legendre(256)
    root_nu = math.sqrt(p.nu)

    def first_moment_half(y: np.ndarray) -> np.ndarray:
        # x(s) g(s) + x(-s) g(-s) folded onto s >= 0
        with np.errstate(over="ignore"):
            lp = _log_abs_dev(y, 0.0, p) + _log_density_sinh(y, p)
            lm = _log_abs_dev(-y, 0.0, p) + _log_density_sinh(-y, p)
            return np.exp(lp) - np.exp(lm)

    location = integrate(first_moment_half, rule, "half-line")
    s_center = math.asinh(location / root_nu)

    def lower(y: np.ndarray) -> np.ndarray:
        s = s_center - y
        return np.exp(2.0 * _log_abs_dev(s, location, p) + _log_density_sinh(s, p))

    def upper(y: np.ndarray) -> np.ndarray:
        s = s_center + y
        return np.exp(2.0 * _log_abs_dev(s, location, p) + _log_density_sinh(s, p))

    below = integrate(lower, rule, "half-line")
    above = integrate(upper, rule, "half-line")
    variance = below + above
    return StandardizedSkewT(
        params=p,
        location=location,
        scale=math.sqrt(variance),
        m2_minus=below / variance,
        m2_plus=above / variance,
    )


def standardize(p: SkewTParams) -> StandardizedSkewT:
    """
    Location, scale and truncated second moments of ``p``.

    Moments are computed by Gauss-Legendre quadrature after the substitution
    ``x = sqrt(nu) sinh(s)``, which turns both power-law tails into
    exponential ones. Results are cached by parameter value.

    Raises
    ------
    StandardizationError
        If either tail parameter is ``<= 2`` (infinite variance).
    """
    if p.nu_minus <= 2.0 or p.nu_plus <= 2.0:  # pragma: no cover - SkewTParams guards this
        raise StandardizationError("variance is infinite for nu <= 2")
    return _standardize_cached(p.nu_minus, p.nu_plus)


def std_logpdf(eps, s: StandardizedSkewT):
    """Log density of the standardized residual."""
    x = s.location + s.scale * np.asarray(eps, dtype=float)
    return np.log(s.scale) + raw_logpdf(x, s.params)


def std_pdf(eps, s: StandardizedSkewT):
    return np.exp(std_logpdf(eps, s))


def sample(s: StandardizedSkewT, rng: np.random.Generator, size=None):
    """
    Draw standardized residuals by inverse-CDF sampling.

    Parameters
    ----------
    s : StandardizedSkewT
    rng : numpy.random.Generator
        Explicit random stream; the same seed gives the same draws.
    size : int or tuple, optional
        Output shape; a float is returned when omitted.
    """
    u = rng.random(size)
    u = np.where(u > 0.0, u, np.nextafter(0.0, 1.0))
    x = raw_quantile(u, s.params)
    return (x - s.location) / s.scale
