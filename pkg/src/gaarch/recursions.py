"""
Hot loops of the volatility model.

Each ``*_python`` function is the reference implementation; the unsuffixed
name is the numba-compiled version (or the same function when
``GAARCH_DISABLE_NUMBA=1``). Simulation and filtering share ``_advance`` so a
simulated path and its filtered reconstruction are bit-identical.
"""

from __future__ import annotations

import math

import numpy as np

from gaarch._jit import jit
from gaarch.skewt import _raw_logpdf

__all__ = ["advance", "gaarch_filter", "gaarch_simulate", "step_chi"]

# 1 + chi below this means sigma_t < 1e-12 sigma0
CHI_FLOOR = 1e-24


def _step_chi_python(chi, eps, eta_minus, eta_plus, beta, m2_minus, m2_plus):
    one_c = 1.0 + chi
    persistence = m2_minus * eta_minus + m2_plus * eta_plus + beta
    sq = eps * eps
    if eps < 0.0:
        down = sq
        up = 0.0
    else:
        down = 0.0
        up = sq
    return (
        persistence * chi
        + eta_minus * one_c * (down - m2_minus)
        + eta_plus * one_c * (up - m2_plus)
    )


step_chi = jit(_step_chi_python)


def _advance_python(r, chi, alpha, gamma, sigma0):
    """Return (mu, sigma, eps) for one period given the return and state."""
    one_c = 1.0 + chi
    mu = alpha + gamma * (sigma0 * sigma0) * one_c
    sigma = sigma0 * math.sqrt(one_c)
    return mu, sigma, (r - mu) / sigma


advance = jit(_advance_python)


def _gaarch_filter_python(
    returns,
    alpha,
    gamma,
    sigma0,
    eta_minus,
    eta_plus,
    beta,
    m2_minus,
    m2_plus,
    location,
    scale,
    nu_minus,
    nu_plus,
    log_norm,
    mu,
    sigma,
    chi,
    eps,
):
    """
    Run the recursion over ``returns`` starting from chi = 0.

    Fills ``mu``, ``sigma``, ``chi``, ``eps`` in place. Returns
    ``(loglik, bad_index)`` where ``bad_index`` is -1 on success or the first
    period at which the conditional variance collapsed or overflowed.
    """
    n = returns.shape[0]
    log_scale = math.log(scale)
    c = 0.0
    loglik = 0.0
    for t in range(n):
        if not (1.0 + c > CHI_FLOOR):
            return loglik, t
        m, s, e = advance(returns[t], c, alpha, gamma, sigma0)
        mu[t] = m
        sigma[t] = s
        chi[t] = c
        eps[t] = e
        loglik += log_scale + _raw_logpdf(location + scale * e, nu_minus, nu_plus, log_norm) - math.log(s)
        c = step_chi(c, e, eta_minus, eta_plus, beta, m2_minus, m2_plus)
    return loglik, -1


gaarch_filter = jit(_gaarch_filter_python)


def _gaarch_simulate_python(
    draws,
    alpha,
    gamma,
    sigma0,
    eta_minus,
    eta_plus,
    beta,
    m2_minus,
    m2_plus,
    returns,
    mu,
    sigma,
    chi,
    eps,
):
    """
    Generate returns from standardized ``draws`` starting from chi = 0.

    The recorded residual is recomputed from the realized return exactly as
    the filter does, so that filtering the output reproduces every array.
    """
    n = draws.shape[0]
    c = 0.0
    for t in range(n):
        if not (1.0 + c > CHI_FLOOR):
            return t
        one_c = 1.0 + c
        m = alpha + gamma * (sigma0 * sigma0) * one_c
        s = sigma0 * math.sqrt(one_c)
        r = m + s * draws[t]
        m, s, e = advance(r, c, alpha, gamma, sigma0)
        returns[t] = r
        mu[t] = m
        sigma[t] = s
        chi[t] = c
        eps[t] = e
        c = step_chi(c, e, eta_minus, eta_plus, beta, m2_minus, m2_plus)
    return -1


gaarch_simulate = jit(_gaarch_simulate_python)


def empty_state(n: int):
    return np.empty(n), np.empty(n), np.empty(n), np.empty(n)
