"""
GAARCH(1,1): asymmetric conditional variance with a variance-linked mean.

    r_t      = mu_t + sigma_t eps_t
    mu_t     = alpha + gamma sigma_t^2 = alpha + Gamma + Gamma chi_t
    sigma_t  = sigma0 sqrt(1 + chi_t)
    chi_t+1  = P chi_t + eta-(1 + chi_t)(eps_t^2 1[eps_t < 0] - m2-)
                       + eta+(1 + chi_t)(eps_t^2 1[eps_t >= 0] - m2+)

with ``Gamma = gamma sigma0^2`` the convexity compensation and
``P = beta + eta- m2- + eta+ m2+`` the persistence of the excess variance
``chi``. Residuals follow the standardized Jones-Faddy law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gaarch import recursions
from gaarch.data import ReturnSeries, month_range
from gaarch.exceptions import DomainError, InputError, NumericError, StationarityError
from gaarch.skewt import SkewTParams, StandardizedSkewT, sample, standardize, std_logpdf

__all__ = [
    "Attribution",
    "FilterOutput",
    "GaarchParams",
    "attribute",
    "cond_mean",
    "filter_returns",
    "simulate",
    "step_chi",
]


@dataclass(frozen=True)
class GaarchParams:
    """
    Model parameters in monthly decimal units.

    Attributes
    ----------
    alpha : float
        True alpha per month.
    gamma : float
        Volatility exposure of the conditional mean (1/variance units).
    sigma0 : float
        Unconditional monthly volatility.
    eta_minus, eta_plus : float
        Downside and upside ARCH coefficients.
    beta : float
        GARCH coefficient.
    tails : SkewTParams
        Residual tail parameters.
    """

    alpha: float
    gamma: float
    sigma0: float
    eta_minus: float
    eta_plus: float
    beta: float
    tails: SkewTParams

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma", "sigma0", "eta_minus", "eta_plus", "beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not self.sigma0 > 0.0:
            raise DomainError(f"sigma0 must be > 0, got {self.sigma0}")
        for name in ("eta_minus", "eta_plus", "beta"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")
        pers = self.persistence
        if not pers < 1.0:
            raise StationarityError(
                f"persistence beta + eta_minus*m2_minus + eta_plus*m2_plus = {pers:.6g} >= 1 "
                "(non-stationary variance)"
            )

    @property
    def std(self) -> StandardizedSkewT:
        return standardize(self.tails)

    @property
    def persistence(self) -> float:
        s = self.std
        return self.beta + self.eta_minus * s.m2_minus + self.eta_plus * s.m2_plus

    @property
    def convexity(self) -> float:
        """Monthly convexity compensation ``Gamma = gamma * sigma0**2``."""
        return self.gamma * self.sigma0 * self.sigma0

    def replace(self, **changes) -> "GaarchParams":
        values = self.to_dict()
        values.update(changes)
        return GaarchParams.from_dict(values)

    def to_dict(self) -> dict[str, float]:
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "sigma0": self.sigma0,
            "eta_minus": self.eta_minus,
            "eta_plus": self.eta_plus,
            "beta": self.beta,
            "nu_minus": self.tails.nu_minus,
            "nu_plus": self.tails.nu_plus,
        }

    @classmethod
    def from_dict(cls, d) -> "GaarchParams":
        return cls(
            alpha=d["alpha"],
            gamma=d["gamma"],
            sigma0=d["sigma0"],
            eta_minus=d["eta_minus"],
            eta_plus=d["eta_plus"],
            beta=d["beta"],
            tails=SkewTParams(d["nu_minus"], d["nu_plus"]),
        )

    @classmethod
    def from_annualized(
        cls,
        alpha: float,
        gamma_comp: float,
        sigma0: float,
        eta_minus: float,
        eta_plus: float,
        beta: float,
        nu_minus: float,
        nu_plus: float,
        periods_per_year: int = 12,
    ) -> "GaarchParams":
        """
        Build from annualized percentage figures as reported in tables.

        ``alpha`` and ``gamma_comp`` (Gamma) are annual % means, ``sigma0``
        is annual % volatility; the monthly gamma is ``Gamma / sigma0**2``.
        """
        alpha_m = alpha / 100.0 / periods_per_year
        conv_m = gamma_comp / 100.0 / periods_per_year
        sigma0_m = sigma0 / 100.0 / math.sqrt(periods_per_year)
        return cls(
            alpha=alpha_m,
            gamma=conv_m / (sigma0_m * sigma0_m),
            sigma0=sigma0_m,
            eta_minus=eta_minus,
            eta_plus=eta_plus,
            beta=beta,
            tails=SkewTParams(nu_minus, nu_plus),
        )


@dataclass(frozen=True)
class Attribution:
    """Expected-return attribution in annualized percentage points."""

    alpha_true: float
    gamma_comp: float
    alpha_risk_adj: float
    gamma_raw: float
    sigma0: float


@dataclass(frozen=True, eq=False)
class FilterOutput:
    """Per-period conditional moments and residuals; ``chi[0] == 0``."""

    mu: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    chi: np.ndarray = field(repr=False)
    eps: np.ndarray = field(repr=False)
    loglik: float

    def __len__(self) -> int:
        return self.mu.size


def cond_mean(params: GaarchParams, chi_next: float) -> float:
    """``alpha + gamma * sigma0**2 * (1 + chi)``, the next period's expected return."""
    if not chi_next > -1.0:
        raise DomainError(f"excess variance must exceed -1, got {chi_next}")
    return params.alpha + params.gamma * (params.sigma0 * params.sigma0) * (1.0 + chi_next)


def step_chi(params: GaarchParams, std: StandardizedSkewT, chi_t: float, eps_t: float) -> float:
    """Advance the excess-variance state by one period."""
    if not chi_t > -1.0:
        raise DomainError(f"excess variance must exceed -1, got {chi_t}")
    out = recursions.step_chi(
        chi_t, eps_t, params.eta_minus, params.eta_plus, params.beta, std.m2_minus, std.m2_plus
    )
    assert out > -1.0, "excess variance left (-1, inf) under valid parameters"
    return out


def _returns_array(returns) -> np.ndarray:
    if isinstance(returns, ReturnSeries):
        return returns.returns
    arr = np.ascontiguousarray(returns, dtype=float)
    if arr.ndim != 1:
        raise InputError("returns must be one-dimensional")
    return arr


def filter_returns(params: GaarchParams, returns) -> FilterOutput:
    """
    Run the recursion over observed returns, starting at ``chi = 0``.

    The log-likelihood is ``sum_t [log f(eps_t) - log sigma_t]`` with ``f``
    the standardized residual density.

    Parameters
    ----------
    params : GaarchParams
    returns : ReturnSeries or array_like
        At least two finite returns.
    """
    r = _returns_array(returns)
    if r.size < 2:
        raise InputError("need at least two returns to filter")
    if not np.all(np.isfinite(r)):
        raise InputError("returns contain non-finite values")
    s = params.std
    mu, sigma, chi, eps = recursions.empty_state(r.size)
    loglik, bad = recursions.gaarch_filter(
        r,
        params.alpha,
        params.gamma,
        params.sigma0,
        params.eta_minus,
        params.eta_plus,
        params.beta,
        s.m2_minus,
        s.m2_plus,
        s.location,
        s.scale,
        s.params.nu_minus,
        s.params.nu_plus,
        s.log_norm,
        mu,
        sigma,
        chi,
        eps,
    )
    if bad >= 0:
        raise NumericError(f"conditional variance left (0, inf) at period {bad} (collapse or overflow)")
    return FilterOutput(mu, sigma, chi, eps, float(loglik))


def simulate(
    params: GaarchParams,
    n_periods: int,
    rng: np.random.Generator,
    start: str = "2000-01",
    label: str = "simulated",
) -> tuple[ReturnSeries, FilterOutput]:
    """
    Simulate ``n_periods`` months forward from ``chi = 0``.

    Returns the series and the realized internal state; ``loglik`` of the
    state is that of the simulated path under ``params``.
    """
    n_periods = int(n_periods)
    if n_periods < 1:
        raise DomainError("n_periods must be >= 1")
    s = params.std
    draws = np.ascontiguousarray(sample(s, rng, n_periods), dtype=float)
    returns = np.empty(n_periods)
    mu, sigma, chi, eps = recursions.empty_state(n_periods)
    bad = recursions.gaarch_simulate(
        draws,
        params.alpha,
        params.gamma,
        params.sigma0,
        params.eta_minus,
        params.eta_plus,
        params.beta,
        s.m2_minus,
        s.m2_plus,
        returns,
        mu,
        sigma,
        chi,
        eps,
    )
    if bad >= 0:
        raise NumericError(f"conditional variance left (0, inf) at period {bad} (collapse or overflow)")
    loglik = float(np.sum(std_logpdf(eps, s) - np.log(sigma)))
    series = ReturnSeries(label, month_range(start, n_periods), returns, check_floor=False)
    return series, FilterOutput(mu, sigma, chi, eps, loglik)


def attribute(params: GaarchParams, periods_per_year: int = 12) -> Attribution:
    """
    Annualized attribution of expected returns.

    Means scale by ``periods_per_year`` and volatility by its square root,
    both in percent, so ``alpha_risk_adj = alpha_true + gamma_comp``.
    """
    alpha_true = 100.0 * periods_per_year * params.alpha
    gamma_comp = 100.0 * periods_per_year * params.convexity
    return Attribution(
        alpha_true=alpha_true,
        gamma_comp=gamma_comp,
        alpha_risk_adj=alpha_true + gamma_comp,
        gamma_raw=params.gamma,
        sigma0=100.0 * math.sqrt(periods_per_year) * params.sigma0,
    )
