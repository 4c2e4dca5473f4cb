"""
Maximum-likelihood estimation of the GAARCH(1,1) model.

The optimizer works in an unconstrained space. :class:`ParamTransform` maps a
real vector onto admissible parameters:

* ``alpha`` and ``Gamma = gamma * sigma0**2`` in units of the data scale,
* ``sigma0`` through ``exp``,
* the persistence ``P = beta + eta- m2- + eta+ m2+`` through a logistic map
  onto ``(0, PERSISTENCE_MAX)``, split across its three terms by a softmax,
* each tail parameter through a logistic map onto ``(NU_FLOOR, NU_CAP)``.

Nested models fix or tie some of these coordinates.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats

from gaarch.data import PARAM_KEYS, ReturnSeries, params_from_mapping
from gaarch.exceptions import GaarchError, InputError
from gaarch.model import GaarchParams, filter_returns
from gaarch.skewt import NU_CAP, NU_FLOOR, SkewTParams, standardize, std_logpdf

__all__ = [
    "FitConfig",
    "FitResult",
    "LrtResult",
    "NESTED_MODELS",
    "ParamTransform",
    "fit",
    "hessian",
    "lrt",
    "neg_loglik",
    "two_step_init",
]

logger = logging.getLogger(__name__)

PERSISTENCE_MAX = 0.999
NU_GRID = (3.0, 5.0, 8.0, 15.0, 50.0, 200.0)
NESTED_MODELS = ("full", "symmetric_tails", "gaussian", "no_vol_exposure")
RESTRICTION_DF = {"symmetric_tails": 1, "gaussian": 2, "no_vol_exposure": 1}

_PENALTY = 1e100
_SHARE_FLOOR = 1e-12
_NU_SNAP = 1e-3
_COEF_SNAP = 1e-4


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def _expit(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _nu_to_free(nu: float) -> float:
    # measured from the nearer end so that both ends round-trip exactly
    span = NU_CAP - NU_FLOOR
    if nu > 0.5 * (NU_CAP + NU_FLOOR):
        return -_logit(max((NU_CAP - nu) / span, 1e-300))
    return _logit(max((nu - NU_FLOOR) / span, 1e-300))


def _nu_from_free(x: float) -> float:
    span = NU_CAP - NU_FLOOR
    if x >= 0.0:
        return NU_CAP - span * _expit(-x)
    return NU_FLOOR + span * _expit(x)


# optimizer starts keep tail coordinates where the logistic map is not flat
_NU_START_BOUND = 6.0


def _clip_start(theta: np.ndarray, transform: "ParamTransform") -> np.ndarray:
    theta = np.array(theta, dtype=float)
    for name in ("nu_minus", "nu_plus", "nu"):
        if name in transform.names:
            i = transform.names.index(name)
            theta[i] = min(max(theta[i], -_NU_START_BOUND), _NU_START_BOUND)
    return theta


class ParamTransform:
    """
    Bijection between admissible :class:`GaarchParams` and ``R^k``.

    Parameters
    ----------
    scale : float
        Return scale (sample standard deviation of the data) used to make
        the location coordinates O(1).
    nested : str
        One of ``NESTED_MODELS``.
    """

    def __init__(self, scale: float = 1.0, nested: str = "full") -> None:
        if nested not in NESTED_MODELS:
            raise ValueError(f"unknown nested model {nested!r}; choose from {NESTED_MODELS}")
        if not scale > 0.0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        self.nested = nested
        names = ["alpha", "gamma_comp", "log_sigma0", "persistence", "share_minus", "share_plus"]
        if nested == "no_vol_exposure":
            names.remove("gamma_comp")
        if nested in ("full", "no_vol_exposure"):
            names += ["nu_minus", "nu_plus"]
        elif nested == "symmetric_tails":
            names += ["nu"]
        self.names = tuple(names)

    @property
    def size(self) -> int:
        return len(self.names)

    def constrain(self, theta: Sequence[float]) -> GaarchParams:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.size,):
            raise ValueError(f"expected {self.size} coordinates, got shape {theta.shape}")
        v = dict(zip(self.names, theta.tolist()))
        if self.nested == "gaussian":
            nu_m = nu_p = NU_CAP
        elif self.nested == "symmetric_tails":
            nu_m = nu_p = _nu_from_free(v["nu"])
        else:
            nu_m = _nu_from_free(v["nu_minus"])
            nu_p = _nu_from_free(v["nu_plus"])
        tails = SkewTParams(nu_m, nu_p)
        s = standardize(tails)
        sigma0 = self.scale * math.exp(v["log_sigma0"])
        conv = self.scale * v.get("gamma_comp", 0.0)
        pers = PERSISTENCE_MAX * _expit(v["persistence"])
        logits = np.array([v["share_minus"], v["share_plus"], 0.0])
        logits -= logits.max()
        w = np.exp(logits)
        w /= w.sum()
        return GaarchParams(
            alpha=self.scale * v["alpha"],
            gamma=conv / (sigma0 * sigma0),
            sigma0=sigma0,
            eta_minus=pers * w[0] / s.m2_minus,
            eta_plus=pers * w[1] / s.m2_plus,
            beta=pers * w[2],
            tails=tails,
        )

    def unconstrain(self, p: GaarchParams) -> np.ndarray:
        s = p.std
        parts = np.array([p.eta_minus * s.m2_minus, p.eta_plus * s.m2_plus, p.beta])
        pers = float(parts.sum())
        if pers >= PERSISTENCE_MAX:
            raise ValueError(f"persistence {pers} exceeds the transform limit {PERSISTENCE_MAX}")
        shares = np.maximum(parts / pers, _SHARE_FLOOR) if pers > 0.0 else np.full(3, 1.0 / 3.0)
        pers = max(pers, 1e-12)
        v = {
            "alpha": p.alpha / self.scale,
            "gamma_comp": p.convexity / self.scale,
            "log_sigma0": math.log(p.sigma0 / self.scale),
            "persistence": _logit(pers / PERSISTENCE_MAX),
            "share_minus": math.log(shares[0] / shares[2]),
            "share_plus": math.log(shares[1] / shares[2]),
            "nu_minus": _nu_to_free(p.tails.nu_minus),
            "nu_plus": _nu_to_free(p.tails.nu_plus),
            "nu": _nu_to_free(0.5 * (p.tails.nu_minus + p.tails.nu_plus)),
        }
        return np.array([v[name] for name in self.names])

    def natural(self, theta: Sequence[float]) -> np.ndarray:
        """Natural-parameter vector ordered as ``PARAM_KEYS``."""
        d = self.constrain(theta).to_dict()
        return np.array([d[k] for k in PARAM_KEYS])

    def fixed_keys(self) -> tuple[str, ...]:
        """Natural parameters pinned by the nested restriction."""
        if self.nested == "gaussian":
            return ("nu_minus", "nu_plus")
        if self.nested == "no_vol_exposure":
            return ("gamma",)
        return ()


def _series_returns(data) -> np.ndarray:
    if isinstance(data, ReturnSeries):
        return data.returns
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 1:
        raise InputError("returns must be one-dimensional")
    return arr


def _data_scale(r: np.ndarray) -> float:
    scale = float(np.std(r, ddof=1))
    if np.ptp(r) == 0.0 or not scale > 0.0:
        raise InputError("returns have zero variance")
    return scale


def neg_loglik(theta, data, transform: ParamTransform | None = None) -> float:
    """
    Negative log-likelihood at unconstrained ``theta``.

    Uses the full model with the data standard deviation as scale unless a
    ``transform`` is given. Inadmissible or numerically broken points return
    a large finite penalty, so the result is finite for every finite theta.
    """
    r = _series_returns(data)
    if transform is None:
        transform = ParamTransform(_data_scale(r))
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        return _PENALTY
    try:
        with np.errstate(all="ignore"):
            params = transform.constrain(theta)
            ll = filter_returns(params, r).loglik
    except (GaarchError, ValueError, OverflowError, ZeroDivisionError):
        return _PENALTY
    if not math.isfinite(ll):
        return _PENALTY
    return -ll


# --------------------------------------------------------------------------
# initialization


def initial_params(data) -> GaarchParams:
    """
    Two-step starting point.

    Constant-mean model with variance targeting, then tail parameters chosen
    by profile likelihood of the standardized residuals over ``NU_GRID``.
    """
    r = _series_returns(data)
    if r.size < 2 or not np.all(np.isfinite(r)):
        raise InputError("need at least two finite returns")
    mean = float(np.mean(r))
    sd = _data_scale(r)
    z = (r - mean) / sd
    best = None
    for nu_m in NU_GRID:
        for nu_p in NU_GRID:
            s = standardize(SkewTParams(nu_m, nu_p))
            ll = float(np.sum(std_logpdf(z, s)))
            if best is None or ll > best[0]:
                best = (ll, nu_m, nu_p)
    _, nu_m, nu_p = best
    return GaarchParams(
        alpha=mean,
        gamma=0.0,
        sigma0=sd,
        eta_minus=0.1,
        eta_plus=0.1,
        beta=0.7,
        tails=SkewTParams(nu_m, nu_p),
    )


def two_step_init(data, transform: ParamTransform | None = None) -> np.ndarray:
    """Unconstrained starting vector from :func:`initial_params`."""
    r = _series_returns(data)
    if transform is None:
        transform = ParamTransform(_data_scale(r))
    return transform.unconstrain(_project(initial_params(r), transform.nested))


def _project(p: GaarchParams, nested: str) -> GaarchParams:
    if nested == "gaussian":
        return p.replace(nu_minus=NU_CAP, nu_plus=NU_CAP)
    if nested == "symmetric_tails":
        nu = 0.5 * (p.tails.nu_minus + p.tails.nu_plus)
        return p.replace(nu_minus=nu, nu_plus=nu)
    if nested == "no_vol_exposure":
        return p.replace(gamma=0.0)
    return p


def _default_start(r: np.ndarray, nested: str) -> GaarchParams:
    p = GaarchParams(
        alpha=float(np.mean(r)),
        gamma=0.0,
        sigma0=_data_scale(r),
        eta_minus=0.1,
        eta_plus=0.1,
        beta=0.7,
        tails=SkewTParams(8.0, 8.0),
    )
    return _project(p, nested)


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class FitConfig:
    """
    Estimation settings.

    ``tolerance`` is the log-likelihood change below which a simplex restart
    counts as converged. ``se_method`` is ``"hessian"`` (observed
    information, delta method) or ``"bootstrap"`` (moving blocks).
    """

    max_iterations: int = 4000
    tolerance: float = 1e-6
    n_multistarts: int = 5
    two_step_init: bool = True
    nested_model: str = "full"
    seed: int = 0
    max_restarts: int = 6
    jitter: float = 0.5
    se_method: str = "hessian"
    bootstrap_replicates: int = 200
    block_length: int = 6

    def __post_init__(self) -> None:
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.n_multistarts < 1:
            raise ValueError("n_multistarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.nested_model not in NESTED_MODELS:
            raise ValueError(f"nested_model must be one of {NESTED_MODELS}")
        if self.se_method not in ("hessian", "bootstrap"):
            raise ValueError("se_method must be 'hessian' or 'bootstrap'")

    def replace(self, **changes) -> "FitConfig":
        d = asdict(self)
        d.update(changes)
        return FitConfig(**d)


@dataclass(frozen=True)
class FitResult:
    """
    Outcome of :func:`fit`.

    ``std_errors`` and ``t_stats`` map parameter names to floats, or ``None``
    where unavailable (boundary or fixed parameters, or a Hessian that is
    not positive definite). ``history`` holds the best-so-far objective per
    optimizer iteration and is not persisted.
    """

    params: GaarchParams
    loglik: float
    std_errors: dict
    t_stats: dict
    converged: bool
    n_obs: int
    boundary_flags: dict
    label: str = ""
    nested_model: str = "full"
    hessian_ok: bool = True
    n_evals: int = 0
    config: FitConfig = field(default_factory=FitConfig)
    history: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        out: dict = {"label": self.label}
        out.update(self.params.to_dict())
        out["estimation"] = {
            "loglik": self.loglik,
            "n_obs": self.n_obs,
            "converged": self.converged,
            "nested_model": self.nested_model,
            "hessian_ok": self.hessian_ok,
            "n_evals": self.n_evals,
            "std_errors": dict(self.std_errors),
            "t_stats": dict(self.t_stats),
            "boundary_flags": dict(self.boundary_flags),
            "config": asdict(self.config),
        }
        return out

    @classmethod
    def from_dict(cls, obj: dict, source: str = "<mapping>") -> "FitResult":
        est = obj["estimation"]
        try:
            return cls(
                params=params_from_mapping(obj, source),
                loglik=float(est["loglik"]),
                std_errors={k: (None if v is None else float(v)) for k, v in est["std_errors"].items()},
                t_stats={k: (None if v is None else float(v)) for k, v in est["t_stats"].items()},
                converged=bool(est["converged"]),
                n_obs=int(est["n_obs"]),
                boundary_flags={k: bool(v) for k, v in est["boundary_flags"].items()},
                label=str(obj.get("label", "")),
                nested_model=str(est.get("nested_model", "full")),
                hessian_ok=bool(est.get("hessian_ok", True)),
                n_evals=int(est.get("n_evals", 0)),
                config=FitConfig(**est.get("config", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            from gaarch.exceptions import SchemaError

            raise SchemaError(f"{source}: malformed estimation block ({exc})") from None


@dataclass(frozen=True)
class LrtResult:
    """Likelihood-ratio test of a nested restriction."""

    statistic: float
    df: int
    p_value: float
    restriction: str = ""
    loglik_full: float = math.nan
    loglik_restricted: float = math.nan


# --------------------------------------------------------------------------
# optimization


class _Objective:
    """Counts evaluations and tracks the best value seen."""

    def __init__(self, r: np.ndarray, transform: ParamTransform) -> None:
        self.r = r
        self.transform = transform
        self.n_evals = 0
        self.best = math.inf
        self.history: list[float] = []

    def __call__(self, theta) -> float:
        self.n_evals += 1
        value = neg_loglik(theta, self.r, self.transform)
        if value < self.best:
            self.best = value
        return value


def _simplex(obj: _Objective, theta0: np.ndarray, config: FitConfig) -> tuple[np.ndarray, float, bool]:
    """Nelder-Mead with restarts until a restart gains less than ``tolerance``."""
    theta = np.asarray(theta0, dtype=float)
    value = obj(theta)
    converged = False

    def record(intermediate_result) -> None:
        obj.history.append(min(obj.history[-1], intermediate_result.fun) if obj.history else intermediate_result.fun)

    for _ in range(config.max_restarts):
        res = optimize.minimize(
            obj,
            theta,
            method="Nelder-Mead",
            callback=record,
            options={
                "maxiter": config.max_iterations,
                "maxfev": 2 * config.max_iterations,
                "xatol": 1e-6,
                "fatol": 0.1 * config.tolerance,
                "adaptive": theta.size > 4,
            },
        )
        gain = value - res.fun
        if res.fun <= value:
            theta, value = np.asarray(res.x, dtype=float), float(res.fun)
        if gain < config.tolerance and res.success:
            converged = True
            break
    return theta, value, converged


def hessian(f, x: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    """
    Central finite-difference Hessian of ``f`` at ``x``.

    Steps are ``rel_step * max(|x_i|, 1)`` per coordinate.
    """
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 1.0)
    f0 = f(x)
    H = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h[i] * h[i])
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def _jacobian(g, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g0 = np.asarray(g(x))
    J = np.empty((g0.size, x.size))
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1.0)
        e = np.zeros(x.size)
        e[i] = h
        J[:, i] = (np.asarray(g(x + e)) - np.asarray(g(x - e))) / (2.0 * h)
    return J


def _snap(params: GaarchParams, transform: ParamTransform) -> tuple[GaarchParams, dict]:
    """Pin estimates sitting on a constraint and flag them."""
    d = params.to_dict()
    flags = {k: False for k in PARAM_KEYS}
    for key in ("nu_minus", "nu_plus"):
        if d[key] >= NU_CAP - _NU_SNAP:
            d[key] = NU_CAP
            flags[key] = True
        elif d[key] <= NU_FLOOR + _NU_SNAP:
            flags[key] = True
    for key in ("eta_minus", "eta_plus", "beta"):
        if d[key] < _COEF_SNAP:
            d[key] = 0.0
            flags[key] = True
    for key in transform.fixed_keys():
        flags[key] = False
    return GaarchParams.from_dict(d), flags


def _free_boundary_coords(transform: ParamTransform, flags: dict) -> list[int]:
    """Indices of unconstrained coordinates that are not pinned at a boundary."""
    blocked = set()
    names = transform.names
    if flags.get("nu_minus") and "nu_minus" in names:
        blocked.add(names.index("nu_minus"))
    if flags.get("nu_plus") and "nu_plus" in names:
        blocked.add(names.index("nu_plus"))
    if "nu" in names and (flags.get("nu_minus") or flags.get("nu_plus")):
        blocked.add(names.index("nu"))
    if flags.get("eta_minus"):
        blocked.add(names.index("share_minus"))
    if flags.get("eta_plus"):
        blocked.add(names.index("share_plus"))
    return [i for i in range(transform.size) if i not in blocked]


def _hessian_errors(
    obj: _Objective, theta: np.ndarray, transform: ParamTransform, flags: dict
) -> tuple[dict, bool]:
    free = _free_boundary_coords(transform, flags)
    theta = np.asarray(theta, dtype=float)

    def sub(x):
        full = theta.copy()
        full[free] = x
        return full

    H = hessian(lambda x: obj(sub(x)), theta[free])
    errors = {k: None for k in PARAM_KEYS}
    try:
        np.linalg.cholesky(H)
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        return errors, False
    J = _jacobian(lambda x: transform.natural(sub(x)), theta[free])
    cov_nat = J @ cov @ J.T
    var = np.diag(cov_nat)
    for i, key in enumerate(PARAM_KEYS):
        if flags[key] or key in transform.fixed_keys() or not var[i] > 0.0:
            continue
        errors[key] = float(math.sqrt(var[i]))
    return errors, True


def _block_bootstrap_errors(
    r: np.ndarray, params: GaarchParams, config: FitConfig, flags: dict, transform: ParamTransform
) -> dict:
    rng = np.random.default_rng(config.seed + 7919)
    n = r.size
    L = config.block_length
    n_blocks = -(-n // L)
    inner = config.replace(n_multistarts=1, se_method="hessian", two_step_init=False)
    draws = []
    for _ in range(config.bootstrap_replicates):
        starts = rng.integers(0, n - L + 1, n_blocks)
        sample = np.concatenate([r[s : s + L] for s in starts])[:n]
        boot_t = ParamTransform(_data_scale(sample), transform.nested)
        obj = _Objective(sample, boot_t)
        theta, _, _ = _simplex(obj, _clip_start(boot_t.unconstrain(params), boot_t), inner)
        draws.append(boot_t.natural(theta))
    draws = np.array(draws)
    sd = draws.std(axis=0, ddof=1)
    errors = {}
    for i, key in enumerate(PARAM_KEYS):
        if flags[key] or key in transform.fixed_keys() or not sd[i] > 0.0:
            errors[key] = None
        else:
            errors[key] = float(sd[i])
    return errors


def fit(
    data,
    config: FitConfig | None = None,
    extra_starts: Sequence[GaarchParams] = (),
) -> FitResult:
    """
    Joint maximum-likelihood fit of all model parameters.

    Nelder-Mead is run from the two-step initializer and from
    ``n_multistarts - 1`` seeded jitters of it (plus any ``extra_starts``);
    the best point wins, ties going to the earlier start.

    Raises
    ------
    InputError
        Fewer than 60 observations, non-finite values, or zero variance.
    """
    config = config or FitConfig()
    if isinstance(data, ReturnSeries):
        r, label = data.returns, data.label
    else:
        r, label = np.asarray(data, dtype=float), ""
    if r.ndim != 1 or r.size < 60:
        raise InputError(f"need at least 60 observations, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise InputError("returns contain non-finite values")
    if r.size < 100:
        warnings.warn(f"only {r.size} observations; estimates will be noisy", stacklevel=2)
    r = np.ascontiguousarray(r)
    transform = ParamTransform(_data_scale(r), config.nested_model)
    obj = _Objective(r, transform)

    if config.two_step_init:
        theta0 = two_step_init(r, transform)
    else:
        theta0 = transform.unconstrain(_default_start(r, config.nested_model))
    theta0 = _clip_start(theta0, transform)
    rng = np.random.default_rng(config.seed)
    starts = [theta0]
    for _ in range(config.n_multistarts - 1):
        starts.append(_clip_start(theta0 + config.jitter * rng.standard_normal(theta0.size), transform))
    for p in extra_starts:
        starts.append(transform.unconstrain(_project(p, config.nested_model)))

    best = None
    for i, start in enumerate(starts):
        theta, value, converged = _simplex(obj, start, config)
        logger.debug("start %d: neg loglik %.6f converged=%s", i, value, converged)
        if best is None or value < best[1]:
            best = (theta, value, converged)
    theta, _, converged = best

    params, flags = _snap(transform.constrain(theta), transform)
    loglik = filter_returns(params, r).loglik

    if config.se_method == "bootstrap":
        errors = _block_bootstrap_errors(r, params, config, flags, transform)
        hessian_ok = True
    else:
        errors, hessian_ok = _hessian_errors(obj, theta, transform, flags)
    values = params.to_dict()
    t_stats = {
        k: (values[k] / errors[k] if errors[k] is not None else None) for k in PARAM_KEYS
    }
    return FitResult(
        params=params,
        loglik=loglik,
        std_errors=errors,
        t_stats=t_stats,
        converged=converged,
        n_obs=int(r.size),
        boundary_flags=flags,
        label=label,
        nested_model=config.nested_model,
        hessian_ok=hessian_ok,
        n_evals=obj.n_evals,
        config=config,
        history=tuple(obj.history),
    )


def lrt(data, restricted: str, config: FitConfig | None = None) -> LrtResult:
    """
    Likelihood-ratio test of a nested restriction against the full model.

    The restricted optimum is added as a start of the full fit, so the
    statistic cannot go negative beyond optimizer noise.
    """
    if restricted not in RESTRICTION_DF:
        raise ValueError(f"restriction must be one of {tuple(RESTRICTION_DF)}")
    config = config or FitConfig()
    res_r = fit(data, config.replace(nested_model=restricted))
    res_f = fit(data, config.replace(nested_model="full"), extra_starts=[res_r.params])
    stat = 2.0 * (res_f.loglik - res_r.loglik)
    df = RESTRICTION_DF[restricted]
    return LrtResult(
        statistic=stat,
        df=df,
        p_value=float(stats.chi2.sf(max(stat, 0.0), df)),
        restriction=restricted,
        loglik_full=res_f.loglik,
        loglik_restricted=res_r.loglik,
    )
