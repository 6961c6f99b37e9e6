"""Annual-maximum flood frequency: GEV distribution and Bayesian estimation.

The annual maximum water level H is modeled as GEV(mu, sigma, xi) with
CDF exp{-[1 + xi (h - mu) / sigma]^(-1/xi)}, reducing to the Gumbel form
exp{-exp[-(h - mu) / sigma]} as xi -> 0. Parameters are estimated with an
adaptive random-walk Metropolis sampler under independent zero-centered
Gaussian priors.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

_XI_TINY = 1e-8


class McmcDiagnosticError(RuntimeError):
    """Raised when the sampler ends up outside a usable acceptance regime."""


@dataclass(frozen=True)
class GevParams:
    """Location (ft), scale (ft), and shape of an annual-maximum GEV."""

    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.xi):
            raise ValueError("xi must be finite")


@dataclass(frozen=True)
class PriorSpec:
    """Zero-mean Gaussian prior standard deviations for (mu, sigma, xi)."""

    sd_mu: float = 31.62
    sd_sigma: float = 10.0
    sd_xi: float = 1.0

    def __post_init__(self):
        if min(self.sd_mu, self.sd_sigma, self.sd_xi) <= 0:
            raise ValueError("prior standard deviations must be positive")


def gev_cdf(p: GevParams, h):
    """P(annual maximum <= h). Accepts a scalar or array of levels."""
    return _cdf_arr(p.mu, p.sigma, p.xi, h)


def _cdf_arr(mu, sigma, xi, h):
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    xi = np.asarray(xi, dtype=float)
    h = np.asarray(h, dtype=float)
    z, xib = np.broadcast_arrays((h - mu) / sigma, xi)
    scalar = z.ndim == 0
    z, xib = np.atleast_1d(z), np.atleast_1d(xib)
    out = np.empty(z.shape, dtype=float)
    gumbel = np.abs(xib) < _XI_TINY
    if np.any(gumbel):
        out[gumbel] = np.exp(-np.exp(-z[gumbel]))
    rest = ~gumbel
    if np.any(rest):
        zb, xb = z[rest], xib[rest]
        t = 1.0 + xb * zb
        good = t > 0
        val = np.empty_like(zb)
        with np.errstate(over="ignore"):
            val[good] = np.exp(-np.power(t[good], -1.0 / xb[good]))
        # outside the support: below the lower bound (xi>0) -> 0,
        # above the upper bound (xi<0) -> 1
        val[~good] = np.where(xb[~good] > 0, 0.0, 1.0)
        out[rest] = val
    if scalar:
        return float(out[0])
    return out


def gev_quantile(p: GevParams, q):
    """Level with non-exceedance probability q; inverse of :func:`gev_cdf`."""
    return _quantile_arr(p.mu, p.sigma, p.xi, q)


def _quantile_arr(mu, sigma, xi, q):
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0) or np.any(q >= 1):
        raise ValueError("quantile probability must lie strictly in (0, 1)")
    mu, sigma, xi = np.broadcast_arrays(
        np.asarray(mu, float), np.asarray(sigma, float), np.asarray(xi, float)
    )
    logq = -np.log(q)  # -ln q > 0
    gumbel = np.abs(xi) < _XI_TINY
    xi_safe = np.where(gumbel, 1.0, xi)
    out = np.where(
        gumbel,
        mu - sigma * np.log(logq),
        mu + sigma / xi_safe * (np.power(logq, -xi_safe) - 1.0),
    )
    if out.ndim == 0:
        return float(out)
    return out


def gev_logpdf(p: GevParams, h):
    """Log density of the GEV at h; -inf outside the support."""
    h = np.asarray(h, dtype=float)
    z = (h - p.mu) / p.sigma
    if abs(p.xi) < _XI_TINY:
        out = -math.log(p.sigma) - z - np.exp(-z)
    else:
        t = 1.0 + p.xi * z
        out = np.full(z.shape, -np.inf)
        good = t > 0
        tg = t[good]
        out[good] = (
            -math.log(p.sigma)
            - (1.0 + 1.0 / p.xi) * np.log(tg)
            - np.power(tg, -1.0 / p.xi)
        )
    if out.ndim == 0:
        return float(out)
    return out


def log_posterior(p: GevParams, data, priors: PriorSpec) -> float:
    """Log posterior density (up to the evidence) for annual maxima ``data``.

    Returns -inf when sigma <= 0 or any observation falls outside the GEV
    support, which encodes infeasibility for the sampler.
    """
    levels = np.asarray(getattr(data, "levels", data), dtype=float)
    if levels.size == 0:
        raise ValueError("annual maxima data must be non-empty")
    if p.sigma <= 0:
        return -np.inf
    ll = gev_logpdf(p, levels)
    total = float(np.sum(ll))
    if not np.isfinite(total):
        return -np.inf
    lp = (
        -0.5 * (p.mu / priors.sd_mu) ** 2 - math.log(priors.sd_mu * math.sqrt(2 * math.pi))
        - 0.5 * (p.sigma / priors.sd_sigma) ** 2 - math.log(priors.sd_sigma * math.sqrt(2 * math.pi))
        - 0.5 * (p.xi / priors.sd_xi) ** 2 - math.log(priors.sd_xi * math.sqrt(2 * math.pi))
    )
    return total + lp


@dataclass
class GevPosterior:
    """MCMC ensemble of GEV parameters with per-sample log posterior."""

    mu: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    log_post: np.ndarray
    acceptance_rate: float
    burn_in: int
    seed: int
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.mu.size

    def params_at(self, i: int) -> GevParams:
        return GevParams(float(self.mu[i]), float(self.sigma[i]), float(self.xi[i]))

    def save(self, csv_path, meta_path=None):
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mu", "sigma", "xi", "log_posterior"])
            for i in range(len(self)):
                w.writerow([repr(float(self.mu[i])), repr(float(self.sigma[i])),
                            repr(float(self.xi[i])), repr(float(self.log_post[i]))])
        if meta_path is not None:
            payload = {
                "seed": self.seed,
                "acceptance_rate": self.acceptance_rate,
                "burn_in": self.burn_in,
                "n_samples": len(self),
            }
            payload.update(self.meta)
            with open(meta_path, "w") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")

    @classmethod
    def load(cls, csv_path, meta_path=None) -> "GevPosterior":
        cols = {"mu": [], "sigma": [], "xi": [], "log_posterior": []}
        with open(csv_path, newline="") as fh:
            for row in csv.DictReader(fh):
                for k in cols:
                    cols[k].append(float(row[k]))
        meta = {}
        if meta_path is not None:
            with open(meta_path) as fh:
                meta = json.load(fh)
        return cls(
            mu=np.array(cols["mu"]),
            sigma=np.array(cols["sigma"]),
            xi=np.array(cols["xi"]),
            log_post=np.array(cols["log_posterior"]),
            acceptance_rate=float(meta.get("acceptance_rate", float("nan"))),
            burn_in=int(meta.get("burn_in", 0)),
            seed=int(meta.get("seed", 0)),
            meta={k: v for k, v in meta.items()
                  if k not in {"seed", "acceptance_rate", "burn_in", "n_samples"}},
        )


@dataclass(frozen=True)
class McmcConfig:
    n_samples: int = 50_000
    burn_in: int = 10_000
    init: tuple[float, float, float] = (5.0, 1.0, 0.1)
    seed: int = 0
    adapt_every: int = 250


def _geweke_z(x: np.ndarray, first: float = 0.1, last: float = 0.5) -> float:
    n = x.size
    a = x[: max(2, int(first * n))]
    b = x[-max(2, int(last * n)):]
    denom = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    if denom == 0:
        return 0.0
    return float((a.mean() - b.mean()) / denom)


def mcmc_sample(data, priors: PriorSpec, config: McmcConfig) -> GevPosterior:
    """Adaptive random-walk Metropolis sampling of the GEV posterior.

    The walk operates on (mu, ln sigma, xi) with a Jacobian correction, so
    the recorded chain targets the posterior over (mu, sigma, xi) itself.
    The proposal covariance adapts during burn-in and is frozen afterwards;
    runs are bit-reproducible for a fixed seed.
    """
    levels = np.asarray(getattr(data, "levels", data), dtype=float)
    if levels.size < 20:
        warnings.warn(
            f"only {levels.size} annual maxima; posterior will be diffuse",
            stacklevel=2,
        )

    def transformed_logpost(theta):
        mu, log_sigma, xi = theta
        sigma = math.exp(log_sigma)
        try:
            p = GevParams(mu, sigma, xi)
        except ValueError:
            return -np.inf, -np.inf
        lp = log_posterior(p, levels, priors)
        return lp + log_sigma, lp  # Jacobian of sigma = exp(log_sigma)

    rng = np.random.default_rng(config.seed)
    mu0, sigma0, xi0 = config.init
    theta = np.array([mu0, math.log(sigma0), xi0])
    target, lp = transformed_logpost(theta)

    data_sd = float(np.std(levels)) or 1.0
    cov = np.diag([(0.2 * data_sd) ** 2, 0.05 ** 2, 0.05 ** 2])
    chol = np.linalg.cholesky(cov)
    scale = 1.0

    total = config.burn_in + config.n_samples
    history = np.empty((total, 3))
    out_mu = np.empty(config.n_samples)
    out_sigma = np.empty(config.n_samples)
    out_xi = np.empty(config.n_samples)
    out_lp = np.empty(config.n_samples)
    accepted_post = 0
    accepted_win = 0

    for it in range(total):
        step = scale * (chol @ rng.standard_normal(3))
        prop = theta + step
        prop_target, prop_lp = transformed_logpost(prop)
        if prop_target - target > math.log(rng.random()):
            theta, target, lp = prop, prop_target, prop_lp
            accepted_win += 1
            if it >= config.burn_in:
                accepted_post += 1
        history[it] = theta
        in_burn = it < config.burn_in
        if in_burn and (it + 1) % config.adapt_every == 0:
            rate = accepted_win / config.adapt_every
            accepted_win = 0
            if rate < 0.15:
                scale *= 0.8
            elif rate > 0.45:
                scale *= 1.25
            if it + 1 >= 2 * config.adapt_every:
                emp = np.cov(history[: it + 1].T) + 1e-9 * np.eye(3)
                chol = np.linalg.cholesky((2.38 ** 2 / 3.0) * emp)
        elif it == config.burn_in - 1:
            accepted_win = 0
        if it >= config.burn_in:
            j = it - config.burn_in
            out_mu[j] = theta[0]
            out_sigma[j] = math.exp(theta[1])
            out_xi[j] = theta[2]
            out_lp[j] = lp

    rate = accepted_post / config.n_samples
    if not (0.05 <= rate <= 0.9):
        raise McmcDiagnosticError(
            f"post-burn-in acceptance rate {rate:.3f} outside [0.05, 0.9]"
        )
    zs = {name: _geweke_z(arr[::25]) for name, arr in
          (("mu", out_mu), ("sigma", out_sigma), ("xi", out_xi))}
    bad = {k: v for k, v in zs.items() if abs(v) > 3.0}
    if bad:
        warnings.warn(f"Geweke z-scores suggest poor mixing: {bad}", stacklevel=2)

    return GevPosterior(
        mu=out_mu, sigma=out_sigma, xi=out_xi, log_post=out_lp,
        acceptance_rate=rate, burn_in=config.burn_in, seed=config.seed,
        meta={"geweke_z": zs, "n_data": int(levels.size)},
    )


def map_estimate(post: GevPosterior) -> GevParams:
    """The sampled parameter set with highest recorded posterior density."""
    if len(post) == 0:
        raise ValueError("posterior is empty")
    i = int(np.argmax(post.log_post))
    return post.params_at(i)


@dataclass(frozen=True)
class ReturnLevelSummary:
    period: float
    map_level: float
    mean_level: float
    q05: float
    q95: float


def return_level_summary(post: GevPosterior, period: float) -> ReturnLevelSummary:
    """Ensemble summary of the T-year return level (non-exceedance 1 - 1/T)."""
    if period <= 1:
        raise ValueError("return period must exceed 1 year")
    q = 1.0 - 1.0 / period
    levels = _quantile_arr(post.mu, post.sigma, post.xi, q)
    m = map_estimate(post)
    return ReturnLevelSummary(
        period=period,
        map_level=float(gev_quantile(m, q)),
        mean_level=float(np.mean(levels)),
        q05=float(np.quantile(levels, 0.05)),
        q95=float(np.quantile(levels, 0.95)),
    )


def base_flood_elevation(model) -> float:
    """The 100-year flood level (1% annual exceedance), a regulatory datum.

    Under parameter uncertainty the highest-posterior sample is used rather
    than an ensemble average: the datum is a fixed map attribute, not an
    expectation.
    """
    if isinstance(model, GevPosterior):
        model = map_estimate(model)
    return float(gev_quantile(model, 0.99))
