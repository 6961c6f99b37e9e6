"""Stochastic discount-rate models: AR(3) fits, simulation, and factors.

Three autoregressive structures are fit to the logarithm of the historical
real discount-rate series (percent per year): a random walk whose lag
weights sum to one, a mean-reverting form with constant mean, and a
mean-reverting form around a linear background trend. Working in logs keeps
simulated rates positive. Discount factors compound continuously:
F_t = exp(-sum of annual rates through year t).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class FitError(RuntimeError):
    """Raised when a model structure cannot be fit to the series."""


class ModelKind(str, Enum):
    RANDOM_WALK = "random_walk"
    MEAN_REVERTING = "mean_reverting"
    BACKGROUND_TREND = "background_trend"


@dataclass
class DiscountSeries:
    """Annual real discount rates in percent per year, contiguous years."""

    years: list[int]
    rates_percent: list[float]
    provenance: str = ""

    def __post_init__(self):
        if len(self.years) != len(self.rates_percent):
            raise ValueError("years and rates must align")
        for a, b in zip(self.years, self.years[1:]):
            if b != a + 1:
                raise ValueError(f"years must be contiguous, gap after {a}")
        if any(r <= 0 for r in self.rates_percent):
            raise ValueError("rates must be positive (log transform)")

    def __len__(self):
        return len(self.years)

    @property
    def log_rates(self) -> np.ndarray:
        return np.log(np.asarray(self.rates_percent, dtype=float))

    @classmethod
    def from_csv(cls, path, provenance: str = "") -> "DiscountSeries":
        years, rates = [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                years.append(int(row["year"]))
                rates.append(float(row["rate_percent"]))
        return cls(years, rates, provenance or str(path))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["year", "rate_percent"])
            for y, r in zip(self.years, self.rates_percent):
                w.writerow([int(y), repr(float(r))])


def smooth_moving_average(years, rates_percent, window: int = 3) -> DiscountSeries:
    """Centered moving-average smoothing of a raw annual rate series.

    The first and last (window-1)/2 years are dropped so every output year
    averages a full window.
    """
    rates = np.asarray(rates_percent, dtype=float)
    if window % 2 == 0 or window < 1:
        raise ValueError("window must be odd and positive")
    half = window // 2
    kernel = np.ones(window) / window
    smoothed = np.convolve(rates, kernel, mode="valid")
    return DiscountSeries(list(years)[half:len(years) - half], list(smoothed))


@dataclass
class Ar3Model:
    """A fitted AR(3) structure on log discount rates (percent scale).

    ``eta`` is the structural mean level, ``beta`` the per-year trend slope
    (background-trend kind only); both live on the log-percent scale.
    """

    kind: ModelKind
    rho: tuple[float, float, float]
    sigma2: float
    eta: float | None = None
    beta: float | None = None
    aic: float = float("nan")
    bic: float = float("nan")
    loglik: float = float("nan")
    n_obs: int = 0
    stderr: dict = field(default_factory=dict)
    # simulation state: last three observed log rates (oldest first) and the
    # trend index of the first future year
    tail_log: tuple[float, float, float] = (0.0, 0.0, 0.0)
    t_next: int = 0

    def to_json(self, path):
        payload = {
            "kind": self.kind.value,
            "rho": list(self.rho),
            "sigma2": self.sigma2,
            "eta": self.eta,
            "beta": self.beta,
            "aic": self.aic,
            "bic": self.bic,
            "loglik": self.loglik,
            "n_obs": self.n_obs,
            "stderr": self.stderr,
            "tail_log": list(self.tail_log),
            "t_next": self.t_next,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "Ar3Model":
        with open(path) as fh:
            d = json.load(fh)
        return cls(
            kind=ModelKind(d["kind"]), rho=tuple(d["rho"]), sigma2=d["sigma2"],
            eta=d["eta"], beta=d["beta"], aic=d["aic"], bic=d["bic"],
            loglik=d["loglik"], n_obs=d["n_obs"], stderr=d["stderr"],
            tail_log=tuple(d["tail_log"]), t_next=d["t_next"],
        )


def _ols(y: np.ndarray, X: np.ndarray):
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    rss = float(resid @ resid)
    n, p = X.shape
    sigma2_ml = rss / n
    cov = rss / (n - p) * np.linalg.inv(X.T @ X)
    return coef, sigma2_ml, cov, n


def _gauss_loglik(n: int, sigma2: float) -> float:
    return -0.5 * n * (math.log(2 * math.pi * sigma2) + 1.0)


def fit_ar3(series: DiscountSeries, kind: ModelKind) -> Ar3Model:
    """Conditional maximum-likelihood fit of one AR(3) structure.

    The first three observations condition the likelihood. Mean-reverting
    kinds require the lag weights to sum below one; the random walk enforces
    a unit sum by regressing on differences.
    """
    if len(series) < 30:
        raise FitError(f"series too short to fit ({len(series)} < 30 years)")
    x = series.log_rates
    n = x.size
    t = np.arange(n, dtype=float)
    lags = np.column_stack([x[2:-1], x[1:-2], x[0:-3]])  # x_{t-1}, x_{t-2}, x_{t-3}
    y = x[3:]

    if kind is ModelKind.RANDOM_WALK:
        d = np.diff(x)
        dy = d[2:]
        dX = np.column_stack([d[1:-1], d[0:-2]])
        phi, sigma2, cov, n_eff = _ols(dy, dX)
        rho = (1.0 + phi[0], phi[1] - phi[0], -phi[1])
        grad = np.array([[1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]])
        rho_cov = grad @ cov @ grad.T
        stderr = {f"rho{i + 1}": math.sqrt(rho_cov[i, i]) for i in range(3)}
        k = 4  # three lag weights plus the innovation variance
        ll = _gauss_loglik(n_eff, sigma2)
        return Ar3Model(
            kind=kind, rho=rho, sigma2=sigma2,
            aic=2 * k - 2 * ll, bic=k * math.log(n_eff) - 2 * ll,
            loglik=ll, n_obs=n_eff, stderr=stderr,
            tail_log=tuple(x[-3:]), t_next=n,
        )

    if kind is ModelKind.MEAN_REVERTING:
        X = np.column_stack([np.ones_like(y), lags])
        coef, sigma2, cov, n_eff = _ols(y, X)
        c, rho = coef[0], coef[1:]
        rho_sum = float(rho.sum())
        if rho_sum >= 1:
            raise FitError(f"mean-reverting fit infeasible: lag weights sum to {rho_sum:.4f}")
        eta = c / (1.0 - rho_sum)
        # delta method for eta = c / (1 - sum rho)
        g = np.array([1.0 / (1 - rho_sum), eta / (1 - rho_sum),
                      eta / (1 - rho_sum), eta / (1 - rho_sum)])
        eta_se = math.sqrt(g @ cov @ g)
        stderr = {"eta": eta_se}
        stderr.update({f"rho{i + 1}": math.sqrt(cov[i + 1, i + 1]) for i in range(3)})
        k = 5
        ll = _gauss_loglik(n_eff, sigma2)
        return Ar3Model(
            kind=kind, rho=tuple(rho), sigma2=sigma2, eta=eta,
            aic=2 * k - 2 * ll, bic=k * math.log(n_eff) - 2 * ll,
            loglik=ll, n_obs=n_eff, stderr=stderr,
            tail_log=tuple(x[-3:]), t_next=n,
        )

    if kind is ModelKind.BACKGROUND_TREND:
        X = np.column_stack([np.ones_like(y), t[3:], lags])
        coef, sigma2, cov, n_eff = _ols(y, X)
        a, b, rho = coef[0], coef[1], coef[2:]
        rho_sum = float(rho.sum())
        if rho_sum >= 1:
            raise FitError(f"trend fit infeasible: lag weights sum to {rho_sum:.4f}")
        jw = float(np.dot([1.0, 2.0, 3.0], rho))  # sum of j * rho_j
        beta = b / (1.0 - rho_sum)
        eta = (a - beta * jw) / (1.0 - rho_sum)
        # delta method over coef order (a, b, rho1, rho2, rho3)
        db = np.array([0.0, 1.0 / (1 - rho_sum),
                       beta / (1 - rho_sum), beta / (1 - rho_sum), beta / (1 - rho_sum)])
        de = np.zeros(5)
        de[0] = 1.0 / (1 - rho_sum)
        de[1] = -jw / (1 - rho_sum) ** 2
        for j in range(3):
            # d eta / d rho_j: quotient rule on (a - beta*jw)/(1-s)
            dbeta_j = beta / (1 - rho_sum)
            de[2 + j] = (-(dbeta_j * jw + beta * (j + 1)) * (1 - rho_sum)
                         + (a - beta * jw)) / (1 - rho_sum) ** 2
        beta_se = math.sqrt(db @ cov @ db)
        eta_se = math.sqrt(de @ cov @ de)
        stderr = {"eta": eta_se, "beta": beta_se}
        stderr.update({f"rho{i + 1}": math.sqrt(cov[i + 2, i + 2]) for i in range(3)})
        k = 6
        ll = _gauss_loglik(n_eff, sigma2)
        return Ar3Model(
            kind=kind, rho=tuple(rho), sigma2=sigma2, eta=eta, beta=beta,
            aic=2 * k - 2 * ll, bic=k * math.log(n_eff) - 2 * ll,
            loglik=ll, n_obs=n_eff, stderr=stderr,
            tail_log=tuple(x[-3:]), t_next=n,
        )

    raise ValueError(f"unknown model kind {kind!r}")


def fit_all(series: DiscountSeries) -> dict[ModelKind, Ar3Model]:
    return {kind: fit_ar3(series, kind) for kind in ModelKind}


def model_selection_table(series: DiscountSeries) -> dict:
    """AIC/BIC comparison across the three structures.

    Pairs whose AIC differs by less than two are flagged as statistically
    equivalent levels of evidence.
    """
    fits = fit_all(series)
    rows = {k.value: {"aic": m.aic, "bic": m.bic} for k, m in fits.items()}
    kinds = list(fits)
    equivalent = [
        (a.value, b.value)
        for i, a in enumerate(kinds)
        for b in kinds[i + 1:]
        if abs(fits[a].aic - fits[b].aic) < 2.0
    ]
    best = min(kinds, key=lambda k: fits[k].aic)
    return {"models": rows, "best_aic": best.value, "equivalent_pairs": equivalent}


def path_innovations(seed: int, path_index: int, horizon: int) -> np.ndarray:
    """Standard-normal innovation stream for one path, derived from
    (seed, path index) so results do not depend on scheduling or grouping."""
    rng = np.random.default_rng([seed, path_index])
    return rng.standard_normal(horizon)


def _trend_at(model: Ar3Model, t: np.ndarray) -> np.ndarray:
    if model.kind is ModelKind.BACKGROUND_TREND:
        return model.eta + model.beta * t
    if model.kind is ModelKind.MEAN_REVERTING:
        return np.full_like(np.asarray(t, dtype=float), model.eta)
    return np.zeros_like(np.asarray(t, dtype=float))


def simulate_from_innovations(model: Ar3Model, eps: np.ndarray) -> np.ndarray:
    """Simulate rate paths (fraction per year) from given innovations.

    ``eps`` has shape (n_paths, horizon); innovations are scaled by the
    fitted sigma. Paths start from the last three observed log rates.
    """
    eps = np.atleast_2d(eps)
    n_paths, horizon = eps.shape
    sd = math.sqrt(model.sigma2)
    rho = np.asarray(model.rho)
    x_hist = np.tile(np.asarray(model.tail_log, dtype=float), (n_paths, 1))
    t_future = model.t_next + np.arange(horizon)
    out = np.empty((n_paths, horizon))
    if model.kind is ModelKind.RANDOM_WALK:
        for j in range(horizon):
            x_new = (rho[0] * x_hist[:, 2] + rho[1] * x_hist[:, 1]
                     + rho[2] * x_hist[:, 0] + sd * eps[:, j])
            out[:, j] = x_new
            x_hist = np.column_stack([x_hist[:, 1:], x_new])
    else:
        trend_lag = _trend_at(model, np.arange(model.t_next - 3, model.t_next, dtype=float))
        dev_hist = x_hist - trend_lag  # deviations from the structural level
        for j in range(horizon):
            mean_t = _trend_at(model, np.array(float(t_future[j])))
            x_new = (mean_t
                     + rho[0] * dev_hist[:, 2] + rho[1] * dev_hist[:, 1]
                     + rho[2] * dev_hist[:, 0] + sd * eps[:, j])
            out[:, j] = x_new
            dev_hist = np.column_stack([dev_hist[:, 1:], x_new - mean_t])
    return np.exp(out) / 100.0  # log-percent back to fraction per year


def simulate_rates(model: Ar3Model, horizon: int, n_paths: int, seed: int,
                   path_offset: int = 0) -> np.ndarray:
    """Simulate ``n_paths`` annual rate paths of length ``horizon`` (fractions)."""
    if horizon < 1:
        raise ValueError("horizon must be at least one year")
    eps = np.stack([
        path_innovations(seed, path_offset + i, horizon) for i in range(n_paths)
    ])
    return simulate_from_innovations(model, eps)


def discount_factors_fixed(r: float, horizon: int) -> np.ndarray:
    """F_t = exp(-(t+1) r) for t = 0..horizon-1, the constant-rate factor."""
    if r < 0:
        raise ValueError("rate must be non-negative")
    t = np.arange(1, horizon + 1, dtype=float)
    return np.exp(-r * t)


def discount_factors_stochastic(path: np.ndarray) -> np.ndarray:
    """F_t = exp(-sum of path rates through year t) for one rate path."""
    path = np.asarray(path, dtype=float)
    return np.exp(-np.cumsum(path, axis=-1))
