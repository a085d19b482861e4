"""Gaussian quasi-log-likelihood with analytic score and Hessian.

The parameter vector is theta = (mu, phi, sigma2, b2), always in that order.
For one observation with h = 1 + b2 * y_{t-2}^2 and residual
r = y_t - mu - phi * y_{t-2},

    l_t = -1/2 * [ln(sigma2 * h) + r^2 / (sigma2 * h)].

All term-level functions broadcast over arrays of (y_t, y_{t-2}).
"""
from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from .errors import NonPositiveVariance
from .model import SeriesData

PARAM_NAMES = ("mu", "phi", "sigma2", "b2")


@dataclass(frozen=True)
class ParamSpace:
    """Box constraints on theta."""

    mu_bar: float = 10.0
    phi_bar: float = 10.0
    omega_lo: float = 1e-6
    omega_hi: float = 1e3
    alpha_lo: float = 1e-8
    alpha_hi: float = 25.0

    def __post_init__(self):
        if not (self.mu_bar > 0 and self.phi_bar > 0):
            raise ValueError("mu_bar and phi_bar must be positive")
        if not 0 < self.omega_lo < self.omega_hi:
            raise ValueError("need 0 < omega_lo < omega_hi")
        if not 0 <= self.alpha_lo < self.alpha_hi:
            raise ValueError("need 0 <= alpha_lo < alpha_hi")

    @classmethod
    def interior(cls, **overrides) -> "ParamSpace":
        """Box with b2 bounded away from zero (b != 0 asymptotics)."""
        return cls(**overrides)

    @classmethod
    def boundary(cls, **overrides) -> "ParamSpace":
        """Box including b2 = 0, used for testing b = 0."""
        overrides.setdefault("alpha_lo", 0.0)
        return cls(**overrides)

    def contains(self, theta: "ThetaVector", slack: float = 0.0) -> bool:
        return (
            abs(theta.mu) <= self.mu_bar + slack
            and abs(theta.phi) <= self.phi_bar + slack
            and self.omega_lo - slack <= theta.sigma2 <= self.omega_hi + slack
            and self.alpha_lo - slack <= theta.b2 <= self.alpha_hi + slack
        )


@dataclass(frozen=True)
class ThetaVector:
    mu: float
    phi: float
    sigma2: float
    b2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.b2 >= 0:
            raise ValueError(f"b2 must be non-negative, got {self.b2}")

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def __array__(self, dtype=None, copy=None):
        return self.to_array() if dtype is None else self.to_array().astype(dtype)

    @classmethod
    def from_array(cls, values) -> "ThetaVector":
        mu, phi, sigma2, b2 = (float(v) for v in values)
        return cls(mu, phi, sigma2, b2)

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, astuple(self)))


def _parts(theta):
    mu, phi, sigma2, b2 = (float(v) for v in np.asarray(theta, dtype=float))
    return mu, phi, sigma2, b2


def _variance(sigma2, b2, y_tm2):
    h = 1.0 + b2 * np.square(y_tm2)
    v = sigma2 * h
    if np.any(~(v > 0)):
        raise NonPositiveVariance("conditional variance sigma2 * (1 + b2 y^2) must be positive")
    return h, v


def loglik_term(theta, y_t, y_tm2):
    mu, phi, sigma2, b2 = _parts(theta)
    y_t, y_tm2 = np.asarray(y_t, dtype=float), np.asarray(y_tm2, dtype=float)
    _, v = _variance(sigma2, b2, y_tm2)
    r = y_t - mu - phi * y_tm2
    out = -0.5 * (np.log(v) + r * r / v)
    return float(out) if out.ndim == 0 else out


def score_term(theta, y_t, y_tm2) -> np.ndarray:
    """Per-observation gradient, shape (..., 4)."""
    mu, phi, sigma2, b2 = _parts(theta)
    y_t, y_tm2 = np.asarray(y_t, dtype=float), np.asarray(y_tm2, dtype=float)
    h, v = _variance(sigma2, b2, y_tm2)
    r = y_t - mu - phi * y_tm2
    q = 1.0 - r * r / v
    y2 = y_tm2 * y_tm2
    return np.stack(
        [
            r / v,
            y_tm2 * r / v,
            -q / (2.0 * sigma2),
            -y2 * q / (2.0 * h),
        ],
        axis=-1,
    )


def hessian_term(theta, y_t, y_tm2) -> np.ndarray:
    """Per-observation second derivatives, shape (..., 4, 4)."""
    mu, phi, sigma2, b2 = _parts(theta)
    y_t, y_tm2 = np.asarray(y_t, dtype=float), np.asarray(y_tm2, dtype=float)
    h, v = _variance(sigma2, b2, y_tm2)
    r = y_t - mu - phi * y_tm2
    y = y_tm2
    y2 = y * y
    s4 = sigma2 * sigma2
    q2 = 1.0 - 2.0 * r * r / v

    H = np.empty(np.broadcast(y_t, y_tm2).shape + (4, 4))
    H[..., 0, 0] = -1.0 / v
    H[..., 1, 1] = -y2 / v
    H[..., 2, 2] = q2 / (2.0 * s4)
    H[..., 3, 3] = y2 * y2 * q2 / (2.0 * h * h)
    H[..., 0, 1] = -y / v
    H[..., 0, 2] = -r / (s4 * h)
    H[..., 0, 3] = -y2 * r / (sigma2 * h * h)
    H[..., 1, 2] = -y * r / (s4 * h)
    H[..., 1, 3] = -y2 * y * r / (sigma2 * h * h)
    H[..., 2, 3] = -y2 * r * r / (2.0 * s4 * h * h)
    for i, j in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)):
        H[..., j, i] = H[..., i, j]
    return H


def loglik_total(theta, data: SeriesData) -> float:
    """Sum of l_t over t = 3..n (conditioning on Y_1, Y_2)."""
    y_t, y_tm2 = data.lagged()
    return float(np.sum(loglik_term(theta, y_t, y_tm2)))


def score_total(theta, data: SeriesData) -> np.ndarray:
    y_t, y_tm2 = data.lagged()
    return score_term(theta, y_t, y_tm2).sum(axis=0)


def hessian_total(theta, data: SeriesData) -> np.ndarray:
    y_t, y_tm2 = data.lagged()
    return hessian_term(theta, y_t, y_tm2).sum(axis=0)


def sigma2_maximizer(mu: float, phi: float, b2: float, data: SeriesData) -> float:
    """argmax over sigma2 of loglik_total with the other components fixed."""
    y_t, y_tm2 = data.lagged()
    h = 1.0 + b2 * y_tm2 * y_tm2
    r = y_t - mu - phi * y_tm2
    return float(np.mean(r * r / h))


def write_score_csv(path, theta, data: SeriesData) -> None:
    """Dump per-term scores as CSV columns t, d_mu, d_phi, d_sigma2, d_b2."""
    y_t, y_tm2 = data.lagged()
    s = score_term(theta, y_t, y_tm2)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,d_mu,d_phi,d_sigma2,d_b2\n")
        for k, row in enumerate(s):
            fh.write(f"{k + data.likelihood_start}," + ",".join(f"{x:.17g}" for x in row) + "\n")
