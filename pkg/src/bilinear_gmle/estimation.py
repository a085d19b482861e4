"""GARCH-type quasi-maximum-likelihood estimation.

Given b2, the remaining parameters have closed forms: (mu, phi) solve a
weighted least-squares problem with weights 1 / (1 + b2 * Y_{t-2}^2) and
sigma2 is the weighted mean squared residual. The log-likelihood therefore
profiles to a one-dimensional function of b2, which is maximized by a
coarse scan followed by bounded Brent refinement.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .errors import BoundaryCase, OmegaClippedWarning, SingularDesign, SingularSigma, ZeroDenominator
from .likelihood import PARAM_NAMES, ParamSpace, ThetaVector, loglik_total, score_term
from .model import SeriesData

SCAN_POINTS = 32
OMEGA_CLIP_RTOL = 1e-10
SIGMA_EIG_RTOL = 1e-12


@dataclass(frozen=True)
class ProfileState:
    b2: float
    mu: float
    phi: float
    sigma2: float
    profile_loglik: float

    def theta(self) -> ThetaVector:
        return ThetaVector(self.mu, self.phi, self.sigma2, self.b2)


def profile_inner(b2: float, data: SeriesData) -> ProfileState:
    """Concentrate (mu, phi, sigma2) out of the likelihood at fixed b2."""
    b2 = float(b2)
    if b2 < 0:
        raise ValueError(f"b2 must be non-negative, got {b2}")
    y_t, x = data.lagged()
    x2 = x * x
    w = 1.0 / (1.0 + b2 * x2)
    sw = w.sum()
    xbar = np.dot(w, x) / sw
    ybar = np.dot(w, y_t) / sw
    dx = x - xbar
    sxx = np.dot(w, dx * dx)
    if not sxx > 1e-12 * np.dot(w, x2) or sxx == 0.0:
        raise SingularDesign("weighted design [1, Y_{t-2}] is singular (constant or degenerate series)")
    phi = np.dot(w, dx * (y_t - ybar)) / sxx
    mu = ybar - phi * xbar
    r = y_t - mu - phi * x
    n_terms = y_t.size
    sigma2 = np.dot(w, r * r) / n_terms
    if not sigma2 > 0:
        raise SingularDesign("zero residual variance: the series is fitted exactly")
    loglik = -0.5 * (n_terms * math.log(sigma2) + np.sum(np.log1p(b2 * x2)) + n_terms)
    return ProfileState(b2, float(mu), float(phi), float(sigma2), float(loglik))


def profile_loglik(b2: float, data: SeriesData) -> float:
    return profile_inner(b2, data).profile_loglik


def scan_grid(space: ParamSpace) -> np.ndarray:
    """Coarse b2 grid: the lower bound plus geometric spacing up to alpha_hi."""
    u = np.concatenate(([0.0], np.geomspace(1e-6, 1.0, SCAN_POINTS - 1)))
    return space.alpha_lo + (space.alpha_hi - space.alpha_lo) * u


@dataclass(frozen=True)
class CovarianceEstimate:
    omega: np.ndarray
    sigma: np.ndarray
    sandwich: np.ndarray
    omega_min_eig: float
    clipped: bool


def sigma_hat(data: SeriesData, theta) -> np.ndarray:
    """Block-diagonal estimate of minus the expected Hessian."""
    _, _, s2, b2 = (float(v) for v in np.asarray(theta, dtype=float))
    _, x = data.lagged()
    x2 = x * x
    h = 1.0 + b2 * x2
    w = 1.0 / (s2 * h)
    out = np.zeros((4, 4))
    out[0, 0] = np.mean(w)
    out[0, 1] = out[1, 0] = np.mean(w * x)
    out[1, 1] = np.mean(w * x2)
    out[2, 2] = 1.0 / (2.0 * s2 * s2)
    out[2, 3] = out[3, 2] = np.mean(x2 / (2.0 * s2 * h))
    out[3, 3] = np.mean(x2 * x2 / (2.0 * h * h))
    return out


def omega_hat(data: SeriesData, theta) -> np.ndarray:
    """Long-run covariance of the scores, allowing for lag-1 dependence."""
    y_t, x = data.lagged()
    s = score_term(theta, y_t, x)
    pair = s[1:] + s[:-1]
    om = pair.T @ pair / pair.shape[0] - s.T @ s / s.shape[0]
    return 0.5 * (om + om.T)


def covariance_hat(data: SeriesData, theta) -> CovarianceEstimate:
    """Omega-hat, Sigma-hat and the sandwich Sigma^-1 Omega Sigma^-1.

    Negative eigenvalues of Omega-hat are clipped to zero; an
    OmegaClippedWarning is emitted when one is below -1e-10 * ||Omega||.
    """
    if data.n < 6:
        raise ValueError("covariance estimation needs at least 6 observations")
    sig = sigma_hat(data, theta)
    # Diagonal scaling first: entries can differ by 1e15 when Y is heavy tailed.
    d = np.sqrt(np.diag(sig))
    if not np.all(d > 0):
        raise SingularSigma("Sigma-hat has a zero diagonal entry")
    corr = sig / np.outer(d, d)
    lam, vec = np.linalg.eigh(corr)
    if not lam.min() > SIGMA_EIG_RTOL * np.trace(corr) / 4.0:
        raise SingularSigma(f"Sigma-hat is not positive definite (scaled eigenvalues {lam})")
    sig_inv = ((vec / lam) @ vec.T) / np.outer(d, d)

    om = omega_hat(data, theta)
    olam, ovec = np.linalg.eigh(om)
    scale = np.max(np.abs(olam))
    clipped = bool(olam.min() < -OMEGA_CLIP_RTOL * scale)
    if clipped:
        warnings.warn(
            f"Omega-hat has a negative eigenvalue {olam.min():.3g}; clipped to 0",
            OmegaClippedWarning,
            stacklevel=2,
        )
    om_psd = (ovec * np.clip(olam, 0.0, None)) @ ovec.T
    om_psd = 0.5 * (om_psd + om_psd.T)
    sandwich = sig_inv @ om_psd @ sig_inv
    sandwich = 0.5 * (sandwich + sandwich.T)
    return CovarianceEstimate(om_psd, sig, sandwich, float(olam.min()), clipped)


def sign_estimator(data: SeriesData, theta_hat) -> float:
    """Weighted least-squares estimate of b used only for its sign.

    Uses E[(Y_t - m_t)(Y_{t-1} - m_{t-1}) | F_{t-2}] = b sigma2 Y_{t-2} with
    m_t = mu + phi Y_{t-2}; sums over t = 4..n.
    """
    mu, phi, s2, _ = (float(v) for v in np.asarray(theta_hat, dtype=float))
    y = data.values
    y_t, y_tm1, y_tm2, y_tm3 = y[3:], y[2:-1], y[1:-2], y[:-3]
    d = (1.0 + y_tm2 * y_tm2) * np.sqrt(1.0 + y_tm3 * y_tm3)
    denom = s2 * np.sum(y_tm2 * y_tm2 / d)
    if denom == 0.0:
        raise ZeroDenominator("all Y_{t-2} are zero; the sign of b is not identified")
    num = np.sum((y_t - mu - phi * y_tm2) * (y_tm1 - mu - phi * y_tm3) * y_tm2 / d)
    return float(num / denom)


@dataclass
class EstimationResult:
    theta_hat: ThetaVector
    b_tilde: float
    b_hat: float
    omega_hat: np.ndarray
    sigma_hat: np.ndarray
    sandwich: np.ndarray
    se_theta: np.ndarray
    se_b_pivot: float
    loglik_at_max: float
    outer_iterations: int
    at_boundary: bool
    n: int
    space: ParamSpace
    clamped: tuple[str, ...] = ()
    sign_defaulted: bool = False
    omega_clipped: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def se_b_hat(self) -> float:
        """Delta-method SE of b-hat, se(b2-hat) / (2 |b-hat|)."""
        return self.se_theta[3] / (2.0 * abs(self.b_hat)) if self.b_hat != 0 else math.inf

    def to_dict(self) -> dict:
        se = dict(zip(PARAM_NAMES, (float(v) for v in self.se_theta)))
        se["b_pivot"] = float(self.se_b_pivot)
        se["b_hat"] = float(self.se_b_hat)
        return {
            "theta_hat": self.theta_hat.as_dict(),
            "b_hat": self.b_hat,
            "b_tilde": self.b_tilde,
            "se": se,
            "sandwich": [float(v) for v in self.sandwich.ravel()],
            "omega_hat": [float(v) for v in self.omega_hat.ravel()],
            "sigma_hat": [float(v) for v in self.sigma_hat.ravel()],
            "loglik": self.loglik_at_max,
            "n": self.n,
            "outer_iterations": self.outer_iterations,
            "at_boundary": self.at_boundary,
            "clamped": list(self.clamped),
            "warnings": list(self.warnings),
        }


def _maximize_profile(data: SeriesData, space: ParamSpace, tol: float) -> tuple[ProfileState, int]:
    grid = scan_grid(space)
    states = [profile_inner(b2, data) for b2 in grid]
    values = np.array([s.profile_loglik for s in states])
    k = int(np.argmax(values))
    best = states[k]
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    iterations = grid.size
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda b2: -profile_loglik(b2, data),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": tol, "maxiter": 500},
        )
        iterations += int(res.nfev)
        refined = profile_inner(float(res.x), data)
        if refined.profile_loglik > best.profile_loglik:
            best = refined
    return best, iterations


def fit_gmle(data: SeriesData, space: ParamSpace | None = None, tol: float = 1e-10) -> EstimationResult:
    """Maximize the quasi-likelihood and attach the sandwich covariance."""
    space = ParamSpace() if space is None else space
    if not tol > 0:
        raise ValueError("tol must be positive")
    best, iterations = _maximize_profile(data, space, tol)

    mu = min(max(best.mu, -space.mu_bar), space.mu_bar)
    phi = min(max(best.phi, -space.phi_bar), space.phi_bar)
    sigma2 = min(max(best.sigma2, space.omega_lo), space.omega_hi)
    clamped = tuple(
        name for name, a, b in (("mu", mu, best.mu), ("phi", phi, best.phi), ("sigma2", sigma2, best.sigma2)) if a != b
    )
    theta = ThetaVector(mu, phi, sigma2, best.b2)
    loglik = loglik_total(theta, data) if clamped else best.profile_loglik
    notes = [f"clamped {name} to the parameter box" for name in clamped]

    b_tilde = sign_estimator(data, theta)
    sign_defaulted = b_tilde == 0.0
    if sign_defaulted:
        notes.append("b_tilde == 0; sign of b set to +")
    b_hat = math.copysign(math.sqrt(theta.b2), b_tilde) if not sign_defaulted else math.sqrt(theta.b2)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OmegaClippedWarning)
        cov = covariance_hat(data, theta)
    for w in caught:
        notes.append(str(w.message))
        warnings.warn(w.message, w.category, stacklevel=2)
    se = np.sqrt(np.diag(cov.sandwich) / data.n)

    return EstimationResult(
        theta_hat=theta,
        b_tilde=b_tilde,
        b_hat=b_hat,
        omega_hat=cov.omega,
        sigma_hat=cov.sigma,
        sandwich=cov.sandwich,
        se_theta=se,
        se_b_pivot=float(se[3]),
        loglik_at_max=float(loglik),
        outer_iterations=iterations,
        at_boundary=bool(theta.b2 <= space.alpha_lo),
        n=data.n,
        space=space,
        clamped=clamped,
        sign_defaulted=sign_defaulted,
        omega_clipped=cov.clipped,
        warnings=notes,
    )


def b_interval(b_hat: float, half_width: float) -> tuple[float, float]:
    """Invert |2 b (b_hat - b)| <= half_width for the branch containing b_hat."""
    c = half_width
    a = abs(b_hat)
    if a * a >= 2.0 * c and a > 0:
        lo = 0.5 * (a + math.sqrt(a * a - 2.0 * c))
        hi = 0.5 * (a + math.sqrt(a * a + 2.0 * c))
    else:
        delta = c / (2.0 * a) if a > 0 else math.inf
        lo, hi = a - delta, a + delta
    return (lo, hi) if b_hat >= 0 else (-hi, -lo)


def confidence_intervals(
    result: EstimationResult, n: int | None = None, level: float = 0.95
) -> list[tuple[str, float, float]]:
    """Wald intervals for theta and a pivot-based interval for b."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if result.at_boundary:
        raise BoundaryCase("b2-hat is on the boundary; use inference.boundary_interval")
    n = result.n if n is None else int(n)
    z = stats.norm.ppf(0.5 + 0.5 * level)
    se = np.sqrt(np.diag(result.sandwich) / n)
    theta = result.theta_hat.to_array()
    out = [(name, float(t - z * s), float(t + z * s)) for name, t, s in zip(PARAM_NAMES, theta, se)]
    lo, hi = b_interval(result.b_hat, z * se[3])
    out.append(("b", lo, hi))
    return out
