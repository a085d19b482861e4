"""Testing b = 0 and interval estimation when b2 sits on the boundary.

Under b = 0 the limit of sqrt(n) (theta_hat - theta_0) is a projected normal:
Z itself when Z_4 > 0, otherwise Z with its b2 component projected out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateSigma44
from .estimation import EstimationResult, covariance_hat, fit_gmle, profile_inner
from .likelihood import PARAM_NAMES, ParamSpace, ThetaVector
from .model import SeriesData
from .rng import SeedLike, as_generator


@dataclass(frozen=True)
class BoundaryTestResult:
    statistic: float
    critical_value: float
    level: float
    reject: bool
    sigma44_hat_null: float
    n: int

    def critical_value_at(self, level: float) -> float:
        return math.sqrt(self.sigma44_hat_null) * _upper_quantile(level) / math.sqrt(self.n)

    def reject_at(self, level: float) -> bool:
        return bool(self.statistic > self.critical_value_at(level))

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "level": self.level,
            "reject": self.reject,
            "sigma44_null": self.sigma44_hat_null,
        }


def _upper_quantile(level: float) -> float:
    if not 0 < level <= 1:
        raise ValueError(f"level must lie in (0, 1], got {level}")
    return float(stats.norm.isf(level))


def test_b_zero(
    data: SeriesData,
    level: float = 0.05,
    space: ParamSpace | None = None,
    restricted: bool = False,
    fit: EstimationResult | None = None,
) -> BoundaryTestResult:
    """One-sided test of H0: b = 0, rejecting when b2-hat is too large.

    sigma44 is taken from the sandwich evaluated with b2-hat replaced by 0.
    By default (mu, phi, sigma2) stay at the unrestricted fit; with
    ``restricted=True`` they are refitted with b2 pinned at 0.
    """
    z = _upper_quantile(level)
    if data.n < 6:
        raise ValueError("the test needs at least 6 observations")
    if fit is None:
        fit = fit_gmle(data, ParamSpace.boundary() if space is None else space)
    if restricted:
        null_theta = profile_inner(0.0, data).theta()
    else:
        t = fit.theta_hat
        null_theta = ThetaVector(t.mu, t.phi, t.sigma2, 0.0)
    s44 = float(covariance_hat(data, null_theta).sandwich[3, 3])
    statistic = float(fit.theta_hat.b2)
    critical = math.sqrt(s44) * z / math.sqrt(data.n)
    return BoundaryTestResult(statistic, critical, float(level), bool(statistic > critical), s44, data.n)


test_b_zero.__test__ = False  # not a pytest test


@dataclass(frozen=True)
class BoundaryLimitSample:
    draws: np.ndarray  # shape (m, 4)
    source_covariance: np.ndarray


def simulate_boundary_limit(
    sandwich, draws: int, seed: SeedLike = 0, offset: float = 0.0
) -> BoundaryLimitSample:
    """Draw from the b = 0 limiting law for a given sandwich covariance.

    With ``offset = h > 0`` the fourth component is truncated at -h instead
    of 0, the limit under a local parameter b2 = h / sqrt(n).
    """
    cov = np.asarray(sandwich, dtype=float)
    if cov.shape != (4, 4):
        raise ValueError("sandwich must be 4 x 4")
    draws = int(draws)
    if draws < 1:
        raise ValueError("draws must be positive")
    s44 = cov[3, 3]
    if not s44 > 0:
        raise DegenerateSigma44(f"sigma44 must be positive, got {s44}")
    if not offset >= 0:
        raise ValueError("offset must be non-negative")
    cov = 0.5 * (cov + cov.T)
    lam, vec = np.linalg.eigh(cov)
    root = (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.T
    rng = as_generator(seed)
    z = rng.standard_normal((draws, 4)) @ root
    neg = z[:, 3] <= -offset
    proj = cov[:, 3] / s44
    z[neg] -= (z[neg, 3:4] + offset) * proj[None, :]
    z[neg, 3] = -offset
    return BoundaryLimitSample(z, cov)


def boundary_interval(
    result: EstimationResult,
    n: int | None = None,
    level: float = 0.95,
    draws: int = 100_000,
    seed: SeedLike = 0,
    sandwich=None,
) -> list[tuple[str, float, float]]:
    """Intervals from quantiles of theta_hat - W / sqrt(n), W from the limit law.

    W is truncated at -sqrt(n) * b2_hat, so the intervals reduce to the
    projected law at b2_hat = 0 and to Wald intervals far from the boundary.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if draws < 100_000:
        raise ValueError("boundary_interval needs at least 1e5 draws")
    n = result.n if n is None else int(n)
    cov = result.sandwich if sandwich is None else sandwich
    theta = result.theta_hat.to_array()
    w = simulate_boundary_limit(cov, draws, seed, offset=math.sqrt(n) * theta[3]).draws
    alpha = 1.0 - level
    q_lo, q_hi = np.quantile(w, [alpha / 2.0, 1.0 - alpha / 2.0], axis=0)
    lo = theta - q_hi / math.sqrt(n)
    hi = theta - q_lo / math.sqrt(n)
    lo[3] = max(lo[3], 0.0)
    hi[3] = max(hi[3], 0.0)
    return [(name, float(a), float(b)) for name, a, b in zip(PARAM_NAMES, lo, hi)]
