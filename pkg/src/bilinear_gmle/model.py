"""Model definition, simulation and the stationarity criterion.

The process is

    Y_t = mu + phi * Y_{t-2} + b * Y_{t-2} * eps_{t-1} + eps_t,

with i.i.d. zero-mean innovations of variance ``sigma2``. A strictly
stationary solution exists when ``E ln|phi + b * eps_1| < 0``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    InsufficientHistory,
    InvalidLength,
    NonStationaryParams,
    UnsupportedQuadrature,
)
from .rng import SeedLike, as_generator, stream

MIN_LENGTH = 5
LIKELIHOOD_START = 3  # 1-based index of the first usable likelihood term
DEFAULT_BURN_IN = 500

# E ln|Z| for Z ~ N(0, 1)
GAUSS_E_LOG_ABS = -(np.euler_gamma + math.log(2.0)) / 2.0


@dataclass(frozen=True)
class ModelParams:
    mu: float
    phi: float
    sigma2: float
    b: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")

    def b_squared(self) -> float:
        return self.b * self.b

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class ErrorLaw:
    """Innovation distribution, always rescaled to mean 0 and variance sigma2."""

    kind: Literal["gaussian", "student_t", "uniform"] = "gaussian"
    df: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "student_t", "uniform"):
            raise ValueError(f"unknown error law {self.kind!r}")
        if self.kind == "student_t":
            if self.df is None or not self.df > 4:
                raise ValueError("student_t needs df > 4 for a finite fourth moment")
        elif self.df is not None:
            raise ValueError(f"df is only meaningful for student_t, got df={self.df}")

    @property
    def is_gaussian(self) -> bool:
        return self.kind == "gaussian"

    @property
    def is_symmetric(self) -> bool:
        return True

    def draw(self, rng: np.random.Generator, size: int, sigma2: float = 1.0) -> np.ndarray:
        sigma = math.sqrt(sigma2)
        if self.kind == "gaussian":
            z = rng.standard_normal(size)
        elif self.kind == "student_t":
            z = rng.standard_t(self.df, size) * math.sqrt((self.df - 2.0) / self.df)
        else:
            root3 = math.sqrt(3.0)
            z = rng.uniform(-root3, root3, size)
        return sigma * z

    def fourth_moment(self, sigma2: float = 1.0) -> float:
        """E eps^4 for the standardized law scaled to variance sigma2."""
        if self.kind == "gaussian":
            kurt = 3.0
        elif self.kind == "student_t":
            kurt = 3.0 + 6.0 / (self.df - 4.0)
        else:
            kurt = 9.0 / 5.0
        return kurt * sigma2 * sigma2

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.df is not None:
            out["df"] = self.df
        return out


GAUSSIAN = ErrorLaw()


@dataclass(frozen=True, eq=False)
class SeriesData:
    """An observed path Y_1..Y_n."""

    values: np.ndarray
    likelihood_start: int = field(default=LIKELIHOOD_START, init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size < MIN_LENGTH:
            raise InvalidLength(f"need at least {MIN_LENGTH} observations, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def n_terms(self) -> int:
        """Number of likelihood terms, t = 3..n."""
        return self.n - 2

    def lagged(self) -> tuple[np.ndarray, np.ndarray]:
        """(Y_t, Y_{t-2}) for t = 3..n."""
        return self.values[2:], self.values[:-2]

    def __len__(self) -> int:
        return self.n


class Method(str, Enum):
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class StationarityReport:
    phi: float
    b: float
    gamma: float
    std_error: float
    is_stationary: bool
    method: Method

    @property
    def is_boundary(self) -> bool:
        """gamma < 0 but within the two-standard-error band."""
        return self.gamma < 0 and not self.is_stationary

    def to_record(self) -> dict:
        return {
            "phi": self.phi,
            "b": self.b,
            "gamma": self.gamma if math.isfinite(self.gamma) else None,
            "std_error": self.std_error,
            "stationary": self.is_stationary,
        }


# ---------------------------------------------------------------------------
# Lyapunov exponent gamma = E ln|phi + b eps|


@lru_cache(maxsize=8)
def _legendre_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


def _panel_edges(a: float, width: float = 12.0, grading: float = 0.2, levels: int = 22) -> np.ndarray:
    lo, hi = a - width, a + width
    if lo > 1.0:
        return np.linspace(lo, hi, int(2 * width) + 1)
    geometric = grading ** np.arange(levels, -1, -1)  # rho^levels .. 1
    n_uniform = max(1, int(math.ceil(hi - 1.0)))
    uniform = np.linspace(1.0, hi, n_uniform + 1)[1:]
    return np.concatenate(([0.0], geometric, uniform))


def _composite_legendre(edges: np.ndarray, order: int, f) -> float:
    x, w = _legendre_rule(order)
    left, right = edges[:-1, None], edges[1:, None]
    half = 0.5 * (right - left)
    nodes = left + half * (x[None, :] + 1.0)
    return float(np.sum(half * w[None, :] * f(nodes)))


def expected_log_abs_shifted_normal(z0: float, order: int = 64) -> tuple[float, float]:
    """E ln|Z - z0| for standard normal Z, with an error estimate.

    The integral is folded onto u = |Z - z0| > 0, where the integrand is
    ln(u) times a smooth Gaussian sum. Panels are graded geometrically into
    the log singularity at u = 0 and uniform elsewhere.
    """
    a = abs(float(z0))
    edges = _panel_edges(a)
    norm = 1.0 / math.sqrt(2.0 * math.pi)

    def integrand(u):
        return np.log(u) * norm * (np.exp(-0.5 * (u - a) ** 2) + np.exp(-0.5 * (u + a) ** 2))

    fine = _composite_legendre(edges, order, integrand)
    coarse = _composite_legendre(edges, max(order // 2, 2), integrand)
    return fine, abs(fine - coarse)


@lru_cache(maxsize=4096)
def _gamma_cached(phi, b, sigma2, law, method, budget, seed):
    if b == 0.0:
        gamma = math.log(abs(phi)) if phi != 0.0 else -math.inf
        return gamma, 0.0
    c = b * math.sqrt(sigma2)
    if method is Method.QUADRATURE:
        value, err = expected_log_abs_shifted_normal(-phi / c, order=budget)
        return math.log(abs(c)) + value, err
    rng = stream(seed, 0x5747)
    half = law.draw(rng, (budget + 1) // 2, sigma2)
    eps = np.concatenate((half, -half))  # antithetic: keeps gamma(b) == gamma(-b)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(phi + b * eps))
    return float(np.mean(logs)), float(np.std(logs, ddof=1) / math.sqrt(logs.size))


def stationarity_gamma(
    params: ModelParams,
    law: ErrorLaw = GAUSSIAN,
    method: Method | str | None = None,
    budget: int | None = None,
    seed: int = 0,
) -> StationarityReport:
    """Estimate gamma = E ln|phi + b eps_1| and decide stationarity.

    ``budget`` is the Gauss-Legendre order per panel for quadrature (>= 64)
    or the number of draws for Monte Carlo (>= 1000). The point is declared
    stationary only if ``gamma + 2 * std_error < 0``.
    """
    if method is None:
        method = Method.QUADRATURE if law.is_gaussian else Method.MONTE_CARLO
    method = Method(method)
    if method is Method.QUADRATURE:
        if not law.is_gaussian:
            raise UnsupportedQuadrature(f"quadrature is only available for the gaussian law, not {law.kind}")
        budget = 64 if budget is None else int(budget)
        if budget < 64:
            raise ValueError("quadrature budget must be at least 64 nodes")
    else:
        budget = 200_000 if budget is None else int(budget)
        if budget < 1000:
            raise ValueError("Monte Carlo budget must be at least 1000 draws")
    gamma, err = _gamma_cached(
        float(params.phi), float(params.b), float(params.sigma2), law, method, budget, int(seed)
    )
    return StationarityReport(
        phi=params.phi,
        b=params.b,
        gamma=gamma,
        std_error=err,
        is_stationary=bool(gamma + 2.0 * err < 0.0),
        method=method,
    )


def region_reports(
    law: ErrorLaw,
    phi_grid: Sequence[float],
    b_grid: Sequence[float],
    sigma2: float = 1.0,
    method: Method | str | None = None,
    budget: int | None = None,
) -> list[list[StationarityReport]]:
    return [
        [stationarity_gamma(ModelParams(0.0, float(phi), sigma2, float(b)), law, method, budget) for b in b_grid]
        for phi in phi_grid
    ]


def stationarity_region(
    law: ErrorLaw,
    phi_grid: Sequence[float],
    b_grid: Sequence[float],
    sigma2: float = 1.0,
    method: Method | str | None = None,
    budget: int | None = None,
) -> np.ndarray:
    """Boolean mask of shape (len(phi_grid), len(b_grid))."""
    reports = region_reports(law, phi_grid, b_grid, sigma2, method, budget)
    return np.array([[r.is_stationary for r in row] for row in reports], dtype=bool)


# ---------------------------------------------------------------------------
# Simulation


def recursion(params: ModelParams, eps: np.ndarray) -> np.ndarray:
    """Run the model from Y_{-1} = Y_0 = 0 on innovations eps_0..eps_m.

    Returns Y_1..Y_m.
    """
    e = np.asarray(eps, dtype=float).tolist()
    mu, phi, b = float(params.mu), float(params.phi), float(params.b)
    out = [0.0] * (len(e) - 1)
    y2, y1 = 0.0, 0.0  # Y_{t-2}, Y_{t-1}
    for t in range(1, len(e)):
        y = mu + (phi + b * e[t - 1]) * y2 + e[t]
        out[t - 1] = y
        y2, y1 = y1, y
    return np.array(out)


def simulate_with_innovations(
    params: ModelParams,
    law: ErrorLaw = GAUSSIAN,
    n: int = 1000,
    burn_in: int = DEFAULT_BURN_IN,
    seed: SeedLike = 0,
    force: bool = False,
) -> tuple[SeriesData, np.ndarray]:
    """Like :func:`simulate` but also returns the aligned innovations.

    The second value holds eps_{t} for the returned Y_t, prefixed by the
    ``burn_in + 1`` earlier draws, so ``eps[-n:]`` lines up with ``Y``.
    """
    n = int(n)
    burn_in = int(burn_in)
    if n < MIN_LENGTH:
        raise InvalidLength(f"n must be at least {MIN_LENGTH}, got {n}")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    if not force:
        report = stationarity_gamma(params, law)
        if not report.is_stationary:
            raise NonStationaryParams(
                f"gamma = E ln|phi + b eps| = {report.gamma:.6g} (+/- {report.std_error:.2g}) is not below 0 "
                f"for phi={params.phi}, b={params.b}, sigma2={params.sigma2}"
            )
    rng = as_generator(seed)
    eps = law.draw(rng, burn_in + n + 1, params.sigma2)
    y = recursion(params, eps)
    return SeriesData(y[-n:]), eps


def simulate(
    params: ModelParams,
    law: ErrorLaw = GAUSSIAN,
    n: int = 1000,
    burn_in: int = DEFAULT_BURN_IN,
    seed: SeedLike = 0,
    force: bool = False,
) -> SeriesData:
    """Simulate a path of length n after discarding burn_in values.

    Raises NonStationaryParams unless the Lyapunov criterion holds or
    ``force`` is set.
    """
    return simulate_with_innovations(params, law, n, burn_in, seed, force)[0]


def representation_truncated(params: ModelParams, eps_path: Sequence[float], depth: int) -> float:
    """Truncated stationary representation of Y_t.

    ``eps_path[k]`` is eps_{t-k}; at least ``2 * depth + 1`` entries needed.
    """
    depth = int(depth)
    if depth < 1:
        raise ValueError("depth must be at least 1")
    e = np.asarray(eps_path, dtype=float)
    if e.size < 2 * depth + 1:
        raise InsufficientHistory(f"need {2 * depth + 1} innovations for depth {depth}, got {e.size}")
    factors = params.phi + params.b * e[1 : 2 * depth : 2]
    levels = params.mu + e[2 : 2 * depth + 1 : 2]
    return float(params.mu + e[0] + np.sum(np.cumprod(factors) * levels))


# ---------------------------------------------------------------------------
# I/O


def write_series_csv(path: str | Path, data: SeriesData) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("y\n")
        for v in data.values:
            fh.write(f"{v:.17g}\n")


def read_series_csv(path: str | Path) -> SeriesData:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidLength(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if "y" not in header:
        raise ValueError(f"{path}: expected a column named 'y', got {header}")
    col = header.index("y")
    values = [float(r[col]) for r in rows[1:] if r]
    return SeriesData(np.array(values))
