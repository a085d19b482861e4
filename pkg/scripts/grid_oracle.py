"""Brute-force 4-D grid maxima of the quasi-likelihood on small fixtures.

Evaluates the likelihood directly on (mu, phi, sigma2, b2) grids, with no use
of the closed-form profiling, and zooms in until the grid spacing is 1e-3 in
every coordinate. The datasets and maxima are frozen to
tests/data/grid_oracle.json, which the acceptance suite reads.

    python scripts/grid_oracle.py
"""
from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from bilinear_gmle.model import ModelParams, simulate

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "grid_oracle.json"

FIXTURES = [
    # (mu, phi, sigma2, b, seed)
    (0.0, 0.9, 1.0, 1.0, 101),
    (0.0, 0.0, 1.0, 1.0, 102),
    (0.0, 0.9, 1.0, 0.1, 103),
    (0.0, 0.0, 1.0, -1.0, 104),
    (0.5, 0.3, 1.0, 0.5, 105),
    (-0.3, -0.5, 2.0, 0.4, 106),
    (1.0, 0.5, 0.5, 0.8, 107),
    (0.0, 0.9, 1.0, -0.1, 108),
    (0.2, 0.0, 1.0, 0.0, 109),
    (0.0, 0.6, 1.5, 1.2, 110),
]
N = 50
RESOLUTION = 1e-3
# the default estimation box with b2 allowed down to 0
LOWER = np.array([-10.0, -10.0, 1e-6, 0.0])
UPPER = np.array([10.0, 10.0, 1e3, 25.0])


def loglik_grid(y, mu, phi, s2, b2):
    """Total log-likelihood on the outer product of four 1-D grids."""
    yt, x = y[2:], y[:-2]
    M, P, S, B = np.meshgrid(mu, phi, s2, b2, indexing="ij")
    out = np.zeros(M.shape)
    for a, b in zip(yt, x):
        v = S * (1.0 + B * b * b)
        r = a - M - P * b
        out -= 0.5 * (np.log(v) + r * r / v)
    return out


def best_on(y, axes):
    ll = loglik_grid(y, *axes)
    idx = np.unravel_index(np.argmax(ll), ll.shape)
    return float(ll[idx]), np.array([ax[i] for ax, i in zip(axes, idx)])


def zoom(y, center, spacing, points=11):
    while True:
        axes = []
        for c, h, lb, ub in zip(center, spacing, LOWER, UPPER):
            ax = c + h * np.arange(-(points // 2), points // 2 + 1)
            axes.append(ax[(ax >= lb) & (ax <= ub)])
        value, point = best_on(y, axes)
        moved = not np.allclose(point, center)
        center = point
        if np.all(spacing <= RESOLUTION * (1 + 1e-9)) and not moved:
            return value, center
        if not moved:
            spacing = np.maximum(spacing / 2.5, RESOLUTION)


def oracle(y):
    mu = np.linspace(-3, 3, 41)
    phi = np.linspace(-1.5, 1.5, 31)
    s2 = np.geomspace(0.05, 20, 25)
    b2 = np.concatenate(([0.0], np.geomspace(1e-3, 9.0, 24)))
    ll = loglik_grid(y, mu, phi, s2, b2)
    flat = np.argsort(ll, axis=None)[::-1]
    best_value, best_point = -np.inf, None
    seen = []
    for k in flat:
        idx = np.unravel_index(k, ll.shape)
        if any(max(abs(a - b) for a, b in zip(idx, s)) <= 2 for s in seen):
            continue
        seen.append(idx)
        start = np.array([mu[idx[0]], phi[idx[1]], s2[idx[2]], b2[idx[3]]])
        if idx[3] == b2.size - 1:
            start[3] = UPPER[3]
        spacing = np.array([0.15, 0.1, max(0.1 * start[2], 0.01), max(0.2 * start[3], 0.01)])
        value, point = zoom(y, start, spacing)
        if value > best_value:
            best_value, best_point = value, point
        if len(seen) >= 5:
            break
    return best_value, best_point


def main():
    records = []
    t0 = time.time()
    for mu, phi, s2, b, seed in FIXTURES:
        data = simulate(ModelParams(mu, phi, s2, b), n=N, seed=seed)
        value, point = oracle(data.values)
        records.append({
            "params": {"mu": mu, "phi": phi, "sigma2": s2, "b": b, "seed": seed},
            "y": [float(v) for v in data.values],
            "grid_max": value,
            "grid_argmax": [float(v) for v in point],
        })
        print(f"seed {seed}: grid max {value:.10f} at {np.round(point, 4)}  ({time.time() - t0:.1f}s)")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"resolution": RESOLUTION, "n": N, "fixtures": records}, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
