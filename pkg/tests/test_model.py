import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from bilinear_gmle import ErrorLaw, ModelParams, SeriesData, representation_truncated, simulate
from bilinear_gmle.errors import InsufficientHistory, InvalidLength, NonStationaryParams, UnsupportedQuadrature
from bilinear_gmle.model import (
    GAUSS_E_LOG_ABS,
    Method,
    expected_log_abs_shifted_normal,
    read_series_csv,
    recursion,
    simulate_with_innovations,
    stationarity_gamma,
    stationarity_region,
    write_series_csv,
)
from bilinear_gmle.rng import stream

LAWS = [ErrorLaw(), ErrorLaw("student_t", 6.0), ErrorLaw("uniform")]


def test_model_params_validation():
    assert ModelParams(0, 0.5, 2.0, -0.7).b_squared() == approx(0.49)
    with pytest.raises(ValueError):
        ModelParams(0, 0.5, 0.0, 0.1)


def test_error_law_rejects_light_df():
    with pytest.raises(ValueError):
        ErrorLaw("student_t", 4.0)
    with pytest.raises(ValueError):
        ErrorLaw("gaussian", 5.0)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.kind)
def test_error_law_moments(law):
    eps = law.draw(stream(3), 400_000, sigma2=2.5)
    assert abs(eps.mean()) < 4 * math.sqrt(2.5 / eps.size)
    assert eps.var() == approx(2.5, rel=0.02)
    assert np.mean(eps**4) == approx(law.fourth_moment(2.5), rel=0.1)


def test_iid_reduction():
    y = simulate(ModelParams(5.0, 0.0, 1.0, 0.0), n=10_000, burn_in=500, seed=1).values
    assert abs(y.mean() - 5.0) < 0.05
    assert abs(y.var() - 1.0) < 0.05


def test_simulate_is_deterministic():
    p = ModelParams(0.0, 0.9, 1.0, 0.1)
    a = simulate(p, n=500, seed=42).values
    b = simulate(p, n=500, seed=42).values
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, simulate(p, n=500, seed=43).values)


def test_simulate_guards():
    with pytest.raises(NonStationaryParams):
        simulate(ModelParams(0, 0, 1, 2.0), n=100)
    with pytest.raises(InvalidLength):
        simulate(ModelParams(0, 0, 1, 0.5), n=4)
    y = simulate(ModelParams(0, 0, 1, 2.0), n=50, burn_in=0, force=True)
    assert y.n == 50


def test_recursion_matches_definition():
    p = ModelParams(0.3, -0.4, 1.0, 0.7)
    eps = stream(9).standard_normal(30)
    y = recursion(p, eps)
    full = np.concatenate(([0.0, 0.0], y))  # Y_{-1}, Y_0, Y_1, ...
    for t in range(1, 30):
        expect = p.mu + p.phi * full[t - 1] + p.b * full[t - 1] * eps[t - 1] + eps[t]
        assert full[t + 1] == approx(expect, abs=1e-14)


def test_lag_one_product_matches_representation_oracle():
    p = ModelParams(0.0, 0.0, 1.0, 1.0)
    y = simulate(p, n=100_000, seed=5).values
    prod = y[1:] * y[:-1]
    mean, se = prod.mean(), prod.std() / math.sqrt(prod.size)
    # E[Y] from the stationary representation on independent innovation paths
    rng = stream(6)
    depth = 50
    eps = rng.standard_normal((100_000, 2 * depth + 1))
    ey = np.mean([representation_truncated(p, row, depth) for row in eps])
    assert abs(mean - p.b * p.sigma2 * ey) < 3 * se


def test_conditional_moments():
    p = ModelParams(0.2, 0.5, 1.5, 0.6)
    y = simulate(p, n=50_000, seed=8).values
    resid = y[2:] - p.mu - p.phi * y[:-2]
    x = y[:-2]
    # mean residual is uncorrelated with F_{t-2} regressors
    for reg in (np.ones_like(x), x, np.tanh(x)):
        z = resid * reg
        assert abs(z.mean()) < 3 * z.std() / math.sqrt(z.size)
    scaled = resid**2 / (1 + p.b_squared() * x**2)
    assert abs(scaled.mean() - p.sigma2) < 3 * scaled.std() / math.sqrt(scaled.size)


# --- stationarity criterion -------------------------------------------------


def test_gamma_without_bilinear_term():
    r = stationarity_gamma(ModelParams(0, 0.5, 1, 0.0))
    assert r.gamma == approx(math.log(0.5), abs=1e-15)
    assert r.is_stationary


@pytest.mark.parametrize("b, stationary", [(1.5, True), (2.0, False)])
def test_gamma_closed_form(b, stationary):
    r = stationarity_gamma(ModelParams(0, 0, 1, b))
    assert r.gamma == approx(math.log(b) + GAUSS_E_LOG_ABS, abs=1e-10)
    assert r.is_stationary is stationary


def test_gamma_closed_form_vs_large_monte_carlo():
    mc = stationarity_gamma(ModelParams(0, 0, 1, 1.5), method="monte_carlo", budget=10_000_000)
    assert mc.gamma == approx(-0.2297, abs=3 * mc.std_error + 1e-4)
    assert abs(mc.gamma - (math.log(1.5) + GAUSS_E_LOG_ABS)) < 3 * mc.std_error


def test_quadrature_against_scipy_log_weight():
    from scipy import integrate, stats

    for z0 in (0.0, 0.3, -1.7, 4.0, 15.0):
        value, err = expected_log_abs_shifted_normal(z0)
        # integrate ln|u| * pdf(u + z0) with QUADPACK's algebraic-log weight on each side of 0
        right = integrate.quad(lambda u: stats.norm.pdf(u + z0), 0, 40, weight="alg-loga", wvar=(0, 0))[0]
        left = integrate.quad(lambda u: stats.norm.pdf(z0 - u), 0, 40, weight="alg-loga", wvar=(0, 0))[0]
        assert value == approx(right + left, abs=1e-9)
        assert err < 1e-10


def test_quadrature_rejects_non_gaussian():
    with pytest.raises(UnsupportedQuadrature):
        stationarity_gamma(ModelParams(0, 0, 1, 1.0), ErrorLaw("uniform"), method=Method.QUADRATURE)
    with pytest.raises(ValueError):
        stationarity_gamma(ModelParams(0, 0, 1, 1.0), budget=32)


def test_region_examples():
    mask = stationarity_region(ErrorLaw(), [0.0], [1.8, 1.95])
    assert mask.tolist() == [[True, False]]
    assert stationarity_region(ErrorLaw(), [1.0], [0.5])[0, 0]
    assert stationarity_gamma(ModelParams(0, 1.0, 1, 0.5)).gamma < 0


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.kind)
def test_region_b_zero_row(law):
    phis = np.array([-1.5, -1.0, -0.999, -0.3, 0.0, 0.5, 0.999, 1.0, 1.2])
    mask = stationarity_region(law, phis, [0.0])
    assert mask[:, 0].tolist() == list(np.abs(phis) < 1)


@pytest.mark.parametrize("law", [ErrorLaw(), ErrorLaw("uniform")], ids=lambda l: l.kind)
def test_region_symmetric_in_b(law):
    phis = np.linspace(-1.2, 1.2, 7)
    bs = np.linspace(0.0, 2.5, 6)
    kw = {"budget": 20_000} if not law.is_gaussian else {}
    pos = stationarity_region(law, phis, bs, **kw)
    neg = stationarity_region(law, phis, -bs, **kw)
    assert np.array_equal(pos, neg)


@settings(max_examples=60, deadline=None)
@given(phi=st.floats(-2, 2), b=st.floats(0.01, 3))
def test_gamma_symmetries(phi, b):
    g = stationarity_gamma(ModelParams(0, phi, 1, b)).gamma
    assert stationarity_gamma(ModelParams(0, phi, 1, -b)).gamma == approx(g, abs=1e-12)
    assert stationarity_gamma(ModelParams(0, -phi, 1, -b)).gamma == approx(g, abs=1e-12)
    # Jensen: 2 gamma < ln(phi^2 + sigma2 b^2)
    assert 2 * g < math.log(phi * phi + b * b)


@settings(max_examples=40, deadline=None)
@given(b=st.floats(1e-3, 50))
def test_gamma_closed_form_property(b):
    g = stationarity_gamma(ModelParams(0, 0, 1, b)).gamma
    assert g == approx(math.log(b) + GAUSS_E_LOG_ABS, abs=1e-9)


# --- stationary representation ------------------------------------------------


def test_representation_trivial_cases():
    eps = stream(4).standard_normal(41)
    p = ModelParams(1.5, 0.0, 1.0, 0.0)
    assert representation_truncated(p, eps, 20) == approx(1.5 + eps[0])
    p = ModelParams(1.5, 0.6, 1.0, 0.0)
    expect = 1.5 + eps[0] + sum(0.6**i * (1.5 + eps[2 * i]) for i in range(1, 21))
    assert representation_truncated(p, eps, 20) == approx(expect, rel=1e-13)


def test_representation_needs_history():
    with pytest.raises(InsufficientHistory):
        representation_truncated(ModelParams(0, 0.5, 1, 0.5), np.zeros(10), 5)


def test_representation_matches_recursion():
    p = ModelParams(0.5, 0.3, 1.0, 0.5)
    data, eps = simulate_with_innovations(p, n=400, burn_in=500, seed=21)
    y = data.values
    offset = eps.size - y.size  # eps[offset + k] pairs with y[k]
    diffs = [
        y[k] - representation_truncated(p, eps[offset + k :: -1], 50)
        for k in range(y.size)
    ]
    assert math.sqrt(np.mean(np.square(diffs))) < 1e-6


# --- I/O -----------------------------------------------------------------------


def test_csv_roundtrip_is_exact(tmp_path):
    data = simulate(ModelParams(0, 0.9, 1, 1.0), n=300, seed=2)
    path = tmp_path / "y.csv"
    write_series_csv(path, data)
    assert path.read_text().splitlines()[0] == "y"
    back = read_series_csv(path)
    assert back.values.tobytes() == data.values.tobytes()


def test_series_data_validation():
    with pytest.raises(InvalidLength):
        SeriesData(np.arange(4.0))
    with pytest.raises(ValueError):
        SeriesData(np.array([1.0, 2.0, np.nan, 3.0, 4.0, 5.0]))
    s = SeriesData(np.arange(10.0))
    assert s.n == 10 and s.n_terms == 8 and s.likelihood_start == 3
    y_t, y_tm2 = s.lagged()
    assert y_t[0] == 2.0 and y_tm2[0] == 0.0


def test_report_record():
    rec = stationarity_gamma(ModelParams(0, 0.0, 1, 0.0)).to_record()
    assert rec["gamma"] is None and rec["stationary"] is True
    assert set(rec) == {"phi", "b", "gamma", "std_error", "stationary"}
