import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qite import approx

TAU = 20.0
LAM = 0.7735026918962575 + 1.0 / (2 * TAU)  # |lambda_0| + 1/(2 tau)


def test_alpha_lower_bound_asymptote():
    assert approx.alpha_lower_bound(1e9) == pytest.approx(math.exp(-0.5), rel=1e-6)
    taus = [2, 5, 10, 50, 1000]
    bounds = [approx.alpha_lower_bound(t) for t in taus]
    assert all(a > b for a, b in zip(bounds, bounds[1:]))
    assert all(math.exp(-0.5) < b < 1.0 for b in bounds[1:])
    with pytest.raises(ValueError):
        approx.alpha_lower_bound(1.0)


def test_choose_mu():
    # alpha = 0.85 means mu = -ln(0.85)/tau ~= 1/(6.153 tau)
    mu = approx.choose_mu(TAU, 0.85)
    assert mu * TAU == pytest.approx(1.0 / 6.153, rel=1e-3)
    with pytest.raises(ValueError):
        approx.choose_mu(TAU, 1.2)
    with pytest.raises(ValueError):
        approx.choose_mu(TAU, 0.3)  # below the admissibility floor


def test_beta_ramp():
    assert approx.beta(-1.0) == 0.0 and approx.beta(0.0) == 0.0
    assert approx.beta(1.0) == 1.0 and approx.beta(2.0) == 1.0
    assert approx.beta(0.5) == pytest.approx(0.5)
    zs = np.linspace(0, 1, 101)
    vals = [approx.beta(z) for z in zs]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_bump_rho():
    mu = 0.05
    assert approx.bump_rho(-1.0, 0.8, mu) == 1.0
    assert approx.bump_rho(0.8, 0.8, mu) == 1.0
    assert approx.bump_rho(0.8 + mu, 0.8, mu) == 0.0
    assert approx.bump_rho(-1.0 - mu, 0.8, mu) == 0.0
    assert 0.0 < approx.bump_rho(0.8 + mu / 2, 0.8, mu) < 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        approx.ApproxSpec(tau=TAU, lam=1.3, mu=0.001)
    with pytest.raises(ValueError):
        approx.ApproxSpec(tau=TAU, lam=0.8, mu=0.2)  # mu > 1/tau
    with pytest.raises(ValueError):
        approx.ApproxSpec(tau=TAU, lam=0.8, mu=0.04)  # alpha below e^{-1/2}
    spec = approx.make_spec(TAU, LAM, 0.85)
    assert spec.alpha == pytest.approx(0.85)


def test_target_matches_exact_on_window():
    spec = approx.make_spec(TAU, LAM, 0.85)
    xs = np.linspace(-1.0, spec.lam, 500)
    np.testing.assert_allclose(approx.target_g(xs, spec), spec.f_exact(xs),
                               atol=1e-15)
    # vanishes outside the bump support, bounded by 1 everywhere
    assert approx.target_g(spec.lam + 2 * spec.mu, spec) == 0.0
    assert approx.target_g(-1.0 - 2 * spec.mu, spec) == 0.0
    grid = np.linspace(-math.pi, math.pi, 4001)
    assert np.max(np.abs(approx.target_g(grid, spec))) <= 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31), st.integers(30, 200))
def test_values_on_circle_matches_horner(degree, seed, m):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
    poly = approx.TrigPolynomial(c)
    xs, vals = poly.values_on_circle(m)
    np.testing.assert_allclose(vals, poly(xs), atol=1e-9)


def test_fourier_fit_capped_at_one():
    spec = approx.make_spec(TAU, LAM, 0.85)
    for degree in (64, 600, 2000):
        assert approx.fourier_fit(spec, degree).sup_norm() <= 1.0 + 1e-12


def test_fit_degree_goldens():
    spec = approx.make_spec(TAU, LAM, 0.85)
    # measured sup error at degree 64*tau: far too coarse for 1e-4 targets
    poly = approx.fourier_fit(spec, 1280)
    eps_1280 = approx.sup_error(spec.f_exact, poly, (-1.0, spec.lam))
    assert 3e-3 < eps_1280 < 1e-2
    fitted_poly, fitted = approx.fit_to_tolerance(spec, 1e-4)
    assert fitted.eps <= 1e-4
    assert 4000 < fitted.degree < 5000
    assert fitted_poly.degree == fitted.degree


def test_fit_unreachable_target_warns_and_returns_best():
    spec = approx.make_spec(TAU, LAM, 0.85)
    with pytest.warns(UserWarning, match="degree cap"):
        poly, fitted = approx.fit_to_tolerance(spec, 1e-4, degree_cap=200)
    assert fitted.degree == 200
    assert fitted.eps > 1e-4
    assert poly.degree == 200


def test_eps_floor_rejected():
    spec = approx.make_spec(TAU, LAM, 0.85)
    with pytest.raises(ValueError):
        approx.fit_to_tolerance(spec, 1e-12)


def test_trig_polynomial_json_roundtrip():
    rng = np.random.default_rng(0)
    poly = approx.TrigPolynomial(rng.normal(size=9) + 1j * rng.normal(size=9))
    again = approx.TrigPolynomial.from_json(poly.to_json())
    np.testing.assert_array_equal(again.coeffs, poly.coeffs)
    with pytest.raises(ValueError):
        approx.TrigPolynomial(np.ones(4))  # even length


def test_sup_error_guards():
    poly = approx.TrigPolynomial(np.array([0.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        approx.sup_error(np.cos, poly, (0.5, 0.5))
    # F = e^{i*0*x} picks the k=0 coefficient: F == 1 everywhere
    one = approx.TrigPolynomial(np.array([0.0, 1.0, 0.0]) * 0 + [0, 1, 0])
    assert approx.sup_error(lambda x: np.ones_like(x), one, (-1.0, 1.0)) < 1e-12


def test_fit_report_shape():
    spec = approx.make_spec(TAU, LAM, 0.85)
    poly = approx.fourier_fit(spec, 512)
    rows = approx.fit_report(spec, poly, grid_points=101)
    assert len(rows) == 101
    xs = [r[0] for r in rows]
    assert xs[0] == -1.0 and xs[-1] == pytest.approx(spec.lam)
    assert all(r[3] >= 0 for r in rows)
