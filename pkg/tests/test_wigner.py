import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lindblad_lab.errors import CriticalDampingFallback
from lindblad_lab.model import OscillatorModel, random_model, thermal_model
from lindblad_lab.moments import propagate_mean, propagate_variances
from lindblad_lab.wigner import WignerGaussian, coherent_wigner, evolve, marginals, weyl_coefficients, weyl_flow


def weyl_ode(model, x0, t):
    m, w, lam, mu, hb = model.m, model.omega, model.lam, model.mu, model.hbar

    def f(s, y):
        xi, eta, g = y
        return [
            -(lam + mu) * xi - eta / m,
            m * w**2 * xi - (lam - mu) * eta,
            -(model.D_pp * xi**2 + model.D_qq * eta**2 - 2 * model.D_pq * xi * eta) / hb**2,
        ]

    return solve_ivp(f, (0, t), [*x0, 0.0], method="DOP853", rtol=1e-13, atol=1e-15).y[:, -1]


def gauss_legendre_g(model, x0, t, n=64):
    """Quadrature oracle for g(t) along the closed-form trajectory."""
    s, wts = np.polynomial.legendre.leggauss(n)
    s = 0.5 * t * (s + 1)
    total = 0.0
    for si, wi in zip(s, wts):
        xi, eta = weyl_coefficients(model, si).abcd @ np.asarray(x0)
        total += wi * (model.D_pp * xi**2 + model.D_qq * eta**2 - 2 * model.D_pq * xi * eta)
    return -0.5 * t * total / model.hbar**2


def test_evolve_identity_and_engine(models):
    w0 = WignerGaussian((0.3, -0.2), (1.1, 0.7, 0.05))
    for mdl in models:
        assert evolve(mdl, w0, 0.0) == w0
        w1 = evolve(mdl, w0, 1.4)
        assert np.allclose(w1.mean, propagate_mean(mdl, w0.mean, 1.4), rtol=1e-12, atol=1e-14)
        assert np.allclose(w1.cov, propagate_variances(mdl, w0.cov, 1.4), rtol=1e-12, atol=1e-14)


def test_coherent_marginal():
    mdl = random_model(np.random.default_rng(8), "Underdamped")
    w0 = coherent_wigner(mdl, 0.8 + 0.3j)
    assert w0.cov[1] == pytest.approx(mdl.hbar**2 / (4 * w0.cov[0]))
    w = evolve(mdl, w0, 2.0)
    px, py = marginals(w)
    x = np.linspace(-4, 4, 9)
    expect = np.exp(-((x - w.mean[0]) ** 2) / (2 * w.cov[0])) / np.sqrt(2 * np.pi * w.cov[0])
    assert np.allclose(px.pdf(x), expect, rtol=1e-14)
    # integrate f over y numerically to reproduce the coordinate marginal
    y = np.linspace(w.mean[1] - 12 * math.sqrt(w.cov[1]), w.mean[1] + 12 * math.sqrt(w.cov[1]), 4001)
    num = np.trapezoid(w.density(x[:, None], y[None, :]), y, axis=1)
    assert np.allclose(num, expect, rtol=1e-9, atol=1e-14)


def test_vacuum_marginals():
    mdl = OscillatorModel(2.0, 1.5, 0.1, 0.0, 1.0, 1.0, 0.0)
    px, py = marginals(coherent_wigner(mdl))
    assert px.mean == 0 and py.mean == 0
    assert px.var == pytest.approx(1 / (2 * 2.0 * 1.5)) and py.var == pytest.approx(2.0 * 1.5 / 2)


def test_gibbs_marginals_at_long_time():
    m, w, lam, kT = 1.0, 1.3, 0.4, 0.5
    mdl = thermal_model(m, w, lam, 0.1, kT)
    out = evolve(mdl, coherent_wigner(mdl, 1.0), 50 / lam)
    c = 1 / math.tanh(w / (2 * kT))
    px, py = marginals(out)
    assert px.var == pytest.approx(c / (2 * m * w), abs=1e-6)
    assert py.var == pytest.approx(m * w * c / 2, abs=1e-6)


def test_density_normalized():
    w = WignerGaussian((0.2, 0.1), (0.9, 1.4, 0.3))
    x = np.linspace(-12, 12, 601)
    f = w.density(x[:, None], x[None, :])
    assert np.trapezoid(np.trapezoid(f, x, axis=1), x) == pytest.approx(1.0, abs=1e-10)


def test_weyl_trivial(models):
    for mdl in models:
        x, g = weyl_flow(mdl, (0.0, 0.0), 2.0)
        assert np.all(x == 0) and g == 0
        flow = weyl_coefficients(mdl, 0.0)
        assert np.allclose(flow.abcd, np.eye(2), atol=1e-15) and flow.g(1.0, 1.0) == 0


def test_weyl_vs_ode(models):
    for mdl in models:
        for t in (0.5, 3.0):
            x, g = weyl_flow(mdl, (0.7, -1.2), t)
            ref = weyl_ode(mdl, (0.7, -1.2), t)
            assert np.allclose(x, ref[:2], rtol=1e-10, atol=1e-13)
            assert g == pytest.approx(ref[2], rel=1e-9, abs=1e-13)
            assert g == pytest.approx(gauss_legendre_g(mdl, (0.7, -1.2), t), rel=1e-10, abs=1e-13)


def test_commutator_decays_as_real_exponential(models):
    for mdl in models:
        for t in (0.4, 2.2):
            assert weyl_coefficients(mdl, t).commutator == pytest.approx(math.exp(-2 * mdl.lam * t), rel=1e-12)


def test_g_nonpositive(rng):
    for _ in range(30):
        mdl = random_model(rng)
        x0 = rng.normal(size=2)
        for t in np.linspace(0, 10, 11):
            assert weyl_flow(mdl, x0, t)[1] <= 0


def test_g_derivative(models):
    h = 1e-5
    for mdl in models:
        x0 = (0.4, 0.9)
        t = 1.3
        dg = (weyl_flow(mdl, x0, t + h)[1] - weyl_flow(mdl, x0, t - h)[1]) / (2 * h)
        xi, eta = weyl_flow(mdl, x0, t)[0]
        expect = -(mdl.D_pp * xi**2 + mdl.D_qq * eta**2 - 2 * mdl.D_pq * xi * eta) / mdl.hbar**2
        assert dg == pytest.approx(expect, rel=1e-6, abs=1e-10)


def test_fourier_consistency(models, rng):
    w0 = WignerGaussian((0.5, -0.4), (0.8, 0.9, 0.1))
    for mdl in models:
        t = 1.7
        wt = evolve(mdl, w0, t)
        for _ in range(25):
            x0 = rng.normal(size=2)
            (xi, eta), g = weyl_flow(mdl, x0, t)
            lhs = wt.characteristic(*x0, mdl.hbar)
            rhs = w0.characteristic(xi, eta, mdl.hbar) * np.exp(g)
            assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


def test_uncertainty_preserved(models):
    grid = np.linspace(0, 20, 200)
    for mdl in models:
        w0 = coherent_wigner(mdl, 0.5)
        for t in grid:
            assert evolve(mdl, w0, t).det >= mdl.hbar**2 / 4 * (1 - 1e-9)


def test_critical_fallback():
    mdl = OscillatorModel(1.0, 1.0, 1.5, 1.0, 0.8, 0.9, 0.1)
    with pytest.warns(CriticalDampingFallback):
        x, g = weyl_flow(mdl, (0.3, 0.8), 1.1)
    ref = weyl_ode(mdl, (0.3, 0.8), 1.1)
    assert np.allclose([*x, g], ref, rtol=1e-10, atol=1e-13)
