import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.special import gammaln

from lindblad_lab.errors import DegenerateCaseError, TruncationError
from lindblad_lab.fock import (
    FockDensityMatrix,
    GenFunState,
    coherent_state,
    density_from_genfun,
    density_matrix,
    genfun_asymptotes,
    genfun_evolve,
    genfun_value,
    glauber_init,
    moments_from_rho,
    number_state,
    oracle_evolve,
    thermal_init,
    thermal_state,
)
from lindblad_lab.model import OscillatorModel, derive, minimal_diffusion_model, random_model, thermal_model
from lindblad_lab.moments import propagate_mean, propagate_variances


def rif_rhs(model):
    d = derive(model)
    lam, w, mu = model.lam, model.omega, model.mu

    def f(t, y):
        R, I, F = y
        return [
            -2 * lam * R - 2 * w * I - mu * F + 2 * (d.D1.real - mu),
            -2 * lam * I + 2 * w * R - 2 * d.D1.imag,
            -4 * mu * R - 2 * lam * F - 4 * (d.D2 + lam),
        ]

    return f


def cauchy_coefficient(state, m, n, r=0.6, k=64):
    """Taylor coefficient of G by a double contour integral (FFT on a circle)."""
    th = 2 * np.pi * np.arange(k) / k
    z = r * np.exp(1j * th)
    vals = genfun_value(state, z[:, None], z[None, :])
    coef = np.fft.fft2(vals) / k**2
    return coef[m, n] / r ** (m + n) * math.exp(0.5 * (gammaln(m + 1) + gammaln(n + 1)))


@pytest.fixture
def glauber_model():
    return minimal_diffusion_model(1.0, 1.0, 0.3)


def test_rif_vs_ode(models):
    for mdl in models:
        init = thermal_init(0.4, 0.3 + 0.2j)
        y0 = [0.0, 0.0, init.F0]
        sol = solve_ivp(rif_rhs(mdl), (0, 2.0), y0, method="DOP853", rtol=1e-13, atol=1e-15)
        st = genfun_evolve(mdl, init, 2.0)
        ref = sol.y[:, -1]
        assert np.allclose([st.D.real, st.D.imag, st.F], ref, rtol=1e-9, atol=1e-11)


def test_gauge_invariants(models):
    for mdl in models:
        st = genfun_evolve(mdl, thermal_init(0.2, 0.5), 1.1)
        assert st.F**2 / 4 - st.B * st.D == pytest.approx(-st.H, rel=1e-14)
        assert st.A**2 == pytest.approx(-st.H / 4, rel=1e-14)
        assert st.D == st.B.conjugate() and st.E == st.C.conjugate()


def test_stationary_input_is_constant(models):
    for mdl in models:
        R, I, F = genfun_asymptotes(mdl)
        st0 = genfun_evolve(mdl, {"C0": 0j, "B0": complex(R, -I), "F0": F}, 0.0)
        st1 = genfun_evolve(mdl, {"C0": 0j, "B0": complex(R, -I), "F0": F}, 3.7)
        assert np.allclose([st1.B, st1.F, st1.H, st1.C], [st0.B, st0.F, st0.H, 0], rtol=1e-12, atol=1e-13)


def test_thermal_generating_function():
    w, kT = 1.0, 0.8
    mdl = thermal_model(1.0, w, 0.3, 0.0, kT)
    R, I, F = genfun_asymptotes(mdl)
    st = GenFunState.from_BCF(complex(R, -I), 0j, F)
    x = np.array([0.3, -0.2 + 0.1j, 0.5j])
    y = np.array([0.7, 0.4, -0.1])
    e = math.exp(-w / kT)
    assert np.allclose(genfun_value(st, x, y), (1 - e) * np.exp(e * x * y), rtol=1e-13)


def test_bose_einstein():
    w, kT = 1.0, 0.9
    mdl = thermal_model(1.0, w, 0.3, 0.0, kT)
    R, I, F = genfun_asymptotes(mdl)
    rho = density_matrix(GenFunState.from_BCF(complex(R, -I), 0j, F), 21)
    e = math.exp(-w / kT)
    expect = np.diag((1 - e) * e ** np.arange(21))
    assert np.max(np.abs(rho.entries - expect)) < 1e-12


def test_even_family_and_low_elements(models):
    for mdl in models[:6]:
        st = genfun_evolve(mdl, thermal_init(0.3), 1.3)
        assert st.C == 0
        B, A, F, H = st.B, st.A, st.F, st.H
        for m in range(8):
            for n in range(8):
                if (m + n) % 2:
                    assert abs(density_from_genfun(st, m, n)) < 1e-12
        assert density_from_genfun(st, 0, 0) == pytest.approx(1 / A, rel=1e-13)
        assert density_from_genfun(st, 1, 1) == pytest.approx((1 - F / H) / A, rel=1e-13)
        assert density_from_genfun(st, 2, 0) == pytest.approx(-math.sqrt(2) * B / (A * H), rel=1e-12)
        assert density_from_genfun(st, 4, 0) == pytest.approx(math.sqrt(6) * B**2 / (A * H**2), rel=1e-12)
        assert density_from_genfun(st, 3, 1) == pytest.approx(-(1 - F / H) * math.sqrt(6) * B / (A * H), rel=1e-12)


def test_triple_sum_matches_taylor_coefficients(models):
    for mdl in models[::5]:
        st = genfun_evolve(mdl, thermal_init(0.3, 0.4 - 0.3j), 0.9)
        for m, n in [(0, 0), (1, 0), (2, 3), (4, 4), (5, 2)]:
            assert density_from_genfun(st, m, n) == pytest.approx(cauchy_coefficient(st, m, n), abs=1e-11)


def test_glauber_closed_form(glauber_model):
    init = glauber_init(1.1 - 0.6j)
    for t in (0.0, 1.0, 5.0):
        st = genfun_evolve(glauber_model, init, t)
        assert st.B == 0 and st.F == -4 and st.H == -4
        a = st.E  # conj(C)
        for m in range(10):
            for n in range(10):
                expect = st.E**m * st.C**n * math.exp(-abs(st.C) ** 2) / math.sqrt(math.factorial(m) * math.factorial(n))
                assert density_from_genfun(st, m, n) == pytest.approx(expect, abs=1e-14)
        assert np.allclose(density_matrix(st, 12).entries, coherent_state(a, 12).entries, atol=1e-14)


def test_initial_glauber_packet():
    st = genfun_evolve(minimal_diffusion_model(1.0, 1.0, 0.2), glauber_init(0.7 + 0.2j), 0.0)
    assert np.allclose(density_matrix(st, 15).entries, coherent_state(0.7 + 0.2j, 15).entries, atol=1e-14)


def test_degenerate_cases():
    with pytest.raises(DegenerateCaseError):
        genfun_evolve(OscillatorModel(1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 0.0), glauber_init(0.1), 1.0)
    with pytest.raises(DegenerateCaseError):
        GenFunState.from_BCF(3.0, 0j, -4.0)


def test_oracle_closed_number_state():
    mdl = OscillatorModel(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    out = oracle_evolve(mdl, number_state(1, 12), 3.0)
    assert np.allclose(out.entries, number_state(1, 12).entries, atol=1e-14)


def test_oracle_thermal_from_vacuum():
    w, kT, lam = 1.0, 1.2, 0.5
    mdl = thermal_model(1.0, w, lam, 0.0, kT)
    out = oracle_evolve(mdl, number_state(0, 40), 40 / lam)
    e = math.exp(-w / kT)
    assert np.max(np.abs(out.populations[:21] - (1 - e) * e ** np.arange(21))) < 1e-6


def test_oracle_matches_glauber_packet(glauber_model):
    lam = glauber_model.lam
    times = np.linspace(0, 10 / lam, 6)
    snaps = oracle_evolve(glauber_model, coherent_state(1.5 + 0.5j, 40), times)
    for snap in snaps:
        st = genfun_evolve(glauber_model, glauber_init(1.5 + 0.5j), snap.t)
        ref = density_matrix(st, 13).entries
        assert np.max(np.abs(snap.entries[:13, :13] - ref)) < 1e-7


def test_oracle_vs_genfun_regression(rng):
    for _ in range(2):
        mdl = random_model(rng, excess=(1.0, 1.2))
        init = thermal_init(0.2, 0.6 - 0.4j)
        rho0 = density_matrix(genfun_evolve(mdl, init, 0.0), 40)
        for snap in oracle_evolve(mdl, rho0, np.linspace(0, 10 / mdl.lam, 4)):
            ref = density_matrix(genfun_evolve(mdl, init, snap.t), 13).entries
            assert np.max(np.abs(snap.entries[:13, :13] - ref)) < 1e-6


def test_recurrence_mode_agrees_and_reports_drift(glauber_model):
    a = oracle_evolve(glauber_model, coherent_state(0.8, 30), 2.0)
    b = oracle_evolve(glauber_model, coherent_state(0.8, 30), 2.0, mode="recurrence")
    assert np.max(np.abs(a.entries - b.entries)) < 1e-10
    assert b.trace_drift < 1e-10


def test_oracle_invariants(rng):
    for _ in range(3):
        mdl = random_model(rng, excess=(1.0, 1.3))
        for snap in oracle_evolve(mdl, coherent_state(0.9j, 40), np.linspace(0, 3, 4)):
            assert abs(snap.trace - 1) < 1e-8
            assert snap.hermiticity_error < 1e-10
            assert snap.min_eigenvalue >= -1e-8


def test_rk4_fourth_order(glauber_model):
    # steps below the stability cap so that halving is visible
    rho0 = coherent_state(0.7, 25)
    ref = density_matrix(genfun_evolve(glauber_model, glauber_init(0.7), 2.0), 25).entries
    errs = [np.max(np.abs(oracle_evolve(glauber_model, rho0, 2.0, dt=h).entries - ref)) for h in (0.06, 0.03)]
    assert 13 < errs[0] / errs[1] < 19


def test_truncation_error():
    mdl = thermal_model(1.0, 1.0, 0.5, 0.0, 5.0)
    with pytest.raises(TruncationError):
        oracle_evolve(mdl, number_state(0, 10), 10.0, auto_expand=False)


def test_auto_expand():
    mdl = thermal_model(1.0, 1.0, 0.5, 0.0, 2.0)
    out = oracle_evolve(mdl, number_state(0, 10), 2.0, max_dim=80)
    assert out.dim > 10


def test_moments_from_rho():
    mdl = OscillatorModel(1.7, 0.8, 0.1, 0.0, 1.0, 1.0, 0.0, hbar=0.9)
    vac = moments_from_rho(number_state(0, 10), mdl)
    assert vac.sigma_qq == pytest.approx(0.9 / (2 * 1.7 * 0.8))
    assert vac.sigma_pp == pytest.approx(0.9 * 1.7 * 0.8 / 2)
    assert vac.sigma_pq == pytest.approx(0.0, abs=1e-15)
    coh = moments_from_rho(coherent_state(1.2 - 0.3j, 40), mdl)
    assert coh.sigma_q == pytest.approx(math.sqrt(2 * 0.9 / (1.7 * 0.8)) * 1.2, rel=1e-12)


def test_oracle_moments_vs_moments(rng):
    mdl = random_model(rng, excess=(1.0, 1.2))
    alpha = 0.5 + 0.5j
    hb, m, w = mdl.hbar, mdl.m, mdl.omega
    q0, p0 = math.sqrt(2 * hb / (m * w)) * alpha.real, math.sqrt(2 * hb * m * w) * alpha.imag
    v0 = (hb / (2 * m * w), hb * m * w / 2, 0.0)
    snap = oracle_evolve(mdl, coherent_state(alpha, 40), 1.37)
    mom = moments_from_rho(snap, mdl)
    assert np.allclose([mom.sigma_q, mom.sigma_p], propagate_mean(mdl, (q0, p0), snap.t), atol=1e-6)
    assert np.allclose([mom.sigma_qq, mom.sigma_pp, mom.sigma_pq], propagate_variances(mdl, v0, snap.t), atol=1e-6)


def test_json_roundtrip():
    rho = coherent_state(0.3 + 0.1j, 6)
    back = FockDensityMatrix.from_json(rho.to_json())
    assert np.array_equal(back.entries, rho.entries) and back.t == rho.t
    assert thermal_state(0.5, 6).trace.real == pytest.approx(1 - (1 / 3) ** 6)
