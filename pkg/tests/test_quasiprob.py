import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import solve_continuous_lyapunov

from lindblad_lab.errors import ConfigurationError, NoSteadyStateError
from lindblad_lab.model import OscillatorModel, minimal_diffusion_model
from lindblad_lab.moments import asymptotic_variances, propagate_variances
from lindblad_lab.quasiprob import assemble, from_physical, steady_state, to_physical, variance_flow


def test_wigner_has_no_shift():
    mdl = OscillatorModel(1.3, 0.7, 0.4, 0.1, 0.9, 0.8, 0.2, hbar=1.1)
    fp = assemble(mdl, 0)
    mw = mdl.m * mdl.omega
    assert np.allclose(np.diag(fp.Ds), [mw * mdl.D_qq / mdl.hbar, mdl.D_pp / (mdl.hbar * mw)])
    assert fp.Ds[0, 1] == pytest.approx(mdl.D_pq / mdl.hbar)
    lam, mu, w = mdl.lam, mdl.mu, mdl.omega
    assert np.array_equal(fp.A, [[lam - mu, -w], [w, lam + mu]])


def test_q_minus_p(models):
    for mdl in models:
        diff = assemble(mdl, -1).Ds - assemble(mdl, 1).Ds
        assert np.allclose(diff, np.diag([mdl.lam - mdl.mu, mdl.lam + mdl.mu]), atol=1e-14)


def test_p_matrix_not_positive_definite():
    # zero-temperature diffusion: the P diffusion matrix vanishes identically
    mdl = minimal_diffusion_model(1.0, 1.0, 0.3)
    assert not assemble(mdl, 1).positive_definite
    assert assemble(mdl, 0).positive_definite
    assert not steady_state(mdl, 1).representable


def test_bad_ordering():
    with pytest.raises(ConfigurationError):
        assemble(minimal_diffusion_model(1.0, 1.0, 0.3), 2)


def test_closed_form_vs_lyapunov_solver(models):
    for mdl in models:
        for s in (1, 0, -1):
            fp = assemble(mdl, s)
            ss = steady_state(mdl, s)
            ref = solve_continuous_lyapunov(fp.A, fp.Ds)
            assert np.allclose(ss.covariance, ref, rtol=1e-11, atol=1e-13)
            assert ss.residual < 1e-10
            assert np.allclose(ss.covariance, ss.covariance.T)


def test_wigner_matches_moments(models):
    for mdl in models:
        cov = steady_state(mdl, 0).covariance
        hb, mw = mdl.hbar, mdl.m * mdl.omega
        conv = (2 * hb / mw * cov[0, 0], 2 * hb * mw * cov[1, 1], 2 * hb * cov[0, 1])
        assert np.allclose(conv, asymptotic_variances(mdl), rtol=1e-12, atol=1e-14)


def test_representation_relations(models):
    for mdl in models:
        P, W, Q = (steady_state(mdl, s).covariance for s in (1, 0, -1))
        assert np.allclose(W, (P + Q) / 2, atol=1e-13)
        assert np.allclose(np.diag(W), np.diag(P) + 0.25, atol=1e-13)
        assert np.allclose(np.diag(W), np.diag(Q) - 0.25, atol=1e-13)
        assert P[0, 1] == pytest.approx(W[0, 1], abs=1e-14) and Q[0, 1] == pytest.approx(W[0, 1], abs=1e-14)


def test_normalization(models):
    for mdl in models:
        for s in (0, -1):
            assert steady_state(mdl, s).normalization == pytest.approx(1.0, abs=1e-10)


def test_no_steady_state():
    with pytest.raises(NoSteadyStateError):
        steady_state(OscillatorModel(1.0, 1.0, 0.1, 2.0, 1.0, 1.0, 0.0), 0)


def test_flow_initial_and_s_independence(models):
    for mdl in models:
        phys0 = (1.2, 0.7, 0.1)
        runs = []
        for s in (1, 0, -1):
            sig0 = from_physical(mdl, phys0, s)
            assert np.allclose(variance_flow(mdl, s, sig0, 0.0), sig0, atol=1e-14)
            runs.append(to_physical(mdl, variance_flow(mdl, s, sig0, 1.7), s))
        assert np.allclose(runs[0], runs[1], rtol=1e-10) and np.allclose(runs[0], runs[2], rtol=1e-10)
        assert np.allclose(runs[1], propagate_variances(mdl, phys0, 1.7), rtol=1e-12)


def test_flow_vs_direct_integration(models):
    for mdl in models[::4]:
        for s in (1, -1):
            fp = assemble(mdl, s)
            A, D = fp.A, fp.Ds

            def rhs(t, y):
                S = y.reshape(2, 2)
                return (-(A @ S + S @ A.T) + D).ravel()

            sig0 = np.array([[0.8, 0.1], [0.1, 0.6]])
            ref = solve_ivp(rhs, (0, 2.0), sig0.ravel(), method="DOP853", rtol=1e-13, atol=1e-15).y[:, -1]
            assert np.allclose(variance_flow(mdl, s, sig0, 2.0), ref.reshape(2, 2), rtol=1e-9, atol=1e-12)


def test_reassembly_is_deterministic(models):
    a, b = assemble(models[0], 1), assemble(models[0], 1)
    assert np.array_equal(a.A, b.A) and np.array_equal(a.Ds, b.Ds)
