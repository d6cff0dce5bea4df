"""Moments from the normally ordered characteristic function.

For an initial coherent state ``|alpha0>`` the characteristic function stays
Gaussian in ``(Lambda, Lambda*)``. Its linear coefficients are fixed by
``u(t)`` and ``v(t)``. Its quadratic ones, ``f = R + iI`` and ``h``, solve

    dR/dt + 2 lam R + 2 omega I + mu h = Re C
    dI/dt + 2 lam I - 2 omega R        = Im C
    dh/dt + 4 mu R + 2 lam h           = L

with ``L = lam - D2`` and ``C = (mu + conj(D1)) / 2``. The eigenvalues are
``-2 lam`` and ``-2 mu_pm = -2 (lam +/- gamma)``, ``gamma = sqrt(mu^2 - omega^2)``.
One complex code path covers both regimes.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DegenerateCaseError
from .model import OscillatorModel, Regime, derive
from .moments import MomentState

__all__ = [
    "CharFunCoefficients",
    "coefficients",
    "coherent_moments",
    "ladder_moments",
    "energy_expectation",
    "fh_rhs",
]


@dataclass(frozen=True)
class CharFunCoefficients:
    """Time-dependent coefficients of the characteristic function.

    ``N`` and ``P`` are complex conjugates of each other in the underdamped
    regime and real in the overdamped one.
    """

    u: complex
    v: complex
    f: complex
    h: float
    t: float
    M: float
    N: complex
    P: complex
    f_inf: complex
    h_inf: float


def _constants(model: OscillatorModel):
    d = derive(model)
    if d.regime is Regime.CRITICAL:
        raise DegenerateCaseError("critical damping: eigenvalues coincide, use the moment equations")
    lam, w, mu = model.lam, model.omega, model.mu
    g = d.gamma
    if lam <= 0 or abs(lam**2 - g**2) == 0:
        raise DegenerateCaseError("lam^2 - gamma^2 must be nonzero and lam > 0")
    L = lam - d.D2
    C = (mu + d.D1.conjugate()) / 2
    return lam, w, mu, g, L, C


def _uv(lam: float, w: float, mu: float, g: complex, t: float) -> tuple[complex, complex]:
    e = math.exp(-lam * t)
    sh = cmath.sinh(g * t) / g
    return e * (cmath.cosh(g * t) + 1j * w * sh), -mu * e * sh


def coefficients(model: OscillatorModel, t: float) -> CharFunCoefficients:
    """Evaluate ``u, v, f, h`` and their constants at time ``t``.

    Raises
    ------
    DegenerateCaseError
        At critical damping or when the stationary values do not exist.
    """
    lam, w, mu, g, L, C = _constants(model)
    reC, imC = C.real, C.imag
    denom = lam**2 - g**2
    R_inf = (2 * (lam * reC - w * imC) - L * mu) / (4 * denom)
    I_inf = (2 * w * lam * reC + 2 * (lam**2 - mu**2) * imC - L * mu * w) / (4 * lam * denom)
    h_inf = (L * (lam**2 + w**2) - 2 * mu * (lam * reC - w * imC)) / (2 * lam * denom)
    # P/(2mu) and N/(2mu) are kept finite at mu = 0
    p2 = -(g * reC + w * imC + mu * L / 2) / (4 * g**2 * (lam + g))
    n2 = (g * reC - w * imC - mu * L / 2) / (4 * g**2 * (lam - g))
    M = w * (mu * imC + w * L / 2) / (lam * g**2)
    muM_2w = mu * (mu * imC + w * L / 2) / (2 * lam * g**2)
    N, P = 2 * mu * n2, 2 * mu * p2
    mu_p, mu_m = lam + g, lam - g
    ep, em, el = cmath.exp(-2 * mu_p * t), cmath.exp(-2 * mu_m * t), math.exp(-2 * lam * t)
    f_inf = complex(R_inf.real, I_inf.real)
    f = p2 * ep * (g - 1j * w) - n2 * em * (g + 1j * w) - 1j * muM_2w * el + f_inf
    h = M * el + N * em + P * ep + h_inf
    u, v = _uv(lam, w, mu, g, t)
    return CharFunCoefficients(
        u=u,
        v=v.real + 0j,
        f=complex(f.real, f.imag),
        h=float(h.real),
        t=float(t),
        M=float(M.real),
        N=complex(N),
        P=complex(P),
        f_inf=f_inf,
        h_inf=float(h_inf.real),
    )


def fh_rhs(model: OscillatorModel, y):
    """Right-hand side of the real ``(R, I, h)`` system, for ODE oracles."""
    d = derive(model)
    lam, w, mu = model.lam, model.omega, model.mu
    L = lam - d.D2
    C = (mu + d.D1.conjugate()) / 2
    R, I, h = y
    return np.array(
        [C.real - 2 * lam * R - 2 * w * I - mu * h, C.imag - 2 * lam * I + 2 * w * R, L - 4 * mu * R - 2 * lam * h]
    )


def ladder_moments(model: OscillatorModel, alpha0: complex, t: float) -> dict[str, complex]:
    """``<a>, <a+>, <a^2>, <a+^2>, <a+ a>`` at ``t`` for a coherent start."""
    c = coefficients(model, t)
    a0 = complex(alpha0)
    a_dag = c.u * a0.conjugate() - c.v * a0
    a = c.u.conjugate() * a0 - c.v * a0.conjugate()
    return {
        "a": a,
        "a_dag": a_dag,
        "a2": a * a + 2 * c.f.conjugate(),
        "a_dag2": a_dag * a_dag + 2 * c.f,
        "n": a_dag * a - c.h,
    }


def coherent_moments(model: OscillatorModel, alpha0: complex, t: float) -> MomentState:
    """Means and variances at ``t`` starting from the coherent state ``|alpha0>``."""
    c = coefficients(model, t)
    a0 = complex(alpha0)
    a_dag = c.u * a0.conjugate() - c.v * a0
    a = c.u.conjugate() * a0 - c.v * a0.conjugate()
    hb, m, w = model.hbar, model.m, model.omega
    sq = math.sqrt(hb / (2 * m * w)) * (a_dag + a)
    sp = 1j * math.sqrt(hb * m * w / 2) * (a_dag - a)
    re_f = c.f.real
    return MomentState(
        sigma_q=sq.real,
        sigma_p=sp.real,
        sigma_qq=hb / (m * w) * (2 * re_f - c.h + 0.5),
        sigma_pp=-hb * m * w * (2 * re_f + c.h - 0.5),
        sigma_pq=-2 * hb * c.f.imag,
        t=float(t),
    )


def energy_expectation(model: OscillatorModel, alpha0: complex, t: float, atol: float = 1e-12) -> float:
    """Mean of ``H0 + mu (pq + qp)/2`` at ``t`` for a coherent start.

    Raises
    ------
    ConsistencyError
        If the result has an imaginary part above ``atol`` (relative to its size).
    """
    mom = ladder_moments(model, alpha0, t)
    hb = model.hbar
    E = hb * model.omega * (mom["n"] + 0.5) + 0.5j * hb * model.mu * (mom["a_dag2"] - mom["a2"])
    if abs(E.imag) > atol * max(1.0, abs(E.real)):
        raise ConsistencyError(f"energy has imaginary residue {E.imag}")
    return float(E.real)
