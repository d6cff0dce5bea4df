"""Gaussian Wigner functions and the Weyl-operator coefficient flow.

A Gaussian Wigner function stays Gaussian; its mean and covariance follow
the moment equations, so :func:`evolve` delegates to
:mod:`lindblad_lab.moments`.

In the Heisenberg picture the Weyl operator ``exp((i/hbar)(eta q - xi p))``
maps to ``exp(g(t)) exp((i/hbar)(eta(t) q - xi(t) p))`` with

    d(xi, eta)/dt = (-lam I + N) (xi, eta),   N = [[-mu, -1/m], [m omega^2, mu]]
    dg/dt = -(D_pp xi^2 + D_qq eta^2 - 2 D_pq xi eta) / hbar^2

Because ``N @ N = gamma^2 I`` the flow is
``Phi(t) = exp(-lam t) (cosh(gamma t) I + sinh(gamma t) N / gamma)`` and
``g`` is a quadratic form whose matrix integrates in closed form.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import expm

from .errors import CriticalDampingFallback
from .model import OscillatorModel, Regime, regime_of
from .moments import propagate_mean, propagate_variances

__all__ = [
    "Gaussian1D",
    "WignerGaussian",
    "WeylFlow",
    "evolve",
    "marginals",
    "weyl_coefficients",
    "weyl_flow",
    "coherent_wigner",
]


@dataclass(frozen=True)
class Gaussian1D:
    mean: float
    var: float

    def pdf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-((x - self.mean) ** 2) / (2 * self.var)) / math.sqrt(2 * math.pi * self.var)


@dataclass(frozen=True)
class WignerGaussian:
    """Gaussian Wigner function with means ``(q, p)`` and covariance ``(qq, pp, pq)``."""

    mean: tuple[float, float]
    cov: tuple[float, float, float]
    t: float = 0.0

    def __post_init__(self):
        s_qq, s_pp, s_pq = self.cov
        if not (s_qq > 0 and s_pp > 0 and s_qq * s_pp - s_pq**2 > 0):
            raise ValueError("covariance must be positive definite")

    @property
    def det(self) -> float:
        s_qq, s_pp, s_pq = self.cov
        return s_qq * s_pp - s_pq**2

    def is_physical(self, hbar: float, rtol: float = 1e-9) -> bool:
        """Whether the covariance respects ``det >= hbar^2/4``."""
        return self.det >= hbar**2 / 4 * (1 - rtol)

    def cov_matrix(self) -> np.ndarray:
        s_qq, s_pp, s_pq = self.cov
        return np.array([[s_qq, s_pq], [s_pq, s_pp]])

    def density(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """``f(x, y)``, normalized to one over the phase plane."""
        s_qq, s_pp, s_pq = self.cov
        dx = np.asarray(x, dtype=float) - self.mean[0]
        dy = np.asarray(y, dtype=float) - self.mean[1]
        quad = (s_pp * dx**2 + s_qq * dy**2 - 2 * s_pq * dx * dy) / self.det
        return np.exp(-0.5 * quad) / (2 * math.pi * math.sqrt(self.det))

    def characteristic(self, xi: ArrayLike, eta: ArrayLike, hbar: float) -> np.ndarray:
        """Mean of the Weyl operator ``exp((i/hbar)(eta q - xi p))``."""
        s_qq, s_pp, s_pq = self.cov
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        phase = 1j / hbar * (eta * self.mean[0] - xi * self.mean[1])
        quad = (eta**2 * s_qq + xi**2 * s_pp - 2 * xi * eta * s_pq) / (2 * hbar**2)
        return np.exp(phase - quad)


def coherent_wigner(model: OscillatorModel, alpha: complex = 0.0) -> WignerGaussian:
    """Wigner function of the coherent state ``|alpha>`` of the undamped oscillator."""
    hb, m, w = model.hbar, model.m, model.omega
    q = math.sqrt(2 * hb / (m * w)) * complex(alpha).real
    p = math.sqrt(2 * hb * m * w) * complex(alpha).imag
    return WignerGaussian((q, p), (hb / (2 * m * w), hb * m * w / 2, 0.0))


def evolve(model: OscillatorModel, w0: WignerGaussian, t: float) -> WignerGaussian:
    """Propagate a Gaussian Wigner function by ``t``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    mean = propagate_mean(model, w0.mean, t)
    cov = propagate_variances(model, w0.cov, t)
    return WignerGaussian(
        (float(mean[0]), float(mean[1])),
        (float(cov[0]), float(cov[1]), float(cov[2])),
        t=w0.t + float(t),
    )


def marginals(w: WignerGaussian) -> tuple[Gaussian1D, Gaussian1D]:
    """Coordinate and momentum distributions of ``w``."""
    return Gaussian1D(w.mean[0], w.cov[0]), Gaussian1D(w.mean[1], w.cov[1])


# ---------------------------------------------------------------------------
# Weyl coefficient flow


@dataclass(frozen=True)
class WeylFlow:
    """Linear map and exponent of the Heisenberg-evolved Weyl operator.

    ``(xi(t), eta(t)) = abcd @ (xi0, eta0)`` and
    ``g(t) = A xi0^2 + B eta0^2 + C xi0 eta0``. ``commutator`` is
    ``det(abcd)``, the factor multiplying ``i hbar`` in the commutator of
    the evolved coordinate and momentum.
    """

    abcd: np.ndarray
    g_quadratic: tuple[float, float, float]
    t: float

    @property
    def commutator(self) -> float:
        return float(np.linalg.det(self.abcd))

    def g(self, xi0: float, eta0: float) -> float:
        A, B, C = self.g_quadratic
        return A * xi0**2 + B * eta0**2 + C * xi0 * eta0


def _generator(model: OscillatorModel) -> np.ndarray:
    m, w, mu = model.m, model.omega, model.mu
    return np.array([[-mu, -1.0 / m], [m * w**2, mu]])


def _weyl_diffusion(model: OscillatorModel) -> np.ndarray:
    return np.array([[model.D_pp, -model.D_pq], [-model.D_pq, model.D_qq]])


def _int_exp(k: complex, t: float) -> complex:
    """``int_0^t exp(k s) ds`` without cancellation for small ``k t``."""
    if k == 0:
        return t
    z = k * t
    if abs(z) < 1e-3:
        # series keeps precision where expm1 has no complex version
        return t * (1 + z / 2 + z**2 / 6 + z**3 / 24 + z**4 / 120)
    return (cmath.exp(z) - 1) / k


def _van_loan(model: OscillatorModel, t: float) -> tuple[np.ndarray, np.ndarray]:
    F = -model.lam * np.eye(2) + _generator(model)
    Dw = _weyl_diffusion(model)
    big = np.zeros((4, 4))
    big[:2, :2] = -F.T
    big[:2, 2:] = Dw
    big[2:, 2:] = F
    E = expm(big * t)
    Phi = E[2:, 2:]
    G = Phi.T @ E[:2, 2:]
    return Phi, 0.5 * (G + G.T)


def weyl_coefficients(model: OscillatorModel, t: float) -> WeylFlow:
    """Closed-form Weyl flow at time ``t``.

    At exact critical damping the projector form is singular and a block
    matrix exponential is used instead, with a :class:`CriticalDampingFallback`
    warning.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    lam, hb = model.lam, model.hbar
    if regime_of(model.mu, model.omega) is Regime.CRITICAL:
        warnings.warn("critical damping: Weyl flow by matrix exponential", CriticalDampingFallback, stacklevel=2)
        Phi, G = _van_loan(model, t)
    else:
        g = cmath.sqrt(model.mu**2 - model.omega**2)
        N = _generator(model)
        Pp = 0.5 * (np.eye(2) + N / g)
        Pm = 0.5 * (np.eye(2) - N / g)
        Phi = (math.exp(-lam * t) * (cmath.exp(g * t) * Pp + cmath.exp(-g * t) * Pm)).real
        Dw = _weyl_diffusion(model)
        G = (
            _int_exp(2 * (g - lam), t) * (Pp.T @ Dw @ Pp)
            + _int_exp(-2 * (g + lam), t) * (Pm.T @ Dw @ Pm)
            + _int_exp(-2 * lam, t) * (Pp.T @ Dw @ Pm + Pm.T @ Dw @ Pp)
        ).real
    coeffs = (-G[0, 0] / hb**2, -G[1, 1] / hb**2, -2 * G[0, 1] / hb**2)
    return WeylFlow(abcd=Phi, g_quadratic=tuple(float(c) for c in coeffs), t=float(t))


def weyl_flow(model: OscillatorModel, xi0: tuple[float, float], t: float) -> tuple[np.ndarray, float]:
    """Evolve ``(xi, eta)`` and the exponent ``g`` from ``(xi0, eta0)`` and ``g = 0``."""
    flow = weyl_coefficients(model, t)
    x0 = np.asarray(xi0, dtype=float)
    return flow.abcd @ x0, flow.g(*x0)
