"""Ornstein-Uhlenbeck form of the P, Q and Wigner distributions.

With ``x1 = sqrt(m omega / 2 hbar) q`` and ``x2 = p / sqrt(2 hbar m omega)``
all three distributions obey the same linear drift ``-A x`` with

    A = [[lam - mu, -omega], [omega, lam + mu]]

and an ordering-dependent constant diffusion matrix. ``s = 1`` is P,
``s = 0`` is Wigner and ``s = -1`` is Q. Only Gaussian solutions are used,
so distributions are carried as mean and covariance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import ConfigurationError, NoSteadyStateError
from .model import OscillatorModel
from .moments import propagate_variances

__all__ = [
    "PhaseSpaceFP",
    "SteadyGaussian",
    "assemble",
    "steady_state",
    "variance_flow",
    "to_physical",
    "from_physical",
    "lyapunov_residual",
]

ORDERINGS = {1: "P", 0: "W", -1: "Q"}


@dataclass(frozen=True)
class PhaseSpaceFP:
    """Drift and diffusion of the Fokker-Planck equation for ordering ``s``."""

    s: int
    A: np.ndarray
    Ds: np.ndarray
    positive_definite: bool


@dataclass(frozen=True)
class SteadyGaussian:
    """Stationary Gaussian of ordering ``s``.

    ``normalization`` is the integral of the density evaluated on a
    quadrature grid; ``representable`` is False when the diffusion matrix
    is not positive definite (a singular P distribution).
    """

    s: int
    covariance: np.ndarray
    normalization: float
    representable: bool
    residual: float

    def density(self, x1: ArrayLike, x2: ArrayLike) -> np.ndarray:
        x = np.stack(np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float)), axis=-1)
        inv = np.linalg.inv(self.covariance)
        quad = np.einsum("...i,ij,...j->...", x, inv, x)
        return np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(np.linalg.det(self.covariance)))


def _check_s(s: int) -> int:
    if s not in ORDERINGS:
        raise ConfigurationError(f"ordering parameter must be 1, 0 or -1, got {s!r}")
    return int(s)


def assemble(model: OscillatorModel, s: int) -> PhaseSpaceFP:
    """Drift matrix ``A`` and diffusion matrix ``D^(s)`` for ordering ``s``."""
    s = _check_s(s)
    m, w, lam, mu, hb = model.m, model.omega, model.lam, model.mu, model.hbar
    A = np.array([[lam - mu, -w], [w, lam + mu]])
    d11 = m * w * model.D_qq / hb - s * (lam - mu) / 2
    d22 = model.D_pp / (hb * m * w) - s * (lam + mu) / 2
    d12 = model.D_pq / hb
    Ds = np.array([[d11, d12], [d12, d22]])
    pd = bool(d11 > 0 and d11 * d22 - d12**2 > 0)
    return PhaseSpaceFP(s=s, A=A, Ds=Ds, positive_definite=pd)


def lyapunov_residual(A: np.ndarray, sigma: np.ndarray, D: np.ndarray) -> float:
    """Frobenius norm of ``A sigma + sigma A^T - D``."""
    return float(np.linalg.norm(A @ sigma + sigma @ A.T - D))


def _normalization(sigma: np.ndarray, n: int = 241) -> float:
    # trapezoid over +-10 sd per axis; spectrally accurate for a Gaussian
    if np.any(np.linalg.eigvalsh(sigma) <= 0):
        return float("nan")
    sd = np.sqrt(np.diag(sigma))
    x1 = np.linspace(-10 * sd[0], 10 * sd[0], n)
    x2 = np.linspace(-10 * sd[1], 10 * sd[1], n)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    inv = np.linalg.inv(sigma)
    quad = inv[0, 0] * X1**2 + 2 * inv[0, 1] * X1 * X2 + inv[1, 1] * X2**2
    f = np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(np.linalg.det(sigma)))
    return float(np.trapezoid(np.trapezoid(f, x2, axis=1), x1))


def steady_state(model: OscillatorModel, s: int) -> SteadyGaussian:
    """Stationary covariance ``sigma^(s)(inf)`` from the closed-form solution.

    Raises
    ------
    NoSteadyStateError
        If ``lam (lam^2 + omega^2 - mu^2) <= 0``.
    """
    fp = assemble(model, s)
    w, lam, mu = model.omega, model.lam, model.mu
    den = 4 * lam * (lam**2 + w**2 - mu**2)
    if not (lam > 0 and den > 0):
        raise NoSteadyStateError("lam (lam^2 + omega^2 - mu^2) must be positive for a steady state")
    d11, d22, d12 = fp.Ds[0, 0], fp.Ds[1, 1], fp.Ds[0, 1]
    s11 = ((2 * lam * (lam + mu) + w**2) * d11 + w**2 * d22 + 2 * w * (lam + mu) * d12) / den
    s22 = (w**2 * d11 + (2 * lam * (lam - mu) + w**2) * d22 - 2 * w * (lam - mu) * d12) / den
    s12 = (-w * (lam + mu) * d11 + w * (lam - mu) * d22 + 2 * (lam**2 - mu**2) * d12) / den
    sigma = np.array([[s11, s12], [s12, s22]])
    return SteadyGaussian(
        s=fp.s,
        covariance=sigma,
        normalization=_normalization(sigma),
        representable=fp.positive_definite,
        residual=lyapunov_residual(fp.A, sigma, fp.Ds),
    )


def to_physical(model: OscillatorModel, sigma: np.ndarray, s: int) -> tuple[float, float, float]:
    """Convert an ordering-``s`` covariance to ``(sigma_qq, sigma_pp, sigma_pq)``."""
    s = _check_s(s)
    hb, mw = model.hbar, model.m * model.omega
    return (
        2 * hb / mw * (sigma[0, 0] + s / 4),
        2 * hb * mw * (sigma[1, 1] + s / 4),
        2 * hb * sigma[0, 1],
    )


def from_physical(model: OscillatorModel, var, s: int) -> np.ndarray:
    """Inverse of :func:`to_physical`."""
    s = _check_s(s)
    hb, mw = model.hbar, model.m * model.omega
    s_qq, s_pp, s_pq = (float(v) for v in var)
    s11 = mw * s_qq / (2 * hb) - s / 4
    s22 = s_pp / (2 * hb * mw) - s / 4
    s12 = s_pq / (2 * hb)
    return np.array([[s11, s12], [s12, s22]])


def variance_flow(model: OscillatorModel, s: int, var0: np.ndarray, t: float) -> np.ndarray:
    """Propagate an ordering-``s`` covariance under ``dsigma/dt = -(A sigma + sigma A^T) + D^(s)``.

    The flow is identical to the physical variance dynamics after the shift
    and rescaling of :func:`to_physical`, so the closed-form propagator of
    :mod:`lindblad_lab.moments` is reused.
    """
    s = _check_s(s)
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    var0 = np.asarray(var0, dtype=float)
    phys = to_physical(model, var0, s)
    out = propagate_variances(model, phys, float(t))
    return from_physical(model, out, s)
