"""First and second moments of the damped oscillator in closed form.

Means obey ``d/dt (q, p) = G (q, p)`` with
``G = [[-(lam - mu), 1/m], [-m omega**2, -(lam + mu)]]``. The scaled
variance vector ``X = (m omega s_qq, s_pp / (m omega), s_pq)`` obeys
``dX/dt = R X + D``. Both are solved with the hyperbolic (overdamped) or
trigonometric (underdamped) propagators; exactly critical damping falls back
to a dense matrix exponential.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import expm

from .errors import CriticalDampingFallback, NoSteadyStateError, ConsistencyError
from .model import OscillatorModel, Regime, regime_of

__all__ = [
    "MomentState",
    "VarianceDecomposition",
    "UncertaintyPoint",
    "mean_drift",
    "variance_drift",
    "propagate_mean",
    "propagate_variances",
    "propagator_matrix",
    "variance_decomposition",
    "asymptotic_variances",
    "diffusion_from_asymptotics",
    "asymptotic_energy",
    "uncertainty_monitor",
    "initial_asymptotic_restriction",
    "steady_state_exists",
    "scale_variances",
    "unscale_variances",
    "trajectory",
    "charge_equilibration_preset",
]


@dataclass(frozen=True)
class MomentState:
    """Means, variances and symmetrized covariance at time ``t``."""

    sigma_q: float
    sigma_p: float
    sigma_qq: float
    sigma_pp: float
    sigma_pq: float
    t: float

    @property
    def uncertainty_product(self) -> float:
        return self.sigma_qq * self.sigma_pp - self.sigma_pq**2

    def as_array(self) -> np.ndarray:
        return np.array([self.sigma_q, self.sigma_p, self.sigma_qq, self.sigma_pp, self.sigma_pq])


@dataclass(frozen=True)
class VarianceDecomposition:
    """``R = T K T`` with ``T @ T = I``; complex in the underdamped regime.

    ``X_inf = -R^{-1} D`` is the stationary point of the variance flow;
    ``x_inf_valid`` is False when that point is not an attractor.
    """

    T: np.ndarray
    K: np.ndarray
    R: np.ndarray
    Dvec: np.ndarray
    X_inf: np.ndarray
    x_inf_valid: bool


class UncertaintyPoint(NamedTuple):
    t: float
    product: float
    ok: bool
    sufficient: bool


def mean_drift(model: OscillatorModel) -> np.ndarray:
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu
    return np.array([[-(lam - mu), 1.0 / m], [-m * w**2, -(lam + mu)]])


def variance_drift(model: OscillatorModel) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(R, Dvec)`` of the scaled variance equation."""
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu
    R = np.array(
        [
            [-2 * (lam - mu), 0.0, 2 * w],
            [0.0, -2 * (lam + mu), -2 * w],
            [-w, w, -2 * lam],
        ]
    )
    Dvec = np.array([2 * m * w * model.D_qq, 2 * model.D_pp / (m * w), 2 * model.D_pq])
    return R, Dvec


def scale_variances(model: OscillatorModel, var) -> np.ndarray:
    """``(s_qq, s_pp, s_pq) -> (m omega s_qq, s_pp/(m omega), s_pq)`` along the last axis."""
    var = np.asarray(var, dtype=float)
    mw = model.m * model.omega
    return np.stack([mw * var[..., 0], var[..., 1] / mw, var[..., 2]], axis=-1)


def unscale_variances(model: OscillatorModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    mw = model.m * model.omega
    return np.stack([X[..., 0] / mw, X[..., 1] * mw, X[..., 2]], axis=-1)


def steady_state_exists(model: OscillatorModel) -> bool:
    return model.lam > 0 and model.lam**2 + model.omega**2 - model.mu**2 > 0


def _regime(model: OscillatorModel) -> Regime:
    return regime_of(model.mu, model.omega)


def _warn_fallback():
    warnings.warn(
        "critical damping: propagating with a matrix exponential",
        CriticalDampingFallback,
        stacklevel=3,
    )


# ---------------------------------------------------------------------------
# means


def propagate_mean(model: OscillatorModel, mean0, t: ArrayLike) -> np.ndarray:
    """Propagate ``(sigma_q, sigma_p)`` to time(s) ``t``.

    Parameters
    ----------
    model : OscillatorModel
    mean0 : (float, float)
        Initial means.
    t : float or array_like
        Non-negative times.

    Returns
    -------
    ndarray, shape ``t.shape + (2,)``
    """
    q0, p0 = (float(x) for x in mean0)
    t = np.asarray(t, dtype=float)
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu
    regime = _regime(model)
    if regime is Regime.CRITICAL:
        _warn_fallback()
        G = mean_drift(model)
        out = np.array([expm(G * tt) @ np.array([q0, p0]) for tt in t.ravel()])
        return out.reshape(t.shape + (2,))
    if regime is Regime.OVERDAMPED:
        k = math.sqrt(mu**2 - w**2)
        c, s = np.cosh(k * t), np.sinh(k * t) / k
    else:
        k = math.sqrt(w**2 - mu**2)
        c, s = np.cos(k * t), np.sin(k * t) / k
    e = np.exp(-lam * t)
    q = e * ((c + mu * s) * q0 + s * p0 / m)
    p = e * (-m * w**2 * s * q0 + (c - mu * s) * p0)
    return np.stack([q, p], axis=-1)


# ---------------------------------------------------------------------------
# variances


def propagator_matrix(model: OscillatorModel, t: float) -> np.ndarray:
    """``T exp(K t) T`` (equal to ``expm(R t)``) in real closed form."""
    w, lam, mu = model.omega, model.lam, model.mu
    regime = _regime(model)
    if regime is Regime.CRITICAL:
        return expm(variance_drift(model)[0] * t)
    e = math.exp(-2 * lam * t)
    if regime is Regime.OVERDAMPED:
        nu = math.sqrt(mu**2 - w**2)
        ch, sh = math.cosh(2 * nu * t), math.sinh(2 * nu * t)
        a = np.array(
            [
                [(mu**2 + nu**2) * ch + 2 * mu * nu * sh - w**2, (mu**2 - nu**2) * ch - w**2,
                 2 * w * (mu * ch + nu * sh - mu)],
                [(mu**2 - nu**2) * ch - w**2, (mu**2 + nu**2) * ch - 2 * mu * nu * sh - w**2,
                 2 * w * (mu * ch - nu * sh - mu)],
                [-w * (mu * ch + nu * sh - mu), -w * (mu * ch - nu * sh - mu),
                 -2 * (w**2 * ch - mu**2)],
            ]
        )
        return e / (2 * nu**2) * a
    Om = math.sqrt(w**2 - mu**2)
    co, si = math.cos(2 * Om * t), math.sin(2 * Om * t)
    b = np.array(
        [
            [(mu**2 - Om**2) * co - 2 * mu * Om * si - w**2, (mu**2 + Om**2) * co - w**2,
             2 * w * (mu * co - Om * si - mu)],
            [(mu**2 + Om**2) * co - w**2, (mu**2 - Om**2) * co + 2 * mu * Om * si - w**2,
             2 * w * (mu * co + Om * si - mu)],
            [-w * (mu * co - Om * si - mu), -w * (mu * co + Om * si - mu),
             -2 * (w**2 * co - mu**2)],
        ]
    )
    return -e / (2 * Om**2) * b


def variance_decomposition(model: OscillatorModel) -> VarianceDecomposition:
    """Eigen-structure ``R = T K T`` of the variance drift."""
    w, lam, mu = model.omega, model.lam, model.mu
    R, Dvec = variance_drift(model)
    regime = _regime(model)
    if regime is Regime.CRITICAL:
        raise NoSteadyStateError("R is not diagonalizable at critical damping")
    g = complex(math.sqrt(mu**2 - w**2)) if regime is Regime.OVERDAMPED else 1j * math.sqrt(w**2 - mu**2)
    T = np.array([[mu + g, mu - g, 2 * w], [mu - g, mu + g, 2 * w], [-w, -w, -2 * mu]]) / (2 * g)
    K = np.diag([-2 * (lam - g), -2 * (lam + g), -2 * lam + 0j])
    if regime is Regime.OVERDAMPED:
        T, K = T.real, K.real
    valid = steady_state_exists(model)
    try:
        X_inf = -np.linalg.solve(R, Dvec)
    except np.linalg.LinAlgError:
        X_inf = np.full(3, np.nan)
        valid = False
    return VarianceDecomposition(T=T, K=K, R=R, Dvec=Dvec, X_inf=X_inf, x_inf_valid=valid)


def _augmented_flow(R: np.ndarray, Dvec: np.ndarray, X0: np.ndarray, t: float) -> np.ndarray:
    aug = np.zeros((4, 4))
    aug[:3, :3] = R
    aug[:3, 3] = Dvec
    return (expm(aug * t) @ np.append(X0, 1.0))[:3]


def propagate_variances(model: OscillatorModel, var0, t: ArrayLike) -> np.ndarray:
    """Propagate ``(sigma_qq, sigma_pp, sigma_pq)`` to time(s) ``t``.

    Uses ``X(t) = P(t) (X0 - X_inf) + X_inf`` with ``P = T exp(K t) T`` in
    its real closed form. When ``R`` is singular, or at critical damping,
    the affine flow is exponentiated directly.

    Returns
    -------
    ndarray, shape ``t.shape + (3,)``
    """
    t = np.asarray(t, dtype=float)
    R, Dvec = variance_drift(model)
    X0 = scale_variances(model, np.asarray(var0, dtype=float))
    regime = _regime(model)
    lam, w, mu = model.lam, model.omega, model.mu
    singular = lam * (lam**2 + w**2 - mu**2) == 0.0
    out = np.empty(t.shape + (3,))
    flat = out.reshape(-1, 3)
    if regime is Regime.CRITICAL or singular:
        if regime is Regime.CRITICAL:
            _warn_fallback()
        for i, tt in enumerate(t.ravel()):
            flat[i] = _augmented_flow(R, Dvec, X0, tt)
    else:
        X_inf = -np.linalg.solve(R, Dvec)
        for i, tt in enumerate(t.ravel()):
            flat[i] = propagator_matrix(model, tt) @ (X0 - X_inf) + X_inf
    out = unscale_variances(model, out)
    # exact identity at t = 0 (the affine form rounds through X_inf)
    out[t == 0] = np.asarray(var0, dtype=float)
    return out


def trajectory(model: OscillatorModel, mean0, var0, t_grid: ArrayLike) -> list[MomentState]:
    """Means and variances on a time grid as :class:`MomentState` records."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    means = propagate_mean(model, mean0, t_grid)
    var = propagate_variances(model, var0, t_grid)
    return [MomentState(*means[i], *var[i], t=float(t_grid[i])) for i in range(len(t_grid))]


# ---------------------------------------------------------------------------
# asymptotics


def _require_steady(model: OscillatorModel) -> float:
    lam, w, mu = model.lam, model.omega, model.mu
    denom = lam * (lam**2 + w**2 - mu**2)
    if not (lam > 0 and denom > 0):
        raise NoSteadyStateError("lam (lam^2 + omega^2 - mu^2) must be positive for a steady state")
    return denom


def asymptotic_variances(model: OscillatorModel) -> tuple[float, float, float]:
    """Stationary ``(sigma_qq, sigma_pp, sigma_pq)`` as rational functions of the constants."""
    denom = _require_steady(model)
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu
    Dqq, Dpp, Dpq = model.D_qq, model.D_pp, model.D_pq
    mw2 = (m * w) ** 2
    s_qq = (mw2 * (2 * lam * (lam + mu) + w**2) * Dqq + w**2 * Dpp + 2 * m * w**2 * (lam + mu) * Dpq) / (
        2 * mw2 * denom
    )
    s_pp = (mw2 * w**2 * Dqq + (2 * lam * (lam - mu) + w**2) * Dpp - 2 * m * w**2 * (lam - mu) * Dpq) / (
        2 * denom
    )
    s_pq = (-(lam + mu) * mw2 * Dqq + (lam - mu) * Dpp + 2 * m * (lam**2 - mu**2) * Dpq) / (2 * m * denom)
    return s_qq, s_pp, s_pq


def diffusion_from_asymptotics(model: OscillatorModel, s_qq: float, s_pp: float, s_pq: float):
    """Diffusion constants ``(D_qq, D_pp, D_pq)`` that produce the given stationary variances."""
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu
    D_qq = (lam - mu) * s_qq - s_pq / m
    D_pp = (lam + mu) * s_pp + m * w**2 * s_pq
    D_pq = 0.5 * (m * w**2 * s_qq - s_pp / m + 2 * lam * s_pq)
    return D_qq, D_pp, D_pq


def asymptotic_energy(model: OscillatorModel, rtol: float = 1e-10) -> float:
    """Stationary mean energy ``(D_pp/2m + m omega^2 D_qq/2 + mu D_pq) / lam``.

    Also checks that the same value follows from the stationary variances
    and that ``(lam^2 + omega^2 - mu^2) det sigma = det(D~)/4 + E^2``.

    Raises
    ------
    NoSteadyStateError
    ConsistencyError
        If either identity fails beyond ``rtol``.
    """
    _require_steady(model)
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu
    E = (model.D_pp / (2 * m) + m * w**2 * model.D_qq / 2 + mu * model.D_pq) / lam
    s_qq, s_pp, s_pq = asymptotic_variances(model)
    E_sigma = s_pp / (2 * m) + m * w**2 * s_qq / 2 + mu * s_pq
    det_sigma = s_qq * s_pp - s_pq**2
    det_D = model.D_qq * model.D_pp - model.D_pq**2  # det(D~)/4
    lhs = (lam**2 + w**2 - mu**2) * det_sigma
    rhs = det_D + E**2
    scale = max(abs(lhs), abs(rhs), abs(det_D), E**2)
    if abs(E - E_sigma) > rtol * max(abs(E), abs(E_sigma), 1e-300):
        raise ConsistencyError(f"energy identity failed: {E} vs {E_sigma}")
    if abs(lhs - rhs) > rtol * scale:
        raise ConsistencyError(f"determinant identity failed: {lhs} vs {rhs}")
    return E


def uncertainty_monitor(model: OscillatorModel, var0, t_grid: ArrayLike, rtol: float = 1e-9) -> list[UncertaintyPoint]:
    """Track ``s_qq s_pp - s_pq^2`` against ``hbar^2/4`` and the sufficient condition.

    The sufficient condition is
    ``D_qq s_pp + D_pp s_qq - 2 D_pq s_pq >= hbar^2 lam / 2``.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be ascending")
    var = propagate_variances(model, var0, t_grid)
    hb2 = model.hbar**2
    out = []
    for tt, (s_qq, s_pp, s_pq) in zip(t_grid, var):
        prod = s_qq * s_pp - s_pq**2
        lhs = model.D_qq * s_pp + model.D_pp * s_qq - 2 * model.D_pq * s_pq
        out.append(
            UncertaintyPoint(
                t=float(tt),
                product=float(prod),
                ok=bool(prod >= hb2 / 4 * (1 - rtol)),
                sufficient=bool(lhs >= hb2 * model.lam / 2 * (1 - rtol)),
            )
        )
    return out


def initial_asymptotic_restriction(model: OscillatorModel, var0) -> tuple[float, bool]:
    """Diagnostic mixing initial and stationary variances.

    Returns the left-hand side of
    ``lam (a_qq b_pp + a_pp b_qq - 2 a_pq b_pq) - mu (a_qq b_pp - a_pp b_qq)
    - (a_pq b_pp - a_pp b_pq)/m + m omega^2 (a_pq b_qq - a_qq b_pq)``
    (``a`` stationary, ``b`` initial) and whether it reaches ``hbar^2 lam / 2``.
    """
    a_qq, a_pp, a_pq = asymptotic_variances(model)
    b_qq, b_pp, b_pq = (float(x) for x in var0)
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu
    value = (
        lam * (a_qq * b_pp + a_pp * b_qq - 2 * a_pq * b_pq)
        - mu * (a_qq * b_pp - a_pp * b_qq)
        - (a_pq * b_pp - a_pp * b_pq) / m
        + m * w**2 * (a_pq * b_qq - a_qq * b_pq)
    )
    bound = model.hbar**2 * lam / 2
    return value, bool(value >= bound * (1 - 1e-12))


# ---------------------------------------------------------------------------
# presets

#: hbar in MeV s
HBAR_MEV_S = 6.582119569e-22


def charge_equilibration_preset(
    lam: float = 2.4e22,
    excess: float = 1.5,
    D_pq: float = 0.0,
) -> OscillatorModel:
    """Charge-asymmetry oscillator of a deep inelastic Fe + Bi collision.

    Inertia ``B = 1.6127e-40 MeV s^2`` and stiffness ``K = 1.6363e4 MeV``
    give ``omega = sqrt(K/B) = 1.0073e22 1/s`` and ``hbar omega = 6.63 MeV``;
    ``mu = 2.33e22 1/s`` makes the motion overdamped. The friction and
    diffusion constants were fitted to data that is not bundled here, so
    ``lam`` and the diffusion scale are illustrative: ``D_qq`` and ``D_pp``
    are ``excess`` times their zero-temperature values. Units are MeV and
    seconds, with the asymmetry coordinate dimensionless.
    """
    B = 1.6127e-40
    K = 1.6363e4
    omega = math.sqrt(K / B)
    hbar = HBAR_MEV_S
    return OscillatorModel(
        m=B,
        omega=omega,
        lam=lam,
        mu=2.33e22,
        D_qq=excess * lam * hbar / (2 * B * omega),
        D_pp=excess * lam * hbar * B * omega / 2,
        D_pq=D_pq,
        hbar=hbar,
    )
