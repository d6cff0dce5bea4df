"""Tunneling through a barrier with a dissipative environment.

Second-order perturbation theory in the tunneling operator and the
dissipator gives the occupation ``rho_ii(t)`` of channel level ``i`` as a
sum of nine terms. With ``x = omega_i t`` the shapes of the terms are the
line functions

    f(x)   = sin^2(x/2) / (x/2)^2
    g_l(x) = -sin^2(x/2) / (x/2)
    g_D(x) = (sin x / x - cos x) / x
    g_N(x) = -(1 - sin x / x) / x

Per-level matrix elements scale as ``sqrt(delta_omega)`` so that sums over
levels do not depend on the level spacing.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from numpy.typing import ArrayLike

from .errors import ConfigurationError
from .model import OscillatorModel, validate

__all__ = [
    "BarrierMatrixElements",
    "TunnelSpectrum",
    "TunnelSpectrumPoint",
    "DecayLaw",
    "COMPONENTS",
    "line_functions",
    "spectrum",
    "level_grid",
    "summed_rate",
    "decay_parameters",
    "golden_rule_rate",
    "decay_law",
    "half_life",
    "dekker_kappa",
    "dekker_table",
    "gamow_preset",
]

COMPONENTS = ("G", "L", "lambda", "D", "N", "A", "B", "C", "F")

# below this |x| the cancelling forms switch to their Taylor series
_SERIES_X = 0.1


def _one_minus_sinc(x: np.ndarray) -> np.ndarray:
    """``1 - sin x / x``."""
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_X
    xs = x[small] ** 2
    out[small] = xs / 6 * (1 - xs / 20 * (1 - xs / 42 * (1 - xs / 72)))
    xl = x[~small]
    out[~small] = 1 - np.sin(xl) / xl
    return out


def _sinc_minus_cos(x: np.ndarray) -> np.ndarray:
    """``sin x / x - cos x``, series ``sum_k (-1)^(k+1) 2k x^(2k) / (2k+1)!``."""
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_X
    xs = x[small] ** 2
    out[small] = xs / 3 - xs**2 / 30 + xs**3 / 840 - xs**4 / 45360
    xl = x[~small]
    out[~small] = np.sin(xl) / xl - np.cos(xl)
    return out


def line_functions(x: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(f, g_lambda, g_D, g_N)`` at ``x = omega_i t``.

    The removable singularities at ``x = 0`` take their limits ``(1, 0, 0, 0)``.
    ``f`` is even; the other three are odd.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    half_sinc = np.sinc(x / (2 * np.pi))  # sin(x/2) / (x/2)
    f = half_sinc**2
    g_l = -0.5 * x * f
    with np.errstate(divide="ignore", invalid="ignore"):
        g_D = np.where(x == 0, 0.0, _sinc_minus_cos(x) / np.where(x == 0, 1.0, x))
        g_N = np.where(x == 0, 0.0, -_one_minus_sinc(x) / np.where(x == 0, 1.0, x))
    return f, g_l, g_D, g_N


@dataclass(frozen=True)
class BarrierMatrixElements:
    """Overlap integrals between the compound state and a channel level.

    ``C_0i``, ``Omega_i0``, ``q_i0``, ``s_0i``, ``u_0i``, ``v_0i`` and
    ``w_0i`` are per-level (scalars or arrays matching the frequency grid);
    ``u_00`` and ``w_00`` belong to the compound state alone.
    """

    C_0i: float
    Omega_i0: float
    q_i0: float
    s_0i: float
    u_0i: float
    u_00: float
    v_0i: float
    w_0i: float
    w_00: float
    delta_omega: float

    PER_LEVEL = ("C_0i", "Omega_i0", "q_i0", "s_0i", "u_0i", "v_0i", "w_0i")

    def __post_init__(self):
        if not self.delta_omega > 0:
            raise ConfigurationError("delta_omega must be positive")

    def to_dict(self) -> dict:
        return {f.name: (np.asarray(getattr(self, f.name)).tolist()) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "BarrierMatrixElements":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigurationError(f"unknown matrix-element keys: {sorted(unknown)}")
        missing = names - set(data)
        if missing:
            raise ConfigurationError(f"missing matrix-element keys: {sorted(missing)}")
        return cls(**{k: (np.asarray(v, dtype=float) if isinstance(v, list) else float(v)) for k, v in data.items()})

    def refined(self, factor: float) -> "BarrierMatrixElements":
        """Same physics on a level spacing ``delta_omega / factor``."""
        s = 1 / math.sqrt(factor)
        kw = asdict(self)
        for name in self.PER_LEVEL:
            kw[name] = np.asarray(kw[name]) * s
        kw["delta_omega"] = self.delta_omega / factor
        return BarrierMatrixElements(**kw)


@dataclass(frozen=True)
class TunnelSpectrumPoint:
    omega_i: float
    Gamma: float
    components: dict


@dataclass(frozen=True)
class TunnelSpectrum:
    """Rates ``rho_ii(t)/t`` on a frequency grid.

    ``total`` is the sum of the nine ``components``; ``compact`` is the
    four-line form ``W^2 t F(x) + phi (1 + lam t / 2)``, which weights the
    ``L`` term twice and omits the time-independent ``C`` and ``F`` terms.
    """

    omega: np.ndarray
    t: float
    total: np.ndarray
    compact: np.ndarray
    components: dict
    W2: np.ndarray
    phi: np.ndarray
    eta_lambda: np.ndarray
    eta_D: np.ndarray
    eta_N: np.ndarray
    constraints_ok: bool

    def points(self) -> list[TunnelSpectrumPoint]:
        return [
            TunnelSpectrumPoint(float(w), float(g), {k: float(v[i]) for k, v in self.components.items()})
            for i, (w, g) in enumerate(zip(self.omega, self.total))
        ]


def spectrum(
    model: OscillatorModel,
    elems: BarrierMatrixElements,
    t: float,
    omega: ArrayLike | None = None,
) -> TunnelSpectrum:
    """Transition-rate spectrum at time ``t``.

    The default grid has 2048 points over ``[-12/t, 12/t]``.
    """
    if not t > 0:
        raise ConfigurationError("t must be positive")
    if omega is None:
        omega = np.linspace(-12 / t, 12 / t, 2048)
    w = np.asarray(omega, dtype=float)
    x = w * t
    f, g_l, g_D, g_N = line_functions(x)
    hb, lam = model.hbar, model.lam
    Dqq, Dpp, Dpq = model.D_qq, model.D_pp, model.D_pq / hb
    e = elems
    C, Om, q, s = (np.asarray(getattr(e, k), dtype=float) for k in ("C_0i", "Omega_i0", "q_i0", "s_0i"))
    u, v, wv = (np.asarray(getattr(e, k), dtype=float) for k in ("u_0i", "v_0i", "w_0i"))
    Cv = C + 2 * v
    friction_mix = lam * C + 2 * Dqq * u - 2 * Dpp / hb**2 * wv
    K_L = lam * C * friction_mix - 2 * Dpq * Om * Cv
    phi = -2 * lam * q * s + 2 * Dqq * s**2 + 2 * Dpp / hb**2 * q**2
    diff00 = Dqq * e.u_00 + Dpp / hb**2 * e.w_00
    sinc = np.sinc(x / np.pi)

    comps = {
        "G": Om**2 * t * f,
        "L": K_L * t * f / 2,
        "lambda": -lam * C * Om * t * g_l,
        "D": -2 * diff00 * C * Om * t * g_D,
        "N": 2 * Dpq * lam * C * Cv * t * g_N,
        "A": phi + 0 * x,
        "B": phi * lam * t / 2 + 0 * x,
        "C": C**2 / t + 0 * x,
        "F": C * (-2 * (Om - Dpq * Cv) * g_l + friction_mix * sinc),
    }
    comps = {k: np.broadcast_to(v, x.shape).astype(float) for k, v in comps.items()}
    total = sum(comps[k] for k in COMPONENTS)

    W2 = Om**2 + K_L
    with np.errstate(divide="ignore", invalid="ignore"):
        eta_l = -lam * C * Om / W2
        eta_D = -2 * diff00 * C * Om / W2
        eta_N = 2 * Dpq * lam * C * Cv / W2
    F = f + eta_l * g_l + eta_D * g_D + eta_N * g_N
    compact = W2 * t * F + phi * (1 + lam * t / 2)
    return TunnelSpectrum(
        omega=w,
        t=float(t),
        total=total,
        compact=np.broadcast_to(compact, x.shape).astype(float),
        components=comps,
        W2=np.broadcast_to(W2, x.shape).astype(float),
        phi=np.broadcast_to(phi, x.shape).astype(float),
        eta_lambda=np.broadcast_to(eta_l, x.shape).astype(float),
        eta_D=np.broadcast_to(eta_D, x.shape).astype(float),
        eta_N=np.broadcast_to(eta_N, x.shape).astype(float),
        constraints_ok=validate(model).schwartz_ok,
    )


def level_grid(delta_omega: float, t: float, x_max: float = 400.0) -> np.ndarray:
    """Channel levels ``k delta_omega`` with ``|omega t| <= x_max``."""
    n = int(math.floor(x_max / (t * delta_omega)))
    return delta_omega * np.arange(-n, n + 1)


def _level_weights(n: int) -> np.ndarray:
    # trapezoid end weights: the level sum stands for an integral over a window
    wts = np.ones(n)
    wts[0] = wts[-1] = 0.5
    return wts


def summed_rate(model: OscillatorModel, elems: BarrierMatrixElements, t: float, levels: ArrayLike | None = None) -> dict:
    """Sum over levels of ``rho_ii(t)/t``, per component and in total."""
    if levels is None:
        levels = level_grid(elems.delta_omega, t)
    sp = spectrum(model, elems, t, levels)
    wts = _level_weights(len(sp.omega))
    out = {k: float(wts @ v) for k, v in sp.components.items()}
    out["total"] = float(wts @ sp.total)
    return out


def decay_parameters(model: OscillatorModel, elems: BarrierMatrixElements, t: float, levels: ArrayLike | None = None) -> tuple[float, float, float]:
    """``(chi, Gamma0, Gamma1)`` of ``sum_i rho_ii(t) = chi + Gamma0 t + Gamma1 t^2``."""
    r = summed_rate(model, elems, t, levels)
    gamma0 = sum(r[k] for k in ("G", "L", "lambda", "D", "N", "A"))
    gamma1 = r["B"] / t
    chi = (r["C"] + r["F"]) * t
    return chi, gamma0, gamma1


def golden_rule_rate(elems: BarrierMatrixElements) -> float:
    """Lowest-order rate ``2 pi Omega^2 / delta_omega`` for a constant matrix element."""
    return 2 * math.pi * float(elems.Omega_i0) ** 2 / elems.delta_omega


@dataclass(frozen=True)
class DecayLaw:
    N: np.ndarray
    N_initial: float
    t0: float


def decay_law(chi: float, Gamma0: float, Gamma1: float, N0: float, t: ArrayLike) -> DecayLaw:
    """Surviving population ``N(0) exp(-Gamma0 t - Gamma1 t^2)``, ``N(0) = N0 exp(-chi)``.

    ``t0 = chi / Gamma0`` estimates the time below which ``chi`` matters.
    """
    if Gamma0 < 0 or Gamma1 < 0:
        raise ConfigurationError("Gamma0 and Gamma1 must be non-negative")
    t = np.asarray(t, dtype=float)
    N_init = N0 * math.exp(-chi)
    t0 = chi / Gamma0 if Gamma0 > 0 else math.inf
    return DecayLaw(N=N_init * np.exp(-Gamma0 * t - Gamma1 * t**2), N_initial=N_init, t0=t0)


def half_life(Gamma0: float, Gamma1: float) -> float:
    """Positive root of ``Gamma0 t + Gamma1 t^2 = ln 2``."""
    if Gamma0 < 0 or Gamma1 < 0 or Gamma0 == Gamma1 == 0:
        raise ConfigurationError("need non-negative rates, not both zero")
    ln2 = math.log(2)
    # cancellation-free form of the quadratic root
    return 2 * ln2 / (Gamma0 + math.sqrt(Gamma0**2 + 4 * Gamma1 * ln2))


def _outgoing_slope(drift: np.ndarray) -> float:
    """``<p>/<q>`` along the unstable eigenvector of a linear flow."""
    ev, vec = np.linalg.eig(drift)
    k = int(np.argmax(ev.real))
    return float((vec[1, k] / vec[0, k]).real)


def dekker_kappa(lam: float, omega_b: float) -> tuple[float, float]:
    """Transmission factor ``<p(lam)>/<p(0)>`` on the outgoing barrier trajectory.

    Returns the value for friction acting on the momentum only and for the
    symmetric friction of the moment equations. The latter is derived from
    the eigenvectors of the mean flow and is 1 for every ``lam``.
    """
    if not omega_b > 0 or lam < 0:
        raise ConfigurationError("need omega_b > 0 and lam >= 0")
    r = lam / omega_b
    kappa_d = 1 / (math.sqrt(1 + r * r) + r)
    w2 = omega_b**2
    sym = _outgoing_slope(np.array([[-lam, 1.0], [w2, -lam]])) / _outgoing_slope(np.array([[0.0, 1.0], [w2, 0.0]]))
    return kappa_d, sym


def dekker_table(ratios: ArrayLike = (0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 4.0)) -> list[tuple[float, float, float]]:
    """Rows ``(lam/omega_b, kappa_dekker, kappa_lindblad)`` at ``omega_b = 1``."""
    return [(float(r), *dekker_kappa(float(r), 1.0)) for r in np.asarray(ratios, dtype=float)]


def gamow_preset(delta_omega: float = 1e-3, dissipative: bool = True) -> tuple[OscillatorModel, BarrierMatrixElements]:
    """Illustrative barrier with a negative tunneling element and positive overlap.

    With ``dissipative=False`` all friction and diffusion constants vanish,
    leaving the pure Gamow line. Per-level elements are quoted for
    ``delta_omega = 1e-3`` and rescaled by ``sqrt(delta_omega / 1e-3)``.
    """
    if dissipative:
        model = OscillatorModel(m=1.0, omega=1.0, lam=0.1, mu=0.0, D_qq=0.06, D_pp=0.06, D_pq=0.01)
    else:
        model = OscillatorModel(m=1.0, omega=1.0, lam=0.0, mu=0.0, D_qq=0.0, D_pp=0.0, D_pq=0.0)
    base = BarrierMatrixElements(
        C_0i=0.02, Omega_i0=-0.01, q_i0=0.05, s_0i=0.03, u_0i=0.1,
        u_00=0.5, v_0i=0.01, w_0i=0.04, w_00=0.5, delta_omega=1e-3,
    )
    return model, base.refined(1e-3 / delta_omega)
