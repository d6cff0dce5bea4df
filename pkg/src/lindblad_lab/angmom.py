"""Damping of angular momentum in three dimensions.

Three rotationally symmetric choices of environment operators are covered
at the level of expectation values:

1. ``V_j = alpha L_j`` conserves ``L^2`` and equalizes the ``L_i^2``.
2. ``V_j = alpha N_j`` (Lorentz-group boosts) makes ``L^2`` and ``N^2`` grow
   exponentially.
3. ``V_j = a p_j + b q_j`` damps ``L^2`` through the closed system of
   ``q^2``, ``p^2``, ``S = qp + pq`` and ``L^2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ConfigurationError, DegenerateCaseError, NoSteadyStateError

__all__ = [
    "AngMomCase1",
    "AngMomCase3",
    "Hamiltonian",
    "case1_evolve",
    "case2_evolve",
    "case3_evolve",
    "case3_asymptotes",
    "oscillator_L2_inf",
    "oscillator_H_inf",
    "inverted_barrier_note",
]


class Hamiltonian(enum.Enum):
    ROTOR_L2 = "RotorL2"
    SPHERICAL_OSCILLATOR = "SphericalOscillator"


@dataclass(frozen=True)
class AngMomCase1:
    """Depolarization: ``alpha_sq = |alpha|^2``, conserved ``L2`` and initial ``<L_i^2>``."""

    alpha_sq: float
    L2: float
    Li2_0: tuple[float, float, float]
    hbar: float = 1.0

    def __post_init__(self):
        if self.alpha_sq < 0:
            raise ConfigurationError("alpha_sq must be non-negative")
        if len(self.Li2_0) != 3 or min(self.Li2_0) < 0:
            raise ConfigurationError("Li2_0 must be three non-negative numbers")
        if abs(sum(self.Li2_0) - self.L2) > 1e-12 * max(1.0, abs(self.L2)):
            raise ConfigurationError("components of Li2_0 must sum to L2")


@dataclass(frozen=True)
class AngMomCase3:
    """Linear environment operators in three dimensions.

    The diffusion constants of a single operator triple satisfy
    ``D_qq D_pp - D_pq^2 = hbar^2 lam^2 / 4`` with equality; this is
    enforced to a relative tolerance of ``1e-10``. ``omega`` and ``m`` enter
    only the spherical oscillator, ``Theta`` only the rotor energy.
    """

    lam: float
    D_qq: float
    D_pp: float
    D_pq: float
    m: float = 1.0
    omega: float = 0.0
    Theta: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigurationError("lam must be positive for relaxation")
        lhs = self.D_qq * self.D_pp - self.D_pq**2
        rhs = self.hbar**2 * self.lam**2 / 4
        if abs(lhs - rhs) > 1e-10 * max(rhs, abs(lhs)):
            raise ConfigurationError(f"D_qq D_pp - D_pq^2 = {lhs} must equal hbar^2 lam^2/4 = {rhs}")

    @classmethod
    def from_coefficients(cls, a: complex, b: complex, **kw) -> "AngMomCase3":
        """Constants from ``V_j = a p_j + b q_j``."""
        hb = kw.get("hbar", 1.0)
        ab = complex(a).conjugate() * complex(b)
        return cls(
            lam=-ab.imag,
            D_qq=hb / 2 * abs(a) ** 2,
            D_pp=hb / 2 * abs(b) ** 2,
            D_pq=-hb / 2 * ab.real,
            **kw,
        )

    @classmethod
    def minimal(cls, lam: float, m: float, omega: float, hbar: float = 1.0, **kw) -> "AngMomCase3":
        """Diffusion that drives the spherical oscillator to its ground-state energy."""
        return cls(
            lam=lam,
            D_qq=lam * hbar / (2 * m * omega),
            D_pp=lam * hbar * m * omega / 2,
            D_pq=0.0,
            m=m,
            omega=omega,
            hbar=hbar,
            **kw,
        )


def case1_evolve(c: AngMomCase1, t: float) -> tuple[float, tuple[float, float, float]]:
    """``(<L^2>, (<L_1^2>, <L_2^2>, <L_3^2>))`` at time ``t``."""
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    e = math.exp(-3 * c.hbar * c.alpha_sq * t)
    third = c.L2 / 3
    return c.L2, tuple(li * e + third * (1 - e) for li in c.Li2_0)


def case2_evolve(
    alpha_sq: float,
    L2_0: float,
    N2_0: float,
    hbar: float,
    t: float,
    h_commutes_with_N2: bool = True,
) -> tuple[float, float]:
    """``(<L^2>, <N^2>)`` at time ``t`` for boost-type environment operators.

    Raises
    ------
    DegenerateCaseError
        If ``h_commutes_with_N2`` is False; no closed form exists then.
    """
    if not h_commutes_with_N2:
        raise DegenerateCaseError("closed form needs [H, N^2] = 0")
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    grow = 0.5 * (L2_0 + N2_0) * math.expm1(4 * alpha_sq * hbar * t)
    return L2_0 + grow, N2_0 + grow


def _generator(c: AngMomCase3, hamiltonian: Hamiltonian) -> np.ndarray:
    """Affine generator on ``(q2, p2, S, L2, 1)`` with ``S = <qp + pq>``."""
    lam, hb = c.lam, c.hbar
    G = np.zeros((5, 5))
    G[0, 0] = G[1, 1] = G[2, 2] = -2 * lam
    G[3, 3] = -4 * lam
    G[3, :3] = 4 * c.D_pp, 4 * c.D_qq, -4 * c.D_pq
    G[:4, 4] = 6 * c.D_qq, 6 * c.D_pp, 12 * c.D_pq, -6 * lam * hb**2
    if hamiltonian is Hamiltonian.SPHERICAL_OSCILLATOR:
        m, w = c.m, c.omega
        if not w > 0:
            raise ConfigurationError("spherical oscillator needs omega > 0")
        G[0, 2] += 1 / m
        G[1, 2] += -m * w**2
        G[2, 0] += -2 * m * w**2
        G[2, 1] += 2 / m
    return G


def case3_evolve(c: AngMomCase3, init: dict, t: float, hamiltonian=Hamiltonian.ROTOR_L2) -> dict:
    """Expectation values ``q2, p2, qp_sym = <qp + pq>/2, L2`` at time ``t``.

    The rotor uses the closed exponential forms; the spherical oscillator
    exponentiates the affine generator.
    """
    hamiltonian = Hamiltonian(hamiltonian)
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    q2, p2, qp, L2 = (float(init[k]) for k in ("q2", "p2", "qp_sym", "L2"))
    lam = c.lam
    if hamiltonian is Hamiltonian.ROTOR_L2:
        A = q2 - 3 * c.D_qq / lam
        B = p2 - 3 * c.D_pp / lam
        C = qp - 3 * c.D_pq / lam
        K = 2 / lam * (A * c.D_pp + B * c.D_qq - 2 * C * c.D_pq)
        Dc = L2 - K
        e2 = math.exp(-2 * lam * t)
        return {
            "q2": A * e2 + 3 * c.D_qq / lam,
            "p2": B * e2 + 3 * c.D_pp / lam,
            "qp_sym": C * e2 + 3 * c.D_pq / lam,
            "L2": Dc * e2 * e2 + K * e2,
        }
    x = expm(_generator(c, hamiltonian) * t) @ np.array([q2, p2, 2 * qp, L2, 1.0])
    return {"q2": x[0], "p2": x[1], "qp_sym": x[2] / 2, "L2": x[3]}


def case3_asymptotes(c: AngMomCase3, hamiltonian=Hamiltonian.ROTOR_L2) -> dict:
    """Fixed point of the linear system, with the energy ``H`` of the chosen Hamiltonian."""
    hamiltonian = Hamiltonian(hamiltonian)
    G = _generator(c, hamiltonian)
    try:
        x = np.linalg.solve(G[:4, :4], -G[:4, 4])
    except np.linalg.LinAlgError as exc:
        raise NoSteadyStateError("singular generator") from exc
    out = {"q2": x[0], "p2": x[1], "qp_sym": x[2] / 2, "L2": x[3]}
    if hamiltonian is Hamiltonian.SPHERICAL_OSCILLATOR:
        out["H"] = x[1] / (2 * c.m) + c.m * c.omega**2 * x[0] / 2
    else:
        out["H"] = x[3] / (2 * c.Theta)
    return out


def oscillator_H_inf(c: AngMomCase3) -> float:
    """Closed-form large-time energy of the spherical oscillator."""
    return 1.5 / c.lam * (c.D_pp / c.m + c.m * c.omega**2 * c.D_qq)


def oscillator_L2_inf(c: AngMomCase3, via_energy: bool = False) -> float:
    """Closed-form large-time ``<L^2>`` of the spherical oscillator.

    With ``via_energy`` the form in terms of :func:`oscillator_H_inf` and the
    ground-state energy ``3 hbar omega / 2`` is used.
    """
    lam, w, m = c.lam, c.omega, c.m
    if via_energy:
        H = oscillator_H_inf(c)
        return 2 / (3 * (lam**2 + w**2)) * (H**2 - (1.5 * c.hbar * w) ** 2)
    return 6 / (lam**2 * (lam**2 + w**2)) * ((c.D_pp / m - m * w**2 * c.D_qq) ** 2 / 4 + w**2 * c.D_pq**2)


def inverted_barrier_note(lam: float, kappa: float) -> bool:
    """Whether friction ``lam`` exceeds the barrier curvature ``kappa``.

    This is the condition for angular-momentum damping when the oscillator
    frequency is replaced by ``i kappa`` near a parabolic barrier.
    """
    if not kappa > 0:
        raise ConfigurationError("kappa must be positive")
    return lam > kappa
