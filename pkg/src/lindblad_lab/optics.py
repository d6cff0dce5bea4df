"""Two-level atoms in a field with an environment that couples the Bloch components.

The Bloch vector ``(sx, sy, sz)`` obeys ``d sigma/dt = -M sigma + d`` with

    M = [[g_p,       -(w0 - s),  g1      ],
         [w0 - s,    g_pp,       g2 - chi],
         [g1,        g2 + chi,   g_par   ]]

and ``d = (D1, D2, D3)``. ``g1`` and ``g2`` are environment-induced
couplings between the components; with ``s = g1 = g2 = D1 = D2 = 0`` and
``g_p = g_pp`` the ordinary Bloch equations are recovered.

In the steady state of the first-harmonic amplitudes the relevant
parameters are

    Gamma = (g2 - 2 chi0) / g1,  zeta = (g_p / g_pp) Gamma,  delta = (w0 - s - w) / g_pp
    g_par' = g_par (1 - g1^2 / (g_p g_par)),  chi_s^2 = g_par' g_pp / 2,  eps = chi1 / chi_s
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import ConfigurationError, SingularOperatingPointError

__all__ = [
    "AtomEnvModel",
    "OpticsDerived",
    "PositivityReport",
    "drift_matrix",
    "drive_vector",
    "transient",
    "steady_bloch",
    "derived",
    "positivity",
    "steady_polarization",
    "absorption",
    "population",
    "line_shape",
    "line_width_quadrature",
    "absorption_spectrum",
    "propagate_field",
    "alpha0_from_coupling",
]


@dataclass(frozen=True)
class AtomEnvModel:
    """Rates, couplings and field amplitudes of the atom-environment model.

    ``chi_bar`` is the normalized field in the transient equations; ``chi0``
    and ``chi1`` are the static and first-harmonic field amplitudes of the
    steady state. ``chi_s`` and ``N_e`` default to their derived values;
    ``N_e`` then needs the atom density ``N_density``.
    """

    gamma_perp_prime: float
    gamma_perp_dblprime: float
    gamma_parallel: float
    s: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    D1: float = 0.0
    D2: float = 0.0
    D3: float = 0.0
    omega0: float = 1.0
    omega: float = 1.0
    chi0: float = 0.0
    chi1: complex = 0.0
    chi_s: float | None = None
    N_e: float | None = None
    N_density: float = 1.0
    chi_bar: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("gamma_perp_prime", "gamma_perp_dblprime", "gamma_parallel"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")

    @classmethod
    def from_coefficient_vectors(cls, A: ArrayLike, B: ArrayLike, C: ArrayLike, hbar: float = 1.0, **kw) -> "AtomEnvModel":
        """Rates from environment operators ``A_j sx + B_j sy + C_j sz``.

        Models built this way satisfy the positivity conditions.
        """
        A, B, C = (np.atleast_1d(np.asarray(v, dtype=complex)) for v in (A, B, C))

        def dot(x, y):
            return complex(np.sum(np.conj(x) * y))

        L_xy = dot(C, C).real / (2 * hbar)
        L_yz = dot(A, A).real / (2 * hbar)
        L_zx = dot(B, B).real / (2 * hbar)
        G_xy = -dot(A, B).real / (2 * hbar)
        G_yz = -dot(B, C).real / (2 * hbar)
        G_zx = -dot(C, A).real / (2 * hbar)
        D_x = dot(B, C).imag / hbar
        D_y = dot(C, A).imag / hbar
        D_z = dot(A, B).imag / hbar
        return cls(
            gamma_perp_prime=4 * (L_xy + L_zx),
            gamma_perp_dblprime=4 * (L_xy + L_yz),
            gamma_parallel=4 * (L_zx + L_yz),
            s=4 * G_xy,
            gamma1=4 * G_zx,
            gamma2=4 * G_yz,
            D1=4 * D_x,
            D2=4 * D_y,
            D3=4 * D_z,
            hbar=hbar,
            **kw,
        )

    def replace(self, **changes) -> "AtomEnvModel":
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# transient Bloch dynamics


def drift_matrix(model: AtomEnvModel, variant: str = "shift") -> np.ndarray:
    """``M`` of ``d sigma/dt = -M sigma + d``.

    ``variant="derived"`` puts ``s`` symmetrically, ``(w0 + s)`` in the
    second row, as obtained by applying the dissipator to the Pauli
    matrices directly; the default treats ``s`` as a frequency shift.
    """
    m = model
    w_lo = m.omega0 - m.s
    if variant == "shift":
        w_hi = w_lo
    elif variant == "derived":
        w_hi = m.omega0 + m.s
    else:
        raise ConfigurationError(f"unknown variant {variant!r}")
    return np.array(
        [
            [m.gamma_perp_prime, -w_lo, m.gamma1],
            [w_hi, m.gamma_perp_dblprime, m.gamma2 - m.chi_bar],
            [m.gamma1, m.gamma2 + m.chi_bar, m.gamma_parallel],
        ]
    )


def drive_vector(model: AtomEnvModel) -> np.ndarray:
    return np.array([model.D1, model.D2, model.D3])


def transient(model: AtomEnvModel, sigma0: ArrayLike, t_grid: ArrayLike, variant: str = "shift") -> np.ndarray:
    """Bloch vector on ``t_grid`` (shape ``(len(t_grid), 3)``), by block exponential."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ConfigurationError("t_grid must be ascending")
    G = np.zeros((4, 4))
    G[:3, :3] = -drift_matrix(model, variant)
    G[:3, 3] = drive_vector(model)
    x0 = np.append(np.asarray(sigma0, dtype=float), 1.0)
    return np.array([(expm(G * ti) @ x0)[:3] for ti in t])


def steady_bloch(model: AtomEnvModel, variant: str = "shift") -> np.ndarray:
    """Fixed point ``M^-1 d`` of the transient equations."""
    M = drift_matrix(model, variant)
    try:
        return np.linalg.solve(M, drive_vector(model))
    except np.linalg.LinAlgError as exc:
        raise SingularOperatingPointError("drift matrix is singular") from exc


# ---------------------------------------------------------------------------
# positivity


@dataclass(frozen=True)
class PositivityReport:
    """The six rate conditions and the constants they are built from."""

    Lambda: dict
    Gamma: dict
    D: dict
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def positivity(model: AtomEnvModel, tol: float = 1e-12) -> PositivityReport:
    """Recover the ``Lambda``, ``Gamma`` and ``D`` constants and test them."""
    gp, gpp, gpar = model.gamma_perp_prime, model.gamma_perp_dblprime, model.gamma_parallel
    Lam = {
        "xy": (gp + gpp - gpar) / 8,
        "zx": (gp + gpar - gpp) / 8,
        "yz": (gpp + gpar - gp) / 8,
    }
    Gam = {"xy": model.s / 4, "zx": model.gamma1 / 4, "yz": model.gamma2 / 4}
    D = {"x": model.D1 / 4, "y": model.D2 / 4, "z": model.D3 / 4}
    scale = max(1.0, max(abs(v) for v in Lam.values())) ** 2
    checks = {
        "Lambda_xy>=0": Lam["xy"] >= -tol,
        "Lambda_yz>=0": Lam["yz"] >= -tol,
        "Lambda_zx>=0": Lam["zx"] >= -tol,
        "xy*zx": Lam["xy"] * Lam["zx"] - Gam["yz"] ** 2 - D["x"] ** 2 / 4 >= -tol * scale,
        "yz*xy": Lam["yz"] * Lam["xy"] - Gam["zx"] ** 2 - D["y"] ** 2 / 4 >= -tol * scale,
        "zx*yz": Lam["zx"] * Lam["yz"] - Gam["xy"] ** 2 - D["z"] ** 2 / 4 >= -tol * scale,
    }
    return PositivityReport(Lam, Gam, D, {k: bool(v) for k, v in checks.items()})


# ---------------------------------------------------------------------------
# steady state of the first harmonic


@dataclass(frozen=True)
class OpticsDerived:
    Gamma: float
    zeta: float
    delta: float
    epsilon: complex
    gamma_parallel_prime: float
    chi_s: float
    N_e: float


def derived(model: AtomEnvModel) -> OpticsDerived:
    """Dimensionless steady-state parameters.

    Raises
    ------
    SingularOperatingPointError
        If ``gamma1``, ``gamma_perp_prime`` or ``gamma_perp_dblprime`` vanish, or
        the saturation amplitude is not real.
    """
    m = model
    if m.gamma1 == 0 or m.gamma_perp_prime == 0 or m.gamma_perp_dblprime == 0:
        raise SingularOperatingPointError("steady state needs nonzero gamma1 and transverse rates")
    Gamma = (m.gamma2 - 2 * m.chi0) / m.gamma1
    zeta = m.gamma_perp_prime / m.gamma_perp_dblprime * Gamma
    ratio = m.gamma1**2 / (m.gamma_perp_prime * m.gamma_parallel) if m.gamma_parallel else math.inf
    gpar_p = m.gamma_parallel * (1 - ratio)
    if m.chi_s is not None:
        chi_s = float(m.chi_s)
    else:
        if not gpar_p * m.gamma_perp_dblprime > 0:
            raise SingularOperatingPointError("saturation amplitude squared is not positive")
        chi_s = math.sqrt(gpar_p * m.gamma_perp_dblprime / 2)
    if m.N_e is not None:
        N_e = float(m.N_e)
    else:
        # gamma1 N1 = N D1 and N3 = N D3 / g_par
        N3 = m.N_density * m.D3 / m.gamma_parallel
        N_e = (N3 - m.N_density * m.D1 / m.gamma_perp_prime) / (1 - ratio)
    return OpticsDerived(
        Gamma=Gamma,
        zeta=zeta,
        delta=(m.omega0 - m.s - m.omega) / m.gamma_perp_dblprime,
        epsilon=complex(m.chi1) / chi_s,
        gamma_parallel_prime=gpar_p,
        chi_s=chi_s,
        N_e=N_e,
    )


def _denominator(d: OpticsDerived) -> tuple[float, float, float]:
    a = 1 + d.Gamma * d.delta
    b = d.delta - d.zeta
    den = a * a + b * b + a * abs(d.epsilon) ** 2
    if den == 0:
        raise SingularOperatingPointError("operating point makes the line-shape denominator vanish")
    return a, b, den


def steady_polarization(model: AtomEnvModel) -> complex:
    """Steady first-harmonic polarization amplitude ``S1``."""
    d = derived(model)
    a, b, den = _denominator(d)
    return 2 * d.N_e * d.chi_s / model.gamma_perp_dblprime * complex(b, a) * d.epsilon / den


def absorption(model: AtomEnvModel, alpha0: float = 1.0) -> tuple[float, float]:
    """Absorption coefficient and dephasing rate ``(alpha, dtheta/dz)``.

    The dephasing is evaluated as ``-(alpha0/2)(delta - zeta)/den``, which
    stays finite where ``1 + Gamma delta = 0``.
    """
    d = derived(model)
    a, b, den = _denominator(d)
    return alpha0 / 2 * a / den, -alpha0 / 2 * b / den


def population(model: AtomEnvModel) -> float:
    """Steady population difference ``N0``; exceeds ``N_e`` when ``1 + Gamma delta < 0``."""
    d = derived(model)
    a, b, den = _denominator(d)
    base = a * a + b * b
    if base == 0:
        raise SingularOperatingPointError("operating point at the line pole")
    return d.N_e / (1 + a / base * abs(d.epsilon) ** 2)


def line_shape(model: AtomEnvModel) -> tuple[float, float]:
    """Width ``W = 2 g_pp (1 + Gamma zeta)`` and shift ``g_pp zeta`` of the absorption line."""
    d = derived(model)
    g = model.gamma_perp_dblprime
    return 2 * g * (1 + d.Gamma * d.zeta), g * d.zeta


def absorption_spectrum(model: AtomEnvModel, delta: ArrayLike, alpha0: float = 1.0) -> dict:
    """Columns ``delta, alpha, dtheta_dz, N0`` over a detuning grid.

    Points where the denominator vanishes are returned as NaN.
    """
    d = derived(model)
    delta = np.asarray(delta, dtype=float)
    a = 1 + d.Gamma * delta
    b = delta - d.zeta
    e2 = abs(d.epsilon) ** 2
    base = a * a + b * b
    den = base + a * e2
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(den == 0, np.nan, alpha0 / 2 * a / den)
        dtheta = np.where(den == 0, np.nan, -alpha0 / 2 * b / den)
        N0 = np.where((den == 0) | (base == 0), np.nan, d.N_e * base / den)
    return {"delta": delta, "alpha": alpha, "dtheta_dz": dtheta, "N0": N0}


def line_width_quadrature(model: AtomEnvModel, half_width: float = 2e4, n: int = 400_001) -> float:
    """Equivalent Lorentzian width ``(2/pi) int alpha d omega / max alpha``.

    The detuning is swept over ``+-half_width`` (in units of ``g_pp``); the
    maximum is taken on an extra dense patch near the line centre.
    """
    grid = np.linspace(-half_width, half_width, n)
    alpha = absorption_spectrum(model, grid)["alpha"]
    peak = absorption_spectrum(model, np.linspace(-3, 3, 60001))["alpha"]
    area = np.trapezoid(alpha, grid) * model.gamma_perp_dblprime
    return 2 / math.pi * area / max(alpha.max(), peak.max())


def propagate_field(model: AtomEnvModel, eps0: float, z: ArrayLike, alpha0: float = 1.0) -> np.ndarray:
    """Forward-wave amplitude ``|eps|(z)`` from ``d|eps|/dz = -alpha(|eps|) |eps|``."""
    z = np.asarray(z, dtype=float)
    chi_s = derived(model).chi_s

    def rhs(_, y):
        alpha, _ = absorption(model.replace(chi1=float(y[0]) * chi_s), alpha0)
        return [-alpha * y[0]]

    sol = solve_ivp(rhs, (z[0], z[-1]), [float(eps0)], t_eval=z, method="DOP853", rtol=1e-10, atol=1e-14)
    return sol.y[0]


def alpha0_from_coupling(mu: float, g: float, N_e: float, gamma_perp_dblprime: float, hbar: float = 1.0, c: float = 1.0) -> float:
    """Line-centre absorption scale ``4 mu g N_e / (c hbar g_pp)``."""
    return 4 * mu * g * N_e / (c * hbar * gamma_perp_dblprime)
