"""Two coupled damped oscillators.

Phase-space vectors are ordered ``(q1, q2, p1, p2)``. Means obey
``dm/dt = Y m`` and the covariance obeys ``dsigma/dt = Y sigma + sigma Y^T + 2 D``
so that

    m(t) = M(t) m(0),                 M(t) = expm(t Y)
    sigma(t) = M (sigma(0) - S) M^T + S,   Y S + S Y^T = -2 D

when ``Y`` is Hurwitz. Without a stationary point the covariance is
propagated through ``sigma(t) = M sigma(0) M^T + 2 Z(t)`` with
``Z(t) = int_0^t M D M^T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .errors import ConfigurationError, NoSteadyStateError

__all__ = [
    "TwoOscModel",
    "TwoOscState",
    "drift_matrix",
    "diffusion_matrix",
    "positivity_matrix",
    "positivity_ok",
    "is_hurwitz",
    "propagate",
    "steady_state",
    "wigner_kernel",
    "uncoupled_propagator",
    "uncoupled_sigma_q1q2",
    "uncoupled_sigma_q1q2_inf",
    "drift_variant_gap",
    "asymmetry_preset",
    "random_twoosc",
    "trajectory",
    "COLUMNS",
]

_NAMES = ("q1", "q2", "p1", "p2")
_PAIRS = [(i, j) for i in range(4) for j in range(i, 4)]
COLUMNS = ("t",) + tuple(f"m_{n}" for n in _NAMES) + tuple(f"sigma_{_NAMES[i]}{_NAMES[j]}" for i, j in _PAIRS)


@dataclass(frozen=True)
class TwoOscModel:
    """Constants of two oscillators coupled through the Hamiltonian and the bath.

    ``lambda_matrix[k, l]`` is the friction matrix and ``mu_matrix[k, l]``
    the coefficient of ``(p_k q_l + q_l p_k)/2`` in the Hamiltonian.
    ``Dmat`` is the symmetric diffusion matrix in the ``(q1, q2, p1, p2)``
    ordering, so ``Dmat[0, 3]`` is ``D_{q1 p2}``.

    Construction fails if the Hermitian positivity matrix has a negative
    eigenvalue beyond a relative tolerance of ``1e-12``.
    """

    m1: float
    m2: float
    omega1: float
    omega2: float
    k12: float = 0.0
    mu_matrix: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    nu12: float = 0.0
    alpha12: float = 0.0
    beta12: float = 0.0
    lambda_matrix: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    Dmat: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m1", "m2", "omega1", "omega2", "hbar"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        for name, shape in (("mu_matrix", (2, 2)), ("lambda_matrix", (2, 2)), ("Dmat", (4, 4))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ConfigurationError(f"{name} must have shape {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        D = self.Dmat
        if np.abs(D - D.T).max() > 1e-14 * max(1.0, np.abs(D).max()):
            raise ConfigurationError("Dmat must be symmetric")
        if not positivity_ok(self):
            raise ConfigurationError("positivity matrix has a negative eigenvalue")

    @classmethod
    def from_vectors(cls, a, b, m1, m2, omega1, omega2, k12=0.0, mu_matrix=None, nu12=0.0, hbar=1.0):
        """Constants from the environment operators ``V_j = a_j . p + b_j . q``.

        ``a`` and ``b`` are complex arrays of shape ``(n_ops, 2)``; column ``k``
        is the vector multiplying ``p_k`` (resp. ``q_k``). The resulting model
        satisfies the positivity conditions by construction.
        """
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        aa = a.conj().T @ a  # aa[k, l] = a_k* . a_l
        bb = b.conj().T @ b
        ab = a.conj().T @ b
        D = np.zeros((4, 4))
        D[:2, :2] = hbar / 2 * aa.real
        D[2:, 2:] = hbar / 2 * bb.real
        D[:2, 2:] = -hbar / 2 * ab.real
        D[2:, :2] = D[:2, 2:].T
        return cls(
            m1=m1,
            m2=m2,
            omega1=omega1,
            omega2=omega2,
            k12=k12,
            mu_matrix=np.zeros((2, 2)) if mu_matrix is None else mu_matrix,
            nu12=nu12,
            alpha12=-aa[0, 1].imag,
            beta12=-bb[0, 1].imag,
            lambda_matrix=-ab.imag,
            Dmat=0.5 * (D + D.T),
            hbar=hbar,
        )

    def replace(self, **changes) -> "TwoOscModel":
        return replace(self, **changes)


@dataclass(frozen=True)
class TwoOscState:
    """Means ``(q1, q2, p1, p2)`` and the symmetric 4x4 covariance."""

    mvec: np.ndarray
    sigma: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.mvec, dtype=float).reshape(4)
        s = np.asarray(self.sigma, dtype=float).reshape(4, 4)
        object.__setattr__(self, "mvec", m)
        object.__setattr__(self, "sigma", 0.5 * (s + s.T))


def drift_matrix(model: TwoOscModel, variant: str = "direct") -> np.ndarray:
    """Drift matrix ``Y``.

    ``variant="transposed"`` swaps ``lam12`` and ``lam21`` (and the ``mu``
    off-diagonals) in the momentum block. It exists only for the
    :func:`drift_variant_gap` diagnostic.
    """
    L, U = model.lambda_matrix, model.mu_matrix
    m1, m2, w1, w2 = model.m1, model.m2, model.omega1, model.omega2
    a, b, k, nu = model.alpha12, model.beta12, model.k12, model.nu12
    if variant == "direct":
        lower = np.array([[-L[0, 0] - U[0, 0], -L[1, 0] - U[1, 0]], [-L[0, 1] - U[0, 1], -L[1, 1] - U[1, 1]]])
    elif variant == "transposed":
        lower = np.array([[-L[0, 0] - U[0, 0], -L[0, 1] - U[0, 1]], [-L[1, 0] - U[1, 0], -L[1, 1] - U[1, 1]]])
    else:
        raise ConfigurationError(f"unknown drift variant {variant!r}")
    return np.array(
        [
            [-L[0, 0] + U[0, 0], -L[0, 1] + U[0, 1], 1 / m1, -a + k],
            [-L[1, 0] + U[1, 0], -L[1, 1] + U[1, 1], a + k, 1 / m2],
            [-m1 * w1**2, b - nu, lower[0, 0], lower[0, 1]],
            [-b - nu, -m2 * w2**2, lower[1, 0], lower[1, 1]],
        ]
    )


def drift_variant_gap(model: TwoOscModel) -> float:
    """Frobenius distance between the direct and transposed drift matrices."""
    return float(np.linalg.norm(drift_matrix(model) - drift_matrix(model, "transposed")))


def diffusion_matrix(model: TwoOscModel) -> np.ndarray:
    return np.array(model.Dmat)


def positivity_matrix(model: TwoOscModel) -> np.ndarray:
    """The Hermitian 4x4 matrix whose positivity constrains the constants."""
    hb = model.hbar
    D, L = model.Dmat, model.lambda_matrix
    Dqq, Dpp, Dqp = D[:2, :2], D[2:, 2:], D[:2, 2:]
    a, b = model.alpha12, model.beta12
    P = np.empty((4, 4), dtype=complex)
    P[:2, :2] = Dqq + 0.5j * hb * a * np.array([[0, -1], [1, 0]])
    P[2:, 2:] = Dpp + 0.5j * hb * b * np.array([[0, -1], [1, 0]])
    P[:2, 2:] = -Dqp - 0.5j * hb * L
    P[2:, :2] = P[:2, 2:].conj().T
    return P


def positivity_ok(model: TwoOscModel, tol: float = 1e-12) -> bool:
    """Whether all eigenvalues (hence all principal minors) are non-negative."""
    P = positivity_matrix(model)
    ev = np.linalg.eigvalsh(P)
    return bool(ev[0] >= -tol * max(1.0, np.abs(ev).max()))


def is_hurwitz(model: TwoOscModel) -> bool:
    return bool(np.max(np.linalg.eigvals(drift_matrix(model)).real) < 0)


def steady_state(model: TwoOscModel) -> np.ndarray:
    """Solve ``Y S + S Y^T = -2 D``.

    Raises
    ------
    NoSteadyStateError
        If ``Y`` has an eigenvalue with non-negative real part.
    """
    if not is_hurwitz(model):
        raise NoSteadyStateError("drift matrix is not Hurwitz")
    Y = drift_matrix(model)
    S = solve_continuous_lyapunov(Y, -2 * diffusion_matrix(model))
    return 0.5 * (S + S.T)


def wigner_kernel(model: TwoOscModel, t: float) -> tuple[np.ndarray, np.ndarray]:
    """``M(t) = expm(t Y)`` and ``Z(t) = int_0^t M D M^T``.

    A block exponential on ``t / 2^k`` with ``||Y|| t / 2^k <= 1``, then
    ``k`` doublings ``Z(2s) = Z(s) + M(s) Z(s) M(s)^T``; the block form
    alone overflows at long horizons through ``expm(-t Y^T)``.
    """
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    Y = drift_matrix(model)
    D = diffusion_matrix(model)
    k = max(0, math.ceil(math.log2(max(np.linalg.norm(Y, 1) * t, 1.0))))
    h = t / 2**k
    big = np.zeros((8, 8))
    big[:4, :4] = Y
    big[:4, 4:] = D
    big[4:, 4:] = -Y.T
    E = expm(big * h)
    M = E[:4, :4]
    Z = E[:4, 4:] @ M.T
    for _ in range(k):
        Z = Z + M @ Z @ M.T
        M = M @ M
    return M, 0.5 * (Z + Z.T)


def propagate(model: TwoOscModel, state0: TwoOscState, t: float, use_steady: bool | None = None) -> TwoOscState:
    """Means and covariance at ``state0.t + t``.

    With a Hurwitz drift the stationary form is used; otherwise, or with
    ``use_steady=False``, the kernel form ``M sigma M^T + 2 Z``.
    """
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    if use_steady is None:
        use_steady = is_hurwitz(model)
    if use_steady:
        S = steady_state(model)
        M = expm(drift_matrix(model) * t)
        sigma = M @ (state0.sigma - S) @ M.T + S
    else:
        M, Z = wigner_kernel(model, t)
        sigma = M @ state0.sigma @ M.T + 2 * Z
    return TwoOscState(M @ state0.mvec, sigma, state0.t + float(t))


def trajectory(model: TwoOscModel, state0: TwoOscState, times) -> np.ndarray:
    """Rows of ``t``, the four means and the ten distinct covariances, as in :data:`COLUMNS`."""
    rows = []
    for t in np.asarray(times, dtype=float):
        st = propagate(model, state0, float(t))
        rows.append([st.t, *st.mvec, *(st.sigma[i, j] for i, j in _PAIRS)])
    return np.array(rows)


# ---------------------------------------------------------------------------
# uncoupled closed forms


def _require_uncoupled(model: TwoOscModel):
    off = (
        model.k12, model.nu12, model.alpha12, model.beta12,
        model.lambda_matrix[0, 1], model.lambda_matrix[1, 0], *model.mu_matrix.ravel(),
    )
    if any(x != 0 for x in off):
        raise ConfigurationError("closed form requires uncoupled oscillators with diagonal friction and mu = 0")


def uncoupled_propagator(model: TwoOscModel, t: float) -> np.ndarray:
    """``M(t)`` for uncoupled oscillators as damped rotations."""
    _require_uncoupled(model)
    M = np.zeros((4, 4))
    for k, (m, w, l) in enumerate(((model.m1, model.omega1, model.lambda_matrix[0, 0]), (model.m2, model.omega2, model.lambda_matrix[1, 1]))):
        e = math.exp(-l * t)
        c, s = math.cos(w * t), math.sin(w * t)
        M[k, k] = e * c
        M[k, k + 2] = e * s / (m * w)
        M[k + 2, k] = -m * w * e * s
        M[k + 2, k + 2] = e * c
    return M


def uncoupled_sigma_q1q2_inf(model: TwoOscModel) -> float:
    _require_uncoupled(model)
    L = model.lambda_matrix[0, 0] + model.lambda_matrix[1, 1]
    w1, w2, m1, m2 = model.omega1, model.omega2, model.m1, model.m2
    D = model.Dmat
    Dq1q2, Dq2p1, Dq1p2, Dp1p2 = D[0, 1], D[1, 2], D[0, 3], D[2, 3]
    den = (L**2 + (w1 + w2) ** 2) * (L**2 + (w1 - w2) ** 2)
    num = (
        L * (L**2 + w1**2 + w2**2) * Dq1q2
        + (L**2 + w1**2 - w2**2) * Dq2p1 / m1
        + (L**2 + w2**2 - w1**2) * Dq1p2 / m2
        + 2 * L * Dp1p2 / (m1 * m2)
    )
    return 2 * num / den


def uncoupled_sigma_q1q2(model: TwoOscModel, sigma0: np.ndarray, t: float, sigma_inf: np.ndarray | None = None) -> float:
    """Four-term trigonometric form of ``sigma_{q1 q2}(t)``."""
    _require_uncoupled(model)
    S = steady_state(model) if sigma_inf is None else sigma_inf
    d = np.asarray(sigma0) - S
    w1, w2, m1, m2 = model.omega1, model.omega2, model.m1, model.m2
    c1, s1, c2, s2 = math.cos(w1 * t), math.sin(w1 * t), math.cos(w2 * t), math.sin(w2 * t)
    e = math.exp(-(model.lambda_matrix[0, 0] + model.lambda_matrix[1, 1]) * t)
    return e * (
        d[0, 1] * c1 * c2
        + d[1, 2] * s1 * c2 / (m1 * w1)
        + d[0, 3] * c1 * s2 / (m2 * w2)
        + d[2, 3] * s1 * s2 / (m1 * m2 * w1 * w2)
    ) + S[0, 1]


# ---------------------------------------------------------------------------
# constructors


def asymmetry_preset(
    B_ZZ: float,
    B_NN: float,
    k_Z: float,
    k_N: float,
    k_ZN: float,
    lam: float,
    hbar: float = 1.0,
    excess: float = 1.0,
) -> TwoOscModel:
    """Charge and neutron asymmetry modes as two coupled oscillators.

    The potential ``k_Z eta_Z^2/2 + k_N eta_N^2/2 - k_ZN eta_Z eta_N``
    gives ``nu12 = -k_ZN``. Each mode gets friction ``lam`` and diffusion
    ``excess`` times the zero-temperature values; there are no bath
    cross-terms.
    """
    if abs(k_ZN) > math.sqrt(k_Z * k_N):
        raise ConfigurationError("|k_ZN| must not exceed sqrt(k_Z k_N)")
    w1, w2 = math.sqrt(k_Z / B_ZZ), math.sqrt(k_N / B_NN)
    c = excess * lam * hbar / 2
    D = np.diag([c / (B_ZZ * w1), c / (B_NN * w2), c * B_ZZ * w1, c * B_NN * w2])
    return TwoOscModel(
        m1=B_ZZ, m2=B_NN, omega1=w1, omega2=w2, nu12=-k_ZN,
        lambda_matrix=np.diag([lam, lam]), Dmat=D, hbar=hbar,
    )


def random_twoosc(rng: np.random.Generator, n_ops: int = 4, coupling: float = 0.3) -> TwoOscModel:
    """Random model built from environment vectors, so positivity holds.

    Hamiltonian couplings are drawn with magnitude ``coupling``. The result
    is not guaranteed Hurwitz; check :func:`is_hurwitz`.
    """
    a = (rng.normal(size=(n_ops, 2)) + 1j * rng.normal(size=(n_ops, 2))) * 0.4
    b = (rng.normal(size=(n_ops, 2)) + 1j * rng.normal(size=(n_ops, 2))) * 0.4
    return TwoOscModel.from_vectors(
        a, b,
        m1=rng.uniform(0.5, 2.0), m2=rng.uniform(0.5, 2.0),
        omega1=rng.uniform(0.5, 2.0), omega2=rng.uniform(0.5, 2.0),
        k12=coupling * rng.uniform(-1, 1),
        mu_matrix=coupling * rng.uniform(-1, 1, size=(2, 2)),
        nu12=coupling * rng.uniform(-1, 1),
    )
