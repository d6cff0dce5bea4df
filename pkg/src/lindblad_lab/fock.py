"""Density matrix in the number basis.

Two independent routes are provided.

Analytic
    The generating function ``G(x, y) = sum x^m y^n rho_mn / sqrt(m! n!)``
    stays of the form

        G = exp{xy - [B (x - C)^2 + D (y - E)^2 + F (x - C)(y - E)] / H} / A

    with ``D = conj(B)``, ``E = conj(C)``, ``F`` real, ``H = |B|^2 - F^2/4``
    and ``A^2 = -H/4``. ``C`` follows the mean amplitude and ``(B, F)`` a
    linear system with exponential solutions; matrix elements are extracted
    with a triple sum evaluated in log space.

Numerical
    A fixed-step RK4 integration of the master equation on a truncated basis,
    either from the commutator form in ``q`` and ``p`` (default) or from the
    element-wise recurrence in the number basis.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from .charfun import _uv
from .errors import ConfigurationError, DegenerateCaseError, TruncationError
from .model import OscillatorModel, Regime, derive
from .moments import MomentState

__all__ = [
    "GenFunInit",
    "GenFunState",
    "FockDensityMatrix",
    "genfun_evolve",
    "genfun_asymptotes",
    "density_from_genfun",
    "density_matrix",
    "genfun_value",
    "oracle_evolve",
    "moments_from_rho",
    "ladder",
    "coherent_state",
    "thermal_state",
    "number_state",
    "glauber_init",
    "thermal_init",
]

DEFAULT_DIM = 40
BOUNDARY_TOL = 1e-10


# ---------------------------------------------------------------------------
# generating function


@dataclass(frozen=True)
class GenFunInit:
    """Initial ``C``, ``B`` and real ``F`` of the generating function."""

    C0: complex = 0j
    B0: complex = 0j
    F0: float = -4.0


def glauber_init(alpha: complex) -> GenFunInit:
    """Coherent state ``|alpha>``: ``B = 0``, ``F = H = -4`` and ``C = conj(alpha)``."""
    return GenFunInit(C0=complex(alpha).conjugate(), B0=0j, F0=-4.0)


def thermal_init(nbar: float, alpha: complex = 0j) -> GenFunInit:
    """Thermal state of mean occupation ``nbar``, displaced by ``alpha``."""
    if nbar < 0:
        raise ConfigurationError("nbar must be non-negative")
    return GenFunInit(C0=complex(alpha).conjugate(), B0=0j, F0=-4.0 * (nbar + 1.0))


@dataclass(frozen=True)
class GenFunState:
    """Coefficients of the Gaussian generating function at time ``t``."""

    A: float
    B: complex
    C: complex
    D: complex
    E: complex
    F: float
    H: float
    t: float

    @classmethod
    def from_BCF(cls, B: complex, C: complex, F: float, t: float = 0.0) -> "GenFunState":
        B, C, F = complex(B), complex(C), float(F)
        H = abs(B) ** 2 - F**2 / 4
        if not H < 0:
            raise DegenerateCaseError(f"gauge requires |B|^2 - F^2/4 < 0, got {H}")
        return cls(A=math.sqrt(-H / 4), B=B, C=C, D=B.conjugate(), E=C.conjugate(), F=F, H=H, t=float(t))


def genfun_asymptotes(model: OscillatorModel) -> tuple[float, float, float]:
    """Stationary ``(R, I, F)`` with ``D = conj(B) = R + iI``."""
    d = derive(model)
    lam, w, mu = model.lam, model.omega, model.mu
    den = lam**2 + w**2 - mu**2  # lam^2 - gamma^2
    if lam <= 0 or den == 0:
        raise DegenerateCaseError("lam > 0 and lam^2 + omega^2 - mu^2 != 0 are required")
    reD1, imD1, D2 = d.D1.real, d.D1.imag, d.D2
    R = (lam * (reD1 - mu) + w * imD1 + mu * (D2 + lam)) / den
    I = (w * lam * (reD1 - mu) + (mu**2 - lam**2) * imD1 + w * mu * (D2 + lam)) / (lam * den)
    F = -2 * (mu * (lam * (reD1 - mu) + w * imD1) + (lam**2 + w**2) * (D2 + lam)) / (lam * den)
    return R, I, F


def genfun_evolve(model: OscillatorModel, init: GenFunInit | Mapping, t: float) -> GenFunState:
    """Evolve the generating-function coefficients from ``init`` to ``t``.

    Raises
    ------
    DegenerateCaseError
        At critical damping, without a stationary point, or when the gauge
        ``|B|^2 - F^2/4 < 0`` fails.
    """
    if isinstance(init, Mapping):
        init = GenFunInit(**init)
    if t < 0:
        raise ConfigurationError("t must be non-negative")
    d = derive(model)
    if d.regime is Regime.CRITICAL:
        raise DegenerateCaseError("critical damping: use oracle_evolve")
    lam, w, mu = model.lam, model.omega, model.mu
    g = d.gamma
    R_inf, I_inf, F_inf = genfun_asymptotes(model)
    D0 = complex(init.B0).conjugate()
    Rt, It, Ft = D0.real - R_inf, D0.imag - I_inf, float(init.F0) - F_inf
    ep, em = cmath.exp(-2 * (lam + g) * t), cmath.exp(-2 * (lam - g) * t)
    el = math.exp(-2 * lam * t)
    X = w * It + mu / 2 * Ft
    R = 0.5 * (ep + em) * Rt + (ep - em) / (2 * g) * X + R_inf
    I = el * mu / g**2 * (mu * It + w / 2 * Ft) - w / (2 * g**2) * (ep + em) * X - w / (2 * g) * (ep - em) * Rt + I_inf
    F = -el * w / g**2 * (2 * mu * It + w * Ft) + mu / g**2 * (ep + em) * X + mu / g * (ep - em) * Rt + F_inf
    u, v = _uv(lam, w, mu, g, t)
    C0 = complex(init.C0)
    C = u * C0 - v.real * C0.conjugate()
    return GenFunState.from_BCF(complex(R.real, -I.real), C, F.real, t)


def genfun_value(state: GenFunState, x, y) -> np.ndarray:
    """Evaluate ``G(x, y)`` for complex arrays ``x``, ``y``."""
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    dx, dy = x - state.C, y - state.E
    expo = x * y - (state.B * dx**2 + state.D * dy**2 + state.F * dx * dy) / state.H
    return np.exp(expo) / state.A


def _log_pow(z: complex, k: np.ndarray):
    """``log|z^k|`` and ``arg(z^k)``; ``-inf`` where ``z = 0`` and ``k > 0``."""
    if z == 0:
        return np.where(k == 0, 0.0, -np.inf), np.zeros_like(k, dtype=float)
    return k * math.log(abs(z)), k * cmath.phase(z)


def density_from_genfun(state: GenFunState, m: int, n: int) -> complex:
    """Matrix element ``rho_mn`` from the closed-form triple sum.

    Terms are accumulated as ``exp(log-magnitude - max) * phase`` so that
    large factorials never form explicitly.
    """
    if m < 0 or n < 0:
        raise ConfigurationError("indices must be non-negative")
    B, C, D, E, F, H, A = state.B, state.C, state.D, state.E, state.F, state.H, state.A
    a, b, c = -B / H, -D / H, 1 - F / H
    p = 2 * B * C / H + F * E / H
    q = 2 * D * E / H + F * C / H
    n3 = np.arange(min(m, n) + 1)
    n1 = np.arange(m // 2 + 1)
    n2 = np.arange(n // 2 + 1)
    N1, N2, N3 = np.meshgrid(n1, n2, n3, indexing="ij")
    km = m - 2 * N1 - N3
    kn = n - 2 * N2 - N3
    ok = (km >= 0) & (kn >= 0)
    N1, N2, N3, km, kn = N1[ok], N2[ok], N3[ok], km[ok], kn[ok]
    logs = -(gammaln(N1 + 1) + gammaln(N2 + 1) + gammaln(N3 + 1) + gammaln(km + 1) + gammaln(kn + 1))
    phase = np.zeros_like(logs)
    for base, k in ((a, N1), (b, N2), (c, N3), (p, km), (q, kn)):
        lm, ph = _log_pow(complex(base), k)
        logs = logs + lm
        phase = phase + ph
    finite = np.isfinite(logs)
    if not np.any(finite):
        return 0j
    logs, phase = logs[finite], phase[finite]
    top = logs.max()
    total = np.sum(np.exp(logs - top) * np.exp(1j * phase))
    pref = 0.5 * (gammaln(m + 1) + gammaln(n + 1)) + top
    expo = -(B * C**2 + D * E**2 + F * C * E) / H
    out = cmath.exp(pref + expo) * total / A
    if not cmath.isfinite(out):
        raise OverflowError(f"rho_{m}{n} overflows; reduce the basis dimension")
    return out


def density_matrix(state: GenFunState, dim: int) -> "FockDensityMatrix":
    rho = np.empty((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(i, dim):
            rho[i, j] = density_from_genfun(state, i, j)
            rho[j, i] = rho[i, j].conjugate()
    return FockDensityMatrix(rho, t=state.t)


# ---------------------------------------------------------------------------
# density matrices


@dataclass
class FockDensityMatrix:
    """Truncated density matrix with bookkeeping for trace and Hermiticity."""

    entries: np.ndarray
    t: float = 0.0
    trace_drift: float = field(default=0.0)
    dt: float | None = None

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ConfigurationError("density matrix must be square")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "dim": self.dim,
            "re": self.entries.real.ravel().tolist(),
            "im": self.entries.imag.ravel().tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FockDensityMatrix":
        d = json.loads(text)
        dim = int(d["dim"])
        re = np.asarray(d["re"], dtype=float).reshape(dim, dim)
        im = np.asarray(d["im"], dtype=float).reshape(dim, dim)
        return cls(re + 1j * im, t=float(d["t"]))


def ladder(dim: int) -> np.ndarray:
    """Annihilation operator on ``dim`` number states."""
    return np.diag(np.sqrt(np.arange(1, dim)), 1)


def number_state(n: int, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return FockDensityMatrix(rho)


def coherent_state(alpha: complex, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    k = np.arange(dim)
    alpha = complex(alpha)
    # log form avoids overflow of alpha^k / sqrt(k!)
    if alpha == 0:
        amp = (k == 0).astype(complex)
    else:
        amp = np.exp(k * cmath.log(alpha) - 0.5 * gammaln(k + 1) - abs(alpha) ** 2 / 2)
    return FockDensityMatrix(np.outer(amp, amp.conj()))


def thermal_state(nbar: float, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    k = np.arange(dim)
    pops = (nbar / (nbar + 1)) ** k / (nbar + 1) if nbar > 0 else (k == 0).astype(float)
    return FockDensityMatrix(np.diag(pops).astype(complex))


def moments_from_rho(rho: FockDensityMatrix, model: OscillatorModel) -> MomentState:
    """Means and variances as traces against ``q``, ``p`` and their squares."""
    dim = rho.dim + 2
    r = np.zeros((dim, dim), dtype=complex)
    r[: rho.dim, : rho.dim] = rho.entries  # padding makes q^2, p^2 exact on the support
    a = ladder(dim)
    ad = a.T
    hb, m, w = model.hbar, model.m, model.omega
    q = math.sqrt(hb / (2 * m * w)) * (a + ad)
    p = 1j * math.sqrt(hb * m * w / 2) * (ad - a)
    tr = lambda op: complex(np.trace(r @ op))  # noqa: E731
    norm = tr(np.eye(dim)).real
    sq, spm = tr(q).real / norm, tr(p).real / norm
    return MomentState(
        sigma_q=sq,
        sigma_p=spm,
        sigma_qq=tr(q @ q).real / norm - sq**2,
        sigma_pp=tr(p @ p).real / norm - spm**2,
        sigma_pq=0.5 * tr(p @ q + q @ p).real / norm - sq * spm,
        t=rho.t,
    )


# ---------------------------------------------------------------------------
# numerical oracle


def _lindblad_generator(model: OscillatorModel, dim: int) -> sp.csr_matrix:
    """Superoperator of the commutator form in ``q`` and ``p`` (column-major vec)."""
    hb, m, w = model.hbar, model.m, model.omega
    a = sp.csr_matrix(ladder(dim))
    ad = a.T.tocsr()
    q = math.sqrt(hb / (2 * m * w)) * (a + ad)
    p = 1j * math.sqrt(hb * m * w / 2) * (ad - a)
    I = sp.identity(dim, format="csr")

    def left(X):
        return sp.kron(I, X)

    def right(X):
        return sp.kron(X.T, I)

    def comm(X):
        return left(X) - right(X)

    def anti(X):
        return left(X) + right(X)

    H0 = p @ p / (2 * m) + m * w**2 / 2 * (q @ q)
    lam, mu = model.lam, model.mu
    L = -1j / hb * comm(H0)
    L = L - 1j / (2 * hb) * (lam + mu) * (comm(q) @ anti(p))
    L = L + 1j / (2 * hb) * (lam - mu) * (comm(p) @ anti(q))
    L = L - model.D_pp / hb**2 * (comm(q) @ comm(q))
    L = L - model.D_qq / hb**2 * (comm(p) @ comm(p))
    L = L + model.D_pq / hb**2 * (comm(q) @ comm(p) + comm(p) @ comm(q))
    return L.tocsr()


def _recurrence_generator(model: OscillatorModel, dim: int) -> sp.csr_matrix:
    """Element-wise number-basis equation, truncated at ``dim``."""
    d = derive(model)
    D1, D2 = d.D1, d.D2
    D1c = D1.conjugate()
    lam, mu, w = model.lam, model.mu, model.omega
    rows, cols, vals = [], [], []

    def idx(i, j):
        return i + dim * j  # column-major vec

    def add(i, j, k, l, c):
        if 0 <= k < dim and 0 <= l < dim and c != 0:
            rows.append(idx(i, j))
            cols.append(idx(k, l))
            vals.append(c)

    s = math.sqrt
    for i in range(dim):
        for j in range(dim):
            add(i, j, i, j, -1j * w * (i - j) + lam - (i + j + 1) * D2)
            add(i, j, i + 1, j - 1, -s((i + 1) * j) * D1c)
            add(i, j, i - 1, j + 1, -s(i * (j + 1)) * D1)
            add(i, j, i, j + 2, 0.5 * s((j + 1) * (j + 2)) * (D1 - mu))
            add(i, j, i + 2, j, 0.5 * s((i + 1) * (i + 2)) * (D1c - mu))
            add(i, j, i - 2, j, 0.5 * s(i * (i - 1)) * (D1 + mu))
            add(i, j, i, j - 2, 0.5 * s(j * (j - 1)) * (D1c + mu))
            add(i, j, i + 1, j + 1, s((i + 1) * (j + 1)) * (D2 + lam))
            add(i, j, i - 1, j - 1, s(i * j) * (D2 - lam))
    n = dim * dim
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def default_step(model: OscillatorModel) -> float:
    """``min(0.002/omega, 0.002/lam)``, further limited by the generator scale."""
    cands = [0.002 / model.omega]
    if model.lam > 0:
        cands.append(0.002 / model.lam)
    return min(cands)


def _rk4_step_matrix(L: sp.csr_matrix, dt: float) -> sp.csr_matrix:
    hL = (dt * L).tocsr()
    hL2 = hL @ hL
    hL3 = hL2 @ hL
    hL4 = hL3 @ hL
    n = L.shape[0]
    return (sp.identity(n, format="csr") + hL + hL2 / 2 + hL3 / 6 + hL4 / 24).tocsr()


def _run(L, rho0, marks, h, dim):
    """Step to each index in ``marks``; ``None`` on boundary leakage."""
    P = _rk4_step_matrix(L, h)
    x = rho0.reshape(-1, order="F").copy()
    edge = [dim - 1 + dim * (dim - 1), dim - 2 + dim * (dim - 2)]
    peak = max(abs(x[edge[0]]), abs(x[edge[1]]))
    snaps = []
    done = 0
    for target in marks:
        for _ in range(target - done):
            x = P @ x
            r = x.reshape(dim, dim, order="F")
            r = 0.5 * (r + r.conj().T)
            x = r.reshape(-1, order="F")
            peak = max(peak, abs(x[edge[0]]), abs(x[edge[1]]))
            if peak > BOUNDARY_TOL:
                return None, peak
        done = target
        snaps.append(x.reshape(dim, dim, order="F").copy())
    return snaps, peak


def oracle_evolve(
    model: OscillatorModel,
    rho0: FockDensityMatrix,
    t,
    dt: float | None = None,
    mode: str = "lindblad",
    max_dim: int = 160,
    auto_expand: bool = True,
):
    """Integrate the master equation on a truncated number basis.

    Parameters
    ----------
    t : float or sequence of float
        End time, or an ascending grid of output times.
    dt : float, optional
        Step size. Defaults to :func:`default_step`; a stability guard caps
        it at ``2 / ||L||_inf`` and it is shrunk so that ``t[-1]`` is a
        whole number of steps. Intermediate times are rounded to the
        nearest step.
    mode : {"lindblad", "recurrence"}
        ``"lindblad"`` builds the generator from commutators of truncated
        ``q`` and ``p`` and conserves the trace exactly. ``"recurrence"``
        uses the element-wise number-basis equation, whose truncation
        leaks trace; the leak is reported in ``trace_drift``.
    auto_expand : bool
        Double the basis (up to ``max_dim``) and restart when the occupancy of
        the two highest levels exceeds ``1e-10``.

    Returns
    -------
    FockDensityMatrix or list of FockDensityMatrix

    Raises
    ------
    TruncationError
        If the boundary occupancy stays above threshold at ``max_dim``.
    """
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ConfigurationError("times must be non-negative and ascending")
    if mode not in ("lindblad", "recurrence"):
        raise ConfigurationError(f"unknown oracle mode {mode!r}")
    dt = default_step(model) if dt is None else float(dt)
    build = _lindblad_generator if mode == "lindblad" else _recurrence_generator
    rho = rho0.entries
    dim = rho0.dim
    while True:
        L = build(model, dim)
        # RK4 is stable for |dt * eig| below about 2.8; stay inside with margin
        norm = float(abs(L).sum(axis=1).max())
        step = min(dt, 2.0 / norm) if norm > 0 else dt
        t_end = float(times[-1])
        n_steps = math.ceil(t_end / step) if t_end > 0 else 0
        h = t_end / n_steps if n_steps else 0.0
        marks = [int(round(tt / h)) if h else 0 for tt in times]
        snaps, peak = _run(L, rho, marks, h, dim)
        if snaps is not None:
            break
        if not auto_expand or 2 * dim > max_dim:
            raise TruncationError(
                f"boundary occupancy {peak:.2e} exceeds {BOUNDARY_TOL:g} at dim={dim}; "
                f"increase the basis beyond {dim}"
            )
        bigger = np.zeros((2 * dim, 2 * dim), dtype=complex)
        bigger[:dim, :dim] = rho
        rho, dim = bigger, 2 * dim
    tr0 = np.trace(rho)
    out = [
        FockDensityMatrix(r, t=rho0.t + k * h, trace_drift=float(abs(np.trace(r) - tr0)), dt=h)
        for r, k in zip(snaps, marks)
    ]
    return out[0] if scalar else out
