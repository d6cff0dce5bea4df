"""Single damped oscillator: parameters, derived coefficients and constraints.

The generator of the dynamics is fixed by seven constants: the mass ``m``,
frequency ``omega``, friction ``lam``, the coupling ``mu`` of the
``(pq + qp)/2`` term of the Hamiltonian, and the diffusion constants
``D_qq``, ``D_pp``, ``D_pq``. Complete positivity requires

    D_pp > 0,  D_qq > 0,  D_pp D_qq - D_pq**2 >= (lam * hbar / 2)**2.
"""
from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "OscillatorModel",
    "DerivedCoefficients",
    "ConstraintReport",
    "Regime",
    "Classification",
    "ZooEntry",
    "derive",
    "validate",
    "model_zoo",
    "thermal_model",
    "minimal_diffusion_model",
    "random_model",
]

#: Relative tolerance separating critical damping from the other regimes.
REGIME_TOL = 1e-12
#: Relative slack applied to the constraint inequalities.
CONSTRAINT_SLACK = 1e-12

_JSON_FIELDS = ("m", "omega", "lambda", "mu", "D_qq", "D_pp", "D_pq", "hbar")


class Regime(str, enum.Enum):
    OVERDAMPED = "Overdamped"
    UNDERDAMPED = "Underdamped"
    CRITICAL = "Critical"


class Classification(str, enum.Enum):
    LINDBLAD_VALID = "LindbladValid"
    #: lam == mu (translation invariant) but the constraints fail.
    UNCERTAINTY_VIOLATION = "ValidatesUncertaintyViolation"
    #: lam != mu and the constraints fail.
    OUTSIDE_LINDBLAD = "OutsideLindblad"


@dataclass(frozen=True)
class OscillatorModel:
    """Constants of the damped oscillator master equation.

    Parameters
    ----------
    m, omega : float
        Mass and angular frequency, both positive.
    lam : float
        Friction constant, ``lam >= 0``. Serialized as ``"lambda"``.
    mu : float
        Coefficient of ``(pq + qp)/2`` in the Hamiltonian.
    D_qq, D_pp, D_pq : float
        Diffusion constants.
    hbar : float, optional
        Action unit, default 1.
    """

    m: float
    omega: float
    lam: float
    mu: float
    D_qq: float
    D_pp: float
    D_pq: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega", "lam", "mu", "D_qq", "D_pp", "D_pq", "hbar"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
                raise ConfigurationError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.m <= 0 or self.omega <= 0 or self.hbar <= 0:
            raise ConfigurationError("m, omega and hbar must be positive")
        if self.lam < 0:
            raise ConfigurationError("lam must be non-negative")

    # serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return {k: d[k] for k in _JSON_FIELDS}

    @classmethod
    def from_dict(cls, data: Mapping) -> "OscillatorModel":
        unknown = set(data) - set(_JSON_FIELDS)
        if unknown:
            raise ConfigurationError(f"unknown model keys: {sorted(unknown)}")
        missing = set(_JSON_FIELDS) - {"hbar"} - set(data)
        if missing:
            raise ConfigurationError(f"missing model keys: {sorted(missing)}")
        kwargs = {k: v for k, v in data.items() if k != "lambda"}
        return cls(lam=data["lambda"], **kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "OscillatorModel":
        return cls.from_dict(json.loads(text))

    def replace(self, **changes) -> "OscillatorModel":
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedCoefficients:
    """Dependent coefficients of the number-representation form.

    ``gamma`` is ``sqrt(mu**2 - omega**2)`` as a complex number (purely
    imaginary when underdamped); ``mu_plus`` and ``mu_minus`` are
    ``lam +/- gamma`` and are complex in the underdamped regime. ``nu`` is
    the real hyperbolic rate (NaN unless overdamped) and ``Omega`` the real
    oscillation frequency (NaN unless underdamped).
    """

    D1: complex
    D2: float
    nu: float
    Omega: float
    mu_plus: complex
    mu_minus: complex
    gamma: complex
    regime: Regime


@dataclass(frozen=True)
class ConstraintReport:
    d_pp_positive: bool
    d_qq_positive: bool
    schwartz_ok: bool
    translation_invariant: bool
    classification: Classification


def regime_of(mu: float, omega: float) -> Regime:
    """Damping regime from the sign of ``mu**2 - omega**2``."""
    if abs(abs(mu) - omega) <= REGIME_TOL * max(abs(mu), omega):
        return Regime.CRITICAL
    return Regime.OVERDAMPED if abs(mu) > omega else Regime.UNDERDAMPED


def derive(model: OscillatorModel) -> DerivedCoefficients:
    """Compute ``D1``, ``D2``, the damping regime and the eigenvalues ``lam +/- gamma``."""
    m, w, hbar = model.m, model.omega, model.hbar
    D1 = complex(m * w * model.D_qq - model.D_pp / (m * w), 2.0 * model.D_pq) / hbar
    D2 = (m * w * model.D_qq + model.D_pp / (m * w)) / hbar
    regime = regime_of(model.mu, w)
    gamma = cmath.sqrt(model.mu**2 - w**2)
    if regime is Regime.CRITICAL:
        gamma = 0j
    nu = math.sqrt(model.mu**2 - w**2) if regime is Regime.OVERDAMPED else math.nan
    Omega = math.sqrt(w**2 - model.mu**2) if regime is Regime.UNDERDAMPED else math.nan
    return DerivedCoefficients(
        D1=D1,
        D2=D2,
        nu=nu,
        Omega=Omega,
        mu_plus=model.lam + gamma,
        mu_minus=model.lam - gamma,
        gamma=gamma,
        regime=regime,
    )


def validate(model: OscillatorModel) -> ConstraintReport:
    """Check the positivity constraints and classify the model."""
    bound = (model.lam * model.hbar) ** 2 / 4.0
    det = model.D_pp * model.D_qq - model.D_pq**2
    scale = max(abs(model.D_pp * model.D_qq), model.D_pq**2, bound)
    schwartz = det - bound >= -CONSTRAINT_SLACK * scale
    pp = model.D_pp > 0
    qq = model.D_qq > 0
    ti = abs(model.lam - model.mu) <= CONSTRAINT_SLACK * max(abs(model.lam), abs(model.mu))
    if pp and qq and schwartz:
        cls = Classification.LINDBLAD_VALID
    elif ti:
        cls = Classification.UNCERTAINTY_VIOLATION
    else:
        cls = Classification.OUTSIDE_LINDBLAD
    return ConstraintReport(pp, qq, schwartz, ti, cls)


# ---------------------------------------------------------------------------
# commonly used parameterizations


def thermal_model(m: float, omega: float, lam: float, mu: float, kT: float, hbar: float = 1.0) -> OscillatorModel:
    """Diffusion constants whose stationary state is the Gibbs state at ``kT``.

    ``D_pp = (lam + mu) hbar m omega coth(x) / 2``,
    ``D_qq = (lam - mu) hbar coth(x) / (2 m omega)``, ``D_pq = 0`` with
    ``x = hbar omega / (2 kT)``.
    """
    c = 1.0 / math.tanh(hbar * omega / (2.0 * kT))
    return OscillatorModel(
        m=m,
        omega=omega,
        lam=lam,
        mu=mu,
        D_qq=(lam - mu) * hbar * c / (2.0 * m * omega),
        D_pp=(lam + mu) * hbar * m * omega * c / 2.0,
        D_pq=0.0,
        hbar=hbar,
    )


def minimal_diffusion_model(m: float, omega: float, lam: float, hbar: float = 1.0) -> OscillatorModel:
    """Zero-temperature bath: ``mu = 0`` and the constraint saturated.

    Here ``D1 = 0`` and ``D2 = lam``, so coherent states stay coherent.
    """
    return OscillatorModel(
        m=m,
        omega=omega,
        lam=lam,
        mu=0.0,
        D_qq=lam * hbar / (2.0 * m * omega),
        D_pp=lam * hbar * m * omega / 2.0,
        D_pq=0.0,
        hbar=hbar,
    )


def random_model(
    rng: np.random.Generator,
    regime: str | Regime | None = None,
    hbar: float = 1.0,
    excess: tuple[float, float] = (1.0, 2.5),
) -> OscillatorModel:
    """Draw a Lindblad-valid model with a stationary state.

    Parameters
    ----------
    rng : numpy.random.Generator
    regime : {"Overdamped", "Underdamped", None}
        ``None`` picks one at random.
    excess : (float, float)
        Range of the factors by which ``D_qq`` and ``D_pp`` exceed the
        zero-temperature values ``lam hbar/(2 m omega)`` and ``lam hbar m omega/2``.
    """
    if regime is None:
        regime = Regime.OVERDAMPED if rng.random() < 0.5 else Regime.UNDERDAMPED
    regime = Regime(regime)
    m = rng.uniform(0.5, 2.0)
    omega = rng.uniform(0.5, 2.0)
    if regime is Regime.OVERDAMPED:
        mu = omega * rng.uniform(1.1, 2.0)
        nu = math.sqrt(mu**2 - omega**2)
        lam = nu * rng.uniform(1.2, 2.0) + 0.05
    else:
        mu = omega * rng.uniform(-0.9, 0.9)
        lam = rng.uniform(0.1, 1.0)
    c1, c2 = rng.uniform(*excess, size=2)
    D_qq = c1 * lam * hbar / (2 * m * omega)
    D_pp = c2 * lam * hbar * m * omega / 2
    room = D_qq * D_pp - (lam * hbar) ** 2 / 4
    D_pq = rng.uniform(-0.9, 0.9) * math.sqrt(max(room, 0.0))
    return OscillatorModel(m, omega, lam, mu, D_qq, D_pp, D_pq, hbar)


# ---------------------------------------------------------------------------
# literature parameterizations


@dataclass(frozen=True)
class ZooEntry:
    """A literature parameterization with free magnitudes.

    ``build`` maps the names in ``parameters`` (plus ``m``, ``omega`` and
    optionally ``hbar``) to an :class:`OscillatorModel`. ``expected`` is the
    classification the parameterization must receive; ``None`` means no
    verdict exists for it in the literature and it is not asserted.
    """

    name: str
    parameters: tuple[str, ...]
    build: Callable[..., OscillatorModel] = field(repr=False)
    expected: Classification | None
    note: str = ""

    def resolve(self, **values) -> OscillatorModel:
        need = set(self.parameters) | {"m", "omega"}
        missing = need - set(values)
        if missing:
            raise ConfigurationError(f"{self.name}: unresolved placeholders {sorted(missing)}")
        extra = set(values) - need - {"hbar"}
        if extra:
            raise ConfigurationError(f"{self.name}: unknown placeholders {sorted(extra)}")
        return self.build(**values)


def _dekker(m, omega, gamma, D_qq, D_pp, D_pq, hbar=1.0):
    return OscillatorModel(m, omega, gamma, gamma, D_qq, D_pp, D_pq, hbar)


def _hofmann(m, omega, gamma_omega, T_star, hbar=1.0):
    rate = gamma_omega / (2 * m)
    return OscillatorModel(m, omega, rate, rate, 0.0, gamma_omega * T_star, 0.0, hbar)


def _hasse(m, omega, gamma, D, d, hbar=1.0):
    return OscillatorModel(m, omega, gamma / 2, gamma / 2, 0.0, D, -d / 2, hbar)


def _spina_i(m, omega, Gamma, D, B, hbar=1.0):
    return OscillatorModel(m, omega, Gamma / 2, Gamma / 2, 0.0, D / 2, B / 2, hbar)


def _spina_ii(m, omega, Gamma, D_p, D_R, hbar=1.0):
    return OscillatorModel(m, omega, Gamma, 0.0, D_R / 2, D_p / 2, 0.0, hbar)


def _from_D1_D2(m, omega, lam, mu, D1: complex, D2: float, hbar):
    # invert D1 = (m w Dqq - Dpp/(m w) + 2i Dpq)/hbar, D2 = (m w Dqq + Dpp/(m w))/hbar
    D_qq = hbar * (D2 + D1.real) / (2 * m * omega)
    D_pp = hbar * m * omega * (D2 - D1.real) / 2
    D_pq = hbar * D1.imag / 2
    return OscillatorModel(m, omega, lam, mu, D_qq, D_pp, D_pq, hbar)


def _squeezed(m, omega, gamma, N, M, hbar=1.0):
    return _from_D1_D2(m, omega, gamma, 0.0, 2 * gamma * complex(M), gamma * (2 * N + 1), hbar)


def _harmonic_env(m, omega, gamma, n_mean, hbar=1.0):
    D_pp = 2 * gamma * (n_mean + 0.5) * m * omega * hbar
    return OscillatorModel(m, omega, gamma, gamma, 0.0, D_pp, 0.0, hbar)


def _laser(m, omega, Lambda1, Lambda2, Lambda3, Lambda4, hbar=1.0):
    L1, L2, L3, L4 = (complex(x) for x in (Lambda1, Lambda2, Lambda3, Lambda4))
    mu = L4 - L3
    D1 = L4 + L3
    D2 = L2 + L1
    lam_iw = L2 - L1
    tol = 1e-12 * max(1.0, abs(L1), abs(L2), abs(L3), abs(L4))
    if abs(mu.imag) > tol or abs(D2.imag) > tol:
        raise ConfigurationError("laser coefficients must give real mu and D2")
    if abs(lam_iw.imag - omega) > tol * max(1.0, omega):
        raise ConfigurationError("Lambda2 - Lambda1 must equal lam + i*omega")
    return _from_D1_D2(m, omega, lam_iw.real, mu.real, D1, D2.real, hbar)


def _jy_i(m, omega, Gamma, n_mean, hbar=1.0):
    D_qq = (2 * n_mean + 1) * Gamma * hbar / (4 * m * omega)
    return OscillatorModel(m, omega, Gamma / 2, 0.0, D_qq, (m * omega) ** 2 * D_qq, 0.0, hbar)


def _jy_ii(m, omega, Gamma, n_mean, hbar=1.0):
    D_pp = hbar * m * omega * (2 * n_mean + 1) * Gamma / 2
    return OscillatorModel(m, omega, Gamma / 2, Gamma / 2, 0.0, D_pp, 0.0, hbar)


_V = Classification.LINDBLAD_VALID
_U = Classification.UNCERTAINTY_VIOLATION


def model_zoo() -> Sequence[ZooEntry]:
    """Return the literature parameterizations with their expected verdicts.

    Each entry is a template; call :meth:`ZooEntry.resolve` with magnitudes
    for its placeholders. Entries expected to be valid are valid only when
    the caller's magnitudes satisfy the stated side condition.
    """
    return (
        ZooEntry("dekker", ("gamma", "D_qq", "D_pp", "D_pq"), _dekker, _V,
                 "lam = mu = gamma; diffusion must satisfy the constraints"),
        ZooEntry("hofmann", ("gamma_omega", "T_star"), _hofmann, _U,
                 "lam = mu = gamma(omega)/2m, D_qq = D_pq = 0, D_pp = gamma T*"),
        ZooEntry("hasse", ("gamma", "D", "d"), _hasse, _U,
                 "lam = mu = gamma/2, D_pp = D, D_qq = 0, D_pq = -d/2"),
        ZooEntry("spina_weidenmuller_i", ("Gamma", "D", "B"), _spina_i, _U,
                 "lam = mu = Gamma/2, D_pp = D/2, D_qq = 0, D_pq = B/2"),
        ZooEntry("spina_weidenmuller_ii", ("Gamma", "D_p", "D_R"), _spina_ii, _V,
                 "lam = Gamma, mu = 0; valid when D_p D_R >= (Gamma hbar)^2"),
        ZooEntry("squeezed_bath", ("gamma", "N", "M"), _squeezed, _V,
                 "mu = 0, lam = gamma, D1 = 2 gamma M, D2 = gamma (2N + 1); valid when |M|^2 <= N(N + 1)"),
        ZooEntry("harmonic_environment", ("gamma", "n_mean"), _harmonic_env, _U,
                 "lam = mu = gamma, D_qq = D_pq = 0, D_pp = 2 gamma (n + 1/2) m omega hbar"),
        ZooEntry("correlated_emission_laser", ("Lambda1", "Lambda2", "Lambda3", "Lambda4"), _laser, None,
                 "D1 + mu = 2 L4, D1 - mu = 2 L3, D2 + lam + i omega = 2 L2, D2 - lam - i omega = 2 L1"),
        ZooEntry("jang_yannouleas_i", ("Gamma", "n_mean"), _jy_i, _V,
                 "D_pp = (m omega)^2 D_qq, D_pq = mu = 0, 4 m omega D_qq / hbar = (2n + 1) Gamma, lam = Gamma/2"),
        ZooEntry("jang_yannouleas_ii", ("Gamma", "n_mean"), _jy_ii, _U,
                 "D_qq = D_pq = 0, D_pp = hbar m omega (2n + 1) Gamma / 2, lam = mu = Gamma/2"),
    )


def zoo_entry(name: str) -> ZooEntry:
    for entry in model_zoo():
        if entry.name == name:
            return entry
    raise ConfigurationError(f"no zoo entry named {name!r}")
