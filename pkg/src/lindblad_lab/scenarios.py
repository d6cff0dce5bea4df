"""Scenario configs, presets, runners and cross-checks behind the command line.

A scenario is a JSON object naming a module, its model, an initial state
and a time grid. :func:`run_scenario` turns it into named :class:`Table`
artifacts; :func:`verify_scenario` runs one of the paired analytic/oracle
checks in :data:`CHECKS` and returns a machine-readable report.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import jsonschema
import numpy as np
from scipy.integrate import solve_ivp

from . import angmom, charfun, fock, moments, optics, quasiprob, tunnel, twoosc, wigner
from .errors import ConfigurationError
from .model import Classification, OscillatorModel, minimal_diffusion_model, random_model, thermal_model, validate

__all__ = [
    "MODULES",
    "PRESETS",
    "CHECKS",
    "SCHEMA",
    "Table",
    "RunResult",
    "SchemaError",
    "load_preset",
    "resolve",
    "time_grid",
    "run_scenario",
    "verify_scenario",
    "check_moments_vs_ode",
    "check_genfun_vs_oracle",
    "check_quasiprob_relations",
]

MODULES = ("moments", "quasiprob", "wigner", "fock", "twoosc", "angmom", "tunnel", "optics")
PRESETS = (
    "charge-equilibration-FeBi",
    "thermal-relaxation",
    "gamow-limit",
    "verify-moments-vs-ode",
    "verify-genfun-vs-oracle",
    "verify-quasiprob-relations",
)


class SchemaError(ConfigurationError):
    """Config rejected by the schema or by a module's input parser."""


# ---------------------------------------------------------------------------
# schema

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_complex = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["name"],
    "anyOf": [{"required": ["module"]}, {"required": ["check"]}],
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "preset": {"enum": list(PRESETS)},
        "module": {"enum": list(MODULES)},
        "method": {"type": "string"},
        "check": {"type": "string"},
        "case": {"enum": [1, 2, 3]},
        "model": {"type": "object"},
        "elements": {"type": "object"},
        "initial": {"type": "object"},
        "time_grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_max", "n_points"],
            "properties": {
                "t_min": {"type": "number", "minimum": 0},
                "t_max": {"type": "number", "minimum": 0},
                "n_points": {"type": "integer", "minimum": 1},
                "spacing": {"enum": ["linear", "log"]},
            },
        },
        "outputs": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
        "seed": {"type": "integer", "minimum": 0},
        "options": {"type": "object"},
    },
}

_OSC_MODEL = {
    "type": "object",
    "oneOf": [
        {
            "additionalProperties": False,
            "required": ["m", "omega", "lambda", "mu", "D_qq", "D_pp", "D_pq"],
            "properties": {k: _num for k in ("m", "omega", "lambda", "mu", "D_qq", "D_pp", "D_pq", "hbar")},
        },
        {
            "additionalProperties": False,
            "required": ["thermal"],
            "properties": {
                "thermal": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["m", "omega", "lambda", "mu", "kT"],
                    "properties": {k: _num for k in ("m", "omega", "lambda", "mu", "kT", "hbar")},
                }
            },
        },
        {
            "additionalProperties": False,
            "required": ["minimal"],
            "properties": {
                "minimal": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["m", "omega", "lambda"],
                    "properties": {k: _num for k in ("m", "omega", "lambda", "hbar")},
                }
            },
        },
        {
            "additionalProperties": False,
            "required": ["random"],
            "properties": {
                "random": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "regime": {"enum": ["Overdamped", "Underdamped"]},
                        "excess": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
                        "hbar": _pos,
                    },
                }
            },
        },
    ],
}

_OSC_INITIAL = {
    "type": "object",
    "oneOf": [
        {
            "additionalProperties": False,
            "required": ["coherent"],
            "properties": {"coherent": _complex, "nbar": {"type": "number", "minimum": 0}},
        },
        {
            "additionalProperties": False,
            "required": ["mean", "var"],
            "properties": {
                "mean": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                "var": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
            },
        },
    ],
}


def _validate(instance, schema, where: str):
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{where}{'/' + path if path else ''}: {exc.message}") from None


# ---------------------------------------------------------------------------
# presets and config resolution


def load_preset(name: str) -> dict:
    """Packaged config of a named preset."""
    if name not in PRESETS:
        raise SchemaError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files(__package__).joinpath("presets", f"{name}.json").read_text()
    return json.loads(text)


def resolve(config: dict) -> dict:
    """Merge a config onto its preset (top-level keys override) and validate it."""
    if not isinstance(config, dict):
        raise SchemaError("config must be a JSON object")
    cfg = copy.deepcopy(config)
    if "preset" in cfg:
        _validate({"preset": cfg["preset"]}, {"properties": SCHEMA["properties"]}, "config")
        base = load_preset(cfg["preset"])
        base.update({k: v for k, v in cfg.items() if k != "preset"})
        cfg = base
    _validate(cfg, SCHEMA, "config")
    tg = cfg.get("time_grid")
    if tg is not None:
        time_grid(tg)
    return cfg


def time_grid(spec: dict) -> np.ndarray:
    """Ascending, nonempty time grid from ``{t_min, t_max, n_points, spacing}``."""
    n = int(spec["n_points"])
    t_max = float(spec["t_max"])
    spacing = spec.get("spacing", "linear")
    if spacing == "log":
        t_min = float(spec.get("t_min", t_max * 1e-3))
        if t_min <= 0:
            raise SchemaError("log spacing needs t_min > 0")
        grid = np.geomspace(t_min, t_max, n) if n > 1 else np.array([t_max])
    else:
        t_min = float(spec.get("t_min", 0.0))
        grid = np.linspace(t_min, t_max, n) if n > 1 else np.array([t_max])
    if n > 1 and not t_max > t_min:
        raise SchemaError("time grid must be ascending (t_max > t_min)")
    return grid


# ---------------------------------------------------------------------------
# artifacts


@dataclass
class Table:
    """Column-named rows; ``header`` holds scalar metadata written alongside.

    ``allow_nonfinite`` marks tables where NaN flags a documented singular
    point rather than a numerical failure.
    """

    columns: tuple[str, ...]
    rows: np.ndarray
    header: dict = field(default_factory=dict)
    allow_nonfinite: bool = False


@dataclass
class RunResult:
    name: str
    artifacts: dict[str, Table]
    violations: list[str]


def _table(columns, rows, **kw) -> Table:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    return Table(tuple(columns), rows, **kw)


# ---------------------------------------------------------------------------
# model parsing


def _osc_model(spec: dict, rng: np.random.Generator) -> OscillatorModel:
    _validate(spec, _OSC_MODEL, "model")
    if "thermal" in spec:
        p = dict(spec["thermal"])
        return thermal_model(p["m"], p["omega"], p["lambda"], p["mu"], p["kT"], p.get("hbar", 1.0))
    if "minimal" in spec:
        p = spec["minimal"]
        return minimal_diffusion_model(p["m"], p["omega"], p["lambda"], p.get("hbar", 1.0))
    if "random" in spec:
        p = spec["random"]
        return random_model(rng, p.get("regime"), p.get("hbar", 1.0), tuple(p.get("excess", (1.0, 2.5))))
    return OscillatorModel.from_dict(spec)


def _osc_violations(model: OscillatorModel) -> list[str]:
    if model.lam == 0 and model.D_qq == model.D_pp == model.D_pq == 0:
        return []  # closed dynamics
    rep = validate(model)
    if rep.classification is Classification.LINDBLAD_VALID:
        return []
    return [f"oscillator model is {rep.classification.value}"]


def _coherent_mean_var(model: OscillatorModel, alpha: complex):
    w = wigner.coherent_wigner(model, alpha)
    return w.mean, w.cov


def _osc_initial(model: OscillatorModel, spec: dict | None):
    spec = {"coherent": [0.0, 0.0]} if spec is None else spec
    _validate(spec, _OSC_INITIAL, "initial")
    if "coherent" in spec:
        alpha = complex(*spec["coherent"])
        mean, var = _coherent_mean_var(model, alpha)
        nbar = float(spec.get("nbar", 0.0))
        var = tuple(v * (1 + 2 * nbar) for v in var)
        return alpha, nbar, mean, var
    return None, None, tuple(spec["mean"]), tuple(spec["var"])


def _options(cfg: dict, schema_props: dict) -> dict:
    opts = cfg.get("options", {})
    _validate(opts, {"type": "object", "additionalProperties": False, "properties": schema_props}, "options")
    return opts


def _want(cfg: dict, default: tuple[str, ...], known: tuple[str, ...]) -> tuple[str, ...]:
    outs = tuple(cfg.get("outputs", default))
    bad = [o for o in outs if o not in known]
    if bad:
        raise SchemaError(f"unknown outputs {bad} for module {cfg['module']!r}; known: {list(known)}")
    return outs


# ---------------------------------------------------------------------------
# module runners

_MOMENT_COLUMNS = ("t", "sigma_q", "sigma_p", "sigma_qq", "sigma_pp", "sigma_pq", "uncertainty_product")


def _run_moments(cfg, rng):
    model = _osc_model(cfg["model"], rng)
    opts = _options(cfg, {"dim": {"type": "integer", "minimum": 2}})
    method = cfg.get("method", "closed-form")
    alpha, nbar, mean, var = _osc_initial(model, cfg.get("initial"))
    ts = time_grid(cfg.get("time_grid", {"t_max": 10.0, "n_points": 101}))
    outs = _want(cfg, ("timeseries", "asymptotes"), ("timeseries", "asymptotes"))
    if method == "closed-form":
        states = moments.trajectory(model, mean, var, ts)
    elif method in ("charfun", "fock-oracle"):
        if alpha is None or nbar:
            raise SchemaError(f"method {method!r} needs a pure coherent initial state")
        if method == "charfun":
            states = [charfun.coherent_moments(model, alpha, t) for t in ts]
        else:
            rho0 = fock.coherent_state(alpha, opts.get("dim", fock.DEFAULT_DIM))
            snaps = fock.oracle_evolve(model, rho0, ts)
            states = [fock.moments_from_rho(s, model) for s in snaps]
            states = [moments.MomentState(*s.as_array(), t=t) for s, t in zip(states, ts)]
    else:
        raise SchemaError(f"unknown moments method {method!r}")
    arts = {}
    if "timeseries" in outs:
        rows = [(s.t, *s.as_array(), s.uncertainty_product) for s in states]
        arts["timeseries"] = _table(_MOMENT_COLUMNS, rows, header={"method": method})
    if "asymptotes" in outs and moments.steady_state_exists(model):
        sqq, spp, spq = moments.asymptotic_variances(model)
        arts["asymptotes"] = _table(
            ("sigma_qq_inf", "sigma_pp_inf", "sigma_pq_inf", "energy_inf"),
            [(sqq, spp, spq, moments.asymptotic_energy(model))],
        )
    return arts, _osc_violations(model)


def _run_quasiprob(cfg, rng):
    model = _osc_model(cfg["model"], rng)
    _, _, _, var = _osc_initial(model, cfg.get("initial"))
    outs = _want(cfg, ("steady_covariances", "physical_variances"), ("steady_covariances", "physical_variances"))
    arts = {}
    if "steady_covariances" in outs:
        rows, rep = [], {}
        for s in (1, 0, -1):
            ss = quasiprob.steady_state(model, s)
            c = ss.covariance
            rows.append((s, c[0, 0], c[1, 1], c[0, 1]))
            rep[quasiprob.ORDERINGS[s]] = ss.representable
        arts["steady_covariances"] = _table(("s", "sigma11", "sigma22", "sigma12"), rows, header={"representable": rep})
    if "physical_variances" in outs:
        ts = time_grid(cfg.get("time_grid", {"t_max": 10.0, "n_points": 101}))
        rows = []
        for s in (1, 0, -1):
            sig0 = quasiprob.from_physical(model, var, s)
            for t in ts:
                rows.append((t, s, *quasiprob.to_physical(model, quasiprob.variance_flow(model, s, sig0, t), s)))
        arts["physical_variances"] = _table(("t", "s", "sigma_qq", "sigma_pp", "sigma_pq"), rows)
    return arts, _osc_violations(model)


def _run_wigner(cfg, rng):
    model = _osc_model(cfg["model"], rng)
    opts = _options(cfg, {"grid_points": {"type": "integer", "minimum": 2}, "extent": _pos})
    _, _, mean, var = _osc_initial(model, cfg.get("initial"))
    ts = time_grid(cfg.get("time_grid", {"t_max": 1.0, "n_points": 1}))
    outs = _want(cfg, ("wigner_grid", "marginals"), ("wigner_grid", "marginals"))
    w = wigner.evolve(model, wigner.WignerGaussian(tuple(mean), tuple(var)), float(ts[-1]))
    n = opts.get("grid_points", 513)
    ext = opts.get("extent", 6.0)
    sd = np.sqrt(np.asarray(w.cov[:2]))
    x = w.mean[0] + ext * sd[0] * np.linspace(-1, 1, n)
    y = w.mean[1] + ext * sd[1] * np.linspace(-1, 1, n)
    header = {"t": w.t, "mean": list(w.mean), "cov": list(w.cov)}
    arts = {}
    if "wigner_grid" in outs:
        X, Y = np.meshgrid(x, y, indexing="ij")
        f = w.density(X, Y)
        arts["wigner_grid"] = _table(("x", "y", "f"), np.column_stack([X.ravel(), Y.ravel(), f.ravel()]), header=header)
    if "marginals" in outs:
        gq, gp = wigner.marginals(w)
        arts["marginals"] = _table(("q", "P_q", "p", "P_p"), np.column_stack([x, gq.pdf(x), y, gp.pdf(y)]), header=header)
    return arts, _osc_violations(model)


def _run_fock(cfg, rng):
    model = _osc_model(cfg["model"], rng)
    opts = _options(cfg, {"dim": {"type": "integer", "minimum": 2}, "max_dim": {"type": "integer", "minimum": 2}})
    method = cfg.get("method", "genfun")
    init_spec = cfg.get("initial", {"coherent": [0.0, 0.0]})
    if "coherent" not in init_spec:
        raise SchemaError("fock scenarios need an initial {coherent, nbar} state")
    alpha, nbar, _, _ = _osc_initial(model, init_spec)
    init = fock.thermal_init(nbar, alpha) if nbar else fock.glauber_init(alpha)
    ts = time_grid(cfg.get("time_grid", {"t_max": 10.0, "n_points": 11}))
    dim = opts.get("dim", fock.DEFAULT_DIM)
    outs = _want(cfg, ("populations", "density_matrix"), ("populations", "density_matrix", "stationary"))
    if method == "genfun":
        snaps = [fock.density_matrix(fock.genfun_evolve(model, init, t), dim) for t in ts]
        snaps = [fock.FockDensityMatrix(s.entries, t=float(t)) for s, t in zip(snaps, ts)]
    elif method == "oracle":
        rho0 = fock.density_matrix(fock.genfun_evolve(model, init, 0.0), dim)
        snaps = fock.oracle_evolve(model, rho0, ts, max_dim=opts.get("max_dim", 160))
    else:
        raise SchemaError(f"unknown fock method {method!r}")
    arts = {}
    if "populations" in outs:
        rows = [(s.t, n, p) for s in snaps for n, p in enumerate(s.populations)]
        arts["populations"] = _table(("t", "n", "population"), rows, header={"method": method})
    if "density_matrix" in outs:
        last = snaps[-1]
        d = last.to_dict()
        n = last.dim
        rows = [(m, k, d["re"][m * n + k], d["im"][m * n + k]) for m in range(n) for k in range(n)]
        arts["density_matrix"] = _table(("m", "n", "re", "im"), rows, header={"t": last.t, "dim": n})
    if "stationary" in outs:
        spec = cfg["model"].get("thermal")
        if spec is None:
            raise SchemaError("the stationary output needs a thermal model")
        e = math.exp(-model.hbar * model.omega / spec["kT"])
        pops = snaps[-1].populations
        ns = np.arange(len(pops))
        be = (1 - e) * e**ns
        arts["stationary"] = _table(
            ("n", "population", "bose_einstein", "abs_deviation"),
            np.column_stack([ns, pops, be, np.abs(pops - be)]),
            header={"t": snaps[-1].t, "max_abs_deviation_n_le_20": float(np.max(np.abs(pops - be)[:21]))},
        )
    return arts, _osc_violations(model)


def _twoosc_model(spec: dict) -> twoosc.TwoOscModel:
    if "asymmetry" in spec:
        p = spec["asymmetry"]
        try:
            return twoosc.asymmetry_preset(**p)
        except TypeError as exc:
            raise SchemaError(f"model/asymmetry: {exc}") from None
    fields = {"m1", "m2", "omega1", "omega2", "k12", "mu_matrix", "nu12", "alpha12", "beta12", "lambda_matrix", "Dmat", "hbar"}
    unknown = set(spec) - fields
    if unknown:
        raise SchemaError(f"unknown twoosc model keys: {sorted(unknown)}")
    kw = {k: (np.asarray(v, dtype=float) if k in ("mu_matrix", "lambda_matrix", "Dmat") else v) for k, v in spec.items()}
    try:
        return twoosc.TwoOscModel(**kw)
    except TypeError as exc:
        raise SchemaError(f"model: {exc}") from None


def _run_twoosc(cfg, rng):
    model = _twoosc_model(cfg["model"])
    init = cfg.get("initial", {})
    hb = model.hbar
    vac = np.diag([hb / (2 * model.m1 * model.omega1), hb / (2 * model.m2 * model.omega2),
                   hb * model.m1 * model.omega1 / 2, hb * model.m2 * model.omega2 / 2])
    state0 = twoosc.TwoOscState(init.get("mean", np.zeros(4)), init.get("sigma", vac))
    ts = time_grid(cfg.get("time_grid", {"t_max": 10.0, "n_points": 101}))
    outs = _want(cfg, ("trajectory", "steady"), ("trajectory", "steady"))
    arts = {}
    if "trajectory" in outs:
        arts["trajectory"] = _table(twoosc.COLUMNS, twoosc.trajectory(model, state0, ts))
    if "steady" in outs and twoosc.is_hurwitz(model):
        S = twoosc.steady_state(model)
        arts["steady"] = _table(twoosc.COLUMNS[5:], [[S[i, j] for i, j in twoosc._PAIRS]])
    return arts, []


def _run_angmom(cfg, rng):
    case = cfg.get("case", 3)
    p = dict(cfg["model"])
    init = cfg.get("initial", {})
    ts = time_grid(cfg.get("time_grid", {"t_max": 10.0, "n_points": 101}))
    _want(cfg, ("timeseries",), ("timeseries",))
    try:
        if case == 1:
            c = angmom.AngMomCase1(p["alpha_sq"], p["L2"], tuple(init["Li2"]), p.get("hbar", 1.0))
            rows = [(t, *angmom.case1_evolve(c, t)[1], angmom.case1_evolve(c, t)[0]) for t in ts]
            cols = ("t", "Lx2", "Ly2", "Lz2", "L2")
        elif case == 2:
            rows = [(t, *angmom.case2_evolve(p["alpha_sq"], init["L2"], init["N2"], p.get("hbar", 1.0), t,
                                             p.get("h_commutes_with_N2", True))) for t in ts]
            cols = ("t", "L2", "N2")
        else:
            ham = angmom.Hamiltonian(cfg.get("method", "RotorL2"))
            if "a" in p:
                kw = {k: v for k, v in p.items() if k not in ("a", "b")}
                c = angmom.AngMomCase3.from_coefficients(complex(*p["a"]), complex(*p["b"]), **kw)
            else:
                c = angmom.AngMomCase3(**p)
            keys = ("q2", "p2", "qp_sym", "L2")
            rows = []
            for t in ts:
                out = angmom.case3_evolve(c, init, t, ham)
                rows.append((t, *(out[k] for k in keys)))
            cols = ("t",) + keys
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise SchemaError(f"angmom case {case}: bad model or initial state ({exc})") from None
    return {"timeseries": _table(cols, rows, header={"case": case})}, []


def _run_tunnel(cfg, rng):
    model = _osc_model(cfg["model"], rng)
    try:
        elems = tunnel.BarrierMatrixElements.from_dict(cfg["elements"])
    except KeyError:
        raise SchemaError("tunnel scenarios need 'elements'") from None
    opts = _options(cfg, {"t": _pos, "n_omega": {"type": "integer", "minimum": 2}})
    ts = time_grid(cfg.get("time_grid", {"t_min": 1.0, "t_max": 10.0, "n_points": 10}))
    if np.any(ts <= 0):
        raise SchemaError("tunnel time grid must be strictly positive")
    t_spec = opts.get("t", float(ts[-1]))
    outs = _want(cfg, ("spectrum", "rates"), ("spectrum", "rates"))
    arts = {}
    violations = _osc_violations(model)
    if "spectrum" in outs:
        omega = None
        if "n_omega" in opts:
            omega = np.linspace(-12 / t_spec, 12 / t_spec, opts["n_omega"])
        sp = tunnel.spectrum(model, elems, t_spec, omega)
        cols = ("omega_i", "total") + tunnel.COMPONENTS
        data = np.column_stack([sp.omega, sp.total] + [sp.components[k] for k in tunnel.COMPONENTS])
        arts["spectrum"] = _table(cols, data, header={"t": t_spec, "constraints_ok": bool(sp.constraints_ok)})
        if not sp.constraints_ok:
            violations.append("tunnel coefficient constraints violated (phi or eta negative)")
    if "rates" in outs:
        gr = tunnel.golden_rule_rate(elems)
        rows = []
        for t in ts:
            chi, g0, g1 = tunnel.decay_parameters(model, elems, t)
            summed = tunnel.summed_rate(model, elems, t)
            rows.append((t, summed["total"], summed["G"], gr, chi, g0, g1))
        arts["rates"] = _table(("t", "summed_rate", "summed_G", "golden_rule_rate", "chi", "Gamma0", "Gamma1"), rows)
    return arts, violations


def _run_optics(cfg, rng):
    p = dict(cfg["model"])
    if "chi1" in p:
        p["chi1"] = complex(*p["chi1"]) if isinstance(p["chi1"], list) else p["chi1"]
    try:
        model = optics.AtomEnvModel(**p)
    except TypeError as exc:
        raise SchemaError(f"model: {exc}") from None
    opts = _options(cfg, {
        "delta_min": _num, "delta_max": _num, "n_delta": {"type": "integer", "minimum": 1},
        "alpha0": _num, "variant": {"enum": ["shift", "derived"]},
    })
    outs = _want(cfg, ("absorption_spectrum", "transient", "line_shape"), ("absorption_spectrum", "transient", "line_shape"))
    arts = {}
    if "absorption_spectrum" in outs:
        delta = np.linspace(opts.get("delta_min", -10.0), opts.get("delta_max", 10.0), opts.get("n_delta", 401))
        sp = optics.absorption_spectrum(model, delta, opts.get("alpha0", 1.0))
        arts["absorption_spectrum"] = _table(
            ("delta", "alpha", "dtheta_dz", "N0"),
            np.column_stack([sp[k] for k in ("delta", "alpha", "dtheta_dz", "N0")]),
            allow_nonfinite=True,
        )
    if "transient" in outs:
        ts = time_grid(cfg.get("time_grid", {"t_max": 10.0, "n_points": 101}))
        s0 = cfg.get("initial", {}).get("bloch", [0.0, 0.0, -1.0])
        traj = optics.transient(model, s0, ts, opts.get("variant", "shift"))
        arts["transient"] = _table(("t", "sigma_x", "sigma_y", "sigma_z"), np.column_stack([ts, traj]))
    if "line_shape" in outs:
        W, shift = optics.line_shape(model)
        arts["line_shape"] = _table(("W", "shift"), [(W, shift)])
    rep = optics.positivity(model)
    violations = [] if rep.ok else [f"optics positivity conditions failed: {sorted(k for k, v in rep.checks.items() if not v)}"]
    return arts, violations


_RUNNERS: dict[str, Callable] = {
    "moments": _run_moments,
    "quasiprob": _run_quasiprob,
    "wigner": _run_wigner,
    "fock": _run_fock,
    "twoosc": _run_twoosc,
    "angmom": _run_angmom,
    "tunnel": _run_tunnel,
    "optics": _run_optics,
}


def run_scenario(config: dict) -> RunResult:
    """Resolve ``config`` and evaluate its module.

    Raises
    ------
    SchemaError
        If the config or a module-specific block is malformed.
    LindbladLabError, ArithmeticError, numpy.linalg.LinAlgError
        On numerical failure.
    """
    cfg = resolve(config)
    if "module" not in cfg:
        raise SchemaError("run needs a 'module'")
    if "model" not in cfg:
        raise SchemaError("run needs a 'model'")
    rng = np.random.default_rng(cfg.get("seed", 0))
    arts, violations = _RUNNERS[cfg["module"]](cfg, rng)
    return RunResult(cfg["name"], arts, violations)


# ---------------------------------------------------------------------------
# cross-checks


def _moment_rhs(model: OscillatorModel):
    m, w, lam, mu = model.m, model.omega, model.lam, model.mu

    def f(_, y):
        q, p, qq, pp, pq = y
        return [
            -(lam - mu) * q + p / m,
            -m * w**2 * q - (lam + mu) * p,
            -2 * (lam - mu) * qq + 2 * pq / m + 2 * model.D_qq,
            -2 * (lam + mu) * pp - 2 * m * w**2 * pq + 2 * model.D_pp,
            -m * w**2 * qq + pp / m - 2 * lam * pq + 2 * model.D_pq,
        ]

    return f


def _rel_dev(a: np.ndarray, b: np.ndarray, floor: float = 1e-4) -> float:
    # relative to the reference, with a floor at a fraction of each column's range
    scale = np.maximum(np.abs(b), floor * np.max(np.abs(b), axis=0, keepdims=True))
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.abs(a - b) / scale))


def _metric(name: str, dev: float, tol: float) -> dict:
    return {"metric": name, "max_deviation": dev, "tolerance": tol, "passed": bool(dev < tol)}


def check_moments_vs_ode(n_models: int = 20, seed: int = 0, t_max: float = 5.0, n_points: int = 40, tol: float = 1e-8) -> dict:
    """Closed-form moments against adaptive integration of the moment equations."""
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.0, t_max, n_points)
    y0 = [0.4, -0.7, 1.3, 0.8, 0.1]
    worst = 0.0
    for i in range(n_models):
        model = random_model(rng, "Overdamped" if i % 2 else "Underdamped")
        sol = solve_ivp(_moment_rhs(model), (0, t_max), y0, t_eval=ts, method="DOP853", rtol=1e-13, atol=1e-15)
        got = np.array([s.as_array() for s in moments.trajectory(model, y0[:2], y0[2:], ts)])
        worst = max(worst, _rel_dev(got, sol.y.T))
    return {"n_models": n_models, "n_points": n_points, "metrics": [_metric("relative_moment_deviation", worst, tol)]}


def check_genfun_vs_oracle(
    alpha: complex = 1.5 + 0.5j, lam: float = 0.3, n_times: int = 6, dim: int = 40, n_max: int = 12, tol: float = 1e-7
) -> dict:
    """Glauber-packet density matrix: generating function against the Fock-basis integrator."""
    model = minimal_diffusion_model(1.0, 1.0, lam)
    init = fock.glauber_init(alpha)
    times = np.linspace(0.0, 10.0 / lam, n_times)
    worst = 0.0
    for snap in fock.oracle_evolve(model, fock.coherent_state(alpha, dim), times):
        ref = fock.density_matrix(fock.genfun_evolve(model, init, snap.t), n_max + 1).entries
        worst = max(worst, float(np.max(np.abs(snap.entries[: n_max + 1, : n_max + 1] - ref))))
    return {"n_times": n_times, "dim": dim, "n_max": n_max, "metrics": [_metric("max_abs_rho_deviation", worst, tol)]}


def check_quasiprob_relations(n_models: int = 50, seed: int = 0, tol: float = 1e-12, tol_flow: float = 1e-10) -> dict:
    """Steady P/W/Q covariance offsets and ordering-independent physical variances."""
    rng = np.random.default_rng(seed)
    worst, worst_flow = 0.0, 0.0
    ts = np.linspace(0.0, 5.0, 11)
    for i in range(n_models):
        model = random_model(rng, "Overdamped" if i % 2 else "Underdamped")
        P, W, Q = (quasiprob.steady_state(model, s).covariance for s in (1, 0, -1))
        devs = [
            np.max(np.abs(W - (P + Q) / 2)),
            np.max(np.abs(np.diag(W) - np.diag(P) - 0.25)),
            np.max(np.abs(np.diag(Q) - np.diag(W) - 0.25)),
            abs(P[0, 1] - W[0, 1]),
            abs(Q[0, 1] - W[0, 1]),
        ]
        worst = max(worst, float(max(devs)))
        var0 = np.array(moments.asymptotic_variances(model)) * rng.uniform(0.5, 2.0)
        for t in ts:
            phys = [quasiprob.to_physical(model, quasiprob.variance_flow(model, s, quasiprob.from_physical(model, var0, s), t), s)
                    for s in (1, 0, -1)]
            ref = np.abs(np.asarray(phys[1])).max()
            worst_flow = max(worst_flow, float(np.max(np.abs(np.asarray(phys) - phys[1]))) / ref)
    return {
        "n_models": n_models,
        "metrics": [_metric("steady_offset_deviation", worst, tol), _metric("physical_variance_spread", worst_flow, tol_flow)],
    }


CHECKS: dict[str, Callable[..., dict]] = {
    "moments-vs-ode": check_moments_vs_ode,
    "genfun-vs-oracle": check_genfun_vs_oracle,
    "quasiprob-relations": check_quasiprob_relations,
}

_CHECK_OPTIONS = {
    "moments-vs-ode": {"n_models": {"type": "integer", "minimum": 1}, "t_max": _pos, "n_points": {"type": "integer", "minimum": 2}, "tol": _pos},
    "genfun-vs-oracle": {"alpha": _complex, "lam": _pos, "n_times": {"type": "integer", "minimum": 1}, "dim": {"type": "integer", "minimum": 2},
                         "n_max": {"type": "integer", "minimum": 0}, "tol": _pos},
    "quasiprob-relations": {"n_models": {"type": "integer", "minimum": 1}, "tol": _pos, "tol_flow": _pos},
}


def verify_scenario(config: dict) -> dict:
    """Run the cross-check named by ``config["check"]`` and return its report."""
    cfg = resolve(config)
    name = cfg.get("check")
    if name is None:
        raise SchemaError("scenario does not name a cross-check ('check')")
    if name not in CHECKS:
        raise SchemaError(f"no analytic/oracle pairing named {name!r}; known: {sorted(CHECKS)}")
    opts = _options(cfg, _CHECK_OPTIONS[name])
    kw = dict(opts)
    if "alpha" in kw:
        kw["alpha"] = complex(*kw["alpha"])
    if "seed" in cfg and "seed" in CHECKS[name].__code__.co_varnames:
        kw["seed"] = cfg["seed"]
    report = CHECKS[name](**kw)
    report.update(check=name, name=cfg["name"], passed=all(m["passed"] for m in report["metrics"]))
    return report
