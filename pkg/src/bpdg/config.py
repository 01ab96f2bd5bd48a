"""Run configuration: JSON schema, validation, and construction helpers.

Unknown keys are rejected at every level so typos fail loudly instead of
silently running a default.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .band import BandModel
from .collision import PhononParams
from .errors import ConfigError
from .mesh import PhaseMesh, build_uniform
from .poisson import DopingProfile

POISSON_MODES = ("self_consistent", "frozen", "off")
BC_MODES = ("periodic", "diode")
INITIAL_KINDS = ("uniform", "maxwellian", "table")


def _take(d, key, default=None, required=False):
    if required and key not in d:
        raise ConfigError(f"missing config key {key!r}")
    return d.pop(key, default)


def _no_leftovers(d, where):
    if d:
        raise ConfigError(f"unknown config keys in {where}: {sorted(d)}")


@dataclass
class RunConfig:
    mesh: PhaseMesh
    degree: int
    band: BandModel
    phonon: PhononParams
    doping: DopingProfile
    bias: float
    permittivity: float
    charge: float
    bc: str
    poisson_mode: str
    initial: dict
    t_end: float
    max_steps: int
    rk_order: int
    safety: float
    dt_max: float
    snapshot_every: int

    def __post_init__(self):
        if self.bc not in BC_MODES:
            raise ConfigError(f"bc must be one of {BC_MODES}")
        if self.poisson_mode not in POISSON_MODES:
            raise ConfigError(f"poisson must be one of {POISSON_MODES}")
        if self.rk_order not in (1, 2, 3):
            raise ConfigError("rk_order must be 1, 2 or 3")
        if self.t_end < 0.0:
            raise ConfigError("t_end must be nonnegative")
        if self.max_steps < 0:
            raise ConfigError("max_steps must be nonnegative")
        if not (0.0 < self.safety <= 1.0):
            raise ConfigError("safety must lie in (0, 1]")
        if not self.dt_max > 0.0:
            raise ConfigError("dt_max must be positive")
        if self.permittivity <= 0.0 or self.charge <= 0.0:
            raise ConfigError("permittivity and charge must be positive")
        if self.poisson_mode == "off" and self.bias != 0.0:
            raise ConfigError("poisson 'off' forces V = 0; bias must be 0")
        if self.initial.get("kind") not in INITIAL_KINDS:
            raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}")


def _parse_mesh(section):
    length = _take(section, "length", required=True)
    p_max = _take(section, "p_max", required=True)
    nx = _take(section, "nx", required=True)
    np_ = _take(section, "np", required=True)
    nmu = _take(section, "nmu", required=True)
    x_edges = _take(section, "x_edges")
    p_edges = _take(section, "p_edges")
    mu_edges = _take(section, "mu_edges")
    _no_leftovers(section, "mesh")
    base = build_uniform(float(length), float(p_max), int(nx), int(np_), int(nmu))
    if x_edges is None and p_edges is None and mu_edges is None:
        return base
    return PhaseMesh(
        np.asarray(x_edges if x_edges is not None else base.x_edges, dtype=float),
        np.asarray(p_edges if p_edges is not None else base.p_edges, dtype=float),
        np.asarray(mu_edges if mu_edges is not None else base.mu_edges, dtype=float),
    )


def _parse_band(section):
    kind = _take(section, "kind", required=True)
    m_eff = float(_take(section, "m_eff", 1.0))
    kane_alpha = float(_take(section, "kane_alpha", 0.0))
    _no_leftovers(section, "band")
    return BandModel(kind, m_eff, kane_alpha)


def _parse_phonon(section):
    hw = float(_take(section, "hbar_omega", required=True))
    coupling = float(_take(section, "coupling", 0.0))
    elastic = float(_take(section, "elastic", 0.0))
    detailed = bool(_take(section, "detailed_balance", False))
    n_ph = _take(section, "n_ph")
    _no_leftovers(section, "phonon")
    if detailed:
        if n_ph is not None:
            raise ConfigError("give either n_ph or detailed_balance, not both")
        return PhononParams.with_detailed_balance(hw, coupling, elastic)
    if n_ph is None:
        raise ConfigError("phonon needs n_ph unless detailed_balance is set")
    return PhononParams(hw, float(n_ph), coupling, elastic)


def _parse_doping(section):
    bp = np.asarray(_take(section, "breakpoints", []), dtype=float)
    vals = np.asarray(_take(section, "values", required=True), dtype=float)
    _no_leftovers(section, "doping")
    return DopingProfile(bp, vals)


def _parse_initial(section):
    kind = _take(section, "kind", required=True)
    out = {"kind": kind}
    if kind == "uniform":
        out["value"] = float(_take(section, "value", required=True))
        if out["value"] < 0.0:
            raise ConfigError("uniform initial value must be nonnegative")
    elif kind == "maxwellian":
        out["amplitude"] = _take(section, "amplitude")
        if out["amplitude"] is not None:
            out["amplitude"] = float(out["amplitude"])
    elif kind == "table":
        out["path"] = _take(section, "path", required=True)
    _no_leftovers(section, "initial")
    return out


def parse_config(data):
    """Build a RunConfig from a parsed JSON dict (consumed destructively)."""
    data = dict(data)
    mesh = _parse_mesh(dict(_take(data, "mesh", required=True)))
    degree = int(_take(data, "degree", 1))
    band = _parse_band(dict(_take(data, "band", required=True)))
    phonon = _parse_phonon(dict(_take(data, "phonon", required=True)))
    doping = _parse_doping(dict(_take(data, "doping", required=True)))
    bias = float(_take(data, "bias", 0.0))
    permittivity = float(_take(data, "permittivity", 1.0))
    charge = float(_take(data, "charge", 1.0))
    bc = _take(data, "bc", "periodic")
    poisson_mode = _take(data, "poisson", "self_consistent")
    initial = _parse_initial(dict(_take(data, "initial", {"kind": "maxwellian"})))

    time_sec = dict(_take(data, "time", required=True))
    t_end = float(_take(time_sec, "t_end", required=True))
    max_steps = int(_take(time_sec, "max_steps", 100000))
    rk_order = int(_take(time_sec, "rk_order", 2))
    safety = float(_take(time_sec, "safety", 0.9))
    dt_max = float(_take(time_sec, "dt_max", math.inf))
    _no_leftovers(time_sec, "time")

    out_sec = dict(_take(data, "output", {}))
    snapshot_every = int(_take(out_sec, "snapshot_every", 0))
    _no_leftovers(out_sec, "output")

    _no_leftovers(data, "top level")
    return RunConfig(mesh, degree, band, phonon, doping, bias, permittivity,
                     charge, bc, poisson_mode, initial, t_end, max_steps,
                     rk_order, safety, dt_max, snapshot_every)


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)
