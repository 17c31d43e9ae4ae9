"""Run configuration: a strict line-oriented ``key = value`` grammar with
``[section]`` headers.

Unknown sections or keys are hard parse errors, duplicate keys are rejected,
and every value is validated against its domain at parse time (including
resolvability of referenced paths).  An empty document yields the documented
defaults.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from .fields import Params
from .grid import TorusGrid
from .integrate import IntegratorConfig


def _to_bool(text):
    if text.lower() in ("true", "yes", "on", "1"):
        return True
    if text.lower() in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_float(text):
    return float(text)


def _to_int(text):
    return int(text, 0)


def _to_floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _to_ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _to_exponents(text):
    vals = []
    for v in text.split(","):
        v = v.strip()
        vals.append(np.inf if v in ("inf", "oo") else float(v))
    if len(vals) != 5:
        raise ValueError("exponents need exactly five entries p,p1,p2,p3,p4")
    return tuple(vals)


_SCHEMA = {
    "grid": {"d": _to_int, "N": _to_int, "P": _to_float},
    "params": {"alpha": _to_float, "epsilon": _to_float, "s": _to_float},
    "integrator": {
        "scheme": str,
        "dt": _to_float,
        "t_end": _to_float,
        "t_win": _to_float,
        "tol_fp": _to_float,
        "max_iter": _to_int,
        "modified_mode": _to_bool,
    },
    "initial": {
        "generator": str,
        "seed": _to_int,
        "e_norm": _to_float,
        "width": _to_float,
        "carrier": _to_float,
        "n_amp": _to_float,
        "n1_amp": _to_float,
        "b_amp": _to_float,
        "b1_amp": _to_float,
        "k_index": _to_ints,
        "amplitude": _to_float,
        "orientation": str,
        "decay": _to_float,
        "kcut": _to_float,
        "e_amp": _to_float,
        "path": str,
    },
    "output": {
        "diag_interval": _to_float,
        "snapshot_interval": _to_float,
        "out_dir": str,
    },
    "study": {
        "ladder": _to_floats,
        "T": _to_float,
        "samples": _to_int,
        "seed": _to_int,
        "s": _to_float,
        "kcut": _to_float,
        "exponents": _to_exponents,
    },
    "groundstate": {"d": _to_int, "N": _to_int, "P": _to_float, "tol": _to_float},
}

_GENERATOR_KEYS = {
    "gaussian-packet": {"e_norm", "width", "carrier", "n_amp", "n1_amp", "b_amp", "b1_amp"},
    "single-mode": {"k_index", "amplitude", "orientation"},
    "random-smooth": {"seed", "decay", "kcut", "e_amp", "n_amp", "n1_amp", "b_amp", "b1_amp"},
    "snapshot": {"path"},
}

_DEFAULTS = {
    "grid": {"d": 2, "N": 64, "P": 16.0 * np.pi},
    "params": {"alpha": 1.0, "epsilon": 0.0, "s": 2.0},
    "integrator": {
        "scheme": "strang",
        "dt": 1e-3,
        "t_end": 1.0,
        "t_win": 0.05,
        "tol_fp": 1e-10,
        "max_iter": 60,
        "modified_mode": False,
    },
    "initial": {"generator": "gaussian-packet", "seed": 0},
    "output": {"diag_interval": 0.1, "snapshot_interval": 0.0, "out_dir": "out"},
    "study": {
        "ladder": [0.2, 0.1, 0.05, 0.025],
        "T": 0.5,
        "samples": 200,
        "seed": 0,
        "s": 2.0,
        "kcut": None,
        "exponents": (2.0, np.inf, 2.0, 2.0, np.inf),
    },
    "groundstate": {"d": None, "N": None, "P": None, "tol": 1e-10},
}


@dataclass
class RunConfig:
    """Fully validated configuration for one CLI invocation."""

    grid: TorusGrid
    params: Params
    integrator: IntegratorConfig
    initial: dict
    seed: int
    out_dir: str
    study: dict = field(default_factory=dict)
    groundstate: dict = field(default_factory=dict)


def _parse_sections(text):
    sections = {name: {} for name in _SCHEMA}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("unterminated section header", lineno, raw.index("[") + 1)
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ParseError(f"unknown section [{name}]", lineno)
            current = name
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, len(raw.rstrip()) + 1)
        if current is None:
            raise ParseError("key outside of any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[current]:
            raise ParseError(f"unknown key {key!r} in section [{current}]", lineno)
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in section [{current}]", lineno)
        conv = _SCHEMA[current][key]
        try:
            sections[current][key] = conv(value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", lineno) from None
    return sections


def _merged(sections, name):
    out = dict(_DEFAULTS[name])
    out.update(sections[name])
    return out


def parse_config(text):
    """Parse and validate; raises ParseError (syntax/schema) or
    ValidationError (domain violations)."""
    sections = _parse_sections(text)

    gsec = _merged(sections, "grid")
    if gsec["d"] not in (2, 3):
        raise ValidationError(f"d = {gsec['d']} violates d in {{2, 3}}")
    if gsec["N"] < 2 or gsec["N"] & (gsec["N"] - 1):
        raise ValidationError(f"N = {gsec['N']} violates N = power of two")
    if not gsec["P"] > 0:
        raise ValidationError(f"P = {gsec['P']} violates P > 0")
    grid = TorusGrid(gsec["d"], gsec["N"], gsec["P"])

    psec = _merged(sections, "params")
    if not psec["alpha"] >= 1.0:
        raise ValidationError(f"alpha = {psec['alpha']} violates alpha >= 1")
    if not (0.0 <= psec["epsilon"] < 1.0):
        raise ValidationError(f"epsilon = {psec['epsilon']} violates 0 <= epsilon < 1")
    if not psec["s"] > grid.d / 2:
        raise ValidationError(f"s = {psec['s']} violates s > d/2 = {grid.d / 2}")
    params = Params(alpha=psec["alpha"], epsilon=psec["epsilon"], s=psec["s"])

    isec = _merged(sections, "integrator")
    osec = _merged(sections, "output")
    if isec["scheme"] not in ("strang", "picard"):
        raise ValidationError(f"scheme = {isec['scheme']!r} violates scheme in {{strang, picard}}")
    if not isec["dt"] > 0:
        raise ValidationError(f"dt = {isec['dt']} violates dt > 0")
    if not isec["tol_fp"] > 0:
        raise ValidationError(f"tol_fp = {isec['tol_fp']} violates tol_fp > 0")
    if isec["t_win"] < isec["dt"]:
        raise ValidationError(f"t_win = {isec['t_win']} violates t_win >= dt")
    if isec["t_end"] < 0:
        raise ValidationError(f"t_end = {isec['t_end']} violates t_end >= 0")
    if osec["diag_interval"] < 0 or osec["snapshot_interval"] < 0:
        raise ValidationError("output intervals must be nonnegative")
    integrator = IntegratorConfig(
        scheme=isec["scheme"],
        dt=isec["dt"],
        t_end=isec["t_end"],
        t_win=isec["t_win"],
        tol_fp=isec["tol_fp"],
        max_iter=isec["max_iter"],
        modified_mode=isec["modified_mode"],
        diag_interval=osec["diag_interval"],
        snapshot_interval=osec["snapshot_interval"],
    )

    init = _merged(sections, "initial")
    gen = init["generator"]
    if gen not in _GENERATOR_KEYS:
        raise ValidationError(f"generator = {gen!r} violates generator in {sorted(_GENERATOR_KEYS)}")
    allowed = _GENERATOR_KEYS[gen] | {"generator", "seed"}
    for key in sections["initial"]:
        if key not in allowed:
            raise ValidationError(f"key {key!r} does not apply to generator {gen!r}")
    if gen == "snapshot":
        path = init.get("path")
        if not path:
            raise ValidationError("generator snapshot requires a path")
        if not os.path.exists(path):
            raise ValidationError(f"snapshot path {path!r} is not resolvable")

    ssec = _merged(sections, "study")
    if len(ssec["ladder"]) < 1 or any(not (0 <= e < 1) for e in ssec["ladder"]):
        raise ValidationError("ladder entries must lie in [0, 1)")
    if not ssec["samples"] > 0:
        raise ValidationError("samples must be positive")

    gssec = _merged(sections, "groundstate")

    seed = init.pop("seed", 0)
    return RunConfig(
        grid=grid,
        params=params,
        integrator=integrator,
        initial=init,
        seed=seed,
        out_dir=osec["out_dir"],
        study=ssec,
        groundstate=gssec,
    )


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
