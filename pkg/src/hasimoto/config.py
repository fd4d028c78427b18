"""Flat ``key = value`` run configuration.

Grammar, one entry per line::

    # comment (also after a value)
    section.key = value

Keys are dotted identifiers; values are numbers, booleans (true/false),
comma separated lists or bare words.  Unknown keys and repeated keys are
errors, reported with their line number.

Recognised keys and defaults are listed in ``SCHEMA``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConfigError

Q_FLOWS = ("nls", "mkdv")
SPIN_FLOWS = ("heisenberg", "spin_mkdv")
CURVE_FLOWS = ("vfe", "vfe_axial")
MAP_FLOWS = ("schrodinger_map", "map_mkdv", "coord_map")
INITIAL_KINDS = ("plane_wave", "random_band", "from_file", "map_coords", "zero")
_HIER = re.compile(r"^hierarchy\((\d+)\)$")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


def _int_list(s):
    return tuple(int(v) for v in s.split(",") if v.strip())


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _str(s):
    return s


def _float_or_none(s):
    return None if s.lower() == "none" else float(s)


# key: (parser, default)
SCHEMA = {
    "algebra.n": (int, 1),
    "grid.points": (int, 128),
    "grid.length": (float, 6.283185307179586),
    "flow": (_str, "nls"),
    "integrator": (_str, "ifrk4"),
    "dealias": (_bool, True),
    "dt": (float, 1e-3),
    "t_final": (float, 1.0),
    "snapshot_every": (int, 0),
    "diagnostics_every": (int, 10),
    "initial.kind": (_str, "random_band"),
    "initial.a": (float, 0.5),
    "initial.k": (int, 1),
    "initial.direction": (int, 0),
    "initial.seed": (int, 0),
    "initial.kmax": (int, 4),
    "initial.amplitude": (float, 0.3),
    "initial.path": (_str, ""),
    "initial.theta0": (float, 0.3),
    "dxinv_policy": (_str, "zero_mean"),
    "theta_margin": (float, 0.1),
    "tolerance": (float, 1e-5),
    "output_dir": (_str, "out"),
    "seed": (int, 0),
    "verify.ns": (_int_list, (1, 2, 3)),
    "verify.samples": (int, 1000),
    "verify.corrupt": (_str, ""),
    "compare.ns": (_int_list, ()),
    "compare.refine": (_bool, True),
    "compare.zero": (_bool, False),
    "compare.modes": (_int_list, (1, 2)),
}


def parse_text(text: str) -> dict:
    """Parse config text into {key: (raw value, line number)}."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, val = (p.strip() for p in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError("malformed key", line=lineno, key=key)
        if key not in SCHEMA:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in out:
            raise ConfigError(f"duplicate key (first set on line {out[key][1]})", line=lineno, key=key)
        if val == "":
            raise ConfigError("missing value", line=lineno, key=key)
        out[key] = (val, lineno)
    return out


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    text: str = ""

    def __getitem__(self, key):
        return self.values[key]

    @property
    def flow_family(self):
        f = self.values["flow"]
        if f in Q_FLOWS or _HIER.match(f):
            return "q"
        if f in SPIN_FLOWS:
            return "spin"
        if f in CURVE_FLOWS:
            return "curve"
        if f in MAP_FLOWS:
            return "map"
        return None

    @property
    def hierarchy_index(self):
        f = self.values["flow"]
        m = _HIER.match(f)
        if m:
            return int(m.group(1))
        return {"nls": 2, "mkdv": 3}.get(f)

    def echo(self) -> str:
        """Canonical text with every key, suitable for replay."""
        lines = []
        for k in sorted(self.values):
            v = self.values[k]
            if v in ("", ()):
                continue  # empty means default for every key that allows it
            if isinstance(v, tuple):
                v = ",".join(str(i) for i in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = "%.17g" % v
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


_POSITIVE = ("grid.length", "dt", "theta_margin", "tolerance", "verify.samples")
_NONNEG = ("t_final", "snapshot_every", "diagnostics_every", "initial.kmax", "initial.amplitude", "seed")


def load_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Parse and validate; ``overrides`` (already typed) win over the text."""
    raw = parse_text(text)
    vals = {k: d for k, (_, d) in SCHEMA.items()}
    lines = {}
    for key, (val, lineno) in raw.items():
        parser = SCHEMA[key][0]
        try:
            vals[key] = parser(val)
        except ValueError as err:
            raise ConfigError(f"bad value {val!r}: {err}", line=lineno, key=key) from None
        lines[key] = lineno
    vals.update(overrides or {})

    def bad(key, msg):
        raise ConfigError(msg, line=lines.get(key), key=key)

    if vals["algebra.n"] < 1:
        bad("algebra.n", "N must be at least 1")
    p = vals["grid.points"]
    if p < 16 or p & (p - 1):
        bad("grid.points", "grid points must be a power of two >= 16")
    for k in _POSITIVE:
        if not vals[k] > 0:
            bad(k, "must be positive")
    for k in _NONNEG:
        if vals[k] < 0:
            bad(k, "must not be negative")
    if vals["diagnostics_every"] < 1:
        bad("diagnostics_every", "must be at least 1")
    if vals["integrator"] not in ("rk4", "ifrk4"):
        bad("integrator", "integrator must be rk4 or ifrk4")
    if vals["dxinv_policy"] not in ("zero_mean", "base_point_zero", "cokernel_A"):
        bad("dxinv_policy", "policy must be zero_mean, base_point_zero or cokernel_A")
    if vals["initial.kind"] not in INITIAL_KINDS:
        bad("initial.kind", f"initial kind must be one of {', '.join(INITIAL_KINDS)}")
    if any(n < 1 for n in vals["verify.ns"]) or not vals["verify.ns"]:
        bad("verify.ns", "need a non-empty list of N >= 1")
    if any(n < 1 for n in vals["compare.ns"]):
        bad("compare.ns", "N values must be >= 1")
    cfg = RunConfig(vals, text)
    fam = cfg.flow_family
    if fam is None:
        bad("flow", f"unknown flow {vals['flow']!r}")
    if cfg.hierarchy_index is not None and cfg.hierarchy_index < 1:
        bad("flow", "hierarchy index must be at least 1")
    kind = vals["initial.kind"]
    if vals["flow"] == "coord_map" and kind not in ("map_coords", "from_file"):
        bad("initial.kind", "coord_map needs map_coords initial data")
    if kind == "plane_wave" and fam != "q":
        bad("initial.kind", "plane_wave initial data is defined for q-flows only")
    if kind == "from_file" and not vals["initial.path"]:
        bad("initial.path", "from_file needs initial.path")
    if kind == "plane_wave" and not 0 <= vals["initial.direction"] < vals["algebra.n"]:
        bad("initial.direction", "direction index must be in [0, N)")
    if vals["verify.corrupt"]:
        parts = vals["verify.corrupt"].split(",")
        try:
            a, b, c = (int(v) for v in parts[:3])
            eps = float(parts[3]) if len(parts) > 3 else 1e-6
        except (ValueError, IndexError):
            bad("verify.corrupt", "expected a,b,c[,eps]")
        vals["verify.corrupt"] = (a, b, c, eps)
    return cfg
