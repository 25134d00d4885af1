"""TOML scenario configuration: schema validation and construction of experiment objects.

A configuration is a set of tables (``[array]``, ``[zones.bright]``,
``[source]``, ``[solver]``, ...). Keys outside the schema are rejected with
their line number; missing required keys are reported by dotted name.
"""

import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np
import tomli

from .geometry import (AIR_DENSITY, BRIGHT, DARK, SPEED_OF_SOUND, VirtualSource, Zone,
                       build_circular_array, build_rectangular_array, scaled_plane_wave)
from .scenario import PRESET_METHODS, MethodSpec, Scenario
from .solver import VELOCITY_WEIGHTINGS, SolverConfig

BUNDLED = ("paper_baseline", "fig5_modal", "table1_noise", "fig10_snapshots")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Key:
    kind: type | tuple
    required: bool = False


NUM = (int, float)

ZONE = {"center": Key(list, True), "r_in": Key(NUM, True), "r_out": Key(NUM, True)}
METHOD = {"style": Key(str), "group_count": Key(int), "quantities": Key(list), "kappa": Key(NUM)}

SCHEMA = {
    "array": {
        "kind": Key(str, True), "count": Key(int, True), "width": Key(NUM), "height": Key(NUM),
        "radius": Key(NUM), "center": Key(list), "offset_deg": Key(NUM),
    },
    "zones": {"bright": ZONE, "dark": ZONE},
    "layouts": {"offset_deg": Key(NUM)},
    "source": {
        "kind": Key(str, True), "azimuth_deg": Key(NUM), "position": Key(list),
        "scaling": Key(str), "amplitude": Key(NUM),
    },
    "solver": {
        "methods": Key(list), "kappa": Key(NUM), "lwe_max": Key(NUM), "lwe_per_loudspeaker": Key(NUM),
        "fs": Key(NUM), "filter_length": Key(int), "beta_initial": Key(NUM),
        "beta_growth": Key(NUM), "beta_max": Key(NUM), "velocity_weighting": Key(str),
        "velocity_gain": Key(NUM), "workers": Key(int),
    },
    "methods": "*method",
    "evaluation": {
        "grid_spacing": Key(NUM), "grid_side": Key(int), "f_min": Key(NUM), "snr_db": Key(list),
        "seed": Key(int), "noise_scaling": Key(str), "rir_length": Key(int),
    },
    "physics": {"c": Key(NUM), "rho": Key(NUM)},
    "modal": {
        "m": Key((int, list), True), "r_in": Key(NUM, True), "r_out": Key(NUM, True),
        "r0": Key(NUM, True), "phi0_deg": Key(NUM), "f_start": Key(NUM, True),
        "f_stop": Key(NUM, True), "step": Key(NUM, True), "dphi": Key(NUM),
        "min_prominence_db": Key(NUM),
    },
    "snapshot": {
        "methods": Key(list, True), "frequencies": Key(list), "phases_deg": Key(list),
        "x_range": Key(list, True), "y_range": Key(list, True), "spacing": Key(NUM, True),
        "pulse_length": Key(int), "times": Key(list), "format": Key(str),
    },
    "output": {"dir": Key(str)},
}

_HEADER = re.compile(r"^\s*\[\[?\s*([^\]]+?)\s*\]\]?\s*(#.*)?$")
_ASSIGN = re.compile(r"^\s*([A-Za-z0-9_\-\"'.]+)\s*=")


def _line_index(text):
    """Map dotted key paths to the line where they are defined."""
    index, table = {}, ()
    for lineno, line in enumerate(text.splitlines(), 1):
        head = _HEADER.match(line)
        if head:
            table = tuple(p.strip().strip("\"'") for p in head.group(1).split("."))
            index.setdefault(table, lineno)
            continue
        assign = _ASSIGN.match(line)
        if assign:
            key = tuple(p.strip("\"'") for p in assign.group(1).split("."))
            index.setdefault(table + key, lineno)
    return index


def _where(lines, path):
    line = lines.get(tuple(path))
    return f"line {line}: " if line else ""


def _validate(data, schema, path, lines, source):
    for key, value in data.items():
        here = (*path, key)
        dotted = ".".join(here)
        if schema == "*method":
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: {_where(lines, here)}[{dotted}] must be a table")
            _validate(value, METHOD, here, lines, source)
            continue
        if key not in schema:
            raise ConfigError(f"{source}: {_where(lines, here)}unknown key '{dotted}'")
        spec = schema[key]
        if isinstance(spec, (dict, str)):
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: {_where(lines, here)}'{dotted}' must be a table")
            _validate(value, spec, here, lines, source)
            continue
        ok = isinstance(value, spec.kind) and not (isinstance(value, bool) and spec.kind != bool)
        if not ok:
            names = spec.kind.__name__ if isinstance(spec.kind, type) else "/".join(
                t.__name__ for t in spec.kind)
            raise ConfigError(f"{source}: {_where(lines, here)}'{dotted}' must be of type {names}")
    if isinstance(schema, dict):
        for key, spec in schema.items():
            if isinstance(spec, Key) and spec.required and key not in data:
                raise ConfigError(f"{source}: missing required key '{'.'.join((*path, key))}'")


def require(config, *path):
    """Return the table at ``path`` or raise naming the missing key."""
    node = config.data
    for i, key in enumerate(path):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"{config.source}: missing required key '{'.'.join(path[:i + 1])}'")
        node = node[key]
    return node


@dataclass
class Config:
    data: dict
    source: str

    def section(self, name):
        return self.data.get(name, {})

    @property
    def physics(self):
        p = self.section("physics")
        return float(p.get("c", SPEED_OF_SOUND)), float(p.get("rho", AIR_DENSITY))


def resolve_config_path(name):
    """Accept a file path or the name of a bundled configuration."""
    path = Path(name)
    if path.is_file():
        return path
    stem = path.stem if path.suffix == ".toml" else str(name)
    if stem in BUNDLED:
        return Path(str(resources.files("multizone") / "configs" / f"{stem}.toml"))
    raise ConfigError(f"config {name!r} is neither a file nor one of {', '.join(BUNDLED)}")


def parse_config(text, source="<string>"):
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        raise ConfigError(f"{source}: {err}") from err
    _validate(data, SCHEMA, (), _line_index(text), source)
    return Config(data, source)


def load_config(name):
    path = resolve_config_path(name)
    return parse_config(path.read_text(), str(path))


def _point(config, value, path, size=2):
    if len(value) != size or not all(isinstance(v, NUM) for v in value):
        raise ConfigError(f"{config.source}: '{path}' must be a list of {size} numbers")
    return np.asarray(value, dtype=float)


def build_array(config):
    a = require(config, "array")
    center = _point(config, a.get("center", [0.0, 0.0]), "array.center")
    if a["kind"] == "rectangular":
        for key in ("width", "height"):
            require(config, "array", key)
        return build_rectangular_array(a["width"], a["height"], a["count"], center)
    if a["kind"] == "circular":
        require(config, "array", "radius")
        return build_circular_array(a["radius"], a["count"], center,
                                    np.deg2rad(a.get("offset_deg", 0.0)))
    raise ConfigError(f"{config.source}: array.kind must be 'rectangular' or 'circular'")


def build_source(config, loudspeakers, bright_center):
    s = require(config, "source")
    kind = s["kind"]
    scaling = s.get("scaling", "mean_distance")
    if scaling not in ("mean_distance", "unit"):
        raise ConfigError(f"{config.source}: source.scaling must be 'mean_distance' or 'unit'")
    if kind == "plane_wave":
        az = np.deg2rad(require(config, "source", "azimuth_deg"))
        if scaling == "mean_distance":
            src = scaled_plane_wave(az, loudspeakers, bright_center)
        else:
            src = VirtualSource("plane_wave", azimuth=az, reference=bright_center)
    elif kind == "point_source":
        pos = _point(config, require(config, "source", "position"), "source.position")
        src = VirtualSource("point_source", position=pos)
    elif kind == "silence":
        src = VirtualSource("silence")
    else:
        raise ConfigError(f"{config.source}: unknown source.kind {kind!r}")
    if "amplitude" in s:
        src = replace(src, amplitude=src.amplitude * float(s["amplitude"]))
    return src


def _methods(config):
    s = config.section("solver")
    kappa = s.get("kappa")
    methods = dict(PRESET_METHODS)
    if kappa is not None:
        # the velocity methods share one pressure weight; pure pressure matching keeps kappa = 1
        methods = {k: (v if not v.quantities else replace(v, kappa=float(kappa)))
                   for k, v in methods.items()}
    for name, table in config.section("methods").items():
        base = methods.get(name, MethodSpec(name, "pairs", 24, (), 1.0))
        fields = {k: (tuple(v) if k == "quantities" else v) for k, v in table.items()}
        methods[name] = replace(base, name=name, **fields)
    return methods


def selected_methods(config, default=("pm", "jpvm", "jpvm_plus")):
    names = config.section("solver").get("methods", list(default))
    methods = _methods(config)
    for name in names:
        if name not in methods:
            raise ConfigError(f"{config.source}: unknown method {name!r}")
    return list(names)


def build_scenario(config):
    """Construct the :class:`Scenario` described by the configuration."""
    c, rho = config.physics
    loudspeakers = build_array(config)
    zones = require(config, "zones")
    b = require(config, "zones", "bright")
    bright = Zone(_point(config, b["center"], "zones.bright.center"), b["r_in"], b["r_out"], BRIGHT)
    dark = ()
    if "dark" in zones:
        d = zones["dark"]
        dark = (Zone(_point(config, d["center"], "zones.dark.center"), d["r_in"], d["r_out"], DARK),)
    source = build_source(config, loudspeakers, bright.center)
    s = config.section("solver")
    weighting = s.get("velocity_weighting", "pressure_difference")
    if weighting not in VELOCITY_WEIGHTINGS:
        raise ConfigError(f"{config.source}: solver.velocity_weighting must be one of "
                          f"{', '.join(VELOCITY_WEIGHTINGS)}")
    if "lwe_max" in s and "lwe_per_loudspeaker" in s:
        raise ConfigError(f"{config.source}: give either solver.lwe_max or solver.lwe_per_loudspeaker")
    lwe_max = s.get("lwe_max", s.get("lwe_per_loudspeaker", 10.0) / len(loudspeakers))
    defaults = SolverConfig()
    solver = SolverConfig(
        lwe_max=float(lwe_max),
        beta_initial=float(s.get("beta_initial", defaults.beta_initial)),
        beta_growth=float(s.get("beta_growth", defaults.beta_growth)),
        beta_max=float(s.get("beta_max", defaults.beta_max)),
        velocity_weighting=weighting,
        velocity_gain=float(s.get("velocity_gain", defaults.velocity_gain)),
        impedance=rho * c)
    e = config.section("evaluation")
    return Scenario(
        loudspeakers=loudspeakers, bright=bright, dark=dark, source=source,
        methods=_methods(config), solver=solver,
        fs=float(s.get("fs", 8000.0)), filter_length=int(s.get("filter_length", 256)),
        c=c, rho=rho,
        grid_spacing=float(e.get("grid_spacing", 0.02)), grid_side=int(e.get("grid_side", 21)),
        f_min=float(e.get("f_min", 100.0)), rir_length=int(e.get("rir_length", 128)),
        layout_offset=np.deg2rad(config.section("layouts").get("offset_deg", 0.0)))
