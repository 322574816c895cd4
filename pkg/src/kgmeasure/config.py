"""Scenario configuration: TOML schema, validation, and object construction.

A scenario file declares the lattice, the system field, named test functions
and regions, probe couplings, and optional per-subcommand task blocks.  All
cross-references are resolved at load time and every declared causal
precondition is re-checked, so a malformed scenario fails before any solver
runs, with a message naming the offending section and field.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field

from .errors import ConfigError
from .fields import FieldParams, TestFunction
from .lattice import LatticeSpec, Region
from .scattering import CouplingProfile


@dataclass(frozen=True)
class ProbeConfig:
    params: FieldParams
    coupling: CouplingProfile
    effect_function: str
    theta: float


@dataclass(frozen=True)
class ScenarioConfig:
    spec: LatticeSpec
    system: FieldParams
    functions: dict[str, TestFunction]
    regions: dict[str, Region]
    probes: dict[str, ProbeConfig]
    tasks: dict[str, dict]
    seed: int


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"[{where}] missing required field '{key}'")
    return table[key]


def _build_function(name: str, table: dict, spec: LatticeSpec) -> TestFunction:
    where = f"functions.{name}"
    kind = _require(table, "kind", where)
    try:
        if kind == "gaussian_bump":
            box = table.get("support_box")
            return TestFunction.gaussian_bump(
                spec,
                _require(table, "t0", where),
                _require(table, "x0", where),
                _require(table, "sigma_t", where),
                _require(table, "sigma_x", where),
                table.get("amplitude", 1.0),
                support_box=tuple(box) if box is not None else None,
            )
        if kind == "point":
            return TestFunction.point(
                spec, _require(table, "t", where), _require(table, "x", where),
                table.get("amplitude", 1.0),
            )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[{where}] {exc}") from exc
    raise ConfigError(f"[{where}] unknown function kind {kind!r}")


def _build_region(name: str, table: dict, spec: LatticeSpec) -> Region:
    where = f"regions.{name}"
    kind = _require(table, "kind", where)
    try:
        if kind == "rect":
            return Region.from_rect(
                spec,
                _require(table, "t0", where), _require(table, "t1", where),
                _require(table, "x0", where), _require(table, "x1", where),
            )
        if kind == "points":
            pts = _require(table, "points", where)
            return Region.from_points(spec, [tuple(p) for p in pts])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[{where}] {exc}") from exc
    raise ConfigError(f"[{where}] unknown region kind {kind!r}")


def _build_probe(name: str, table: dict, spec: LatticeSpec,
                 functions: dict[str, TestFunction]) -> ProbeConfig:
    where = f"probes.{name}"
    shape_name = _require(table, "shape", where)
    if shape_name not in functions:
        raise ConfigError(f"[{where}] shape references unknown function {shape_name!r}")
    effect_name = table.get("effect", shape_name)
    if effect_name not in functions:
        raise ConfigError(f"[{where}] effect references unknown function {effect_name!r}")
    try:
        params = FieldParams(_require(table, "mass", where), spec)
        coupling = CouplingProfile(table.get("strength", 1.0), functions[shape_name])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[{where}] {exc}") from exc
    return ProbeConfig(params, coupling, effect_name, float(table.get("theta", 0.0)))


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    return parse_config(doc)


def parse_config(doc: dict) -> ScenarioConfig:
    lat = _require(doc, "lattice", "top level")
    try:
        spec = LatticeSpec(
            _require(lat, "n_t", "lattice"), _require(lat, "n_x", "lattice"),
            dx=lat.get("dx", 1.0), dt=lat.get("dt", 1.0),
            boundary=lat.get("boundary", "periodic"),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[lattice] {exc}") from exc
    sys_table = _require(doc, "system", "top level")
    try:
        system = FieldParams(_require(sys_table, "mass", "system"), spec)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[system] {exc}") from exc
    functions = {
        name: _build_function(name, tab, spec)
        for name, tab in doc.get("functions", {}).items()
    }
    regions = {
        name: _build_region(name, tab, spec)
        for name, tab in doc.get("regions", {}).items()
    }
    probes = {
        name: _build_probe(name, tab, spec, functions)
        for name, tab in doc.get("probes", {}).items()
    }
    tasks = doc.get("tasks", {})
    for tname, tab in tasks.items():
        for key, value in tab.items():
            if isinstance(value, str) and key in ("f", "g", "h", "observable"):
                if value not in functions:
                    raise ConfigError(
                        f"[tasks.{tname}] '{key}' references unknown function {value!r}"
                    )
            if key in ("functions", "probes", "regions"):
                pool = {"functions": functions, "probes": probes, "regions": regions}[key]
                for ref in value:
                    if ref not in pool:
                        raise ConfigError(
                            f"[tasks.{tname}] '{key}' references unknown name {ref!r}"
                        )
    seed = int(doc.get("seed", 0))
    return ScenarioConfig(spec, system, functions, regions, probes, tasks, seed)
