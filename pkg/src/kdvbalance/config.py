"""Run configuration: strict JSON schema, validation and serialisation.

Document layout (every key optional except ``command`` unless a default is
supplied by the CLI)::

    {
      "command": "balance-scan",
      "grid": {"n": 1024, "length": 100.0},
      "epsilon": 0.1,
      "solver": {"dt": 0.005, "t_end": 10.0, "scheme": "ETDRK4", "snapshot_stride": 100},
      "profile": {"kind": "solitary", "amplitude": 1.0, "x0": null},
      "laws": ["Momentum", "Energy"],
      "eps_list": [0.025, 0.05, 0.1, 0.2],
      "sweep": {"mode": "analysis", "sample_times": [0, 5, 10]},
      "z_levels": [0.0, 0.5, 1.0],
      "output_dir": "output"
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .dynamics import Params, SolverConfig
from .errors import ConfigError, GridError
from .experiments import DEFAULT_EPS_LADDER, DEFAULT_SAMPLE_TIMES
from .flow import Z_MAX
from .grid import Grid, make_grid
from .laws import LawId
from .profiles import PROFILE_KINDS, SolitaryProfile, profile_to_dict

COMMANDS = ("simulate", "verify-identities", "balance-scan", "fields", "drift")

DEFAULTS = {
    "grid": {"n": 1024, "length": 100.0},
    "epsilon": 0.1,
    "solver": {"dt": 0.005, "t_end": 10.0, "scheme": "ETDRK4", "snapshot_stride": 100},
    "laws": [law.value for law in LawId],
    "eps_list": list(DEFAULT_EPS_LADDER),
    "sweep": {"mode": "analysis", "sample_times": list(DEFAULT_SAMPLE_TIMES)},
    "z_levels": [0.0, 0.5, 1.0],
    "output_dir": "output",
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid: Grid
    params: Params
    solver: SolverConfig
    profile: object
    laws: tuple[LawId, ...]
    eps_list: tuple[float, ...]
    sweep_mode: str
    sample_times: tuple[float, ...]
    z_levels: tuple[float, ...]
    output_dir: str


def _require_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", path=path or "<root>")
    for key in obj:
        if key not in allowed:
            full = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key {key!r}", path=full)


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path=path)
    if integer and int(value) != value:
        raise ConfigError(f"expected an integer, got {value!r}", path=path)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", path=path)
    return int(value) if integer else float(value)


def _number_list(value, path):
    if not isinstance(value, list) or not value:
        raise ConfigError("expected a non-empty list of numbers", path=path)
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _profile(doc, path="profile"):
    if doc is None:
        return SolitaryProfile()
    _require_keys(doc, {"kind", "amplitude", "x0", "width", "k", "value", "path"}, path)
    kind = doc.get("kind", "solitary")
    if kind not in PROFILE_KINDS:
        raise ConfigError(
            f"unknown profile kind {kind!r}, expected one of {sorted(PROFILE_KINDS)}",
            path=f"{path}.kind",
        )
    cls = PROFILE_KINDS[kind]
    allowed = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in doc.items():
        if key == "kind":
            continue
        if key not in allowed:
            raise ConfigError(f"key not valid for {kind} profiles", path=f"{path}.{key}")
        if key == "path":
            if not isinstance(value, str) or not Path(value).is_file():
                raise ConfigError(f"profile file {value!r} does not exist", path=f"{path}.path")
            kwargs[key] = value
        elif value is None and key == "x0":
            kwargs[key] = None
        else:
            kwargs[key] = _number(value, f"{path}.{key}")
    if kind == "file" and "path" not in kwargs:
        raise ConfigError("file profiles need a path", path=f"{path}.path")
    if "amplitude" in kwargs and kind in ("solitary",) and kwargs["amplitude"] <= 0:
        raise ConfigError("amplitude must be positive", path=f"{path}.amplitude")
    return cls(**kwargs)


def config_from_dict(doc: dict, command: str | None = None) -> RunConfig:
    _require_keys(doc, set(DEFAULTS) | {"command", "profile"}, "")
    cmd = doc.get("command", command)
    if command is not None and cmd != command:
        raise ConfigError(
            f"config command {cmd!r} does not match requested subcommand {command!r}",
            path="command",
        )
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {cmd!r}", path="command")

    grid_doc = {**DEFAULTS["grid"], **doc.get("grid", {})}
    _require_keys(doc.get("grid", {}), set(DEFAULTS["grid"]), "grid")
    try:
        grid = make_grid(_number(grid_doc["n"], "grid.n", integer=True),
                         _number(grid_doc["length"], "grid.length"))
    except GridError as exc:
        raise ConfigError(str(exc), path="grid") from exc

    params = Params(_number(doc.get("epsilon", DEFAULTS["epsilon"]), "epsilon"))

    _require_keys(doc.get("solver", {}), set(DEFAULTS["solver"]), "solver")
    sol = {**DEFAULTS["solver"], **doc.get("solver", {})}
    scheme = sol["scheme"]
    if not isinstance(scheme, str):
        raise ConfigError(f"expected a string, got {scheme!r}", path="solver.scheme")
    solver = SolverConfig(
        params, grid,
        dt=_number(sol["dt"], "solver.dt"),
        t_end=_number(sol["t_end"], "solver.t_end"),
        scheme=scheme,
        snapshot_stride=_number(sol["snapshot_stride"], "solver.snapshot_stride", integer=True),
    )

    laws_doc = doc.get("laws", DEFAULTS["laws"])
    if not isinstance(laws_doc, list) or not laws_doc:
        raise ConfigError("expected a non-empty list of law names", path="laws")
    laws = []
    for i, name in enumerate(laws_doc):
        try:
            laws.append(LawId.parse(name))
        except ValueError as exc:
            raise ConfigError(str(exc), path=f"laws[{i}]") from exc

    eps_list = _number_list(doc.get("eps_list", DEFAULTS["eps_list"]), "eps_list")
    for i, e in enumerate(eps_list):
        try:
            Params(e)
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], path=f"eps_list[{i}]") from exc
    if any(b <= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps values must be strictly increasing", path="eps_list")

    _require_keys(doc.get("sweep", {}), set(DEFAULTS["sweep"]), "sweep")
    sweep = {**DEFAULTS["sweep"], **doc.get("sweep", {})}
    if sweep["mode"] not in ("analysis", "dynamic"):
        raise ConfigError(f"unknown sweep mode {sweep['mode']!r}", path="sweep.mode")
    sample_times = _number_list(sweep["sample_times"], "sweep.sample_times")
    if any(t < 0 for t in sample_times) or list(sample_times) != sorted(set(sample_times)):
        raise ConfigError("sample times must be non-negative and increasing",
                          path="sweep.sample_times")

    z_levels = _number_list(doc.get("z_levels", DEFAULTS["z_levels"]), "z_levels")
    if any(not 0 <= z <= Z_MAX for z in z_levels):
        raise ConfigError(f"heights must lie in [0, {Z_MAX}]", path="z_levels")

    out = doc.get("output_dir", DEFAULTS["output_dir"])
    if not isinstance(out, str) or not out:
        raise ConfigError("expected a non-empty path string", path="output_dir")

    return RunConfig(
        command=cmd, grid=grid, params=params, solver=solver,
        profile=_profile(doc.get("profile")), laws=tuple(laws), eps_list=eps_list,
        sweep_mode=sweep["mode"], sample_times=sample_times, z_levels=z_levels,
        output_dir=out,
    )


def load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError("expected a JSON object at top level")
    return doc


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Raises ConfigError carrying line/column for syntax errors and the key
    path for semantic ones.
    """
    return config_from_dict(load_document(text), command)


def config_to_dict(cfg: RunConfig) -> dict:
    return {
        "command": cfg.command,
        "grid": {"n": cfg.grid.n, "length": cfg.grid.length},
        "epsilon": cfg.params.epsilon,
        "solver": {
            "dt": cfg.solver.dt,
            "t_end": cfg.solver.t_end,
            "scheme": cfg.solver.scheme,
            "snapshot_stride": cfg.solver.snapshot_stride,
        },
        "profile": profile_to_dict(cfg.profile),
        "laws": [law.value for law in cfg.laws],
        "eps_list": list(cfg.eps_list),
        "sweep": {"mode": cfg.sweep_mode, "sample_times": list(cfg.sample_times)},
        "z_levels": list(cfg.z_levels),
        "output_dir": cfg.output_dir,
    }


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2)
