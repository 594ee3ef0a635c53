"""Scenario configuration: strict JSON with recorded defaults.

Unknown keys are rejected everywhere; every error message carries the
path of the offending key.  The parsed configuration echoes all applied
defaults so the run manifest fully determines the scenario.
"""

from __future__ import annotations

import importlib.resources
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .master import IntegratorConfig

MODEL_KINDS = ("kerr", "chi2", "chi2-dispersive", "tpa", "qubit-limit")
KINDS = MODEL_KINDS + ("compare", "sweep", "wigner", "nongauss")
OBSERVABLES = ("pop0", "pop1", "leakage", "n_expect", "trace_err")

# per-family parameter schema: name -> (required, default)
_PARAMS = {
    "kerr": {
        "chi": (True, None),
        "kappa_a1": (True, None),
        "alpha": (True, None),
        "delta": (False, 0.0),
        "kappa_a2": (False, 0.0),
    },
    "chi2": {
        "g": (True, None),
        "kappa_a1": (True, None),
        "kappa_b": (True, None),
        "alpha": (True, None),
        "delta": (False, 0.0),
        "kappa_a2": (False, 0.0),
    },
    "chi2-dispersive": {
        "g": (True, None),
        "delta_b": (True, None),
        "kappa_a1": (True, None),
        "kappa_b": (True, None),
        "alpha": (True, None),
        "delta": (False, 0.0),
        "kappa_a2": (False, 0.0),
    },
    "tpa": {
        "gamma": (True, None),
        "kappa_a1": (True, None),
        "alpha": (True, None),
        "delta": (False, 0.0),
        "kappa_a2": (False, 0.0),
    },
    "qubit-limit": {
        "kappa_a1": (True, None),
        "alpha": (True, None),
        "delta": (False, 0.0),
        "kappa_a2": (False, 0.0),
    },
}

_RATE_KEYS = ("kappa_a1", "kappa_a2", "kappa_b", "gamma")

_INTEGRATOR_DEFAULTS = {
    "method": "adaptive-RK45",
    "rtol": 1e-8,
    "atol": 1e-10,
    "dt": 1e-3,
    "t_end": 2.0,
    "grid_points": 401,
    "checkpoint_stride": 0,
}

_GRID_DEFAULTS = {"xmax": 4.0, "pmax": 4.0, "nx": 101, "np": 101}


def default_dims(family: str, params: dict) -> tuple[int, ...]:
    if family in ("chi2", "chi2-dispersive"):
        return (10, 5)
    if family == "qubit-limit":
        return (2,)
    if family == "tpa":
        return (30,) if params.get("gamma", 0.0) >= 8.0 else (60,)
    return (15,)


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    family: str
    params: dict
    dims: tuple[int, ...]
    integrator: IntegratorConfig
    observables: tuple[str, ...]
    basename: str
    observable: str = "pop1"
    parameter: str | None = None
    values: tuple[float, ...] | None = None
    dims_per_value: tuple[tuple[int, ...], ...] | None = None
    steady_dims_per_value: tuple[tuple[int, ...], ...] | None = None
    include_steady: bool = True
    t_snapshot: float | str | None = None
    grid: dict = field(default_factory=dict)
    echo: dict = field(default_factory=dict)


class _Walker:
    """Dict reader that tracks its path and rejects unknown keys."""

    def __init__(self, data: dict, path: str = ""):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or '<root>'}: expected an object")
        self.data = data
        self.path = path
        self.seen = set()

    def _qual(self, key):
        return f"{self.path}.{key}" if self.path else key

    def take(self, key, required=False, default=None, kind=None):
        self.seen.add(key)
        if key not in self.data:
            if required:
                raise ConfigError(f"{self._qual(key)}: missing required key")
            return default
        value = self.data[key]
        if kind == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{self._qual(key)}: expected a number")
            value = float(value)
        elif kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{self._qual(key)}: expected an integer")
        elif kind == "str":
            if not isinstance(value, str):
                raise ConfigError(f"{self._qual(key)}: expected a string")
        elif kind == "bool":
            if not isinstance(value, bool):
                raise ConfigError(f"{self._qual(key)}: expected a boolean")
        elif kind == "list":
            if not isinstance(value, list):
                raise ConfigError(f"{self._qual(key)}: expected a list")
        elif kind == "dict":
            if not isinstance(value, dict):
                raise ConfigError(f"{self._qual(key)}: expected an object")
        return value

    def sub(self, key, required=False) -> "_Walker | None":
        raw = self.take(key, required=required, kind="dict")
        if raw is None:
            return None
        return _Walker(raw, self._qual(key))

    def finish(self):
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise ConfigError(f"{self._qual(unknown[0])}: unknown key")


def _parse_params(walker: _Walker | None, family: str, parent_path: str,
                  skip: tuple[str, ...] = ()) -> dict:
    schema = _PARAMS[family]
    if walker is None:
        missing = [k for k, (req, _) in schema.items() if req and k not in skip]
        if missing:
            raise ConfigError(
                f"{parent_path}params: missing required keys {', '.join(sorted(missing))}"
            )
        walker = _Walker({}, parent_path + "params")
    out = {}
    for key, (required, default) in schema.items():
        if key in skip:
            walker.seen.add(key)
            if key in walker.data:
                raise ConfigError(
                    f"{walker._qual(key)}: swept parameter must not appear in params"
                )
            continue
        value = walker.take(key, required=required, default=default, kind="number")
        if key in _RATE_KEYS and value is not None and value < 0:
            raise ConfigError(f"{walker._qual(key)}: rate must be nonnegative")
        out[key] = value
    walker.finish()
    return out


def _parse_dims(walker: _Walker, key: str, family: str, params: dict,
                required_len: int | None = None):
    raw = walker.take(key, kind="list")
    if raw is None:
        return default_dims(family, params)
    if not raw or any(isinstance(d, bool) or not isinstance(d, int) or d < 2 for d in raw):
        raise ConfigError(f"{walker._qual(key)}: expected a list of integers >= 2")
    n_modes = 2 if family in ("chi2", "chi2-dispersive") else 1
    if len(raw) != (required_len or n_modes):
        raise ConfigError(
            f"{walker._qual(key)}: expected {required_len or n_modes} mode dimension(s)"
        )
    if family == "qubit-limit" and tuple(raw) != (2,):
        raise ConfigError(f"{walker._qual(key)}: the two-level model is fixed at [2]")
    return tuple(raw)


def _parse_integrator(walker: _Walker | None, path: str) -> tuple[IntegratorConfig, dict]:
    values = dict(_INTEGRATOR_DEFAULTS)
    if walker is not None:
        values["method"] = walker.take("method", default=values["method"], kind="str")
        for key in ("rtol", "atol", "dt", "t_end"):
            values[key] = walker.take(key, default=values[key], kind="number")
        for key in ("grid_points", "checkpoint_stride"):
            values[key] = walker.take(key, default=values[key], kind="int")
        walker.finish()
    if values["method"] not in ("adaptive-RK45", "fixed-RK4"):
        raise ConfigError(f"{path}method: unknown integrator method {values['method']!r}")
    try:
        cfg = IntegratorConfig(
            t_end=values["t_end"],
            method=values["method"],
            rtol=values["rtol"],
            atol=values["atol"],
            dt=values["dt"],
            grid_points=values["grid_points"],
            checkpoint_stride=values["checkpoint_stride"],
        )
    except Exception as exc:
        raise ConfigError(f"{path.rstrip('.')}: {exc}") from exc
    return cfg, values


def _parse_observables(walker: _Walker):
    raw = walker.take("observables", kind="list")
    if raw is None:
        return tuple(OBSERVABLES)
    for name in raw:
        if name not in OBSERVABLES:
            raise ConfigError(f"observables: unknown observable {name!r}")
    if not raw:
        raise ConfigError("observables: must not be empty")
    return tuple(raw)


def bundled_figure(name: str) -> Path:
    """Path of a bundled figure config, e.g. "fig1a"."""
    fname = name if name.endswith(".json") else name + ".json"
    p = importlib.resources.files("nlcavity") / "figures" / fname
    if not p.is_file():
        raise ConfigError(f"no bundled figure config named {name!r}")
    return Path(str(p))


def list_bundled_figures():
    root = importlib.resources.files("nlcavity") / "figures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def parse_config(source: str) -> ScenarioConfig:
    """Parse a scenario from a JSON file path, a literal JSON string, or
    the name of a bundled figure config."""
    text = source
    if not source.lstrip().startswith("{"):
        if os.path.exists(source):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        elif os.sep not in source and source.replace(".json", "") in list_bundled_figures():
            text = bundled_figure(source).read_text(encoding="utf-8")
        else:
            raise ConfigError(f"config file not found: {source}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return parse_config_dict(data)


def parse_config_dict(data: dict) -> ScenarioConfig:
    root = _Walker(data)
    kind = root.take("kind", required=True, kind="str")
    if kind not in KINDS:
        raise ConfigError(f"kind: unknown scenario kind {kind!r}; pick from {KINDS}")

    observable = "pop1"
    parameter = None
    values = None
    dims_per_value = None
    steady_dims_per_value = None
    include_steady = True
    t_snapshot = None
    grid = {}

    if kind in MODEL_KINDS:
        family = kind
    else:
        family = root.take("family", required=True, kind="str")
        allowed = MODEL_KINDS if kind in ("compare", "wigner") else ("kerr", "tpa")
        if family not in allowed:
            raise ConfigError(f"family: {family!r} not supported for kind {kind!r}")

    if kind in ("sweep", "nongauss"):
        parameter = "chi" if family == "kerr" else "gamma"
        raw_values = root.take("values", required=True, kind="list")
        if not raw_values or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw_values
        ):
            raise ConfigError("values: expected a nonempty list of numbers")
        if parameter == "gamma" and any(v < 0 for v in raw_values):
            raise ConfigError("values: rate must be nonnegative")
        values = tuple(float(v) for v in raw_values)
        params = _parse_params(root.sub("params"), family, "", skip=(parameter,))
        raw_dpv = root.take("dims_per_value", kind="list")
        if raw_dpv is not None:
            if len(raw_dpv) != len(values):
                raise ConfigError("dims_per_value: length must match values")
            dims_per_value = tuple(
                _parse_dims(_Walker({"dims": d}, f"dims_per_value[{i}]"), "dims", family,
                            params)
                for i, d in enumerate(raw_dpv)
            )
        dims = dims_per_value[0] if dims_per_value else default_dims(
            family, dict(params, **{parameter: values[0]})
        )
    else:
        params = _parse_params(root.sub("params"), family, "")
        dims = _parse_dims(root, "dims", family, params)

    if kind == "sweep":
        raw_sdpv = root.take("steady_dims_per_value", kind="list")
        if raw_sdpv is not None:
            if len(raw_sdpv) != len(values):
                raise ConfigError("steady_dims_per_value: length must match values")
            steady_dims_per_value = tuple(
                _parse_dims(_Walker({"dims": d}, f"steady_dims_per_value[{i}]"), "dims",
                            family, params)
                for i, d in enumerate(raw_sdpv)
            )
        include_steady = root.take("include_steady", default=True, kind="bool")

    if kind in ("compare", "sweep"):
        observable = root.take("observable", default="pop1", kind="str")
        if observable not in ("pop0", "pop1", "leakage", "n_expect"):
            raise ConfigError(f"observable: unknown observable {observable!r}")

    if kind == "wigner":
        snap = root.take("t_snapshot", required=True)
        if isinstance(snap, str):
            if snap != "delta_b_peak":
                raise ConfigError(
                    't_snapshot: expected a number or the string "delta_b_peak"'
                )
            t_snapshot = snap
        elif isinstance(snap, bool) or not isinstance(snap, (int, float)) or snap < 0:
            raise ConfigError("t_snapshot: expected a nonnegative number")
        else:
            t_snapshot = float(snap)
        gw = root.sub("grid")
        grid = dict(_GRID_DEFAULTS)
        if gw is not None:
            for key in ("xmax", "pmax"):
                grid[key] = gw.take(key, default=grid[key], kind="number")
                if grid[key] <= 0:
                    raise ConfigError(f"grid.{key}: must be positive")
            for key in ("nx", "np"):
                grid[key] = gw.take(key, default=grid[key], kind="int")
                if grid[key] < 2:
                    raise ConfigError(f"grid.{key}: must be >= 2")
            gw.finish()

    integrator, integ_echo = _parse_integrator(root.sub("integrator"), "integrator.")
    observables = _parse_observables(root)
    out = root.sub("output")
    basename = kind
    if out is not None:
        basename = out.take("basename", default=kind, kind="str")
        out.finish()
    root.finish()

    if kind == "wigner" and isinstance(t_snapshot, float) and t_snapshot > integrator.t_end:
        raise ConfigError("t_snapshot: beyond integrator.t_end")

    echo = {
        "kind": kind,
        "family": family,
        "params": dict(sorted(params.items())),
        "dims": list(dims),
        "integrator": integ_echo,
        "observables": list(observables),
        "output": {"basename": basename},
    }
    if values is not None:
        echo["parameter"] = parameter
        echo["values"] = list(values)
        if dims_per_value:
            echo["dims_per_value"] = [list(d) for d in dims_per_value]
    if kind == "sweep":
        echo["include_steady"] = include_steady
        if steady_dims_per_value:
            echo["steady_dims_per_value"] = [list(d) for d in steady_dims_per_value]
    if kind in ("compare", "sweep"):
        echo["observable"] = observable
    if kind == "wigner":
        echo["t_snapshot"] = t_snapshot
        echo["grid"] = grid

    return ScenarioConfig(
        kind=kind,
        family=family,
        params=params,
        dims=dims,
        integrator=integrator,
        observables=observables,
        basename=basename,
        observable=observable,
        parameter=parameter,
        values=values,
        dims_per_value=dims_per_value,
        steady_dims_per_value=steady_dims_per_value,
        include_steady=include_steady,
        t_snapshot=t_snapshot,
        grid=grid,
        echo=echo,
    )
