"""Scenario configuration: YAML parsing, defaults, validation, unit conversion.

Files use ns, MHz and s^-1; everything is converted to SI here.  Unknown
keys, duplicate keys, missing required fields and out-of-range values
raise :class:`ConfigError` naming the dotted path of the offending field.
"""
from __future__ import annotations

import copy
import re
from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from .modulator import ModulatorPair, Open, Sinusoid, Square, TabulatedPeriodic
from .montecarlo import SimConfig
from .waveform import BiphotonSpec, GaussianLike, RectPrecursor, Tabulated

__all__ = ["ConfigError", "ScenarioConfig", "DEFAULTS", "SCENARIOS", "parse_config", "build_config",
           "dump_config"]

SCENARIOS = ("histogram", "modulation-demo", "sweep", "reconstruct", "compare", "analytic")


class ConfigError(ValueError):
    pass


def _channel(kind="open", freq_mhz=35.0):
    return {"kind": kind, "freq_mhz": freq_mhz, "phase_rad": 0.0, "duty": 0.5,
            "period_ns": None, "values": None}


DEFAULTS: dict[str, Any] = {
    "scenario": None,
    "seed": 1,
    "waveform": {
        "kind": "gaussian",
        "normalize": True,
        "gaussian": {"amplitude": 1.0, "center_ns": 300.0, "width_ns": 80.0},
        "rect_precursor": {"body_amplitude": 1.0, "body_start_ns": 50.0, "body_length_ns": 400.0,
                           "spike_amplitude": 4.0, "spike_decay_ns": 10.0},
        "tabulated": {"times_ns": None, "values": None},
    },
    "source": {"pair_rate": 325.0, "support_ns": 800.0},
    "simulation": {"duration_s": 80.0, "efficiency": 0.5, "delay_ns": 175.0},
    "modulators": {"signal": _channel(), "idler": _channel()},
    "histogram": {"bin_ns": 1.0, "start_ns": 0.0, "stop_ns": 1000.0},
    "sweep": {"f_start_mhz": 0.0, "f_stop_mhz": 30.0, "f_step_mhz": 0.25, "integration_s": 80.0,
              "slow_bin_ns": 1000.0, "origin_ns": 0.0},
    "reconstruct": {"source": "roundtrip", "trace": None, "reference": None,
                    "tau_stop_ns": 1000.0, "tau_step_ns": 1.0, "dc_strategy": "tail-mean",
                    "tail_fraction": 0.2, "static_zero": True, "subtract_delay": False,
                    "guard_ns": 20.0, "reference_duration_s": None},
    "output": {"dump_events": False},
}

# Per-scenario defaults layered over DEFAULTS before the user file.
SCENARIO_DEFAULTS: dict[str, dict] = {
    "modulation-demo": {"modulators": {"signal": {"kind": "sinusoid"}, "idler": {"kind": "sinusoid"}}},
    "sweep": {"modulators": {"signal": {"kind": "sinusoid"}, "idler": {"kind": "sinusoid"}}},
    "compare": {"modulators": {"signal": {"kind": "sinusoid"}, "idler": {"kind": "sinusoid"}}},
    "reconstruct": {"modulators": {"signal": {"kind": "sinusoid"}, "idler": {"kind": "sinusoid"}}},
    "analytic": {"modulators": {"signal": {"kind": "sinusoid"}, "idler": {"kind": "sinusoid"}}},
}

# Leaves that may hold a nested value (lists) rather than a scalar.
_LIST_LEAVES = {"values", "times_ns"}


class _UniqueKeyLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (line {key_node.start_mark.line + 1})")
        seen.add(key)
    return loader.construct_mapping(node, deep)


_UniqueKeyLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)
# accept 1e6 / 2.5e-9 style floats, which plain YAML 1.1 reads as strings
_UniqueKeyLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                    |[0-9][0-9_]*[eE][-+]?[0-9]+
                    |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                    |[-+]?\.(?:inf|Inf|INF)
                    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


@dataclass(eq=False)
class ScenarioConfig:
    """Validated scenario with SI-unit objects ready to run."""

    scenario: str
    seed: int
    sim: SimConfig
    histogram: dict
    sweep: dict
    reconstruct: dict
    dump_events: bool
    resolved: dict

    @property
    def spec(self) -> BiphotonSpec:
        return self.sim.source

    @property
    def f_grid(self) -> np.ndarray:
        s = self.sweep
        n = int(round((s["f_stop"] - s["f_start"]) / s["f_step"]))
        return s["f_start"] + s["f_step"] * np.arange(n + 1)

    @property
    def tau_grid(self) -> np.ndarray:
        r = self.reconstruct
        n = int(round(r["tau_stop"] / r["tau_step"]))
        return r["tau_step"] * np.arange(n)


def _merge(base: dict, override: dict, path: str = "") -> dict:
    if not isinstance(override, dict):
        raise ConfigError(f"{path.rstrip('.') or 'config'}: expected a mapping")
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"{where}: unknown field")
        if isinstance(base[key], dict):
            out[key] = _merge(base[key], value, where + ".")
        else:
            if isinstance(value, dict) or (isinstance(value, list) and key not in _LIST_LEAVES):
                raise ConfigError(f"{where}: expected a scalar value")
            out[key] = value
    return out


def _get(cfg: dict, path: str):
    node = cfg
    for part in path.split("."):
        node = node[part]
    return node


def _num(cfg, path, lo=None, hi=None, lo_open=False, hi_open=False, required=True):
    value = _get(cfg, path)
    if value is None:
        if required:
            raise ConfigError(f"{path}: missing required field")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    bad_lo = lo is not None and (value <= lo if lo_open else value < lo)
    bad_hi = hi is not None and (value >= hi if hi_open else value > hi)
    if bad_lo or bad_hi or not np.isfinite(value):
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        lo_txt = "-inf" if lo is None else f"{lo:g}"
        hi_txt = "inf" if hi is None else f"{hi:g}"
        rng = f"{lb}{lo_txt}, {hi_txt}{rb}"
        raise ConfigError(f"{path}: value {value:g} out of range, valid range {rng}")
    return value


def _choice(cfg, path, options):
    value = _get(cfg, path)
    if value not in options:
        raise ConfigError(f"{path}: expected one of {', '.join(map(str, options))}, got {value!r}")
    return value


def _flag(cfg, path):
    value = _get(cfg, path)
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true or false, got {value!r}")
    return value


def _array(cfg, path, min_len=2):
    value = _get(cfg, path)
    if value is None:
        raise ConfigError(f"{path}: missing required field")
    if not isinstance(value, list) or len(value) < min_len:
        raise ConfigError(f"{path}: expected a list of at least {min_len} numbers")
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        raise ConfigError(f"{path}: expected a list of numbers")
    return np.asarray(value, dtype=np.float64)


def _waveform(cfg):
    kind = _choice(cfg, "waveform.kind", ("gaussian", "rect_precursor", "tabulated"))
    try:
        if kind == "gaussian":
            return GaussianLike(_num(cfg, "waveform.gaussian.amplitude", lo=0),
                                _num(cfg, "waveform.gaussian.center_ns") * 1e-9,
                                _num(cfg, "waveform.gaussian.width_ns", lo=0, lo_open=True) * 1e-9)
        if kind == "rect_precursor":
            p = "waveform.rect_precursor."
            return RectPrecursor(_num(cfg, p + "body_amplitude", lo=0),
                                 _num(cfg, p + "body_start_ns", lo=0) * 1e-9,
                                 _num(cfg, p + "body_length_ns", lo=0, lo_open=True) * 1e-9,
                                 _num(cfg, p + "spike_amplitude", lo=0),
                                 _num(cfg, p + "spike_decay_ns", lo=0, lo_open=True) * 1e-9)
        times = _array(cfg, "waveform.tabulated.times_ns") * 1e-9
        values = _array(cfg, "waveform.tabulated.values")
        if times.shape != values.shape:
            raise ConfigError("waveform.tabulated.values: length differs from times_ns")
        return Tabulated(times, values)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"waveform.{kind}: {exc}") from None


def _channel_model(cfg, name):
    p = f"modulators.{name}."
    kind = _choice(cfg, p + "kind", ("open", "sinusoid", "square", "tabulated"))
    if kind == "open":
        return Open()
    if kind == "sinusoid":
        return Sinusoid(_num(cfg, p + "freq_mhz", lo=0) * 1e6, _num(cfg, p + "phase_rad"))
    if kind == "square":
        return Square(_num(cfg, p + "freq_mhz", lo=0, lo_open=True) * 1e6, _num(cfg, p + "phase_rad"),
                      _num(cfg, p + "duty", lo=0, hi=1, lo_open=True, hi_open=True))
    values = _array(cfg, p + "values")
    if np.any(values < 0) or np.any(values > 1):
        raise ConfigError(f"{p}values: intensity samples must lie in [0, 1]")
    return TabulatedPeriodic(_num(cfg, p + "period_ns", lo=0, lo_open=True) * 1e-9, values)


def build_config(raw: dict | None = None, scenario: str | None = None) -> ScenarioConfig:
    """Merge ``raw`` over the defaults, validate, and convert to SI objects."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a mapping at the top level")
    file_scenario = raw.get("scenario")
    if scenario is None:
        scenario = file_scenario
    elif file_scenario is not None and file_scenario != scenario:
        raise ConfigError(f"scenario: file declares {file_scenario!r} but {scenario!r} was requested")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: expected one of {', '.join(SCENARIOS)}, got {scenario!r}")
    base = _merge(DEFAULTS, SCENARIO_DEFAULTS.get(scenario, {}))
    cfg = _merge(base, raw)
    cfg["scenario"] = scenario

    seed = _get(cfg, "seed")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed: expected an unsigned 64-bit integer, got {seed!r}")

    waveform = _waveform(cfg)
    try:
        spec = BiphotonSpec(waveform, _num(cfg, "source.pair_rate", lo=0),
                            _num(cfg, "source.support_ns", lo=0, lo_open=True) * 1e-9)
        if _flag(cfg, "waveform.normalize"):
            spec = spec.normalized()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"source: {exc}") from None

    pair = ModulatorPair(_channel_model(cfg, "signal"), _channel_model(cfg, "idler"))
    sim = SimConfig(spec, pair,
                    duration=_num(cfg, "simulation.duration_s", lo=0, lo_open=True),
                    efficiency=_num(cfg, "simulation.efficiency", lo=0, hi=1),
                    delay=_num(cfg, "simulation.delay_ns", lo=0) * 1e-9,
                    seed=seed)

    hist = {"width": _num(cfg, "histogram.bin_ns", lo=0, lo_open=True) * 1e-9,
            "start": _num(cfg, "histogram.start_ns") * 1e-9,
            "stop": _num(cfg, "histogram.stop_ns") * 1e-9}
    if hist["stop"] - hist["start"] < hist["width"]:
        raise ConfigError("histogram.stop_ns: range must span at least one bin")

    sweep = {"f_start": _num(cfg, "sweep.f_start_mhz", lo=0) * 1e6,
             "f_stop": _num(cfg, "sweep.f_stop_mhz", lo=0) * 1e6,
             "f_step": _num(cfg, "sweep.f_step_mhz", lo=0, lo_open=True) * 1e6,
             "integration": _num(cfg, "sweep.integration_s", lo=0, lo_open=True),
             "slow_width": _num(cfg, "sweep.slow_bin_ns", lo=0, lo_open=True) * 1e-9,
             "origin": _num(cfg, "sweep.origin_ns") * 1e-9}
    if sweep["f_stop"] <= sweep["f_start"]:
        raise ConfigError("sweep.f_stop_mhz: must exceed f_start_mhz")

    rec = {"source": _choice(cfg, "reconstruct.source", ("roundtrip", "simulate", "files")),
           "trace": _get(cfg, "reconstruct.trace"),
           "reference": _get(cfg, "reconstruct.reference"),
           "tau_stop": _num(cfg, "reconstruct.tau_stop_ns", lo=0, lo_open=True) * 1e-9,
           "tau_step": _num(cfg, "reconstruct.tau_step_ns", lo=0, lo_open=True) * 1e-9,
           "dc_strategy": _choice(cfg, "reconstruct.dc_strategy", ("tail-mean", "global-mean")),
           "tail_fraction": _num(cfg, "reconstruct.tail_fraction", lo=0, hi=1, lo_open=True),
           "static_zero": _flag(cfg, "reconstruct.static_zero"),
           "subtract_delay": _flag(cfg, "reconstruct.subtract_delay"),
           "guard": _num(cfg, "reconstruct.guard_ns", lo=0) * 1e-9,
           "reference_duration": _num(cfg, "reconstruct.reference_duration_s", lo=0, lo_open=True,
                                      required=False)}
    for key in ("trace", "reference"):
        if rec[key] is not None and not isinstance(rec[key], str):
            raise ConfigError(f"reconstruct.{key}: expected a file path")
    if rec["source"] == "files":
        if rec["trace"] is None:
            raise ConfigError("reconstruct.trace: missing required field")
        if scenario == "compare" and rec["reference"] is None:
            raise ConfigError("reconstruct.reference: missing required field")

    if scenario in ("sweep",) or (scenario in ("compare", "reconstruct") and rec["source"] == "simulate"):
        m1, m2 = pair.m1, pair.m2
        if not (isinstance(m1, Sinusoid) and isinstance(m2, Sinusoid) and m1.phase == m2.phase):
            raise ConfigError("modulators: a sweep needs sinusoid modulators with a common phase_rad")

    return ScenarioConfig(scenario, seed, sim, hist, sweep, rec, _flag(cfg, "output.dump_events"), cfg)


def _overlay(raw: dict, overrides: dict) -> dict:
    out = dict(raw)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _overlay(out[key], value)
        else:
            out[key] = value
    return out


def parse_config(text: str | None, scenario: str | None = None,
                 overrides: dict | None = None) -> ScenarioConfig:
    """Parse YAML ``text`` (``None`` or empty means all defaults) and validate.

    ``overrides`` (same nesting and units as the file) is layered on top,
    which is how command-line flags such as ``--seed`` are applied.
    """
    if text is None or not text.strip():
        raw = {}
    else:
        try:
            raw = yaml.load(text, Loader=_UniqueKeyLoader)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config: invalid YAML: {exc}") from None
        raw = {} if raw is None else raw
    if overrides:
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a mapping at the top level")
        raw = _overlay(raw, overrides)
    return build_config(raw, scenario)


def dump_config(config: ScenarioConfig) -> str:
    """Resolved configuration (file units) as deterministic YAML."""
    return yaml.safe_dump(config.resolved, sort_keys=True, default_flow_style=False)
