"""Run configuration: a YAML file validated against ``config.schema.json``.

Every section is optional; omitted values fall back to the built-in
defaults. ``decoder``, ``comms`` and ``circuit`` may name a preset. The
config path may also come from the ``FTQC_REACTION_CONFIG`` environment
variable.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .assembler import AssemblyOptions, CircuitSpec, UnitFootprint, circuit_preset
from .errors import ConfigError
from .latency import CommLatencies, DecoderModel, comm_preset, decoder_preset
from .models import ErrorFitParams, HardwareParams

ENV_VAR = "FTQC_REACTION_CONFIG"


def schema() -> dict:
    text = resources.files("ftqc_reaction").joinpath("config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class SimulateOptions:
    d: int = 31
    n_decoders: int = 64
    n_injections: int = 200
    seed: int = 0
    jitter: float = 0.0
    storage_slots: int | None = None
    surgery_lanes: int | None = None
    co_store_magic: bool = False
    surgery_grid: tuple[int, int] = (1, 6)
    background_patches: int = 0
    msf_unit: bool = False
    kernel: str = "auto"


@dataclass(frozen=True)
class FleetOptions:
    q_logical: int | None = None
    total_qubits: int = 10_000_000
    core_fraction: float = 0.9
    tiles_per_qubit: float = 2.0
    d: int = 31
    msf_uplift: float = 0.1
    n_syndrome_qubits: int | None = None  # None: half of total_qubits
    bytes_per_syndrome: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    hardware: HardwareParams = field(default_factory=HardwareParams)
    fits: ErrorFitParams = field(default_factory=ErrorFitParams)
    comms: CommLatencies = field(default_factory=CommLatencies)
    decoder: object = field(default_factory=lambda: decoder_preset("cc-asic"))
    circuit: CircuitSpec = field(default_factory=lambda: circuit_preset("fermi_hubbard"))
    objective: str = "time_optimal"
    assembly: AssemblyOptions = field(default_factory=AssemblyOptions)
    simulate: SimulateOptions = field(default_factory=SimulateOptions)
    fleet: FleetOptions = field(default_factory=FleetOptions)


def _decoder(raw):
    if isinstance(raw, str):
        return decoder_preset(raw)
    return DecoderModel(raw.get("name", "custom"), raw["alpha"], raw["beta"])


def _comms(raw):
    if isinstance(raw, str):
        return comm_preset(raw)
    raw = dict(raw)
    total = raw.pop("scale_to_us", None)
    c = CommLatencies(**raw)
    return c.scaled_to(total) if total is not None else c


def _circuit(raw):
    if isinstance(raw, str):
        return circuit_preset(raw)
    raw = dict(raw)
    base = circuit_preset(raw.pop("preset")) if "preset" in raw else None
    values = {f.name: getattr(base, f.name) for f in fields(CircuitSpec)} if base else {"name": "custom"}
    values.update(raw)
    missing = [k for k in ("q_logical", "t_count", "k_avg", "b_avg") if k not in values]
    if missing:
        raise ConfigError(f"circuit is missing {missing}")
    values["t_count"] = int(values["t_count"])
    return CircuitSpec(**values)


def _assembly(raw):
    raw = dict(raw)
    raw.pop("objective", None)
    if "footprint" in raw:
        raw["footprint"] = UnitFootprint(**raw["footprint"])
    return AssemblyOptions(**raw)


def from_dict(data: dict | None) -> RunConfig:
    """Validate ``data`` against the schema and build a :class:`RunConfig`."""
    data = data or {}
    try:
        jsonschema.validate(data, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    try:
        kw = {}
        if "hardware" in data:
            kw["hardware"] = HardwareParams(**data["hardware"])
        if "fits" in data:
            kw["fits"] = ErrorFitParams(**data["fits"])
        if "comms" in data:
            kw["comms"] = _comms(data["comms"])
        if "decoder" in data:
            kw["decoder"] = _decoder(data["decoder"])
        if "circuit" in data:
            kw["circuit"] = _circuit(data["circuit"])
        if "assembly" in data:
            kw["objective"] = data["assembly"].get("objective", "time_optimal")
            kw["assembly"] = _assembly(data["assembly"])
        if "simulate" in data:
            sim = dict(data["simulate"])
            if "surgery_grid" in sim:
                sim["surgery_grid"] = tuple(sim["surgery_grid"])
            kw["simulate"] = SimulateOptions(**sim)
        if "fleet" in data:
            kw["fleet"] = FleetOptions(**data["fleet"])
        return RunConfig(**kw)
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load(path: str | os.PathLike | None = None) -> RunConfig:
    """Load a config file; ``None`` consults ``$FTQC_REACTION_CONFIG`` then defaults."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return from_dict(data)
