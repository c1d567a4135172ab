"""Experiment configuration.

A config is a JSON document whose sections mirror the runtime objects::

    {
      "landscape": {"kind": "sharp_peak", "n": 12, "sigma": 8},
      "controller": {"kind": "elitist"},
      "ga": {"crossover_rate": 0.7, "selection": "fitness_proportional"},
      "size_policy": {"growth_factor": 2, "max_size": 4096},
      "population_size": 64,
      "budget": 1000,
      "replicas": 10,
      "seed": 1
    }

Every key is optional except ``landscape``; unknown keys are rejected.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

from ..control import ControllerKind, FixedMutation, SizePolicy
from ..errors import ConfigurationError
from ..ga import CrossoverKind, GAParams, Selection
from ..landscape import (
    DEFAULT_SAFETY_FACTOR,
    FitnessLandscape,
    LandscapeKind,
    custom_landscape,
    deceptive_trap,
    load_custom_landscape,
    royal_road,
    sharp_peak,
)

FIXED = "fixed"
FORMATS = ("csv", "json")
SEED_LIMIT = 2**64


def _check_keys(data: Any, cls, path: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigurationError(f"expected an object, got {type(data).__name__}", path or None)
    allowed = {f.name for f in fields(cls)}
    for key in data:
        if key not in allowed:
            raise ConfigurationError(f"unknown key (allowed: {', '.join(sorted(allowed))})", f"{path}.{key}" if path else key)
    return data


def _typed(value, kind, path: str):
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"expected an integer, got {value!r}", path)
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"expected a number, got {value!r}", path)
        value = float(value)
    elif kind is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"expected true or false, got {value!r}", path)
    elif kind is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"expected a string, got {value!r}", path)
    return value


@dataclass(frozen=True)
class LandscapeSpec:
    kind: str = LandscapeKind.SHARP_PEAK.value
    n: int | None = None
    sigma: float | None = None
    block: int | None = None
    path: str | None = None
    entries: dict[str, float] | None = None
    ratio_bound: float | None = None
    safety_factor: float = DEFAULT_SAFETY_FACTOR

    def build(self) -> FitnessLandscape:
        try:
            kind = LandscapeKind(self.kind)
        except ValueError:
            choices = ", ".join(k.value for k in LandscapeKind)
            raise ConfigurationError(f"unknown landscape kind {self.kind!r} (choose from {choices})", "landscape.kind") from None
        if kind is LandscapeKind.CUSTOM:
            if self.path is not None:
                if self.entries is not None:
                    raise ConfigurationError("give either path or entries, not both", "landscape.entries")
                return load_custom_landscape(self.path)
            if self.n is None or self.entries is None or self.ratio_bound is None:
                raise ConfigurationError("custom landscape needs path, or n + entries + ratio_bound", "landscape")
            return custom_landscape(self.n, self.entries, self.ratio_bound)
        if self.n is None:
            raise ConfigurationError("missing genotype length", "landscape.n")
        if kind is LandscapeKind.SHARP_PEAK:
            if self.sigma is None:
                raise ConfigurationError("missing peak height", "landscape.sigma")
            return sharp_peak(self.n, self.sigma)
        if self.block is None:
            raise ConfigurationError("missing block size", "landscape.block")
        if kind is LandscapeKind.ROYAL_ROAD:
            return royal_road(self.n, self.block)
        return deceptive_trap(self.n, self.block)

    @classmethod
    def from_dict(cls, data: Any) -> "LandscapeSpec":
        data = _check_keys(data, cls, "landscape")
        kw = {}
        for name, kind in (("kind", str), ("n", int), ("sigma", float), ("block", int), ("path", str),
                           ("ratio_bound", float), ("safety_factor", float)):
            if data.get(name) is not None:
                kw[name] = _typed(data[name], kind, f"landscape.{name}")
        if data.get("entries") is not None:
            entries = data["entries"]
            if not isinstance(entries, dict):
                raise ConfigurationError("expected an object of bitstring: fitness", "landscape.entries")
            kw["entries"] = {k: _typed(v, float, f"landscape.entries.{k}") for k, v in entries.items()}
        return cls(**kw)


@dataclass(frozen=True)
class ControllerSpec:
    kind: str = ControllerKind.ELITIST.value
    p_m: float | None = None

    def build(self) -> ControllerKind | FixedMutation:
        if self.kind == FIXED:
            if self.p_m is None:
                raise ConfigurationError("fixed mutation needs p_m", "controller.p_m")
            return FixedMutation(self.p_m)
        if self.p_m is not None:
            raise ConfigurationError("p_m is only valid for the fixed controller", "controller.p_m")
        try:
            return ControllerKind(self.kind)
        except ValueError:
            choices = ", ".join([k.value for k in ControllerKind] + [FIXED])
            raise ConfigurationError(f"unknown controller {self.kind!r} (choose from {choices})", "controller.kind") from None

    @property
    def label(self) -> str:
        return f"fixed(p_m={self.p_m!r})" if self.kind == FIXED else self.kind

    @classmethod
    def from_dict(cls, data: Any) -> "ControllerSpec":
        data = _check_keys(data, cls, "controller")
        kw = {}
        if "kind" in data:
            kw["kind"] = _typed(data["kind"], str, "controller.kind")
        if data.get("p_m") is not None:
            kw["p_m"] = _typed(data["p_m"], float, "controller.p_m")
        return cls(**kw)


@dataclass(frozen=True)
class GASpec:
    crossover_rate: float = 0.7
    selection: str = Selection.FITNESS_PROPORTIONAL.value
    tournament_size: int = 2
    crossover: str = CrossoverKind.ONE_POINT.value

    def build(self) -> GAParams:
        try:
            selection = Selection(self.selection)
        except ValueError:
            raise ConfigurationError(f"unknown selection {self.selection!r}", "ga.selection") from None
        try:
            xo = CrossoverKind(self.crossover)
        except ValueError:
            raise ConfigurationError(f"unknown crossover {self.crossover!r}", "ga.crossover") from None
        return GAParams(
            crossover_rate=self.crossover_rate,
            selection=selection,
            tournament_size=self.tournament_size,
            crossover=xo,
        )

    @classmethod
    def from_dict(cls, data: Any) -> "GASpec":
        data = _check_keys(data, cls, "ga")
        types = {"crossover_rate": float, "selection": str, "tournament_size": int, "crossover": str}
        return cls(**{k: _typed(v, types[k], f"ga.{k}") for k, v in data.items()})


def _policy_from_dict(data: Any) -> SizePolicy:
    data = _check_keys(data, SizePolicy, "size_policy")
    types = {"growth_factor": float, "max_size": int, "convergence_threshold": float}
    return SizePolicy(**{k: None if v is None else _typed(v, types[k], f"size_policy.{k}") for k, v in data.items()})


@dataclass(frozen=True)
class ExperimentConfig:
    landscape: LandscapeSpec
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    ga: GASpec = field(default_factory=GASpec)
    size_policy: SizePolicy = field(default_factory=SizePolicy)
    population_size: int = 64
    budget: int = 1000
    replicas: int = 1
    seed: int = 0
    format: str = "csv"
    stop_on_optimum: bool = True
    seed_master: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError(f"must be >= 2, got {self.population_size}", "population_size")
        if self.budget < 1:
            raise ConfigurationError(f"must be >= 1, got {self.budget}", "budget")
        if self.replicas < 1:
            raise ConfigurationError(f"must be >= 1, got {self.replicas}", "replicas")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigurationError(f"must be an unsigned 64-bit integer, got {self.seed}", "seed")
        if self.format not in FORMATS:
            raise ConfigurationError(f"must be one of {FORMATS}, got {self.format!r}", "format")
        if self.seed_master < 0:
            raise ConfigurationError(f"must be >= 0, got {self.seed_master}", "seed_master")
        # fail early on anything the sub-builders reject
        self.landscape.build()
        self.controller.build()
        self.ga.build()

    @classmethod
    def from_dict(cls, data: Any) -> "ExperimentConfig":
        data = _check_keys(data, cls, "")
        if "landscape" not in data:
            raise ConfigurationError("missing section", "landscape")
        kw: dict[str, Any] = {"landscape": LandscapeSpec.from_dict(data["landscape"])}
        if "controller" in data:
            kw["controller"] = ControllerSpec.from_dict(data["controller"])
        if "ga" in data:
            kw["ga"] = GASpec.from_dict(data["ga"])
        if "size_policy" in data:
            kw["size_policy"] = _policy_from_dict(data["size_policy"])
        for name, kind in (("population_size", int), ("budget", int), ("replicas", int), ("seed", int),
                           ("format", str), ("stop_on_optimum", bool), ("seed_master", int)):
            if name in data:
                kw[name] = _typed(data[name], kind, name)
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
    return ExperimentConfig.from_dict(data)
