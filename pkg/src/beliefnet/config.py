"""Simulation parameters and their on-disk form.

Config documents are YAML (JSON is valid YAML) with these keys::

    h: 0.5            # negativity tolerance
    u: 2              # edges carried by an input
    e: 10             # time steps per cycle
    f_forget: 1       # edges forgotten per cycle
    n_points: 10000
    fitness: rnd      # a number, or "rnd" for uniform [0, 1]
    sign_counts: [1, 1, 1]   # (a, b, c), or "rnd" for three uniform draws
    overrides:
      - {ordinal: 0, fitness: 3, sign_counts: [1, 1, 1], e: 10}
    seed: 7
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import yaml

from .network import ConfigurationError

log = logging.getLogger(__name__)

RND = "rnd"

FitnessSource = Union[float, str]
SignCountsSource = Union[tuple[float, float, float], str]


def _fitness_source(value: Any, where: str) -> FitnessSource:
    if isinstance(value, str):
        if value.lower() != RND:
            raise ConfigurationError(f"{where}: expected a number or 'rnd', got {value!r}")
        return RND
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{where}: expected a number or 'rnd', got {value!r}") from None
    if not (f >= 0 and math.isfinite(f)):
        raise ConfigurationError(f"{where}: fitness must be >= 0, got {f}")
    return f


def _sign_counts_source(value: Any, where: str) -> SignCountsSource:
    if isinstance(value, str):
        if value.lower() != RND:
            raise ConfigurationError(f"{where}: expected [a, b, c] or 'rnd', got {value!r}")
        return RND
    try:
        a, b, c = (float(x) for x in value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{where}: expected [a, b, c] or 'rnd', got {value!r}") from None
    if min(a, b, c) < 0 or not a + b + c > 0:
        raise ConfigurationError(f"{where}: sign counts must be >= 0 with a positive sum, got {value!r}")
    return (a, b, c)


@dataclass(frozen=True)
class Override:
    """Per-ordinal replacement of input attributes and/or time budget."""

    ordinal: int
    fitness: FitnessSource | None = None
    sign_counts: SignCountsSource | None = None
    e: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "Override":
        unknown = set(d) - {"ordinal", "fitness", "sign_counts", "e"}
        if unknown:
            raise ConfigurationError(f"override: unknown keys {sorted(unknown)}")
        if "ordinal" not in d:
            raise ConfigurationError("override: 'ordinal' is required")
        return cls(
            ordinal=int(d["ordinal"]),
            fitness=None if d.get("fitness") is None else _fitness_source(d["fitness"], "override.fitness"),
            sign_counts=None if d.get("sign_counts") is None else _sign_counts_source(d["sign_counts"], "override.sign_counts"),
            e=None if d.get("e") is None else int(d["e"]),
        )

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"ordinal": self.ordinal}
        if self.fitness is not None:
            out["fitness"] = self.fitness
        if self.sign_counts is not None:
            out["sign_counts"] = self.sign_counts if self.sign_counts == RND else list(self.sign_counts)
        if self.e is not None:
            out["e"] = self.e
        return out


@dataclass(frozen=True)
class SimConfig:
    h: float = 0.5
    u: int = 2
    e: int = 10
    f_forget: int = 1
    n_points: int = 1000
    fitness: FitnessSource = 1.0
    sign_counts: SignCountsSource = (1.0, 1.0, 1.0)
    overrides: tuple[Override, ...] = ()
    seed: int = 0
    # ordinal of the first input; nonzero when growing an existing network
    first_ordinal: int = field(default=0, compare=True)

    def validate(self) -> "SimConfig":
        if not 0.0 <= self.h <= 1.0:
            raise ConfigurationError(f"h must lie in [0, 1], got {self.h}")
        if self.u < 1:
            raise ConfigurationError(f"u must be a positive integer, got {self.u}")
        if self.e < 1:
            raise ConfigurationError(f"e must be a positive integer, got {self.e}")
        if self.f_forget < 0:
            raise ConfigurationError(f"f_forget must be >= 0, got {self.f_forget}")
        if self.n_points < 1:
            raise ConfigurationError(f"n_points must be a positive integer, got {self.n_points}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        _fitness_source(self.fitness, "fitness")
        _sign_counts_source(self.sign_counts, "sign_counts")
        last = self.first_ordinal + self.n_points
        seen = set()
        for ov in self.overrides:
            if not self.first_ordinal <= ov.ordinal < last:
                raise ConfigurationError(f"override ordinal {ov.ordinal} outside [{self.first_ordinal}, {last})")
            if ov.ordinal in seen:
                raise ConfigurationError(f"duplicate override for ordinal {ov.ordinal}")
            seen.add(ov.ordinal)
            if ov.e is not None and ov.e < 1:
                raise ConfigurationError(f"override e must be positive, got {ov.e}")
        big = [f for f in [self.fitness, *(o.fitness for o in self.overrides)] if isinstance(f, float) and f > 1.0]
        if big:
            log.info("fitness values above 1 in use: %s", big)
        return self

    def override_map(self) -> dict[int, Override]:
        return {o.ordinal: o for o in self.overrides}

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kw: dict[str, Any] = {}
        try:
            for key in ("h",):
                if key in d:
                    kw[key] = float(d[key])
            for key in ("u", "e", "f_forget", "n_points", "seed", "first_ordinal"):
                if key in d:
                    kw[key] = int(d[key])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad numeric value: {exc}") from None
        if "fitness" in d:
            kw["fitness"] = _fitness_source(d["fitness"], "fitness")
        if "sign_counts" in d:
            kw["sign_counts"] = _sign_counts_source(d["sign_counts"], "sign_counts")
        if "overrides" in d and d["overrides"]:
            if not isinstance(d["overrides"], list):
                raise ConfigurationError("overrides must be a list")
            kw["overrides"] = tuple(Override.from_dict(o) for o in d["overrides"])
        return cls(**kw).validate()

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "u": self.u,
            "e": self.e,
            "f_forget": self.f_forget,
            "n_points": self.n_points,
            "fitness": self.fitness,
            "sign_counts": self.sign_counts if self.sign_counts == RND else list(self.sign_counts),
            "overrides": [o.to_dict() for o in self.overrides],
            "seed": self.seed,
            "first_ordinal": self.first_ordinal,
        }


def parse_assignment(text: str) -> tuple[str, Any]:
    """Split ``key=value``; the value is parsed as a YAML scalar or list."""
    if "=" not in text:
        raise ConfigurationError(f"override {text!r} is not of the form key=value")
    key, _, raw = text.partition("=")
    key = key.strip()
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse value for {key}: {exc}") from None
    return key, value


def load_config(path: str | Path, assignments: list[str] = ()) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigurationError(f"config {path} must be a mapping")
    known = {f.name for f in dataclasses.fields(SimConfig)}
    for item in assignments:
        key, value = parse_assignment(item)
        if key not in known:
            raise ConfigurationError(f"unknown config key in --set: {key}")
        doc[key] = value
    return SimConfig.from_dict(doc)
