"""Run configuration: one JSON object plus command-line overrides (flags win)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigurationError, FilterError
from .filters import DEFAULT_FILTER, load_filter

# tolerances used by the acceptance suite; any of them may be overridden
DEFAULT_TOLERANCES = {
    "reconstruction": 1e-10,
    "gram": 1e-8,
    "moment": 1e-8,
    "orthonormality": 1e-12,
    "split": 1e-10,
    "chain": 1e-10,
    "cancellation": 1e-8,
    "cross_mean": 1e-8,
    "luxemburg_oracle": 1e-6,
    "homogeneity": 1e-8,
    "stability_factor": 2.0,
    "atom_reconstruction": 1e-12,
    "atom_split": 1e-10,
    "gamma": 1e-10,
    "riesz_identity": 1e-8,
    "integral_FG": 1e-8,
    "hilbert": 1e-10,
}


@dataclass
class RunConfig:
    filter: str = DEFAULT_FILTER
    J: int = 10
    J2: int = 7
    j0: int = 0
    dims: int = 1
    origin: float = 0.0
    side: float = 1.0
    seed: int = 20240917
    corpus_size: int = 0
    allow_haar: bool = False
    filter_perturbation: float = 0.0
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            filt = load_filter(self.filter)
        except FilterError as exc:
            raise ConfigurationError(str(exc)) from exc
        if filt.name == "haar" and not self.allow_haar:
            raise ConfigurationError("haar violates the moment condition; set allow_haar to use it")
        if self.dims not in (1, 2):
            raise ConfigurationError(f"dims must be 1 or 2, got {self.dims}")
        for name in ("J", "J2", "j0", "corpus_size"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise ConfigurationError(f"{name} must be an integer")
        if not 0 <= self.j0 < min(self.J, self.J2):
            raise ConfigurationError("need 0 <= j0 < J")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigurationError(f"unknown tolerance keys: {sorted(unknown)}")
        if not self.side > 0:
            raise ConfigurationError("side must be positive")

    def tol(self, name):
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    @classmethod
    def from_dict(cls, data: dict, **overrides):
        if not isinstance(data, dict):
            raise ConfigurationError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        merged = dict(data)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(merged) - known
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**merged)

    @classmethod
    def load(cls, path=None, **overrides):
        data = {}
        if path is not None:
            try:
                with open(path) as fh:
                    data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data, **overrides)

    def to_dict(self):
        return asdict(self)
