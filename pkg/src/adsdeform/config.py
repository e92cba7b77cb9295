"""Run configuration: one flat dataclass, validated, hashed canonically."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field


class ConfigError(ValueError):
    pass


# criterion tolerances; serialised into every report
TOLERANCES = {
    "group.roundtrip": 1e-8,
    "group.sigma": 1e-10,
    "metric.relative": 1e-6,
    "metric.cross": 1e-6,
    "causal.coherence": 1.0,
    "bfield.residual": 1e-4,
    "torus.exact_ulps": 8.0,
    "torus.first_order": 1e-6,
    "symsym.model": 1e-10,
    "symsym.table": 1e-6,
    "symsym.reflection": 1e-6,
    "symsym.fourth_point": 1e-10,
    "symsym.invariance": 1e-6,
    "star.trace": 1e-3,
    "star.associativity": 1e-2,
    "star.commutator_constant": 5e-3,
    "udf.kernel_invariance": 1e-6,
    "udf.covariance": 1e-3,
    "udf.z_invariance": 1e-6,
    "udf.sigma_swap": 1e-10,
    "spectral.clifford": 0.0,
    "spectral.derivation": 1e-2,
    "spectral.negative_control": 0.5,
    "spectral.dirac": 5e-2,
}


@dataclass
class RunConfig:
    theta: float = 1.0
    grid_cells: int = 6  # per axis; nodes = cells * order
    grid_order: int = 4
    grid_lo: float = -2.0
    grid_hi: float = 2.0
    mass: float = 2.0
    spin: float = 1.0
    alpha: float = 0.5  # modified Iwasawa twist for the rotating checks
    seed: int = 20240611
    n_group: int = 1000
    n_metric: int = 100
    n_causal: int = 10_000
    n_torus: int = 1000
    bfield_samples: int = 61
    bfield_range: tuple = (-3.0, 3.0)
    out: str | None = None
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not math.isfinite(self.theta) or self.theta == 0:
            raise ConfigError(f"theta must be finite and non-zero, got {self.theta}")
        if self.grid_cells * self.grid_order < 8:
            raise ConfigError(f"grid needs at least 8 nodes per axis, got {self.grid_cells * self.grid_order}")
        if self.grid_order < 1 or self.grid_cells < 1:
            raise ConfigError("grid cells and order must be positive")
        if not self.grid_lo < self.grid_hi:
            raise ConfigError("grid_lo must be below grid_hi")
        if not abs(self.alpha) < 1:
            raise ConfigError(f"|alpha| must be < 1, got {self.alpha}")
        if self.mass <= 0:
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if abs(self.spin) >= self.mass:
            raise ConfigError(f"need |J| < M for a rotating background, got J={self.spin}, M={self.mass}")
        for k in ("n_group", "n_metric", "n_causal", "n_torus", "bfield_samples"):
            if getattr(self, k) < 1:
                raise ConfigError(f"{k} must be positive")
        unknown = set(self.tolerances) - set(TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        self.bfield_range = tuple(float(x) for x in self.bfield_range)

    @classmethod
    def from_mapping(cls, data: dict) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "tolerances" in data:
            data["tolerances"] = {**TOLERANCES, **data["tolerances"]}
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    def replace(self, **kw) -> RunConfig:
        return RunConfig.from_mapping({**self.to_dict(), **kw})

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["bfield_range"] = list(self.bfield_range)
        return d

    def hash(self) -> str:
        """sha256 of the canonical JSON (output path excluded)."""
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def grid(self):
        from .symsym_p11 import Grid

        return Grid(self.grid_cells, self.grid_order, self.grid_lo, self.grid_hi)
