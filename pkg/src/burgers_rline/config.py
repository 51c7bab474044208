"""Run configuration: a flat JSON object, every field overridable from the CLI."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .assembly import SchemeParams
from .errors import ConfigError


@dataclass
class SimulationConfig:
    nu: float = 1.0
    n_vertices: int = 401
    dt: float = 1e-3
    theta: float = 0.5
    t_final: float = 0.05
    l0: float | None = None
    snapshot_times: list = field(default_factory=list)
    norm_cadence_steps: int = 10
    probe_points: list = field(default_factory=list)
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not (isinstance(self.nu, (int, float)) and self.nu > 0):
            raise ConfigError(f"nu must be positive, got {self.nu!r}")
        if not (isinstance(self.dt, (int, float)) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta!r}")
        if not self.t_final >= 0:
            raise ConfigError(f"t_final must be nonnegative, got {self.t_final!r}")
        if self.l0 is not None and not self.l0 > 0:
            raise ConfigError(f"l0 must be positive, got {self.l0!r}")
        if int(self.norm_cadence_steps) != self.norm_cadence_steps or self.norm_cadence_steps < 1:
            raise ConfigError("norm_cadence_steps must be a positive integer")
        n = self.n_vertices
        if isinstance(n, bool) or int(n) != n or n < 3 or n % 2 == 0:
            raise ConfigError(f"n_vertices must be an odd integer >= 3, got {n!r}")
        for t in self.snapshot_times:
            if not 0 <= t <= self.t_final:
                raise ConfigError(f"snapshot time {t} outside [0, t_final]")
            k = round(t / self.dt)
            if abs(k * self.dt - t) > 1e-12 * max(1.0, t):
                raise ConfigError(f"snapshot time {t} is not a multiple of dt={self.dt}")
        for x in self.probe_points:
            if not math.isfinite(x):
                raise ConfigError(f"probe point {x!r} is not finite")

    def scheme_params(self) -> SchemeParams:
        return SchemeParams(nu=self.nu, dt=self.dt, theta=self.theta)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)
