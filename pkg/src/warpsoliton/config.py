from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

CACHE_ENV = "WARP_SOLITON_CACHE"


@dataclass(frozen=True)
class SolverConfig:
    """Resolutions, tolerances and iteration limits shared by all solvers."""

    n_max: int = 25
    n_max_s1: int = 40
    n_max_refined: int = 60
    grid_points: int = 4000
    R_max: float = 40.0
    newton_tol: float = 1e-12
    newton_max_iter: int = 40
    fixedpoint_tol: float = 1e-10
    fixedpoint_max_iter: int = 50
    eig_tol: float = 1e-4
    alpha_min: float = 4.0
    quad_panels: int = 64
    quad_order: int = 16
    cache_dir: str | None = None

    def __post_init__(self):
        for name in ("newton_tol", "fixedpoint_tol", "eig_tol"):
            val = getattr(self, name)
            if not 0.0 < val <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2], got {val}")
        if min(self.n_max, self.n_max_s1, self.n_max_refined) < 10:
            raise ValueError("n_max must be >= 10")
        if self.grid_points < 500:
            raise ValueError("grid_points must be >= 500")
        if self.R_max < 20:
            raise ValueError("R_max must be >= 20")
        if self.alpha_min <= 0:
            raise ValueError("alpha_min must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "SolverConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)

    def resolved_cache_dir(self) -> Path:
        if self.cache_dir:
            return Path(self.cache_dir)
        env = os.environ.get(CACHE_ENV)
        if env:
            return Path(env)
        return Path.home() / ".cache" / "warp-soliton"


DEFAULT_CONFIG = SolverConfig()
