"""Run configuration: tolerances, budgets, and reproducibility knobs."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


@dataclass
class RunConfig:
    # integration
    tol_integrator: float = 1e-10
    atol_integrator: float = 1e-12
    t_max: float = 400.0
    # root isolation / refinement
    tol_root: float = 1e-12
    # saddle-connection matching (radians) and its guard band multiplier
    tol_connection_angle: float = 1e-4
    connection_guard: float = 10.0
    # sector analysis
    eps_retries: int = 20
    class_samples: int = 64
    monodromy_floor: float = 1e-2
    # limit-cycle machinery
    center_displacement: float = 1e-9
    cycle_scan_samples: int = 48
    # contact-free cycles
    transversality_floor: float = 1e-3
    # chart switching (finite-chart radii; hysteresis band avoids chatter)
    switch_out: float = 2.0
    switch_in: float = 1.6
    working_radius: float = 2.4
    # embedding
    germ_resolution: float = 1e-6
    # canonicalization
    mirror_mode: bool = True
    # reproducibility
    seed: int = 0

    def validate(self) -> None:
        for name in (
            "tol_integrator", "atol_integrator", "t_max", "tol_root",
            "tol_connection_angle", "center_displacement",
            "transversality_floor", "germ_resolution",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.eps_retries <= 0 or self.class_samples <= 0:
            raise ValueError("budgets must be positive")
        if not (0 < self.switch_in < self.switch_out):
            raise ValueError("switch radii must satisfy 0 < switch_in < switch_out")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})
        cfg.validate()
        return cfg
