"""Scenario parameters shared by every stage of a simulation run."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np


class ConfigError(ValueError):
    """Raised for invalid or unknown scenario parameters."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and game parameters of a two-tier small cell scenario.

    BS index 0 is the macro BS at the area center; indices 1..num_bs-1 are
    small cells. Defaults follow the reference simulation setup (11 BSs,
    quota 4, 10 W / 1 W, path loss exponent 3) with declared values for the
    quantities it leaves open (subcarrier count, bandwidth, noise, threshold).
    """

    num_bs: int = 11
    num_users: int = 60
    num_subcarriers: int = 16
    subcarrier_bandwidth: float = 1.0
    area_side: float = 1000.0
    power_mbs: float = 10.0
    power_scbs: float = 1.0
    noise_variance: float = 1e-12
    pathloss_exponent: float = 3.0
    min_distance: float = 1.0
    rate_threshold: float = 0.0
    quotas: tuple[int, ...] | int = 4
    priority_coeffs: tuple[float, float, float] = (100.0, 30.0, 1.0)
    zeta1: float = 0.1
    zeta2: float = 3.0
    sinr_cap: float = 1e12
    rng_seed: int = 0

    def __post_init__(self):
        # normalise list-ish inputs so configs loaded from JSON hash and compare
        quotas = self.quotas
        if isinstance(quotas, int):
            quotas = (quotas,) * self.num_bs
        object.__setattr__(self, "quotas", tuple(int(q) for q in quotas))
        object.__setattr__(self, "priority_coeffs", tuple(float(a) for a in self.priority_coeffs))
        self.validate()

    def validate(self) -> None:
        if self.num_bs < 1:
            raise ConfigError("num_bs must be >= 1")
        if self.num_users < 0:
            raise ConfigError("num_users must be >= 0")
        if self.num_subcarriers < 1:
            raise ConfigError("num_subcarriers must be >= 1")
        for name in ("subcarrier_bandwidth", "area_side", "power_mbs", "power_scbs",
                     "pathloss_exponent", "min_distance", "sinr_cap"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.noise_variance < 0:
            raise ConfigError("noise_variance must be non-negative")
        if self.rate_threshold < 0:
            raise ConfigError("rate_threshold must be non-negative")
        if len(self.quotas) != self.num_bs:
            raise ConfigError(f"expected {self.num_bs} quotas, got {len(self.quotas)}")
        if any(q < 1 for q in self.quotas):
            raise ConfigError("every quota must be >= 1")
        if len(self.priority_coeffs) != 3:
            raise ConfigError("priority_coeffs must have three entries")
        a, b, c = self.priority_coeffs
        if not a >= b >= c > 0:
            raise ConfigError("priority_coeffs must satisfy a >= b >= c > 0")
        if self.zeta1 < 0:
            raise ConfigError("zeta1 must be non-negative")
        if not self.zeta2 > 1:
            raise ConfigError("zeta2 must exceed 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be an unsigned 64-bit integer")

    @property
    def subcarrier_powers(self) -> np.ndarray:
        """Per-subcarrier transmit power of each BS (total power split evenly)."""
        powers = np.full(self.num_bs, self.power_scbs / self.num_subcarriers)
        powers[0] = self.power_mbs / self.num_subcarriers
        return powers

    def with_dims(self, num_users: int | None = None, num_bs: int | None = None) -> ScenarioConfig:
        """Copy with a different number of users and/or BSs.

        Quotas are re-broadcast when the BS count changes, which requires a
        uniform quota vector.
        """
        changes: dict[str, Any] = {}
        if num_users is not None:
            changes["num_users"] = num_users
        if num_bs is not None and num_bs != self.num_bs:
            if len(set(self.quotas)) > 1:
                raise ConfigError("cannot resize a non-uniform quota vector")
            changes["num_bs"] = num_bs
            changes["quotas"] = (self.quotas[0],) * num_bs
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["quotas"] = list(self.quotas)
        d["priority_coeffs"] = list(self.priority_coeffs)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> ScenarioConfig:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        with open(path) as fh:
            data = json.load(fh)
        # accept the JSON mirror written by the harness as a config too
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
        return cls.from_dict(data)

    def with_overrides(self, overrides: dict[str, Any]) -> ScenarioConfig:
        merged = self.to_dict()
        known = set(merged)
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "num_bs" in overrides and "quotas" not in overrides:
            if len(set(self.quotas)) > 1:
                raise ConfigError("set quotas explicitly when changing num_bs")
            merged["quotas"] = self.quotas[0]
        merged.update(overrides)
        return ScenarioConfig.from_dict(merged)
