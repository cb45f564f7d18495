"""Topology, Rayleigh-faded channel gains, SINR and Shannon rates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig


@dataclass(frozen=True)
class Topology:
    bs_positions: np.ndarray  # (L, 2), row 0 is the macro BS
    user_positions: np.ndarray  # (M, 2)

    def distances(self) -> np.ndarray:
        """Euclidean BS-to-user distances, shape (L, M)."""
        diff = self.bs_positions[:, None, :] - self.user_positions[None, :, :]
        return np.sqrt((diff**2).sum(axis=-1))


@dataclass(frozen=True)
class ChannelRealization:
    """Channel gains of one drop plus the SINR and rate tables derived from them.

    ``gains`` and ``sinr`` are indexed (BS, subcarrier, user); ``avg_rates``
    is (BS, user).
    """

    gains: np.ndarray
    sinr: np.ndarray
    avg_rates: np.ndarray

    @classmethod
    def from_gains(cls, gains: np.ndarray, config: ScenarioConfig) -> ChannelRealization:
        gains = np.asarray(gains, dtype=float)
        sinr = sinr_tensor(gains, config)
        return cls(gains=gains, sinr=sinr, avg_rates=average_rate_matrix(sinr, config))

    @property
    def num_bs(self) -> int:
        return self.gains.shape[0]

    @property
    def num_users(self) -> int:
        return self.gains.shape[2]

    def received_power(self, config: ScenarioConfig) -> np.ndarray:
        """Mean received power over subcarriers, shape (L, M); the RSSI."""
        p = config.subcarrier_powers
        return (p[:, None, None] * self.gains).mean(axis=1)


def generate_topology(config: ScenarioConfig, rng: np.random.Generator) -> Topology:
    side = config.area_side
    centre = np.array([[side / 2, side / 2]])
    scbs = rng.uniform(0.0, side, size=(config.num_bs - 1, 2))
    users = rng.uniform(0.0, side, size=(config.num_users, 2))
    return Topology(bs_positions=np.vstack([centre, scbs]), user_positions=users)


def path_gain(distance, config: ScenarioConfig):
    return np.maximum(distance, config.min_distance) ** (-config.pathloss_exponent)


def draw_channel_gains(topology: Topology, config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Power gains h[l, j, m] = path gain * unit-mean exponential fade."""
    pg = path_gain(topology.distances(), config)
    fading = rng.exponential(1.0, size=(config.num_bs, config.num_subcarriers, config.num_users))
    return pg[:, None, :] * fading


def realize(config: ScenarioConfig, rng: np.random.Generator) -> tuple[Topology, ChannelRealization]:
    """Draw a topology and its channel from one generator, in that order."""
    topology = generate_topology(config, rng)
    gains = draw_channel_gains(topology, config, rng)
    return topology, ChannelRealization.from_gains(gains, config)


def compute_sinr(gains: np.ndarray, config: ScenarioConfig, l: int, j: int, m: int) -> float:
    p = config.subcarrier_powers
    signal = p[l] * gains[l, j, m]
    interference = 0.0
    for k in range(gains.shape[0]):
        if k != l:
            interference += p[k] * gains[k, j, m]
    denom = interference + config.noise_variance
    if denom == 0.0:
        return config.sinr_cap if signal > 0 else 0.0
    return float(signal / denom)


def sinr_tensor(gains: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """Vectorised :func:`compute_sinr` over all (l, j, m)."""
    p = config.subcarrier_powers
    received = p[:, None, None] * gains
    sinr = np.empty_like(received)
    n_bs = gains.shape[0]
    for l in range(n_bs):
        # accumulate interferers in index order so the scalar path agrees exactly
        interference = np.zeros(received.shape[1:])
        for k in range(n_bs):
            if k != l:
                interference = interference + received[k]
        denom = interference + config.noise_variance
        zero = denom == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            sinr[l] = np.where(zero, np.where(received[l] > 0, config.sinr_cap, 0.0), received[l] / denom)
    return sinr


def subcarrier_rate(w, sinr):
    """Shannon rate w * log2(1 + sinr)."""
    return w * np.log2(1.0 + sinr)


def average_rate(gains: np.ndarray, config: ScenarioConfig, l: int, m: int) -> float:
    """Rate of user m from BS l averaged over subcarriers."""
    rates = [subcarrier_rate(config.subcarrier_bandwidth, compute_sinr(gains, config, l, j, m))
             for j in range(gains.shape[1])]
    return float(np.mean(rates))


def average_rate_matrix(sinr: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    return subcarrier_rate(config.subcarrier_bandwidth, sinr).mean(axis=1)
