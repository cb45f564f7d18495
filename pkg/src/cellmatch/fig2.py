"""Bundled 6-user / 3-BS worked example with hand-built channel gains."""
from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .algorithms import ALGORITHMS, RunResult, run_algorithm
from .channel import ChannelRealization
from .config import ScenarioConfig
from .preference import PreferenceProfile, build_user_preferences


def load_example() -> tuple[ScenarioConfig, ChannelRealization]:
    doc = json.loads(resources.files("cellmatch").joinpath("data/fig2_gains.json").read_text())
    config = ScenarioConfig.from_dict(doc["config"])
    return config, ChannelRealization.from_gains(np.array(doc["gains"]), config)


def replay() -> tuple[PreferenceProfile, dict[str, RunResult]]:
    config, channel = load_example()
    profile = build_user_preferences(channel.avg_rates, config.rate_threshold)
    return profile, {name: run_algorithm(name, profile, channel, config) for name in ALGORITHMS}


def format_matching(result: RunResult) -> str:
    """One line per BS in 1-indexed form, e.g. ``BS1: {1, 5}``."""
    parts = []
    for l, users in enumerate(result.matching.bs_to_users):
        parts.append(f"BS{l + 1}: {{{', '.join(str(m + 1) for m in users)}}}")
    return "  ".join(parts)
