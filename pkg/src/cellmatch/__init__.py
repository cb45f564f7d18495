"""User-cell association in two-tier small cell networks as a matching game."""
from .algorithms import RunResult, run_da, run_pda, run_rssi
from .channel import ChannelRealization, Topology, draw_channel_gains, generate_topology, realize
from .config import ConfigError, ScenarioConfig
from .harness import MetricsRecord, run_scenario, sweep
from .matching import BlockingPair, Matching, blocking_pairs, brute_force_opt, validate
from .preference import PreferenceProfile, Priority, build_user_preferences, rank_and_select

__all__ = [
    "BlockingPair", "ChannelRealization", "ConfigError", "Matching", "MetricsRecord", "PreferenceProfile",
    "Priority", "RunResult", "ScenarioConfig", "Topology", "blocking_pairs", "brute_force_opt",
    "build_user_preferences", "draw_channel_gains", "generate_topology", "rank_and_select", "realize",
    "run_da", "run_pda", "run_rssi", "run_scenario", "sweep", "validate",
]
