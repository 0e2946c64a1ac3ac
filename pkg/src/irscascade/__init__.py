"""
Parametric cascaded-channel estimation for IRS-assisted hybrid mmWave links.

Two training stages: low-rank completion of a compressed effective channel
gives the outer angles, then an IRS phase sweep with fixed beams gives the
IRS angles and composite gains. An LS baseline and a Monte Carlo harness
are included.
"""

from .channel import (ChannelRealization, PathSet, cascaded_channel, composite_params,
                      effective_channel, parametric_cascade, realize_channel, sample_paths)
from .completion import CompletionProblem, CompletionResult, gcg_altmin
from .config import PRESETS, ConfigError, SimConfig, load_config, preset
from .geometry import ArrayGeometry, ArrayKind, l_shaped_selection
from .metrics import compute_metrics
from .montecarlo import MetricsRecord, run_monte_carlo
from .pipeline import EstimationResult, ls_baseline, run_two_stage
from .results import emit_results
from .sparse import gain_dictionary, omp
from .spectral import EstimationFailure, fbss, root_music

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "ArrayKind", "l_shaped_selection",
    "PathSet", "ChannelRealization", "sample_paths", "realize_channel", "cascaded_channel",
    "effective_channel", "composite_params", "parametric_cascade",
    "CompletionProblem", "CompletionResult", "gcg_altmin",
    "fbss", "root_music", "EstimationFailure",
    "gain_dictionary", "omp",
    "EstimationResult", "run_two_stage", "ls_baseline",
    "SimConfig", "ConfigError", "PRESETS", "preset", "load_config",
    "MetricsRecord", "compute_metrics", "run_monte_carlo", "emit_results",
]
