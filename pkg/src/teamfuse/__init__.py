"""Decision fusion for human-machine teams over probabilistic trajectory beliefs.

The package is organized around a small functional core:

- :mod:`teamfuse.beliefs` - Gaussian-process trajectory beliefs and mixtures
- :mod:`teamfuse.fusion` - blending, switching, and joint-posterior fusion
- :mod:`teamfuse.scenarios` - stressor scenarios and episode simulation
- :mod:`teamfuse.metrics` - episode metrics, team-vs-solo verdicts, sweeps
- :mod:`teamfuse.completion` - preference-matrix completion for crowd intent
- :mod:`teamfuse.runner` - config-driven experiment harness
- :mod:`teamfuse.teleop` - live teleoperation service over WebSocket
"""

from .beliefs import (
    AgentSet,
    GaussianTrajectoryBelief,
    KernelSpec,
    MixtureTrajectoryBelief,
    ObservationSet,
    TimeGrid,
    Trajectory,
    gp_posterior,
    log_density,
    mixture_posterior,
    sample_trajectories,
)
from .completion import (
    PreferenceMatrix,
    SampleComplexityReport,
    complete_matrix,
    complete_operator_intent,
    format_preference_matrix,
    parse_preference_matrix,
    sample_complexity,
)
from .errors import (
    ConfigError,
    InvalidArgumentError,
    InvalidComparisonError,
    PlacementError,
    RankDeficiencyWarning,
    SingularModelError,
    TeamfuseError,
    WeightRenormalizationWarning,
    WeightUnderflowError,
)
from .fusion import (
    BlendSchedule,
    FusionDecision,
    InteractionParams,
    JointSampleEnsemble,
    ParticleIntent,
    interaction_potential,
    irt_fuse,
    irt_joint_posterior,
    linear_blend,
    particle_fuse,
)
from .metrics import (
    CellAggregate,
    EpsilonDeltaEstimate,
    LowerBoundVerdict,
    MetricReport,
    PerformanceSurface,
    StressorGrid,
    epsilon_delta,
    lower_bound_verdict,
    score_episode,
    stressor_sweep,
)
from .scenarios import (
    EPISODE_ARCHITECTURES,
    SCENARIO_KINDS,
    Episode,
    EpisodeTrace,
    FusionSettings,
    OperatorSample,
    Scenario,
    ScenarioSpec,
    WorldState,
    build_scenario,
    simulate_episode,
    simulated_operator,
)

__all__ = [
    "AgentSet",
    "GaussianTrajectoryBelief",
    "KernelSpec",
    "MixtureTrajectoryBelief",
    "ObservationSet",
    "TimeGrid",
    "Trajectory",
    "gp_posterior",
    "log_density",
    "mixture_posterior",
    "sample_trajectories",
    "BlendSchedule",
    "FusionDecision",
    "InteractionParams",
    "JointSampleEnsemble",
    "ParticleIntent",
    "interaction_potential",
    "irt_fuse",
    "irt_joint_posterior",
    "linear_blend",
    "particle_fuse",
    "EPISODE_ARCHITECTURES",
    "SCENARIO_KINDS",
    "Episode",
    "EpisodeTrace",
    "OperatorSample",
    "FusionSettings",
    "Scenario",
    "ScenarioSpec",
    "WorldState",
    "build_scenario",
    "simulate_episode",
    "simulated_operator",
    "CellAggregate",
    "EpsilonDeltaEstimate",
    "LowerBoundVerdict",
    "MetricReport",
    "PerformanceSurface",
    "StressorGrid",
    "epsilon_delta",
    "lower_bound_verdict",
    "score_episode",
    "stressor_sweep",
    "PreferenceMatrix",
    "SampleComplexityReport",
    "complete_matrix",
    "complete_operator_intent",
    "format_preference_matrix",
    "parse_preference_matrix",
    "sample_complexity",
    "ConfigError",
    "InvalidArgumentError",
    "InvalidComparisonError",
    "PlacementError",
    "RankDeficiencyWarning",
    "SingularModelError",
    "TeamfuseError",
    "WeightRenormalizationWarning",
    "WeightUnderflowError",
]

__version__ = "0.1.0"
