"""theftsentry: electricity-theft detection over smart-meter load profiles.

Combines a grid-based dependence test (MIC) between each consumer's daily
profile and the area's non-technical loss with a density-peak shape-outlier
score over the pooled normalized profiles, then merges the two suspicion
rankings.  Ships a synthetic data generator, six meter-tampering models,
AUC/MAP@N evaluation metrics, and a repeatable experiment harness behind a
single CLI.
"""

from .correlate import (
    CharacteristicMatrix,
    MicResult,
    characteristic_matrix,
    equipartition,
    grid_mutual_information,
    max_mi,
    mic,
    mic_detail,
    pcc,
)
from .densepeaks import (
    DensityRecord,
    abnormality,
    density_records,
    local_density,
    profile_distance,
    select_dc,
    separation,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateDataError,
    DegeneratePartitionError,
    DomainError,
    MetricError,
    ParameterError,
    ParseError,
    ShapeError,
    TheftSentryError,
)
from .evaluate import (
    ExperimentConfig,
    ExperimentReport,
    LabeledRanking,
    auc,
    map_at_n,
    run_experiment,
)
from .fdi import (
    MIX,
    FdiParams,
    FdiType,
    TamperScenario,
    apply_fdi,
    build_scenario,
    sample_params,
)
from .meterdata import (
    AreaDataset,
    ColumnSpec,
    ConsumerSeries,
    DayProfile,
    NormalizedProfile,
    compute_ntl,
    load_consumers_csv,
    load_observer_csv,
    normalize_profile,
    synth_ground_truth,
)
from .pipeline import (
    DetectionResult,
    ScoreMatrix,
    SuspicionRanking,
    combine_ranks,
    detect,
    rank_consumers,
    score_mic,
    score_pcc,
    score_zeta,
    split_two_groups,
    suspicion_degree,
)

__version__ = "0.1.0"

__all__ = [
    "AreaDataset", "CharacteristicMatrix", "ColumnSpec", "ConfigError",
    "ConsumerSeries", "DataError", "DayProfile", "DegenerateDataError",
    "DegeneratePartitionError", "DensityRecord", "DetectionResult",
    "DomainError", "ExperimentConfig", "ExperimentReport", "FdiParams",
    "FdiType", "LabeledRanking", "MetricError", "MicResult", "MIX",
    "NormalizedProfile", "ParameterError", "ParseError", "ScoreMatrix",
    "ShapeError", "SuspicionRanking", "TamperScenario", "TheftSentryError",
    "abnormality", "apply_fdi", "auc", "build_scenario",
    "characteristic_matrix", "combine_ranks", "compute_ntl",
    "density_records", "detect", "equipartition", "grid_mutual_information",
    "load_consumers_csv", "load_observer_csv", "local_density", "map_at_n",
    "max_mi", "mic", "mic_detail", "normalize_profile", "pcc",
    "profile_distance", "rank_consumers", "run_experiment", "sample_params",
    "score_mic", "score_pcc", "score_zeta", "select_dc", "separation",
    "split_two_groups", "suspicion_degree", "synth_ground_truth",
]
