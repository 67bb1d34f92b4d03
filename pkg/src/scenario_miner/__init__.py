"""Scenario extraction from trajectory recordings.

Pipeline: parse a tracks CSV into a trajectory store, turn a natural
language description into a structured scenario query, search the store
for matching ego/target windows, score them with surrogate-safety
metrics, and export the survivors as OpenSCENARIO or CarMaker files.
"""

__version__ = "1.0.0"

from .activities import (
    DetectionParams,
    LateralActivity,
    LongitudinalActivity,
    segment_lateral,
    segment_longitudinal,
)
from .criticality import (
    CriticalityConfig,
    CriticalityReport,
    MetricKind,
    MetricParams,
    ScoredMatch,
    compute_series,
    filter_pool,
)
from .errors import (
    AmbiguousLaneChangeError,
    CredentialError,
    DatasetParseError,
    DatasetSchemaError,
    ExportError,
    InsufficientDataError,
    InterpretationError,
    MalformedResponseError,
    ProviderError,
    ResponseStructureError,
    ScenarioMinerError,
    VocabularyError,
)
from .exporters import ExportConfig, to_carmaker_text, to_openscenario
from .positions import RelativePosition, classify_position, position_timeline
from .schema import (
    PositionLabel,
    ScenarioQuery,
    TargetSpec,
    parse_llm_response,
    query_from_json,
    query_to_json,
    query_to_text,
    validate_query,
)
from .search import (
    NearMiss,
    ScenarioMatch,
    SearchParams,
    TargetWindow,
    find_matches,
    search_with_explanations,
)
from .trajectory_store import (
    RecordingConfig,
    Trajectory,
    TrajectoryStore,
    parse_tracks_csv,
)
from .understanding import (
    ProviderConfig,
    build_prompt,
    interpret_offline,
    interpret_remote,
)

__all__ = [
    "__version__",
    "AmbiguousLaneChangeError",
    "CredentialError",
    "CriticalityConfig",
    "CriticalityReport",
    "DatasetParseError",
    "DatasetSchemaError",
    "DetectionParams",
    "ExportConfig",
    "ExportError",
    "InsufficientDataError",
    "InterpretationError",
    "LateralActivity",
    "LongitudinalActivity",
    "MalformedResponseError",
    "MetricKind",
    "MetricParams",
    "NearMiss",
    "PositionLabel",
    "ProviderConfig",
    "ProviderError",
    "RecordingConfig",
    "RelativePosition",
    "ResponseStructureError",
    "ScenarioMatch",
    "ScenarioMinerError",
    "ScenarioQuery",
    "ScoredMatch",
    "SearchParams",
    "TargetSpec",
    "TargetWindow",
    "Trajectory",
    "TrajectoryStore",
    "VocabularyError",
    "build_prompt",
    "classify_position",
    "compute_series",
    "filter_pool",
    "find_matches",
    "interpret_offline",
    "interpret_remote",
    "parse_llm_response",
    "parse_tracks_csv",
    "position_timeline",
    "query_from_json",
    "query_to_json",
    "query_to_text",
    "search_with_explanations",
    "segment_lateral",
    "segment_longitudinal",
    "to_carmaker_text",
    "to_openscenario",
    "validate_query",
]
