"""Behavior-concept scoring from per-frame video features.

Turns gaze, action-unit, emotion, detection, and grayscale-frame streams
into seven interpretable behavior-concept percentages per video, maps them
onto the CIB 1..5 half-point scale, and evaluates percent agreement
between raters (human or machine).
"""

from .affect import (
    EmotionSummary,
    negative_emotionality,
    peak_expressiveness,
    positive_affect,
    summarize,
)
from .agreement import (
    AgreementReport,
    RatingTable,
    agree,
    compare_tables,
    load_ratings_csv,
    percent_agreement,
    quantize,
    table_from_machine_scores,
)
from .bundle import read_bundle, write_bundle
from .composites import (
    CONCEPT_ITEMS,
    ConceptScores,
    activity_arousal,
    anxiety,
    attention,
    read_scores_csv,
    score_video,
    write_scores_csv,
)
from .config import RunConfig, load_config
from .errors import (
    CibscoreError,
    EvaluationError,
    NoEvidenceError,
    ParseError,
    SchemaError,
    ValidationError,
)
from .gaze import GazeRectangle, fit_gaze_rectangle, gaze_score
from .ingest import (
    AUFrame,
    DetectionBox,
    EmotionFrame,
    FeatureBundle,
    GazeSample,
    GrayFrame,
    assemble_bundle,
    load_frames,
    parse_detections_csv,
    parse_emotion_csv,
    parse_face_csv,
)
from .motion import (
    ForegroundMask,
    KMeansResult,
    MixtureBackgroundModel,
    MixtureParams,
    MotionHeatmap,
    YouthRegion,
    accumulate_heatmap,
    activity_score,
    kmeans,
    select_youth_region,
    subtract_background,
    threshold_mask,
)
from .vocalization import (
    VocalizationCounts,
    VocalizationLevel,
    classify_frame,
    vocalization_score,
)

__version__ = "0.1.0"
