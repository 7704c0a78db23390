"""The seven behavior-concept scores and per-video orchestration.

Three concepts are composites over primitive percentages:

* activity-level/arousal = (activity + vocalization + peak expressiveness) / 3
* anxiety                = (activity + max(fear, disgust)) / 2
* attention              = ((100 - activity) + (100 - anxiety)) / 2

Concepts whose input streams are missing come back marked unavailable
(``None``) instead of failing the whole video; degraded real-world bundles
stay scorable on whatever streams they do carry.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .affect import (
    negative_emotionality,
    peak_expressiveness,
    positive_affect,
    summarize,
)
from .errors import NoEvidenceError, ParseError, SchemaError, ValidationError
from .gaze import fit_gaze_rectangle, gaze_score
from .ingest import FeatureBundle
from .motion import (
    MotionHeatmap,
    YouthRegion,
    accumulate_heatmap,
    activity_score,
    select_youth_region,
    subtract_background,
    threshold_mask,
)
from .vocalization import vocalization_score

logger = logging.getLogger(__name__)

CONCEPT_ITEMS = (
    "gaze",
    "vocalization",
    "positive_affect",
    "negative_emotionality",
    "activity_arousal",
    "anxiety",
    "attention",
)


@dataclass(frozen=True)
class ConceptScores:
    """The seven concept percentages for one video; ``None`` = unavailable."""

    gaze: float | None = None
    vocalization: float | None = None
    positive_affect: float | None = None
    negative_emotionality: float | None = None
    activity_arousal: float | None = None
    anxiety: float | None = None
    attention: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in CONCEPT_ITEMS}

    def available_items(self) -> tuple[str, ...]:
        return tuple(name for name, value in self.as_dict().items()
                     if value is not None)


def _check_percentage(name: str, value: float) -> float:
    if not 0.0 <= value <= 100.0:
        raise ValidationError(f"{name} must be in [0, 100], got {value!r}")
    return value


def activity_arousal(activity: float, vocalization: float,
                     expressiveness: float) -> float:
    """Equal-weight mean of body motion, speech evidence, and expressiveness."""
    _check_percentage("activity", activity)
    _check_percentage("vocalization", vocalization)
    _check_percentage("expressiveness", expressiveness)
    return (activity + vocalization + expressiveness) / 3.0


def anxiety(activity: float, fear: float, disgust: float) -> float:
    """Mean of body motion and the stronger of fear and disgust."""
    _check_percentage("activity", activity)
    _check_percentage("fear", fear)
    _check_percentage("disgust", disgust)
    return (activity + max(fear, disgust)) / 2.0


def attention(activity: float, anxiety_pct: float) -> float:
    """High when both motion and anxiety are low."""
    _check_percentage("activity", activity)
    _check_percentage("anxiety", anxiety_pct)
    return 100.0 - (activity + anxiety_pct) / 2.0


def compute_activity(bundle: FeatureBundle, config=None, *,
                     heatmap: MotionHeatmap | None = None,
                     region: YouthRegion | None = None) -> float | None:
    """Raw motion percentage for a bundle, or None when inputs are missing.

    ``heatmap``/``region`` short-circuit recomputation for callers that
    already built them (e.g. to export the heatmap).
    """
    cfg = _resolved(config)
    if heatmap is None:
        if not bundle.frames:
            return None
        masks = subtract_background(bundle.frames, cfg.mixture_params())
        masks = [threshold_mask(m, cfg.binary_threshold) for m in masks]
        heatmap = accumulate_heatmap(masks)
    if region is None and cfg.use_youth_region:
        if not bundle.detections:
            logger.warning(
                "%s: youth region requested but bundle has no detections; "
                "activity unavailable", bundle.video_id,
            )
            return None
        region = select_youth_region(
            bundle.detections, policy=cfg.youth_region_policy,
            features=cfg.youth_region_features, seed=cfg.seed,
        )
    return activity_score(heatmap, region)


def score_video(bundle: FeatureBundle, config=None, *,
                heatmap: MotionHeatmap | None = None,
                region: YouthRegion | None = None) -> ConceptScores:
    """Compute every concept the bundle's streams support.

    Concepts whose streams are absent, or whose streams carry no usable
    evidence, are marked unavailable with a logged warning. A bundle that
    supports no concept at all is an error.
    """
    cfg = _resolved(config)

    vocal = None
    if bundle.aus:
        try:
            vocal = vocalization_score(bundle.aus)
        except NoEvidenceError as err:
            logger.warning("%s: vocalization unavailable: %s", bundle.video_id, err)

    gaze = None
    if bundle.gaze and bundle.gaze_calibration:
        try:
            rect = fit_gaze_rectangle(bundle.gaze_calibration)
            gaze = gaze_score(bundle.gaze, rect)
        except NoEvidenceError as err:
            logger.warning("%s: gaze unavailable: %s", bundle.video_id, err)
    elif bundle.gaze:
        logger.warning("%s: gaze unavailable: no calibration clip in bundle",
                       bundle.video_id)

    summary = summarize(bundle.emotions) if bundle.emotions else None
    positive = positive_affect(summary) if summary else None
    negative = negative_emotionality(summary) if summary else None

    activity = compute_activity(bundle, cfg, heatmap=heatmap, region=region)

    arousal = None
    if activity is not None and vocal is not None and summary is not None:
        arousal = activity_arousal(activity, vocal, peak_expressiveness(summary))
    anx = None
    if activity is not None and summary is not None:
        anx = anxiety(activity, summary.fear, summary.disgust)
    att = None
    if activity is not None and anx is not None:
        att = attention(activity, anx)

    scores = ConceptScores(
        gaze=gaze, vocalization=vocal, positive_affect=positive,
        negative_emotionality=negative, activity_arousal=arousal,
        anxiety=anx, attention=att,
    )
    if not scores.available_items():
        raise ValidationError(
            f"bundle {bundle.video_id!r} has no usable stream for any concept"
        )
    return scores


def _resolved(config):
    if config is None:
        from .config import RunConfig
        return RunConfig()
    return config


# ---------------------------------------------------------------------------
# Concept-scores CSV (one row per video, blanks for unavailable)
# ---------------------------------------------------------------------------

SCORES_HEADER = ("video_id",) + CONCEPT_ITEMS


def write_scores_csv(path: str | Path,
                     rows: Sequence[tuple[str, ConceptScores]]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORES_HEADER)
        for video_id, scores in rows:
            values = scores.as_dict()
            writer.writerow([video_id] + [
                "" if values[item] is None else repr(float(values[item]))
                for item in CONCEPT_ITEMS
            ])


def read_scores_csv(path: str | Path) -> dict[str, dict[str, float | None]]:
    """Read a concept-scores CSV into {video_id: {item: pct or None}}."""
    path = Path(path)
    if not path.is_file():
        raise ParseError("scores file not found", source=path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [cell.strip() for cell in next(reader)]
        except StopIteration:
            raise SchemaError("empty file: a header row is required", source=path) from None
        index = {name: i for i, name in enumerate(header)}
        for name in SCORES_HEADER:
            if name not in index:
                raise SchemaError(f"missing required column {name!r}", source=path)
        result: dict[str, dict[str, float | None]] = {}
        for line_no, cells in enumerate(reader, start=2):
            cells = [cell.strip() for cell in cells]
            if not cells or all(cell == "" for cell in cells):
                continue
            video_id = cells[index["video_id"]]
            if not video_id:
                raise ValidationError("empty video_id", source=path, row=line_no)
            if video_id in result:
                raise ValidationError(f"duplicate video_id {video_id!r}",
                                      source=path, row=line_no)
            row: dict[str, float | None] = {}
            for item in CONCEPT_ITEMS:
                raw = cells[index[item]] if index[item] < len(cells) else ""
                if raw == "":
                    row[item] = None
                    continue
                try:
                    value = float(raw)
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {raw!r} in column {item!r}",
                        source=path, row=line_no,
                    ) from None
                if not 0.0 <= value <= 100.0:
                    raise ValidationError(
                        f"{item} score {value} outside [0, 100]",
                        source=path, row=line_no,
                    )
                row[item] = value
            result[video_id] = row
    return result
