"""Vocalization concept from mouth action-unit intensities.

Each frame is bucketed by the strongest mouth evidence present (an AU is
present when its intensity is at least 1):

* high (jaw drop, AU26)        -> weight 100
* medium (lips part, AU25)     -> weight 50
* low (closed-mouth AU group)  -> weight 0

Frames with none of these AUs present carry no evidence and are excluded
from the frame total. The per-video score is the weighted mean of the
evidence frames. Jaw drop outranks lips-part outranks the closed-mouth
group when several are present at once, since it is the strongest speech
evidence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .errors import NoEvidenceError
from .ingest import AUFrame

PRESENCE_MIN_INTENSITY = 1.0
JAW_DROP_AU = 26
LIPS_PART_AU = 25
MOUTH_CLOSED_AUS = (10, 12, 14, 15, 17, 20, 23)

LOW_WEIGHT = 0.0
MED_WEIGHT = 50.0
HIGH_WEIGHT = 100.0


class VocalizationLevel(enum.Enum):
    NO_EVIDENCE = "no_evidence"
    LOW = "low"
    MED = "med"
    HIGH = "high"


@dataclass(frozen=True)
class VocalizationCounts:
    """Per-bucket frame counts over one video."""

    n_low: int = 0
    n_med: int = 0
    n_high: int = 0

    @property
    def n_present(self) -> int:
        return self.n_low + self.n_med + self.n_high


def classify_frame(frame: AUFrame) -> VocalizationLevel:
    """Bucket one frame; priority high > med > low resolves multi-AU frames."""
    def present(au_id: int) -> bool:
        return frame.intensity.get(au_id, 0.0) >= PRESENCE_MIN_INTENSITY

    if present(JAW_DROP_AU):
        return VocalizationLevel.HIGH
    if present(LIPS_PART_AU):
        return VocalizationLevel.MED
    if any(present(au_id) for au_id in MOUTH_CLOSED_AUS):
        return VocalizationLevel.LOW
    return VocalizationLevel.NO_EVIDENCE


def count_frames(frames: Iterable[AUFrame]) -> VocalizationCounts:
    """One-pass bucket counting over a frame stream."""
    n_low = n_med = n_high = 0
    for frame in frames:
        level = classify_frame(frame)
        if level is VocalizationLevel.HIGH:
            n_high += 1
        elif level is VocalizationLevel.MED:
            n_med += 1
        elif level is VocalizationLevel.LOW:
            n_low += 1
    return VocalizationCounts(n_low, n_med, n_high)


def score_from_counts(counts: VocalizationCounts) -> float:
    """Weighted mean of the evidence buckets, in [0, 100]."""
    if counts.n_present == 0:
        raise NoEvidenceError("no vocalization evidence in any frame")
    weighted = (LOW_WEIGHT * counts.n_low
                + MED_WEIGHT * counts.n_med
                + HIGH_WEIGHT * counts.n_high)
    return weighted / counts.n_present


def vocalization_score(frames: Iterable[AUFrame]) -> float:
    """Score a video's AU stream; raises when no frame carries evidence."""
    return score_from_counts(count_frames(frames))
