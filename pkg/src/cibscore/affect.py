"""Per-video emotion aggregation and the affect-derived primitives.

Class probabilities are averaged over the video's frames first and scaled
to percentages; all affect primitives are defined on those per-video means,
not on per-frame values.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Sequence

from .errors import NoEvidenceError
from .ingest import EMOTION_CLASSES, EmotionFrame


@dataclass(frozen=True)
class EmotionSummary:
    """Mean class percentages over one video, each in [0, 100]."""

    angry: float
    disgust: float
    fear: float
    happy: float
    neutral: float
    sad: float
    surprise: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in EMOTION_CLASSES}


def summarize(frames: Sequence[EmotionFrame]) -> EmotionSummary:
    """Average each class over the frames and scale to percentages."""
    if not frames:
        raise NoEvidenceError("cannot summarize an empty emotion stream")
    means = {
        name: 100.0 * fmean(frame.probs[name] for frame in frames)
        for name in EMOTION_CLASSES
    }
    return EmotionSummary(**means)


def positive_affect(summary: EmotionSummary) -> float:
    """The happy class percentage stands in for positive affect."""
    return summary.happy


def negative_emotionality(summary: EmotionSummary) -> float:
    """The stronger of the sad and angry percentages."""
    return max(summary.sad, summary.angry)


def peak_expressiveness(summary: EmotionSummary) -> float:
    """Strongest expressiveness signal: happy, angry, surprise, or the
    non-neutral share (100 - neutral), whichever is largest."""
    return max(summary.happy, summary.angry, summary.surprise,
               100.0 - summary.neutral)
