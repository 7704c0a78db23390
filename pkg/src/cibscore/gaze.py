"""Gaze concept: share of gaze points inside a calibrated eye-contact region.

The region is an axis-aligned rectangle spanning the min/max gaze angles of
a short clip in which the subject is known to look at the interviewer.
Frames where tracking failed (``success`` = 0) are excluded from both the
rectangle fit and the scored counts, so tracking failure is never confused
with gaze aversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NoEvidenceError, ValidationError
from .ingest import GazeSample


@dataclass(frozen=True)
class GazeRectangle:
    """Closed angle rectangle; boundary points count as inside."""

    min_x: float
    max_x: float
    min_y: float
    max_y: float

    def __post_init__(self) -> None:
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise ValidationError("gaze rectangle has min > max")

    def contains(self, x: float, y: float) -> bool:
        return (self.min_x <= x <= self.max_x) and (self.min_y <= y <= self.max_y)


def fit_gaze_rectangle(calibration: Sequence[GazeSample]) -> GazeRectangle:
    """Fit the eye-contact rectangle from a calibration clip.

    Spans exactly the min/max of the successfully tracked angles; a single
    sample yields a degenerate (zero-area) rectangle.
    """
    xs = [s.gaze_angle_x for s in calibration if s.success]
    ys = [s.gaze_angle_y for s in calibration if s.success]
    if not xs:
        raise NoEvidenceError("calibration clip has no successfully tracked samples")
    return GazeRectangle(min(xs), max(xs), min(ys), max(ys))


def gaze_score(scored: Sequence[GazeSample], rect: GazeRectangle) -> float:
    """Percentage of successfully tracked samples inside the rectangle."""
    usable = [s for s in scored if s.success]
    if not usable:
        raise NoEvidenceError("no successfully tracked samples to score")
    inside = sum(1 for s in usable if rect.contains(s.gaze_angle_x, s.gaze_angle_y))
    return 100.0 * inside / len(usable)
