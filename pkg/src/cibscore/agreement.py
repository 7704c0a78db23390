"""CIB half-point ratings and inter-rater percent agreement.

Machine percentages map onto the 1..5 half-point scale through a linear
stretch followed by rounding to the nearest half point (exact midpoints
round up). The mapping is deliberately isolated behind ``SCALE_MAPS`` so
alternative transformations can be swapped in without touching callers.

Two raters agree on an item when their scores differ by at most one CIB
point. Reports compare only (video, item) keys present in both tables; the
headline number is the mean of the per-video agreement percentages.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .composites import CONCEPT_ITEMS
from .errors import EvaluationError, ParseError, SchemaError, ValidationError

CIB_MIN = 1.0
CIB_MAX = 5.0
CIB_SCALE = tuple(1.0 + 0.5 * k for k in range(9))
AGREEMENT_MAX_DIFF = 1.0

RATINGS_COLUMNS = ("rater_id", "video_id", "item", "score")


def quantize(percentage: float) -> float:
    """Map a percentage onto the CIB half-point scale.

    Linear stretch ``1 + 4 * p / 100`` then nearest half point; midpoints
    round up. Exact rational arithmetic keeps midpoint handling immune to
    float representation error.
    """
    if not 0.0 <= percentage <= 100.0:
        raise ValidationError(f"percentage {percentage!r} outside [0, 100]")
    doubled = 2 + Fraction(2, 25) * Fraction(percentage)  # 2 * (1 + 4p/100)
    return math.floor(doubled + Fraction(1, 2)) / 2.0


SCALE_MAPS: dict[str, Callable[[float], float]] = {"linear": quantize}


def agree(a: float, b: float) -> bool:
    """True when two CIB scores differ by at most one point."""
    return abs(a - b) <= AGREEMENT_MAX_DIFF


def percent_agreement(pairs: Sequence[tuple[float, float]]) -> float:
    """Share of agreeing score pairs, as a percentage."""
    if not pairs:
        raise EvaluationError("cannot compute agreement over zero pairs")
    agreements = sum(1 for a, b in pairs if agree(a, b))
    return 100.0 * agreements / len(pairs)


@dataclass(frozen=True)
class RatingTable:
    """One rater's scores, keyed by (video_id, item)."""

    rater_id: str
    scores: Mapping[tuple[str, str], float]


@dataclass(frozen=True)
class AgreementReport:
    """Percent agreement between two rating tables.

    ``average_over_videos`` is the headline number: the mean of the
    per-video agreement percentages.
    """

    rater_a: str
    rater_b: str
    items: tuple[str, ...]
    per_item: Mapping[str, float]
    per_item_pairs: Mapping[str, int]
    per_video: Mapping[str, float]
    per_video_pairs: Mapping[str, int]
    average_over_videos: float
    n_pairs: int


def compare_tables(a: RatingTable, b: RatingTable,
                   items: Iterable[str] | None = None) -> AgreementReport:
    """Compare every (video, item) key the two tables share.

    ``items`` restricts the comparison to a subset of the seven concepts;
    dropping items and re-reporting is how weak concepts are excluded from
    the headline number.
    """
    item_subset = tuple(items) if items is not None else CONCEPT_ITEMS
    for item in item_subset:
        if item not in CONCEPT_ITEMS:
            raise ValidationError(f"unknown CIB item {item!r}")
    subset = set(item_subset)

    shared = sorted(key for key in a.scores
                    if key in b.scores and key[1] in subset)
    if not shared:
        raise EvaluationError(
            f"raters {a.rater_id!r} and {b.rater_id!r} share no "
            "(video, item) keys within the requested items"
        )

    per_item: dict[str, float] = {}
    per_item_pairs: dict[str, int] = {}
    for item in (name for name in CONCEPT_ITEMS if name in subset):
        pairs = [(a.scores[key], b.scores[key]) for key in shared if key[1] == item]
        if pairs:
            per_item[item] = percent_agreement(pairs)
            per_item_pairs[item] = len(pairs)

    per_video: dict[str, float] = {}
    per_video_pairs: dict[str, int] = {}
    for video_id in sorted({key[0] for key in shared}):
        pairs = [(a.scores[key], b.scores[key]) for key in shared if key[0] == video_id]
        per_video[video_id] = percent_agreement(pairs)
        per_video_pairs[video_id] = len(pairs)

    average = sum(per_video.values()) / len(per_video)
    return AgreementReport(
        rater_a=a.rater_id, rater_b=b.rater_id, items=item_subset,
        per_item=per_item, per_item_pairs=per_item_pairs,
        per_video=per_video, per_video_pairs=per_video_pairs,
        average_over_videos=average, n_pairs=len(shared),
    )


# ---------------------------------------------------------------------------
# Ratings CSV and machine-score quantization
# ---------------------------------------------------------------------------

def _validate_cib_score(raw: str, path: Path, line_no: int) -> float:
    try:
        score = float(raw)
    except ValueError:
        raise ParseError(f"non-numeric score {raw!r}", source=path, row=line_no) from None
    if not (CIB_MIN <= score <= CIB_MAX and (score * 2.0).is_integer()):
        raise ValidationError(
            f"score {raw!r} is not on the 1..5 half-point scale",
            source=path, row=line_no,
        )
    return score


def load_ratings_csv(path: str | Path) -> list[RatingTable]:
    """Load a ratings CSV into one table per rater (order of appearance).

    Columns: ``rater_id, video_id, item, score``; items must be the seven
    concept identifiers and scores must sit on the half-point grid.
    """
    path = Path(path)
    if not path.is_file():
        raise ParseError("ratings file not found", source=path)
    tables: dict[str, dict[tuple[str, str], float]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [cell.strip() for cell in next(reader)]
        except StopIteration:
            raise SchemaError("empty file: a header row is required", source=path) from None
        index = {name: i for i, name in enumerate(header)}
        for name in RATINGS_COLUMNS:
            if name not in index:
                raise SchemaError(f"missing required column {name!r}", source=path)
        for line_no, raw_cells in enumerate(reader, start=2):
            cells = [cell.strip() for cell in raw_cells]
            if not cells or all(cell == "" for cell in cells):
                continue
            if len(cells) != len(header):
                raise ParseError(
                    f"row has {len(cells)} values, header has {len(header)}",
                    source=path, row=line_no,
                )
            rater_id = cells[index["rater_id"]]
            video_id = cells[index["video_id"]]
            item = cells[index["item"]]
            if not rater_id or not video_id:
                raise ValidationError("rater_id and video_id must be non-empty",
                                      source=path, row=line_no)
            if item not in CONCEPT_ITEMS:
                raise ValidationError(f"unknown CIB item {item!r}",
                                      source=path, row=line_no)
            score = _validate_cib_score(cells[index["score"]], path, line_no)
            table = tables.setdefault(rater_id, {})
            if (video_id, item) in table:
                raise ValidationError(
                    f"duplicate rating for ({video_id!r}, {item!r}) "
                    f"by rater {rater_id!r}",
                    source=path, row=line_no,
                )
            table[(video_id, item)] = score
    if not tables:
        raise ValidationError("ratings file holds no data rows", source=path)
    return [RatingTable(rater_id, scores) for rater_id, scores in tables.items()]


def table_from_machine_scores(
        machine: Mapping[str, Mapping[str, float | None]],
        scale_map: Callable[[float], float] = quantize,
        rater_id: str = "ML") -> RatingTable:
    """Quantize per-video concept percentages into a rating table.

    Unavailable (None) entries are skipped; they simply never enter any
    comparison.
    """
    scores: dict[tuple[str, str], float] = {}
    for video_id, row in machine.items():
        for item, value in row.items():
            if value is not None:
                scores[(video_id, item)] = scale_map(value)
    return RatingTable(rater_id, scores)
