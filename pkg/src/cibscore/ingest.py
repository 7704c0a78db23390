"""Parsers, writers, and domain types for per-frame feature streams.

All stream files are comma separated with a header row; column positions are
discovered from the header (never assumed), and whitespace around header
names and cell values is tolerated. Canonical layouts:

* gaze:       ``frame, timestamp, success, gaze_angle_x, gaze_angle_y``
* AUs:        ``frame, AU01_r, AU02_r, ...``  (intensities in [0, 5])
* emotions:   ``frame, angry, disgust, fear, happy, neutral, sad, surprise``
* detections: ``frame, class, x, y, w, h, confidence``

:func:`parse_face_csv` also accepts combined face-tracker exports in which
gaze columns and ``AU<NN>_r`` intensity columns live in one file alongside
any number of other columns; binary ``AU<NN>_c`` presence columns and
unrecognized columns are ignored.

Grayscale frames arrive as a directory of binary portable graymaps whose
lexicographically sorted filenames define frame order.

Error reporting convention: row numbers in raised errors are 1-based file
line numbers (the header is line 1).
"""

from __future__ import annotations

import logging
import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, SchemaError, ValidationError
from .pgm import read_pgm, write_pgm

logger = logging.getLogger(__name__)

EMOTION_CLASSES = ("angry", "disgust", "fear", "happy", "neutral", "sad", "surprise")

# Upstream emotion exports round probabilities; exact sum == 1 would reject
# real files, so the per-frame probability sum may drift by this much.
EMOTION_SUM_TOLERANCE = 0.02

PERSON_CLASS = "person"

GAZE_COLUMNS = ("frame", "timestamp", "success", "gaze_angle_x", "gaze_angle_y")
DETECTION_COLUMNS = ("frame", "class", "x", "y", "w", "h", "confidence")

_AU_INTENSITY_RE = re.compile(r"AU(\d{1,2})_r")
_AU_PRESENCE_RE = re.compile(r"AU(\d{1,2})_c")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GazeSample:
    """One frame of eye-gaze tracking; angles are radians."""

    frame_index: int
    timestamp_s: float
    success: bool
    gaze_angle_x: float
    gaze_angle_y: float


@dataclass(frozen=True)
class AUFrame:
    """Action-unit intensities for one frame, keyed by AU id (1..45)."""

    frame_index: int
    intensity: Mapping[int, float]


@dataclass(frozen=True)
class EmotionFrame:
    """Per-frame emotion class probabilities; values sum to ~1."""

    frame_index: int
    probs: Mapping[str, float]


@dataclass(frozen=True)
class DetectionBox:
    """A person bounding box in pixel coordinates (top-left origin)."""

    frame_index: int
    class_label: str
    x: float
    y: float
    w: float
    h: float
    confidence: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True, eq=False)
class GrayFrame:
    """One grayscale frame; ``pixels`` is uint8 with shape (height, width)."""

    frame_index: int
    pixels: np.ndarray

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayFrame):
            return NotImplemented
        return (self.frame_index == other.frame_index
                and np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True)
class FeatureBundle:
    """All validated per-frame streams for one video.

    Streams are independent: upstream models fail on different frames, so
    the sequences need not cover identical frame ranges. An empty tuple
    means the stream is absent. ``gaze_calibration`` holds the gaze samples
    of the manually extracted eye-contact clip used to fit the gaze
    rectangle for this video.
    """

    video_id: str
    fps: float
    gaze: tuple[GazeSample, ...] = ()
    aus: tuple[AUFrame, ...] = ()
    emotions: tuple[EmotionFrame, ...] = ()
    detections: tuple[DetectionBox, ...] = ()
    frames: tuple[GrayFrame, ...] = ()
    gaze_calibration: tuple[GazeSample, ...] = ()


# ---------------------------------------------------------------------------
# Low-level table reading
# ---------------------------------------------------------------------------

def _read_table(path: str | Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Read a CSV into a stripped header plus (line_no, cells) data rows."""
    path = Path(path)
    if not path.is_file():
        raise ParseError("file not found", source=path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [cell.strip() for cell in next(reader)]
        except StopIteration:
            raise SchemaError("empty file: a header row is required", source=path) from None
        rows = []
        for line_no, raw in enumerate(reader, start=2):
            cells = [cell.strip() for cell in raw]
            if not cells or all(cell == "" for cell in cells):
                continue
            if len(cells) != len(header):
                raise ParseError(
                    f"row has {len(cells)} values, header has {len(header)}",
                    source=path, row=line_no,
                )
            rows.append((line_no, cells))
    return header, rows


def _require_columns(header: list[str], required: Iterable[str],
                     path: Path) -> dict[str, int]:
    index = {name: i for i, name in enumerate(header)}
    for name in required:
        if name not in index:
            raise SchemaError(f"missing required column {name!r}", source=path)
    return index


def _float_cell(cells: list[str], col: int, name: str, path: Path, line_no: int) -> float:
    raw = cells[col]
    try:
        return float(raw)
    except ValueError:
        raise ParseError(
            f"non-numeric value {raw!r} in column {name!r}",
            source=path, row=line_no,
        ) from None


def _int_cell(cells: list[str], col: int, name: str, path: Path, line_no: int) -> int:
    raw = cells[col]
    try:
        return int(raw)
    except ValueError:
        raise ParseError(
            f"non-integer value {raw!r} in column {name!r}",
            source=path, row=line_no,
        ) from None


def _au_columns(header: list[str], path: Path) -> list[tuple[int, int]]:
    """Return (au_id, column_index) pairs for intensity columns, sorted by id."""
    found = []
    for col, name in enumerate(header):
        match = _AU_INTENSITY_RE.fullmatch(name)
        if match is None:
            continue
        au_id = int(match.group(1))
        if not 1 <= au_id <= 45:
            raise SchemaError(f"action-unit id out of range in column {name!r}", source=path)
        found.append((au_id, col))
    found.sort()
    return found


# ---------------------------------------------------------------------------
# Stream parsers
# ---------------------------------------------------------------------------

def parse_face_csv(path: str | Path) -> tuple[list[GazeSample], list[AUFrame]]:
    """Parse a face-tracker CSV into gaze samples and AU intensity frames.

    Requires the gaze columns; AU intensity columns are picked up when
    present (zero are tolerated, e.g. for calibration clips exported without
    them). Rows with ``success`` = 0 are retained with the flag cleared so
    downstream scoring can exclude them explicitly.
    """
    path = Path(path)
    header, rows = _read_table(path)
    cols = _require_columns(header, GAZE_COLUMNS, path)
    au_cols = _au_columns(header, path)

    gaze: list[GazeSample] = []
    aus: list[AUFrame] = []
    last_frame: int | None = None
    n_failed = 0
    for line_no, cells in rows:
        frame = _int_cell(cells, cols["frame"], "frame", path, line_no)
        if last_frame is not None and frame <= last_frame:
            raise ValidationError(
                f"frame index {frame} is not strictly increasing",
                source=path, row=line_no,
            )
        last_frame = frame
        timestamp = _float_cell(cells, cols["timestamp"], "timestamp", path, line_no)
        success = _float_cell(cells, cols["success"], "success", path, line_no) != 0.0
        angle_x = _float_cell(cells, cols["gaze_angle_x"], "gaze_angle_x", path, line_no)
        angle_y = _float_cell(cells, cols["gaze_angle_y"], "gaze_angle_y", path, line_no)
        if not (math.isfinite(angle_x) and math.isfinite(angle_y)):
            raise ValidationError("gaze angles must be finite", source=path, row=line_no)
        if not success:
            n_failed += 1
        gaze.append(GazeSample(frame, timestamp, success, angle_x, angle_y))

        intensity: dict[int, float] = {}
        for au_id, col in au_cols:
            raw = cells[col]
            if raw == "":
                continue
            value = _float_cell(cells, col, f"AU{au_id:02d}_r", path, line_no)
            if not 0.0 <= value <= 5.0:
                raise ValidationError(
                    f"AU{au_id:02d} intensity {value} outside [0, 5]",
                    source=path, row=line_no,
                )
            intensity[au_id] = value
        aus.append(AUFrame(frame, intensity))

    if n_failed:
        logger.info("%s: %d of %d rows flagged as failed tracking (success=0)",
                    path, n_failed, len(gaze))
    return gaze, aus


def parse_aus_csv(path: str | Path) -> list[AUFrame]:
    """Parse a canonical AU stream (``frame`` plus ``AU<NN>_r`` columns)."""
    path = Path(path)
    header, rows = _read_table(path)
    cols = _require_columns(header, ("frame",), path)
    au_cols = _au_columns(header, path)

    frames: list[AUFrame] = []
    last_frame: int | None = None
    for line_no, cells in rows:
        frame = _int_cell(cells, cols["frame"], "frame", path, line_no)
        if last_frame is not None and frame <= last_frame:
            raise ValidationError(
                f"frame index {frame} is not strictly increasing",
                source=path, row=line_no,
            )
        last_frame = frame
        intensity: dict[int, float] = {}
        for au_id, col in au_cols:
            raw = cells[col]
            if raw == "":
                continue
            value = _float_cell(cells, col, f"AU{au_id:02d}_r", path, line_no)
            if not 0.0 <= value <= 5.0:
                raise ValidationError(
                    f"AU{au_id:02d} intensity {value} outside [0, 5]",
                    source=path, row=line_no,
                )
            intensity[au_id] = value
        frames.append(AUFrame(frame, intensity))
    return frames


def parse_emotion_csv(path: str | Path) -> list[EmotionFrame]:
    """Parse per-frame emotion class scores, validating the sum invariant."""
    path = Path(path)
    header, rows = _read_table(path)
    cols = _require_columns(header, ("frame",) + EMOTION_CLASSES, path)

    frames: list[EmotionFrame] = []
    last_frame: int | None = None
    for line_no, cells in rows:
        frame = _int_cell(cells, cols["frame"], "frame", path, line_no)
        if last_frame is not None and frame <= last_frame:
            raise ValidationError(
                f"frame index {frame} is not strictly increasing",
                source=path, row=line_no,
            )
        last_frame = frame
        probs: dict[str, float] = {}
        for name in EMOTION_CLASSES:
            value = _float_cell(cells, cols[name], name, path, line_no)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(
                    f"{name} probability {value} outside [0, 1] at frame {frame}",
                    source=path, row=line_no,
                )
            probs[name] = value
        total = sum(probs.values())
        if abs(total - 1.0) > EMOTION_SUM_TOLERANCE:
            raise ValidationError(
                f"class probabilities sum to {total:.4f} at frame {frame}, "
                f"expected 1 +/- {EMOTION_SUM_TOLERANCE}",
                source=path, row=line_no,
            )
        frames.append(EmotionFrame(frame, probs))
    return frames


def parse_detections_csv(path: str | Path) -> list[DetectionBox]:
    """Parse detector boxes, keeping only the person class.

    Rows for other classes are dropped; the drop count is logged as one
    warning. Multiple person boxes per frame are allowed, so frame indices
    only need to be non-decreasing.
    """
    path = Path(path)
    header, rows = _read_table(path)
    cols = _require_columns(header, DETECTION_COLUMNS, path)

    boxes: list[DetectionBox] = []
    last_frame: int | None = None
    n_dropped = 0
    for line_no, cells in rows:
        label = cells[cols["class"]]
        if label != PERSON_CLASS:
            n_dropped += 1
            continue
        frame = _int_cell(cells, cols["frame"], "frame", path, line_no)
        if last_frame is not None and frame < last_frame:
            raise ValidationError(
                f"frame index {frame} is out of order", source=path, row=line_no,
            )
        last_frame = frame
        x = _float_cell(cells, cols["x"], "x", path, line_no)
        y = _float_cell(cells, cols["y"], "y", path, line_no)
        w = _float_cell(cells, cols["w"], "w", path, line_no)
        h = _float_cell(cells, cols["h"], "h", path, line_no)
        confidence = _float_cell(cells, cols["confidence"], "confidence", path, line_no)
        if not all(math.isfinite(v) for v in (x, y, w, h, confidence)):
            raise ValidationError("box values must be finite", source=path, row=line_no)
        if w <= 0 or h <= 0:
            raise ValidationError(
                f"box size {w}x{h} must be positive", source=path, row=line_no,
            )
        if not 0.0 <= confidence <= 1.0:
            raise ValidationError(
                f"confidence {confidence} outside [0, 1]", source=path, row=line_no,
            )
        boxes.append(DetectionBox(frame, label, x, y, w, h, confidence))

    if n_dropped:
        logger.warning("%s: dropped %d non-person detection rows", path, n_dropped)
    return boxes


def load_frames(directory: str | Path) -> list[GrayFrame]:
    """Load grayscale frames from a directory of ``*.pgm`` files.

    Lexicographic filename order defines frame order; all frames must share
    one width and height.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError("frame directory not found", source=directory)
    frames: list[GrayFrame] = []
    shape: tuple[int, int] | None = None
    for index, name in enumerate(sorted(p.name for p in directory.glob("*.pgm"))):
        pixels = read_pgm(directory / name)
        if shape is None:
            shape = pixels.shape
        elif pixels.shape != shape:
            raise ValidationError(
                f"frame {name} is {pixels.shape[1]}x{pixels.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}",
                source=directory / name,
            )
        frames.append(GrayFrame(index, pixels))
    return frames


# ---------------------------------------------------------------------------
# Bundle assembly
# ---------------------------------------------------------------------------

def _ordered(stream: Sequence, what: str, *, strict: bool = True) -> tuple:
    """Return the stream sorted by frame index, warning when out of order."""
    items = list(stream)
    indices = [item.frame_index for item in items]
    if any(b < a for a, b in zip(indices, indices[1:])):
        logger.warning("%s stream was not sorted by frame index; sorting", what)
        items.sort(key=lambda item: item.frame_index)
        indices = [item.frame_index for item in items]
    if strict and any(a == b for a, b in zip(indices, indices[1:])):
        raise ValidationError(f"duplicate frame index in {what} stream")
    return tuple(items)


def assemble_bundle(video_id: str, fps: float, *,
                    gaze: Sequence[GazeSample] = (),
                    aus: Sequence[AUFrame] = (),
                    emotions: Sequence[EmotionFrame] = (),
                    detections: Sequence[DetectionBox] = (),
                    frames: Sequence[GrayFrame] = (),
                    gaze_calibration: Sequence[GazeSample] = ()) -> FeatureBundle:
    """Validate and combine independently parsed streams into one bundle."""
    if not video_id:
        raise ValidationError("video_id must be non-empty")
    if not (isinstance(fps, (int, float)) and math.isfinite(fps) and fps > 0):
        raise ValidationError(f"fps must be a positive number, got {fps!r}")

    frame_tuple = _ordered(frames, "frames")
    shapes = {f.pixels.shape for f in frame_tuple}
    if len(shapes) > 1:
        raise ValidationError("frames do not share one width and height")

    return FeatureBundle(
        video_id=video_id,
        fps=float(fps),
        gaze=_ordered(gaze, "gaze"),
        aus=_ordered(aus, "AU"),
        emotions=_ordered(emotions, "emotion"),
        detections=_ordered(detections, "detection", strict=False),
        frames=frame_tuple,
        gaze_calibration=_ordered(gaze_calibration, "gaze calibration"),
    )


# ---------------------------------------------------------------------------
# Canonical stream writers
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    """Shortest decimal form that parses back to the identical float."""
    return repr(float(value))


def _write_rows(path: str | Path, header: Sequence[str],
                rows: Iterable[Sequence[str]]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_gaze_csv(path: str | Path, samples: Sequence[GazeSample]) -> None:
    _write_rows(path, GAZE_COLUMNS, (
        (str(s.frame_index), _fmt(s.timestamp_s), str(int(s.success)),
         _fmt(s.gaze_angle_x), _fmt(s.gaze_angle_y))
        for s in samples
    ))


def write_aus_csv(path: str | Path, frames: Sequence[AUFrame]) -> None:
    au_ids = sorted({au_id for frame in frames for au_id in frame.intensity})
    header = ["frame"] + [f"AU{au_id:02d}_r" for au_id in au_ids]
    rows = []
    for frame in frames:
        row = [str(frame.frame_index)]
        row += [_fmt(frame.intensity[au_id]) if au_id in frame.intensity else ""
                for au_id in au_ids]
        rows.append(row)
    _write_rows(path, header, rows)


def write_emotions_csv(path: str | Path, frames: Sequence[EmotionFrame]) -> None:
    _write_rows(path, ("frame",) + EMOTION_CLASSES, (
        [str(f.frame_index)] + [_fmt(f.probs[name]) for name in EMOTION_CLASSES]
        for f in frames
    ))


def write_detections_csv(path: str | Path, boxes: Sequence[DetectionBox]) -> None:
    _write_rows(path, DETECTION_COLUMNS, (
        (str(b.frame_index), b.class_label, _fmt(b.x), _fmt(b.y),
         _fmt(b.w), _fmt(b.h), _fmt(b.confidence))
        for b in boxes
    ))


def write_frames(directory: str | Path, frames: Sequence[GrayFrame]) -> None:
    """Write frames as zero-padded ``f<NNNN>.pgm`` files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for position, frame in enumerate(frames):
        write_pgm(directory / f"f{position:04d}.pgm", frame.pixels)
