"""Canonical per-video bundle directories.

A bundle holds one video's validated streams:

    <dir>/
      meta              required; ``key = value`` lines (see below)
      gaze.csv          optional gaze stream
      aus.csv           optional AU intensity stream
      emotions.csv      optional emotion stream
      detections.csv    optional person-box stream
      calibration.csv   optional eye-contact calibration clip
      frames/           optional grayscale frames, *.pgm

``meta`` keys: ``video_id`` (required), ``fps`` (required, frames/second),
``gaze_calibration`` (optional, path of the calibration gaze file relative
to the bundle directory). Lines starting with ``#`` and blank lines are
ignored; unknown keys are rejected.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError, SchemaError, ValidationError
from .ingest import (
    FeatureBundle,
    assemble_bundle,
    load_frames,
    parse_aus_csv,
    parse_detections_csv,
    parse_emotion_csv,
    parse_face_csv,
    write_aus_csv,
    write_detections_csv,
    write_emotions_csv,
    write_frames,
    write_gaze_csv,
)

META_FILENAME = "meta"
META_KEYS = ("video_id", "fps", "gaze_calibration")

GAZE_FILENAME = "gaze.csv"
AUS_FILENAME = "aus.csv"
EMOTIONS_FILENAME = "emotions.csv"
DETECTIONS_FILENAME = "detections.csv"
CALIBRATION_FILENAME = "calibration.csv"
FRAMES_DIRNAME = "frames"


def read_meta(path: str | Path) -> dict[str, str]:
    """Parse a ``key = value`` metadata file."""
    path = Path(path)
    if not path.is_file():
        raise ParseError("bundle meta file not found", source=path)
    values: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError("expected 'key = value'", source=path, row=line_no)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in META_KEYS:
            raise SchemaError(f"unknown meta key {key!r}", source=path, row=line_no)
        if key in values:
            raise ValidationError(f"duplicate meta key {key!r}", source=path, row=line_no)
        values[key] = value.strip()
    for required in ("video_id", "fps"):
        if required not in values:
            raise SchemaError(f"missing required meta key {required!r}", source=path)
    return values


def write_meta(path: str | Path, video_id: str, fps: float,
               gaze_calibration: str | None = None) -> None:
    lines = [f"video_id = {video_id}", f"fps = {repr(float(fps))}"]
    if gaze_calibration is not None:
        lines.append(f"gaze_calibration = {gaze_calibration}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_bundle(bundle: FeatureBundle, directory: str | Path) -> Path:
    """Write a bundle's non-empty streams to ``directory`` and return it."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    calibration_name = CALIBRATION_FILENAME if bundle.gaze_calibration else None
    write_meta(directory / META_FILENAME, bundle.video_id, bundle.fps, calibration_name)
    if bundle.gaze:
        write_gaze_csv(directory / GAZE_FILENAME, bundle.gaze)
    if bundle.aus:
        write_aus_csv(directory / AUS_FILENAME, bundle.aus)
    if bundle.emotions:
        write_emotions_csv(directory / EMOTIONS_FILENAME, bundle.emotions)
    if bundle.detections:
        write_detections_csv(directory / DETECTIONS_FILENAME, bundle.detections)
    if calibration_name:
        write_gaze_csv(directory / calibration_name, bundle.gaze_calibration)
    if bundle.frames:
        write_frames(directory / FRAMES_DIRNAME, bundle.frames)
    return directory


def read_bundle(directory: str | Path) -> FeatureBundle:
    """Load a canonical bundle directory into a validated FeatureBundle."""
    directory = Path(directory)
    meta = read_meta(directory / META_FILENAME)
    try:
        fps = float(meta["fps"])
    except ValueError:
        raise ParseError(
            f"non-numeric fps {meta['fps']!r}", source=directory / META_FILENAME,
        ) from None

    gaze_path = directory / GAZE_FILENAME
    gaze = parse_face_csv(gaze_path)[0] if gaze_path.is_file() else ()

    aus_path = directory / AUS_FILENAME
    aus = parse_aus_csv(aus_path) if aus_path.is_file() else ()

    emotions_path = directory / EMOTIONS_FILENAME
    emotions = parse_emotion_csv(emotions_path) if emotions_path.is_file() else ()

    detections_path = directory / DETECTIONS_FILENAME
    detections = parse_detections_csv(detections_path) if detections_path.is_file() else ()

    calibration = ()
    if "gaze_calibration" in meta:
        calibration_path = directory / meta["gaze_calibration"]
        calibration = parse_face_csv(calibration_path)[0]

    frames_dir = directory / FRAMES_DIRNAME
    frames = load_frames(frames_dir) if frames_dir.is_dir() else ()

    return assemble_bundle(
        meta["video_id"], fps,
        gaze=gaze, aus=aus, emotions=emotions, detections=detections,
        frames=frames, gaze_calibration=calibration,
    )
