#!/usr/bin/env python3
"""Regenerate the shipped demo data under data/.

Writes hand-designed upstream exports (data/upstream_demo/), ingests them
into the canonical demo bundle (data/synthetic_bundle/demo01/), and writes
the two-rater fixture CSVs (data/ratings/). Everything is deterministic;
the fixture numbers are chosen so every concept score can be derived by
hand:

* gaze: 30 tracked samples, 24 inside the calibration rectangle -> 80%
* vocalization: 10 low / 5 med / 5 high evidence frames -> 37.5%
* emotions: constant probabilities, so the per-video means are the
  per-frame values times 100
* frames: static 16x16 background (value 30) with single-frame flashes to
  200 at a 2x2 block (frames 10, 20, 30) and at pixel (8, 8) (frame 15),
  giving heatmap counts of exactly 3 and 1 on those pixels
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from cibscore import ingest  # noqa: E402
from cibscore.bundle import write_bundle  # noqa: E402
from cibscore.pgm import write_pgm  # noqa: E402

DATA = REPO / "data"
UPSTREAM = DATA / "upstream_demo"
BUNDLE = DATA / "synthetic_bundle" / "demo01"
RATINGS = DATA / "ratings"

FPS = 25.0
VIDEO_ID = "demo01"

BACKGROUND = 30
FLASH = 200
N_FRAMES = 40
BLOCK_FLASH_FRAMES = (10, 20, 30)   # pixels (2,2) (2,3) (3,2) (3,3)
POINT_FLASH_FRAME = 15              # pixel (8,8)


def write_face_csv(path: Path) -> None:
    # OpenFace-style export: extra columns, spaces after commas, binary
    # AU presence column that the parser must ignore.
    header = ("frame, face_id, timestamp, confidence, success, "
              "gaze_angle_x, gaze_angle_y, AU12_r, AU25_r, AU26_r, AU12_c")
    lines = [header]
    for frame in range(1, 33):
        timestamp = (frame - 1) / FPS
        if frame <= 20:
            success, gx, gy = 1, [0.02, -0.05, 0.08][frame % 3], [-0.03, 0.01, -0.12][frame % 3]
        elif frame <= 22:
            success, gx, gy = 0, 0.5, 0.5
        elif frame <= 28:
            success, gx, gy = 1, 0.3, 0.2
        elif frame == 29:
            success, gx, gy = 1, 0.1, 0.05  # exactly on the rectangle boundary
        else:
            success, gx, gy = 1, 0.0, 0.0
        if frame <= 10:
            au12, au25, au26 = 1.5, 0.0, 0.0   # low: closed-mouth AU present
        elif frame <= 15:
            au12, au25, au26 = 2.0, 2.0, 0.5   # med: lips part
        elif frame <= 20:
            au12, au25, au26 = 1.0, 3.0, 1.0   # high: jaw drop outranks the rest
        else:
            au12, au25, au26 = 0.2, 0.5, 0.0   # no evidence
        lines.append(
            f"{frame}, 0, {timestamp!r}, 0.98, {success}, {gx!r}, {gy!r}, "
            f"{au12!r}, {au25!r}, {au26!r}, {int(au12 >= 1)}"
        )
    path.write_text("\n".join(lines) + "\n")


def write_calibration_csv(path: Path) -> None:
    points = [
        (1, 1, -0.10, -0.15),
        (2, 1, 0.10, 0.05),
        (3, 1, 0.0, -0.05),
        (4, 1, 0.03, -0.1),
        (5, 1, -0.04, 0.0),
        (6, 1, 0.06, -0.02),
        (7, 1, -0.08, 0.03),
        (8, 1, 0.01, -0.14),
        (9, 1, 0.09, -0.07),
        (10, 0, 0.5, 0.5),  # failed tracking; must not widen the rectangle
    ]
    lines = ["frame, timestamp, success, gaze_angle_x, gaze_angle_y"]
    for frame, success, gx, gy in points:
        lines.append(f"{frame}, {(frame - 1) / FPS!r}, {success}, {gx!r}, {gy!r}")
    path.write_text("\n".join(lines) + "\n")


def write_emotions_csv(path: Path) -> None:
    lines = ["frame,angry,disgust,fear,happy,neutral,sad,surprise"]
    for frame in range(1, 21):
        lines.append(f"{frame},0.04,0.02,0.03,0.5,0.3,0.1,0.01")
    path.write_text("\n".join(lines) + "\n")


def write_detections_csv(path: Path) -> None:
    lines = ["frame,class,x,y,w,h,confidence"]
    for frame in range(1, 41):
        lines.append(f"{frame},person,4,4,8,8,0.9")          # youth, area 64
        if frame <= 20:
            lines.append(f"{frame},person,0,12,3,3,0.8")     # interviewer, area 9
        if frame <= 3:
            lines.append(f"{frame},chair,10,10,2,2,0.5")     # dropped by the filter
    path.write_text("\n".join(lines) + "\n")


def write_frame_files(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for index in range(N_FRAMES):
        pixels = np.full((16, 16), BACKGROUND, dtype=np.uint8)
        if index in BLOCK_FLASH_FRAMES:
            pixels[2:4, 2:4] = FLASH
        if index == POINT_FLASH_FRAME:
            pixels[8, 8] = FLASH
        write_pgm(directory / f"f{index:03d}.pgm", pixels)


def write_ratings() -> None:
    RATINGS.mkdir(parents=True, exist_ok=True)
    (RATINGS / "rater1.csv").write_text(
        "rater_id,video_id,item,score\n"
        "rater1,demo01,gaze,3.0\n"
        "rater1,demo01,attention,4.0\n"
        "rater1,demo02,gaze,2.0\n"
        "rater1,demo02,attention,3.5\n"
    )
    (RATINGS / "rater2.csv").write_text(
        "rater_id,video_id,item,score\n"
        "rater2,demo01,gaze,3.5\n"
        "rater2,demo01,attention,4.0\n"
        "rater2,demo02,gaze,4.0\n"
        "rater2,demo02,attention,3.0\n"
    )


def main() -> None:
    UPSTREAM.mkdir(parents=True, exist_ok=True)
    write_face_csv(UPSTREAM / "face.csv")
    write_calibration_csv(UPSTREAM / "calibration.csv")
    write_emotions_csv(UPSTREAM / "emotions.csv")
    write_detections_csv(UPSTREAM / "detections.csv")
    write_frame_files(UPSTREAM / "frames")
    write_ratings()

    gaze, aus = ingest.parse_face_csv(UPSTREAM / "face.csv")
    bundle = ingest.assemble_bundle(
        VIDEO_ID, FPS,
        gaze=gaze, aus=aus,
        emotions=ingest.parse_emotion_csv(UPSTREAM / "emotions.csv"),
        detections=ingest.parse_detections_csv(UPSTREAM / "detections.csv"),
        frames=ingest.load_frames(UPSTREAM / "frames"),
        gaze_calibration=ingest.parse_face_csv(UPSTREAM / "calibration.csv")[0],
    )
    write_bundle(bundle, BUNDLE)
    print(f"demo data written under {DATA}")


if __name__ == "__main__":
    main()
