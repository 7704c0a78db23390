"""Command-line front end.

Subcommands: ``ingest`` (upstream exports -> canonical bundle), ``score``
(bundles -> concept-scores CSV, optional heatmaps), ``evaluate`` (two
rating sources -> agreement report files), ``selftest`` (embedded oracle
suite). Exit codes: 0 success, 2 parse/validation, 3 evaluation-input,
4 internal.
"""

from __future__ import annotations

import logging
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import bundle as bundle_io
from . import composites, ingest, motion
from .agreement import (
    RatingTable,
    compare_tables,
    load_ratings_csv,
    table_from_machine_scores,
)
from .config import CONFIG_ENV_VAR, RunConfig, apply_overrides, load_config
from .errors import (
    CibscoreError,
    EvaluationError,
    NoEvidenceError,
    ParseError,
    SchemaError,
    ValidationError,
)
from .report import (
    plot_per_item_agreement,
    render_summary,
    write_per_item_csv,
    write_report_csv,
)
from .selftest import run_checks

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EVALUATION = 3
EXIT_INTERNAL = 4

logger = logging.getLogger("cibscore")


class _WarningCounter(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.count = 0

    def emit(self, record: logging.LogRecord) -> None:
        self.count += 1


def _setup_logging() -> _WarningCounter:
    root = logging.getLogger("cibscore")
    root.setLevel(logging.INFO)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root.addHandler(stream)
    counter = _WarningCounter()
    root.addHandler(counter)
    return counter


def _fail(code: int, err: Exception) -> None:
    click.echo(f"error: {err}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Map pipeline exceptions onto the documented exit codes."""
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EvaluationError as err:
            _fail(EXIT_EVALUATION, err)
        except (SchemaError, ParseError, ValidationError, NoEvidenceError) as err:
            _fail(EXIT_INPUT, err)
        except (click.ClickException, click.exceptions.Exit, SystemExit):
            raise
        except (CibscoreError, Exception) as err:  # noqa: BLE001 - last resort
            _fail(EXIT_INTERNAL, err)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _load_run_config(config_path: str | None, **overrides) -> RunConfig:
    cfg = load_config(config_path) if config_path else RunConfig()
    if "items" in overrides and overrides["items"] is not None:
        overrides["items"] = tuple(
            part.strip() for part in overrides["items"].split(",") if part.strip()
        )
    if "youth_region_policy" in overrides and overrides["youth_region_policy"] is not None:
        raw = overrides["youth_region_policy"]
        overrides["youth_region_policy"] = (
            raw if raw == motion.LARGEST_AREA_POLICY else int(raw)
        )
    return apply_overrides(cfg, **overrides)


@click.group()
@click.version_option(package_name="cibscore")
def main() -> None:
    """Behavior-concept scoring and rater-agreement toolkit."""


_config_option = click.option(
    "--config", "config_path", envvar=CONFIG_ENV_VAR, default=None,
    help=f"Flat key=value config file (or ${CONFIG_ENV_VAR}). Flags win.",
)


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

@main.command()
@click.option("--video-id", required=True)
@click.option("--fps", type=float, required=True)
@click.option("--face", "face_path", default=None,
              help="Face-tracker CSV with gaze and AU intensity columns.")
@click.option("--emotions", "emotions_path", default=None,
              help="Per-frame emotion class CSV.")
@click.option("--detections", "detections_path", default=None,
              help="Detector box CSV (person rows are kept).")
@click.option("--frames", "frames_dir", default=None,
              help="Directory of grayscale *.pgm frames.")
@click.option("--calibration", "calibration_path", default=None,
              help="Eye-contact calibration clip (face CSV layout).")
@click.option("-o", "--out", "out_dir", required=True,
              help="Bundle directory to write.")
@_guarded
def ingest_cmd(video_id, fps, face_path, emotions_path, detections_path,
               frames_dir, calibration_path, out_dir):
    """Parse upstream model exports into a canonical bundle directory."""
    counter = _setup_logging()

    def optional(path, kind):
        if path is None:
            return None
        if not Path(path).exists():
            logger.warning("%s file %s not found; bundle written without it",
                           kind, path)
            return None
        return Path(path)

    gaze_stream, au_stream = (), ()
    face = optional(face_path, "face")
    if face:
        gaze_stream, au_stream = ingest.parse_face_csv(face)
    emotions = ()
    path = optional(emotions_path, "emotions")
    if path:
        emotions = ingest.parse_emotion_csv(path)
    detections = ()
    path = optional(detections_path, "detections")
    if path:
        detections = ingest.parse_detections_csv(path)
    frames = ()
    path = optional(frames_dir, "frames")
    if path:
        frames = ingest.load_frames(path)
    calibration = ()
    path = optional(calibration_path, "calibration")
    if path:
        calibration = ingest.parse_face_csv(path)[0]

    built = ingest.assemble_bundle(
        video_id, fps, gaze=gaze_stream, aus=au_stream, emotions=emotions,
        detections=detections, frames=frames, gaze_calibration=calibration,
    )
    bundle_io.write_bundle(built, out_dir)
    click.echo(f"bundle written to {out_dir}")
    for name, stream in (("gaze", built.gaze), ("aus", built.aus),
                         ("emotions", built.emotions),
                         ("detections", built.detections),
                         ("frames", built.frames),
                         ("calibration", built.gaze_calibration)):
        click.echo(f"  {name}: {len(stream)} rows")
    click.echo(f"  warnings: {counter.count}")
main.add_command(ingest_cmd, name="ingest")


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------

def _score_one(bundle_dir: str, cfg: RunConfig, emit_heatmaps: bool, out: Path):
    """Score one bundle; returns (video_id, scores, error_message)."""
    loaded = bundle_io.read_bundle(bundle_dir)
    heatmap = None
    region = None
    if loaded.frames:
        masks = motion.subtract_background(loaded.frames, cfg.mixture_params())
        masks = [motion.threshold_mask(m, cfg.binary_threshold) for m in masks]
        heatmap = motion.accumulate_heatmap(masks)
        if cfg.use_youth_region and loaded.detections:
            region = motion.select_youth_region(
                loaded.detections, policy=cfg.youth_region_policy,
                features=cfg.youth_region_features, seed=cfg.seed,
            )
    scores = composites.score_video(loaded, cfg, heatmap=heatmap, region=region)
    if emit_heatmaps and heatmap is not None:
        activity = motion.activity_score(heatmap, region)
        motion.write_heatmap(heatmap, out / f"{loaded.video_id}_heatmap.pgm", activity)
    return loaded.video_id, scores


@main.command()
@click.argument("bundles", nargs=-1, required=True,
                type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--out", "out_dir", default=None,
              help="Output directory (default from config, 'out').")
@_config_option
@click.option("--seed", type=int, default=None)
@click.option("--mog-components", type=int, default=None)
@click.option("--mog-learning-rate", type=float, default=None)
@click.option("--mog-match-threshold", type=float, default=None)
@click.option("--mog-background-ratio", type=float, default=None)
@click.option("--mog-min-variance", type=float, default=None)
@click.option("--binary-threshold", type=int, default=None)
@click.option("--use-youth-region/--no-youth-region", "use_youth_region",
              default=None)
@click.option("--youth-region-policy", default=None,
              help="'largest-area' or a cluster index.")
@click.option("--youth-region-features", default=None,
              type=click.Choice([motion.CENTER_FEATURES, motion.CORNER_FEATURES]))
@click.option("--emit-heatmaps", is_flag=True,
              help="Write <video>_heatmap.pgm plus an activity sidecar.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Videos scored concurrently (one worker per video).")
@_guarded
def score_cmd(bundles, out_dir, config_path, seed, mog_components,
              mog_learning_rate, mog_match_threshold, mog_background_ratio,
              mog_min_variance, binary_threshold, use_youth_region,
              youth_region_policy, youth_region_features, emit_heatmaps, jobs):
    """Score bundles into one concept-scores CSV row per video."""
    counter = _setup_logging()
    cfg = _load_run_config(
        config_path, seed=seed, mog_components=mog_components,
        mog_learning_rate=mog_learning_rate,
        mog_match_threshold=mog_match_threshold,
        mog_background_ratio=mog_background_ratio,
        mog_min_variance=mog_min_variance, binary_threshold=binary_threshold,
        use_youth_region=use_youth_region,
        youth_region_policy=youth_region_policy,
        youth_region_features=youth_region_features,
        output_dir=out_dir,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    def worker(bundle_dir: str):
        try:
            return _score_one(bundle_dir, cfg, emit_heatmaps, out), None
        except CibscoreError as err:
            return None, (bundle_dir, str(err))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(worker, bundles))
    else:
        outcomes = [worker(b) for b in bundles]

    rows = [ok for ok, _ in outcomes if ok is not None]
    failures = [err for _, err in outcomes if err is not None]

    composites.write_scores_csv(out / "scores.csv", rows)
    if failures:
        with (out / "score_errors.csv").open("w", newline="") as fh:
            fh.write("bundle,error\n")
            for bundle_dir, message in failures:
                fh.write(f"{bundle_dir},{message.replace(chr(10), ' ')}\n")
        for bundle_dir, message in failures:
            logger.warning("skipped %s: %s", bundle_dir, message)

    click.echo(f"scored {len(rows)} of {len(bundles)} bundles -> {out / 'scores.csv'}")
    click.echo(f"  warnings: {counter.count}")
main.add_command(score_cmd, name="score")


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def _load_rating_source(path: str, rater: str | None, cfg: RunConfig) -> RatingTable:
    """Load a ratings CSV or a machine concept-scores CSV (auto-detected)."""
    header = Path(path).open().readline()
    names = {cell.strip() for cell in header.split(",")}
    if set(composites.SCORES_HEADER) <= names:
        machine = composites.read_scores_csv(path)
        logger.info("%s: machine scores quantized with the %r scale map",
                    path, cfg.scale_map)
        return table_from_machine_scores(machine, cfg.scale_map_fn())
    tables = load_ratings_csv(path)
    if rater is not None:
        for table in tables:
            if table.rater_id == rater:
                return table
        raise EvaluationError(f"rater {rater!r} not present", source=path)
    if len(tables) > 1:
        raise EvaluationError(
            f"file holds {len(tables)} raters; pick one with --rater-a/--rater-b",
            source=path,
        )
    return tables[0]


@main.command()
@click.argument("ratings_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("ratings_b", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", "out_dir", default=None,
              help="Output directory (default from config, 'out').")
@_config_option
@click.option("--rater-a", default=None, help="Rater id to use from RATINGS_A.")
@click.option("--rater-b", default=None, help="Rater id to use from RATINGS_B.")
@click.option("--items", default=None,
              help="Comma list restricting the compared CIB items.")
@click.option("--drop-items", default=None,
              help="Comma list of CIB items to exclude.")
@click.option("--scale-map", "scale_map", default=None,
              help="Scale map for machine scores (default linear).")
@click.option("--figure/--no-figure", default=True, show_default=True,
              help="Render the per-item agreement bar chart (SVG).")
@_guarded
def evaluate_cmd(ratings_a, ratings_b, out_dir, config_path, rater_a, rater_b,
                 items, drop_items, scale_map, figure):
    """Percent-agreement report for two rating sources.

    Either argument may be a ratings CSV (rater_id, video_id, item, score)
    or a machine concept-scores CSV, which is quantized on the fly.
    """
    _setup_logging()
    if items is not None and drop_items is not None:
        raise ValidationError("--items and --drop-items are mutually exclusive")
    cfg = _load_run_config(config_path, items=items, scale_map=scale_map,
                           output_dir=out_dir)
    dropped: tuple[str, ...] = ()
    item_subset = cfg.items
    if drop_items is not None:
        dropped = tuple(part.strip() for part in drop_items.split(",") if part.strip())
        for item in dropped:
            if item not in composites.CONCEPT_ITEMS:
                raise ValidationError(f"unknown CIB item {item!r}")
        item_subset = tuple(i for i in item_subset if i not in dropped)
        if not item_subset:
            raise ValidationError("--drop-items removed every item")

    table_a = _load_rating_source(ratings_a, rater_a, cfg)
    table_b = _load_rating_source(ratings_b, rater_b, cfg)
    report = compare_tables(table_a, table_b, item_subset)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = render_summary(report, dropped)
    (out / "agreement_summary.txt").write_text(summary)
    write_report_csv(report, out / "agreement_report.csv")
    write_per_item_csv(report, out / "per_item_agreement.csv")
    if figure:
        plot_per_item_agreement(report, out / "per_item_agreement.svg")

    click.echo(summary, nl=False)
    click.echo(f"report files written to {out}")
main.add_command(evaluate_cmd, name="evaluate")


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@_guarded
def selftest_cmd(seed):
    """Run the embedded oracle suite and print one line per property."""
    results = run_checks(seed)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        detail = f" ({result.detail})" if result.detail else ""
        click.echo(f"{status} {result.name}{detail}")
    failed = sum(1 for r in results if not r.passed)
    click.echo(f"selftest: {len(results) - failed} passed, {failed} failed")
    if failed:
        sys.exit(EXIT_INTERNAL)
main.add_command(selftest_cmd, name="selftest")


if __name__ == "__main__":
    main()
