"""Agreement report rendering: summary table, CSVs, and per-item bar chart.

All outputs are deterministic byte-for-byte given the same report: CSV rows
are emitted in canonical order with round-trippable floats, and the SVG
renderer pins matplotlib's hash salt and strips the creation date.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "cibscore"

import matplotlib.pyplot as plt

from .agreement import AgreementReport

SUMMARY_TITLE = "Average percent agreement over the videos"

# Display names for the per-item chart, mirroring common shorthand.
ITEM_LABELS = {
    "gaze": "Gaze",
    "vocalization": "Vocalization",
    "positive_affect": "Positive aff.",
    "negative_emotionality": "Neg. Emo.",
    "activity_arousal": "Act./Arousal",
    "anxiety": "Anxiety",
    "attention": "Attention",
}


def render_summary(report: AgreementReport,
                   dropped_items: Sequence[str] = ()) -> str:
    """Two-column comparison table under the headline-average title."""
    lines = [SUMMARY_TITLE]
    if dropped_items:
        lines.append("Dropped CIB items: " + ", ".join(dropped_items))
    lines.append("")
    comparison = f"{report.rater_a} vs. {report.rater_b}"
    left_width = max(len("Comparison"), len(comparison))
    lines.append(f"{'Comparison'.ljust(left_width)}  Percent agreement")
    lines.append(f"{comparison.ljust(left_width)}  {report.average_over_videos:.0f}%")
    return "\n".join(lines) + "\n"


def write_report_csv(report: AgreementReport, path: str | Path) -> None:
    """Full agreement report: per-item rows, per-video rows, headline row."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("section", "key", "percent_agreement", "pairs_compared"))
        for item, value in report.per_item.items():
            writer.writerow(("per_item", item, repr(value), report.per_item_pairs[item]))
        for video_id, value in report.per_video.items():
            writer.writerow(("per_video", video_id, repr(value),
                             report.per_video_pairs[video_id]))
        writer.writerow(("average_over_videos", "",
                         repr(report.average_over_videos), report.n_pairs))


def write_per_item_csv(report: AgreementReport, path: str | Path) -> None:
    """Bar-chart data: one row per compared item."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("item", "percent_agreement", "pairs_compared"))
        for item, value in report.per_item.items():
            writer.writerow((item, repr(value), report.per_item_pairs[item]))


def plot_per_item_agreement(report: AgreementReport, path: str | Path) -> None:
    """Render the per-item agreement bars to a vector (SVG) file."""
    items = list(report.per_item)
    values = [report.per_item[item] for item in items]
    labels = [ITEM_LABELS.get(item, item) for item in items]

    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.bar(range(len(items)), values, color="#4878a8")
    ax.set_xticks(range(len(items)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0, 100)
    ax.set_ylabel("Percent agreement")
    ax.set_title(f"{report.rater_a} vs. {report.rater_b}")
    ax.yaxis.grid(True, linestyle=":", alpha=0.5)
    ax.set_axisbelow(True)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)
