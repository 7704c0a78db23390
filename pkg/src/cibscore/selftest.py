"""Embedded oracle suite: independent re-implementations that cross-check
the production code paths.

Every oracle here is deliberately written along a different route than the
code it checks (explicit per-frame lists instead of streaming counts,
scalar per-pixel loops instead of vectorized arrays, exhaustive enumeration
instead of Lloyd iteration, nested-loop recounts instead of keyed joins).
``run_checks`` drives all of them on seeded random inputs and returns one
pass/fail result per property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from . import agreement, composites, gaze, motion, vocalization
from .affect import EmotionSummary, peak_expressiveness
from .errors import NoEvidenceError
from .ingest import AUFrame, GazeSample, GrayFrame

RELATIVE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= RELATIVE_TOLERANCE * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# Independent formula oracles
# ---------------------------------------------------------------------------

_CLOSED_MOUTH = (10, 12, 14, 15, 17, 20, 23)


def oracle_vocalization(frames: Sequence[AUFrame]) -> float | None:
    """Materialize per-frame weights, then take their plain mean."""
    weights = []
    for frame in frames:
        jaw = frame.intensity.get(26, 0.0) >= 1.0
        lips = frame.intensity.get(25, 0.0) >= 1.0
        closed = any(frame.intensity.get(au, 0.0) >= 1.0 for au in _CLOSED_MOUTH)
        if jaw:
            weights.append(100.0)
        elif lips:
            weights.append(50.0)
        elif closed:
            weights.append(0.0)
    if not weights:
        return None
    return sum(weights) / len(weights)


def oracle_peak_expressiveness(summary: EmotionSummary) -> float:
    candidates = [summary.happy, summary.angry, summary.surprise,
                  100.0 - summary.neutral]
    return sorted(candidates)[-1]


def oracle_activity_arousal(activity: float, vocal: float, peak: float) -> float:
    return sum([activity, vocal, peak]) / 3.0


def oracle_anxiety(activity: float, fear: float, disgust: float) -> float:
    worst = fear if fear >= disgust else disgust
    return sum([activity, worst]) / 2.0


def oracle_attention(activity: float, anxiety: float) -> float:
    return ((100.0 - activity) + (100.0 - anxiety)) / 2.0


def oracle_quantize(percentage: float) -> float:
    """Nearest-grid search over the nine CIB values, ties to the larger."""
    target = 1 + Fraction(percentage) / 25
    best = None
    for sixteenth in range(9):
        candidate = Fraction(2 + sixteenth, 2)
        distance = abs(target - candidate)
        if best is None or distance < best[0] or (distance == best[0]
                                                  and candidate > best[1]):
            best = (distance, candidate)
    return float(best[1])


# ---------------------------------------------------------------------------
# Agreement recount oracle
# ---------------------------------------------------------------------------

def oracle_compare_tables(a: agreement.RatingTable, b: agreement.RatingTable,
                          items: Sequence[str]):
    """Nested-loop recount over every (video, item) combination."""
    videos = sorted({video for video, _ in a.scores}
                    | {video for video, _ in b.scores})
    per_item, per_item_pairs = {}, {}
    for item in items:
        hits, total = 0, 0
        for video in videos:
            key = (video, item)
            if key in a.scores and key in b.scores:
                total += 1
                if abs(a.scores[key] - b.scores[key]) <= 1.0:
                    hits += 1
        if total:
            per_item[item] = 100.0 * hits / total
            per_item_pairs[item] = total
    per_video, per_video_pairs = {}, {}
    for video in videos:
        hits, total = 0, 0
        for item in items:
            key = (video, item)
            if key in a.scores and key in b.scores:
                total += 1
                if abs(a.scores[key] - b.scores[key]) <= 1.0:
                    hits += 1
        if total:
            per_video[video] = 100.0 * hits / total
            per_video_pairs[video] = total
    average = sum(per_video.values()) / len(per_video) if per_video else None
    return per_item, per_item_pairs, per_video, per_video_pairs, average


# ---------------------------------------------------------------------------
# Background-model references (scalar, per pixel)
# ---------------------------------------------------------------------------

class SingleGaussianReference:
    """One Gaussian per pixel; valid as long as the scene has a single
    stable mode (no component replacement ever triggers)."""

    def __init__(self, params: motion.MixtureParams):
        self.p = params
        self.mean: float | None = None
        self.var = params.initial_variance

    def apply(self, value: float) -> bool:
        if self.mean is None:
            self.mean = float(value)
            return False
        p = self.p
        foreground = abs(value - self.mean) > p.match_threshold * math.sqrt(self.var)
        if not foreground:
            alpha = p.learning_rate
            self.mean = (1.0 - alpha) * self.mean + alpha * value
            deviation = value - self.mean
            self.var = max((1.0 - alpha) * self.var + alpha * deviation * deviation,
                           p.min_variance)
        return foreground


class ScalarMixtureReference:
    """Pure-python per-pixel mixture evolved step by step, mirroring the
    documented update contract without any array code."""

    def __init__(self, params: motion.MixtureParams):
        self.p = params
        self.weights: list[float] | None = None
        self.means: list[float] = []
        self.variances: list[float] = []

    def apply(self, value: float) -> bool:
        p = self.p
        k = p.n_components
        x = float(value)
        if self.weights is None:
            self.weights = [1.0] + [0.0] * (k - 1)
            self.means = [x] * k
            self.variances = [p.initial_variance] * k
            return False

        sigmas = [math.sqrt(v) for v in self.variances]
        order = sorted(range(k), key=lambda i: (-(self.weights[i] / sigmas[i]), i))
        background = set()
        cumulative = 0.0
        for position, comp in enumerate(order):
            if position == 0 or cumulative <= p.background_ratio:
                background.add(comp)
            cumulative += self.weights[comp]

        matched = [abs(x - self.means[i]) <= p.match_threshold * sigmas[i]
                   for i in range(k)]
        foreground = not any(matched[comp] for comp in background)

        winner = next((comp for comp in order if matched[comp]), None)
        alpha = p.learning_rate
        if winner is not None:
            self.weights = [(1.0 - alpha) * w + (alpha if i == winner else 0.0)
                            for i, w in enumerate(self.weights)]
            self.means[winner] = (1.0 - alpha) * self.means[winner] + alpha * x
            deviation = x - self.means[winner]
            self.variances[winner] = ((1.0 - alpha) * self.variances[winner]
                                      + alpha * deviation * deviation)
        else:
            self.weights = [(1.0 - alpha) * w for w in self.weights]
            weakest = min(range(k), key=lambda i: (self.weights[i], i))
            self.weights[weakest] = alpha
            self.means[weakest] = x
            self.variances[weakest] = p.initial_variance
        self.variances = [max(v, p.min_variance) for v in self.variances]
        total = sum(self.weights)
        self.weights = [w / total for w in self.weights]
        return foreground


# ---------------------------------------------------------------------------
# Exhaustive k-means oracle
# ---------------------------------------------------------------------------

def oracle_kmeans_optimum(points: np.ndarray, k: int) -> tuple[float, np.ndarray]:
    """Globally optimal within-cluster squared error over all partitions."""
    n = points.shape[0]
    best_cost = math.inf
    best_centroids = None
    for labels in product(range(k), repeat=n):
        if len(set(labels)) != k:
            continue
        cost = 0.0
        centroids = np.zeros((k, points.shape[1]))
        for c in range(k):
            members = points[[i for i in range(n) if labels[i] == c]]
            centroid = members.mean(axis=0)
            centroids[c] = centroid
            cost += float(((members - centroid) ** 2).sum())
        if cost < best_cost:
            best_cost = cost
            best_centroids = centroids
    return best_cost, best_centroids


# ---------------------------------------------------------------------------
# Check groups
# ---------------------------------------------------------------------------

def _random_au_frames(rng: np.random.Generator) -> list[AUFrame]:
    au_pool = (1, 2, 4, 10, 12, 14, 15, 17, 20, 23, 25, 26)
    frames = []
    for index in range(int(rng.integers(0, 50))):
        n_aus = int(rng.integers(0, 6))
        chosen = rng.choice(len(au_pool), size=n_aus, replace=False)
        intensity = {au_pool[int(i)]: float(rng.uniform(0.0, 5.0)) for i in chosen}
        frames.append(AUFrame(index, intensity))
    return frames


def check_formula_oracles(seed: int = 0, cases: int = 1000) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []

    failures = 0
    for _ in range(cases):
        frames = _random_au_frames(rng)
        expected = oracle_vocalization(frames)
        try:
            actual = vocalization.vocalization_score(frames)
        except NoEvidenceError:
            actual = None
        if expected is None or actual is None:
            if expected != actual:
                failures += 1
        elif not _close(actual, expected):
            failures += 1
    results.append(CheckResult("vocalization-weighted-mean-oracle",
                               failures == 0, f"{cases} cases"))

    failures = 0
    for _ in range(cases):
        summary = EmotionSummary(*(float(v) for v in rng.uniform(0, 100, size=7)))
        if not _close(peak_expressiveness(summary),
                      oracle_peak_expressiveness(summary)):
            failures += 1
    results.append(CheckResult("peak-expressiveness-oracle",
                               failures == 0, f"{cases} cases"))

    failures = 0
    for _ in range(cases):
        a, v, p = (float(x) for x in rng.uniform(0, 100, size=3))
        if not _close(composites.activity_arousal(a, v, p),
                      oracle_activity_arousal(a, v, p)):
            failures += 1
    results.append(CheckResult("activity-arousal-formula-oracle",
                               failures == 0, f"{cases} cases"))

    failures = 0
    for _ in range(cases):
        a, f, d = (float(x) for x in rng.uniform(0, 100, size=3))
        if not _close(composites.anxiety(a, f, d), oracle_anxiety(a, f, d)):
            failures += 1
    results.append(CheckResult("anxiety-formula-oracle",
                               failures == 0, f"{cases} cases"))

    failures = 0
    for _ in range(cases):
        a, x = (float(v) for v in rng.uniform(0, 100, size=2))
        if not _close(composites.attention(a, x), oracle_attention(a, x)):
            failures += 1
    results.append(CheckResult("attention-formula-oracle",
                               failures == 0, f"{cases} cases"))

    failures = 0
    samples = [float(v) for v in rng.uniform(0, 100, size=cases - 401)]
    samples += [k * 0.25 for k in range(401)]  # includes every grid midpoint
    for p in samples:
        if agreement.quantize(p) != oracle_quantize(p):
            failures += 1
    results.append(CheckResult("quantize-grid-oracle",
                               failures == 0, f"{len(samples)} cases"))
    return results


def _random_rating_tables(rng: np.random.Generator):
    n_videos = int(rng.integers(1, 51))
    videos = [f"v{i:02d}" for i in range(n_videos)]

    def build(rater_id: str) -> agreement.RatingTable:
        scores = {}
        for video in videos:
            for item in composites.CONCEPT_ITEMS:
                if rng.random() < 0.7:
                    scores[(video, item)] = float(rng.integers(2, 11)) / 2.0
        return agreement.RatingTable(rater_id, scores)

    a, b = build("a"), build("b")
    # Guarantee at least one shared key.
    key = (videos[0], composites.CONCEPT_ITEMS[0])
    a.scores[key] = 3.0
    b.scores[key] = 3.5
    return a, b


def check_agreement_oracle(seed: int = 0, n_pairs: int = 200) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(n_pairs):
        a, b = _random_rating_tables(rng)
        report = agreement.compare_tables(a, b)
        (per_item, per_item_pairs, per_video,
         per_video_pairs, average) = oracle_compare_tables(
            a, b, composites.CONCEPT_ITEMS)
        if (dict(report.per_item) != per_item
                or dict(report.per_item_pairs) != per_item_pairs
                or dict(report.per_video) != per_video
                or dict(report.per_video_pairs) != per_video_pairs
                or report.average_over_videos != average
                or report.n_pairs != sum(per_video_pairs.values())):
            failures += 1
    results = [CheckResult("agreement-recount-oracle", failures == 0,
                           f"{n_pairs} random table pairs")]

    # Hand-built 2 videos x 2 items with one 2-point disagreement.
    a = agreement.RatingTable("r1", {
        ("v1", "gaze"): 3.0, ("v1", "attention"): 4.0,
        ("v2", "gaze"): 2.0, ("v2", "attention"): 3.5,
    })
    b = agreement.RatingTable("r2", {
        ("v1", "gaze"): 3.5, ("v1", "attention"): 4.0,
        ("v2", "gaze"): 4.0, ("v2", "attention"): 3.0,
    })
    report = agreement.compare_tables(a, b)
    fixture_ok = (report.per_video == {"v1": 100.0, "v2": 50.0}
                  and report.average_over_videos == 75.0)
    results.append(CheckResult("agreement-2x2-fixture", fixture_ok,
                               "per-video {100, 50}, headline 75"))
    return results


def _mask_stream(frames: list[GrayFrame],
                 params: motion.MixtureParams) -> list[np.ndarray]:
    return [mask.bits for mask in motion.subtract_background(frames, params)]


def check_background_subtraction(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    params = motion.MixtureParams()

    # Constant video: zero activity, exactly.
    frames = [GrayFrame(i, np.full((16, 16), 37, dtype=np.uint8)) for i in range(100)]
    masks = motion.subtract_background(frames, params)
    masks = [motion.threshold_mask(m) for m in masks]
    heat = motion.accumulate_heatmap(masks)
    results.append(CheckResult(
        "background-constant-zero-activity",
        motion.activity_score(heat) == 0.0,
        "100 constant 16x16 frames",
    ))

    # Single-pixel jump on a 1-pixel image vs the single-Gaussian reference.
    values = [40] * 60 + [210]
    frames = [GrayFrame(i, np.full((1, 1), v, dtype=np.uint8))
              for i, v in enumerate(values)]
    produced = _mask_stream(frames, params)
    reference = SingleGaussianReference(params)
    expected = [reference.apply(float(v)) for v in values]
    ok = all(bool(bits[0, 0]) == exp for bits, exp in zip(produced, expected))
    ok = ok and expected[-1] is True
    results.append(CheckResult(
        "background-single-gaussian-reference", ok,
        "1-pixel static history then a 0->200-style jump",
    ))

    # Same jump embedded in a 16x16 scene: only the jumped pixel flips.
    base = np.full((16, 16), 40, dtype=np.uint8)
    frames = [GrayFrame(i, base.copy()) for i in range(60)]
    last = base.copy()
    last[3, 5] = 210
    frames.append(GrayFrame(60, last))
    produced = _mask_stream(frames, params)
    expected_mask = np.zeros((16, 16), dtype=bool)
    expected_mask[3, 5] = True
    ok = (all(not bits.any() for bits in produced[:-1])
          and np.array_equal(produced[-1], expected_mask))
    results.append(CheckResult(
        "background-single-pixel-jump", ok,
        "jumped pixel is the only foreground pixel",
    ))

    # Two alternating values at one pixel: the scalar K=2 mixture evolved
    # step by step must match, and both values end up background.
    params2 = motion.MixtureParams(n_components=2)
    values = [60 if i % 2 == 0 else 180 for i in range(300)]
    frames = [GrayFrame(i, np.full((1, 1), v, dtype=np.uint8))
              for i, v in enumerate(values)]
    produced = _mask_stream(frames, params2)
    reference = ScalarMixtureReference(params2)
    expected = [reference.apply(float(v)) for v in values]
    ok = all(bool(bits[0, 0]) == exp for bits, exp in zip(produced, expected))
    ok = ok and not any(expected[-50:])
    results.append(CheckResult(
        "background-alternating-absorbed", ok,
        "scalar K=2 mixture reference, both values absorbed",
    ))

    # Weight normalization and the variance floor hold after random input.
    model = motion.MixtureBackgroundModel(params)
    for i in range(50):
        model.apply(GrayFrame(i, rng.integers(0, 256, size=(8, 8), dtype=np.uint8)))
    sums = model.weights.sum(axis=0)
    ok = (np.max(np.abs(sums - 1.0)) <= 1e-6
          and np.all(model.variances >= params.min_variance))
    results.append(CheckResult("background-model-invariants", ok,
                               "weights sum to 1, variances floored"))
    return results


def check_heatmap(seed: int = 0, shuffles: int = 50) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []

    masks = [motion.ForegroundMask(i, np.ones((4, 4), dtype=bool)) for i in range(300)]
    heat = motion.accumulate_heatmap(masks)
    results.append(CheckResult(
        "heatmap-saturation",
        bool(np.all(heat.counts == 255)),
        "300 active frames saturate at 255",
    ))

    failures = 0
    for _ in range(shuffles):
        height = int(rng.integers(2, 7))
        width = int(rng.integers(2, 7))
        masks = [motion.ForegroundMask(i, rng.random((height, width)) < 0.5)
                 for i in range(int(rng.integers(1, 31)))]
        baseline = motion.accumulate_heatmap(masks)
        shuffled = list(masks)
        rng.shuffle(shuffled)
        if motion.accumulate_heatmap(shuffled) != baseline:
            failures += 1
    results.append(CheckResult("heatmap-order-invariance", failures == 0,
                               f"{shuffles} shuffled sequences"))
    return results


def check_kmeans(seed: int = 0, optimum_instances: int = 50,
                 monotone_instances: int = 200) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []

    failures = 0
    for _ in range(optimum_instances):
        n = int(rng.integers(2, 9))
        points = rng.uniform(0, 10, size=(n, 2))
        k = int(rng.integers(1, min(3, n) + 1))
        best_cost, best_centroids = oracle_kmeans_optimum(points, k)
        result = motion.kmeans(points, k, init_centroids=best_centroids)
        if abs(result.inertia - best_cost) > RELATIVE_TOLERANCE * max(1.0, best_cost):
            failures += 1
    results.append(CheckResult("kmeans-exhaustive-optimum", failures == 0,
                               f"{optimum_instances} instances, <=8 points"))

    failures = 0
    for _ in range(monotone_instances):
        n = int(rng.integers(5, 41))
        points = rng.uniform(0, 10, size=(n, 2))
        k = int(rng.integers(1, min(5, n) + 1))
        history = motion.kmeans(points, k, seed=int(rng.integers(0, 1000))).inertia_history
        for before, after in zip(history, history[1:]):
            if after > before + RELATIVE_TOLERANCE * max(1.0, before):
                failures += 1
                break
    results.append(CheckResult("kmeans-objective-monotone", failures == 0,
                               f"{monotone_instances} instances"))
    return results


def _random_gaze_stream(rng: np.random.Generator, n: int) -> list[GazeSample]:
    return [
        GazeSample(i, i / 25.0, bool(rng.random() < 0.9),
                   float(rng.normal(0.0, 0.2)), float(rng.normal(0.0, 0.2)))
        for i in range(n)
    ]


def check_gaze(seed: int = 0, streams: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    self_failures = 0
    growth_failures = 0
    for _ in range(streams):
        stream = _random_gaze_stream(rng, int(rng.integers(2, 60)))
        if not any(s.success for s in stream):
            stream[0] = GazeSample(0, 0.0, True, 0.0, 0.0)
        rect = gaze.fit_gaze_rectangle(stream)
        if gaze.gaze_score(stream, rect) != 100.0:
            self_failures += 1

        scored = _random_gaze_stream(rng, int(rng.integers(2, 60)))
        if not any(s.success for s in scored):
            scored[0] = GazeSample(0, 0.0, True, 0.0, 0.0)
        base = gaze.gaze_score(scored, rect)
        pad_x, pad_y = rng.uniform(0.0, 0.3, size=2)
        bigger = gaze.GazeRectangle(rect.min_x - pad_x, rect.max_x + pad_x,
                                    rect.min_y - pad_y, rect.max_y + pad_y)
        if gaze.gaze_score(scored, bigger) < base:
            growth_failures += 1
    return [
        CheckResult("gaze-self-calibration-100", self_failures == 0,
                    f"{streams} streams"),
        CheckResult("gaze-rectangle-monotonicity", growth_failures == 0,
                    f"{streams} streams"),
    ]


def run_checks(seed: int = 0) -> list[CheckResult]:
    """Run every embedded check; results carry one line per property."""
    results: list[CheckResult] = []
    results += check_formula_oracles(seed)
    results += check_agreement_oracle(seed)
    results += check_background_subtraction(seed)
    results += check_heatmap(seed)
    results += check_kmeans(seed)
    results += check_gaze(seed)
    return results
