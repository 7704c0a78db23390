"""Motion machinery: background mixture model, heatmap, box clustering.

Background subtraction keeps K weighted Gaussians per pixel. For each new
frame the pixel is classified first, against the components currently
labelled background, then the model absorbs the frame online:

* components are ranked by weight/sigma; the smallest prefix whose summed
  weight exceeds the background ratio is the background set;
* a pixel is foreground iff its value lies outside ``match_threshold``
  standard deviations of every background component;
* the first matching component (in rank order) is pulled toward the pixel
  value with the learning rate; when nothing matches, the lowest-weight
  component is recreated at the pixel value with a fresh wide variance;
* weights are renormalized to sum to 1 after every update, and variances
  never drop below the configured floor.

The first frame initializes the model and is emitted as all-background,
which avoids a spurious all-foreground first mask.

Accumulating the binarized masks gives the motion heatmap: a per-pixel
count of foreground frames, saturating at 255. The activity percentage is
the mean over pixels of 100 * count / 255, optionally restricted to the
clustered youth region.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NoEvidenceError, ValidationError
from .ingest import DetectionBox, GrayFrame
from .pgm import write_pgm

logger = logging.getLogger(__name__)

HEATMAP_MAX = 255

# Conservative binarization: a rendered mask value must exceed this to count
# as motion.
DEFAULT_BINARY_THRESHOLD = 1

LARGEST_AREA_POLICY = "largest-area"
CENTER_FEATURES = "center"
CORNER_FEATURES = "corners"


@dataclass(frozen=True)
class MixtureParams:
    """Gaussian-mixture background model settings."""

    n_components: int = 3
    learning_rate: float = 0.02
    match_threshold: float = 2.5     # standard deviations
    background_ratio: float = 0.7    # min summed weight labelled background
    min_variance: float = 4.0
    initial_variance: float = 225.0

    def __post_init__(self) -> None:
        if self.n_components < 1:
            raise ValidationError("n_components must be >= 1")
        if not 0.0 < self.learning_rate < 1.0:
            raise ValidationError("learning_rate must be in (0, 1)")
        if self.match_threshold <= 0.0:
            raise ValidationError("match_threshold must be positive")
        if not 0.0 < self.background_ratio < 1.0:
            raise ValidationError("background_ratio must be in (0, 1)")
        if self.min_variance <= 0.0:
            raise ValidationError("min_variance must be positive")
        if self.initial_variance < self.min_variance:
            raise ValidationError("initial_variance must be >= min_variance")


@dataclass(frozen=True, eq=False)
class ForegroundMask:
    """Per-frame binary motion map; ``bits`` is bool (height, width)."""

    frame_index: int
    bits: np.ndarray

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    def render(self) -> np.ndarray:
        """The mask as 0/255 uint8 intensities."""
        return self.bits.astype(np.uint8) * 255

    def __eq__(self, other) -> bool:
        if not isinstance(other, ForegroundMask):
            return NotImplemented
        return (self.frame_index == other.frame_index
                and np.array_equal(self.bits, other.bits))


@dataclass(frozen=True, eq=False)
class MotionHeatmap:
    """Per-pixel foreground-frame counts, saturated at 255."""

    counts: np.ndarray  # uint8 (height, width)

    @property
    def width(self) -> int:
        return int(self.counts.shape[1])

    @property
    def height(self) -> int:
        return int(self.counts.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, MotionHeatmap):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


class MixtureBackgroundModel:
    """Online per-pixel mixture model. Stream-exclusive: feed one video's
    frames in order from a single owner; use a fresh model per video."""

    def __init__(self, params: MixtureParams | None = None):
        self.params = params or MixtureParams()
        self.weights: np.ndarray | None = None    # (K, H, W)
        self.means: np.ndarray | None = None
        self.variances: np.ndarray | None = None

    def apply(self, frame: GrayFrame) -> ForegroundMask:
        """Classify one frame, then update the model with it."""
        x = frame.pixels.astype(np.float64)
        if self.weights is None:
            self._initialize(x)
            return ForegroundMask(frame.frame_index, np.zeros(x.shape, dtype=bool))
        if x.shape != self.means.shape[1:]:
            raise ValidationError(
                f"frame {frame.frame_index} is {x.shape[1]}x{x.shape[0]}, "
                f"model expects {self.means.shape[2]}x{self.means.shape[1]}"
            )

        p = self.params
        sigma = np.sqrt(self.variances)
        rank = self.weights / sigma
        # Stable sort keeps component order deterministic on rank ties.
        order = np.argsort(-rank, axis=0, kind="stable")
        weights_sorted = np.take_along_axis(self.weights, order, axis=0)
        cumulative = np.cumsum(weights_sorted, axis=0)
        background_sorted = np.empty_like(cumulative, dtype=bool)
        background_sorted[0] = True
        background_sorted[1:] = cumulative[:-1] <= p.background_ratio
        is_background = np.empty_like(background_sorted)
        np.put_along_axis(is_background, order, background_sorted, axis=0)

        matched = np.abs(x[None] - self.means) <= p.match_threshold * sigma
        foreground = ~np.any(matched & is_background, axis=0)

        self._update(x, matched, order)
        return ForegroundMask(frame.frame_index, foreground)

    def _initialize(self, x: np.ndarray) -> None:
        k = self.params.n_components
        self.weights = np.zeros((k,) + x.shape, dtype=np.float64)
        self.weights[0] = 1.0
        self.means = np.broadcast_to(x, (k,) + x.shape).copy()
        self.variances = np.full((k,) + x.shape, self.params.initial_variance)

    def _update(self, x: np.ndarray, matched: np.ndarray, order: np.ndarray) -> None:
        p = self.params
        k = p.n_components
        comp_index = np.arange(k).reshape((k,) + (1,) * x.ndim)

        # First matching component in rank order wins the update.
        matched_sorted = np.take_along_axis(matched, order, axis=0)
        first_position = np.argmax(matched_sorted, axis=0)
        winner = np.take_along_axis(order, first_position[None], axis=0)[0]
        any_match = matched.any(axis=0)
        is_winner = (comp_index == winner[None]) & any_match[None]

        alpha = p.learning_rate
        self.weights = (1.0 - alpha) * self.weights + alpha * is_winner
        new_means = np.where(is_winner, (1.0 - alpha) * self.means + alpha * x[None],
                             self.means)
        deviation = x[None] - new_means
        new_vars = np.where(is_winner,
                            (1.0 - alpha) * self.variances + alpha * deviation ** 2,
                            self.variances)

        # No match anywhere: recreate the weakest component at the pixel value.
        replace = (comp_index == np.argmin(self.weights, axis=0)[None]) & ~any_match[None]
        self.weights = np.where(replace, alpha, self.weights)
        new_means = np.where(replace, x[None], new_means)
        new_vars = np.where(replace, p.initial_variance, new_vars)

        self.means = new_means
        self.variances = np.maximum(new_vars, p.min_variance)
        self.weights /= self.weights.sum(axis=0, keepdims=True)


def subtract_background(frames: Sequence[GrayFrame],
                        params: MixtureParams | None = None) -> list[ForegroundMask]:
    """Run the mixture model over one video's frames, in order."""
    if not frames:
        raise ValidationError("background subtraction needs at least one frame")
    model = MixtureBackgroundModel(params)
    return [model.apply(frame) for frame in frames]


def apply_binary_threshold(values: np.ndarray,
                           threshold: int = DEFAULT_BINARY_THRESHOLD) -> np.ndarray:
    """Binarize raw mask intensities: active iff value is strictly above
    the threshold."""
    return np.asarray(values) > threshold


def threshold_mask(mask: ForegroundMask,
                   threshold: int = DEFAULT_BINARY_THRESHOLD) -> ForegroundMask:
    """Binarize a mask via its 0/255 rendering; idempotent on binary masks."""
    return ForegroundMask(mask.frame_index, apply_binary_threshold(mask.render(), threshold))


def accumulate_heatmap(masks: Sequence[ForegroundMask]) -> MotionHeatmap:
    """Count per-pixel foreground frames, clamping at 255.

    Counts are sums of per-frame indicators, so the result is independent
    of mask order.
    """
    if not masks:
        raise ValidationError("heatmap accumulation needs at least one mask")
    shape = masks[0].bits.shape
    counts = np.zeros(shape, dtype=np.int64)
    for mask in masks:
        if mask.bits.shape != shape:
            raise ValidationError(
                f"mask for frame {mask.frame_index} is "
                f"{mask.width}x{mask.height}, expected {shape[1]}x{shape[0]}"
            )
        counts += mask.bits
    return MotionHeatmap(np.minimum(counts, HEATMAP_MAX).astype(np.uint8))


@dataclass(frozen=True)
class YouthRegion:
    """A cluster of person boxes and the pixel rectangle spanning them."""

    cluster_id: int
    boxes: tuple[DetectionBox, ...]
    min_x: float
    min_y: float
    max_x: float
    max_y: float


def activity_score(heatmap: MotionHeatmap, region: YouthRegion | None = None) -> float:
    """Mean per-pixel motion percentage, over the region when given.

    Region bounds are clamped to the heatmap before cropping.
    """
    counts = heatmap.counts
    if region is not None:
        x0 = max(0, int(np.floor(region.min_x)))
        y0 = max(0, int(np.floor(region.min_y)))
        x1 = min(heatmap.width, int(np.ceil(region.max_x)))
        y1 = min(heatmap.height, int(np.ceil(region.max_y)))
        counts = counts[y0:y1, x0:x1]
        if counts.size == 0:
            raise ValidationError("youth region covers zero heatmap pixels")
    percentages = counts.astype(np.float64) * 100.0 / HEATMAP_MAX
    return float(np.mean(percentages))


def write_heatmap(heatmap: MotionHeatmap, pgm_path: str | Path,
                  activity_percent: float) -> None:
    """Export the heatmap as a graymap plus a sidecar activity file."""
    pgm_path = Path(pgm_path)
    write_pgm(pgm_path, heatmap.counts)
    sidecar = pgm_path.with_suffix(".txt")
    sidecar.write_text(f"activity_percent = {repr(float(activity_percent))}\n")


# ---------------------------------------------------------------------------
# Lloyd k-means and youth-region selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int
    inertia_history: tuple[float, ...]


def kmeans(points: Sequence[Sequence[float]] | np.ndarray, k: int, *,
           seed: int = 0, init_centroids: np.ndarray | None = None,
           max_iter: int = 100) -> KMeansResult:
    """Lloyd iteration to convergence (unchanged assignment) or the cap.

    Deterministic given the seed: initial centroids are drawn without
    replacement from the distinct points. Clusters that empty out are
    reseeded from the point currently farthest from its assigned centroid.
    ``inertia_history`` records the objective after each assignment pass.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValidationError("points must be a non-empty 2-d array")
    if k < 1:
        raise ValidationError("k must be >= 1")
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")
    distinct = np.unique(pts, axis=0)
    if k > distinct.shape[0]:
        raise ValidationError(
            f"k={k} exceeds the {distinct.shape[0]} distinct points"
        )

    if init_centroids is None:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(distinct.shape[0], size=k, replace=False)
        centroids = distinct[chosen].copy()
    else:
        centroids = np.asarray(init_centroids, dtype=np.float64).copy()
        if centroids.shape != (k, pts.shape[1]):
            raise ValidationError(
                f"init_centroids must have shape ({k}, {pts.shape[1]})"
            )

    labels: np.ndarray | None = None
    history: list[float] = []
    for _ in range(max_iter):
        d2 = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        history.append(float(d2[np.arange(pts.shape[0]), new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels

        for c in range(k):
            members = pts[labels == c]
            if members.shape[0]:
                centroids[c] = members.mean(axis=0)
        empty = [c for c in range(k) if not np.any(labels == c)]
        if empty:
            own_dist = ((pts - centroids[labels]) ** 2).sum(axis=1)
            for c in empty:
                farthest = int(np.argmax(own_dist))
                centroids[c] = pts[farthest]
                own_dist[farthest] = -1.0  # not reused for another empty cluster

    return KMeansResult(labels=labels, centroids=centroids,
                        inertia=history[-1], n_iter=len(history),
                        inertia_history=tuple(history))


def _box_features(boxes: Sequence[DetectionBox], features: str) -> np.ndarray:
    if features == CENTER_FEATURES:
        return np.array([box.center for box in boxes], dtype=np.float64)
    if features == CORNER_FEATURES:
        return np.array(
            [(box.x, box.y, box.x + box.w, box.y + box.h) for box in boxes],
            dtype=np.float64,
        )
    raise ValidationError(f"unknown box feature mode {features!r}")


def max_simultaneous_persons(detections: Sequence[DetectionBox]) -> int:
    """Largest number of person boxes sharing one frame index."""
    counts: dict[int, int] = {}
    for box in detections:
        counts[box.frame_index] = counts.get(box.frame_index, 0) + 1
    return max(counts.values()) if counts else 0


def select_youth_region(detections: Sequence[DetectionBox], *,
                        policy: str | int = LARGEST_AREA_POLICY,
                        features: str = CENTER_FEATURES,
                        seed: int = 0) -> YouthRegion:
    """Cluster person boxes and pick the cluster holding the youth.

    k is the maximum simultaneous person count in any frame. The default
    policy keeps the cluster with the largest mean box area (the camera
    focuses on the youth, so their boxes dominate); an integer policy
    selects that cluster id directly.
    """
    if not detections:
        raise NoEvidenceError("no person detections to cluster")
    k = max_simultaneous_persons(detections)
    result = kmeans(_box_features(detections, features), k, seed=seed)

    members: dict[int, list[DetectionBox]] = {c: [] for c in range(k)}
    for box, label in zip(detections, result.labels):
        members[int(label)].append(box)

    if policy == LARGEST_AREA_POLICY:
        mean_area = {c: sum(box.area for box in boxes) / len(boxes)
                     for c, boxes in members.items() if boxes}
        # Ties resolve to the lowest cluster id.
        cluster_id = max(sorted(mean_area), key=lambda c: mean_area[c])
    else:
        cluster_id = int(policy)
        if not 0 <= cluster_id < k:
            raise ValidationError(
                f"cluster index {cluster_id} out of range for k={k}"
            )
        if not members[cluster_id]:
            raise ValidationError(f"cluster {cluster_id} is empty")

    boxes = tuple(members[cluster_id])
    return YouthRegion(
        cluster_id=cluster_id,
        boxes=boxes,
        min_x=min(box.x for box in boxes),
        min_y=min(box.y for box in boxes),
        max_x=max(box.x + box.w for box in boxes),
        max_y=max(box.y + box.h for box in boxes),
    )
