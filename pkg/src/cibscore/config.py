"""Run configuration: documented keys, flat-file loading, validation.

Config files are plain ``key = value`` text; blank lines and ``#`` comments
are ignored and unknown keys are rejected. Defaults reproduce the reference
setup (3-component mixture, learning rate 0.02, match threshold 2.5 sigma,
background ratio 0.7, variance floor 4, binarization threshold 1, no youth
region gating, linear scale map). Command-line flags override file values.

Documented keys and valid ranges:

=======================  ==========================================
mog_components           int >= 1
mog_learning_rate        float in (0, 1)
mog_match_threshold      float > 0
mog_background_ratio     float in (0, 1)
mog_min_variance         float > 0
binary_threshold         int in [0, 255]
use_youth_region         true/false
youth_region_policy      ``largest-area`` or a cluster index (int >= 0)
youth_region_features    ``center`` or ``corners``
scale_map                one of the registered scale maps (``linear``)
items                    comma list drawn from the seven concept names
output_dir               default output directory for commands
seed                     int >= 0
=======================  ==========================================
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .agreement import SCALE_MAPS
from .composites import CONCEPT_ITEMS
from .errors import ParseError, SchemaError, ValidationError
from .motion import CENTER_FEATURES, CORNER_FEATURES, LARGEST_AREA_POLICY, MixtureParams

CONFIG_ENV_VAR = "CIBSCORE_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    mog_components: int = 3
    mog_learning_rate: float = 0.02
    mog_match_threshold: float = 2.5
    mog_background_ratio: float = 0.7
    mog_min_variance: float = 4.0
    binary_threshold: int = 1
    use_youth_region: bool = False
    youth_region_policy: str | int = LARGEST_AREA_POLICY
    youth_region_features: str = CENTER_FEATURES
    scale_map: str = "linear"
    items: tuple[str, ...] = CONCEPT_ITEMS
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.binary_threshold < 0 or self.binary_threshold > 255:
            raise ValidationError("binary_threshold must be in [0, 255]")
        if isinstance(self.youth_region_policy, int) and self.youth_region_policy < 0:
            raise ValidationError("youth_region_policy index must be >= 0")
        if self.youth_region_features not in (CENTER_FEATURES, CORNER_FEATURES):
            raise ValidationError(
                f"youth_region_features must be {CENTER_FEATURES!r} or "
                f"{CORNER_FEATURES!r}"
            )
        if self.scale_map not in SCALE_MAPS:
            raise ValidationError(
                f"unknown scale_map {self.scale_map!r}; "
                f"registered: {', '.join(sorted(SCALE_MAPS))}"
            )
        if not self.items:
            raise ValidationError("items must name at least one concept")
        for item in self.items:
            if item not in CONCEPT_ITEMS:
                raise ValidationError(f"unknown CIB item {item!r}")
        if self.seed < 0:
            raise ValidationError("seed must be >= 0")
        self.mixture_params()  # validates the mog_* ranges

    def mixture_params(self) -> MixtureParams:
        return MixtureParams(
            n_components=self.mog_components,
            learning_rate=self.mog_learning_rate,
            match_threshold=self.mog_match_threshold,
            background_ratio=self.mog_background_ratio,
            min_variance=self.mog_min_variance,
        )

    def scale_map_fn(self):
        return SCALE_MAPS[self.scale_map]


def _parse_bool(raw: str, key: str, path: Path, line_no: int) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ParseError(f"{key} expects true/false, got {raw!r}",
                     source=path, row=line_no)


def _parse_policy(raw: str):
    if raw == LARGEST_AREA_POLICY:
        return raw
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(
            f"youth_region_policy must be {LARGEST_AREA_POLICY!r} or a "
            f"cluster index, got {raw!r}"
        ) from None


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Read a flat key-value config file on top of ``base`` (or defaults)."""
    path = Path(path)
    if not path.is_file():
        raise ParseError("config file not found", source=path)
    values = dict((base or RunConfig()).__dict__)
    known = {f.name for f in fields(RunConfig)}
    seen: set[str] = set()
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError("expected 'key = value'", source=path, row=line_no)
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in known:
            raise SchemaError(f"unknown config key {key!r}", source=path, row=line_no)
        if key in seen:
            raise ValidationError(f"duplicate config key {key!r}",
                                  source=path, row=line_no)
        seen.add(key)
        try:
            if key in ("mog_components", "binary_threshold", "seed"):
                values[key] = int(raw)
            elif key in ("mog_learning_rate", "mog_match_threshold",
                         "mog_background_ratio", "mog_min_variance"):
                values[key] = float(raw)
            elif key == "use_youth_region":
                values[key] = _parse_bool(raw, key, path, line_no)
            elif key == "youth_region_policy":
                values[key] = _parse_policy(raw)
            elif key == "items":
                values[key] = tuple(part.strip() for part in raw.split(",") if part.strip())
            else:
                values[key] = raw
        except ValueError:
            raise ParseError(f"bad value {raw!r} for key {key!r}",
                             source=path, row=line_no) from None
    try:
        return RunConfig(**values)
    except ValidationError as err:
        raise ValidationError(str(err), source=path) from None


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Replace any non-None keyword values on the config."""
    changed = {key: value for key, value in overrides.items() if value is not None}
    return replace(config, **changed) if changed else config
