"""Radar record schema, CSV I/O, synthetic generation, and spoof injection."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

FEATURES = ("density", "reflection", "velocity")
CSV_COLUMNS = ("timestamp", "density", "reflection", "velocity", "label", "spoofed")
FEATURE_ALIASES = {"distance": "density"}
NONNEGATIVE_FEATURES = ("density", "reflection")


class DataError(Exception):
    """Base class for dataset errors."""


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"missing required column {column!r}")
        self.column = column


class UnknownColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"unknown column {column!r}")
        self.column = column


class NonNumericCell(DataError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}: non-numeric value {value!r} in column {column!r}")
        self.row = row
        self.column = column


class EmptyFile(DataError):
    pass


def canonical_feature(name: str) -> str:
    """Resolve feature aliases ('distance' is accepted for 'density')."""
    return FEATURE_ALIASES.get(name, name)


@dataclass(frozen=True)
class RadarRecord:
    """One radar sensor reading with ground-truth label and spoof flag."""

    timestamp: float
    density: float
    reflection: float
    velocity: float
    label: str
    spoofed: bool = False

    def __post_init__(self):
        for name in ("timestamp",) + FEATURES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DataError(f"{name} must be finite, got {value!r}")
        if self.timestamp < 0:
            raise DataError(f"timestamp must be non-negative, got {self.timestamp!r}")
        for name in NONNEGATIVE_FEATURES:
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if not self.label:
            raise DataError("label must be non-empty")

    def feature_value(self, name: str) -> float:
        name = canonical_feature(name)
        if name not in FEATURES:
            raise DataError(f"unknown feature {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class Dataset:
    """An ordered, schema-validated collection of radar records."""

    records: tuple[RadarRecord, ...]
    schema: tuple[str, ...] = FEATURES
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "schema", tuple(self.schema))
        for feat in self.schema:
            if canonical_feature(feat) not in FEATURES:
                raise DataError(f"schema feature {feat!r} unknown")
        last = -math.inf
        for rec in self.records:
            if rec.timestamp < last:
                raise DataError("timestamps must be non-decreasing within a dataset")
            last = rec.timestamp

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[RadarRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> RadarRecord:
        return self.records[i]

    def labels(self) -> tuple[str, ...]:
        return tuple(sorted({rec.label for rec in self.records}))


def _parse_float(value: str, row: int, column: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise NonNumericCell(row, column, value) from None
    if not math.isfinite(out):
        raise NonNumericCell(row, column, value)
    return out


def read_csv(path) -> Dataset:
    """Read a radar dataset; leading '#' lines are kept as provenance."""
    provenance: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for line in lines:
        if line.startswith("#"):
            provenance.append(line[1:].strip())
            body_start += 1
        else:
            break
    body = lines[body_start:]
    if not body or not body[0].strip():
        raise EmptyFile(f"{path}: no header row")
    reader = csv.reader(body)
    header = [canonical_feature(col.strip()) for col in next(reader)]
    for col in CSV_COLUMNS:
        if col not in header:
            raise MissingColumn(col)
    for col in header:
        if col not in CSV_COLUMNS:
            raise UnknownColumn(col)
    idx = {col: header.index(col) for col in CSV_COLUMNS}
    records = []
    for rownum, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"row {rownum}: expected {len(header)} cells, got {len(row)}")
        spoofed_raw = row[idx["spoofed"]].strip()
        if spoofed_raw not in ("0", "1"):
            raise DataError(f"row {rownum}: spoofed must be 0 or 1, got {spoofed_raw!r}")
        records.append(
            RadarRecord(
                timestamp=_parse_float(row[idx["timestamp"]], rownum, "timestamp"),
                density=_parse_float(row[idx["density"]], rownum, "density"),
                reflection=_parse_float(row[idx["reflection"]], rownum, "reflection"),
                velocity=_parse_float(row[idx["velocity"]], rownum, "velocity"),
                label=row[idx["label"]].strip(),
                spoofed=spoofed_raw == "1",
            )
        )
    return Dataset(records=tuple(records), provenance="\n".join(provenance))


def write_csv(dataset: Dataset, path, provenance: Sequence[str] = ()) -> None:
    """Write a dataset; floats use repr so write/read round-trips exactly."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in provenance:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in dataset:
            writer.writerow(
                [
                    repr(rec.timestamp),
                    repr(rec.density),
                    repr(rec.reflection),
                    repr(rec.velocity),
                    rec.label,
                    "1" if rec.spoofed else "0",
                ]
            )


# Default class-conditional parameters for the synthetic corpus: velocity
# and reflection separate the classes by far more than 6 sigma, density
# overlaps by construction. The stationary class is noisier than the
# moving class on purpose (its evidence is structurally more ambiguous).
# The "sm" entry is a wide distribution spanning both classes, used to
# produce composite-labeled training records for fitted-composite models.
DEFAULT_CLASS_PARAMS: dict[str, dict[str, tuple[float, float]]] = {
    "s": {"density": (10.0, 16.0), "reflection": (40.0, 16.0), "velocity": (5.0, 4.0)},
    "m": {"density": (12.0, 16.0), "reflection": (120.0, 4.0), "velocity": (60.0, 1.0)},
    "sm": {"density": (11.0, 64.0), "reflection": (80.0, 25600.0), "velocity": (32.5, 6400.0)},
}


@dataclass(frozen=True)
class GeneratorConfig:
    """Seeded synthetic-dataset recipe: per-class Gaussians and counts."""

    counts: Mapping[str, int]
    class_params: Mapping[str, Mapping[str, tuple[float, float]]] = field(
        default_factory=lambda: DEFAULT_CLASS_PARAMS
    )
    seed: int = 0
    timestamp_start: float = 0.0
    timestamp_step: float = 0.1

    def __post_init__(self):
        if self.timestamp_step < 0 or self.timestamp_start < 0:
            raise DataError("timestamps must be non-negative")
        for cls, count in self.counts.items():
            if count < 0:
                raise DataError(f"count for class {cls!r} must be >= 0")
            if count > 0 and cls not in self.class_params:
                raise DataError(f"no generator parameters for class {cls!r}")
        for cls, per_feature in self.class_params.items():
            for feat in FEATURES:
                if feat not in per_feature:
                    raise DataError(f"class {cls!r} missing parameters for feature {feat!r}")
                mean, variance = per_feature[feat]
                if not (math.isfinite(mean) and variance > 0):
                    raise DataError(f"invalid ({mean}, {variance}) for class {cls!r}, {feat!r}")


def generate(config: GeneratorConfig) -> Dataset:
    """Draw a labeled dataset from class-conditional Gaussians.

    Deterministic under the config seed; records are shuffled across
    classes and timestamped sequentially. Nonnegative features are
    clamped at zero.
    """
    rng = np.random.default_rng(config.seed)
    labels: list[str] = []
    rows: list[list[float]] = []
    for cls in config.counts:
        count = config.counts[cls]
        if count == 0:
            continue
        per_feature = config.class_params[cls]
        draws = {
            feat: rng.normal(per_feature[feat][0], math.sqrt(per_feature[feat][1]), size=count)
            for feat in FEATURES
        }
        for i in range(count):
            rows.append([float(draws[feat][i]) for feat in FEATURES])
            labels.append(cls)
    order = rng.permutation(len(rows))
    records = []
    for position, source in enumerate(order):
        values = dict(zip(FEATURES, rows[source]))
        for feat in NONNEGATIVE_FEATURES:
            values[feat] = max(values[feat], 0.0)
        records.append(
            RadarRecord(
                timestamp=config.timestamp_start + position * config.timestamp_step,
                label=labels[source],
                spoofed=False,
                **values,
            )
        )
    return Dataset(records=tuple(records), provenance=f"synthetic seed={config.seed}")


def load_generator_config(path) -> GeneratorConfig:
    """Parse a key-value generator config file.

    Recognized keys: seed, timestamp_start, timestamp_step,
    count.<class>, and <class>.<feature>.mean / .variance.
    """
    counts: dict[str, int] = {}
    params: dict[str, dict[str, list[Optional[float]]]] = {}
    scalars: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            parts = key.split(".")
            try:
                if key in ("seed", "timestamp_start", "timestamp_step"):
                    scalars[key] = float(value)
                elif len(parts) == 2 and parts[0] == "count":
                    counts[parts[1]] = int(value)
                elif len(parts) == 3 and parts[2] in ("mean", "variance"):
                    cls, feat, which = parts
                    feat = canonical_feature(feat)
                    slot = params.setdefault(cls, {}).setdefault(feat, [None, None])
                    slot[0 if which == "mean" else 1] = float(value)
                else:
                    raise DataError(f"{path}:{lineno}: unknown key {key!r}")
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad value {value!r} for {key!r}") from None
    class_params = {}
    for cls, per_feature in params.items():
        class_params[cls] = {}
        for feat, (mean, variance) in per_feature.items():
            if mean is None or variance is None:
                raise DataError(f"class {cls!r}, feature {feat!r}: need both mean and variance")
            class_params[cls][feat] = (mean, variance)
    return GeneratorConfig(
        counts=counts,
        class_params=class_params or DEFAULT_CLASS_PARAMS,
        seed=int(scalars.get("seed", 0)),
        timestamp_start=scalars.get("timestamp_start", 0.0),
        timestamp_step=scalars.get("timestamp_step", 0.1),
    )


def inject_spoof(
    dataset: Dataset,
    count: Optional[int] = None,
    indices: Optional[Iterable[int]] = None,
    seed: int = 0,
    labels: tuple[str, str] = ("s", "m"),
    from_label: Optional[str] = None,
) -> Dataset:
    """Flip the claimed class of chosen records, leaving features intact.

    Spoofed records keep the feature values of their true class; only the
    label and the spoofed flag change. Selection is by explicit indices or
    by a seeded random draw of `count` records; `from_label` restricts the
    draw to one true class (e.g. only stationary objects get relabeled
    "moving").
    """
    flip = {labels[0]: labels[1], labels[1]: labels[0]}
    if (count is None) == (indices is None):
        raise DataError("provide exactly one of count or indices")
    if indices is not None:
        chosen = list(indices)
        for i in chosen:
            if not 0 <= i < len(dataset):
                raise DataError(f"record index {i} out of range (dataset size {len(dataset)})")
            if dataset[i].label not in flip:
                raise DataError(f"record {i} has non-singleton label {dataset[i].label!r}")
    else:
        eligible = [
            i
            for i, rec in enumerate(dataset)
            if rec.label in flip and (from_label is None or rec.label == from_label)
        ]
        if count > len(eligible):
            raise DataError(f"cannot spoof {count} records; only {len(eligible)} eligible")
        rng = np.random.default_rng(seed)
        chosen = sorted(rng.choice(len(eligible), size=count, replace=False).tolist())
        chosen = [eligible[i] for i in chosen]
    chosen_set = set(chosen)
    records = tuple(
        replace(rec, label=flip[rec.label], spoofed=True) if i in chosen_set else rec
        for i, rec in enumerate(dataset)
    )
    return Dataset(records=records, schema=dataset.schema, provenance=dataset.provenance)


def train_test_split(dataset: Dataset, train_fraction: float = 0.7, seed: int = 0):
    """Seeded random split; both halves keep the original record order."""
    if not 0.0 <= train_fraction <= 1.0:
        raise DataError(f"train_fraction must be in [0, 1], got {train_fraction!r}")
    rng = np.random.default_rng(seed)
    n = len(dataset)
    n_train = round(n * train_fraction)
    train_idx = set(rng.permutation(n)[:n_train].tolist())
    train = tuple(rec for i, rec in enumerate(dataset) if i in train_idx)
    test = tuple(rec for i, rec in enumerate(dataset) if i not in train_idx)
    prov = dataset.provenance
    return (
        Dataset(records=train, schema=dataset.schema, provenance=prov),
        Dataset(records=test, schema=dataset.schema, provenance=prov),
    )
