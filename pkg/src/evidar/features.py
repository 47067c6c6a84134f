"""Gaussian feature likelihoods and their conversion to mass functions.

Each (feature, singleton class) pair gets a Gaussian fitted from labeled
training data. A feature observation is turned into a mass function by
evaluating the likelihood of every non-empty focal set and normalizing
over the power set. Composite-set likelihoods are, by default, the sum
of their member singleton densities; in fitted-composite mode a composite
set that had its own labeled training records gets its own Gaussian.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dst import Frame, MassFunction, vacuous

VARIANCE_FLOOR = 1e-9
DENOMINATOR_UNDERFLOW = 1e-300
MODEL_FORMAT = "evidar-model/1"


class FeatureModelError(Exception):
    """Base class for feature-model errors."""


class UnknownFeature(FeatureModelError):
    """A feature name is not part of the model or dataset schema."""


class InsufficientData(FeatureModelError):
    """A class has too few training records to fit mean and variance."""

    def __init__(self, class_name: str, count: int):
        super().__init__(f"class {class_name!r} has {count} training record(s); need at least 2")
        self.class_name = class_name
        self.count = count


class NonFiniteInput(FeatureModelError):
    """A feature observation was NaN or infinite."""


class ModelFormatError(FeatureModelError):
    """A serialized model file is malformed or incomplete."""


class CompositeMode(str, enum.Enum):
    """How composite-set likelihoods are obtained."""

    SUM_OF_SINGLETONS = "sum_of_singletons"
    FITTED_COMPOSITE = "fitted_composite"


@dataclass(frozen=True)
class GaussianParams:
    mean: float
    variance: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise ValueError(f"mean must be finite, got {self.mean!r}")
        if not (math.isfinite(self.variance) and self.variance >= VARIANCE_FLOOR):
            raise ValueError(f"variance must be >= {VARIANCE_FLOOR}, got {self.variance!r}")


def gaussian_pdf(x: float, mean: float, variance: float) -> float:
    """Normal density evaluated at x."""
    z = x - mean
    return math.exp(-(z * z) / (2.0 * variance)) / math.sqrt(2.0 * math.pi * variance)


class FeatureModel:
    """Per-feature class-conditional Gaussians over a frame.

    params maps (feature name, focal-set bits) to GaussianParams. Every
    (feature, singleton) pair must be present; composite entries are
    optional and only consulted in fitted-composite mode.
    """

    def __init__(
        self,
        frame: Frame,
        features: Sequence[str],
        params: dict[tuple[str, int], GaussianParams],
        composite_mode: CompositeMode = CompositeMode.SUM_OF_SINGLETONS,
    ):
        features = tuple(features)
        if not features:
            raise FeatureModelError("feature list must be non-empty")
        for feat in features:
            for singleton in frame.singletons():
                if (feat, singleton) not in params:
                    raise ModelFormatError(
                        f"missing Gaussian for feature {feat!r}, class {frame.set_name(singleton)!r}"
                    )
        self.frame = frame
        self.features = features
        self.params = dict(params)
        self.composite_mode = CompositeMode(composite_mode)

    def check_feature(self, feature: str) -> None:
        if feature not in self.features:
            raise UnknownFeature(f"feature {feature!r} not in model features {self.features}")

    def likelihood(self, feature: str, x: float, focal: int) -> float:
        """Likelihood of one focal set for a feature observation.

        Singletons evaluate their Gaussian; composites sum member singleton
        densities (frame order) unless a fitted composite Gaussian exists
        and fitted-composite mode is active. The empty set has likelihood 0.
        """
        self.check_feature(feature)
        self.frame.check_set(focal)
        if focal == 0:
            return 0.0
        fitted = self.params.get((feature, focal))
        if fitted is not None and (
            focal.bit_count() == 1 or self.composite_mode is CompositeMode.FITTED_COMPOSITE
        ):
            return gaussian_pdf(x, fitted.mean, fitted.variance)
        total = 0.0
        for singleton in self.frame.singletons():
            if singleton & focal:
                p = self.params[(feature, singleton)]
                total += gaussian_pdf(x, p.mean, p.variance)
        return total

    def mass_from_feature(self, feature: str, x: float) -> MassFunction:
        """Normalized mass over the power set from one feature observation.

        Falls back to the vacuous mass (total ignorance) when the
        normalizing sum underflows, i.e. the observation is implausibly
        far from every class.
        """
        self.check_feature(feature)
        if not math.isfinite(x):
            raise NonFiniteInput(f"feature {feature!r} observation {x!r} is not finite")
        likelihoods = np.zeros(self.frame.n_sets)
        denominator = 0.0
        for focal in self.frame.focal_sets():
            value = self.likelihood(feature, x, focal)
            likelihoods[focal] = value
            denominator += value
        if denominator < DENOMINATOR_UNDERFLOW:
            return vacuous(self.frame)
        return MassFunction(self.frame, likelihoods / denominator)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FeatureModel)
            and self.frame == other.frame
            and self.features == other.features
            and self.params == other.params
            and self.composite_mode == other.composite_mode
        )


def fit_arrays(
    X: np.ndarray,
    labels: Sequence[str],
    features: Sequence[str],
    frame: Frame,
    composite_mode: CompositeMode = CompositeMode.SUM_OF_SINGLETONS,
) -> FeatureModel:
    """Fit class-conditional Gaussians from a feature matrix and labels.

    X has one column per entry of `features`. Labels may be singleton class
    names or composite-set names; composite groups are only fitted in
    fitted-composite mode and need at least 2 records, like singletons.
    """
    X = np.asarray(X, dtype=np.float64)
    features = tuple(features)
    if X.ndim != 2 or X.shape[1] != len(features):
        raise FeatureModelError(f"expected X with {len(features)} columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("training features must be finite")
    composite_mode = CompositeMode(composite_mode)

    bits_per_row = np.array([frame.parse_set(lab) for lab in labels])
    params: dict[tuple[str, int], GaussianParams] = {}
    groups = [int(s) for s in frame.singletons()]
    if composite_mode is CompositeMode.FITTED_COMPOSITE:
        groups += [b for b in frame.focal_sets() if b.bit_count() > 1 and np.any(bits_per_row == b)]
    for focal in groups:
        rows = X[bits_per_row == focal]
        if len(rows) < 2:
            raise InsufficientData(frame.set_name(focal), len(rows))
        for j, feat in enumerate(features):
            mean = float(np.mean(rows[:, j]))
            variance = max(float(np.var(rows[:, j], ddof=1)), VARIANCE_FLOOR)
            params[(feat, focal)] = GaussianParams(mean, variance)
    return FeatureModel(frame, features, params, composite_mode)


def fit(
    records: Iterable,
    features: Sequence[str],
    frame: Frame,
    composite_mode: CompositeMode = CompositeMode.SUM_OF_SINGLETONS,
) -> FeatureModel:
    """Fit a FeatureModel from labeled radar records."""
    records = list(records)
    features = tuple(features)
    X = np.array([[rec.feature_value(f) for f in features] for rec in records])
    X = X.reshape(len(records), len(features))
    labels = [rec.label for rec in records]
    return fit_arrays(X, labels, features, frame, composite_mode)


def serialize_model(model: FeatureModel) -> str:
    """Render a model as human-readable key-value text."""
    lines = [
        f"format = {MODEL_FORMAT}",
        f"frame = {','.join(model.frame.labels)}",
        f"features = {','.join(model.features)}",
        f"composite_mode = {model.composite_mode.value}",
    ]
    for feat in model.features:
        for focal in model.frame.focal_sets():
            p = model.params.get((feat, focal))
            if p is not None:
                name = model.frame.set_name(focal)
                lines.append(f"param.{feat}.{name} = {p.mean!r} {p.variance!r}")
    return "\n".join(lines) + "\n"


def deserialize_model(text: str) -> FeatureModel:
    """Parse a model serialized by serialize_model."""
    header: dict[str, str] = {}
    raw_params: list[tuple[str, str, float, float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ModelFormatError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key.startswith("param."):
            try:
                _, feat, name = key.split(".", 2)
                mean_s, variance_s = value.split()
                raw_params.append((feat, name, float(mean_s), float(variance_s)))
            except ValueError:
                raise ModelFormatError(f"line {lineno}: malformed param line {line!r}") from None
        else:
            header[key] = value
    for required in ("format", "frame", "features", "composite_mode"):
        if required not in header:
            raise ModelFormatError(f"missing header field {required!r}")
    if header["format"] != MODEL_FORMAT:
        raise ModelFormatError(f"unsupported model format {header['format']!r}")
    frame = Frame(header["frame"].split(","))
    features = tuple(header["features"].split(","))
    try:
        composite_mode = CompositeMode(header["composite_mode"])
    except ValueError:
        raise ModelFormatError(f"unknown composite_mode {header['composite_mode']!r}") from None

    params: dict[tuple[str, int], GaussianParams] = {}
    for feat, name, mean, variance in raw_params:
        if feat not in features:
            raise ModelFormatError(f"param for unknown feature {feat!r}")
        focal = frame.parse_set(name)
        if variance < VARIANCE_FLOOR:
            warnings.warn(
                f"variance {variance!r} for ({feat}, {name}) below floor; clamping to {VARIANCE_FLOOR}"
            )
            variance = VARIANCE_FLOOR
        params[(feat, focal)] = GaussianParams(mean, variance)
    for feat in features:
        for singleton in frame.singletons():
            if (feat, singleton) not in params:
                raise ModelFormatError(
                    f"missing Gaussian for feature {feat!r}, class {frame.set_name(singleton)!r}"
                )
    return FeatureModel(frame, features, params, composite_mode)


def save_model(model: FeatureModel, path, provenance: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in provenance:
            fh.write(f"# {line}\n")
        fh.write(serialize_model(model))


def load_model(path) -> FeatureModel:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize_model(fh.read())
