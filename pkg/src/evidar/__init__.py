"""Evidential radar obstacle classification and sensor-spoofing detection.

Dempster-Shafer belief functions over radar feature likelihoods: each
feature observation becomes a mass function over the power set of the
obstacle-state frame; Dempster's rule fuses the features; belief and
plausibility bound the confidence in every hypothesis; label-flip
spoofing shows up as a contradiction between the claimed class and the
evidence-decided class.
"""

from .dst import (
    BeliefInterval,
    DSTError,
    EmptyInput,
    Frame,
    FrameMismatch,
    InvalidMass,
    MassFunction,
    TotalConflict,
    combine,
    combine_details,
    combine_sequence,
    vacuous,
)
from .features import (
    CompositeMode,
    FeatureModel,
    FeatureModelError,
    GaussianParams,
    InsufficientData,
    ModelFormatError,
    NonFiniteInput,
    UnknownFeature,
    deserialize_model,
    fit,
    fit_arrays,
    gaussian_pdf,
    load_model,
    save_model,
    serialize_model,
)
from .data import (
    DataError,
    Dataset,
    EmptyFile,
    GeneratorConfig,
    MissingColumn,
    NonNumericCell,
    RadarRecord,
    UnknownColumn,
    generate,
    inject_spoof,
    load_generator_config,
    read_csv,
    train_test_split,
    write_csv,
)
from .detector import (
    EvaluationReport,
    EvidentialVerdict,
    classify,
    classify_dataset,
    decide,
    evaluate,
    explain,
    explain_json,
    summarize,
)
from .estimator import EvidentialRadarClassifier

__version__ = "0.1.0"

__all__ = [
    "BeliefInterval",
    "CompositeMode",
    "DSTError",
    "DataError",
    "Dataset",
    "EmptyFile",
    "EmptyInput",
    "EvaluationReport",
    "EvidentialRadarClassifier",
    "EvidentialVerdict",
    "FeatureModel",
    "FeatureModelError",
    "Frame",
    "FrameMismatch",
    "GaussianParams",
    "GeneratorConfig",
    "InsufficientData",
    "InvalidMass",
    "MassFunction",
    "MissingColumn",
    "ModelFormatError",
    "NonFiniteInput",
    "NonNumericCell",
    "RadarRecord",
    "TotalConflict",
    "UnknownColumn",
    "UnknownFeature",
    "classify",
    "classify_dataset",
    "combine",
    "combine_details",
    "combine_sequence",
    "decide",
    "deserialize_model",
    "evaluate",
    "explain",
    "explain_json",
    "fit",
    "fit_arrays",
    "gaussian_pdf",
    "generate",
    "inject_spoof",
    "load_generator_config",
    "load_model",
    "read_csv",
    "save_model",
    "serialize_model",
    "summarize",
    "train_test_split",
    "vacuous",
    "write_csv",
]
