"""Evidential classification pipeline and spoof detection.

Per-feature masses are combined with Dempster's rule in the model's
canonical feature order; the decision is argmax belief over singleton
classes, falling back to the full-frame composite on (near-)ties or when
the combined composite mass exceeds the ambiguity threshold. A record is
flagged as spoofed when the decided singleton contradicts its claimed
label.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .data import Dataset, RadarRecord, canonical_feature
from .dst import BeliefInterval, MassFunction, TotalConflict, combine_details, vacuous
from .features import FeatureModel, UnknownFeature

DEFAULT_TAU = 0.5
DEFAULT_TIE_EPSILON = 1e-9


@dataclass(frozen=True)
class EvidentialVerdict:
    """Full evidential output for one classified record."""

    record_index: int
    per_feature_masses: dict[str, MassFunction]
    combined: MassFunction
    intervals: dict[int, BeliefInterval]
    decided: int
    claimed: str
    spoof_flagged: bool
    conflict: float
    degraded: bool = False

    @property
    def decided_name(self) -> str:
        return self.combined.frame.set_name(self.decided)

    @property
    def is_ambiguous(self) -> bool:
        return self.decided.bit_count() > 1


@dataclass(frozen=True)
class EvaluationReport:
    """Aggregate metrics over a classified dataset."""

    n_records: int
    features: tuple[str, ...]
    accuracy: Optional[float]
    correct: int
    honest_singleton_decisions: int
    spoof_detected: Optional[int]
    spoof_total: int
    spoof_detection_rate: Optional[float]
    ambiguity_rate: float
    confusion: dict[str, dict[str, int]]
    mean_honest_uncertainty: Optional[float]
    mean_spoofed_composite_mass: Optional[float]

    def to_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "features": list(self.features),
            "accuracy": self.accuracy,
            "correct": self.correct,
            "honest_singleton_decisions": self.honest_singleton_decisions,
            "spoof_detected": self.spoof_detected,
            "spoof_total": self.spoof_total,
            "spoof_detection_rate": self.spoof_detection_rate,
            "ambiguity_rate": self.ambiguity_rate,
            "confusion": self.confusion,
            "mean_honest_uncertainty": self.mean_honest_uncertainty,
            "mean_spoofed_composite_mass": self.mean_spoofed_composite_mass,
        }


def _canonical_features(model: FeatureModel, features: Optional[Sequence[str]]) -> tuple[str, ...]:
    """Restrict to the requested features, in the model's fixed order."""
    if features is None:
        return model.features
    requested = {canonical_feature(f) for f in features}
    unknown = requested - set(model.features)
    if unknown:
        raise UnknownFeature(f"features {sorted(unknown)} not in model features {model.features}")
    if not requested:
        raise UnknownFeature("feature subset must be non-empty")
    return tuple(f for f in model.features if f in requested)


def decide(combined: MassFunction, tau: float = DEFAULT_TAU,
           tie_epsilon: float = DEFAULT_TIE_EPSILON) -> int:
    """Argmax-belief singleton, or the full frame when evidence is ambiguous."""
    frame = combined.frame
    beliefs = [(combined.belief(s), -s, s) for s in frame.singletons()]
    beliefs.sort(reverse=True)
    top = beliefs[0]
    runner_up = beliefs[1][0] if len(beliefs) > 1 else None
    if runner_up is not None and top[0] - runner_up < tie_epsilon:
        return frame.full_set
    if combined[frame.full_set] > tau:
        return frame.full_set
    return top[2]


def evidence_for(
    model: FeatureModel,
    features: Sequence[str],
    value_of: Callable[[str], float],
) -> tuple[dict[str, MassFunction], MassFunction, float, bool]:
    """Per-feature masses and their sequential combination.

    Returns (per-feature masses, combined mass, conflict of the final
    combination, degraded flag). Total conflict does not raise: the
    combined mass degrades to vacuous so batch runs never lose records.
    """
    per_feature = {f: model.mass_from_feature(f, value_of(f)) for f in features}
    combined = None
    conflict = 0.0
    for mass in per_feature.values():
        if combined is None:
            combined = mass
            continue
        try:
            combined, conflict = combine_details(combined, mass)
        except TotalConflict:
            return per_feature, vacuous(model.frame), 1.0, True
    return per_feature, combined, conflict, False


def classify(
    model: FeatureModel,
    record: RadarRecord,
    features: Optional[Sequence[str]] = None,
    tau: float = DEFAULT_TAU,
    tie_epsilon: float = DEFAULT_TIE_EPSILON,
    record_index: int = 0,
) -> EvidentialVerdict:
    """Classify one record and compare the verdict with its claimed label."""
    feats = _canonical_features(model, features)
    per_feature, combined, conflict, degraded = evidence_for(
        model, feats, record.feature_value
    )
    frame = model.frame
    intervals = {focal: combined.interval(focal) for focal in frame.focal_sets()}
    decided = decide(combined, tau=tau, tie_epsilon=tie_epsilon)
    claimed_bits = frame.parse_set(record.label)
    spoof_flagged = decided.bit_count() == 1 and decided != claimed_bits
    return EvidentialVerdict(
        record_index=record_index,
        per_feature_masses=per_feature,
        combined=combined,
        intervals=intervals,
        decided=decided,
        claimed=record.label,
        spoof_flagged=spoof_flagged,
        conflict=conflict,
        degraded=degraded,
    )


def classify_dataset(
    model: FeatureModel,
    dataset: Dataset,
    features: Optional[Sequence[str]] = None,
    tau: float = DEFAULT_TAU,
    tie_epsilon: float = DEFAULT_TIE_EPSILON,
    parallel: bool = False,
) -> list[EvidentialVerdict]:
    """Classify every record; output order always matches input order."""
    feats = _canonical_features(model, features)

    def one(item):
        i, rec = item
        return classify(model, rec, feats, tau=tau, tie_epsilon=tie_epsilon, record_index=i)

    items = list(enumerate(dataset))
    if parallel:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(one, items))
    return [one(item) for item in items]


def summarize(verdicts: Sequence[EvidentialVerdict], dataset: Dataset,
              features: Sequence[str]) -> EvaluationReport:
    """Aggregate verdicts into accuracy, spoof-detection, and ambiguity metrics.

    Accuracy counts only honest records that got a singleton decision;
    composite decisions are reported via the ambiguity rate instead.
    Spoof metrics are absent (None) when the dataset has no spoofed rows.
    """
    if not verdicts:
        raise ValueError("cannot summarize an empty dataset")
    correct = 0
    honest_singleton = 0
    spoof_total = 0
    spoof_detected = 0
    ambiguous = 0
    confusion: dict[str, dict[str, int]] = {}
    honest_uncertainties: list[float] = []
    spoofed_composite: list[float] = []
    for verdict, record in zip(verdicts, dataset):
        frame = verdict.combined.frame
        decided_name = verdict.decided_name
        confusion.setdefault(record.label, {}).setdefault(decided_name, 0)
        confusion[record.label][decided_name] += 1
        if verdict.is_ambiguous:
            ambiguous += 1
        if record.spoofed:
            spoof_total += 1
            spoof_detected += verdict.spoof_flagged
            spoofed_composite.append(verdict.combined[frame.full_set])
        else:
            if not verdict.is_ambiguous:
                honest_singleton += 1
                correct += verdict.decided == frame.parse_set(record.label)
                honest_uncertainties.append(verdict.intervals[verdict.decided].uncertainty)
    return EvaluationReport(
        n_records=len(verdicts),
        features=tuple(features),
        accuracy=correct / honest_singleton if honest_singleton else None,
        correct=correct,
        honest_singleton_decisions=honest_singleton,
        spoof_detected=spoof_detected if spoof_total else None,
        spoof_total=spoof_total,
        spoof_detection_rate=spoof_detected / spoof_total if spoof_total else None,
        ambiguity_rate=ambiguous / len(verdicts),
        confusion=confusion,
        mean_honest_uncertainty=(
            sum(honest_uncertainties) / len(honest_uncertainties)
            if honest_uncertainties
            else None
        ),
        mean_spoofed_composite_mass=(
            sum(spoofed_composite) / len(spoofed_composite) if spoofed_composite else None
        ),
    )


def evaluate(
    model: FeatureModel,
    dataset: Dataset,
    features: Optional[Sequence[str]] = None,
    tau: float = DEFAULT_TAU,
    tie_epsilon: float = DEFAULT_TIE_EPSILON,
    parallel: bool = False,
) -> EvaluationReport:
    """Classify a dataset and aggregate the metrics."""
    feats = _canonical_features(model, features)
    verdicts = classify_dataset(model, dataset, feats, tau=tau,
                                tie_epsilon=tie_epsilon, parallel=parallel)
    return summarize(verdicts, dataset, feats)


def explain(verdict: EvidentialVerdict) -> dict:
    """Machine-readable explanation record for one verdict.

    Field names and ordering are part of the output contract; identical
    verdicts serialize to identical bytes.
    """
    frame = verdict.combined.frame
    return {
        "record_index": verdict.record_index,
        "per_feature_masses": {
            feat: mass.to_dict() for feat, mass in verdict.per_feature_masses.items()
        },
        "combined_mass": verdict.combined.to_dict(),
        "conflict": verdict.conflict,
        "intervals": {
            frame.set_name(focal): {
                "belief": interval.belief,
                "plausibility": interval.plausibility,
                "uncertainty": interval.uncertainty,
            }
            for focal, interval in verdict.intervals.items()
        },
        "decided": verdict.decided_name,
        "claimed": verdict.claimed,
        "spoof_flagged": verdict.spoof_flagged,
    }


def explain_json(verdict: EvidentialVerdict) -> str:
    """One JSON line per verdict (JSONL explanation stream)."""
    return json.dumps(explain(verdict), separators=(",", ":"))
