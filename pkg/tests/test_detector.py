"""Tests for the evidential classification and spoof-detection pipeline."""

import json

import numpy as np
import pytest

from evidar.data import Dataset, GeneratorConfig, RadarRecord, generate, inject_spoof
from evidar.detector import (
    classify,
    classify_dataset,
    decide,
    evaluate,
    explain,
    explain_json,
    summarize,
)
from evidar.dst import Frame, MassFunction
from evidar.features import CompositeMode, FeatureModel, GaussianParams, UnknownFeature, fit

FRAME = Frame(["s", "m"])
S_, M_, SM_ = 1, 2, 3


def separated_model(composite_mode=CompositeMode.SUM_OF_SINGLETONS):
    params = {
        ("velocity", S_): GaussianParams(5.0, 4.0),
        ("velocity", M_): GaussianParams(60.0, 1.0),
        ("reflection", S_): GaussianParams(40.0, 16.0),
        ("reflection", M_): GaussianParams(120.0, 4.0),
    }
    if composite_mode is CompositeMode.FITTED_COMPOSITE:
        params[("velocity", SM_)] = GaussianParams(32.5, 6400.0)
        params[("reflection", SM_)] = GaussianParams(80.0, 25600.0)
    return FeatureModel(FRAME, ("velocity", "reflection"), params, composite_mode)


def stationary_record(label="s", spoofed=False):
    return RadarRecord(0.0, 10.0, 40.0, 5.0, label, spoofed)


def moving_record(label="m", spoofed=False):
    return RadarRecord(0.0, 10.0, 120.0, 60.0, label, spoofed)


class TestDecide:
    def test_argmax_belief(self):
        combined = MassFunction(FRAME, {S_: 0.0, M_: 0.625, SM_: 0.375})
        assert decide(combined) == M_

    def test_tie_goes_composite(self):
        combined = MassFunction(FRAME, {S_: 0.3, M_: 0.3, SM_: 0.4})
        assert decide(combined) == SM_

    def test_composite_mass_above_tau_goes_composite(self):
        combined = MassFunction(FRAME, {S_: 0.35, M_: 0.05, SM_: 0.6})
        assert decide(combined) == SM_
        assert decide(combined, tau=0.7) == S_


class TestClassify:
    def test_spoofed_stationary_record_flags(self):
        model = separated_model()
        verdict = classify(model, stationary_record(label="m", spoofed=True))
        assert verdict.decided == S_
        assert verdict.spoof_flagged
        assert verdict.claimed == "m"

    def test_honest_record_does_not_flag(self):
        verdict = classify(separated_model(), moving_record())
        assert verdict.decided == M_
        assert not verdict.spoof_flagged

    def test_exact_tie_decides_composite(self):
        params = {
            ("velocity", S_): GaussianParams(-1.0, 1.0),
            ("velocity", M_): GaussianParams(1.0, 1.0),
        }
        model = FeatureModel(FRAME, ("velocity",), params)
        verdict = classify(model, RadarRecord(0.0, 1.0, 1.0, 0.0, "s"))
        assert verdict.decided == SM_
        assert not verdict.spoof_flagged

    def test_feature_order_is_canonicalized(self):
        model = separated_model()
        rec = stationary_record()
        a = classify(model, rec, features=("velocity", "reflection"))
        b = classify(model, rec, features=("reflection", "velocity"))
        assert np.array_equal(a.combined.values, b.combined.values)
        assert a.decided == b.decided

    def test_argmax_property(self):
        model = separated_model()
        for rec in (stationary_record(), moving_record(),
                    RadarRecord(0.0, 10.0, 70.0, 20.0, "s")):
            verdict = classify(model, rec)
            if verdict.decided.bit_count() == 1:
                top = verdict.combined.belief(verdict.decided)
                for singleton in FRAME.singletons():
                    assert top >= verdict.combined.belief(singleton)

    def test_spoof_flag_definition(self):
        model = separated_model()
        dataset = inject_spoof(
            generate(GeneratorConfig(counts={"s": 30, "m": 30}, seed=12)), count=8, seed=1
        )
        for i, rec in enumerate(dataset):
            verdict = classify(model, rec, record_index=i)
            expected = (
                verdict.decided.bit_count() == 1
                and verdict.decided != FRAME.parse_set(rec.label)
            )
            assert verdict.spoof_flagged == expected

    def test_intervals_consistent_with_combined_mass(self):
        verdict = classify(separated_model(), stationary_record())
        for focal, interval in verdict.intervals.items():
            assert interval.belief == pytest.approx(verdict.combined.belief(focal))
            assert interval.plausibility == pytest.approx(verdict.combined.plausibility(focal))

    def test_unknown_feature_subset(self):
        with pytest.raises(UnknownFeature):
            classify(separated_model(), stationary_record(), features=("chirp",))

    def test_total_conflict_degrades_to_vacuous(self):
        params = {
            ("velocity", S_): GaussianParams(0.0, 1.0),
            ("velocity", M_): GaussianParams(500.0, 1.0),
            ("velocity", SM_): GaussianParams(250.0, 1.0),
            ("reflection", S_): GaussianParams(500.0, 1.0),
            ("reflection", M_): GaussianParams(0.0, 1.0),
            ("reflection", SM_): GaussianParams(250.0, 1.0),
        }
        model = FeatureModel(FRAME, ("velocity", "reflection"), params,
                             CompositeMode.FITTED_COMPOSITE)
        verdict = classify(model, RadarRecord(0.0, 1.0, 0.0, 0.0, "s"))
        assert verdict.degraded
        assert verdict.conflict == 1.0
        assert verdict.combined[SM_] == 1.0
        assert verdict.decided == SM_
        assert not verdict.spoof_flagged


class TestAmbiguityDrift:
    def test_interpolation_passes_through_composite(self):
        # moving a stationary-consistent reading toward the moving class
        # must reach the composite verdict before the opposite singleton
        model = separated_model(CompositeMode.FITTED_COMPOSITE)
        seen = []
        for t in np.linspace(0.0, 1.0, 201):
            velocity = 5.0 + t * (60.0 - 5.0)
            reflection = 40.0 + t * (120.0 - 40.0)
            rec = RadarRecord(0.0, 10.0, reflection, velocity, "s")
            decided = classify(model, rec).decided
            if not seen or seen[-1] != decided:
                seen.append(decided)
        assert seen == [S_, SM_, M_]


class TestEvaluate:
    def test_no_spoofed_records_reports_absent_rate(self):
        dataset = generate(GeneratorConfig(counts={"s": 20, "m": 20}, seed=13))
        report = evaluate(separated_model(), dataset)
        assert report.spoof_total == 0
        assert report.spoof_detection_rate is None
        assert report.spoof_detected is None

    def test_all_spoofed_detection_rate_one(self):
        dataset = generate(GeneratorConfig(counts={"s": 10, "m": 10}, seed=14))
        spoofed = inject_spoof(dataset, count=len(dataset), seed=1)
        report = evaluate(separated_model(), spoofed)
        assert report.spoof_detection_rate == 1.0

    def test_confusion_counts_sum_to_dataset_size(self):
        dataset = inject_spoof(
            generate(GeneratorConfig(counts={"s": 25, "m": 25}, seed=15)), count=5, seed=2
        )
        report = evaluate(separated_model(), dataset)
        total = sum(v for row in report.confusion.values() for v in row.values())
        assert total == report.n_records == len(dataset)

    def test_parallel_matches_sequential(self):
        dataset = inject_spoof(
            generate(GeneratorConfig(counts={"s": 40, "m": 40}, seed=16)), count=6, seed=2
        )
        model = separated_model()
        sequential = evaluate(model, dataset)
        parallel = evaluate(model, dataset, parallel=True)
        assert sequential == parallel

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            summarize([], Dataset(records=()), ("velocity",))


class TestExplain:
    def test_field_presence_for_spoofed_verdict(self):
        verdict = classify(separated_model(), stationary_record(label="m", spoofed=True),
                           record_index=7)
        record = explain(verdict)
        assert list(record) == [
            "record_index", "per_feature_masses", "combined_mass", "conflict",
            "intervals", "decided", "claimed", "spoof_flagged",
        ]
        assert record["record_index"] == 7
        assert record["claimed"] == "m"
        assert record["decided"] == "s"
        assert record["spoof_flagged"] is True
        assert set(record["per_feature_masses"]) == {"velocity", "reflection"}

    def test_byte_stability(self):
        model = separated_model()
        a = explain_json(classify(model, stationary_record()))
        b = explain_json(classify(model, stationary_record()))
        assert a == b
        json.loads(a)

    def test_composite_decision_marks_ambiguity(self):
        params = {
            ("velocity", S_): GaussianParams(-1.0, 1.0),
            ("velocity", M_): GaussianParams(1.0, 1.0),
        }
        model = FeatureModel(FRAME, ("velocity",), params)
        record = explain(classify(model, RadarRecord(0.0, 1.0, 1.0, 0.0, "s")))
        assert record["decided"] == "sm"
        assert record["intervals"]["sm"]["uncertainty"] == 0.0


class TestOnGeneratedCorpus:
    def test_accuracy_target_on_well_separated_corpus(self):
        frame = Frame(["s", "m"])
        train = generate(GeneratorConfig(counts={"s": 100, "m": 100}, seed=21))
        model = fit(train, ("velocity", "reflection"), frame)
        test = generate(GeneratorConfig(counts={"s": 100, "m": 100}, seed=22))
        report = evaluate(model, test)
        assert report.accuracy is not None and report.accuracy >= 0.95

    def test_label_flip_spoofs_all_detected(self):
        frame = Frame(["s", "m"])
        train = generate(GeneratorConfig(counts={"s": 100, "m": 100}, seed=23))
        model = fit(train, ("velocity", "reflection"), frame)
        test = inject_spoof(
            generate(GeneratorConfig(counts={"s": 100, "m": 100}, seed=24)), count=11, seed=3
        )
        report = evaluate(model, test)
        assert report.spoof_detection_rate == 1.0
