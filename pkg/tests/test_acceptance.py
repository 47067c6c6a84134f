"""Acceptance suite: one test per top-level criterion, each printing a
pass/fail line. Run with `pytest tests/test_acceptance.py -v -s`.

The corpus for criteria 1-3 is synthetic with class-mean separation far
above 6 sigma on velocity and reflection and overlapping density, mirroring
the reference experiment at desk scale (200 records, 11 label-flip spoofs).
"""

import json
import math

import numpy as np
import pytest

from evidar import (
    CompositeMode,
    Frame,
    GeneratorConfig,
    MassFunction,
    classify_dataset,
    evaluate,
    fit,
    generate,
    inject_spoof,
    summarize,
    train_test_split,
)
from evidar.cli import main
from evidar.data import DEFAULT_CLASS_PARAMS, Dataset
from evidar.features import FeatureModel, GaussianParams

FRAME = Frame(["s", "m"])
ALL_FEATURES = ("density", "reflection", "velocity")
BEST_FEATURES = ("velocity", "reflection")


def report_line(criterion, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"{status} criterion {criterion}: {detail}")
    assert ok, detail


def well_separated(seed, counts=None):
    # velocity: |60-5| = 55 >= 6*max(sigma)=12; reflection: |120-40| = 80 >= 24
    return generate(GeneratorConfig(counts=counts or {"s": 100, "m": 100}, seed=seed))


def random_normalized_mass(frame, rng):
    weights = rng.dirichlet(np.ones(frame.n_sets - 1))
    arr = np.zeros(frame.n_sets)
    arr[1:] = weights
    return MassFunction(frame, arr)


def oracle_combine(frame, v1, v2):
    out = [0.0] * frame.n_sets
    conflict = 0.0
    for b1 in range(frame.n_sets):
        for b2 in range(frame.n_sets):
            product = v1[b1] * v2[b2]
            if b1 & b2:
                out[b1 & b2] += product
            else:
                conflict += product
    return [v / (1.0 - conflict) for v in out], conflict


def test_criterion_1_spoof_detection_reproduction():
    train = well_separated(seed=101)
    model = fit(train, ALL_FEATURES, FRAME)
    corpus = inject_spoof(well_separated(seed=202), count=11, seed=7)
    verdicts = classify_dataset(model, corpus, BEST_FEATURES)
    report = summarize(verdicts, corpus, BEST_FEATURES)
    false_flags = sum(
        v.spoof_flagged for v, rec in zip(verdicts, corpus) if not rec.spoofed
    )
    ok = report.spoof_detected == 11 and report.spoof_total == 11 and false_flags == 0
    report_line(1, ok, f"spoof detection {report.spoof_detected}/11, false flags {false_flags}")


def test_criterion_2_accuracy_reproduction():
    corpus = well_separated(seed=505)
    train, test = train_test_split(corpus, 0.7, seed=1)
    model = fit(train, ALL_FEATURES, FRAME)
    best = evaluate(model, test, BEST_FEATURES)
    density_only = evaluate(model, test, ("density",))
    ok = (
        best.accuracy is not None
        and best.accuracy >= 0.95
        and density_only.accuracy is not None
        and density_only.accuracy < best.accuracy
    )
    report_line(
        2,
        ok,
        f"accuracy velocity+reflection {best.accuracy:.4f} >= 0.95, "
        f"density-only {density_only.accuracy:.4f} strictly lower",
    )


def test_criterion_3_uncertainty_scale():
    # fitted-composite model: composite likelihood gets its own Gaussian,
    # fit from wide composite-labeled training draws, so honest-evidence
    # intervals collapse far below the 0.25 that sum-of-singletons pins
    train = generate(GeneratorConfig(counts={"s": 100, "m": 100, "sm": 100}, seed=303))
    model = fit(train, ALL_FEATURES, FRAME, CompositeMode.FITTED_COMPOSITE)
    corpus = inject_spoof(well_separated(seed=404), count=11, seed=5, from_label="s")
    report = evaluate(model, corpus, BEST_FEATURES)
    honest = report.mean_honest_uncertainty
    spoofed = report.mean_spoofed_composite_mass
    ok = honest is not None and honest <= 0.01 and spoofed is not None and spoofed > honest
    report_line(
        3,
        ok,
        f"mean honest uncertainty {honest:.6f} <= 0.01, "
        f"mean spoofed composite mass {spoofed:.6f} strictly larger",
    )


def test_criterion_4_drc_algebra_suite():
    from evidar.dst import TotalConflict, combine, combine_details, vacuous

    rng = np.random.default_rng(2024)
    checked = 0
    for n_labels in (2, 3):
        frame = Frame([f"c{i}" for i in range(n_labels)])
        for _ in range(500):
            m1 = random_normalized_mass(frame, rng)
            m2 = random_normalized_mass(frame, rng)
            m3 = random_normalized_mass(frame, rng)
            try:
                c12, k12 = combine_details(m1, m2)
                c21, _ = combine_details(m2, m1)
                left = combine(c12, m3)
                right = combine(m1, combine(m2, m3))
            except TotalConflict:
                continue
            assert abs(math.fsum(c12.values) - 1.0) <= 1e-9, "normalization"
            assert np.all(np.abs(c12.values - c21.values) <= 1e-12), "commutativity"
            assert np.all(np.abs(left.values - right.values) <= 1e-9), "associativity"
            neutral = combine(vacuous(frame), m1)
            assert np.all(np.abs(neutral.values - m1.values) <= 1e-12), "vacuous neutrality"
            expected, oracle_k = oracle_combine(frame, m1.values, m2.values)
            assert abs(k12 - oracle_k) <= 1e-12, "oracle conflict"
            for bits in frame.focal_sets():
                assert abs(c12[bits] - expected[bits]) <= 1e-12, "oracle equality"
            checked += 1
    report_line(4, checked >= 1000, f"{checked} random pairs/triples, all algebra checks hold")


def test_criterion_5_belief_plausibility_suite():
    rng = np.random.default_rng(99)
    checked = 0
    for n_labels in (2, 3):
        frame = Frame([f"c{i}" for i in range(n_labels)])
        for _ in range(500):
            m = random_normalized_mass(frame, rng)
            for a in frame.focal_sets(include_empty=True):
                bel, pl = m.belief(a), m.plausibility(a)
                assert bel <= pl, "interval ordering"
                assert abs(pl - (1.0 - m.belief(frame.complement(a)))) <= 1e-9, "duality"
                for b in frame.focal_sets(include_empty=True):
                    if a & b == a:
                        assert m.belief(a) <= m.belief(b), "belief monotonicity"
                        assert m.plausibility(a) <= m.plausibility(b), "plausibility monotonicity"
            checked += 1
    report_line(5, checked == 1000, f"{checked} random masses, bel/pl invariants hold")


def test_criterion_6_composite_mass_identity():
    rng = np.random.default_rng(7)
    exact = 0
    for _ in range(1000):
        params = {
            ("velocity", 1): GaussianParams(rng.normal(0, 30), rng.uniform(0.5, 20)),
            ("velocity", 2): GaussianParams(rng.normal(0, 30), rng.uniform(0.5, 20)),
        }
        model = FeatureModel(FRAME, ("velocity",), params)
        near = params[("velocity", 1)] if rng.random() < 0.5 else params[("velocity", 2)]
        x = rng.normal(near.mean, 3 * math.sqrt(near.variance))
        mass = model.mass_from_feature("velocity", x)
        exact += mass[FRAME.full_set] == 0.5
    underflow_model = FeatureModel(
        FRAME,
        ("velocity",),
        {("velocity", 1): GaussianParams(0.0, 1.0), ("velocity", 2): GaussianParams(1.0, 1.0)},
    )
    vac = underflow_model.mass_from_feature("velocity", 1e9)
    ok = exact == 1000 and vac[FRAME.full_set] == 1.0
    report_line(6, ok, f"m(sm) exactly 0.5 for {exact}/1000 inputs; underflow returns vacuous")


def test_criterion_7_cli_determinism(tmp_path):
    def pipeline(root):
        root.mkdir()
        data = root / "data.csv"
        spoofed = root / "spoofed.csv"
        model = root / "model.txt"
        report = root / "report.json"
        plot = root / "plot.csv"
        jsonl = root / "verdicts.jsonl"
        assert main(["generate", "--seed", "7", "--count-s", "100", "--count-m", "100",
                     "-o", str(data)]) == 0
        assert main(["fit", "--input", str(data), "-o", str(model)]) == 0
        assert main(["inject", "--input", str(data), "--count", "11", "--seed", "3",
                     "-o", str(spoofed)]) == 0
        assert main(["classify", "--input", str(spoofed), "--model", str(model),
                     "-o", str(jsonl)]) == 0
        assert main(["evaluate", "--input", str(spoofed), "--model", str(model),
                     "-o", str(report), "--plot-data", str(plot)]) == 0
        return [data, spoofed, model, report, plot, jsonl]

    first = pipeline(tmp_path / "run1")
    second = pipeline(tmp_path / "run2")
    identical = all(a.read_bytes() == b.read_bytes() for a, b in zip(first, second))

    par_report = tmp_path / "parallel.json"
    assert main(["evaluate", "--input", str(first[1]), "--model", str(first[2]),
                 "--parallel", "-o", str(par_report)]) == 0
    seq_payload = json.loads(first[3].read_text())
    par_payload = json.loads(par_report.read_text())
    parallel_ok = seq_payload["report"] == par_payload["report"]
    ok = identical and parallel_ok
    report_line(7, ok, "byte-identical reruns for all 5 commands; parallel == sequential")
