import math
from pathlib import Path

import numpy as np
import pytest

import boxfix

DATA = Path(__file__).resolve().parent.parent / "data"


def test_geometry():
    a = boxfix.BBox(0, 0, 10, 10)
    b = boxfix.BBox(5, 0, 15, 10)
    assert boxfix.iou(a, b) == pytest.approx(1 / 3)
    assert boxfix.from_xywh(1, 2, 3, 4) == boxfix.BBox(1, 2, 4, 6)
    assert boxfix.to_xywh(boxfix.BBox(1, 2, 4, 6)) == (1, 2, 3, 4)
    with pytest.raises(boxfix.BoxfixError):
        boxfix.BBox(5, 0, 1, 1)
    with pytest.raises(ValueError):
        boxfix.from_xywh(0, 0, -1, 1)


def test_corrupt_is_seeded():
    clean = boxfix.BBox(0, 0, 100, 100)
    assert boxfix.corrupt_box(clean, "gaussian", 0.0, 1) == clean
    a = boxfix.corrupt_box(clean, "exp-enclosing", 0.05, 9)
    assert a == boxfix.corrupt_box(clean, "exp-enclosing", 0.05, 9)
    assert a.contains(clean)


def test_noise_level():
    assert boxfix.estimate_noise_level([0.1, -0.1, 0.1, -0.1]) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        boxfix.estimate_noise_level([])


def test_weight_and_correct_box():
    ann = boxfix.Instance(1, 1, 1, boxfix.BBox(10, 10, 30, 30))
    exact = boxfix.Prediction(1, boxfix.BBox(10, 10, 30, 30), 1, 0.8)
    assert boxfix.weight(exact, ann, "step:0.7") == pytest.approx(0.8)
    shifted = boxfix.Prediction(1, boxfix.BBox(20, 10, 40, 30), 1, 1.0)
    cfg = boxfix.CorrectionConfig(weight="step:0.3", iou_floor=0.3)
    fixed = boxfix.correct_box(ann, [shifted], cfg)
    assert fixed == boxfix.BBox(15, 10, 35, 30)
    assert boxfix.correct_box(ann, []) == ann.box


def test_kalman_matches_closed_form():
    rng = np.random.default_rng(0)
    m0 = rng.uniform(0, 100, 4)
    p0 = np.diag(rng.uniform(1, 10, 4))
    ms = [(rng.uniform(0, 100, 4), np.diag(rng.uniform(1, 10, 4))) for _ in range(3)]
    mean, cov = m0, p0
    for z, r in ms:
        mean, cov = boxfix.kalman_update(mean, cov, z, r)
    bmean, bcov = boxfix.posterior_batch(m0, p0, ms)
    info = np.linalg.inv(p0) + sum(np.linalg.inv(r) for _, r in ms)
    expect = np.linalg.solve(info, np.linalg.inv(p0) @ m0 + sum(np.linalg.inv(r) @ z for z, r in ms))
    np.testing.assert_allclose(mean, expect, atol=1e-9)
    np.testing.assert_allclose(bmean, expect, atol=1e-9)
    np.testing.assert_allclose(bcov, cov, atol=1e-9)


def test_experiment_improves_iou():
    scene = boxfix.SceneConfig()
    scene.instances = 300
    clean = boxfix.synthesize_instances(scene, 3)
    sim = boxfix.SimConfig(seed=4)
    rep = boxfix.run_experiment(clean, "gaussian", 0.1, sim, boxfix.CorrectionConfig(weight="step:0.5"), 5)
    assert rep.instances == 300
    assert rep.mean_iou_corrected > rep.mean_iou_noisy
    assert rep.corrected_errors["left"]["stddev"] < rep.noisy_errors["left"]["stddev"]

    zero = boxfix.SimConfig(constant_score=0.0, seed=4)
    same = boxfix.run_experiment(clean, "gaussian", 0.1, zero, boxfix.CorrectionConfig(), 5)
    assert same.mean_iou_corrected == same.mean_iou_noisy


def test_dataset_round_trip_through_correction():
    anns = boxfix.load_dataset_instances(str(DATA / "fixture.json"))
    preds = boxfix.load_results(str(DATA / "fixture_preds.json"))
    assert [a.id for a in anns] == [11, 12, 13, 14]
    out, report = boxfix.correct_dataset(anns, preds)
    assert len(out) == len(anns)
    assert [(o.id, o.image_id, o.category_id, o.iscrowd) for o in out] == [
        (a.id, a.image_id, a.category_id, a.iscrowd) for a in anns
    ]
    assert 0.0 <= report["unchanged_fraction"] <= 1.0


def test_evaluate_ap():
    gt = [boxfix.Instance(1, 1, 1, boxfix.BBox(0, 0, 100, 100)), boxfix.Instance(2, 1, 1, boxfix.BBox(200, 0, 300, 100))]
    preds = [
        boxfix.Prediction(1, gt[0].box, 1, 0.9),
        boxfix.Prediction(1, boxfix.BBox(500, 500, 550, 550), 1, 0.8),
        boxfix.Prediction(1, gt[1].box, 1, 0.7),
    ]
    r = boxfix.evaluate_ap(preds, gt, [0.5])
    assert r["map"] == pytest.approx(253 / 303, abs=1e-12)
    assert boxfix.evaluate_ap([], gt)["map"] == 0.0
    assert math.isclose(boxfix.evaluate_ap([boxfix.Prediction(1, g.box, 1, 1.0) for g in gt], gt)["map"], 1.0)


def test_bad_score_file():
    with pytest.raises(boxfix.BoxfixError, match="score"):
        boxfix.load_results(str(DATA / "bad_score.json"))
