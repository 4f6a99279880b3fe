import math

import numpy as np
import pytest

import vpsal


def test_metrics_match_hand_values():
    m = np.array([[0.0, 1.0], [2.0, 3.0]])
    assert vpsal.nss(m, np.array([[1.0, 1.0]])) == pytest.approx(1.5 / math.sqrt(1.25), abs=1e-12)
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[2.0, 4.0], [5.0, 9.0]])
    assert vpsal.cc(a, b) == pytest.approx(np.corrcoef(a.ravel(), b.ravel())[0, 1], abs=1e-12)
    # One positive (3) above all three negatives.
    assert vpsal.auc(m, np.array([[1.0, 1.0]])) == 1.0


def test_gaussian_channel_shape_and_peak():
    g = vpsal.vp_gaussian(40, 30, 20.0, 15.0, 5.0)
    assert g.shape == (30, 40)
    assert g[15, 20] == 1.0
    yy, xx = np.mgrid[0:30, 0:40]
    raw = np.exp(-((xx - 20.0) ** 2 + (yy - 15.0) ** 2) / (4 * 25.0))
    expect = (raw - raw.min()) / (raw.max() - raw.min())
    assert np.max(np.abs(g - expect)) < 1e-12


def test_detector_on_synthetic_corpus(tmp_path):
    manifest = vpsal.write_synthetic_corpus(tmp_path, n_images=2, seed=3)
    assert manifest.exists()
    img = vpsal.load_image(tmp_path / "images" / "synth_0000.png")
    assert img.ndim == 3 and img.shape[2] == 3
    x, y, support = vpsal.detect_vp(img)
    assert 0 <= x < img.shape[1] and 0 <= y < img.shape[0]
    assert support >= 1
    sal = vpsal.builtin_saliency(img)
    assert sal.shape == img.shape[:2]
    assert 0.0 <= sal.min() and sal.max() <= 1.0


def test_svm_and_score_map():
    rng = np.random.default_rng(0)
    pos = rng.normal(0.8, 0.05, size=(40, 2))
    neg = rng.normal(0.2, 0.05, size=(40, 2))
    w, b = vpsal.train_linear_svm(np.vstack([pos, neg]), [1] * 40 + [-1] * 40, C=10.0, seed=1)
    assert len(w) == 2 and w[0] > 0 and w[1] > 0
    ch = [rng.random((6, 5)), rng.random((6, 5))]
    m = vpsal.score_map(w, b, ch)
    assert m.shape == (6, 5)
    assert m.min() == 0.0 and m.max() == 1.0


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        vpsal.improvement(0.0, 1.0)
    with pytest.raises(vpsal.VpsalError):
        vpsal.detect_vp(np.full((40, 40), 0.5))
    with pytest.raises(ValueError):
        vpsal.run_experiment({"no_such_key": 1})


def test_small_experiment_end_to_end(tmp_path):
    manifest = vpsal.write_synthetic_corpus(tmp_path, n_images=10, width=200, height=150, seed=2)
    report = vpsal.run_experiment(
        manifest=manifest,
        working_max_side=200,
        vp_source="annotation",
        sigma_vp_list=[15, 30],
        train_count=5,
        xval_splits=0,
        n_pos=20,
        n_neg=20,
        svm_epochs=30,
    )
    names = {v["variant"]["name"] for v in report["variants"]}
    assert "model+vp@annotation" in names
    assert "Model + VP" in vpsal.render_table(report)
    assert vpsal.improvement(0.719, 0.807) == pytest.approx(12.24, abs=0.01)
