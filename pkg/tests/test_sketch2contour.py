import numpy as np
import pytest
import torch

from sketchtts.config import ModelConfig
from sketchtts.errors import AlignmentError, ValidationError
from sketchtts.prosody import ProsodySketch
from sketchtts.sketch2contour import (ContourPredictor, SketchPair, UserPolyline,
                                      resample_user_sketch, sketch_dropout)


def segment_oracle(points, xs):
    """Independent polyline evaluation: locate the segment, solve linearly."""
    out = []
    for x in xs:
        if x <= points[0][0]:
            out.append(points[0][1])
            continue
        if x >= points[-1][0]:
            out.append(points[-1][1])
            continue
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            if x0 <= x <= x1:
                out.append(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
                break
    return np.array(out)


def test_polyline_validation():
    with pytest.raises(ValidationError):
        UserPolyline([(0.0, 0.0)])
    with pytest.raises(ValidationError):
        UserPolyline([(0.5, 0.0), (0.5, 1.0)])
    with pytest.raises(ValidationError):
        UserPolyline([(0.6, 0.0), (0.4, 1.0)])
    with pytest.raises(ValidationError):
        UserPolyline([(0.0, -0.2), (1.0, 0.5)])
    with pytest.raises(ValidationError):
        UserPolyline.from_json({"kind": "pitch", "points": [[0.0], [1.0]]})


def test_resample_diagonal():
    poly = UserPolyline([(0.0, 0.0), (1.0, 1.0)])
    sketch = resample_user_sketch(poly, 4)
    assert np.allclose(sketch.values, [0.125, 0.375, 0.625, 0.875])


def test_resample_flat():
    poly = UserPolyline([(0.0, 0.7), (1.0, 0.7)])
    for m in (1, 3, 10):
        assert np.allclose(resample_user_sketch(poly, m).values, 0.7)


def test_resample_triangle_matches_segment_oracle():
    points = [(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]
    poly = UserPolyline(points)
    sketch = resample_user_sketch(poly, 5)
    xs = (np.arange(5) + 0.5) / 5
    oracle = segment_oracle(points, xs)
    assert np.allclose(oracle, [0.2, 0.6, 1.0, 0.6, 0.2])
    assert np.allclose(sketch.values, oracle)


def test_resample_exact_at_vertex_abscissae():
    m = 8
    xs = (np.arange(m) + 0.5) / m
    rng = np.random.default_rng(0)
    ys = rng.uniform(0, 1, m)
    poly = UserPolyline(list(zip(xs, ys)))
    assert np.allclose(resample_user_sketch(poly, m).values, ys)


def test_resample_bounds_property():
    rng = np.random.default_rng(1)
    for _ in range(25):
        n = int(rng.integers(2, 8))
        xs = np.sort(rng.choice(np.linspace(0, 1, 50), n, replace=False))
        ys = rng.uniform(0, 1, n)
        poly = UserPolyline(list(zip(xs, ys)))
        m = int(rng.integers(1, 40))
        values = resample_user_sketch(poly, m).values
        assert values.size == m
        assert values.min() >= 0.0 and values.max() <= 1.0


def _pair(m=6):
    rng = np.random.default_rng(2)
    return SketchPair(ProsodySketch(rng.uniform(0, 1, m), "pitch"),
                      ProsodySketch(rng.uniform(0, 1, m), "energy"))


def test_dropout_p0_is_identity():
    pair = _pair()
    out = sketch_dropout(pair, 0.0, np.random.default_rng(0))
    assert np.array_equal(out.pitch.values, pair.pitch.values)
    assert np.array_equal(out.energy.values, pair.energy.values)


def test_dropout_p1_zeroes_exactly_one():
    pair = _pair()
    rng = np.random.default_rng(1)
    for _ in range(200):
        out = sketch_dropout(pair, 1.0, rng)
        assert out.pitch.is_absent != out.energy.is_absent


def test_dropout_monte_carlo_rate_and_split():
    pair = _pair()
    rng = np.random.default_rng(3)
    zeroed = 0
    pitch_zeroed = 0
    n = 10_000
    for _ in range(n):
        out = sketch_dropout(pair, 0.2, rng)
        if out.pitch.is_absent or out.energy.is_absent:
            zeroed += 1
            pitch_zeroed += out.pitch.is_absent
    assert 0.18 <= zeroed / n <= 0.22
    assert 0.45 <= pitch_zeroed / zeroed <= 0.55


def test_pair_validation():
    with pytest.raises(AlignmentError):
        SketchPair(ProsodySketch(np.zeros(3), "pitch"),
                   ProsodySketch(np.zeros(4), "energy"))
    with pytest.raises(ValidationError):
        SketchPair(ProsodySketch(np.zeros(3), "energy"),
                   ProsodySketch(np.zeros(3), "pitch"))


def test_pair_single_routing_defaults_to_pitch():
    sketch = ProsodySketch(np.full(4, 0.4), "pitch")
    pair = SketchPair.from_single(sketch, 4)
    assert not pair.pitch.is_absent and pair.energy.is_absent
    energy = ProsodySketch(np.full(4, 0.4), "energy")
    pair = SketchPair.from_single(energy, 4)
    assert pair.pitch.is_absent and not pair.energy.is_absent


def _predictor():
    torch.manual_seed(0)
    return ContourPredictor(ModelConfig()).eval()


def test_predictor_output_shapes():
    predictor = _predictor()
    proj = torch.randn(1, 12, 80)
    ske = torch.rand(1, 12)
    p, e = predictor(proj, ske, ske)
    assert p.shape == (1, 12) and e.shape == (1, 12)


def test_predictor_rejects_length_mismatch():
    predictor = _predictor()
    with pytest.raises(AlignmentError):
        predictor(torch.randn(1, 12, 80), torch.rand(1, 11), torch.rand(1, 12))


def test_predictor_deterministic_and_finite_with_absent_sketch():
    predictor = _predictor()
    proj = torch.randn(1, 9, 80)
    zeros = torch.zeros(1, 9)
    p1, e1 = predictor(proj, zeros, zeros)
    p2, e2 = predictor(proj, zeros, zeros)
    assert torch.equal(p1, p2) and torch.equal(e1, e2)
    assert torch.isfinite(p1).all() and torch.isfinite(e1).all()
