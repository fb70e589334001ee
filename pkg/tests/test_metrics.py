import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairseg.core import BinaryMask, Distribution
from pairseg.metrics import (
    EvalReport,
    bhattacharyya,
    jaccard,
    model_distance,
    segmentation_score,
)
from pairseg.synth import random_model


def dist_strategy(k=6):
    return st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k).map(
        lambda xs: Distribution(np.asarray(xs) / np.sum(xs))
    )


class TestBhattacharyya:
    def test_identical_is_zero(self):
        p = random_model(8, 0)
        assert bhattacharyya(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_support_is_infinite(self):
        assert bhattacharyya(Distribution([1.0, 0.0]), Distribution([0.0, 1.0])) == math.inf

    def test_closed_form(self):
        d = bhattacharyya(Distribution([0.5, 0.5]), Distribution([1.0, 0.0]))
        assert d == pytest.approx(math.log(2) / 2, abs=1e-12)

    @given(dist_strategy(), dist_strategy())
    def test_symmetric_nonnegative(self, p, q):
        assert bhattacharyya(p, q) == bhattacharyya(q, p)
        assert bhattacharyya(p, q) >= 0.0

    @given(dist_strategy())
    def test_zero_iff_equal(self, p):
        assert bhattacharyya(p, p) <= 1e-12


class TestModelDistance:
    def test_identity(self):
        g0, g1 = random_model(5, 1), random_model(5, 2)
        d, swapped = model_distance(g0, g1, g0, g1)
        assert d == pytest.approx(0.0, abs=1e-12)
        assert not swapped

    def test_swap(self):
        g0, g1 = random_model(5, 3), random_model(5, 4)
        d, swapped = model_distance(g0, g1, g1, g0)
        assert d == pytest.approx(0.0, abs=1e-12)
        assert swapped

    def test_uniform_estimates(self):
        g0, g1 = Distribution([1.0, 0.0]), Distribution([0.0, 1.0])
        e = Distribution([0.5, 0.5])
        d, _ = model_distance(g0, g1, e, e)
        assert d == pytest.approx(math.log(2) / 2, abs=1e-12)

    def test_infinite_one_pairing(self):
        # identity pairing diverges; the swap stays finite
        g0, g1 = Distribution([1.0, 0.0]), Distribution([0.0, 1.0])
        d, swapped = model_distance(g0, g1, g1, g0)
        assert math.isfinite(d) and swapped

    @given(dist_strategy(), dist_strategy(), dist_strategy(), dist_strategy())
    def test_relabeling_invariance(self, a, b, c, d):
        v1, _ = model_distance(a, b, c, d)
        v2, _ = model_distance(b, a, d, c)
        assert v1 == pytest.approx(v2, abs=1e-12)


class TestJaccard:
    def test_identical_nonempty(self):
        a = np.array([[True, False], [True, True]])
        assert jaccard(a, a) == 1.0

    def test_disjoint(self):
        a = np.array([True, False])
        assert jaccard(a, ~a) == 0.0

    def test_fraction(self):
        a = np.array([True, True, False])
        b = np.array([False, True, True])
        assert jaccard(a, b) == pytest.approx(1 / 3)

    def test_both_empty(self):
        empty = np.zeros((2, 2), dtype=bool)
        assert jaccard(empty, empty) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            jaccard(np.zeros((2, 2), dtype=bool), np.zeros((2, 3), dtype=bool))


class TestSegmentationScore:
    def test_identity(self):
        mask = BinaryMask(np.array([[0, 1], [1, 0]], dtype=np.uint8))
        jac, swapped = segmentation_score(mask, mask)
        assert jac == 1.0 and not swapped

    def test_complement_scores_via_swap(self):
        mask = BinaryMask(np.array([[0, 0], [1, 1]], dtype=np.uint8))
        flipped = BinaryMask(1 - mask.bits)
        jac, swapped = segmentation_score(mask, flipped)
        assert jac == 1.0 and swapped

    def test_constant_estimate_of_balanced_mask(self):
        gt = BinaryMask(np.array([[0, 0], [1, 1]], dtype=np.uint8))
        est = BinaryMask(np.zeros((2, 2), dtype=np.uint8))
        jac, _ = segmentation_score(gt, est)
        assert jac == 0.25

    def test_symmetric(self, rng):
        a = BinaryMask(rng.integers(0, 2, (6, 6)).astype(np.uint8))
        b = BinaryMask(rng.integers(0, 2, (6, 6)).astype(np.uint8))
        assert segmentation_score(a, b)[0] == segmentation_score(b, a)[0]

    def test_dimension_mismatch(self):
        a = BinaryMask(np.zeros((2, 2), dtype=np.uint8))
        b = BinaryMask(np.zeros((3, 2), dtype=np.uint8))
        with pytest.raises(ValueError, match="differ"):
            segmentation_score(a, b)


class TestEvalReport:
    def test_validation(self):
        with pytest.raises(ValueError, match="jac"):
            EvalReport(d_b=0.0, jac=1.5)
        with pytest.raises(ValueError, match="d_b"):
            EvalReport(d_b=-0.1, jac=0.5)

    def test_partial_report(self):
        report = EvalReport(d_b=None, jac=0.75, swapped_masks=False)
        assert report.d_b is None
        assert report.jac == 0.75

    def test_infinite_d_b_allowed(self):
        assert EvalReport(d_b=math.inf, jac=None).d_b == math.inf
