import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairseg.core import (
    BinaryMask,
    Distribution,
    LabelImage,
    MixtureParams,
    ModelEstimate,
    PairDistribution,
    new_label_image,
    normalize_clamped,
)


class TestLabelImage:
    def test_basic_construction(self):
        img = new_label_image(2, 2, [0, 0, 1, 1], 2)
        assert img.width == 2 and img.height == 2
        assert img.labels.tolist() == [[0, 0], [1, 1]]

    def test_label_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            new_label_image(2, 2, [0, 3, 0, 0], 2)

    def test_single_pixel(self):
        img = new_label_image(1, 1, [0], 1)
        assert img.num_pixels == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="expected 4 labels"):
            new_label_image(2, 2, [0, 1], 2)

    def test_negative_label(self):
        with pytest.raises(ValueError, match="out of range"):
            new_label_image(1, 2, [0, -1], 2)

    def test_immutable(self):
        img = new_label_image(2, 2, [0, 0, 1, 1], 2)
        with pytest.raises(ValueError):
            img.labels[0, 0] = 1


class TestBinaryMask:
    def test_regions(self):
        mask = BinaryMask(np.array([[0, 1], [1, 1]], dtype=np.uint8))
        assert mask.area_fraction(0) == 0.25
        assert mask.region(1).sum() == 3

    def test_rejects_other_values(self):
        with pytest.raises(ValueError, match="0 or 1"):
            BinaryMask(np.array([[0, 2]], dtype=np.uint8))


class TestDistribution:
    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            Distribution([0.5, 0.6, -0.1])

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum to"):
            Distribution([0.5, 0.6])

    def test_k(self):
        assert Distribution([0.25] * 4).k == 4


class TestPairDistribution:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="asymmetric"):
            PairDistribution(np.array([[0.5, 0.3], [0.2, 0.0]]), r=1)

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum to"):
            PairDistribution(np.array([[0.5, 0.2], [0.2, 0.5]]), r=1)

    def test_valid(self):
        pd = PairDistribution(np.array([[0.25, 0.25], [0.25, 0.25]]), r=3)
        assert pd.k == 2 and pd.r == 3


class TestMixtureParams:
    def test_open_interval(self):
        with pytest.raises(ValueError, match=r"\(0,1\)"):
            MixtureParams(0.0, 1.0, 0.0)

    def test_sum_to_one(self):
        with pytest.raises(ValueError, match="not 1"):
            MixtureParams(0.4, 0.7, 0.0)

    def test_negative_eps(self):
        with pytest.raises(ValueError, match="eps_r"):
            MixtureParams.from_w0(0.5, -0.1)

    def test_from_w0(self):
        p = MixtureParams.from_w0(0.3, 0.05)
        assert p.w1 == 0.7 and p.eps_r == 0.05


class TestModelEstimate:
    def test_negative_residual_rejected(self):
        t = Distribution([0.5, 0.5])
        with pytest.raises(ValueError, match="residual"):
            ModelEstimate(MixtureParams.from_w0(0.5), t, t, residual=-1.0)

    def test_alphabet_mismatch_rejected(self):
        with pytest.raises(ValueError, match="alphabet"):
            ModelEstimate(
                MixtureParams.from_w0(0.5),
                Distribution([0.5, 0.5]),
                Distribution([0.25] * 4),
            )


class TestNormalizeClamped:
    def test_clamps_and_renormalizes(self):
        d = normalize_clamped([0.2, -0.1, 0.3])
        assert np.allclose(d.probs, [0.4, 0.0, 0.6])

    def test_symmetric(self):
        assert normalize_clamped([1.0, 1.0]).probs.tolist() == [0.5, 0.5]

    def test_all_nonpositive_errors(self):
        with pytest.raises(ValueError, match="no positive mass"):
            normalize_clamped([-1.0, -2.0])

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=16))
    def test_idempotent(self, raw):
        if max(raw, default=0.0) <= 0:
            return
        once = normalize_clamped(raw)
        twice = normalize_clamped(once.probs)
        assert np.array_equal(once.probs, twice.probs)

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=16))
    def test_output_is_distribution(self, raw):
        if max(raw, default=0.0) <= 0:
            return
        d = normalize_clamped(raw)
        assert d.probs.min() >= 0
        assert abs(d.probs.sum() - 1.0) <= 1e-9
