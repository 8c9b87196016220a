import numpy as np
import pytest

from gtvtomo import (
    ErrorCurve,
    Image,
    l2_error,
    min_error,
    profile,
    relative_l2_error,
)


class TestL2Error:
    def test_identical_images(self):
        img = Image(4, np.arange(16.0))
        assert l2_error(img, img) == 0.0

    def test_single_pixel_change(self):
        a = Image(4, np.zeros(16))
        pix = np.zeros(16)
        pix[5] = 3.0
        assert l2_error(Image(4, pix), a) == 3.0

    def test_matches_elementwise_computation(self):
        rng = np.random.default_rng(0)
        a, b = rng.random(25), rng.random(25)
        brute = np.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
        assert l2_error(Image(5, a), Image(5, b)) == pytest.approx(brute, rel=1e-12)

    def test_metric_properties(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x, y, z = (Image(3, rng.random(9)) for _ in range(3))
            assert l2_error(x, y) == pytest.approx(l2_error(y, x), abs=1e-9)
            assert l2_error(x, z) <= l2_error(x, y) + l2_error(y, z) + 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            l2_error(Image(4, np.zeros(16)), Image(5, np.zeros(25)))

    def test_relative_variant(self):
        a = Image(2, np.array([3.0, 0.0, 0.0, 0.0]))
        b = Image(2, np.array([0.0, 0.0, 0.0, 4.0]))
        assert relative_l2_error(a, b) == pytest.approx(5.0 / 4.0)
        with pytest.raises(ValueError):
            relative_l2_error(a, Image(2, np.zeros(4)))


class TestProfile:
    def test_constant_image(self):
        prof = profile(Image(5, np.full(25, 2.5)), 3)
        assert prof.row_index == 3
        np.testing.assert_array_equal(prof.values, np.full(5, 2.5))

    def test_shepp_logan_symmetric_row(self, shepp64):
        # the classic ellipse table pairs the two off-center ventricles with
        # different semi-axes, so rows crossing them are not mirror images;
        # row 16 (y ~ 0.49) crosses only centered ellipses and is symmetric
        values = profile(shepp64, 16).values
        np.testing.assert_allclose(values, values[::-1], atol=1e-9)

    def test_shepp_logan_center_row_asymmetry_is_real(self, shepp64):
        values = profile(shepp64, 32).values
        assert np.abs(values - values[::-1]).max() > 0.1

    def test_matches_direct_indexing(self):
        rng = np.random.default_rng(2)
        img = Image(6, rng.random(36))
        np.testing.assert_array_equal(profile(img, 4).values, img.grid[4])

    def test_out_of_range(self):
        img = Image(4, np.zeros(16))
        for row in (-1, 4):
            with pytest.raises(ValueError):
                profile(img, row)


class TestMinError:
    def test_simple(self):
        assert min_error(ErrorCurve(np.array([5.0, 3.0, 4.0]))) == (1, 3.0)

    def test_tie_breaks_to_earliest(self):
        assert min_error(ErrorCurve(np.array([2.0, 2.0]))) == (0, 2.0)

    def test_bounds_every_element(self):
        rng = np.random.default_rng(3)
        curve = ErrorCurve(rng.random(50))
        _, value = min_error(curve)
        assert np.all(curve.values >= value)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            min_error(ErrorCurve(np.array([])))

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            ErrorCurve(np.array([1.0, -2.0]))
        with pytest.raises(ValueError):
            ErrorCurve(np.array([1.0, np.inf]))
