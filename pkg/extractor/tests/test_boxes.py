import pytest

from faceaes_extractor import Box, clamp, enlarge, largest, pixel_bounds


class TestBox:
    def test_properties(self):
        b = Box(10, 20, 30, 60)
        assert b.width == 20 and b.height == 40
        assert b.area == 800

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            Box(10, 10, 10, 20)
        with pytest.raises(ValueError):
            Box(0, 5, 10, 5)


class TestEnlarge:
    def test_square_reference_case(self):
        assert enlarge(Box(100, 100, 200, 200)).as_tuple() == (90, 90, 210, 210)

    def test_rectangle_pads_per_axis(self):
        assert enlarge(Box(0, 0, 10, 20), 0.1).as_tuple() == (-1, -2, 11, 22)

    def test_zero_fraction_identity(self):
        b = Box(3, 4, 7, 9)
        assert enlarge(b, 0.0) == b

    def test_negative_fraction_rejected(self):
        with pytest.raises(ValueError):
            enlarge(Box(0, 0, 1, 1), -0.1)


class TestClamp:
    def test_inside_untouched(self):
        b = Box(2, 3, 8, 9)
        assert clamp(b, 10, 10) == b

    def test_edges_clipped(self):
        assert clamp(Box(-1, -2, 11, 22), 10, 15).as_tuple() == (0, 0, 10, 15)

    def test_fully_outside_rejected(self):
        with pytest.raises(ValueError):
            clamp(Box(20, 20, 30, 30), 10, 10)


class TestLargest:
    def test_picks_bigger_area(self):
        small = Box(0, 0, 5, 5)
        big = Box(10, 10, 20, 30)
        assert largest([small, big]) == big
        assert largest([big, small]) == big

    def test_tie_keeps_first(self):
        a = Box(0, 0, 5, 5)
        b = Box(10, 10, 15, 15)
        assert largest([a, b]) == a

    def test_empty_is_none(self):
        assert largest([]) is None


class TestPixelBounds:
    def test_fractional_box_covers_pixels(self):
        assert pixel_bounds(Box(1.2, 2.7, 8.1, 9.4), 20, 20) == (1, 2, 9, 10)

    def test_clipped_to_image(self):
        assert pixel_bounds(Box(-3, -4, 5, 6), 10, 10) == (0, 0, 5, 6)

    def test_no_extent_rejected(self):
        with pytest.raises(ValueError):
            pixel_bounds(Box(-5, -5, -0.5, 4), 10, 10)
