import numpy as np
import pytest

from faceaes_extractor import detect_face


def image_with_square(h=64, w=64, top=10, bottom=30, left=12, right=28,
                      value=255):
    img = np.zeros((h, w), dtype=np.uint8)
    img[top:bottom, left:right] = value
    return img


class TestBlobDetector:
    def test_finds_bright_square(self):
        box = detect_face(image_with_square())
        assert box is not None
        assert box.as_tuple() == (12.0, 10.0, 28.0, 30.0)

    def test_flat_image_is_none(self):
        assert detect_face(np.full((40, 40), 128, dtype=np.uint8)) is None
        assert detect_face(np.zeros((40, 40), dtype=np.uint8)) is None

    def test_largest_of_two_blobs_wins(self):
        img = image_with_square()
        img[40:62, 5:59] = 255  # bigger second blob
        box = detect_face(img)
        assert box.as_tuple() == (5.0, 40.0, 59.0, 62.0)

    def test_small_blob_filtered(self):
        img = np.zeros((40, 40), dtype=np.uint8)
        img[5:8, 5:9] = 255  # 12 px, below the 16 px default floor
        assert detect_face(img) is None
        assert detect_face(img, min_area=4.0) is not None

    def test_color_input_accepted(self):
        gray = image_with_square()
        color = np.stack([gray, gray, gray], axis=2)
        assert detect_face(color).as_tuple() == (12.0, 10.0, 28.0, 30.0)

    def test_bad_shape_rejected(self):
        with pytest.raises(ValueError):
            detect_face(np.zeros(10, dtype=np.uint8))


class TestYunetBackend:
    def test_requires_model_path(self):
        with pytest.raises(ValueError):
            detect_face(image_with_square(), backend="yunet")

    def test_missing_model_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            detect_face(image_with_square(), backend="yunet",
                        model_path=str(tmp_path / "nope.onnx"))

    def test_unloadable_model(self, tmp_path):
        bogus = tmp_path / "bad.onnx"
        bogus.write_bytes(b"not a network")
        with pytest.raises(ValueError):
            detect_face(image_with_square(), backend="yunet",
                        model_path=str(bogus))


def test_unknown_backend():
    with pytest.raises(ValueError):
        detect_face(image_with_square(), backend="mystery")
