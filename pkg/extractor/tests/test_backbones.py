import numpy as np
import pytest

from faceaes_extractor import default_backbones, make_backbone


@pytest.fixture(scope="module")
def trio():
    return default_backbones()


def batch(n=2, size=224, seed=0):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(n, size, size, 3), dtype=np.uint8)


class TestDefaultBackbones:
    def test_roles_and_dims(self, trio):
        assert sorted(trio) == ["FA", "IA", "IQ"]
        assert trio["IQ"].dim == 4096
        assert trio["IA"].dim == 4096
        assert trio["FA"].dim == 2048

    def test_embed_shapes(self, trio):
        imgs = batch(3)
        for name, backbone in trio.items():
            feats = backbone.embed(imgs)
            assert feats.shape == (3, backbone.dim)
            assert feats.dtype == np.float32
            assert np.isfinite(feats).all()

    def test_distinct_roles_give_distinct_features(self, trio):
        imgs = batch(2)
        iq = trio["IQ"].embed(imgs)
        ia = trio["IA"].embed(imgs)
        assert iq.shape == ia.shape
        assert not np.array_equal(iq, ia)

    def test_provenance_records_substitution(self, trio):
        for backbone in trio.values():
            p = backbone.provenance
            assert p["family"].startswith("torchvision.")
            assert p["weights"] == "random-init"
            assert isinstance(p["seed"], int)
            assert p["dim"] == backbone.dim

    def test_rejects_bad_batch_shape(self, trio):
        with pytest.raises(ValueError):
            trio["IQ"].embed(np.zeros((224, 224, 3), dtype=np.uint8))


class TestDeterminism:
    def test_rebuilt_backbone_is_bit_identical(self):
        imgs = batch(2, seed=5)
        a = make_backbone("IA").embed(imgs)
        b = make_backbone("IA").embed(imgs)
        assert a.tobytes() == b.tobytes()

    def test_seed_changes_weights(self):
        imgs = batch(1, seed=6)
        a = make_backbone("IQ").embed(imgs)
        b = make_backbone("IQ", seed=999).embed(imgs)
        assert not np.array_equal(a, b)

    def test_unknown_role_rejected(self):
        with pytest.raises(ValueError):
            make_backbone("XX")
