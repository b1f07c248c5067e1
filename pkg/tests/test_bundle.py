import numpy as np
import pytest

from xfersel.bundle import (
    SubsampleSpec,
    TaskDescriptor,
    flatten_pixels,
    load_bundle,
    write_bundle,
)
from xfersel.errors import (
    CorruptBinaryError,
    EmptyFeatureSetError,
    InvalidSpecError,
    IoFailureError,
    MissingManifestError,
    NonFiniteFeatureError,
    ShapeMismatchError,
)

from conftest import make_bundle
from oracles import subsample_reference


class TestDescriptor:
    def test_modality_canonicalized(self):
        d = TaskDescriptor(task_id="x", roi_class="ED", modality=" t2 ")
        assert d.modality == "T2"
        e = TaskDescriptor(task_id="y", roi_class="ET", modality="T2")
        assert d.same_modality(e)

    def test_from_name(self):
        d = TaskDescriptor.from_name("ED-14-T2")
        assert (d.roi_class, d.partition, d.modality) == ("ED", "14", "T2")
        d2 = TaskDescriptor.from_name("WMH-FLAIR")
        assert (d2.roi_class, d2.partition, d2.modality) == ("WMH", None, "FLAIR")

    def test_empty_id_rejected(self):
        with pytest.raises(InvalidSpecError):
            TaskDescriptor(task_id="", roi_class="ED", modality="T1")


class TestBundleIo:
    def test_roundtrip_well_formed(self, tmp_path, bundle):
        write_bundle(bundle, tmp_path / "b")
        loaded = load_bundle(tmp_path / "b")
        assert loaded.descriptor == bundle.descriptor
        assert loaded.labels.n_samples == 3
        np.testing.assert_array_equal(loaded.labels.masks, bundle.labels.masks)
        np.testing.assert_array_equal(loaded.features.features,
                                      bundle.features.features)
        assert loaded.extractor == bundle.extractor

    def test_rewrite_is_byte_identical(self, tmp_path, bundle):
        write_bundle(bundle, tmp_path / "a")
        write_bundle(load_bundle(tmp_path / "a"), tmp_path / "b")
        for name in ("manifest.json", "labels.bin", "features.bin"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_bundle_without_features(self, tmp_path):
        b = make_bundle(with_features=False)
        write_bundle(b, tmp_path / "b")
        assert not (tmp_path / "b" / "features.bin").exists()
        loaded = load_bundle(tmp_path / "b")
        assert loaded.features is None

    def test_missing_manifest(self, tmp_path):
        (tmp_path / "b").mkdir()
        with pytest.raises(MissingManifestError):
            load_bundle(tmp_path / "b")

    def test_truncated_features(self, tmp_path, bundle):
        write_bundle(bundle, tmp_path / "b")
        f = tmp_path / "b" / "features.bin"
        f.write_bytes(f.read_bytes()[:-1])
        with pytest.raises(CorruptBinaryError):
            load_bundle(tmp_path / "b")

    def test_trailing_bytes(self, tmp_path, bundle):
        write_bundle(bundle, tmp_path / "b")
        f = tmp_path / "b" / "labels.bin"
        f.write_bytes(f.read_bytes() + b"\x00")
        with pytest.raises(CorruptBinaryError):
            load_bundle(tmp_path / "b")

    def test_bad_magic(self, tmp_path, bundle):
        write_bundle(bundle, tmp_path / "b")
        f = tmp_path / "b" / "labels.bin"
        raw = bytearray(f.read_bytes())
        raw[:4] = b"NOPE"
        f.write_bytes(bytes(raw))
        with pytest.raises(CorruptBinaryError):
            load_bundle(tmp_path / "b")

    def test_feature_label_count_mismatch(self, tmp_path):
        b2 = make_bundle(n=2, with_features=False)
        b3 = make_bundle(n=3)
        write_bundle(b3, tmp_path / "b")
        write_bundle(b2, tmp_path / "b2")
        # graft the 3-sample features file onto the 2-sample bundle
        (tmp_path / "b2" / "features.bin").write_bytes(
            (tmp_path / "b" / "features.bin").read_bytes())
        manifest = (tmp_path / "b2" / "manifest.json").read_text()
        manifest = manifest.replace('"labels": "labels.bin"',
                                    '"features": "features.bin",\n'
                                    '    "labels": "labels.bin"')
        (tmp_path / "b2" / "manifest.json").write_text(manifest)
        with pytest.raises(ShapeMismatchError):
            load_bundle(tmp_path / "b2")

    def test_nonfinite_features_rejected(self, tmp_path, bundle):
        write_bundle(bundle, tmp_path / "b")
        f = tmp_path / "b" / "features.bin"
        raw = bytearray(f.read_bytes())
        raw[39:43] = np.float32("nan").tobytes()
        f.write_bytes(bytes(raw))
        with pytest.raises(NonFiniteFeatureError):
            load_bundle(tmp_path / "b")

    def test_unwritable_destination(self, tmp_path, bundle):
        blocker = tmp_path / "occupied"
        blocker.write_text("a file where a directory is needed")
        with pytest.raises(IoFailureError):
            write_bundle(bundle, blocker / "b")


class TestFlattenPixels:
    def test_row_major_no_subsampling(self):
        b = make_bundle(n=1, h=2, w=2, c=1, seed=3)
        feats, labels = flatten_pixels(b.features, SubsampleSpec(max_pixels=10))
        assert feats.shape == (4, 1)
        expected = b.features.features.reshape(4, 1)
        np.testing.assert_allclose(feats, expected)
        np.testing.assert_array_equal(
            labels, b.labels.masks.reshape(4).astype(np.int64))

    def test_deterministic(self):
        b = make_bundle(n=2, h=4, w=4, c=2, seed=5)
        spec = SubsampleSpec(max_pixels=7, seed=7)
        f1, l1 = flatten_pixels(b.features, spec)
        f2, l2 = flatten_pixels(b.features, spec)
        np.testing.assert_array_equal(f1, f2)
        np.testing.assert_array_equal(l1, l2)

    def test_matches_reference_sampler(self):
        b = make_bundle(n=1, h=2, w=2, c=1, seed=11)
        feats, _ = flatten_pixels(b.features, SubsampleSpec(max_pixels=2, seed=7))
        idx = subsample_reference(4, 2, 7)
        expected = b.features.features.reshape(4, 1)[idx]
        np.testing.assert_allclose(feats, expected)

    def test_pure_reshape_when_capacity_suffices(self):
        b = make_bundle(n=2, h=3, w=5, c=2, seed=1)
        feats, labels = flatten_pixels(b.features,
                                       SubsampleSpec(max_pixels=30))
        assert feats.shape == (30, 2)
        np.testing.assert_allclose(
            feats, b.features.features.reshape(30, 2).astype(np.float64))

    def test_empty_rejected(self):
        with pytest.raises(EmptyFeatureSetError):
            flatten_pixels(None, SubsampleSpec())
