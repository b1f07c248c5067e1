"""Task bundles: the on-disk unit every other capability consumes.

A bundle couples one task's metadata (manifest.json), its label masks
(labels.bin) and optionally its per-pixel feature export (features.bin).
Loading validates everything eagerly and round-trips bit-exactly.
"""

import tempfile
from pathlib import Path

import numpy as np

from xfersel import (
    LabelMaskSet,
    PixelFeatureSet,
    SubsampleSpec,
    TaskBundle,
    TaskDescriptor,
    flatten_pixels,
    load_bundle,
    write_bundle,
)

rng = np.random.Generator(np.random.Philox(0))

masks = rng.integers(0, 2, size=(3, 8, 8)).astype(np.uint8)
labels = LabelMaskSet(task_id="ED-14-T2", masks=masks)
features = PixelFeatureSet(
    task_id="ED-14-T2",
    features=rng.standard_normal((3, 8, 8, 4)).astype(np.float32),
    aligned_labels=labels)
bundle = TaskBundle(
    descriptor=TaskDescriptor.from_name("ED-14-T2", dataset="demo"),
    labels=labels, features=features, extractor="demo-extractor")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "ED-14-T2"
    write_bundle(bundle, path)
    print("bundle files:", sorted(p.name for p in path.iterdir()))
    print("labels.bin starts with:", path.joinpath("labels.bin").read_bytes()[:4])

    loaded = load_bundle(path)
    print("descriptor:", loaded.descriptor)
    print("features byte-identical:",
          np.array_equal(loaded.features.features, bundle.features.features))

# flatten_pixels turns the image grid into (feature, label) pixel pairs;
# above the cap it subsamples with the documented seeded procedure
feats, labs = flatten_pixels(bundle.features, SubsampleSpec(max_pixels=10, seed=7))
print("subsampled pixel pairs:", feats.shape, "labels:", labs.tolist())
feats2, _ = flatten_pixels(bundle.features, SubsampleSpec(max_pixels=10, seed=7))
print("same seed, same pixels:", np.array_equal(feats, feats2))
