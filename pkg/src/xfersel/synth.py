"""Synthetic segmentation task families with a tunable feature-label link.

Each task draws binary masks by thresholding smoothed Gaussian noise fields
(so RoI shapes vary but class balance stays pinned), then builds per-pixel
features as

    feature = s * mu[label] + (1 - s) * noise,     noise ~ N(0, sigma^2 I_C)

where s is the task's signal strength in [0, 1].  Class mean vectors are
symmetric (+/- MEAN_SCALE per channel), so at s = 1 the features are exact
class indicators, and at s = 0 they are pure noise.

The per-pixel linear probe plays ground truth at desk scale: a ridge-
regularized logistic classifier fit on a seeded subsample of the source's
pixels and scored by pixel accuracy on the target, mirroring the
frozen-encoder/retrained-head structure of real transfer experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .bundle import (
    LabelMaskSet,
    PixelFeatureSet,
    SubsampleSpec,
    TaskBundle,
    TaskDescriptor,
    flatten_pixels,
)
from .errors import DimensionMismatchError, InvalidSpecError
from .rng import derive_seed

MEAN_SCALE = 0.15         # class means sit at -+MEAN_SCALE per channel
NOISE_SIGMA = 1.0         # std of the noise mixed in at weight (1 - s)
FOREGROUND_QUANTILE = 0.65  # smoothed field threshold; ~35% foreground
SMOOTHING_SIGMA = 2.5     # field correlation length in pixels

PROBE_TRAIN_PIXELS = 512
PROBE_RIDGE = 1e-2
PROBE_NEWTON_STEPS = 30


@dataclass(frozen=True)
class SynthSpec:
    n_tasks: int = 6
    n_samples: int = 16
    height: int = 32
    width: int = 32
    channels: int = 4
    signal_strengths: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    seed: int = 42

    def __post_init__(self):
        if self.n_tasks < 1 or self.n_samples < 1:
            raise InvalidSpecError("n_tasks and n_samples must be >= 1")
        if self.height < 2 or self.width < 2 or self.channels < 1:
            raise InvalidSpecError("grid must be at least 2x2 with >= 1 channel")
        if len(self.signal_strengths) != self.n_tasks:
            raise InvalidSpecError(
                f"need {self.n_tasks} signal strengths, "
                f"got {len(self.signal_strengths)}")
        if any(not 0.0 <= s <= 1.0 for s in self.signal_strengths):
            raise InvalidSpecError("signal strengths must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {"n_tasks": self.n_tasks, "n_samples": self.n_samples,
                "height": self.height, "width": self.width,
                "channels": self.channels,
                "signal_strengths": list(self.signal_strengths),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        spec = dict(d)
        if "signal_strengths" in spec:
            spec["signal_strengths"] = tuple(spec["signal_strengths"])
        try:
            return cls(**spec)
        except TypeError as exc:
            raise InvalidSpecError(str(exc)) from exc


@dataclass(frozen=True)
class ProbeResult:
    task_id: str
    accuracy: float


def _task_rng(seed: int, task_index: int, purpose: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=derive_seed(seed, task_index * 16 + purpose)))


def _draw_masks(spec: SynthSpec, task_index: int) -> np.ndarray:
    rng = _task_rng(spec.seed, task_index, 0)
    masks = np.empty((spec.n_samples, spec.height, spec.width), dtype=np.uint8)
    for i in range(spec.n_samples):
        fld = gaussian_filter(
            rng.standard_normal((spec.height, spec.width)), SMOOTHING_SIGMA)
        masks[i] = (fld > np.quantile(fld, FOREGROUND_QUANTILE)).astype(np.uint8)
    return masks


def _draw_features(spec: SynthSpec, task_index: int,
                   masks: np.ndarray) -> np.ndarray:
    rng = _task_rng(spec.seed, task_index, 1)
    s = spec.signal_strengths[task_index]
    noise = rng.standard_normal(
        (spec.n_samples, spec.height, spec.width, spec.channels)) * NOISE_SIGMA
    signs = np.where(masks[..., None] > 0, MEAN_SCALE, -MEAN_SCALE)
    return (s * signs + (1.0 - s) * noise).astype(np.float32)


def generate_tasks(spec: SynthSpec) -> list[TaskBundle]:
    """Build n_tasks bundles, fully deterministic per spec seed."""
    bundles = []
    for t in range(spec.n_tasks):
        s = spec.signal_strengths[t]
        task_id = f"synth-{t:02d}-s{s:.2f}"
        masks = _draw_masks(spec, t)
        labels = LabelMaskSet(task_id=task_id, masks=masks, positive_class=1)
        features = PixelFeatureSet(
            task_id=task_id,
            features=_draw_features(spec, t, masks),
            aligned_labels=labels)
        descriptor = TaskDescriptor(task_id=task_id, roi_class="SYN",
                                    modality="SIM", dataset="synthetic",
                                    partition=str(t))
        bundles.append(TaskBundle(descriptor=descriptor, labels=labels,
                                  features=features, extractor="synthetic"))
    return bundles


def _fit_logistic(x: np.ndarray, y: np.ndarray,
                  ridge: float = PROBE_RIDGE) -> np.ndarray:
    """Ridge-regularized logistic fit by Newton steps; intercept unpenalized."""
    n, c = x.shape
    design = np.hstack([x, np.ones((n, 1))])
    w = np.zeros(c + 1)
    penalty = ridge * np.r_[np.ones(c), 0.0]
    for _ in range(PROBE_NEWTON_STEPS):
        z = np.clip(design @ w, -35, 35)
        p = 1.0 / (1.0 + np.exp(-z))
        grad = design.T @ (p - y) / n + penalty * w
        curv = p * (1.0 - p)
        hess = (design.T * curv) @ design / n + np.diag(penalty + 1e-12)
        step = np.linalg.solve(hess, grad)
        w = w - step
        if np.abs(step).max() < 1e-12:
            break
    return w


def probe_transfer(source: TaskBundle, target: TaskBundle,
                   seed: int = 42,
                   train_pixels: int = PROBE_TRAIN_PIXELS) -> ProbeResult:
    """Pixel accuracy on the target of a probe fit on the source's pixels.

    The training set is a seeded subsample of at most ``train_pixels`` source
    pixels; evaluation uses every target pixel.  Deterministic per seed.
    """
    if source.features is None or target.features is None:
        raise DimensionMismatchError("both bundles need features")
    if source.features.channels != target.features.channels:
        raise DimensionMismatchError(
            f"channel counts differ: {source.features.channels} vs "
            f"{target.features.channels}")
    train_x, train_y = flatten_pixels(
        source.features, SubsampleSpec(max_pixels=train_pixels, seed=seed))
    w = _fit_logistic(train_x, (train_y > 0).astype(np.float64))

    eval_x = target.features.features.reshape(-1, target.features.channels)
    eval_y = target.labels.masks.reshape(-1) > 0
    logits = eval_x.astype(np.float64) @ w[:-1] + w[-1]
    accuracy = float(np.mean((logits > 0) == eval_y))
    return ProbeResult(task_id=source.task_id, accuracy=accuracy)
