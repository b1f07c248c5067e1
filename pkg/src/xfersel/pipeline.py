"""Two-path source selection over a pool of task bundles.

Guided path: keep sources matching the target's modality (Subset 1), then
keep the RoI classes whose pooled label masks are most shape-similar to the
target's (Subset 2), then rank the survivors with a transferability metric.
Baseline path: rank the whole pool with the metric directly.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bundle import LabelMaskSet, SubsampleSpec, TaskBundle, TaskDescriptor
from .errors import (
    MissingFeaturesError,
    MissingLabelsError,
    NoCompatibleSourceError,
    UnknownTaskError,
)
from .hscore import HScoreParams, hscore_segmentation
from .otce import SinkhornParams, otce
from .ranking import Ranking, build_ranking
from .roisim import PairingMode, SsimParams, resample_nearest, roi_sim


class SelectionPath(enum.Enum):
    GUIDED = "guided"
    BASELINE = "baseline"


class Metric(enum.Enum):
    HSCORE = "hscore"
    OTCE = "otce"


class NoMatchPolicy(enum.Enum):
    ERROR = "error"
    FALLBACK_ALL = "fallback-all"


class HScoreFeatures(enum.Enum):
    """Which bundle's feature export feeds the pixel-wise H-score.

    TARGET evaluates the target bundle's feature map (the faithful pairwise
    reading: that map should have been exported by the source's model, as
    recorded in the manifest's extractor field).  SOURCE evaluates each
    source's own export instead; with a single shared extractor across the
    pool this is the only per-source signal and is what the synthetic
    benchmark uses.
    """

    TARGET = "target"
    SOURCE = "source"


@dataclass(frozen=True)
class SelectionConfig:
    path: SelectionPath = SelectionPath.GUIDED
    metric: Metric = Metric.OTCE
    top_k: int = 1
    roi_keep_classes: int = 1
    no_modality_match_policy: NoMatchPolicy = NoMatchPolicy.ERROR
    hscore_params: HScoreParams = field(default_factory=HScoreParams)
    sinkhorn_params: SinkhornParams = field(default_factory=SinkhornParams)
    sampler: SubsampleSpec = field(default_factory=SubsampleSpec)
    ssim_params: SsimParams = field(default_factory=SsimParams)
    pairing_mode: PairingMode = PairingMode.PAIRED
    ssim_seed: int = 42
    hscore_features: HScoreFeatures = HScoreFeatures.TARGET
    threads: int = 1

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.roi_keep_classes < 1:
            raise ValueError("roi_keep_classes must be >= 1")

    def to_dict(self) -> dict:
        return {
            "path": self.path.value,
            "metric": self.metric.value,
            "top_k": self.top_k,
            "roi_keep_classes": self.roi_keep_classes,
            "no_modality_match_policy": self.no_modality_match_policy.value,
            "hscore_params": self.hscore_params.to_dict(),
            "sinkhorn_params": self.sinkhorn_params.to_dict(),
            "sampler": self.sampler.to_dict(),
            "ssim_params": self.ssim_params.to_dict(),
            "pairing_mode": self.pairing_mode.value,
            "ssim_seed": self.ssim_seed,
            "hscore_features": self.hscore_features.value,
            "threads": self.threads,
        }


@dataclass(frozen=True)
class SelectionReport:
    target_id: str
    subset1: tuple[str, ...]
    subset2: tuple[str, ...]
    roi_sim_by_class: dict[str, float]
    final_ranking: Ranking
    per_source_scores: tuple[tuple[str, str, float], ...]
    config: SelectionConfig
    modality_fallback: bool = False

    def top_k_ids(self) -> tuple[str, ...]:
        k = min(self.config.top_k, len(self.final_ranking))
        return self.final_ranking.task_ids[:k]

    def to_dict(self) -> dict:
        return {
            "target_id": self.target_id,
            "subset1": list(self.subset1),
            "subset2": list(self.subset2),
            "roi_sim_by_class": self.roi_sim_by_class,
            "ranking": [
                {"task_id": t, "score": s, "rank": r}
                for r, (t, s) in enumerate(self.final_ranking.entries, 1)
            ],
            "per_source_scores": [
                {"task_id": t, "metric": m, "score": s}
                for t, m, s in self.per_source_scores
            ],
            "modality_fallback": self.modality_fallback,
            "config": self.config.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def modality_filter(pool: list[TaskDescriptor], target: TaskDescriptor,
                    policy: NoMatchPolicy = NoMatchPolicy.ERROR,
                    ) -> tuple[list[TaskDescriptor], bool]:
    """Sources sharing the target's canonical modality, pool order kept.

    Returns (subset, fallback_used).  With no match, ERROR raises and
    FALLBACK_ALL returns the whole pool flagged.
    """
    if not pool:
        raise NoCompatibleSourceError("source pool is empty")
    subset = [d for d in pool if d.same_modality(target)]
    if subset:
        return subset, False
    if policy is NoMatchPolicy.FALLBACK_ALL:
        return list(pool), True
    raise NoCompatibleSourceError(
        f"no source matches target modality {target.modality!r}")


def pooled_class_masks(bundles: list[TaskBundle],
                       reference: LabelMaskSet) -> LabelMaskSet:
    """Pool several tasks' masks into one set on the reference grid.

    Each task's masks are binarized against its own positive class first,
    then nearest-neighbor resampled to the reference shape, so tasks with
    heterogeneous class encodings or resolutions can be pooled.
    """
    h, w = reference.height, reference.width
    stacks = []
    for b in bundles:
        binary = b.labels.binarized().astype(np.uint8)
        if binary.shape[1:] != (h, w):
            binary = np.stack([resample_nearest(m, h, w) for m in binary])
        stacks.append(binary)
    pooled = np.concatenate(stacks, axis=0)
    ids = "+".join(b.task_id for b in bundles)
    return LabelMaskSet(task_id=ids, masks=pooled, positive_class=1)


def roi_filter(subset1: list[TaskBundle], target: TaskBundle,
               cfg: SelectionConfig) -> tuple[list[TaskBundle], dict[str, float]]:
    """Keep the sources of the top-m RoI classes by pooled shape similarity.

    One RoI-Sim score is computed per class (all of that class's masks
    pooled against the target's), classes tie-break by ascending name.
    """
    if not subset1:
        raise NoCompatibleSourceError("subset 1 is empty")
    by_class: dict[str, list[TaskBundle]] = {}
    for b in subset1:
        if b.labels is None:
            raise MissingLabelsError(b.task_id)
        by_class.setdefault(b.descriptor.roi_class, []).append(b)

    scores = {}
    for roi_class, members in by_class.items():
        pooled = pooled_class_masks(members, target.labels)
        report = roi_sim(pooled, target.labels, cfg.ssim_params,
                         cfg.pairing_mode, cfg.ssim_seed)
        scores[roi_class] = report.score

    keep = sorted(scores, key=lambda c: (-scores[c], c))[:cfg.roi_keep_classes]
    kept_classes = set(keep)
    subset2 = [b for b in subset1 if b.descriptor.roi_class in kept_classes]
    return subset2, scores


def _metric_score(source: TaskBundle, target: TaskBundle,
                  cfg: SelectionConfig) -> float:
    if cfg.metric is Metric.OTCE:
        if source.features is None or target.features is None:
            raise MissingFeaturesError(
                f"otce needs features on {source.task_id} and {target.task_id}")
        return otce(source.features, target.features, cfg.sampler,
                    cfg.sinkhorn_params).score
    bundle = target if cfg.hscore_features is HScoreFeatures.TARGET else source
    if bundle.features is None:
        raise MissingFeaturesError(
            f"hscore needs features on {bundle.task_id}")
    return hscore_segmentation(bundle.features, cfg.hscore_params,
                               source_id=source.task_id,
                               target_id=target.task_id).score


def select(pool: list[TaskBundle], target: TaskBundle, cfg: SelectionConfig,
           scores: dict[str, float] | None = None) -> SelectionReport:
    """Run one selection (guided or baseline) and assemble the full report.

    ``scores`` injects externally computed per-source metric scores and
    bypasses metric computation, which lets the ranking/evaluation layer run
    on published score tables without any trained models.  Per-source
    scoring is parallelized over ``cfg.threads``; results are assembled in
    pool order, so reports are byte-identical at any thread count.
    """
    if not pool:
        raise NoCompatibleSourceError("source pool is empty")
    fallback = False
    roi_scores: dict[str, float] = {}
    if cfg.path is SelectionPath.GUIDED:
        descriptors = [b.descriptor for b in pool]
        kept, fallback = modality_filter(descriptors, target.descriptor,
                                         cfg.no_modality_match_policy)
        kept_ids = {d.task_id for d in kept}
        subset1 = [b for b in pool if b.task_id in kept_ids]
        subset2, roi_scores = roi_filter(subset1, target, cfg)
    else:
        subset1 = list(pool)
        subset2 = list(pool)

    if scores is not None:
        missing = [b.task_id for b in subset2 if b.task_id not in scores]
        if missing:
            raise UnknownTaskError(f"no injected score for: {missing}")
        scored = [(b.task_id, float(scores[b.task_id])) for b in subset2]
    elif cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool_exec:
            values = list(pool_exec.map(
                lambda b: _metric_score(b, target, cfg), subset2))
        scored = [(b.task_id, v) for b, v in zip(subset2, values)]
    else:
        scored = [(b.task_id, _metric_score(b, target, cfg)) for b in subset2]

    ranking = build_ranking(scored)
    return SelectionReport(
        target_id=target.task_id,
        subset1=tuple(b.task_id for b in subset1),
        subset2=tuple(b.task_id for b in subset2),
        roi_sim_by_class=roi_scores,
        final_ranking=ranking,
        per_source_scores=tuple((t, cfg.metric.value, s) for t, s in scored),
        config=cfg,
        modality_fallback=fallback,
    )
