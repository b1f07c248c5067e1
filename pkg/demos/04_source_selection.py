"""Full source-selection reproduction on the shipped FeTS 2021 score tables.

Sixteen candidate sources (ED/NCR x partitions 13/14/17/18 x T1/T2) are
ranked for each of two targets, either directly (baseline) or after the
prior-knowledge filters (guided: same modality, then most shape-similar RoI
class).  Selection quality is the top-k footrule displacement against the
ground-truth Dice ranking: lower is better, and the guided path wins.
"""

from xfersel import (
    Metric,
    SelectionConfig,
    SelectionPath,
    build_ranking,
    footrule_topk,
    select,
)
from xfersel.fixtures import TARGETS, benchmark_pool, reference_scores

for target_id in TARGETS:
    print(f"=== target {target_id} ===")
    sources, target = benchmark_pool(target_id)
    truth = build_ranking(reference_scores(target_id, "dice"))
    print("ground-truth best source:", truth.task_at(1))

    for metric in ("hscore", "otce"):
        scores = dict(reference_scores(target_id, metric))
        row = {}
        for path in (SelectionPath.BASELINE, SelectionPath.GUIDED):
            cfg = SelectionConfig(path=path, metric=Metric(metric), top_k=4)
            report = select(sources, target, cfg, scores=scores)
            if path is SelectionPath.GUIDED:
                print(f"  subset1 ({len(report.subset1)}):",
                      " ".join(report.subset1))
                print(f"  subset2 ({len(report.subset2)}):",
                      " ".join(report.subset2))
            row[path] = [footrule_topk(report.final_ranking, truth, k).distance
                         for k in (1, 2, 3, 4)]
        print(f"  {metric:>6}: baseline top1-4 {row[SelectionPath.BASELINE]}"
              f"   guided top1-4 {row[SelectionPath.GUIDED]}")
    print()
