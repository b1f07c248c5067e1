"""Desk-scale ground truth: does the OTCE ranking match actual transfer?

Six synthetic sources of increasing signal strength are ranked for one
target twice: by OTCE, and by the accuracy of a per-pixel logistic probe
trained on each source and evaluated on the target (the stand-in for real
fine-tuning results).  Agreement is summarized by the footrule distance.
"""

from xfersel import SubsampleSpec, build_ranking, footrule_full, footrule_topk, otce
from xfersel.synth import SynthSpec, generate_tasks, probe_transfer

strengths = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
seed = 2
spec = SynthSpec(n_tasks=7, signal_strengths=strengths + (0.8,), seed=seed)
bundles = generate_tasks(spec)
sources, target = bundles[:6], bundles[6]
sampler = SubsampleSpec(max_pixels=256, seed=7)

otce_scores = [(b.task_id, otce(b.features, target.features, sampler).score)
               for b in sources]
probe_scores = [(b.task_id, probe_transfer(b, target, seed=seed).accuracy)
                for b in sources]
otce_rank = build_ranking(otce_scores)
probe_rank = build_ranking(probe_scores)

print(f"{'task':>16} {'otce':>9} {'rank':>5} {'probe acc':>10} {'rank':>5}")
for task_id, score in otce_rank.entries:
    acc = dict(probe_scores)[task_id]
    print(f"{task_id:>16} {score:>9.4f} {otce_rank.position[task_id]:>5}"
          f" {acc:>10.4f} {probe_rank.position[task_id]:>5}")

print("\nfootrule (full):", footrule_full(otce_rank, probe_rank).distance)
print("footrule (top-1):", footrule_topk(otce_rank, probe_rank, 1).distance,
      "- both methods agree on the best source" )
