"""Rankings of source tasks and Spearman's footrule distances between them.

A ranking orders tasks by non-increasing score; equal scores keep their
input order (stable sort), so every ranking is total and deterministic.
The footrule distance between two rankings over the same tasks is the sum
of absolute rank displacements.  The top-k variant charges each of the k
best predicted tasks its displacement against the full ground-truth
ranking, which is how a short selection list is scored against a complete
reference ordering.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DuplicateTaskIdError,
    IdSetMismatchError,
    InvalidSpecError,
    IoFailureError,
    KOutOfRangeError,
    NonFiniteScoreError,
    UnknownTaskError,
)

CSV_HEADER = ("task_id", "score", "rank")


@dataclass(frozen=True)
class Ranking:
    entries: tuple[tuple[str, float], ...]  # (task_id, score), best first
    position: dict[str, int]                # task_id -> 1-based rank

    def __len__(self) -> int:
        return len(self.entries)

    def task_at(self, rank: int) -> str:
        return self.entries[rank - 1][0]

    @property
    def task_ids(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.entries)


@dataclass(frozen=True)
class FootruleReport:
    distance: int
    k: int | str  # count, or "full"
    pairs: tuple[tuple[str, int, int], ...]  # (task_id, predicted, truth)


def build_ranking(scores: list[tuple[str, float]]) -> Ranking:
    """Rank (task_id, score) pairs, higher is better, ties by input order."""
    if not scores:
        raise InvalidSpecError("cannot rank an empty score list")
    seen = set()
    for task_id, score in scores:
        if task_id in seen:
            raise DuplicateTaskIdError(task_id)
        seen.add(task_id)
        if not math.isfinite(score):
            raise NonFiniteScoreError(f"{task_id} has score {score}")
    order = sorted(range(len(scores)), key=lambda i: (-scores[i][1], i))
    entries = tuple(scores[i] for i in order)
    position = {task_id: rank for rank, (task_id, _) in enumerate(entries, 1)}
    return Ranking(entries=entries, position=position)


def footrule_full(pred: Ranking, truth: Ranking) -> FootruleReport:
    """Sum of |predicted rank - truth rank| over the common task set."""
    if set(pred.position) != set(truth.position):
        raise IdSetMismatchError(
            "rankings cover different task sets: "
            f"{sorted(set(pred.position) ^ set(truth.position))}")
    pairs = tuple((t, p, truth.position[t]) for t, p in pred.position.items())
    distance = sum(abs(p - q) for _, p, q in pairs)
    return FootruleReport(distance=distance, k="full", pairs=pairs)


def footrule_topk(pred: Ranking, truth: Ranking, k: int) -> FootruleReport:
    """Displacement of the k best predicted tasks against the full truth.

    ``pred`` may rank a filtered subset of the pool; every predicted task
    must exist in ``truth``.
    """
    if not 1 <= k <= len(pred):
        raise KOutOfRangeError(f"k={k} outside 1..{len(pred)}")
    missing = [t for t in pred.task_ids if t not in truth.position]
    if missing:
        raise UnknownTaskError(f"not in truth ranking: {missing}")
    pairs = []
    for n in range(1, k + 1):
        task = pred.task_at(n)
        pairs.append((task, n, truth.position[task]))
    distance = sum(abs(p - q) for _, p, q in pairs)
    return FootruleReport(distance=distance, k=k, pairs=tuple(pairs))


# ---------------------------------------------------------------------------
# CSV serialization: header "task_id,score,rank", UTF-8, LF line endings
# ---------------------------------------------------------------------------

def ranking_to_csv(ranking: Ranking) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rank, (task_id, score) in enumerate(ranking.entries, 1):
        writer.writerow([task_id, f"{score:.6f}", rank])
    return buf.getvalue()


def write_ranking_csv(ranking: Ranking, path: str | Path) -> None:
    try:
        Path(path).write_text(ranking_to_csv(ranking), encoding="utf-8",
                              newline="")
    except OSError as exc:
        raise IoFailureError(str(exc)) from exc


def read_ranking_csv(path: str | Path) -> Ranking:
    """Rebuild a ranking from CSV; the rank column is authoritative."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(str(exc)) from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise InvalidSpecError(
            f"{path}: expected header {','.join(CSV_HEADER)}")
    parsed = []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 3:
            raise InvalidSpecError(f"{path}: malformed row {row!r}")
        parsed.append((int(row[2]), row[0], float(row[1])))
    parsed.sort(key=lambda r: r[0])
    if [r[0] for r in parsed] != list(range(1, len(parsed) + 1)):
        raise InvalidSpecError(f"{path}: ranks are not 1..{len(parsed)}")
    entries = tuple((task_id, score) for _, task_id, score in parsed)
    ids = [t for t, _ in entries]
    if len(set(ids)) != len(ids):
        raise DuplicateTaskIdError(f"{path}: duplicate task ids")
    position = {task_id: rank for rank, (task_id, _) in enumerate(entries, 1)}
    return Ranking(entries=entries, position=position)
