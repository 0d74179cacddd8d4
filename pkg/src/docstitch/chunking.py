"""Dynamic overlapping page chunks and cross-chunk synchronization.

Boundary pages are chosen inside a stride±threshold window at the page
densest in task-relevant elements, so overlap regions carry enough shared
reference elements to calibrate chunk-level predictions against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import BadConfig
from .model import CanonicalDocument, ElementType


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    if x >= 0:
        return int(x + 0.5)
    return -int(-x + 0.5)


@dataclass(frozen=True)
class ChunkPlanConfig:
    stride: int = 8
    threshold: int = 2
    task_type: ElementType = ElementType.TITLE

    def __post_init__(self) -> None:
        if self.stride < 1:
            raise BadConfig(f"stride must be >= 1, got {self.stride}")
        if not (0 <= self.threshold < self.stride):
            raise BadConfig(
                f"threshold must satisfy 0 <= t < stride, got t={self.threshold} s={self.stride}"
            )


@dataclass
class PageProfile:
    """Per-page count of the task-relevant element type."""

    counts: list[int]

    @property
    def page_count(self) -> int:
        return len(self.counts)

    @classmethod
    def from_document(cls, doc: CanonicalDocument, etype: ElementType) -> PageProfile:
        counts = [0] * doc.page_count
        for e in doc.elements:
            if e.etype is etype and 0 <= e.page < doc.page_count:
                counts[e.page] += 1
        return cls(counts)


def compute_boundaries(profile: PageProfile, cfg: ChunkPlanConfig) -> list[int]:
    """Boundary pages: b0 = 0, then the densest page of each search window.

    The window after boundary b is [b+s-t, b+s+t] clipped to valid pages;
    generation stops once the window start passes the last page.  Ties go to
    the smallest page index in the window.
    """
    if profile.page_count < 1:
        raise BadConfig("page profile must cover at least one page")
    s, t = cfg.stride, cfg.threshold
    p_max = profile.page_count - 1
    boundaries = [0]
    while True:
        lo = boundaries[-1] + s - t
        hi = min(boundaries[-1] + s + t, p_max)
        if lo > p_max:
            break
        best = lo
        for p in range(lo, hi + 1):
            if profile.counts[p] > profile.counts[best]:
                best = p
        boundaries.append(best)
    return boundaries


def build_chunks(boundaries: Sequence[int], p_max: int) -> list[tuple[int, int]]:
    """Inclusive page ranges around each boundary.

    chunk_i = (max(0, b_i - 1), min(b_{i+1} + 1, p_max)); the final chunk
    always runs to the last page.
    """
    chunks = []
    for i, b in enumerate(boundaries):
        start = max(0, b - 1)
        if i + 1 < len(boundaries):
            end = min(boundaries[i + 1] + 1, p_max)
        else:
            end = p_max
        chunks.append((start, end))
    return chunks


@dataclass
class ChunkPlan:
    boundaries: list[int]
    chunks: list[tuple[int, int]]
    task_type: ElementType
    stride: int
    threshold: int

    def realized_overlaps(self) -> list[int]:
        """Shared page counts of consecutive chunks (may differ from 3)."""
        out = []
        for (s1, e1), (s2, e2) in zip(self.chunks, self.chunks[1:]):
            out.append(max(0, min(e1, e2) - max(s1, s2) + 1))
        return out

    def to_dict(self) -> dict:
        return {
            "task_type": self.task_type.value,
            "stride": self.stride,
            "threshold": self.threshold,
            "boundaries": list(self.boundaries),
            "chunks": [list(c) for c in self.chunks],
            "realized_overlaps": self.realized_overlaps(),
        }


def plan_chunks(profile: PageProfile, cfg: ChunkPlanConfig) -> ChunkPlan:
    boundaries = compute_boundaries(profile, cfg)
    chunks = build_chunks(boundaries, profile.page_count - 1)
    return ChunkPlan(
        boundaries=boundaries,
        chunks=chunks,
        task_type=cfg.task_type,
        stride=cfg.stride,
        threshold=cfg.threshold,
    )


@dataclass
class ChunkPrediction:
    """One chunk's subtask output, keyed so completion order never matters."""

    chunk_index: int
    payload: Any


@dataclass
class SyncResult:
    levels: dict[int, int]
    deviations: list[int] = field(default_factory=list)
    empty_overlaps: list[int] = field(default_factory=list)
    conflicts: list[dict] = field(default_factory=list)


def synchronize_hierarchy(chunk_preds: Sequence[ChunkPrediction]) -> SyncResult:
    """Calibrate per-chunk title levels onto the first chunk's scale.

    The initial chunk is the anchor.  Each later chunk is shifted by the
    rounded average difference between already-calibrated levels and its own
    raw levels over the overlap titles; overlap disagreements resolve to the
    earlier chunk.  Demoted titles (level -1) neither shift nor contribute
    to the deviation.  Final levels are clamped to >= 1.
    """
    result = SyncResult(levels={})
    final = result.levels
    for k, pred in enumerate(sorted(chunk_preds, key=lambda p: p.chunk_index)):
        raw: dict[int, int] = dict(pred.payload)
        if k == 0:
            calibrated = dict(raw)
            result.deviations.append(0)
        else:
            overlap = [
                i for i in raw if i in final and raw[i] != -1 and final[i] != -1
            ]
            if overlap:
                deviation = round_half_away(
                    sum(final[i] - raw[i] for i in overlap) / len(overlap)
                )
            else:
                deviation = 0
                result.empty_overlaps.append(pred.chunk_index)
            result.deviations.append(deviation)
            calibrated = {
                i: (lvl if lvl == -1 else lvl + deviation) for i, lvl in raw.items()
            }
        for i, lvl in calibrated.items():
            if i in final:
                if final[i] != lvl:
                    result.conflicts.append(
                        {"idx": i, "kept": final[i], "discarded": lvl, "chunk": pred.chunk_index}
                    )
                continue
            final[i] = lvl
    for i, lvl in final.items():
        if lvl != -1 and lvl < 1:
            final[i] = 1
    return result


@dataclass
class UnionResult:
    pairs: list[tuple[int, int]]
    conflicts: list[dict] = field(default_factory=list)


def merge_union(
    chunk_preds: Sequence[ChunkPrediction], unique_src: bool = False
) -> UnionResult:
    """Union of per-chunk pair sets keyed by (src, tgt).

    With ``unique_src`` (association), a src that already resolved to a
    different tgt in an earlier chunk keeps the earlier link; the later one
    is recorded as a conflict.
    """
    result = UnionResult(pairs=[])
    seen: set[tuple[int, int]] = set()
    by_src: dict[int, int] = {}
    for pred in sorted(chunk_preds, key=lambda p: p.chunk_index):
        for src, tgt in pred.payload:
            if (src, tgt) in seen:
                continue
            if unique_src and src in by_src:
                result.conflicts.append(
                    {"src": src, "kept": by_src[src], "discarded": tgt, "chunk": pred.chunk_index}
                )
                continue
            seen.add((src, tgt))
            by_src[src] = tgt
            result.pairs.append((src, tgt))
    result.pairs.sort()
    return result


@dataclass
class TableUnionResult:
    judgements: list[tuple[int, int, list[int]]]
    conflicts: list[dict] = field(default_factory=list)


def merge_table_union(chunk_preds: Sequence[ChunkPrediction]) -> TableUnionResult:
    """Union of per-chunk table judgements keyed by the table pair."""
    result = TableUnionResult(judgements=[])
    seen: dict[tuple[int, int], list[int]] = {}
    for pred in sorted(chunk_preds, key=lambda p: p.chunk_index):
        for upper, lower, judgement in pred.payload:
            key = (upper, lower)
            if key in seen:
                if seen[key] != list(judgement):
                    result.conflicts.append(
                        {
                            "pair": list(key),
                            "kept": seen[key],
                            "discarded": list(judgement),
                            "chunk": pred.chunk_index,
                        }
                    )
                continue
            seen[key] = list(judgement)
    result.judgements = [(u, l, seen[(u, l)]) for (u, l) in sorted(seen)]
    return result
