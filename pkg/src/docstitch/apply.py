"""Apply validated predictions back onto the canonical document.

The four application steps run in a fixed order (text merges, table
merges, level assignment, link attachment) so that idx remapping from the
merges has already happened by the time links consume idx values.  Every
merge is recorded in the merge log with enough provenance (absorbed idx,
fragment geometry, judgement vectors) to audit or undo it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Optional

from .errors import ColumnMismatch
from .model import (
    CanonicalDocument,
    CanonicalElement,
    CoordUnit,
    ElementType,
)
from .filtering import TablePairCandidate
from .predictors import (
    CellMergeJudgement,
    HierarchyPrediction,
    PairPrediction,
    association_link_valid,
)
from .tables import merge_grids, parse_table
from .textrules import join_fragments


@dataclass
class MergeRecord:
    kind: str  # "text" | "table"
    src_idx: int
    absorbed: list[int]
    fragments: list[dict]  # {"idx", "page", "bbox", "content"} per fragment
    judgement: Optional[list[int]] = None
    fused: list[dict] = field(default_factory=list)
    dropped_header: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "src_idx": self.src_idx,
            "absorbed": self.absorbed,
            "fragments": self.fragments,
            "judgement": self.judgement,
            "fused": self.fused,
            "dropped_header": self.dropped_header,
        }


@dataclass
class MergeLog:
    records: list[MergeRecord] = field(default_factory=list)
    remap: dict[int, int] = field(default_factory=dict)

    def resolve(self, idx: int) -> int:
        """Follow absorbed->surviving mappings (transitively) for late references."""
        seen = set()
        while idx in self.remap and idx not in seen:
            seen.add(idx)
            idx = self.remap[idx]
        return idx

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "remap": {str(k): v for k, v in sorted(self.remap.items())},
        }


def _fragment(e: CanonicalElement) -> dict:
    return {"idx": e.idx, "page": e.page, "bbox": list(e.bbox), "content": e.content}


@dataclass
class ResolvedDocument:
    """Canonical document after merges, with levels and links attached."""

    doc_id: str
    page_count: int
    coord_unit: CoordUnit
    elements: list[CanonicalElement]
    levels: dict[int, int] = field(default_factory=dict)
    caption_links: dict[int, int] = field(default_factory=dict)  # caption idx -> visual idx
    section_links: dict[int, int] = field(default_factory=dict)  # visual idx -> title idx
    merge_log: MergeLog = field(default_factory=MergeLog)
    demoted: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @classmethod
    def from_document(cls, doc: CanonicalDocument) -> ResolvedDocument:
        return cls(
            doc_id=doc.doc_id,
            page_count=doc.page_count,
            coord_unit=doc.coord_unit,
            elements=list(doc.elements),
        )

    def index(self) -> dict[int, CanonicalElement]:
        return {e.idx: e for e in self.elements}


def merge_text(resolved: ResolvedDocument, pairs: PairPrediction) -> ResolvedDocument:
    """Collapse predicted truncation pairs; chains fuse transitively.

    Pairs that are not adjacent text pairs in the current document are
    skipped with a PairNotAdjacent flag rather than failing the run.
    """
    by_idx = resolved.index()
    text_idx = sorted(e.idx for e in resolved.elements if e.etype is ElementType.TEXT)
    next_text = {a: b for a, b in zip(text_idx, text_idx[1:])}

    succ: dict[int, int] = {}
    targets: set[int] = set()
    for src, tgt in sorted(pairs.pairs):
        src_el, tgt_el = by_idx.get(src), by_idx.get(tgt)
        if (
            src_el is None
            or tgt_el is None
            or src_el.etype is not ElementType.TEXT
            or tgt_el.etype is not ElementType.TEXT
            or next_text.get(src) != tgt
        ):
            resolved.flags.append(f"PairNotAdjacent:{src}->{tgt}")
            continue
        if src in succ or tgt in targets:
            resolved.flags.append(f"PairDuplicated:{src}->{tgt}")
            continue
        succ[src] = tgt
        targets.add(tgt)

    absorbed_all: set[int] = set()
    for start in sorted(succ):
        if start in targets:
            continue  # interior of a chain; handled from its head
        chain = [start]
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
        fragments = [by_idx[i] for i in chain]
        content = reduce(join_fragments, (f.content for f in fragments))
        by_idx[start] = replace(fragments[0], content=content)
        record = MergeRecord(
            kind="text",
            src_idx=start,
            absorbed=chain[1:],
            fragments=[_fragment(f) for f in fragments],
        )
        resolved.merge_log.records.append(record)
        for i in chain[1:]:
            resolved.merge_log.remap[i] = start
            absorbed_all.add(i)

    resolved.elements = [
        by_idx[e.idx] for e in resolved.elements if e.idx not in absorbed_all
    ]
    return resolved


def merge_tables(
    resolved: ResolvedDocument,
    candidate: TablePairCandidate,
    judgement: CellMergeJudgement,
) -> ResolvedDocument:
    """Fuse a cross-page table pair per its column judgement vector.

    Raises ColumnMismatch / TableHtmlUnparseable; callers decide whether to
    skip and flag (the pipeline does).
    """
    if not judgement.is_continuation:
        return resolved
    by_idx = resolved.index()
    upper = by_idx.get(candidate.upper_idx)
    lower = by_idx.get(candidate.lower_idx)
    if upper is None or lower is None:
        raise ColumnMismatch(
            f"table pair ({candidate.upper_idx}, {candidate.lower_idx}) not in document"
        )
    if upper.etype is not ElementType.TABLE or lower.etype is not ElementType.TABLE:
        raise ColumnMismatch("merge_tables endpoints must both be tables")

    upper_grid = parse_table(upper.table_html or "")
    lower_grid = parse_table(lower.table_html or "")
    outcome = merge_grids(upper_grid, lower_grid, judgement.columns, join_fragments)

    merged = replace(upper, table_html=outcome.grid.to_html())
    record = MergeRecord(
        kind="table",
        src_idx=upper.idx,
        absorbed=[lower.idx],
        fragments=[_fragment(upper), _fragment(lower)],
        judgement=list(judgement.columns),
        fused=outcome.fused,
        dropped_header=outcome.dropped_header,
    )
    resolved.merge_log.records.append(record)
    resolved.merge_log.remap[lower.idx] = upper.idx
    resolved.elements = [
        merged if e.idx == upper.idx else e
        for e in resolved.elements
        if e.idx != lower.idx
    ]
    return resolved


def assign_levels(resolved: ResolvedDocument, pred: HierarchyPrediction) -> ResolvedDocument:
    """Store title levels; -1 demotes the element to text.

    Titles the prediction missed inherit the previous title's level (1 at
    the front) and are flagged; predicted idx that are not titles are
    skipped with a flag.
    """
    by_idx = resolved.index()
    title_idx = [e.idx for e in resolved.elements if e.etype is ElementType.TITLE]
    title_set = set(title_idx)

    for idx in sorted(pred.levels):
        if idx not in title_set:
            resolved.flags.append(f"UnknownIdx:{idx}")

    levels: dict[int, int] = {}
    prev_level = 1
    for idx in title_idx:
        if idx in pred.levels:
            level = pred.levels[idx]
        else:
            resolved.flags.append(f"UnknownTitle:{idx}")
            level = prev_level
        if level != -1 and level < 1:
            resolved.flags.append(f"LevelClamped:{idx}:{level}")
            level = 1
        if level == -1:
            element = by_idx[idx]
            resolved.elements = [
                e.with_type(ElementType.TEXT) if e.idx == idx else e
                for e in resolved.elements
            ]
            resolved.demoted.append(idx)
            continue
        levels[idx] = level
        prev_level = level

    resolved.levels = levels
    return resolved


def attach_links(resolved: ResolvedDocument, assoc: PairPrediction) -> ResolvedDocument:
    """Populate caption->visual and visual->title maps, remapping merged idx."""
    by_idx = resolved.index()
    for src, tgt in assoc.pairs:
        src = resolved.merge_log.resolve(src)
        tgt = resolved.merge_log.resolve(tgt)
        src_el, tgt_el = by_idx.get(src), by_idx.get(tgt)
        if src_el is None or tgt_el is None or not association_link_valid(
            src_el.etype, tgt_el.etype
        ):
            resolved.flags.append(f"TypeRuleViolation:{src}->{tgt}")
            continue
        links = (
            resolved.section_links
            if src_el.etype in (ElementType.IMAGE, ElementType.TABLE)
            else resolved.caption_links
        )
        if src in links:
            if links[src] != tgt:
                resolved.flags.append(f"LinkConflict:{src}->{tgt} (kept {links[src]})")
            continue
        links[src] = tgt
    for idx in assoc.unresolved:
        resolved.flags.append(f"Unresolved:{idx}")
    return resolved


def check_text_conservation(
    original: CanonicalDocument, resolved: ResolvedDocument
) -> list[str]:
    """Verify merges preserved content up to the documented join characters.

    Returns a list of violation descriptions (empty = conserved): every
    merged element's content must equal the fold of its fragments under the
    join rule, and untouched text elements must be byte-identical.
    """
    problems: list[str] = []
    resolved_by_idx = resolved.index()
    merged_src = {r.src_idx: r for r in resolved.merge_log.records if r.kind == "text"}
    absorbed = set(resolved.merge_log.remap)

    for idx, record in merged_src.items():
        merged = resolved_by_idx.get(idx)
        if merged is None:
            problems.append(f"merged element {idx} missing from output")
            continue
        expected = reduce(join_fragments, (f["content"] for f in record.fragments))
        if merged.content != expected:
            problems.append(f"element {idx}: content differs from joined fragments")

    for e in original.elements:
        if e.etype is not ElementType.TEXT or e.idx in absorbed or e.idx in merged_src:
            continue
        out = resolved_by_idx.get(e.idx)
        if out is not None and out.etype is ElementType.TEXT and out.content != e.content:
            problems.append(f"untouched element {e.idx} changed content")
    return problems


def check_table_conservation(
    original: CanonicalDocument, resolved: ResolvedDocument
) -> list[str]:
    """Verify the merged table holds every non-dropped cell text.

    The multiset of logical cell texts must be preserved up to (a) fused
    cells replaced by their recorded join and (b) the dropped repeated
    header row.
    """
    problems: list[str] = []
    resolved_by_idx = resolved.index()
    original_by_idx = original.index()
    for record in resolved.merge_log.records:
        if record.kind != "table":
            continue
        upper = original_by_idx[record.src_idx]
        lower = original_by_idx[record.absorbed[0]]
        merged = resolved_by_idx.get(record.src_idx)
        if merged is None:
            problems.append(f"merged table {record.src_idx} missing")
            continue
        upper_cells = parse_table(upper.table_html or "").cell_texts()
        lower_grid = parse_table(lower.table_html or "")
        lower_cells = lower_grid.cell_texts()
        if record.dropped_header:
            header = lower_grid.slice_rows(0, 1).cell_texts()
            for cell in header:
                lower_cells.remove(cell)
        expected = sorted(upper_cells + lower_cells)
        for fusion in record.fused:
            expected.remove(fusion["upper"])
            expected.remove(fusion["lower"])
            expected.append(fusion["joined"])
        got = sorted(parse_table(merged.table_html or "").cell_texts())
        if sorted(expected) != got:
            problems.append(f"table {record.src_idx}: cell multiset not conserved")
    return problems
