"""Canonical document model shared by every pipeline stage.

A document is a reading-order sequence of typed blocks.  Each block carries
its page, bounding box and a document-global index; the index is the only
identity used anywhere downstream (filters, predictions, merges, tree nodes
all reference blocks by ``idx``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence


class ElementType(str, Enum):
    """Closed vocabulary of block types after label alignment."""

    TITLE = "title"
    TEXT = "text"
    IMAGE = "image"
    TABLE = "table"
    IMAGE_CAPTION = "image_caption"
    TABLE_CAPTION = "table_caption"
    IMAGE_FOOTNOTE = "image_footnote"
    TABLE_FOOTNOTE = "table_footnote"
    PAGE_HEADER = "page_header"
    PAGE_FOOTER = "page_footer"
    FORMULA = "formula"
    OTHER = "other"


# Types that can carry an association link, and where the link may point.
VISUAL_TYPES = frozenset({ElementType.IMAGE, ElementType.TABLE})
CAPTION_LINK_TARGET = {
    ElementType.IMAGE_CAPTION: ElementType.IMAGE,
    ElementType.IMAGE_FOOTNOTE: ElementType.IMAGE,
    ElementType.TABLE_CAPTION: ElementType.TABLE,
    ElementType.TABLE_FOOTNOTE: ElementType.TABLE,
}
# Page furniture sits outside the main body flow.
FURNITURE_TYPES = frozenset({ElementType.PAGE_HEADER, ElementType.PAGE_FOOTER})


BBox = tuple[float, float, float, float]


def bbox_is_valid(bbox: Sequence[float]) -> bool:
    if len(bbox) != 4:
        return False
    try:
        x0, y0, x1, y1 = (float(v) for v in bbox)
    except (TypeError, ValueError):
        return False
    return x0 < x1 and y0 < y1


@dataclass(frozen=True)
class CanonicalElement:
    """One OCR block in canonical form.

    ``content`` may be empty for image/table bodies held as references;
    tables carry their body as ``table_html`` instead.
    """

    idx: int
    etype: ElementType
    content: str
    page: int
    bbox: BBox
    table_html: Optional[str] = None
    asset_ref: Optional[str] = None

    def with_type(self, etype: ElementType) -> CanonicalElement:
        return replace(self, etype=etype)

    def to_dict(self) -> dict:
        out = {
            "idx": self.idx,
            "type": self.etype.value,
            "content": self.content,
            "page": self.page,
            "bbox": list(self.bbox),
            "table_html": self.table_html,
            "asset_ref": self.asset_ref,
        }
        return out

    @classmethod
    def from_dict(cls, d: dict) -> CanonicalElement:
        return cls(
            idx=int(d["idx"]),
            etype=ElementType(d["type"]),
            content=d.get("content", "") or "",
            page=int(d["page"]),
            bbox=tuple(float(v) for v in d["bbox"]),
            table_html=d.get("table_html"),
            asset_ref=d.get("asset_ref"),
        )


class CoordUnit(str, Enum):
    PIXEL = "pixel"
    NORMALIZED = "normalized"


@dataclass
class CanonicalDocument:
    """Reading-order element sequence plus document metadata."""

    doc_id: str
    page_count: int
    elements: list[CanonicalElement]
    coord_unit: CoordUnit = CoordUnit.PIXEL
    source_schema: str = "generic"

    def __iter__(self) -> Iterator[CanonicalElement]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def by_idx(self, idx: int) -> CanonicalElement:
        element = self.index().get(idx)
        if element is None:
            raise KeyError(f"no element with idx {idx}")
        return element

    def index(self) -> dict[int, CanonicalElement]:
        return {e.idx: e for e in self.elements}

    def on_pages(self, start: int, end: int) -> list[CanonicalElement]:
        """Elements whose page lies in the inclusive range [start, end]."""
        return [e for e in self.elements if start <= e.page <= end]

    def of_type(self, *etypes: ElementType) -> list[CanonicalElement]:
        wanted = set(etypes)
        return [e for e in self.elements if e.etype in wanted]

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "page_count": self.page_count,
            "coord_unit": self.coord_unit.value,
            "source_schema": self.source_schema,
            "elements": [e.to_dict() for e in self.elements],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> CanonicalDocument:
        return cls(
            doc_id=str(d["doc_id"]),
            page_count=int(d["page_count"]),
            coord_unit=CoordUnit(d.get("coord_unit", "pixel")),
            source_schema=d.get("source_schema", "generic"),
            elements=[CanonicalElement.from_dict(e) for e in d["elements"]],
        )

    @classmethod
    def from_json(cls, text: str) -> CanonicalDocument:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validation."""

    code: str
    idx: Optional[int]
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, idx: Optional[int], message: str) -> None:
        self.violations.append(Violation(code, idx, message))

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"code": v.code, "idx": v.idx, "message": v.message}
                for v in self.violations
            ],
        }


def validate_document(doc: CanonicalDocument) -> ValidationReport:
    """Check every structural invariant; never raises, only reports."""
    report = ValidationReport()
    prev_idx: Optional[int] = None
    prev_page: Optional[int] = None
    seen: set[int] = set()
    for e in doc.elements:
        if e.idx in seen:
            report.add("DuplicateIdx", e.idx, f"idx {e.idx} appears more than once")
        seen.add(e.idx)
        if prev_idx is not None and e.idx <= prev_idx:
            report.add(
                "IdxNotIncreasing",
                e.idx,
                f"idx {e.idx} does not increase after {prev_idx}",
            )
        if prev_page is not None and e.page < prev_page:
            report.add(
                "PageOrder",
                e.idx,
                f"page {e.page} decreases after page {prev_page}",
            )
        if not (0 <= e.page < doc.page_count):
            report.add(
                "PageOutOfRange",
                e.idx,
                f"page {e.page} outside 0..{doc.page_count - 1}",
            )
        if not bbox_is_valid(e.bbox):
            report.add("BBoxInvalid", e.idx, f"bbox {e.bbox} is degenerate or inverted")
        if e.etype is ElementType.TABLE and e.table_html is None:
            report.add("TableHtmlMissing", e.idx, "table element without table_html")
        if e.etype is not ElementType.TABLE and e.table_html is not None:
            report.add(
                "TableHtmlUnexpected",
                e.idx,
                f"{e.etype.value} element carries table_html",
            )
        prev_idx = e.idx
        prev_page = max(prev_page, e.page) if prev_page is not None else e.page
    return report


def adjacent_pairs(elements: Iterable[CanonicalElement]) -> list[tuple[CanonicalElement, CanonicalElement]]:
    """Consecutive pairs of a single-type stream, in reading order."""
    items = list(elements)
    return list(zip(items, items[1:]))
