"""Shared builders for hand-constructed documents."""

from __future__ import annotations

from docstitch.model import CanonicalDocument, CanonicalElement, CoordUnit, ElementType


def el(
    idx: int,
    etype: str,
    content: str,
    page: int,
    bbox=(100.0, 100.0, 500.0, 140.0),
    table_html=None,
    asset_ref=None,
) -> CanonicalElement:
    return CanonicalElement(
        idx=idx,
        etype=ElementType(etype),
        content=content,
        page=page,
        bbox=tuple(float(v) for v in bbox),
        table_html=table_html,
        asset_ref=asset_ref,
    )


def doc(doc_id: str, page_count: int, elements, coord_unit="pixel") -> CanonicalDocument:
    return CanonicalDocument(
        doc_id=doc_id,
        page_count=page_count,
        coord_unit=CoordUnit(coord_unit),
        elements=list(elements),
    )


def stack_elements(doc_id: str, specs, coord_unit="pixel") -> CanonicalDocument:
    """Build a document from (etype, content, page[, kwargs]) tuples.

    Bboxes are stacked top-to-bottom per page so geometry is always valid
    and reading order matches vertical order.
    """
    elements = []
    y_by_page: dict[int, float] = {}
    for idx, spec in enumerate(specs):
        etype, content, page = spec[0], spec[1], spec[2]
        kwargs = spec[3] if len(spec) > 3 else {}
        y = y_by_page.get(page, 40.0)
        bbox = kwargs.pop("bbox", (60.0, y, 540.0, y + 40.0))
        y_by_page[page] = bbox[3] + 10.0
        elements.append(
            CanonicalElement(
                idx=idx,
                etype=ElementType(etype),
                content=content,
                page=page,
                bbox=tuple(float(v) for v in bbox),
                **kwargs,
            )
        )
    page_count = max((e.page for e in elements), default=0) + 1
    return doc(doc_id, page_count, elements, coord_unit)
