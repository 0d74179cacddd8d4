"""Normalize raw OCR block lists into the canonical element sequence.

Label alignment is data, not code: each supported OCR flavour is described
by a profile file (JSON) that maps raw field names and raw type labels onto
the canonical schema.  New OCR models are added by dropping a profile file
next to the built-in ones, no code changes.

Profile file format (all keys required unless noted)::

    {
      "name": "mineru",
      "description": "free text",
      "fields": {
        "type":       "type",            # raw key, or list of keys tried in order
        "content":    ["text", "content"],
        "page":       ["page_idx", "page"],
        "bbox":       "bbox",
        "table_html": ["table_body", "html"],   # optional
        "asset_ref":  ["img_path", "image_path"] # optional
      },
      "label_map":   {"doc_title": "title", ...},
      "drop_labels": ["discarded"]       # optional; dropped and counted
    }

Unknown raw labels map to ``other`` and are counted in the normalization
report rather than failing the ingest; downstream filters ignore ``other``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

from .errors import BBoxInvalid, MalformedInput, SchemaUnknown
from .model import (
    CanonicalDocument,
    CanonicalElement,
    CoordUnit,
    ElementType,
    bbox_is_valid,
)

_REQUIRED_FIELDS = ("type", "page", "bbox")


@dataclass(frozen=True)
class Profile:
    """One OCR-model mapping profile, loaded from its JSON description."""

    name: str
    fields: dict[str, list[str]]
    label_map: dict[str, str]
    drop_labels: frozenset[str]
    description: str = ""

    @classmethod
    def from_dict(cls, d: dict) -> Profile:
        fields = {}
        for canonical, raw in d.get("fields", {}).items():
            fields[canonical] = [raw] if isinstance(raw, str) else list(raw)
        missing = [f for f in _REQUIRED_FIELDS if f not in fields]
        if missing:
            raise MalformedInput(
                f"profile {d.get('name', '?')!r} lacks field mappings for {missing}"
            )
        return cls(
            name=d["name"],
            fields=fields,
            label_map={str(k): str(v) for k, v in d.get("label_map", {}).items()},
            drop_labels=frozenset(d.get("drop_labels", [])),
            description=d.get("description", ""),
        )

    def pick(self, block: dict, canonical_field: str) -> Any:
        for key in self.fields.get(canonical_field, []):
            if key in block and block[key] is not None:
                return block[key]
        return None


def _builtin_profiles() -> dict[str, Profile]:
    profiles = {}
    pkg = resources.files(__package__) / "profiles"
    for entry in sorted(pkg.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            profile = Profile.from_dict(json.loads(entry.read_text(encoding="utf-8")))
            profiles[profile.name] = profile
    return profiles


_PROFILES: Optional[dict[str, Profile]] = None


def registered_profiles() -> dict[str, Profile]:
    global _PROFILES
    if _PROFILES is None:
        _PROFILES = _builtin_profiles()
    return dict(_PROFILES)


def register_profile(profile: Profile) -> None:
    registered_profiles()
    assert _PROFILES is not None
    _PROFILES[profile.name] = profile


def load_profile(name_or_path: str) -> Profile:
    """Resolve a registered profile name, or load a profile file by path."""
    profiles = registered_profiles()
    if name_or_path in profiles:
        return profiles[name_or_path]
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        return Profile.from_dict(json.loads(path.read_text(encoding="utf-8")))
    raise SchemaUnknown(
        f"unknown profile {name_or_path!r}; registered: {sorted(profiles)}"
    )


@dataclass
class NormalizationReport:
    """Accounting for everything the mapping changed or dropped."""

    unknown_labels: dict[str, int] = field(default_factory=dict)
    dropped: list[dict] = field(default_factory=list)
    element_count: int = 0

    def count_unknown(self, label: str) -> None:
        self.unknown_labels[label] = self.unknown_labels.get(label, 0) + 1

    def to_dict(self) -> dict:
        return {
            "element_count": self.element_count,
            "unknown_labels": dict(sorted(self.unknown_labels.items())),
            "dropped": self.dropped,
        }


@dataclass
class NormalizationResult:
    document: CanonicalDocument
    report: NormalizationReport


def _as_block_list(raw_doc: Union[dict, list]) -> tuple[list[dict], dict]:
    """Accept either a bare block array or a wrapper object with metadata."""
    if isinstance(raw_doc, list):
        return raw_doc, {}
    if isinstance(raw_doc, dict):
        for key in ("blocks", "elements", "content_list"):
            if key in raw_doc and isinstance(raw_doc[key], list):
                return raw_doc[key], raw_doc
        raise MalformedInput("raw document object has no blocks/elements array")
    raise MalformedInput(f"raw document must be a JSON array or object, got {type(raw_doc).__name__}")


def normalize_elements(
    raw_doc: Union[dict, list],
    schema: Union[str, Profile],
    doc_id: str = "doc",
) -> NormalizationResult:
    """Map one raw OCR document into a CanonicalDocument.

    Deterministic: the same bytes and profile always produce the same
    document.  Source reading order is preserved; idx is assigned densely
    after profile-declared drops.
    """
    profile = schema if isinstance(schema, Profile) else load_profile(schema)
    blocks, meta = _as_block_list(raw_doc)

    report = NormalizationReport()
    elements: list[CanonicalElement] = []
    idx = 0
    for pos, block in enumerate(blocks):
        if not isinstance(block, dict):
            raise MalformedInput(f"block #{pos} is not an object")
        raw_label = profile.pick(block, "type")
        if raw_label is None:
            raise MalformedInput(f"block #{pos} is missing its type field")
        raw_label = str(raw_label)
        if raw_label in profile.drop_labels:
            report.dropped.append({"position": pos, "label": raw_label})
            continue
        mapped = profile.label_map.get(raw_label)
        if mapped is None:
            report.count_unknown(raw_label)
            etype = ElementType.OTHER
        else:
            etype = ElementType(mapped)

        page = profile.pick(block, "page")
        if page is None:
            raise MalformedInput(f"block #{pos} is missing its page field")
        bbox_raw = profile.pick(block, "bbox")
        if bbox_raw is None:
            raise MalformedInput(f"block #{pos} is missing its bbox field")
        if not bbox_is_valid(bbox_raw):
            raise BBoxInvalid(f"block #{pos} has invalid bbox {bbox_raw!r}")
        bbox = tuple(float(v) for v in bbox_raw)

        content = profile.pick(block, "content")
        content = "" if content is None else str(content)
        table_html = profile.pick(block, "table_html")
        asset_ref = profile.pick(block, "asset_ref")
        if etype is ElementType.TABLE:
            table_html = "" if table_html is None else str(table_html)
        else:
            table_html = None

        elements.append(
            CanonicalElement(
                idx=idx,
                etype=etype,
                content=content,
                page=int(page),
                bbox=bbox,  # type: ignore[arg-type]
                table_html=table_html,
                asset_ref=str(asset_ref) if asset_ref is not None else None,
            )
        )
        idx += 1

    report.element_count = len(elements)
    page_count = meta.get("page_count")
    if page_count is None:
        page_count = max((e.page for e in elements), default=0) + 1
    coord_unit = CoordUnit(meta.get("coord_unit", "pixel"))
    document = CanonicalDocument(
        doc_id=str(meta.get("doc_id", doc_id)),
        page_count=int(page_count),
        coord_unit=coord_unit,
        source_schema=profile.name,
        elements=elements,
    )
    return NormalizationResult(document=document, report=report)
