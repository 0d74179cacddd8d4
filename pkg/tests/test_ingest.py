from __future__ import annotations

import json
from pathlib import Path

import pytest

from docstitch.errors import BBoxInvalid, MalformedInput, SchemaUnknown
from docstitch.ingest import Profile, normalize_elements, load_profile
from docstitch.model import ElementType, validate_document

FIXTURES = Path(__file__).parent / "fixtures" / "raw"


def test_empty_block_list_is_a_valid_empty_document():
    result = normalize_elements([], "generic", doc_id="nil")
    assert len(result.document.elements) == 0
    assert validate_document(result.document).ok


def test_glm_doc_title_maps_to_title():
    raw = [{"type": "doc_title", "text": "Big", "page": 0, "bbox": [0, 0, 10, 10]}]
    result = normalize_elements(raw, "glm")
    assert result.document.elements[0].etype is ElementType.TITLE


def test_glm_para_title_maps_to_title_without_level_info():
    raw = [
        {"type": "doc_title", "text": "Big", "page": 0, "bbox": [0, 0, 10, 10]},
        {"type": "para_title", "text": "Small", "page": 0, "bbox": [0, 20, 10, 30]},
    ]
    result = normalize_elements(raw, "glm")
    assert [e.etype for e in result.document.elements] == [ElementType.TITLE] * 2


def test_mineru_fixture_matches_hand_written_expectation_field_by_field():
    raw = json.loads((FIXTURES / "mineru_blocks.json").read_text())
    expected = json.loads((FIXTURES / "mineru_blocks.expected.json").read_text())
    result = normalize_elements(raw, "mineru", doc_id="mineru_blocks")
    got = result.document.to_dict()
    assert got["doc_id"] == expected["doc_id"]
    assert got["page_count"] == expected["page_count"]
    assert got["coord_unit"] == expected["coord_unit"]
    assert got["source_schema"] == expected["source_schema"]
    assert len(got["elements"]) == len(expected["elements"]) == 12
    for got_el, want_el in zip(got["elements"], expected["elements"]):
        for field in ("idx", "type", "content", "page", "bbox", "table_html", "asset_ref"):
            assert got_el[field] == want_el[field], (got_el["idx"], field)
    assert validate_document(result.document).ok


def test_normalization_is_deterministic():
    raw = json.loads((FIXTURES / "mineru_blocks.json").read_text())
    a = normalize_elements(raw, "mineru", doc_id="d")
    b = normalize_elements(raw, "mineru", doc_id="d")
    assert a.document == b.document


def test_unknown_labels_map_to_other_and_are_counted():
    raw = [{"type": "hologram", "content": "x", "page": 0, "bbox": [0, 0, 5, 5]}]
    result = normalize_elements(raw, "generic")
    assert result.document.elements[0].etype is ElementType.OTHER
    assert result.report.unknown_labels == {"hologram": 1}


def test_profile_drops_are_accounted():
    raw = [
        {"type": "discarded", "text": "junk", "page_idx": 0, "bbox": [0, 0, 5, 5]},
        {"type": "text", "text": "keep", "page_idx": 0, "bbox": [0, 10, 5, 20]},
    ]
    result = normalize_elements(raw, "mineru")
    assert len(result.document.elements) == 1
    assert result.report.dropped == [{"position": 0, "label": "discarded"}]
    assert result.document.elements[0].idx == 0


def test_unregistered_profile_raises_schema_unknown():
    with pytest.raises(SchemaUnknown):
        normalize_elements([], "no-such-model")


def test_missing_required_field_raises_malformed_input():
    with pytest.raises(MalformedInput):
        normalize_elements([{"type": "text", "page": 0}], "generic")


def test_inverted_bbox_raises_bbox_invalid():
    raw = [{"type": "text", "content": "x", "page": 0, "bbox": [10, 10, 0, 20]}]
    with pytest.raises(BBoxInvalid):
        normalize_elements(raw, "generic")


def test_wrapped_object_with_metadata():
    raw = {
        "doc_id": "wrapped",
        "page_count": 5,
        "coord_unit": "normalized",
        "blocks": [{"type": "text", "content": "x", "page": 2, "bbox": [0, 0, 0.5, 0.5]}],
    }
    result = normalize_elements(raw, "generic")
    assert result.document.doc_id == "wrapped"
    assert result.document.page_count == 5
    assert result.document.coord_unit.value == "normalized"


def test_profile_loadable_from_file(tmp_path):
    profile_file = tmp_path / "custom.json"
    profile_file.write_text(
        json.dumps(
            {
                "name": "custom",
                "fields": {"type": "t", "content": "c", "page": "p", "bbox": "b"},
                "label_map": {"body": "text"},
            }
        )
    )
    profile = load_profile(str(profile_file))
    assert isinstance(profile, Profile)
    raw = [{"t": "body", "c": "hi", "p": 0, "b": [0, 0, 1, 1]}]
    result = normalize_elements(raw, profile)
    assert result.document.elements[0].etype is ElementType.TEXT
