import json

import pytest

from potbi.catalog.manifest import load_manifest
from potbi.common.errors import EmptyAssistantContent
from potbi.domain.case import DatasetManifest, LabelTaxonomy, ManifestEntry
from potbi.ingestion.exporter import export_conversations

from .conftest import FIXTURES

INSTRUCTION = "Describe the findings on this MRI scan and classify the traumatic brain injury."


def test_fixture_export_matches_golden_file(fixture_manifest, tmp_path):
    manifest = load_manifest(fixture_manifest)
    out = tmp_path / "conversations.jsonl"
    assert export_conversations(manifest, INSTRUCTION, out) == 8
    assert out.read_bytes() == (FIXTURES / "conversations_8.jsonl").read_bytes()


def test_single_entry_record_structure(tmp_path):
    manifest = DatasetManifest(
        taxonomy=LabelTaxonomy(),
        entries=(ManifestEntry("c1", "images/c1.png", "mild_tbi", "microbleeds"),),
    )
    out = tmp_path / "one.jsonl"
    assert export_conversations(manifest, "Classify.", out) == 1
    (line,) = out.read_text(encoding="utf-8").splitlines()
    record = json.loads(line)
    user, assistant = record["messages"]
    assert [user["role"], assistant["role"]] == ["user", "assistant"]
    assert [part["type"] for part in user["content"]] == ["text", "image"]
    assert user["content"][0]["text"] == "Classify."
    assert user["content"][1]["image"] == "images/c1.png"
    assert assistant["content"] == "microbleeds"


def test_empty_manifest_writes_empty_file(tmp_path):
    out = tmp_path / "empty.jsonl"
    assert export_conversations(DatasetManifest(LabelTaxonomy(), ()), "x", out) == 0
    assert out.read_bytes() == b""


def test_every_record_has_two_turns(fixture_manifest, tmp_path):
    out = tmp_path / "all.jsonl"
    export_conversations(load_manifest(fixture_manifest), INSTRUCTION, out)
    for line in out.read_text(encoding="utf-8").splitlines():
        messages = json.loads(line)["messages"]
        assert [m["role"] for m in messages] == ["user", "assistant"]
        assert [p["type"] for p in messages[0]["content"]] == ["text", "image"]
        assert messages[1]["content"]


def test_entry_without_assistant_content(tmp_path):
    manifest = DatasetManifest(LabelTaxonomy(), (ManifestEntry("c1", "a.png", None, "  "),))
    out = tmp_path / "never.jsonl"
    with pytest.raises(EmptyAssistantContent):
        export_conversations(manifest, "x", out)
    assert not out.exists()
