import json

import pytest

from potbi.catalog.manifest import load_case, load_manifest
from potbi.common.errors import DuplicateCaseId, InvalidLabel, MissingImage, ParseError
from potbi.domain.case import digest_bytes

from .conftest import make_png


def write_manifest(tmp_path, entries, labels=("no_tbi", "mild_tbi", "moderate_tbi", "severe_tbi")):
    path = tmp_path / "manifest.json"
    path.write_text(
        json.dumps(
            {"name": "t", "version": "0", "taxonomy": {"labels": list(labels), "synonyms": {}}, "entries": entries}
        )
    )
    return path


def test_empty_manifest(tmp_path):
    manifest = load_manifest(write_manifest(tmp_path, []))
    assert manifest.entries == ()
    assert len(manifest.taxonomy.labels) == 4


def test_fixture_manifest_loads_eight_cases(fixture_manifest):
    manifest = load_manifest(fixture_manifest)
    raw = json.loads(fixture_manifest.read_text())
    assert manifest.name == "tbi-fixture"
    assert len(manifest.entries) == 8
    assert [e.ground_truth for e in manifest.entries] == [e["label"] for e in raw["entries"]]
    records = [load_case(manifest, e) for e in manifest.entries]
    assert len({r.case_id for r in records}) == 8
    for record, entry in zip(records, manifest.entries):
        # entries without a declared id are addressed by their canonical bytes
        assert record.case_id == entry.case_id == digest_bytes(record.image.data)
        assert record.ground_truth == entry.ground_truth


def test_duplicate_case_ids(tmp_path):
    (tmp_path / "a.png").write_bytes(make_png(color=(1, 1, 1)))
    (tmp_path / "b.png").write_bytes(make_png(color=(2, 2, 2)))
    path = write_manifest(
        tmp_path,
        [{"case_id": "same", "image": "a.png"}, {"case_id": "same", "image": "b.png"}],
    )
    with pytest.raises(DuplicateCaseId):
        load_manifest(path)


def test_identical_images_without_ids_are_duplicates(tmp_path):
    (tmp_path / "a.png").write_bytes(make_png(color=(1, 1, 1)))
    (tmp_path / "b.png").write_bytes(make_png(color=(1, 1, 1)))
    path = write_manifest(tmp_path, [{"image": "a.png"}, {"image": "b.png"}])
    with pytest.raises(DuplicateCaseId):
        load_manifest(path)


def test_unknown_label(tmp_path):
    (tmp_path / "a.png").write_bytes(make_png())
    path = write_manifest(tmp_path, [{"image": "a.png", "label": "concussion"}])
    with pytest.raises(InvalidLabel):
        load_manifest(path)


def test_missing_image(tmp_path):
    path = write_manifest(tmp_path, [{"image": "nowhere.png", "label": "no_tbi"}])
    with pytest.raises(MissingImage):
        load_manifest(path)


@pytest.mark.parametrize("content", ["{not json", json.dumps({"entries": [{"label": "no_tbi"}]})])
def test_unparseable_manifest(tmp_path, content):
    path = tmp_path / "manifest.json"
    path.write_text(content)
    with pytest.raises(ParseError):
        load_manifest(path)


def test_invalid_taxonomy_is_a_parse_error(tmp_path):
    path = write_manifest(tmp_path, [], labels=("only_one",))
    with pytest.raises(ParseError):
        load_manifest(path)
