# conftest.py for shared fixtures and test configuration
import io
import json
import shutil
from pathlib import Path

import pytest
from PIL import Image

from potbi.domain.case import CaseRecord, ImagePayload, LabelTaxonomy, digest_bytes
from potbi.domain.endpoint import ModelEndpoint
from potbi.domain.prediction import Prediction
from potbi.mock.server import serve

FIXTURES = Path(__file__).parent / "fixtures"

UNREACHABLE_URL = "http://127.0.0.1:1"


class MockResponse:
    """Stand-in for requests.Response in monkeypatched calls."""

    def __init__(self, json_data=None, status_code=200, text=None):
        self._json = json_data
        self.status_code = status_code
        self.text = text if text is not None else json.dumps(json_data)

    def json(self):
        if self._json is None:
            raise ValueError("no JSON body")
        return self._json


def chat_body(content):
    return {"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}


def make_png(width=64, height=64, color=(10, 20, 30)):
    out = io.BytesIO()
    Image.new("RGB", (width, height), color).save(out, format="PNG")
    return out.getvalue()


def make_jpeg(width, height, color=(120, 60, 30)):
    out = io.BytesIO()
    Image.new("RGB", (width, height), color).save(out, format="JPEG")
    return out.getvalue()


@pytest.fixture
def taxonomy():
    return LabelTaxonomy()


@pytest.fixture
def png_bytes():
    return make_png()


@pytest.fixture
def case(png_bytes):
    return CaseRecord(
        case_id=digest_bytes(png_bytes),
        image=ImagePayload(png_bytes),
        ground_truth="mild_tbi",
    )


@pytest.fixture
def make_endpoint():
    def _make_endpoint(model_id="vlm_01", base_url=UNREACHABLE_URL, **kwargs):
        kwargs.setdefault("model_name", model_id)
        kwargs.setdefault("max_retries", 0)
        kwargs.setdefault("timeout_ms", 5000)
        return ModelEndpoint(model_id=model_id, base_url=base_url, **kwargs)

    return _make_endpoint


@pytest.fixture
def make_prediction():
    def _make_prediction(model_id, label, confidence=None, rationale=""):
        return Prediction(model_id=model_id, label=label, confidence=confidence, rationale=rationale)

    return _make_prediction


@pytest.fixture
def fixture_manifest(tmp_path):
    """The 8-entry fixture manifest copied next to freshly drawn images."""
    target = tmp_path / "dataset"
    (target / "images").mkdir(parents=True)
    shutil.copy(FIXTURES / "manifest_8.json", target / "manifest.json")
    with (target / "manifest.json").open() as fh:
        raw = json.load(fh)
    for index, entry in enumerate(raw["entries"]):
        (target / entry["image"]).write_bytes(make_png(48, 40, (index * 30, 255 - index * 30, 7)))
    return target / "manifest.json"


@pytest.fixture
def mock_consortium():
    """Factory for real uvicorn-backed mock servers, stopped at teardown."""
    handles = []

    def _start(profiles, truth, seed=0, labels=None):
        handle = serve(profiles, truth, seed, port=0, labels=labels)
        handles.append(handle)
        return handle

    yield _start
    for handle in handles:
        handle.stop()
