"""FastAPI mock consortium speaking the chat-completions protocol."""

from __future__ import annotations

import asyncio
import base64
import binascii
import logging
import re
import socket
import threading
import time
from typing import Any, Mapping, Optional, Sequence, Union

import uvicorn
from fastapi import FastAPI, HTTPException, status
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from ..common.errors import PortInUse, UnknownCase, UnknownLabel
from ..domain.case import digest_bytes
from .profiles import ErrorProfile
from .simulation import simulate

_CASE_ID = re.compile(r"(?<![0-9a-f])[0-9a-f]{64}(?![0-9a-f])")
_DATA_URL = re.compile(r"^data:[^;,]+;base64,(?P<payload>.*)$", re.DOTALL)

logger = logging.getLogger("MockConsortium")


class ChatMessage(BaseModel):
    role: str
    content: Union[str, list[dict[str, Any]]]


class ChatCompletionRequest(BaseModel):
    model: str
    messages: list[ChatMessage] = Field(min_length=1)

    model_config = ConfigDict(extra="allow")


def _image_bytes(request: ChatCompletionRequest) -> Optional[bytes]:
    for message in request.messages:
        if isinstance(message.content, str):
            continue
        for part in message.content:
            if part.get("type") != "image_url":
                continue
            url = (part.get("image_url") or {}).get("url", "")
            match = _DATA_URL.match(url)
            if match is None:
                raise HTTPException(status.HTTP_400_BAD_REQUEST, "image_url is not a base64 data URL")
            try:
                return base64.b64decode(match.group("payload"), validate=True)
            except (binascii.Error, ValueError):
                raise HTTPException(status.HTTP_400_BAD_REQUEST, "image payload is not valid base64")
    return None


def _text(request: ChatCompletionRequest) -> str:
    chunks = []
    for message in request.messages:
        if isinstance(message.content, str):
            chunks.append(message.content)
        else:
            chunks.extend(str(p.get("text", "")) for p in message.content if p.get("type") == "text")
    return "\n".join(chunks)


def resolve_case(request: ChatCompletionRequest, truth_lookup: Mapping[str, str]) -> tuple[str, bool]:
    """Return (case_id, text_only): the image digest, or the first known case id in the text."""
    image = _image_bytes(request)
    if image is not None:
        case_id = digest_bytes(image)
        if case_id not in truth_lookup:
            raise UnknownCase(case_id)
        return case_id, False
    for match in _CASE_ID.finditer(_text(request)):
        if match.group(0) in truth_lookup:
            return match.group(0), True
    raise UnknownCase("no known case id in text-only request")


def completion_body(model: str, case_id: str, content: str) -> dict:
    return {
        "id": f"chatcmpl-{case_id[:12]}",
        "object": "chat.completion",
        "model": model,
        "choices": [
            {
                "index": 0,
                "message": {"role": "assistant", "content": content},
                "finish_reason": "stop",
            }
        ],
    }


def create_app(
    profiles: Mapping[str, ErrorProfile],
    truth_lookup: Mapping[str, str],
    seed: int,
    labels: Optional[Sequence[str]] = None,
) -> FastAPI:
    """Build the mock app; answers depend only on (seed, model, case), never on arrival order."""
    profiles = dict(profiles)
    truth_lookup = dict(truth_lookup)
    for name, profile in profiles.items():
        missing = sorted({t for t in truth_lookup.values() if not profile.covers(t)})
        if missing:
            raise UnknownLabel(f"profile {name!r} has no rows for {', '.join(missing)}")

    app = FastAPI(title="potbi mock consortium", version="1.0")

    @app.get("/v1/models")
    def list_models():
        return {
            "object": "list",
            "data": [{"id": name, "object": "model", "owned_by": "potbi-mock"} for name in sorted(profiles)],
        }

    @app.post("/v1/chat/completions")
    async def chat_completions(request: ChatCompletionRequest):
        profile = profiles.get(request.model)
        if profile is None:
            raise HTTPException(status.HTTP_404_NOT_FOUND, f"unknown model {request.model!r}")
        try:
            case_id, text_only = resolve_case(request, truth_lookup)
        except UnknownCase as e:
            raise HTTPException(status.HTTP_404_NOT_FOUND, f"unknown case: {e}")
        answer = simulate(
            profile, request.model, case_id, truth_lookup[case_id], seed, labels, judge=text_only
        )
        if profile.latency_ms:
            await asyncio.sleep(profile.latency_ms / 1000.0)
        if answer.failed:
            logger.debug(f"simulated failure model={request.model} case={case_id[:12]}")
            return JSONResponse(
                status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
                content={"error": {"message": "simulated failure", "type": "server_error"}},
            )
        return completion_body(request.model, case_id, answer.text or "")

    return app


class MockServerHandle:
    """A uvicorn server running the mock app on a background thread."""

    def __init__(self, server: uvicorn.Server, thread: threading.Thread, host: str, port: int):
        self.server = server
        self.thread = thread
        self.host = host
        self.port = port

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self, timeout_s: float = 5.0) -> None:
        self.server.should_exit = True
        self.thread.join(timeout_s)

    def wait(self) -> None:
        """Block until the server exits; Ctrl-C stops it."""
        try:
            while self.thread.is_alive():
                self.thread.join(0.5)
        except KeyboardInterrupt:
            self.stop()

    def __enter__(self) -> "MockServerHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(
    profiles: Mapping[str, ErrorProfile],
    truth_lookup: Mapping[str, str],
    seed: int,
    port: int = 0,
    host: str = "127.0.0.1",
    labels: Optional[Sequence[str]] = None,
    startup_timeout_s: float = 10.0,
) -> MockServerHandle:
    """Start the mock consortium; port 0 picks a free port."""
    app = create_app(profiles, truth_lookup, seed, labels)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.bind((host, port))
    except OSError as e:
        sock.close()
        raise PortInUse(f"{host}:{port} is not available: {e}") from e
    bound_port = sock.getsockname()[1]
    config = uvicorn.Config(app, host=host, port=bound_port, log_level="warning", lifespan="off")
    server = uvicorn.Server(config)
    thread = threading.Thread(
        target=server.run, kwargs={"sockets": [sock]}, name=f"mock-consortium-{bound_port}", daemon=True
    )
    thread.start()
    deadline = time.monotonic() + startup_timeout_s
    while not server.started:
        if not thread.is_alive() or time.monotonic() > deadline:
            server.should_exit = True
            sock.close()
            raise OSError(f"mock consortium failed to start on {host}:{bound_port}")
        time.sleep(0.01)
    logger.info(f"Mock consortium serving {sorted(profiles)} on {host}:{bound_port}")
    return MockServerHandle(server, thread, host, bound_port)
