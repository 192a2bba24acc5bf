"""Chat-completions client with retries, plus consortium fan-out."""

from __future__ import annotations

import base64
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Literal, Mapping, Optional, Sequence

import requests

from ..common.telemetry import Telemetry
from ..domain.case import CaseRecord, ImagePayload, LabelTaxonomy
from ..domain.endpoint import ModelEndpoint
from ..domain.prediction import RawModelResponse, ResponseStatus
from .prompts import build_vlm_prompt, resolve_template

BACKOFF_BASE_S = 0.25
BACKOFF_FACTOR = 2.0

HealthStatus = Literal["ok", "unreachable"]


class ProtocolError(Exception):
    """The server answered, but not with a chat-completions body."""


def build_messages(prompt: str, image: Optional[ImagePayload]) -> list[dict]:
    """One user message: the prompt text, then the image as a base64 data URL."""
    if image is None:
        return [{"role": "user", "content": prompt}]
    encoded = base64.b64encode(image.data).decode("ascii")
    return [
        {
            "role": "user",
            "content": [
                {"type": "text", "text": prompt},
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:{image.media_type};base64,{encoded}"},
                },
            ],
        }
    ]


def _decode_json(response) -> object:
    try:
        return response.json()
    except Exception as e:
        raise ProtocolError(f"response body is not JSON: {e}") from e


def extract_content(data: object) -> str:
    try:
        content = data["choices"][0]["message"]["content"]  # type: ignore[index]
    except (KeyError, IndexError, TypeError) as e:
        raise ProtocolError(f"malformed chat-completions body: {e!r}") from e
    if not isinstance(content, str):
        raise ProtocolError("message content is not a string")
    return content


class ModelGateway:
    """Talks to chat-completions endpoints; remote failures come back as statuses."""

    def __init__(
        self,
        telemetry: Optional[Telemetry] = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: Optional[random.Random] = None,
    ):
        self.telemetry = telemetry or Telemetry()
        self.sleep = sleep
        self.rng = rng or random.Random()
        self.logger = logging.getLogger(self.__class__.__name__)

    def _headers(self, endpoint: ModelEndpoint) -> dict:
        headers = {"Content-Type": "application/json"}
        if endpoint.api_key:
            headers["Authorization"] = f"Bearer {endpoint.api_key}"
        return headers

    def _backoff(self, attempt: int) -> float:
        # full jitter: uniform over [0, base * factor^(attempt-1)]
        return self.rng.uniform(0.0, BACKOFF_BASE_S * BACKOFF_FACTOR ** (attempt - 1))

    def infer_single(
        self,
        endpoint: ModelEndpoint,
        prompt: str,
        image: Optional[ImagePayload] = None,
        options: Optional[Mapping[str, object]] = None,
    ) -> RawModelResponse:
        """POST one chat-completions request, retrying transport failures and timeouts."""
        payload: dict = {"model": endpoint.model_name, "messages": build_messages(prompt, image)}
        if options:
            payload.update(options)
        timeout_s = endpoint.timeout_ms / 1000.0
        start = time.perf_counter()
        attempts = 0
        status = ResponseStatus.TRANSPORT_ERROR
        error = ""
        while attempts < endpoint.max_retries + 1:
            attempts += 1
            try:
                response = requests.post(
                    endpoint.completions_url,
                    headers=self._headers(endpoint),
                    json=payload,
                    timeout=timeout_s,
                )
                if response.status_code >= 500:
                    status, error = ResponseStatus.TRANSPORT_ERROR, f"HTTP {response.status_code}"
                elif response.status_code >= 400:
                    status, error = ResponseStatus.PROTOCOL_ERROR, f"HTTP {response.status_code}"
                    break
                else:
                    body = extract_content(_decode_json(response))
                    latency = int((time.perf_counter() - start) * 1000)
                    self.telemetry.record_event(
                        "infer", model_id=endpoint.model_id, status="ok", attempts=attempts
                    )
                    return RawModelResponse(
                        model_id=endpoint.model_id,
                        status=ResponseStatus.OK,
                        body_text=body,
                        latency_ms=latency,
                        attempts=attempts,
                    )
            except requests.Timeout as e:
                status, error = ResponseStatus.TIMEOUT, str(e) or "timed out"
            except requests.RequestException as e:
                status, error = ResponseStatus.TRANSPORT_ERROR, str(e)
            except ProtocolError as e:
                status, error = ResponseStatus.PROTOCOL_ERROR, str(e)
                break
            except Exception as e:
                self.logger.error(f"unexpected error calling {endpoint.model_id}: {e}")
                status, error = ResponseStatus.TRANSPORT_ERROR, str(e)
            self.logger.warning(
                f"{endpoint.model_id} attempt {attempts}/{endpoint.max_retries + 1} failed: "
                f"{status.value} {error}"
            )
            if attempts < endpoint.max_retries + 1:
                self.sleep(self._backoff(attempts))
        latency = int((time.perf_counter() - start) * 1000)
        self.telemetry.record_event(
            "infer", model_id=endpoint.model_id, status=status.value, attempts=attempts
        )
        return RawModelResponse(
            model_id=endpoint.model_id,
            status=status,
            body_text=None,
            latency_ms=latency,
            attempts=attempts,
            error=error,
        )

    def fan_out(
        self,
        endpoints: Sequence[ModelEndpoint],
        case: CaseRecord,
        templates: Mapping[str, str],
        taxonomy: LabelTaxonomy,
        extra_context: str = "",
        max_parallel: Optional[int] = None,
    ) -> list[RawModelResponse]:
        """Query every endpoint concurrently; results follow the input order."""
        if not endpoints:
            raise ValueError("fan_out needs at least one endpoint")
        prompts = [
            build_vlm_prompt(
                case, resolve_template(templates, e.prompt_template_id), taxonomy, extra_context
            )
            for e in endpoints
        ]
        workers = max(1, min(max_parallel or len(endpoints), len(endpoints)))
        with self.telemetry.time_block("fan_out"):
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(
                    pool.map(
                        lambda pair: self.infer_single(pair[0], pair[1], case.image),
                        zip(endpoints, prompts),
                    )
                )

    def health_check(self, endpoint: ModelEndpoint) -> HealthStatus:
        """One GET against the model listing; never retried."""
        try:
            response = requests.get(
                endpoint.models_url,
                headers=self._headers(endpoint),
                timeout=endpoint.timeout_ms / 1000.0,
            )
            if response.status_code != 200:
                return "unreachable"
            data = response.json()
            if not isinstance(data, dict) or not isinstance(data.get("data"), list):
                return "unreachable"
            return "ok"
        except Exception as e:
            self.logger.info(f"health check for {endpoint.model_id} failed: {e}")
            return "unreachable"
