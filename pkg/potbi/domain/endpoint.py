"""Consortium endpoint description."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class ModelEndpoint(BaseModel):
    """One chat-completions endpoint: a consortium member or the judge."""

    model_id: str = Field(min_length=1)
    base_url: str
    model_name: str
    prompt_template_id: str = "vlm_default"
    timeout_ms: int = Field(default=30000, gt=0)
    max_retries: int = Field(default=2, ge=0)
    weight: float = Field(default=1.0, gt=0)
    api_key: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    @property
    def completions_url(self) -> str:
        return f"{self.base_url.rstrip('/')}/v1/chat/completions"

    @property
    def models_url(self) -> str:
        return f"{self.base_url.rstrip('/')}/v1/models"
