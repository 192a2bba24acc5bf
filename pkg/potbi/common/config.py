"""Run configuration."""

from __future__ import annotations

import json
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..domain.case import LabelTaxonomy
from ..domain.endpoint import ModelEndpoint
from ..domain.evaluation import strategy_name_conflicts
from ..gateway.prompts import DEFAULT_VLM_TEMPLATE, VLM_PLACEHOLDERS, template_fields
from ..judge.prompt import DEFAULT_JUDGE_TEMPLATE, JUDGE_PLACEHOLDERS
from .errors import ConfigError

CONFIG_ENV_VAR = "POTBI_CONFIG"
DEFAULT_STRIP_KEYS = ("name", "dob", "mrn", "address", "physician")

FallbackPolicy = Literal["fallback_majority", "strict_judge"]


def default_templates() -> dict[str, str]:
    return {"vlm_default": DEFAULT_VLM_TEMPLATE, "judge_default": DEFAULT_JUDGE_TEMPLATE}


def _check_placeholders(template_id: str, templates: dict[str, str], allowed: frozenset[str]) -> None:
    unknown = sorted(template_fields(templates[template_id]) - allowed)
    if unknown:
        raise ValueError(
            f"template {template_id!r} uses unsupported placeholder(s): {', '.join(unknown)}"
        )


class RunConfig(BaseModel):
    """Binds the consortium, the judge, the taxonomy and the pipeline policies."""

    endpoints: tuple[ModelEndpoint, ...]
    judge_endpoint: ModelEndpoint
    taxonomy: LabelTaxonomy = Field(default_factory=LabelTaxonomy)
    templates: dict[str, str] = Field(default_factory=default_templates)
    judge_template_id: str = "judge_default"
    quorum: float = Field(default=0.5, gt=0, le=1)
    fallback_policy: FallbackPolicy = "fallback_majority"
    max_parallel: int = Field(default=1, ge=1)
    fan_out_parallel: Optional[int] = Field(default=None, ge=1)
    audit_path: Optional[str] = None
    seed: int = 0
    count_unparseable: bool = False
    abstain_on_empty: bool = False
    max_image_side: int = Field(default=1024, gt=0)
    strip_keys: tuple[str, ...] = DEFAULT_STRIP_KEYS
    case_store: str = "case_store"
    extra_context: str = ""
    report_timestamps: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _merge_templates(cls, data: Any) -> Any:
        # user templates extend the shipped defaults rather than replacing them
        if isinstance(data, dict) and isinstance(data.get("templates"), dict):
            data = {**data, "templates": {**default_templates(), **data["templates"]}}
        return data

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if not self.endpoints:
            raise ValueError("at least one consortium endpoint is required")
        ids = [e.model_id for e in self.endpoints]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate model_id in endpoints: {ids}")
        if self.judge_endpoint.model_id in ids:
            raise ValueError("judge_endpoint must not share a model_id with a consortium member")
        conflicts = strategy_name_conflicts(ids)
        if conflicts:
            raise ValueError(f"model_id(s) {conflicts} clash with a report strategy name")
        for endpoint in self.endpoints:
            if endpoint.prompt_template_id not in self.templates:
                raise ValueError(
                    f"endpoint {endpoint.model_id} references unknown template "
                    f"{endpoint.prompt_template_id!r}"
                )
            _check_placeholders(endpoint.prompt_template_id, self.templates, VLM_PLACEHOLDERS)
        if self.judge_template_id not in self.templates:
            raise ValueError(f"unknown judge template {self.judge_template_id!r}")
        _check_placeholders(self.judge_template_id, self.templates, JUDGE_PLACEHOLDERS)
        return self

    def endpoint(self, model_id: str) -> ModelEndpoint:
        for endpoint in self.endpoints:
            if endpoint.model_id == model_id:
                return endpoint
        raise KeyError(model_id)

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Return a validated copy with the non-None overrides applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if not changes:
            return self
        try:
            return RunConfig.model_validate({**self.model_dump(), **changes})
        except ValidationError as e:
            raise ConfigError(str(e)) from e


def _read_raw(path: Path) -> dict:
    try:
        if path.suffix.lower() == ".toml":
            with path.open("rb") as fh:
                return tomllib.load(fh)
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"config file {path} does not parse: {e}") from e


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Load a RunConfig from JSON or TOML; falls back to $POTBI_CONFIG."""
    load_dotenv()
    chosen = path or os.getenv(CONFIG_ENV_VAR)
    if not chosen:
        raise ConfigError(f"no config path given and {CONFIG_ENV_VAR} is not set")
    raw = _read_raw(Path(chosen))
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid config {chosen}: {e}") from e
