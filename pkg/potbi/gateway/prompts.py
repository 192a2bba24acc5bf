"""Prompt templating for consortium members."""

from __future__ import annotations

from string import Formatter
from typing import Iterable, Mapping

from ..common.errors import UnknownPlaceholder, UnknownTemplate
from ..domain.case import CaseRecord, LabelTaxonomy

VLM_PLACEHOLDERS = frozenset({"taxonomy_list", "case_id", "extra_context"})

DEFAULT_VLM_TEMPLATE = (
    "You are a neuroradiology assistant reviewing one MRI scan (case {case_id}).\n"
    "{extra_context}\n"
    "Classify the scan into exactly one of: {taxonomy_list}.\n"
    'Answer with a JSON object {{"label": "<one label>", "confidence": <0 to 1>, '
    '"rationale": "<one sentence>"}}.'
)


def template_fields(template: str) -> set[str]:
    """Names of the replacement fields used by a str.format template."""
    names = set()
    for _, field_name, _, _ in Formatter().parse(template):
        if field_name is not None:
            names.add(field_name)
    return names


def render_template(template: str, allowed: Iterable[str], values: Mapping[str, str]) -> str:
    allowed = set(allowed)
    unknown = sorted(template_fields(template) - allowed)
    if unknown:
        raise UnknownPlaceholder(f"unsupported placeholder(s): {', '.join(unknown)}")
    return template.format(**{k: v for k, v in values.items() if k in allowed})


def resolve_template(templates: Mapping[str, str], template_id: str) -> str:
    try:
        return templates[template_id]
    except KeyError:
        raise UnknownTemplate(template_id) from None


def build_vlm_prompt(
    case: CaseRecord,
    template: str,
    taxonomy: LabelTaxonomy,
    extra_context: str = "",
) -> str:
    """Substitute case context and the taxonomy into a member prompt template."""
    return render_template(
        template,
        VLM_PLACEHOLDERS,
        {
            "taxonomy_list": taxonomy.as_list_text(),
            "case_id": case.case_id,
            "extra_context": extra_context,
        },
    )
