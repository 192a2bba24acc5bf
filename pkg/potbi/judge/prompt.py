"""Judge prompt rendering."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..common.errors import NoValidPredictions
from ..domain.case import CaseRecord, LabelTaxonomy
from ..domain.consensus import Tally
from ..domain.diagnosis import JudgePrompt
from ..domain.prediction import Prediction
from ..gateway.prompts import render_template

JUDGE_PLACEHOLDERS = frozenset(
    {"case_id", "extra_context", "taxonomy_list", "model_blocks", "tally_summary", "output_format"}
)

OUTPUT_FORMAT = (
    "Respond with a single JSON object: "
    '{"final_label": "<one allowed label>", "reasoning": "<short justification>"}'
)

DEFAULT_JUDGE_TEMPLATE = (
    "You are the final arbiter for a traumatic brain injury screening consortium.\n"
    "Case: {case_id}\n"
    "{extra_context}\n"
    "Allowed labels: {taxonomy_list}\n"
    "\n"
    "Consortium predictions:\n"
    "{model_blocks}\n"
    "\n"
    "{tally_summary}\n"
    "\n"
    "{output_format}"
)


def _count(value: Fraction) -> str:
    return str(int(value)) if value.denominator == 1 else f"{float(value):g}"


def model_block(prediction: Prediction) -> str:
    lines = [f"[Model {prediction.model_id}]", f"label: {prediction.label}"]
    if prediction.confidence is not None:
        lines.append(f"confidence: {prediction.confidence:.2f}")
    lines.append(f"rationale: {prediction.rationale or '(none)'}")
    return "\n".join(lines)


def tally_summary(t: Tally, taxonomy: LabelTaxonomy) -> str:
    parts = [f"{label}={_count(t.counts[label])}" for label in taxonomy.labels if label in t.counts]
    return f"Tally ({t.valid} of {t.total} members answered): " + (", ".join(parts) or "none")


def build_judge_prompt(
    case: CaseRecord,
    predictions: Sequence[Prediction],
    t: Tally,
    template: str,
    taxonomy: LabelTaxonomy,
    extra_context: str = "",
) -> JudgePrompt:
    """Render case context, one block per member prediction, the tally and the answer format."""
    if not predictions:
        raise NoValidPredictions(f"no valid predictions for case {case.case_id}")
    text = render_template(
        template,
        JUDGE_PLACEHOLDERS,
        {
            "case_id": case.case_id,
            "extra_context": extra_context,
            "taxonomy_list": taxonomy.as_list_text(),
            "model_blocks": "\n\n".join(model_block(p) for p in predictions),
            "tally_summary": tally_summary(t, taxonomy),
            "output_format": OUTPUT_FORMAT,
        },
    )
    if "{output_format}" not in template:
        text = f"{text}\n\n{OUTPUT_FORMAT}"
    return JudgePrompt(text=text, included_models=tuple(p.model_id for p in predictions))
