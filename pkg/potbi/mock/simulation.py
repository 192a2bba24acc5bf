"""Keyed per-request simulation shared by the mock server and offline replays."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..common.errors import UnknownLabel
from .profiles import ErrorProfile

# none of these may contain a taxonomy surface form
_FINDINGS = (
    "diffuse signal changes",
    "small focal hyperintensity in the frontal white matter",
    "preserved grey-white differentiation",
    "subtle cortical findings",
    "scattered microhemorrhage pattern",
)
_OPENERS = ("Findings show", "On review, imaging shows", "Reading notes", "Impression:")
_NOISE = ("###", "<<eval>>", "~~", "[run 7]", "::")
_JUDGE_REASONS = (
    "members converge on the same imaging pattern",
    "the strongest rationale outweighs the dissent",
    "tally and rationales point the same way",
)


@dataclass(frozen=True)
class SimulatedAnswer:
    """What one mock member answers for one case: a failure, or a label rendered as text."""

    failed: bool
    label: Optional[str] = None
    text: Optional[str] = None


def keyed_stream(seed: int, model_name: str, case_id: str) -> random.Random:
    """Random stream that depends only on (seed, model_name, case_id)."""
    key = hashlib.sha256(f"{seed}:{model_name}:{case_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(key[:16], "big"))


def sample_label(
    profile: ErrorProfile,
    true_label: str,
    stream: random.Random,
    labels: Optional[Sequence[str]] = None,
) -> str:
    """Inverse-CDF draw from the true label's row, walking labels in taxonomy order."""
    if true_label not in profile.rows:
        raise UnknownLabel(f"profile has no row for {true_label!r}")
    row = profile.rows[true_label]
    order = [label for label in (labels or row) if label in row]
    u = stream.random()
    cumulative = 0.0
    last = None
    for label in order:
        p = row[label]
        if p <= 0:
            continue
        cumulative += p
        last = label
        if u < cumulative:
            return label
    # rounding left u above the final cumulative sum
    if last is None:
        raise UnknownLabel(f"row {true_label!r} has no positive probability")
    return last


def render_member(style: str, label: str, stream: random.Random) -> str:
    finding = stream.choice(_FINDINGS)
    if style == "json":
        confidence = round(0.5 + 0.5 * stream.random(), 2)
        return json.dumps({"label": label, "confidence": confidence, "rationale": finding})
    spoken = label.replace("_", " ")
    if style == "prose":
        return f"{stream.choice(_OPENERS)} {finding}, consistent with {spoken}."
    left, right = stream.choice(_NOISE), stream.choice(_NOISE)
    return f"{left} RESULT >> {spoken.upper()} << {right} {finding.upper()}"


def render_judge(label: str, stream: random.Random) -> str:
    return json.dumps({"final_label": label, "reasoning": stream.choice(_JUDGE_REASONS)})


def simulate(
    profile: ErrorProfile,
    model_name: str,
    case_id: str,
    true_label: str,
    seed: int,
    labels: Optional[Sequence[str]] = None,
    judge: bool = False,
) -> SimulatedAnswer:
    """Failure draw first, then the label, then the rendering, all from one keyed stream."""
    stream = keyed_stream(seed, model_name, case_id)
    if stream.random() < profile.failure_rate:
        return SimulatedAnswer(failed=True)
    label = sample_label(profile, true_label, stream, labels)
    text = render_judge(label, stream) if judge else render_member(profile.style, label, stream)
    return SimulatedAnswer(failed=False, label=label, text=text)


def replay_votes(
    profiles: Mapping[str, ErrorProfile],
    truth: Mapping[str, str],
    seed: int,
    labels: Optional[Sequence[str]] = None,
) -> dict[str, dict[str, Optional[str]]]:
    """case_id -> model_name -> sampled label (None on simulated failure), without HTTP."""
    votes: dict[str, dict[str, Optional[str]]] = {}
    for case_id, true_label in truth.items():
        votes[case_id] = {
            name: simulate(profile, name, case_id, true_label, seed, labels).label
            for name, profile in profiles.items()
        }
    return votes
