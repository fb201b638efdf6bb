"""Stage drivers: analysis, retrieval-condition derivation, agent planning.

Each operation wraps the backend call in the validation/repair loop and
returns a typed payload. Prompting mode is configuration: the default runs a
separate analysis call whose output is passed verbatim to later stages;
``direct`` skips it; the ``cot`` variants add a reasoning instruction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import EmptyPromptError
from .prompts import SYSTEM_PROMPT, stage_prompt
from .schema import (
    DEFAULT_MAX_RETRIES,
    AnalysisContext,
    ConditionSet,
    ScenePlan,
    verify_and_repair,
)

MODES = ("analysis_then_stage", "direct", "cot", "analysis_plus_cot")


@dataclass(frozen=True)
class PromptRequest:
    text: str
    mode: str = "analysis_then_stage"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")

    @property
    def uses_analysis(self) -> bool:
        return self.mode in ("analysis_then_stage", "analysis_plus_cot")

    @property
    def uses_cot(self) -> bool:
        return self.mode in ("cot", "analysis_plus_cot")


@dataclass
class TokenUsage:
    """Whitespace-token accounting across backend calls."""

    calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    attempts: list = field(default_factory=list)

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class _MeteredBackend:
    def __init__(self, inner, usage: TokenUsage):
        self.inner = inner
        self.usage = usage

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        response = self.inner.complete(system_prompt, user_prompt)
        self.usage.calls += 1
        self.usage.prompt_tokens += len(system_prompt.split()) + len(user_prompt.split())
        self.usage.completion_tokens += len(response.split())
        return response


def _prepare(request: PromptRequest, backend, usage: TokenUsage | None):
    if not request.text.strip():
        raise EmptyPromptError("scene description is empty")
    return _MeteredBackend(backend, usage) if usage is not None else backend


def _context_json(context: AnalysisContext | None) -> str | None:
    if context is None:
        return None
    return json.dumps(context.to_payload(), indent=1)


def analyze(
    request: PromptRequest,
    backend,
    usage: TokenUsage | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> AnalysisContext:
    """Decompose the description into explicit signals, objects, and agents."""
    backend = _prepare(request, backend, usage)
    prompt = stage_prompt("analysis", request.text, cot=request.uses_cot)
    result = verify_and_repair("analysis", prompt, backend, max_retries, SYSTEM_PROMPT)
    if usage is not None:
        usage.attempts.append(("analysis", result.attempts))
    return AnalysisContext.from_payload(result.payload)


def derive_conditions(
    request: PromptRequest,
    context: AnalysisContext | None,
    backend,
    usage: TokenUsage | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> ConditionSet:
    """Turn the description (plus analysis context) into retrieval filters."""
    backend = _prepare(request, backend, usage)
    prompt = stage_prompt("retrieval", request.text, _context_json(context), cot=request.uses_cot)
    result = verify_and_repair("retrieval", prompt, backend, max_retries, SYSTEM_PROMPT)
    if usage is not None:
        usage.attempts.append(("retrieval", result.attempts))
    return ConditionSet.from_payload(result.payload)


def plan_agents(
    request: PromptRequest,
    context: AnalysisContext | None,
    backend,
    usage: TokenUsage | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> ScenePlan:
    """Produce the multi-agent plan for the description."""
    backend = _prepare(request, backend, usage)
    prompt = stage_prompt("planning", request.text, _context_json(context), cot=request.uses_cot)
    result = verify_and_repair("planning", prompt, backend, max_retries, SYSTEM_PROMPT)
    if usage is not None:
        usage.attempts.append(("planning", result.attempts))
    return ScenePlan.from_payload(result.payload)


def plan_all(
    request: PromptRequest,
    backend,
    usage: TokenUsage | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> tuple[AnalysisContext | None, ConditionSet, ScenePlan]:
    """Run the full language-facing side of the pipeline in stage order."""
    context = analyze(request, backend, usage, max_retries) if request.uses_analysis else None
    conditions = derive_conditions(request, context, backend, usage, max_retries)
    plan = plan_agents(request, context, backend, usage, max_retries)
    return context, conditions, plan
