"""Reference system-response generator.

This is the gold-response side of dialogue synthesis: a plan-navigation
state machine, tone-conditioned response templates, grounded responders
for QA / definitions / replacements / fun facts, templated safety
rejections, and a pluggable text-generation port for chitchat and
fallback turns.
"""

from __future__ import annotations

import json
import logging
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import PlanSynthError
from .intent_graph import CATEGORY_BY_INTENT, Intent, ResponseCategory
from .plan_model import (
    KnowledgeSidecar,
    PlanStep,
    ProceduralPlan,
    extract_entities,
    replaceable_candidates,
)
from .rng import SplitMix64, mix64

log = logging.getLogger(__name__)


class ToneOfVoice(Enum):
    NEUTRAL = "neutral"
    SOMEWHAT_POLITE = "somewhat polite"
    POLITE = "polite"
    VERY_POLITE = "very polite"


TONES = tuple(ToneOfVoice)

# Template situations; each must provide one non-empty cell per tone.
SITUATIONS = (
    "step_delivery",
    "completion",
    "repeat_prefix",
    "new_task_confirm",
    "safety_reject",
    "thanks_ack",
    "rejection",
    "clarification",
    "replacement_suggest",
)

# Situations whose templates must carry a slot.
_REQUIRED_SLOTS = {
    "step_delivery": "{step}",
    "repeat_prefix": "{step}",
    "replacement_suggest": "{alternatives}",
}

MAX_TEMPLATES_PER_CELL = 10


class UnhandledIntent(PlanSynthError):
    """respond() was given an intent it has no behavior for."""


class PreconditionFailed(PlanSynthError):
    """The intent cannot be realized in the current state.

    Synthesis treats these as a signal to resample the intent.
    """


class NoQAForStep(PreconditionFailed):
    pass


class NoDefinableEntity(PreconditionFailed):
    pass


class NoReplaceableResource(PreconditionFailed):
    pass


class UnknownResource(PreconditionFailed):
    pass


class NoFunFact(PreconditionFailed):
    pass


class PortTimeout(PlanSynthError):
    """The remote generator did not answer; callers degrade to templates."""


@dataclass(frozen=True)
class DialogueState:
    """Where the user is in the plan. step_ptr 0 means not started."""

    plan: ProceduralPlan
    step_ptr: int = 0
    tone: ToneOfVoice = ToneOfVoice.NEUTRAL
    finished: bool = False
    last_response: str | None = None

    def __post_init__(self):
        if not 0 <= self.step_ptr <= self.plan.k:
            raise ValueError(f"step_ptr {self.step_ptr} outside 0..{self.plan.k}")
        if self.finished and self.step_ptr != self.plan.k:
            raise ValueError("finished state must point at the last step")


@dataclass
class ResponseTemplateSet:
    """(situation, tone) -> non-empty list of at most 10 template strings."""

    cells: dict[tuple[str, ToneOfVoice], list[str]]

    def validate(self) -> "ResponseTemplateSet":
        for situation in SITUATIONS:
            for tone in TONES:
                cell = self.cells.get((situation, tone))
                if not cell:
                    raise PlanSynthError(f"missing templates for ({situation}, {tone.value})")
                if len(cell) > MAX_TEMPLATES_PER_CELL:
                    raise PlanSynthError(
                        f"({situation}, {tone.value}) has {len(cell)} templates, max is {MAX_TEMPLATES_PER_CELL}"
                    )
                slot = _REQUIRED_SLOTS.get(situation)
                if slot:
                    for tpl in cell:
                        if slot not in tpl:
                            raise PlanSynthError(f"{situation} template {tpl!r} lacks {slot}")
        return self

    def choose(self, situation: str, tone: ToneOfVoice, rng: SplitMix64) -> str:
        return rng.choice(self.cells[(situation, tone)])

    def cell(self, situation: str, tone: ToneOfVoice) -> list[str]:
        return list(self.cells[(situation, tone)])


def load_response_templates(path: str | Path) -> ResponseTemplateSet:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    cells: dict[tuple[str, ToneOfVoice], list[str]] = {}
    for situation, by_tone in doc.items():
        for tone_label, templates in by_tone.items():
            cells[(situation, ToneOfVoice(tone_label))] = [str(t) for t in templates]
    return ResponseTemplateSet(cells=cells).validate()


class GeneratorPort(ABC):
    """Request -> text interface for externally generated responses."""

    @abstractmethod
    def complete(
        self,
        prompt: str,
        *,
        max_tokens: int = 128,
        temperature: float = 0.0,
        tone: ToneOfVoice | None = None,
    ) -> str:
        ...


# Marker prepended by the stub's "uncensored" profile so shipped corpora
# never contain real non-compliant text and can be audited for it.
SYNTHETIC_COMPLIANCE_TAG = "[synthetic-compliance-stub]"

_STUB_REPLIES = (
    "I can chat a little, but my job is helping you with this task. Shall we keep going?",
    "That's an interesting thought! Let's stay focused on the task at hand though.",
    "I'm not sure I can help with that, but I'm happy to keep guiding you through your task.",
    "Good question! I'd rather not wander off topic, so let's get back to your task.",
    "I hear you! When you're ready, we can continue with the current step.",
)


class StubGeneratorPort(GeneratorPort):
    """Deterministic offline port: same request always yields the same text."""

    def __init__(self, profile: str = "grounded"):
        if profile not in ("grounded", "uncensored"):
            raise ValueError(f"unknown port profile {profile!r}")
        self.profile = profile

    def complete(self, prompt, *, max_tokens=128, temperature=0.0, tone=None):
        if self.profile == "uncensored":
            return f"{SYNTHETIC_COMPLIANCE_TAG} Sure, no problem at all, here is exactly how to do that."
        digest = 0
        for b in prompt.encode("utf-8"):
            digest = mix64(digest ^ b)
        return _STUB_REPLIES[digest % len(_STUB_REPLIES)]


class HttpGeneratorPort(GeneratorPort):
    """Remote generator over HTTP POST: {prompt, max_tokens, temperature} -> {text}."""

    def __init__(self, url: str, timeout: float = 10.0, retries: int = 2, profile: str = "grounded"):
        self.url = url
        self.timeout = timeout
        self.retries = retries
        self.profile = profile

    def complete(self, prompt, *, max_tokens=128, temperature=0.0, tone=None):
        body = {"prompt": prompt, "max_tokens": max_tokens, "temperature": temperature}
        if tone is not None:
            body["tone"] = tone.value
        data = json.dumps(body).encode("utf-8")
        last_err: Exception | None = None
        for _ in range(self.retries + 1):
            request = urllib.request.Request(
                self.url, data=data, headers={"Content-Type": "application/json"}
            )
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                    return str(json.loads(resp.read().decode("utf-8"))["text"])
            except (urllib.error.URLError, TimeoutError, OSError, KeyError, json.JSONDecodeError) as exc:
                last_err = exc
        raise PortTimeout(f"generator at {self.url} unreachable: {last_err}")


@dataclass
class PolicyDeps:
    """Everything respond() needs besides the dialogue state."""

    sidecar: KnowledgeSidecar
    templates: ResponseTemplateSet
    port: GeneratorPort = field(default_factory=StubGeneratorPort)
    generator_prompt: str = "{user_request}"


def render_step(step: PlanStep) -> str:
    return f"Step {step.index}: {step.text}"


def _deliver(templates: ResponseTemplateSet, situation: str, tone: ToneOfVoice,
             step: PlanStep, rng: SplitMix64) -> str:
    return templates.choose(situation, tone, rng).replace("{step}", render_step(step))


def navigate(
    state: DialogueState,
    direction: str,
    templates: ResponseTemplateSet,
    rng: SplitMix64,
) -> tuple[str, DialogueState]:
    """Total navigation: boundaries produce notices, never failures.

    next past the last step completes the task; prev below step 1
    re-delivers step 1 with a boundary notice; repeat re-delivers the
    previous response verbatim; complete jumps to the completion notice.
    """
    plan, tone = state.plan, state.tone
    if direction == "next":
        if state.finished or state.step_ptr >= plan.k:
            text = templates.choose("completion", tone, rng)
            return text, replace(state, step_ptr=plan.k, finished=True, last_response=text)
        ptr = state.step_ptr + 1
        text = _deliver(templates, "step_delivery", tone, plan.step(ptr), rng)
        return text, replace(state, step_ptr=ptr, last_response=text)
    if direction == "prev":
        if state.finished:
            text = _deliver(templates, "repeat_prefix", tone, plan.step(plan.k), rng)
            return text, replace(state, last_response=text)
        ptr = max(state.step_ptr - 1, 1)
        if ptr >= state.step_ptr:  # already at (or before) the first step
            text = _deliver(templates, "repeat_prefix", tone, plan.step(1), rng)
        else:
            text = _deliver(templates, "step_delivery", tone, plan.step(ptr), rng)
        return text, replace(state, step_ptr=ptr, last_response=text)
    if direction == "repeat":
        if state.last_response is not None:
            return state.last_response, state
        if state.step_ptr >= 1:
            text = _deliver(templates, "repeat_prefix", tone, plan.step(state.step_ptr), rng)
        else:
            text = templates.choose("clarification", tone, rng)
        return text, replace(state, last_response=text)
    if direction == "complete":
        text = templates.choose("completion", tone, rng)
        return text, replace(state, step_ptr=plan.k, finished=True, last_response=text)
    raise ValueError(f"unknown navigation direction {direction!r}")


def answer_grounded_qa(
    state: DialogueState,
    sidecar: KnowledgeSidecar,
    rng: SplitMix64,
    question: str | None = None,
) -> tuple[str, str]:
    """Return a (question, answer) pair grounded in the current step.

    With an explicit question, the stored answer for it is returned;
    without one, a pair is sampled jointly (synthesis mode).
    """
    pairs = sidecar.qa_pairs.get(state.step_ptr)
    if not pairs:
        raise NoQAForStep(f"no QA pairs for step {state.step_ptr}")
    if question is None:
        return rng.choice(pairs)
    for q, a in pairs:
        if q.strip().lower() == question.strip().lower():
            return q, a
    raise NoQAForStep(f"no stored answer for question {question!r} at step {state.step_ptr}")


def pick_definition_entity(state: DialogueState, sidecar: KnowledgeSidecar,
                           rng: SplitMix64) -> str:
    """Choose a definable entity mentioned in the current step's text."""
    if state.step_ptr < 1:
        raise NoDefinableEntity("no current step to extract entities from")
    entities = extract_entities(state.plan.step(state.step_ptr).text, sidecar.definitions)
    if not entities:
        raise NoDefinableEntity(f"step {state.step_ptr} mentions no definable entity")
    return rng.choice(sorted(entities, key=lambda e: (-len(e), e)))


def define_entity(entity: str, sidecar: KnowledgeSidecar) -> str:
    definition = sidecar.definitions.get(entity.lower())
    if definition is None:
        raise NoDefinableEntity(f"no definition for {entity!r}")
    return definition


def suggest_replacement(
    state: DialogueState,
    resource: str,
    sidecar: KnowledgeSidecar,
    tone: ToneOfVoice,
    templates: ResponseTemplateSet,
    rng: SplitMix64,
) -> str:
    """Name up to two alternatives; never recommend the replaced resource."""
    alts = [a for a in sidecar.substitutions.get(resource.lower(), ()) if a != resource.lower()]
    if not alts:
        raise UnknownResource(f"no substitutions known for {resource!r}")
    picks = list(alts)
    rng.shuffle(picks)
    picks = picks[:2]
    rendered = " or ".join(picks)
    return templates.choose("replacement_suggest", tone, rng).replace("{alternatives}", rendered)


def fun_fact(state: DialogueState, sidecar: KnowledgeSidecar, rng: SplitMix64) -> str:
    facts = sidecar.fun_facts.get(state.step_ptr)
    if not facts:
        raise NoFunFact(f"no fun facts for step {state.step_ptr}")
    return rng.choice(facts)


def safety_reject(tone: ToneOfVoice, templates: ResponseTemplateSet, rng: SplitMix64) -> str:
    return templates.choose("safety_reject", tone, rng)


def chitchat_or_fallback(
    port: GeneratorPort,
    user_text: str,
    tone: ToneOfVoice,
    templates: ResponseTemplateSet,
    rng: SplitMix64,
    generator_prompt: str = "{user_request}",
) -> str:
    """Ask the generator port; degrade to a clarification template on failure."""
    prompt = generator_prompt.replace("{user_request}", user_text)
    try:
        return port.complete(prompt, tone=tone)
    except PortTimeout as exc:
        log.warning("generator port failed (%s); falling back to clarification template", exc)
        return templates.choose("clarification", tone, rng)


def _is_thanks(user_text: str) -> bool:
    return "thank" in user_text.lower() or user_text.strip().lower() in ("ty", "thx")


def respond(
    state: DialogueState,
    intent: Intent,
    payload,
    deps: PolicyDeps,
    rng: SplitMix64,
) -> tuple[str, ResponseCategory, DialogueState]:
    """Dispatch one user intent to its responder.

    payload is intent-specific: a (question, answer) pair or question for
    Question, an entity for DefinitionQuestion, a resource for
    Replacement, the raw user text for ChitChat/Safety/Fallback; None
    lets the responder sample what it needs. Exactly one response
    category is assigned and only Nav intents may move the step pointer.
    """
    templates, sidecar = deps.templates, deps.sidecar
    category = CATEGORY_BY_INTENT.get(intent)
    if category is None:
        raise UnhandledIntent(f"no behavior for intent {intent.value}")

    if intent is Intent.NEXT_STEP:
        text, new_state = navigate(state, "next", templates, rng)
    elif intent is Intent.PREVIOUS_STEP:
        text, new_state = navigate(state, "prev", templates, rng)
    elif intent is Intent.REPEAT:
        text, new_state = navigate(state, "repeat", templates, rng)
    elif intent is Intent.COMPLETE_TASK:
        text, new_state = navigate(state, "complete", templates, rng)
    elif intent is Intent.NEW_TASK:
        text = templates.choose("new_task_confirm", state.tone, rng)
        new_state = replace(state, last_response=text)
    elif intent is Intent.QUESTION:
        if isinstance(payload, tuple):
            _, text = answer_grounded_qa(state, sidecar, rng, question=payload[0])
        else:
            _, text = answer_grounded_qa(state, sidecar, rng, question=payload)
        new_state = replace(state, last_response=text)
    elif intent is Intent.DEFINITION_QUESTION:
        entity = payload or pick_definition_entity(state, sidecar, rng)
        text = define_entity(entity, sidecar)
        new_state = replace(state, last_response=text)
    elif intent is Intent.REPLACEMENT:
        resource = payload or _pick_replaceable(state, sidecar, rng)
        text = suggest_replacement(state, resource, sidecar, state.tone, templates, rng)
        new_state = replace(state, last_response=text)
    elif intent is Intent.GET_FUN_FACT:
        text = fun_fact(state, sidecar, rng)
        new_state = replace(state, last_response=text)
    elif intent is Intent.CHIT_CHAT:
        user_text = payload or ""
        if _is_thanks(user_text):
            text = templates.choose("thanks_ack", state.tone, rng)
        else:
            text = chitchat_or_fallback(
                deps.port, user_text, state.tone, templates, rng, deps.generator_prompt
            )
        new_state = replace(state, last_response=text)
    elif intent is Intent.SAFETY:
        text = safety_reject(state.tone, templates, rng)
        new_state = replace(state, last_response=text)
    elif intent is Intent.FALLBACK:
        text = chitchat_or_fallback(
            deps.port, payload or "", state.tone, templates, rng, deps.generator_prompt
        )
        new_state = replace(state, last_response=text)
    else:  # pragma: no cover - category lookup already rejects Start/End
        raise UnhandledIntent(f"no behavior for intent {intent.value}")

    return text, category, new_state


def _pick_replaceable(state: DialogueState, sidecar: KnowledgeSidecar, rng: SplitMix64) -> str:
    if state.step_ptr < 1:
        raise NoReplaceableResource("no current step")
    candidates = sorted(replaceable_candidates(state.plan, sidecar, state.step_ptr))
    if not candidates:
        raise NoReplaceableResource(f"step {state.step_ptr} has no replaceable resource")
    return rng.choice(candidates)
