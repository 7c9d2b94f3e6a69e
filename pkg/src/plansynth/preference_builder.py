"""Preference-pair construction: one (chosen, rejected) pair per turn.

The rejected response is built by a per-intent rule: a wrong plan step
for navigation, a stale answer from an earlier QA turn, a definition of
an entity from earlier turns, a suggestion for a different resource, a
fun fact from a different plan, a synthetic compliant answer for safety
turns, and a flat rejection template for everything else. Every rule has
a rejection-template fallback so pair construction is total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Sequence

from .assistant_policy import (
    DialogueState,
    GeneratorPort,
    ResponseTemplateSet,
    StubGeneratorPort,
    ToneOfVoice,
    suggest_replacement,
)
from .errors import InvariantViolation
from .intent_graph import Intent, ResponseCategory
from .plan_model import KnowledgeSidecar, PlanCorpus, ProceduralPlan, extract_entities
from .rng import SplitMix64

if TYPE_CHECKING:
    from .synth_pipeline import Dialogue, DialogueTurn


class NegativeRule(Enum):
    WRONG_STEP = "wrong_step"
    PREV_QA_ANSWER = "prev_qa_answer"
    PREV_ENTITY_DEFINITION = "prev_entity_definition"
    OTHER_RESOURCE_SUGGESTION = "other_resource_suggestion"
    CROSS_PLAN_FACT = "cross_plan_fact"
    UNCENSORED_COMPLIANCE = "uncensored_compliance"
    REJECTION_TEMPLATE = "rejection_template"


# Which categories each rule may legitimately produce negatives for.
_RULE_CATEGORIES = {
    NegativeRule.WRONG_STEP: {ResponseCategory.NAV},
    NegativeRule.PREV_QA_ANSWER: {ResponseCategory.QA},
    NegativeRule.PREV_ENTITY_DEFINITION: {ResponseCategory.QA},
    NegativeRule.OTHER_RESOURCE_SUGGESTION: {ResponseCategory.OPEN},
    NegativeRule.CROSS_PLAN_FACT: {ResponseCategory.OPEN},
    NegativeRule.UNCENSORED_COMPLIANCE: {ResponseCategory.NORMS},
    NegativeRule.REJECTION_TEMPLATE: set(ResponseCategory),
}


@dataclass(frozen=True)
class PreferencePair:
    context_input: str
    chosen: str
    rejected: str
    category: ResponseCategory
    rule: NegativeRule

    def __post_init__(self):
        if self.chosen == self.rejected:
            raise InvariantViolation("preference pair has chosen == rejected")
        if self.category not in _RULE_CATEGORIES[self.rule]:
            raise InvariantViolation(
                f"rule {self.rule.value} cannot produce a {self.category.value} negative"
            )


@dataclass
class NegativeDeps:
    """Inputs the negative rules draw from."""

    plan: ProceduralPlan
    sidecar: KnowledgeSidecar
    templates: ResponseTemplateSet
    uncensored_port: GeneratorPort = field(default_factory=lambda: StubGeneratorPort("uncensored"))
    # (plan_id, fact) pool across the whole corpus, for cross-plan negatives
    fact_pool: list[tuple[str, str]] = field(default_factory=list)


def build_fact_pool(corpus: PlanCorpus) -> list[tuple[str, str]]:
    pool = []
    for plan_id in corpus.plan_ids:
        sidecar = corpus.sidecars[plan_id]
        for step_index in sorted(sidecar.fun_facts):
            for fact in sidecar.fun_facts[step_index]:
                pool.append((plan_id, fact))
    return pool


def _rejection(tone: ToneOfVoice, deps: NegativeDeps, rng: SplitMix64, chosen: str) -> tuple[str, NegativeRule]:
    candidates = [t for t in deps.templates.cell("rejection", tone) if t != chosen]
    if not candidates:
        raise InvariantViolation("no rejection template distinct from the gold response")
    return rng.choice(candidates), NegativeRule.REJECTION_TEMPLATE


def _wrong_step(turn: "DialogueTurn", deps: NegativeDeps, rng: SplitMix64) -> str | None:
    gold = turn.step_index
    candidates = [s.text for s in deps.plan.steps if s.index != gold and s.text != turn.response]
    if not candidates:
        return None
    return rng.choice(candidates)


def _prev_qa_answer(turn_index: int, history: Sequence["DialogueTurn"], chosen: str) -> str | None:
    for prior in reversed(history[:turn_index]):
        if prior.intent is Intent.QUESTION and prior.response != chosen:
            return prior.response
    return None


def _prev_entity_definition(
    turn: "DialogueTurn",
    turn_index: int,
    history: Sequence["DialogueTurn"],
    deps: NegativeDeps,
    rng: SplitMix64,
) -> str | None:
    current_entity = turn.meta.get("entity", "")
    seen: set[str] = set()
    for prior in history[:turn_index]:
        seen |= extract_entities(prior.user, deps.sidecar.definitions)
        seen |= extract_entities(prior.response, deps.sidecar.definitions)
    candidates = sorted(
        e for e in seen
        if e != current_entity and deps.sidecar.definitions.get(e) != turn.response
    )
    if not candidates:
        return None
    return deps.sidecar.definitions[rng.choice(candidates)]


def _other_resource(turn: "DialogueTurn", tone: ToneOfVoice, deps: NegativeDeps,
                    rng: SplitMix64) -> str | None:
    current = turn.meta.get("resource", "")
    others = sorted(r for r in deps.sidecar.substitutions if r != current)
    rng.shuffle(others)
    state = DialogueState(plan=deps.plan, step_ptr=turn.step_index, tone=tone)
    for resource in others:
        text = suggest_replacement(state, resource, deps.sidecar, tone, deps.templates, rng)
        if text != turn.response:
            return text
    return None


def _cross_plan_fact(turn: "DialogueTurn", deps: NegativeDeps, rng: SplitMix64) -> tuple[str, str] | None:
    own_facts = {f for facts in deps.sidecar.fun_facts.values() for f in facts}
    candidates = [
        (plan_id, fact)
        for plan_id, fact in deps.fact_pool
        if plan_id != deps.plan.id and fact not in own_facts and fact != turn.response
    ]
    if not candidates:
        return None
    return rng.choice(candidates)


def build_negative(
    turn: "DialogueTurn",
    turn_index: int,
    history: Sequence["DialogueTurn"],
    tone: ToneOfVoice,
    deps: NegativeDeps,
    rng: SplitMix64,
) -> tuple[str, NegativeRule, dict]:
    """Apply the per-intent negative rule; returns (text, rule, provenance)."""
    intent, chosen = turn.intent, turn.response
    meta: dict = {}

    if intent in (Intent.NEXT_STEP, Intent.PREVIOUS_STEP, Intent.COMPLETE_TASK,
                  Intent.REPEAT, Intent.NEW_TASK):
        text = _wrong_step(turn, deps, rng)
        if text is not None:
            return text, NegativeRule.WRONG_STEP, meta
    elif intent is Intent.QUESTION:
        text = _prev_qa_answer(turn_index, history, chosen)
        if text is not None:
            return text, NegativeRule.PREV_QA_ANSWER, meta
    elif intent is Intent.DEFINITION_QUESTION:
        text = _prev_entity_definition(turn, turn_index, history, deps, rng)
        if text is not None:
            return text, NegativeRule.PREV_ENTITY_DEFINITION, meta
    elif intent is Intent.REPLACEMENT:
        text = _other_resource(turn, tone, deps, rng)
        if text is not None:
            return text, NegativeRule.OTHER_RESOURCE_SUGGESTION, meta
    elif intent is Intent.GET_FUN_FACT:
        picked = _cross_plan_fact(turn, deps, rng)
        if picked is not None:
            source_plan, fact = picked
            return fact, NegativeRule.CROSS_PLAN_FACT, {"negative_source_plan": source_plan}
    elif intent is Intent.SAFETY:
        text = deps.uncensored_port.complete(turn.user, tone=tone)
        if text != chosen:
            return text, NegativeRule.UNCENSORED_COMPLIANCE, meta

    text, rule = _rejection(tone, deps, rng, chosen)
    return text, rule, meta


def negative_for(
    turn: "DialogueTurn",
    turn_index: int,
    history: Sequence["DialogueTurn"],
    tone: ToneOfVoice,
    deps: NegativeDeps,
    rng: SplitMix64,
) -> str:
    """The rejected-response text alone; see build_negative for the rule."""
    return build_negative(turn, turn_index, history, tone, deps, rng)[0]


def build_pairs(dialogue: "Dialogue", plan: ProceduralPlan, context_window: int = 4) -> list[PreferencePair]:
    """One pair per turn; the context is the exact SFT prompt for that turn."""
    from .synth_pipeline import render_prompt

    pairs = []
    for i, turn in enumerate(dialogue.turns):
        pairs.append(
            PreferencePair(
                context_input=render_prompt(dialogue, plan, i, context_window),
                chosen=turn.response,
                rejected=turn.negative,
                category=turn.category,
                rule=NegativeRule(turn.negative_rule),
            )
        )
    return pairs


def validate_corpus(dialogues: Sequence["Dialogue"], corpus: PlanCorpus) -> list[str]:
    """Corpus-wide preference validity scan; returns violation descriptions.

    Checks: chosen != rejected on every turn; navigation negatives quote
    an existing non-gold step of the same plan; fun-fact negatives come
    from a different plan; the QA rejection fallback fires only when the
    dialogue has no earlier QA turn.
    """
    violations = []
    multi_plan = len(corpus.plans) > 1
    for dialogue in dialogues:
        plan = corpus.plans[dialogue.plan_id]
        sidecar = corpus.sidecars[dialogue.plan_id]
        own_facts = {f for facts in sidecar.fun_facts.values() for f in facts}
        for i, turn in enumerate(dialogue.turns):
            where = f"{dialogue.id} turn {i}"
            rule = NegativeRule(turn.negative_rule)
            if not turn.negative:
                violations.append(f"{where}: empty negative")
                continue
            if turn.negative == turn.response:
                violations.append(f"{where}: chosen == rejected")
            if turn.category is ResponseCategory.NAV:
                if rule is NegativeRule.WRONG_STEP:
                    wrong_texts = {s.text for s in plan.steps if s.index != turn.step_index}
                    if turn.negative not in wrong_texts:
                        violations.append(f"{where}: nav negative is not a non-gold step text")
                elif plan.k > 1:
                    violations.append(f"{where}: nav negative fell back despite k={plan.k}")
            if turn.intent is Intent.GET_FUN_FACT:
                if rule is NegativeRule.CROSS_PLAN_FACT:
                    if turn.negative in own_facts:
                        violations.append(f"{where}: fun-fact negative appears in own sidecar")
                    source = turn.meta.get("negative_source_plan")
                    foreign = corpus.sidecars.get(source)
                    foreign_facts = (
                        {f for facts in foreign.fun_facts.values() for f in facts} if foreign else set()
                    )
                    if source == dialogue.plan_id or turn.negative not in foreign_facts:
                        violations.append(f"{where}: fun-fact negative lacks cross-plan provenance")
                elif multi_plan:
                    violations.append(f"{where}: fun-fact negative fell back despite other plans")
            if turn.intent is Intent.QUESTION:
                has_prior_qa = any(t.intent is Intent.QUESTION for t in dialogue.turns[:i])
                if rule is NegativeRule.REJECTION_TEMPLATE and has_prior_qa:
                    violations.append(f"{where}: QA fallback fired despite a prior QA turn")
                if rule is NegativeRule.PREV_QA_ANSWER and not has_prior_qa:
                    violations.append(f"{where}: QA negative claims a prior QA turn that does not exist")
    return violations
