"""Per-dialogue synthesis, prompt rendering, corpus splitting and stats.

A dialogue is synthesized by walking the intent graph, producing a user
utterance and a gold response per intent, then attaching a rejected
response per turn via the preference rules. The whole corpus is a pure
function of (plans, banks, templates, sidecars, config, seed): every
dialogue derives its own RNG stream from (corpus_seed, dialogue_index),
so output bytes are reproducible and independent of worker count.
"""

from __future__ import annotations

import json
import logging
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .assistant_policy import (
    DialogueState,
    GeneratorPort,
    PolicyDeps,
    PreconditionFailed,
    ResponseTemplateSet,
    StubGeneratorPort,
    ToneOfVoice,
    TONES,
    render_step,
    respond,
)
from .errors import PlanSynthError
from .intent_graph import (
    CATEGORY_BY_INTENT,
    Intent,
    IntentGraph,
    ResponseCategory,
    TERMINAL_INTENTS,
    WalkConfig,
    sample_successor,
)
from .plan_model import PlanCorpus, ProceduralPlan, extract_entities, replaceable_candidates
from .preference_builder import NegativeDeps, build_fact_pool, build_negative
from .rng import SplitMix64, derive_seed
from .user_simulator import (
    NoUtterancesForIntent,
    RequestTemplateSet,
    UtteranceBank,
    render_definition_question,
    render_replacement_request,
    sample_utterance,
)

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")

# How many graph resamples a single turn position gets before the most
# probable realizable successor is forced deterministically.
MAX_INTENT_RETRIES = 10

PROMPTER = "<|prompter|>"
ASSISTANT = "<|assistant|>"
END_OF_TURN = "<|endofturn|>"

GROUNDING_PREAMBLE = (
    "You are a taskbot tasked with helping users cook recipes or DIY projects. "
    "I will give you a recipe and I want you to help me do it step by step. "
    "You should always be empathetic, honest, and should always help me. "
    "If I ask you something that does not relate to the recipe you should politely "
    "reject the request and try to get me focused on the recipe. "
    "I am unsure how to cook something or do something related to the recipe you "
    "should help me to the best of your ability. "
    "Please use a {tone of voice} tone of voice. "
    "Recipe: {title} Steps: {recipe steps}"
)

STEP_DECLARATION = "I am currently on Step {index}: {step text}"
NOT_STARTED_DECLARATION = "I have not started the recipe yet."
ACKNOWLEDGMENT = "ok!"


class SynthesisStalled(PlanSynthError):
    """No candidate intent could be realized at some turn position."""


@dataclass
class DialogueTurn:
    user: str
    intent: Intent
    response: str
    negative: str = ""
    negative_rule: str = ""
    step_index: int = 0
    category: ResponseCategory = ResponseCategory.NAV
    meta: dict = field(default_factory=dict)


@dataclass
class Dialogue:
    id: str
    plan_id: str
    tone: ToneOfVoice
    turns: list[DialogueTurn]
    seed: int
    split: str = "train"


@dataclass(frozen=True)
class SynthConfig:
    n_dialogues: int = 100
    split_ratios: tuple[float, float, float] = (0.9, 0.05, 0.05)
    context_window: int = 4
    walk: WalkConfig = WalkConfig()
    seed: int = 0

    def __post_init__(self):
        if abs(sum(self.split_ratios) - 1.0) > 1e-9 or any(r < 0 for r in self.split_ratios):
            raise ValueError("split ratios must be non-negative and sum to 1")
        if self.context_window < 1:
            raise ValueError("context_window must be >= 1")


@dataclass
class SynthDeps:
    """Immutable inputs shared by all synthesis workers."""

    corpus: PlanCorpus
    graph: IntentGraph
    bank: UtteranceBank
    request_templates: RequestTemplateSet
    response_templates: ResponseTemplateSet
    port: GeneratorPort = field(default_factory=StubGeneratorPort)
    uncensored_port: GeneratorPort = field(default_factory=lambda: StubGeneratorPort("uncensored"))
    generator_prompt: str = "{user_request}"
    fact_pool: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        if not self.fact_pool:
            self.fact_pool = build_fact_pool(self.corpus)


@dataclass
class _UsedContent:
    """Per-dialogue tracking so users do not repeat the same request."""

    questions: set[str] = field(default_factory=set)
    entities: set[str] = field(default_factory=set)
    resources: set[str] = field(default_factory=set)
    facts: set[str] = field(default_factory=set)


def _realize_user_turn(
    intent: Intent,
    state: DialogueState,
    deps: SynthDeps,
    sidecar,
    used: _UsedContent,
    rng: SplitMix64,
):
    """Build the user text and response payload for one intent.

    Raises PreconditionFailed (or NoUtterancesForIntent) when the intent
    cannot be realized in the current state, e.g. a replacement request
    on a step without a replaceable resource.
    """
    if state.finished and intent not in (Intent.CHIT_CHAT, Intent.QUESTION):
        raise PreconditionFailed(f"{intent.value} not allowed after completion")

    meta: dict = {}
    if intent is Intent.QUESTION:
        pairs = [
            (q, a) for q, a in sidecar.qa_pairs.get(state.step_ptr, ())
            if q not in used.questions
        ]
        if not pairs:
            raise PreconditionFailed(f"no unasked QA pair for step {state.step_ptr}")
        payload = rng.choice(pairs)
        user = payload[0]
        meta["question"] = payload[0]
    elif intent is Intent.DEFINITION_QUESTION:
        if state.step_ptr < 1:
            raise PreconditionFailed("no current step for a definition question")
        entities = extract_entities(state.plan.step(state.step_ptr).text, sidecar.definitions)
        candidates = sorted(entities - used.entities)
        if not candidates:
            raise PreconditionFailed(f"no fresh definable entity at step {state.step_ptr}")
        payload = rng.choice(candidates)
        user = render_definition_question(deps.request_templates, payload, rng)
        meta["entity"] = payload
    elif intent is Intent.REPLACEMENT:
        if state.step_ptr < 1:
            raise PreconditionFailed("no current step for a replacement request")
        candidates = sorted(
            replaceable_candidates(state.plan, sidecar, state.step_ptr) - used.resources
        )
        if not candidates:
            raise PreconditionFailed(f"no fresh replaceable resource at step {state.step_ptr}")
        payload = rng.choice(candidates)
        user = render_replacement_request(deps.request_templates, payload, rng)
        meta["resource"] = payload
    elif intent is Intent.GET_FUN_FACT:
        facts = [f for f in sidecar.fun_facts.get(state.step_ptr, ()) if f not in used.facts]
        if not facts:
            raise PreconditionFailed(f"no fresh fun fact for step {state.step_ptr}")
        payload = rng.choice(facts)
        user = sample_utterance(deps.bank, intent, rng)
    else:
        payload = None
        user = sample_utterance(deps.bank, intent, rng)
        if intent in (Intent.CHIT_CHAT, Intent.SAFETY, Intent.FALLBACK):
            payload = user
    return user, payload, meta


def _commit_used(intent: Intent, payload, used: _UsedContent) -> None:
    if intent is Intent.QUESTION:
        used.questions.add(payload[0])
    elif intent is Intent.DEFINITION_QUESTION:
        used.entities.add(payload)
    elif intent is Intent.REPLACEMENT:
        used.resources.add(payload)
    elif intent is Intent.GET_FUN_FACT:
        used.facts.add(payload)


def synthesize_dialogue(
    plan: ProceduralPlan,
    deps: SynthDeps,
    cfg: SynthConfig,
    dialogue_seed: int,
    dialogue_id: str,
) -> Dialogue:
    """Synthesize one dialogue; a pure function of (plan, deps, cfg, seed)."""
    rng = SplitMix64(dialogue_seed)
    sidecar = deps.corpus.sidecars[plan.id]
    tone = rng.choice(TONES)
    state = DialogueState(plan=plan, tone=tone)
    policy_deps = PolicyDeps(
        sidecar=sidecar,
        templates=deps.response_templates,
        port=deps.port,
        generator_prompt=deps.generator_prompt,
    )
    turns: list[DialogueTurn] = []
    used = _UsedContent()
    prev = Intent.START
    while len(turns) < cfg.walk.max_turns:
        committed = None
        attempts = 0
        ended = False
        while attempts < MAX_INTENT_RETRIES:
            candidate = sample_successor(deps.graph, prev, rng)
            if candidate is Intent.END:
                ended = True
                break
            attempts += 1
            try:
                committed = (candidate, *_realize_user_turn(candidate, state, deps, sidecar, used, rng))
                break
            except PreconditionFailed:
                continue
        if ended:
            break
        if committed is None:
            committed = _rescue_intent(prev, state, deps, sidecar, used, rng)
            if committed is None:
                if Intent.END in deps.graph.trans.get(prev, ()):
                    break
                raise SynthesisStalled(
                    f"no realizable intent after {prev.value} in dialogue {dialogue_id}"
                )
        intent, user, payload, meta = committed
        was_finished = state.finished
        response, category, state = respond(state, intent, payload, policy_deps, rng)
        if was_finished:
            meta["post_completion"] = True
        _commit_used(intent, payload, used)
        turns.append(
            DialogueTurn(
                user=user,
                intent=intent,
                response=response,
                step_index=state.step_ptr,
                category=category,
                meta=meta,
            )
        )
        if intent in TERMINAL_INTENTS:
            break
        prev = intent
    if not turns:
        raise SynthesisStalled(f"dialogue {dialogue_id} came out empty")

    neg_deps = NegativeDeps(
        plan=plan,
        sidecar=sidecar,
        templates=deps.response_templates,
        uncensored_port=deps.uncensored_port,
        fact_pool=deps.fact_pool,
    )
    for i, turn in enumerate(turns):
        text, rule, neg_meta = build_negative(turn, i, turns, tone, neg_deps, rng)
        turn.negative = text
        turn.negative_rule = rule.value
        turn.meta.update(neg_meta)

    return Dialogue(id=dialogue_id, plan_id=plan.id, tone=tone, turns=turns, seed=dialogue_seed)


def _rescue_intent(prev, state, deps, sidecar, used, rng):
    """After exhausting retries, force the most probable realizable successor."""
    successors = deps.graph.trans.get(prev, {})
    ordered = sorted(successors.items(), key=lambda kv: (-kv[1], kv[0].value))
    for intent, prob in ordered:
        if intent is Intent.END or prob <= 0:
            continue
        try:
            return (intent, *_realize_user_turn(intent, state, deps, sidecar, used, rng))
        except PreconditionFailed:
            continue
    return None


def render_prompt(
    dialogue: Dialogue,
    plan: ProceduralPlan,
    turn_index: int,
    context_window: int = 4,
) -> str:
    """Render the exact model input for one turn.

    Layout: grounding preamble (tone + title + full steps), the current
    step declaration, the fixed acknowledgment exchange, the previous
    `context_window` turns, the current user turn, and the trailing
    assistant marker.
    """
    if not 0 <= turn_index < len(dialogue.turns):
        raise PlanSynthError(f"turn index {turn_index} outside dialogue {dialogue.id}")
    steps_text = " ".join(render_step(s) for s in plan.steps)
    preamble = (
        GROUNDING_PREAMBLE
        .replace("{tone of voice}", dialogue.tone.value)
        .replace("{title}", plan.title)
        .replace("{recipe steps}", steps_text)
    )
    current_ptr = dialogue.turns[turn_index - 1].step_index if turn_index > 0 else 0
    if current_ptr >= 1:
        step = plan.step(current_ptr)
        declaration = (
            STEP_DECLARATION
            .replace("{index}", str(step.index))
            .replace("{step text}", step.text)
        )
    else:
        declaration = NOT_STARTED_DECLARATION
    history = dialogue.turns[max(0, turn_index - context_window):turn_index]
    parts = [
        f"{PROMPTER} {preamble} {END_OF_TURN} ",
        f"{PROMPTER} {declaration} {END_OF_TURN} ",
        f"{ASSISTANT} {ACKNOWLEDGMENT} {END_OF_TURN} {END_OF_TURN} ",
    ]
    for turn in history:
        parts.append(f"{PROMPTER} {turn.user} {END_OF_TURN} {ASSISTANT} {turn.response} {END_OF_TURN} ")
    parts.append(f"{PROMPTER} {dialogue.turns[turn_index].user} {END_OF_TURN} {ASSISTANT}")
    return "".join(parts)


def _largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    floors = [int(n * r) for r in ratios]
    remainder = n - sum(floors)
    fractions = sorted(
        range(len(ratios)), key=lambda i: (-(n * ratios[i] - floors[i]), i)
    )
    for i in fractions[:remainder]:
        floors[i] += 1
    return floors


def split_corpus(
    dialogues: list[Dialogue],
    ratios: tuple[float, float, float] = (0.9, 0.05, 0.05),
    seed: int = 0,
) -> list[Dialogue]:
    """Assign splits at plan granularity so no plan leaks across splits."""
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise PlanSynthError("split ratios must be non-negative and sum to 1")
    plan_ids = sorted({d.plan_id for d in dialogues})
    rng = SplitMix64(derive_seed(seed, "split"))
    rng.shuffle(plan_ids)
    counts = _largest_remainder(len(plan_ids), ratios)
    assignment: dict[str, str] = {}
    start = 0
    for split, count in zip(SPLITS, counts):
        for plan_id in plan_ids[start:start + count]:
            assignment[plan_id] = split
        start += count
    for dialogue in dialogues:
        dialogue.split = assignment[dialogue.plan_id]
    return dialogues


def corpus_stats(dialogues: Sequence[Dialogue]) -> dict:
    turn_counts = [len(d.turns) for d in dialogues]
    intents: Counter[str] = Counter()
    categories: Counter[str] = Counter()
    tones: Counter[str] = Counter()
    splits: Counter[str] = Counter()
    for d in dialogues:
        tones[d.tone.value] += 1
        splits[d.split] += 1
        for t in d.turns:
            intents[t.intent.value] += 1
            categories[t.category.value] += 1
    return {
        "n_dialogues": len(dialogues),
        "n_turns": sum(turn_counts),
        "mean_turns": statistics.fmean(turn_counts) if turn_counts else 0.0,
        "stdev_turns": statistics.pstdev(turn_counts) if turn_counts else 0.0,
        "per_intent": dict(sorted(intents.items())),
        "per_category": dict(sorted(categories.items())),
        "tones": dict(sorted(tones.items())),
        "splits": dict(sorted(splits.items())),
    }


def dialogue_to_dict(dialogue: Dialogue) -> dict:
    return {
        "id": dialogue.id,
        "plan_id": dialogue.plan_id,
        "tone": dialogue.tone.value,
        "seed": dialogue.seed,
        "split": dialogue.split,
        "turns": [
            {
                "user": t.user,
                "intent": t.intent.value,
                "response": t.response,
                "negative": t.negative,
                "negative_rule": t.negative_rule,
                "step_index": t.step_index,
                "category": t.category.value,
                "meta": t.meta,
            }
            for t in dialogue.turns
        ],
    }


def dialogue_from_dict(doc: dict) -> Dialogue:
    return Dialogue(
        id=doc["id"],
        plan_id=doc["plan_id"],
        tone=ToneOfVoice(doc["tone"]),
        seed=int(doc["seed"]),
        split=doc["split"],
        turns=[
            DialogueTurn(
                user=t["user"],
                intent=Intent(t["intent"]),
                response=t["response"],
                negative=t.get("negative", ""),
                negative_rule=t.get("negative_rule", ""),
                step_index=int(t["step_index"]),
                category=ResponseCategory(t["category"]),
                meta=dict(t.get("meta", {})),
            )
            for t in doc["turns"]
        ],
    )


def write_corpus_jsonl(dialogues: Sequence[Dialogue], path: str | Path) -> None:
    """One dialogue per line, keys sorted, so reruns are byte-identical."""
    with open(path, "w", encoding="utf-8") as fh:
        for dialogue in dialogues:
            fh.write(json.dumps(dialogue_to_dict(dialogue), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def read_corpus_jsonl(path: str | Path) -> list[Dialogue]:
    dialogues = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            dialogues.append(dialogue_from_dict(json.loads(line)))
    return dialogues


_WORKER_STATE: dict = {}


def _init_worker(plans_by_index, deps, cfg):
    _WORKER_STATE["plans_by_index"] = plans_by_index
    _WORKER_STATE["deps"] = deps
    _WORKER_STATE["cfg"] = cfg


def _synthesize_index(index: int) -> Dialogue:
    plans_by_index = _WORKER_STATE["plans_by_index"]
    deps, cfg = _WORKER_STATE["deps"], _WORKER_STATE["cfg"]
    plan = plans_by_index[index % len(plans_by_index)]
    return synthesize_dialogue(
        plan, deps, cfg, derive_seed(cfg.seed, index), f"d{index:05d}"
    )


def synthesize_corpus(deps: SynthDeps, cfg: SynthConfig, jobs: int = 1) -> list[Dialogue]:
    """Synthesize, split, and return n_dialogues dialogues round-robin over plans.

    Output is ordered by dialogue index and every dialogue's RNG stream is
    derived from (cfg.seed, index), so bytes do not depend on `jobs`.
    """
    plans_by_index = [deps.corpus.plans[pid] for pid in deps.corpus.plan_ids]
    indices = list(range(cfg.n_dialogues))
    if jobs <= 1:
        _init_worker(plans_by_index, deps, cfg)
        dialogues = [_synthesize_index(i) for i in indices]
    else:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker, initargs=(plans_by_index, deps, cfg)
        ) as pool:
            dialogues = list(pool.map(_synthesize_index, indices, chunksize=16))
    return split_corpus(dialogues, cfg.split_ratios, cfg.seed)
