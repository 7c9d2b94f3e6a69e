"""User-intent transition graph built from annotated interaction logs.

The graph is a first-order Markov chain over a closed set of 12 user
intents plus synthetic Start/End nodes. It is estimated from real
user-system interaction logs, optionally reweighted to boost exploratory
intents, and then sampled to drive dialogue synthesis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import PlanSynthError
from .rng import SplitMix64

PROB_SUM_TOL = 1e-9


class Intent(Enum):
    # plan navigation
    NEXT_STEP = "NextStep"
    PREVIOUS_STEP = "PreviousStep"
    COMPLETE_TASK = "CompleteTask"
    REPEAT = "Repeat"
    NEW_TASK = "NewTask"
    # plan-grounded QA
    QUESTION = "Question"
    DEFINITION_QUESTION = "DefinitionQuestion"
    # open requests
    REPLACEMENT = "Replacement"
    GET_FUN_FACT = "GetFunFact"
    # conversational norms
    CHIT_CHAT = "ChitChat"
    SAFETY = "Safety"
    FALLBACK = "Fallback"
    # synthetic graph nodes, never emitted as dialogue turns
    START = "Start"
    END = "End"


class ResponseCategory(Enum):
    NAV = "Nav"
    QA = "QA"
    OPEN = "Open"
    NORMS = "Norms"


USER_INTENTS = frozenset(i for i in Intent if i not in (Intent.START, Intent.END))

CATEGORY_BY_INTENT: dict[Intent, ResponseCategory] = {
    Intent.NEXT_STEP: ResponseCategory.NAV,
    Intent.PREVIOUS_STEP: ResponseCategory.NAV,
    Intent.COMPLETE_TASK: ResponseCategory.NAV,
    Intent.REPEAT: ResponseCategory.NAV,
    Intent.NEW_TASK: ResponseCategory.NAV,
    Intent.QUESTION: ResponseCategory.QA,
    Intent.DEFINITION_QUESTION: ResponseCategory.QA,
    Intent.REPLACEMENT: ResponseCategory.OPEN,
    Intent.GET_FUN_FACT: ResponseCategory.OPEN,
    Intent.CHIT_CHAT: ResponseCategory.NORMS,
    Intent.SAFETY: ResponseCategory.NORMS,
    Intent.FALLBACK: ResponseCategory.NORMS,
}

# Intents that terminate the interaction once realized.
TERMINAL_INTENTS = frozenset({Intent.COMPLETE_TASK, Intent.NEW_TASK})

# Exploratory intents whose probability mass gets boosted before sampling.
DEFAULT_BOOSTED = frozenset(
    {
        Intent.QUESTION,
        Intent.GET_FUN_FACT,
        Intent.DEFINITION_QUESTION,
        Intent.REPLACEMENT,
        Intent.FALLBACK,
        Intent.CHIT_CHAT,
    }
)


class EmptyLog(PlanSynthError):
    """No usable interactions in the log."""


class UnknownIntentLabel(PlanSynthError):
    """A log label is outside the closed intent set."""


def intent_from_label(label: str) -> Intent:
    try:
        return Intent(label)
    except ValueError:
        raise UnknownIntentLabel(f"unknown intent label {label!r}") from None


@dataclass(frozen=True)
class WalkConfig:
    max_turns: int = 24
    boost_factor: float = 2.0
    boosted: frozenset[Intent] = DEFAULT_BOOSTED
    seed: int = 0

    def __post_init__(self):
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")
        if self.boost_factor <= 0:
            raise ValueError("boost_factor must be > 0")


@dataclass(frozen=True)
class IntentGraph:
    """trans[a][b] = probability of the next user intent being b after a."""

    trans: dict[Intent, dict[Intent, float]]

    @property
    def nodes(self) -> set[Intent]:
        nodes = set(self.trans)
        for successors in self.trans.values():
            nodes |= set(successors)
        return nodes

    def validate(self) -> "IntentGraph":
        if Intent.END in self.trans and self.trans[Intent.END]:
            raise ValueError("End must have no successors")
        for source, successors in self.trans.items():
            if source is Intent.END:
                continue
            if not successors:
                raise ValueError(f"{source.value} has no successors")
            total = sum(successors.values())
            if abs(total - 1.0) > PROB_SUM_TOL:
                raise ValueError(f"{source.value} probabilities sum to {total}, not 1")
            if any(p < 0 for p in successors.values()):
                raise ValueError(f"{source.value} has a negative probability")
        for node in self.nodes:
            if node is not Intent.END and node not in self.trans:
                raise ValueError(f"{node.value} is reachable but has no outgoing edges")
        return self


def build_from_logs(interactions: Iterable[Sequence[str | Intent]]) -> IntentGraph:
    """Estimate transition probabilities from annotated interactions.

    Each interaction is a sequence of intent labels; Start precedes the
    first label and End follows the last, so the chain also captures how
    interactions open and close.
    """
    counts: dict[Intent, dict[Intent, int]] = {}
    n_interactions = 0
    for i, interaction in enumerate(interactions):
        labels = list(interaction)
        if not labels:
            raise EmptyLog(f"interaction {i} has no intents")
        chain = [Intent.START]
        for label in labels:
            intent = label if isinstance(label, Intent) else intent_from_label(label)
            if intent not in USER_INTENTS:
                raise UnknownIntentLabel(f"{intent.value} is not a user intent")
            chain.append(intent)
        chain.append(Intent.END)
        for a, b in zip(chain, chain[1:]):
            counts.setdefault(a, {}).setdefault(b, 0)
            counts[a][b] += 1
        n_interactions += 1
    if n_interactions == 0:
        raise EmptyLog("log contains no interactions")

    trans: dict[Intent, dict[Intent, float]] = {}
    for a, row in counts.items():
        total = sum(row.values())
        trans[a] = {b: n / total for b, n in sorted(row.items(), key=lambda kv: kv[0].value)}
    return IntentGraph(trans=trans).validate()


def reweight(g: IntentGraph, cfg: WalkConfig) -> IntentGraph:
    """Multiply boosted successors' mass by boost_factor, then renormalize.

    Support is preserved: zero-probability edges stay at zero.
    """
    out: dict[Intent, dict[Intent, float]] = {}
    for source, successors in g.trans.items():
        weighted = {
            b: p * (cfg.boost_factor if b in cfg.boosted else 1.0)
            for b, p in successors.items()
        }
        total = sum(weighted.values())
        out[source] = {b: w / total for b, w in weighted.items()} if total > 0 else {}
    return IntentGraph(trans=out)


def sample_successor(g: IntentGraph, source: Intent, rng: SplitMix64) -> Intent:
    successors = g.trans.get(source)
    if not successors:
        return Intent.END
    items = list(successors.keys())
    weights = list(successors.values())
    return rng.weighted_choice(items, weights)


def sample_walk(g: IntentGraph, cfg: WalkConfig, rng: SplitMix64 | None = None) -> list[Intent]:
    """Sample one user-intent walk: Start's successor up to a terminal.

    The walk ends at the first CompleteTask/NewTask, on a transition into
    End, or after max_turns intents, whichever comes first.
    """
    if rng is None:
        rng = SplitMix64(cfg.seed)
    walk: list[Intent] = []
    current = Intent.START
    while len(walk) < cfg.max_turns:
        nxt = sample_successor(g, current, rng)
        if nxt is Intent.END:
            break
        walk.append(nxt)
        if nxt in TERMINAL_INTENTS:
            break
        current = nxt
    return walk


def graph_to_dict(g: IntentGraph) -> dict:
    return {
        "nodes": sorted(n.value for n in g.nodes),
        "trans": {
            a.value: {b.value: p for b, p in sorted(row.items(), key=lambda kv: kv[0].value)}
            for a, row in sorted(g.trans.items(), key=lambda kv: kv[0].value)
        },
    }


def graph_from_dict(doc: dict) -> IntentGraph:
    trans = {
        intent_from_label(a): {intent_from_label(b): float(p) for b, p in row.items()}
        for a, row in doc["trans"].items()
    }
    return IntentGraph(trans=trans).validate()


def save_graph(g: IntentGraph, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(graph_to_dict(g), sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def load_graph(path: str | Path) -> IntentGraph:
    return graph_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_interaction_log(path: str | Path) -> list[list[str]]:
    """Read a JSONL log: one {"session": ..., "intents": [...]} per line."""
    interactions = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            interactions.append([str(x) for x in record["intents"]])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise PlanSynthError(f"{path}:{lineno}: bad log record: {exc}") from exc
    return interactions
