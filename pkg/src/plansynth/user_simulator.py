"""User-side utterance generation.

Most intents draw a real user utterance from a frequency-weighted bank,
which preserves the noise profile of real traffic (ASR errors, stutter,
indecision). Definition questions and replacement requests are rendered
from slot templates instead, because their content depends on the plan.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PlanSynthError
from .intent_graph import Intent, intent_from_label
from .rng import SplitMix64

log = logging.getLogger(__name__)

# Platform wake words scrubbed at bank import so dialogues stay agnostic.
DEFAULT_WAKE_WORDS = ("alexa", "ziggy", "echo", "amazon", "computer")


class NoUtterancesForIntent(PlanSynthError):
    """The bank has no utterances for the requested intent."""


class EmptyTemplateSet(PlanSynthError):
    """No templates available to render the request."""


@dataclass
class UtteranceBank:
    """intent -> [(utterance, absolute frequency)], frequencies >= 1."""

    utterances: dict[Intent, list[tuple[str, int]]] = field(default_factory=dict)

    def validate(self) -> "UtteranceBank":
        for intent, rows in self.utterances.items():
            for text, freq in rows:
                if not text.strip():
                    raise PlanSynthError(f"empty utterance under {intent.value}")
                if freq < 1:
                    raise PlanSynthError(f"frequency {freq} < 1 for {text!r}")
        return self


@dataclass
class ScrubReport:
    scrubbed: list[str] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)


def scrub_wake_words(text: str, blocklist=DEFAULT_WAKE_WORDS) -> str:
    """Remove wake words (whole-word, case-insensitive), collapse spacing."""
    pattern = r"\b(?:" + "|".join(re.escape(w) for w in blocklist) + r")\b"
    cleaned = re.sub(pattern, " ", text, flags=re.IGNORECASE)
    cleaned = re.sub(r"\s+", " ", cleaned).strip()
    cleaned = re.sub(r"^[,.!?\s]+", "", cleaned)
    return cleaned


def load_bank_tsv(
    path: str | Path, blocklist=DEFAULT_WAKE_WORDS
) -> tuple[UtteranceBank, ScrubReport]:
    """Read a bank TSV (intent, utterance, frequency), scrubbing wake words.

    Utterances containing a blocklisted wake word are cleaned in place and
    reported; rows scrubbed down to nothing are dropped and reported.
    """
    utterances: dict[Intent, list[tuple[str, int]]] = {}
    report = ScrubReport()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise PlanSynthError(f"{path}:{lineno}: expected 3 tab-separated columns")
        intent = intent_from_label(parts[0].strip())
        raw = parts[1].strip()
        freq = int(parts[2])
        text = scrub_wake_words(raw, blocklist)
        if text != raw:
            if not text:
                report.dropped.append(raw)
                log.warning("dropped bank row scrubbed to empty: %r", raw)
                continue
            report.scrubbed.append(raw)
        utterances.setdefault(intent, []).append((text, freq))
    bank = UtteranceBank(utterances=utterances).validate()
    return bank, report


def sample_utterance(bank: UtteranceBank, intent: Intent, rng: SplitMix64) -> str:
    """Draw an utterance with probability proportional to its frequency."""
    rows = bank.utterances.get(intent)
    if not rows:
        raise NoUtterancesForIntent(f"bank has no utterances for {intent.value}")
    texts = [t for t, _ in rows]
    freqs = [f for _, f in rows]
    return rng.weighted_choice(texts, freqs)


def _check_templates(templates: list[str], slot: str) -> None:
    for tpl in templates:
        if tpl.count("{" + slot + "}") != 1:
            raise PlanSynthError(f"template {tpl!r} must contain exactly one {{{slot}}} slot")


@dataclass
class RequestTemplateSet:
    definition_templates: list[str] = field(default_factory=list)
    replacement_templates: list[str] = field(default_factory=list)

    def validate(self) -> "RequestTemplateSet":
        _check_templates(self.definition_templates, "entity")
        _check_templates(self.replacement_templates, "resource")
        return self


def load_request_templates(path: str | Path) -> RequestTemplateSet:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return RequestTemplateSet(
        definition_templates=list(doc.get("definition", ())),
        replacement_templates=list(doc.get("replacement", ())),
    ).validate()


def render_definition_question(tpl: RequestTemplateSet, entity: str, rng: SplitMix64) -> str:
    if not entity:
        raise PlanSynthError("entity must be non-empty")
    if not tpl.definition_templates:
        raise EmptyTemplateSet("no definition question templates")
    return rng.choice(tpl.definition_templates).replace("{entity}", entity)


def render_replacement_request(tpl: RequestTemplateSet, resource: str, rng: SplitMix64) -> str:
    if not resource:
        raise PlanSynthError("resource must be non-empty")
    if not tpl.replacement_templates:
        raise EmptyTemplateSet("no replacement request templates")
    return rng.choice(tpl.replacement_templates).replace("{resource}", resource)
