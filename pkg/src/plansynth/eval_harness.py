"""Desk-computable evaluation: ROUGE-L, Fleiss kappa, judge prompts.

The judge prompt builders render the exact annotation prompts from
shipped golden templates; verdict parsing extracts and schema-checks the
final "Answer:" line without ever guessing. A metric-port registry keeps
embedding-based metrics (BERTScore) pluggable without implementing them.
"""

from __future__ import annotations

import json
import logging
import re
import string
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from .errors import PlanSynthError
from .resources import read_data_text

log = logging.getLogger(__name__)


class DegenerateExpectedAgreement(PlanSynthError):
    """Expected agreement is 1, so chance correction divides by zero."""


class MissingFixture(PlanSynthError):
    """A judge prompt slot has no fixture value."""


class EmptyVerdictSet(PlanSynthError):
    """Win-rate aggregation needs at least one parseable verdict."""


class MetricUnavailable(PlanSynthError):
    """The requested metric has no registered implementation."""


# ---------------------------------------------------------------------------
# ROUGE-L


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


def rouge_tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    return text.lower().translate(_PUNCT_TABLE).split()


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(prev[j - 1] + 1)
            else:
                current.append(max(prev[j], current[j - 1]))
        prev = current
    return prev[len(b)]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """LCS-based precision/recall/F1 over normalized word tokens."""
    cand = rouge_tokenize(candidate)
    ref = rouge_tokenize(reference)
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return RougeScore(0.0, 0.0, 0.0)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    f1 = 2.0 * precision * recall / (precision + recall)
    return RougeScore(precision, recall, f1)


# ---------------------------------------------------------------------------
# Fleiss kappa


@dataclass(frozen=True)
class AnnotationMatrix:
    """n_items x n_categories counts with a constant raters-per-item."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise PlanSynthError("annotation matrix needs at least one item")
        widths = {len(r) for r in self.rows}
        if len(widths) != 1:
            raise PlanSynthError("all rows must have the same number of categories")
        sums = {sum(r) for r in self.rows}
        if len(sums) != 1:
            raise PlanSynthError("every item must have the same number of ratings")
        if any(n < 0 for r in self.rows for n in r):
            raise PlanSynthError("counts must be non-negative")
        if self.raters < 2:
            raise PlanSynthError("need at least 2 raters per item")

    @property
    def raters(self) -> int:
        return sum(self.rows[0])

    @property
    def n_items(self) -> int:
        return len(self.rows)

    @property
    def n_categories(self) -> int:
        return len(self.rows[0])


def fleiss_kappa(matrix: AnnotationMatrix | Sequence[Sequence[int]]) -> float:
    """Chance-corrected multi-rater agreement.

    Unanimous matrices return exactly 1.0; a degenerate expected
    agreement of 1 without unanimity cannot occur but is guarded anyway.
    """
    if not isinstance(matrix, AnnotationMatrix):
        matrix = AnnotationMatrix(rows=tuple(tuple(int(x) for x in row) for row in matrix))
    r = matrix.raters
    n = matrix.n_items
    if all(max(row) == r for row in matrix.rows):
        return 1.0
    p_observed = sum(
        (sum(c * c for c in row) - r) / (r * (r - 1)) for row in matrix.rows
    ) / n
    total = n * r
    proportions = [sum(row[j] for row in matrix.rows) / total for j in range(matrix.n_categories)]
    p_expected = sum(p * p for p in proportions)
    if p_expected >= 1.0:
        raise DegenerateExpectedAgreement("expected agreement is 1; kappa undefined")
    return (p_observed - p_expected) / (1.0 - p_expected)


# ---------------------------------------------------------------------------
# Judge prompts


class JudgeKind(Enum):
    WIN_RATE = "win_rate"
    NAVIGATION = "navigation"
    QA = "qa"
    REPLACEMENT = "replacement"
    FUN_FACT = "fun_fact"
    POLITENESS = "politeness"
    SAFETY = "safety"


ANSWER_SCHEMA: dict[JudgeKind, tuple[str, ...]] = {
    JudgeKind.WIN_RATE: ("response 1", "response 2"),
    JudgeKind.NAVIGATION: ("accurate", "inaccurate"),
    JudgeKind.QA: ("yes", "no"),
    JudgeKind.REPLACEMENT: ("0", "1", "2"),
    JudgeKind.FUN_FACT: ("0", "1", "2"),
    JudgeKind.POLITENESS: ("0", "1", "2"),
    JudgeKind.SAFETY: ("yes", "no"),
}


@dataclass(frozen=True)
class JudgeFixtures:
    recipe_text: str | None = None
    dialog: str | None = None
    user: str | None = None
    assistant_response: str | None = None
    assistant_response_2: str | None = None


@dataclass(frozen=True)
class JudgePrompt:
    kind: JudgeKind
    rendered_text: str
    answer_schema: tuple[str, ...]


def _require(value: str | None, slot: str, kind: JudgeKind) -> str:
    if value is None:
        raise MissingFixture(f"{kind.value} prompt needs fixture {slot!r}")
    return value


def build_judge_prompt(kind: JudgeKind, fixtures: JudgeFixtures) -> JudgePrompt:
    """Fill the golden template for `kind` with the fixtures, byte-exactly."""
    if kind is JudgeKind.WIN_RATE:
        text = (
            read_data_text("judge", "win_rate.txt")
            .replace("{recipe_text}", _require(fixtures.recipe_text, "recipe_text", kind))
            .replace("{dialog}", _require(fixtures.dialog, "dialog", kind))
            .replace("{user}", _require(fixtures.user, "user", kind))
            .replace("{assistant_response_1}", _require(fixtures.assistant_response, "assistant_response", kind))
            .replace("{assistant_response_2}", _require(fixtures.assistant_response_2, "assistant_response_2", kind))
        )
    else:
        question = read_data_text("judge", f"question_{kind.value}.txt")
        text = (
            read_data_text("judge", "prefix.txt")
            .replace("{recipe_text}", _require(fixtures.recipe_text, "recipe_text", kind))
            .replace("{dialog_context}", _require(fixtures.dialog, "dialog", kind))
            .replace("{user}", _require(fixtures.user, "user", kind))
            .replace("{assistant_response}", _require(fixtures.assistant_response, "assistant_response", kind))
            .replace("{annotation_question}", question)
        )
    return JudgePrompt(kind=kind, rendered_text=text, answer_schema=ANSWER_SCHEMA[kind])


# ---------------------------------------------------------------------------
# Verdict parsing and aggregation


@dataclass(frozen=True)
class Verdict:
    kind: JudgeKind
    value: str
    raw: str

    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class UnparseableVerdict:
    """Returned (never raised) when the answer line is absent or off-schema."""

    kind: JudgeKind
    raw: str
    reason: str

    @property
    def ok(self) -> bool:
        return False


_ANSWER_LINE = re.compile(r"^\s*answer\s*:\s*(.+?)\s*$", re.IGNORECASE)


def parse_judge_answer(kind: JudgeKind, raw: str) -> Verdict | UnparseableVerdict:
    """Extract and validate the value on the final "Answer:" line."""
    value = None
    for line in raw.splitlines():
        match = _ANSWER_LINE.match(line)
        if match:
            value = match.group(1)
    if value is None:
        return UnparseableVerdict(kind=kind, raw=raw, reason="no Answer line found")
    normalized = value.strip().strip("<>").strip().rstrip(".").lower()
    if normalized not in ANSWER_SCHEMA[kind]:
        return UnparseableVerdict(
            kind=kind, raw=raw, reason=f"{value!r} not in schema {ANSWER_SCHEMA[kind]}"
        )
    return Verdict(kind=kind, value=normalized, raw=raw)


@dataclass
class WinRateReport:
    wins: int
    losses: int
    unparseable: int
    win_rate: float


def aggregate_win_rate(
    verdicts: Sequence[Verdict | UnparseableVerdict], preferred: str = "response 1"
) -> WinRateReport:
    """Fraction of parseable verdicts preferring `preferred`.

    Unparseable verdicts are excluded from the denominator and reported.
    """
    wins = losses = unparseable = 0
    for verdict in verdicts:
        if not verdict.ok:
            unparseable += 1
        elif verdict.value == preferred:
            wins += 1
        else:
            losses += 1
    considered = wins + losses
    if considered == 0:
        raise EmptyVerdictSet("no parseable verdicts to aggregate")
    return WinRateReport(
        wins=wins, losses=losses, unparseable=unparseable, win_rate=wins / considered
    )


def read_verdict_file(path: str | Path) -> list[Verdict | UnparseableVerdict]:
    """Offline judge mode: JSONL of {kind, item_id, raw} records."""
    verdicts = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            verdicts.append(parse_judge_answer(JudgeKind(record["kind"]), str(record["raw"])))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise PlanSynthError(f"{path}:{lineno}: bad verdict record: {exc}") from exc
    return verdicts


def write_verdict_file(path: str | Path, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Metric ports


class MetricPort(ABC):
    """Batch scoring interface so embedding metrics stay pluggable."""

    name: str

    @abstractmethod
    def score(self, candidates: Sequence[str], references: Sequence[str]) -> list[float]:
        ...


class RougeLMetric(MetricPort):
    name = "rouge_l"

    def score(self, candidates, references):
        return [rouge_l(c, r).f1 for c, r in zip(candidates, references)]


_METRICS: dict[str, MetricPort] = {"rouge_l": RougeLMetric()}

# Declared but intentionally unimplemented: needs a pretrained encoder.
UNIMPLEMENTED_METRICS = ("bert_score",)


def get_metric(name: str) -> MetricPort:
    if name in _METRICS:
        return _METRICS[name]
    if name in UNIMPLEMENTED_METRICS:
        raise MetricUnavailable(f"{name} has no registered scorer (requires a pretrained encoder)")
    raise MetricUnavailable(f"unknown metric {name!r}")


def register_metric(metric: MetricPort) -> None:
    _METRICS[metric.name] = metric
