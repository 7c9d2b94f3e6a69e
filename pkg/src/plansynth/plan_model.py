"""Procedural plans and their knowledge sidecars.

A plan is an ordered sequence of steps the user executes (a recipe or a
DIY task). The sidecar carries everything the assistant can ground a
non-navigational answer in: per-step QA pairs, per-step fun facts, an
entity-definition dictionary, an ingredient/tool substitution database,
and the set of corpus-rare resources eligible for replacement requests.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PlanSynthError

log = logging.getLogger(__name__)

DOMAINS = ("cooking", "diy")

# A resource is "rare" when it occurs in at most this many plans corpus-wide.
RARE_RESOURCE_MAX_OCCURRENCES = 4

MIN_RECOMMENDED_STEPS = 3


class ParseError(PlanSynthError):
    """The file is not valid plan/sidecar JSON."""


class ValidationError(PlanSynthError):
    """The file parsed but violates a plan invariant."""


class StepOutOfRange(PlanSynthError):
    """A step index outside 1..k was requested."""


@dataclass(frozen=True)
class PlanStep:
    index: int
    text: str
    entities: frozenset[str] = frozenset()
    resources: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ProceduralPlan:
    id: str
    title: str
    domain: str
    steps: tuple[PlanStep, ...]
    all_resources: frozenset[str]

    @property
    def k(self) -> int:
        return len(self.steps)

    def step(self, index: int) -> PlanStep:
        """Return the 1-based step, or raise StepOutOfRange."""
        if not 1 <= index <= self.k:
            raise StepOutOfRange(f"step {index} outside 1..{self.k} for plan {self.id!r}")
        return self.steps[index - 1]


@dataclass
class KnowledgeSidecar:
    qa_pairs: dict[int, list[tuple[str, str]]] = field(default_factory=dict)
    fun_facts: dict[int, list[str]] = field(default_factory=dict)
    definitions: dict[str, str] = field(default_factory=dict)
    substitutions: dict[str, list[str]] = field(default_factory=dict)
    rare_resources: set[str] = field(default_factory=set)


def _lower_set(values, what: str) -> frozenset[str]:
    out = set()
    for v in values:
        if not isinstance(v, str) or not v.strip():
            raise ValidationError(f"{what} entries must be non-empty strings, got {v!r}")
        out.add(v.strip().lower())
    return frozenset(out)


def validate_plan(plan: ProceduralPlan) -> ProceduralPlan:
    """Check every plan invariant; warn (not fail) below 3 steps."""
    if not plan.steps:
        raise ValidationError(f"plan {plan.id!r} has no steps")
    for pos, step in enumerate(plan.steps, start=1):
        if step.index != pos:
            raise ValidationError(
                f"plan {plan.id!r}: step indices must be contiguous 1..k, "
                f"found {step.index} at position {pos}"
            )
        if not step.text.strip():
            raise ValidationError(f"plan {plan.id!r}: step {pos} has empty text")
    if plan.domain not in DOMAINS:
        raise ValidationError(f"plan {plan.id!r}: unknown domain {plan.domain!r}")
    used = set().union(*(s.resources for s in plan.steps)) if plan.steps else set()
    if not used <= plan.all_resources:
        raise ValidationError(
            f"plan {plan.id!r}: all_resources is missing {sorted(used - plan.all_resources)}"
        )
    if plan.k < MIN_RECOMMENDED_STEPS:
        log.warning("plan %s has fewer than %d steps (k=%d)", plan.id, MIN_RECOMMENDED_STEPS, plan.k)
    return plan


def plan_from_dict(doc: dict) -> ProceduralPlan:
    try:
        steps = tuple(
            PlanStep(
                index=int(s["index"]),
                text=str(s["text"]),
                entities=_lower_set(s.get("entities", ()), "entities"),
                resources=_lower_set(s.get("resources", ()), "resources"),
            )
            for s in doc["steps"]
        )
        if "all_resources" in doc:
            all_resources = _lower_set(doc["all_resources"], "all_resources")
        else:
            all_resources = frozenset().union(*(s.resources for s in steps)) if steps else frozenset()
        plan = ProceduralPlan(
            id=str(doc["id"]),
            title=str(doc["title"]),
            domain=str(doc["domain"]),
            steps=steps,
            all_resources=all_resources,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed plan document: {exc}") from exc
    return validate_plan(plan)


def plan_to_dict(plan: ProceduralPlan) -> dict:
    return {
        "id": plan.id,
        "title": plan.title,
        "domain": plan.domain,
        "steps": [
            {
                "index": s.index,
                "text": s.text,
                "entities": sorted(s.entities),
                "resources": sorted(s.resources),
            }
            for s in plan.steps
        ],
        "all_resources": sorted(plan.all_resources),
    }


def load_plan(path: str | Path) -> ProceduralPlan:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse plan file {path}: {exc}") from exc
    return plan_from_dict(doc)


def save_plan(plan: ProceduralPlan, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(plan_to_dict(plan), sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def sidecar_from_dict(doc: dict, plan: ProceduralPlan | None = None) -> KnowledgeSidecar:
    try:
        sidecar = KnowledgeSidecar(
            qa_pairs={
                int(k): [(str(q), str(a)) for q, a in pairs]
                for k, pairs in doc.get("qa_pairs", {}).items()
            },
            fun_facts={int(k): [str(f) for f in v] for k, v in doc.get("fun_facts", {}).items()},
            definitions={str(k).lower(): str(v) for k, v in doc.get("definitions", {}).items()},
            substitutions={
                str(k).lower(): [str(a).lower() for a in v]
                for k, v in doc.get("substitutions", {}).items()
            },
            rare_resources={str(r).lower() for r in doc.get("rare_resources", ())},
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed sidecar document: {exc}") from exc
    return validate_sidecar(sidecar, plan)


def validate_sidecar(sidecar: KnowledgeSidecar, plan: ProceduralPlan | None = None) -> KnowledgeSidecar:
    for resource, alts in sidecar.substitutions.items():
        if not alts:
            raise ValidationError(f"substitution list for {resource!r} is empty")
    if plan is not None:
        for mapping_name in ("qa_pairs", "fun_facts"):
            for step_index in getattr(sidecar, mapping_name):
                if not 1 <= step_index <= plan.k:
                    raise ValidationError(
                        f"sidecar {mapping_name} key {step_index} outside plan {plan.id!r} bounds 1..{plan.k}"
                    )
    return sidecar


def sidecar_to_dict(sidecar: KnowledgeSidecar) -> dict:
    return {
        "qa_pairs": {str(k): [[q, a] for q, a in v] for k, v in sorted(sidecar.qa_pairs.items())},
        "fun_facts": {str(k): list(v) for k, v in sorted(sidecar.fun_facts.items())},
        "definitions": dict(sorted(sidecar.definitions.items())),
        "substitutions": {k: list(v) for k, v in sorted(sidecar.substitutions.items())},
        "rare_resources": sorted(sidecar.rare_resources),
    }


def load_sidecar(path: str | Path, plan: ProceduralPlan | None = None) -> KnowledgeSidecar:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse sidecar file {path}: {exc}") from exc
    return sidecar_from_dict(doc, plan)


def load_substitutions_tsv(path: str | Path) -> dict[str, list[str]]:
    """Read a two-column TSV (resource, alternative) into a substitution DB."""
    subs: dict[str, list[str]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 tab-separated columns, got {len(parts)}")
        resource, alternative = (p.strip().lower() for p in parts)
        subs.setdefault(resource, [])
        if alternative not in subs[resource]:
            subs[resource].append(alternative)
    return subs


def compute_rare_resources(
    plans, max_occurrences: int = RARE_RESOURCE_MAX_OCCURRENCES
) -> set[str]:
    """Resources used by at most `max_occurrences` plans corpus-wide."""
    counts: Counter[str] = Counter()
    for plan in plans:
        counts.update(plan.all_resources)
    return {r for r, n in counts.items() if n <= max_occurrences}


def replaceable_candidates(
    plan: ProceduralPlan, sidecar: KnowledgeSidecar, step: int
) -> set[str]:
    """Resources of a step that are both substitutable and corpus-rare."""
    resources = plan.step(step).resources
    return set(resources) & set(sidecar.substitutions) & sidecar.rare_resources


def extract_entities(step_text: str, definitions: dict[str, str]) -> set[str]:
    """Every definitions key occurring in the text as whole words.

    Matching is case-insensitive with word boundaries, so a multi-word
    key must appear as the full phrase, while a shorter key contained in
    a longer phrase still matches on its own word boundaries.
    """
    found = set()
    lowered = step_text.lower()
    for key in sorted(definitions, key=len, reverse=True):
        if re.search(r"(?<!\w)" + re.escape(key.lower()) + r"(?!\w)", lowered):
            found.add(key)
    return found


@dataclass
class PlanCorpus:
    """All plans and sidecars of a run, keyed by plan id."""

    plans: dict[str, ProceduralPlan]
    sidecars: dict[str, KnowledgeSidecar]

    @property
    def plan_ids(self) -> list[str]:
        return sorted(self.plans)


def load_corpus(
    plans_dir: str | Path,
    sidecars_dir: str | Path,
    substitutions_tsv: str | Path | None = None,
    rare_max: int = RARE_RESOURCE_MAX_OCCURRENCES,
) -> PlanCorpus:
    """Load a plan directory plus matching sidecars (one JSON per plan id).

    rare_resources is recomputed corpus-wide here; a substitution TSV, if
    given, is merged into every sidecar's substitution DB.
    """
    plans_dir, sidecars_dir = Path(plans_dir), Path(sidecars_dir)
    plans: dict[str, ProceduralPlan] = {}
    for path in sorted(plans_dir.glob("*.json")):
        plan = load_plan(path)
        if plan.id in plans:
            raise ValidationError(f"duplicate plan id {plan.id!r} in {path}")
        plans[plan.id] = plan
    if not plans:
        raise ValidationError(f"no plan files found in {plans_dir}")

    extra_subs = load_substitutions_tsv(substitutions_tsv) if substitutions_tsv else {}
    rare = compute_rare_resources(plans.values(), rare_max)

    sidecars: dict[str, KnowledgeSidecar] = {}
    for plan_id, plan in plans.items():
        sidecar_path = sidecars_dir / f"{plan_id}.json"
        sidecar = load_sidecar(sidecar_path, plan) if sidecar_path.exists() else KnowledgeSidecar()
        for resource, alts in extra_subs.items():
            merged = sidecar.substitutions.setdefault(resource, [])
            for alt in alts:
                if alt not in merged:
                    merged.append(alt)
        sidecar.rare_resources = set(rare)
        sidecars[plan_id] = sidecar
    return PlanCorpus(plans=plans, sidecars=sidecars)
