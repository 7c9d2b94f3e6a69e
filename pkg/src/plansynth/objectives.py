"""Reference numerical implementations of the training objectives.

The supervised loss is a per-category sum of response negative
log-likelihoods; the preference loss is the log-sigmoid of the scaled
policy/reference log-ratio margin between a chosen and a rejected
response; the mixed variant adds the supervised term weighted by a
coefficient. All of it is evaluated over a toy finite-vocabulary policy
whose per-context logits define an independent softmax for every
response token, which keeps analytic gradients small enough to certify
against central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import PlanSynthError
from .intent_graph import ResponseCategory

MAX_RESPONSE_TOKENS = 16
MAX_VOCAB = 64

DEFAULT_BETA = 0.4
DEFAULT_LAMBDA_SFT = 0.1

# Floor for the relative-error denominator in gradient checks: below this
# magnitude, central differences are dominated by float cancellation noise.
GRAD_CHECK_FLOOR = 1e-4


class UnknownResponseToken(PlanSynthError):
    """A response token is outside the policy vocabulary."""


@dataclass
class ToyPolicy:
    """Finite-vocabulary log-probability table standing in for a model.

    Each context id maps to one logit vector; a response's log-probability
    is the sum of per-token log-softmax values under that vector.
    """

    vocab: tuple[str, ...]
    logits: dict[str, np.ndarray]

    def __post_init__(self):
        if not 1 <= len(self.vocab) <= MAX_VOCAB:
            raise PlanSynthError(f"vocab size must be 1..{MAX_VOCAB}")
        if len(set(self.vocab)) != len(self.vocab):
            raise PlanSynthError("vocab has duplicate tokens")
        self._index = {tok: i for i, tok in enumerate(self.vocab)}
        self.logits = {ctx: np.asarray(v, dtype=np.float64) for ctx, v in self.logits.items()}
        for ctx, vec in self.logits.items():
            if vec.shape != (len(self.vocab),):
                raise PlanSynthError(f"logits for context {ctx!r} have shape {vec.shape}")

    def token_index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise UnknownResponseToken(f"token {token!r} not in vocabulary") from None

    def log_softmax(self, context: str) -> np.ndarray:
        if context not in self.logits:
            raise PlanSynthError(f"unknown context {context!r}")
        x = self.logits[context]
        m = float(np.max(x))
        return x - (m + math.log(float(np.sum(np.exp(x - m)))))

    def softmax(self, context: str) -> np.ndarray:
        return np.exp(self.log_softmax(context))

    def log_prob(self, context: str, response: Sequence[str]) -> float:
        if not 1 <= len(response) <= MAX_RESPONSE_TOKENS:
            raise PlanSynthError(f"response length must be 1..{MAX_RESPONSE_TOKENS}")
        ls = self.log_softmax(context)
        return float(sum(ls[self.token_index(t)] for t in response))

    def token_counts(self, response: Sequence[str]) -> np.ndarray:
        counts = np.zeros(len(self.vocab), dtype=np.float64)
        for t in response:
            counts[self.token_index(t)] += 1.0
        return counts

    def copy(self) -> "ToyPolicy":
        return ToyPolicy(vocab=self.vocab, logits={c: v.copy() for c, v in self.logits.items()})


@dataclass(frozen=True)
class TrainingConfig:
    beta: float = DEFAULT_BETA
    lambda_sft: float = DEFAULT_LAMBDA_SFT

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.lambda_sft < 0:
            raise ValueError("lambda_sft must be >= 0")


@dataclass(frozen=True)
class SftItem:
    context: str
    response: tuple[str, ...]
    category: ResponseCategory


@dataclass(frozen=True)
class PreferenceExample:
    context: str
    chosen: tuple[str, ...]
    rejected: tuple[str, ...]

    def __post_init__(self):
        if self.chosen == self.rejected:
            raise PlanSynthError("preference example needs chosen != rejected")


@dataclass
class LossReport:
    total: float
    per_category: dict[ResponseCategory, float] = field(default_factory=dict)


def sft_loss(policy: ToyPolicy, batch: Sequence[SftItem]) -> LossReport:
    """Summed negative log-likelihood of gold responses, kept per category."""
    per_category: dict[ResponseCategory, float] = {}
    for item in batch:
        nll = -policy.log_prob(item.context, item.response)
        per_category[item.category] = per_category.get(item.category, 0.0) + nll
    return LossReport(total=sum(per_category.values()), per_category=per_category)


def _softplus(z: float) -> float:
    # log(1 + e^z), stable for large |z|
    return max(z, 0.0) + math.log1p(math.exp(-abs(z)))


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def preference_margin(
    policy: ToyPolicy, reference: ToyPolicy, pair: PreferenceExample, beta: float
) -> float:
    chosen_ratio = policy.log_prob(pair.context, pair.chosen) - reference.log_prob(
        pair.context, pair.chosen
    )
    rejected_ratio = policy.log_prob(pair.context, pair.rejected) - reference.log_prob(
        pair.context, pair.rejected
    )
    return beta * (chosen_ratio - rejected_ratio)


def dpo_loss(
    policy: ToyPolicy,
    reference: ToyPolicy,
    pair: PreferenceExample,
    beta: float = DEFAULT_BETA,
) -> float:
    """-log sigmoid of the scaled chosen-vs-rejected log-ratio margin."""
    return _softplus(-preference_margin(policy, reference, pair, beta))


@dataclass
class DpoXLoss:
    total: float
    dpo: float
    sft: float
    category: ResponseCategory


def dpo_x_loss(
    policy: ToyPolicy,
    reference: ToyPolicy,
    pair: PreferenceExample,
    gold: Sequence[str],
    category: ResponseCategory,
    cfg: TrainingConfig = TrainingConfig(),
) -> DpoXLoss:
    """Preference loss plus lambda_sft times the same turn's supervised loss."""
    dpo = dpo_loss(policy, reference, pair, cfg.beta)
    sft = sft_loss(policy, [SftItem(pair.context, tuple(gold), category)]).total
    return DpoXLoss(total=dpo + cfg.lambda_sft * sft, dpo=dpo, sft=sft, category=category)


Gradient = dict[str, np.ndarray]


def _zero_grad(policy: ToyPolicy) -> Gradient:
    return {ctx: np.zeros(len(policy.vocab)) for ctx in policy.logits}


def sft_grad(policy: ToyPolicy, batch: Sequence[SftItem]) -> Gradient:
    grad = _zero_grad(policy)
    for item in batch:
        p = policy.softmax(item.context)
        counts = policy.token_counts(item.response)
        grad[item.context] += len(item.response) * p - counts
    return grad


def dpo_grad(
    policy: ToyPolicy, reference: ToyPolicy, pair: PreferenceExample, beta: float = DEFAULT_BETA
) -> Gradient:
    grad = _zero_grad(policy)
    margin = preference_margin(policy, reference, pair, beta)
    scale = _sigmoid(margin) - 1.0  # d(-log sigmoid(m))/dm
    p = policy.softmax(pair.context)
    c_w = policy.token_counts(pair.chosen)
    c_l = policy.token_counts(pair.rejected)
    d_margin = beta * ((c_w - len(pair.chosen) * p) - (c_l - len(pair.rejected) * p))
    grad[pair.context] += scale * d_margin
    return grad


def dpo_x_grad(
    policy: ToyPolicy,
    reference: ToyPolicy,
    pair: PreferenceExample,
    gold: Sequence[str],
    category: ResponseCategory,
    cfg: TrainingConfig = TrainingConfig(),
) -> Gradient:
    grad = dpo_grad(policy, reference, pair, cfg.beta)
    for ctx, g in sft_grad(policy, [SftItem(pair.context, tuple(gold), category)]).items():
        grad[ctx] += cfg.lambda_sft * g
    return grad


def grad_logits(kind: str, policy: ToyPolicy, reference: ToyPolicy | None, inputs, cfg: TrainingConfig) -> Gradient:
    """Analytic gradient of the named loss with respect to policy logits.

    kind: "sft" (inputs = batch of SftItem), "dpo" (inputs = PreferenceExample),
    or "dpo_x" (inputs = (PreferenceExample, gold tokens, category)).
    """
    if kind == "sft":
        return sft_grad(policy, inputs)
    if kind == "dpo":
        return dpo_grad(policy, reference, inputs, cfg.beta)
    if kind == "dpo_x":
        pair, gold, category = inputs
        return dpo_x_grad(policy, reference, pair, gold, category, cfg)
    raise PlanSynthError(f"unknown loss kind {kind!r}")


def loss_value(kind: str, policy: ToyPolicy, reference: ToyPolicy | None, inputs, cfg: TrainingConfig) -> float:
    if kind == "sft":
        return sft_loss(policy, inputs).total
    if kind == "dpo":
        return dpo_loss(policy, reference, inputs, cfg.beta)
    if kind == "dpo_x":
        pair, gold, category = inputs
        return dpo_x_loss(policy, reference, pair, gold, category, cfg).total
    raise PlanSynthError(f"unknown loss kind {kind!r}")


def finite_difference_grad(
    loss_fn: Callable[[ToyPolicy], float], policy: ToyPolicy, h: float = 1e-5
) -> Gradient:
    """Central-difference gradient over every (context, token) logit."""
    grad = _zero_grad(policy)
    work = policy.copy()
    for ctx in policy.logits:
        for v in range(len(policy.vocab)):
            original = work.logits[ctx][v]
            work.logits[ctx][v] = original + h
            plus = loss_fn(work)
            work.logits[ctx][v] = original - h
            minus = loss_fn(work)
            work.logits[ctx][v] = original
            grad[ctx][v] = (plus - minus) / (2.0 * h)
    return grad


def max_relative_error(analytic: Gradient, numeric: Gradient, floor: float = GRAD_CHECK_FLOOR) -> float:
    """Componentwise |a - n| / max(|a|, |n|, floor), maximized."""
    worst = 0.0
    for ctx in analytic:
        a, n = analytic[ctx], numeric[ctx]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def random_instance(seed: int, *, n_contexts: int = 2, vocab_size: int = 8,
                    max_len: int = 5, identical: bool = False):
    """A seeded random (policy, reference, pair, gold, category) tuple.

    With identical=True the reference is an exact copy of the policy, so
    the preference margin is exactly zero.
    """
    rng = np.random.default_rng(seed)
    vocab = tuple(f"t{i}" for i in range(vocab_size))
    contexts = [f"c{i}" for i in range(n_contexts)]
    policy = ToyPolicy(
        vocab=vocab, logits={c: rng.normal(0.0, 2.0, vocab_size) for c in contexts}
    )
    if identical:
        reference = policy.copy()
    else:
        reference = ToyPolicy(
            vocab=vocab, logits={c: rng.normal(0.0, 2.0, vocab_size) for c in contexts}
        )
    ctx = contexts[int(rng.integers(n_contexts))]

    def draw_response():
        length = int(rng.integers(1, max_len + 1))
        return tuple(vocab[int(rng.integers(vocab_size))] for _ in range(length))

    chosen = draw_response()
    rejected = draw_response()
    while rejected == chosen:
        rejected = draw_response()
    gold = chosen
    category = list(ResponseCategory)[int(rng.integers(len(ResponseCategory)))]
    return policy, reference, PreferenceExample(ctx, chosen, rejected), gold, category
