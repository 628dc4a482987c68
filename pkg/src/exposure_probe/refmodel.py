"""Character n-gram language model used as a desk-scale scorer.

Additively smoothed conditional distributions with recursive context
shortening for unseen contexts. Deterministic to train, score, and
sample, which makes fully reproducible end-to-end pipeline experiments
possible without any external model.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .genmatch import GenerationRecord

DEFAULT_ORDER = 8
DEFAULT_ALPHA = 0.1


def _substream(seed: int, pair_id: str, sample_index: int) -> random.Random:
    """Independent, reproducible RNG per (seed, pair, completion)."""
    key = f"{seed}:{pair_id}:{sample_index}".encode("utf-8")
    return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "big"))


@dataclass
class NGramModel:
    """Counts of next characters for every context of length 0..order."""

    order: int = DEFAULT_ORDER
    alpha: float = DEFAULT_ALPHA
    seed: int = 0
    counts: dict[str, dict[str, int]] = field(default_factory=dict, repr=False)
    totals: dict[str, int] = field(default_factory=dict, repr=False)
    vocabulary: tuple[str, ...] = ()

    def probability(self, context: str, char: str) -> float:
        """P(char | context) with additive smoothing.

        The context is truncated to the model order, then shortened one
        character at a time until a trained context is found; the empty
        context always exists for a trained model.
        """
        ctx = context[-self.order :] if self.order else ""
        while ctx and ctx not in self.counts:
            ctx = ctx[1:]
        following = self.counts.get(ctx, {})
        total = self.totals.get(ctx, 0)
        denom = total + self.alpha * len(self.vocabulary)
        return (following.get(char, 0) + self.alpha) / denom

    def distribution(self, context: str) -> list[tuple[str, float]]:
        """Smoothed distribution over the vocabulary, in vocabulary order."""
        ctx = context[-self.order :] if self.order else ""
        while ctx and ctx not in self.counts:
            ctx = ctx[1:]
        following = self.counts.get(ctx, {})
        total = self.totals.get(ctx, 0)
        denom = total + self.alpha * len(self.vocabulary)
        return [(ch, (following.get(ch, 0) + self.alpha) / denom) for ch in self.vocabulary]

    def to_json(self) -> str:
        payload = {
            "order": self.order,
            "alpha": self.alpha,
            "seed": self.seed,
            "vocabulary": "".join(self.vocabulary),
            "counts": self.counts,
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "NGramModel":
        payload = json.loads(text)
        model = cls(
            order=payload["order"],
            alpha=payload["alpha"],
            seed=payload["seed"],
            counts=payload["counts"],
            vocabulary=tuple(payload["vocabulary"]),
        )
        model.totals = {ctx: sum(next_counts.values()) for ctx, next_counts in model.counts.items()}
        return model

    def save(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def train(
    documents: Iterable[tuple[str, str]],
    order: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
) -> NGramModel:
    """Count every (context, next char) occurrence for all context
    lengths up to ``order``; document order does not matter."""
    if order < 0:
        raise ValueError("order must be non-negative")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    counts: dict[str, dict[str, int]] = {}
    vocab: set[str] = set()
    trained = False
    for _doc_id, text in documents:
        trained = True
        vocab.update(text)
        for i, ch in enumerate(text):
            for ctx_len in range(min(order, i) + 1):
                ctx = text[i - ctx_len : i]
                bucket = counts.setdefault(ctx, {})
                bucket[ch] = bucket.get(ch, 0) + 1
    if not trained:
        raise ValueError("training corpus is empty")
    model = NGramModel(
        order=order,
        alpha=alpha,
        seed=seed,
        counts=counts,
        vocabulary=tuple(sorted(vocab)),
    )
    model.totals = {ctx: sum(next_counts.values()) for ctx, next_counts in counts.items()}
    return model


def score_sequence(model: NGramModel, context: str, target: str) -> tuple[list[str], list[float]]:
    """Per-character conditional probabilities of ``target`` after ``context``.

    Returns (tokens, probs) in the scorer wire shape; each character is
    conditioned on the context plus the previously scored prefix.
    """
    if not target:
        raise ValueError("target must be non-empty")
    tokens: list[str] = []
    probs: list[float] = []
    running = context
    for ch in target:
        tokens.append(ch)
        probs.append(model.probability(running, ch))
        running += ch
    return tokens, probs


def _sample_next(
    model: NGramModel,
    context: str,
    temperature: float,
    top_p: float,
    rng: random.Random,
) -> str:
    dist = model.distribution(context)
    if temperature <= 0.0:
        # Greedy limit: deterministic argmax with lexicographic tie-break.
        return max(dist, key=lambda item: (item[1], item[0]))[0]
    inv_t = 1.0 / temperature
    weights = [(ch, math.exp(math.log(p) * inv_t)) for ch, p in dist]
    total = sum(w for _ch, w in weights)
    scaled = [(ch, w / total) for ch, w in weights]
    # Nucleus: keep the smallest probability mass >= top_p; the token
    # that crosses the boundary is included.
    scaled.sort(key=lambda item: (-item[1], item[0]))
    kept: list[tuple[str, float]] = []
    mass = 0.0
    for ch, p in scaled:
        kept.append((ch, p))
        mass += p
        if mass >= top_p:
            break
    draw = rng.random() * mass
    cumulative = 0.0
    for ch, p in kept:
        cumulative += p
        if draw < cumulative:
            return ch
    return kept[-1][0]


def sample_completions(
    model: NGramModel,
    context: str,
    pair_id: str,
    n_samples: int = 5,
    max_chars: int = 64,
    temperature: float = 0.8,
    top_p: float = 0.95,
    seed: int = 0,
    context_limit: int = 2048,
) -> GenerationRecord:
    """Draw independent completions via temperature-scaled nucleus sampling.

    Bit-reproducible: each completion uses an RNG substream derived from
    (seed, pair_id, sample index). ``temperature`` 0 selects the greedy
    argmax continuation.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if not (0.0 < top_p <= 1.0):
        raise ValueError("top_p must be in (0, 1]")
    prompt = context[-context_limit:] if context_limit else context
    completions: list[str] = []
    for index in range(n_samples):
        rng = _substream(seed, pair_id, index)
        running = prompt
        generated: list[str] = []
        for _ in range(max_chars):
            ch = _sample_next(model, running, temperature, top_p, rng)
            generated.append(ch)
            running += ch
        completions.append("".join(generated))
    return GenerationRecord(
        pair_id=pair_id,
        completions=tuple(completions),
        decoding={
            "temperature": temperature,
            "top_p": top_p,
            "max_new_tokens": max_chars,
            "context_limit": context_limit,
        },
    )
