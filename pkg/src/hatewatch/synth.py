"""Synthetic-corpus generator.

Stands in for the non-redistributable source datasets: emits unified-format
records whose labels follow the annotation-guideline rules by construction —
hate rows carry a planted slur, abusive rows carry profanity and nothing
stronger, neither rows are built purely from neutral vocabulary.  Every
record is verified against the weak labeler before it is returned, so the
generator can never drift from the rules it claims to encode.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import UnifiedRecord, weak_label
from .textnorm import LANGUAGES, LexiconSet, default_lexicons

__all__ = ["SynthSpec", "generate_synthetic_corpus"]

SOURCE_ID = "synth"


@dataclass(frozen=True)
class SynthSpec:
    """Per-language record counts plus a (hate, abusive, neither) mixture."""

    counts: dict
    mixture: tuple = (0.25, 0.15, 0.60)
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.counts:
            raise ValueError("counts must name at least one language")
        for language, count in self.counts.items():
            if language not in LANGUAGES:
                raise ValueError(f"unknown language {language!r}")
            if count <= 0:
                raise ValueError(f"count for {language!r} must be positive")
        if len(self.mixture) != 3 or any(m < 0 for m in self.mixture):
            raise ValueError("mixture must be three non-negative fractions")
        if abs(sum(self.mixture) - 1.0) > 1e-9:
            raise ValueError("mixture must sum to 1")

    def class_counts(self, total: int) -> tuple:
        """(n_hate, n_abusive, n_neither) summing exactly to ``total``."""
        n_hate = int(total * self.mixture[0] + 0.5)
        n_abusive = int(total * self.mixture[1] + 0.5)
        n_neither = total - n_hate - n_abusive
        if n_neither < 0:
            raise ValueError("mixture rounding produced a negative class count")
        return n_hate, n_abusive, n_neither


def _compose(rng: random.Random, lead: list, neutral: list, n_lead: int) -> str:
    words = rng.sample(lead, k=min(n_lead, len(lead)))
    words += rng.choices(neutral, k=rng.randint(2, 6))
    rng.shuffle(words)
    return " ".join(words)


def _decorate(rng: random.Random, text: str, neutral: list, language: str) -> str:
    """Occasional social-media texture: a mention or a benign hashtag."""
    if language == "hi":
        return text
    if rng.random() < 0.20:
        text = f"@user{rng.randint(1, 999)} {text}"
    if rng.random() < 0.15:
        text = f"{text} #{rng.choice(neutral)}"
    return text


def generate_synthetic_corpus(spec: SynthSpec, lexicons: LexiconSet = None) -> list:
    """Deterministic unified-format records for the requested spec."""
    lexicons = lexicons or default_lexicons()
    records = []
    rid = 0
    for language in LANGUAGES:
        if language not in spec.counts:
            continue
        total = spec.counts[language]
        rng = random.Random(f"{spec.seed}|{language}")
        slurs = sorted(lexicons.slurs[language])
        profane = sorted(lexicons.profanity[language])
        neutral = sorted(lexicons.neutral[language])
        n_hate, n_abusive, n_neither = spec.class_counts(total)

        rows = []
        for _ in range(n_hate):
            text = _compose(rng, slurs, neutral, rng.randint(1, 2))
            rows.append((text, "hate"))
        for _ in range(n_abusive):
            text = _compose(rng, profane, neutral, rng.randint(1, 2))
            rows.append((text, "abusive"))
        for _ in range(n_neither):
            text = " ".join(rng.choices(neutral, k=rng.randint(3, 8)))
            rows.append((text, "neither"))
        rng.shuffle(rows)

        for text, label in rows:
            text = _decorate(rng, text, neutral, language)
            got = weak_label(text, lexicons)
            if got != label:
                raise ValueError(
                    f"generator produced a record the weak labeler calls {got!r} "
                    f"instead of {label!r}: {text!r}"
                )
            records.append(UnifiedRecord(rid, text, label, language, SOURCE_ID))
            rid += 1
    return records
