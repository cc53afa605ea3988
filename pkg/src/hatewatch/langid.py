"""Language routing for {en, hi, hi_codemix}.

Two cheap, deterministic evidence signals decide the route: the fraction of
Devanagari letters (script detection for standard Hindi) and the hit-rate of
romanized-Hindi function words / profanity among Latin-script tokens (for
code-mixed Hindi, which is written in Latin script).  Thresholds live in the
service configuration; the defaults here separate the bundled per-language
sample files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .textnorm import LexiconSet, default_lexicons

__all__ = [
    "RoutingDecision",
    "detect",
    "DEFAULT_DEVANAGARI_THRESHOLD",
    "DEFAULT_CODEMIX_THRESHOLD",
]

DEFAULT_DEVANAGARI_THRESHOLD = 0.30
DEFAULT_CODEMIX_THRESHOLD = 0.15

_LATIN_WORD = re.compile(r"[A-Za-z][A-Za-z']*")


@dataclass(frozen=True)
class RoutingDecision:
    """One routed language plus the evidence that produced it."""

    language: str
    devanagari_fraction: float
    codemix_hit_rate: float
    devanagari_threshold: float
    codemix_threshold: float

    def __post_init__(self) -> None:
        if self.language not in ("en", "hi", "hi_codemix"):
            raise ValueError(f"unknown language {self.language!r}")
        for name in ("devanagari_fraction", "codemix_hit_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


def _devanagari_fraction(text: str) -> float:
    """Devanagari share of the alphabetic codepoints (0.0 if none)."""
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return 0.0
    dev = sum(1 for ch in letters if "ऀ" <= ch <= "ॿ")
    return dev / len(letters)


def _codemix_hit_rate(text: str, lexicons: LexiconSet) -> float:
    """Share of Latin-script word tokens found in the romanized-Hindi lexicon."""
    tokens = [t.lower() for t in _LATIN_WORD.findall(text)]
    if not tokens:
        return 0.0
    table = lexicons.function_words | set(lexicons.profanity.get("hi_codemix", {}))
    hits = sum(1 for t in tokens if t in table)
    return hits / len(tokens)


def detect(
    text: str,
    lexicons: LexiconSet = None,
    *,
    devanagari_threshold: float = DEFAULT_DEVANAGARI_THRESHOLD,
    codemix_threshold: float = DEFAULT_CODEMIX_THRESHOLD,
) -> RoutingDecision:
    """Route ``text`` to exactly one of en / hi / hi_codemix.

    Devanagari letter fraction ≥ the script threshold wins first; otherwise a
    codemix lexicon hit-rate ≥ its threshold; otherwise English.
    """
    if not text:
        raise ValueError("cannot route empty text")
    lexicons = lexicons or default_lexicons()

    dev_fraction = _devanagari_fraction(text)
    hit_rate = _codemix_hit_rate(text, lexicons)
    if dev_fraction >= devanagari_threshold:
        language = "hi"
    elif hit_rate >= codemix_threshold:
        language = "hi_codemix"
    else:
        language = "en"
    return RoutingDecision(
        language=language,
        devanagari_fraction=dev_fraction,
        codemix_hit_rate=hit_rate,
        devanagari_threshold=devanagari_threshold,
        codemix_threshold=codemix_threshold,
    )
