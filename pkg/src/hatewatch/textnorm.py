"""Deterministic social-text normalization, annotation, and tokenization.

The pipeline mirrors the usual preprocessing applied to noisy social-media
text: entity spans (urls, mentions, numbers, ...) collapse to placeholders,
surface quirks (ALLCAPS, elooongation, f**k-style masking) become explicit
annotation tokens, contractions/slang/emoticons expand to plain words, and
hashtags are unpacked into word lists by a unigram language model.

Everything here is pure and deterministic: same input, same output, on any
platform.  Lexicons are plain TSV files bundled with the package; once
loaded, a :class:`LexiconSet` is immutable and safe to share across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Token",
    "NormConfig",
    "LexiconSet",
    "ProfanityEntry",
    "load_lexicons",
    "default_lexicons",
    "normalize_entities",
    "annotate_markers",
    "expand_contractions",
    "expand_emoticons",
    "segment_hashtag",
    "tokenize",
    "pipeline",
    "ENTITY_CLASSES",
    "ANNOTATION_CLASSES",
    "PLACEHOLDER_TOKENS",
    "ANNOTATION_TOKENS",
    "LANGUAGES",
]

LANGUAGES = ("en", "hi", "hi_codemix")

# Entity classes in match-priority order.  The order matters: at a given
# position the combined regex tries alternatives left to right, so e.g. an
# email wins over the bare @mention embedded in it.
ENTITY_CLASSES = (
    "url",
    "email",
    "user",
    "percent",
    "money",
    "phone",
    "time",
    "date",
    "number",
)

ANNOTATION_CLASSES = ("allcaps", "elongated", "repeated", "emphasis", "censored")

PLACEHOLDER_TOKENS = frozenset(f"<{name}>" for name in ENTITY_CLASSES)
ANNOTATION_TOKENS = frozenset(f"<{name}>" for name in ANNOTATION_CLASSES)

# Word characters: \w plus the Devanagari block (letters, matras, digits),
# excluding danda/double danda which must surface as standalone tokens.
# Python's re does not class combining matras as \w, so without this a
# Hindi word like पढ़ाई would shatter into fragments.
_WC = r"[\wऀ-ॣ०-ॿ]"

_TOKEN_RE = re.compile(
    r"<(?:" + "|".join(ENTITY_CLASSES + ANNOTATION_CLASSES) + r")>"
    rf"|#{_WC}+"
    rf"|{_WC}+(?:['’-]{_WC}+)*"
    r"|\S"
)

# --- entity normalization ----------------------------------------------------
#
# One combined alternation.  The first branch re-matches placeholders already
# present so a second pass leaves them alone (idempotence).  Digit-led
# patterns carry the lookbehind (?<![\w<#]) so `<3`, hashtag bodies and
# in-word digits (covid19) are never chewed up.

_ENTITY_RE = re.compile(
    r"(?P<skip><(?:" + "|".join(ENTITY_CLASSES + ANNOTATION_CLASSES) + r")>)"
    r"|(?P<url>(?:https?://|www\.)[^\s<>]*[^\s<>.,;:!?)\"'])"
    r"|(?P<email>[\w.+-]+@[\w-]+\.[\w.-]*\w)"
    r"|(?P<user>@\w+)"
    r"|(?P<percent>(?<![\w<#])\d+(?:\.\d+)?\s?%)"
    r"|(?P<money>[$£€₹]\s?\d+(?:[.,]\d+)*"
    r"|(?<![\w<#])\d+(?:[.,]\d+)*\s?(?:dollars|bucks|rupees|rs|usd|inr|eur)\b)"
    r"|(?P<phone>\+\d(?:[\s().-]?\d){9,13}|(?<![\w<#])\d(?:[().-]?\d){9,13}(?!\w))"
    r"|(?P<time>(?<![\w<#])\d{1,2}:\d{2}(?::\d{2})?(?:\s?(?:am|pm))?(?!\w))"
    r"|(?P<date>(?<![\w<#])(?:\d{4}[-/.]\d{1,2}[-/.]\d{1,2}"
    r"|\d{1,2}[-/.]\d{1,2}[-/.]\d{2,4})(?!\w))"
    r"|(?P<number>(?<![\w<#])\d+(?:[.,]\d+)*(?!\w))",
    re.IGNORECASE,
)

_ELONGATION_RE = re.compile(rf"({_WC})\1{{2,}}")
_EMPHASIS_RE = re.compile(r"\*(\w[\w'’-]*)\*([^\w\s*]*)")
_CENSORED_RE = re.compile(r"([\w*]*\*[\w*]*)([^\w\s*]*)")
_STRIP_NONWORD_RE = re.compile(rf"[^{_WC[1:-1]}]+")
_TRAIL_PUNCT_RE = re.compile(r"(.*?)([^\w'’]*)$", re.DOTALL)
_HASHTAG_RE = re.compile(rf"#({_WC}+)(.*)$", re.DOTALL)


@dataclass(frozen=True)
class Token:
    """One unit of the final token stream.

    ``kind`` records provenance: ordinary ``word``, an entity ``placeholder``
    such as ``<url>``, a surface ``annotation`` such as ``<allcaps>``, a piece
    of an unpacked hashtag, or a word produced by emoticon/slang expansion.
    """

    surface: str
    kind: str = "word"

    def __post_init__(self) -> None:
        if self.kind not in (
            "word",
            "placeholder",
            "annotation",
            "hashtag_segment",
            "emoticon_expansion",
        ):
            raise ValueError(f"unknown token kind: {self.kind!r}")


@dataclass(frozen=True)
class NormConfig:
    """Total configuration of the pipeline: every class explicitly on/off."""

    language: str = "en"
    entities: frozenset = frozenset(ENTITY_CLASSES)
    annotations: frozenset = frozenset(ANNOTATION_CLASSES)
    contractions: bool = True
    emoticons: bool = True
    hashtags: bool = True
    max_tokens: int = 128

    def __post_init__(self) -> None:
        if self.language not in LANGUAGES:
            raise ValueError(f"unknown language: {self.language!r}")
        unknown = set(self.entities) - set(ENTITY_CLASSES)
        if unknown:
            raise ValueError(f"unknown entity classes: {sorted(unknown)}")
        unknown = set(self.annotations) - set(ANNOTATION_CLASSES)
        if unknown:
            raise ValueError(f"unknown annotation classes: {sorted(unknown)}")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        # normalize to frozenset so configs hash and compare cleanly
        object.__setattr__(self, "entities", frozenset(self.entities))
        object.__setattr__(self, "annotations", frozenset(self.annotations))


@dataclass(frozen=True)
class ProfanityEntry:
    """A profane word with its canonical form and severity score in [0, ~1]."""

    canonical: str
    score: float


@dataclass(frozen=True)
class LexiconSet:
    """All bundled lexicons, loaded once and then immutable.

    Language-keyed mappings use the tags ``en``, ``hi``, ``hi_codemix``.
    """

    contractions: Mapping[str, str]
    emoticons: Mapping[str, str]
    slang: Mapping[str, str]
    profanity: Mapping[str, Mapping[str, ProfanityEntry]]
    slurs: Mapping[str, frozenset]
    stereotypes: Mapping[str, tuple]
    hashtags_problematic: frozenset
    unigrams: Mapping[str, int]
    unigram_total: int = field(default=0)
    function_words: frozenset = frozenset()
    neutral: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.unigram_total == 0 and self.unigrams:
            object.__setattr__(self, "unigram_total", sum(self.unigrams.values()))
        for count in self.unigrams.values():
            if count <= 0:
                raise ValueError("unigram frequencies must be > 0")
        for table in self.profanity.values():
            for entry in table.values():
                if entry.score < 0:
                    raise ValueError("profanity scores must be >= 0")


def _read_tsv(path: Path) -> list:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#\t"):
                continue
            rows.append(line.split("\t"))
    return rows


def _kv(rows: Iterable) -> dict:
    table = {}
    for row in rows:
        if len(row) < 2:
            raise ValueError(f"expected key<TAB>value row, got {row!r}")
        table[row[0]] = row[1]
    return table


def _profanity(rows: Iterable) -> dict:
    table = {}
    for row in rows:
        if len(row) != 3:
            raise ValueError(f"expected word<TAB>canonical<TAB>score, got {row!r}")
        table[row[0]] = ProfanityEntry(canonical=row[1], score=float(row[2]))
    return table


def load_lexicons(root=None) -> LexiconSet:
    """Load every bundled lexicon (or the same file layout under ``root``)."""
    if root is None:
        root = Path(str(resources.files("hatewatch.data").joinpath("lexicons")))
    else:
        root = Path(root)

    def rows(name):
        return _read_tsv(root / f"{name}.tsv")

    unigrams = {w: int(c) for w, c in (r[:2] for r in rows("unigrams_en"))}
    return LexiconSet(
        contractions=_kv(rows("contractions_en")),
        emoticons=_kv(rows("emoticons")),
        slang=_kv(rows("slang_en")),
        profanity={
            "en": _profanity(rows("profanity_en")),
            "hi": _profanity(rows("profanity_hi")),
            "hi_codemix": _profanity(rows("profanity_codemix")),
        },
        slurs={
            "en": frozenset(r[0] for r in rows("slurs_en")),
            "hi": frozenset(r[0] for r in rows("slurs_hi")),
            "hi_codemix": frozenset(r[0] for r in rows("slurs_codemix")),
        },
        stereotypes={
            "en": tuple(r[0] for r in rows("stereotypes_en")),
            "hi": tuple(r[0] for r in rows("stereotypes_hi")),
            "hi_codemix": tuple(r[0] for r in rows("stereotypes_codemix")),
        },
        hashtags_problematic=frozenset(r[0].lower() for r in rows("hashtags_problematic")),
        unigrams=unigrams,
        function_words=frozenset(r[0] for r in rows("function_words_codemix")),
        neutral={
            "en": tuple(r[0] for r in rows("neutral_en")),
            "hi": tuple(r[0] for r in rows("neutral_hi")),
            "hi_codemix": tuple(r[0] for r in rows("neutral_codemix")),
        },
    )


@lru_cache(maxsize=1)
def default_lexicons() -> LexiconSet:
    """The packaged lexicons, loaded once per process."""
    return load_lexicons()


# --- stage 1: entity placeholders -------------------------------------------

def normalize_entities(text: str, enabled=None) -> str:
    """Replace entity spans with ``<url>``-style placeholders.

    Idempotent: placeholders already present are matched by a skip branch and
    re-emitted verbatim, so ``f(f(x)) == f(x)``.
    """
    if enabled is None:
        enabled_set = frozenset(ENTITY_CLASSES)
    else:
        enabled_set = frozenset(enabled)

    def repl(m):
        if m.lastgroup == "skip" or m.lastgroup not in enabled_set:
            return m.group(0)
        return f"<{m.lastgroup}>"

    return _ENTITY_RE.sub(repl, text)


# --- stage 2: surface annotations --------------------------------------------

def _is_marker(token: str) -> bool:
    return token in PLACEHOLDER_TOKENS or token in ANNOTATION_TOKENS


def _collapse_runs(word: str, to: int) -> str:
    return _ELONGATION_RE.sub(lambda m: m.group(1) * to, word)


def _annotate_token(token: str, enabled, unigrams) -> list:
    """Expand one raw whitespace token into annotated pieces (pre-lowercase)."""
    if _is_marker(token) or token.startswith("#") or token.startswith("<"):
        return [token]

    pieces = [token]
    markers = []

    if "emphasis" in enabled:
        m = _EMPHASIS_RE.fullmatch(pieces[0])
        if m:
            pieces = [m.group(1)] + ([m.group(2)] if m.group(2) else [])
            markers.append("<emphasis>")

    if "censored" in enabled:
        m = _CENSORED_RE.fullmatch(pieces[0])
        if m and any(c.isalpha() for c in m.group(1)):
            out = ["<censored>"]
            if m.group(2):
                out.append(m.group(2))
            return out + markers

    if "allcaps" in enabled:
        letters = [c for c in pieces[0] if c.isalpha()]
        if len(letters) >= 2 and all(c.isupper() for c in letters):
            markers.append("<allcaps>")

    if "elongated" in enabled and _ELONGATION_RE.search(pieces[0]):
        collapsed = _collapse_runs(pieces[0], 1)
        lookup = _STRIP_NONWORD_RE.sub("", collapsed).lower()
        if lookup not in unigrams:
            collapsed = _collapse_runs(pieces[0], 2)
        pieces[0] = collapsed
        markers.append("<elongated>")

    return pieces + markers


def annotate_markers(text: str, lexicon=None, enabled=None) -> str:
    """Make surface quirks explicit and lowercase the text.

    ``HELLO`` becomes ``hello <allcaps>``, ``sooooo`` becomes ``so
    <elongated>`` (runs collapse to 1, or to 2 when the collapsed form is
    out-of-lexicon), identical consecutive tokens collapse with
    ``<repeated>``, ``*word*`` becomes ``word <emphasis>``, and ``f**k``
    style maskings are replaced outright by ``<censored>``.
    """
    lex = lexicon if lexicon is not None else default_lexicons()
    enabled_set = frozenset(ANNOTATION_CLASSES) if enabled is None else frozenset(enabled)

    raw = text.split()
    out = []
    i = 0
    while i < len(raw):
        j = i
        while j < len(raw) and raw[j] == raw[i]:
            j += 1
        pieces = _annotate_token(raw[i], enabled_set, lex.unigrams)
        if j - i >= 2 and "repeated" in enabled_set and not _is_marker(raw[i]):
            pieces = pieces + ["<repeated>"]
            i = j
        else:
            i += 1
        out.extend(pieces)

    return " ".join(tok if _is_marker(tok) else tok.lower() for tok in out)


# --- stages 3-4: contractions, emoticons, slang -------------------------------

def _split_trailing(token: str):
    m = _TRAIL_PUNCT_RE.fullmatch(token)
    return (m.group(1), m.group(2)) if m else (token, "")


def expand_contractions(text: str, lexicon=None) -> str:
    """Expand contraction keys (``can't`` → ``cannot``); non-keys untouched."""
    lex = lexicon if lexicon is not None else default_lexicons()
    table = lex.contractions if isinstance(lex, LexiconSet) else lex
    out = []
    for token in text.split():
        core, trail = _split_trailing(token)
        expansion = table.get(core.replace("’", "'"))
        if expansion is None:
            out.append(token)
        else:
            words = expansion.split()
            words[-1] += trail
            out.extend(words)
    return " ".join(out)


def expand_emoticons(text: str, lexicon=None) -> str:
    """Expand emoticons and slang shorthands into expression words."""
    lex = lexicon if lexicon is not None else default_lexicons()
    emoticons = lex.emoticons if isinstance(lex, LexiconSet) else lex
    slang = lex.slang if isinstance(lex, LexiconSet) else {}
    out = []
    for token in text.split():
        if token in emoticons:
            out.append(emoticons[token])
            continue
        core, trail = _split_trailing(token)
        expansion = slang.get(core)
        if expansion is None:
            out.append(token)
        else:
            words = expansion.split()
            words[-1] += trail
            out.extend(words)
    return " ".join(out)


# --- stage 5: hashtag segmentation --------------------------------------------

def _log_prob(word: str, table: Mapping[str, int], total: int) -> float:
    count = table.get(word)
    if count is None:
        return -(3.0 + 2.0 * len(word))
    return math.log(count / total)


def _segment(body: str, table: Mapping[str, int], total: int) -> list:
    """Maximum-likelihood split of ``body`` by DP over split points.

    Candidates are ranked by (score, fewer words, lexicographically smaller
    word tuple) so the result is fully deterministic.  Equivalent to brute
    force over all 2^(n-1) split vectors.
    """
    n = len(body)
    # best[i] = (score, nwords, words-tuple) for body[:i]
    best = [None] * (n + 1)
    best[0] = (0.0, 0, ())
    for i in range(1, n + 1):
        for j in range(i):
            if best[j] is None:
                continue
            word = body[j:i]
            score = best[j][0] + _log_prob(word, table, total)
            cand = (score, best[j][1] + 1, best[j][2] + (word,))
            cur = best[i]
            if (
                cur is None
                or cand[0] > cur[0]
                or (cand[0] == cur[0] and cand[1] < cur[1])
                or (cand[0] == cur[0] and cand[1] == cur[1] and cand[2] < cur[2])
            ):
                best[i] = cand
    return list(best[n][2])


def segment_hashtag(tag: str, unigram_model=None) -> list:
    """Unpack a ``#hashtag`` into its maximum-likelihood word list."""
    if not tag.startswith("#"):
        raise ValueError("hashtag must begin with '#'")
    if isinstance(unigram_model, LexiconSet):
        table, total = unigram_model.unigrams, unigram_model.unigram_total
    elif unigram_model is None:
        lex = default_lexicons()
        table, total = lex.unigrams, lex.unigram_total
    else:
        table = unigram_model
        total = sum(table.values())
    body = tag[1:].lower()
    if not body:
        return []
    return _segment(body, table, total)


# --- stage 6: tokenization -----------------------------------------------------

def _token_kind(surface: str) -> str:
    if surface in PLACEHOLDER_TOKENS:
        return "placeholder"
    if surface in ANNOTATION_TOKENS:
        return "annotation"
    return "word"


def tokenize(text: str, language: str = "en") -> list:
    """Split text into Tokens at whitespace and punctuation boundaries.

    Placeholders and annotations stay intact; danda (।/॥) and other
    punctuation surface as standalone tokens; Devanagari words keep their
    combining matras attached.
    """
    if language not in LANGUAGES:
        raise ValueError(f"unknown language: {language!r}")
    return [Token(s, _token_kind(s)) for s in _TOKEN_RE.findall(text)]


# --- the full pipeline ----------------------------------------------------------

def pipeline(text: str, language: str = "en", config: NormConfig = None, lexicon=None) -> list:
    """normalize → annotate → contractions → emoticons → hashtags → tokenize."""
    lex = lexicon if lexicon is not None else default_lexicons()
    cfg = config if config is not None else NormConfig(language=language)
    if config is not None and config.language != language:
        cfg = NormConfig(
            language=language,
            entities=config.entities,
            annotations=config.annotations,
            contractions=config.contractions,
            emoticons=config.emoticons,
            hashtags=config.hashtags,
            max_tokens=config.max_tokens,
        )

    s = normalize_entities(text, cfg.entities)
    s = annotate_markers(s, lex, cfg.annotations)

    # From here on, carry (surface, kind) pairs so provenance survives.
    staged = [(tok, _token_kind(tok)) for tok in s.split()]

    if cfg.contractions:
        next_stage = []
        for surface, kind in staged:
            if kind != "word":
                next_stage.append((surface, kind))
                continue
            expanded = expand_contractions(surface, lex)
            if expanded == surface:
                next_stage.append((surface, kind))
            else:
                next_stage.extend((w, "word") for w in expanded.split())
        staged = next_stage

    if cfg.emoticons:
        next_stage = []
        for surface, kind in staged:
            if kind != "word":
                next_stage.append((surface, kind))
                continue
            expanded = expand_emoticons(surface, lex)
            if expanded == surface:
                next_stage.append((surface, kind))
            else:
                next_stage.extend((w, "emoticon_expansion") for w in expanded.split())
        staged = next_stage

    if cfg.hashtags:
        next_stage = []
        for surface, kind in staged:
            m = _HASHTAG_RE.fullmatch(surface) if kind == "word" else None
            if m is None:
                next_stage.append((surface, kind))
                continue
            for word in segment_hashtag("#" + m.group(1), lex):
                next_stage.append((word, "hashtag_segment"))
            if m.group(2):
                next_stage.append((m.group(2), "word"))
        staged = next_stage

    tokens = []
    for surface, kind in staged:
        if kind == "word":
            tokens.extend(tokenize(surface, language))
        else:
            tokens.append(Token(surface, kind))
        if len(tokens) >= cfg.max_tokens:
            break
    return tokens[: cfg.max_tokens]
