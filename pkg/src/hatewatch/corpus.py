"""Corpus harmonization: ingest heterogeneous sources into one labeled corpus.

Source datasets arrive as CSV/TSV files with arbitrary column layouts and
label vocabularies.  A :class:`SourceDescriptor` declares, per source, where
the text and label live and how original labels map onto the unified
three-class scheme {hate, abusive, neither}.  Collation concatenates sources
deterministically, assigns dense ids, and the result round-trips through a
tab-separated on-disk format with explicit escaping.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from . import textnorm

__all__ = [
    "LABELS",
    "SourceDescriptor",
    "UnifiedRecord",
    "LanguageStats",
    "CorpusStats",
    "SplitSpec",
    "CorpusError",
    "ingest_source",
    "collate",
    "compute_stats",
    "split",
    "weak_label",
    "write_corpus",
    "read_corpus",
    "load_source_config",
]

LABELS = ("hate", "abusive", "neither")


class CorpusError(ValueError):
    """Raised for missing files, malformed rows, and unmapped labels."""


@dataclass(frozen=True)
class SourceDescriptor:
    """Declares how one source dataset maps into the unified corpus."""

    source_id: str
    path: str
    text_column: str
    label_column: str
    label_map: Mapping[str, str]
    language: str

    def __post_init__(self) -> None:
        if self.language not in textnorm.LANGUAGES:
            raise CorpusError(f"unknown language: {self.language!r}")
        bad = {v for v in self.label_map.values()} - set(LABELS)
        if bad:
            raise CorpusError(f"label map targets outside {LABELS}: {sorted(bad)}")


@dataclass(frozen=True)
class UnifiedRecord:
    """One text sample in the homogeneous corpus."""

    id: int
    text: str
    label: str
    language: str
    source_id: str

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise CorpusError(f"label must be one of {LABELS}, got {self.label!r}")
        if self.language not in textnorm.LANGUAGES:
            raise CorpusError(f"unknown language: {self.language!r}")
        if not self.text.strip():
            raise CorpusError("text must be non-empty after trimming")


@dataclass(frozen=True)
class LanguageStats:
    count: int
    hate_fraction: float
    abuse_fraction: float
    vocab_size: int
    max_seq_len: int


@dataclass(frozen=True)
class CorpusStats:
    languages: Mapping[str, LanguageStats]

    @property
    def total(self) -> int:
        return sum(s.count for s in self.languages.values())


@dataclass(frozen=True)
class SplitSpec:
    """Stratified split parameters."""

    train_fraction: float = 0.8
    seed: int = 0
    keys: tuple = ("label", "language")

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise CorpusError("train_fraction must be in (0, 1)")
        if not set(self.keys) <= {"label", "language", "source_id"}:
            raise CorpusError(f"unknown stratification keys: {self.keys}")


def _open_rows(path: Path):
    delimiter = "," if path.suffix.lower() == ".csv" else "\t"
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for row in reader:
            yield reader.line_num, row


def ingest_source(descriptor: SourceDescriptor) -> list:
    """Read one source file into UnifiedRecords (ids assigned later)."""
    path = Path(descriptor.path)
    if not path.exists():
        raise CorpusError(f"source file not found: {path}")

    rows = _open_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise CorpusError(f"{path}: empty file, header expected") from None

    try:
        text_idx = header.index(descriptor.text_column)
        label_idx = header.index(descriptor.label_column)
    except ValueError:
        raise CorpusError(
            f"{path}: columns {descriptor.text_column!r}/{descriptor.label_column!r} "
            f"not found in header {header}"
        ) from None

    records = []
    for line_num, row in rows:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) <= max(text_idx, label_idx):
            raise CorpusError(f"{path}:{line_num}: malformed row, got {len(row)} columns")
        raw_label = row[label_idx]
        if raw_label not in descriptor.label_map:
            raise CorpusError(f"{path}:{line_num}: unmapped label {raw_label!r}")
        text = row[text_idx]
        if not text.strip():
            raise CorpusError(f"{path}:{line_num}: empty text")
        records.append(
            UnifiedRecord(
                id=len(records),
                text=text,
                label=descriptor.label_map[raw_label],
                language=descriptor.language,
                source_id=descriptor.source_id,
            )
        )
    return records


def collate(sources: Sequence[SourceDescriptor], dedup: bool = False) -> list:
    """Concatenate sources in order; dense ids 0..N-1; optional exact dedup."""
    seen_ids = set()
    for src in sources:
        if src.source_id in seen_ids:
            raise CorpusError(f"duplicate source_id: {src.source_id!r}")
        seen_ids.add(src.source_id)

    corpus = []
    seen_texts = set()
    for src in sources:
        for rec in ingest_source(src):
            if dedup:
                key = (rec.text, rec.language)
                if key in seen_texts:
                    continue
                seen_texts.add(key)
            corpus.append(replace(rec, id=len(corpus)))
    return corpus


def compute_stats(corpus: Sequence[UnifiedRecord], tokenizer: Callable = None) -> CorpusStats:
    """Per-language counts, class fractions, vocabulary size, max length."""
    if tokenizer is None:
        tokenizer = textnorm.pipeline

    by_lang = {}
    for rec in corpus:
        by_lang.setdefault(rec.language, []).append(rec)

    languages = {}
    for lang in textnorm.LANGUAGES:
        recs = by_lang.get(lang, [])
        if not recs:
            languages[lang] = LanguageStats(0, 0.0, 0.0, 0, 0)
            continue
        vocab = set()
        max_len = 0
        hate = abuse = 0
        for rec in recs:
            tokens = tokenizer(rec.text, lang)
            surfaces = [t.surface if isinstance(t, textnorm.Token) else t for t in tokens]
            vocab.update(surfaces)
            max_len = max(max_len, len(surfaces))
            hate += rec.label == "hate"
            abuse += rec.label == "abusive"
        n = len(recs)
        languages[lang] = LanguageStats(
            count=n,
            hate_fraction=hate / n,
            abuse_fraction=abuse / n,
            vocab_size=len(vocab),
            max_seq_len=max_len,
        )
    return CorpusStats(languages=languages)


def split(corpus: Sequence[UnifiedRecord], spec: SplitSpec = None):
    """Deterministic stratified split into (train, test).

    Each stratum keeps the global train fraction within ±1 record; strata
    with a single record go wholly to train.
    """
    spec = spec or SplitSpec()
    strata = {}
    for rec in corpus:
        key = tuple(getattr(rec, k) for k in spec.keys)
        strata.setdefault(key, []).append(rec)

    train, test = [], []
    for key in sorted(strata):
        recs = sorted(strata[key], key=lambda r: r.id)
        if len(recs) < 2:
            train.extend(recs)
            continue
        rng = random.Random("|".join((str(spec.seed),) + tuple(map(str, key))))
        rng.shuffle(recs)
        n_train = int(spec.train_fraction * len(recs) + 0.5)
        n_train = min(max(n_train, 1), len(recs) - 1)
        train.extend(recs[:n_train])
        test.extend(recs[n_train:])

    train.sort(key=lambda r: r.id)
    test.sort(key=lambda r: r.id)
    return train, test


def _extract_tokens(text: str) -> list:
    return [t.surface for t in textnorm.tokenize(text.lower(), "en")]


def weak_label(text: str, lexicons: textnorm.LexiconSet = None) -> str:
    """Guideline-derived heuristic label; an annotation aid, not a classifier.

    Ordered rules: slur → hate; stereotype phrase → hate; problematic
    hashtag → hate; profanity present → abusive; else neither.
    """
    lex = lexicons if lexicons is not None else textnorm.default_lexicons()
    if not isinstance(lex, textnorm.LexiconSet):
        raise CorpusError("lexicons must be a loaded LexiconSet")

    lowered = text.lower()
    tokens = set(_extract_tokens(text))

    slur_union = frozenset().union(*lex.slurs.values())
    if tokens & slur_union:
        return "hate"
    for phrases in lex.stereotypes.values():
        for phrase in phrases:
            if phrase in lowered:
                return "hate"
    for tag in ("#" + t.surface[1:] for t in textnorm.tokenize(lowered, "en") if t.surface.startswith("#")):
        if tag in lex.hashtags_problematic:
            return "hate"
    profane_union = set()
    for table in lex.profanity.values():
        profane_union.update(table.keys())
    if tokens & profane_union:
        return "abusive"
    return "neither"


# --- unified on-disk format -----------------------------------------------------

_HEADER = ("id", "text", "label", "language", "source_id")


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(c)
        i += 1
    return "".join(out)


def write_corpus(corpus: Sequence[UnifiedRecord], path) -> None:
    """Write the unified TSV format (UTF-8, escaped text column)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(_HEADER) + "\n")
        for rec in corpus:
            fh.write(
                "\t".join(
                    (str(rec.id), _escape(rec.text), rec.label, rec.language, rec.source_id)
                )
                + "\n"
            )


def read_corpus(path) -> list:
    """Read the unified TSV format back into UnifiedRecords."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split("\t") != list(_HEADER):
            raise CorpusError(f"{path}: bad header {header!r}")
        for line_num, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != len(_HEADER):
                raise CorpusError(f"{path}:{line_num}: expected {len(_HEADER)} columns")
            rec_id, text, label, language, source_id = parts
            try:
                records.append(
                    UnifiedRecord(
                        id=int(rec_id),
                        text=_unescape(text),
                        label=label,
                        language=language,
                        source_id=source_id,
                    )
                )
            except (ValueError, CorpusError) as exc:
                raise CorpusError(f"{path}:{line_num}: {exc}") from None
    return records


def load_source_config(path) -> list:
    """Read the declarative source config (JSON) into SourceDescriptors.

    Relative source paths resolve against the config file's directory.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"source config not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: invalid JSON: {exc}") from None
    sources = doc.get("sources")
    if not isinstance(sources, list):
        raise CorpusError(f"{path}: expected top-level 'sources' list")
    out = []
    for entry in sources:
        try:
            src_path = Path(entry["path"])
            if not src_path.is_absolute():
                src_path = path.parent / src_path
            out.append(
                SourceDescriptor(
                    source_id=entry["source_id"],
                    path=str(src_path),
                    text_column=entry["text_column"],
                    label_column=entry["label_column"],
                    label_map=dict(entry["label_map"]),
                    language=entry["language"],
                )
            )
        except KeyError as exc:
            raise CorpusError(f"{path}: source entry missing key {exc}") from None
    return out
