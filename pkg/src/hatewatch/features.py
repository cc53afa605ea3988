"""TF-IDF n-gram features with a dense auxiliary profanity block.

Implemented from first principles: document frequencies are counted by hand,
idf uses the smoothed form ln((1+N)/(1+df)) + 1, and each document's sparse
tf·idf block is L2-normalized.  scipy.sparse is used only as a container for
the assembled design matrix; all the feature math lives here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from . import textnorm

__all__ = [
    "Vocabulary",
    "FeatureVector",
    "fit",
    "transform",
    "profanity_features",
    "to_csr",
    "save_vocabulary",
    "load_vocabulary",
    "AUX_DIM",
]

AUX_DIM = 3  # [profane-token count, profanity score sum, <censored> count]


def _surfaces(tokens) -> list:
    return [t.surface if isinstance(t, textnorm.Token) else t for t in tokens]


def _ngrams(surfaces: Sequence[str], ngram_range) -> list:
    lo, hi = ngram_range
    out = []
    for n in range(lo, hi + 1):
        for i in range(len(surfaces) - n + 1):
            out.append(" ".join(surfaces[i : i + n]))
    return out


@dataclass(frozen=True)
class Vocabulary:
    """Fitted n-gram vocabulary with idf weights."""

    index: Mapping[str, int]
    df: Mapping[str, int]
    idf: Mapping[str, float]
    n_docs: int
    ngram_range: tuple = (1, 2)
    min_df: int = 1
    max_size: int = None

    @property
    def size(self) -> int:
        return len(self.index)

    def __post_init__(self) -> None:
        if sorted(self.index.values()) != list(range(len(self.index))):
            raise ValueError("vocabulary indices must be dense 0..V-1")
        for ngram, df in self.df.items():
            if ngram in self.index and df < self.min_df:
                raise ValueError(f"retained n-gram below min_df: {ngram!r}")


@dataclass(frozen=True)
class FeatureVector:
    """Sorted sparse (index, weight) pairs plus the dense auxiliary block."""

    pairs: tuple
    aux: tuple = ()

    def __post_init__(self) -> None:
        indices = [i for i, _ in self.pairs]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("feature indices must be strictly increasing")

    def norm(self) -> float:
        return math.sqrt(sum(w * w for _, w in self.pairs))


def fit(docs: Sequence, ngram_range=(1, 2), min_df: int = 1, max_size: int = None) -> Vocabulary:
    """Count document frequencies and compute smoothed idf weights.

    The vocabulary is truncated to ``max_size`` by descending df with
    lexicographic tie-break, then indices 0..V-1 are assigned in sorted
    n-gram order so the layout is reproducible.
    """
    docs = list(docs)
    if not docs:
        raise ValueError("fit requires at least one document")

    df: dict = {}
    for doc in docs:
        for ngram in set(_ngrams(_surfaces(doc), ngram_range)):
            df[ngram] = df.get(ngram, 0) + 1

    kept = [ng for ng, count in df.items() if count >= min_df]
    if max_size is not None and len(kept) > max_size:
        kept.sort(key=lambda ng: (-df[ng], ng))
        kept = kept[:max_size]
    kept.sort()

    n_docs = len(docs)
    index = {ng: i for i, ng in enumerate(kept)}
    idf = {ng: math.log((1 + n_docs) / (1 + df[ng])) + 1.0 for ng in kept}
    return Vocabulary(
        index=index,
        df={ng: df[ng] for ng in kept},
        idf=idf,
        n_docs=n_docs,
        ngram_range=tuple(ngram_range),
        min_df=min_df,
        max_size=max_size,
    )


def transform(vocab: Vocabulary, tokens, lexicon: textnorm.LexiconSet = None) -> FeatureVector:
    """tf·idf weights for one document, L2-normalized; OOV n-grams ignored."""
    surfaces = _surfaces(tokens)
    tf: dict = {}
    for ngram in _ngrams(surfaces, vocab.ngram_range):
        if ngram in vocab.index:
            tf[ngram] = tf.get(ngram, 0) + 1

    weights = {vocab.index[ng]: count * vocab.idf[ng] for ng, count in tf.items()}
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm > 0:
        weights = {i: w / norm for i, w in weights.items()}

    aux = profanity_features(surfaces, lexicon) if lexicon is not None else ()
    return FeatureVector(pairs=tuple(sorted(weights.items())), aux=tuple(aux))


def profanity_features(tokens, lexicon: textnorm.LexiconSet = None) -> tuple:
    """Dense block [profane count, Σ profanity scores, `<censored>` count]."""
    lex = lexicon if lexicon is not None else textnorm.default_lexicons()
    surfaces = _surfaces(tokens)
    count = 0
    score_sum = 0.0
    censored = 0
    for surface in surfaces:
        if surface == "<censored>":
            censored += 1
            continue
        for language in ("en", "hi", "hi_codemix"):
            entry = lex.profanity[language].get(surface)
            if entry is not None:
                count += 1
                score_sum += entry.score
                break
    return (float(count), float(score_sum), float(censored))


def to_csr(vectors: Sequence[FeatureVector], vocab_size: int) -> sparse.csr_matrix:
    """Assemble feature vectors into one CSR design matrix.

    Columns 0..V-1 hold the sparse tf·idf block; the auxiliary block, when
    present, occupies the trailing AUX_DIM columns.
    """
    has_aux = any(v.aux for v in vectors)
    width = vocab_size + (AUX_DIM if has_aux else 0)
    data, indices, indptr = [], [], [0]
    for vec in vectors:
        for idx, weight in vec.pairs:
            if idx >= vocab_size:
                raise ValueError(f"feature index {idx} outside vocabulary of size {vocab_size}")
            indices.append(idx)
            data.append(weight)
        if has_aux:
            aux = vec.aux if vec.aux else (0.0,) * AUX_DIM
            for offset, value in enumerate(aux):
                if value != 0.0:
                    indices.append(vocab_size + offset)
                    data.append(value)
        indptr.append(len(data))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices), np.asarray(indptr)),
        shape=(len(vectors), width),
    )


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Write `ngram<TAB>index<TAB>df<TAB>idf` lines plus a meta header."""
    meta = {
        "n_docs": vocab.n_docs,
        "ngram_range": list(vocab.ngram_range),
        "min_df": vocab.min_df,
        "max_size": vocab.max_size,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {json.dumps(meta)}\n")
        for ngram in sorted(vocab.index, key=vocab.index.get):
            fh.write(f"{ngram}\t{vocab.index[ngram]}\t{vocab.df[ngram]}\t{vocab.idf[ngram]!r}\n")


def load_vocabulary(path) -> Vocabulary:
    path = Path(path)
    index, df, idf = {}, {}, {}
    meta = {"n_docs": 0, "ngram_range": [1, 2], "min_df": 1, "max_size": None}
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# "):
                meta.update(json.loads(line[2:]))
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{line_num}: expected 4 columns")
            ngram, idx, dfv, idfv = parts
            index[ngram] = int(idx)
            df[ngram] = int(dfv)
            idf[ngram] = float(idfv)
    return Vocabulary(
        index=index,
        df=df,
        idf=idf,
        n_docs=int(meta["n_docs"]),
        ngram_range=tuple(meta["ngram_range"]),
        min_df=int(meta["min_df"]),
        max_size=meta["max_size"],
    )
