"""Feedback hub: versioned model registry, feedback log, review queue, retrain.

Persistence is deliberately plain: the feedback store is an append-only
newline-delimited JSON log (verdicts are appended amendment records, and a
compaction pass rewrites the log), and the registry is a JSON manifest that
is swapped atomically with ``os.replace``.  Model files for every published
version stay on disk; the manifest and the in-process cache only ever point
at fully written versions, so concurrent scorers observe either the old or
the new model, never a mixture.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import features, linear, textnorm
from .corpus import LABELS, read_corpus
from .textnorm import LexiconSet, default_lexicons, pipeline

__all__ = [
    "HubError",
    "UnknownRecordError",
    "AlreadyResolvedError",
    "PoolTooSmallError",
    "BiasGuardError",
    "NoModelError",
    "RetrainPolicy",
    "FeedbackRecord",
    "ServingModel",
    "ModelRegistry",
    "Hub",
    "train_serving_model",
    "LABEL_TO_INDEX",
    "INDEX_TO_LABEL",
]

LABEL_TO_INDEX = {"hate": 0, "abusive": 1, "neither": 2}
INDEX_TO_LABEL = ("hate", "abusive", "neither")

VERDICTS = ("unreviewed", "confirmed", "relabeled")


class HubError(Exception):
    """Base class for hub failures; ``code`` is machine-readable."""

    code = "hub_error"


class UnknownRecordError(HubError):
    code = "unknown_id"


class AlreadyResolvedError(HubError):
    code = "already_resolved"


class PoolTooSmallError(HubError):
    code = "pool_too_small"


class BiasGuardError(HubError):
    code = "bias_guard"


class NoModelError(HubError):
    code = "no_model"


@dataclass(frozen=True)
class RetrainPolicy:
    """When to queue feedback for review and when a retrain may run."""

    confidence_threshold: float = 0.60
    min_resolved: int = 50
    base_corpus: str = None

    def __post_init__(self) -> None:
        if not (1.0 / 3.0 < self.confidence_threshold <= 1.0):
            raise ValueError("confidence_threshold must be in (1/3, 1]")
        if self.min_resolved < 1:
            raise ValueError("min_resolved must be >= 1")


@dataclass(frozen=True)
class FeedbackRecord:
    """One scored comment captured for the online feedback loop."""

    id: str
    text: str
    language: str
    predicted: str
    probabilities: tuple
    confidence: float
    queued: bool
    timestamp: float
    verdict: str = "unreviewed"
    label: str = None

    def __post_init__(self) -> None:
        if self.language not in textnorm.LANGUAGES:
            raise ValueError(f"unknown language {self.language!r}")
        if self.predicted not in LABELS:
            raise ValueError(f"unknown predicted label {self.predicted!r}")
        if len(self.probabilities) != 3:
            raise ValueError("probabilities must be a triple")
        if abs(self.confidence - max(self.probabilities)) > 1e-12:
            raise ValueError("confidence must equal max(probabilities)")
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "relabeled" and self.label not in LABELS:
            raise ValueError("relabeled verdict requires a valid label")

    @property
    def resolved_label(self) -> str:
        """Training label contributed by this record, or None if unreviewed."""
        if self.verdict == "confirmed":
            return self.predicted
        if self.verdict == "relabeled":
            return self.label
        return None

    def to_json(self) -> dict:
        return {
            "kind": "feedback",
            "id": self.id,
            "text": self.text,
            "language": self.language,
            "predicted": self.predicted,
            "probabilities": list(self.probabilities),
            "confidence": self.confidence,
            "queued": self.queued,
            "timestamp": self.timestamp,
            "verdict": self.verdict,
            "label": self.label,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FeedbackRecord":
        return cls(
            id=obj["id"],
            text=obj["text"],
            language=obj["language"],
            predicted=obj["predicted"],
            probabilities=tuple(obj["probabilities"]),
            confidence=obj["confidence"],
            queued=obj["queued"],
            timestamp=obj["timestamp"],
            verdict=obj.get("verdict", "unreviewed"),
            label=obj.get("label"),
        )


# --- serving bundle ---------------------------------------------------------

_VOCAB_FILE = "vocabulary.tsv"
_MODEL_FILE = "model.tsv"


@dataclass(frozen=True)
class ServingModel:
    """A loaded (vocabulary, linear model) pair bound to one language."""

    language: str
    vocabulary: features.Vocabulary
    model: linear.LogRegModel
    lexicons: LexiconSet

    def score(self, text: str) -> tuple:
        """(label, probability triple) for one text."""
        tokens = pipeline(text, self.language, lexicon=self.lexicons)
        vector = features.transform(self.vocabulary, tokens, self.lexicons)
        x = features.to_csr([vector], len(self.vocabulary.index))
        probs = linear.predict_proba(self.model, x)[0]
        label = INDEX_TO_LABEL[int(np.argmax(probs))]
        return label, tuple(float(p) for p in probs)

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        features.save_vocabulary(self.vocabulary, directory / _VOCAB_FILE)
        linear.save_model(self.model, directory / _MODEL_FILE)

    @classmethod
    def load(cls, directory, language: str, lexicons: LexiconSet = None) -> "ServingModel":
        directory = Path(directory)
        return cls(
            language=language,
            vocabulary=features.load_vocabulary(directory / _VOCAB_FILE),
            model=linear.load_model(directory / _MODEL_FILE),
            lexicons=lexicons or default_lexicons(),
        )


def train_serving_model(
    texts: list,
    labels: list,
    language: str,
    lexicons: LexiconSet = None,
    hyper: linear.LogRegHyper = None,
) -> ServingModel:
    """Featurize texts through the normalization pipeline and fit the linear model."""
    lexicons = lexicons or default_lexicons()
    hyper = hyper or linear.LogRegHyper()
    docs = [[t.surface for t in pipeline(text, language, lexicon=lexicons)] for text in texts]
    vocab = features.fit(docs, ngram_range=(1, 2), min_df=1)
    X = features.to_csr(
        [features.transform(vocab, doc, lexicons) for doc in docs], len(vocab.index)
    )
    y = np.array([LABEL_TO_INDEX[label] for label in labels])
    meta = {"language": language, "vocab_size": len(vocab.index), "aux_dim": features.AUX_DIM}
    model, _ = linear.train(X, y, hyper, vocab_meta=meta)
    return ServingModel(language, vocab, model, lexicons)


# --- registry ------------------------------------------------------------------

class ModelRegistry:
    """Per-language versioned model store with atomic manifest swaps."""

    def __init__(self, root, lexicons: LexiconSet = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.root / "registry.json"
        self.lexicons = lexicons or default_lexicons()
        self._lock = threading.Lock()
        self._cache = {}  # language -> (version, ServingModel)
        self._manifest = self._read_manifest()

    def _read_manifest(self) -> dict:
        if not self.manifest_path.exists():
            return {"format_version": 1, "languages": {}}
        with open(self.manifest_path, encoding="utf-8") as fh:
            return json.load(fh)

    def _write_manifest(self) -> None:
        tmp = self.manifest_path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self._manifest, fh, indent=2)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.manifest_path)

    def languages(self) -> dict:
        """Current manifest snapshot: language -> {version, path, updated}."""
        with self._lock:
            return {
                lang: {k: v for k, v in entry.items() if k != "history"}
                for lang, entry in self._manifest["languages"].items()
            }

    def history(self, language: str) -> list:
        with self._lock:
            entry = self._manifest["languages"].get(language)
            return list(entry["history"]) if entry else []

    def current_version(self, language: str):
        entry = self._manifest["languages"].get(language)
        return entry["version"] if entry else None

    def current(self, language: str) -> tuple:
        """(version, ServingModel); loads and caches from disk on first use."""
        cached = self._cache.get(language)
        entry = self._manifest["languages"].get(language)
        if entry is None:
            raise NoModelError(f"no model published for language {language!r}")
        if cached is not None and cached[0] == entry["version"]:
            return cached
        with self._lock:
            entry = self._manifest["languages"].get(language)
            cached = self._cache.get(language)
            if cached is not None and cached[0] == entry["version"]:
                return cached
            model = ServingModel.load(self.root / entry["path"], language, self.lexicons)
            self._cache[language] = (entry["version"], model)
            return self._cache[language]

    def publish(self, language: str, serving: ServingModel) -> int:
        """Write model files, then swap the manifest and cache atomically."""
        if language not in textnorm.LANGUAGES:
            raise ValueError(f"unknown language {language!r}")
        with self._lock:
            entry = self._manifest["languages"].setdefault(
                language, {"version": 0, "path": None, "updated": None, "history": []}
            )
            version = entry["version"] + 1
            rel_path = f"models/{language}/v{version}"
            serving.save(self.root / rel_path)
            stamp = datetime.now(timezone.utc).isoformat()
            entry["version"] = version
            entry["path"] = rel_path
            entry["updated"] = stamp
            entry["history"].append({"version": version, "path": rel_path, "timestamp": stamp})
            self._write_manifest()
            self._cache[language] = (version, serving)
        return version


# --- the hub facade ----------------------------------------------------------------

_LOG_FILE = "feedback.log"


class Hub:
    """Feedback persistence + review queue + retrain-and-swap loop."""

    def __init__(
        self,
        root,
        policy: RetrainPolicy = None,
        lexicons: LexiconSet = None,
        hyper: linear.LogRegHyper = None,
    ):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.policy = policy or RetrainPolicy()
        self.lexicons = lexicons or default_lexicons()
        self.hyper = hyper or linear.LogRegHyper()
        self.registry = ModelRegistry(self.root, self.lexicons)
        self.log_path = self.root / _LOG_FILE
        self._write_lock = threading.Lock()
        self._retrain_locks = {lang: threading.Lock() for lang in textnorm.LANGUAGES}
        self._records = {}
        self._order = []
        self._replay()

    # -- persistence --------------------------------------------------------

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for line_num, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise HubError(f"{self.log_path}:{line_num}: corrupt log line") from exc
                if obj.get("kind") == "feedback":
                    record = FeedbackRecord.from_json(obj)
                    if record.id not in self._records:
                        self._order.append(record.id)
                    self._records[record.id] = record
                elif obj.get("kind") == "verdict":
                    rec = self._records.get(obj["id"])
                    if rec is None:
                        raise HubError(
                            f"{self.log_path}:{line_num}: verdict for unknown id {obj['id']!r}"
                        )
                    self._records[obj["id"]] = replace(
                        rec, verdict=obj["verdict"], label=obj.get("label")
                    )
                else:
                    raise HubError(f"{self.log_path}:{line_num}: unknown record kind")

    def _append(self, obj: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def compact(self) -> int:
        """Rewrite the log as one folded line per record; returns line count."""
        with self._write_lock:
            tmp = self.log_path.with_suffix(".log.tmp")
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                for record_id in self._order:
                    fh.write(
                        json.dumps(self._records[record_id].to_json(), ensure_ascii=False) + "\n"
                    )
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.log_path)
            return len(self._order)

    # -- feedback operations ---------------------------------------------------

    def record_feedback(
        self, text: str, probabilities, language: str, predicted: str = None
    ) -> str:
        """Append one scored comment; low-confidence records join the queue."""
        probs = tuple(float(p) for p in probabilities)
        if predicted is None:
            predicted = INDEX_TO_LABEL[int(np.argmax(np.asarray(probs)))]
        record = FeedbackRecord(
            id=uuid.uuid4().hex,
            text=text,
            language=language,
            predicted=predicted,
            probabilities=probs,
            confidence=max(probs),
            queued=max(probs) < self.policy.confidence_threshold,
            timestamp=time.time(),
        )
        with self._write_lock:
            self._append(record.to_json())
            self._records[record.id] = record
            self._order.append(record.id)
        return record.id

    def get(self, record_id: str) -> FeedbackRecord:
        record = self._records.get(record_id)
        if record is None:
            raise UnknownRecordError(f"no feedback record {record_id!r}")
        return record

    def list_review_queue(self, language: str = None, limit: int = None) -> list:
        """Unreviewed low-confidence records, oldest first."""
        queue = [
            self._records[rid]
            for rid in self._order
            if self._records[rid].queued
            and self._records[rid].verdict == "unreviewed"
            and (language is None or self._records[rid].language == language)
        ]
        return queue if limit is None else queue[:limit]

    def resolve(self, record_id: str, verdict: str, label: str = None) -> FeedbackRecord:
        """Apply an annotator verdict; resolved records join the training pool."""
        if verdict not in ("confirmed", "relabeled"):
            raise ValueError(f"verdict must be confirmed or relabeled, got {verdict!r}")
        if verdict == "relabeled" and label not in LABELS:
            raise ValueError(f"relabeled verdict requires a label from {LABELS}")
        if verdict == "confirmed":
            label = None
        with self._write_lock:
            record = self.get(record_id)
            if record.verdict != "unreviewed":
                raise AlreadyResolvedError(f"record {record_id!r} already resolved")
            updated = replace(record, verdict=verdict, label=label)
            self._append(
                {
                    "kind": "verdict",
                    "id": record_id,
                    "verdict": verdict,
                    "label": label,
                    "timestamp": time.time(),
                }
            )
            self._records[record_id] = updated
        return updated

    def training_pool(self, language: str = None) -> list:
        """(text, language, label) triples contributed by resolved feedback."""
        pool = []
        for rid in self._order:
            record = self._records[rid]
            if record.resolved_label is None:
                continue
            if language is not None and record.language != language:
                continue
            pool.append((record.text, record.language, record.resolved_label))
        return pool

    # -- training ------------------------------------------------------------

    def _train_serving_model(self, texts: list, labels: list, language: str) -> ServingModel:
        return train_serving_model(texts, labels, language, self.lexicons, self.hyper)

    def _base_records(self, language: str, policy: RetrainPolicy) -> list:
        path = policy.base_corpus or self.policy.base_corpus
        if path is None:
            return []
        return [r for r in read_corpus(path) if r.language == language]

    def bootstrap(self, language: str, corpus=None) -> int:
        """Publish an initial model trained on the base corpus alone."""
        if corpus is None:
            records = self._base_records(language, self.policy)
        elif isinstance(corpus, (str, Path)):
            records = [r for r in read_corpus(corpus) if r.language == language]
        else:
            records = [r for r in corpus if r.language == language]
        if not records:
            raise HubError(f"no base corpus records for language {language!r}")
        serving = self._train_serving_model(
            [r.text for r in records], [r.label for r in records], language
        )
        return self.registry.publish(language, serving)

    def retrain(self, language: str, policy: RetrainPolicy = None) -> int:
        """Train on base corpus ∪ resolved pool and atomically swap the model.

        The class-bias guard is evaluated over the combined training set so a
        burst of identical relabels cannot silently skew the served model; a
        failure at any stage leaves the previous version serving.
        """
        policy = policy or self.policy
        with self._retrain_locks[language]:
            pool = self.training_pool(language)
            if len(pool) < policy.min_resolved:
                raise PoolTooSmallError(
                    f"resolved pool has {len(pool)} records; "
                    f"policy requires {policy.min_resolved}"
                )
            base = self._base_records(language, policy)
            texts = [r.text for r in base] + [text for text, _, _ in pool]
            labels = [r.label for r in base] + [label for _, _, label in pool]
            counts = {label: labels.count(label) for label in LABELS}
            worst = max(counts, key=counts.get)
            if counts[worst] > 0.90 * len(labels):
                raise BiasGuardError(
                    f"class {worst!r} is {counts[worst]}/{len(labels)} of the combined "
                    "training set (> 90%); refusing to retrain a biased model"
                )
            serving = self._train_serving_model(texts, labels, language)
            return self.registry.publish(language, serving)

    # -- scoring ---------------------------------------------------------------

    def score(self, text: str, language: str, record: bool = True) -> dict:
        """Score with the current model; optionally capture feedback."""
        version, serving = self.registry.current(language)
        label, probs = serving.score(text)
        feedback_id = None
        if record:
            feedback_id = self.record_feedback(text, probs, language, predicted=label)
        return {
            "label": label,
            "probabilities": probs,
            "language": language,
            "model_version": version,
            "feedback_id": feedback_id,
        }
