"""Ship-gate acceptance suite.

One test per criterion, each tagged with ``@pytest.mark.acceptance(<name>)``;
the conftest hook prints an explicit PASS/FAIL line per criterion in the
terminal summary.  Every tolerance and budget is asserted here, including the
wall-clock bounds, so a regression in either correctness or speed fails the
gate.  The whole suite runs against the library and the in-process ASGI app —
no web frontend required.
"""

import math
import random
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from hatewatch import bench, corpus, features, langid, linear, synth
from hatewatch.corpus import LABELS, SourceDescriptor
from hatewatch.hub import Hub, RetrainPolicy, train_serving_model
from hatewatch.neural import (
    BatchNorm,
    BiLSTM,
    Conv1D,
    Dense,
    Embedding,
    GlobalMaxPool,
    NetConfig,
    TrainHyper,
    network,
)
from hatewatch.service import ServiceConfig, create_app

from conftest import make_base_corpus

acceptance = pytest.mark.acceptance


# --- tf-idf ------------------------------------------------------------------------


@acceptance("tfidf-oracle-equivalence")
def test_tfidf_matches_brute_force_oracle():
    """50 random toy corpora: transform == brute-force tf·idf within 1e-12; < 5 s."""
    rng = random.Random(20260814)
    words = [f"w{i}" for i in range(12)]

    def brute_force(docs, doc, ngram_range, min_df):
        lo, hi = ngram_range

        def grams(tokens):
            return [
                " ".join(tokens[i : i + n])
                for n in range(lo, hi + 1)
                for i in range(len(tokens) - n + 1)
            ]

        df = {}
        for d in docs:
            for g in set(grams(d)):
                df[g] = df.get(g, 0) + 1
        kept = sorted(g for g, c in df.items() if c >= min_df)
        index = {g: i for i, g in enumerate(kept)}
        weights = {}
        for g in grams(doc):
            if g in index:
                weights[g] = weights.get(g, 0) + 1
        dense = np.zeros(len(kept))
        for g, tf in weights.items():
            idf = math.log((1 + len(docs)) / (1 + df[g])) + 1.0
            dense[index[g]] = tf * idf
        norm = np.linalg.norm(dense)
        return dense / norm if norm > 0 else dense

    start = time.perf_counter()
    for _ in range(50):
        n_docs = rng.randint(1, 20)
        docs = [
            [rng.choice(words) for _ in range(rng.randint(1, 30))] for _ in range(n_docs)
        ]
        ngram_range = rng.choice([(1, 1), (1, 2)])
        min_df = rng.choice([1, 2])
        vocab = features.fit(docs, ngram_range=ngram_range, min_df=min_df)
        for doc in docs:
            vector = features.transform(vocab, doc)
            dense = np.zeros(len(vocab.index))
            for idx, weight in vector.pairs:
                dense[idx] = weight
            expected = brute_force(docs, doc, ngram_range, min_df)
            assert dense.shape == expected.shape
            if dense.size:  # min_df can legitimately empty the vocabulary
                assert np.abs(dense - expected).max() <= 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"tf-idf oracle sweep took {elapsed:.2f}s (budget 5s)"


# --- logistic regression --------------------------------------------------------------


@acceptance("lr-gradient-check")
def test_lr_gradient_matches_finite_differences():
    """Analytic vs central differences (h=1e-5): max rel err < 1e-4, 20 instances; < 10 s."""
    rng = np.random.default_rng(20260814)
    h = 1e-5
    start = time.perf_counter()
    for _ in range(20):
        d = int(rng.integers(2, 10))
        n = int(rng.integers(2, 16))
        hyper = linear.LogRegHyper(
            l2=float(rng.uniform(0, 1.0)),
            class_weights=tuple(float(w) for w in rng.uniform(0.5, 2.0, size=3)),
        )
        model = linear.LogRegModel(
            W=rng.normal(size=(3, d)), b=rng.normal(size=3), hyper=hyper
        )
        X = rng.normal(size=(n, d))
        y = rng.integers(0, 3, size=n)
        dW, db = linear.gradient(model, X, y)

        worst = 0.0
        for i in range(3):
            for j in range(d):
                up = linear.LogRegModel(W=model.W.copy(), b=model.b, hyper=hyper)
                up.W[i, j] += h
                down = linear.LogRegModel(W=model.W.copy(), b=model.b, hyper=hyper)
                down.W[i, j] -= h
                numeric = (linear.loss(up, X, y) - linear.loss(down, X, y)) / (2 * h)
                worst = max(
                    worst, abs(dW[i, j] - numeric) / max(abs(numeric), abs(dW[i, j]), 1e-8)
                )
        for i in range(3):
            up = linear.LogRegModel(W=model.W, b=model.b.copy(), hyper=hyper)
            up.b[i] += h
            down = linear.LogRegModel(W=model.W, b=model.b.copy(), hyper=hyper)
            down.b[i] -= h
            numeric = (linear.loss(up, X, y) - linear.loss(down, X, y)) / (2 * h)
            worst = max(
                worst, abs(db[i] - numeric) / max(abs(numeric), abs(db[i]), 1e-8)
            )
        assert worst < 1e-4, f"max relative error {worst:.3e} >= 1e-4"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"LR gradient sweep took {elapsed:.2f}s (budget 10s)"


def _separable_blobs(n: int = 300, seed: int = 5):
    rng = np.random.default_rng(seed)
    centers = np.array([[4.0, 0.0, 0.0], [0.0, 4.0, 0.0], [-4.0, -4.0, 4.0]])
    per_class = n // 3
    X = np.vstack(
        [centers[c] + 0.4 * rng.normal(size=(per_class, 3)) for c in range(3)]
    )
    y = np.repeat(np.arange(3), per_class)
    return X, y


@acceptance("lr-convergence")
def test_lr_converges_on_separable_data():
    """Separable 300-sample 3-class set: >= 99% train accuracy within 5000 iterations; < 30 s."""
    X, y = _separable_blobs(300)
    start = time.perf_counter()
    model, report = linear.train(X, y, linear.LogRegHyper(max_iter=5000, seed=0))
    elapsed = time.perf_counter() - start
    accuracy = float((linear.predict(model, X) == y).mean())
    assert accuracy >= 0.99, f"train accuracy {accuracy:.4f} < 0.99"
    assert report.epochs_run <= 5000
    assert elapsed < 30.0, f"training took {elapsed:.2f}s (budget 30s)"


@acceptance("l2-monotonicity")
def test_l2_penalty_shrinks_weight_norm():
    """λ in {0.1, 1, 10} on fixed data/seed: ‖W‖₂ non-increasing in λ."""
    X, y = _separable_blobs(150)
    norms = []
    for l2 in (0.1, 1.0, 10.0):
        model, _ = linear.train(X, y, linear.LogRegHyper(l2=l2, max_iter=500, seed=0))
        norms.append(float(np.linalg.norm(model.W)))
    assert norms[0] >= norms[1] >= norms[2], f"norms not non-increasing: {norms}"
    assert norms[2] < norms[0], f"no shrinkage across two decades of λ: {norms}"


# --- neural network --------------------------------------------------------------------


def _fd_param_check(layer, x, *, h: float = 1e-4, samples: int = 10) -> float:
    """Worst relative error between analytic and central-difference parameter grads."""
    rng = np.random.default_rng(99)
    weights = {}

    def loss_fn(out):
        if out.shape not in weights:
            weights[out.shape] = np.random.default_rng(3).normal(size=out.shape)
        w = weights[out.shape]
        return float((out * w).sum()), w

    for p in layer.params():
        p.zero_grad()
    out = layer.forward(x, train=True)
    _, dout = loss_fn(out)
    layer.backward(dout)

    worst = 0.0
    for p in layer.params():
        flat = p.value.ravel()
        gflat = p.grad.ravel()
        idxs = rng.choice(flat.size, size=min(samples, flat.size), replace=False)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + h
            lp, _ = loss_fn(layer.forward(x, train=True))
            flat[i] = orig - h
            lm, _ = loss_fn(layer.forward(x, train=True))
            flat[i] = orig
            numeric = (lp - lm) / (2 * h)
            worst = max(
                worst, abs(gflat[i] - numeric) / max(abs(gflat[i]), abs(numeric), 1e-8)
            )
    return worst


def _fd_input_check(layer, x, *, h: float = 1e-4, samples: int = 10) -> float:
    """Worst relative error between analytic and central-difference input grads."""
    rng = np.random.default_rng(7)
    weights = {}

    def loss_fn(out):
        if out.shape not in weights:
            weights[out.shape] = np.random.default_rng(3).normal(size=out.shape)
        w = weights[out.shape]
        return float((out * w).sum()), w

    for p in layer.params():
        p.zero_grad()
    out = layer.forward(x, train=True)
    _, dout = loss_fn(out)
    dx = layer.backward(dout)

    worst = 0.0
    flat_x = x.ravel()
    flat_dx = dx.ravel()
    idxs = rng.choice(flat_x.size, size=min(samples, flat_x.size), replace=False)
    for i in idxs:
        orig = flat_x[i]
        flat_x[i] = orig + h
        lp, _ = loss_fn(layer.forward(x, train=True))
        flat_x[i] = orig - h
        lm, _ = loss_fn(layer.forward(x, train=True))
        flat_x[i] = orig
        numeric = (lp - lm) / (2 * h)
        worst = max(
            worst, abs(flat_dx[i] - numeric) / max(abs(flat_dx[i]), abs(numeric), 1e-8)
        )
    return worst


@acceptance("neural-gradient-check")
def test_every_neural_layer_passes_finite_differences():
    """Embedding, conv, batchnorm, maxpool, BiLSTM, dense: rel err < 1e-3; < 60 s."""
    rng = np.random.default_rng(0)
    start = time.perf_counter()
    worst = {}

    embedding = Embedding("e", 13, 5, rng)
    ids = rng.integers(0, 13, size=(3, 7))
    worst["embedding"] = _fd_param_check(embedding, ids)

    conv = Conv1D("c", 3, 5, 4, rng)
    x = rng.normal(size=(3, 7, 5))
    worst["conv"] = max(_fd_param_check(conv, x.copy()), _fd_input_check(conv, x.copy()))

    batchnorm = BatchNorm("b", 5)
    x = rng.normal(size=(4, 5)) * 2.0 + 1.0
    worst["batchnorm"] = max(
        _fd_param_check(batchnorm, x.copy()), _fd_input_check(batchnorm, x.copy())
    )

    maxpool = GlobalMaxPool()
    # Comfortable gaps between candidates keep the argmax stable under ±h.
    x = rng.permuted(np.arange(3 * 6 * 4, dtype=np.float64).reshape(3, 6, 4) * 0.5, axis=1)
    worst["maxpool"] = _fd_input_check(maxpool, x.copy())

    bilstm = BiLSTM("l", 4, 3, rng)
    x = rng.normal(size=(2, 5, 4))
    worst["bilstm"] = max(
        _fd_param_check(bilstm, x.copy()), _fd_input_check(bilstm, x.copy())
    )

    dense = Dense("d", 6, 4, rng)
    x = rng.normal(size=(3, 6))
    worst["dense"] = max(_fd_param_check(dense, x.copy()), _fd_input_check(dense, x.copy()))

    elapsed = time.perf_counter() - start
    for name, err in worst.items():
        assert err < 1e-3, f"{name}: max relative error {err:.3e} >= 1e-3"
    assert elapsed < 60.0, f"layer gradient checks took {elapsed:.2f}s (budget 60s)"


@acceptance("neural-capacity")
def test_default_config_overfits_planted_set():
    """Table-6 EN hyperparameters reach 100% train accuracy on 64 samples, seed 42; < 5 min."""
    dataset = network.planted_signal_dataset(n=64, seq_len=16, vocab_size=64, seed=42)
    config = NetConfig(vocab_size=64, seed=42)
    hyper = TrainHyper(
        epochs=200, batch_size=30, optimizer="sgd", learning_rate=0.001,
        dropout=0.2, hidden=64,
    )
    start = time.perf_counter()
    net, report = network.train(config, hyper, dataset)
    elapsed = time.perf_counter() - start
    ids, labels = dataset
    accuracy = float((net.predict(ids) == labels).mean())
    assert report.epochs_run <= 200
    assert accuracy == 1.0, f"train accuracy {accuracy:.4f} != 1.0"
    assert elapsed < 300.0, f"training took {elapsed:.2f}s (budget 300s)"


ABLATION_ROWS = (
    "Full",
    "Without C1 and C2 and C3",
    "C1 only",
    "C1 and C2",
    "Without bl0 and bl1",
    "bl0 only",
)


@acceptance("ablation-harness")
def test_ablation_report_shape_and_ordering():
    """Report covers the named configurations; full >= conv-free accuracy at seed 42."""
    dataset = network.planted_signal_dataset(n=64, seq_len=16, vocab_size=64, seed=42)
    configs = network.standard_ablation_configs(NetConfig(vocab_size=64, seed=42))
    rows = network.ablate(configs, dataset, TrainHyper(epochs=30))
    assert tuple(r["config"] for r in rows) == ABLATION_ROWS
    for row in rows:
        assert set(row) == {"config", "f1_neither", "f1_hate", "f1_abuse", "accuracy"}
    by_name = {r["config"]: r for r in rows}
    assert by_name["Full"]["accuracy"] >= by_name["Without C1 and C2 and C3"]["accuracy"]


@acceptance("concat-width")
def test_default_conv_concat_width_is_192():
    """Default config: three 64-map conv branches concatenate into a 1x192 tensor."""
    config = NetConfig(vocab_size=1000)
    assert config.conv_concat_width == 192
    net = network.MicroNet(config)
    logits = net.forward(np.zeros((2, 9), dtype=np.int64))
    assert net.fc0.W.value.shape[0] == 192  # the merged conv tensor feeds fc0
    assert logits.shape == (2, 3)


# --- service ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def service_stack(tmp_path_factory, lexicons, fast_hyper):
    """An en-language hub with a bootstrapped model behind the ASGI app."""
    root = tmp_path_factory.mktemp("acceptance-service")
    records = make_base_corpus(lexicons)
    base = root / "base.tsv"
    corpus.write_corpus(records, base)
    hub = Hub(
        root / "hub",
        policy=RetrainPolicy(base_corpus=str(base)),
        lexicons=lexicons,
        hyper=fast_hyper,
    )
    hub.bootstrap("en")
    config = ServiceConfig(hub_root=str(root / "hub"), base_corpus=str(base))
    app = create_app(config, hub=hub)
    client = TestClient(app, raise_server_exceptions=False)
    return client, records


@acceptance("page-scoring")
def test_page_mixture_is_exact(service_stack):
    """2 hate + 1 abusive + 7 neither comments score exactly 20/10/70 percent."""
    client, records = service_stack
    by_label = {label: [r.text for r in records if r.label == label] for label in LABELS}
    comments = by_label["hate"][:2] + by_label["abusive"][:1] + by_label["neither"][:7]
    assert len(comments) == 10
    response = client.post("/api/v1/page/score", json={"comments": comments})
    assert response.status_code == 200
    payload = response.json()
    assert payload["percentages"] == {"hate": 20.0, "abusive": 10.0, "neither": 70.0}


@acceptance("latency")
def test_linear_scoring_latency(tmp_path, lexicons, fast_hyper):
    """Single-comment p95 < 50 ms over a 1,000-request local benchmark."""
    records = make_base_corpus(lexicons)
    corpus_path = tmp_path / "corpus.tsv"
    corpus.write_corpus(records, corpus_path)
    serving = train_serving_model(
        [r.text for r in records], [r.label for r in records], "en",
        lexicons, hyper=fast_hyper,
    )
    model_dir = tmp_path / "model"
    serving.save(model_dir)
    report = bench.run_benchmark(model_dir, corpus_path, requests=1000)
    assert report.requests == 1000
    assert report.p95_ms < 50.0, f"p95 {report.p95_ms:.2f} ms >= 50 ms"


# --- language routing ---------------------------------------------------------------------


@acceptance("language-routing")
def test_reference_rows_route_to_their_languages(lexicons):
    """The three reference comments route to en / hi / hi_codemix respectively."""
    en_row = "Black on the bus"
    hi_row = "तुम लोग देश के गद्दार हो और तुम्हें यहाँ से निकाल देना चाहिए"
    codemix_row = (
        "Main jutt Punjabi hoon aur paka N league. "
        "Madarchod Imran ki Punjab say nafrat clear hai."
    )
    assert langid.detect(en_row, lexicons).language == "en"
    assert langid.detect(hi_row, lexicons).language == "hi"
    assert langid.detect(codemix_row, lexicons).language == "hi_codemix"


# --- feedback loop --------------------------------------------------------------------


@acceptance("feedback-loop")
def test_feedback_loop_end_to_end(tmp_path, lexicons, fast_hyper):
    """Low-confidence enqueue -> 100 relabels -> retrain: flip + version bump, zero
    scoring failures across the retrain; < 2 min."""
    start = time.perf_counter()
    records = make_base_corpus(lexicons)
    base = tmp_path / "base.tsv"
    corpus.write_corpus(records, base)
    hub = Hub(
        tmp_path / "hub",
        policy=RetrainPolicy(
            confidence_threshold=0.60, min_resolved=50, base_corpus=str(base)
        ),
        lexicons=lexicons,
        hyper=fast_hyper,
    )
    assert hub.bootstrap("en") == 1

    novel = "zorblat frumix keeps winning somehow"
    first = hub.score(novel, "en")
    assert first["label"] != "hate"
    assert max(first["probabilities"]) < 0.60
    assert hub.get(first["feedback_id"]).queued

    for _ in range(100):
        result = hub.score(novel, "en")
        hub.resolve(result["feedback_id"], "relabeled", "hate")

    stream_failures = []
    stream_versions = set()
    stop = threading.Event()

    def stream():
        while not stop.is_set():
            try:
                result = hub.score("just a regular message about tea", "en")
                stream_versions.add(result["model_version"])
            except Exception as exc:  # pragma: no cover - failure path
                stream_failures.append(exc)

    thread = threading.Thread(target=stream)
    thread.start()
    try:
        new_version = hub.retrain("en")
    finally:
        stop.set()
        thread.join(timeout=30)

    elapsed = time.perf_counter() - start
    assert new_version == 2
    assert hub.registry.current_version("en") == 2
    assert hub.score(novel, "en")["label"] == "hate"
    assert not stream_failures, f"scoring stream saw failures: {stream_failures[:3]}"
    assert stream_versions <= {1, 2}
    assert all(isinstance(v, int) for v in stream_versions)
    assert elapsed < 120.0, f"feedback loop took {elapsed:.2f}s (budget 120s)"


# --- corpus -----------------------------------------------------------------------------


@acceptance("corpus-round-trip")
def test_collate_round_trip_and_synth_invariants(tmp_path, lexicons):
    """collate -> write -> read is record-identical; synthetic output passes invariants."""
    src_a = tmp_path / "a.tsv"
    src_a.write_text(
        "text\tlabel\nyou are all vermin people\thateful\nlovely weather today\tok\n",
        encoding="utf-8",
    )
    src_b = tmp_path / "b.tsv"
    src_b.write_text(
        "msg\tcls\nतू एकदम चूतिया है\t1\nआज मौसम अच्छा है\t0\n",
        encoding="utf-8",
    )
    sources = [
        SourceDescriptor(
            source_id="a", path=str(src_a), text_column="text", label_column="label",
            label_map={"hateful": "hate", "ok": "neither"}, language="en",
        ),
        SourceDescriptor(
            source_id="b", path=str(src_b), text_column="msg", label_column="cls",
            label_map={"1": "abusive", "0": "neither"}, language="hi",
        ),
    ]
    collated = corpus.collate(sources)
    out = tmp_path / "unified.tsv"
    corpus.write_corpus(collated, out)
    assert corpus.read_corpus(out) == collated

    spec = synth.SynthSpec(
        counts={"en": 60, "hi": 30, "hi_codemix": 30}, mixture=(0.25, 0.15, 0.60), seed=3
    )
    generated = synth.generate_synthetic_corpus(spec, lexicons)
    assert sorted(r.id for r in generated) == list(range(len(generated)))
    for record in generated:
        assert record.label in LABELS
        assert record.text.strip()
        assert corpus.weak_label(record.text, lexicons) == record.label
    synth_path = tmp_path / "synth.tsv"
    corpus.write_corpus(generated, synth_path)
    assert corpus.read_corpus(synth_path) == generated
