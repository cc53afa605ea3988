"""Command-line interface: corpus tooling, training, evaluation, serving."""

from __future__ import annotations

import functools
import json
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import bench as bench_module
from . import corpus, linear, synth, textnorm
from .hub import LABEL_TO_INDEX, Hub, HubError, ServingModel, train_serving_model
from .neural import network
from .service import ServiceConfig, create_app
from .textnorm import LANGUAGES, default_lexicons

__all__ = ["main"]

_META_FILE = "meta.json"
_CHECKPOINT_FILE = "checkpoint.txt"
_TOKEN_FILE = "tokens.tsv"

_LANGUAGE_CHOICE = click.Choice(LANGUAGES)


def _fail_on_domain_errors(fn):
    """Translate domain errors into a message + exit status 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (HubError, ValueError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
def main() -> None:
    """Multilingual hate-speech moderation toolkit."""


# --- corpus commands ---------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Source-descriptor config (JSON list).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Unified corpus output path (TSV).")
@click.option("--dedup/--no-dedup", default=False, show_default=True, help="Drop exact duplicate texts across sources.")
@_fail_on_domain_errors
def ingest(config_path: str, out_path: str, dedup: bool) -> None:
    """Collate raw source files into one unified, harmonized corpus."""
    sources = corpus.load_source_config(config_path)
    records = corpus.collate(sources, dedup=dedup)
    corpus.write_corpus(records, out_path)
    stats = corpus.compute_stats(records)
    click.echo(f"wrote {stats.total} records from {len(sources)} sources to {out_path}")
    for language, item in sorted(stats.languages.items()):
        click.echo(
            f"  {language}: {item.count} records, "
            f"hate {item.hate_fraction:.3f}, abusive {item.abuse_fraction:.3f}"
        )


def _parse_count(value: str) -> tuple:
    lang, sep, count = value.partition("=")
    if not sep or not count.isdigit():
        raise click.BadParameter(f"{value!r}: expected LANGUAGE=COUNT")
    return lang, int(count)


def _parse_mixture(value: str) -> tuple:
    parts = value.split(",")
    if len(parts) != 3:
        raise click.BadParameter(f"{value!r}: expected HATE,ABUSIVE,NEITHER fractions")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise click.BadParameter(f"{value!r}: fractions must be numbers") from exc


@main.command(name="synth")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Output corpus path (TSV).")
@click.option("--count", "counts", multiple=True, required=True, metavar="LANGUAGE=N", help="Records per language; repeatable.")
@click.option("--mixture", default="0.25,0.15,0.60", show_default=True, metavar="H,A,N", help="Class mixture (hate,abusive,neither); sums to 1.")
@click.option("--seed", default=0, show_default=True, type=int, help="Generator seed.")
@_fail_on_domain_errors
def synth_cmd(out_path: str, counts: tuple, mixture: str, seed: int) -> None:
    """Generate a deterministic synthetic corpus with planted label signals."""
    spec = synth.SynthSpec(
        counts=dict(_parse_count(c) for c in counts),
        mixture=_parse_mixture(mixture),
        seed=seed,
    )
    records = synth.generate_synthetic_corpus(spec)
    corpus.write_corpus(records, out_path)
    by_key = {}
    for record in records:
        key = (record.language, record.label)
        by_key[key] = by_key.get(key, 0) + 1
    click.echo(f"wrote {len(records)} records to {out_path}")
    for (language, label), count in sorted(by_key.items()):
        click.echo(f"  {language}/{label}: {count}")


# --- text commands -----------------------------------------------------------------


@main.command()
@click.option("--language", default="en", show_default=True, type=_LANGUAGE_CHOICE, help="Tokenizer language route.")
@click.argument("text")
@_fail_on_domain_errors
def normalize(language: str, text: str) -> None:
    """Run the full normalization pipeline and print the token stream."""
    tokens = textnorm.pipeline(text, language)
    click.echo(" ".join(token.surface for token in tokens))


@main.command()
@click.argument("tag")
@_fail_on_domain_errors
def segment(tag: str) -> None:
    """Segment one hashtag into words with the unigram language model."""
    click.echo(" ".join(textnorm.segment_hashtag(tag)))


# --- training / evaluation ----------------------------------------------------------


def _load_language_records(corpus_path: str, language: str) -> list:
    records = [r for r in corpus.read_corpus(corpus_path) if r.language == language]
    if not records:
        raise click.ClickException(f"{corpus_path}: no records for language {language!r}")
    return records


def _write_meta(directory: Path, meta: dict) -> None:
    with open(directory / _META_FILE, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_meta(directory: Path) -> dict:
    path = directory / _META_FILE
    if not path.exists():
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Unified training corpus.")
@click.option("--language", required=True, type=_LANGUAGE_CHOICE, help="Language slice to train on.")
@click.option("--model", "model_kind", default="linear", show_default=True, type=click.Choice(("linear", "neural")), help="Model family.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Standalone model output directory.")
@click.option("--hub", "hub_root", type=click.Path(file_okay=False), help="Publish into this hub's model registry instead of --out.")
@click.option("--l2", default=1e-4, show_default=True, type=float, help="[linear] L2 penalty.")
@click.option("--max-iter", default=5000, show_default=True, type=int, help="[linear] Max epochs.")
@click.option("--learning-rate", default=None, type=float, help="Step size (family default when omitted: 0.1 linear, 0.001 neural).")
@click.option("--batch-size", default=None, type=int, help="Mini-batch size (family default when omitted: 256 linear, 30 neural).")
@click.option("--seed", default=0, show_default=True, type=int, help="Shuffle/init seed.")
@click.option("--epochs", default=22, show_default=True, type=int, help="[neural] Training epochs.")
@click.option("--optimizer", default="sgd", show_default=True, type=click.Choice(("sgd", "adam")), help="[neural] Optimizer.")
@click.option("--hidden", default=64, show_default=True, type=int, help="[neural] BiLSTM hidden size.")
@click.option("--dropout", default=0.2, show_default=True, type=float, help="[neural] Dropout probability.")
@click.option("--seq-len", default=48, show_default=True, type=int, help="[neural] Token window (pad/truncate).")
@click.option("--max-vocab", default=4000, show_default=True, type=int, help="[neural] Token-table cap.")
@_fail_on_domain_errors
def train(
    corpus_path: str,
    language: str,
    model_kind: str,
    out_dir: str,
    hub_root: str,
    l2: float,
    max_iter: int,
    learning_rate: float,
    batch_size: int,
    seed: int,
    epochs: int,
    optimizer: str,
    hidden: int,
    dropout: float,
    seq_len: int,
    max_vocab: int,
) -> None:
    """Train a model on one language slice of a unified corpus."""
    if bool(out_dir) == bool(hub_root):
        raise click.ClickException("exactly one of --out or --hub is required")

    def linear_hyper() -> linear.LogRegHyper:
        return linear.LogRegHyper(
            l2=l2,
            max_iter=max_iter,
            learning_rate=0.1 if learning_rate is None else learning_rate,
            batch_size=256 if batch_size is None else batch_size,
            seed=seed,
        )

    if hub_root:
        if model_kind != "linear":
            raise click.ClickException("only linear models can be published to a hub")
        hub = Hub(hub_root, hyper=linear_hyper())
        version = hub.bootstrap(language, corpus=corpus_path)
        click.echo(f"published {language} model version {version} to {hub_root}")
        return

    records = _load_language_records(corpus_path, language)
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)

    if model_kind == "linear":
        serving = train_serving_model(
            [r.text for r in records], [r.label for r in records], language,
            hyper=linear_hyper(),
        )
        serving.save(directory)
        _write_meta(directory, {"kind": "linear", "language": language})
        click.echo(f"trained linear model on {len(records)} records -> {directory}")
        return

    lexicons = default_lexicons()
    docs = [
        [t.surface for t in textnorm.pipeline(r.text, language, lexicon=lexicons)]
        for r in records
    ]
    table = network.build_token_table(docs, max_vocab=max_vocab)
    ids = np.stack([network.encode_tokens(table, doc, seq_len) for doc in docs])
    labels = np.array([LABEL_TO_INDEX[r.label] for r in records])
    config = network.NetConfig(vocab_size=len(table), seed=seed)
    hyper = network.TrainHyper(
        epochs=epochs,
        batch_size=30 if batch_size is None else batch_size,
        optimizer=optimizer,
        learning_rate=0.001 if learning_rate is None else learning_rate,
        dropout=dropout,
        hidden=hidden,
    )
    net, report = network.train(config, hyper, (ids, labels))
    network.save_checkpoint(net, directory / _CHECKPOINT_FILE)
    network.save_token_table(table, directory / _TOKEN_FILE)
    _write_meta(directory, {"kind": "neural", "language": language, "seq_len": seq_len})
    click.echo(
        f"trained neural model on {len(records)} records "
        f"({report.epochs_run} epochs, final loss {report.losses[-1]:.4f}) -> {directory}"
    )


def _format_eval_table(rows: list) -> str:
    headers = ("model", "f1_neither", "f1_hate", "f1_abuse", "accuracy")
    lines = ["  ".join(f"{h:>12}" for h in headers)]
    for row in rows:
        lines.append(
            "  ".join(
                [f"{row['model']:>12}"]
                + [f"{row[key]:>12.4f}" for key in headers[1:]]
            )
        )
    return "\n".join(lines)


@main.command(name="eval")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Evaluation corpus.")
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True, file_okay=False), help="Trained model directory.")
@click.option("--language", type=_LANGUAGE_CHOICE, help="Language slice (defaults to the model's training language).")
@click.option("--json", "as_json", is_flag=True, help="Emit the machine-readable report instead of the table.")
@_fail_on_domain_errors
def eval_cmd(corpus_path: str, model_dir: str, language: str, as_json: bool) -> None:
    """Score a corpus and print per-class F1 plus accuracy."""
    directory = Path(model_dir)
    meta = _read_meta(directory)
    kind = meta.get("kind", "linear")
    language = language or meta.get("language") or "en"
    records = _load_language_records(corpus_path, language)
    actual = np.array([LABEL_TO_INDEX[r.label] for r in records])

    if kind == "linear":
        serving = ServingModel.load(directory, language)
        predicted = np.array(
            [LABEL_TO_INDEX[serving.score(r.text)[0]] for r in records]
        )
    else:
        net = network.load_checkpoint(directory / _CHECKPOINT_FILE)
        table = network.load_token_table(directory / _TOKEN_FILE)
        seq_len = int(meta.get("seq_len", 48))
        lexicons = default_lexicons()
        ids = np.stack(
            [
                network.encode_tokens(
                    table,
                    [t.surface for t in textnorm.pipeline(r.text, language, lexicon=lexicons)],
                    seq_len,
                )
                for r in records
            ]
        )
        predicted = net.predict(ids)

    metrics = linear.compute_metrics(actual, predicted)
    row = {"model": kind, "language": language, "records": len(records)}
    row.update(linear.report_row(metrics))
    if as_json:
        click.echo(json.dumps(row, sort_keys=True))
    else:
        click.echo(_format_eval_table([row]))


@main.command()
@click.option("--samples", default=64, show_default=True, type=int, help="Planted-dataset size.")
@click.option("--seq-len", default=16, show_default=True, type=int, help="Planted-dataset sequence length.")
@click.option("--vocab-size", default=64, show_default=True, type=int, help="Planted-dataset vocabulary size.")
@click.option("--epochs", default=60, show_default=True, type=int, help="Training epochs per configuration.")
@click.option("--seed", default=42, show_default=True, type=int, help="Dataset/initialization seed.")
@click.option("--json", "as_json", is_flag=True, help="Emit rows as JSON.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Also write the JSON report here.")
@_fail_on_domain_errors
def ablate(
    samples: int,
    seq_len: int,
    vocab_size: int,
    epochs: int,
    seed: int,
    as_json: bool,
    out_path: str,
) -> None:
    """Run the named architecture ablations on the planted-signal dataset."""
    dataset = network.planted_signal_dataset(
        n=samples, seq_len=seq_len, vocab_size=vocab_size, seed=seed
    )
    base = network.NetConfig(vocab_size=vocab_size, seed=seed)
    configs = network.standard_ablation_configs(base)
    hyper = network.TrainHyper(epochs=epochs)
    rows = network.ablate(configs, dataset, hyper)

    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")
    if as_json:
        click.echo(json.dumps(rows))
        return
    headers = ("config", "f1_neither", "f1_hate", "f1_abuse", "accuracy")
    width = max(len(r["config"]) for r in rows)
    click.echo("  ".join([f"{'config':<{width}}"] + [f"{h:>10}" for h in headers[1:]]))
    for row in rows:
        click.echo(
            "  ".join(
                [f"{row['config']:<{width}}"]
                + [f"{row[key]:>10.4f}" for key in headers[1:]]
            )
        )


# --- service / benchmark -------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Service config file (JSON).")
@click.option("--host", default=None, help="Bind host (overrides config).")
@click.option("--port", default=None, type=int, help="Bind port (overrides config).")
@click.option("--static-dir", default=None, type=click.Path(file_okay=False), help="Static web-UI directory (overrides config).")
@_fail_on_domain_errors
def serve(config_path: str, host: str, port: int, static_dir: str) -> None:
    """Run the moderation REST service."""
    import uvicorn

    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig.from_env()
    overrides = {}
    if host is not None:
        overrides["host"] = host
    if port is not None:
        overrides["port"] = port
    if static_dir is not None:
        overrides["static_dir"] = static_dir
    if overrides:
        config = replace(config, **overrides)
    app = create_app(config)
    click.echo(f"serving on http://{config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


@main.command(name="bench")
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True, file_okay=False), help="Trained linear model directory.")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Corpus supplying request texts.")
@click.option("--requests", default=1000, show_default=True, type=int, help="Number of scoring requests.")
@click.option("--concurrency", default=1, show_default=True, type=int, help="Concurrent scoring threads.")
@click.option("--language", default="en", show_default=True, type=_LANGUAGE_CHOICE, help="Pipeline language for scoring.")
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@_fail_on_domain_errors
def bench_cmd(
    model_dir: str,
    corpus_path: str,
    requests: int,
    concurrency: int,
    language: str,
    as_json: bool,
) -> None:
    """Benchmark single-comment scoring latency against a local model."""
    report = bench_module.run_benchmark(
        model_dir, corpus_path, requests, concurrency=concurrency, language=language
    )
    if as_json:
        click.echo(json.dumps(report.to_json(), sort_keys=True))
        return
    click.echo(
        f"{report.requests} requests, concurrency {report.concurrency}: "
        f"p50 {report.p50_ms:.2f} ms, p95 {report.p95_ms:.2f} ms, p99 {report.p99_ms:.2f} ms, "
        f"{report.throughput_rps:.1f} req/s over {report.total_seconds:.2f} s"
    )


@main.command()
@click.option("--hub", "hub_root", required=True, type=click.Path(exists=True, file_okay=False), help="Hub data directory.")
@_fail_on_domain_errors
def compact(hub_root: str) -> None:
    """Fold verdict amendments into the feedback log and rewrite it."""
    hub = Hub(hub_root)
    count = hub.compact()
    click.echo(f"compacted feedback log to {count} records")


if __name__ == "__main__":
    main()
