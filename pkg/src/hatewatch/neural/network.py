"""The micro CNN-BiLSTM: configuration, wiring, training, ablation.

Architecture (all toggleable): embedding → three parallel conv branches
(kernels 3/4/5, batchnorm, ReLU, global max-pool) concatenated to a single
feature block, plus a (stacked) BiLSTM path over the embedded sequence whose
final states feed a dense layer; both paths merge, pass dropout, and a final
dense layer produces the three class scores.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import layers as L

__all__ = [
    "NetConfig",
    "TrainHyper",
    "TrainReport",
    "MicroNet",
    "param_count",
    "train",
    "ablate",
    "standard_ablation_configs",
    "planted_signal_dataset",
    "save_checkpoint",
    "load_checkpoint",
    "build_token_table",
    "encode_tokens",
    "save_token_table",
    "load_token_table",
]

KERNEL_SIZES = (3, 4, 5)


@dataclass(frozen=True)
class NetConfig:
    """Structure toggles; at least one conv branch or BiLSTM must be on."""

    vocab_size: int
    embedding_dim: int = 32
    conv_branches: tuple = (True, True, True)  # C1, C2, C3 with kernels 3/4/5
    feature_maps: int = 64
    batchnorm: bool = True
    bilstm0: bool = True
    bilstm1: bool = True
    hidden_size: int = 64
    dense_dim: int = 64
    final_activation: str = "softmax"
    dropout: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.vocab_size < 1:
            raise ValueError("vocab_size must be positive")
        if len(self.conv_branches) != 3:
            raise ValueError("conv_branches must have exactly three toggles")
        if not (any(self.conv_branches) or self.bilstm0 or self.bilstm1):
            raise ValueError("at least one conv branch or BiLSTM must be enabled")
        if self.final_activation not in ("softmax", "sigmoid"):
            raise ValueError("final_activation must be softmax or sigmoid")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def conv_concat_width(self) -> int:
        return self.feature_maps * sum(self.conv_branches)

    @property
    def has_bilstm(self) -> bool:
        return self.bilstm0 or self.bilstm1

    @property
    def merge_width(self) -> int:
        width = 0
        if any(self.conv_branches):
            width += self.dense_dim
        if self.has_bilstm:
            width += self.dense_dim
        return width


@dataclass(frozen=True)
class TrainHyper:
    """Training hyperparameters (defaults: the EN row of the tuning table)."""

    epochs: int = 22
    batch_size: int = 30
    optimizer: str = "sgd"
    learning_rate: float = 0.001
    dropout: float = 0.2
    hidden: int = 64

    def __post_init__(self) -> None:
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("invalid training hyperparameters")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be sgd or adam")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.hidden < 1:
            raise ValueError("hidden must be positive")


@dataclass(frozen=True)
class TrainReport:
    losses: tuple
    epochs_run: int
    seconds: float


class MicroNet:
    """A wired network instance; owns parameters and layer state."""

    def __init__(self, config: NetConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        self._dropout_rng = np.random.default_rng([config.seed, 7919])

        cfg = config
        self.embed = L.Embedding("embed", cfg.vocab_size, cfg.embedding_dim, rng)

        self.convs, self.bns, self.relus, self.pools = [], [], [], []
        for idx, (on, k) in enumerate(zip(cfg.conv_branches, KERNEL_SIZES)):
            if not on:
                self.convs.append(None)
                self.bns.append(None)
                self.relus.append(None)
                self.pools.append(None)
                continue
            self.convs.append(L.Conv1D(f"c{idx}", k, cfg.embedding_dim, cfg.feature_maps, rng))
            self.bns.append(L.BatchNorm(f"b{idx}", cfg.feature_maps) if cfg.batchnorm else None)
            self.relus.append(L.ReLU())
            self.pools.append(L.GlobalMaxPool())

        self.bl0 = (
            L.BiLSTM("bl0", cfg.embedding_dim, cfg.hidden_size, rng) if cfg.bilstm0 else None
        )
        bl1_in = 2 * cfg.hidden_size if cfg.bilstm0 else cfg.embedding_dim
        self.bl1 = L.BiLSTM("bl1", bl1_in, cfg.hidden_size, rng) if cfg.bilstm1 else None

        self.fc0 = (
            L.Dense("fc0", cfg.conv_concat_width, cfg.dense_dim, rng)
            if any(cfg.conv_branches)
            else None
        )
        self.fc0_relu = L.ReLU() if self.fc0 is not None else None
        self.fc1 = (
            L.Dense("fc1", 2 * cfg.hidden_size, cfg.dense_dim, rng) if cfg.has_bilstm else None
        )
        self.fc1_relu = L.ReLU() if self.fc1 is not None else None

        self.drop = L.Dropout(cfg.dropout, self._dropout_rng)
        self.fc2 = L.Dense("fc2", cfg.merge_width, 3, rng)

        self._cache = {}

    # -- plumbing ---------------------------------------------------------

    def params(self) -> list:
        out = self.embed.params()
        for conv, bn in zip(self.convs, self.bns):
            if conv is not None:
                out += conv.params()
            if bn is not None:
                out += bn.params()
        for bl in (self.bl0, self.bl1):
            if bl is not None:
                out += bl.params()
        for fc in (self.fc0, self.fc1, self.fc2):
            if fc is not None:
                out += fc.params()
        return out

    def state_blocks(self) -> dict:
        blocks = {}
        for bn in self.bns:
            if bn is not None:
                for key, val in bn.state().items():
                    blocks[f"{bn.gamma.name.rsplit('.', 1)[0]}.{key}"] = val
        return blocks

    def zero_grads(self) -> None:
        for p in self.params():
            p.zero_grad()

    def num_params(self) -> int:
        return sum(p.value.size for p in self.params())

    # -- forward / backward -------------------------------------------------

    def forward(self, ids: np.ndarray, train: bool = False) -> np.ndarray:
        ids = np.asarray(ids)
        squeeze = ids.ndim == 1
        if squeeze:
            ids = ids[None, :]

        x = self.embed.forward(ids, train)
        cache = {"squeeze": squeeze}

        pooled = []
        for conv, bn, relu, pool in zip(self.convs, self.bns, self.relus, self.pools):
            if conv is None:
                continue
            h = conv.forward(x, train)
            if bn is not None:
                h = bn.forward(h, train)
            h = relu.forward(h, train)
            pooled.append(pool.forward(h, train))
        if pooled:
            m0 = np.concatenate(pooled, axis=1)
            cache["pool_widths"] = [p.shape[1] for p in pooled]
            f0 = self.fc0_relu.forward(self.fc0.forward(m0, train), train)
        else:
            f0 = None

        if self.config.has_bilstm:
            seq = x
            if self.bl0 is not None:
                seq = self.bl0.forward(seq, train)
            if self.bl1 is not None:
                seq = self.bl1.forward(seq, train)
            H = self.config.hidden_size
            last = np.concatenate([seq[:, -1, :H], seq[:, 0, H:]], axis=1)
            cache["seq_shape"] = seq.shape
            f1 = self.fc1_relu.forward(self.fc1.forward(last, train), train)
        else:
            f1 = None

        merged = np.concatenate([f for f in (f0, f1) if f is not None], axis=1)
        cache["f0_width"] = 0 if f0 is None else f0.shape[1]
        merged = self.drop.forward(merged, train)
        logits = self.fc2.forward(merged, train)
        self._cache = cache
        return logits[0] if squeeze else logits

    def backward(self, dlogits: np.ndarray) -> None:
        cache = self._cache
        if cache.get("squeeze"):
            dlogits = np.atleast_2d(dlogits)
        dmerged = self.drop.backward(self.fc2.backward(dlogits))

        w0 = cache["f0_width"]
        df0 = dmerged[:, :w0] if w0 else None
        df1 = dmerged[:, w0:] if dmerged.shape[1] > w0 else None

        dx_total = None

        if df0 is not None:
            dm0 = self.fc0.backward(self.fc0_relu.backward(df0))
            offset = 0
            for conv, bn, relu, pool, width in zip(
                self.convs,
                self.bns,
                self.relus,
                self.pools,
                cache["pool_widths"],
            ):
                if conv is None:
                    continue
                dpool = dm0[:, offset : offset + width]
                offset += width
                dh = pool.backward(dpool)
                dh = relu.backward(dh)
                if bn is not None:
                    dh = bn.backward(dh)
                dx = conv.backward(dh)
                dx_total = dx if dx_total is None else dx_total + dx

        if df1 is not None:
            dlast = self.fc1.backward(self.fc1_relu.backward(df1))
            B, T, W = cache["seq_shape"]
            H = self.config.hidden_size
            dseq = np.zeros((B, T, W))
            dseq[:, -1, :H] = dlast[:, :H]
            dseq[:, 0, H:] = dlast[:, H:]
            if self.bl1 is not None:
                dseq = self.bl1.backward(dseq)
            if self.bl0 is not None:
                dseq = self.bl0.backward(dseq)
            dx_total = dseq if dx_total is None else dx_total + dseq

        self.embed.backward(dx_total)

    # -- heads -----------------------------------------------------------------

    def predict_proba(self, ids: np.ndarray) -> np.ndarray:
        logits = np.atleast_2d(self.forward(ids, train=False))
        if self.config.final_activation == "softmax":
            shifted = logits - logits.max(axis=1, keepdims=True)
            exp = np.exp(shifted)
            probs = exp / exp.sum(axis=1, keepdims=True)
        else:
            probs = L.sigmoid(logits)
        return probs[0] if np.asarray(ids).ndim == 1 else probs

    def predict(self, ids: np.ndarray) -> np.ndarray:
        return np.atleast_2d(self.predict_proba(ids)).argmax(axis=1)


def loss_and_grad(net: MicroNet, logits: np.ndarray, labels: np.ndarray):
    """(loss, dlogits) for softmax CE or summed sigmoid BCE, both batch means."""
    logits = np.atleast_2d(logits)
    labels = np.asarray(labels)
    n = logits.shape[0]
    onehot = np.zeros_like(logits)
    onehot[np.arange(n), labels] = 1.0
    if net.config.final_activation == "softmax":
        shifted = logits - logits.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        probs = exp / exp.sum(axis=1, keepdims=True)
        loss = float(-np.log(np.clip(probs[np.arange(n), labels], 1e-300, None)).mean())
        dlogits = (probs - onehot) / n
    else:
        s = L.sigmoid(logits)
        s = np.clip(s, 1e-12, 1 - 1e-12)
        loss = float(-(onehot * np.log(s) + (1 - onehot) * np.log(1 - s)).sum(axis=1).mean())
        dlogits = (s - onehot) / n
    return loss, dlogits


class _SGD:
    def __init__(self, params, lr):
        self.params = params
        self.lr = lr

    def step(self):
        for p in self.params:
            p.value -= self.lr * p.grad


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]
        self.t = 0

    def step(self):
        self.t += 1
        for p, m, v in zip(self.params, self.m, self.v):
            m[...] = self.beta1 * m + (1 - self.beta1) * p.grad
            v[...] = self.beta2 * v + (1 - self.beta2) * p.grad**2
            mhat = m / (1 - self.beta1**self.t)
            vhat = v / (1 - self.beta2**self.t)
            p.value -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def train(config: NetConfig, hyper: TrainHyper, dataset) -> tuple:
    """Mini-batch training, deterministic given config.seed.

    ``dataset`` is (ids array (N, T), labels array (N,)).  The hyper's
    dropout and hidden size are authoritative and folded into the config.
    """
    config = replace(config, dropout=hyper.dropout, hidden_size=hyper.hidden)
    ids, labels = dataset
    ids = np.asarray(ids)
    labels = np.asarray(labels)
    if ids.ndim != 2 or len(ids) != len(labels):
        raise ValueError("dataset must be (N, T) ids with N labels")

    net = MicroNet(config)
    opt_cls = _SGD if hyper.optimizer == "sgd" else _Adam
    opt = opt_cls(net.params(), hyper.learning_rate)
    rng = np.random.default_rng([config.seed, 104729])

    start = time.perf_counter()
    losses = []
    for _ in range(hyper.epochs):
        order = rng.permutation(len(ids))
        epoch_losses = []
        for lo in range(0, len(order), hyper.batch_size):
            batch = order[lo : lo + hyper.batch_size]
            net.zero_grads()
            logits = net.forward(ids[batch], train=True)
            loss, dlogits = loss_and_grad(net, logits, labels[batch])
            if not np.isfinite(loss):
                raise FloatingPointError("non-finite training loss")
            net.backward(dlogits)
            opt.step()
            epoch_losses.append(loss)
        losses.append(float(np.mean(epoch_losses)))

    report = TrainReport(
        losses=tuple(losses),
        epochs_run=hyper.epochs,
        seconds=time.perf_counter() - start,
    )
    return net, report


# --- parameter counting ------------------------------------------------------------

def param_count(config: NetConfig) -> int:
    """Closed-form trainable-parameter count for a configuration."""
    E, F, H, D = (
        config.embedding_dim,
        config.feature_maps,
        config.hidden_size,
        config.dense_dim,
    )
    total = config.vocab_size * E
    for on, k in zip(config.conv_branches, KERNEL_SIZES):
        if on:
            total += k * E * F + F
            if config.batchnorm:
                total += 2 * F
    def bilstm(in_dim):
        return 2 * (in_dim * 4 * H + H * 4 * H + 4 * H)
    if config.bilstm0:
        total += bilstm(E)
    if config.bilstm1:
        total += bilstm(2 * H if config.bilstm0 else E)
    if any(config.conv_branches):
        total += config.conv_concat_width * D + D
    if config.has_bilstm:
        total += 2 * H * D + D
    total += config.merge_width * 3 + 3
    return total


# --- ablation harness ------------------------------------------------------------------

def standard_ablation_configs(base: NetConfig) -> list:
    """The named ablation rows, each as (label, config)."""
    rows = [
        ("Full", {}),
        ("Without C1 and C2 and C3", {"conv_branches": (False, False, False)}),
        ("C1 only", {"conv_branches": (True, False, False)}),
        ("C1 and C2", {"conv_branches": (True, True, False)}),
        ("Without bl0 and bl1", {"bilstm0": False, "bilstm1": False}),
        ("bl0 only", {"bilstm1": False}),
    ]
    return [(label, replace(base, **overrides)) for label, overrides in rows]


def ablate(configs: Sequence, dataset, hyper: TrainHyper = None) -> list:
    """Train each config on identical data/seed; emit per-class F1 + accuracy.

    ``configs`` is a list of (label, NetConfig) pairs (≥ 2) or bare configs.
    """
    from ..linear import compute_metrics  # local import to avoid cycles

    if len(configs) < 2:
        raise ValueError("ablation needs at least two configurations")
    hyper = hyper or TrainHyper()
    ids, labels = dataset

    report = []
    for entry in configs:
        label, config = entry if isinstance(entry, tuple) else (str(entry), entry)
        net, _ = train(config, hyper, dataset)
        preds = net.predict(np.asarray(ids))
        metrics = compute_metrics(labels, preds)
        f1_by_class = dict(zip(("hate", "abusive", "neither"), metrics.f1))
        report.append(
            {
                "config": label,
                "f1_neither": round(f1_by_class["neither"], 4),
                "f1_hate": round(f1_by_class["hate"], 4),
                "f1_abuse": round(f1_by_class["abusive"], 4),
                "accuracy": round(metrics.accuracy, 4),
            }
        )
    return report


# --- token encoding -----------------------------------------------------------------------

PAD_ID = 0
UNK_ID = 1


def build_token_table(docs: Sequence, max_vocab: int = None) -> dict:
    """token -> id, frequency-ranked; ids 0/1 are reserved for pad/unknown."""
    counts = {}
    for doc in docs:
        for token in doc:
            counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts, key=lambda t: (-counts[t], t))
    if max_vocab is not None:
        if max_vocab < 3:
            raise ValueError("max_vocab must leave room for pad/unk plus one token")
        ranked = ranked[: max_vocab - 2]
    table = {"<pad>": PAD_ID, "<unk>": UNK_ID}
    for token in ranked:
        table[token] = len(table)
    return table


def encode_tokens(table: dict, tokens: Sequence, seq_len: int) -> np.ndarray:
    """Fixed-length id sequence: truncate past ``seq_len``, pad with 0."""
    ids = [table.get(token, UNK_ID) for token in tokens[:seq_len]]
    ids += [PAD_ID] * (seq_len - len(ids))
    return np.array(ids, dtype=np.int64)


def save_token_table(table: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for token, token_id in sorted(table.items(), key=lambda kv: kv[1]):
            fh.write(f"{token}\t{token_id}\n")


def load_token_table(path) -> dict:
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            token, token_id = line.rstrip("\n").split("\t")
            table[token] = int(token_id)
    return table


# --- planted-signal dataset --------------------------------------------------------------

def planted_signal_dataset(
    n: int = 64, seq_len: int = 16, vocab_size: int = 64, seed: int = 42
) -> tuple:
    """A tiny overfit-me dataset: each class has a dedicated signal token.

    Sample of class c carries token c+1 at half the positions; the rest is
    shared filler drawn from ids 4..vocab-1.  Any healthy configuration can
    memorize it; broken gradients cannot.
    """
    if vocab_size < 8 or seq_len < 6:
        raise ValueError("vocab_size >= 8 and seq_len >= 6 required")
    rng = np.random.default_rng(seed)
    ids = rng.integers(4, vocab_size, size=(n, seq_len))
    labels = np.array([i % 3 for i in range(n)], dtype=np.int64)
    half = seq_len // 2
    for row in range(n):
        positions = rng.choice(seq_len, size=half, replace=False)
        ids[row, positions] = labels[row] + 1
    return ids.astype(np.int64), labels


# --- checkpointing --------------------------------------------------------------------------

_FORMAT_VERSION = 1


def save_checkpoint(net: MicroNet, path) -> None:
    """Text header (config JSON) + named parameter/state blocks."""
    cfg = net.config
    header = {
        "format_version": _FORMAT_VERSION,
        "config": {
            "vocab_size": cfg.vocab_size,
            "embedding_dim": cfg.embedding_dim,
            "conv_branches": list(cfg.conv_branches),
            "feature_maps": cfg.feature_maps,
            "batchnorm": cfg.batchnorm,
            "bilstm0": cfg.bilstm0,
            "bilstm1": cfg.bilstm1,
            "hidden_size": cfg.hidden_size,
            "dense_dim": cfg.dense_dim,
            "final_activation": cfg.final_activation,
            "dropout": cfg.dropout,
            "seed": cfg.seed,
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        blocks = [(p.name, p.value) for p in net.params()]
        blocks += sorted(net.state_blocks().items())
        for name, value in blocks:
            fh.write(f"{name}\t{json.dumps(list(value.shape))}\n")
            fh.write(" ".join(repr(float(v)) for v in value.ravel()) + "\n")


def load_checkpoint(path) -> MicroNet:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format_version") != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint format")
        cfg_dict = dict(header["config"])
        cfg_dict["conv_branches"] = tuple(cfg_dict["conv_branches"])
        config = NetConfig(**cfg_dict)
        net = MicroNet(config)
        by_name = {p.name: p.value for p in net.params()}
        by_name.update(net.state_blocks())
        while True:
            meta = fh.readline()
            if not meta:
                break
            name, shape_json = meta.rstrip("\n").split("\t")
            shape = tuple(json.loads(shape_json))
            values = np.array([float(v) for v in fh.readline().split()]).reshape(shape)
            if name not in by_name:
                raise ValueError(f"{path}: unknown block {name!r}")
            if by_name[name].shape != shape:
                raise ValueError(f"{path}: shape mismatch for {name!r}")
            by_name[name][...] = values
    return net
