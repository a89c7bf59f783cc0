"""The edit classifier: bidirectional LSTM sentence encoder, multi-head
attention over edge triples, and an MLP or bilinear classification head,
plus its training loop.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import numerics as nm
from .corpus import Vocabulary
from .errors import DataError, NumericalError
from .graph import RelationVocabulary, WordRelationGraph
from .numerics import Tape, Tensor
from .supervision import LABELS, LabeledGraph

CLASSIFIER_VARIANTS = ("mlp", "bilinear")


@dataclass
class ModelConfig:
    embedding_dim: int = 100
    hidden_size: int = 800  # both directions combined
    dropout: float = 0.2
    positional_encoding: bool = True
    heads: int = 4
    mlp_hidden: int | None = None  # defaults to hidden_size
    classifier: str = "mlp"

    def __post_init__(self):
        if self.hidden_size % 2:
            raise ValueError("hidden_size must be even (split across directions)")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.classifier not in CLASSIFIER_VARIANTS:
            raise ValueError(f"classifier must be one of {CLASSIFIER_VARIANTS}")

    @property
    def direction_size(self):
        return self.hidden_size // 2

    @property
    def mlp_width(self):
        return self.mlp_hidden if self.mlp_hidden is not None else self.hidden_size


@dataclass
class LossConfig:
    mode: str = "inverse"  # or "uniform"
    weights: np.ndarray | None = None  # filled from label frequencies when inverse

    def __post_init__(self):
        if self.mode not in ("inverse", "uniform"):
            raise ValueError(f"unknown class-weight mode {self.mode!r}")


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 5  # epochs without dev-loss improvement
    lr_decay: float = 0.99  # per-epoch learning-rate multiplier
    l2_decay: float | None = None  # alternative reading: per-epoch weight shrink
    dev_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("learning_rate", "batch_size", "max_epochs", "patience", "lr_decay"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def inverse_class_weights(frequencies):
    """w_c = (1/f_c) / sum_k(1/f_k); classes absent from the data get 0."""
    f = np.asarray(frequencies, dtype=np.float64)
    inv = np.where(f > 0, 1.0 / np.where(f > 0, f, 1.0), 0.0)
    total = inv.sum()
    if total == 0:
        raise ValueError("all class frequencies are zero")
    return (inv / total).astype(np.float32)


def resolve_class_weights(loss_config, frequencies):
    """Loss weights from the configured mode and the observed label
    frequencies; explicitly supplied weights win."""
    if loss_config.weights is not None:
        return np.asarray(loss_config.weights, dtype=np.float32)
    if loss_config.mode == "inverse":
        return inverse_class_weights(frequencies)
    return np.full(4, 0.25, dtype=np.float32)


def sinusoidal_encoding(length, dim):
    """Transformer-style positional table, shape (length, dim)."""
    pe = np.zeros((length, dim), dtype=np.float32)
    position = np.arange(length, dtype=np.float64)[:, None]
    half = (dim + 1) // 2
    div = np.exp(-math.log(10000.0) * (2.0 * np.arange(half) / dim))[None, :]
    angles = position * div
    pe[:, 0::2] = np.sin(angles)[:, : pe[:, 0::2].shape[1]]
    pe[:, 1::2] = np.cos(angles)[:, : pe[:, 1::2].shape[1]]
    return pe


@dataclass
class ModelState:
    """Everything needed to run the classifier: parameters plus the token
    and relation vocabularies and loss weights, checkpointable."""

    config: ModelConfig
    params: dict  # name -> Tensor
    vocab: Vocabulary
    relations: RelationVocabulary
    class_weights: np.ndarray

    def copy_params(self):
        return {name: p.values.copy() for name, p in self.params.items()}

    def load_param_values(self, values):
        for name, arr in values.items():
            self.params[name].values[...] = arr

    def zero_grads(self):
        for p in self.params.values():
            p.zero_grad()

    def grads(self):
        return {name: p.grad for name, p in self.params.items() if p.grad is not None}

    def save(self, path):
        nm.save_checkpoint(path, self.params)
        meta = {
            "config": {
                "embedding_dim": self.config.embedding_dim,
                "hidden_size": self.config.hidden_size,
                "dropout": self.config.dropout,
                "positional_encoding": self.config.positional_encoding,
                "heads": self.config.heads,
                "mlp_hidden": self.config.mlp_hidden,
                "classifier": self.config.classifier,
            },
            "tokens": self.vocab.tokens,
            "relations": list(self.relations.tags),
            "class_weights": [float(w) for w in self.class_weights],
        }
        with open(str(path) + ".meta.json", "w", encoding="utf-8") as f:
            json.dump(meta, f)

    @classmethod
    def load(cls, path):
        params = {name: Tensor(arr) for name, arr in nm.load_checkpoint(path).items()}
        try:
            with open(str(path) + ".meta.json", encoding="utf-8") as f:
                meta = json.load(f)
        except FileNotFoundError as exc:
            raise DataError(f"missing sidecar metadata for checkpoint {path}") from exc
        config = ModelConfig(**meta["config"])
        tokens = meta["tokens"]
        vocab = Vocabulary(tokens=tokens, ids={t: i for i, t in enumerate(tokens)},
                           vectors=params["embedding"].values)
        relations = RelationVocabulary(tags=tuple(meta["relations"]))
        weights = np.asarray(meta["class_weights"], dtype=np.float32)
        return cls(config=config, params=params, vocab=vocab,
                   relations=relations, class_weights=weights)


def _xavier(rng, fan_in, fan_out, shape):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return (rng.uniform(-limit, limit, size=shape)).astype(np.float32)


def init_state(config, vocab, relations, class_weights=None, seed=0):
    """Seeded parameter initialization; the embedding matrix starts from
    the vocabulary's (pretrained or seeded) vectors."""
    rng = np.random.default_rng(seed)
    m = config.hidden_size
    n = len(relations)
    h = config.direction_size
    e = config.embedding_dim
    if vocab.dim != e:
        raise DataError(f"vocabulary vectors have dim {vocab.dim}, config wants {e}")
    params = {"embedding": Tensor(vocab.vectors.copy())}
    for direction in ("fwd", "bwd"):
        params[f"lstm_{direction}.Wx"] = Tensor(_xavier(rng, e, 4 * h, (e, 4 * h)))
        params[f"lstm_{direction}.Wh"] = Tensor(_xavier(rng, h, 4 * h, (h, 4 * h)))
        params[f"lstm_{direction}.b"] = Tensor(np.zeros(4 * h, dtype=np.float32))
    for k in range(config.heads):
        params[f"attn.h{k}.V"] = Tensor(_xavier(rng, m, m, (m, m)))
        params[f"attn.h{k}.K"] = Tensor(_xavier(rng, m, m, (m, m)))
        params[f"attn.h{k}.Q"] = Tensor(_xavier(rng, n, n, (n, n)))
        params[f"attn.h{k}.We"] = Tensor(_xavier(rng, 2 * m + n, 1, (2 * m + n, 1)))
    params["attn.W"] = Tensor(_xavier(rng, config.heads, 1, (config.heads, 1)))
    width = config.mlp_width
    params["mlp.W1"] = Tensor(_xavier(rng, 2 * m + n, width, (2 * m + n, width)))
    params["mlp.b1"] = Tensor(np.zeros(width, dtype=np.float32))
    params["mlp.W2"] = Tensor(_xavier(rng, width, 4, (width, 4)))
    params["mlp.b2"] = Tensor(np.zeros(4, dtype=np.float32))
    if config.classifier == "bilinear":
        params["bilinear.W"] = Tensor(_xavier(rng, m, m, (4, m, m)))
        params["bilinear.b"] = Tensor(np.zeros(4, dtype=np.float32))
    if class_weights is None:
        class_weights = np.full(4, 0.25, dtype=np.float32)
    return ModelState(config=config, params=params, vocab=vocab,
                      relations=relations,
                      class_weights=np.asarray(class_weights, dtype=np.float32))


@dataclass
class SentenceEncoding:
    h: Tensor  # l x M, forward and backward states concatenated per token


def embedding_inputs(tokens, state, training=False, rng=None):
    """Embedding rows plus positional encoding and (training-only)
    dropout: the exact inputs handed to the recurrence."""
    config = state.config
    surfaces = [getattr(t, "surface", t) for t in tokens]
    ids = [state.vocab.lookup(s) for s in surfaces]
    x = nm.pick_rows(state.params["embedding"], ids)
    if config.positional_encoding:
        x = nm.add_const(x, sinusoidal_encoding(len(ids), config.embedding_dim))
    if training and config.dropout > 0.0:
        if rng is None:
            raise ValueError("training-mode encode needs an rng for dropout")
        keep = 1.0 - config.dropout
        mask = (rng.random(x.shape) < keep).astype(np.float32) / keep
        x = nm.mul_const(x, mask)
    return x


def _run_direction(x, length, params, hidden):
    h = Tensor(np.zeros((1, hidden), dtype=np.float32))
    c = Tensor(np.zeros((1, hidden), dtype=np.float32))
    rows = []
    for i in range(length):
        xi = nm.pick_rows(x, [i])
        h, c = nm.lstm_step(xi, h, c, params)
        rows.append(h)
    return rows


def encode(tokens, state, training=False, rng=None):
    """Bidirectional recurrence over the embedded sentence; row i of the
    result concatenates the forward and backward states at position i."""
    tokens = list(tokens)
    if not tokens:
        raise DataError("cannot encode an empty sentence")
    config = state.config
    x = embedding_inputs(tokens, state, training=training, rng=rng)
    hidden = config.direction_size
    fwd_params = {k.split(".")[1]: state.params[k]
                  for k in state.params if k.startswith("lstm_fwd.")}
    bwd_params = {k.split(".")[1]: state.params[k]
                  for k in state.params if k.startswith("lstm_bwd.")}
    n = len(tokens)
    fwd_rows = _run_direction(x, n, fwd_params, hidden)

    h = Tensor(np.zeros((1, hidden), dtype=np.float32))
    c = Tensor(np.zeros((1, hidden), dtype=np.float32))
    bwd_rows = [None] * n
    for i in range(n - 1, -1, -1):
        xi = nm.pick_rows(x, [i])
        h, c = nm.lstm_step(xi, h, c, bwd_params)
        bwd_rows[i] = h
    forward = nm.concat_rows(fwd_rows)
    backward = nm.concat_rows(bwd_rows)
    return SentenceEncoding(h=nm.concat_cols([forward, backward]))


@dataclass
class EdgeFeatureBatch:
    """Per-triple feature rows, in the graph's stable triple order."""

    h_src: Tensor  # m x M
    h_tgt: Tensor  # m x M
    d_rel: Tensor  # m x N multi-hot, constant
    m: int


def gather_edge_features(encoding, graph, relations):
    n = encoding.h.shape[0]
    src_idx = []
    tgt_idx = []
    for t in graph.triples:
        if not (1 <= t.src <= n) or not (1 <= t.tgt <= n):
            raise DataError(f"triple ({t.src}, {t.tgt}) outside encoding of length {n}")
        src_idx.append(t.src - 1)
        tgt_idx.append(t.tgt - 1)
    rel_rows = np.stack([relations.encode(t.labels) for t in graph.triples])
    return EdgeFeatureBatch(
        h_src=nm.pick_rows(encoding.h, src_idx),
        h_tgt=nm.pick_rows(encoding.h, tgt_idx),
        d_rel=Tensor(rel_rows),
        m=len(graph.triples),
    )


def edge_attention(batch, state):
    """Multi-head scores over one sentence's triples.

    Per head: project sources, targets and relations, concatenate, apply
    the head's scoring vector through a LeakyReLU, and softmax over the
    sentence's m triples (never across a batch).  A linear mix of the
    heads yields alpha, shape (m, 1).  Returns (alpha, head_scores) with
    head_scores (m, heads).
    """
    if batch.m < 1:
        raise ValueError("edge attention needs at least one triple")
    params = state.params
    columns = []
    for k in range(state.config.heads):
        feats = nm.concat_cols([
            nm.matmul(batch.h_src, params[f"attn.h{k}.V"]),
            nm.matmul(batch.h_tgt, params[f"attn.h{k}.K"]),
            nm.matmul(batch.d_rel, params[f"attn.h{k}.Q"]),
        ])
        columns.append(nm.leaky_relu(nm.matmul(feats, params[f"attn.h{k}.We"])))
    raw = nm.concat_cols(columns)  # m x heads
    head_scores = nm.transpose(nm.softmax_rows(nm.transpose(raw)))
    alpha = nm.matmul(head_scores, params["attn.W"])
    return alpha, head_scores


def classify(batch, alpha, state):
    """Probability rows over the four edit types.

    The MLP head consumes the attention-scaled concatenation of triple
    features; the bilinear variant adds per-class bilinear forms of the
    source and target states to the MLP logits before the softmax.
    """
    params = state.params
    scaled = nm.scale_rows(nm.concat_cols([batch.h_src, batch.h_tgt, batch.d_rel]), alpha)
    hidden = nm.leaky_relu(nm.add_bias(nm.matmul(scaled, params["mlp.W1"]),
                                       params["mlp.b1"]))
    logits = nm.add_bias(nm.matmul(hidden, params["mlp.W2"]), params["mlp.b2"])
    if state.config.classifier == "bilinear":
        logits = nm.add(logits, nm.bilinear_rows(batch.h_src, batch.h_tgt,
                                                 params["bilinear.W"],
                                                 params["bilinear.b"]))
    return nm.softmax_rows(logits)


def forward(tokens, graph, state, training=False, rng=None):
    """Full per-sentence forward pass to probability rows."""
    encoding = encode(tokens, state, training=training, rng=rng)
    batch = gather_edge_features(encoding, graph, state.relations)
    alpha, _ = edge_attention(batch, state)
    return classify(batch, alpha, state)


def predict_edits(graph, state):
    """Argmax edit label per triple; deterministic (no dropout, ties go to
    the first class in A < B < C < D order)."""
    if not graph.triples:
        return LabeledGraph(graph=graph, labels=())
    out = forward(graph.vertices, graph, state, training=False)
    picks = np.argmax(out.values, axis=1)
    return LabeledGraph(graph=graph, labels=tuple(LABELS[i] for i in picks))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainingItem:
    """One labeled sentence ready for the classifier."""

    tokens: tuple  # surfaces
    graph: WordRelationGraph
    labels: tuple  # ints in 0..3

    @classmethod
    def from_labeled_graph(cls, lg):
        return cls(
            tokens=tuple(t.surface for t in lg.graph.vertices),
            graph=lg.graph,
            labels=tuple(LABELS.index(lab) for lab in lg.labels),
        )


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    dev_loss: float | None
    dev_f1: dict | None


def label_frequencies(items):
    counts = np.zeros(4, dtype=np.float64)
    for item in items:
        for lab in item.labels:
            counts[lab] += 1
    total = counts.sum()
    if total == 0:
        raise DataError("training items contain no labeled triples")
    return counts / total


def _sentence_loss(item, state, training, rng):
    out = forward(item.tokens, item.graph, state, training=training, rng=rng)
    return nm.weighted_cross_entropy(out, np.asarray(item.labels), state.class_weights)


def _evaluate(items, state):
    """Dev loss and per-class F1 in eval mode."""
    from .metrics import edit_f1

    losses = []
    gold, pred = [], []
    for item in items:
        if not item.labels:
            continue
        out = forward(item.tokens, item.graph, state, training=False)
        p = out.values[np.arange(len(item.labels)), list(item.labels)]
        w = state.class_weights[list(item.labels)]
        losses.append(float(np.mean(-w * np.log(np.maximum(p, 1e-12)))))
        picks = np.argmax(out.values, axis=1)
        gold.extend(LABELS[i] for i in item.labels)
        pred.extend(LABELS[i] for i in picks)
    if not losses:
        return None, None
    report = edit_f1(gold, pred)
    return float(np.mean(losses)), dict(report.f1)


def train(items, state, train_config, checkpoint_path=None, log_path=None,
          epoch_hook=None):
    """Mini-batch training: per-sentence attention and loss averaged over
    batches of sentences, weighted cross entropy, Adam with per-epoch
    learning-rate decay, early stopping on dev loss.

    Returns (state, list of EpochLog).  The best-dev parameters are
    restored into ``state`` (and written to ``checkpoint_path`` when
    given). ``epoch_hook(epoch, state)`` may return True to stop early.
    """
    items = [it for it in items if it.labels]
    if not items:
        raise DataError("no labeled training items")
    rng = np.random.default_rng(train_config.seed)

    order = rng.permutation(len(items))
    dev_n = int(round(train_config.dev_fraction * len(items)))
    dev_items = [items[i] for i in order[:dev_n]]
    train_items = [items[i] for i in order[dev_n:]]
    if not train_items:
        raise DataError("dev split consumed every training item")

    adam = nm.AdamState()
    logs = []
    best_dev = math.inf
    best_params = None
    since_best = 0
    lr = train_config.learning_rate

    for epoch in range(1, train_config.max_epochs + 1):
        perm = rng.permutation(len(train_items))
        epoch_losses = []
        for start in range(0, len(perm), train_config.batch_size):
            batch = [train_items[i] for i in perm[start:start + train_config.batch_size]]
            state.zero_grads()
            with Tape() as tape:
                total = None
                for item in batch:
                    loss = _sentence_loss(item, state, training=True, rng=rng)
                    total = loss if total is None else nm.add(total, loss)
                total = nm.mul_const(total, 1.0 / len(batch))
                value = float(total.values)
                if not math.isfinite(value):
                    raise NumericalError(
                        f"non-finite loss at epoch {epoch}, "
                        f"batch {start // train_config.batch_size}")
                tape.backward(total)
            nm.adam_step(state.params, state.grads(), adam, lr=lr)
            epoch_losses.append(value)

        if train_config.l2_decay is not None:
            for p in state.params.values():
                p.values *= np.float32(train_config.l2_decay)
        else:
            lr *= train_config.lr_decay

        dev_loss, dev_f1 = _evaluate(dev_items, state) if dev_items else (None, None)
        logs.append(EpochLog(epoch=epoch, train_loss=float(np.mean(epoch_losses)),
                             dev_loss=dev_loss, dev_f1=dev_f1))

        if dev_loss is not None:
            if dev_loss < best_dev:
                best_dev = dev_loss
                best_params = state.copy_params()
                since_best = 0
            else:
                since_best += 1
                if since_best >= train_config.patience:
                    break
        if epoch_hook is not None and epoch_hook(epoch, state):
            break

    if best_params is not None:
        state.load_param_values(best_params)
    if checkpoint_path is not None:
        state.save(checkpoint_path)
    if log_path is not None:
        with open(log_path, "w", encoding="utf-8") as f:
            for entry in logs:
                f.write(json.dumps({
                    "epoch": entry.epoch,
                    "train_loss": round(entry.train_loss, 6),
                    "dev_loss": None if entry.dev_loss is None else round(entry.dev_loss, 6),
                    "dev_f1": entry.dev_f1,
                }) + "\n")
    return state, logs
