"""Scikit-learn style wrappers around the pipeline.

``EditClassifier`` learns edit labels for graph edges; ``SentenceDecomposer``
adds the segmentation stage, so ``transform`` maps complex sentences to
lists of simple ones.  Both follow the estimator contract (``get_params``/
``set_params``/``clone``) and validate their inputs up front.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import model as _model
from .corpus import build_vocab
from .errors import DataError
from .graph import build_graph, relation_vocab
from .segmenter import segment
from .supervision import LABELS, align_tokens, create_labels


def check_examples(X, need_gold=False):
    """Examples must be non-empty, carry parses, and (for fitting without
    explicit labels) gold outputs."""
    X = list(X)
    if not X:
        raise ValueError("need at least one example")
    for ex in X:
        if ex.parse is None:
            raise DataError(f"example {ex.id}: no parse attached")
        if len(ex.parse) != len(ex.source):
            raise DataError(f"example {ex.id}: parse/source length mismatch")
        if need_gold and not ex.gold_outputs:
            raise DataError(f"example {ex.id}: fitting needs gold outputs "
                            "(or pass labels as y)")
    return X


def check_fitted(estimator, attribute="model_state_"):
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit first")


class EditClassifier(BaseEstimator):
    """Trainable per-edge edit classifier with a fit/predict interface.

    ``fit`` takes Examples with parses; labels come either from ``y``
    (one label list per example, in graph triple order) or from distant
    supervision against the gold outputs.
    """

    def __init__(self, embedding_dim=100, hidden_size=800, heads=4,
                 classifier="mlp", positional_encoding=True, dropout=0.2,
                 mlp_hidden=None, class_weights="inverse",
                 literal_copy_rule=False, learning_rate=1e-4, batch_size=64,
                 max_epochs=100, patience=5, lr_decay=0.99, dev_fraction=0.1,
                 embedding_file=None, seed=0):
        self.embedding_dim = embedding_dim
        self.hidden_size = hidden_size
        self.heads = heads
        self.classifier = classifier
        self.positional_encoding = positional_encoding
        self.dropout = dropout
        self.mlp_hidden = mlp_hidden
        self.class_weights = class_weights
        self.literal_copy_rule = literal_copy_rule
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.lr_decay = lr_decay
        self.dev_fraction = dev_fraction
        self.embedding_file = embedding_file
        self.seed = seed

    def _model_config(self):
        return _model.ModelConfig(
            embedding_dim=self.embedding_dim, hidden_size=self.hidden_size,
            dropout=self.dropout, positional_encoding=self.positional_encoding,
            heads=self.heads, mlp_hidden=self.mlp_hidden,
            classifier=self.classifier)

    def _train_config(self):
        return _model.TrainConfig(
            learning_rate=self.learning_rate, batch_size=self.batch_size,
            max_epochs=self.max_epochs, patience=self.patience,
            lr_decay=self.lr_decay, dev_fraction=self.dev_fraction,
            seed=self.seed)

    def _labeled_items(self, X, y):
        mode = "literal" if self.literal_copy_rule else "default"
        items = []
        graphs = []
        for i, ex in enumerate(X):
            graph = build_graph(ex.source, ex.parse)
            graphs.append(graph)
            if y is not None:
                labels = tuple(y[i])
                if len(labels) != len(graph.triples):
                    raise DataError(
                        f"example {ex.id}: {len(labels)} labels for "
                        f"{len(graph.triples)} triples")
            else:
                alignment = align_tokens(ex.source, ex.gold_outputs)
                labels = create_labels(graph, alignment, mode=mode).labels
            items.append(_model.TrainingItem(
                tokens=tuple(t.surface for t in ex.source), graph=graph,
                labels=tuple(LABELS.index(lab) for lab in labels)))
        return items, graphs

    def fit(self, X, y=None):
        X = check_examples(X, need_gold=y is None)
        if y is not None and len(list(y)) != len(X):
            raise ValueError("y must have one label list per example")
        items, graphs = self._labeled_items(X, y)
        vocab = build_vocab(X, embedding_file=self.embedding_file,
                            dim=self.embedding_dim)
        relations = relation_vocab(graphs)
        freqs = _model.label_frequencies(items)
        weights = _model.resolve_class_weights(
            _model.LossConfig(mode=self.class_weights), freqs)
        state = _model.init_state(self._model_config(), vocab, relations,
                                  class_weights=weights, seed=self.seed)
        state, logs = _model.train(items, state, self._train_config())
        self.model_state_ = state
        self.history_ = logs
        self.classes_ = np.asarray(LABELS)
        self.label_frequencies_ = freqs
        return self

    def predict(self, X):
        """One label list per example, in graph triple order."""
        check_fitted(self)
        X = check_examples(X)
        out = []
        for ex in X:
            graph = build_graph(ex.source, ex.parse)
            out.append(list(_model.predict_edits(graph, self.model_state_).labels))
        return out

    def score(self, X, y=None):
        """Micro-F1 (accuracy) of edit predictions against y or against
        distant-supervision labels."""
        from .metrics import edit_f1

        X = check_examples(X, need_gold=y is None)
        predicted = self.predict(X)
        if y is None:
            mode = "literal" if self.literal_copy_rule else "default"
            y = []
            for ex in X:
                graph = build_graph(ex.source, ex.parse)
                alignment = align_tokens(ex.source, ex.gold_outputs)
                y.append(list(create_labels(graph, alignment, mode=mode).labels))
        gold = [lab for labs in y for lab in labs]
        pred = [lab for labs in predicted for lab in labs]
        return edit_f1(gold, pred).micro_f1


class SentenceDecomposer(BaseEstimator, TransformerMixin):
    """End-to-end transformer: complex sentences in, simple sentences out."""

    def __init__(self, embedding_dim=100, hidden_size=800, heads=4,
                 classifier="mlp", positional_encoding=True, dropout=0.2,
                 mlp_hidden=None, class_weights="inverse",
                 literal_copy_rule=False, learning_rate=1e-4, batch_size=64,
                 max_epochs=100, patience=5, lr_decay=0.99, dev_fraction=0.1,
                 embedding_file=None, seed=0):
        self.embedding_dim = embedding_dim
        self.hidden_size = hidden_size
        self.heads = heads
        self.classifier = classifier
        self.positional_encoding = positional_encoding
        self.dropout = dropout
        self.mlp_hidden = mlp_hidden
        self.class_weights = class_weights
        self.literal_copy_rule = literal_copy_rule
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.lr_decay = lr_decay
        self.dev_fraction = dev_fraction
        self.embedding_file = embedding_file
        self.seed = seed

    def fit(self, X, y=None):
        self.classifier_ = EditClassifier(**self.get_params()).fit(X, y)
        return self

    def transform(self, X):
        """List of simple-sentence strings per input example."""
        check_fitted(self, "classifier_")
        X = check_examples(X)
        state = self.classifier_.model_state_
        outputs = []
        for ex in X:
            graph = build_graph(ex.source, ex.parse)
            labeled = _model.predict_edits(graph, state)
            outputs.append(segment(labeled).sentences)
        return outputs

    def predict(self, X):
        return self.transform(X)
