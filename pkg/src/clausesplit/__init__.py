"""clausesplit: rewrite complex sentences into one simple sentence per
tensed clause by editing a word relation graph.
"""

from .corpus import (DependencyParse, Example, Token, Vocabulary,
                     attach_parses, build_vocab, filter_tensed_match,
                     read_conllu, read_parallel_corpus, write_parallel_corpus)
from .estimator import EditClassifier, SentenceDecomposer
from .graph import (EdgeTriple, RelationVocabulary, WordRelationGraph,
                    build_graph, relation_vocab)
from .metrics import (bleu4, confusion, corpus_report, edit_f1,
                      example_score, match_ss)
from .model import (LossConfig, ModelConfig, ModelState, TrainConfig,
                    TrainingItem, inverse_class_weights, predict_edits,
                    resolve_class_weights, train)
from .segmenter import (DecompositionResult, apply_copies, apply_edits,
                        decompose, find_components, render_sentences, segment)
from .supervision import (LABELS, LabeledGraph, TokenAlignment, align_tokens,
                          create_labels, is_reconstructible)

__version__ = "0.1.0"

__all__ = [
    "DependencyParse", "Example", "Token", "Vocabulary",
    "attach_parses", "build_vocab", "filter_tensed_match",
    "read_conllu", "read_parallel_corpus", "write_parallel_corpus",
    "EditClassifier", "SentenceDecomposer",
    "EdgeTriple", "RelationVocabulary", "WordRelationGraph",
    "build_graph", "relation_vocab",
    "bleu4", "confusion", "corpus_report", "edit_f1", "example_score", "match_ss",
    "LossConfig", "ModelConfig", "ModelState", "TrainConfig", "TrainingItem",
    "inverse_class_weights", "predict_edits", "resolve_class_weights", "train",
    "DecompositionResult", "apply_copies", "apply_edits", "decompose",
    "find_components", "render_sentences", "segment",
    "LABELS", "LabeledGraph", "TokenAlignment", "align_tokens",
    "create_labels", "is_reconstructible",
    "__version__",
]
