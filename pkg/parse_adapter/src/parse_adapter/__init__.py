"""Corpus preparation: run a dependency-parser backend over pre-tokenized
sentences and emit CoNLL-U, with subjects propagated across conjoined
verb phrases and into relative clauses.
"""

from .adapter import AdapterConfig, ParseWarning, TokenRow, parse_corpus
from .backends import available_backends, get_backend

__version__ = "0.1.0"

__all__ = ["AdapterConfig", "ParseWarning", "TokenRow", "parse_corpus",
           "available_backends", "get_backend", "__version__"]
