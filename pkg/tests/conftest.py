import pathlib

import pytest

from clausesplit.corpus import attach_parses, read_conllu, read_parallel_corpus

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def figure1_example():
    """The conjoined-VP fixture sentence with its parse attached."""
    examples = read_parallel_corpus(DATA / "figure1.src")
    parses = read_conllu(DATA / "figure1.conllu")
    joined, excluded = attach_parses(examples, parses)
    assert not excluded
    return joined[0]


@pytest.fixture(scope="session")
def oracle_fixtures():
    """The checked-in reconstructible fixture corpus."""
    examples = read_parallel_corpus(DATA / "fixtures.src")
    parses = read_conllu(DATA / "fixtures.conllu")
    joined, excluded = attach_parses(examples, parses)
    assert not excluded
    return joined
