import pytest

from ambispot import lm, synth


@pytest.fixture(scope="session")
def corpus():
    return list(synth.load_corpus("synthetic"))


@pytest.fixture(scope="session")
def model(corpus):
    return lm.fit(corpus)
