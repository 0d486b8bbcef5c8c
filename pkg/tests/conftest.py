import pytest

from tracepdl.traces import (DistributedAlphabet, enumerate_traces,
                             trace_from_word)

_TRACE_CACHE: dict = {}


def traces_upto(alphabet, max_events):
    """Enumerated traces, cached so their evaluation contexts stay warm
    across tests sharing formula subterms."""
    key = (id(alphabet), max_events)
    if key not in _TRACE_CACHE:
        for (aid, n), ts in _TRACE_CACHE.items():
            if aid == id(alphabet) and n > max_events:
                _TRACE_CACHE[key] = [t for t in ts if t.n_events <= max_events]
                break
        else:
            _TRACE_CACHE[key] = list(enumerate_traces(alphabet, max_events))
    return _TRACE_CACHE[key]

# Four processes joined in a ring by the shared letters c, d, b, e; each
# process also owns a private letter.  The 11-letter word below exercises
# every chain and leaves two maximal events.
CYCLE4 = DistributedAlphabet({
    "1": ("a1", "c", "e"),
    "2": ("a2", "c", "d"),
    "3": ("a3", "b", "d"),
    "4": ("a4", "b", "e"),
})
CYCLE4_WORD = ("a1", "a1", "b", "c", "d", "a3", "e", "a2", "b", "c", "a4")


@pytest.fixture(scope="session")
def cycle4():
    return CYCLE4


@pytest.fixture(scope="session")
def cycle4_trace():
    return trace_from_word(CYCLE4, CYCLE4_WORD)


@pytest.fixture(scope="session")
def handshake2():
    # two processes with private letters and one synchronising letter
    return DistributedAlphabet({"p": ("a", "c"), "q": ("b", "c")})


@pytest.fixture(scope="session")
def triangle3():
    # three processes, each pair sharing one letter
    return DistributedAlphabet({
        "p": ("a", "f", "h"),
        "q": ("b", "f", "g"),
        "r": ("c", "g", "h"),
    })


@pytest.fixture(scope="session")
def solo1():
    return DistributedAlphabet({"s": ("a", "b")})
