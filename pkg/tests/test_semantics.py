"""Direct semantics: frozen facts on the fixed trace, cross-checks between the
forward (path_reaches) and backward (diamond) path engines, and PDL laws."""

import pytest
from hypothesis import given, settings, strategies as st

from tracepdl import formulas as F
from tracepdl.parsing import parse_event_formula, parse_path, parse_trace_formula
from tracepdl.semantics import (CounterExample, equivalent_on, eval_event,
                                eval_event_all, eval_trace, path_reaches)
from tracepdl.traces import trace_from_word

from conftest import CYCLE4
from test_traces import closure_leq


# ---------------------------------------------------------------------------
# frozen facts on the 11-event running example
# ---------------------------------------------------------------------------

def test_diamond_with_test_on_running_example(cycle4_trace):
    phi = parse_event_formula(CYCLE4, "< <-_1 . ?(d | < <-_4 > T) . <-_1 > c")
    assert eval_event(cycle4_trace, 9, phi)
    assert eval_event_all(cycle4_trace, phi) == 1 << 9


def test_sentences_on_running_example(cycle4_trace):
    t = cycle4_trace
    cases = {
        "EM_1 < <-_1 . ?(d | < <-_4 > T) . <-_1 > c": True,
        "EM_3 < <-_4 > b": False,   # last 3-event's 4-predecessor is labelled e
        "EM < <-_4 >": True,
        "EM b": False,
        "EM c": True,
        "EM a4": True,
        "Lleq 3 4": True,
        "Lleq 2 3": False,
        "Lleq 4 1": False,
        "Lleq2 2 3 4": True,
        "Lleq2 1 4 2": True,
        "Lleq2 4 3 1": False,       # the last 3-event below last_4 is event 8,
                                    # concurrent with last_1 = event 9
    }
    for text, want in cases.items():
        assert eval_trace(t, parse_trace_formula(CYCLE4, text)) == want, text


def test_yesterday_constants_on_running_example(cycle4_trace):
    t = cycle4_trace
    assert eval_event(t, 7, parse_event_formula(CYCLE4, "Yleq 4 3"))
    assert not eval_event(t, 7, parse_event_formula(CYCLE4, "Yleq 3 4"))
    assert eval_event(t, 7, parse_event_formula(CYCLE4, "Yleq2 2 3 4"))
    # missing yesterday events make the constant false
    assert not eval_event(t, 0, parse_event_formula(CYCLE4, "Yleq 1 1"))
    assert not eval_event(t, 3, parse_event_formula(CYCLE4, "Yleq 4 1"))


def test_path_reaches_on_running_example(cycle4_trace):
    t = cycle4_trace
    assert path_reaches(t, 9, parse_path(CYCLE4, "<-_1 . ?(d | < <-_4 > T) . <-_1")) == [3]
    assert path_reaches(t, 9, parse_path(CYCLE4, "<-_1*")) == [0, 1, 3, 6, 9]
    assert path_reaches(t, 9, parse_path(CYCLE4, "<-_1 | <-_2")) == [6, 7]
    assert path_reaches(t, 2, parse_path(CYCLE4, "<-_3")) == []
    assert path_reaches(t, 5, parse_path(CYCLE4, "?a3")) == [5]
    assert path_reaches(t, 5, parse_path(CYCLE4, "?b")) == []


def test_empty_and_tiny_traces():
    t0 = trace_from_word(CYCLE4, ())
    assert not eval_trace(t0, parse_trace_formula(CYCLE4, "EM_1 T"))
    assert not eval_trace(t0, parse_trace_formula(CYCLE4, "EM T"))
    assert not eval_trace(t0, parse_trace_formula(CYCLE4, "Lleq 1 1"))
    t1 = trace_from_word(CYCLE4, ("a1",))
    assert eval_trace(t1, parse_trace_formula(CYCLE4, "EM_1 a1"))
    assert eval_trace(t1, parse_trace_formula(CYCLE4, "Lleq 1 1"))
    assert not eval_trace(t1, parse_trace_formula(CYCLE4, "EM_4 T"))


# ---------------------------------------------------------------------------
# independence cross-checks and laws, on random inputs
# ---------------------------------------------------------------------------

words = st.lists(st.sampled_from(CYCLE4.letters), max_size=7).map(tuple)


def plain_formulas():
    letters = st.sampled_from(CYCLE4.letters).map(F.letter)

    def extend(children):
        paths = plain_paths(children)
        return st.one_of(
            st.tuples(children, children).map(lambda ab: F.lor(*ab)),
            children.map(F.lnot),
            st.tuples(paths, children).map(lambda pc: F.diamond(*pc)),
        )

    return st.recursive(letters, extend, max_leaves=8)


def plain_paths(formula_strategy):
    moves = st.sampled_from(CYCLE4.processes).map(F.move)
    tests = formula_strategy.map(F.test)

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda ab: F.path_sum(*ab)),
            st.tuples(children, children).map(lambda ab: F.path_cat(*ab)),
            children.map(F.star),
        )

    return st.recursive(st.one_of(moves, tests), extend, max_leaves=6)


@given(words, plain_paths(plain_formulas()), plain_formulas())
@settings(max_examples=250, deadline=None)
def test_backward_diamond_agrees_with_forward_reachability(w, p, phi):
    t = trace_from_word(CYCLE4, w)
    dia_mask = eval_event_all(t, F.diamond(p, phi))
    phi_mask = eval_event_all(t, phi)
    for e in range(len(w)):
        want = any(phi_mask >> f & 1 for f in path_reaches(t, e, p))
        assert bool(dia_mask >> e & 1) == want


@given(words, plain_paths(plain_formulas()), plain_paths(plain_formulas()),
       plain_formulas())
@settings(max_examples=250, deadline=None)
def test_pdl_laws(w, p, q, phi):
    t = trace_from_word(CYCLE4, w)
    assert eval_event_all(t, F.diamond(F.path_sum(p, q), phi)) == \
        eval_event_all(t, F.lor(F.diamond(p, phi), F.diamond(q, phi)))
    assert eval_event_all(t, F.diamond(F.path_cat(p, q), phi)) == \
        eval_event_all(t, F.diamond(p, F.diamond(q, phi)))
    assert eval_event_all(t, F.diamond(F.star(p), phi)) == \
        eval_event_all(t, F.lor(phi, F.diamond(p, F.diamond(F.star(p), phi))))


@given(words)
@settings(max_examples=200, deadline=None)
def test_yesterday_constants_against_closure_oracle(w):
    t = trace_from_word(CYCLE4, w)
    below = closure_leq(CYCLE4, w)

    def y(proc, e):
        on_i = set(CYCLE4.letters_of[proc])
        return max((f for f in below[e] if f != e and w[f] in on_i), default=None)

    for i in CYCLE4.processes:
        for j in CYCLE4.processes:
            mask = eval_event_all(t, F.yleq_const(i, j))
            mask2 = eval_event_all(t, F.yleq2_const(i, j, "4"))
            for e in range(len(w)):
                yi, yj = y(i, e), y(j, e)
                want = yi is not None and yj is not None and yi in below[yj]
                assert bool(mask >> e & 1) == want
                yij = None if yi is None else y(j, yi)
                y4 = y("4", e)
                want2 = yij is not None and y4 is not None and yij in below[y4]
                assert bool(mask2 >> e & 1) == want2


def test_counterexample_is_least():
    cex = equivalent_on(CYCLE4, 2, F.letter("a1"), F.lor(F.letter("a1"), F.letter("c")))
    assert isinstance(cex, CounterExample)
    assert cex.trace.word == ("c",) and cex.event == 0
    assert (cex.lhs, cex.rhs) == (False, True)


def test_equivalent_pairs_return_none():
    p, q = F.move("1"), F.move("2")
    phi = F.letter("c")
    assert equivalent_on(CYCLE4, 4, F.diamond(F.path_sum(p, q), phi),
                         F.lor(F.diamond(p, phi), F.diamond(q, phi))) is None
    lhs = parse_trace_formula(CYCLE4, "EM_1 c | EM_2 c")
    assert equivalent_on(CYCLE4, 3, lhs, lhs) is None


def test_trace_formula_counterexample():
    cex = equivalent_on(CYCLE4, 2, parse_trace_formula(CYCLE4, "EM_1 T"),
                        parse_trace_formula(CYCLE4, "EM_2 T"))
    assert cex is not None and cex.event is None
    assert cex.trace.word == ("a1",)
