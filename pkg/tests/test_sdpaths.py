"""Jump paths: evaluation, standardization, expansion into local formulas,
and the yesterday-path construction."""

import pytest
from hypothesis import given, settings, strategies as st

from tracepdl import formulas as F
from tracepdl.errors import ResourceLimitError
from tracepdl.semantics import eval_event_all, path_reaches
from tracepdl.sdpaths import (Atomic, SdPath, SPrev, STest, chained_on_paths,
                              default_basis, diamond_local, enumerate_sdpaths,
                              parse_sd_path, sd_eval, y_path)
from tracepdl.traces import enumerate_traces, trace_from_word

from conftest import CYCLE4


def sd(text):
    return parse_sd_path(CYCLE4, text)


# ---------------------------------------------------------------------------
# frozen evaluations on the running example
# ---------------------------------------------------------------------------

def test_eval_on_running_example(cycle4_trace):
    t = cycle4_trace
    cases = [
        ("<=_2{T} . <=_2{T} . ?{on_1}", 7, 3),
        ("<=_2{on_1}", 7, 3),
        ("<=_2{T} . ?{on_2}", 7, 4),
        ("<=_1{T} . <=_1{T}", 3, 0),
        ("<=_2{T} . ?{on_3}", 7, 4),
        ("<=_2{on_3} . <=_3{on_4}", 7, 2),
        ("<=_4{on_3} . <=_3{on_2} . ?{on_2}", 10, 4),
        ("?{a2}", 7, 7),
        ("<=_3{T}", 7, None),          # event 7 is not a 3-event
        ("?{on_3}", 7, None),
        ("<=_1{on_3}", 3, None),       # no 1-event before 3 carries a 3-letter
        ("<=_2{F}", 7, None),
    ]
    for text, e, want in cases:
        assert sd_eval(sd(text), t, e) == want, text


def test_display_round_trip():
    for text in ["<=_2{T} . <=_2{T} . ?{on_1}", "?{a1|c}", "<=_4{on_3}",
                 "?{F} . <=_1{a1}"]:
        p = sd(text)
        assert parse_sd_path(CYCLE4, p.display()) == p


def test_standardize_shape_and_meaning(cycle4_trace):
    p = sd("<=_2{on_3} . <=_3{on_4}")
    std = p.standardize()
    assert std.is_standard and std.norm == p.norm == 2
    assert len(std.letters) == 5
    assert std.standardize() == std
    for e in range(len(cycle4_trace)):
        assert sd_eval(p, cycle4_trace, e) == sd_eval(std, cycle4_trace, e)
    merged = SdPath((STest(Atomic.on(CYCLE4, "1")), STest(Atomic.on(CYCLE4, "2"))))
    assert merged.standardize().letters[0].atom.letters == frozenset({"c"})


def test_prefixes():
    p = sd("?{on_2} . <=_2{T} . <=_2{on_1}").standardize()
    pre = p.prefixes()
    assert [q.norm for q in pre] == [0, 1, 2]
    assert pre[0].letters[0].atom.is_top
    assert pre[-1] == p
    assert pre[1].is_standard
    # jump-free paths are their own single prefix
    q = sd("?{a1}")
    assert q.prefixes() == [q.standardize()]


def test_suffixes():
    p = sd("<=_2{on_3} . <=_3{on_4}").standardize()
    suf = p.suffixes()
    assert len(suf) == 5
    assert suf[0] == p
    assert [q.norm for q in suf] == [2, 2, 1, 1, 0]
    assert all(q.is_standard for q in suf)


# ---------------------------------------------------------------------------
# properties: expansion, determinism, monotonicity
# ---------------------------------------------------------------------------

words = st.lists(st.sampled_from(CYCLE4.letters), max_size=7).map(tuple)

atoms = st.one_of(
    st.just(Atomic.top(CYCLE4)),
    st.sampled_from(CYCLE4.processes).map(lambda p: Atomic.on(CYCLE4, p)),
    st.sets(st.sampled_from(CYCLE4.letters), max_size=3).map(
        lambda s: Atomic.of(CYCLE4, s)),
)

sd_letters = st.one_of(
    atoms.map(STest),
    st.tuples(st.sampled_from(CYCLE4.processes), atoms).map(lambda pa: SPrev(*pa)),
)

sd_paths = st.lists(sd_letters, min_size=1, max_size=5).map(tuple).map(SdPath)


@given(words, sd_paths)
@settings(max_examples=400, deadline=None)
def test_expansion_matches_eval(w, p):
    # the regular-path expansion reaches exactly the jump target
    t = trace_from_word(CYCLE4, w)
    regular = p.to_path_formula()
    for e in range(len(w)):
        got = sd_eval(p, t, e)
        want = path_reaches(t, e, regular)
        assert want == ([got] if got is not None else []), (w, p, e)


@given(words, sd_paths)
@settings(max_examples=400, deadline=None)
def test_monotone_where_defined(w, p):
    t = trace_from_word(CYCLE4, w)
    vals = [sd_eval(p, t, e) for e in range(len(w))]
    for e in range(len(w)):
        for f in range(len(w)):
            if vals[e] is not None and vals[f] is not None and t.leq(e, f):
                assert t.leq(vals[e], vals[f])


@given(words, sd_paths, st.sampled_from(CYCLE4.letters))
@settings(max_examples=300, deadline=None)
def test_diamond_local_matches_eval(w, p, target_letter):
    t = trace_from_word(CYCLE4, w)
    phi = F.letter(target_letter)
    mask = eval_event_all(t, diamond_local(p, phi))
    bare = eval_event_all(t, diamond_local(p))
    for e in range(len(w)):
        got = sd_eval(p, t, e)
        assert bool(mask >> e & 1) == (got is not None and w[got] == target_letter)
        assert bool(bare >> e & 1) == (got is not None)


def test_diamond_local_is_local():
    p = sd("<=_2{on_3} . <=_3{on_4} . ?{a1|b}")
    phi = diamond_local(p, F.letter("c"))
    assert F.dialect_check(phi).local


@given(words, st.sampled_from(CYCLE4.processes))
@settings(max_examples=300, deadline=None)
def test_plain_jump_is_chain_predecessor(w, proc):
    t = trace_from_word(CYCLE4, w)
    p = SdPath((SPrev(proc, Atomic.on(CYCLE4, proc)),))
    for e in range(len(w)):
        want = None
        if proc in CYCLE4.loc(w[e]):
            prev = [f for f in t.chain(proc) if f < e]
            want = prev[-1] if prev else None
        assert sd_eval(p, t, e) == want


# ---------------------------------------------------------------------------
# yesterday paths
# ---------------------------------------------------------------------------

def test_y_path_on_running_example(cycle4_trace):
    p = y_path(cycle4_trace, 10, "2")
    assert p.display() == "?{T} . <=_4{on_3} . ?{T} . <=_3{on_2} . ?{T}"
    assert y_path(cycle4_trace, 7, "4").display() == \
        "?{T} . <=_2{on_3} . ?{T} . <=_3{on_4} . ?{T}"
    assert y_path(cycle4_trace, 0, "1") is None


@given(words)
@settings(max_examples=250, deadline=None)
def test_y_path_lands_on_yesterday(w):
    t = trace_from_word(CYCLE4, w)
    for e in range(len(w)):
        for proc in CYCLE4.processes:
            want = t.yesterday(proc, e)
            p = y_path(t, e, proc)
            if want is None:
                assert p is None
            else:
                assert 1 <= p.norm < CYCLE4.n_processes
                closed = p.concat(SdPath((STest(Atomic.on(CYCLE4, proc)),)))
                assert sd_eval(closed, t, e) == want
                assert all(isinstance(x, STest) and x.atom.is_top
                           or isinstance(x, SPrev) for x in p.letters)


def test_y_path_exhaustive_small(handshake2):
    for t in enumerate_traces(handshake2, 5, include_empty=False):
        for e in range(len(t)):
            for proc in handshake2.processes:
                want = t.yesterday(proc, e)
                p = y_path(t, e, proc)
                if want is None:
                    assert p is None
                else:
                    assert p.norm < 2
                    closed = p.concat(SdPath((STest(Atomic.on(handshake2, proc)),)))
                    assert sd_eval(closed, t, e) == want


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def test_enumerate_counts(handshake2):
    paths = list(enumerate_sdpaths(handshake2, max_len=2))
    # 1 empty + (3 atoms * 2 procs) + 6^2
    assert len(paths) == 1 + 6 + 36
    assert len(set(paths)) == len(paths)
    assert all(p.is_standard for p in paths)
    again = list(enumerate_sdpaths(handshake2, max_len=2))
    assert paths == again


def test_enumerate_respects_min_len(handshake2):
    paths = list(enumerate_sdpaths(handshake2, min_len=1, max_len=1))
    assert len(paths) == 6 and all(p.norm == 1 for p in paths)


def test_enumerate_budget_error():
    with pytest.raises(ResourceLimitError):
        list(enumerate_sdpaths(CYCLE4, max_len=8))


def test_chained_on_paths(triangle3):
    one = chained_on_paths(triangle3, 1, 1)
    assert len(one) == 9
    both = chained_on_paths(triangle3, 1, 2)
    assert len(both) == 9 + 27
    for p in both:
        jumps = [x for x in p.letters if isinstance(x, SPrev)]
        for a, b in zip(jumps, jumps[1:]):
            assert b.process == next(iter(
                q for q in triangle3.processes
                if a.atom.letters == triangle3.on(q)))
    pinned = chained_on_paths(triangle3, 1, 2, end_process="p")
    assert all(
        [x for x in p.letters if isinstance(x, SPrev)][-1].atom.letters
        == triangle3.on("p") for p in pinned)
    assert len(pinned) == 3 + 9
