"""Constant elimination against brute-force semantic oracles.

Every derived construction is checked against an independent computation on
enumerated traces: ``same`` against a direct scan of the carrier chain,
``mod`` against a literal jump count, target equality/ordering against
``sd_eval``, and the rewritten constants against the built-in constant
semantics."""

import pytest

from tracepdl import formulas as F
from tracepdl import parsing
from tracepdl.elimination import (Limits, build_eq_trace, build_leq_trace,
                                  build_lleq, build_lleq2, build_mod,
                                  build_peq, build_pleq, build_same,
                                  build_yleq, build_yleq2, eliminate,
                                  separating_set)
from tracepdl.errors import InputError, ResourceLimitError
from tracepdl.sdpaths import (SPrev, enumerate_sdpaths, parse_sd_path,
                              sd_eval)
from tracepdl.semantics import (eval_event_all, eval_trace, equivalent_on,
                                eval_event)
from conftest import traces_upto


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def same_oracle(t, scan, path, e):
    """Previous scan-chain event where the path is defined has the same
    target."""
    if sd_eval(path, t, e) is None:
        return False
    i = t.alphabet.process_index(scan)
    if i not in t.loc_of(e):
        return False
    chain = t.chains[i]
    k = t.clocks[e][i] - 1
    assert chain[k] == e
    for f in reversed(chain[:k]):
        if sd_eval(path, t, f) is not None:
            return sd_eval(path, t, f) == sd_eval(path, t, e)
    return False


def first_jump_process(path):
    return [x for x in path.standardize().letters if isinstance(x, SPrev)][0].process


def mod_oracle(t, path, k, n, e):
    """Path defined at ``e`` and the number of earlier carrier-chain events
    where it is defined but disagrees with the next occurrence is k mod n."""
    if sd_eval(path, t, e) is None:
        return False
    scan = first_jump_process(path)
    i = t.alphabet.process_index(scan)
    chain = t.chains[i]
    pos = t.clocks[e][i] - 1
    count = sum(1 for f in chain[:pos]
                if sd_eval(path, t, f) is not None
                and not same_oracle(t, scan, path, f))
    return count % n == k


def peq_oracle(t, e, a, b):
    va, vb = sd_eval(a, t, e), sd_eval(b, t, e)
    return va is not None and vb is not None and va == vb


def pleq_oracle(t, e, a, b):
    va, vb = sd_eval(a, t, e), sd_eval(b, t, e)
    return va is not None and vb is not None and t.leq(va, vb)


def eq_trace_oracle(t, i, j, a, b):
    li, lj = t.last(i), t.last(j)
    if li is None or lj is None:
        return False
    va, vb = sd_eval(a, t, li), sd_eval(b, t, lj)
    return va is not None and vb is not None and va == vb


def leq_trace_oracle(t, i, j, a, b):
    li, lj = t.last(i), t.last(j)
    if li is None or lj is None:
        return False
    va, vb = sd_eval(a, t, li), sd_eval(b, t, lj)
    return va is not None and vb is not None and t.leq(va, vb)


def check_event_formula(alphabet, max_events, formula, oracle):
    """oracle(t, e) -> bool, compared against the formula on every event of
    every trace up to the size bound."""
    for t in traces_upto(alphabet, max_events):
        mask = eval_event_all(t, formula)
        for e in range(t.n_events):
            assert bool(mask >> e & 1) == oracle(t, e), \
                f"{t.word} event {e}"


# ---------------------------------------------------------------------------
# same / mod: frozen values on the four-process example
# ---------------------------------------------------------------------------

def test_same_frozen_values(cycle4, cycle4_trace):
    # targets of <=_2{on_3}: event 7 -> 4, event 9 -> 4; its previous
    # carriers: at 9 the previous 2-event 7 agrees (both land on 4), at 7 the
    # previous 2-events 4 and 3 have no target at all.
    p = parse_sd_path(cycle4, "<=_2{on_3}")
    assert eval_event_all(cycle4_trace, build_same("2", p)) == 1 << 9
    # a plain chain step strictly descends, so it never repeats a target
    q = parse_sd_path(cycle4, "<=_1{T}")
    assert eval_event_all(cycle4_trace, build_same("1", q)) == 0


def test_mod_frozen_values(cycle4, cycle4_trace):
    # <=_2{on_3} is defined exactly at events 7 and 9; the disagreeing
    # carrier count before 7 is 0 and before 9 is 1 (event 7 itself).
    p = parse_sd_path(cycle4, "<=_2{on_3}")
    assert eval_event_all(cycle4_trace, build_mod(p, 0, 2)) == 1 << 7
    assert eval_event_all(cycle4_trace, build_mod(p, 1, 2)) == 1 << 9


def unit_paths(alphabet, extra=()):
    paths = list(enumerate_sdpaths(alphabet, min_len=1, max_len=2))
    return paths + [parse_sd_path(alphabet, s) for s in extra]


def test_same_matches_semantics(handshake2):
    paths = unit_paths(handshake2, extra=[
        "?{a} . <=_p{on_q}",
        "<=_p{a|c} . ?{c}",
        "<=_q{b} . <=_p{on_p} . ?{a}",
    ])
    for path in paths:
        for scan in handshake2.processes:
            formula = build_same(scan, path)
            check_event_formula(
                handshake2, 4, formula,
                lambda t, e, path=path, scan=scan: same_oracle(t, scan, path, e))


def test_mod_matches_count(handshake2):
    for path in unit_paths(handshake2):
        n = path.norm + 1
        for k in range(n):
            check_event_formula(
                handshake2, 4, build_mod(path, k, n),
                lambda t, e, path=path, k=k, n=n: mod_oracle(t, path, k, n, e))


def test_separating_set_shape(handshake2):
    p = parse_sd_path(handshake2, "<=_p{T} . <=_q{on_p}")
    xs = separating_set(p)
    assert len(xs) == 4 + p.norm + 1
    with pytest.raises(InputError):
        separating_set(parse_sd_path(handshake2, "?{a}"))
    with pytest.raises(InputError):
        build_mod(p, 3, 3)


def test_separating_set_separates(handshake2):
    """Whenever the path moves, some member holds at the source but not the
    target, and some member holds at the target but not the source."""
    for sigma in enumerate_sdpaths(handshake2, min_len=1, max_len=2):
        masks = None
        for t in traces_upto(handshake2, 4):
            for e in range(t.n_events):
                f = sd_eval(sigma, t, e)
                if f is None:
                    continue
                assert f != e
                if masks is None:
                    masks = separating_set(sigma)
                vals = [(eval_event(t, e, xi), eval_event(t, f, xi))
                        for xi in masks]
                assert any(ve and not vf for ve, vf in vals)
                assert any(vf and not ve for ve, vf in vals)


# ---------------------------------------------------------------------------
# target equality and ordering at one event
# ---------------------------------------------------------------------------

def test_peq_matches_oracle(handshake2):
    paths = list(enumerate_sdpaths(handshake2, min_len=0, max_len=1))
    deep = list(enumerate_sdpaths(handshake2, min_len=2, max_len=2))[::6]
    pairs = [(a, b) for a in paths for b in paths]
    pairs += [(a, b) for a in deep for b in paths[:4]]
    pairs += list(zip(deep, deep[1:]))
    for a, b in pairs:
        formula = build_peq(a, b)
        check_event_formula(
            handshake2, 4, formula,
            lambda t, e, a=a, b=b: peq_oracle(t, e, a, b))


def test_pleq_matches_oracle(handshake2):
    paths = list(enumerate_sdpaths(handshake2, min_len=0, max_len=1))
    deep = list(enumerate_sdpaths(handshake2, min_len=2, max_len=2))[::9]
    pairs = [(a, b) for a in paths for b in paths]
    pairs += [(a, b) for a in deep for b in paths[:3]]
    pairs += [(b, a) for a in deep for b in paths[:3]]
    for a, b in pairs:
        formula = build_pleq(a, b)
        check_event_formula(
            handshake2, 4, formula,
            lambda t, e, a=a, b=b: pleq_oracle(t, e, a, b))


def test_peq_pleq_single_process(solo1):
    paths = [parse_sd_path(solo1, s) for s in
             ["?{T}", "?{a}", "<=_s{T}", "<=_s{a}", "<=_s{T} . <=_s{T}"]]
    for a in paths:
        for b in paths:
            check_event_formula(
                solo1, 5, build_peq(a, b),
                lambda t, e, a=a, b=b: peq_oracle(t, e, a, b))
            check_event_formula(
                solo1, 5, build_pleq(a, b),
                lambda t, e, a=a, b=b: pleq_oracle(t, e, a, b))


def test_peq_enumerated_sigma_range(handshake2):
    a = parse_sd_path(handshake2, "<=_p{T}")
    b = parse_sd_path(handshake2, "<=_q{on_p}")
    formula = build_peq(a, b, sigma_range="enumerated")
    check_event_formula(handshake2, 3, formula,
                        lambda t, e: peq_oracle(t, e, a, b))
    with pytest.raises(InputError):
        build_peq(a, b, sigma_range="bogus")


# ---------------------------------------------------------------------------
# sentence-level comparisons
# ---------------------------------------------------------------------------

def test_eq_leq_trace_match_oracle(handshake2):
    paths = [parse_sd_path(handshake2, s) for s in
             ["?{T}", "<=_p{T}", "<=_q{on_p}", "<=_p{c}"]]
    procs = handshake2.processes
    for i in procs:
        for j in procs:
            for a in paths:
                for b in paths:
                    eq = build_eq_trace(handshake2, i, j, a, b)
                    le = build_leq_trace(handshake2, i, j, a, b)
                    for t in traces_upto(handshake2, 4):
                        assert eval_trace(t, eq) == eq_trace_oracle(t, i, j, a, b), \
                            (t.word, i, j, a, b)
                        assert eval_trace(t, le) == leq_trace_oracle(t, i, j, a, b), \
                            (t.word, i, j, a, b)


# ---------------------------------------------------------------------------
# the constants
# ---------------------------------------------------------------------------

def test_yleq_matches_constant(handshake2):
    for i in handshake2.processes:
        for j in handshake2.processes:
            built = build_yleq(handshake2, i, j)
            assert F.dialect_check(built).dialect == "local-past"
            assert equivalent_on(handshake2, 4, built, F.yleq_const(i, j), traces=traces_upto(handshake2, 4)) is None


def test_yleq2_matches_constant(handshake2):
    procs = handshake2.processes
    for i in procs:
        for j in procs:
            for k in procs:
                built = build_yleq2(handshake2, i, j, k)
                cex = equivalent_on(handshake2, 4, built, F.yleq2_const(i, j, k), traces=traces_upto(handshake2, 4))
                assert cex is None, (i, j, k, cex)


def test_lleq_matches_constant(handshake2):
    for i in handshake2.processes:
        for j in handshake2.processes:
            built = build_lleq(handshake2, i, j)
            assert F.dialect_check(built).dialect == "local-past"
            assert equivalent_on(handshake2, 5, built, F.lleq_const(i, j), traces=traces_upto(handshake2, 5)) is None


def test_lleq2_matches_constant(handshake2):
    procs = handshake2.processes
    for i in procs:
        for j in procs:
            for k in procs:
                built = build_lleq2(handshake2, i, j, k)
                cex = equivalent_on(handshake2, 5, built, F.lleq2_const(i, j, k), traces=traces_upto(handshake2, 5))
                assert cex is None, (i, j, k, cex)


def test_constants_single_process(solo1):
    s = "s"
    ts = traces_upto(solo1, 5)
    assert equivalent_on(solo1, 5, build_yleq(solo1, s, s),
                         F.yleq_const(s, s), traces=ts) is None
    assert equivalent_on(solo1, 5, build_yleq2(solo1, s, s, s),
                         F.yleq2_const(s, s, s), traces=ts) is None
    assert equivalent_on(solo1, 5, build_lleq(solo1, s, s),
                         F.lleq_const(s, s), traces=ts) is None
    assert equivalent_on(solo1, 5, build_lleq2(solo1, s, s, s),
                         F.lleq2_const(s, s, s), traces=ts) is None


def test_lleq_three_processes(triangle3):
    built = build_lleq(triangle3, "p", "q")
    assert equivalent_on(triangle3, 3, built, F.lleq_const("p", "q"), traces=traces_upto(triangle3, 3)) is None


# ---------------------------------------------------------------------------
# full elimination
# ---------------------------------------------------------------------------

def test_eliminate_trace_formula(handshake2):
    src = parsing.parse_trace_formula(
        handshake2, "EM ((Yleq p q) | < <-_p >) & Lleq2 p q q")
    out, report = eliminate(handshake2, src)
    rep = F.dialect_check(out)
    assert rep.dialect == "local-past"
    assert not rep.event_constants and not rep.trace_constants
    assert equivalent_on(handshake2, 4, src, out, traces=traces_upto(handshake2, 4)) is None
    assert "EM" in report.constants and "Lleq2 p q q" in report.constants
    assert report.size_after > report.size_before
    assert report.sigma_range == "witness"


def test_eliminate_event_formula(handshake2):
    src = parsing.parse_event_formula(
        handshake2, "(Yleq p q) & !(Yleq2 p p q) | < <-_p . ?(Yleq q q) >")
    out, report = eliminate(handshake2, src)
    rep = F.dialect_check(out)
    assert rep.dialect == "local-past"
    assert equivalent_on(handshake2, 4, src, out, traces=traces_upto(handshake2, 4)) is None
    assert "Yleq q q" in report.constants and "<path>" in report.constants


def test_eliminate_plain_formula_unchanged(handshake2):
    src = parsing.parse_event_formula(handshake2, "< <-_p . ?(a | c) > c")
    out, report = eliminate(handshake2, src)
    assert out is src
    assert report.constants == []
    assert report.size_after == report.size_before


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

def test_node_budget(triangle3):
    with pytest.raises(ResourceLimitError):
        build_yleq(triangle3, "p", "q", limits=Limits(node_budget=200))


def test_process_limit(cycle4):
    with pytest.raises(ResourceLimitError):
        build_yleq(cycle4, "1", "2", limits=Limits(max_processes=3))
    with pytest.raises(ResourceLimitError):
        eliminate(cycle4, F.lleq_const("1", "2"), limits=Limits(max_processes=3))
