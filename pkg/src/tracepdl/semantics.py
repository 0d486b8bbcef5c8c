"""Reference semantics: direct evaluation of formulas over traces.

Event formulas are evaluated for *all* events of a trace at once; truth sets
are bitmasks (bit ``e`` = event ``e`` satisfies the formula).  Paths walk
strictly into the past: the move for process ``i`` steps from an i-event to
its predecessor on the i-chain.  Diamonds are answered by a backward
reachability pass over a compiled path NFA, visiting events in id order so
that every move target is already solved.

This module is deliberately independent of the automata pipeline; it is the
oracle the rest of the package is validated against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from . import formulas as F
from .formulas import Node
from .traces import DistributedAlphabet, Trace, enumerate_traces


# ---------------------------------------------------------------------------
# path NFAs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathNFA:
    n_states: int
    start: int
    accept: int                       # single accepting state
    moves: tuple[tuple[int, str, int], ...]
    tests: tuple[tuple[int, Node, int], ...]   # includes eps edges as TOP tests


_NFA_CACHE: dict[int, PathNFA] = {}


def compile_path_nfa(path: Node) -> PathNFA:
    nfa = _NFA_CACHE.get(id(path))
    if nfa is not None:
        return nfa
    moves: list[tuple[int, str, int]] = []
    tests: list[tuple[int, Node, int]] = []
    counter = [0]

    def fresh() -> int:
        counter[0] += 1
        return counter[0] - 1

    def build(p: Node) -> tuple[int, int]:
        if p.tag == "move":
            s, t = fresh(), fresh()
            moves.append((s, p.args[0], t))
            return s, t
        if p.tag == "test":
            s, t = fresh(), fresh()
            tests.append((s, p.args[0], t))
            return s, t
        if p.tag == "sum":
            s, t = fresh(), fresh()
            for branch in p.args:
                bs, bt = build(branch)
                tests.append((s, F.TOP, bs))
                tests.append((bt, F.TOP, t))
            return s, t
        if p.tag == "cat":
            s1, t1 = build(p.args[0])
            s2, t2 = build(p.args[1])
            tests.append((t1, F.TOP, s2))
            return s1, t2
        if p.tag == "star":
            s, t = fresh(), fresh()
            bs, bt = build(p.args[0])
            tests.append((s, F.TOP, t))
            tests.append((s, F.TOP, bs))
            tests.append((bt, F.TOP, bs))
            tests.append((bt, F.TOP, t))
            return s, t
        raise ValueError(f"not a path node: {p.tag}")

    start, accept = build(path)
    nfa = PathNFA(counter[0], start, accept, tuple(moves), tuple(tests))
    _NFA_CACHE[id(path)] = nfa
    return nfa


# ---------------------------------------------------------------------------
# per-trace context
# ---------------------------------------------------------------------------

class TraceCtx:
    """Evaluation caches for one trace: letter masks, chain predecessors,
    yesterday tables, and a formula-truth memo keyed by node identity."""

    def __init__(self, t: Trace):
        self.t = t
        self.n = len(t)
        self.full = (1 << self.n) - 1
        alpha = t.alphabet
        self.letter_masks: dict[str, int] = {a: 0 for a in alpha.letters}
        for e, lab in enumerate(t.labels):
            self.letter_masks[lab] |= 1 << e
        # prev_on[i][e]: predecessor of e on chain i when e lies on it, else -1
        self.prev_on: dict[str, list[int]] = {}
        self.ytab: dict[str, list[int]] = {}
        for k, proc in enumerate(alpha.processes):
            prev = [-1] * self.n
            chain = t.chains[k]
            for pos in range(1, len(chain)):
                prev[chain[pos]] = chain[pos - 1]
            self.prev_on[proc] = prev
            self.ytab[proc] = [y if (y := t.yesterday(proc, e)) is not None else -1
                               for e in range(self.n)]
        self.maximal_mask = 0
        for e in t.maximal_events():
            self.maximal_mask |= 1 << e
        self.memo: dict[int, int] = {}
        self.step_tables: dict = {}


def get_ctx(t: Trace) -> TraceCtx:
    ctx = t._caches.get("ctx")
    if ctx is None:
        ctx = TraceCtx(t)
        t._caches["ctx"] = ctx
    return ctx


# ---------------------------------------------------------------------------
# event formulas
# ---------------------------------------------------------------------------

def eval_event_all(t: Trace, phi: Node) -> int:
    """Bitmask of the events of ``t`` satisfying ``phi``."""
    return _eval(get_ctx(t), phi)


def eval_event(t: Trace, e: int, phi: Node) -> bool:
    return bool(_eval(get_ctx(t), phi) >> e & 1)


def _eval(ctx: TraceCtx, phi: Node) -> int:
    got = ctx.memo.get(id(phi))
    if got is not None:
        return got
    tag = phi.tag
    if tag == "letter":
        out = ctx.letter_masks.get(phi.args[0], 0)
    elif tag == "top":
        out = ctx.full
    elif tag == "bot":
        out = 0
    elif tag == "or":
        out = _eval(ctx, phi.args[0]) | _eval(ctx, phi.args[1])
    elif tag == "and":
        out = _eval(ctx, phi.args[0]) & _eval(ctx, phi.args[1])
    elif tag == "not":
        out = ctx.full ^ _eval(ctx, phi.args[0])
    elif tag == "dia":
        out = _dia_mask(ctx, phi.args[0], _eval(ctx, phi.args[1]))
    elif tag == "diaex":
        out = _dia_mask(ctx, phi.args[0], ctx.full)
    elif tag == "yleq":
        out = _yleq_mask(ctx, phi.args[0], phi.args[1])
    elif tag == "yleq2":
        out = _yleq2_mask(ctx, phi.args[0], phi.args[1], phi.args[2])
    else:
        raise ValueError(f"not an event formula: {tag}")
    ctx.memo[id(phi)] = out
    return out


def _dia_mask(ctx: TraceCtx, path: Node, target: int) -> int:
    nfa = compile_path_nfa(path)
    test_masks = [(q, _eval(ctx, psi) if psi is not F.TOP else ctx.full, q2)
                  for q, psi, q2 in nfa.tests]
    moves = nfa.moves
    acc_bit = 1 << nfa.accept
    start_bit = 1 << nfa.start
    R = [0] * ctx.n
    result = 0
    for e in range(ctx.n):
        ebit = 1 << e
        cur = acc_bit if target & ebit else 0
        # move edges are resolved once per event: they point at earlier events
        for q, proc, q2 in moves:
            p = ctx.prev_on[proc][e]
            if p >= 0 and R[p] >> q2 & 1:
                cur |= 1 << q
        # saturate test/eps edges valid at e
        changed = True
        while changed:
            changed = False
            for q, mask, q2 in test_masks:
                if mask & ebit and cur >> q2 & 1 and not cur >> q & 1:
                    cur |= 1 << q
                    changed = True
        R[e] = cur
        if cur & start_bit:
            result |= ebit
    return result


def _yleq_mask(ctx: TraceCtx, i: str, j: str) -> int:
    yi, yj, t = ctx.ytab[i], ctx.ytab[j], ctx.t
    out = 0
    for e in range(ctx.n):
        a, b = yi[e], yj[e]
        if a >= 0 and b >= 0 and t.leq(a, b):
            out |= 1 << e
    return out


def _yleq2_mask(ctx: TraceCtx, i: str, j: str, k: str) -> int:
    yi, yj, yk, t = ctx.ytab[i], ctx.ytab[j], ctx.ytab[k], ctx.t
    out = 0
    for e in range(ctx.n):
        a = yi[e]
        ab = yj[a] if a >= 0 else -1
        c = yk[e]
        if ab >= 0 and c >= 0 and t.leq(ab, c):
            out |= 1 << e
    return out


def path_reaches(t: Trace, e: int, path: Node) -> list[int]:
    """All events reachable from ``e`` by a full match of ``path`` (forward
    product search; an independent cross-check of the diamond semantics)."""
    ctx = get_ctx(t)
    nfa = compile_path_nfa(path)
    test_masks = [(q, _eval(ctx, psi) if psi is not F.TOP else ctx.full, q2)
                  for q, psi, q2 in nfa.tests]
    seen = {(e, nfa.start)}
    frontier = [(e, nfa.start)]
    hits: set[int] = set()
    while frontier:
        cur_e, q = frontier.pop()
        if q == nfa.accept:
            hits.add(cur_e)
        for q1, mask, q2 in test_masks:
            if q1 == q and mask >> cur_e & 1 and (cur_e, q2) not in seen:
                seen.add((cur_e, q2))
                frontier.append((cur_e, q2))
        for q1, proc, q2 in nfa.moves:
            if q1 == q:
                p = ctx.prev_on[proc][cur_e]
                if p >= 0 and (p, q2) not in seen:
                    seen.add((p, q2))
                    frontier.append((p, q2))
    return sorted(hits)


# ---------------------------------------------------------------------------
# trace formulas
# ---------------------------------------------------------------------------

def eval_trace(t: Trace, phi: Node) -> bool:
    tag = phi.tag
    if tag == "ttop":
        return True
    if tag == "tbot":
        return False
    if tag == "tor":
        return eval_trace(t, phi.args[0]) or eval_trace(t, phi.args[1])
    if tag == "tand":
        return eval_trace(t, phi.args[0]) and eval_trace(t, phi.args[1])
    if tag == "tnot":
        return not eval_trace(t, phi.args[0])
    if tag == "emi":
        last = t.last(phi.args[0])
        return last is not None and eval_event(t, last, phi.args[1])
    if tag == "em":
        return bool(get_ctx(t).maximal_mask & eval_event_all(t, phi.args[0]))
    if tag == "lleq":
        li, lj = t.last(phi.args[0]), t.last(phi.args[1])
        return li is not None and lj is not None and t.leq(li, lj)
    if tag == "lleq2":
        lij = t.last2(phi.args[0], phi.args[1])
        lk = t.last(phi.args[2])
        return lij is not None and lk is not None and t.leq(lij, lk)
    raise ValueError(f"not a trace formula: {tag}")


# ---------------------------------------------------------------------------
# equivalence checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CounterExample:
    trace: Trace
    event: int | None
    lhs: bool
    rhs: bool

    def __repr__(self) -> str:
        where = f" at event {self.event}" if self.event is not None else ""
        return (f"CounterExample({' '.join(self.trace.word) or 'empty'}{where}: "
                f"{self.lhs} vs {self.rhs})")


def equivalent_on(alphabet: DistributedAlphabet, max_events: int,
                  lhs: Node, rhs: Node,
                  traces: Iterable[Trace] | None = None) -> CounterExample | None:
    """Compare two formulas of the same sort over every trace with at most
    ``max_events`` events; return the least counterexample (trace enumeration
    order, then event id) or None.  Passing ``traces`` reuses existing trace
    objects (and their evaluation caches) instead of enumerating afresh."""
    event_side = F.is_event_formula(lhs)
    if event_side != F.is_event_formula(rhs):
        raise ValueError("formulas are of different sorts")
    if traces is None:
        traces = enumerate_traces(alphabet, max_events)
    for t in traces:
        if event_side:
            a, b = eval_event_all(t, lhs), eval_event_all(t, rhs)
            if a != b:
                e = (diff := a ^ b) & -diff
                return CounterExample(t, e.bit_length() - 1,
                                      bool(a & e), bool(b & e))
        else:
            a, b = eval_trace(t, lhs), eval_trace(t, rhs)
            if a != b:
                return CounterExample(t, None, a, b)
    return None


def traces_satisfying(alphabet: DistributedAlphabet, max_events: int,
                      phi: Node) -> Iterator[Trace]:
    for t in enumerate_traces(alphabet, max_events):
        if eval_trace(t, phi):
            yield t
