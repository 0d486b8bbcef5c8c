"""Compiling local-past event formulas into cascades of localized transducers.

The compiled chain has one stateful stage per diamond subformula, ordered
children-first, plus a stateless output stage for the root.  A diamond stage
is localized at its path's move process: scanning that process's chain
forward, the stage state is the subset of path-automaton states from which
the remaining path can match downward, so the emitted bit at an event is
exactly "some backward match of the whole path starts here".  Letters not on
the move process leave the state alone and emit the move-free acceptance
value, which keeps tests-only diamonds correct everywhere.

Boolean structure never becomes state: each stage reads the base letter
together with the output bits of the diamond stages its tests mention
(``reads`` wiring), and evaluates the surrounding boolean formulas directly
in its tables.  Sentences add one three-state tracker per "some maximal
event satisfies phi" conjunct, recording the latest bit at its process; the
sentence's boolean structure is decided on the final global state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import formulas as F
from .errors import InputError, ResourceLimitError
from .formulas import Node
from .machines import (
    AsyncAutomaton,
    AsyncTransducer,
    CascadeChain,
    direct_product,
    flatten_chain,
    machine_to_json,
    stage_input_alphabet,
)
from .semantics import PathNFA, compile_path_nfa
from .traces import DistributedAlphabet

BITS = ("0", "1")
IDLE = "-"                    # the lone local state of an inactive process
MAX_STAGE_LETTERS = 4096      # cap on |base letters| * 2^reads per stage
MAX_SUBSETS = 4096            # cap on reachable subset states per stage

_EVENT_TAGS = frozenset(
    ("letter", "top", "bot", "or", "and", "not", "dia", "diaex"))
_TRACE_TAGS = frozenset(("ttop", "tbot", "tor", "tand", "tnot", "emi"))


def _guard_event(phi: Node) -> None:
    for sub in F.subterms(phi):
        if sub.tag in ("yleq", "yleq2"):
            raise InputError(
                "event constants must be eliminated before compiling")
        if sub.tag in _TRACE_TAGS or sub.tag in ("em", "lleq", "lleq2"):
            raise InputError(f"not an event formula: contains {sub.tag}")
        if sub.tag in ("dia", "diaex") and not F.is_local(sub.args[0]):
            raise InputError("path with moves on several processes; "
                             "only local paths compile")


def _guard_sentence(phi: Node) -> None:
    if phi.tag not in _TRACE_TAGS:
        raise InputError(f"not a sentence: top-level {phi.tag}")
    for sub in F.subterms(phi):
        if sub.tag in ("em", "lleq", "lleq2"):
            raise InputError(
                "trace constants must be eliminated before compiling")
        if sub.tag in ("yleq", "yleq2"):
            raise InputError(
                "event constants must be eliminated before compiling")
        if sub.tag in ("dia", "diaex") and not F.is_local(sub.args[0]):
            raise InputError("path with moves on several processes; "
                             "only local paths compile")


# ---------------------------------------------------------------------------
# bit evaluation of boolean structure over (letter, stage bits)
# ---------------------------------------------------------------------------


def _eval_bits(node: Node, a: str, env: dict[int, bool], memo: dict[int, bool]) -> bool:
    got = memo.get(id(node))
    if got is not None:
        return got
    hit = env.get(id(node))
    if hit is not None:
        out = hit
    else:
        tag = node.tag
        if tag == "letter":
            out = node.args[0] == a
        elif tag == "top":
            out = True
        elif tag == "bot":
            out = False
        elif tag == "or":
            out = _eval_bits(node.args[0], a, env, memo) or \
                _eval_bits(node.args[1], a, env, memo)
        elif tag == "and":
            out = _eval_bits(node.args[0], a, env, memo) and \
                _eval_bits(node.args[1], a, env, memo)
        elif tag == "not":
            out = not _eval_bits(node.args[0], a, env, memo)
        else:
            raise InputError(f"cannot evaluate {tag} from stage bits")
    memo[id(node)] = out
    return out


def _pure_map(root: Node) -> dict[int, bool]:
    """Per subterm: does its value depend on the event letter alone?

    Diamond subterms (and everything containing one) are impure; letters,
    constants, and boolean combinations of them are pure.
    """
    pure: dict[int, bool] = {}
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        kids = [c for c in node.args if isinstance(c, Node)]
        if done:
            if node.tag in ("dia", "diaex"):
                pure[id(node)] = False
            else:
                pure[id(node)] = all(pure[id(c)] for c in kids)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(kids):
            stack.append((c, False))
    return pure


def _stage_nodes(root: Node, pure: dict[int, bool]) -> list[Node]:
    """The impure subterms needing a stage of their own, children first in a
    deterministic order: diamonds, and the boolean gates above them."""
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            if not pure[id(node)] and node.tag in (
                    "dia", "diaex", "or", "and", "not"):
                order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.args):
            if isinstance(c, Node):
                stack.append((c, False))
    return order


# ---------------------------------------------------------------------------
# the subset automaton of a path
# ---------------------------------------------------------------------------


def _dfa_step(nfa: PathNFA, current: frozenset[int],
              test_true: Sequence[bool], seed: bool) -> frozenset[int]:
    """One chain step: resolve move edges against the previous subset, seed a
    fresh match end when the target formula holds, then saturate the test
    edges that hold at this event."""
    cur = {q for q, _proc, q2 in nfa.moves if q2 in current}
    if seed:
        cur.add(nfa.accept)
    changed = True
    while changed:
        changed = False
        for k, (q, _psi, q2) in enumerate(nfa.tests):
            if test_true[k] and q2 in cur and q not in cur:
                cur.add(q)
                changed = True
    return frozenset(cur)


def _subset_dfa(nfa: PathNFA, gammas: Sequence[tuple[tuple[bool, ...], bool]],
                minimize: bool) -> tuple[list[str], int,
                                         list[list[int]], list[list[bool]]]:
    """Deterministic automaton over the symbols ``gammas``.

    Returns (state names, initial index, transitions[state][symbol],
    outputs[state][symbol]); the output is true when a backward match of the
    path starts at the event just consumed.
    """
    start = frozenset()
    index: dict[frozenset, int] = {start: 0}
    order: list[frozenset] = [start]
    delta: list[list[int]] = []
    out: list[list[bool]] = []
    k = 0
    while k < len(order):
        s = order[k]
        row_d: list[int] = []
        row_o: list[bool] = []
        for tvec, seed in gammas:
            nxt = _dfa_step(nfa, s, tvec, seed)
            j = index.get(nxt)
            if j is None:
                if len(order) >= MAX_SUBSETS:
                    raise ResourceLimitError(
                        f"path automaton exceeds {MAX_SUBSETS} subset states")
                j = len(order)
                index[nxt] = j
                order.append(nxt)
            row_d.append(j)
            row_o.append(nfa.start in nxt)
        delta.append(row_d)
        out.append(row_o)
        k += 1

    n = len(order)
    if minimize and n > 1:
        # Mealy partition refinement on (output row, successor classes)
        cls = {}
        key_to_cls: dict[tuple, int] = {}
        for s in range(n):
            key = tuple(out[s])
            cls[s] = key_to_cls.setdefault(key, len(key_to_cls))
        while True:
            key_to_new: dict[tuple, int] = {}
            new = {}
            for s in range(n):
                key = (cls[s], tuple(cls[delta[s][g]] for g in range(len(gammas))))
                new[s] = key_to_new.setdefault(key, len(key_to_new))
            if len(key_to_new) == len(key_to_cls):
                break
            cls, key_to_cls = new, key_to_new
        reps: dict[int, int] = {}
        keep: list[int] = []
        for s in range(n):           # representative = least original index
            if cls[s] not in reps:
                reps[cls[s]] = len(keep)
                keep.append(s)
        delta = [[reps[cls[delta[s][g]]] for g in range(len(gammas))]
                 for s in keep]
        out = [out[s] for s in keep]
        initial = reps[cls[0]]
        n = len(keep)
    else:
        initial = 0
    names = [f"q{k}" for k in range(n)]
    return names, initial, delta, out


# ---------------------------------------------------------------------------
# exposed path automaton
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathDFA:
    """Deterministic scanner for one local path.

    ``tests`` is the basis of distinct test formulas; a symbol is one
    assignment (bits per test, plus the target bit).  ``transitions`` and
    ``match_starts`` are indexed [state][symbol]; ``match_starts`` says
    whether a backward match of the path starts at the event just read.
    """

    process: str | None
    tests: tuple[Node, ...]
    symbols: tuple[tuple[tuple[bool, ...], bool], ...]
    states: tuple[str, ...]
    initial: str
    transitions: tuple[tuple[int, ...], ...]
    match_starts: tuple[tuple[bool, ...], ...]

    def symbol_index(self, test_values: Sequence[bool], target: bool) -> int:
        return self.symbols.index((tuple(test_values), target))

    def step(self, state: str, symbol: int) -> str:
        return self.states[self.transitions[self.states.index(state)][symbol]]

    def starts_match(self, state: str, symbol: int) -> bool:
        """Reading ``symbol`` in ``state``: does a match start at the event?"""
        return self.match_starts[self.states.index(state)][symbol]


def path_to_dfa(path: Node, *, minimize: bool = True) -> PathDFA:
    """Subset-construct the forward scanner of a backward path.

    The state after each chain event is the set of path positions from which
    the rest of the path can match downward; matches are seeded wherever the
    target holds.  Symbols enumerate all assignments to the distinct test
    formulas plus the target bit.
    """
    procs = F.local_processes(path)
    if procs == frozenset():
        raise InputError("path with moves on several processes")
    process = None if procs is None else next(iter(procs))
    nfa = compile_path_nfa(path)
    basis: list[Node] = []
    for _q, psi, _q2 in nfa.tests:
        if psi is not F.TOP and all(psi is not b for b in basis):
            basis.append(psi)
    if len(basis) > 12:
        raise ResourceLimitError(
            f"{len(basis)} distinct test formulas; symbol alphabet too large")
    pos = {id(psi): k for k, psi in enumerate(basis)}
    symbols: list[tuple[tuple[bool, ...], bool]] = []
    for combo in itertools.product((False, True), repeat=len(basis)):
        tvec = tuple(True if psi is F.TOP else combo[pos[id(psi)]]
                     for _q, psi, _q2 in nfa.tests)
        for seed in (False, True):
            symbols.append((tvec, seed))
    names, initial, delta, out = _subset_dfa(nfa, symbols, minimize)
    return PathDFA(
        process=process,
        tests=tuple(basis),
        symbols=tuple(symbols),
        states=tuple(names),
        initial=names[initial],
        transitions=tuple(tuple(row) for row in delta),
        match_starts=tuple(tuple(row) for row in out),
    )


# ---------------------------------------------------------------------------
# event-formula compilation
# ---------------------------------------------------------------------------


class _Compiler:
    def __init__(self, alphabet: DistributedAlphabet, *,
                 minimize: bool = True, state_budget: int = 1_000_000):
        self.alphabet = alphabet
        self.minimize = minimize
        self.state_budget = state_budget
        self.stages: list[AsyncTransducer] = []
        self.reads: list[tuple[int, ...]] = []
        self.bit_of: dict[int, int] = {}    # impure node id -> stage index
        self.pure: dict[int, bool] = {}
        self.dedup: dict[tuple, int] = {}
        self.pure_bits: dict[tuple[int, str], bool] = {}
        self.dfa_cache: dict[tuple, tuple] = {}
        self.dia_cache: dict[tuple, int] = {}
        self.stage_alpha_cache: dict[int, DistributedAlphabet] = {}
        self.cells = 0

    def _bit(self, node: Node, a: str, env: dict[int, bool]) -> bool:
        """A subformula's value at an event: read bits for impure nodes,
        letter-determined (and memoized) for pure ones."""
        if self.pure[id(node)]:
            key = (id(node), a)
            got = self.pure_bits.get(key)
            if got is None:
                got = _eval_bits(node, a, env, {})
                self.pure_bits[key] = got
            return got
        return env[id(node)]

    def _stage_alphabet(self, n_reads: int) -> DistributedAlphabet:
        got = self.stage_alpha_cache.get(n_reads)
        if got is None:
            got = stage_input_alphabet(self.alphabet, [BITS] * n_reads)
            self.stage_alpha_cache[n_reads] = got
        return got

    # -- budget ----------------------------------------------------------

    def _spend(self, cells: int) -> None:
        self.cells += cells
        if self.cells > self.state_budget:
            raise ResourceLimitError(
                f"compiled tables exceed {self.state_budget} entries")

    # -- stage assembly --------------------------------------------------

    def _push(self, stage: AsyncTransducer, reads: tuple[int, ...],
              dedup: bool = True) -> int:
        if dedup:
            key = (reads, machine_to_json(stage))
            got = self.dedup.get(key)
            if got is not None:
                return got
            self.dedup[key] = len(self.stages)
        self.stages.append(stage)
        self.reads.append(reads)
        return len(self.stages) - 1

    def _stage_letters(self, reads: Sequence[int]):
        """(stage letter, base letter, bits) triples, in alphabet order."""
        n = len(self.alphabet.letters) * (2 ** len(reads))
        if n > MAX_STAGE_LETTERS:
            raise ResourceLimitError(
                f"stage input alphabet needs {n} letters (> {MAX_STAGE_LETTERS})")
        for a in self.alphabet.letters:
            for bits in itertools.product(BITS, repeat=len(reads)):
                name = "|".join((a,) + bits) if bits else a
                yield name, a, bits

    def _stateless(self, inputs: Sequence[Node],
                   bit: Callable[[str, dict[int, bool]], bool],
                   dedup: bool = True) -> int:
        """A single-state stage reading the given impure formulas' bits and
        emitting ``bit(letter, env)``."""
        reads = tuple(self.bit_of[id(x)] for x in inputs)
        alphabet = self.alphabet
        local_states = {p: (IDLE,) for p in alphabet.processes}
        transitions: dict[str, dict[tuple, tuple]] = {}
        outputs: dict[str, dict[tuple, str]] = {}
        for name, a, bits in self._stage_letters(reads):
            key = tuple(IDLE for _ in alphabet.loc(a))
            env = {id(x): b == "1" for x, b in zip(inputs, bits)}
            transitions[name] = {key: key}
            outputs[name] = {key: "1" if bit(a, env) else "0"}
        self._spend(len(transitions))
        base = AsyncAutomaton(self._stage_alphabet(len(reads)), local_states,
                              transitions,
                              tuple(IDLE for _ in alphabet.processes))
        return self._push(AsyncTransducer(base, outputs, BITS), reads, dedup)

    def ensure(self, phi: Node) -> None:
        """Build (or reuse) the stages of every impure subterm of ``phi``."""
        self.pure.update(_pure_map(phi))
        for node in _stage_nodes(phi, self.pure):
            if id(node) in self.bit_of:
                continue
            if node.tag in ("dia", "diaex"):
                self.bit_of[id(node)] = self._build_dia_stage(node)
            else:
                self.bit_of[id(node)] = self._build_gate(node)

    def _inputs_of(self, nodes: Sequence[Node]) -> list[Node]:
        """The distinct impure formulas among ``nodes``, in first-occurrence
        order; these arrive as read bits, everything else is letter-pure."""
        out: list[Node] = []
        seen: set[int] = set()
        for n in nodes:
            if not self.pure[id(n)] and id(n) not in seen:
                seen.add(id(n))
                out.append(n)
        return out

    def _build_gate(self, node: Node) -> int:
        """Stateless stage for one boolean connective over stage bits."""
        kids = list(node.args)
        inputs = self._inputs_of(kids)
        if node.tag == "not":
            fn = lambda a, env: not self._bit(kids[0], a, env)
        elif node.tag == "or":
            fn = lambda a, env: self._bit(kids[0], a, env) or \
                self._bit(kids[1], a, env)
        else:
            fn = lambda a, env: self._bit(kids[0], a, env) and \
                self._bit(kids[1], a, env)
        return self._stateless(inputs, fn)

    def _build_dia_stage(self, d: Node) -> int:
        path = d.args[0]
        sub = d.args[1] if d.tag == "dia" else F.TOP
        procs = F.local_processes(path)
        if procs == frozenset():
            raise InputError("path with moves on several processes")
        active = None if procs is None else next(iter(procs))
        nfa = compile_path_nfa(path)

        test_nodes = [psi for _q, psi, _q2 in nfa.tests]
        for psi in test_nodes + [sub]:
            if id(psi) not in self.pure:
                self.pure.update(_pure_map(psi))
        distinct: list[Node] = []
        dpos: dict[int, int] = {}
        for psi in test_nodes:
            if id(psi) not in dpos:
                dpos[id(psi)] = len(distinct)
                distinct.append(psi)
        edge_idx = [dpos[id(psi)] for psi in test_nodes]
        inputs = self._inputs_of(distinct + [sub])
        reads = tuple(self.bit_of[id(x)] for x in inputs)

        # symbol per stage letter, deduplicated
        gamma_index: dict[tuple, int] = {}
        gammas: list[tuple[tuple[bool, ...], bool]] = []
        letter_gammas: list[int] = []
        letters = list(self._stage_letters(reads))
        for name, a, bits in letters:
            env = {id(x): b == "1" for x, b in zip(inputs, bits)}
            dvals = [self._bit(psi, a, env) for psi in distinct]
            tvec = tuple(dvals[k] for k in edge_idx)
            seed = self._bit(sub, a, env)
            g = gamma_index.setdefault((tvec, seed), len(gammas))
            if g == len(gammas):
                gammas.append((tvec, seed))
            letter_gammas.append(g)

        skey = (id(nfa), active, reads, tuple(gammas), tuple(letter_gammas))
        got = self.dia_cache.get(skey)
        if got is not None:
            return got

        dkey = (id(nfa), tuple(gammas))
        hit = self.dfa_cache.get(dkey)
        if hit is None:
            names, initial, delta, out = _subset_dfa(nfa, gammas,
                                                     self.minimize)
            # the move-free acceptance: one step from the empty subset
            zero_bit = tuple(
                "1" if nfa.start in _dfa_step(nfa, frozenset(), *g) else "0"
                for g in gammas)
            hit = (names, initial, delta, out, zero_bit)
            self.dfa_cache[dkey] = hit
        names, initial, delta, out, zero_bit = hit

        alphabet = self.alphabet
        local_states = {p: (IDLE,) for p in alphabet.processes}
        if active is not None:
            local_states[active] = tuple(names)
        initial_global = tuple(
            names[initial] if p == active else IDLE for p in alphabet.processes)
        transitions: dict[str, dict[tuple, tuple]] = {}
        outputs: dict[str, dict[tuple, str]] = {}
        for (name, a, bits), g in zip(letters, letter_gammas):
            loc = alphabet.loc(a)
            table: dict[tuple, tuple] = {}
            omap: dict[tuple, str] = {}
            if active is not None and active in loc:
                k = loc.index(active)
                for s, sname in enumerate(names):
                    key = tuple(sname if j == k else IDLE
                                for j in range(len(loc)))
                    value = tuple(names[delta[s][g]] if j == k else IDLE
                                  for j in range(len(loc)))
                    table[key] = value
                    omap[key] = "1" if out[s][g] else "0"
            else:
                # letter off the path's process: state unchanged; the bit is
                # the move-free acceptance (matches that never leave the event)
                key = tuple(IDLE for _ in loc)
                table[key] = key
                omap[key] = zero_bit[g]
            transitions[name] = table
            outputs[name] = omap
        self._spend(sum(len(v) for v in transitions.values()))
        base = AsyncAutomaton(self._stage_alphabet(len(reads)), local_states,
                              transitions, initial_global)
        idx = self._push(AsyncTransducer(base, outputs, BITS), reads)
        self.dia_cache[skey] = idx
        return idx

    def root_stage(self, phi: Node) -> int:
        """The final stateless stage emitting exactly the formula's bit; it
        echoes the formula's own stage when one exists."""
        if id(phi) not in self.pure:
            self.pure.update(_pure_map(phi))
        if self.pure[id(phi)]:
            return self._stateless(
                [], lambda a, env: self._bit(phi, a, env), dedup=False)
        return self._stateless(
            [phi], lambda a, env: env[id(phi)], dedup=False)


def compile_event(alphabet: DistributedAlphabet, phi: Node, *,
                  minimize: bool = True,
                  state_budget: int = 1_000_000) -> CascadeChain:
    """Compile an event formula; the final stage's bit is the formula's value.

    Every stage is localized (diamond stages at their path's process,
    boolean and letter structure in stateless stages), and evaluating the
    chain labels each event with all stage bits, the last being the
    formula."""
    _guard_event(phi)
    comp = _Compiler(alphabet, minimize=minimize, state_budget=state_budget)
    comp.ensure(phi)
    comp.root_stage(phi)
    return CascadeChain(alphabet, comp.stages, comp.reads)


def eval_bit_labels(chain: CascadeChain, trace) -> list[bool]:
    """The final stage's output per event, as booleans in word order."""
    matrix = chain.gamma_matrix(trace)
    return [g == "1" for g in matrix[-1]] if matrix else []


# ---------------------------------------------------------------------------
# sentences
# ---------------------------------------------------------------------------


_TRACKER_STATES = ("n", "t", "f")   # no event yet / last bit true / false


def _emi_nodes(phi: Node) -> list[Node]:
    out: list[Node] = []
    seen: set[int] = set()
    stack = [phi]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if n.tag == "emi":
            if all(n is not m for m in out):
                out.append(n)
            continue
        for c in reversed(n.args):
            if isinstance(c, Node):
                stack.append(c)
    return out


def _tracker_stage(comp: _Compiler, process: str, bit_stage: int) -> int:
    """Three-state stage at ``process`` remembering the latest read bit."""
    alphabet = comp.alphabet
    reads = (bit_stage,)
    local_states = {p: tuple(_TRACKER_STATES) if p == process else (IDLE,)
                    for p in alphabet.processes}
    initial = tuple("n" if p == process else IDLE for p in alphabet.processes)
    transitions: dict[str, dict[tuple, tuple]] = {}
    outputs: dict[str, dict[tuple, str]] = {}
    for name, a, bits in comp._stage_letters(reads):
        loc = alphabet.loc(a)
        table: dict[tuple, tuple] = {}
        omap: dict[tuple, str] = {}
        if process in loc:
            k = loc.index(process)
            new = "t" if bits[0] == "1" else "f"
            for s in _TRACKER_STATES:
                key = tuple(s if j == k else IDLE for j in range(len(loc)))
                table[key] = tuple(new if j == k else IDLE
                                   for j in range(len(loc)))
                omap[key] = "0"
        else:
            key = tuple(IDLE for _ in loc)
            table[key] = key
            omap[key] = "0"
        transitions[name] = table
        outputs[name] = omap
    comp._spend(sum(len(v) for v in transitions.values()))
    base = AsyncAutomaton(comp._stage_alphabet(1), local_states, transitions,
                          initial)
    return comp._push(AsyncTransducer(base, outputs, BITS), reads)


def _sentence_chain(alphabet: DistributedAlphabet, phi: Node, *,
                    minimize: bool = True, state_budget: int = 1_000_000,
                    ) -> tuple[CascadeChain, dict[int, int], list[Node]]:
    """The stage chain of a sentence plus, per ``emi`` node, the index of its
    tracker stage."""
    _guard_sentence(phi)
    comp = _Compiler(alphabet, minimize=minimize, state_budget=state_budget)
    emis = _emi_nodes(phi)
    trackers: dict[int, int] = {}
    for node in emis:
        process, body = node.args
        comp.ensure(body)
        bit_stage = comp.root_stage(body)
        trackers[id(node)] = _tracker_stage(comp, process, bit_stage)
    if not emis:
        # constant sentence: a single stateless stage keeps the chain nonempty
        comp.root_stage(F.TOP)
    return CascadeChain(alphabet, comp.stages, comp.reads), trackers, emis


def _sentence_value(phi: Node, emi_values: dict[int, bool]) -> bool:
    tag = phi.tag
    if tag == "ttop":
        return True
    if tag == "tbot":
        return False
    if tag == "tor":
        return _sentence_value(phi.args[0], emi_values) or \
            _sentence_value(phi.args[1], emi_values)
    if tag == "tand":
        return _sentence_value(phi.args[0], emi_values) and \
            _sentence_value(phi.args[1], emi_values)
    if tag == "tnot":
        return not _sentence_value(phi.args[0], emi_values)
    if tag == "emi":
        return emi_values[id(phi)]
    raise InputError(f"not a sentence connective: {tag}")


def compile_sentence(alphabet: DistributedAlphabet, phi: Node, *,
                     minimize: bool = True, state_budget: int = 1_000_000,
                     ) -> tuple[AsyncAutomaton, Callable[[tuple], bool]]:
    """One asynchronous automaton plus a predicate on its final global state.

    The machine runs every event chain of the sentence in one product; the
    predicate reads each tracker's component out of the final state and
    evaluates the sentence's boolean structure.
    """
    chain, trackers, emis = _sentence_chain(
        alphabet, phi, minimize=minimize, state_budget=state_budget)
    flat, naming = flatten_chain(chain, keep=(len(chain) - 1,),
                                 state_budget=state_budget,
                                 return_naming=True)

    pidx = {node_id: alphabet.process_index(node.args[0])
            for node_id, node in ((id(n), n) for n in emis)}
    proc_names = alphabet.processes

    def predicate(global_state: tuple) -> bool:
        values: dict[int, bool] = {}
        for node in emis:
            k = trackers[id(node)]
            i = pidx[id(node)]
            stack = naming[proc_names[i]][global_state[i]]
            values[id(node)] = stack[k] == "t"
        return _sentence_value(phi, values)

    return flat.base, predicate


# ---------------------------------------------------------------------------
# gossip
# ---------------------------------------------------------------------------


def gossip(alphabet: DistributedAlphabet, *, minimize: bool = True,
           state_budget: int = 1_000_000,
           node_budget: int = 500_000) -> AsyncTransducer:
    """The transducer labelling every event with all yesterday comparisons.

    Component (i, j) is the compiled, flattened chain of the constant-free
    formula for "the i-yesterday lies below the j-yesterday"; the direct
    product emits the comma-joined tuple of bits in process-pair order.
    Large alphabets exhaust the construction budgets quickly.
    """
    from .elimination import Limits, build_yleq

    limits = Limits(max_processes=max(4, alphabet.n_processes),
                    node_budget=node_budget)
    parts: list[AsyncTransducer] = []
    for i in alphabet.processes:
        for j in alphabet.processes:
            phi = build_yleq(alphabet, i, j, limits=limits)
            chain = compile_event(alphabet, phi, minimize=minimize,
                                  state_budget=state_budget)
            parts.append(flatten_chain(chain, keep=(len(chain) - 1,),
                                       state_budget=state_budget))
    product = direct_product(parts)
    if product.base.n_global > state_budget:
        raise ResourceLimitError(
            f"gossip product has {product.base.n_global} global states "
            f"(> {state_budget})")
    return product


def gossip_pairs(alphabet: DistributedAlphabet) -> list[tuple[str, str]]:
    """The (i, j) order of the gossip output components."""
    return [(i, j) for i in alphabet.processes for j in alphabet.processes]


# ---------------------------------------------------------------------------
# size reporting
# ---------------------------------------------------------------------------


def size_report(alphabet: DistributedAlphabet, phi: Node, *,
                minimize: bool = True,
                state_budget: int = 1_000_000) -> dict:
    """Exact sizes of the compiled machine for one formula or sentence."""
    if phi.tag in _TRACE_TAGS or phi.tag in ("em", "lleq", "lleq2"):
        chain, _trackers, _emis = _sentence_chain(
            alphabet, phi, minimize=minimize, state_budget=state_budget)
    else:
        chain = compile_event(alphabet, phi, minimize=minimize,
                              state_budget=state_budget)
    per_stage = [max(len(v) for v in st.base.local_states.values())
                 for st in chain.stages]
    return {
        "stages": len(chain),
        "per_stage_local_states": per_stage,
        "global_state_count": math.prod(
            st.base.n_global for st in chain.stages),
        "formula_size": F.size(phi),
    }
