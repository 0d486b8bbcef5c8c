"""Asynchronous automata and transducers over traces.

A machine keeps one state per process; a letter reads and rewrites only the
states of the processes sharing it.  Runs are therefore independent of the
linearization chosen for a trace, and a transducer's output at an event
depends only on that event's causal past.

Letters of a transduced trace are encoded ``base|gamma`` (``PAIR_SEP`` joins
the parts); cascades extend the encoding one ``|gamma`` segment per stage
read.  State names are arbitrary strings and survive JSON round-trips
verbatim; product constructions name their states by JSON-encoding the
component names, which keeps distinct pairs distinct.
"""

from __future__ import annotations

import itertools
import json
import math
from array import array
from collections import deque
from typing import Callable, Iterable, Sequence

from .errors import InputError, ResourceLimitError
from .traces import DistributedAlphabet, Trace

PAIR_SEP = "|"

GlobalState = tuple  # one local state per process, in alphabet process order
StateTuple = tuple   # states of loc(a), in alphabet process order


def encode_pair(base: str, gamma: str) -> str:
    return f"{base}{PAIR_SEP}{gamma}"


def split_pair(letter: str) -> tuple[str, str]:
    """Undo one level of ``encode_pair``; error on an unpaired letter."""
    if PAIR_SEP not in letter:
        raise InputError(f"letter {letter!r} carries no output component")
    base, _, gamma = letter.rpartition(PAIR_SEP)
    return base, gamma


def base_letter(letter: str) -> str:
    """Strip every output component, recovering the original input letter."""
    return letter.split(PAIR_SEP, 1)[0]


def final_gamma(letter: str) -> str:
    """The outermost output component of a paired letter."""
    return split_pair(letter)[1]


def stage_input_alphabet(base: DistributedAlphabet,
                         gamma_sets: Sequence[Sequence[str]]) -> DistributedAlphabet:
    """Extend every base letter with one output component per set, in order.

    With no sets this is the base alphabet itself; each set multiplies the
    letters by its size.  Locations are inherited from the base letter.
    """
    gamma_sets = [tuple(g) for g in gamma_sets]
    if any(not g for g in gamma_sets):
        raise InputError("output alphabet is empty")
    return DistributedAlphabet({
        p: tuple(PAIR_SEP.join((a,) + combo)
                 for a in base.letters_of[p]
                 for combo in itertools.product(*gamma_sets))
        for p in base.processes
    })


def pair_alphabet(alphabet: DistributedAlphabet,
                  gammas: Sequence[str]) -> DistributedAlphabet:
    """The full product alphabet: every ``letter|gamma``, located like letter."""
    return stage_input_alphabet(alphabet, [gammas])


def _pair_name(*parts: str) -> str:
    return json.dumps(parts, separators=(",", ":"))


# ---------------------------------------------------------------------------
# automata
# ---------------------------------------------------------------------------


class AsyncAutomaton:
    """Deterministic asynchronous automaton.

    ``local_states`` maps each process to its ordered, nonempty state set;
    ``transitions[a]`` is a total function on tuples of loc(a)-states (in
    alphabet process order); ``initial`` is one global state.
    """

    __slots__ = ("alphabet", "local_states", "transitions", "initial")

    def __init__(self, alphabet: DistributedAlphabet,
                 local_states: dict[str, Sequence[str]],
                 transitions: dict[str, dict[StateTuple, StateTuple]],
                 initial: Sequence[str]):
        self.alphabet = alphabet
        if set(local_states) != set(alphabet.processes):
            raise InputError("local state sets must cover exactly the processes")
        self.local_states: dict[str, tuple[str, ...]] = {}
        for p in alphabet.processes:
            states = tuple(local_states[p])
            if not states:
                raise InputError(f"process {p!r} has no local states")
            if len(set(states)) != len(states):
                raise InputError(f"process {p!r} repeats a local state")
            self.local_states[p] = states
        self.initial: GlobalState = tuple(initial)
        if len(self.initial) != alphabet.n_processes:
            raise InputError("initial state needs one entry per process")
        for p, s in zip(alphabet.processes, self.initial):
            if s not in self.local_states[p]:
                raise InputError(f"initial state {s!r} unknown at process {p!r}")
        if set(transitions) != set(alphabet.letters):
            raise InputError("transitions must cover exactly the letters")
        self.transitions: dict[str, dict[StateTuple, StateTuple]] = {}
        for a in alphabet.letters:
            loc = alphabet.loc(a)
            table = dict(transitions[a])
            expected = math.prod(len(self.local_states[p]) for p in loc)
            if len(table) != expected:
                raise InputError(f"transition table for {a!r} is not total")
            for key, value in table.items():
                for tup in (key, value):
                    if len(tup) != len(loc) or any(
                            s not in self.local_states[p] for p, s in zip(loc, tup)):
                        raise InputError(f"bad state tuple {tup!r} for letter {a!r}")
            self.transitions[a] = table

    # -- running ---------------------------------------------------------

    def state_at(self, state: GlobalState, letter: str) -> StateTuple:
        return tuple(state[i] for i in self.alphabet.loc_idx(letter))

    def step(self, state: GlobalState, letter: str) -> GlobalState:
        loc = self.alphabet.loc_idx(letter)
        key = tuple(state[i] for i in loc)
        try:
            value = self.transitions[letter][key]
        except KeyError:
            raise InputError(f"letter {letter!r} not accepted by this machine") from None
        out = list(state)
        for i, s in zip(loc, value):
            out[i] = s
        return tuple(out)

    def run(self, trace_or_word: Trace | Iterable[str]) -> GlobalState:
        """Global state after the whole input; any linearization gives the same."""
        word = trace_or_word.word if isinstance(trace_or_word, Trace) else trace_or_word
        state = self.initial
        for a in word:
            state = self.step(state, a)
        return state

    def accepts(self, final: set | frozenset | Callable[[GlobalState], bool],
                trace_or_word: Trace | Iterable[str]) -> bool:
        state = self.run(trace_or_word)
        if callable(final):
            return bool(final(state))
        return state in final

    # -- shape -----------------------------------------------------------

    @property
    def n_global(self) -> int:
        return math.prod(len(v) for v in self.local_states.values())

    def global_states(self, limit: int = 1_000_000) -> list[GlobalState]:
        if self.n_global > limit:
            raise ResourceLimitError(
                f"{self.n_global} global states exceed the limit {limit}")
        return [tuple(c) for c in itertools.product(
            *(self.local_states[p] for p in self.alphabet.processes))]

    def localized_at(self) -> frozenset[str]:
        """Processes p such that every other process has a single state."""
        procs = self.alphabet.processes
        return frozenset(
            p for p in procs
            if all(len(self.local_states[q]) == 1 for q in procs if q != p))

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "alphabet": {p: list(v) for p, v in self.alphabet.letters_of.items()},
            "local_states": {p: list(v) for p, v in self.local_states.items()},
            "initial": list(self.initial),
            "transitions": {
                a: [[list(k), list(v)] for k, v in sorted(table.items())]
                for a, table in self.transitions.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AsyncAutomaton":
        alphabet = DistributedAlphabet(
            {p: tuple(v) for p, v in data["alphabet"].items()})
        transitions = {
            a: {tuple(k): tuple(v) for k, v in entries}
            for a, entries in data["transitions"].items()
        }
        return cls(alphabet, data["local_states"], transitions, data["initial"])


class AsyncTransducer:
    """An asynchronous automaton that also emits one output letter per event.

    ``outputs[a]`` maps each loc(a)-state tuple to a string from
    ``output_alphabet``; the emitted letter reflects the state *before* the
    event, so outputs are determined by the event's strict causal past plus
    its own label.
    """

    __slots__ = ("base", "outputs", "output_alphabet")

    def __init__(self, base: AsyncAutomaton,
                 outputs: dict[str, dict[StateTuple, str]],
                 output_alphabet: Sequence[str] | None = None):
        self.base = base
        if set(outputs) != set(base.alphabet.letters):
            raise InputError("outputs must cover exactly the letters")
        self.outputs: dict[str, dict[StateTuple, str]] = {}
        seen: set[str] = set()
        for a, table in outputs.items():
            table = dict(table)
            if set(table) != set(base.transitions[a]):
                raise InputError(f"output table for {a!r} is not total")
            self.outputs[a] = table
            seen.update(table.values())
        if output_alphabet is None:
            self.output_alphabet = tuple(sorted(seen))
        else:
            self.output_alphabet = tuple(output_alphabet)
            if not seen <= set(self.output_alphabet):
                raise InputError("an output table emits a letter outside the range")

    @property
    def alphabet(self) -> DistributedAlphabet:
        return self.base.alphabet

    def gamma_of(self, trace: Trace) -> list[str]:
        """Output letter per event, in ``trace.word`` order."""
        alphabet = self.base.alphabet
        if trace.alphabet.processes != alphabet.processes:
            raise InputError("trace and machine disagree on the processes")
        state = list(self.base.initial)
        out: list[str] = []
        for a in trace.word:
            try:
                loc = alphabet.loc_idx(a)
            except InputError:
                raise InputError(f"letter {a!r} not accepted by this machine") from None
            key = tuple(state[i] for i in loc)
            out.append(self.outputs[a][key])
            for i, s in zip(loc, self.base.transitions[a][key]):
                state[i] = s
        return out

    def transduce(self, trace: Trace) -> Trace:
        """Relabel ``trace`` with ``label|output``; the poset is unchanged."""
        gammas = self.gamma_of(trace)
        labels = tuple(encode_pair(a, g) for a, g in zip(trace.word, gammas))
        pairs = sorted(set(zip(trace.word, gammas)))
        out_alpha = DistributedAlphabet({
            p: tuple(encode_pair(a, g) for a in trace.alphabet.letters_of[p]
                     for b, g in pairs if b == a)
            for p in trace.alphabet.processes
        })
        return Trace(out_alpha, labels, labels, trace.clocks, trace.chains)

    def localized_at(self) -> frozenset[str]:
        return self.base.localized_at()

    def to_dict(self) -> dict:
        data = self.base.to_dict()
        data["output_alphabet"] = list(self.output_alphabet)
        data["outputs"] = {
            a: [[list(k), v] for k, v in sorted(table.items())]
            for a, table in self.outputs.items()
        }
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "AsyncTransducer":
        base = AsyncAutomaton.from_dict(data)
        outputs = {
            a: {tuple(k): v for k, v in entries}
            for a, entries in data["outputs"].items()
        }
        return cls(base, outputs, data.get("output_alphabet"))


def machine_to_json(machine: "AsyncAutomaton | AsyncTransducer | CascadeChain") -> str:
    if isinstance(machine, CascadeChain):
        data = machine.to_dict()
        data["kind"] = "cascade"
    elif isinstance(machine, AsyncTransducer):
        data = machine.to_dict()
        data["kind"] = "transducer"
    elif isinstance(machine, AsyncAutomaton):
        data = machine.to_dict()
        data["kind"] = "automaton"
    else:
        raise InputError(f"cannot serialize {type(machine).__name__}")
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def machine_from_json(text: str) -> "AsyncAutomaton | AsyncTransducer | CascadeChain":
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"bad machine JSON: {exc}") from None
    kind = data.get("kind")
    if kind == "automaton":
        return AsyncAutomaton.from_dict(data)
    if kind == "transducer":
        return AsyncTransducer.from_dict(data)
    if kind == "cascade":
        return CascadeChain.from_dict(data)
    raise InputError(f"unknown machine kind {kind!r}")


# ---------------------------------------------------------------------------
# products and cascades
# ---------------------------------------------------------------------------


def direct_product(transducers: Sequence[AsyncTransducer]) -> AsyncTransducer:
    """Run several transducers over the same input in lockstep.

    The product emits the component outputs joined with commas; local states
    are tuples of component states.  The product of one machine is that
    machine up to state renaming; localization only survives when every
    component is localized at the same process.
    """
    if not transducers:
        raise InputError("direct product needs at least one machine")
    alphabet = transducers[0].alphabet
    for t in transducers[1:]:
        if t.alphabet != alphabet:
            raise InputError("direct product needs a common input alphabet")
    local_states = {
        p: tuple(_pair_name(*combo) for combo in itertools.product(
            *(t.base.local_states[p] for t in transducers)))
        for p in alphabet.processes
    }
    initial = tuple(_pair_name(*(t.base.initial[i] for t in transducers))
                    for i in range(alphabet.n_processes))
    transitions: dict[str, dict[StateTuple, StateTuple]] = {}
    outputs: dict[str, dict[StateTuple, str]] = {}
    for a in alphabet.letters:
        loc = alphabet.loc(a)
        table: dict[StateTuple, StateTuple] = {}
        out: dict[StateTuple, str] = {}
        for combos in itertools.product(
                *(itertools.product(*(t.base.local_states[p] for t in transducers))
                  for p in loc)):
            # combos[j][m] = state of component m at process loc[j]
            key = tuple(_pair_name(*c) for c in combos)
            next_parts: list[tuple[str, ...]] = []
            out_parts: list[str] = []
            for m, t in enumerate(transducers):
                sub_key = tuple(c[m] for c in combos)
                next_parts.append(t.base.transitions[a][sub_key])
                out_parts.append(t.outputs[a][sub_key])
            table[key] = tuple(
                _pair_name(*(part[j] for part in next_parts))
                for j in range(len(loc)))
            out[key] = ",".join(out_parts)
        transitions[a] = table
        outputs[a] = out
    base = AsyncAutomaton(alphabet, local_states, transitions, initial)
    return AsyncTransducer(base, outputs)


def local_cascade(first: AsyncTransducer, second: AsyncTransducer) -> AsyncTransducer:
    """Feed ``first``'s output into ``second`` letter by letter.

    ``second`` must read the paired alphabet of ``first``.  On each letter the
    product updates ``first`` and, under ``letter|gamma``, updates ``second``;
    the composite emits what ``second`` emits.  Running the composite equals
    running ``second`` on ``first``'s transduction, event by event.
    """
    alphabet = first.alphabet
    expected = pair_alphabet(alphabet, first.output_alphabet)
    if second.alphabet != expected:
        raise InputError("second stage must read the first stage's paired alphabet")
    local_states = {
        p: tuple(_pair_name(s, q)
                 for s in first.base.local_states[p]
                 for q in second.base.local_states[p])
        for p in alphabet.processes
    }
    initial = tuple(_pair_name(s, q)
                    for s, q in zip(first.base.initial, second.base.initial))
    transitions: dict[str, dict[StateTuple, StateTuple]] = {}
    outputs: dict[str, dict[StateTuple, str]] = {}
    for a in alphabet.letters:
        loc = alphabet.loc(a)
        table: dict[StateTuple, StateTuple] = {}
        out: dict[StateTuple, str] = {}
        for key_first in itertools.product(*(first.base.local_states[p] for p in loc)):
            gamma = first.outputs[a][key_first]
            next_first = first.base.transitions[a][key_first]
            paired = encode_pair(a, gamma)
            for key_second in itertools.product(
                    *(second.base.local_states[p] for p in loc)):
                key = tuple(_pair_name(s, q) for s, q in zip(key_first, key_second))
                next_second = second.base.transitions[paired][key_second]
                table[key] = tuple(_pair_name(s, q)
                                   for s, q in zip(next_first, next_second))
                out[key] = second.outputs[paired][key_second]
        transitions[a] = table
        outputs[a] = out
    base = AsyncAutomaton(alphabet, local_states, transitions, initial)
    return AsyncTransducer(base, outputs, second.output_alphabet)


class CascadeChain:
    """A sequence of transducer stages over one base alphabet.

    Stage k reads the base letter extended with the outputs of the earlier
    stages listed in ``reads[k]`` (all earlier stages by default), encoded
    ``base|g1|g2|...`` in read order.  Stage input alphabets are checked
    against that encoding.  Evaluation relabels each event with the base
    letter followed by every stage's output.
    """

    __slots__ = ("base_alphabet", "stages", "reads")

    def __init__(self, base_alphabet: DistributedAlphabet,
                 stages: Sequence[AsyncTransducer],
                 reads: Sequence[Sequence[int]] | None = None):
        self.base_alphabet = base_alphabet
        self.stages = tuple(stages)
        if reads is None:
            reads = [tuple(range(k)) for k in range(len(self.stages))]
        if len(reads) != len(self.stages):
            raise InputError("need one read list per stage")
        self.reads: tuple[tuple[int, ...], ...] = tuple(tuple(r) for r in reads)
        for k, (stage, read) in enumerate(zip(self.stages, self.reads)):
            if any(not 0 <= r < k for r in read):
                raise InputError(f"stage {k} reads a stage that is not earlier")
            expected = self._stage_alphabet(k)
            if stage.alphabet != expected:
                raise InputError(f"stage {k} alphabet does not match its reads")

    def _stage_alphabet(self, k: int) -> DistributedAlphabet:
        return stage_input_alphabet(
            self.base_alphabet,
            [self.stages[r].output_alphabet for r in self.reads[k]])

    def __len__(self) -> int:
        return len(self.stages)

    def stage_letter(self, k: int, base: str, gammas: Sequence[str]) -> str:
        """Input letter of stage k at an event whose earlier outputs are gammas."""
        read = self.reads[k]
        if not read:
            return base
        return PAIR_SEP.join((base,) + tuple(gammas[r] for r in read))

    def gamma_matrix(self, trace: Trace) -> list[list[str]]:
        """``matrix[k][e]``: output of stage k at event e (word order)."""
        if trace.alphabet.processes != self.base_alphabet.processes:
            raise InputError("trace and chain disagree on the processes")
        states = [list(stage.base.initial) for stage in self.stages]
        matrix: list[list[str]] = [[] for _ in self.stages]
        for a in trace.word:
            loc = self.base_alphabet.loc_idx(a)
            gammas: list[str] = []
            for k, stage in enumerate(self.stages):
                letter = self.stage_letter(k, a, gammas)
                key = tuple(states[k][i] for i in loc)
                try:
                    gammas.append(stage.outputs[letter][key])
                    nxt = stage.base.transitions[letter][key]
                except KeyError:
                    raise InputError(
                        f"stage {k} does not accept letter {letter!r}") from None
                for i, s in zip(loc, nxt):
                    states[k][i] = s
            for k, g in enumerate(gammas):
                matrix[k].append(g)
        return matrix

    def cascade_eval(self, trace: Trace) -> Trace:
        """Relabel every event with the base letter plus all stage outputs."""
        matrix = self.gamma_matrix(trace)
        labels = tuple(
            PAIR_SEP.join((a,) + tuple(matrix[k][e] for k in range(len(self.stages))))
            for e, a in enumerate(trace.word))
        out_alpha = DistributedAlphabet({
            p: tuple(dict.fromkeys(
                labels[e] for e in trace.chain(p)))
            for p in trace.alphabet.processes
        })
        return Trace(out_alpha, labels, labels, trace.clocks, trace.chains)

    def localized_stages(self) -> list[frozenset[str]]:
        return [stage.localized_at() for stage in self.stages]

    def to_dict(self) -> dict:
        return {
            "base_alphabet": {p: list(v)
                              for p, v in self.base_alphabet.letters_of.items()},
            "stages": [stage.to_dict() for stage in self.stages],
            "reads": [list(r) for r in self.reads],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CascadeChain":
        alphabet = DistributedAlphabet(
            {p: tuple(v) for p, v in data["base_alphabet"].items()})
        stages = [AsyncTransducer.from_dict(d) for d in data["stages"]]
        return cls(alphabet, stages, data["reads"])


def flatten_chain(chain: CascadeChain, keep: Sequence[int] | None = None,
                  *, state_budget: int = 1_000_000,
                  return_naming: bool = False,
                  progress=None):
    """Collapse a chain into one transducer over the base alphabet.

    Local states are trimmed to the projections of the globally reachable
    product states; transition entries that would leave the trimmed sets (only
    possible from never-jointly-reachable tuples) fall back to the initial
    local state.  The output is the concatenation of the outputs of the
    ``keep`` stages (default: the last stage).

    With ``return_naming`` the result is a pair: the transducer, plus a map
    ``{process: {flat state name: per-stage local states}}`` decoding the
    flattened names.

    ``progress``, if given, is called periodically during the reachability
    search with ``(states_found, per_process_stack_counts)``.
    """
    if keep is None:
        keep = (len(chain) - 1,)
    keep = tuple(keep)
    if not chain.stages:
        raise InputError("cannot flatten an empty chain")
    if any(not 0 <= k < len(chain) for k in keep):
        raise InputError("keep index out of range")
    alphabet = chain.base_alphabet
    n_proc = alphabet.n_processes
    n_stages = len(chain)
    stages = chain.stages
    procs = alphabet.processes
    loc_cache = {a: alphabet.loc_idx(a) for a in alphabet.letters}

    # Index every stage table by integers: state_names[k][i] lists stage k's
    # local states at process index i, and for each (stage, base letter,
    # feed bits) the next-state and output rows are flat lists over the
    # combination index of loc(letter)'s stage-k states.
    state_names: list[list[tuple[str, ...]]] = [
        [st.base.local_states[p] for p in procs] for st in stages]
    state_index: list[list[dict[str, int]]] = [
        [{s: x for x, s in enumerate(names)} for names in per_proc]
        for per_proc in state_names]
    pre: list[dict[tuple, tuple[list[int], list[str]]]] = []
    for k, stage in enumerate(stages):
        reads = chain.reads[k]
        table_k: dict[tuple, tuple[list[int], list[str]]] = {}
        for a in alphabet.letters:
            loc = loc_cache[a]
            sizes = [len(state_names[k][i]) for i in loc]
            for bits in itertools.product("01", repeat=len(reads)):
                feed = [""] * k
                for r, b in zip(reads, bits):
                    feed[r] = b
                in_letter = chain.stage_letter(k, a, feed)
                moves = stage.base.transitions[in_letter]
                outs = stage.outputs[in_letter]
                nxt_row: list[int] = []
                out_row: list[str] = []
                for combo in itertools.product(
                        *(state_names[k][i] for i in loc)):
                    moved = moves[combo]
                    flat = 0
                    for j, i in enumerate(loc):
                        flat = flat * sizes[j] + state_index[k][i][moved[j]]
                    nxt_row.append(flat)
                    out_row.append(outs[combo])
                table_k[(a,) + bits] = (nxt_row, out_row)
        pre.append(table_k)

    # Stages with identical indexed tables, initial states, state-space shape
    # and identically-mapped reads behave identically forever: their copies
    # move in lockstep, so they can share one coordinate of the product.
    # Sharing changes neither the reachable joint states, their discovery
    # order, nor any output; it only shrinks the per-state footprint.
    remap: list[int] = []
    reps: list[int] = []
    cons: dict[tuple, int] = {}
    for k in range(n_stages):
        key = (tuple(remap[r] for r in chain.reads[k]),
               tuple(len(names) for names in state_names[k]),
               tuple(state_index[k][i][stages[k].base.initial[i]]
                     for i in range(n_proc)),
               tuple(sorted((lab, tuple(nxt), tuple(out))
                            for lab, (nxt, out) in pre[k].items())))
        got = cons.get(key)
        if got is None:
            got = len(reps)
            cons[key] = got
            reps.append(k)
        remap.append(got)
    state_names_full = state_names
    n_orig = n_stages
    init_indices = [
        [state_index[k][i][stages[k].base.initial[i]] for i in range(n_proc)]
        for k in reps]
    pre = [pre[k] for k in reps]
    reads_by_stage = [tuple(remap[r] for r in chain.reads[k]) for k in reps]
    state_names = [state_names[k] for k in reps]
    keep_eff = tuple(remap[k] for k in keep)
    n_stages = len(reps)

    # A process's joint state across all stages (its "stack") is a compact
    # index array interned to a small integer, so a reachable global product
    # state is just an int tuple and each distinct stack is stored once.
    stack_ids: list[dict[bytes, int]] = [{} for _ in range(n_proc)]
    stack_list: list[list[bytes]] = [[] for _ in range(n_proc)]

    def intern(i: int, stack: bytes) -> int:
        got = stack_ids[i].get(stack)
        if got is None:
            got = len(stack_list[i])
            stack_ids[i][stack] = got
            stack_list[i].append(stack)
        return got

    def step_combo(letter: str, stacks: list[array]):
        # stacks: one per process of loc(letter), each of length n_stages
        loc = loc_cache[letter]
        width = len(loc)
        gammas: list[str] = []
        nxt = [array("H", bytes(2 * n_stages)) for _ in range(width)]
        for k in range(n_stages):
            row = pre[k][(letter,) + tuple(gammas[r] for r in reads_by_stage[k])]
            flat = 0
            for j in range(width):
                flat = flat * len(state_names[k][loc[j]]) + stacks[j][k]
            gammas.append(row[1][flat])
            moved = row[0][flat]
            for j in range(width - 1, -1, -1):
                size = len(state_names[k][loc[j]])
                nxt[j][k] = moved % size
                moved //= size
        out = "".join(gammas[k] for k in keep_eff)
        return [n.tobytes() for n in nxt], out

    init_ids = tuple(
        intern(i, array("H", (init_indices[k][i]
                              for k in range(n_stages))).tobytes())
        for i in range(n_proc))
    seen: set[tuple[int, ...]] = {init_ids}
    queue: deque[tuple[int, ...]] = deque([init_ids])
    step_memo: dict[tuple, tuple] = {}
    while queue:
        g = queue.popleft()
        for a in alphabet.letters:
            loc = loc_cache[a]
            combo = tuple(g[i] for i in loc)
            hit = step_memo.get((a, combo))
            if hit is None:
                nxt_stacks, out = step_combo(
                    a, [array("H", stack_list[i][s])
                        for i, s in zip(loc, combo)])
                hit = (tuple(intern(i, st) for i, st in zip(loc, nxt_stacks)),
                       out)
                step_memo[(a, combo)] = hit
            new = list(g)
            for i, sid in zip(loc, hit[0]):
                new[i] = sid
            new_t = tuple(new)
            if new_t not in seen:
                if len(seen) >= state_budget:
                    raise ResourceLimitError(
                        f"flattening exceeds {state_budget} reachable global states")
                seen.add(new_t)
                queue.append(new_t)
                if progress is not None and len(seen) % 8192 == 0:
                    progress(len(seen), tuple(len(s) for s in stack_list))

    n_reach = [len(stack_list[i]) for i in range(n_proc)]
    local_states = {
        p: tuple(str(k) for k in range(n_reach[i]))
        for i, p in enumerate(procs)
    }
    init_names = tuple(str(s) for s in init_ids)

    table_cells = sum(
        math.prod(n_reach[i] for i in loc_cache[a]) for a in alphabet.letters)
    if table_cells > state_budget:
        raise ResourceLimitError(
            f"flattening needs {table_cells} transition entries, over {state_budget}")

    transitions: dict[str, dict[StateTuple, StateTuple]] = {}
    outputs: dict[str, dict[StateTuple, str]] = {}
    for a in alphabet.letters:
        loc = loc_cache[a]
        table: dict[StateTuple, StateTuple] = {}
        out: dict[StateTuple, str] = {}
        for ids in itertools.product(*(range(n_reach[i]) for i in loc)):
            hit = step_memo.get((a, ids))
            if hit is None:
                nxt_stacks, gamma = step_combo(
                    a, [array("H", stack_list[i][s]) for i, s in zip(loc, ids)])
                # a never-jointly-reachable source may step to an unreachable
                # stack: redirect it to the initial local state
                names = tuple(
                    str(stack_ids[i].get(st, init_ids[i]))
                    for i, st in zip(loc, nxt_stacks))
            else:
                names = tuple(str(s) for s in hit[0])
                gamma = hit[1]
            combo = tuple(str(s) for s in ids)
            table[combo] = names
            out[combo] = gamma
        transitions[a] = table
        outputs[a] = out
    base = AsyncAutomaton(alphabet, local_states, transitions, init_names)
    flat = AsyncTransducer(base, outputs)
    if return_naming:
        naming: dict[str, dict[str, tuple[str, ...]]] = {}
        for i, p in enumerate(procs):
            decode: dict[str, tuple[str, ...]] = {}
            for x, blob in enumerate(stack_list[i]):
                dec = array("H", blob)
                decode[str(x)] = tuple(
                    state_names_full[k][i][dec[remap[k]]]
                    for k in range(n_orig))
            naming[p] = decode
        return flat, naming
    return flat


# ---------------------------------------------------------------------------
# structural forms
# ---------------------------------------------------------------------------


def _base_of(machine: AsyncAutomaton | AsyncTransducer) -> AsyncAutomaton:
    return machine.base if isinstance(machine, AsyncTransducer) else machine


def is_reset_form(machine: AsyncAutomaton | AsyncTransducer) -> bool:
    """Localized, at most two states at the active process, and every letter
    acts as the identity or as a constant map."""
    m = _base_of(machine)
    if not m.localized_at():
        return False
    if sum(len(v) > 1 for v in m.local_states.values()) > 1:
        return False
    if any(len(v) > 2 for v in m.local_states.values()):
        return False
    for table in m.transitions.values():
        if all(v == k for k, v in table.items()):
            continue
        if len(set(table.values())) == 1:
            continue
        return False
    return True


def is_permutation_form(machine: AsyncAutomaton | AsyncTransducer) -> bool:
    """Localized and every letter acts bijectively on its state tuples."""
    m = _base_of(machine)
    if not m.localized_at():
        return False
    return all(len(set(table.values())) == len(table)
               for table in m.transitions.values())


# ---------------------------------------------------------------------------
# formula-driven relabelling
# ---------------------------------------------------------------------------


def theta_labeling(trace: Trace, formulas: Sequence) -> Trace:
    """Tag every event with a bit per formula: label ``a|b1b2...bn``.

    Bit k of the suffix is 1 exactly when the k-th event formula holds at the
    event.  This is the reference labelling a compiled transducer must
    reproduce.
    """
    from .semantics import eval_event_all

    masks = [eval_event_all(trace, phi) for phi in formulas]
    labels = tuple(
        encode_pair(a, "".join("1" if m >> e & 1 else "0" for m in masks))
        for e, a in enumerate(trace.word))
    out_alpha = DistributedAlphabet({
        p: tuple(dict.fromkeys(labels[e] for e in trace.chain(p)))
        for p in trace.alphabet.processes
    })
    return Trace(out_alpha, labels, labels, trace.clocks, trace.chains)
