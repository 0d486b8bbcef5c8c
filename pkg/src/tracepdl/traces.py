"""Distributed alphabets and Mazurkiewicz traces.

A distributed alphabet assigns every letter to the non-empty set of processes
that must synchronise to execute it.  A trace is the labelled partial order
induced by a word over such an alphabet: occurrences of letters sharing a
process are ordered as in the word, independent occurrences commute.

Events are addressed by dense integer ids (construction order of the defining
word).  Causality is answered from vector clocks rather than an explicit
edge relation: ``e <= f`` iff the number of i-events below ``f`` reaches the
rank of ``e`` on some process ``i`` of ``e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import InputError


class DistributedAlphabet:
    """An ordered set of processes plus, for each, the letters it takes part in.

    ``processes`` keeps declaration order; every letter maps to the tuple of
    processes sharing it (its location), also in declaration order.
    """

    __slots__ = ("processes", "letters_of", "letters", "_loc", "_pidx", "_hash")

    def __init__(self, letters_of: dict[str, Sequence[str]]):
        if not letters_of:
            raise InputError("alphabet needs at least one process")
        self.processes: tuple[str, ...] = tuple(letters_of)
        self._pidx: dict[str, int] = {p: k for k, p in enumerate(self.processes)}
        if len(self._pidx) != len(self.processes):
            raise InputError("duplicate process name")
        self.letters_of: dict[str, tuple[str, ...]] = {}
        loc: dict[str, list[int]] = {}
        order: list[str] = []
        for p, letters in letters_of.items():
            seen = tuple(letters)
            if len(set(seen)) != len(seen):
                raise InputError(f"process {p!r} lists a letter twice")
            self.letters_of[p] = seen
            for a in seen:
                if a not in loc:
                    loc[a] = []
                    order.append(a)
                loc[a].append(self._pidx[p])
        self.letters: tuple[str, ...] = tuple(sorted(order))
        self._loc: dict[str, tuple[int, ...]] = {a: tuple(v) for a, v in loc.items()}
        self._hash = hash((self.processes, tuple(self.letters_of.items())))

    # -- basic queries ---------------------------------------------------

    def loc(self, letter: str) -> tuple[str, ...]:
        """Processes of ``letter``, in declaration order."""
        try:
            return tuple(self.processes[i] for i in self._loc[letter])
        except KeyError:
            raise InputError(f"unknown letter {letter!r}") from None

    def loc_idx(self, letter: str) -> tuple[int, ...]:
        try:
            return self._loc[letter]
        except KeyError:
            raise InputError(f"unknown letter {letter!r}") from None

    def on(self, process: str) -> frozenset[str]:
        """All letters involving ``process``."""
        if process not in self._pidx:
            raise InputError(f"unknown process {process!r}")
        return frozenset(self.letters_of[process])

    def process_index(self, process: str) -> int:
        try:
            return self._pidx[process]
        except KeyError:
            raise InputError(f"unknown process {process!r}") from None

    @property
    def n_processes(self) -> int:
        return len(self.processes)

    def __contains__(self, letter: str) -> bool:
        return letter in self._loc

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DistributedAlphabet)
            and self.processes == other.processes
            and self.letters_of == other.letters_of
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        parts = ", ".join(f"{p}:{'|'.join(v)}" for p, v in self.letters_of.items())
        return f"DistributedAlphabet({parts})"

    # -- text format -----------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "DistributedAlphabet":
        """Parse the one-process-per-line format ``name: letter letter ...``."""
        table: dict[str, list[str]] = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise InputError(f"line {ln}: expected 'process: letters'")
            name, _, rest = line.partition(":")
            name = name.strip()
            if not name:
                raise InputError(f"line {ln}: empty process name")
            if name in table:
                raise InputError(f"line {ln}: process {name!r} declared twice")
            table[name] = rest.split()
        return cls(table)

    def to_text(self) -> str:
        return "\n".join(f"{p}: {' '.join(v)}" for p, v in self.letters_of.items()) + "\n"


@dataclass(frozen=True)
class Event:
    """Read-only view of one event: its id, letter, and per-process rank.

    ``rank[i]`` is the 1-based position of the event on the chain of each of
    its own processes.
    """

    id: int
    label: str
    rank: dict[str, int] = field(compare=False)

    def __repr__(self) -> str:
        rk = ",".join(f"{p}:{r}" for p, r in self.rank.items())
        return f"Event({self.id}, {self.label}, {rk})"


class Trace:
    """A Mazurkiewicz trace, built from a word via :func:`trace_from_word`.

    Exposes the event poset through vector clocks: ``clocks[e][i]`` counts the
    i-events in the causal past of ``e`` inclusive.  ``chains[i]`` lists the
    event ids of process ``i`` in order, so ranks, predecessors-on-chain and
    yesterday maps are all O(1) lookups.
    """

    __slots__ = ("alphabet", "word", "labels", "clocks", "chains", "_canonical", "_caches")

    def __init__(self, alphabet: DistributedAlphabet, word: Sequence[str],
                 labels: tuple[str, ...], clocks: tuple[tuple[int, ...], ...],
                 chains: tuple[tuple[int, ...], ...]):
        self.alphabet = alphabet
        self.word = tuple(word)
        self.labels = labels
        self.clocks = clocks
        self.chains = chains
        self._canonical: tuple[str, ...] | None = None
        self._caches: dict = {}

    # -- shape -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_events(self) -> int:
        return len(self.labels)

    def event(self, eid: int) -> Event:
        label = self.labels[eid]
        rank = {self.alphabet.processes[i]: self.clocks[eid][i]
                for i in self.alphabet.loc_idx(label)}
        return Event(eid, label, rank)

    @property
    def events(self) -> list[Event]:
        return [self.event(e) for e in range(len(self.labels))]

    def chain(self, process: str) -> tuple[int, ...]:
        return self.chains[self.alphabet.process_index(process)]

    def loc_of(self, eid: int) -> tuple[int, ...]:
        return self.alphabet.loc_idx(self.labels[eid])

    # -- order -----------------------------------------------------------

    def leq(self, e: int, f: int) -> bool:
        """Causal order: does ``e`` lie in the past of ``f`` (inclusive)?"""
        ce, cf = self.clocks[e], self.clocks[f]
        return any(ce[i] <= cf[i] for i in self.alphabet.loc_idx(self.labels[e]))

    def concurrent(self, e: int, f: int) -> bool:
        return not self.leq(e, f) and not self.leq(f, e)

    def past(self, e: int) -> list[int]:
        """Events of the causal past of ``e``, inclusive, ascending by id."""
        return [f for f in range(len(self.labels)) if self.leq(f, e)]

    def strict_past(self, e: int) -> list[int]:
        return [f for f in self.past(e) if f != e]

    def maximal_events(self) -> list[int]:
        """Events with no causal successor: last on every one of their chains."""
        return [e for e in range(len(self.labels))
                if all(self.chains[i][-1] == e for i in self.loc_of(e))]

    # -- yesterday / last ------------------------------------------------

    def yesterday(self, process: str, e: int) -> int | None:
        """Latest event of ``process`` strictly below ``e``, or None."""
        i = self.alphabet.process_index(process)
        k = self.clocks[e][i]
        if i in self.loc_of(e):
            k -= 1
        return self.chains[i][k - 1] if k >= 1 else None

    def yesterday2(self, pi: str, pj: str, e: int) -> int | None:
        """Composition: yesterday of ``pj`` at the yesterday of ``pi``."""
        g = self.yesterday(pi, e)
        return None if g is None else self.yesterday(pj, g)

    def last(self, process: str) -> int | None:
        """Final event of ``process`` in the whole trace, or None."""
        c = self.chains[self.alphabet.process_index(process)]
        return c[-1] if c else None

    def last2(self, pi: str, pj: str) -> int | None:
        """Latest ``pj``-event lying below the final ``pi``-event (inclusive)."""
        e = self.last(pi)
        if e is None:
            return None
        j = self.alphabet.process_index(pj)
        k = self.clocks[e][j]
        return self.chains[j][k - 1] if k >= 1 else None

    # -- canonical form --------------------------------------------------

    def canonical_word(self) -> tuple[str, ...]:
        """The lexicographically least linearisation (letters compared as strings).

        Two traces over one alphabet are isomorphic iff their canonical words
        are equal.
        """
        if self._canonical is not None:
            return self._canonical
        n = len(self.labels)
        ptr = [0] * len(self.chains)
        out: list[str] = []
        for _ in range(n):
            best = None
            best_eid = -1
            for i, chain in enumerate(self.chains):
                if ptr[i] >= len(chain):
                    continue
                e = chain[ptr[i]]
                lab = self.labels[e]
                if all(self.chains[j][ptr[j]] == e for j in self.alphabet.loc_idx(lab)):
                    if best is None or lab < best:
                        best, best_eid = lab, e
            assert best is not None
            out.append(best)
            for j in self.alphabet.loc_idx(best):
                ptr[j] += 1
        self._canonical = tuple(out)
        return self._canonical

    def isomorphic(self, other: "Trace") -> bool:
        return (self.alphabet == other.alphabet
                and self.canonical_word() == other.canonical_word())

    def __repr__(self) -> str:
        return f"Trace({' '.join(self.word) or 'empty'})"


def trace_from_word(alphabet: DistributedAlphabet, word: Iterable[str]) -> Trace:
    """Build the trace of ``word``, computing clocks and chains in one pass."""
    word = tuple(word)
    n_proc = alphabet.n_processes
    zeros = (0,) * n_proc
    frontier: list[tuple[int, ...]] = [zeros] * n_proc
    labels: list[str] = []
    clocks: list[tuple[int, ...]] = []
    chains: list[list[int]] = [[] for _ in range(n_proc)]
    for pos, a in enumerate(word):
        if a not in alphabet:
            raise InputError(f"unknown letter {a!r} at position {pos}")
        loc = alphabet.loc_idx(a)
        merged = list(frontier[loc[0]])
        for i in loc[1:]:
            fi = frontier[i]
            for k in range(n_proc):
                if fi[k] > merged[k]:
                    merged[k] = fi[k]
        eid = len(labels)
        for i in loc:
            merged[i] = len(chains[i]) + 1
        vec = tuple(merged)
        labels.append(a)
        clocks.append(vec)
        for i in loc:
            chains[i].append(eid)
            frontier[i] = vec
    return Trace(alphabet, word, tuple(labels), tuple(clocks),
                 tuple(tuple(c) for c in chains))


def enumerate_traces(alphabet: DistributedAlphabet, max_events: int,
                     include_empty: bool = True) -> Iterator[Trace]:
    """Yield one representative per isomorphism class with at most ``max_events``
    events, deduplicated by canonical word.

    Deterministic order: ascending size, then lexicographic canonical word.
    """
    if include_empty:
        yield trace_from_word(alphabet, ())
    level: list[tuple[str, ...]] = [()]
    for _ in range(max_events):
        seen: set[tuple[str, ...]] = set()
        for w in level:
            for a in alphabet.letters:
                cand = trace_from_word(alphabet, w + (a,))
                seen.add(cand.canonical_word())
        level = sorted(seen)
        for w in level:
            yield trace_from_word(alphabet, w)


def count_traces(alphabet: DistributedAlphabet, max_events: int) -> int:
    """Number of isomorphism classes of traces with 1..max_events events."""
    return sum(1 for _ in enumerate_traces(alphabet, max_events, include_empty=False))
