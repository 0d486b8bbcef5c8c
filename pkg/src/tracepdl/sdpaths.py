"""Simple deterministic paths: tests on letter sets and guarded backward jumps.

A simple path is a word over two kinds of letters: ``?{A}`` (stay put, demand
the current label lies in the letter set ``A``) and ``<=_i{A}`` (from an
i-event, jump to the latest strictly-earlier i-event whose label lies in
``A``).  Such paths are partial functions on events — deterministic, and
monotone where defined — and every jump expands into the local regular path
``<-_i . (?!A . <-_i)* . ?A``, which is how they embed into the formula
language (:func:`diamond_local`).

``y_path`` realises per-process yesterday maps: for any event ``e`` with a
``i``-yesterday, it produces a chain of at most ``n_processes - 1`` guarded
jumps landing exactly there.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import formulas as F
from .errors import FormulaParseError, InputError, ResourceLimitError
from .semantics import get_ctx
from .traces import DistributedAlphabet, Trace


# ---------------------------------------------------------------------------
# letter-set atoms
# ---------------------------------------------------------------------------

_ATOM_FORMULA: dict = {}


@dataclass(frozen=True)
class Atomic:
    """A set of letters over a fixed alphabet, closed under union and
    complement."""

    alphabet: DistributedAlphabet
    letters: frozenset[str]

    def __post_init__(self):
        for a in self.letters:
            if a not in self.alphabet:
                raise InputError(f"unknown letter {a!r}")

    @staticmethod
    def top(alphabet: DistributedAlphabet) -> "Atomic":
        return Atomic(alphabet, frozenset(alphabet.letters))

    @staticmethod
    def bot(alphabet: DistributedAlphabet) -> "Atomic":
        return Atomic(alphabet, frozenset())

    @staticmethod
    def on(alphabet: DistributedAlphabet, process: str) -> "Atomic":
        return Atomic(alphabet, alphabet.on(process))

    @staticmethod
    def of(alphabet: DistributedAlphabet, letters: Iterable[str]) -> "Atomic":
        return Atomic(alphabet, frozenset(letters))

    def union(self, other: "Atomic") -> "Atomic":
        return Atomic(self.alphabet, self.letters | other.letters)

    def intersect(self, other: "Atomic") -> "Atomic":
        return Atomic(self.alphabet, self.letters & other.letters)

    def complement(self) -> "Atomic":
        return Atomic(self.alphabet, frozenset(self.alphabet.letters) - self.letters)

    @property
    def is_top(self) -> bool:
        return len(self.letters) == len(self.alphabet.letters)

    @property
    def is_bot(self) -> bool:
        return not self.letters

    def __contains__(self, label: str) -> bool:
        return label in self.letters

    def formula(self) -> F.Node:
        cached = _ATOM_FORMULA.get(self)
        if cached is None:
            cached = F.TOP if self.is_top else F.letters_or(self.letters)
            _ATOM_FORMULA[self] = cached
        return cached

    def display(self) -> str:
        if self.is_top:
            return "T"
        if self.is_bot:
            return "F"
        for p in self.alphabet.processes:
            if self.letters == self.alphabet.on(p):
                return f"on_{p}"
        return "|".join(sorted(self.letters))

    def __repr__(self) -> str:
        return f"Atomic({self.display()})"


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class STest:
    atom: Atomic

    def display(self) -> str:
        return "?{%s}" % self.atom.display()


@dataclass(frozen=True)
class SPrev:
    process: str
    atom: Atomic

    def display(self) -> str:
        return "<=_%s{%s}" % (self.process, self.atom.display())


SdLetter = STest | SPrev


def _cached_hash(make):
    # frozen dataclasses recompute field hashes on every call; these objects
    # key hot memo tables, so remember the hash on first use
    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = make(self)
            object.__setattr__(self, "_h", h)
        return h
    return __hash__


Atomic.__hash__ = _cached_hash(lambda s: hash((s.alphabet, s.letters)))


@dataclass(frozen=True)
class SdPath:
    letters: tuple[SdLetter, ...]

    # -- structure -------------------------------------------------------

    @property
    def norm(self) -> int:
        """Number of jump letters."""
        return sum(1 for x in self.letters if isinstance(x, SPrev))

    @property
    def alphabet(self) -> DistributedAlphabet | None:
        for x in self.letters:
            return x.atom.alphabet
        return None

    def concat(self, other: "SdPath") -> "SdPath":
        return SdPath(self.letters + other.letters)

    def standardize(self) -> "SdPath":
        """Alternating form ``?{A0} <={..} ?{A1} ... <={..} ?{Ak}``: adjacent
        tests merge by intersection and missing tests become ``?{T}``."""
        cached = self.__dict__.get("_std")
        if cached is not None:
            return cached
        alpha = self.alphabet
        if alpha is None:
            raise InputError("cannot standardize a path with no letters")
        top = Atomic.top(alpha)
        out: list[SdLetter] = []
        pending = top
        for x in self.letters:
            if isinstance(x, STest):
                pending = pending.intersect(x.atom)
            else:
                out.append(STest(pending))
                out.append(x)
                pending = top
        out.append(STest(pending))
        std = SdPath(tuple(out))
        object.__setattr__(std, "_std", std)
        object.__setattr__(self, "_std", std)
        return std

    @property
    def is_standard(self) -> bool:
        xs = self.letters
        if len(xs) % 2 == 0 or len(xs) != 2 * self.norm + 1:
            return False
        return all(isinstance(x, STest if k % 2 == 0 else SPrev)
                   for k, x in enumerate(xs))

    def prefixes(self) -> list["SdPath"]:
        """One standardized prefix per jump count 0..norm; the cut keeps the
        tests before each jump and pads the tail with ``?{T}``.  The last entry
        is the standardized path itself."""
        std = self.standardize()
        if std.norm == 0:
            return [std]
        alpha = std.alphabet
        top = STest(Atomic.top(alpha))
        out = [SdPath((top,))]
        for k in range(1, std.norm + 1):
            if k == std.norm:
                out.append(std)
            else:
                out.append(SdPath(std.letters[:2 * k] + (top,)))
        return out

    def suffixes(self) -> list["SdPath"]:
        """Standardized suffixes at every letter boundary of the standardized
        form (longest first, ending with ``?{T}``-padded tails)."""
        std = self.standardize()
        return [SdPath(std.letters[k:]).standardize()
                for k in range(0, len(std.letters))]

    # -- semantics -------------------------------------------------------

    def eval(self, t: Trace, e: int) -> int | None:
        """The unique target event of the path from ``e``, or None."""
        ctx = get_ctx(t)
        cur = e
        for x in self.letters:
            if isinstance(x, STest):
                if t.labels[cur] not in x.atom:
                    return None
            else:
                if x.process not in t.alphabet.loc(t.labels[cur]):
                    return None
                key = (x.process, x.atom.letters)
                tab = ctx.step_tables.get(key)
                if tab is None:
                    tab = _step_table(t, x.process, x.atom)
                    ctx.step_tables[key] = tab
                cur = tab[cur]
                if cur < 0:
                    return None
        return cur

    def to_path_formula(self) -> F.Node:
        """The regular path: tests stay tests, each jump becomes
        ``<-_i . (?!A . <-_i)* . ?A``."""
        parts = []
        for x in self.letters:
            if isinstance(x, STest):
                parts.append(F.test(x.atom.formula()))
            else:
                parts.append(_prevon_path(x.process, x.atom))
        return F.big_cat(parts) if parts else F.TEST_TOP

    def display(self) -> str:
        return " . ".join(x.display() for x in self.letters) if self.letters else "?{T}"

    def __repr__(self) -> str:
        return f"SdPath({self.display()})"


SdPath.__hash__ = _cached_hash(lambda s: hash(s.letters))


def _step_table(t: Trace, process: str, atom: Atomic) -> list[int]:
    tab = [-1] * len(t)
    last = -1
    for e in t.chain(process):
        tab[e] = last
        if t.labels[e] in atom:
            last = e
    return tab


_PREVON_MEMO: dict = {}
_DIA_MEMO: dict = {}


def _prevon_path(process: str, atom: Atomic) -> F.Node:
    key = (process, atom)
    cached = _PREVON_MEMO.get(key)
    if cached is None:
        guard = atom.formula()
        mv = F.move(process)
        loop = F.star(F.path_cat(F.test(F.lnot(guard)), mv))
        cached = F.big_cat([mv, loop, F.test(guard)])
        _PREVON_MEMO[key] = cached
    return cached


def sd_eval(path: SdPath, t: Trace, e: int) -> int | None:
    return path.eval(t, e)


def diamond_local(path: SdPath, sub: F.Node = F.TOP) -> F.Node:
    """``<path> sub`` as a formula all of whose paths are single-process:
    peel letters left to right, nesting one local diamond per jump."""
    key = (path, sub)
    cached = _DIA_MEMO.get(key)
    if cached is not None:
        return cached
    out = sub
    for x in reversed(path.letters):
        if isinstance(x, STest):
            out = F.land(x.atom.formula(), out)
        else:
            out = F.diamond(_prevon_path(x.process, x.atom), out)
    _DIA_MEMO[key] = out
    return out


# ---------------------------------------------------------------------------
# yesterday paths
# ---------------------------------------------------------------------------

def y_path(t: Trace, e: int, process: str) -> SdPath | None:
    """A jump path landing on the ``process``-yesterday of ``e``.

    Returns a standardized path ``pi`` of at most ``n_processes - 1`` jumps,
    all guards of the form ``on_j``, such that ``pi . ?{on_process}`` maps
    ``e`` exactly to ``yesterday(process, e)``; None when there is no
    yesterday event.  Choices (which successor chain to follow) are resolved
    by process declaration order, so the output is deterministic.
    """
    alpha = t.alphabet
    f = t.yesterday(process, e)
    if f is None:
        return None
    hops = [process]          # i_1, i_2, ... : the processes whose yesterday
    cur = f                   # events e_1 < e_2 < ... climb toward e
    e_loc = set(alpha.loc(t.labels[e]))
    while not e_loc & set(alpha.loc(t.labels[cur])):
        step = None
        for j in alpha.loc(t.labels[cur]):
            nxt = _next_on_chain(t, j, cur)
            if nxt is not None and t.leq(nxt, e):
                step = j
                break
        assert step is not None, "an event below e must have a successor below e"
        hops.append(step)
        cur = t.yesterday(step, e)
        assert cur is not None
    ell = next(p for p in alpha.processes
               if p in e_loc and p in alpha.loc(t.labels[cur]))
    jumps = [SPrev(ell, Atomic.on(alpha, hops[-1]))]
    for k in range(len(hops) - 1, 0, -1):
        jumps.append(SPrev(hops[k], Atomic.on(alpha, hops[k - 1])))
    return SdPath(tuple(jumps)).standardize()


def _next_on_chain(t: Trace, process: str, e: int) -> int | None:
    chain = t.chain(process)
    pos = t.clocks[e][t.alphabet.process_index(process)]  # rank of e on chain
    return chain[pos] if pos < len(chain) else None


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def default_basis(alphabet: DistributedAlphabet) -> list[Atomic]:
    return [Atomic.top(alphabet)] + [Atomic.on(alphabet, p)
                                     for p in alphabet.processes]


def enumerate_sdpaths(alphabet: DistributedAlphabet,
                      basis: Sequence[Atomic] | None = None,
                      min_len: int = 0, max_len: int = 2,
                      budget: int = 10 ** 6) -> Iterator[SdPath]:
    """All standardized jump paths whose guards come from ``basis`` and whose
    tests are ``?{T}``, by ascending jump count then guard order.

    Fails fast with :class:`ResourceLimitError` when the worst-case count
    ``(len(basis) * n_processes) ** max_len`` exceeds ``budget``.
    """
    if basis is None:
        basis = default_basis(alphabet)
    basis = list(basis)
    fanout = len(basis) * alphabet.n_processes
    if max_len > 0 and fanout ** max_len > budget:
        raise ResourceLimitError(
            f"{fanout}^{max_len} jump paths exceed the budget of {budget}; "
            "restrict the basis or the length range")
    top = STest(Atomic.top(alphabet))
    for n in range(min_len, max_len + 1):
        if n == 0:
            yield SdPath((top,))
            continue
        for combo in itertools.product(
                [(p, a) for p in alphabet.processes for a in basis], repeat=n):
            letters: list[SdLetter] = [top]
            for p, a in combo:
                letters.append(SPrev(p, a))
                letters.append(top)
            yield SdPath(tuple(letters))


def chained_on_paths(alphabet: DistributedAlphabet, min_len: int, max_len: int,
                     end_process: str | None = None) -> list[SdPath]:
    """Jump paths ``<=_{p1}{on_q1} . <=_{q1}{on_q2} ... `` where consecutive
    jumps hand over via their guard process — the shape yesterday paths take.
    ``end_process`` pins the final guard."""
    out: list[SdPath] = []
    procs = alphabet.processes
    top = STest(Atomic.top(alphabet))
    for n in range(max(min_len, 1), max_len + 1):
        for first in procs:
            for guards in itertools.product(procs, repeat=n):
                if end_process is not None and guards[-1] != end_process:
                    continue
                letters: list[SdLetter] = [top]
                carrier = first
                for g in guards:
                    letters.append(SPrev(carrier, Atomic.on(alphabet, g)))
                    letters.append(top)
                    carrier = g
                out.append(SdPath(tuple(letters)))
    if min_len <= 0:
        out.insert(0, SdPath((top,)))
    return out


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def parse_sd_path(alphabet: DistributedAlphabet, text: str) -> SdPath:
    """Parse ``<=_i{A} . ?{A}`` notation; atoms are ``T``, ``F``, ``on_i``,
    or ``a|b|c`` letter lists."""
    import re

    def atom(body: str, pos: int) -> Atomic:
        body = body.strip()
        if body == "T":
            return Atomic.top(alphabet)
        if body == "F":
            return Atomic.bot(alphabet)
        if body.startswith("on_"):
            proc = body[3:]
            if proc not in alphabet.processes:
                raise FormulaParseError(f"unknown process {proc!r}", pos)
            return Atomic.on(alphabet, proc)
        names = [x.strip() for x in body.split("|")]
        for nm in names:
            if nm not in alphabet:
                raise FormulaParseError(f"unknown letter {nm!r}", pos)
        return Atomic.of(alphabet, names)

    letters: list[SdLetter] = []
    for part in text.split("."):
        part = part.strip()
        if not part:
            raise FormulaParseError("empty path letter", 0)
        m = re.fullmatch(r"\?\{(?P<body>[^{}]*)\}", part)
        if m:
            letters.append(STest(atom(m.group("body"), 0)))
            continue
        m = re.fullmatch(r"<=_(?P<pid>[A-Za-z0-9]+)\{(?P<body>[^{}]*)\}", part)
        if m:
            pid = m.group("pid")
            if pid not in alphabet.processes:
                raise FormulaParseError(f"unknown process {pid!r}", 0)
            letters.append(SPrev(pid, atom(m.group("body"), 0)))
            continue
        raise FormulaParseError(f"bad path letter {part!r}", 0)
    return SdPath(tuple(letters))
