"""Rewriting ordering constants into constant-free local formulas.

The pipeline turns the extended dialect into the local past fragment:

- ``build_same`` / ``build_mod`` / ``separating_set``: for a jump path ``pi``,
  a finite formula family that tells any event apart from its ``pi``-target —
  membership, agreement with the previous carrier on the scan chain, and jump
  counts modulo ``norm + 1``.
- ``build_peq`` / ``build_pleq``: equality and ordering of the targets of two
  jump paths evaluated at the same event.
- ``build_eq_trace`` / ``build_leq_trace``: the same comparisons anchored at
  the final events of two processes (sentence level).
- ``build_yleq`` / ``build_yleq2`` / ``build_lleq`` / ``build_lleq2``:
  the ordering constants themselves.
- ``eliminate``: full traversal replacing every constant in a formula.

Quantifier ranges.  The disjunctions and conjunctions in these constructions
range over finite path families.  Blind enumeration over a guard basis
explodes far past any usable budget, so the default ranges are the witness
families the correctness arguments actually produce: chains of ``on``-guarded
jumps that hand over via their guard process (the shape every yesterday path
takes, at most one jump per process), composed with suffixes of the argument
paths cut at jump boundaries.  Every disjunct of these shapes is sound on its
own, so enlarging a range never breaks a construction, and the witness family
is what makes it complete; ``sigma_range="enumerated"`` switches the
separator ranges to basis enumeration for small alphabets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formulas as F
from .errors import InputError, ResourceLimitError
from .formulas import Node
from .sdpaths import (Atomic, SdPath, SPrev, STest, chained_on_paths,
                      default_basis, diamond_local, enumerate_sdpaths)
from .traces import DistributedAlphabet


@dataclass(frozen=True)
class Limits:
    """Resource guards for the builders."""

    max_processes: int = 4
    node_budget: int = 2_000_000       # new AST nodes per top-level build
    sdpath_budget: int = 10 ** 6       # enumeration fan-out bound


DEFAULT_LIMITS = Limits()


@dataclass
class EliminationReport:
    """What :func:`eliminate` did: which constants were rewritten, how the
    term grew, and which separator range the builders used."""

    constants: list[str] = field(default_factory=list)
    size_before: int = 0
    size_after: int = 0
    sigma_range: str = "witness"
    basis: str = "on-guard chains"
    n_processes: int = 0


class _Budget:
    """Tracks interned-node growth during one top-level build."""

    def __init__(self, limit: int):
        self.limit = limit
        self.start = len(F._INTERN)

    def check(self):
        if len(F._INTERN) - self.start > self.limit:
            raise ResourceLimitError(
                f"construction exceeded the node budget of {self.limit}; "
                "raise Limits.node_budget or shrink the arguments")


def _check_processes(alphabet: DistributedAlphabet, limits: Limits):
    if alphabet.n_processes > limits.max_processes:
        raise ResourceLimitError(
            f"{alphabet.n_processes} processes exceed the supported "
            f"maximum of {limits.max_processes}")


# ---------------------------------------------------------------------------
# path helpers
# ---------------------------------------------------------------------------

def _dia(path: SdPath, sub: Node = F.TOP) -> Node:
    return diamond_local(path, sub)


def _guarded_back(process: str, guard: Node) -> Node:
    """``<-_i . (?!g . <-_i)* . ?g`` — jump to the latest earlier event of the
    chain satisfying an arbitrary formula guard."""
    mv = F.move(process)
    return F.big_cat([mv, F.star(F.path_cat(F.test(F.lnot(guard)), mv)), F.test(guard)])


def _top_path(alphabet: DistributedAlphabet) -> SdPath:
    return SdPath((STest(Atomic.top(alphabet)),))


def _on_test_path(alphabet: DistributedAlphabet, process: str) -> SdPath:
    return SdPath((STest(Atomic.on(alphabet, process)),))


def _pins(alphabet: DistributedAlphabet, process: str) -> list[SdPath]:
    """Paths addressing the latest ``process``-event below (or at) an event:
    the bare ``?{on_p}`` test plus every on-guard chain ending in ``on_p``."""
    chains = chained_on_paths(alphabet, 1, alphabet.n_processes - 1,
                              end_process=process)
    return [_on_test_path(alphabet, process)] + \
        [p.concat(_on_test_path(alphabet, process)).standardize() for p in chains]


def _jump_letters(path: SdPath) -> list[SPrev]:
    return [x for x in path.standardize().letters if isinstance(x, SPrev)]


# ---------------------------------------------------------------------------
# same / mod / separating sets
# ---------------------------------------------------------------------------

_SAME_MEMO: dict[tuple[str, SdPath], Node] = {}


def build_same(scan: str, path: SdPath) -> Node:
    """True at ``e`` iff ``path`` is defined at ``e`` and at the previous
    ``scan``-chain event where it is defined, with the same target."""
    std = path.standardize()
    key = (scan, std)
    got = _SAME_MEMO.get(key)
    if got is not None:
        return got
    out = _build_same(scan, std)
    _SAME_MEMO[key] = out
    return out


def _build_same(scan: str, std: SdPath) -> Node:
    letters = std.letters
    if std.norm == 0:
        return F.BOT                                  # targets are the events themselves
    head = letters[0].atom
    first = letters[1]
    assert isinstance(first, SPrev)
    if scan == first.process and head.is_top:
        return _same_jump_led(first, SdPath(letters[2:]), std)
    if scan == first.process:
        return _same_test_led(scan, head, SdPath(letters[1:]), std)
    # scan off the jump chain: restrict to scan-events and hand over to the
    # jump process — targets of the path only sit at its first-jump events
    merged = Atomic.on(std.alphabet, scan).intersect(head)
    lifted = SdPath((STest(merged),) + letters[1:])
    return _same_test_led(first.process, merged, SdPath(letters[1:]), lifted)


def _same_test_led(scan: str, head: Atomic, tail: SdPath, full: SdPath) -> Node:
    """``?{head} . tail`` with ``tail`` jump-led: agreement carries over
    scan-chain events that miss the tail or fail the head but agree on it."""
    same_tail = build_same(scan, tail)
    skip = F.lor(F.lnot(_dia(tail)),
                 F.land(F.lnot(head.formula()), same_tail))
    mv = F.move(scan)
    walk = F.big_cat([mv, F.star(F.path_cat(F.test(skip), mv))])
    return F.big_and([head.formula(), same_tail, F.diamond(walk, _dia(full))])


def _same_jump_led(first: SPrev, tail: SdPath, full: SdPath) -> Node:
    """``<=_i{g} . tail``: either the previous i-event fails the guard (both
    jump over it to the same place), or it satisfies it and the carriers of
    ``tail`` agree down a guarded descent."""
    i, guard = first.process, first.atom.formula()
    same_tail = build_same(i, tail)
    mv = F.move(i)
    descent = F.big_cat([
        mv,
        F.test(F.land(guard, same_tail)),
        mv,
        F.star(F.path_cat(F.test(F.implies(_dia(tail),
                                           F.land(F.lnot(guard), same_tail))), mv)),
        F.test(F.land(_dia(tail), guard)),
    ])
    return F.land(_dia(full),
                  F.lor(F.diamond(mv, F.lnot(guard)), F.diamond(descent, F.TOP)))


_MOD_MEMO: dict[tuple[SdPath, int, int], Node] = {}


def build_mod(path: SdPath, k: int, n: int) -> Node:
    """True at ``e`` iff the path is defined there and the number of earlier
    first-chain events where it is defined but disagrees with its next
    occurrence is congruent to ``k`` mod ``n``."""
    if not 0 <= k < n:
        raise InputError(f"need 0 <= k < n, got {k}, {n}")
    std = path.standardize()
    if std.norm == 0:
        raise InputError("mod counting needs at least one jump")
    key = (std, k, n)
    got = _MOD_MEMO.get(key)
    if got is not None:
        return got
    i = _jump_letters(std)[0].process
    psi = F.land(_dia(std), F.lnot(build_same(i, std)))
    hop = _guarded_back(i, psi)
    if k == 0:
        block = F.big_cat([hop] * n)
        some_earlier = F.diamond(
            F.path_cat(F.move(i), F.star(F.move(i))), psi)
        out = F.land(_dia(std), F.diamond(F.star(block), F.lnot(some_earlier)))
    else:
        out = F.land(_dia(std), F.diamond(hop, build_mod(std, k - 1, n)))
    _MOD_MEMO[key] = out
    return out


_SEP_MEMO: dict = {}


def separating_set(path: SdPath) -> list[Node]:
    """Formulas telling any event apart from its ``path``-target, in both
    directions: membership, carrier agreement, and jump counts mod norm+1."""
    std = path.standardize()
    cached = _SEP_MEMO.get(std)
    if cached is not None:
        return list(cached)
    if std.norm == 0:
        raise InputError("separating sets need at least one jump")
    i = _jump_letters(std)[0].process
    there = _dia(std)
    same = build_same(i, std)
    n = std.norm + 1
    out = [there, F.lnot(there), same, F.lnot(same)] + \
        [build_mod(std, k, n) for k in range(n)]
    _SEP_MEMO[std] = tuple(out)
    return out


# ---------------------------------------------------------------------------
# separator path families
# ---------------------------------------------------------------------------

def _cut_suffixes(path: SdPath) -> list[tuple[str, SdPath]]:
    """For each jump position, the suffix starting at that jump and the one
    right after it, tagged with the jump's process; plus the full path tagged
    with None (rendered as ("", path))."""
    std = path.standardize()
    letters = std.letters
    out: list[tuple[str, SdPath]] = [("", std)]
    for idx, x in enumerate(letters):
        if isinstance(x, SPrev):
            out.append((x.process, SdPath(letters[idx:]).standardize()))
            out.append((x.process, SdPath(letters[idx + 1:]).standardize()))
    return out


def _witness_sigmas(alphabet: DistributedAlphabet, sources: list[SdPath],
                    anchors: list[str] | None = None) -> list[SdPath]:
    """Separator paths: argument suffixes reattached through latest-event
    pins.  ``anchors`` adds pinned full copies for sentence-level use."""
    seen: set[SdPath] = set()
    out: list[SdPath] = []

    def add(p: SdPath):
        std = p.standardize()
        if std.norm >= 1 and std not in seen:
            seen.add(std)
            out.append(std)

    pin_cache: dict[str, list[SdPath]] = {}

    def pins(proc: str) -> list[SdPath]:
        if proc not in pin_cache:
            pin_cache[proc] = _pins(alphabet, proc)
        return pin_cache[proc]

    for src in sources:
        for proc, suffix in _cut_suffixes(src):
            if not proc:
                add(suffix)
                continue
            for y in pins(proc):
                add(y.concat(suffix))
    if anchors:
        for src, anchor in zip(sources, anchors):
            if anchor:
                for y in pins(anchor):
                    add(y.concat(src.standardize()))
    return out


def _enumerated_sigmas(alphabet: DistributedAlphabet, sources: list[SdPath],
                       limits: Limits) -> list[SdPath]:
    bound = max((s.norm for s in sources), default=0) + alphabet.n_processes
    return list(enumerate_sdpaths(alphabet, default_basis(alphabet),
                                  1, bound, budget=limits.sdpath_budget))


def _sigma_family(alphabet, sources, sigma_range, limits, anchors=None):
    if sigma_range == "witness":
        return _witness_sigmas(alphabet, sources, anchors)
    if sigma_range == "enumerated":
        return _enumerated_sigmas(alphabet, sources, limits)
    raise InputError(f"unknown sigma_range {sigma_range!r}")


# ---------------------------------------------------------------------------
# target equality / ordering at one event
# ---------------------------------------------------------------------------

_PEQ_MEMO: dict[tuple, Node] = {}


def build_peq(pi1: SdPath, pi2: SdPath, *, sigma_range: str = "witness",
              limits: Limits = DEFAULT_LIMITS, _budget: _Budget | None = None) -> Node:
    """True at ``e`` iff both paths are defined at ``e`` with equal targets:
    no separator formula may hold at one target and fail at the other."""
    alphabet = pi1.alphabet or pi2.alphabet
    _check_processes(alphabet, limits)
    a, b = pi1.standardize(), pi2.standardize()
    key = (a, b, sigma_range)
    got = _PEQ_MEMO.get(key)
    if got is not None:
        return got
    budget = _budget or _Budget(limits.node_budget)
    xis: list[Node] = [Atomic.on(alphabet, p).formula() for p in alphabet.processes]
    for sigma in _sigma_family(alphabet, [a, b], sigma_range, limits):
        xis.extend(separating_set(sigma))
        budget.check()
    split = [F.land(_dia(a, xi), _dia(b, F.lnot(xi))) for xi in xis]
    budget.check()
    out = F.big_and([_dia(a), _dia(b), F.lnot(F.big_or(split))])
    _PEQ_MEMO[key] = out
    return out


def _cut_tails(alphabet: DistributedAlphabet, path: SdPath,
               anchor: str | None) -> list[tuple[int, list[SdPath]]]:
    """Per prefix cut of ``path``, the continuation paths that can re-address
    the cut value from a later event: pins of the cut jump's process, alone or
    followed by that jump.  Cut 0 re-addresses the start event itself: the
    trivial test, or pins of ``anchor`` at sentence level."""
    std = path.standardize()
    jumps = _jump_letters(std)
    tails0 = [_top_path(alphabet)]
    if anchor:
        tails0 = _pins(alphabet, anchor)
    out = [(0, tails0)]
    for ell, jump in enumerate(jumps, start=1):
        ys = _pins(alphabet, jump.process)
        with_jump = [y.concat(SdPath((jump,))).standardize() for y in ys]
        out.append((ell, ys + with_jump))
    return out


def build_pleq(pi1: SdPath, pi2: SdPath, *, sigma_range: str = "witness",
               limits: Limits = DEFAULT_LIMITS) -> Node:
    """True at ``e`` iff both paths are defined at ``e`` and the target of
    ``pi1`` lies below the target of ``pi2``: some prefix of ``pi1`` meets
    ``pi2`` extended by a short re-addressing tail."""
    alphabet = pi1.alphabet or pi2.alphabet
    _check_processes(alphabet, limits)
    a, b = pi1.standardize(), pi2.standardize()
    budget = _Budget(limits.node_budget)
    prefixes = a.prefixes()
    cases: list[Node] = []
    for ell, tails in _cut_tails(alphabet, a, None):
        pref = prefixes[ell] if ell < len(prefixes) else prefixes[-1]
        for tail in tails:
            cases.append(build_peq(pref, b.concat(tail),
                                   sigma_range=sigma_range, limits=limits,
                                   _budget=budget))
            budget.check()
    return F.big_and([_dia(a), _dia(b), F.big_or(cases)])


# ---------------------------------------------------------------------------
# the event constants
# ---------------------------------------------------------------------------

def build_yleq(alphabet: DistributedAlphabet, i: str, j: str, *,
               sigma_range: str = "witness",
               limits: Limits = DEFAULT_LIMITS) -> Node:
    """Constant-free local form of: both yesterday events exist and the
    ``i``-yesterday lies below the ``j``-yesterday."""
    _check_processes(alphabet, limits)
    if alphabet.n_processes == 1:
        return F.diamond(F.move(i), F.TOP)
    ci = [p.concat(_on_test_path(alphabet, i)).standardize()
          for p in chained_on_paths(alphabet, 1, alphabet.n_processes - 1,
                                    end_process=i)]
    cj = [p.concat(_on_test_path(alphabet, j)).standardize()
          for p in chained_on_paths(alphabet, 1, alphabet.n_processes - 1,
                                    end_process=j)]
    some_i = F.big_or([_dia(p) for p in ci])
    some_j = F.big_or([_dia(p) for p in cj])
    bound = F.big_or([
        F.big_and([F.implies(_dia(pp), build_pleq(pp, p, sigma_range=sigma_range,
                                                  limits=limits))
                   for pp in ci])
        for p in cj])
    return F.big_and([some_i, some_j, bound])


def build_yleq2(alphabet: DistributedAlphabet, i: str, j: str, k: str, *,
                sigma_range: str = "witness",
                limits: Limits = DEFAULT_LIMITS) -> Node:
    """Constant-free local form of: the ``j``-yesterday of the ``i``-yesterday
    exists and lies below the ``k``-yesterday."""
    _check_processes(alphabet, limits)
    if alphabet.n_processes == 1:
        return F.diamond(F.path_cat(F.move(i), F.move(i)), F.TOP)
    n1 = alphabet.n_processes - 1
    ci = [p.concat(_on_test_path(alphabet, i)).standardize()
          for p in chained_on_paths(alphabet, 1, n1, end_process=i)]
    cj = [p.concat(_on_test_path(alphabet, j)).standardize()
          for p in chained_on_paths(alphabet, 1, n1, end_process=j)]
    ck = [p.concat(_on_test_path(alphabet, k)).standardize()
          for p in chained_on_paths(alphabet, 1, n1, end_process=k)]
    nested = [a.concat(b).standardize() for a in ci for b in cj]
    some_ij = F.big_or([_dia(p) for p in nested])
    some_k = F.big_or([_dia(p) for p in ck])
    bound = F.big_or([
        F.big_and([F.implies(_dia(pp), build_pleq(pp, p, sigma_range=sigma_range,
                                                  limits=limits))
                   for pp in nested])
        for p in ck])
    return F.big_and([some_ij, some_k, bound])


# ---------------------------------------------------------------------------
# sentence-level comparisons
# ---------------------------------------------------------------------------

_EQT_MEMO: dict[tuple, Node] = {}


def build_eq_trace(alphabet: DistributedAlphabet, i: str, j: str,
                   pi1: SdPath, pi2: SdPath, *, sigma_range: str = "witness",
                   limits: Limits = DEFAULT_LIMITS,
                   _budget: _Budget | None = None) -> Node:
    """Sentence: both final events exist, both paths are defined there, and
    the target from the final ``i``-event equals the one from the final
    ``j``-event."""
    _check_processes(alphabet, limits)
    a, b = pi1.standardize(), pi2.standardize()
    key = (i, j, a, b, sigma_range)
    got = _EQT_MEMO.get(key)
    if got is not None:
        return got
    budget = _budget or _Budget(limits.node_budget)
    xis: list[Node] = [Atomic.on(alphabet, p).formula() for p in alphabet.processes]
    for sigma in _sigma_family(alphabet, [a, b], sigma_range, limits,
                               anchors=[i, j]):
        xis.extend(separating_set(sigma))
        budget.check()
    split = [F.t_and(F.emi(i, _dia(a, xi)), F.emi(j, _dia(b, F.lnot(xi))))
             for xi in xis]
    budget.check()
    out = F.t_big_and([F.emi(i, _dia(a)), F.emi(j, _dia(b)),
                       F.t_not(F.t_big_or(split))])
    _EQT_MEMO[key] = out
    return out


def build_leq_trace(alphabet: DistributedAlphabet, i: str, j: str,
                    pi1: SdPath, pi2: SdPath, *, sigma_range: str = "witness",
                    limits: Limits = DEFAULT_LIMITS) -> Node:
    """Sentence: the target of ``pi1`` from the final ``i``-event lies below
    the target of ``pi2`` from the final ``j``-event."""
    _check_processes(alphabet, limits)
    a, b = pi1.standardize(), pi2.standardize()
    budget = _Budget(limits.node_budget)
    prefixes = a.prefixes()
    cases: list[Node] = []
    for ell, tails in _cut_tails(alphabet, a, i):
        pref = prefixes[ell] if ell < len(prefixes) else prefixes[-1]
        for tail in tails:
            cases.append(build_eq_trace(alphabet, i, j, pref, b.concat(tail),
                                        sigma_range=sigma_range, limits=limits,
                                        _budget=budget))
            budget.check()
    return F.t_big_and([F.emi(i, _dia(a)), F.emi(j, _dia(b)), F.t_big_or(cases)])


# ---------------------------------------------------------------------------
# the trace constants
# ---------------------------------------------------------------------------

def build_lleq(alphabet: DistributedAlphabet, i: str, j: str, *,
               sigma_range: str = "witness",
               limits: Limits = DEFAULT_LIMITS) -> Node:
    """Constant-free form of: both final events exist and the final
    ``i``-event lies below the final ``j``-event."""
    _check_processes(alphabet, limits)
    if alphabet.n_processes == 1:
        return F.emi(i, F.TOP)
    top = _top_path(alphabet)
    return build_leq_trace(alphabet, i, j, top, top,
                           sigma_range=sigma_range, limits=limits)


def build_lleq2(alphabet: DistributedAlphabet, i: str, j: str, k: str, *,
                sigma_range: str = "witness",
                limits: Limits = DEFAULT_LIMITS) -> Node:
    """Constant-free form of: the latest ``j``-event below the final
    ``i``-event exists and lies below the final ``k``-event."""
    _check_processes(alphabet, limits)
    if alphabet.n_processes == 1:
        return F.emi(i, F.TOP)
    addressing = _pins(alphabet, j)          # ?{on_j} plus on-guard chains
    some = F.t_big_or([F.emi(i, _dia(p)) for p in addressing])
    top = _top_path(alphabet)
    bound = F.t_big_and([
        F.t_implies(F.emi(i, _dia(p)),
                    build_leq_trace(alphabet, i, k, p, top,
                                    sigma_range=sigma_range, limits=limits))
        for p in addressing])
    return F.t_big_and([F.emi(k, F.TOP), some, bound])


# ---------------------------------------------------------------------------
# full elimination
# ---------------------------------------------------------------------------

def expand_em(alphabet: DistributedAlphabet, phi: Node) -> Node:
    """Some maximal event satisfies ``phi``: a final event does and no other
    chain's final event lies strictly above it.  Uses ordering constants."""
    procs = alphabet.processes
    cases = []
    for i in procs:
        above = F.t_big_or([
            F.t_and(F.lleq_const(i, j), F.t_not(F.lleq_const(j, i)))
            for j in procs if j != i])
        cases.append(F.t_and(F.emi(i, phi), F.t_not(above)))
    return F.t_big_or(cases)


def eliminate(alphabet: DistributedAlphabet, node: Node, *,
              sigma_range: str = "witness",
              limits: Limits = DEFAULT_LIMITS) -> tuple[Node, EliminationReport]:
    """Replace every ordering constant, bare diamond, and maximal-event
    quantifier in ``node`` (an event or trace formula) by its constant-free
    local construction."""
    _check_processes(alphabet, limits)
    report = EliminationReport(sigma_range=sigma_range,
                               n_processes=alphabet.n_processes,
                               size_before=F.size(node))
    memo: dict[int, Node] = {}

    def walk(n: Node) -> Node:
        got = memo.get(id(n))
        if got is not None:
            return got
        tag = n.tag
        if tag == "yleq":
            report.constants.append("Yleq %s %s" % n.args)
            out = build_yleq(alphabet, *n.args, sigma_range=sigma_range,
                             limits=limits)
        elif tag == "yleq2":
            report.constants.append("Yleq2 %s %s %s" % n.args)
            out = build_yleq2(alphabet, *n.args, sigma_range=sigma_range,
                              limits=limits)
        elif tag == "lleq":
            report.constants.append("Lleq %s %s" % n.args)
            out = build_lleq(alphabet, *n.args, sigma_range=sigma_range,
                             limits=limits)
        elif tag == "lleq2":
            report.constants.append("Lleq2 %s %s %s" % n.args)
            out = build_lleq2(alphabet, *n.args, sigma_range=sigma_range,
                              limits=limits)
        elif tag == "em":
            report.constants.append("EM")
            out = walk(expand_em(alphabet, walk(n.args[0])))
        elif tag == "diaex":
            report.constants.append("<path>")
            out = F.diamond(walk(n.args[0]), F.TOP)
        else:
            new_args = tuple(walk(a) if isinstance(a, Node) else a
                             for a in n.args)
            out = F._REBUILD[tag](*new_args)
        memo[id(n)] = out
        return out

    out = walk(node)
    report.size_after = F.size(out)
    return out, report
