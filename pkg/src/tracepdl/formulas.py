"""Formula and path ASTs.

Three sorts share one interned node representation:

- event formulas: ``letter  top  bot  or  and  not  dia  diaex  yleq  yleq2``
- trace formulas: ``emi  em  tor  tand  tnot  ttop  tbot  lleq  lleq2``
- path expressions: ``move  test  sum  cat  star``

``dia`` is the relativised modality "some path match ends in a state where the
sub-formula holds"; ``diaex`` is the bare existence modality, kept separate
because only the extended dialect admits it.  ``yleq``/``yleq2`` and
``lleq``/``lleq2`` are the event- and trace-level ordering constants on
per-process yesterday and last events.

Nodes are hash-consed: structurally equal terms are the same object, so
equality is identity and evaluation caches can key on ``id``.  The factory
functions normalise as they build (unit and absorption laws, double negation,
dedup of identical operands); ``simplify`` re-runs the same normalisation over
terms that were built elsewhere, e.g. by the parser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

EVENT_TAGS = frozenset(
    ["letter", "top", "bot", "or", "and", "not", "dia", "diaex", "yleq", "yleq2"])
TRACE_TAGS = frozenset(
    ["emi", "em", "tor", "tand", "tnot", "ttop", "tbot", "lleq", "lleq2"])
PATH_TAGS = frozenset(["move", "test", "sum", "cat", "star"])


class Node:
    """One interned AST node; ``args`` holds child nodes and atom data (letter
    names, process names) depending on ``tag``."""

    __slots__ = ("tag", "args", "_size", "_tsize")

    def __init__(self, tag: str, args: tuple):
        self.tag = tag
        self.args = args
        self._size = -1
        self._tsize = -1

    def __repr__(self) -> str:
        from .printing import node_to_text
        try:
            return f"<{self.tag}: {node_to_text(self)}>"
        except Exception:
            return f"<{self.tag} node>"


_INTERN: dict[tuple, Node] = {}


def _mk(tag: str, *args) -> Node:
    key = (tag, *(id(a) if isinstance(a, Node) else a for a in args))
    node = _INTERN.get(key)
    if node is None:
        node = Node(tag, args)
        _INTERN[key] = node
    return node


def children(node: Node) -> tuple[Node, ...]:
    return tuple(a for a in node.args if isinstance(a, Node))


# ---------------------------------------------------------------------------
# event formulas
# ---------------------------------------------------------------------------

TOP = _mk("top")
BOT = _mk("bot")


def letter(a: str) -> Node:
    return _mk("letter", a)


def letters_or(names: Iterable[str]) -> Node:
    return big_or([letter(a) for a in sorted(set(names))])


def lnot(x: Node) -> Node:
    if x is TOP:
        return BOT
    if x is BOT:
        return TOP
    if x.tag == "not":
        return x.args[0]
    return _mk("not", x)


def _flat(tag: str, x: Node) -> Iterator[Node]:
    if x.tag == tag:
        for a in x.args:
            yield from _flat(tag, a)
    else:
        yield x


def _assoc(tag: str, items: list[Node]) -> Node:
    # balanced reduction keeps tree depth logarithmic
    while len(items) > 1:
        items = [_mk(tag, items[k], items[k + 1]) if k + 1 < len(items) else items[k]
                 for k in range(0, len(items), 2)]
    return items[0]


def _bool_join(tag: str, unit: Node, zero: Node, items: Iterable[Node]) -> Node:
    seen: list[Node] = []
    ids = set()
    for x in items:
        for part in _flat(tag, x):
            if part is zero:
                return zero
            if part is unit or id(part) in ids:
                continue
            ids.add(id(part))
            seen.append(part)
    if not seen:
        return unit
    return _assoc(tag, seen)


def lor(a: Node, b: Node) -> Node:
    return _bool_join("or", BOT, TOP, (a, b))


def land(a: Node, b: Node) -> Node:
    return _bool_join("and", TOP, BOT, (a, b))


def big_or(items: Iterable[Node]) -> Node:
    return _bool_join("or", BOT, TOP, items)


def big_and(items: Iterable[Node]) -> Node:
    return _bool_join("and", TOP, BOT, items)


def implies(a: Node, b: Node) -> Node:
    return lor(lnot(a), b)


def diamond(path: Node, sub: Node) -> Node:
    if sub is BOT:
        return BOT
    return _mk("dia", path, sub)


def diamond_exists(path: Node) -> Node:
    return _mk("diaex", path)


def yleq_const(i: str, j: str) -> Node:
    return _mk("yleq", i, j)


def yleq2_const(i: str, j: str, k: str) -> Node:
    return _mk("yleq2", i, j, k)


# ---------------------------------------------------------------------------
# trace formulas
# ---------------------------------------------------------------------------

T_TOP = _mk("ttop")
T_BOT = _mk("tbot")


def emi(process: str, sub: Node) -> Node:
    return _mk("emi", process, sub)


def em(sub: Node) -> Node:
    return _mk("em", sub)


def t_not(x: Node) -> Node:
    if x is T_TOP:
        return T_BOT
    if x is T_BOT:
        return T_TOP
    if x.tag == "tnot":
        return x.args[0]
    return _mk("tnot", x)


def t_or(a: Node, b: Node) -> Node:
    return _bool_join("tor", T_BOT, T_TOP, (a, b))


def t_and(a: Node, b: Node) -> Node:
    return _bool_join("tand", T_TOP, T_BOT, (a, b))


def t_big_or(items: Iterable[Node]) -> Node:
    return _bool_join("tor", T_BOT, T_TOP, items)


def t_big_and(items: Iterable[Node]) -> Node:
    return _bool_join("tand", T_TOP, T_BOT, items)


def t_implies(a: Node, b: Node) -> Node:
    return t_or(t_not(a), b)


def lleq_const(i: str, j: str) -> Node:
    return _mk("lleq", i, j)


def lleq2_const(i: str, j: str, k: str) -> Node:
    return _mk("lleq2", i, j, k)


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

TEST_TOP = _mk("test", TOP)


def move(process: str) -> Node:
    return _mk("move", process)


def test(sub: Node) -> Node:
    return _mk("test", sub)


def path_sum(a: Node, b: Node) -> Node:
    if a is b:
        return a
    return _mk("sum", a, b)


def path_cat(a: Node, b: Node) -> Node:
    if a is TEST_TOP:
        return b
    if b is TEST_TOP:
        return a
    return _mk("cat", a, b)


def big_cat(items: Iterable[Node]) -> Node:
    out = TEST_TOP
    parts = [p for p in items if p is not TEST_TOP]
    if not parts:
        return out
    result = parts[0]
    for p in parts[1:]:
        result = _mk("cat", result, p)
    return result


def star(x: Node) -> Node:
    if x.tag == "star":
        return x
    return _mk("star", x)


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------

def size(node: Node) -> int:
    """Number of AST nodes, descending into test formulas."""
    if node._size < 0:
        node._size = 1 + sum(size(c) for c in children(node))
    return node._size


def toplevel_size(node: Node) -> int:
    """Like :func:`size` but a test counts as a single node regardless of the
    formula it carries."""
    if node._tsize < 0:
        if node.tag == "test":
            node._tsize = 1
        else:
            node._tsize = 1 + sum(toplevel_size(c) for c in children(node))
    return node._tsize


def subterms(node: Node) -> Iterator[Node]:
    """Every distinct subterm, post-order, each exactly once."""
    seen: set[int] = set()
    stack = [(node, False)]
    while stack:
        cur, done = stack.pop()
        if id(cur) in seen:
            continue
        if done:
            seen.add(id(cur))
            yield cur
        else:
            stack.append((cur, True))
            for c in children(cur):
                if id(c) not in seen:
                    stack.append((c, False))


# ---------------------------------------------------------------------------
# locality and dialect
# ---------------------------------------------------------------------------

def top_level_moves(path: Node) -> frozenset[str]:
    """Processes of moves occurring outside every test in ``path``."""
    if path.tag == "move":
        return frozenset((path.args[0],))
    if path.tag == "test":
        return frozenset()
    return frozenset().union(*(top_level_moves(c) for c in children(path))) \
        if children(path) else frozenset()


def local_processes(path: Node) -> frozenset[str] | None:
    """The processes ``i`` such that the path is i-local, or None meaning
    "every process" (a move-free path is local to all of them)."""
    moves = top_level_moves(path)
    if not moves:
        return None
    if len(moves) == 1:
        return moves
    return frozenset()


def is_local(path: Node) -> bool:
    return len(top_level_moves(path)) <= 1


@dataclass(frozen=True)
class DialectReport:
    """Which dialect a formula lives in.

    ``local`` is True when every path (including those buried in tests) has at
    most one top-level move process.  The constants lists name the occurrences
    that force the extended dialect.
    """

    local: bool
    event_constants: tuple[str, ...]
    trace_constants: tuple[str, ...]

    @property
    def extended(self) -> bool:
        return bool(self.event_constants or self.trace_constants)

    @property
    def dialect(self) -> str:
        if self.extended:
            return "extended"
        return "local-past" if self.local else "past"


def dialect_check(node: Node) -> DialectReport:
    event_consts: list[str] = []
    trace_consts: list[str] = []
    local = True
    for sub in subterms(node):
        if sub.tag in ("dia", "diaex"):
            if not is_local(sub.args[0]):
                local = False
        if sub.tag == "diaex":
            event_consts.append("<path>")
        elif sub.tag == "yleq":
            event_consts.append("Yleq %s %s" % sub.args)
        elif sub.tag == "yleq2":
            event_consts.append("Yleq2 %s %s %s" % sub.args)
        elif sub.tag == "em":
            trace_consts.append("EM")
        elif sub.tag == "lleq":
            trace_consts.append("Lleq %s %s" % sub.args)
        elif sub.tag == "lleq2":
            trace_consts.append("Lleq2 %s %s %s" % sub.args)
    return DialectReport(local, tuple(event_consts), tuple(trace_consts))


# ---------------------------------------------------------------------------
# rebuilding / simplification
# ---------------------------------------------------------------------------

_REBUILD: dict[str, Callable] = {
    "letter": lambda a: letter(a),
    "top": lambda: TOP,
    "bot": lambda: BOT,
    "or": lambda a, b: lor(a, b),
    "and": lambda a, b: land(a, b),
    "not": lambda x: lnot(x),
    "dia": lambda p, s: diamond(p, s),
    "diaex": lambda p: diamond_exists(p),
    "yleq": lambda i, j: yleq_const(i, j),
    "yleq2": lambda i, j, k: yleq2_const(i, j, k),
    "emi": lambda i, s: emi(i, s),
    "em": lambda s: em(s),
    "tor": lambda a, b: t_or(a, b),
    "tand": lambda a, b: t_and(a, b),
    "tnot": lambda x: t_not(x),
    "ttop": lambda: T_TOP,
    "tbot": lambda: T_BOT,
    "lleq": lambda i, j: lleq_const(i, j),
    "lleq2": lambda i, j, k: lleq2_const(i, j, k),
    "move": lambda i: move(i),
    "test": lambda s: test(s),
    "sum": lambda a, b: path_sum(a, b),
    "cat": lambda a, b: path_cat(a, b),
    "star": lambda x: star(x),
}


def simplify(node: Node) -> Node:
    """Re-run the smart-constructor normalisation bottom-up over a term."""
    memo: dict[int, Node] = {}

    def walk(n: Node) -> Node:
        got = memo.get(id(n))
        if got is not None:
            return got
        new_args = tuple(walk(a) if isinstance(a, Node) else a for a in n.args)
        out = _REBUILD[n.tag](*new_args)
        memo[id(n)] = out
        return out

    return walk(node)


def is_event_formula(node: Node) -> bool:
    return node.tag in EVENT_TAGS


def is_trace_formula(node: Node) -> bool:
    return node.tag in TRACE_TAGS


def is_path(node: Node) -> bool:
    return node.tag in PATH_TAGS
