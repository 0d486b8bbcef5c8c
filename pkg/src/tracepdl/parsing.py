"""Parsers for the plain-text formula and path syntax.

Event formulas:  ``a``  ``T``  ``F``  ``!x``  ``x & y``  ``x | y``
``< path > x``  (bare ``< path >`` when no formula follows)  ``Yleq i j``
``Yleq2 i j k``  ``on_i`` (expands to the letters of process ``i``).

Trace formulas add ``EM_i x``, ``EM x``, ``Lleq i j``, ``Lleq2 i j k``.

Paths:  ``<-_i``  ``?a``  ``?(formula)``  concatenation ``.``, choice ``|``,
iteration ``*`` (postfix); ``*`` binds tighter than ``.``, which binds tighter
than ``|``; tests bind tighter than concatenation.
"""

from __future__ import annotations

import re

from . import formulas as F
from .errors import FormulaParseError
from .traces import DistributedAlphabet

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<move><-_(?P<movepid>[A-Za-z0-9]+))
  | (?P<sdmove><=_(?P<sdpid>[A-Za-z0-9]+))
  | (?P<ident>[A-Za-z0-9_]+)
  | (?P<sym>[()<>{}.|*&!?])
""", re.VERBOSE)

_RESERVED = {"T", "F", "EM", "Yleq", "Yleq2", "Lleq", "Lleq2"}


class _Stream:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise FormulaParseError(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                kind = m.lastgroup
                val = m.group(kind)
                if kind == "move":
                    val = m.group("movepid")
                elif kind == "sdmove":
                    val = m.group("sdpid")
                self.toks.append((kind, val, pos))
            pos = m.end()
        self.k = 0

    def peek(self) -> tuple[str, str, int]:
        if self.k < len(self.toks):
            return self.toks[self.k]
        return ("eof", "", len(self.text))

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        self.k += 1
        return tok

    def expect(self, kind: str, val: str | None = None) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind or (val is not None and tok[1] != val):
            want = val or kind
            raise FormulaParseError(f"expected {want!r}, found {tok[1]!r}", tok[2])
        return tok

    def at_sym(self, val: str) -> bool:
        kind, v, _ = self.peek()
        return kind == "sym" and v == val


class _Parser:
    def __init__(self, alphabet: DistributedAlphabet, text: str):
        self.alphabet = alphabet
        self.s = _Stream(text)

    # -- helpers ---------------------------------------------------------

    def _pid(self) -> str:
        kind, val, pos = self.s.next()
        if kind != "ident":
            raise FormulaParseError("expected a process name", pos)
        if val not in self.alphabet.processes:
            raise FormulaParseError(f"unknown process {val!r}", pos)
        return val

    def _letter(self, name: str, pos: int) -> F.Node:
        if name not in self.alphabet:
            raise FormulaParseError(f"unknown letter {name!r}", pos)
        return F.letter(name)

    def _starts_event_formula(self) -> bool:
        kind, val, _ = self.s.peek()
        if kind == "ident":
            return val not in ("EM", "Lleq", "Lleq2") and not val.startswith("EM_")
        return (kind, val) in (("sym", "!"), ("sym", "<"), ("sym", "("))

    # -- event formulas --------------------------------------------------

    def event_formula(self) -> F.Node:
        out = self.event_and()
        while self.s.at_sym("|"):
            self.s.next()
            out = F.lor(out, self.event_and())
        return out

    def event_and(self) -> F.Node:
        out = self.event_unary()
        while self.s.at_sym("&"):
            self.s.next()
            out = F.land(out, self.event_unary())
        return out

    def event_unary(self) -> F.Node:
        kind, val, pos = self.s.peek()
        if kind == "sym" and val == "!":
            self.s.next()
            return F.lnot(self.event_unary())
        if kind == "sym" and val == "<":
            self.s.next()
            path = self.path()
            self.s.expect("sym", ">")
            if self._starts_event_formula():
                return F.diamond(path, self.event_unary())
            return F.diamond_exists(path)
        return self.event_atom()

    def event_atom(self) -> F.Node:
        kind, val, pos = self.s.next()
        if kind == "sym" and val == "(":
            out = self.event_formula()
            self.s.expect("sym", ")")
            return out
        if kind != "ident":
            raise FormulaParseError(f"unexpected token {val!r}", pos)
        if val == "T":
            return F.TOP
        if val == "F":
            return F.BOT
        if val == "Yleq":
            return F.yleq_const(self._pid(), self._pid())
        if val == "Yleq2":
            return F.yleq2_const(self._pid(), self._pid(), self._pid())
        if val.startswith("on_"):
            proc = val[3:]
            if proc in self.alphabet.processes:
                return F.letters_or(self.alphabet.on(proc))
        if val in _RESERVED or val.startswith("EM_"):
            raise FormulaParseError(f"{val!r} is not an event formula here", pos)
        return self._letter(val, pos)

    # -- trace formulas --------------------------------------------------

    def trace_formula(self) -> F.Node:
        out = self.trace_and()
        while self.s.at_sym("|"):
            self.s.next()
            out = F.t_or(out, self.trace_and())
        return out

    def trace_and(self) -> F.Node:
        out = self.trace_unary()
        while self.s.at_sym("&"):
            self.s.next()
            out = F.t_and(out, self.trace_unary())
        return out

    def trace_unary(self) -> F.Node:
        kind, val, pos = self.s.peek()
        if kind == "sym" and val == "!":
            self.s.next()
            return F.t_not(self.trace_unary())
        if kind == "ident" and val.startswith("EM_"):
            self.s.next()
            proc = val[3:]
            if proc not in self.alphabet.processes:
                raise FormulaParseError(f"unknown process {proc!r}", pos)
            return F.emi(proc, self.event_unary())
        if kind == "ident" and val == "EM":
            self.s.next()
            return F.em(self.event_unary())
        return self.trace_atom()

    def trace_atom(self) -> F.Node:
        kind, val, pos = self.s.next()
        if kind == "sym" and val == "(":
            out = self.trace_formula()
            self.s.expect("sym", ")")
            return out
        if kind != "ident":
            raise FormulaParseError(f"unexpected token {val!r}", pos)
        if val == "T":
            return F.T_TOP
        if val == "F":
            return F.T_BOT
        if val == "Lleq":
            return F.lleq_const(self._pid(), self._pid())
        if val == "Lleq2":
            return F.lleq2_const(self._pid(), self._pid(), self._pid())
        raise FormulaParseError(f"{val!r} is not a trace formula", pos)

    # -- paths -----------------------------------------------------------

    def path(self) -> F.Node:
        out = self.path_cat()
        while self.s.at_sym("|"):
            self.s.next()
            out = F.path_sum(out, self.path_cat())
        return out

    def path_cat(self) -> F.Node:
        out = self.path_star()
        while self.s.at_sym("."):
            self.s.next()
            out = F.path_cat(out, self.path_star())
        return out

    def path_star(self) -> F.Node:
        out = self.path_atom()
        while self.s.at_sym("*"):
            self.s.next()
            out = F.star(out)
        return out

    def path_atom(self) -> F.Node:
        kind, val, pos = self.s.next()
        if kind == "move":
            if val not in self.alphabet.processes:
                raise FormulaParseError(f"unknown process {val!r}", pos)
            return F.move(val)
        if kind == "sym" and val == "?":
            k2, v2, p2 = self.s.next()
            if k2 == "sym" and v2 == "(":
                sub = self.event_formula()
                self.s.expect("sym", ")")
                return F.test(sub)
            if k2 == "ident":
                if v2 == "T":
                    return F.test(F.TOP)
                if v2 == "F":
                    return F.test(F.BOT)
                if v2.startswith("on_") and v2[3:] in self.alphabet.processes:
                    return F.test(F.letters_or(self.alphabet.on(v2[3:])))
                return F.test(self._letter(v2, p2))
            raise FormulaParseError("expected a test body after '?'", p2)
        if kind == "sym" and val == "(":
            out = self.path()
            self.s.expect("sym", ")")
            return out
        raise FormulaParseError(f"unexpected token {val!r} in path", pos)

    def finish(self, node: F.Node) -> F.Node:
        kind, val, pos = self.s.peek()
        if kind != "eof":
            raise FormulaParseError(f"trailing input {val!r}", pos)
        return node


def parse_event_formula(alphabet: DistributedAlphabet, text: str) -> F.Node:
    p = _Parser(alphabet, text)
    return p.finish(p.event_formula())


def parse_trace_formula(alphabet: DistributedAlphabet, text: str) -> F.Node:
    p = _Parser(alphabet, text)
    return p.finish(p.trace_formula())


def parse_path(alphabet: DistributedAlphabet, text: str) -> F.Node:
    p = _Parser(alphabet, text)
    return p.finish(p.path())
