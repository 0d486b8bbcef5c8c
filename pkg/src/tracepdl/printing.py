"""Text rendering of formulas and paths; inverse of :mod:`tracepdl.parsing`.

Precedence (loose to tight): ``|``, ``&``, prefix operators, atoms.  Paths:
``|``, ``.``, postfix ``*``.  A diamond prints as ``< path > sub`` and the
bare existence modality as ``< path >`` with no argument.
"""

from __future__ import annotations

from .formulas import Node

_OR, _AND, _UNARY, _ATOM = 0, 1, 2, 3


def _wrap(text: str, have: int, need: int) -> str:
    return f"({text})" if have < need else text


def _event(n: Node, need: int) -> str:
    tag = n.tag
    if tag == "letter":
        return n.args[0]
    if tag == "top":
        return "T"
    if tag == "bot":
        return "F"
    if tag == "yleq":
        return _wrap("Yleq %s %s" % n.args, _ATOM, need)
    if tag == "yleq2":
        return _wrap("Yleq2 %s %s %s" % n.args, _ATOM, need)
    if tag == "or":
        return _wrap(f"{_event(n.args[0], _OR)} | {_event(n.args[1], _AND)}", _OR, need)
    if tag == "and":
        return _wrap(f"{_event(n.args[0], _AND)} & {_event(n.args[1], _UNARY)}", _AND, need)
    if tag == "not":
        return _wrap(f"!{_event(n.args[0], _UNARY)}", _UNARY, need)
    if tag == "dia":
        return _wrap(f"< {path_to_text(n.args[0])} > {_event(n.args[1], _UNARY)}",
                     _UNARY, need)
    if tag == "diaex":
        return _wrap(f"< {path_to_text(n.args[0])} >", _UNARY, need)
    raise ValueError(f"not an event formula: {tag}")


def _trace(n: Node, need: int) -> str:
    tag = n.tag
    if tag == "ttop":
        return "T"
    if tag == "tbot":
        return "F"
    if tag == "lleq":
        return _wrap("Lleq %s %s" % n.args, _ATOM, need)
    if tag == "lleq2":
        return _wrap("Lleq2 %s %s %s" % n.args, _ATOM, need)
    if tag == "tor":
        return _wrap(f"{_trace(n.args[0], _OR)} | {_trace(n.args[1], _AND)}", _OR, need)
    if tag == "tand":
        return _wrap(f"{_trace(n.args[0], _AND)} & {_trace(n.args[1], _UNARY)}", _AND, need)
    if tag == "tnot":
        return _wrap(f"!{_trace(n.args[0], _UNARY)}", _UNARY, need)
    if tag == "emi":
        return _wrap(f"EM_{n.args[0]} {_event(n.args[1], _UNARY)}", _UNARY, need)
    if tag == "em":
        return _wrap(f"EM {_event(n.args[0], _UNARY)}", _UNARY, need)
    raise ValueError(f"not a trace formula: {tag}")


_PSUM, _PCAT, _PSTAR, _PATOM = 0, 1, 2, 3


def _path(n: Node, need: int) -> str:
    tag = n.tag
    if tag == "move":
        return f"<-_{n.args[0]}"
    if tag == "test":
        sub = n.args[0]
        if sub.tag in ("letter", "top", "bot"):
            return f"?{_event(sub, _ATOM)}"
        return f"?({_event(sub, _OR)})"
    if tag == "sum":
        return _wrap(f"{_path(n.args[0], _PSUM)} | {_path(n.args[1], _PCAT)}", _PSUM, need)
    if tag == "cat":
        return _wrap(f"{_path(n.args[0], _PCAT)} . {_path(n.args[1], _PSTAR)}", _PCAT, need)
    if tag == "star":
        return _wrap(f"{_path(n.args[0], _PATOM)}*", _PSTAR, need)
    raise ValueError(f"not a path: {tag}")


def event_to_text(n: Node) -> str:
    return _event(n, _OR)


def trace_to_text(n: Node) -> str:
    return _trace(n, _OR)


def path_to_text(n: Node) -> str:
    return _path(n, _PSUM)


def node_to_text(n: Node) -> str:
    from .formulas import EVENT_TAGS, PATH_TAGS
    if n.tag in EVENT_TAGS:
        return event_to_text(n)
    if n.tag in PATH_TAGS:
        return path_to_text(n)
    return trace_to_text(n)
