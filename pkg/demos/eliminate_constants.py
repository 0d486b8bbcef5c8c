"""Rewriting built-in comparison constants into plain local formulas.

The yesterday/final-event comparisons (Yleq, Yleq2, Lleq, Lleq2) are handy
but not part of the local past fragment.  This demo eliminates them: first
the single-process case, where they collapse to one-liners, then a
2-process alphabet, where the rewriting goes through jump paths, separating
formulas, and guard enumeration — and is checked exhaustively against the
constants' direct semantics on all small traces.
"""

from tracepdl import formulas as F
from tracepdl.elimination import eliminate
from tracepdl.parsing import node_to_text, parse_event_formula
from tracepdl.semantics import equivalent_on
from tracepdl.traces import DistributedAlphabet

SOLO = DistributedAlphabet({"s": ("a", "b")})
PAIR = DistributedAlphabet({"p": ("a", "c"), "q": ("b", "c")})


def show(alphabet, text, bound):
    phi = parse_event_formula(alphabet, text)
    out, report = eliminate(alphabet, phi)
    print(f"input      : {text}")
    print(f"constants  : {', '.join(report.constants) or 'none'}")
    print(f"tree size  : {report.size_before} -> {report.size_after}")
    if report.size_after <= 60:
        print(f"result     : {node_to_text(out)}")
    else:
        print(f"result     : ({report.size_after}-node tree, not shown)")
    counter = equivalent_on(alphabet, bound, phi, out)
    print(f"semantics  : equal on all traces up to {bound} events"
          if counter is None else f"MISMATCH: {counter}")
    print()


def main():
    print("== single process: constants collapse ==")
    show(SOLO, "Yleq s s", 5)
    show(SOLO, "Yleq2 s s s", 5)

    print("== two processes: the general construction ==")
    show(PAIR, "Yleq p q & c", 4)


if __name__ == "__main__":
    main()
