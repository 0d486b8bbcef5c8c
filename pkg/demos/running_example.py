"""Tour of the fixed 11-event trace: ordering, addressing, and the logics.

Builds the 4-process ring trace used throughout the test suite, prints how
its events relate, then evaluates the spotlight formulas — the two sentences
whose disjunction holds, the final-event comparisons, and the yesterday
comparisons at event 8 — and finally addresses past events with jump paths.
"""

from tracepdl.parsing import parse_event_formula, parse_trace_formula
from tracepdl.sdpaths import parse_sd_path, sd_eval, y_path
from tracepdl.semantics import eval_event, eval_trace
from tracepdl.traces import DistributedAlphabet, trace_from_word

ALPHABET = DistributedAlphabet({
    "1": ("a1", "c", "e"),
    "2": ("a2", "c", "d"),
    "3": ("a3", "b", "d"),
    "4": ("a4", "b", "e"),
})
WORD = ("a1", "a1", "b", "c", "d", "a3", "e", "a2", "b", "c", "a4")


def main():
    t = trace_from_word(ALPHABET, WORD)
    print("word:", " ".join(WORD))
    print("process chains (0-based event indices):")
    for p in ALPHABET.processes:
        print(f"  {p}: {t.chain(p)}")
    print("maximal events:", t.maximal_events())
    print()

    print("addressing past events:")
    print("  4-yesterday of event 5 :", t.yesterday("4", 5))
    print("  3-yesterday of event 7 :", t.yesterday("3", 7))
    print("  (3,4)-yesterday of e7  :", t.yesterday2("3", "4", 7))
    print("  4-yesterday of event 3 :", t.yesterday("4", 3), "(absent)")
    print("  final events:", {p: t.last(p) for p in ALPHABET.processes})
    print("  latest 3-event below the final 1-event:", t.last2("1", "3"))
    print()

    phi1 = "EM_1 < <-_1 . ?(d | < <-_4 > T) . <-_1 > c"
    phi2 = "EM_3 < <-_4 > b"
    print("sentences:")
    for text in (phi1, phi2, f"{phi1} | {phi2}", "EM < <-_4 >", "EM b",
                 "Lleq 3 4", "Lleq 2 3", "Lleq2 2 3 4"):
        value = eval_trace(t, parse_trace_formula(ALPHABET, text))
        print(f"  {str(value).lower():5}  {text}")
    print()

    print("event formulas at event 7:")
    for text in ("Yleq 4 3", "Yleq 3 4", "Yleq2 2 3 4"):
        value = eval_event(t, 7, parse_event_formula(ALPHABET, text))
        print(f"  {str(value).lower():5}  {text}")
    print()

    print("jump paths from event 7 (guarded backward moves):")
    for text in ("<=_2{T} . <=_2{T} . ?{on_1}", "<=_2{on_1}",
                 "<=_2{on_3} . <=_3{on_4}"):
        print(f"  {text}  ->  {sd_eval(parse_sd_path(ALPHABET, text), t, 7)}")
    path = y_path(t, 10, "2")
    print("auto-built route to the 2-yesterday of event 10:")
    print(f"  {path.display()}  ->  {sd_eval(path, t, 10)}")


if __name__ == "__main__":
    main()
