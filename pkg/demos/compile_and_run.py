"""From formulas to distributed machines, end to end.

Compiles an event formula into a cascade of per-process stages, shows the
stage layout and the size report, runs the machine next to the evaluator on
every small trace, then turns a sentence into an accepting automaton and a
path into its forward-scanning automaton.
"""

from tracepdl.compiler import (compile_event, compile_sentence,
                               eval_bit_labels, path_to_dfa, size_report)
from tracepdl.parsing import (parse_event_formula, parse_path,
                              parse_trace_formula)
from tracepdl.semantics import eval_event, eval_trace
from tracepdl.traces import DistributedAlphabet, enumerate_traces

PAIR = DistributedAlphabet({"p": ("a", "c"), "q": ("b", "c")})


def main():
    text = "< <-_p . ?a . <-_p > T | < <-_q > c"
    phi = parse_event_formula(PAIR, text)
    chain = compile_event(PAIR, phi)
    print(f"event formula : {text}")
    print(f"stages        : {len(chain)}")
    for k, stage in enumerate(chain.stages):
        where = ",".join(sorted(stage.localized_at())) or "stateless"
        states = max(len(v) for v in stage.base.local_states.values())
        feeds = ",".join(str(r) for r in chain.reads[k]) or "-"
        print(f"  stage {k}: at {where:9}  {states} states  reads [{feeds}]")
    print("size report   :", size_report(PAIR, phi))
    print()

    mismatches = 0
    n = 0
    for t in enumerate_traces(PAIR, 5):
        bits = eval_bit_labels(chain, t)
        for e in range(t.n_events):
            if bits[e] != eval_event(t, e, phi):
                mismatches += 1
            n += 1
    print(f"machine vs evaluator: {n} events checked, {mismatches} mismatches")
    print()

    sentence = "EM_q (b & !< <-_q > T)"
    machine, accepting = compile_sentence(PAIR, parse_trace_formula(PAIR, sentence))
    print(f"sentence      : {sentence}")
    shown = 0
    for t in enumerate_traces(PAIR, 3):
        verdict = accepting(machine.run(t))
        assert verdict == eval_trace(t, parse_trace_formula(PAIR, sentence))
        if verdict and shown < 4:
            print(f"  accepted: {' '.join(t.word) or '(empty)'}")
            shown += 1
    print()

    path = parse_path(PAIR, "<-_p . ?a . <-_p")
    dfa = path_to_dfa(path)
    print(f"path          : <-_p . ?a . <-_p")
    print(f"forward scanner: {len(dfa.states)} states over "
          f"{len(dfa.symbols)} scan symbols")


if __name__ == "__main__":
    main()
