"""Batch command line for evaluating, rewriting, and compiling formulas.

Verbs:

- ``eval ALPHABET TRACE FORMULAS``: truth of each sentence on the trace;
  with ``--event N`` the file holds event formulas, evaluated at event N.
- ``translate ALPHABET FORMULAS``: rewrite ordering constants into their
  constant-free local form; prints a commented metadata header per formula.
- ``compile ALPHABET FORMULAS --out FILE``: compile one formula (event or
  sentence) to a cascade of localized transducers and store it.
- ``gossip ALPHABET --out FILE``: build the transducer labelling every event
  with all yesterday-comparison bits.
- ``check-equiv ALPHABET F1 F2``: compare two formulas over every trace up
  to ``--bound`` events.

File formats: an alphabet file has one ``process: letter letter ...`` line
per process; a trace is whitespace-separated letters (given inline or as a
file path); formula files hold one formula per line with ``#`` comments.
Machine files are the structured-text machine schema.

Exit codes: 0/1 report the verdict (truth, equivalence, check success) where
the verb has one, 2 means malformed input, 3 a resource limit.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import formulas as F
from .compiler import (compile_event, compile_sentence, eval_bit_labels,
                       gossip, gossip_pairs, size_report)
from .elimination import DEFAULT_LIMITS, Limits, eliminate
from .errors import FormulaParseError, InputError, ResourceLimitError
from .machines import machine_to_json
from .parsing import parse_event_formula, parse_trace_formula
from .printing import node_to_text
from .semantics import equivalent_on, eval_event, eval_event_all, eval_trace
from .traces import DistributedAlphabet, enumerate_traces, trace_from_word


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as ex:
        raise InputError(f"cannot read {path}: {ex}") from ex


def _load_alphabet(path: str) -> DistributedAlphabet:
    return DistributedAlphabet.from_text(_read_file(path))


def _load_trace(alphabet: DistributedAlphabet, arg: str):
    text = _read_file(arg) if os.path.exists(arg) else arg
    return trace_from_word(alphabet, tuple(text.split()))


def _formula_lines(path: str) -> list[tuple[int, str]]:
    out = []
    for ln, raw in enumerate(_read_file(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((ln, line))
    return out


def _parse_any(alphabet: DistributedAlphabet, text: str) -> F.Node:
    """A sentence if the text parses as one, else an event formula."""
    try:
        return parse_trace_formula(alphabet, text)
    except FormulaParseError:
        return parse_event_formula(alphabet, text)


def _parse_limits(spec: str | None) -> Limits:
    if not spec:
        return DEFAULT_LIMITS
    values = {}
    for part in spec.split(","):
        key, eq, val = part.partition("=")
        key = key.strip()
        if not eq or key not in ("max_processes", "node_budget", "sdpath_budget"):
            raise InputError(f"bad --limits entry {part!r}")
        try:
            values[key] = int(val)
        except ValueError as ex:
            raise InputError(f"bad --limits value {val!r}") from ex
    return Limits(**values)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def _cmd_eval(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    trace = _load_trace(alphabet, args.trace)
    lines = _formula_lines(args.formulas)
    verdicts = []
    for ln, text in lines:
        if args.event is not None:
            phi = parse_event_formula(alphabet, text)
            if not 0 <= args.event < trace.n_events:
                raise InputError(
                    f"event {args.event} out of range (trace has "
                    f"{trace.n_events} events)")
            value = eval_event(trace, args.event, phi)
        else:
            phi = parse_trace_formula(alphabet, text)
            value = eval_trace(trace, phi)
        verdicts.append(value)
        print(f"{text}: {'true' if value else 'false'}")
    if len(verdicts) == 1:
        return 0 if verdicts[0] else 1
    return 0


def _cmd_translate(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    limits = _parse_limits(args.limits)
    for ln, text in _formula_lines(args.formulas):
        node = _parse_any(alphabet, text)
        out, report = eliminate(alphabet, node,
                                sigma_range=args.sigma_range, limits=limits)
        print(f"# input: {text}")
        print(f"# constants: {', '.join(report.constants) or 'none'}")
        print(f"# size: {report.size_before} -> {report.size_after}")
        print(f"# sigma_range: {report.sigma_range}  basis: {report.basis}"
              f"  processes: {report.n_processes}")
        print(node_to_text(out))
    return 0


def _single_formula(alphabet: DistributedAlphabet, path: str) -> tuple[str, F.Node]:
    lines = _formula_lines(path)
    if len(lines) != 1:
        raise InputError(
            f"{path}: expected exactly one formula, found {len(lines)}")
    _, text = lines[0]
    return text, _parse_any(alphabet, text)


def _cmd_compile(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    text, node = _single_formula(alphabet, args.formulas)
    minimize = not args.no_minimize
    is_sentence = F.is_trace_formula(node)
    if is_sentence:
        from .compiler import _sentence_chain
        chain, _trackers, _emis = _sentence_chain(
            alphabet, node, minimize=minimize, state_budget=args.state_budget)
    else:
        chain = compile_event(alphabet, node, minimize=minimize,
                              state_budget=args.state_budget)
    blob = machine_to_json(chain)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(blob + "\n")
    print(f"sort {'sentence' if is_sentence else 'event'}")
    for key, value in size_report(alphabet, node, minimize=minimize,
                                  state_budget=args.state_budget).items():
        if isinstance(value, list):
            value = " ".join(str(v) for v in value)
        print(f"{key} {value}")
    print(f"machine {args.out}")

    if args.check_bound is not None:
        failures = 0
        n = 0
        if is_sentence:
            aut, accept = compile_sentence(
                alphabet, node, minimize=minimize,
                state_budget=args.state_budget)
            for t in enumerate_traces(alphabet, args.check_bound):
                n += 1
                if accept(aut.run(t)) != eval_trace(t, node):
                    failures += 1
                    print(f"check mismatch on: {' '.join(t.word) or '(empty)'}")
        else:
            for t in enumerate_traces(alphabet, args.check_bound):
                n += 1
                mask = eval_event_all(t, node)
                want = [(mask >> e) & 1 == 1 for e in range(t.n_events)]
                if eval_bit_labels(chain, t) != want:
                    failures += 1
                    print(f"check mismatch on: {' '.join(t.word) or '(empty)'}")
        print(f"check {'ok' if not failures else 'FAILED'} ({n} traces)")
        if failures:
            return 1
    return 0


def _cmd_gossip(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    machine = gossip(alphabet, minimize=not args.no_minimize,
                     state_budget=args.state_budget,
                     node_budget=args.node_budget)
    blob = machine_to_json(machine)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(blob + "\n")
    pairs = gossip_pairs(alphabet)
    print("pairs " + " ".join(f"{i},{j}" for i, j in pairs))
    print(f"global_state_count {machine.base.n_global}")
    for p in alphabet.processes:
        print(f"states_{p} {len(machine.base.local_states[p])}")
    print(f"machine {args.out}")
    return 0


def _equiv_worker(payload: tuple) -> tuple | None:
    (alphabet_text, lhs_text, rhs_text, bound, index, jobs) = payload
    alphabet = DistributedAlphabet.from_text(alphabet_text)
    lhs = _parse_any(alphabet, lhs_text)
    rhs = _parse_any(alphabet, rhs_text)
    event_side = F.is_event_formula(lhs)
    for k, t in enumerate(enumerate_traces(alphabet, bound)):
        if k % jobs != index:
            continue
        if event_side:
            a, b = eval_event_all(t, lhs), eval_event_all(t, rhs)
            if a != b:
                diff = a ^ b
                e = (diff & -diff).bit_length() - 1
                return (k, t.word, e, bool(a >> e & 1), bool(b >> e & 1))
        else:
            a, b = eval_trace(t, lhs), eval_trace(t, rhs)
            if a != b:
                return (k, t.word, None, a, b)
    return None


def _cmd_check_equiv(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    lhs_text, lhs = _single_formula(alphabet, args.first)
    rhs_text, rhs = _single_formula(alphabet, args.second)
    if F.is_event_formula(lhs) != F.is_event_formula(rhs):
        raise InputError("formulas are of different sorts")
    n_traces = sum(1 for _ in enumerate_traces(alphabet, args.bound))
    if args.jobs > 1:
        payloads = [(alphabet.to_text(), lhs_text,
                     rhs_text, args.bound, k, args.jobs)
                    for k in range(args.jobs)]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            hits = [h for h in pool.map(_equiv_worker, payloads)
                    if h is not None]
        witness = min(hits) if hits else None
        if witness is not None:
            _k, word, event, a, b = witness
            where = f" at event {event}" if event is not None else ""
            print(f"counterexample: {' '.join(word) or '(empty)'}{where}: "
                  f"{a} vs {b}")
            return 1
    else:
        cex = equivalent_on(alphabet, args.bound, lhs, rhs)
        if cex is not None:
            where = f" at event {cex.event}" if cex.event is not None else ""
            print(f"counterexample: {' '.join(cex.trace.word) or '(empty)'}"
                  f"{where}: {cex.lhs} vs {cex.rhs}")
            return 1
    print(f"ok ({n_traces} traces up to {args.bound} events)")
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="tracepdl",
        description="evaluate, rewrite, and compile past formulas on traces")
    top.add_argument("--seed", type=int, default=None,
                     help="echoed into the output so runs are reproducible")
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("eval", help="truth of formulas on one trace")
    p.add_argument("alphabet")
    p.add_argument("trace", help="trace word: inline letters or a file path")
    p.add_argument("formulas")
    p.add_argument("--event", type=int, default=None,
                   help="treat the file as event formulas, evaluate at this event")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("translate", help="rewrite ordering constants away")
    p.add_argument("alphabet")
    p.add_argument("formulas")
    p.add_argument("--sigma-range", choices=("witness", "all"),
                   default="witness")
    p.add_argument("--limits", default=None,
                   help="comma list: max_processes=,node_budget=,sdpath_budget=")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("compile", help="compile one formula to a machine file")
    p.add_argument("alphabet")
    p.add_argument("formulas")
    p.add_argument("--out", required=True)
    p.add_argument("--check-bound", type=int, default=None,
                   help="verify against the evaluator over traces this size")
    p.add_argument("--no-minimize", action="store_true")
    p.add_argument("--state-budget", type=int, default=1_000_000)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("gossip", help="build the yesterday-comparison machine")
    p.add_argument("alphabet")
    p.add_argument("--out", required=True)
    p.add_argument("--no-minimize", action="store_true")
    p.add_argument("--state-budget", type=int, default=1_000_000)
    p.add_argument("--node-budget", type=int, default=500_000)
    p.set_defaults(func=_cmd_gossip)

    p = sub.add_parser("check-equiv", help="compare two formulas up to a bound")
    p.add_argument("alphabet")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--bound", type=int, default=4)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_check_equiv)
    return top


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        print(f"seed {args.seed}")
    try:
        return args.func(args)
    except FormulaParseError as ex:
        print(f"parse error: {ex}", file=sys.stderr)
        return 2
    except InputError as ex:
        print(f"input error: {ex}", file=sys.stderr)
        return 2
    except ResourceLimitError as ex:
        print(f"resource limit: {ex}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
