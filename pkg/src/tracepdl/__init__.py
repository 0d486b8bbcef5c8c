"""Past propositional dynamic logic over Mazurkiewicz traces.

The package covers the pipeline from traces and formulas through constant
elimination down to local cascade products of asynchronous automata:

- :mod:`tracepdl.traces` — distributed alphabets, traces, vector clocks
- :mod:`tracepdl.formulas` — formula and path ASTs, dialect checks, printing
- :mod:`tracepdl.parsing` — text syntax for formulas and paths
- :mod:`tracepdl.semantics` — reference evaluator and equivalence checking
- :mod:`tracepdl.sdpaths` — simple deterministic paths and yesterday paths
- :mod:`tracepdl.elimination` — rewriting event/trace constants into local form
- :mod:`tracepdl.machines` — asynchronous automata, transducers, cascades
- :mod:`tracepdl.compiler` — compiling local formulas to cascade products
"""

from .errors import FormulaParseError, InputError, ResourceLimitError
from .traces import DistributedAlphabet, Event, Trace, enumerate_traces, trace_from_word

__all__ = [
    "DistributedAlphabet",
    "Event",
    "Trace",
    "trace_from_word",
    "enumerate_traces",
    "InputError",
    "FormulaParseError",
    "ResourceLimitError",
]

__version__ = "0.1.0"
