"""Modal I/O transition systems: composition, refinement and compatibility checking."""

from .check import (AsyncOutcome, AsyncVerdict, CompatVerdict, CompatViolation,
                    RefinementCounterexample, RefinementVerdict, async_compatible, refines,
                    strong_compatible, strong_refines, weak_compatible, weak_must_closure,
                    weak_refines)
from .compose import (QueueState, async_compose, queue_mio, sync_compose,
                      with_output_queue)
from .core import (Mio, MioError, Modality, NotComposable, Signature, SignatureMismatch,
                   Transition, composable, make_mio, reachable, rename_for_queue,
                   shared_actions, validate)
from .format import ParseDiagnostic, ParseError, SpecDocument, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "AsyncOutcome",
    "AsyncVerdict",
    "CompatVerdict",
    "CompatViolation",
    "Mio",
    "MioError",
    "Modality",
    "NotComposable",
    "ParseDiagnostic",
    "ParseError",
    "QueueState",
    "RefinementCounterexample",
    "RefinementVerdict",
    "Signature",
    "SignatureMismatch",
    "SpecDocument",
    "Transition",
    "async_compatible",
    "async_compose",
    "composable",
    "make_mio",
    "parse",
    "queue_mio",
    "reachable",
    "refines",
    "rename_for_queue",
    "serialize",
    "shared_actions",
    "strong_compatible",
    "strong_refines",
    "sync_compose",
    "validate",
    "weak_compatible",
    "weak_must_closure",
    "weak_refines",
    "with_output_queue",
]
