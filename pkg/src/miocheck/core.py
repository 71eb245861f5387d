"""Modal I/O transition systems: data model, validation, reachability, renaming."""

from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, NamedTuple

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
ENQ_SUFFIX = "__enq"


class MioError(ValueError):
    """Raised when an operation's precondition on its MIO arguments fails."""


class NotComposable(MioError):
    pass


class SignatureMismatch(MioError):
    pass


class Modality(str, Enum):
    MAY = "may"
    MUST = "must"


class Transition(NamedTuple):
    source: str
    action: str
    target: str


@dataclass(frozen=True)
class Signature:
    inputs: frozenset = frozenset()
    outputs: frozenset = frozenset()
    internals: frozenset = frozenset()

    def __post_init__(self):
        for name in ("inputs", "outputs", "internals"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))

    @property
    def actions(self) -> frozenset:
        return self.inputs | self.outputs | self.internals

    @property
    def visible(self) -> frozenset:
        return self.inputs | self.outputs

    def kind(self, action: str) -> str | None:
        if action in self.inputs:
            return "input"
        if action in self.outputs:
            return "output"
        if action in self.internals:
            return "internal"
        return None


@dataclass(frozen=True)
class Mio:
    """A modal I/O transition system.

    ``must`` is expected to be a subset of ``may``; use :func:`validate` to
    check a hand-built value. ``generated`` marks machine-built MIOs, whose
    state ids may contain ``.`` and whose actions may carry the enqueue
    suffix. ``saturated`` lists states where a bounded queue refused an
    enqueue (empty for anything that is not a bounded-queue construction).
    """

    name: str
    states: frozenset
    start: str
    signature: Signature
    may: frozenset
    must: frozenset
    generated: bool = False
    saturated: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "may", frozenset(Transition(*t) for t in self.may))
        object.__setattr__(self, "must", frozenset(Transition(*t) for t in self.must))
        object.__setattr__(self, "saturated", frozenset(self.saturated))

    @property
    def inputs(self) -> frozenset:
        return self.signature.inputs

    @property
    def outputs(self) -> frozenset:
        return self.signature.outputs

    @property
    def internals(self) -> frozenset:
        return self.signature.internals

    @property
    def actions(self) -> frozenset:
        return self.signature.actions

    @cached_property
    def may_succ(self) -> dict:
        """state -> sorted list of (action, target) over may-transitions."""
        return _index(self.may)

    @cached_property
    def must_succ(self) -> dict:
        return _index(self.must)

    def post(self, state: str, action: str, modality: Modality = Modality.MAY) -> list:
        succ = self.must_succ if modality is Modality.MUST else self.may_succ
        return [t for a, t in succ.get(state, ()) if a == action]

    def transitions(self) -> list:
        """All transitions with their strongest modality, canonically ordered."""
        out = [(t, Modality.MUST if t in self.must else Modality.MAY) for t in self.may]
        out.extend((t, Modality.MUST) for t in self.must - self.may)
        return sorted(out)


def _index(transitions: Iterable[Transition]) -> dict:
    idx = defaultdict(list)
    for src, act, tgt in transitions:
        idx[src].append((act, tgt))
    for v in idx.values():
        v.sort()
    return dict(idx)


def make_mio(name, start, transitions=(), *, inputs=(), outputs=(), internals=(),
             states=None, generated=False) -> Mio:
    """Build a MIO from ``(source, action, target, modality)`` tuples.

    Must-transitions are added to the may relation automatically. When
    ``states`` is omitted it is the start state plus every endpoint.
    """
    may, must = set(), set()
    found = {start}
    for src, act, tgt, modality in transitions:
        t = Transition(src, act, tgt)
        may.add(t)
        if Modality(modality) is Modality.MUST:
            must.add(t)
        found.update((src, tgt))
    return Mio(
        name=name,
        states=frozenset(states) if states is not None else frozenset(found),
        start=start,
        signature=Signature(frozenset(inputs), frozenset(outputs), frozenset(internals)),
        may=frozenset(may),
        must=frozenset(must),
        generated=generated,
    )


def validate(m: Mio) -> list[str]:
    """Return every invariant breach of ``m``; an empty list means valid."""
    report = []
    sig = m.signature
    if sig.inputs & sig.outputs or sig.inputs & sig.internals or sig.outputs & sig.internals:
        overlap = sorted((sig.inputs & sig.outputs) | (sig.inputs & sig.internals)
                         | (sig.outputs & sig.internals))
        report.append(f"signature partitions overlap: {', '.join(overlap)}")
    if not m.states:
        report.append("state set is empty")
    if m.start not in m.states:
        report.append(f"start state {m.start!r} is not a state")
    if not m.must <= m.may:
        extra = sorted(m.must - m.may)
        report.append("must not subset of may: " + ", ".join(_fmt(t) for t in extra))
    for t in sorted(m.may | m.must):
        for endpoint in (t.source, t.target):
            if endpoint not in m.states:
                report.append(f"dangling state {endpoint!r} in transition {_fmt(t)}")
        if t.action not in sig.actions:
            report.append(f"unknown action {t.action!r} in transition {_fmt(t)}")
    for a in sorted(sig.actions):
        if not IDENT.match(a):
            report.append(f"invalid action name {a!r}")
        elif a.endswith(ENQ_SUFFIX) and not m.generated:
            report.append(f"reserved suffix {ENQ_SUFFIX!r} used in action {a!r}")
    for s in sorted(m.states):
        if not s:
            report.append("empty state id")
        elif "." in s and not m.generated:
            report.append(f"state id {s!r} contains '.'")
    if not IDENT.match(m.name):
        report.append(f"invalid MIO name {m.name!r}")
    return report


def _fmt(t: Transition) -> str:
    return f"{t.source} -{t.action}-> {t.target}"


def reachable(m: Mio) -> set:
    seen = {m.start}
    queue = deque([m.start])
    succ = m.may_succ
    while queue:
        s = queue.popleft()
        for _, t in succ.get(s, ()):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


def composable(s: Mio, t: Mio) -> bool:
    shared = s.actions & t.actions
    return shared <= (s.inputs & t.outputs) | (t.inputs & s.outputs)


def shared_actions(s: Mio, t: Mio) -> frozenset:
    if not composable(s, t):
        raise NotComposable(f"{s.name} and {t.name} are not composable")
    return s.actions & t.actions


def enq(action: str) -> str:
    return action + ENQ_SUFFIX


def rename_for_queue(s: Mio, o) -> Mio:
    """Rename each output in ``o`` to its enqueue action (still an output)."""
    o = frozenset(o)
    if not o <= s.outputs:
        raise MioError(f"{sorted(o - s.outputs)} are not outputs of {s.name}")
    if not o:
        return s

    def r(a):
        return enq(a) if a in o else a

    return Mio(
        name=s.name + "_r",
        states=s.states,
        start=s.start,
        signature=Signature(s.inputs, frozenset(r(a) for a in s.outputs), s.internals),
        may=frozenset(Transition(x, r(a), y) for x, a, y in s.may),
        must=frozenset(Transition(x, r(a), y) for x, a, y in s.must),
        generated=True,
    )
