"""Synchronous product, bounded FIFO queue MIOs and asynchronous composition."""

from __future__ import annotations

from collections import defaultdict, deque
from itertools import product as cartesian
from typing import NamedTuple

from .core import (Mio, MioError, NotComposable, Signature, Transition, composable, enq,
                   rename_for_queue)


class QueueState(NamedTuple):
    """Queue content, newest message first, together with its bound."""

    content: tuple
    capacity: int

    @property
    def name(self) -> str:
        return queue_state_name(self.content)

    def enqueue(self, action):
        if len(self.content) >= self.capacity:
            return None
        return QueueState((action,) + self.content, self.capacity)

    def dequeue(self):
        if not self.content:
            return None
        return self.content[-1], QueueState(self.content[:-1], self.capacity)


def queue_state_name(content) -> str:
    return "_".join(("q",) + tuple(content))


class Product(NamedTuple):
    mio: Mio
    pairs: dict  # product state name -> (left state, right state)


def _by_action(m: Mio) -> dict:
    """state -> action -> list of (target, is_must)."""
    idx = defaultdict(lambda: defaultdict(list))
    for src, act, tgt in sorted(m.may):
        idx[src][act].append((tgt, Transition(src, act, tgt) in m.must))
    return idx


def product(s: Mio, t: Mio, name: str | None = None) -> Product:
    """Reachable fragment of the synchronous product, with the pair decomposition."""
    if not composable(s, t):
        raise NotComposable(f"{s.name} and {t.name} are not composable")
    shared = s.actions & t.actions
    sig = Signature(
        inputs=(s.inputs | t.inputs) - shared,
        outputs=(s.outputs | t.outputs) - shared,
        internals=s.internals | t.internals | shared,
    )
    left, right = _by_action(s), _by_action(t)
    names = {}
    pairs = {}

    def visit(pair):
        if pair in names:
            return names[pair]
        n = f"{pair[0]}.{pair[1]}"
        if n in pairs:
            raise MioError(f"product state name {n!r} is ambiguous")
        names[pair] = n
        pairs[n] = pair
        queue.append(pair)
        return n

    may, must = set(), set()
    queue = deque()
    start = visit((s.start, t.start))
    while queue:
        x, y = pair = queue.popleft()
        src = names[pair]
        lx, ry = left.get(x, {}), right.get(y, {})
        for a, succ in lx.items():
            if a in shared:
                for (x2, m1), (y2, m2) in cartesian(succ, ry.get(a, ())):
                    tr = Transition(src, a, visit((x2, y2)))
                    may.add(tr)
                    if m1 and m2:
                        must.add(tr)
            else:
                for x2, m1 in succ:
                    tr = Transition(src, a, visit((x2, y)))
                    may.add(tr)
                    if m1:
                        must.add(tr)
        for a, succ in ry.items():
            if a in shared:
                continue
            for y2, m2 in succ:
                tr = Transition(src, a, visit((x, y2)))
                may.add(tr)
                if m2:
                    must.add(tr)
    saturated = {n for n, (x, y) in pairs.items() if x in s.saturated or y in t.saturated}
    mio = Mio(
        name=name or f"{s.name}_{t.name}",
        states=frozenset(pairs),
        start=start,
        signature=sig,
        may=frozenset(may),
        must=frozenset(must),
        generated=True,
        saturated=frozenset(saturated),
    )
    return Product(mio, pairs)


def sync_compose(s: Mio, t: Mio) -> Mio:
    return product(s, t).mio


def _check_capacity(capacity):
    if not isinstance(capacity, int) or isinstance(capacity, bool) or capacity < 1:
        raise MioError(f"queue capacity must be a positive integer, got {capacity!r}")


def _queue(o, capacity):
    _check_capacity(capacity)
    o = sorted(set(o))
    contents = {}
    for length in range(capacity + 1):
        for word in cartesian(o, repeat=length):
            n = queue_state_name(word)
            if n in contents:
                raise MioError(f"queue state name {n!r} is ambiguous for messages {o}")
            contents[n] = word
    transitions = set()
    for n, word in contents.items():
        state = QueueState(word, capacity)
        for a in o:
            nxt = state.enqueue(a)
            if nxt is not None:
                transitions.add(Transition(n, enq(a), nxt.name))
        deq = state.dequeue()
        if deq is not None:
            transitions.add(Transition(n, deq[0], deq[1].name))
    suffix = "_".join(o)
    mio = Mio(
        name="Q_" + suffix if suffix else "Q",
        states=frozenset(contents),
        start=queue_state_name(()),
        signature=Signature(inputs=frozenset(enq(a) for a in o), outputs=frozenset(o)),
        may=frozenset(transitions),
        must=frozenset(transitions),
        generated=True,
    )
    return mio, contents


def queue_mio(o, capacity: int) -> Mio:
    """FIFO buffer over ``o`` holding at most ``capacity`` messages; may = must."""
    return _queue(o, capacity)[0]


def with_output_queue(s: Mio, o, capacity: int) -> Mio:
    """``s`` with its outputs in ``o`` routed through a bounded FIFO queue.

    States where ``s`` could enqueue but the queue is full are recorded in
    the result's ``saturated`` set.
    """
    renamed = rename_for_queue(s, o)
    queue, contents = _queue(o, capacity)
    prod = product(renamed, queue, name=s.name + "_oq")
    enq_actions = queue.inputs
    saturated = set(prod.mio.saturated)
    for n, (x, qn) in prod.pairs.items():
        if len(contents[qn]) == capacity and any(
                a in enq_actions for a, _ in renamed.may_succ.get(x, ())):
            saturated.add(n)
    return Mio(**{**_fields(prod.mio), "saturated": frozenset(saturated)})


def _fields(m: Mio) -> dict:
    return dict(name=m.name, states=m.states, start=m.start, signature=m.signature,
                may=m.may, must=m.must, generated=m.generated, saturated=m.saturated)


def queue_sets(s: Mio, t: Mio) -> tuple:
    """The queued outputs of each side: (out_S & in_T, out_T & in_S)."""
    return s.outputs & t.inputs, t.outputs & s.inputs


def async_compose(s: Mio, t: Mio, capacity: int) -> Mio:
    if not composable(s, t):
        raise NotComposable(f"{s.name} and {t.name} are not composable")
    o_s, o_t = queue_sets(s, t)
    qs = with_output_queue(s, o_s, capacity)
    qt = with_output_queue(t, o_t, capacity)
    return product(qs, qt, name=f"{s.name}_as_{t.name}").mio
