"""Refinement and compatibility decision procedures.

Refinement is decided as a greatest fixpoint: start from every pair of
reachable states and delete pairs that violate one of the simulation
conditions until nothing changes. Weak refinement runs the same fixpoint
over saturated (tau-closed) transition relations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .compose import product, queue_sets, with_output_queue, _check_capacity
from .core import Mio, Modality, NotComposable, SignatureMismatch, composable, reachable


@dataclass(frozen=True)
class RefinementCounterexample:
    concrete: str
    abstract: str
    condition: str
    action: str
    trace: tuple = ()


@dataclass(frozen=True)
class RefinementVerdict:
    holds: bool
    mode: str
    witness: frozenset | None = None
    counterexample: RefinementCounterexample | None = None


@dataclass(frozen=True)
class CompatViolation:
    state: str
    left: str
    right: str
    action: str
    direction: str
    trace: tuple = ()


@dataclass(frozen=True)
class CompatVerdict:
    compatible: bool
    mode: str
    violation: CompatViolation | None = None


class AsyncOutcome(str, Enum):
    COMPATIBLE_EXACT = "CompatibleExact"
    INCOMPATIBLE = "Incompatible"
    INCONCLUSIVE = "InconclusiveAtBound"


@dataclass(frozen=True)
class AsyncVerdict:
    outcome: AsyncOutcome
    capacity: int
    violation: CompatViolation | None = None
    saturated: bool = False
    saturated_states: tuple = ()
    # a violation that could not be confirmed because its receive search hit the bound
    unconfirmed: CompatViolation | None = None

    @property
    def definite(self) -> bool:
        return self.outcome is not AsyncOutcome.INCONCLUSIVE

    @property
    def compatible(self) -> bool:
        return self.outcome is AsyncOutcome.COMPATIBLE_EXACT


def tau_closures(m: Mio, modality: Modality = Modality.MUST, states=None) -> dict:
    """Internal-step closure of every state in ``states`` (default: reachable)."""
    succ = m.must_succ if modality is Modality.MUST else m.may_succ
    internals = m.internals
    step = {s: [t for a, t in out if a in internals] for s, out in succ.items()}
    closures = {}
    for s in sorted(states if states is not None else reachable(m)):
        seen = {s}
        todo = [s]
        while todo:
            for nxt in step.get(todo.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        closures[s] = frozenset(seen)
    return closures


def weak_must_closure(m: Mio, s: str, mode: str = "must") -> set:
    return set(tau_closures(m, Modality(mode), [s])[s])


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _move_masks(m: Mio, states: list, modality: Modality, weak: bool) -> list:
    """Per state index, action -> bitmask of states reachable by one matching step.

    Strong: exactly one ``action``-step. Weak: tau* a tau* for visible
    actions and a possibly empty tau* path for internal ones.
    """
    succ = m.must_succ if modality is Modality.MUST else m.may_succ
    index = {s: i for i, s in enumerate(states)}
    steps = [[(a, index[t]) for a, t in succ.get(s, ())] for s in states]
    if not weak:
        moves = []
        for out in steps:
            d = {}
            for a, j in out:
                d[a] = d.get(a, 0) | (1 << j)
            moves.append(d)
        return moves
    internals = m.internals
    closure = []
    for i in range(len(states)):
        seen = 1 << i
        todo = [i]
        while todo:
            for a, j in steps[todo.pop()]:
                if a in internals and not seen >> j & 1:
                    seen |= 1 << j
                    todo.append(j)
        closure.append(seen)
    moves = []
    for i in range(len(states)):
        d = dict.fromkeys(internals, closure[i])
        for u in _bits(closure[i]):
            for a, j in steps[u]:
                if a not in internals:
                    d[a] = d.get(a, 0) | closure[j]
        moves.append(d)
    return moves


def _condition(weak: bool, side: str, action: str, m: Mio) -> str:
    if not weak:
        return "mustSim" if side == "must" else "maySim"
    internal = action in m.internals
    if side == "must":
        return "2" if internal else "1"
    return "4" if internal else "3"


def _refines(concrete: Mio, abstract: Mio, weak: bool) -> RefinementVerdict:
    mode = "weak" if weak else "strong"
    if concrete.signature != abstract.signature:
        raise SignatureMismatch(
            f"{concrete.name} and {abstract.name} have different signatures")
    cs = sorted(reachable(concrete))
    as_ = sorted(reachable(abstract))
    ci = {s: i for i, s in enumerate(cs)}
    ai = {t: i for i, t in enumerate(as_)}
    nc, na = len(cs), len(as_)
    c_moves = _move_masks(concrete, cs, Modality.MUST, weak)
    a_moves = _move_masks(abstract, as_, Modality.MAY, weak)
    a_must = [[(a, ai[t2]) for a, t2 in abstract.must_succ.get(t, ())] for t in as_]
    c_may = [[(a, ci[s2]) for a, s2 in concrete.may_succ.get(s, ())] for s in cs]

    inv_c = [dict() for _ in range(nc)]  # s2 -> action -> mask of s with s2 in moves(s, a)
    for s, d in enumerate(c_moves):
        for a, mask in d.items():
            for s2 in _bits(mask):
                inv_c[s2][a] = inv_c[s2].get(a, 0) | (1 << s)
    inv_a = [dict() for _ in range(na)]
    for t, d in enumerate(a_moves):
        for a, mask in d.items():
            for t2 in _bits(mask):
                inv_a[t2][a] = inv_a[t2].get(a, 0) | (1 << t)
    must_pred_a = [[] for _ in range(na)]
    for t, out in enumerate(a_must):
        for a, t2 in out:
            must_pred_a[t2].append((t, a))
    may_pred_c = [[] for _ in range(nc)]
    for s, out in enumerate(c_may):
        for a, s2 in out:
            may_pred_c[s2].append((s, a))

    full_c, full_a = (1 << nc) - 1, (1 << na) - 1
    rel_c = [full_c] * na  # t -> mask of s with (s, t) in R
    rel_a = [full_a] * nc  # s -> mask of t with (s, t) in R
    deleted = {}

    def failure(s, t):
        cm = c_moves[s]
        for a, t2 in a_must[t]:
            if not cm.get(a, 0) & rel_c[t2]:
                return _condition(weak, "must", a, abstract), a, "must", t2
        am = a_moves[t]
        for a, s2 in c_may[s]:
            if not am.get(a, 0) & rel_a[s2]:
                return _condition(weak, "may", a, concrete), a, "may", s2
        return None

    work = deque((s, t) for s in range(nc) for t in range(na))
    queued = bytearray([1]) * (nc * na)
    while work:
        s2, t2 = work.popleft()
        queued[s2 * na + t2] = 0
        if not rel_a[s2] >> t2 & 1:
            continue
        why = failure(s2, t2)
        if why is None:
            continue
        rel_a[s2] &= ~(1 << t2)
        rel_c[t2] &= ~(1 << s2)
        deleted[s2, t2] = (len(deleted),) + why
        for t, a in must_pred_a[t2]:
            for s in _bits(inv_c[s2].get(a, 0) & rel_c[t]):
                if not queued[s * na + t]:
                    queued[s * na + t] = 1
                    work.append((s, t))
        for s, a in may_pred_c[s2]:
            for t in _bits(inv_a[t2].get(a, 0) & rel_a[s]):
                if not queued[s * na + t]:
                    queued[s * na + t] = 1
                    work.append((s, t))

    start = (ci[concrete.start], ai[abstract.start])

    def matches(s, t, alive):
        """Successor pairs that answer each obligation of (s, t)."""
        for a, t2 in a_must[t]:
            for s2 in _bits(c_moves[s].get(a, 0) & alive[0][t2]):
                yield s2, t2
        for a, s2 in c_may[s]:
            for t2 in _bits(a_moves[t].get(a, 0) & alive[1][s2]):
                yield s2, t2

    if rel_a[start[0]] >> start[1] & 1:
        seen = {start}
        todo = [start]
        while todo:
            for p in matches(*todo.pop(), (rel_c, rel_a)):
                if p not in seen:
                    seen.add(p)
                    todo.append(p)
        witness = frozenset((cs[s], as_[t]) for s, t in seen)
        return RefinementVerdict(True, mode, witness=witness)

    # walk back along the failure ancestry; deletion order strictly decreases
    pair, trace = start, []
    while True:
        _, cond, action, side, other = deleted[pair]
        s, t = pair
        if side == "must":
            cands = [(s2, other) for s2 in _bits(c_moves[s].get(action, 0))]
        else:
            cands = [(other, t2) for t2 in _bits(a_moves[t].get(action, 0))]
        if not cands:
            break
        trace.append(action)
        pair = min(cands, key=lambda c: deleted[c][0])
    cex = RefinementCounterexample(cs[pair[0]], as_[pair[1]], cond, action, tuple(trace))
    return RefinementVerdict(False, mode, counterexample=cex)


def strong_refines(concrete: Mio, abstract: Mio) -> RefinementVerdict:
    return _refines(concrete, abstract, weak=False)


def weak_refines(concrete: Mio, abstract: Mio) -> RefinementVerdict:
    return _refines(concrete, abstract, weak=True)


def refines(concrete: Mio, abstract: Mio, mode: str = "weak") -> RefinementVerdict:
    if mode not in ("strong", "weak"):
        raise ValueError(f"unknown refinement mode {mode!r}")
    return _refines(concrete, abstract, weak=(mode == "weak"))


# compatibility


def _bfs_traces(m: Mio) -> dict:
    """Shortest action trace to each state, ties broken by sorted expansion."""
    traces = {m.start: ()}
    queue = deque([m.start])
    while queue:
        s = queue.popleft()
        for a, t in m.may_succ.get(s, ()):
            if t not in traces:
                traces[t] = traces[s] + (a,)
                queue.append(t)
    return traces


class _Receiver:
    """Answers "can this state (weakly) take a must-input on action a?"."""

    def __init__(self, m: Mio, weak: bool):
        self.m = m
        self.weak = weak
        self._closure = {}

    def closure(self, state):
        if not self.weak:
            return frozenset([state])
        if state not in self._closure:
            self._closure[state] = tau_closures(self.m, Modality.MUST, [state])[state]
        return self._closure[state]

    def accepts(self, state, action):
        cl = self.closure(state)
        ok = any(a == action for u in cl for a, _ in self.m.must_succ.get(u, ()))
        return ok, bool(cl & self.m.saturated)


def _scan(s: Mio, t: Mio, weak: bool):
    """Check every reachable product state; return (violations, saturated states).

    Each violation is paired with a flag telling whether its receive search
    touched a saturated receiver state.
    """
    if not composable(s, t):
        raise NotComposable(f"{s.name} and {t.name} are not composable")
    prod = product(s, t)
    traces = _bfs_traces(prod.mio)
    directions = (
        ("S->T", s, _Receiver(t, weak), sorted(s.outputs & t.inputs), 0),
        ("T->S", t, _Receiver(s, weak), sorted(t.outputs & s.inputs), 1),
    )
    violations = []
    saturated = set(prod.mio.saturated)
    for name in sorted(prod.pairs, key=lambda n: (len(traces[n]), n)):
        pair = prod.pairs[name]
        for direction, sender, receiver, actions, side in directions:
            x, y = pair[side], pair[1 - side]
            sent = {a for a, _ in sender.may_succ.get(x, ())}
            for a in actions:
                if a not in sent:
                    continue
                ok, hit = receiver.accepts(y, a)
                if hit:
                    saturated.add(name)
                if not ok:
                    v = CompatViolation(name, pair[0], pair[1], a, direction, traces[name])
                    violations.append((v, hit))
    violations.sort(key=lambda vh: (len(vh[0].trace), vh[0].action, vh[0].state))
    return violations, saturated


def strong_compatible(s: Mio, t: Mio) -> CompatVerdict:
    violations, _ = _scan(s, t, weak=False)
    if violations:
        return CompatVerdict(False, "strong", violations[0][0])
    return CompatVerdict(True, "strong")


def weak_compatible(s: Mio, t: Mio) -> CompatVerdict:
    violations, _ = _scan(s, t, weak=True)
    if violations:
        return CompatVerdict(False, "weak", violations[0][0])
    return CompatVerdict(True, "weak")


def async_compatible(s: Mio, t: Mio, capacity: int) -> AsyncVerdict:
    """Weak compatibility of both output-queue extensions, bounded at ``capacity``.

    The verdict is exact only when the bound never refused an enqueue on the
    explored fragment; a violation counts as genuine when the receiver's
    internal search never reached a saturated state.
    """
    if not composable(s, t):
        raise NotComposable(f"{s.name} and {t.name} are not composable")
    _check_capacity(capacity)
    o_s, o_t = queue_sets(s, t)
    qs = with_output_queue(s, o_s, capacity)
    qt = with_output_queue(t, o_t, capacity)
    violations, saturated = _scan(qs, qt, weak=True)
    sat = tuple(sorted(saturated))
    genuine = [v for v, hit in violations if not hit]
    if genuine:
        return AsyncVerdict(AsyncOutcome.INCOMPATIBLE, capacity, violation=genuine[0],
                            saturated=bool(sat), saturated_states=sat)
    if violations or sat:
        return AsyncVerdict(AsyncOutcome.INCONCLUSIVE, capacity, saturated=bool(sat),
                            saturated_states=sat,
                            unconfirmed=violations[0][0] if violations else None)
    return AsyncVerdict(AsyncOutcome.COMPATIBLE_EXACT, capacity)
