"""Random MIO generation, theorem-instance checking and a brute-force oracle."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

from . import check
from .check import AsyncOutcome
from .compose import async_compose, sync_compose, with_output_queue
from .core import Mio, Signature, Transition, composable
from .format import serialize_document
from .rng import ALGORITHM, SplitMix64, stream_seed

THEOREMS = ("T1", "T2", "T3", "ObservationI")
ORACLE_PAIR_LIMIT = 12


@dataclass(frozen=True)
class GenConfig:
    max_states: int = 6
    max_actions_per_kind: int = 2
    transition_density: float = 0.3
    must_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.max_states < 1 or self.max_actions_per_kind < 0:
            raise ValueError("max_states must be >= 1 and max_actions_per_kind >= 0")
        for name in ("transition_density", "must_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass
class TheoremReport:
    theorem: str
    seed: int
    instances_tried: int = 0
    instances_applicable: int = 0
    failures: list = field(default_factory=list)  # (seed, serialized instance, clause)
    capacity: int | None = None
    rng: str = ALGORITHM

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        ratio = self.instances_applicable / self.instances_tried if self.instances_tried else 0.0
        return {
            "record": "summary", "theorem": self.theorem, "rng": self.rng, "seed": self.seed,
            "capacity": self.capacity, "tried": self.instances_tried,
            "applicable": self.instances_applicable, "applicability": round(ratio, 4),
            "failures": len(self.failures), "status": "PASS" if self.passed else "FAIL",
        }

    def to_lines(self) -> str:
        """One JSON record for the summary plus one per failure."""
        lines = [json.dumps(self.summary(), sort_keys=True)]
        for seed, instance, clause in self.failures:
            lines.append(json.dumps({"record": "failure", "theorem": self.theorem,
                                     "seed": seed, "clause": clause, "instance": instance},
                                    sort_keys=True))
        return "\n".join(lines) + "\n"


def _rng(cfg, rng):
    return rng if rng is not None else SplitMix64(cfg.seed)


def _names(prefix, n):
    return [f"{prefix}{i}" for i in range(n)]


def random_signature(cfg: GenConfig, rng: SplitMix64) -> Signature:
    k = cfg.max_actions_per_kind + 1
    return Signature(frozenset(_names("i", rng.below(k))), frozenset(_names("o", rng.below(k))),
                     frozenset(_names("x", rng.below(k))))


def random_mio(cfg: GenConfig, rng: SplitMix64 | None = None, *, name: str = "M",
               signature: Signature | None = None, n_states: int | None = None,
               forward=frozenset()) -> Mio:
    """Draw a valid MIO; reproducible from ``cfg.seed`` when ``rng`` is omitted.

    Each (state, action) slot gets a geometric number of transitions with
    success probability ``transition_density``; each may-transition is
    promoted to must with probability ``must_fraction``. Transitions on the
    ``forward`` actions only lead to higher-numbered states.
    """
    rng = _rng(cfg, rng)
    n = n_states if n_states is not None else 1 + rng.below(cfg.max_states)
    sig = signature if signature is not None else random_signature(cfg, rng)
    states = _names("s", n)
    may, must = set(), set()
    actions = sorted(sig.actions)
    for i, s in enumerate(states):
        for a in actions:
            lo = i + 1 if a in forward else 0
            if lo >= n:
                continue
            for _ in range(n):
                if not rng.chance(cfg.transition_density):
                    break
                may.add(Transition(s, a, states[lo + rng.below(n - lo)]))
    for t in sorted(may):
        if rng.chance(cfg.must_fraction):
            must.add(t)
    return Mio(name, frozenset(states), states[0], sig, frozenset(may), frozenset(must))


def random_composable_pair(cfg: GenConfig, rng: SplitMix64 | None = None, *,
                           forward_sends: bool = False, forward_internals: bool = False) -> tuple:
    """Two composable MIOs; at least one shared action whenever actions are allowed.

    ``forward_sends`` makes shared outputs move strictly forward in state
    order, so a component can only keep sending along cycles that pass
    through some other action (``forward_internals`` rules out internal
    ones too). This keeps bounded queue exploration exact more often.
    """
    rng = _rng(cfg, rng)
    k = cfg.max_actions_per_kind
    s_in, s_out, t_in, t_out = (rng.below(k + 1) for _ in range(4))
    st = rng.below(min(s_out, t_in) + 1)
    ts = rng.below(min(t_out, s_in) + 1)
    if k >= 1 and st + ts == 0:
        s_out, t_in, st = max(s_out, 1), max(t_in, 1), 1
    n_ = _names("n", st)
    m_ = _names("m", ts)
    sig_s = Signature(frozenset(m_ + _names("a", s_in - ts)),
                      frozenset(n_ + _names("b", s_out - st)),
                      frozenset(_names("x", rng.below(k + 1))))
    sig_t = Signature(frozenset(n_ + _names("c", t_in - st)),
                      frozenset(m_ + _names("d", t_out - ts)),
                      frozenset(_names("y", rng.below(k + 1))))
    fwd_s = frozenset(n_ if forward_sends else ()) | (sig_s.internals if forward_internals else set())
    fwd_t = frozenset(m_ if forward_sends else ()) | (sig_t.internals if forward_internals else set())
    s = random_mio(cfg, rng, name="S", signature=sig_s, forward=fwd_s)
    t = random_mio(cfg, rng, name="T", signature=sig_t, forward=fwd_t)
    return s, t


def _fresh(states, prefix="d"):
    i = 0
    while f"{prefix}{i}" in states:
        i += 1
    return f"{prefix}{i}"


def _rebuild(m, states, may, must, name=None):
    return Mio(name or m.name, frozenset(states), m.start, m.signature,
               frozenset(may), frozenset(must))


def add_detour(m: Mio, state: str, internal: str) -> Mio:
    """Delay ``state`` by one internal must-step: its outgoing moves shift to a fresh copy."""
    d = _fresh(m.states)
    may = {t for t in m.may if t.source != state}
    must = {t for t in m.must if t.source != state}
    may |= {Transition(d, a, y) for x, a, y in m.may if x == state}
    must |= {Transition(d, a, y) for x, a, y in m.must if x == state}
    step = Transition(state, internal, d)
    return _rebuild(m, m.states | {d}, may | {step}, must | {step})


def split_state(m: Mio, state: str, rng: SplitMix64) -> Mio:
    """Copy ``state`` and redirect a random part of its incoming moves to the copy."""
    d = _fresh(m.states)
    may, must = set(m.may), set(m.must)
    for x, a, y in list(m.may):
        if x == state:
            may.add(Transition(d, a, y))
            if Transition(x, a, y) in m.must:
                must.add(Transition(d, a, y))
    for t in sorted(m.may):
        if t.target == state and rng.chance(0.5):
            moved = Transition(t.source, t.action, d)
            may.discard(t)
            may.add(moved)
            if t in must:
                must.discard(t)
                must.add(moved)
    return _rebuild(m, m.states | {d}, may, must)


def random_refinement(m: Mio, cfg: GenConfig, mode: str = "strong",
                      rng: SplitMix64 | None = None, *, prune: float = 0.3,
                      promote: float = 0.2, splits: int = 1, detours: int = 1) -> Mio:
    """A random refinement of ``m`` with the same signature, checker-verified.

    Drops and promotes may-only transitions and splits states; in weak mode
    it also inserts internal must-detours (only when ``m`` has an internal
    action). Raises ``AssertionError`` if the result fails to refine ``m``.
    """
    rng = _rng(cfg, rng)
    may, must = set(m.may), set(m.must)
    for t in sorted(m.may - m.must):
        if rng.chance(prune):
            may.discard(t)
        elif rng.chance(promote):
            must.add(t)
    out = _rebuild(m, m.states, may, must)
    for _ in range(splits):
        if rng.chance(0.5):
            out = split_state(out, rng.choice(sorted(out.states)), rng)
    internals = sorted(m.internals)
    if mode == "weak" and internals:
        for _ in range(detours):
            if rng.chance(0.5):
                out = add_detour(out, rng.choice(sorted(out.states)), rng.choice(internals))
    verdict = check.refines(out, m, mode)
    assert verdict.holds, f"generated {mode} refinement does not refine: {verdict}"
    return out


def make_compatible(s: Mio, t: Mio, rng: SplitMix64, mode: str = "weak",
                    capacity: int = 3, limit: int = 200):
    """Add must-inputs to each receiver until the pair is compatible in ``mode``.

    Every repair gives a (receiver state, action) slot a must-transition, so
    the loop ends. Returns ``None`` when the async check stays
    inconclusive or ``limit`` repairs do not suffice.
    """
    for _ in range(limit):
        if mode == "async":
            verdict = check.async_compatible(s, t, capacity)
            if verdict.outcome is AsyncOutcome.COMPATIBLE_EXACT:
                return s, t
            v = verdict.violation
            if v is None:
                return None
            left, right = v.left.split(".")[0], v.right.split(".")[0]
        else:
            fn = check.strong_compatible if mode == "strong" else check.weak_compatible
            verdict = fn(s, t)
            if verdict.compatible:
                return s, t
            v = verdict.violation
            left, right = v.left, v.right
        if v.direction == "S->T":
            t = _add_must(t, right, v.action, rng)
        else:
            s = _add_must(s, left, v.action, rng)
    return None


def _add_must(m, state, action, rng):
    tr = Transition(state, action, rng.choice(sorted(m.states)))
    return _rebuild(m, m.states, m.may | {tr}, m.must | {tr})


# brute-force oracle


def _reach(m):
    seen, todo = {m.start}, [m.start]
    while todo:
        x = todo.pop()
        for src, _, tgt in m.may:
            if src == x and tgt not in seen:
                seen.add(tgt)
                todo.append(tgt)
    return seen


def _tau_star(m, rel, state):
    seen, todo = {state}, [state]
    while todo:
        x = todo.pop()
        for src, a, tgt in rel:
            if src == x and a in m.internals and tgt not in seen:
                seen.add(tgt)
                todo.append(tgt)
    return seen


def _weak_targets(m, rel, state, action):
    if action in m.internals:
        return _tau_star(m, rel, state)
    out = set()
    for u in _tau_star(m, rel, state):
        for src, a, tgt in rel:
            if src == u and a == action:
                out |= _tau_star(m, rel, tgt)
    return out


def _strong_targets(m, rel, state, action):
    return {tgt for src, a, tgt in rel if src == state and a == action}


def _closed(R, concrete, abstract, targets):
    for s, t in R:
        for t0, a, t2 in abstract.must:
            if t0 == t and not any((s2, t2) in R
                                   for s2 in targets(concrete, concrete.must, s, a)):
                return False
        for s0, a, s2 in concrete.may:
            if s0 == s and not any((s2, t2) in R
                                   for t2 in targets(abstract, abstract.may, t, a)):
                return False
    return True


def brute_force_refines(concrete: Mio, abstract: Mio, mode: str = "strong") -> bool:
    """Decide refinement by trying every relation that contains the start pair."""
    if concrete.signature != abstract.signature:
        raise ValueError("signatures differ")
    pairs = sorted((s, t) for s in _reach(concrete) for t in _reach(abstract))
    if len(pairs) > ORACLE_PAIR_LIMIT:
        raise ValueError(f"instance too large for enumeration ({len(pairs)} pairs)")
    start = (concrete.start, abstract.start)
    rest = [p for p in pairs if p != start]
    targets = _weak_targets if mode == "weak" else _strong_targets
    for k in range(len(rest) + 1):
        for extra in combinations(rest, k):
            if _closed({start, *extra}, concrete, abstract, targets):
                return True
    return False


def oracle_pair(cfg: GenConfig, rng: SplitMix64) -> tuple:
    """A (concrete, abstract) pair on a shared signature for oracle comparison.

    Mixes independent draws with perturbed refinements so that both
    verdicts occur often.
    """
    abstract = random_mio(cfg, rng, name="A")
    kind = rng.below(3)
    if kind == 0:
        concrete = random_mio(cfg, rng, name="C", signature=abstract.signature)
    else:
        may, must = set(abstract.may), set(abstract.must)
        for t in sorted(abstract.may):
            r = rng.random()
            if r < 0.2:
                may.discard(t)
                must.discard(t)
            elif r < 0.35:
                must.add(t)
            elif r < 0.45:
                must.discard(t)
        acts = sorted(abstract.actions)
        states = sorted(abstract.states)
        if acts and kind == 2:
            t = Transition(rng.choice(states), rng.choice(acts), rng.choice(states))
            may.add(t)
            if rng.chance(0.5):
                must.add(t)
        concrete = Mio("C", abstract.states, abstract.start, abstract.signature,
                       frozenset(may), frozenset(must))
    return concrete, abstract


# theorem instances


def _instance(*mios):
    return serialize_document(mios)


def check_theorem(theorem: str, iterations: int, cfg: GenConfig, *, capacity: int = 3,
                  target: int | None = None) -> TheoremReport:
    """Draw ``iterations`` instances (or stop at ``target`` applicable ones) and check them.

    Iteration ``i`` is seeded by an independent stream of ``cfg.seed``, so a
    failure record's seed reproduces it via :func:`theorem_instance`.
    """
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}")
    report = TheoremReport(theorem, cfg.seed,
                           capacity=capacity if theorem in ("T3", "ObservationI") else None)
    for i in range(iterations):
        if target is not None and report.instances_applicable >= target:
            break
        seed = stream_seed(cfg.seed, i)
        report.instances_tried += 1
        outcome = theorem_instance(theorem, cfg, seed, capacity)
        if outcome is None:
            continue
        report.instances_applicable += 1
        instance, failed = outcome
        for clause in failed:
            report.failures.append((seed, instance, clause))
    return report


def theorem_instance(theorem, cfg, seed, capacity=3):
    """Check one instance; ``None`` if not applicable, else (instance, failed clauses)."""
    rng = SplitMix64(seed)
    if theorem == "ObservationI":
        return _observation_i(cfg, rng, capacity)
    if theorem == "T3":
        s, t = random_composable_pair(cfg, rng, forward_sends=True,
                                      forward_internals=rng.chance(0.5))
    else:
        s, t = random_composable_pair(cfg, rng)
    mode = "strong" if theorem == "T1" else "weak"
    if theorem in ("T2", "T3"):
        # weakly but not necessarily strongly compatible partners
        for name in ("s", "t"):
            m = s if name == "s" else t
            if m.internals and rng.chance(0.5):
                m = add_detour(m, rng.choice(sorted(m.states)), rng.choice(sorted(m.internals)))
            s, t = (m, t) if name == "s" else (s, m)
    repaired = make_compatible(s, t, rng, "async" if theorem == "T3" else mode, capacity)
    if repaired is None:
        return None
    s, t = repaired
    try:
        s2 = random_refinement(s, cfg, mode, rng)
        t2 = random_refinement(t, cfg, mode, rng)
    except AssertionError:
        return _instance(s, t), ["generated refinement verified by the checker"]
    s2 = Mio("S1", s2.states, s2.start, s2.signature, s2.may, s2.must)
    t2 = Mio("T1", t2.states, t2.start, t2.signature, t2.may, t2.must)
    failed = []
    if not composable(s2, t2):
        return _instance(s, t, s2, t2), ["refined pair composable"]
    if theorem == "T1":
        if not check.strong_refines(sync_compose(s2, t2), sync_compose(s, t)).holds:
            failed.append("S'*T' strongly refines S*T")
        if not check.strong_compatible(s2, t2).compatible:
            failed.append("S' strongly compatible with T'")
    elif theorem == "T2":
        if not check.weak_refines(sync_compose(s2, t2), sync_compose(s, t)).holds:
            failed.append("S'*T' weakly refines S*T")
        if not check.weak_compatible(s2, t2).compatible:
            failed.append("S' weakly compatible with T'")
    else:
        verdict = check.async_compatible(s2, t2, capacity)
        if not verdict.definite:
            return None
        if not check.weak_refines(async_compose(s2, t2, capacity),
                                  async_compose(s, t, capacity)).holds:
            failed.append("S' async-composed with T' weakly refines S async-composed with T")
        if verdict.outcome is not AsyncOutcome.COMPATIBLE_EXACT:
            failed.append("S' asynchronously compatible with T'")
    return _instance(s, t, s2, t2), failed


def _observation_i(cfg, rng, capacity):
    s = random_mio(cfg, rng, name="S")
    o = frozenset(rng.subset(sorted(s.outputs)))
    try:
        s2 = random_refinement(s, cfg, "weak", rng)
    except AssertionError:
        return _instance(s), ["generated refinement verified by the checker"]
    s2 = Mio("S1", s2.states, s2.start, s2.signature, s2.may, s2.must)
    failed = []
    if not check.weak_refines(with_output_queue(s2, o, capacity),
                              with_output_queue(s, o, capacity)).holds:
        failed.append("queue extension of S' weakly refines queue extension of S")
    return _instance(s, s2), failed
