import pytest
from hypothesis import given, settings, strategies as st

from miocheck import (Mio, MioError, NotComposable, Signature, Transition, composable,
                      make_mio, reachable, rename_for_queue, shared_actions, validate)
from miocheck.compose import queue_mio
from miocheck.harness import GenConfig, random_composable_pair, random_mio

seeds = st.integers(min_value=0, max_value=2**64 - 1)


def test_exchange_is_valid(exchange):
    s, t = exchange
    assert validate(s) == []
    assert validate(t) == []


def test_must_outside_may_is_reported():
    m = Mio("M", {"s0", "s1"}, "s0", Signature(outputs={"a"}),
            may=set(), must={Transition("s0", "a", "s1")})
    report = validate(m)
    assert len(report) == 1
    assert report[0].startswith("must not subset of may")


def test_overlapping_signature_is_reported():
    m = make_mio("M", "s0", inputs=["x"], outputs=["x"])
    report = validate(m)
    assert len(report) == 1
    assert report[0].startswith("signature partitions overlap")


@pytest.mark.parametrize("m, fragment", [
    (Mio("M", {"s0"}, "s1", Signature(), set(), set()), "start state"),
    (Mio("M", {"s0"}, "s0", Signature(outputs={"a"}), {("s0", "a", "s9")}, set()), "dangling"),
    (Mio("M", {"s0"}, "s0", Signature(), {("s0", "zz", "s0")}, set()), "unknown action"),
    (make_mio("M", "s0", outputs=["a__enq"]), "reserved suffix"),
    (make_mio("M", "s.0"), "contains '.'"),
])
def test_each_breach_is_named(m, fragment):
    report = validate(m)
    assert any(fragment in line for line in report), report


def test_generated_lifts_naming_reservations():
    m = make_mio("M", "s.0", [("s.0", "a__enq", "s.0", "must")], outputs=["a__enq"],
                 generated=True)
    assert validate(m) == []


def test_reachable_single_state(single):
    assert reachable(single) == {"u0"}


def test_reachable_exchange(exchange):
    assert reachable(exchange[0]) == {"start_S", "s"}


def test_unreachable_state_excluded():
    m = make_mio("M", "s0", [("s1", "a", "s0", "may")], internals=["a"], states=["s0", "s1"])
    assert reachable(m) == {"s0"}


def test_composable_examples(exchange):
    s, t = exchange
    assert composable(s, t)
    p = make_mio("P", "p", outputs=["n"])
    assert not composable(s, p)
    assert composable(make_mio("A", "a", inputs=["x"]), make_mio("B", "b", outputs=["y"]))


def test_internal_overlap_not_composable():
    assert not composable(make_mio("A", "a", internals=["i"]), make_mio("B", "b", inputs=["i"]))


def test_shared_actions(exchange):
    s, t = exchange
    assert shared_actions(s, t) == {"m", "n"}
    assert shared_actions(make_mio("A", "a", inputs=["x"]), make_mio("B", "b")) == set()
    a = make_mio("A", "a", outputs=["a", "b"])
    b = make_mio("B", "b0", inputs=["a"])
    assert shared_actions(a, b) == {"a"}
    with pytest.raises(NotComposable):
        shared_actions(a, make_mio("C", "c", outputs=["a"]))


def test_rename_for_queue_exchange(exchange):
    s, _ = exchange
    r = rename_for_queue(s, {"n"})
    assert r.outputs == {"n__enq"}
    assert r.inputs == {"m"}
    assert r.must == {Transition("start_S", "n__enq", "s"), Transition("s", "m", "start_S")}
    assert validate(r) == []


def test_rename_identity_and_errors(exchange):
    s, _ = exchange
    assert rename_for_queue(s, set()) == s
    with pytest.raises(MioError):
        rename_for_queue(s, {"m"})


def test_renamed_sender_composes_with_queue(exchange):
    s, _ = exchange
    assert composable(rename_for_queue(s, {"n"}), queue_mio({"n"}, 2))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_generated_mios_are_valid_and_reachability_sound(seed):
    m = random_mio(GenConfig(seed=seed))
    assert validate(m) == []
    r = reachable(m)
    assert m.start in r and r <= m.states


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_composable_and_shared_are_symmetric(seed):
    s, t = random_composable_pair(GenConfig(seed=seed))
    assert composable(s, t) and composable(t, s)
    assert shared_actions(s, t) == shared_actions(t, s)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_rename_preserves_structure(seed):
    m = random_mio(GenConfig(seed=seed))
    o = {a for i, a in enumerate(sorted(m.outputs)) if (seed >> i) & 1}
    r = rename_for_queue(m, o)
    assert (r.states, r.start) == (m.states, m.start)
    assert len(r.may) == len(m.may) and len(r.must) == len(m.must)
    assert len(r.actions) == len(m.actions)
    assert validate(r) == []
