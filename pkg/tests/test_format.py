import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from miocheck import ParseError, Transition, async_compose, parse, serialize, sync_compose
from miocheck.format import serialize_document
from miocheck.harness import GenConfig, random_composable_pair, random_mio

from conftest import DATA

seeds = st.integers(min_value=0, max_value=2**64 - 1)
GOLDEN = sorted(p.name for p in DATA.glob("*.mio") if p.name not in ("overlap.mio", "clash.mio"))

EXCHANGE_S = """\
mio S {
  inputs: m;
  outputs: n;
  internals: ;
  states: s, start_S;
  start: start_S;
  transitions:
    s -m?-> start_S must;
    start_S -n!-> s must;
}
"""


def errors_of(text):
    with pytest.raises(ParseError) as info:
        parse(text)
    return info.value.diagnostics


def test_exchange_parses(exchange):
    s, t = exchange
    assert s.inputs == {"m"} and s.outputs == {"n"}
    assert s.must == {Transition("start_S", "n", "s"), Transition("s", "m", "start_S")}
    assert t.start == "start_T"


def test_canonical_serialization(exchange):
    assert serialize(exchange[0]) == EXCHANGE_S


@pytest.mark.parametrize("name", GOLDEN)
def test_golden_round_trip(name):
    doc = parse((DATA / name).read_text())
    again = parse(serialize_document(doc.mios))
    assert again.mios == doc.mios


def test_may_only_transition_round_trips():
    text = "mio M { outputs: a; states: x; start: x; transitions: x -a!-> x may; }"
    m = parse(text).get("M")
    assert m.may == {Transition("x", "a", "x")} and not m.must
    assert parse(serialize(m)).get("M") == m


def test_generated_product_round_trips(exchange):
    for p in (sync_compose(*exchange), async_compose(*exchange, 2)):
        assert p.generated
        assert parse(serialize(p)).get(p.name) == p


def test_diagnostic_has_position():
    text = "mio M {\n  outputs: a;\n  states: x;\n  start: x;\n  transitions:\n    x -a?-> x must;\n}\n"
    (d,) = errors_of(text)
    assert (d.line, d.column) == (6, 8)
    assert "decoration '?'" in d.message
    assert str(d).startswith("6:8: error:")


@pytest.mark.parametrize("text, fragment", [
    ("", "expected at least one mio"),
    ("mio M { states: x; }", "no start section"),
    ("mio M { states: x; start: y; }", "unknown start state"),
    ("mio M { states: x; start: x; transitions: x -a-> x must; }", "unknown action"),
    ("mio M { internals: a; states: x; start: x; transitions: x -a-> z must; }", "unknown state"),
    ("mio M { inputs: a; outputs: a; states: x; start: x; }", "declared as both"),
    ("mio M { outputs: a__enq; states: x; start: x; }", "reserved suffix"),
    ("mio M { states: x.y; start: x.y; }", "contains '.'"),
    ("mio M { states: x; start: x; states: y; }", "duplicate section"),
    ("mio M { colours: x; }", "unknown section"),
    ("mio M { states: x; start: x; transitions: }", "expected at least one transition"),
    ("mio M { internals: a; states: x; start: x; transitions: x -a-> x might; }",
     "expected 'may' or 'must'"),
    ("mio M { states: x; start: x; }\nmio M { states: x; start: x; }", "duplicate mio name"),
    ("mio M { states: x; start: x;", "expected"),
])
def test_parse_errors(text, fragment):
    assert any(fragment in d.message for d in errors_of(text))


def test_several_errors_reported_together():
    text = "mio M { outputs: a__enq; states: x.y; start: z; }"
    assert len(errors_of(text)) == 3


def test_duplicates_warn():
    doc = parse("mio M { internals: a, a; states: x, x; start: x; "
                "transitions: x -a-> x must; x -a-> x must; }")
    assert len(doc.warnings) == 3
    assert all(d.severity == "warning" for d in doc.warnings)


def test_comments_and_whitespace_ignored():
    doc = parse("# header\nmio M{states:x;start:x;} # trailing\n")
    assert doc.names() == ["M"]
    with pytest.raises(KeyError):
        doc.get("N")


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_random_round_trip(seed):
    m = random_mio(GenConfig(seed=seed, transition_density=0.5), name="R")
    assert parse(serialize(m)).get("R") == m


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_composed_round_trip(seed):
    s, t = random_composable_pair(GenConfig(max_states=3, seed=seed))
    p = async_compose(s, t, 1)
    assert parse(serialize(p)).get(p.name) == p


SCRIPT = """
from miocheck import async_compose, parse, serialize
from miocheck.harness import GenConfig, random_composable_pair
s, t = random_composable_pair(GenConfig(seed=7, transition_density=0.6))
doc = parse(open({path!r}).read())
print(serialize(async_compose(s, t, 2)) + serialize(doc.get("S")))
"""


def test_byte_stable_across_hash_seeds():
    script = SCRIPT.format(path=str(DATA / "exchange.mio"))
    outs = {subprocess.run([sys.executable, "-c", script], capture_output=True, check=True,
                           env={"PYTHONHASHSEED": str(h), "PATH": ""}).stdout
            for h in (0, 1, 12345)}
    assert len(outs) == 1
