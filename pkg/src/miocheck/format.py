"""Reading and writing the ``.mio`` text format.

A document holds one or more MIO definitions::

    # sends n, then waits for m
    mio S {
      inputs: m;
      outputs: n;
      states: start_S, s;
      start: start_S;
      transitions:
        start_S -n!-> s must;
        s -m?-> start_S must;
    }

The decoration after the action (``?``, ``!`` or nothing) must agree with
the declared kind of the action. A ``generated;`` line allows the names
produced by composition (dotted state ids, enqueue actions).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import ENQ_SUFFIX, IDENT, Mio, Signature, Transition, validate

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<arrow>->)
  | (?P<punct>[{}:;,\-?!])
""", re.VERBOSE)

_LIST_SECTIONS = ("inputs", "outputs", "internals", "states")
_SECTIONS = _LIST_SECTIONS + ("start", "transitions")
_DECOR = {"input": "?", "output": "!", "internal": ""}


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass
class SpecDocument:
    mios: list
    warnings: list = field(default_factory=list)

    def names(self) -> list:
        return [m.name for m in self.mios]

    def get(self, name: str) -> Mio:
        for m in self.mios:
            if m.name == name:
                return m
        raise KeyError(name)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    pos, line, line_start = 0, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError([ParseDiagnostic(line, pos - line_start + 1,
                                              f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.errors = []
        self.warnings = []

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def fail(self, tok, msg):
        raise ParseError(self.errors + [ParseDiagnostic(tok.line, tok.col, msg)])

    def expect(self, text=None, kind=None):
        tok = self.next()
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.kind != "eof" else "end of input"
            self.fail(tok, f"expected {want}, got {got}")
        return tok

    def error(self, tok, msg):
        self.errors.append(ParseDiagnostic(tok.line, tok.col, msg))

    def warn(self, tok, msg):
        self.warnings.append(ParseDiagnostic(tok.line, tok.col, msg, "warning"))

    def document(self):
        mios = []
        seen = set()
        if self.peek().kind == "eof":
            self.fail(self.peek(), "expected at least one mio")
        while self.peek().kind != "eof":
            head = self.peek()
            m = self.mio_def()
            if m is None:
                continue
            if m.name in seen:
                self.error(head, f"duplicate mio name {m.name!r}")
            seen.add(m.name)
            mios.append(m)
        if self.errors:
            raise ParseError(self.errors)
        return SpecDocument(mios, self.warnings)

    def mio_def(self):
        self.expect("mio")
        name_tok = self.expect(kind="ident")
        self.expect("{")
        lists = {}
        start = None
        transitions = []
        generated = False
        n_errors = len(self.errors)
        while self.peek().text != "}":
            tok = self.next()
            if tok.kind != "ident":
                self.fail(tok, f"expected a section, got {tok.text or 'end of input'!r}")
            if tok.text == "generated" and self.peek().text == ";":
                self.next()
                generated = True
                continue
            if tok.text not in _SECTIONS:
                self.fail(tok, f"unknown section {tok.text!r}")
            self.expect(":")
            if tok.text in lists or (tok.text == "start" and start) or \
                    (tok.text == "transitions" and transitions):
                self.error(tok, f"duplicate section {tok.text!r}")
            if tok.text in _LIST_SECTIONS:
                lists[tok.text] = self.ident_list()
            elif tok.text == "start":
                start = self.expect(kind="ident")
                self.expect(";")
            else:
                if not (self.peek().kind == "ident" and self.peek(1).text == "-"):
                    self.fail(self.peek(), "expected at least one transition")
                while self.peek().kind == "ident" and self.peek(1).text == "-":
                    transitions.append(self.transition())
        self.expect("}")
        m = self.build(name_tok, lists, start, transitions, generated, n_errors)
        return m if len(self.errors) == n_errors else None

    def ident_list(self):
        items = []
        if self.peek().text == ";":
            self.next()
            return items
        items.append(self.expect(kind="ident"))
        while self.peek().text == ",":
            self.next()
            items.append(self.expect(kind="ident"))
        self.expect(";")
        return items

    def transition(self):
        src = self.expect(kind="ident")
        self.expect("-")
        act = self.expect(kind="ident")
        decor = ""
        if self.peek().text in ("?", "!"):
            decor = self.next().text
        self.expect("->")
        tgt = self.expect(kind="ident")
        mod = self.expect(kind="ident")
        if mod.text not in ("may", "must"):
            self.fail(mod, f"expected 'may' or 'must', got {mod.text!r}")
        self.expect(";")
        return src, act, decor, tgt, mod

    def build(self, name_tok, lists, start_tok, transitions, generated, n_errors):
        if not IDENT.match(name_tok.text):
            self.error(name_tok, f"invalid mio name {name_tok.text!r}")
        kinds = {}
        sig = {}
        for section, kind in (("inputs", "input"), ("outputs", "output"),
                              ("internals", "internal")):
            names = set()
            for tok in lists.get(section, ()):
                a = tok.text
                if not IDENT.match(a):
                    self.error(tok, f"invalid action name {a!r}")
                elif a.endswith(ENQ_SUFFIX) and not generated:
                    self.error(tok, f"action {a!r} uses the reserved suffix {ENQ_SUFFIX!r}")
                if a in kinds:
                    if kinds[a] == kind:
                        self.warn(tok, f"action {a!r} listed twice")
                    else:
                        self.error(tok, f"action {a!r} declared as both {kinds[a]} and {kind}")
                    continue
                kinds[a] = kind
                names.add(a)
            sig[section] = frozenset(names)
        states = set()
        if "states" not in lists:
            self.error(name_tok, f"mio {name_tok.text!r} has no states section")
        for tok in lists.get("states", ()):
            if "." in tok.text and not generated:
                self.error(tok, f"state id {tok.text!r} contains '.'")
            if tok.text in states:
                self.warn(tok, f"state {tok.text!r} listed twice")
            states.add(tok.text)
        if start_tok is None:
            self.error(name_tok, f"mio {name_tok.text!r} has no start section")
        elif start_tok.text not in states:
            self.error(start_tok, f"unknown start state {start_tok.text!r}")
        may, must = set(), set()
        for src, act, decor, tgt, mod in transitions:
            for tok in (src, tgt):
                if tok.text not in states:
                    self.error(tok, f"unknown state {tok.text!r}")
            kind = kinds.get(act.text)
            if kind is None:
                self.error(act, f"unknown action {act.text!r}")
            elif _DECOR[kind] != decor:
                shown = decor or "no decoration"
                self.error(act, f"decoration {shown!r} does not match {kind} action {act.text!r}")
            t = Transition(src.text, act.text, tgt.text)
            if t in may:
                self.warn(src, f"transition {src.text} -{act.text}-> {tgt.text} listed twice")
            may.add(t)
            if mod.text == "must":
                must.add(t)
        mio = Mio(
            name=name_tok.text,
            states=frozenset(states),
            start=start_tok.text if start_tok else "",
            signature=Signature(sig["inputs"], sig["outputs"], sig["internals"]),
            may=frozenset(may),
            must=frozenset(must),
            generated=generated,
        )
        if len(self.errors) == n_errors:
            for problem in validate(mio):
                self.error(name_tok, problem)
        return mio


def parse(text: str) -> SpecDocument:
    """Parse a document; raises :class:`ParseError` carrying diagnostics."""
    return _Parser(text).document()


def _ident_section(label, names):
    return f"  {label}: {', '.join(sorted(names))};" if names else f"  {label}: ;"


def serialize(m: Mio) -> str:
    lines = [f"mio {m.name} {{"]
    if m.generated:
        lines.append("  generated;")
    lines.append(_ident_section("inputs", m.inputs))
    lines.append(_ident_section("outputs", m.outputs))
    lines.append(_ident_section("internals", m.internals))
    lines.append(_ident_section("states", m.states))
    lines.append(f"  start: {m.start};")
    if m.may:
        lines.append("  transitions:")
        for t in sorted(m.may):
            decor = _DECOR.get(m.signature.kind(t.action) or "internal", "")
            modality = "must" if t in m.must else "may"
            lines.append(f"    {t.source} -{t.action}{decor}-> {t.target} {modality};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_document(mios) -> str:
    return "\n".join(serialize(m) for m in mios)
