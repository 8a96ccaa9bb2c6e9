"""Recursive-descent parser for the theory file format.

Layout: declarations (sort / fun / rel) followed by sequents; '//' starts a
comment.  'and' binds tighter than 'or'; a quantifier body extends as far
right as possible.  Sequent contexts are optional: missing variable sorts
are inferred from their first constraining use, and a variable with no
constraining use is a sort error carrying its location.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    And,
    App,
    Eq,
    Exists,
    Falsity,
    Or,
    RelAtom,
    Sequent,
    Signature,
    SortError,
    Theory,
    Truth,
    Var,
)


class ParseError(ValueError):
    def __init__(self, message: str, span: tuple[int, int] | None = None):
        self.span = span
        if span is not None:
            message = f"{message} (line {span[0]}, column {span[1]})"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    kind: str  # ident / keyword / punct / break / eof
    text: str
    line: int
    col: int

    @property
    def span(self):
        return (self.line, self.col)


KEYWORDS = {"sort", "fun", "rel", "true", "false", "and", "or", "exists"}
PUNCT = ["|-", "->", "(", ")", ",", ":", ".", "=", "|"]
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def tokenize(text: str) -> list[Token]:
    out = []
    lines = text.splitlines()
    for ln, line in enumerate(lines, start=1):
        if "//" in line:
            line = line[: line.index("//")]
        col = 0
        while col < len(line):
            ch = line[col]
            if ch.isspace():
                col += 1
                continue
            m = _IDENT.match(line, col)
            if m:
                word = m.group(0)
                kind = "keyword" if word in KEYWORDS else "ident"
                out.append(Token(kind, word, ln, col + 1))
                col = m.end()
                continue
            for p in PUNCT:
                if line.startswith(p, col):
                    out.append(Token("punct", p, ln, col + 1))
                    col += len(p)
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", (ln, col + 1))
    out.append(Token("eof", "", len(lines) + 1, 1))
    return out


@dataclass(frozen=True)
class RawTerm:
    head: str
    args: tuple
    span: tuple[int, int]


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.span)
        return t

    # -- declarations ----------------------------------------------------

    def parse_theory(self) -> Theory:
        sorts: list[str] = []
        funcs: dict = {}
        rels: dict = {}
        sequents = []
        while self.peek().kind != "eof":
            t = self.peek()
            if t.text == "sort":
                self.next()
                sorts.append(self.next().text)
            elif t.text == "fun":
                self.next()
                name = self.next().text
                self.expect(":")
                args = []
                while self.peek().text != "->":
                    args.append(self.next().text)
                    if self.peek().text == ",":
                        self.next()
                self.expect("->")
                funcs[name] = (tuple(args), self.next().text)
            elif t.text == "rel":
                self.next()
                name = self.next().text
                self.expect(":")
                args = [self.next().text]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.next().text)
                rels[name] = tuple(args)
            else:
                sig = Signature(tuple(sorts), dict(funcs), dict(rels))
                sequents.append(self.parse_sequent(sig))
        sig = Signature(tuple(sorts), funcs, rels)
        sig.check()
        return Theory(sig, tuple(sequents))

    # -- sequents ----------------------------------------------------------

    def parse_sequent(self, sig: Signature) -> Sequent:
        start = self.peek().span
        context = self._try_context()
        lhs = self.parse_formula()
        self.expect("|-")
        rhs = self.parse_formula()
        return elaborate_sequent(sig, context, lhs, rhs, start)

    def _try_context(self):
        save = self.pos
        binds = []
        try:
            while True:
                t = self.next()
                if t.kind != "ident":
                    raise ParseError("not a context", t.span)
                self.expect(":")
                binds.append((t.text, self.next().text))
                sep = self.next()
                if sep.text == "|":
                    return tuple(binds)
                if sep.text != ",":
                    raise ParseError("not a context", sep.span)
        except ParseError:
            self.pos = save
            return tuple()

    # -- formulas -----------------------------------------------------------

    def parse_formula(self):
        parts = [self.parse_conjunct()]
        while self.peek().text == "or":
            self.next()
            parts.append(self.parse_conjunct())
        return parts[0] if len(parts) == 1 else ("or", tuple(parts))

    def parse_conjunct(self):
        parts = [self.parse_quantified()]
        while self.peek().text == "and":
            self.next()
            parts.append(self.parse_quantified())
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def parse_quantified(self):
        if self.peek().text == "exists":
            self.next()
            binders = []
            while True:
                t = self.next()
                if t.kind != "ident":
                    raise ParseError("expected a bound variable", t.span)
                sort = None
                if self.peek().text == ":":
                    self.next()
                    sort = self.next().text
                binders.append((t.text, sort, t.span))
                if self.peek().text == ",":
                    self.next()
                    continue
                break
            self.expect(".")
            return ("exists", tuple(binders), self.parse_formula())
        return self.parse_atom()

    def parse_atom(self):
        t = self.peek()
        if t.text == "true":
            self.next()
            return ("true",)
        if t.text == "false":
            self.next()
            return ("false",)
        if t.text == "(":
            self.next()
            phi = self.parse_formula()
            self.expect(")")
            return phi
        term = self.parse_term()
        if self.peek().text == "=":
            self.next()
            return ("eq", term, self.parse_term())
        return ("atomT", term)

    def parse_term(self) -> RawTerm:
        t = self.next()
        if t.kind != "ident":
            raise ParseError(f"expected a term, found {t.text!r}", t.span)
        if self.peek().text == "(":
            self.next()
            args = []
            if self.peek().text != ")":
                args.append(self.parse_term())
                while self.peek().text == ",":
                    self.next()
                    args.append(self.parse_term())
            self.expect(")")
            return RawTerm(t.text, tuple(args), t.span)
        return RawTerm(t.text, (), t.span)


# -- elaboration ------------------------------------------------------------------
#
# Binders are renamed apart first, so one flat environment covers the whole
# sequent; sorts then propagate to a fixpoint from relation and function
# argument positions and across equations.


def elaborate_sequent(sig, context, raw_lhs, raw_rhs, span) -> Sequent:
    explicit = bool(context)
    env: dict[str, str | None] = {}
    spans: dict[str, tuple[int, int]] = {}
    order: list[str] = []
    for name, sort in context:
        if sort not in sig.sorts:
            raise SortError(f"unknown sort {sort}", span)
        if name in sig.funcs:
            raise SortError(f"variable {name} collides with a declared symbol", span)
        env[name] = sort
        order.append(name)
    taken = set(env) | set(sig.funcs)
    raw_lhs = _alpha(raw_lhs, taken, {}, env, spans)
    raw_rhs = _alpha(raw_rhs, taken, {}, env, spans)
    _collect_free(sig, raw_lhs, env, spans, order, explicit, frozenset(env))
    _collect_free(sig, raw_rhs, env, spans, order, explicit, frozenset(env))
    for _ in range(1 + len(env)):
        if not (_infer(sig, raw_lhs, env) | _infer(sig, raw_rhs, env)):
            break
    for name, sort in env.items():
        if sort is None:
            raise SortError(
                f"cannot infer a sort for variable {name}", spans.get(name, span)
            )
        if sort not in sig.sorts:
            raise SortError(f"unknown sort {sort}", spans.get(name, span))
    lhs = _elab_formula(sig, raw_lhs, env)
    rhs = _elab_formula(sig, raw_rhs, env)
    ctx = tuple(Var(n, env[n]) for n in order)
    return Sequent(ctx, lhs, rhs, span)


def _alpha(raw, taken: set, renaming: dict, env, spans):
    """Rename binders apart from everything seen so far; the returned tree
    has globally unique binder names registered in env with their declared
    sorts (or None)."""
    kind = raw[0]
    if kind in ("true", "false"):
        return raw
    if kind == "eq":
        return ("eq", _rename_term(raw[1], renaming), _rename_term(raw[2], renaming))
    if kind == "atomT":
        return ("atomT", _rename_term(raw[1], renaming))
    if kind in ("and", "or"):
        return (kind, tuple(_alpha(p, taken, renaming, env, spans) for p in raw[1]))
    if kind == "exists":
        inner = dict(renaming)
        binders = []
        for name, sort, sp in raw[1]:
            fresh = name
            while fresh in taken:
                fresh += "'"
            taken.add(fresh)
            inner[name] = fresh
            env[fresh] = sort
            spans[fresh] = sp
            binders.append((fresh, sort, sp))
        return ("exists", tuple(binders), _alpha(raw[2], taken, inner, env, spans))
    raise ParseError(f"malformed formula fragment {raw!r}")


def _rename_term(t: RawTerm, renaming: dict) -> RawTerm:
    head = renaming.get(t.head, t.head)
    return RawTerm(head, tuple(_rename_term(a, renaming) for a in t.args), t.span)


def _collect_free(sig, raw, env, spans, order, explicit, declared):
    kind = raw[0]
    if kind in ("true", "false"):
        return
    if kind == "eq":
        _collect_term(sig, raw[1], env, spans, order, explicit, declared)
        _collect_term(sig, raw[2], env, spans, order, explicit, declared)
    elif kind == "atomT":
        t = raw[1]
        if t.head not in sig.rels:
            raise SortError(f"unknown relation {t.head}", t.span)
        if len(sig.rels[t.head]) != len(t.args):
            raise SortError(
                f"relation {t.head} expects {len(sig.rels[t.head])} arguments", t.span
            )
        for a in t.args:
            _collect_term(sig, a, env, spans, order, explicit, declared)
    elif kind in ("and", "or"):
        for p in raw[1]:
            _collect_free(sig, p, env, spans, order, explicit, declared)
    elif kind == "exists":
        _collect_free(sig, raw[2], env, spans, order, explicit, declared)


def _collect_term(sig, t: RawTerm, env, spans, order, explicit, declared):
    if t.head in sig.funcs:
        if len(sig.funcs[t.head][0]) != len(t.args):
            raise SortError(
                f"function {t.head} expects {len(sig.funcs[t.head][0])} arguments",
                t.span,
            )
        for a in t.args:
            _collect_term(sig, a, env, spans, order, explicit, declared)
        return
    if t.args:
        raise SortError(f"unknown function {t.head}", t.span)
    if t.head not in env:
        if explicit:
            raise SortError(f"variable {t.head} not in context", t.span)
        env[t.head] = None
        spans[t.head] = t.span
        order.append(t.head)


def _infer(sig, raw, env) -> bool:
    kind = raw[0]
    changed = False
    if kind == "eq":
        s = _term_sort(sig, raw[1], env) or _term_sort(sig, raw[2], env)
        if s:
            changed |= _push(sig, raw[1], s, env)
            changed |= _push(sig, raw[2], s, env)
    elif kind == "atomT":
        t = raw[1]
        for a, s in zip(t.args, sig.rels[t.head]):
            changed |= _push(sig, a, s, env)
    elif kind in ("and", "or"):
        for p in raw[1]:
            changed |= _infer(sig, p, env)
    elif kind == "exists":
        changed |= _infer(sig, raw[2], env)
    return changed


def _term_sort(sig, t: RawTerm, env):
    if t.head in sig.funcs:
        return sig.funcs[t.head][1]
    return env.get(t.head)


def _push(sig, t: RawTerm, sort, env) -> bool:
    if t.head in sig.funcs:
        args, res = sig.funcs[t.head]
        if res != sort:
            raise SortError(f"term {t.head} has sort {res}, expected {sort}", t.span)
        changed = False
        for a, s in zip(t.args, args):
            changed |= _push(sig, a, s, env)
        return changed
    if env.get(t.head) is None:
        env[t.head] = sort
        return True
    if env[t.head] != sort:
        raise SortError(
            f"variable {t.head} used at sorts {env[t.head]} and {sort}", t.span
        )
    return False


def _elab_formula(sig, raw, env):
    kind = raw[0]
    if kind == "true":
        return Truth()
    if kind == "false":
        return Falsity()
    if kind == "eq":
        lhs, rhs = _elab_term(sig, raw[1], env), _elab_term(sig, raw[2], env)
        if lhs.sort != rhs.sort:
            raise SortError(
                f"equality between sorts {lhs.sort} and {rhs.sort}", raw[1].span
            )
        return Eq(lhs, rhs)
    if kind == "atomT":
        t = raw[1]
        terms = tuple(_elab_term(sig, a, env) for a in t.args)
        for tm, s, rt in zip(terms, sig.rels[t.head], t.args):
            if tm.sort != s:
                raise SortError(
                    f"argument of {t.head} has sort {tm.sort}, expected {s}", rt.span
                )
        return RelAtom(t.head, terms)
    if kind == "and":
        return And(tuple(_elab_formula(sig, p, env) for p in raw[1]))
    if kind == "or":
        return Or(tuple(_elab_formula(sig, p, env) for p in raw[1]))
    if kind == "exists":
        binders = tuple(Var(name, env[name]) for name, _, _ in raw[1])
        return Exists(binders, _elab_formula(sig, raw[2], env))
    raise ParseError(f"malformed formula {raw!r}")


def _elab_term(sig, t: RawTerm, env):
    if t.head in sig.funcs:
        args, res = sig.funcs[t.head]
        terms = tuple(_elab_term(sig, a, env) for a in t.args)
        for tm, s in zip(terms, args):
            if tm.sort != s:
                raise SortError(
                    f"argument of {t.head} has sort {tm.sort}, expected {s}", t.span
                )
        return App(t.head, terms, res)
    return Var(t.head, env[t.head])


def parse_theory(text: str) -> Theory:
    return Parser(tokenize(text)).parse_theory()


def parse_sequent_text(sig: Signature, text: str) -> Sequent:
    p = Parser(tokenize(text))
    seq = p.parse_sequent(sig)
    if p.peek().kind != "eof":
        raise ParseError("trailing input after sequent", p.peek().span)
    return seq
