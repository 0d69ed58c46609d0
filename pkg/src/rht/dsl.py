"""Plain-text presentation language: tokenizer, parser, pretty-printer, elaboration.

Example::

    algebra R { gen x : 4; }
    algebra S { gen y : 2; }
    map phi : R -> S { x -> y^2; }
    transfer phi;
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from rht.errors import DslDegreeError, DslNameError, DslSyntaxError, ValidationError
from rht.exactlin import ONE, scalar, vadd

KEYWORDS = {"algebra", "over", "gen", "d", "map", "action", "on", "auto", "relation"}
JOB_KINDS = ("check", "hh", "hc", "transfer", "euler")

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<arrow>->)|(?P<int>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[{}();:,^*/+\-=])"
)


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span


def tokenize(text: str):
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            if kind == "sym":
                kind = tok
            elif kind == "arrow":
                kind = "->"
            out.append(Token(kind, tok, Span(line, col)))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    out.append(Token("eof", "", Span(line, col)))
    return out


# ---------------------------------------------------------------------------
# syntax tree (spans do not take part in equality)


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    factors: tuple  # ((name, exponent), ...)
    span: Span = field(default=None, compare=False)


@dataclass(frozen=True)
class PolyExpr:
    terms: tuple
    span: Span = field(default=None, compare=False)


@dataclass(frozen=True)
class AlgebraDecl:
    name: str
    base: str | None
    gens: tuple  # ((name, degree, span), ...) with span excluded below
    diffs: tuple  # ((gen, PolyExpr), ...)
    span: Span = field(default=None, compare=False)
    gen_spans: tuple = field(default=(), compare=False)
    diff_spans: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class MapDecl:
    name: str
    source: str
    target: str
    images: tuple  # ((gen, PolyExpr), ...)
    span: Span = field(default=None, compare=False)
    image_spans: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class AutoDecl:
    name: str
    images: tuple
    span: Span = field(default=None, compare=False)
    image_spans: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class ActionDecl:
    name: str
    algebra: str
    autos: tuple
    relations: tuple  # tuple of words ((auto, exponent), ...)
    span: Span = field(default=None, compare=False)


@dataclass(frozen=True)
class JobDecl:
    kind: str
    names: tuple
    span: Span = field(default=None, compare=False)
    name_spans: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class SourceFile:
    decls: tuple
    path: str | None = field(default=None, compare=False)

    @property
    def algebras(self):
        return [d for d in self.decls if isinstance(d, AlgebraDecl)]

    @property
    def maps(self):
        return [d for d in self.decls if isinstance(d, MapDecl)]

    @property
    def actions(self):
        return [d for d in self.decls if isinstance(d, ActionDecl)]

    @property
    def jobs(self):
        return [d for d in self.decls if isinstance(d, JobDecl)]


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, what=None):
        t = self.tok
        if t.kind != kind:
            raise DslSyntaxError(f"expected {what or repr(kind)}, found {t.text or 'end of file'!r}", t.span.line, t.span.col)
        return self.next()

    def expect_kw(self, word):
        t = self.tok
        if t.kind != "name" or t.text != word:
            raise DslSyntaxError(f"expected {word!r}, found {t.text or 'end of file'!r}", t.span.line, t.span.col)
        return self.next()

    def name(self, what="a name"):
        t = self.expect("name", what)
        return t

    def file(self):
        decls = []
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "name":
                raise DslSyntaxError(f"expected a declaration, found {t.text!r}", t.span.line, t.span.col)
            if t.text == "algebra":
                decls.append(self.algebra())
            elif t.text == "map":
                decls.append(self.map())
            elif t.text == "action":
                decls.append(self.action())
            elif t.text in JOB_KINDS:
                decls.append(self.job())
            else:
                raise DslSyntaxError(f"unknown declaration {t.text!r}", t.span.line, t.span.col)
        return tuple(decls)

    def algebra(self):
        start = self.expect_kw("algebra").span
        name = self.name("an algebra name").text
        base = None
        if self.tok.kind == "name" and self.tok.text == "over":
            self.next()
            base = self.name("a base algebra name").text
        self.expect("{")
        gens, gspans, diffs, dspans = [], [], [], []
        while self.tok.kind != "}":
            t = self.tok
            if t.kind == "name" and t.text == "gen":
                self.next()
                g = self.name("a generator name")
                self.expect(":")
                deg = int(self.expect("int", "a degree").text)
                self.expect(";")
                gens.append((g.text, deg))
                gspans.append(g.span)
            elif t.kind == "name" and t.text == "d":
                self.next()
                g = self.name("a generator name")
                self.expect("=")
                p = self.poly()
                self.expect(";")
                diffs.append((g.text, p))
                dspans.append(g.span)
            else:
                raise DslSyntaxError(f"expected 'gen' or 'd', found {t.text or 'end of file'!r}", t.span.line, t.span.col)
        self.expect("}")
        return AlgebraDecl(name, base, tuple(gens), tuple(diffs), start, tuple(gspans), tuple(dspans))

    def assignments(self):
        self.expect("{")
        items, spans = [], []
        while self.tok.kind != "}":
            g = self.name("a generator name")
            self.expect("->")
            p = self.poly()
            self.expect(";")
            items.append((g.text, p))
            spans.append(g.span)
        self.expect("}")
        return tuple(items), tuple(spans)

    def map(self):
        start = self.expect_kw("map").span
        name = self.name("a map name").text
        self.expect(":")
        src = self.name("a source algebra").text
        self.expect("->")
        tgt = self.name("a target algebra").text
        images, spans = self.assignments()
        return MapDecl(name, src, tgt, images, start, spans)

    def action(self):
        start = self.expect_kw("action").span
        name = self.name("an action name").text
        self.expect_kw("on")
        alg = self.name("an algebra name").text
        self.expect("{")
        autos, rels = [], []
        while self.tok.kind != "}":
            t = self.tok
            if t.kind == "name" and t.text == "auto":
                self.next()
                g = self.name("an automorphism name")
                images, spans = self.assignments()
                autos.append(AutoDecl(g.text, images, g.span, spans))
            elif t.kind == "name" and t.text == "relation":
                self.next()
                word = []
                while self.tok.kind == "name":
                    g = self.next().text
                    e = 1
                    if self.tok.kind == "^":
                        self.next()
                        sign = 1
                        if self.tok.kind == "-":
                            self.next()
                            sign = -1
                        e = sign * int(self.expect("int", "an exponent").text)
                    word.append((g, e))
                if not word:
                    raise DslSyntaxError("empty relation word", self.tok.span.line, self.tok.span.col)
                self.expect(";")
                rels.append(tuple(word))
            else:
                raise DslSyntaxError(f"expected 'auto' or 'relation', found {t.text or 'end of file'!r}", t.span.line, t.span.col)
        self.expect("}")
        return ActionDecl(name, alg, tuple(autos), tuple(rels), start)

    def job(self):
        t = self.next()
        names, spans = [], []
        n = self.name("a declaration name")
        names.append(n.text)
        spans.append(n.span)
        while self.tok.kind == ",":
            self.next()
            n = self.name("a declaration name")
            names.append(n.text)
            spans.append(n.span)
        self.expect(";")
        return JobDecl(t.text, tuple(names), t.span, tuple(spans))

    def poly(self):
        start = self.tok.span
        terms = []
        sign = 1
        if self.tok.kind in ("+", "-"):
            sign = -1 if self.next().kind == "-" else 1
        terms.append(self.term(sign))
        while self.tok.kind in ("+", "-"):
            sign = -1 if self.next().kind == "-" else 1
            terms.append(self.term(sign))
        return PolyExpr(tuple(terms), start)

    def term(self, sign):
        start = self.tok.span
        coeff = Fraction(sign)
        factors = []
        if self.tok.kind == "int":
            num = int(self.next().text)
            den = 1
            if self.tok.kind == "/":
                self.next()
                den = int(self.expect("int", "a denominator").text)
                if den == 0:
                    raise DslSyntaxError("zero denominator", start.line, start.col)
            coeff *= Fraction(num, den)
            if self.tok.kind != "*":
                return Term(coeff, (), start)
            self.next()
        factors.append(self.factor())
        while self.tok.kind == "*":
            self.next()
            factors.append(self.factor())
        return Term(coeff, tuple(factors), start)

    def factor(self):
        g = self.name("a generator or coefficient")
        if g.text in KEYWORDS:
            raise DslSyntaxError(f"keyword {g.text!r} cannot be a generator", g.span.line, g.span.col)
        e = 1
        if self.tok.kind == "^":
            self.next()
            e = int(self.expect("int", "an exponent").text)
        return (g.text, e)


def parse(text: str, path=None) -> SourceFile:
    """Parse and statically validate a source file."""
    sf = SourceFile(_Parser(text).file(), path)
    validate(sf)
    return sf


def parse_poly_expr(text: str) -> PolyExpr:
    p = _Parser(text)
    expr = p.poly()
    if p.tok.kind != "eof":
        t = p.tok
        raise DslSyntaxError(f"trailing input {t.text!r}", t.span.line, t.span.col)
    return expr


# ---------------------------------------------------------------------------
# pretty printing


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: PolyExpr) -> str:
    out = []
    for k, t in enumerate(p.terms):
        c = t.coeff
        neg = c < 0
        a = -c if neg else c
        mono = "*".join(g if e == 1 else f"{g}^{e}" for g, e in t.factors)
        if not mono:
            body = _frac(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_frac(a)}*{mono}"
        if k == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(out)


def format_source(sf: SourceFile) -> str:
    lines = []
    for d in sf.decls:
        if isinstance(d, AlgebraDecl):
            head = f"algebra {d.name}" + (f" over {d.base}" if d.base else "")
            body = [f"gen {g} : {n};" for g, n in d.gens] + [f"d {g} = {format_poly(p)};" for g, p in d.diffs]
            lines.append(head + " { " + " ".join(body) + (" }" if body else "}"))
        elif isinstance(d, MapDecl):
            body = " ".join(f"{g} -> {format_poly(p)};" for g, p in d.images)
            lines.append(f"map {d.name} : {d.source} -> {d.target} {{ {body} }}")
        elif isinstance(d, ActionDecl):
            parts = []
            for a in d.autos:
                body = " ".join(f"{g} -> {format_poly(p)};" for g, p in a.images)
                parts.append(f"auto {a.name} {{ {body} }}")
            for w in d.relations:
                parts.append("relation " + " ".join(g if e == 1 else f"{g}^{e}" for g, e in w) + ";")
            lines.append(f"action {d.name} on {d.algebra} {{ " + " ".join(parts) + " }")
        else:
            lines.append(f"{d.kind} " + ", ".join(d.names) + ";")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# static validation and elaboration


def _err(cls, msg, span):
    if span is None:
        return cls(msg)
    return cls(msg, span.line, span.col)


def validate(sf: SourceFile):
    """Names resolve, are unique and refer backwards; polynomials are homogeneous."""
    kinds: dict = {}
    gens_of: dict = {}
    for d in sf.decls:
        if isinstance(d, JobDecl):
            for nm, sp in zip(d.names, d.name_spans or [d.span] * len(d.names)):
                if nm not in kinds:
                    raise _err(DslNameError, f"unknown name {nm!r}", sp)
            _check_job_shape(d, kinds)
            continue
        if d.name in kinds:
            raise _err(DslNameError, f"duplicate declaration {d.name!r}", d.span)
        if isinstance(d, AlgebraDecl):
            degs = {}
            if d.base is not None:
                if kinds.get(d.base) != "algebra":
                    raise _err(DslNameError, f"unknown base algebra {d.base!r}", d.span)
                degs.update(gens_of[d.base])
            for (g, n), sp in zip(d.gens, d.gen_spans or [d.span] * len(d.gens)):
                if g in degs or g in KEYWORDS:
                    raise _err(DslNameError, f"duplicate or reserved generator {g!r}", sp)
                if n < 1:
                    raise _err(DslDegreeError, f"generator {g} must have degree >= 1", sp)
                degs[g] = n
            own = {g for g, _ in d.gens}
            seen = set()
            for (g, p), sp in zip(d.diffs, d.diff_spans or [d.span] * len(d.diffs)):
                if g not in own:
                    raise _err(DslNameError, f"d given for {g!r}, not a generator declared here", sp)
                if g in seen:
                    raise _err(DslNameError, f"duplicate differential for {g!r}", sp)
                seen.add(g)
                deg = _poly_degree(p, degs)
                if deg is not None and deg != degs[g] + 1:
                    raise _err(DslDegreeError, f"d {g} has degree {deg}, expected {degs[g] + 1}", p.span)
            kinds[d.name] = "algebra"
            gens_of[d.name] = degs
        elif isinstance(d, MapDecl):
            for a in (d.source, d.target):
                if kinds.get(a) != "algebra":
                    raise _err(DslNameError, f"unknown algebra {a!r}", d.span)
            _check_images(d.images, d.image_spans, gens_of[d.source], gens_of[d.target])
            kinds[d.name] = "map"
        elif isinstance(d, ActionDecl):
            if kinds.get(d.algebra) != "algebra":
                raise _err(DslNameError, f"unknown algebra {d.algebra!r}", d.span)
            degs = gens_of[d.algebra]
            names = set()
            for a in d.autos:
                if a.name in names:
                    raise _err(DslNameError, f"duplicate automorphism {a.name!r}", a.span)
                names.add(a.name)
                _check_images(a.images, a.image_spans, degs, degs)
            for w in d.relations:
                for g, _e in w:
                    if g not in names:
                        raise _err(DslNameError, f"relation uses unknown automorphism {g!r}", d.span)
            kinds[d.name] = "action"


def _check_job_shape(d: JobDecl, kinds):
    want = {"hh": "algebra", "hc": "algebra", "euler": "algebra"}
    if d.kind in want:
        for nm in d.names:
            if kinds[nm] != "algebra":
                raise _err(DslNameError, f"{d.kind} expects algebras, {nm!r} is a {kinds[nm]}", d.span)
    elif d.kind == "transfer":
        if kinds[d.names[0]] != "map":
            raise _err(DslNameError, f"transfer expects a map first, {d.names[0]!r} is a {kinds[d.names[0]]}", d.span)
        for nm in d.names[1:]:
            if kinds[nm] != "action":
                raise _err(DslNameError, f"transfer takes actions after the map, {nm!r} is a {kinds[nm]}", d.span)
        if len(d.names) not in (1, 3):
            raise _err(DslNameError, "transfer takes a map, optionally followed by actions on target and source", d.span)


def _check_images(images, spans, src_degs, tgt_degs):
    seen = set()
    for (g, p), sp in zip(images, spans or [None] * len(images)):
        if g not in src_degs:
            raise _err(DslNameError, f"{g!r} is not a generator of the source", sp)
        if g in seen:
            raise _err(DslNameError, f"duplicate image for {g!r}", sp)
        seen.add(g)
        _poly_degree(p, tgt_degs)


def _poly_degree(p: PolyExpr, degs):
    """Common degree of the terms (``None`` for zero); raises on mixed degrees."""
    deg = None
    for t in p.terms:
        if t.coeff == 0:
            continue
        n = 0
        for g, e in t.factors:
            if g not in degs:
                raise _err(DslNameError, f"unknown generator {g!r}", t.span)
            n += e * degs[g]
        if deg is None:
            deg = n
        elif n != deg:
            raise _err(DslDegreeError, f"polynomial is not homogeneous (degrees {deg} and {n})", p.span)
    return deg


def eval_poly(expr: PolyExpr, P) -> dict:
    """Evaluate a polynomial expression in a presentation (factors multiplied in order)."""
    out: dict = {}
    for t in expr.terms:
        term = {P.unit: scalar(t.coeff)}
        for g, e in t.factors:
            if g not in P.index:
                raise _err(DslNameError, f"unknown generator {g!r} in {P.name}", t.span)
            if P.degrees[P.index[g]] % 2 and e > 1:
                term = {}
                break
            term = P.multiply(term, {P.gen(g, e): ONE})
        vadd(out, term)
    return out


def parse_poly(text: str, P) -> dict:
    expr = parse_poly_expr(text)
    _poly_degree(expr, dict(zip(P.gen_names, P.degrees)))
    return eval_poly(expr, P)


@dataclass
class Elaborated:
    algebras: dict
    maps: dict
    actions: dict


def elaborate(sf: SourceFile) -> Elaborated:
    """Turn declarations into presentations, morphisms and group actions."""
    from rht.gca import CdgaMorphism, GroupAction, Presentation

    algebras: dict = {}
    maps: dict = {}
    actions: dict = {}
    for d in sf.decls:
        if isinstance(d, AlgebraDecl):
            base = algebras[d.base] if d.base else None
            gens = (list(zip(base.gen_names, base.degrees)) if base else []) + list(d.gens)
            shell = Presentation(d.name, gens, base=None)
            diff = {}
            if base is not None:
                for i, g in enumerate(base.gen_names):
                    diff[g] = {m + (0,) * (len(gens) - base.ngens): c for m, c in base.diff[i].items()}
            for g, p in d.diffs:
                diff[g] = eval_poly(p, shell)
            try:
                algebras[d.name] = Presentation(d.name, gens, diff, base=base)
            except ValidationError as e:
                raise _err(DslDegreeError, str(e), d.span) from None
        elif isinstance(d, MapDecl):
            S, T = algebras[d.source], algebras[d.target]
            images = {g: eval_poly(p, T) for g, p in d.images}
            for i in range(S.nbase):
                g = S.gen_names[i]
                if g not in images and g in T.index:
                    images[g] = {T.gen(g): ONE}
            missing = [g for g in S.gen_names if g not in images]
            if missing:
                raise _err(DslNameError, f"map {d.name} gives no image for {', '.join(missing)}", d.span)
            maps[d.name] = CdgaMorphism(S, T, images, name=d.name)
        elif isinstance(d, ActionDecl):
            P = algebras[d.algebra]
            autos = {}
            for a in d.autos:
                images = {g: eval_poly(p, P) for g, p in a.images}
                for g in P.gen_names:
                    images.setdefault(g, {P.gen(g): ONE})
                autos[a.name] = CdgaMorphism(P, P, images, name=a.name)
            actions[d.name] = GroupAction(d.name, P, autos, [list(w) for w in d.relations])
    return Elaborated(algebras, maps, actions)
