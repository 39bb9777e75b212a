"""ASTs, parsing, printing and syntactic transforms for the two modal languages.

Two languages share one node algebra: the propositional modal language
(variables p0, p1, ... plus connectives and box/diamond) and the first-order
modal language over a relational signature, with named bound variables and
`#id` parameters denoting fixed individuals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    """Syntax error with a byte offset and the tokens that were expected."""

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = tuple(expected)


# ---------------------------------------------------------------------------
# Terms and nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Parameter:
    """A fixed individual, written #<id>.  Ids are ints or strings and are
    distinct from bound variables, so they survive world changes textually."""

    ident: Union[int, str]

    def __str__(self):
        return f"#{self.ident}"


Term = Union[Variable, Parameter]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Var:
    """Propositional variable p<index>."""

    index: int

    def __post_init__(self):
        if self.index < 0:
            raise FormulaError(f"negative variable index {self.index}")


@dataclass(frozen=True)
class Atom:
    rel: str
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Diamond:
    sub: "Formula"


@dataclass(frozen=True)
class Box:
    sub: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Top, Bot, Var, Atom, Eq, Not, And, Or, Implies, Iff,
                Diamond, Box, Exists, Forall]

TOP = Top()
BOT = Bot()

_BINARY = (And, Or, Implies, Iff)
_UNARY = (Not, Diamond, Box)
_QUANT = (Exists, Forall)


def children(phi):
    if isinstance(phi, _BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, _UNARY):
        return (phi.sub,)
    if isinstance(phi, _QUANT):
        return (phi.body,)
    return ()


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    relations: tuple

    def __post_init__(self):
        rels = tuple((str(n), int(a)) for n, a in self.relations)
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            raise FormulaError(f"duplicate relation names in {names}")
        for n, a in rels:
            if a < 1:
                raise FormulaError(f"relation {n} has non-positive arity {a}")
        object.__setattr__(self, "relations", rels)

    def arity(self, name):
        for n, a in self.relations:
            if n == name:
                return a
        raise FormulaError(f"unknown relation {name!r}")

    def has(self, name):
        return any(n == name for n, _ in self.relations)


#: the set-theoretic signature: a single binary membership relation
SET_SIGNATURE = Signature((("mem", 2),))


# ---------------------------------------------------------------------------
# Structural queries
# ---------------------------------------------------------------------------

def subformulas(phi):
    """All distinct subtrees of phi, in deterministic postorder."""
    seen = []
    seen_set = set()

    def walk(f):
        for c in children(f):
            walk(c)
        if f not in seen_set:
            seen_set.add(f)
            seen.append(f)

    walk(phi)
    return tuple(seen)


def prop_variables(phi):
    """Sorted indices of the propositional variables occurring in phi."""
    return tuple(sorted({f.index for f in subformulas(phi) if isinstance(f, Var)}))


def free_variables(phi):
    """Free first-order variable names of phi."""
    if isinstance(phi, Atom):
        return {t.name for t in phi.terms if isinstance(t, Variable)}
    if isinstance(phi, Eq):
        return {t.name for t in (phi.left, phi.right) if isinstance(t, Variable)}
    if isinstance(phi, _QUANT):
        return free_variables(phi.body) - {phi.var}
    out = set()
    for c in children(phi):
        out |= free_variables(c)
    return out


def parameters(phi):
    """All parameter ids occurring in phi."""
    out = set()
    for f in subformulas(phi):
        if isinstance(f, Atom):
            out |= {t.ident for t in f.terms if isinstance(t, Parameter)}
        elif isinstance(f, Eq):
            out |= {t.ident for t in (f.left, f.right) if isinstance(t, Parameter)}
    return out


def is_propositional(phi):
    return all(isinstance(f, (Top, Bot, Var) + _BINARY + _UNARY)
               for f in subformulas(phi))


def is_modal_free(phi):
    return not any(isinstance(f, (Diamond, Box)) for f in subformulas(phi))


def quantifier_depth(phi):
    if isinstance(phi, _QUANT):
        return 1 + quantifier_depth(phi.body)
    if children(phi):
        return max(quantifier_depth(c) for c in children(phi))
    return 0


def validate_fo(phi, sig):
    """Check that phi is a first-order modal formula over sig."""
    for f in subformulas(phi):
        if isinstance(f, Var):
            raise FormulaError("propositional variable in a first-order formula")
        if isinstance(f, Atom):
            if not sig.has(f.rel):
                raise FormulaError(f"unknown relation {f.rel!r}")
            if len(f.terms) != sig.arity(f.rel):
                raise FormulaError(
                    f"relation {f.rel!r} expects {sig.arity(f.rel)} arguments, "
                    f"got {len(f.terms)}")
    return phi


# ---------------------------------------------------------------------------
# Substitution of first-order sentences for propositional variables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Substitution:
    """Map from propositional variable index to a first-order sentence."""

    mapping: tuple

    def __post_init__(self):
        items = tuple(sorted((int(k), v) for k, v in dict(self.mapping).items()))
        for k, v in items:
            fv = free_variables(v)
            if fv:
                raise FormulaError(
                    f"substitution for p{k} has free variables {sorted(fv)}")
        object.__setattr__(self, "mapping", items)

    def __getitem__(self, index):
        for k, v in self.mapping:
            if k == index:
                return v
        raise KeyError(index)

    def __contains__(self, index):
        return any(k == index for k, _ in self.mapping)


def substitute(phi, sigma):
    """Homomorphic replacement of each Var i by sigma[i]."""
    if isinstance(phi, Var):
        if phi.index not in sigma:
            raise FormulaError(f"no substitution for p{phi.index}")
        return sigma[phi.index]
    if isinstance(phi, (Top, Bot)):
        return phi
    if isinstance(phi, _BINARY):
        return type(phi)(substitute(phi.left, sigma), substitute(phi.right, sigma))
    if isinstance(phi, _UNARY):
        return type(phi)(substitute(phi.sub, sigma))
    raise FormulaError(f"substitute expects a propositional formula, got {phi}")


def potentialist_translation(phi):
    """Replace every exists-x with diamond-exists-x and every forall-x with
    box-forall-x; everything else is unchanged."""
    if isinstance(phi, (Diamond, Box)):
        raise FormulaError("modal operator already present")
    if isinstance(phi, Exists):
        return Diamond(Exists(phi.var, potentialist_translation(phi.body)))
    if isinstance(phi, Forall):
        return Box(Forall(phi.var, potentialist_translation(phi.body)))
    if isinstance(phi, _BINARY):
        return type(phi)(potentialist_translation(phi.left),
                         potentialist_translation(phi.right))
    if isinstance(phi, Not):
        return Not(potentialist_translation(phi.sub))
    return phi


def conj(parts):
    """Left-associated conjunction; Top for the empty list."""
    parts = list(parts)
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts):
    """Left-associated disjunction; Bot for the empty list."""
    parts = list(parts)
    if not parts:
        return BOT
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC_IFF, _PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_UNARY, _PREC_ATOM = range(6)


def _prec(phi):
    if isinstance(phi, Iff):
        return _PREC_IFF
    if isinstance(phi, Implies):
        return _PREC_IMPLIES
    if isinstance(phi, Or):
        return _PREC_OR
    if isinstance(phi, And):
        return _PREC_AND
    if isinstance(phi, _UNARY + _QUANT):
        return _PREC_UNARY
    return _PREC_ATOM


def _quantifier_tail(phi):
    # True when the printed form of phi ends in a quantifier body, which would
    # otherwise swallow following tokens (quantifier scope is maximal).
    while True:
        if isinstance(phi, _QUANT):
            return True
        if isinstance(phi, _UNARY):
            phi = phi.sub
        elif isinstance(phi, _BINARY):
            phi = phi.right
        else:
            return False


def _show(phi, level, guard_tail):
    wrap = _prec(phi) < level or (guard_tail and _quantifier_tail(phi))
    if isinstance(phi, Top):
        s = "true"
    elif isinstance(phi, Bot):
        s = "false"
    elif isinstance(phi, Var):
        s = f"p{phi.index}"
    elif isinstance(phi, Atom):
        s = f"{phi.rel}({', '.join(str(t) for t in phi.terms)})"
    elif isinstance(phi, Eq):
        s = f"{phi.left} = {phi.right}"
    elif isinstance(phi, Not):
        s = "~ " + _show(phi.sub, _PREC_UNARY, False)
    elif isinstance(phi, Diamond):
        s = "<> " + _show(phi.sub, _PREC_UNARY, False)
    elif isinstance(phi, Box):
        s = "[] " + _show(phi.sub, _PREC_UNARY, False)
    elif isinstance(phi, Exists):
        s = f"exists {phi.var} . " + _show(phi.body, _PREC_IFF, False)
    elif isinstance(phi, Forall):
        s = f"forall {phi.var} . " + _show(phi.body, _PREC_IFF, False)
    elif isinstance(phi, And):
        s = (_show(phi.left, _PREC_AND, True) + " & "
             + _show(phi.right, _PREC_AND + 1, guard_tail and not wrap))
    elif isinstance(phi, Or):
        s = (_show(phi.left, _PREC_OR, True) + " | "
             + _show(phi.right, _PREC_OR + 1, guard_tail and not wrap))
    elif isinstance(phi, Implies):
        s = (_show(phi.left, _PREC_IMPLIES + 1, True) + " -> "
             + _show(phi.right, _PREC_IMPLIES, guard_tail and not wrap))
    elif isinstance(phi, Iff):
        s = (_show(phi.left, _PREC_IFF + 1, True) + " <-> "
             + _show(phi.right, _PREC_IFF, guard_tail and not wrap))
    else:
        raise FormulaError(f"cannot print {phi!r}")
    return f"({s})" if wrap else s


def print_prop(phi):
    return _show(phi, _PREC_IFF, False)


def print_fo(phi):
    return _show(phi, _PREC_IFF, False)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<iff><->)
  | (?P<implies>->)
  | (?P<diamond><>)
  | (?P<box>\[\])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>\d+)
  | (?P<punct>[()~&|,.=#])
""", re.VERBOSE)

_KEYWORDS = {"true", "false", "exists", "forall"}


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append((m.lastgroup, m.group(), m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, sig=None):
        self.text = text
        self.sig = sig          # None means propositional mode
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text, what=None):
        kind, val, off = self.peek()
        if val != text:
            raise ParseError(f"expected {what or text!r}, found {val or 'end of input'!r}",
                             off, expected=(text,))
        return self.next()

    def fail(self, expected):
        kind, val, off = self.peek()
        raise ParseError(f"expected one of {sorted(expected)}, found {val or 'end of input'!r}",
                         off, expected=expected)

    # precedence: unary > & > | > -> (right) > <-> (right)
    def formula(self):
        left = self.implies()
        if self.peek()[1] == "<->":
            self.next()
            return Iff(left, self.formula())
        return left

    def implies(self):
        left = self.disjunct()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.implies())
        return left

    def disjunct(self):
        out = self.conjunct()
        while self.peek()[1] == "|":
            self.next()
            out = Or(out, self.conjunct())
        return out

    def conjunct(self):
        out = self.unary()
        while self.peek()[1] == "&":
            self.next()
            out = And(out, self.unary())
        return out

    def unary(self):
        kind, val, off = self.peek()
        if val == "~":
            self.next()
            return Not(self.unary())
        if val == "<>":
            self.next()
            return Diamond(self.unary())
        if val == "[]":
            self.next()
            return Box(self.unary())
        return self.primary()

    def primary(self):
        kind, val, off = self.peek()
        if val == "(":
            self.next()
            out = self.formula()
            self.expect(")")
            return out
        if val == "true":
            self.next()
            return TOP
        if val == "false":
            self.next()
            return BOT
        if self.sig is None:
            if kind == "ident" and re.fullmatch(r"p\d+", val):
                self.next()
                return Var(int(val[1:]))
            self.fail(("p<digits>", "true", "false", "(", "~", "<>", "[]"))
        # first-order primaries
        if val in ("exists", "forall"):
            self.next()
            vkind, vname, voff = self.next()
            if vkind != "ident" or vname in _KEYWORDS:
                raise ParseError(f"expected variable name, found {vname!r}", voff,
                                 expected=("<ident>",))
            self.expect(".")
            body = self.formula()
            return Exists(vname, body) if val == "exists" else Forall(vname, body)
        if kind == "ident" and self.tokens[self.pos + 1][1] == "(":
            return self.atom()
        if kind == "ident" or val == "#":
            left = self.term()
            self.expect("=", what="'=' (a bare term is not a formula)")
            right = self.term()
            return Eq(left, right)
        self.fail(("exists", "forall", "<relation>", "<term>", "true", "false", "("))

    def atom(self):
        kind, rel, off = self.next()
        if not self.sig.has(rel):
            raise ParseError(f"unknown relation {rel!r}", off, expected=("<relation>",))
        self.expect("(")
        terms = [self.term()]
        while self.peek()[1] == ",":
            self.next()
            terms.append(self.term())
        self.expect(")")
        arity = self.sig.arity(rel)
        if len(terms) != arity:
            raise ParseError(f"relation {rel!r} expects {arity} arguments, got {len(terms)}",
                             off)
        return Atom(rel, tuple(terms))

    def term(self):
        kind, val, off = self.peek()
        if val == "#":
            self.next()
            pkind, pval, poff = self.next()
            if pkind == "number":
                return Parameter(int(pval))
            if pkind == "ident":
                return Parameter(pval)
            raise ParseError("expected parameter id after '#'", poff,
                             expected=("<ident>", "<number>"))
        if kind == "ident" and val not in _KEYWORDS:
            self.next()
            return Variable(val)
        self.fail(("<ident>", "#"))

    def done(self):
        kind, val, off = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected trailing input {val!r}", off, expected=("eof",))


def parse_prop(text):
    """Parse a propositional modal formula."""
    p = _Parser(text, sig=None)
    out = p.formula()
    p.done()
    return out


def parse_fo(text, sig=SET_SIGNATURE):
    """Parse a first-order modal formula over the given signature."""
    p = _Parser(text, sig=sig)
    out = p.formula()
    p.done()
    return out


# ---------------------------------------------------------------------------
# Bounded sentence enumeration (used for translation sweeps and scheme pools)
# ---------------------------------------------------------------------------

def enumerate_formulas(sig, max_qdepth, max_size, free_vars=(), with_eq=True):
    """All modal-free formulas over sig with at most max_qdepth nested
    quantifiers and at most max_size AST nodes, using the given free
    variables.  Negations are not stacked and And/Or arguments are kept
    in canonical order, which prunes trivially equivalent duplicates.
    Yields in ascending node-count order.
    """
    var_names = []
    i = 0
    while len(var_names) < max_qdepth + 1:
        name = f"x{i}"
        if name not in free_vars:
            var_names.append(name)
        i += 1

    def atoms(vs):
        out = []
        for rel, arity in sig.relations:
            if not vs:
                continue
            def tuples(k):
                if k == 0:
                    yield ()
                    return
                for rest in tuples(k - 1):
                    for v in vs:
                        yield rest + (Variable(v),)
            for ts in tuples(arity):
                out.append(Atom(rel, ts))
        if with_eq:
            for a in vs:
                for b in vs:
                    if a < b:
                        out.append(Eq(Variable(a), Variable(b)))
        return out

    cache = {}

    def gen(qdepth, size, nvars):
        """Formulas with exactly `size` AST nodes."""
        key = (qdepth, size, nvars)
        if key in cache:
            return cache[key]
        vs = tuple(free_vars) + tuple(var_names[:nvars])
        out = []
        if size == 1:
            out.extend(atoms(vs))
        if size >= 2:
            for sub in gen(qdepth, size - 1, nvars):
                if not isinstance(sub, Not):
                    out.append(Not(sub))
            if qdepth >= 1 and nvars < len(var_names):
                nxt = var_names[nvars]
                for body in gen(qdepth - 1, size - 1, nvars + 1):
                    if nxt in free_variables(body):
                        out.append(Exists(nxt, body))
                        out.append(Forall(nxt, body))
        if size >= 3:
            for lsize in range(1, size - 1):
                for left in gen(qdepth, lsize, nvars):
                    for right in gen(qdepth, size - 1 - lsize, nvars):
                        out.append(Implies(left, right))
                        if repr(left) <= repr(right):
                            out.append(And(left, right))
                            out.append(Or(left, right))
        cache[key] = out
        return out

    seen = set()
    for size in range(1, max_size + 1):
        for phi in gen(max_qdepth, size, 0):
            if phi not in seen:
                seen.add(phi)
                yield phi


def enumerate_sentences(sig, max_qdepth, max_size, with_eq=True):
    """Closed formulas from enumerate_formulas."""
    for phi in enumerate_formulas(sig, max_qdepth, max_size, with_eq=with_eq):
        if not free_variables(phi):
            yield phi
