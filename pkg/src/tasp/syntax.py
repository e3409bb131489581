"""AST for temporal logic programs with typed theory expressions.

All nodes are immutable; type annotations produced by the grammar module
are carried in compare-excluded fields so structural equality ignores them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Constant:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Integer:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class String:
    value: str

    def __str__(self):
        return '"%s"' % self.value.replace('\\', '\\\\').replace('"', '\\"')


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Function:
    name: str
    args: tuple

    def __str__(self):
        return "%s(%s)" % (self.name, ",".join(str(a) for a in self.args))


@dataclass(frozen=True)
class Supremum:
    def __str__(self):
        return "#sup"


@dataclass(frozen=True)
class Infimum:
    def __str__(self):
        return "#inf"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / \ ..
    left: "Term"
    right: "Term"

    def __str__(self):
        if self.op == "..":
            return "(%s..%s)" % (self.left, self.right)
        return "(%s%s%s)" % (self.left, self.op, self.right)


@dataclass(frozen=True)
class UnaryMinus:
    arg: "Term"

    def __str__(self):
        return "-%s" % self.arg


Term = Union[Constant, Integer, String, Variable, Function, Supremum,
             Infimum, BinOp, UnaryMinus]

SUP = Supremum()
INF = Infimum()

#: Atoms are plain terms: a constant (arity 0) or a function.
Atom = Union[Constant, Function]


def atom_signature(a: Atom) -> tuple:
    if isinstance(a, Function):
        return (a.name, len(a.args))
    return (a.name, 0)


# ---------------------------------------------------------------------------
# Theory expressions


@dataclass(frozen=True)
class TheoryExpression:
    """An ``&op(...)`` expression; args are terms or nested expressions."""

    operator: str
    args: tuple = ()
    assigned_type: Optional[str] = field(default=None, compare=False)
    #: All grammar types this node belongs to (subtype chain), most
    #: general first.  Filled by typecheck; empty until then.
    memberships: tuple = field(default=(), compare=False)

    def __str__(self):
        if not self.args:
            return "&%s" % self.operator
        return "&%s(%s)" % (self.operator, ",".join(str(a) for a in self.args))


#: Things that may stand where an atom stands.
AtomLike = Union[Constant, Function, TheoryExpression]


def is_expression(x) -> bool:
    return isinstance(x, TheoryExpression)


# ---------------------------------------------------------------------------
# Literals, rules, directives


@dataclass(frozen=True)
class Comparison:
    op: str  # = != < <= > >=
    left: Term
    right: Term

    def __str__(self):
        return "%s %s %s" % (self.left, self.op, self.right)


@dataclass(frozen=True)
class Literal:
    positive: bool
    payload: Union[Constant, Function, TheoryExpression, Comparison]

    def __str__(self):
        if self.positive:
            return str(self.payload)
        return "not %s" % self.payload


@dataclass(frozen=True)
class ConditionalLiteral:
    literal: Literal
    condition: tuple  # of Literal

    def __str__(self):
        cond = ", ".join(str(c) for c in self.condition)
        return "%s : %s" % (self.literal, cond) if cond else str(self.literal)


BodyElement = Union[Literal, ConditionalLiteral]


@dataclass(frozen=True)
class HeadElement:
    """One disjunct or choice element, optionally conditioned."""

    atom: AtomLike
    condition: tuple = ()  # of Literal

    def __str__(self):
        if self.condition:
            return "%s : %s" % (self.atom, ", ".join(str(c) for c in self.condition))
        return str(self.atom)


@dataclass(frozen=True)
class Disjunction:
    elements: tuple = ()  # of HeadElement; empty = integrity constraint

    def __str__(self):
        return "; ".join(str(e) for e in self.elements)


@dataclass(frozen=True)
class Choice:
    elements: tuple = ()  # of HeadElement

    def __str__(self):
        return "{ %s }" % "; ".join(str(e) for e in self.elements)


Head = Union[Disjunction, Choice]


@dataclass(frozen=True)
class Rule:
    head: Head
    body: tuple = ()  # of BodyElement
    location: Optional[tuple] = field(default=None, compare=False)  # (line, col)

    def __str__(self):
        head = str(self.head)
        if not self.body:
            return "%s." % head if head else ":- ."
        # conditional literals need ";" separators to stay unambiguous
        sep = "; " if any(isinstance(b, ConditionalLiteral)
                          for b in self.body) else ", "
        body = sep.join(str(b) for b in self.body)
        if head:
            return "%s :- %s." % (head, body)
        return ":- %s." % body

    @property
    def is_constraint(self) -> bool:
        return isinstance(self.head, Disjunction) and not self.head.elements


@dataclass(frozen=True)
class External:
    target: AtomLike
    condition: tuple = ()  # of Literal
    location: Optional[tuple] = field(default=None, compare=False)

    def __str__(self):
        if self.condition:
            return "#external %s : %s." % (
                self.target, ", ".join(str(c) for c in self.condition))
        return "#external %s." % self.target


@dataclass(frozen=True)
class Show:
    """``#show t : C.`` or the signature form ``#show p/k.``"""

    term: Optional[Term] = None
    condition: tuple = ()
    signature: Optional[tuple] = None  # (name, arity)
    location: Optional[tuple] = field(default=None, compare=False)

    def __str__(self):
        if self.signature is not None:
            return "#show %s/%d." % self.signature
        if self.condition:
            return "#show %s : %s." % (
                self.term, ", ".join(str(c) for c in self.condition))
        return "#show %s." % self.term


@dataclass(frozen=True)
class ConstDef:
    name: str
    value: Term
    location: Optional[tuple] = field(default=None, compare=False)

    def __str__(self):
        return "#const %s=%s." % (self.name, self.value)


@dataclass(frozen=True)
class TypeBlock:
    """Raw ``#type`` declaration, validated by the grammar module."""

    name: str
    subtypes: tuple = ()  # of str
    occurrence: Optional[str] = None
    expressions: tuple = ()  # of (operator, args) with args (safety, type)
    macros: tuple = ()  # of (pattern, expansion, where: tuple of (name, type))
    location: Optional[tuple] = field(default=None, compare=False)


Directive = Union[External, Show, ConstDef, TypeBlock]
Statement = Union[Rule, Directive]


@dataclass(frozen=True)
class Program:
    statements: tuple = ()

    @property
    def rules(self) -> tuple:
        return tuple(s for s in self.statements if isinstance(s, Rule))

    def directives(self, kind) -> tuple:
        return tuple(s for s in self.statements if isinstance(s, kind))

    def __str__(self):
        return "\n".join(str(s) for s in self.statements)


# ---------------------------------------------------------------------------
# Traversal helpers


def walk_terms(t):
    """Yield t and all its subterms (not descending into expressions)."""
    yield t
    if isinstance(t, Function):
        for a in t.args:
            yield from walk_terms(a)
    elif isinstance(t, BinOp):
        yield from walk_terms(t.left)
        yield from walk_terms(t.right)
    elif isinstance(t, UnaryMinus):
        yield from walk_terms(t.arg)


def walk_expression(e):
    """Yield e and every nested expression/term node, depth first."""
    yield e
    if isinstance(e, TheoryExpression):
        for a in e.args:
            yield from walk_expression(a)
    elif isinstance(e, (Function, BinOp, UnaryMinus)):
        yield from walk_terms(e)


def term_variables(t) -> set:
    return {x.name for x in walk_terms(t) if isinstance(x, Variable)}


def expression_variables(e) -> set:
    out = set()
    for node in walk_expression(e):
        if isinstance(node, Variable):
            out.add(node.name)
    return out


def payload_variables(p) -> set:
    if isinstance(p, Comparison):
        return term_variables(p.left) | term_variables(p.right)
    return expression_variables(p)


def literal_variables(lit: Literal) -> set:
    return payload_variables(lit.payload)


def format_expression(e) -> str:
    """Render an expression or term in surface syntax (round-trips)."""
    return str(e)
