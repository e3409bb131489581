"""Non-ground transformations: safety analysis, ``#external`` injection,
and ``#show`` rewriting.

These passes run on a typed program and produce a standard program whose
grounding keeps nested theory expressions alive.  Body theory expressions
get protecting externals (kind 1); atoms nested in head expressions get
externals that put them into the instantiation domain (kind 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Set, Tuple

from .grammar import TheoryGrammar
from .syntax import (
    Comparison, ConditionalLiteral, Constant, Disjunction, External,
    Function, HeadElement, Literal, Program, Rule, Show, TheoryExpression,
    Variable, expression_variables, literal_variables, payload_variables,
    term_variables,
)

#: Head marker predicate for rewritten ``#show t : C.`` directives.
SHOW_TERM_MARKER = "__show_term"


class UnsafeRuleError(Exception):
    def __init__(self, rule, variables):
        loc = "%d:%d" % rule.location if rule.location else "?"
        super().__init__(
            "unsafe rule at %s: variables %s not bound by safe body atoms"
            % (loc, ", ".join(sorted(variables))))
        self.rule = rule
        self.variables = variables


@dataclass
class SafetyReport:
    safe_occurrences: Tuple  # atoms, in body order
    bound: Set[str]
    unsafe_variables: Set[str]

    @property
    def safe(self) -> bool:
        return not self.unsafe_variables


def _spec_for(expr: TheoryExpression, g: TheoryGrammar):
    tspec = g.types.get(expr.assigned_type)
    if tspec is None:
        return None
    for e in tspec.expressions:
        if e.operator == expr.operator and e.arity == len(expr.args):
            return e
    return None


def safe_atoms_in(expr, g: TheoryGrammar):
    """Atoms reachable from expr through safe-declared argument positions."""
    if isinstance(expr, (Constant, Function)):
        yield expr
        return
    if not isinstance(expr, TheoryExpression):
        return
    spec = _spec_for(expr, g)
    if spec is None:
        return
    for arg, safety in zip(expr.args, spec.arg_safety):
        if safety == "safe":
            yield from safe_atoms_in(arg, g)


def all_atoms_in(expr):
    """Every atom nested anywhere in an expression."""
    if isinstance(expr, (Constant, Function)):
        yield expr
        return
    if isinstance(expr, TheoryExpression):
        for arg in expr.args:
            yield from all_atoms_in(arg)


def _bind_comparisons(body, bound: Set[str]):
    """Extend bound variables via positive ``V = expr`` literals."""
    changed = True
    while changed:
        changed = False
        for b in body:
            if isinstance(b, ConditionalLiteral) or not b.positive:
                continue
            p = b.payload
            if isinstance(p, Comparison) and p.op == "=":
                for var_side, other in ((p.left, p.right), (p.right, p.left)):
                    if (isinstance(var_side, Variable)
                            and var_side.name not in bound
                            and term_variables(other) <= bound):
                        bound.add(var_side.name)
                        changed = True


def classify_safety(rule: Rule, g: TheoryGrammar) -> SafetyReport:
    """Spot safe body atom occurrences and check all variables are bound.

    An occurrence is safe iff it is not under default negation and every
    argument position on the path from the body literal to the atom is
    declared safe in the grammar.
    """
    safe_occurrences: List = []
    for b in rule.body:
        if isinstance(b, ConditionalLiteral):
            continue  # conditionals have local scope; handled below
        if not b.positive or isinstance(b.payload, Comparison):
            continue
        safe_occurrences.extend(safe_atoms_in(b.payload, g))

    bound = set()
    for atom in safe_occurrences:
        bound |= expression_variables(atom)
    _bind_comparisons(rule.body, bound)

    # global variables: everything outside conditional elements
    global_vars: Set[str] = set()
    for el in rule.head.elements:
        if not el.condition:
            global_vars |= payload_variables(el.atom)
    for b in rule.body:
        if isinstance(b, ConditionalLiteral):
            continue
        global_vars |= literal_variables(b)

    unsafe = global_vars - bound

    # conditional elements: local variables must be bound by their condition
    def check_conditional(main_vars, condition):
        local_bound = set(bound)
        for c in condition:
            if c.positive and not isinstance(c.payload, Comparison):
                for atom in safe_atoms_in(c.payload, g):
                    local_bound |= expression_variables(atom)
        for missing in main_vars - local_bound:
            unsafe.add(missing)

    for el in rule.head.elements:
        if el.condition:
            check_conditional(payload_variables(el.atom), el.condition)
    for b in rule.body:
        if isinstance(b, ConditionalLiteral):
            check_conditional(literal_variables(b.literal), b.condition)

    return SafetyReport(tuple(safe_occurrences), bound, unsafe)


def _canonical(target, condition):
    """Key identifying an external up to variable renaming."""
    mapping = {}

    def rename(node):
        if isinstance(node, Variable):
            if node.name not in mapping:
                mapping[node.name] = "V%d" % len(mapping)
            return Variable(mapping[node.name])
        if isinstance(node, TheoryExpression):
            return TheoryExpression(node.operator,
                                    tuple(rename(a) for a in node.args))
        if isinstance(node, Function):
            return Function(node.name, tuple(rename(a) for a in node.args))
        return node

    return (rename(target),
            tuple(rename(c.payload) for c in condition))


def inject_externals(program: Program, g: TheoryGrammar) -> Program:
    """Add the two kinds of protective ``#external`` directives.

    Idempotent: externals already present (up to variable renaming) are
    not duplicated.  Raises UnsafeRuleError for unsafe rules.
    """
    seen = set()
    for s in program.statements:
        if isinstance(s, External):
            seen.add(_canonical(s.target, s.condition))

    new_externals: List[External] = []

    def add(target, condition):
        condition = tuple(Literal(True, a) for a in condition)
        key = _canonical(target, condition)
        if key in seen:
            return
        seen.add(key)
        new_externals.append(External(target, condition))

    for rule in program.rules:
        report = classify_safety(rule, g)
        if not report.safe:
            raise UnsafeRuleError(rule, report.unsafe_variables)
        base_condition = _dedupe(report.safe_occurrences)

        # kind 1: protect every theory expression occurring in the body
        for b in rule.body:
            lit = b.literal if isinstance(b, ConditionalLiteral) else b
            if isinstance(lit.payload, TheoryExpression):
                extra = _condition_atoms(b) if isinstance(b, ConditionalLiteral) else ()
                add(lit.payload, _dedupe(base_condition + extra))

        # kind 2: ground every atom inside a non-negated head expression
        for el in rule.head.elements:
            if not isinstance(el.atom, TheoryExpression):
                continue
            extra = tuple(
                a for c in el.condition if c.positive
                and not isinstance(c.payload, Comparison)
                for a in safe_atoms_in(c.payload, g))
            for atom in safe_atoms_in(el.atom, g):
                if isinstance(atom, TheoryExpression):
                    continue
                add(atom, _dedupe(base_condition + extra))

    return Program(program.statements + tuple(new_externals))


def _condition_atoms(b: ConditionalLiteral):
    return tuple(c.payload for c in b.condition
                 if c.positive and not isinstance(c.payload, Comparison))


def _dedupe(atoms):
    out = []
    for a in atoms:
        if a not in out:
            out.append(a)
    return tuple(out)


def rewrite_shows(program: Program):
    """Replace ``#show`` directives by internal marker rules.

    Returns (program', show_all).  Signature shows (``#show p/1.``) stay as
    directives; term shows become ``__show_term(t) :- C.`` marker rules from
    which reification derives show_term/2 facts.
    """
    statements: List = []
    show_all = True
    for s in program.statements:
        if not isinstance(s, Show):
            statements.append(s)
            continue
        show_all = False
        if s.signature is not None:
            statements.append(s)
        elif s.term is not None:
            marker = Function(SHOW_TERM_MARKER, (s.term,))
            statements.append(Rule(Disjunction((HeadElement(marker),)),
                                   tuple(s.condition), location=s.location))
        # bare "#show." just switches off show-all
    return Program(tuple(statements)), show_all


def transform_program(program: Program, g: TheoryGrammar):
    """Full non-ground pass: externals injected, shows rewritten.

    The input program must already be typed (see grammar.typecheck_program).
    Returns (program', show_all).
    """
    program = inject_externals(program, g)
    return rewrite_shows(program)
