"""Bottom-up grounder with clingo-style simplifications.

Instantiates a transformed program over its Herbrand domain.  External
atoms and theory expressions are exempt from simplification; conditional
literals are expanded over domain predicates; arithmetic terms and
intervals are evaluated during instantiation.

The same engine instantiates the internal meta-encodings against
reified-fact databases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .syntax import (
    BinOp, Choice, Comparison, ConditionalLiteral, ConstDef, Constant,
    Disjunction, External, Function, HeadElement, Infimum, Integer, Literal,
    Program, Rule, Show, String, Supremum, TheoryExpression, UnaryMinus,
    Variable,
)

log = logging.getLogger(__name__)


class GroundingError(Exception):
    pass


#: Function nesting bound for invented values.
MAX_TERM_DEPTH = 16

#: Hard cap on derivable atoms, guards non-terminating value invention.
MAX_ATOMS = 1_000_000


# ---------------------------------------------------------------------------
# Term evaluation


def term_depth(t) -> int:
    if isinstance(t, Function):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    if isinstance(t, TheoryExpression):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    return 0


def _order_key(t):
    """Total order over ground terms: #inf < numbers < symbolic < #sup."""
    if isinstance(t, Infimum):
        return (0,)
    if isinstance(t, Integer):
        return (1, t.value)
    if isinstance(t, Constant):
        return (2, t.name, ())
    if isinstance(t, String):
        return (3, t.value)
    if isinstance(t, Function):
        return (4, t.name, len(t.args), tuple(_order_key(a) for a in t.args))
    if isinstance(t, TheoryExpression):
        return (5, t.operator, len(t.args), tuple(_order_key(a) for a in t.args))
    if isinstance(t, Supremum):
        return (6,)
    raise GroundingError("cannot order non-ground term %s" % (t,))


def compare_terms(op: str, a, b) -> bool:
    ka, kb = _order_key(a), _order_key(b)
    if op == "=":
        return ka == kb
    if op == "!=":
        return ka != kb
    if op == "<":
        return ka < kb
    if op == "<=":
        return ka <= kb
    if op == ">":
        return ka > kb
    if op == ">=":
        return ka >= kb
    raise GroundingError("unknown comparison %r" % op)


class DropInstance(Exception):
    """Raised when arithmetic makes a rule instance vacuous (e.g. x/0)."""


def eval_term(t, subst):
    """Substitute and fold arithmetic; returns a ground term.

    Intervals are not allowed here; use expand_term where they may occur.
    """
    if isinstance(t, Variable):
        if t.name not in subst:
            raise GroundingError("unbound variable %s" % t.name)
        return subst[t.name]
    if isinstance(t, Function):
        return Function(t.name, tuple(eval_term(a, subst) for a in t.args))
    if isinstance(t, TheoryExpression):
        return TheoryExpression(
            t.operator, tuple(eval_term(a, subst) for a in t.args),
            assigned_type=t.assigned_type, memberships=t.memberships)
    if isinstance(t, UnaryMinus):
        v = eval_term(t.arg, subst)
        if not isinstance(v, Integer):
            raise GroundingError("cannot negate %s" % (v,))
        return Integer(-v.value)
    if isinstance(t, BinOp):
        if t.op == "..":
            raise GroundingError("interval in non-expandable position")
        a = eval_term(t.left, subst)
        b = eval_term(t.right, subst)
        if not isinstance(a, Integer) or not isinstance(b, Integer):
            raise GroundingError("arithmetic on non-integers: %s %s %s" % (a, t.op, b))
        if t.op == "+":
            return Integer(a.value + b.value)
        if t.op == "-":
            return Integer(a.value - b.value)
        if t.op == "*":
            return Integer(a.value * b.value)
        if t.op in ("/", "\\"):
            if b.value == 0:
                log.warning("division by zero, dropping instance")
                raise DropInstance()
            if t.op == "/":
                return Integer(a.value // b.value)
            return Integer(a.value % b.value)
        raise GroundingError("unknown operator %r" % t.op)
    return t


def expand_term(t, subst) -> List:
    """Like eval_term but expands intervals into all their values."""
    if isinstance(t, BinOp) and t.op == "..":
        lo = eval_term(t.left, subst)
        hi = eval_term(t.right, subst)
        if not isinstance(lo, Integer) or not isinstance(hi, Integer):
            raise GroundingError("interval bounds must be integers")
        return [Integer(v) for v in range(lo.value, hi.value + 1)]
    if isinstance(t, Function):
        out = [()]
        for a in t.args:
            vals = expand_term(a, subst)
            out = [prefix + (v,) for prefix in out for v in vals]
        return [Function(t.name, args) for args in out]
    if isinstance(t, TheoryExpression):
        out = [()]
        for a in t.args:
            vals = expand_term(a, subst)
            out = [prefix + (v,) for prefix in out for v in vals]
        return [TheoryExpression(t.operator, args, assigned_type=t.assigned_type,
                                 memberships=t.memberships) for args in out]
    return [eval_term(t, subst)]


def term_is_bound(t, subst) -> bool:
    if isinstance(t, Variable):
        return t.name in subst
    if isinstance(t, (Function, TheoryExpression)):
        return all(term_is_bound(a, subst) for a in t.args)
    if isinstance(t, BinOp):
        return term_is_bound(t.left, subst) and term_is_bound(t.right, subst)
    if isinstance(t, UnaryMinus):
        return term_is_bound(t.arg, subst)
    return True


# ---------------------------------------------------------------------------
# Matching


def atom_key(a) -> tuple:
    if isinstance(a, TheoryExpression):
        return ("e", a.operator, len(a.args))
    if isinstance(a, Function):
        return ("a", a.name, len(a.args))
    if isinstance(a, Constant):
        return ("a", a.name, 0)
    raise GroundingError("not an atom: %s" % (a,))


def match(pattern, ground, subst) -> Optional[dict]:
    """Unify a (possibly partially bound) pattern against a ground atom."""
    if isinstance(pattern, Variable):
        bound = subst.get(pattern.name)
        if bound is None:
            out = dict(subst)
            out[pattern.name] = ground
            return out
        return subst if bound == ground else None
    if isinstance(pattern, (UnaryMinus, BinOp)):
        if not term_is_bound(pattern, subst):
            raise GroundingError(
                "arithmetic %s cannot be matched while unbound" % (pattern,))
        try:
            value = eval_term(pattern, subst)
        except DropInstance:
            return None
        return subst if value == ground else None
    if isinstance(pattern, Function):
        if not isinstance(ground, Function) or pattern.name != ground.name \
                or len(pattern.args) != len(ground.args):
            return None
        for p, g in zip(pattern.args, ground.args):
            subst = match(p, g, subst)
            if subst is None:
                return None
        return subst
    if isinstance(pattern, TheoryExpression):
        if not isinstance(ground, TheoryExpression) \
                or pattern.operator != ground.operator \
                or len(pattern.args) != len(ground.args):
            return None
        for p, g in zip(pattern.args, ground.args):
            subst = match(p, g, subst)
            if subst is None:
                return None
        return subst
    return subst if pattern == ground else None


# ---------------------------------------------------------------------------
# Ground program representation


@dataclass(frozen=True)
class GroundRule:
    head_kind: str  # "disjunction" or "choice"
    head: tuple     # ground atoms / expressions
    body: tuple     # of (positive: bool, atom)

    def __str__(self):
        head = "; ".join(str(h) for h in self.head)
        if self.head_kind == "choice":
            head = "{ %s }" % head
        body = "; ".join(("" if pos else "not ") + str(a) for pos, a in self.body)
        if not body:
            return "%s." % (head or ":- ")
        return "%s :- %s." % (head, body) if head else ":- %s." % body

    @property
    def is_fact(self) -> bool:
        return (self.head_kind == "disjunction" and len(self.head) == 1
                and not self.body)


@dataclass
class GroundProgram:
    rules: List[GroundRule] = field(default_factory=list)
    facts: Dict = field(default_factory=dict)      # ordered set of atoms
    externals: Dict = field(default_factory=dict)  # ordered set of atoms
    symbol_table: Dict = field(default_factory=dict)
    grammar: Optional[object] = None
    show_signatures: Tuple = ()
    show_all: bool = True

    def __str__(self):
        lines = ["%s." % f for f in self.facts]
        lines += [str(r) for r in self.rules]
        lines += ["#external %s." % e for e in self.externals]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Grounder


def _subst_constants(node, constants):
    """Replace defined constants inside argument positions."""
    if isinstance(node, Constant) and node.name in constants:
        return constants[node.name]
    if isinstance(node, Function):
        return Function(node.name,
                        tuple(_subst_constants(a, constants) for a in node.args))
    if isinstance(node, TheoryExpression):
        return TheoryExpression(
            node.operator,
            tuple(_subst_constants(a, constants) for a in node.args),
            assigned_type=node.assigned_type, memberships=node.memberships)
    if isinstance(node, BinOp):
        return BinOp(node.op, _subst_constants(node.left, constants),
                     _subst_constants(node.right, constants))
    if isinstance(node, UnaryMinus):
        return UnaryMinus(_subst_constants(node.arg, constants))
    return node


def _subst_atom_root(atom, constants):
    """Constants in predicate position are not substituted, arguments are."""
    if isinstance(atom, Function):
        return Function(atom.name,
                        tuple(_subst_constants(a, constants) for a in atom.args))
    if isinstance(atom, TheoryExpression):
        return TheoryExpression(
            atom.operator,
            tuple(_subst_constants(a, constants) for a in atom.args),
            assigned_type=atom.assigned_type, memberships=atom.memberships)
    return atom


class Grounder:
    def __init__(self, program: Program, constants: Optional[dict] = None,
                 grammar=None):
        consts = {}
        for d in program.directives(ConstDef):
            consts[d.name] = d.value
        if constants:
            for name, value in constants.items():
                consts[name] = value if not isinstance(value, int) else Integer(value)
        # resolve constant-to-constant references once
        for name in list(consts):
            consts[name] = _subst_constants(consts[name], consts)
        self.constants = consts
        self.rules = [self._subst_rule(r) for r in program.rules]
        self.externals = [
            External(_subst_atom_root(e.target, consts),
                     tuple(self._subst_literal(c) for c in e.condition))
            for e in program.directives(External)]
        self.show_signatures = tuple(
            s.signature for s in program.directives(Show)
            if s.signature is not None)
        self.grammar = grammar
        self.derivable: Dict = {}
        self._index: Dict[tuple, List] = {}

    # -- constant substitution ------------------------------------------------

    def _subst_rule(self, r: Rule) -> Rule:
        head_elems = tuple(
            HeadElement(_subst_atom_root(el.atom, self.constants),
                        tuple(self._subst_literal(c) for c in el.condition))
            for el in r.head.elements)
        body = []
        for b in r.body:
            if isinstance(b, ConditionalLiteral):
                body.append(ConditionalLiteral(
                    self._subst_literal(b.literal),
                    tuple(self._subst_literal(c) for c in b.condition)))
            else:
                body.append(self._subst_literal(b))
        return Rule(type(r.head)(head_elems), tuple(body), location=r.location)

    def _subst_literal(self, lit: Literal) -> Literal:
        p = lit.payload
        if isinstance(p, Comparison):
            p = Comparison(p.op, _subst_constants(p.left, self.constants),
                           _subst_constants(p.right, self.constants))
        else:
            p = _subst_atom_root(p, self.constants)
        return Literal(lit.positive, p)

    # -- derivable index -------------------------------------------------------

    def _add_derivable(self, atom) -> bool:
        if atom in self.derivable:
            return False
        if term_depth(atom) > MAX_TERM_DEPTH:
            raise GroundingError(
                "value-creation depth bound exceeded at %s" % (atom,))
        if len(self.derivable) > MAX_ATOMS:
            raise GroundingError("derivable-atom bound exceeded")
        self.derivable[atom] = None
        self._index.setdefault(atom_key(atom), []).append(atom)
        return True

    def _candidates(self, pattern):
        return self._index.get(atom_key(pattern), ())

    # -- body joins ------------------------------------------------------------

    def _solutions(self, body, subst) -> Iterator[dict]:
        """All substitutions satisfying the positive part of the body."""
        pending = list(body)
        return self._solve(pending, subst)

    def _solve(self, pending, subst) -> Iterator[dict]:
        if not pending:
            yield subst
            return
        # pick the first processable element
        for i, el in enumerate(pending):
            rest = pending[:i] + pending[i + 1:]
            if isinstance(el, ConditionalLiteral):
                # conditionals never bind outer variables; checked later
                yield from self._solve(rest, subst)
                return
            p = el.payload
            if isinstance(p, Comparison):
                handled = yield from self._try_comparison(el, rest, subst)
                if handled:
                    return
                continue
            if el.positive:
                ground_enough = term_is_bound(p, subst)
                if ground_enough:
                    try:
                        atom = eval_term(p, subst)
                    except DropInstance:
                        return
                    if atom in self.derivable:
                        yield from self._solve(rest, subst)
                    return
                for cand in list(self._candidates(p)):
                    s2 = match(p, cand, subst)
                    if s2 is not None:
                        yield from self._solve(rest, s2)
                return
            # negative literal: defer until bound, ignore for derivability
            if term_is_bound(p, subst):
                yield from self._solve(rest, subst)
                return
            continue
        raise GroundingError(
            "cannot instantiate body: unbound %s" %
            "; ".join(str(e) for e in pending))

    def _try_comparison(self, el, rest, subst):
        """Generator-returning helper; yields solutions, returns handled flag."""
        p = el.payload
        left_bound = term_is_bound(p.left, subst)
        right_bound = term_is_bound(p.right, subst)
        if el.positive and p.op == "=":
            if isinstance(p.left, Variable) and p.left.name not in subst and right_bound:
                for v in self._expand_safe(p.right, subst):
                    s2 = dict(subst)
                    s2[p.left.name] = v
                    yield from self._solve(rest, s2)
                return True
            if isinstance(p.right, Variable) and p.right.name not in subst and left_bound:
                for v in self._expand_safe(p.left, subst):
                    s2 = dict(subst)
                    s2[p.right.name] = v
                    yield from self._solve(rest, s2)
                return True
        if left_bound and right_bound:
            try:
                a = eval_term(p.left, subst)
                b = eval_term(p.right, subst)
            except DropInstance:
                return True
            if compare_terms(p.op, a, b) == el.positive:
                yield from self._solve(rest, subst)
            return True
        return False

    def _expand_safe(self, t, subst):
        try:
            return expand_term(t, subst)
        except DropInstance:
            return []

    # -- conditional expansion ---------------------------------------------------

    def expand_condition(self, condition, subst) -> List[dict]:
        """All extensions of subst satisfying a conditional's condition."""
        self._check_domain(condition)
        return list(self._solve(list(condition), subst))

    def _check_domain(self, condition):
        for c in condition:
            if isinstance(c.payload, Comparison):
                continue
            key = atom_key(c.payload)
            if key in self._non_domain:
                raise GroundingError(
                    "conditional literal condition over non-domain predicate "
                    "%s/%d" % (key[1], key[2]))

    def _compute_non_domain(self):
        """Predicates whose extension depends on choices or negation."""
        non_domain = set()
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                tainted = isinstance(r.head, Choice) or len(r.head.elements) > 1
                for b in r.body:
                    lit = b.literal if isinstance(b, ConditionalLiteral) else b
                    if isinstance(lit.payload, Comparison):
                        continue
                    if not lit.positive:
                        tainted = True
                    elif atom_key(lit.payload) in non_domain:
                        tainted = True
                if tainted:
                    for el in r.head.elements:
                        key = atom_key(el.atom)
                        if key not in non_domain:
                            non_domain.add(key)
                            changed = True
            for e in self.externals:
                key = atom_key(e.target)
                if key not in non_domain:
                    non_domain.add(key)
                    changed = True
        self._non_domain = non_domain

    # -- main fixpoint -------------------------------------------------------------

    def ground(self) -> GroundProgram:
        self._compute_non_domain()
        collected: List[Tuple[str, tuple, tuple]] = []
        external_atoms: Dict = {}
        while True:
            grew = False
            # external instances join the domain first
            for e in self.externals:
                for subst in self._solutions(
                        [c for c in e.condition], {}):
                    try:
                        targets = expand_term(e.target, subst)
                    except DropInstance:
                        continue
                    for target in targets:
                        if target not in external_atoms:
                            external_atoms[target] = None
                        grew |= self._add_derivable(target)
            collected = []
            for rule in self.rules:
                for subst in self._solutions(list(rule.body), {}):
                    for inst in self._build_instance(rule, subst):
                        collected.append(inst)
                        _, head, _ = inst
                        for h in head:
                            grew |= self._add_derivable(h)
            if not grew:
                break
        return self._finalize(collected, external_atoms)

    def _build_instance(self, rule, subst):
        """All ground instances of one rule under subst (head intervals
        expand conjunctively, i.e. into separate rules)."""
        try:
            body = self._ground_body(rule.body, subst)
            if body is None:
                return []
            heads = self._ground_head(rule.head, subst)
        except DropInstance:
            return []
        kind = "choice" if isinstance(rule.head, Choice) else "disjunction"
        return [(kind, head, tuple(body)) for head in heads]

    def _comparison_holds(self, cmp, positive, subst) -> bool:
        lv = self._expand_safe(cmp.left, subst)
        rv = self._expand_safe(cmp.right, subst)
        if not lv or not rv:
            return False
        if len(lv) == 1 and len(rv) == 1:
            return compare_terms(cmp.op, lv[0], rv[0]) == positive
        if cmp.op == "=":
            # interval assignment/membership, e.g. X = 1..N
            return bool(set(lv) & set(rv)) == positive
        raise GroundingError("interval with %r comparison" % cmp.op)

    def _ground_body(self, body, subst):
        out = []
        for b in body:
            if isinstance(b, ConditionalLiteral):
                for s2 in self.expand_condition(b.condition, subst):
                    lit = b.literal
                    if isinstance(lit.payload, Comparison):
                        if not self._comparison_holds(lit.payload, lit.positive, s2):
                            return None
                        continue
                    out.append((lit.positive, eval_term(lit.payload, s2)))
                continue
            if isinstance(b.payload, Comparison):
                if not self._comparison_holds(b.payload, b.positive, subst):
                    return None
                continue
            out.append((b.positive, eval_term(b.payload, subst)))
        return out

    def _ground_head(self, head, subst) -> List[tuple]:
        """Alternative heads: conditioned elements expand disjunctively,
        interval pooling in bare elements expands conjunctively."""
        alternatives: List[list] = [[]]
        for el in head.elements:
            if el.condition:
                atoms = []
                for s2 in self.expand_condition(el.condition, subst):
                    atoms.extend(expand_term(el.atom, s2))
                alternatives = [alt + atoms for alt in alternatives]
            else:
                values = expand_term(el.atom, subst)
                if len(values) == 1:
                    alternatives = [alt + values for alt in alternatives]
                else:
                    alternatives = [alt + [v]
                                    for alt in alternatives for v in values]
        out = []
        for alt in alternatives:
            deduped = []
            for a in alt:
                if a not in deduped:
                    deduped.append(a)
            out.append(tuple(deduped))
        return out

    # -- simplification -----------------------------------------------------------

    def _finalize(self, collected, external_atoms) -> GroundProgram:
        rules = []
        seen = set()
        for kind, head, body in collected:
            gr = GroundRule(kind, head, body)
            if gr not in seen:
                seen.add(gr)
                rules.append(gr)

        externals = dict(external_atoms)
        facts: Dict = {}
        while True:
            new_facts = {
                r.head[0]: None for r in rules
                if r.is_fact and r.head[0] not in externals}
            facts_changed = any(f not in facts for f in new_facts)
            facts.update(new_facts)
            derivable_now = dict(facts)
            for e in externals:
                derivable_now[e] = None
            for r in rules:
                for h in r.head:
                    derivable_now[h] = None

            simplified, dropped = [], False
            for r in rules:
                # head simplification: a disjunction holding a fact is
                # satisfied; fact atoms in a choice are vacuous elements
                head = r.head
                if head and not r.is_fact:
                    if r.head_kind == "disjunction":
                        if any(h in facts for h in head):
                            dropped = True
                            continue
                    else:
                        head = tuple(h for h in head if h not in facts)
                        if not head:
                            dropped = True
                            continue
                        if head != r.head:
                            dropped = True
                body, vacuous = [], False
                for pos, atom in r.body:
                    if atom in externals:
                        body.append((pos, atom))
                        continue
                    if pos:
                        if atom in facts:
                            dropped = True
                            continue
                        if atom not in derivable_now:
                            vacuous = True
                            break
                        body.append((pos, atom))
                    else:
                        if atom in facts:
                            vacuous = True
                            break
                        if atom not in derivable_now:
                            dropped = True
                            continue
                        body.append((pos, atom))
                if vacuous:
                    dropped = True
                    continue
                simplified.append(GroundRule(r.head_kind, head, tuple(body)))
            rules = simplified
            if not dropped and not facts_changed:
                break

        # facts leave the rule list; everything else stays
        final_rules = [r for r in rules if not (r.is_fact and r.head[0] in facts)]
        # deduplicate again: simplification may merge instances
        out_rules, seen = [], set()
        for r in final_rules:
            if r not in seen:
                seen.add(r)
                out_rules.append(r)

        symbol_table: Dict = {}
        for f in facts:
            symbol_table[f] = None
        for e in externals:
            symbol_table[e] = None
        for r in out_rules:
            for h in r.head:
                symbol_table[h] = None
            for _, a in r.body:
                symbol_table[a] = None

        return GroundProgram(
            rules=out_rules, facts=facts, externals=externals,
            symbol_table=symbol_table, grammar=self.grammar,
            show_signatures=self.show_signatures)


def ground(program: Program, constants: Optional[dict] = None,
           grammar=None) -> GroundProgram:
    """Instantiate a transformed program; see Grounder for the mechanics."""
    return Grounder(program, constants, grammar).ground()
