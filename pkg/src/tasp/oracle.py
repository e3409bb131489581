"""Brute-force reference semantics for temporal equilibrium models.

Everything here is deliberately independent of the transform/ground/meta/
solver pipeline: instantiation is naive (all substitutions over the
Herbrand constants), satisfaction is evaluated directly over trace pairs
in the logic of here-and-there, and equilibrium is checked by exhaustive
enumeration of smaller "here" traces.  Only the AST and parser are shared.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .syntax import (
    BinOp, Choice, Comparison, ConditionalLiteral, Constant, Disjunction,
    Function, Integer, Literal, Program, Rule, Supremum, TheoryExpression,
    UnaryMinus, Variable, walk_expression,
)


class OracleError(Exception):
    pass


#: Bound on candidate count (traces x tau assignments).
MAX_CANDIDATES = 1 << 24

HERE, THERE = 0, 1


@dataclass(frozen=True)
class Trace:
    states: tuple  # of frozenset of ground atoms
    tau: Optional[tuple] = None

    @property
    def horizon(self) -> int:
        return len(self.states) - 1


# ---------------------------------------------------------------------------
# Naive instantiation


def _subst(node, binding):
    if isinstance(node, Variable):
        if node.name not in binding:
            raise OracleError("unbound variable %s" % node.name)
        return binding[node.name]
    if isinstance(node, Function):
        return Function(node.name, tuple(_subst(a, binding) for a in node.args))
    if isinstance(node, TheoryExpression):
        return TheoryExpression(
            node.operator, tuple(_subst(a, binding) for a in node.args),
            assigned_type=node.assigned_type, memberships=node.memberships)
    if isinstance(node, BinOp):
        return BinOp(node.op, _subst(node.left, binding),
                     _subst(node.right, binding))
    if isinstance(node, UnaryMinus):
        return UnaryMinus(_subst(node.arg, binding))
    return node


def _arith(t):
    """Fold ground arithmetic; comparisons in instances must be decidable."""
    if isinstance(t, UnaryMinus):
        v = _arith(t.arg)
        if isinstance(v, Integer):
            return Integer(-v.value)
        raise OracleError("cannot negate %s" % (v,))
    if isinstance(t, BinOp):
        a, b = _arith(t.left), _arith(t.right)
        if isinstance(a, Integer) and isinstance(b, Integer):
            ops = {"+": lambda: a.value + b.value,
                   "-": lambda: a.value - b.value,
                   "*": lambda: a.value * b.value}
            if t.op in ops:
                return Integer(ops[t.op]())
        raise OracleError("unsupported arithmetic %s" % (t,))
    if isinstance(t, Function):
        return Function(t.name, tuple(_arith(a) for a in t.args))
    if isinstance(t, TheoryExpression):
        return TheoryExpression(
            t.operator, tuple(_arith(a) for a in t.args),
            assigned_type=t.assigned_type, memberships=t.memberships)
    return t


def _comparison_true(c: Comparison) -> bool:
    a, b = _arith(c.left), _arith(c.right)
    if isinstance(a, Integer) and isinstance(b, Integer):
        av, bv = a.value, b.value
    else:
        av, bv = str(a), str(b)
        if c.op not in ("=", "!="):
            raise OracleError("cannot order %s %s %s" % (a, c.op, b))
    return {"=": av == bv, "!=": av != bv, "<": av < bv,
            "<=": av <= bv, ">": av > bv, ">=": av >= bv}[c.op]


def _rule_variables(rule: Rule) -> List[str]:
    names: Dict[str, None] = {}

    def collect(node):
        for x in walk_expression(node):
            if isinstance(x, Variable):
                names[x.name] = None

    for el in rule.head.elements:
        collect(el.atom)
        for c in el.condition:
            raise OracleError("conditional heads unsupported by the oracle")
    for b in rule.body:
        if isinstance(b, ConditionalLiteral):
            raise OracleError("conditional literals unsupported by the oracle")
        if isinstance(b.payload, Comparison):
            collect(b.payload.left)
            collect(b.payload.right)
        else:
            collect(b.payload)
    return list(names)


def _herbrand_constants(program: Program) -> List:
    consts: Dict = {}

    def collect(node):
        if isinstance(node, TheoryExpression):
            if node.operator == "i":
                return  # interval bounds are not Herbrand constants
            for a in node.args:
                collect(a)
        elif isinstance(node, Function):
            for a in node.args:
                collect(a)
        elif isinstance(node, (BinOp,)):
            collect(node.left)
            collect(node.right)
        elif isinstance(node, UnaryMinus):
            collect(node.arg)
        elif isinstance(node, (Constant, Integer)):
            consts[node] = None

    for r in program.rules:
        for el in r.head.elements:
            collect(el.atom)
        for b in r.body:
            if isinstance(b, ConditionalLiteral):
                continue
            payload = b.payload
            if isinstance(payload, Comparison):
                collect(payload.left)
                collect(payload.right)
            else:
                collect(payload)
    return list(consts) or [Constant("c0")]


def instantiate(program: Program) -> List[Rule]:
    """All ground instances over the Herbrand constants; comparisons are
    evaluated away."""
    consts = _herbrand_constants(program)
    out = []
    for rule in program.rules:
        variables = _rule_variables(rule)
        for values in itertools.product(consts, repeat=len(variables)):
            binding = dict(zip(variables, values))
            body = []
            keep = True
            for b in rule.body:
                if isinstance(b.payload, Comparison):
                    c = Comparison(b.payload.op,
                                   _subst(b.payload.left, binding),
                                   _subst(b.payload.right, binding))
                    if _comparison_true(c) != b.positive:
                        keep = False
                        break
                    continue
                body.append(Literal(b.positive,
                                    _arith(_subst(b.payload, binding))))
            if not keep:
                continue
            head_elements = tuple(
                type(el)(_arith(_subst(el.atom, binding)))
                for el in rule.head.elements)
            out.append(Rule(type(rule.head)(head_elements), tuple(body)))
    # deduplicate, preserving order
    seen, rules = set(), []
    for r in out:
        if r not in seen:
            seen.add(r)
            rules.append(r)
    return rules


# ---------------------------------------------------------------------------
# Satisfaction over trace pairs (here-and-there)


class _Evaluator:
    """Satisfaction for a pair of traces (here ⊆ there) and a timing
    function; world HERE gives the logic-of-here-and-there valuation,
    world THERE the classical one."""

    def __init__(self, here, there, tau=None):
        self.worlds = (here, there)
        self.tau = tau
        self.n = len(there) - 1
        self._path_cache: Dict = {}

    # -- formulas -------------------------------------------------------------

    def sat(self, w: int, i: int, node) -> bool:
        if isinstance(node, (Constant, Function)) and not isinstance(
                node, TheoryExpression):
            if isinstance(node, Constant) and node.name == "true":
                return True
            return node in self.worlds[w][i]
        if not isinstance(node, TheoryExpression):
            raise OracleError("cannot evaluate %s" % (node,))
        op, args = node.operator, node.args
        if op == "true" and not args:
            return True
        if op == "initial" and not args:
            return i == 0
        if op == "final" and not args:
            return i == self.n
        if op == "not" and len(args) == 1:
            # negation checks the there world in both worlds
            return not self.sat(THERE, i, args[0])
        if op == "next" and len(args) == 1:
            return i < self.n and self.sat(w, i + 1, args[0])
        if op == "eventually" and len(args) == 1:
            return any(self.sat(w, j, args[0])
                       for j in range(i, self.n + 1))
        if op == "next" and len(args) == 2:
            lo, hi = self._interval(args[0])
            return (i < self.n and self.sat(w, i + 1, args[1])
                    and self._in_window(i, i + 1, lo, hi))
        if op == "eventually" and len(args) == 2 \
                and self._is_interval(args[0]):
            lo, hi = self._interval(args[0])
            return any(self.sat(w, j, args[1])
                       and self._in_window(i, j, lo, hi)
                       for j in range(i, self.n + 1))
        if op == "eventually" and len(args) == 2:
            rel = self.path(w, args[0])
            return any(self.sat(w, j, args[1])
                       for (s, j) in rel if s == i)
        if op == "always" and len(args) == 2:
            if w == HERE:
                return (all(self.sat(HERE, j, args[1])
                            for (s, j) in self.path(HERE, args[0]) if s == i)
                        and all(self.sat(THERE, j, args[1])
                                for (s, j) in self.path(THERE, args[0])
                                if s == i))
            return all(self.sat(THERE, j, args[1])
                       for (s, j) in self.path(THERE, args[0]) if s == i)
        raise OracleError("unknown operator &%s/%d" % (op, len(args)))

    def _is_interval(self, node) -> bool:
        return isinstance(node, TheoryExpression) and node.operator == "i" \
            and len(node.args) == 2

    def _interval(self, node) -> Tuple[int, Optional[int]]:
        if not self._is_interval(node):
            raise OracleError("expected interval, got %s" % (node,))
        lo, hi = node.args
        if not isinstance(lo, Integer):
            raise OracleError("bad interval bound %s" % (lo,))
        if isinstance(hi, Supremum):
            return lo.value, None
        if not isinstance(hi, Integer):
            raise OracleError("bad interval bound %s" % (hi,))
        return lo.value, hi.value

    def _in_window(self, i, j, lo, hi) -> bool:
        if self.tau is None:
            raise OracleError("metric operator without a timing function")
        d = self.tau[j] - self.tau[i]
        return d >= lo and (hi is None or d < hi)

    # -- paths ----------------------------------------------------------------

    def path(self, w: int, rho) -> FrozenSet[Tuple[int, int]]:
        key = (w, rho)
        if key in self._path_cache:
            return self._path_cache[key]
        rel = self._path(w, rho)
        self._path_cache[key] = rel
        return rel

    def _path(self, w: int, rho) -> FrozenSet[Tuple[int, int]]:
        if isinstance(rho, (Constant, Function)) and not isinstance(
                rho, TheoryExpression):
            # atom shorthand: a ≡ (a? ; step)
            test = frozenset((i, i) for i in range(self.n + 1)
                             if self.sat(w, i, rho))
            step = frozenset((i, i + 1) for i in range(self.n))
            return self._compose(test, step)
        if not isinstance(rho, TheoryExpression):
            raise OracleError("bad path expression %s" % (rho,))
        op, args = rho.operator, rho.args
        if op == "step" and not args:
            return frozenset((i, i + 1) for i in range(self.n))
        if op == "test" and len(args) == 1:
            return frozenset((i, i) for i in range(self.n + 1)
                             if self.sat(w, i, args[0]))
        if op == "seq" and len(args) == 2:
            return self._compose(self._path(w, args[0]),
                                 self._path(w, args[1]))
        if op == "choice" and len(args) == 2:
            return self._path(w, args[0]) | self._path(w, args[1])
        if op == "star" and len(args) == 1:
            base = self._path(w, args[0])
            rel = set((i, i) for i in range(self.n + 1))
            grew = True
            while grew:
                grew = False
                for (a, b) in list(rel):
                    for (c, d) in base:
                        if c == b and (a, d) not in rel:
                            rel.add((a, d))
                            grew = True
            return frozenset(rel)
        raise OracleError("unknown path operator &%s/%d" % (op, len(args)))

    @staticmethod
    def _compose(r1, r2) -> FrozenSet[Tuple[int, int]]:
        return frozenset((a, d) for (a, b) in r1 for (c, d) in r2 if b == c)

    # -- rules ----------------------------------------------------------------

    def sat_literal(self, w: int, i: int, lit: Literal) -> bool:
        if lit.positive:
            return self.sat(w, i, lit.payload)
        return not self.sat(THERE, i, lit.payload)

    def _implication(self, w: int, i: int, rule: Rule) -> bool:
        if not all(self.sat_literal(w, i, b) for b in rule.body):
            return True
        if isinstance(rule.head, Choice):
            return all(
                self.sat(w, i, el.atom) or not self.sat(THERE, i, el.atom)
                for el in rule.head.elements)
        return any(self.sat(w, i, el.atom) for el in rule.head.elements)

    def sat_rule(self, w: int, i: int, rule: Rule) -> bool:
        if w == HERE:
            return (self._implication(HERE, i, rule)
                    and self._implication(THERE, i, rule))
        return self._implication(THERE, i, rule)

    def sat_program(self, w: int, rules) -> bool:
        return all(self.sat_rule(w, i, r)
                   for r in rules for i in range(self.n + 1))


# ---------------------------------------------------------------------------
# Public evaluation API


def eval_formula(trace: Trace, t: int, formula) -> bool:
    """Classical satisfaction of a formula at state t of a trace."""
    ev = _Evaluator(trace.states, trace.states, trace.tau)
    return ev.sat(THERE, t, formula)


def eval_path(trace: Trace, rho) -> FrozenSet[Tuple[int, int]]:
    """The accessibility relation of a path expression over a trace."""
    ev = _Evaluator(trace.states, trace.states, trace.tau)
    return ev.path(THERE, rho)


# ---------------------------------------------------------------------------
# Equilibrium model enumeration


def _is_fact(rule: Rule) -> bool:
    return (isinstance(rule.head, Disjunction)
            and len(rule.head.elements) == 1 and not rule.body
            and not isinstance(rule.head.elements[0].atom, TheoryExpression))


def _vocabulary(rules) -> List:
    vocab: Dict = {}

    def collect_atoms(node):
        if isinstance(node, TheoryExpression):
            if node.operator in ("i",):
                return
            for a in node.args:
                collect_atoms(a)
        elif isinstance(node, Function):
            vocab[node] = None
        elif isinstance(node, Constant) and node.name not in (
                "true", "initial", "final", "step"):
            vocab[node] = None

    for r in rules:
        for el in r.head.elements:
            collect_atoms(el.atom)
        for b in r.body:
            if not isinstance(b.payload, Comparison):
                collect_atoms(b.payload)
    return sorted(vocab, key=str)


def _uses_metric(rules) -> bool:
    for r in rules:
        nodes = [el.atom for el in r.head.elements] + [
            b.payload for b in r.body
            if not isinstance(b.payload, Comparison)]
        for node in nodes:
            for x in walk_expression(node):
                if isinstance(x, TheoryExpression) and x.operator == "i":
                    return True
    return False


def _tau_assignments(n: int, max_time: int):
    """All timing functions: tau(0)=0, strictly increasing, tau(n) <= M."""
    if n == 0:
        yield (0,)
        return
    def rec(prefix):
        if len(prefix) == n + 1:
            yield tuple(prefix)
            return
        for v in range(prefix[-1] + 1, max_time + 1):
            yield from rec(prefix + [v])
    yield from rec([0])


def _equilibrium(rules, there, tau, facts=frozenset()) -> bool:
    ev = _Evaluator(there, there, tau)
    if not ev.sat_program(THERE, rules):
        return False
    # no strictly smaller "here" trace may satisfy the program; atoms
    # forced by facts can never be dropped, so skip them
    slots = [(i, a) for i, state in enumerate(there)
             for a in sorted(state, key=str) if a not in facts]
    for r in range(1, len(slots) + 1):
        for dropped in itertools.combinations(slots, r):
            here = [set(s) for s in there]
            for i, a in dropped:
                here[i].discard(a)
            ev2 = _Evaluator([frozenset(s) for s in here], there, tau)
            if ev2.sat_program(HERE, rules):
                return False
    return True


def temporal_models(program: Program, n: int,
                    max_time: Optional[int] = None) -> List[Trace]:
    """All temporal equilibrium models of length n+1, by brute force."""
    rules = instantiate(program)
    vocab = _vocabulary(rules)
    facts = {r.head.elements[0].atom for r in rules if _is_fact(r)}
    free = [a for a in vocab if a not in facts]

    taus: List[Optional[tuple]]
    if _uses_metric(rules):
        if max_time is None:
            raise OracleError("metric program needs a max-time bound")
        taus = list(_tau_assignments(n, max_time))
    else:
        taus = [None]

    count = (2 ** (len(free) * (n + 1))) * max(len(taus), 1)
    if count > MAX_CANDIDATES:
        raise OracleError("state space too large: %d candidates" % count)

    models = []
    state_choices = list(itertools.chain.from_iterable(
        [itertools.combinations(free, k) for k in range(len(free) + 1)]))
    for states in itertools.product(state_choices, repeat=n + 1):
        there = [frozenset(set(s) | facts) for s in states]
        for tau in taus:
            if _equilibrium(rules, there, tau, facts):
                models.append(Trace(tuple(there), tau))
    return models
