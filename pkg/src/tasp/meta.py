"""Timed meta-encoding and the per-logic semantic layers.

The encodings live here as rule schemas in the toolkit's own surface
language; they are instantiated against the reified database (turned back
into facts) by the same grounder that handles user programs.  The result
is one propositional program whose stable models correspond to the
temporal equilibrium models of length n+1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .ground import GroundProgram, Grounder
from .parser import parse_program
from .reify import ReifiedDB
from .syntax import (
    Constant, Disjunction, Function, HeadElement, Integer, Program, Rule,
)


class MetaError(Exception):
    pass


# ---------------------------------------------------------------------------
# Rule schemas

#: Timed core: duplicates rule satisfaction over states 0..n.
CORE_SCHEMA = """\
time(0..n).

conjunction(B,T) :- literal_tuple(B), time(T),
    hold(L,T) : literal_tuple(B,L), L > 0;
    not hold(-L,T) : literal_tuple(B,L), L < 0.

body(normal(B),T) :- rule(_,normal(B)), conjunction(B,T), time(T).

hold(A,T) : atom_tuple(H,A) :-
    rule(disjunction(H),normal(B)), time(T), body(normal(B),T).

{ hold(A,T) : atom_tuple(H,A) } :-
    rule(choice(H),normal(B)), time(T), body(normal(B),T).
"""

#: Bridge between numeric hold/2 and symbolic true/2; the fact case
#: (empty literal tuple) derives true unconditionally.
BRIDGE_SCHEMA = """\
true(O,T) :- output(O,B), time(T), hold(L,T) : literal_tuple(B,L).

hold(L,T) :- external(O,B), literal_tuple(B,L), true(O,T), time(T).
"""

#: Connectives shared by every logic: &true, &initial, &not.
BASIC_SCHEMA = """\
true(true,T) :- formula(_,true), time(T).

true(initial,T) :- formula(_,initial), time(T), T = 0.
:- formula(_,initial), time(T), T > 0, true(initial,T).

true(not(F),T) :- formula(_,not(F)), time(T), not true(F,T).
:- formula(_,not(F)), time(T), true(not(F),T), true(F,T).
"""

#: Qualitative &next / &eventually (unary forms).
TEL_SCHEMA = """\
true(F,T+1) :- formula(_,next(F)), time(T), T < n, true(next(F),T).
true(next(F),T) :- formula(_,next(F)), time(T), T < n, true(F,T+1).
:- formula(_,next(F)), time(T), T >= n, true(next(F),T).

true(eventually(F),T) :-
    formula(_,eventually(F)), time(T), time(J), J >= T, true(F,J).
true(F,J) : time(J), J >= T :-
    formula(_,eventually(F)), time(T), true(eventually(F),T).
"""

#: Metric layer: timing function scaffolding plus interval operators.
MEL_SCHEMA = """\
delta(1..m).

{ tau_diff(T,D) : delta(D) } :- time(T), T > 0.
has_diff(T) :- time(T), T > 0, delta(D), tau_diff(T,D).
:- time(T), T > 0, not has_diff(T).
:- time(T), delta(D1), delta(D2), D1 < D2, tau_diff(T,D1), tau_diff(T,D2).

tau(0,0) :- time(0).
tau(T,V) :- time(T), T > 0, delta(D), tau_diff(T,D), tau(T-1,V2),
    V = V2+D, V <= m.
has_tau(T) :- time(T), tau(T,V).
:- time(T), not has_tau(T).

true(next(i(L,U),F),T) :- formula(mel,next(i(L,U),F)), time(T), T < n,
    true(F,T+1), delta(D), tau_diff(T+1,D), L <= D, D < U.
true(F,T+1) :- formula(mel,next(i(L,U),F)), time(T), T < n,
    true(next(i(L,U),F),T).
:- formula(mel,next(i(L,U),F)), time(T), T >= n, true(next(i(L,U),F),T).
:- formula(mel,next(i(L,U),F)), time(T), T < n, true(next(i(L,U),F),T),
    not true(F,T+1).
:- formula(mel,next(i(L,U),F)), time(T), T < n, true(next(i(L,U),F),T),
    delta(D), tau_diff(T+1,D), D < L.
:- formula(mel,next(i(L,U),F)), time(T), T < n, true(next(i(L,U),F),T),
    delta(D), tau_diff(T+1,D), D >= U.

true(eventually(i(L,U),F),T) :- formula(mel,eventually(i(L,U),F)),
    time(T), time(J), J >= T, true(F,J),
    tau(T,VT), tau(J,VJ), D = VJ-VT, L <= D, D < U.
wit(eventually(i(L,U),F),T,J) : time(J), J >= T :-
    formula(mel,eventually(i(L,U),F)), time(T),
    true(eventually(i(L,U),F),T).
true(F,J) :- wit(eventually(i(L,U),F),T,J).
:- wit(eventually(i(L,U),F),T,J), not true(F,J).
:- wit(eventually(i(L,U),F),T,J), tau(T,VT), tau(J,VJ), VJ-VT < L.
:- wit(eventually(i(L,U),F),T,J), tau(T,VT), tau(J,VJ), VJ-VT >= U.
"""

#: Path operators over the Fischer-Ladner closure (provided as facts).
DEL_SCHEMA = """\
true(eventually(step,F),T) :- formula(del,eventually(step,F)),
    time(T), T < n, true(F,T+1).
true(F,T+1) :- formula(del,eventually(step,F)),
    time(T), T < n, true(eventually(step,F),T).
:- formula(del,eventually(step,F)), time(T), T >= n,
    true(eventually(step,F),T).

true(eventually(test(G),F),T) :- formula(del,eventually(test(G),F)),
    time(T), true(G,T), true(F,T).
true(G,T) :- formula(del,eventually(test(G),F)), time(T),
    true(eventually(test(G),F),T).
true(F,T) :- formula(del,eventually(test(G),F)), time(T),
    true(eventually(test(G),F),T).

true(eventually(seq(P,Q),F),T) :- formula(del,eventually(seq(P,Q),F)),
    time(T), true(eventually(P,eventually(Q,F)),T).
true(eventually(P,eventually(Q,F)),T) :-
    formula(del,eventually(seq(P,Q),F)), time(T),
    true(eventually(seq(P,Q),F),T).

true(eventually(choice(P,Q),F),T) :- formula(del,eventually(choice(P,Q),F)),
    time(T), true(eventually(P,F),T).
true(eventually(choice(P,Q),F),T) :- formula(del,eventually(choice(P,Q),F)),
    time(T), true(eventually(Q,F),T).
true(eventually(P,F),T); true(eventually(Q,F),T) :-
    formula(del,eventually(choice(P,Q),F)), time(T),
    true(eventually(choice(P,Q),F),T).

true(eventually(star(P),F),T) :- formula(del,eventually(star(P),F)),
    time(T), true(F,T).
true(eventually(star(P),F),T) :- formula(del,eventually(star(P),F)),
    time(T), true(eventually(P,eventually(star(P),F)),T).
true(F,T); true(eventually(P,eventually(star(P),F)),T) :-
    formula(del,eventually(star(P),F)), time(T),
    true(eventually(star(P),F),T).

true(always(step,F),T) :- formula(del,always(step,F)), time(T), T >= n.
true(always(step,F),T) :- formula(del,always(step,F)), time(T), T < n,
    true(F,T+1).
true(F,T+1) :- formula(del,always(step,F)), time(T), T < n,
    true(always(step,F),T).

true(always(test(G),F),T) :- formula(del,always(test(G),F)), time(T),
    not true(G,T).
true(always(test(G),F),T) :- formula(del,always(test(G),F)), time(T),
    true(F,T).
true(F,T) :- formula(del,always(test(G),F)), time(T),
    true(always(test(G),F),T), true(G,T).

true(always(seq(P,Q),F),T) :- formula(del,always(seq(P,Q),F)), time(T),
    true(always(P,always(Q,F)),T).
true(always(P,always(Q,F)),T) :- formula(del,always(seq(P,Q),F)), time(T),
    true(always(seq(P,Q),F),T).

true(always(choice(P,Q),F),T) :- formula(del,always(choice(P,Q),F)),
    time(T), true(always(P,F),T), true(always(Q,F),T).
true(always(P,F),T) :- formula(del,always(choice(P,Q),F)), time(T),
    true(always(choice(P,Q),F),T).
true(always(Q,F),T) :- formula(del,always(choice(P,Q),F)), time(T),
    true(always(choice(P,Q),F),T).

true(always(star(P),F),T) :- formula(del,always(star(P),F)), time(T),
    true(F,T), true(always(P,always(star(P),F)),T).
true(F,T) :- formula(del,always(star(P),F)), time(T),
    true(always(star(P),F),T).
true(always(P,always(star(P),F)),T) :- formula(del,always(star(P),F)),
    time(T), true(always(star(P),F),T).
"""


# ---------------------------------------------------------------------------
# Fischer-Ladner closure


@dataclass
class FLClosure:
    formulas: Tuple = ()  # of (type, encoded term), insertion ordered

    def __contains__(self, item):
        return item in self.formulas


#: Safety bound on closure size; the closure of a finite set is finite.
MAX_CLOSURE = 100_000


def _shape(term):
    """(operator, args) for modal terms, else None."""
    if isinstance(term, Function) and term.name in ("eventually", "always") \
            and len(term.args) == 2:
        return term.name, term.args
    return None


def fl_close(formulas) -> FLClosure:
    """Least superset closed under one-step unfolding of path operators."""
    out: Dict = {}
    work: List = []

    def add(entry):
        if entry not in out:
            if len(out) > MAX_CLOSURE:
                raise MetaError("closure bound exceeded")
            out[entry] = None
            work.append(entry)

    for entry in formulas:
        add(tuple(entry))

    def modal(op, path, f):
        return Function(op, (path, f))

    while work:
        t, term = work.pop()
        shape = _shape(term)
        if shape is None:
            continue
        op, (path, f) = shape
        add((t, f))
        if isinstance(path, Function):
            if path.name == "test" and len(path.args) == 1:
                add((t, path.args[0]))
            elif path.name == "seq" and len(path.args) == 2:
                p, q = path.args
                add((t, modal(op, p, modal(op, q, f))))
            elif path.name == "choice" and len(path.args) == 2:
                p, q = path.args
                add((t, modal(op, p, f)))
                add((t, modal(op, q, f)))
            elif path.name == "star" and len(path.args) == 1:
                p = path.args[0]
                add((t, modal(op, p, modal(op, Function("star", (p,)), f))))
    return FLClosure(tuple(out))


# ---------------------------------------------------------------------------
# Schema instantiation


def _fact(name, args):
    head = Function(name, tuple(args)) if args else Constant(name)
    return Rule(Disjunction((HeadElement(head),)), ())


def db_facts(db: ReifiedDB, closure: Optional[FLClosure] = None) -> List[Rule]:
    """The reified database (and optionally its closure) as fact rules."""
    facts = []
    for kind, h, b in db.rules:
        facts.append(_fact("rule", (
            Function(kind, (Integer(h),)),
            Function("normal", (Integer(b),)))))
    for i, atoms in db.atom_tuples.items():
        facts.append(_fact("atom_tuple", (Integer(i),)))
        facts.extend(_fact("atom_tuple", (Integer(i), Integer(a)))
                     for a in atoms)
    for i, lits in db.literal_tuples.items():
        facts.append(_fact("literal_tuple", (Integer(i),)))
        facts.extend(_fact("literal_tuple", (Integer(i), Integer(l)))
                     for l in lits)
    for sym, b in db.outputs:
        facts.append(_fact("output", (sym, Integer(b))))
    seen_formulas = set()
    entries = closure.formulas if closure is not None else db.formulas
    for t, e in entries:
        if (t, e) not in seen_formulas:
            seen_formulas.add((t, e))
            facts.append(_fact("formula", (Constant(t), e)))
    for sym, b in db.externals:
        facts.append(_fact("external", (sym, Integer(b))))
    return facts


def _instantiate(schema_texts, extra_facts, constants) -> GroundProgram:
    statements = list(extra_facts)
    for text in schema_texts:
        statements.extend(parse_program(text).statements)
    return Grounder(Program(tuple(statements)), constants).ground()


def _check_outputs(db: ReifiedDB):
    for sym, b in db.outputs:
        lits = db.literal_tuples.get(b, ())
        if len(lits) > 1 or any(l < 0 for l in lits):
            raise MetaError(
                "output %s has a non-singleton literal tuple" % (sym,))


# ---------------------------------------------------------------------------
# Layer builders (spec-level operations)


def build_timed_core(db: ReifiedDB, n: int) -> GroundProgram:
    return _instantiate([CORE_SCHEMA], db_facts(db), {"n": Integer(n)})


def build_bridge(db: ReifiedDB, n: int) -> GroundProgram:
    _check_outputs(db)
    return _instantiate([CORE_SCHEMA, BRIDGE_SCHEMA], db_facts(db),
                        {"n": Integer(n)})


def build_tel_semantics(closure, n: int) -> GroundProgram:
    facts = [_fact("formula", (Constant(t), e)) for t, e in closure]
    return _instantiate(["time(0..n).", BASIC_SCHEMA, TEL_SCHEMA], facts,
                        {"n": Integer(n)})


def build_mel_semantics(closure, n: int, max_time: int) -> GroundProgram:
    if max_time < n:
        raise MetaError("max-time %d below horizon %d (infeasible timing)"
                        % (max_time, n))
    facts = [_fact("formula", (Constant(t), e)) for t, e in closure]
    return _instantiate(["time(0..n).", BASIC_SCHEMA, TEL_SCHEMA, MEL_SCHEMA],
                        facts, {"n": Integer(n), "m": Integer(max_time)})


def build_del_semantics(closure: FLClosure, n: int) -> GroundProgram:
    facts = [_fact("formula", (Constant(t), e)) for t, e in closure.formulas]
    return _instantiate(["time(0..n).", BASIC_SCHEMA, TEL_SCHEMA, DEL_SCHEMA],
                        facts, {"n": Integer(n)})


# ---------------------------------------------------------------------------
# Full assembly


@dataclass
class MetaProgram:
    program: GroundProgram
    db: ReifiedDB
    n: int
    semantics: str
    max_time: Optional[int] = None


def default_max_time(n: int) -> int:
    return 4 * (n + 1)


def build(db: ReifiedDB, n: int, semantics: str = "tel",
          max_time: Optional[int] = None) -> MetaProgram:
    """Assemble the complete propositional meta program for horizon n."""
    if n < 0:
        raise MetaError("horizon must be non-negative")
    if semantics not in ("tel", "mel", "del"):
        raise MetaError("unknown semantics %r" % semantics)
    _check_outputs(db)

    schemas = [CORE_SCHEMA, BRIDGE_SCHEMA, BASIC_SCHEMA, TEL_SCHEMA]
    constants = {"n": Integer(n)}
    closure = None
    if semantics == "mel":
        if max_time is None:
            max_time = default_max_time(n)
        if max_time < n:
            raise MetaError("max-time %d below horizon %d (infeasible timing)"
                            % (max_time, n))
        schemas.append(MEL_SCHEMA)
        constants["m"] = Integer(max_time)
    elif semantics == "del":
        closure = fl_close(db.formulas)
        schemas.append(DEL_SCHEMA)

    program = _instantiate(schemas, db_facts(db, closure), constants)
    return MetaProgram(program, db, n, semantics, max_time)


# ---------------------------------------------------------------------------
# Model extraction


def extract_model(meta: MetaProgram, atoms) -> Tuple[tuple, Optional[tuple]]:
    """Project a stable model of the meta program onto shown states.

    Returns (states, tau): states is a tuple of n+1 frozensets of rendered
    terms; tau maps each state to its time point for MEL, else None.
    """
    members = set(atoms) | set(meta.program.facts)
    states = [set() for _ in range(meta.n + 1)]
    for kind, term, b in meta.db.shows:
        for t in range(meta.n + 1):
            probe = Function("conjunction", (Integer(b), Integer(t)))
            if probe in members:
                states[t].add(str(term))
    tau = None
    if meta.semantics == "mel":
        tau = [None] * (meta.n + 1)
        for a in members:
            if isinstance(a, Function) and a.name == "tau" and len(a.args) == 2:
                t, v = a.args
                if isinstance(t, Integer) and 0 <= t.value <= meta.n \
                        and isinstance(v, Integer):
                    tau[t.value] = v.value
        tau = tuple(tau)
    return tuple(frozenset(s) for s in states), tau
