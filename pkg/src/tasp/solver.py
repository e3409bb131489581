"""Stable-model enumeration for ground programs.

Handles normal, disjunctive, and choice rules plus integrity constraints.
Choice rules are translated into pairs of even-loop rules over fresh
auxiliary atoms; enumeration is a DPLL search with worklist-driven unit
propagation over the rules-as-clauses and a counter-based possible-support
(unfounded-set) propagator; complete candidates pass a reduct-minimality
check (a secondary search, skipped when no rule has two candidate heads).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from .ground import GroundProgram


class SolverError(Exception):
    pass


CONFLICT = "conflict"

#: Default bound on propagation/branching steps.
DEFAULT_STEP_LIMIT = 10_000_000


@dataclass(frozen=True)
class Model:
    atoms: frozenset
    tau: Optional[tuple] = None


@dataclass
class _Translated:
    """Normal/disjunctive rules only: (heads, positive body, negative body),
    all as atom indices.  Choice rules are gadget-translated."""
    rules: List[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]]
    atoms: List  # index -> ground term (None for auxiliary atoms)
    index: Dict  # ground term -> index
    facts: Set[int]
    visible: int  # indices < visible are real atoms


def _translate(program: GroundProgram) -> _Translated:
    # deterministic atom order: facts and rule atoms by rendered form
    universe = {}
    for f in program.facts:
        universe[f] = None
    for r in program.rules:
        for h in r.head:
            universe[h] = None
        for _, a in r.body:
            universe[a] = None
    terms = sorted(universe, key=str)
    index = {t: i for i, t in enumerate(terms)}
    atoms: List = list(terms)
    visible = len(atoms)

    rules = []
    for f in program.facts:
        rules.append(((index[f],), (), ()))
    for r in program.rules:
        pos = tuple(index[a] for sign, a in r.body if sign)
        neg = tuple(index[a] for sign, a in r.body if not sign)
        if r.head_kind == "disjunction":
            rules.append((tuple(index[h] for h in r.head), pos, neg))
        else:
            for h in r.head:
                aux = len(atoms)
                atoms.append(None)
                hi = index[h]
                rules.append(((hi,), pos, neg + (aux,)))
                rules.append(((aux,), pos, neg + (hi,)))
    facts = {index[f] for f in program.facts}
    return _Translated(rules, atoms, index, facts, visible)


# ---------------------------------------------------------------------------
# Search


class _Search:
    def __init__(self, tr: _Translated, step_limit: int):
        self.tr = tr
        self.n = len(tr.atoms)
        self.step_limit = step_limit
        self.steps = 0
        # clause per rule: satisfied iff some head true, some positive
        # body atom false, or some negative body atom true
        self.clauses = [
            tuple(h + 1 for h in heads)
            + tuple(-(p + 1) for p in pos)
            + tuple(n + 1 for n in neg)
            for heads, pos, neg in tr.rules]
        # occurrence lists: for every atom, the clauses in which it
        # appears positively / negatively
        self.occ_pos: List[List[int]] = [[] for _ in range(self.n)]
        self.occ_neg: List[List[int]] = [[] for _ in range(self.n)]
        for ci, clause in enumerate(self.clauses):
            for lit in clause:
                (self.occ_pos if lit > 0 else self.occ_neg)[
                    abs(lit) - 1].append(ci)
        # rule-body occurrence lists for the support propagator
        self.body_occ: List[List[int]] = [[] for _ in range(self.n)]
        for ri, (heads, pos, neg) in enumerate(tr.rules):
            for p in set(pos):
                self.body_occ[p].append(ri)

    def _tick(self, amount=1):
        self.steps += amount
        if self.steps > self.step_limit:
            raise SolverError("step limit exceeded")

    # -- propagation ----------------------------------------------------------

    def propagate(self, assign: list, queue: Optional[List[int]] = None):
        """Unit propagation + possible-support closure; returns CONFLICT
        or None (assign updated in place).  When queue is given it must
        hold the freshly assigned atoms; otherwise all clauses are
        seeded."""
        if queue is None:
            pending = list(self.clauses_range)
        else:
            pending = []
            for a in queue:
                pending.extend(self.occ_neg[a] if assign[a]
                               else self.occ_pos[a])
        seen_pending = set(pending)
        while True:
            while pending:
                self._tick()
                ci = pending.pop()
                seen_pending.discard(ci)
                clause = self.clauses[ci]
                unassigned = None
                count = 0
                satisfied = False
                for lit in clause:
                    v = assign[abs(lit) - 1]
                    if v is None:
                        unassigned = lit
                        count += 1
                        if count > 1:
                            break
                    elif (v is True) == (lit > 0):
                        satisfied = True
                        break
                if satisfied or count > 1:
                    continue
                if count == 0:
                    return CONFLICT
                i = abs(unassigned) - 1
                value = unassigned > 0
                assign[i] = value
                for cj in (self.occ_neg[i] if value else self.occ_pos[i]):
                    if cj not in seen_pending:
                        seen_pending.add(cj)
                        pending.append(cj)
            # unit propagation quiesced: close under possible support
            newly_false = self._support_prune(assign)
            if newly_false is CONFLICT:
                return CONFLICT
            if not newly_false:
                return None
            for a in newly_false:
                for cj in self.occ_pos[a]:
                    if cj not in seen_pending:
                        seen_pending.add(cj)
                        pending.append(cj)

    @property
    def clauses_range(self):
        return range(len(self.clauses))

    def _possible(self, assign) -> Set[int]:
        """Atoms with a potential non-circular derivation under assign."""
        rules = self.tr.rules
        missing = [0] * len(rules)
        blocked = [False] * len(rules)
        possible: Set[int] = set()
        work: List[int] = []

        def fire(ri):
            for h in rules[ri][0]:
                if assign[h] is not False and h not in possible:
                    possible.add(h)
                    work.append(h)

        for ri, (heads, pos, neg) in enumerate(rules):
            self._tick()
            if any(assign[x] is True for x in neg) \
                    or any(assign[p] is False for p in pos):
                blocked[ri] = True
                continue
            need = len({p for p in pos})
            missing[ri] = need
            if need == 0:
                fire(ri)
        while work:
            self._tick()
            a = work.pop()
            for ri in self.body_occ[a]:
                if blocked[ri]:
                    continue
                missing[ri] -= 1
                if missing[ri] == 0:
                    fire(ri)
        return possible

    def _support_prune(self, assign):
        """Assign False to atoms without possible support; CONFLICT if a
        true atom lacks support; else the list of newly falsified atoms."""
        possible = self._possible(assign)
        newly_false = []
        for i in range(self.n):
            if i in possible:
                continue
            if assign[i] is True:
                return CONFLICT
            if assign[i] is None:
                assign[i] = False
                newly_false.append(i)
        return newly_false

    # -- stability ------------------------------------------------------------

    def check_stable(self, candidate: Set[int]) -> bool:
        """Candidate (a classical model) is stable iff it is a minimal
        model of its reduct; searched via a secondary DPLL over subsets.
        When no reduct rule retains two candidate heads the reduct is
        normal; support closure (already enforced) implies minimality."""
        reduct = []
        multi_head = False
        for heads, pos, neg in self.tr.rules:
            if any(x in candidate for x in neg):
                continue
            if any(p not in candidate for p in pos):
                # body can never hold inside a subset of the candidate
                continue
            heads_in = tuple(h for h in heads if h in candidate)
            if not heads_in:
                # pos ⊆ candidate and negs excluded: the body holds, so
                # the candidate violates this rule (or constraint)
                return False
            if len(heads_in) > 1:
                multi_head = True
            reduct.append((heads_in, pos))
        if not multi_head:
            return self._supported(reduct, candidate)

        order = sorted(candidate)
        pos_of = {a: k for k, a in enumerate(order)}
        clauses = []
        for heads_in, pos in reduct:
            clause = tuple(pos_of[h] + 1 for h in heads_in) \
                + tuple(-(pos_of[p] + 1) for p in pos)
            clauses.append(clause)
        if not order:
            return True
        # require a strictly smaller model: at least one atom false
        clauses.append(tuple(-(k + 1) for k in range(len(order))))
        return not self._sat(clauses, len(order))

    def _supported(self, reduct, candidate) -> bool:
        """Least-model check for a normal (single-head) reduct."""
        derived: Set[int] = set()
        changed = True
        while changed:
            changed = False
            self._tick()
            for heads_in, pos in reduct:
                if heads_in[0] not in derived and all(
                        p in derived for p in pos):
                    derived.add(heads_in[0])
                    changed = True
        return derived == set(candidate)

    def _sat(self, clauses, nvars) -> bool:
        assign: List[Optional[bool]] = [None] * nvars

        def unit(assign):
            changed = True
            while changed:
                changed = False
                self._tick()
                for clause in clauses:
                    unassigned = None
                    count = 0
                    satisfied = False
                    for lit in clause:
                        v = assign[abs(lit) - 1]
                        if v is None:
                            unassigned = lit
                            count += 1
                            if count > 1:
                                break
                        elif (v is True) == (lit > 0):
                            satisfied = True
                            break
                    if satisfied or count > 1:
                        continue
                    if count == 0:
                        return CONFLICT
                    assign[abs(unassigned) - 1] = unassigned > 0
                    changed = True
            return None

        def rec(assign):
            if unit(assign) is CONFLICT:
                return False
            try:
                i = assign.index(None)
            except ValueError:
                return True
            for value in (False, True):
                trial = list(assign)
                trial[i] = value
                if rec(trial):
                    return True
            return False

        return rec(assign)

    # -- enumeration ----------------------------------------------------------

    def models(self):
        assign: List[Optional[bool]] = [None] * self.n
        for f in self.tr.facts:
            assign[f] = True
        if self.propagate(assign) is CONFLICT:
            return
        yield from self._enumerate(assign)

    def _pick(self, assign):
        """Branch atom: prefer an unassigned literal of an unsatisfied
        clause (tried in its satisfying polarity first), which keeps the
        search directed at the remaining constraints."""
        for clause in self.clauses:
            unassigned = None
            satisfied = False
            for lit in clause:
                v = assign[abs(lit) - 1]
                if v is None:
                    if unassigned is None:
                        unassigned = lit
                elif (v is True) == (lit > 0):
                    satisfied = True
                    break
            if not satisfied and unassigned is not None:
                return abs(unassigned) - 1, unassigned > 0
        try:
            return assign.index(None), False
        except ValueError:
            return None, False

    def _enumerate(self, assign):
        i, first = self._pick(assign)
        if i is None:
            candidate = {k for k in range(self.n) if assign[k]}
            if self.check_stable(candidate):
                yield candidate
            return
        for value in (first, not first):
            trial = list(assign)
            trial[i] = value
            if self.propagate(trial, queue=[i]) is CONFLICT:
                continue
            yield from self._enumerate(trial)


# ---------------------------------------------------------------------------
# Public API


def solve(program: GroundProgram, limit: int = 0,
          step_limit: int = DEFAULT_STEP_LIMIT) -> List[Model]:
    """Enumerate stable models in a deterministic order.

    limit = 0 returns all models; otherwise at most `limit`.
    """
    tr = _translate(program)
    search = _Search(tr, step_limit)
    out = []
    for candidate in search.models():
        atoms = frozenset(
            tr.atoms[i] for i in candidate
            if i < tr.visible and tr.atoms[i] is not None)
        out.append(Model(atoms))
        if limit and len(out) >= limit:
            break
    return out


def check_stable(program: GroundProgram, candidate) -> bool:
    """True iff candidate (a set of ground atoms) is a stable model."""
    tr = _translate(program)
    search = _Search(tr, DEFAULT_STEP_LIMIT)
    if any(a not in tr.index for a in candidate):
        return False
    base = {tr.index[a] for a in candidate}
    # auxiliary choice atoms: value forced by the gadget given the base
    assign: List[Optional[bool]] = [None] * search.n
    for i in range(search.n):
        if i < tr.visible:
            assign[i] = i in base
    if search.propagate(assign) is CONFLICT:
        return False
    if any(v is None for v in assign):
        return False
    full = {i for i, v in enumerate(assign) if v}
    # candidate must match on the visible part
    if {i for i in full if i < tr.visible} != base:
        return False
    return search.check_stable(full)


def propagate(program: GroundProgram, assignment: Dict) -> object:
    """Extend a partial assignment {atom: bool}; returns the extended
    mapping or the string "conflict"."""
    tr = _translate(program)
    search = _Search(tr, DEFAULT_STEP_LIMIT)
    assign: List[Optional[bool]] = [None] * search.n
    for f in tr.facts:
        assign[f] = True
    for atom, value in assignment.items():
        if atom not in tr.index:
            if value:
                return CONFLICT
            continue
        i = tr.index[atom]
        if assign[i] is not None and assign[i] != bool(value):
            return CONFLICT
        assign[i] = bool(value)
    if search.propagate(assign) is CONFLICT:
        return CONFLICT
    return {tr.atoms[i]: v for i, v in enumerate(assign)
            if v is not None and i < tr.visible and tr.atoms[i] is not None}
