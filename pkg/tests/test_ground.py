import pytest

from tasp.grammar import builtin_grammar, typecheck_program
from tasp.ground import Grounder, GroundingError, expand_term
from tasp.parser import parse_program
from tasp.syntax import Constant, Function, Integer
from tasp.transform import transform_program


def _ground(text, constants=None, semantics=None):
    if semantics:
        g = builtin_grammar(semantics)
        typed = typecheck_program(parse_program(text), g)
        prog, _ = transform_program(typed, g)
        return Grounder(prog, constants or {}, g).ground()
    return Grounder(parse_program(text), constants or {}).ground()


def _atom_strs(gp):
    return {str(a) for a in gp.symbol_table}


def test_facts_collected():
    gp = _ground("a. b. c :- a.")
    assert {str(f) for f in gp.facts} == {"a", "b", "c"}
    assert gp.rules == []  # everything simplified away


def test_interval_facts_expand():
    gp = _ground("time(0..2).")
    assert {str(f) for f in gp.facts} == {"time(0)", "time(1)", "time(2)"}


def test_join_and_arithmetic():
    gp = _ground("p(1..2). q(X+1) :- p(X).")
    assert {"q(2)", "q(3)"} <= {str(f) for f in gp.facts}


def test_comparison_filters():
    gp = _ground("p(1..3). q(X) :- p(X), X < 3.")
    facts = {str(f) for f in gp.facts}
    assert "q(1)" in facts and "q(2)" in facts and "q(3)" not in facts


def test_assignment_comparison_binds():
    gp = _ground("p(X) :- X = 1..2.")
    assert {"p(1)", "p(2)"} <= {str(f) for f in gp.facts}


def test_constant_substitution():
    gp = _ground("p(n).", constants={"n": Integer(4)})
    assert {str(f) for f in gp.facts} == {"p(4)"}


def test_const_directive():
    gp = _ground("#const n = 3. p(n).")
    assert {str(f) for f in gp.facts} == {"p(3)"}


def test_negative_body_respected():
    gp = _ground("a. b :- not a.")
    assert "b" not in {str(f) for f in gp.facts}
    assert gp.rules == []  # rule killed: negated fact


def test_positive_fact_removed_from_body():
    gp = _ground("a. b :- a, not c. { c }.")
    (rule,) = [r for r in gp.rules if str(r.head[0]) == "b"]
    # "a" was simplified away; only the negated non-fact remains
    assert all(str(atom) != "a" for _, atom in rule.body)


def test_externals_exempt_from_simplification():
    gp = _ground("red(l1) :- not green(l1), light(l1).\n"
                 "#external green(l1).\n#external light(l1).")
    (rule,) = gp.rules
    assert len(rule.body) == 2  # neither external literal was removed
    assert {str(a) for a in gp.externals} == {"green(l1)", "light(l1)"}


def test_underivable_positive_body_kills_rule():
    gp = _ground("b :- a.")
    assert gp.rules == [] and not gp.facts


def test_choice_rule_grounds():
    gp = _ground("p(1..2). { q(X) } :- p(X).")
    kinds = {r.head_kind for r in gp.rules}
    assert kinds == {"choice"}
    assert len(gp.rules) == 2


def test_disjunctive_conditioned_head():
    gp = _ground("p(1..2). q(X) : p(X) :- r. { r }.")
    (rule,) = [r for r in gp.rules if r.head_kind == "disjunction"
               and len(r.head) == 2]
    assert {str(h) for h in rule.head} == {"q(1)", "q(2)"}


def test_expression_externals_instantiated_over_condition():
    gp = _ground("green(l1). wait(L) :- not &eventually(green(L)), green(L).",
                 semantics="tel")
    assert "&eventually(green(l1))" in {str(a) for a in gp.externals}


def test_expand_term_interval():
    assert [t.value for t in expand_term(
        parse_program("p(1..3).").rules[0].head.elements[0].atom.args[0], {})
    ] == [1, 2, 3]


def test_term_depth_bound():
    with pytest.raises(GroundingError):
        _ground("p(0). p(f(X)) :- p(X).")
