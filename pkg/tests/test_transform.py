import pytest

from conftest import TELEX, WAIT

from tasp.grammar import builtin_grammar, typecheck_program
from tasp.parser import parse_program
from tasp.syntax import External, Show
from tasp.transform import UnsafeRuleError, transform_program


TEL = builtin_grammar("tel")


def _transformed(text, g=TEL):
    typed = typecheck_program(parse_program(text), g)
    return transform_program(typed, g)


def _lines(program):
    return {line.strip() for line in str(program).splitlines()}


def test_traffic_light_externals():
    prog, _ = _transformed(TELEX)
    lines = _lines(prog)
    assert "#external push(l1)." in lines
    assert "#external green(L) : push(L)." in lines
    assert "#external &initial." in lines


def test_wait_fixture_external():
    prog, _ = _transformed(WAIT)
    assert "#external &eventually(green(L)) : green(L)." in _lines(prog)


def test_rules_preserved_verbatim():
    prog, _ = _transformed(TELEX)
    lines = _lines(prog)
    assert "red(L) :- not green(L), light(L)." in lines
    assert "&next(&eventually(green(L))) :- push(L)." in lines


def test_no_duplicate_externals():
    # both rules force push(l1); only one declaration must appear
    text = TELEX + "&next(push(l1)) :- &final.\n"
    prog, _ = _transformed(text)
    decls = [str(e) for e in prog.directives(External)]
    assert len(decls) == len(set(decls))


def test_derived_atoms_not_external():
    prog, _ = _transformed(TELEX)
    decls = " ".join(str(e) for e in prog.directives(External))
    # red(L) and light(l1) have defining rules; they stay internal
    assert "external red" not in decls.replace("#", "")
    assert "light" not in decls


def test_show_all_default_and_signature_filtering():
    _, show_all = _transformed(TELEX)
    assert show_all
    typed = typecheck_program(parse_program(TELEX + "#show green/1.\n"), TEL)
    prog, show_all = transform_program(typed, TEL)
    assert not show_all


def test_conditional_show_becomes_marker_rule():
    typed = typecheck_program(
        parse_program("green(l1).\n#show state(L) : green(L).\n"), TEL)
    prog, show_all = transform_program(typed, TEL)
    assert not show_all
    assert any("state(L)" in str(r) and "green(L)" in str(r)
               for r in prog.rules)


def test_unsafe_rule_rejected():
    # head variable never bound by a positive body atom
    with pytest.raises(UnsafeRuleError):
        _transformed("p(X) :- not q(X).")


def test_safe_argument_binds_variable():
    # a safe operator argument provides the instantiation domain itself
    prog, _ = _transformed("a :- &eventually(p(X)).")
    assert "#external &eventually(p(X)) : p(X)." in _lines(prog)


def test_unsafe_operator_argument_rejected():
    # &not's argument is unsafe and cannot bind X
    with pytest.raises(UnsafeRuleError):
        _transformed("a :- &not(p(X)).")


def test_negated_expression_declared_external():
    prog, _ = _transformed("a :- not &next(b), b.")
    assert any("&next(b)" in str(e) for e in prog.directives(External))
