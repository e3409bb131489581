import pytest

from conftest import (DEL_ALTERNATION, MELEX_SCALED, TELEX, ground_pipeline,
                      solve_traces)

from tasp.meta import (MetaError, build, default_max_time, fl_close)
from tasp.reify import ReifiedDB, reify
from tasp.solver import solve
from tasp.syntax import Constant, Function


def test_empty_db_single_empty_model_per_horizon():
    for n in range(3):
        mp = build(ReifiedDB(), n)
        models = solve(mp.program)
        assert len(models) == 1
        from tasp.meta import extract_model
        states, tau = extract_model(mp, models[0].atoms)
        assert states == tuple(frozenset() for _ in range(n + 1))
        assert tau is None


def test_traffic_light_model_counts():
    assert len(solve_traces(TELEX, 0)) == 0
    assert len(solve_traces(TELEX, 1)) == 0
    assert len(solve_traces(TELEX, 2)) == 1
    assert len(solve_traces(TELEX, 3)) == 2


def test_traffic_light_trace():
    ((states, tau),) = solve_traces(TELEX, 2)
    assert tau is None
    assert [sorted(s) for s in states] == [
        ["light(l1)", "red(l1)"],
        ["light(l1)", "push(l1)", "red(l1)"],
        ["green(l1)", "light(l1)"],
    ]


def test_mel_tau_reported_and_bounded():
    models = solve_traces(MELEX_SCALED, 3, semantics="mel", max_time=6)
    assert models
    for states, tau in models:
        assert tau is not None and tau[0] == 0
        assert all(a < b for a, b in zip(tau, tau[1:]))
        assert tau[-1] <= 6


def test_mel_max_time_default():
    assert default_max_time(2) == 12


def test_mel_max_time_below_horizon_rejected():
    gp, show_all, _ = ground_pipeline(MELEX_SCALED, "mel")
    db = reify(gp, show_all)
    with pytest.raises(MetaError):
        build(db, 3, semantics="mel", max_time=2)


def test_negative_horizon_rejected():
    with pytest.raises(MetaError):
        build(ReifiedDB(), -1)


def test_unknown_semantics_rejected():
    with pytest.raises(MetaError):
        build(ReifiedDB(), 1, semantics="ctl")


def test_del_alternation_counts():
    assert len(solve_traces(DEL_ALTERNATION, 0, semantics="del")) == 4
    assert len(solve_traces(DEL_ALTERNATION, 1, semantics="del")) == 0
    assert len(solve_traces(DEL_ALTERNATION, 2, semantics="del")) == 16


# ---------------------------------------------------------------------------
# Fischer-Ladner closure


def _ev(path, f):
    return Function("eventually", (path, f))


def test_fl_close_star_unfolds_once():
    p = Constant("step")
    phi = _ev(Function("star", (p,)), Constant("f"))
    closure = set(fl_close([("del", phi)]).formulas)
    assert ("del", Constant("f")) in closure
    assert ("del", _ev(p, phi)) in closure


def test_fl_close_idempotent():
    phi = _ev(Function("seq", (Constant("step"),
                               Function("star", (Constant("step"),)))),
              Constant("f"))
    once = fl_close([("del", phi)])
    twice = fl_close(once.formulas)
    assert set(once.formulas) == set(twice.formulas)


def test_fl_close_monotone():
    phi = _ev(Constant("step"), Constant("f"))
    psi = _ev(Function("star", (Constant("step"),)), Constant("g"))
    small = set(fl_close([("del", phi)]).formulas)
    big = set(fl_close([("del", phi), ("del", psi)]).formulas)
    assert small <= big
