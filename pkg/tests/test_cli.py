import io

import pytest

from conftest import MELEX_SCALED, TELEX

from tasp.cli import main


@pytest.fixture
def telex_file(tmp_path):
    f = tmp_path / "telex.lp"
    f.write_text(TELEX)
    return str(f)


def _run(argv, stdin=None, monkeypatch=None):
    out = io.StringIO()
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(argv, out=out)
    return code, out.getvalue()


def test_solve_satisfiable(telex_file):
    code, out = _run(["solve", telex_file, "--semantics", "tel",
                      "-c", "n=2", "--printer", "temporal"])
    assert code == 10
    assert "SATISFIABLE" in out and "UNSATISFIABLE" not in out
    block = out[out.index("State 2:"):]
    assert "green(l1)" in block
    assert "Models : 1" in out


def test_solve_unsatisfiable(telex_file):
    code, out = _run(["solve", telex_file, "-c", "n=0"])
    assert code == 20
    assert "UNSATISFIABLE" in out
    assert "Models : 0" in out


def test_default_printer_tags_states(telex_file):
    code, out = _run(["solve", telex_file, "-c", "n=2"])
    assert code == 10
    assert "green(l1)@2" in out and "push(l1)@1" in out


def test_models_limit(telex_file):
    code, out = _run(["solve", telex_file, "-c", "n=3", "--models", "1"])
    assert code == 10
    assert out.count("Answer:") == 1
    assert "Models : 2" in out  # the footer still reports the total


def test_transform_prints_externals(telex_file):
    code, out = _run(["transform", telex_file])
    assert code == 0
    assert "#external push(l1)." in out


def test_reify_empty_input(monkeypatch):
    code, out = _run(["reify"], stdin="", monkeypatch=monkeypatch)
    assert code == 0
    assert out.strip() == ""


def test_reify_emits_facts(telex_file):
    code, out = _run(["reify", telex_file])
    assert code == 0
    assert "rule(disjunction(" in out and "output(" in out


def test_oracle_subcommand(telex_file):
    code, out = _run(["oracle", telex_file, "-c", "n=2"])
    assert code == 10
    assert "Models : 1" in out and "green(l1)" in out


def test_oracle_matches_solve(telex_file):
    _, solve_out = _run(["solve", telex_file, "-c", "n=2",
                         "--printer", "temporal"])
    _, oracle_out = _run(["oracle", telex_file, "-c", "n=2"])
    body = lambda s: [l for l in s.splitlines()
                      if l.startswith(("State", "  "))]
    assert body(solve_out) == body(oracle_out)


def test_mel_printer_includes_tau(tmp_path):
    f = tmp_path / "melex.lp"
    f.write_text(MELEX_SCALED)
    code, out = _run(["solve", str(f), "--semantics", "mel", "-c", "n=3",
                      "--max-time", "6", "--printer", "temporal",
                      "--models", "1"])
    assert code == 10
    assert "tau=0" in out


def test_usage_error_exit_1():
    assert main(["bogus"], out=io.StringIO()) == 1
    assert main(["solve", "-c", "broken"], out=io.StringIO()) == 1


def test_input_error_exit_65(tmp_path, monkeypatch):
    code, _ = _run(["solve", "-c", "n=0"], stdin="a :- b",
                   monkeypatch=monkeypatch)
    assert code == 65
    assert main(["solve", str(tmp_path / "missing.lp")],
                out=io.StringIO()) == 65


def test_stdin_input(monkeypatch):
    code, out = _run(["solve", "-c", "n=0"], stdin="a.\n",
                     monkeypatch=monkeypatch)
    assert code == 10
    assert "a@0" in out


def test_config_file(tmp_path, telex_file):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nsemantics = tel\nprinter = temporal\nn = 2\n")
    code, out = _run(["solve", telex_file, "--config", str(cfg)])
    assert code == 10
    assert "State 2:" in out


def test_config_does_not_override_flags(tmp_path, telex_file):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("printer = temporal\nn = 0\n")
    # explicit -c n=2 wins over the config constant? constants merge:
    # config adds n=0, flag adds n=2; the flag was given explicitly and
    # is applied last
    code, out = _run(["solve", telex_file, "-c", "n=2",
                      "--config", str(cfg)])
    assert code == 10


def test_grammar_file_flag(tmp_path):
    g = tmp_path / "extra.lp"
    g.write_text("#type weight { expressions: &w(unsafe number); }\n")
    f = tmp_path / "p.lp"
    f.write_text("a.\n")
    code, out = _run(["solve", str(f), "--grammar", str(g), "-c", "n=0"])
    assert code == 10
