import io
import subprocess
import sys

import pytest

from qrewrite import parse_term
from qrewrite.cli import (
    EXIT_FAIL, EXIT_LIMIT, EXIT_OK, EXIT_PARSE, fixture_path, main,
)
from qrewrite.session import SessionState
from qrewrite.rules import default_registry

ROW1 = ("apply(projector(V:alpha@a, V:alpha@a), "
        "timesV(1/sqrt2, plusV(V:beta@a, timesV(-1, V:gamma@a))))")


def run_cli(args, stdin_text=None):
    proc = subprocess.run(
        [sys.executable, "-m", "qrewrite.cli", *args],
        input=stdin_text, capture_output=True, text=True)
    return proc


class TestCheck:
    def test_well_sorted_term(self, tmp_path):
        f = tmp_path / "t.term"
        f.write_text(ROW1)
        proc = run_cli(["check", str(f)])
        assert proc.returncode == EXIT_OK
        assert proc.stdout.strip() == "vector[a]"

    def test_cross_space_ip(self):
        proc = run_cli(["check"], stdin_text="ip(V:x@a, V:y@b)")
        assert proc.returncode == EXIT_FAIL

    def test_empty_input(self):
        proc = run_cli(["check"], stdin_text="")
        assert proc.returncode == EXIT_PARSE


class TestNormalize:
    def test_teleport_fixture(self):
        proc = run_cli(["normalize", fixture_path("teleport.term")])
        assert proc.returncode == EXIT_OK
        assert "1/2" in proc.stdout

    def test_canonical_input_zero_steps(self, tmp_path):
        f = tmp_path / "t.term"
        f.write_text("V:v@a")
        proc = run_cli(["normalize", str(f)])
        assert proc.returncode == EXIT_OK
        assert proc.stdout.strip() == "V:v@a"
        assert "steps: 0" in proc.stderr

    def test_step_limit(self):
        proc = run_cli(["normalize", fixture_path("teleport.term"),
                        "--max-steps", "1"])
        assert proc.returncode == EXIT_LIMIT

    def test_step_limit_env_default(self):
        import os
        env = dict(os.environ, QREWRITE_MAX_STEPS="1")
        proc = subprocess.run(
            [sys.executable, "-m", "qrewrite.cli", "normalize",
             fixture_path("teleport.term")],
            capture_output=True, text=True, env=env)
        assert proc.returncode == EXIT_LIMIT
        # an explicit flag takes precedence over the environment
        proc2 = subprocess.run(
            [sys.executable, "-m", "qrewrite.cli", "normalize",
             fixture_path("teleport.term"), "--max-steps", "10000"],
            capture_output=True, text=True, env=env)
        assert proc2.returncode == EXIT_OK

    def test_dump_derivation_replays(self, tmp_path):
        out = tmp_path / "t.deriv"
        proc = run_cli(["normalize", fixture_path("teleport.term"),
                        "--dump-derivation", str(out)])
        assert proc.returncode == EXIT_OK
        proc2 = run_cli(["replay", str(out)])
        assert proc2.returncode == EXIT_OK


class TestReplay:
    def test_shipped_table1(self):
        proc = run_cli(["replay", fixture_path("table1.deriv")])
        assert proc.returncode == EXIT_OK
        assert "8 steps verified" in proc.stdout

    def test_tampered_position(self, tmp_path):
        src = open(fixture_path("table1.deriv")).read()
        bad = src.replace("step: expandRightApply fwd 2\n",
                          "step: expandRightApply fwd 1\n")
        f = tmp_path / "bad.deriv"
        f.write_text(bad)
        proc = run_cli(["replay", str(f)])
        assert proc.returncode == EXIT_FAIL
        assert "step 1" in proc.stderr

    def test_missing_expect_prints_final(self, tmp_path):
        src = open(fixture_path("table1.deriv")).read()
        lines = [l for l in src.splitlines() if not l.startswith("expect:")]
        f = tmp_path / "noexpect.deriv"
        f.write_text("\n".join(lines) + "\n")
        proc = run_cli(["replay", str(f)])
        assert proc.returncode == EXIT_OK
        assert proc.stdout.strip().startswith("timesV(timesS(1/sqrt2")


class TestSoundnessCommand:
    def test_small_run_all_pass(self):
        proc = run_cli(["soundness", "--trials", "5", "--seed", "1"])
        assert proc.returncode == EXIT_OK
        assert proc.stdout.count("pass") == 41

    def test_mutation_control_caught(self):
        proc = run_cli(["soundness", "--trials", "5", "--seed", "1",
                        "--mutate", "multiplyLeftIP"])
        assert proc.returncode == EXIT_OK
        assert "caught" in proc.stdout

    def test_fixed_seed_reproducible(self):
        a = run_cli(["soundness", "--trials", "5", "--seed", "2"])
        b = run_cli(["soundness", "--trials", "5", "--seed", "2"])
        assert a.stdout == b.stdout

    def test_json_report(self):
        import json
        proc = run_cli(["soundness", "--trials", "3", "--json",
                        "--mutate", "applyProjector"])
        doc = json.loads(proc.stdout)
        assert doc["ok"] and len(doc["rules"]) == 41
        assert doc["mutationControls"][0]["caught"]


class TestRulesCommand:
    def test_catalogue_lists_everything(self):
        proc = run_cli(["rules"])
        assert proc.returncode == EXIT_OK
        for rid in ("expandRightV", "tensor.apply", "user.cnot11"):
            assert rid in proc.stdout


class TestSession:
    def test_apply_undo_round_trip(self, registry):
        st = SessionState(parse_term(ROW1), registry)
        before = st.current
        st.apply_index(0)
        assert st.current != before
        assert st.undo()
        assert st.current == before
        assert not st.undo()

    def test_undo_stack_replays_to_current(self, registry):
        from qrewrite import replay
        st = SessionState(parse_term(ROW1), registry)
        st.apply_index(0)
        st.apply_index(1)
        st.run_normalize()
        assert replay(st.initial, st.steps, registry) == st.current

    def test_moves_version_bumps(self, registry):
        st = SessionState(parse_term(ROW1), registry)
        v0 = st.moves_version
        st.apply_index(0)
        assert st.moves_version == v0 + 1

    def test_normalize_on_canonical_is_zero_steps(self, registry):
        st = SessionState(parse_term("V:v@a"), registry)
        assert st.run_normalize() == 0

    def test_undo_reverts_a_whole_normalize(self, registry):
        st = SessionState(parse_term(ROW1), registry)
        st.apply_index(0)
        mid = st.current
        assert st.run_normalize() > 0
        assert st.undo()
        assert st.current == mid
        assert len(st.steps) == 1


class TestCustomRules:
    def test_rules_file_flag(self, tmp_path):
        rules = tmp_path / "extra.rules"
        rules.write_text(
            "user.flip: apply(O:f@?s, v@?s) -> timesV(-1, v@?s)  [atomic: s]\n")
        term = tmp_path / "t.term"
        term.write_text("apply(O:f@q, V:x@q)")
        proc = run_cli(["normalize", str(term), "--rules", str(rules)])
        assert proc.returncode == EXIT_OK
        assert proc.stdout.strip() == "timesV(-1, V:x@q)"

    def test_ill_formed_rule_file_fails_cleanly(self, tmp_path):
        rules = tmp_path / "bad.rules"
        rules.write_text("user.bad: v1@?s -> v2@?s\n")
        term = tmp_path / "t.term"
        term.write_text("V:x@q")
        proc = run_cli(["normalize", str(term), "--rules", str(rules)])
        assert proc.returncode == EXIT_FAIL
        assert "unbound variable" in proc.stderr
        assert "Traceback" not in proc.stderr


class TestRepl:
    def test_scripted_session(self, monkeypatch, capsys, tmp_path):
        save = tmp_path / "out.deriv"
        script = iter([
            f"load {ROW1}",
            "moves",
            "apply 0",
            "undo",
            "normalize",
            f"save {save}",
            "show canonical",
            "quit",
        ])
        monkeypatch.setattr("builtins.input", lambda _: next(script))
        assert main(["repl"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "sort: vector[a]" in out
        assert "multiplyRightApply fwd eps" in out
        assert "applyProjector" in out
        assert save.exists()

    def test_errors_do_not_kill_the_loop(self, monkeypatch, capsys):
        script = iter(["load zzz(", "moves", "quit"])
        monkeypatch.setattr("builtins.input", lambda _: next(script))
        assert main(["repl"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "error:" in out
        assert "no session" in out
