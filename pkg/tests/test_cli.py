import io
import re

import pytest

from flyqsim.cli import EXIT_DESYNC, EXIT_OK, EXIT_PARSE, RunConfig, main, run

FREDKIN_SWAP_INPUT = """\
rails 3
sep q0 delay=0ps
sep q1 delay=0ps
sep q2 delay=0ps empty
fredkin q0 q1 q2
set q0
set q1
set q2
"""

DESYNCED = """\
rails 2
sep q0 delay=0ps
sep q1 delay=0ps
segment q0 1um
cc q0 q1 chit=0.5rad
set q0
set q1
"""

COMPENSATED = DESYNCED.replace("sep q1 delay=0ps", "sep q1 delay=10ps")


def run_cli(netlist_text, tmp_path, **overrides):
    path = tmp_path / "circuit.fq"
    path.write_text(netlist_text)
    out = io.StringIO()
    config = RunConfig(input_path=str(path), **overrides)
    code = run(config, out=out)
    return code, out.getvalue()


def counts_from_machine(text):
    return {m.group(1): int(m.group(2))
            for m in re.finditer(r"^count (\d+) (\d+)$", text, re.M)}


def test_fredkin_swaps_target(tmp_path):
    code, text = run_cli(FREDKIN_SWAP_INPUT, tmp_path, shots=10_000, seed=42,
                         output_format="machine")
    assert code == EXIT_OK
    counts = counts_from_machine(text)
    # control and first target loaded: electron ends on the second target
    assert counts == {"101": 10_000}


def test_machine_output_byte_identical(tmp_path):
    _, first = run_cli(FREDKIN_SWAP_INPUT, tmp_path, shots=1000, seed=42,
                       output_format="machine")
    _, second = run_cli(FREDKIN_SWAP_INPUT, tmp_path, shots=1000, seed=42,
                        output_format="machine")
    assert first == second


def test_desynchronized_circuit_exits_3(tmp_path):
    code, text = run_cli(DESYNCED, tmp_path, shots=10)
    assert code == EXIT_DESYNC
    assert "coincidence violation" in text
    assert "cc q0 q1" in text


def test_compensating_delay_fixes_schedule(tmp_path):
    code, text = run_cli(COMPENSATED, tmp_path, shots=10,
                         output_format="machine")
    assert code == EXIT_OK
    assert "coincidence=ok" in text


def test_allow_desync_override(tmp_path):
    code, text = run_cli(DESYNCED, tmp_path, shots=10, allow_desync=True,
                         output_format="machine")
    assert code == EXIT_OK
    assert "coincidence=override" in text


def test_parse_error_exits_2(tmp_path):
    code, text = run_cli("rails 2\nbs q0 q0 lc=0.14um lt=0.28um\n", tmp_path)
    assert code == EXIT_PARSE
    assert "coupler rails must be distinct" in text
    assert ":2:" in text  # line number reported


def test_missing_file_exits_2(tmp_path):
    out = io.StringIO()
    code = run(RunConfig(input_path=str(tmp_path / "nope.fq")), out=out)
    assert code == EXIT_PARSE
    assert "cannot read" in out.getvalue()


def test_missing_source_exits_2(tmp_path):
    text = "rails 2\nsep q0 delay=0ps\ncc q0 q1 chit=0.5rad\n"
    code, output = run_cli(text, tmp_path)
    assert code == EXIT_PARSE
    assert "needs a source" in output


def test_human_and_machine_counts_agree(tmp_path):
    code, machine = run_cli(FREDKIN_SWAP_INPUT, tmp_path, shots=500, seed=7,
                            output_format="machine")
    assert code == EXIT_OK
    code, human = run_cli(FREDKIN_SWAP_INPUT, tmp_path, shots=500, seed=7,
                          output_format="human")
    assert code == EXIT_OK
    machine_counts = counts_from_machine(machine)
    human_counts = {m.group(1): int(m.group(2))
                    for m in re.finditer(r"^  (\d{3})\s+(\d+)\s", human, re.M)}
    assert human_counts == machine_counts


def test_logical_outcomes_reported(tmp_path):
    text = """\
rails 2
sep q0 delay=0ps
sep q1 delay=0ps empty
dualrail a q0 q1
hadamard q0 q1
set q0
set q1
"""
    code, out = run_cli(text, tmp_path, shots=2000, seed=3,
                        output_format="machine")
    assert code == EXIT_OK
    logical = {m.group(1): int(m.group(2))
               for m in re.finditer(r"^logical (\S+) (\d+)$", out, re.M)}
    assert set(logical) == {"0", "1"}
    assert sum(logical.values()) == 2000
    assert "leak_count=0" in out


def test_budget_lines_present(tmp_path):
    _, out = run_cli(FREDKIN_SWAP_INPUT, tmp_path, shots=10,
                     output_format="machine")
    assert "budget_feasible_gates=30" in out
    assert re.search(r"^budget_max_um=", out, re.M)


def test_main_entry_point(tmp_path, capsys):
    path = tmp_path / "c.fq"
    path.write_text(FREDKIN_SWAP_INPUT)
    code = main([str(path), "--shots", "50", "--seed", "1",
                 "--format", "machine"])
    assert code == EXIT_OK
    captured = capsys.readouterr()
    assert "count 101 50" in captured.out


def test_main_rejects_bad_config(tmp_path):
    path = tmp_path / "c.fq"
    path.write_text(FREDKIN_SWAP_INPUT)
    assert main([str(path), "--shots", "0"]) == EXIT_PARSE
    assert main([str(path), "--seed", "-5"]) == EXIT_PARSE


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(input_path="x", shots=0)
    with pytest.raises(ValueError):
        RunConfig(input_path="x", output_format="yaml")
    with pytest.raises(ValueError):
        RunConfig(input_path="x", window=0.0)
