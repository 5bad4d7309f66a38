"""
cli/test_cli.py

End-to-end tests of the modalshift command line.

Tests verify:
1. run writes one result row (plus trace) and is repeatable
2. sweep output is identical for parallelism 1 and 2
3. optimize writes the front CSV and its convergence log
4. plot renders a front CSV
5. Errors exit 1 and leave no partial files

Run:
    pytest cli/test_cli.py -v
"""

import pytest

from cli.main import SweepCommand, build_parser, dispatch, main, to_command
from engine.indicators import RESULT_COLUMNS, TRACE_COLUMNS


@pytest.fixture
def short_config(tmp_path):
    path = tmp_path / "sim.conf"
    path.write_text("# short run\nrun.horizon = 30\nbehavioural.beta_c = 0.5\nbehavioural.beta_tau = 0.05\n")
    return path


def test_run_writes_row_and_trace(short_config, tmp_path):
    out, trace = tmp_path / "run.csv", tmp_path / "trace.csv"
    status = main(["run", "--config", str(short_config), "--seed", "3", "--out", str(out), "--trace", str(trace)])
    assert status == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(RESULT_COLUMNS)
    assert lines[1].startswith("3,0.5,0.05,5,2600,")
    trace_lines = trace.read_text().splitlines()
    assert trace_lines[0] == ",".join(TRACE_COLUMNS)
    assert len(trace_lines) == 31


def test_run_repeatable(short_config, tmp_path):
    outputs = []
    for i in range(3):
        out = tmp_path / f"run{i}.csv"
        assert main(["run", "--config", str(short_config), "--seed", "11", "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_sweep_parallelism_identical(short_config, tmp_path):
    spec = tmp_path / "grid.conf"
    spec.write_text(
        "sweep.beta_c_values = -1, 0, 1\nsweep.beta_tau_values = 0, 0.1\n"
        "sweep.capacity_values = 500\nsweep.interval_values = 5\nsweep.replications = 3\n"
    )
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", str(short_config), "--sweep", str(spec), "--parallelism", "1", "--out", str(a)]) == 0
    assert main(["sweep", "--config", str(short_config), "--sweep", str(spec), "--parallelism", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 7


def test_optimize_and_plot_front(short_config, tmp_path):
    opt = tmp_path / "opt.conf"
    opt.write_text("optimize.population = 4\noptimize.generations = 1\noptimize.replications = 1\n"
                   "optimize.convergence_log = true\n")
    out = tmp_path / "front.csv"
    assert main(["optimize", "--config", str(short_config), "--opt", str(opt), "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "beta_c,beta_tau,rer_congestion,other_congestion,rank,crowding"
    assert (tmp_path / "front_convergence.csv").exists()

    svg = tmp_path / "front.svg"
    assert main(["plot", "--input", str(out), "--kind", "front", "--out", str(svg)]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")


def test_invalid_config_exits_one_without_partial(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("modes.metro.shift_share = 1.5\n")
    out = tmp_path / "run.csv"
    assert main(["run", "--config", str(bad), "--out", str(out)]) == 1
    assert not out.exists()
    assert not (tmp_path / "run.csv.partial").exists()


def test_parse_error_message_has_line(tmp_path, capsys):
    bad = tmp_path / "bad.conf"
    bad.write_text("run.horizon = 10\nrun.bogus = 1\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 1
    assert "line 2" in capsys.readouterr().err


def test_missing_config_file_exits_one(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.conf"), "--out", str(tmp_path / "x.csv")]) == 1


def test_zero_parallelism_rejected(tmp_path):
    spec = tmp_path / "grid.conf"
    spec.write_text("sweep.replications = 1\n")
    assert main(["sweep", "--sweep", str(spec), "--parallelism", "0", "--out", str(tmp_path / "x.csv")]) == 1


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["run"])
    assert exc.value.code == 2


def test_threads_env_fallback(monkeypatch, tmp_path):
    monkeypatch.setenv("MODALSHIFT_THREADS", "3")
    args = build_parser().parse_args(["sweep", "--sweep", "s.conf", "--out", "o.csv"])
    command = to_command(args)
    assert isinstance(command, SweepCommand)
    assert command.parallelism == 3


def test_dispatch_reports_sweep_errors(tmp_path):
    spec = tmp_path / "grid.conf"
    spec.write_text("sweep.capacity_values = 0\nsweep.beta_c_values = 0\nsweep.beta_tau_values = 0\n"
                    "sweep.interval_values = 5\nsweep.replications = 1\n")
    command = SweepCommand(sweep_path=str(spec), out=str(tmp_path / "x.csv"))
    assert dispatch(command) == 1


def test_failed_trace_removes_result_file(short_config, tmp_path):
    out = tmp_path / "run.csv"
    trace = tmp_path / "trace.csv"
    trace.mkdir()  # a directory cannot be replaced by the trace file
    assert main(["run", "--config", str(short_config), "--out", str(out), "--trace", str(trace)]) == 1
    assert not out.exists()
    assert not (tmp_path / "run.csv.partial").exists()
    assert not (tmp_path / "trace.csv.partial").exists()
