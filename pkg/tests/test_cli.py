import json
import subprocess
import sys

import pytest

from forrlab import cli, protocols
from forrlab.report import parse_json_lines
from forrlab.rng import stream


def run_main(args, capsys):
    code = cli.main(args)
    return code, capsys.readouterr()


def test_verify_passes(capsys):
    code, out = run_main(["verify", "--seed", "3"], capsys)
    assert code == 0
    reports = parse_json_lines(out.out)
    assert len(reports) == 12 and all(r.passed for r in reports)


def test_quantum_success_small(capsys):
    code, out = run_main(["quantum-success", "--N", "256", "--k", "2", "--trials", "300"], capsys)
    r = parse_json_lines(out.out)[0]
    assert code == 0 and r.estimate >= 0.85 and r.n_samples == 300


def test_failed_assertion_exits_one(capsys):
    code, _ = run_main(["quantum-success", "--N", "64", "--trials", "50", "--min-success", "1.5"], capsys)
    assert code == 1


def test_promise_failure_exits_one(capsys):
    code, out = run_main(["sample", "--N", "1024", "--eps", "0.95", "--count", "20000"], capsys)
    assert code == 1 and "promise failure" in out.err


@pytest.mark.parametrize("args", [
    ["quantum-success", "--N", "6"],
    ["label"],
    ["sample", "--distribution", "cauchy"],
    ["verify", "--workers", "0"],
])
def test_usage_errors_exit_two(args, capsys):
    code, out = run_main(args, capsys)
    assert code == 2 and "error" in out.err


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2


def test_sample_then_label(tmp_path, capsys):
    path = tmp_path / "inst.frrl"
    code, _ = run_main(["sample", "--N", "16", "--k", "2", "--count", "8", "--distribution", "sigma-no",
                        "--instances", str(path)], capsys)
    assert code == 0
    code, out = run_main(["label", "--instances", str(path)], capsys)
    r = parse_json_lines(out.out)[0]
    assert code == 0 and r.extra["no"] == 8 and r.extra["stored_label_mismatches"] == 0


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[forrlab]\nN = 64\nk = 1\ntrials = 40\nseed = 11\n")
    code, out = run_main(["quantum-success", "--config", str(cfg), "--seed", "12"], capsys)
    r = parse_json_lines(out.out)[0]
    assert code == 0 and r.params["N"] == 64 and r.n_samples == 40 and r.seed == 12


@pytest.mark.parametrize("text", ["[forrlab]\nbogus = 1\n", "[other]\nN = 4\n", "[forrlab]\nN = four\n"])
def test_bad_config(tmp_path, capsys, text):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    code, _ = run_main(["verify", "--config", str(cfg)], capsys)
    assert code == 2


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "out"))
    code, out = run_main(["fourier-mass", "--arity", "3", "--cost", "3", "--format", "csv"], capsys)
    assert code == 0 and out.out == ""
    text = (tmp_path / "out" / "fourier-mass.csv").read_text()
    assert text.startswith("experiment,params,estimate")
    assert len(text.strip().splitlines()) == 5


def test_lift_eval_and_fourier_mass_from_protocol_file(tmp_path, capsys):
    C = protocols.dictator_product_protocol(4, 1)
    protocols.save_protocol(tmp_path / "c.json", C)
    code, out = run_main(["lift-eval", "--protocol", str(tmp_path / "c.json"), "--extend", "1"], capsys)
    r = parse_json_lines(out.out)[0]
    assert code == 0 and r.params["cost"] == 4 and r.params["min_cost"] >= 1
    assert r.estimate == pytest.approx(0.0)
    code, out = run_main(["fourier-mass", "--protocol", str(tmp_path / "c.json")], capsys)
    masses = [x.estimate for x in parse_json_lines(out.out)]
    assert masses == pytest.approx([0, 1, 0, 0, 0])


def test_fourier_mass_from_truth_table(tmp_path, capsys):
    (tmp_path / "and.txt").write_text("1, 1, 1, -1\n")
    code, out = run_main(["fourier-mass", "--truth-table", str(tmp_path / "and.txt")], capsys)
    assert [r.estimate for r in parse_json_lines(out.out)] == pytest.approx([0.5, 1.0, 0.5])


def test_estimate_moments_checks_exact_value(capsys):
    code, out = run_main(["estimate-moments", "--N", "8", "--eps", "0.1", "--index", "1 9",
                          "--samples", "200000"], capsys)
    r = parse_json_lines(out.out)[0]
    assert code == 0 and r.extra["exact"] == pytest.approx(-0.1 / 8 ** 0.5)


def test_tree_advantage(capsys):
    code, out = run_main(["tree-advantage", "--N", "4", "--eps", "0.3", "--depth", "1", "--samples", "2000"], capsys)
    r = parse_json_lines(out.out)[0]
    assert code == 0 and r.extra["trees_in_class"] == 2 + 8 * 4


def test_worker_count_does_not_change_output(capsys):
    args = ["estimate-moments", "--N", "4", "--index", "0 4", "--samples", "250000", "--seed", "5"]
    _, one = run_main(args + ["--workers", "1"], capsys)
    _, three = run_main(args + ["--workers", "3"], capsys)
    assert one.out == three.out


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "forrlab.cli", *args], capture_output=True, check=False)


def test_byte_identical_across_processes():
    args = ("quantum-success", "--N", "64", "--trials", "300", "--seed", "9", "--workers", "2")
    a, b = _cli(*args), _cli(*args)
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout


def test_timing_flag_adds_wall_time(capsys):
    _, out = run_main(["fourier-mass", "--arity", "2", "--cost", "2", "--timing"], capsys)
    assert all("wall_time" in json.loads(line) for line in out.out.splitlines())
