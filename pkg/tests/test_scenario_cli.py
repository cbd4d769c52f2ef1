import subprocess
import sys
from pathlib import Path

import pytest

from backsim import scenario
from backsim.cli import main
from backsim.distributions import Degenerate, FiniteDiscrete, Gamma

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

BASE = """
name: small
horizon: 1.0
periods: 2
paths: 2000
seed: 3
marginals:
  - {type: poisson, mean: 5.0}
  - {type: negative_binomial, mean: 5.0, variance: 30.0}
correlation:
  - [1.0, 0.7]
  - [0.7, 1.0]
"""


def write(tmp_path, text, name="s.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_structures():
    scen = scenario.loads(BASE)
    s = scen.structures()
    assert s[0] == Degenerate(5.0)
    assert s[1].shape == pytest.approx(1.0) and s[1].rate == pytest.approx(0.2)
    assert scen.time_grid()[[0, -1]].tolist() == [0.1, 2.0]


def test_parse_raw_parameters():
    scen = scenario.loads("""
marginals:
  - {type: poisson, rate: 2.0}
  - {type: negative_binomial, shape: 2.0, rate: 0.5}
  - {type: mixture, atoms: [[1.0, 0.25], [4.0, 0.75]]}
correlation: [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
""")
    assert scen.structures() == [Degenerate(2.0), Gamma(2.0, 0.5),
                                 FiniteDiscrete.from_atoms([(1.0, 0.25), (4.0, 0.75)])]


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.yaml")), ids=lambda p: p.stem)
def test_round_trip_is_idempotent(path):
    scen = scenario.load(path)
    text = scen.dumps()
    again = scenario.loads(text)
    assert again == scen
    assert again.dumps() == text


@pytest.mark.parametrize("text, fragment", [
    ("marginals: [{type: poisson, mean: 1}]\ncorrelation: [[1]]", "at least two"),
    (BASE.replace("variance: 30.0", "variance: 4.0"), "marginals[1]"),
    (BASE.replace("type: poisson", "type: binomial"), "marginals[0].type"),
    (BASE.replace("[1.0, 0.7]", "[1.0]"), "correlation[0]"),
    (BASE.replace("paths: 2000", "paths: -5"), "paths"),
    (BASE.replace("seed: 3", "seed: 3\ncolour: red"), "unknown field"),
    (BASE.replace("mean: 5.0}", "mean: five}", 1), "marginals[0].mean"),
    ("marginals: [\n", "line"),
])
def test_parse_errors_name_the_field(text, fragment):
    with pytest.raises(scenario.ScenarioError) as info:
        scenario.loads(text)
    assert fragment in str(info.value)


def run(argv, capsys):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as exc:   # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_calibrate(tmp_path, capsys):
    path = write(tmp_path, BASE)
    code, out, _ = run(["calibrate", "--scenario", path, "--out", tmp_path / "o"], capsys)
    assert code == 0
    weights = (tmp_path / "o" / "weights.csv").read_text().splitlines()
    assert weights[0] == "structure,weight"
    assert [w.split(",")[0] for w in weights[1:]] == ["00", "01"]
    assert sum(float(w.split(",")[1]) for w in weights[1:]) == pytest.approx(1.0)
    ranges = (tmp_path / "o" / "admissible_ranges.csv").read_text().splitlines()
    assert ranges[0] == "k,l,c_min,c_max,target" and ranges[1].startswith("1,2,")


def test_cli_simulate_is_reproducible(tmp_path, capsys):
    path = write(tmp_path, BASE)
    for out, threads in (("a", 1), ("b", 3)):
        code, stdout, _ = run(["simulate", "--scenario", path, "--out", tmp_path / out,
                               "--threads", threads, "--paths", 9000], capsys)
        assert code == 0 and "paths/sec" in stdout
    for name in ("events.csv", "counts.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_curve(tmp_path, capsys):
    path = write(tmp_path, BASE)
    code, _, _ = run(["curve", "--scenario", path, "--out", tmp_path], capsys)
    assert code == 0
    rows = (tmp_path / "curve_1_2.csv").read_text().splitlines()
    assert len(rows) == 1 + 20


def test_cli_default_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = write(tmp_path, BASE)
    assert run(["calibrate", "--scenario", path], capsys)[0] == 0
    assert (tmp_path / "out" / "small" / "weights.csv").exists()


def test_cli_usage_errors(tmp_path, capsys):
    assert run(["calibrate"], capsys)[0] == 1
    assert run(["explode", "--scenario", "x"], capsys)[0] == 1
    assert run(["calibrate", "--scenario", tmp_path / "missing.yaml"], capsys)[0] == 1
    bad = write(tmp_path, BASE.replace("variance: 30.0", "variance: 1.0"))
    code, _, err = run(["calibrate", "--scenario", bad], capsys)
    assert code == 1 and "marginals[1]" in err
    assert run(["simulate", "--scenario", write(tmp_path, BASE, "ok.yaml"),
                "--threads", 0], capsys)[0] == 1


def test_cli_infeasible_exit_code(tmp_path, capsys):
    text = BASE.replace("0.7", "0.999").replace("mean: 5.0}", "mean: 3.0}", 1)
    code, _, err = run(["calibrate", "--scenario", write(tmp_path, text), "--out", tmp_path], capsys)
    assert code == 2
    assert "(1,2)" in err


def test_cli_validate_and_negative_control(tmp_path, capsys):
    path = write(tmp_path, BASE.replace("paths: 2000", "paths: 20000"))
    code, out, _ = run(["validate", "--scenario", path], capsys)
    assert code == 0, out
    assert out.count("[PASS]") == 7
    code, out, _ = run(["validate", "--scenario", path, "--corrupt-weights"], capsys)
    assert code == 3
    assert "[FAIL] chi_square_marginal" in out


def test_module_entry_point(tmp_path):
    path = write(tmp_path, BASE)
    res = subprocess.run([sys.executable, "-m", "backsim", "calibrate", "--scenario", str(path),
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr


def test_cli_identical_marginals_perfect_correlation(tmp_path, capsys):
    text = BASE.replace("{type: poisson, mean: 5.0}",
                        "{type: negative_binomial, mean: 5.0, variance: 30.0}").replace("0.7", "1.0")
    code, _, _ = run(["calibrate", "--scenario", write(tmp_path, text), "--out", tmp_path], capsys)
    assert code == 0
    rows = [r.split(",") for r in (tmp_path / "weights.csv").read_text().splitlines()[1:]]
    assert [(s, float(w)) for s, w in rows] == [("00", 1.0), ("01", 0.0)]


def test_cli_event_times_stay_inside_horizon(tmp_path, capsys):
    text = BASE.replace("periods: 2", "periods: 7").replace("paths: 2000", "paths: 500")
    code, _, _ = run(["simulate", "--scenario", write(tmp_path, text), "--out", tmp_path], capsys)
    assert code == 0
    times = [float(r.rsplit(",", 1)[1])
             for r in (tmp_path / "events.csv").read_text().splitlines()[1:]]
    assert max(times) < 7.0 and min(times) >= 0.0


def test_cli_single_path_byte_identical(tmp_path, capsys):
    path = write(tmp_path, BASE.replace("paths: 2000", "paths: 1"))
    for out in ("a", "b"):
        assert run(["simulate", "--scenario", path, "--out", tmp_path / out], capsys)[0] == 0
    for name in ("events.csv", "counts.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
