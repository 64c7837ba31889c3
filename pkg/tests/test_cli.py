import numpy as np
import pytest

from xygme import cli, states
from xygme.qstate import PureState


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def field(out, key):
    for line in out.splitlines():
        if line.startswith(key + " "):
            return line.split(" ", 1)[1]
    raise KeyError(key)


def test_prepare_chi4(capsys, tmp_path):
    path = tmp_path / "chi4.json"
    code, out, _ = run(capsys, "prepare", "chi4", "--out", str(path))
    assert code == 0
    assert field(out, "fidelity") == "1.000000"
    assert field(out, "E") == "0.500000"
    assert 0 < float(field(out, "success_probability")) <= 1
    s = cli.read_state(str(path))
    assert abs(abs(np.vdot(s.amplitudes, states.chi4().amplitudes)) - 1) < 1e-12


def test_prepare_w3_and_ghz3(capsys):
    code, out, _ = run(capsys, "prepare", "w3")
    assert code == 0 and abs(float(field(out, "E")) - 0.4428) < 5e-4
    code, out, _ = run(capsys, "prepare", "ghz3")
    assert code == 0 and field(out, "E") == "0.500000"


def test_prepare_unknown(capsys):
    code, _, err = run(capsys, "prepare", "nonsense")
    assert code == 1 and "unknown" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "sweep", "C001=1", "--grid", "0:1")[0] == 1
    assert run(capsys, "sweep", "C001=1", "--grid", "0:1:0")[0] == 1


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "C001=1", "--grid", "0.69:0.71:0.01")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "gt,E"
    gts = [float(x.split(",")[0]) for x in lines[1:]]
    assert gts == sorted(gts) and len(gts) == 3
    assert max(float(x.split(",")[1]) for x in lines[1:]) > 0.44


def test_sweep_zero_length_grid(capsys):
    code, out, _ = run(capsys, "sweep", "C0011=1", "--grid", "0.6:0.6:0.01")
    assert code == 0
    assert out.splitlines() == ["gt,E", f"0.600000,{out.splitlines()[1].split(',')[1]}"]


def test_sweep_expression_amplitudes(capsys):
    code, out, _ = run(capsys, "sweep", "C0001=sqrt(2/3)", "C1111=1/sqrt(3)", "--grid", "pi/4:pi/4:1")
    assert code == 0 and out.splitlines()[1] == "0.785398,0.500000"


def test_sweep_not_normalized(capsys):
    code, _, err = run(capsys, "sweep", "C001=1", "C010=1", "--grid", "0:0:1")
    assert code == 2 and "norm = 1.414214" in err


def test_sweep_report_format(capsys):
    code, out, _ = run(capsys, "sweep", "C01=1", "--grid", "0:0.1:0.1", "--format", "report")
    assert code == 0 and out.splitlines()[0].startswith("gt 0.000000")


def test_gme_on_stored_singlet(capsys, tmp_path):
    path = tmp_path / "s.json"
    assert run(capsys, "catalog", "singlet4", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "gme", str(path))
    assert code == 0 and out == "E 0.500000\n"


def test_gme_on_random_biseparable(capsys, tmp_path):
    path = tmp_path / "b.json"
    assert run(capsys, "catalog", "random_biseparable3", "--seed", "4", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "gme", str(path))
    assert code == 0 and out == "E 0.000000\n"


def test_project_chi4(capsys, tmp_path):
    path = tmp_path / "chi4.json"
    run(capsys, "catalog", "chi4", "--out", str(path))
    code, out, _ = run(capsys, "project", str(path), "--qubit", "0", "--v", "1,0,0,0", "--outcome", "0")
    assert code == 0
    assert field(out, "probability") == "0.500000"
    assert "w3" in field(out, "matches").split()
    assert field(out, "class") == "W-class"


def test_project_impossible(capsys, tmp_path):
    path = tmp_path / "z.json"
    path.write_text(cli.format_state(PureState.basis("00")))
    code, _, err = run(capsys, "project", str(path), "--outcome", "1")
    assert code == 2 and "outcome impossible" in err


@pytest.mark.parametrize("text,needle", [
    ('{"n": 1, "amplitudes": [[1, 0], [0, 0]', "line 1"),
    ('{\n  "n": 1,\n  "amplitudes": [[1, 0]]\n}', "field 'amplitudes' must hold 2"),
    ('{"n": 1, "amplitudes": [[1, 0], ["x", 0]]}', "field 'amplitudes'[1]"),
    ('{"n": 1, "amplitudes": [[1, 0], [1, 0]]}', "not normalized"),
    ('{"n": 2}', "missing field"),
    ('[1, 2]', "expected an object"),
])
def test_malformed_state_files(capsys, tmp_path, text, needle):
    path = tmp_path / "bad.json"
    path.write_text(text)
    code, _, err = run(capsys, "gme", str(path))
    assert code == 2 and needle in err


def test_json_error_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "n": 2,\n  "amplitudes": [\n    [1, 0],,\n  ]\n}\n')
    code, _, err = run(capsys, "gme", str(path))
    assert code == 2 and "line 4" in err


def test_state_roundtrip(rng):
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    s = PureState(v / np.linalg.norm(v))
    back = cli.parse_state(cli.format_state(s))
    assert np.array_equal(back.amplitudes, s.amplitudes)
    rho = cli.gme.random_biseparable(3, 1)
    assert np.array_equal(cli.parse_state(cli.format_state(rho)).matrix, rho.matrix)


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog")
    names = [line.split()[0] for line in out.splitlines()]
    assert code == 0 and set(states.CATALOG) <= set(names)
    assert run(capsys, "catalog", "nope")[0] == 1


def test_solver_failure_exit(capsys, tmp_path, monkeypatch):
    path = tmp_path / "w.json"
    run(capsys, "catalog", "w3", "--out", str(path))
    real = cli.gme.genuine_negativity
    monkeypatch.setattr(cli.gme, "genuine_negativity", lambda rho: real(rho, max_iter=1))
    code, _, err = run(capsys, "gme", str(path))
    assert code == 3 and "max-iterations" in err


def test_byte_identical_outputs(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "catalog", "random_biseparable4", "--seed", "9", "--out", str(a))
    run(capsys, "catalog", "random_biseparable4", "--seed", "9", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "sweep", "C001=1", "--grid", "0:0.3:0.1", "--out", str(a))
    run(capsys, "sweep", "C001=1", "--grid", "0:0.3:0.1", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    first = run(capsys, "prepare", "chi4")[1]
    assert first == run(capsys, "prepare", "chi4")[1]


def test_evaluate_is_restricted():
    assert cli.evaluate("sqrt(2/3)") == pytest.approx(np.sqrt(2 / 3))
    assert cli.evaluate("2*i") == 2j
    with pytest.raises(cli.DataError):
        cli.evaluate("__import__('os')")
    with pytest.raises(cli.DataError):
        cli.evaluate("1/0")
