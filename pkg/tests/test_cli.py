import json
import textwrap

import pytest

from roughmorrey import cli

AP_CONFIG = """\
grid: {n: 1, L: 1.0, h: 0.0078125}
weight: {kind: constant}
space: {p: 2.0}
family: {stride: 8}
"""


def write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


@pytest.fixture(autouse=True)
def out_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "out"))
    return tmp_path / "out"


def test_ap_constant_weight(tmp_path, out_env):
    assert cli.main(["ap", "--config", str(write(tmp_path, AP_CONFIG))]) == 0
    data = json.loads((out_env / "ap.json").read_text())
    assert data["schema"] == 1 and data["characteristic"] == 1.0


def test_unknown_key_reports_line(tmp_path, capsys):
    path = write(tmp_path, """\
        grid:
          n: 1
          L: 1.0
          hh: 0.01
        """)
    assert cli.main(["ap", "--config", str(path)]) == 2
    assert f"{path}:4: unknown key 'hh' in grid" in capsys.readouterr().err


def test_wrong_type_reports_line(tmp_path, capsys):
    path = write(tmp_path, "grid: {n: 1, L: 1.0, h: 0.0078125}\nseed: abc\n")
    assert cli.main(["ap", "--config", str(path)]) == 2
    assert ":2:" in capsys.readouterr().err


def test_yaml_syntax_error(tmp_path, capsys):
    path = write(tmp_path, "grid: {n: 1\nweight: [\n")
    assert cli.main(["ap", "--config", str(path)]) == 2


def test_invalid_grid_writes_nothing(tmp_path, out_env):
    path = write(tmp_path, "grid: {n: 1, L: 1.0, h: 0.3}\ncases: [{id: Z316}]\n")
    assert cli.main(["verify", "--config", str(path)]) == 2
    assert not out_env.exists()


def test_gate_violation_exit_3(tmp_path, capsys):
    path = write(tmp_path, """\
        grid: {n: 1, L: 4.0, h: 0.00390625}
        weight: {kind: power, alpha: 0.3}
        space: {p: 1.5, s: 2.0}
        family: {stride: 32, r_max: 0.125, center_box: 1.0}
        cases: [{id: Z316}]
        """)
    assert cli.main(["verify", "--config", str(path)]) == 3
    assert "s' <= p" in capsys.readouterr().err


def test_unknown_case_is_config_error(tmp_path):
    path = write(tmp_path, AP_CONFIG + "cases: [{id: NOPE}]\n")
    assert cli.main(["verify", "--config", str(path)]) == 2


def test_failing_condition_exit_1(tmp_path, out_env):
    path = write(tmp_path, """\
        grid: {n: 1, L: 4.0, h: 0.00390625}
        weight: {kind: power, alpha: 0.3}
        space: {p: 2.0, s: 8.0, phi1: {form: power, beta: 0.5}, phi2: {form: power, beta: 0.5}}
        family: {stride: 32, r_max: 0.125, center_box: 1.0}
        cases: [{id: Z316}]
        """)
    assert cli.main(["verify", "--config", str(path)]) == 1
    data = json.loads((out_env / "verify.json").read_text())
    assert data["cases"][0]["verdict"] == "condition fails"


def test_apply_norm_bmo(tmp_path, out_env):
    path = write(tmp_path, """\
        grid: {n: 1, L: 1.0, h: 0.0078125}
        weight: {kind: power, alpha: 0.3}
        functions: {f: {kind: bump, center: [0.2], width: 0.3}, b: {kind: log_abs}}
        operator: {kind: singular_commutator}
        norm: {kind: weighted_morrey}
        space: {p: 2.0, kappa: 0.5}
        family: {stride: 8}
        """)
    for cmd in ("apply", "norm", "bmo"):
        assert cli.main([cmd, "--config", str(path)]) == 0
    assert (out_env / "apply.csv").read_text().startswith("x0,value\n")
    assert json.loads((out_env / "norm.json").read_text())["value"] > 0
    assert json.loads((out_env / "bmo.json").read_text())["jn_ratio"] >= 1


def test_missing_symbol_for_commutator(tmp_path):
    path = write(tmp_path, """\
        grid: {n: 1, L: 1.0, h: 0.0078125}
        functions: {f: {kind: bump, center: [0.2], width: 0.3}}
        operator: {kind: singular_commutator}
        """)
    assert cli.main(["apply", "--config", str(path)]) == 2


def test_weighted_preset_is_deterministic(tmp_path, monkeypatch):
    outputs = []
    for k in range(2):
        target = tmp_path / f"run{k}"
        monkeypatch.setenv(cli.OUTPUT_ENV, str(target))
        assert cli.main(["suite", "--preset", "weighted-morrey"]) == 0
        outputs.append((target / "verify.json").read_bytes())
    assert outputs[0] == outputs[1]


def test_unknown_preset(capsys):
    assert cli.main(["suite", "--preset", "nope"]) == 2


def test_json_formatting():
    text = cli.dumps({"b": 0.1, "a": [1, True, None, float("inf")]})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text and '"inf"' in text


def test_table_weight_from_csv(tmp_path, out_env):
    import numpy as np
    np.savetxt(tmp_path / "w.csv", np.full(256, 2.0)[:, None], delimiter=",")
    path = write(tmp_path, f"""\
        grid: {{n: 1, L: 1.0, h: 0.0078125}}
        weight: {{kind: table, csv: "{tmp_path / 'w.csv'}"}}
        family: {{stride: 8}}
        """)
    assert cli.main(["ap", "--config", str(path)]) == 0
    assert json.loads((out_env / "ap.json").read_text())["characteristic"] == pytest.approx(1.0, abs=1e-12)
    bad = write(tmp_path, 'grid: {n: 1, L: 1.0, h: 0.0078125}\nweight: {kind: table, csv: "missing.csv"}\n', "bad.yaml")
    assert cli.main(["ap", "--config", str(bad)]) == 2
