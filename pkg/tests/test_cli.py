import json
import re

import pytest

from casimir_spheres.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_equal_spheres(capsys):
    code, out, _ = run(capsys, "compute", "--L", "1", "--R1", "1", "--R2", "1",
                       "--model", "scalar")
    assert code == 0
    assert "y      = 3.5" in out
    m = re.search(r"model=scalar: f1 = ([0-9.eE+-]+)", out)
    assert float(m.group(1)) == pytest.approx(3.5 / 45.0, rel=1e-10)


def test_compute_plane_dvd(capsys):
    code, out, _ = run(capsys, "compute", "--L", "1", "--R1", "1", "--plane",
                       "--model", "dvd")
    assert code == 0
    assert "y      = 2" in out
    m = re.search(r"model=dvd: f1 = ([0-9.eE+-]+)", out)
    assert float(m.group(1)) == pytest.approx(1.0 / 24.0, rel=1e-10)


def test_compute_reduced_ded(capsys):
    code, out, _ = run(capsys, "compute", "--y", "2", "--u", "0.25",
                       "--model", "ded")
    assert code == 0
    m = re.search(r"model=ded: f1 = ([0-9.eE+-]+)", out)
    assert float(m.group(1)) == pytest.approx(0.0199981, rel=1e-4)


def test_compute_with_temperature(capsys):
    code, out, _ = run(capsys, "compute", "--y", "2", "--u", "0.25",
                       "--model", "scalar", "--T", "296")
    assert code == 0
    assert "F_T" in out and "k_B" in out


def test_compute_rejects_conflicting_geometry(capsys):
    with pytest.raises(SystemExit) as exc:
        run(capsys, "compute", "--L", "1", "--R1", "1", "--R2", "1", "--y", "2")
    assert exc.value.code == 2


def test_compute_rejects_invalid_values(capsys):
    code, _, err = run(capsys, "compute", "--y", "0.5", "--u", "0.1")
    assert code == 2
    assert "y" in err


def test_curve_determinism_and_format(tmp_path, capsys):
    out_path = tmp_path / "data.csv"
    args = ["curve", "--model", "dvd", "--quantity", "f", "--u", "0,0.25",
            "--ymin", "0.1", "--ymax", "10", "--points", "3",
            "--seed", "7", "--out", str(out_path)]
    assert main(args) == 0
    first = out_path.read_bytes()
    assert main(args) == 0
    assert out_path.read_bytes() == first
    lines = first.decode().splitlines()
    assert lines[0].startswith("# casimir-spheres")
    assert lines[1].startswith("# invocation:")
    assert lines[2] == "# seed: 7"
    assert lines[3] == "y_minus_1,u,model,quantity,value,error_estimate"
    rows = lines[4:]
    assert len(rows) == 6  # 2 u-values x 3 points
    capsys.readouterr()


def test_curve_row_count_two_point_grid(tmp_path, capsys):
    out_path = tmp_path / "rows.csv"
    assert main(["curve", "--model", "all", "--quantity", "f1", "--u", "0.1",
                 "--ymin", "1", "--ymax", "2", "--points", "2",
                 "--out", str(out_path)]) == 0
    rows = out_path.read_text().splitlines()[4:]
    assert len(rows) == 6  # 3 models x 1 u x 2 points
    capsys.readouterr()


def test_curve_phi_quantity(tmp_path, capsys):
    out_path = tmp_path / "phi.csv"
    assert main(["curve", "--model", "dvd", "--quantity", "phi", "--u", "0.25",
                 "--ymin", "0.1", "--ymax", "100", "--points", "4",
                 "--out", str(out_path)]) == 0
    rows = out_path.read_text().splitlines()[4:]
    vals = [float(r.split(",")[4]) for r in rows]
    assert all(1.0 < v < 1.2121 for v in vals)
    assert vals == sorted(vals, reverse=True)
    capsys.readouterr()


def test_config_file_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"points": 3, "u": "0.25", "ymin": 0.5, "ymax": 5.0}))
    out_path = tmp_path / "cfg_curve.csv"
    # --points on the command line beats the config value
    assert main(["curve", "--model", "scalar", "--quantity", "f1",
                 "--config", str(cfg), "--points", "2",
                 "--out", str(out_path)]) == 0
    rows = out_path.read_text().splitlines()[4:]
    assert len(rows) == 2
    capsys.readouterr()


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit) as exc:
        main(["curve", "--model", "scalar", "--config", str(cfg)])
    assert exc.value.code == 2
    capsys.readouterr()


def test_fit_rejects_bad_order(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--model", "ded", "--n", "0"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_fit_writes_params_json(tmp_path, capsys):
    out_path = tmp_path / "params.json"
    assert main(["fit", "--model", "dvd", "--uref", "0.1", "--n", "2",
                 "--points", "50", "--out", str(out_path)]) == 0
    doc = json.loads(out_path.read_text())
    assert doc["model"] == "dvd"
    assert doc["n"] == 2
    assert len(doc["nu"]) == 2 and len(doc["mu"]) == 2
    assert doc["epsilon"] < 6e-3
    assert "grid_spec" in doc and "seed" in doc
    capsys.readouterr()


def test_curve_f_approx_from_fitted_file(tmp_path, capsys):
    params = tmp_path / "p.json"
    assert main(["fit", "--model", "dvd", "--uref", "0.1", "--n", "2",
                 "--points", "40", "--out", str(params)]) == 0
    out_path = tmp_path / "fa.csv"
    assert main(["curve", "--model", "dvd", "--quantity", "f_approx",
                 "--u", "0.1", "--ymin", "0.5", "--ymax", "10", "--points", "3",
                 "--params", str(params), "--out", str(out_path)]) == 0
    rows = out_path.read_text().splitlines()[4:]
    assert len(rows) == 3
    assert all(float(r.split(",")[4]) > 0 for r in rows)
    capsys.readouterr()
