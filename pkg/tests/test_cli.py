import json

from stokeslab.cli import EXIT_OK, EXIT_UNDECIDED, EXIT_USAGE, main


def _write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_cousin_unit_square_demo(tmp_path):
    cfg = _write_config(tmp_path, "c.json", {
        "schema_version": 1,
        "current": {"kind": "unit_square"},
        "gauge": {"kind": "constant", "value": 0.4},
        "epsilon": 1e-3,
    })
    out = tmp_path / "out"
    assert main(["cousin", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["certificates_pass"]
    assert report["summary"]["pieces"] == 16
    csv_text = (out / "family.csv").read_text()
    assert csv_text.splitlines()[0].startswith("piece_id,tag,diam,mass")
    assert len(csv_text.splitlines()) == 17


def test_cousin_refuses_divergent_set(tmp_path):
    cfg = _write_config(tmp_path, "c.json", {
        "current": {"kind": "counterexample"},
        "exceptional_set": {"kind": "singular_set"},
        "gauge": {"kind": "constant", "value": 0.3},
        "epsilon": 1e-2,
    })
    out = tmp_path / "out"
    assert main(["cousin", "--config", cfg, "--out", str(out)]) == EXIT_UNDECIDED
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "refused"


def test_stokes_flat_square(tmp_path):
    cfg = _write_config(tmp_path, "s.json", {
        "current": {"kind": "unit_square"},
        "form": {"kind": "x_dy"},
    })
    out = tmp_path / "out"
    assert main(["stokes", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"] == "HOLDS"
    assert abs(report["gap"]) < 1e-9


def test_stokes_smooth_graph(tmp_path):
    cfg = _write_config(tmp_path, "s.json", {
        "current": {"kind": "parabolic_graph"},
        "form": {"kind": "xz_dy"},
    })
    out = tmp_path / "out"
    assert main(["stokes", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert abs(report["gap"]) < 1e-6


def test_minkowski_bounded_profile(tmp_path):
    cfg = _write_config(tmp_path, "m.json", {
        "current": {"kind": "unit_square"},
        "exceptional_set": {"kind": "segment", "from": [0.5, 0.0], "to": [0.5, 1.0]},
        "grid": {"r0": 0.2, "q": 0.7, "steps": 10},
    })
    out = tmp_path / "out"
    assert main(["minkowski", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["accepted"] and abs(report["constant"] - 1.0) < 1e-6
    assert (out / "profile.csv").exists()
    assert (out / "certificate.json").exists()


def test_slice_coarea(tmp_path):
    cfg = _write_config(tmp_path, "sl.json", {
        "current": {"kind": "unit_square"},
        "exceptional_set": {"kind": "point", "at": [0.5, 0.5]},
        "grid": {"r_min": 0.04, "r_max": 0.7, "steps": 18},
    })
    out = tmp_path / "out"
    assert main(["slice", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = (out / "slices.csv").read_text().splitlines()
    assert rows[0] == "r,slice_mass"
    assert len(rows) == 19


def test_saks_henstock_subcommand(tmp_path):
    cfg = _write_config(tmp_path, "sh.json", {
        "current": {"kind": "unit_square"},
        "polynomial": {"x": 1.0, "const": 0.5},
        "eps1": 1e-6,
        "max_j": 4,
    })
    out = tmp_path / "out"
    assert main(["saks-henstock", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert (out / "curve.csv").exists()


def test_determinism_byte_identical(tmp_path):
    cfg = _write_config(tmp_path, "d.json", {
        "current": {"kind": "unit_square"},
        "form": {"kind": "x_dy"},
        "seed": 7,
    })
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["stokes", "--config", cfg, "--out", str(out1)]) == EXIT_OK
    assert main(["stokes", "--config", cfg, "--out", str(out2)]) == EXIT_OK
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    if (out1 / "refinement.csv").exists():
        assert (out1 / "refinement.csv").read_bytes() == (out2 / "refinement.csv").read_bytes()


def test_malformed_config_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["stokes", "--config", str(bad)]) == EXIT_USAGE


def test_unknown_schema_version(tmp_path):
    cfg = _write_config(tmp_path, "v.json", {"schema_version": 99})
    assert main(["stokes", "--config", cfg]) == EXIT_USAGE


def test_missing_subcommand_is_usage():
    assert main([]) == EXIT_USAGE


def test_counterexample_refusal_exit_code(tmp_path):
    cfg = _write_config(tmp_path, "x.json", {
        "current": {"kind": "counterexample", "a": 1 / 3, "h": 1 / 3, "lambda_inverse": 2}
    })
    out = tmp_path / "out"
    assert main(["counterexample", "--config", cfg, "--out", str(out)]) == EXIT_UNDECIDED


def test_cylindrical_experimental_report(tmp_path):
    cfg = _write_config(tmp_path, "cyl.json", {
        "cylindrical": True,
        "n_strips": 4,
    })
    out = tmp_path / "out"
    assert main(["counterexample", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "experimental"
    assert abs(report["circulation"] - 1.0) < 1e-6
