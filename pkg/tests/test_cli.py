import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from itpcheck.cli import main

CONFIGS = Path(__file__).parent.parent / "configs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, (json.loads(out) if out else None), err


def write(tmp_path, data):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(data))
    return p


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# itpcheck ") and "config_hash=" in lines[0]
    return list(csv.reader(lines[1:]))


def test_ellipticity_identity_exit0(capsys):
    code, rep, _ = run_json(capsys, "check-ellipticity", "--config", CONFIGS / "identity_disk.json")
    assert code == 0 and rep["summary"]["elliptic"] is True


def test_ellipticity_indefinite_exit2(capsys):
    code, rep, _ = run_json(capsys, "check-ellipticity", "--config", CONFIGS / "disk_indefinite.json")
    assert code == 2 and rep["summary"]["elliptic"] is False


def test_missing_config_exit1(capsys, tmp_path):
    code, out, err = run(capsys, "check-ellipticity", "--config", tmp_path / "nope.json")
    assert code == 1 and "cannot read" in err and out == ""


def test_config_required(capsys):
    code, _, err = run(capsys, "check-sl")
    assert code == 1 and "--config" in err


def test_bad_flag_and_command_exit1(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "check-sl", "--rect", "1,2,3")[0] == 1
    assert run(capsys, "check-sl", "--config", CONFIGS / "identity_disk.json", "--resolution", "1")[0] == 1


def test_schema_error_exit1(capsys, tmp_path):
    p = write(tmp_path, {"geometry": {"kind": "disk", "radius": 1}, "coefficients": {"dimension": 3}})
    code, _, err = run(capsys, "check-sl", "--config", p)
    assert code == 1 and "coefficients.dimension" in err


def test_sl_identity_fails_everywhere(capsys, tmp_path):
    code, rep, _ = run_json(capsys, "check-sl", "--config", CONFIGS / "identity_disk.json",
                            "--output", tmp_path)
    s = rep["summary"]
    assert code == 2 and s["frames"] == 360 and s["failed_frames"] == 360
    assert s["max_detB_margin"] < 1e-10 and s["min_re_a_dd"] == s["max_re_a_dd"] == 1
    rows = read_csv(tmp_path / "sl_frames.csv")
    assert rows[0][:2] == ["frame", "param[rad|point]"] and "detB_margin[1]" in rows[0]
    assert len(rows) == 361 and all(r[rows[0].index("passed")] == "false" for r in rows[1:])


def test_sl_ramped_disk_passes_with_margin_one(capsys):
    code, rep, _ = run_json(capsys, "check-sl", "--config", CONFIGS / "disk_ramped.json")
    assert code == 0 and rep["summary"]["min_detB_margin"] == pytest.approx(1.0, abs=1e-6)


def test_sl_cube_all_faces(capsys, tmp_path):
    code, rep, _ = run_json(capsys, "check-sl", "--config", CONFIGS / "cube_diag123.json",
                            "--output", tmp_path)
    assert code == 0 and rep["summary"]["failed_frames"] == 0
    rows = read_csv(tmp_path / "sl_frames.csv")
    assert len(rows) - 1 == 6 * 8 * 8


def test_sl_non_elliptic_exit2(capsys):
    code, rep, _ = run_json(capsys, "check-sl", "--config", CONFIGS / "disk_indefinite.json")
    assert code == 2 and rep["summary"]["elliptic"] is False


def test_find_rays_2I_real_det_case(capsys, tmp_path):
    code, rep, _ = run_json(capsys, "find-rays", "--config", CONFIGS / "disk_2I.json",
                            "--phi-grid", "72", "--output", tmp_path)
    s = rep["summary"]
    assert code == 0 and s["admissible_rays"] > 0 and s["corollary_case"] == "realRealDetCriterion"
    rows = read_csv(tmp_path / "rays.csv")
    assert rows[0] == ["phi[rad]", "margin_I[1]", "margin_II[1]", "admissible"] and len(rows) == 73


def test_find_rays_cube_empty(capsys):
    code, rep, _ = run_json(capsys, "find-rays", "--config", CONFIGS / "cube_diag123.json",
                            "--phi-grid", "36")
    assert code == 2 and rep["summary"]["admissible_rays"] == 0
    assert rep["summary"]["corollary_case"] == "none"


def test_find_rays_n_zero_has_condition_I_witness(capsys):
    code, rep, _ = run_json(capsys, "find-rays", "--config", CONFIGS / "disk_n_zero.json",
                            "--phi-grid", "36")
    assert code == 2 and rep["summary"]["admissible_rays"] == 0
    assert rep["summary"]["best_margin_I"] == 0
    assert rep["witnesses"]["condition_I"]["rho"] == pytest.approx(1.0)
    assert "n vanishes" in rep["summary"]["corollary_reason"]


def test_spectrum_ramped_disk(capsys, tmp_path):
    code, rep, _ = run_json(capsys, "spectrum", "--config", CONFIGS / "disk_ramped.json",
                            "--output", tmp_path, "--dgrid", "8,3")
    s = rep["summary"]
    assert code == 0
    assert s["mode_0"]["status"] == "identically zero"
    assert s["mode_1"]["status"] == "finite" and isinstance(s["mode_1"]["count"], int)
    assert s["c_scan_mode_0"]["c=1"] == "identically zero"
    assert s["c_scan_mode_0"]["c=2"] >= 1 and isinstance(s["c_scan_mode_0"]["c=1+1i"], int)
    grid = read_csv(tmp_path / "dispersion_grid.csv")
    assert grid[0] == ["mode", "re_k[1/length]", "im_k[1/length]", "abs_D[1]"] and len(grid) == 1 + 2 * 24
    scan = read_csv(tmp_path / "c_scan.csv")
    assert len(scan) == 1 + 2 * 3


def test_spectrum_2I_zero_csv(capsys, tmp_path):
    code, rep, _ = run_json(capsys, "spectrum", "--config", CONFIGS / "disk_2I.json",
                            "--output", tmp_path, "--dgrid", "4,2")
    assert code == 0 and rep["summary"]["discrete"] is True
    zeros = read_csv(tmp_path / "zeros.csv")
    n = sum(rep["summary"][f"mode_{m}"]["count"] for m in (0, 1))
    assert len(zeros) - 1 == n
    assert all(float(r[3]) < 1e-8 for r in zeros[1:])


def test_spectrum_modes_and_rect_flags(capsys):
    code, rep, _ = run_json(capsys, "spectrum", "--config", CONFIGS / "disk_2I.json",
                            "--modes", "2", "--rect", "0.6,5,-0.3,0.4", "--dgrid", "2,2")
    assert code == 0 and "mode_2" in rep["summary"] and "mode_0" not in rep["summary"]
    assert rep["summary"]["rect"] == [0.6, 5, -0.3, 0.4]


def test_spectrum_needs_disk(capsys):
    code, _, err = run(capsys, "spectrum", "--config", CONFIGS / "cube_diag123.json")
    assert code == 1 and "disk" in err


def test_validate_examples(capsys, tmp_path):
    code, rep, _ = run_json(capsys, "validate-examples", "--output", tmp_path)
    assert code == 0 and all(rep["summary"]["checks"].values())
    assert rep["summary"]["cube_max_residual"] < 1e-10
    rows = read_csv(tmp_path / "cube_residuals.csv")
    assert len(rows) == 21


def test_text_output_is_deterministic(capsys):
    args = ("find-rays", "--config", CONFIGS / "disk_2I.json", "--phi-grid", "24")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second
    assert "config_hash:" in first[1] and "result: PASS" in first[1]


def test_timing_only_on_request(capsys):
    _, rep, _ = run_json(capsys, "check-ellipticity", "--config", CONFIGS / "identity_disk.json")
    assert "timing_s" not in rep
    _, rep, _ = run_json(capsys, "check-ellipticity", "--config", CONFIGS / "identity_disk.json", "--timing")
    assert rep["timing_s"]["wall"] >= 0


def test_numbers_have_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "check-ellipticity", "--config", CONFIGS / "disk_2I.json")
    assert "worst_margin: 1\n" in out
    assert "directions: [[1, 0], [0, 1]]" in out
    assert "np.float64" not in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "itpcheck.cli", "check-ellipticity", "--config",
                           str(CONFIGS / "identity_disk.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and "result: PASS" in proc.stdout
