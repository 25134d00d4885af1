import numpy as np
import pytest

from multizone.cli import main
from multizone.config import (BUNDLED, ConfigError, build_scenario, load_config, parse_config,
                              resolve_config_path)
from multizone.evaluation import read_csv_table, read_pgm

BASE = resolve_config_path("paper_baseline").read_text()

# a coarse variant (16 bins) that keeps the commands fast
SMALL = (BASE.replace("fs = 8000.0", "fs = 2000.0")
         .replace("filter_length = 256", "filter_length = 32")
         .replace("f_min = 100.0", "f_min = 100.0\nrir_length = 32"))


def write(tmp_path, text, name="c.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(*argv):
    return main(list(argv))


def column(path, name):
    header, rows = read_csv_table(path)
    i = header.index(name)
    return [r[i] for r in rows]


def test_bundled_names_resolve():
    for name in BUNDLED:
        assert resolve_config_path(name).is_file()
        load_config(name)
    with pytest.raises(ConfigError):
        resolve_config_path("no_such_config")


@pytest.fixture(scope="module")
def baseline_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("baseline")
    assert run("scenario-run", "--config", "paper_baseline", "--out", str(out)) == 0
    return out


def test_scenario_run_writes_128_rows_per_method(baseline_run):
    for method in ("pm", "jpvm", "jpvm_plus"):
        header, rows = read_csv_table(baseline_run / f"metrics_{method}.csv")
        assert len(rows) == 128
        assert float(rows[0][0]) == 31.25 and float(rows[-1][0]) == 4000
    header, rows = read_csv_table(baseline_run / "summary.csv")
    assert [r[0] for r in rows] == ["pm", "jpvm", "jpvm_plus"]
    assert header[1] == "delta_l_db"


def test_kappa_one_jpvm_plus_output_identical_to_pm(tmp_path, baseline_run):
    text = BASE.replace('methods = ["pm", "jpvm", "jpvm_plus"]', 'methods = ["jpvm_plus"]')
    text += "\n[methods.jpvm_plus]\nkappa = 1.0\n"
    out = tmp_path / "k1"
    assert run("scenario-run", "--config", write(tmp_path, text), "--out", str(out)) == 0
    a = (out / "filters_jpvm_plus.csv").read_bytes()
    b = (baseline_run / "filters_pm.csv").read_bytes()
    assert a == b
    pm = read_csv_table(baseline_run / "metrics_pm.csv")[1]
    jp = read_csv_table(out / "metrics_jpvm_plus.csv")[1]
    assert pm == jp


def test_missing_zone_block_names_the_key(tmp_path, capsys):
    start = BASE.index("[zones.bright]")
    end = BASE.index("[zones.dark]")
    text = BASE[:start] + BASE[end:]
    assert run("scenario-run", "--config", write(tmp_path, text), "--out", str(tmp_path)) == 2
    assert "zones.bright" in capsys.readouterr().err


def test_unknown_key_reports_line_number(tmp_path, capsys):
    text = BASE.replace("count = 70", "count = 70\nspeakers = 3")
    line = text.splitlines().index("speakers = 3") + 1
    assert run("scenario-run", "--config", write(tmp_path, text)) == 2
    err = capsys.readouterr().err
    assert f"line {line}" in err and "array.speakers" in err


def test_wrong_type_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError, match="array.count"):
        parse_config(BASE.replace("count = 70", 'count = "70"'))
    with pytest.raises(ConfigError):
        parse_config("[array\nkind = 1")


def test_physics_overrides_reach_the_scenario():
    sc = build_scenario(parse_config(BASE + "\n[physics]\nc = 340.0\nrho = 1.2\n"))
    assert sc.c == 340.0 and sc.solver.impedance == pytest.approx(408.0)


@pytest.fixture(scope="module")
def modal_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("modal")
    assert run("modal-scan", "--config", "fig5_modal", "--out", str(out)) == 0
    return out


def test_modal_scan_finds_first_order_minimum(modal_run):
    _, rows = read_csv_table(modal_run / "minima.csv")
    pair = [float(f) for m, contour, f in rows if m == "1" and contour == "pair"]
    assert pair[0] == pytest.approx(728, rel=0.02)


def test_modal_m0_tangential_column_is_zero(modal_run):
    for part in ("real", "imag", "abs"):
        assert all(float(v) == 0 for v in column(modal_run / "modal_m0.csv",
                                                 f"tangential_diff_{part}"))
    assert any(float(v) != 0 for v in column(modal_run / "modal_m1.csv", "tangential_diff_abs"))


def test_modal_step_larger_than_range_fails(tmp_path, capsys):
    text = resolve_config_path("fig5_modal").read_text().replace("step = 2.0", "step = 5000.0")
    assert run("modal-scan", "--config", write(tmp_path, text), "--out", str(tmp_path)) == 1
    assert "step" in capsys.readouterr().err


def test_noise_sweep_grid_and_determinism(tmp_path):
    text = SMALL.replace("rir_length = 32", "rir_length = 32\nsnr_db = [10.0, 20.0, 30.0, 60.0]")
    cfg = write(tmp_path, text)
    for name in ("a", "b"):
        assert run("noise-sweep", "--config", cfg, "--out", str(tmp_path / name),
                   "--seed", "5") == 0
    a = (tmp_path / "a" / "noise_sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "noise_sweep.csv").read_bytes()
    header, rows = read_csv_table(tmp_path / "a" / "noise_sweep.csv")
    assert len(rows) == 12
    assert {(r[0], r[2]) for r in rows} == {(s, m) for s in ("10.0", "20.0", "30.0", "60.0")
                                            for m in ("pm", "jpvm", "jpvm_plus")}
    assert {r[1] for r in rows} == {"5"}
    assert run("noise-sweep", "--config", cfg, "--out", str(tmp_path / "c"), "--seed", "6") == 0
    assert (tmp_path / "c" / "noise_sweep.csv").read_bytes() != a


def test_noise_sweep_rejects_empty_snr_list(tmp_path, capsys):
    text = SMALL.replace("rir_length = 32", "rir_length = 32\nsnr_db = []")
    assert run("noise-sweep", "--config", write(tmp_path, text), "--out", str(tmp_path)) == 2
    assert "snr_db" in capsys.readouterr().err


def test_noise_sweep_requires_snr_list(capsys):
    assert run("noise-sweep", "--config", "paper_baseline", "--out", "/tmp/unused_out") == 2
    assert "evaluation.snr_db" in capsys.readouterr().err


SNAPSHOT = """
[snapshot]
methods = ["pm", "jpvm_plus"]
frequencies = [450.0]
x_range = [-0.3, 0.3]
y_range = [-0.8, 0.8]
spacing = 0.1
"""


def test_field_snapshot_frames_and_energy(tmp_path):
    out = tmp_path / "snap"
    assert run("field-snapshot", "--config", write(tmp_path, SMALL + SNAPSHOT),
               "--out", str(out)) == 0
    for method in ("pm", "jpvm_plus"):
        for i in (0, 1):
            frame = read_pgm(out / f"steady_{method}_450Hz_{i}.pgm")
            assert frame.shape == (17, 7)
            assert np.loadtxt(out / f"steady_{method}_450Hz_{i}.csv", delimiter=",").shape == (17, 7)
    header, rows = read_csv_table(out / "snapshot_energy.csv")
    assert [r[0] for r in rows] == ["pm", "jpvm_plus"]
    assert all(float(r[header.index("energy_dark")]) > 0 for r in rows)


def test_silent_target_gives_zero_frames(tmp_path):
    text = (SMALL.replace('kind = "plane_wave"\nazimuth_deg = -50.0\nscaling = "mean_distance"',
                          'kind = "silence"')
            + SNAPSHOT + "times = [0, 60]\npulse_length = 16\nformat = \"csv\"\n")
    out = tmp_path / "zero"
    assert run("field-snapshot", "--config", write(tmp_path, text), "--out", str(out)) == 0
    for stem in ("steady_pm_450Hz_0", "pulse_pm_t0", "pulse_jpvm_plus_t60"):
        assert np.all(np.loadtxt(out / f"{stem}.csv", delimiter=",") == 0)
    assert not list(out.glob("*.pgm"))


def test_snapshot_time_beyond_duration_fails(tmp_path, capsys):
    text = SMALL + SNAPSHOT + "times = [100000]\npulse_length = 16\n"
    assert run("field-snapshot", "--config", write(tmp_path, text), "--out", str(tmp_path)) == 1
    assert "duration" in capsys.readouterr().err


def test_seed_must_be_u64(capsys):
    with pytest.raises(SystemExit):
        run("noise-sweep", "--config", "table1_noise", "--seed", "-1")
    with pytest.raises(SystemExit):
        run("noise-sweep", "--config", "table1_noise", "--seed", str(2 ** 64))


def test_solver_failure_exit_code(tmp_path, capsys):
    text = SMALL.replace("lwe_per_loudspeaker = 10.0", "lwe_max = 1e-14\nbeta_max = 1e-6")
    assert run("scenario-run", "--config", write(tmp_path, text), "--out", str(tmp_path)) == 1
    assert "bin" in capsys.readouterr().err
