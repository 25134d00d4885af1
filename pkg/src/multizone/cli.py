"""Command-line entry point: ``multizone <command> --config <path|name> --out <dir>``."""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import BUNDLED, ConfigError, build_scenario, load_config, require, selected_methods
from .evaluation import (evaluate_bank, evaluate_weights, field_snapshot, hann_pulse,
                         raster_grid, run_noise_experiment, snapshot_duration, steady_state_frame,
                         write_noise_csv, write_pgm, write_raster_csv)
from .modal import ConvergenceError, modal_spectrum, scan_observability
from .solver import SolverError, solve_frequency, solve_prefilter_bank

SUMMARY_SCHEMA = "# multizone summary v1"
MODAL_SCHEMA = "# multizone modal v1"
MINIMA_SCHEMA = "# multizone minima v1"
SNAPSHOT_SCHEMA = "# multizone snapshot-energy v1"


def _out_dir(args, config):
    out = Path(args.out or config.section("output").get("dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, config):
    return args.seed if args.seed is not None else int(config.section("evaluation").get("seed", 0))


def _workers(config):
    return config.section("solver").get("workers")


def _write_table(path, schema, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(schema + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def cmd_scenario_run(args):
    config = load_config(args.config)
    scenario = build_scenario(config)
    out = _out_dir(args, config)
    summary = []
    for method in selected_methods(config):
        bank = solve_prefilter_bank(scenario, method, workers=_workers(config))
        report = evaluate_bank(scenario, bank, method)
        report.to_csv(out / f"metrics_{method}.csv")
        bank.to_csv(out / f"filters_{method}.csv")
        bb = report.broadband()
        summary.append([method, bb["delta_l_db"], bb["mse_bright_db"], bb["mse_dark_db"],
                        bb["mse_bright_normalized_db"], bb["wng_db"]])
    _write_table(out / "summary.csv", SUMMARY_SCHEMA,
                 ["method", "delta_l_db", "mse_bright_db", "mse_dark_db",
                  "mse_bright_normalized_db", "wng_db"], summary)
    return out


def _complex_columns(name, values):
    return {f"{name}_real": values.real, f"{name}_imag": values.imag, f"{name}_abs": np.abs(values)}


def cmd_modal_scan(args):
    config = load_config(args.config)
    m_cfg = require(config, "modal")
    c, _ = config.physics
    out = _out_dir(args, config)
    orders = m_cfg["m"] if isinstance(m_cfg["m"], list) else [m_cfg["m"]]
    r_in, r_out, r0 = float(m_cfg["r_in"]), float(m_cfg["r_out"]), float(m_cfg["r0"])
    phi0 = np.deg2rad(m_cfg.get("phi0_deg", 0.0))
    dphi = float(m_cfg.get("dphi", (r_out - r_in) / r_out))
    f_range = (float(m_cfg["f_start"]), float(m_cfg["f_stop"]))
    step = float(m_cfg["step"])
    prominence = float(m_cfg.get("min_prominence_db", 3.0))
    minima_rows = []
    for m in orders:
        # validates the grid before the (longer) spectrum evaluation
        pair = scan_observability(m, (r_in, r_out), f_range, step, r0, phi0, c,
                                  min_prominence_db=prominence)
        single = scan_observability(m, (r_out,), f_range, step, r0, phi0, c,
                                    min_prominence_db=prominence)
        minima_rows += [[m, "outer", f] for f in single] + [[m, "pair", f] for f in pair]
        freqs = np.arange(f_range[0], f_range[1] + step / 2, step)
        a_in = modal_spectrum("pressure", m, freqs, r_in, r0, phi0, c=c)
        a_out = modal_spectrum("pressure", m, freqs, r_out, r0, phi0, c=c)
        rad = modal_spectrum("radial_diff", m, freqs, r_out, r0, phi0, r_in=r_in, c=c)
        tan = modal_spectrum("tangential_diff", m, freqs, r_out, r0, phi0, dphi=dphi, c=c)
        cols = {"frequency_hz": freqs}
        for name, spec in (("a_in", a_in), ("a_out", a_out), ("radial_diff", rad),
                           ("tangential_diff", tan)):
            cols.update(_complex_columns(name, spec.values))
        cols["truncation_order"] = np.maximum(a_in.orders, a_out.orders)
        header = list(cols)
        rows = [[int(v) if k == "truncation_order" else float(v) for k, v in zip(header, r)]
                for r in zip(*cols.values())]
        _write_table(out / f"modal_m{m}.csv", MODAL_SCHEMA, header, rows)
    _write_table(out / "minima.csv", MINIMA_SCHEMA, ["m", "contour", "frequency_hz"],
                 minima_rows)
    return out


def cmd_noise_sweep(args):
    config = load_config(args.config)
    scenario = build_scenario(config)
    out = _out_dir(args, config)
    e = config.section("evaluation")
    snrs = require(config, "evaluation", "snr_db")
    if not snrs:
        raise ConfigError(f"{config.source}: evaluation.snr_db must not be empty")
    results = run_noise_experiment(scenario, [float(s) for s in snrs], _seed(args, config),
                                   selected_methods(config),
                                   scaling=e.get("noise_scaling", "per_response"),
                                   workers=_workers(config))
    write_noise_csv(results, out / "noise_sweep.csv")
    return out


def cmd_field_snapshot(args):
    config = load_config(args.config)
    scenario = build_scenario(config)
    snap = require(config, "snapshot")
    out = _out_dir(args, config)
    fmt = snap.get("format", "both")
    if fmt not in ("pgm", "csv", "both"):
        raise ConfigError(f"{config.source}: snapshot.format must be 'pgm', 'csv' or 'both'")
    points, shape = raster_grid(snap["x_range"], snap["y_range"], float(snap["spacing"]))

    def save(frame, stem):
        frame = frame.reshape(shape)
        if fmt in ("pgm", "both"):
            write_pgm(frame, out / f"{stem}.pgm", limit=1.0)
        if fmt in ("csv", "both"):
            write_raster_csv(frame, out / f"{stem}.csv")

    energy_rows = []
    phases = snap.get("phases_deg", [0.0, 90.0])
    for method in snap["methods"]:
        if method not in scenario.methods:
            raise ConfigError(f"{config.source}: unknown method {method!r}")
        for f in snap.get("frequencies", []):
            omega = 2 * np.pi * float(f)
            w, _ = solve_frequency(scenario, method, omega)
            report = evaluate_weights(scenario, [w], [float(f)], method)
            energy_rows.append([method, float(f), report.energy_bright[0], report.energy_dark[0],
                                float(report.level_difference_db[0])])
            for i, phase in enumerate(phases):
                frame = steady_state_frame(scenario.loudspeakers, w, points, omega,
                                           np.deg2rad(phase), scenario.c)
                save(frame, f"steady_{method}_{f:g}Hz_{i}")
        times = snap.get("times", [])
        if times:
            bank = solve_prefilter_bank(scenario, method, workers=_workers(config))
            pulse = hann_pulse(int(snap.get("pulse_length", 32)))
            duration = snapshot_duration(bank.filters, pulse, points, scenario.loudspeakers,
                                         scenario.fs, scenario.c)
            for t in times:
                if not 0 <= t < duration:
                    raise ValueError(f"snapshot time {t} is outside the simulated duration "
                                     f"of {duration} samples")
                frame = field_snapshot(bank, pulse, points, int(t), scenario.loudspeakers,
                                       scenario.fs, scenario.c)
                save(frame, f"pulse_{method}_t{int(t)}")
    _write_table(out / "snapshot_energy.csv", SNAPSHOT_SCHEMA,
                 ["method", "frequency_hz", "energy_bright", "energy_dark", "delta_l_db"],
                 energy_rows)
    return out


COMMANDS = {
    "scenario-run": (cmd_scenario_run, "design prefilters and write per-frequency metrics"),
    "modal-scan": (cmd_modal_scan, "Fourier coefficients on zone contours and their minima"),
    "noise-sweep": (cmd_noise_sweep, "reproduction metrics under sensor noise"),
    "field-snapshot": (cmd_field_snapshot, "steady-state and pulse wavefield frames"),
}


def _u64(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="multizone", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True,
                       help=f"TOML file or bundled name ({', '.join(BUNDLED)})")
        p.add_argument("--out", help="output directory (default: output.dir or ./out)")
        p.add_argument("--seed", type=_u64, help="RNG seed, overrides evaluation.seed")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        out = fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (SolverError, ConvergenceError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
