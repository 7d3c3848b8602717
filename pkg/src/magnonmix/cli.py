"""Command line interface.

Subcommands: relax, run, harmonics, odmr-map, two-tone-map, plan.  All take
``--scenario``; ``--out``, ``--mode`` and ``--threads`` override the
scenario file.  Progress goes to stderr, data to files or stdout.  Exit
codes: 0 success, 1 validation error, 2 runtime divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import harness
from .errors import (
    ConfigurationError,
    ContractViolationError,
    ConvergenceError,
    DivergenceError,
    ScenarioError,
)
from .io import save_snapshot, write_spectrum_csv, write_table_csv
from .llg import run as llg_run, stability_dt_max
from .scenario import MODES, Scenario, load_scenario
from .spectral import fft_spectrum


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="magnonmix",
        description="Micromagnetic magnon frequency-conversion toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--out", default=None, help="output directory override")
        sp.add_argument("--mode", choices=MODES, default=None,
                        help="execution mode override")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (0 = auto)")

    common(sub.add_parser("relax", help="relax the scenario texture, write a snapshot"))
    common(sub.add_parser("run", help="relax, drive and record one texture"))
    common(sub.add_parser("harmonics", help="texture comparison at one harmonic"))
    common(sub.add_parser("odmr-map", help="PL map over bias and pump frequency"))
    common(sub.add_parser("two-tone-map", help="mixing map over two tone frequencies"))
    plan = sub.add_parser("plan", help="conversion protocols for a target frequency")
    common(plan)
    plan.add_argument("--f2", type=float, required=True, help="target frequency (Hz)")
    plan.add_argument("--verify", action="store_true",
                      help="verify the leading protocol with a full simulation")
    return p


def _load(args) -> tuple[Scenario, str]:
    sc = load_scenario(args.scenario)
    if args.mode is not None:
        sc.mode = args.mode
    if args.threads is not None:
        sc.threads = args.threads
    out_dir = args.out if args.out is not None else sc.output_dir
    return sc, out_dir


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def _cmd_relax(args) -> int:
    sc, out = _load(args)
    _ensure_dir(out)
    label = harness.texture_label(sc.texture)
    state, _, metrics = harness.prepare_texture_state(sc, sc.texture)
    save_snapshot(state, os.path.join(out, f"relaxed_{label}.snap"))
    print("texture,wall_count,total_length_m,mean_width_m")
    print(f"{label},{metrics.wall_count},{metrics.total_length:.17g},"
          f"{metrics.mean_width:.17g}")
    return 0


def _cmd_run(args) -> int:
    sc, out = _load(args)
    _ensure_dir(out)
    label = harness.texture_label(sc.texture)
    state, mat, _ = harness.prepare_texture_state(sc, sc.texture)
    plan = sc.run_plan(dt_max=stability_dt_max(state, mat, sc.drive,
                                               sc.integrator.demag_mode))
    series, final = llg_run(state, mat, sc.drive, plan.duration,
                            plan.config(sc.integrator.record_per_cell),
                            demag_mode=sc.integrator.demag_mode,
                            settle=plan.settle)
    write_spectrum_csv(fft_spectrum(series, "z"),
                       os.path.join(out, f"spectrum_{label}.csv"))
    save_snapshot(final, os.path.join(out, f"final_{label}.snap"))
    return 0


def _cmd_harmonics(args) -> int:
    sc, out = _load(args)
    _ensure_dir(out)
    result = harness.run_harmonic_experiment(sc)
    result.to_csv(os.path.join(out, "harmonics.csv"))
    for label, spectrum in result.spectra.items():
        write_spectrum_csv(spectrum, os.path.join(out, f"spectrum_{label}.csv"))
    for label, mode_map in result.mode_maps.items():
        header = ["x_m", "y_m", "amplitude"]
        rows = []
        for i in range(mode_map.shape[0]):
            for j in range(mode_map.shape[1]):
                rows.append([(i + 0.5) * sc.grid.dx, (j + 0.5) * sc.grid.dy,
                             mode_map[i, j]])
        write_table_csv(header, rows, os.path.join(out, f"modemap_{label}.csv"))
    return 0


def _cmd_odmr_map(args) -> int:
    sc, out = _load(args)
    _ensure_dir(out)
    result = harness.run_odmr_map(sc)
    result.to_csv(os.path.join(out, "odmr_map.csv"))
    return 0


def _cmd_two_tone_map(args) -> int:
    sc, out = _load(args)
    _ensure_dir(out)
    result = harness.run_two_tone_map(sc)
    result.to_csv(os.path.join(out, "two_tone_map.csv"))
    return 0


def _cmd_plan(args) -> int:
    sc, out = _load(args)
    report = harness.run_sensing_plan(sc, args.f2, verify=args.verify)
    if report.warning:
        print(f"warning: {report.warning}", file=sys.stderr)
    if args.out is not None:
        _ensure_dir(out)
        harness.export(report.solutions, os.path.join(out, "protocols.csv"))
    else:
        print("a,b,branch,f1_hz,f2_hz,order")
        for s in report.solutions:
            print(f"{s.a},{s.b},{s.branch},{s.f1:.17g},{s.f2:.17g},{s.order}")
    if report.verification is not None:
        print(json.dumps(report.verification, sort_keys=True))
    return 0


_COMMANDS = {
    "relax": _cmd_relax,
    "run": _cmd_run,
    "harmonics": _cmd_harmonics,
    "odmr-map": _cmd_odmr_map,
    "two-tone-map": _cmd_two_tone_map,
    "plan": _cmd_plan,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, ConfigurationError, ContractViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DivergenceError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
