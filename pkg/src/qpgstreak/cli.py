"""``qpgstreak`` command line: design, simulate, streak, analyze, budget.

Every command is a pure function of the config, the seed and any input
files; outputs go to ``--out`` (default ``out``). Exit codes: 0 success,
2 config or file-format error, 3 physics-domain error, 4 analysis error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import analyze
from .config import ScenarioConfig, keys_help
from .errors import ConfigError, PhysicsError, QpgStreakError
from .fields import fwhm, to_time_domain
from .io import encode_counts, fmt, write_complex_csv, write_keyvalue, write_pgm, write_table_csv
from .phasematching import (compression_factor, group_velocity_mismatch, joint_transfer_function,
                            phasematching_angle, wavelength_plane_angle)
from .streak_camera import (apply_irf, load_image, save_image, synthesize_background,
                            synthesize_image, expected_signal)
from .upconversion import approx_string, detection_improvement, phasematching_time_response, simulate

EQUIVALENCE_TOL = 1e-6
FLAT_ANGLE_DEG = 0.5


def _report(out_dir, name, items, stream):
    path = Path(out_dir) / name
    write_keyvalue(path, items)
    for k, v in items.items():
        print(f"{k} = {fmt(v)}", file=stream)
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_design(cfg: ScenarioConfig, out_dir, stream=sys.stdout):
    p = cfg.process()
    theta = phasematching_angle(p)
    flat = abs(theta) < FLAT_ANGLE_DEG
    # numerically the matched angle is ~1e-9 deg; report the limit, not 1e10
    comp = math.inf if flat else compression_factor(theta)
    budget = cfg.budget()
    improvement = detection_improvement(budget)
    items = {
        "input_um": p.input.wavelength_um,
        "pump_um": p.pump.wavelength_um,
        "output_um": p.output.wavelength_um,
        "axes": f"{p.input.axis}/{p.pump.axis}/{p.output.axis}",
        "length_mm": p.length_mm,
        "poling_period_um": p.poling_period_um,
        "alpha_ps_per_mm": group_velocity_mismatch(p),
        "top_hat_duration_ps": abs(group_velocity_mismatch(p)) * p.length_mm,
        "ivg_input_ps_per_mm": p.ivg(p.input),
        "ivg_pump_ps_per_mm": p.ivg(p.pump),
        "ivg_output_ps_per_mm": p.ivg(p.output),
        "phasematching_angle_deg": theta,
        "wavelength_plane_angle_deg": wavelength_plane_angle(p),
        "flat_phasematching": flat,
        "compression_factor": comp,
    }
    if flat:
        items["note"] = ("flat phase matching: output spectrum is independent of the input; "
                         "the device reshapes rather than compresses")
    items["detection_improvement"] = improvement
    items["detection_improvement_approx"] = approx_string(improvement)

    f1, f2 = cfg.spectra()
    span = cfg["design.map_span"] * f1.metadata["fwhm_omega"]
    n = cfg["design.map_points"]
    w_in = f1.grid.center + np.linspace(-span, span, n)
    w_out = f1.grid.center + f2.grid.center + np.linspace(-span, span, n)
    jtf = joint_transfer_function(p, f2, w_in, w_out)
    wi, wo = np.meshgrid(jtf.omega_in, jtf.omega_out)
    out = Path(out_dir)
    write_table_csv(out / "transfer_map.csv", {
        "omega_in_rad_per_ps": wi.ravel(), "omega_out_rad_per_ps": wo.ravel(),
        "abs": np.abs(jtf.values).ravel(), "re": jtf.values.real.ravel(),
        "im": jtf.values.imag.ravel(),
    })
    # rows = omega_out descending so the image reads like a plot
    pixels, offset, scale = encode_counts(np.abs(jtf.values)[::-1])
    write_pgm(out / "transfer_map.pgm", pixels, comment="qpgstreak transfer map |G|")
    write_keyvalue(out / "transfer_map.pgm.cal", {
        "kind": "transfer_map", "rows": n, "cols": n,
        "omega_in_first": w_in[0], "omega_in_last": w_in[-1],
        "omega_out_top": w_out[-1], "omega_out_bottom": w_out[0],
        "value_offset": offset, "value_scale": scale,
    })
    _report(out, "design_report.txt", items, stream)
    return 0


def cmd_simulate(cfg: ScenarioConfig, out_dir, stream=sys.stdout):
    p = cfg.process()
    f1, f2 = cfg.spectra()
    r = simulate(p, f1, f2, both_paths=True)
    out = Path(out_dir)
    write_complex_csv(out / "input_spectrum.csv", f1.omega, f1.values, "omega_rad_per_ps")
    write_complex_csv(out / "pump_spectrum.csv", f2.omega, f2.values, "omega_rad_per_ps")
    write_complex_csv(out / "output_spectrum.csv", r.output_spectrum.omega,
                      r.output_spectrum.values, "omega_rad_per_ps")
    write_complex_csv(out / "output_time_direct.csv", r.output_time.times,
                      r.output_time.values, "t_ps")
    write_complex_csv(out / "output_time_convolution.csv", r.output_time_convolution.times,
                      r.output_time_convolution.values, "t_ps")
    rect = phasematching_time_response(p, r.output_spectrum.grid)
    write_complex_csv(out / "phasematching_time_response.csv", rect.times, rect.values, "t_ps")
    items = {"length_mm": p.length_mm, "profile": p.profile.describe(),
             "poling_period_um": p.poling_period_um}
    items.update(r.summary())
    items["phasematching_response_fwhm_ps"] = fwhm(rect)
    items["transform_limited_input_fwhm_ps"] = fwhm(to_time_domain(f1))
    ok = r.equivalence_l2 < EQUIVALENCE_TOL
    items["equivalence_ok"] = ok
    _report(out, "simulate_summary.txt", items, stream)
    if not ok:
        print(f"error: direct and convolution paths differ by {r.equivalence_l2:.3e} "
              f"(tolerance {EQUIVALENCE_TOL:g})", file=sys.stderr)
        return PhysicsError.exit_code
    return 0


def _streak_signal(cfg):
    p = cfg.process()
    f1, f2 = cfg.spectra()
    cam = cfg.camera()
    r = simulate(p, f1, f2, both_paths=False)
    blurred = apply_irf(r.output_time, cam.irf_fwhm)
    sig = expected_signal(blurred, cam, p.output.wavelength_um, cfg.photons_per_pulse())
    return p, cam, r, sig


def cmd_streak(cfg: ScenarioConfig, out_dir, stream=sys.stdout):
    p, cam, r, sig = _streak_signal(cfg)
    seed = cfg["seed"]
    img = synthesize_image(sig, cam, seed)
    bg = synthesize_background(cam, seed + 1)
    out = Path(out_dir)
    save_image(img, out / "streak.pgm", kind="streak")
    save_image(bg, out / "background.pgm", kind="background")
    write_table_csv(out / "expected_signal.csv",
                    {"t_ps": cam.row_times, "photoelectron_counts": sig})
    items = {
        "seed": seed, "background_seed": seed + 1,
        "output_um": p.output.wavelength_um,
        "photons_per_pulse": cfg.photons_per_pulse(),
        "qe_output": cam.qe(p.output.wavelength_um),
        "expected_total_counts": float(np.sum(sig)),
        "expected_peak_counts_per_row": float(np.max(sig)),
        "background_mean_per_pixel": cam.background_mean(),
        "edge_to_edge_ps": r.edge_to_edge,
        "fwhm_time_ps": r.fwhm_time,
    }
    _report(out, "streak_report.txt", items, stream)
    return 0


def cmd_analyze(cfg: ScenarioConfig, image, background, out_dir, stream=sys.stdout):
    img = load_image(image)
    bg = load_image(background)
    alpha = group_velocity_mismatch(cfg.process(solve=False))
    res = analyze(img, bg, cfg["analysis.roi_lo"], cfg["analysis.roi_hi"],
                  cfg["camera.irf_fwhm_ps"], abs(alpha), cfg["analysis.bin_width_ps"])
    t = res.trace
    out = Path(out_dir)
    write_table_csv(out / "trace.csv", {
        "t_ps": t.t, "counts": t.counts, "error": t.errors,
        "gaussian_fit": res.gaussian.model(t.t), "tophat_fit": res.tophat.model(t.t),
    })
    items = {"alpha_ps_per_mm": abs(alpha), "roi": (cfg["analysis.roi_lo"], cfg["analysis.roi_hi"])}
    items.update(res.report())
    _report(out, "analysis_report.txt", items, stream)
    return 0


def cmd_budget(cfg: ScenarioConfig, out_dir, stream=sys.stdout):
    b = cfg.budget()
    value = detection_improvement(b)
    items = {
        "internal_conversion": b.internal_conversion,
        "external_conversion": b.external_conversion,
        "qe_ratio_out_vs_in": b.qe_ratio_out_vs_in,
        "detection_improvement": value,
        "detection_improvement_approx": approx_string(value),
    }
    print(f"{fmt(b.external_conversion)} x {fmt(b.qe_ratio_out_vs_in)} = {fmt(value)} "
          f"{approx_string(value)}", file=stream)
    _report(out_dir, "budget_report.txt", items, stream)
    return 0


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="config file or preset name (paper_type2, type0_17deg, "
                             "constant_degenerate); defaults apply otherwise")
    common.add_argument("--seed", type=int, help="override seed")
    common.add_argument("--out", default="out", metavar="DIR", help="output directory")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    common.add_argument("--length", type=float, metavar="MM", help="process.length_mm")
    common.add_argument("--profile", metavar="SPEC", help="process.profile")

    parser = argparse.ArgumentParser(
        prog="qpgstreak", description=__doc__.split("\n\n")[0],
        epilog=keys_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    fmt_cls = argparse.RawDescriptionHelpFormatter
    sub.add_parser("design", parents=[common], epilog=keys_help(), formatter_class=fmt_cls,
                   help="solve the poling period and report the process geometry")
    sub.add_parser("simulate", parents=[common], epilog=keys_help(), formatter_class=fmt_cls,
                   help="compute the up-converted spectrum and temporal envelope")
    sub.add_parser("streak", parents=[common], epilog=keys_help(), formatter_class=fmt_cls,
                   help="synthesise a streak image and a background image")
    a = sub.add_parser("analyze", parents=[common], epilog=keys_help(), formatter_class=fmt_cls,
                       help="fit a streak image against a background image")
    a.add_argument("image")
    a.add_argument("background")
    sub.add_parser("budget", parents=[common], epilog=keys_help(), formatter_class=fmt_cls,
                   help="print the detection-efficiency arithmetic")
    return parser


def _config_from_args(args):
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.length is not None:
        overrides.append(f"process.length_mm={args.length!r}")
    if args.profile is not None:
        overrides.append(f"process.profile={args.profile}")
    return ScenarioConfig.load(args.config, overrides)


def main(argv=None, stream=None):
    stream = sys.stdout if stream is None else stream
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        if args.command == "design":
            return cmd_design(cfg, args.out, stream)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, stream)
        if args.command == "streak":
            return cmd_streak(cfg, args.out, stream)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.image, args.background, args.out, stream)
        return cmd_budget(cfg, args.out, stream)
    except QpgStreakError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
