"""Command-line interface.

Exit codes: 0 success, 2 invalid input or usage, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .als import AlsConfig
from .correction import METHOD_ALIASES, ChartMeasurement, apply_correction, evaluate, fit
from .errors import InputError, SolverError
from .homography import conjugation_deviation
from .io import (
    ENCODINGS,
    GridSpec,
    atomic_write,
    dump_json,
    extract_grid,
    format_patch_csv,
    load_patch_csv,
    read_image,
    save_patch_csv,
    write_json,
)
from .ransac import RansacConfig
from .report import evaluation_to_dict, format_table, plot_evaluation
from .synthetic import MODES, SynthSpec, generate_synthetic

EXIT_INPUT = 2
EXIT_SOLVER = 3


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--epsilon", type=float, default=AlsConfig.epsilon, help="ALS stopping threshold on the iterate change")
    g.add_argument("--max-iter", type=int, default=AlsConfig.max_iterations, help="ALS iteration cap")
    g.add_argument("--trials", type=int, default=RansacConfig.iterations, help="RANSAC samples")
    g.add_argument("--threshold", type=float, default=None, help="RANSAC inlier threshold (default: 0.02 chromaticity, 2.0 lab)")
    g.add_argument("--metric", choices=("chromaticity", "lab"), default="chromaticity", help="RANSAC goodness-of-fit")
    g.add_argument("--seed", type=int, default=0, help="RANSAC seed")


def _configs(args) -> tuple[AlsConfig, RansacConfig]:
    als = AlsConfig(epsilon=args.epsilon, max_iterations=args.max_iter)
    ransac = RansacConfig(iterations=args.trials, inlier_threshold=args.threshold, metric=args.metric, seed=args.seed)
    return als, ransac


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colorhomography", description="Shading-invariant color correction by color homography.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a 3x3 correction from camera to reference patches")
    p.add_argument("--src", required=True, help="camera patch CSV")
    p.add_argument("--ref", required=True, help="reference patch CSV")
    p.add_argument("--method", choices=tuple(METHOD_ALIASES), default="als")
    p.add_argument("--out", help="output JSON (default: stdout)")
    p.add_argument("--encoding", choices=ENCODINGS[:2], default="linear", help="encoding of --src values")
    p.add_argument("--ref-encoding", choices=ENCODINGS, default="linear")
    _add_solver_flags(p)

    p = sub.add_parser("apply", help="apply a fitted matrix to patches")
    p.add_argument("--matrix", required=True, help="JSON from `fit`, or a 9-element array")
    p.add_argument("--src", required=True)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.add_argument("--encoding", choices=ENCODINGS[:2], default="linear")

    p = sub.add_parser("eval", help="two-step protocol: fit on shaded patches, score shading-corrected ones in Lab")
    p.add_argument("--observed", required=True)
    p.add_argument("--gray", help="gray-card patch CSV for shading correction")
    p.add_argument("--shading-corrected", help="already shading-corrected patch CSV")
    p.add_argument("--ref", required=True)
    p.add_argument("--methods", nargs="+", choices=tuple(METHOD_ALIASES), default=["ls", "als"])
    p.add_argument("--encoding", choices=ENCODINGS[:2], default="linear", help="encoding of camera CSVs")
    p.add_argument("--ref-encoding", choices=ENCODINGS, default="linear")
    p.add_argument("--lab-path", choices=("linear", "srgb8"), default="linear", help="score linear values directly or after 8-bit sRGB quantization")
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--table", help="also write the text table here")
    p.add_argument("--figure", help="figure path (.png, .svg or .pdf)")
    _add_solver_flags(p)

    p = sub.add_parser("synth", help="write a seeded synthetic chart")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--n-patches", type=int, default=SynthSpec.n_patches)
    p.add_argument("--shading-low", type=float, default=SynthSpec.shading_low)
    p.add_argument("--shading-high", type=float, default=SynthSpec.shading_high)
    p.add_argument("--noise", type=float, default=SynthSpec.noise_sigma, help="relative Gaussian noise on observed values")
    p.add_argument("--mode", choices=MODES, default=SynthSpec.mode)
    p.add_argument("--seed", type=int, default=SynthSpec.seed)

    p = sub.add_parser("demo-theorem", help="check chromaticity(rho M) == H(chromaticity(rho)) on random maps")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("extract", help="average patches on an axis-aligned grid in a PPM/PNG image")
    p.add_argument("--image", required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--inset", type=float, default=0.25)
    p.add_argument("--encoding", choices=ENCODINGS[:2], default="linear")
    p.add_argument("--out", help="output CSV (default: stdout)")
    return parser


def _emit(text: str, path) -> None:
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _cmd_fit(args) -> int:
    src = load_patch_csv(args.src, args.encoding)
    ref = load_patch_csv(args.ref, args.ref_encoding)
    als, ransac = _configs(args)
    correction = fit(args.method, src, ref, als, ransac)
    _emit(dump_json(correction.to_dict()), args.out)
    return 0


def _read_matrix(path) -> np.ndarray:
    import json

    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read matrix JSON {path}: {exc}") from None
    values = obj.get("matrix") if isinstance(obj, dict) else obj
    if not isinstance(values, list) or len(values) != 9:
        raise InputError("matrix JSON needs a 9-element row-major array")
    return np.array(values, dtype=float).reshape(3, 3)


def _cmd_apply(args) -> int:
    m = _read_matrix(args.matrix)
    src = load_patch_csv(args.src, args.encoding)
    out, clamped = apply_correction(m, src)
    if clamped:
        print(f"clamped {clamped} negative value(s) to 0", file=sys.stderr)
    _emit(format_patch_csv(out), args.out)
    return 0


def _cmd_eval(args) -> int:
    observed = load_patch_csv(args.observed, args.encoding)
    reference = load_patch_csv(args.ref, args.ref_encoding)
    corrected = load_patch_csv(args.shading_corrected, args.encoding) if args.shading_corrected else None
    gray = load_patch_csv(args.gray, args.encoding) if args.gray else None
    measurement = ChartMeasurement(observed, reference, shading_corrected=corrected, gray=gray)
    als, ransac = _configs(args)
    results = evaluate(measurement, args.methods, lab_path=args.lab_path, als_config=als, ransac_config=ransac)
    table = format_table(results)
    sys.stdout.write(table)
    for method, ev in results.items():
        if ev.clamped:
            print(f"{method}: clamped {ev.clamped} negative value(s) to 0", file=sys.stderr)
    if args.table:
        atomic_write(args.table, table)
    if args.out:
        write_json(args.out, evaluation_to_dict(results))
    if args.figure:
        plot_evaluation(results, args.figure)
    return 0


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        n_patches=args.n_patches,
        shading_low=args.shading_low,
        shading_high=args.shading_high,
        noise_sigma=args.noise,
        mode=args.mode,
        seed=args.seed,
    )
    chart = generate_synthetic(spec)
    out = Path(args.out_dir)
    m = chart.measurement
    save_patch_csv(out / "observed.csv", m.observed)
    save_patch_csv(out / "shading_corrected.csv", m.shading_corrected)
    save_patch_csv(out / "reference.csv", m.reference)
    write_json(out / "ground_truth.json", chart.ground_truth())
    return 0


def _cmd_demo_theorem(args) -> int:
    worst = conjugation_deviation(args.samples, args.seed)
    print(f"max chromaticity deviation over {args.samples} random maps: {worst:.3e}")
    return 0


def _cmd_extract(args) -> int:
    image = read_image(args.image, args.encoding)
    patches = extract_grid(image, GridSpec(args.rows, args.cols, args.inset))
    _emit(format_patch_csv(patches), args.out)
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "apply": _cmd_apply,
    "eval": _cmd_eval,
    "synth": _cmd_synth,
    "demo-theorem": _cmd_demo_theorem,
    "extract": _cmd_extract,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
