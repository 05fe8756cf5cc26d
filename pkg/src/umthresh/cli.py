"""Command-line interface: ``umthresh <command> ...`` or ``python -m umthresh``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import datasets
from .baselines import multi_otsu, otsu
from .exceptions import IoFailure, UmthreshError
from .histogram import PeakConfig, PeakSet, compute_histogram
from .image_io import load_pgm, save_pgm
from .metrics import compare
from .neqr import ROUTES, binarization_counts, binarize, build_comparator, decode_binary
from .povm import GaussianEffect, IntensityBasis, apply_effect, build_uniform_state
from .qcircuit import cost_and_depth, run_basis, sample, simulate
from .stateprep import build_load_circuit, gen_angles
from .thresholding import ThresholdConfig, ThresholdSet, analyze, quantize

EXHAUSTIVE_MAX_Q = 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(out: Optional[Path], name: str, text: str) -> None:
    if out is None:
        return
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {out / name}: {exc}") from exc


def _save(img, out: Optional[Path], name: str) -> None:
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        save_pgm(img, out / name)


def _config(args, binary: bool = False) -> ThresholdConfig:
    peaks = PeakConfig(
        smooth_window=args.smooth_window,
        prominence_fraction=args.prominence,
        min_separation=args.min_separation,
        width_divisor=args.width_divisor,
    )
    mode = getattr(args, "mode", "exact")
    if mode == "sampled" and args.seed is None:
        raise UsageError("--mode sampled requires --seed")
    override = None
    if args.peaks_json:
        override = PeakSet.from_json(_read_text(args.peaks_json))
    return ThresholdConfig(
        peaks=peaks,
        mode=mode,
        shots=args.shots if mode == "sampled" else 1000,
        seed=args.seed,
        basis=args.basis,
        binary=binary,
        peak_override=override,
    )


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _curves_csv(analysis) -> str:
    p = len(analysis.measurements)
    header = "intensity," + ",".join(f"P{k}" for k in range(p))
    rows = [header]
    for row in analysis.curves():
        rows.append(f"{int(row[0])}," + ",".join(f"{v:.10f}" for v in row[1:]))
    return "\n".join(rows) + "\n"


def _histogram_csv(hist) -> str:
    lines = ["intensity,count"] + [f"{v},{int(c)}" for v, c in enumerate(hist.counts)]
    return "\n".join(lines) + "\n"


def _warn_degenerate(analysis) -> None:
    if analysis.degenerate:
        print("warning: image has a single intensity; threshold is degenerate", file=sys.stderr)


def cmd_thresholds(args) -> int:
    img = load_pgm(args.input)
    analysis = analyze(img, _config(args, binary=args.binary))
    _warn_degenerate(analysis)
    doc = analysis.thresholds.to_dict()
    doc["peaks"] = analysis.peaks.to_dict()["peaks"]
    text = _dump(doc)
    sys.stdout.write(text)
    out = Path(args.out) if args.out else None
    _write(out, "thresholds.json", text)
    _write(out, "curves.csv", _curves_csv(analysis))
    _write(out, "histogram.csv", _histogram_csv(analysis.histogram))
    return 0


def cmd_quantize(args) -> int:
    img = load_pgm(args.input)
    out = Path(args.out)
    rule = args.rule or ("binary-extremes" if args.binary else "segment-mean")
    if args.thresholds_json:
        tset = ThresholdSet.from_json(_read_text(args.thresholds_json))
    else:
        analysis = analyze(img, _config(args, binary=args.binary))
        _warn_degenerate(analysis)
        tset = analysis.thresholds
    results = {"unsharp": (tset, quantize(img, tset, rule))}
    if args.compare != "none":
        classes = len(tset) + 1
        if args.compare == "otsu" or classes == 2:
            base = ThresholdSet((otsu(compute_histogram(img)),), ({"kind": "otsu"},))
        else:
            base = multi_otsu(compute_histogram(img), classes)
        results[args.compare] = (base, quantize(img, base, rule))
    report = {"input": Path(args.input).name, "level_rule": rule, "methods": {}}
    for name, (ts, qimg) in results.items():
        _save(qimg, out, f"{name}.pgm")
        entry = compare(img, qimg).as_dict()
        entry["thresholds"] = list(ts.thresholds)
        report["methods"][name] = entry
    _write(out, "thresholds.json", tset.to_json() + "\n")
    text = _dump(report)
    _write(out, "report.json", text)
    sys.stdout.write(text)
    return 0


def cmd_binarize(args) -> int:
    img = load_pgm(args.input)
    out = Path(args.out)
    if args.threshold is None:
        analysis = analyze(img, _config(args, binary=True))
        _warn_degenerate(analysis)
        t = analysis.thresholds.thresholds[0]
    else:
        t = args.threshold
    doc = {"threshold": t, "route": args.route}
    if args.route == "full-circuit":
        counts = binarization_counts(img, t, args.shots, args.seed)
        n = img.width.bit_length() - 1
        result = decode_binary(counts, n, img.bit_depth)
        if args.shots is None:
            counts = {k: round(v, 12) for k, v in counts.items() if v > 1e-12}
        _write(out, "counts.json", _dump(counts))
        doc["counts"] = counts
    else:
        result = binarize(img, t, args.route)
    binary = result.to_image(img.bit_depth)
    _save(binary, out, "binary.pgm")
    doc["pixels"] = binary.pixels.tolist() if binary.pixels.size <= 64 else None
    sys.stdout.write(_dump(doc))
    return 0


def verify_comparator(q: int, pairs: int = 10_000, seed: int = 0) -> dict:
    """Check ancilla == (i > t) exhaustively for small q, on random pairs otherwise."""
    circuit = build_comparator(q)
    if q <= EXHAUSTIVE_MAX_Q:
        grid = [(t, i) for t in range(1 << q) for i in range(1 << q)]
        method = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        grid = rng.integers(0, 1 << q, size=(pairs, 2)).tolist()
        method = f"random-{pairs}"
    ok = True
    for t, i in grid:
        index = (i << 1) | (t << (q + 1))
        if (run_basis(circuit, index) & 1) != int(i > t):
            ok = False
            break
    report = cost_and_depth(circuit).as_dict()
    report.update({"q": q, "verified": ok, "checked": len(grid), "method": method,
                   "cost_bound": 7 * q, "depth_bound": q + 2})
    return report


def cmd_report_comparator(args) -> int:
    if args.q_min < 1 or args.q_max < args.q_min:
        raise UsageError("need 1 <= --q-min <= --q-max")
    rows = [verify_comparator(q, args.pairs, args.seed) for q in range(args.q_min, args.q_max + 1)]
    print(f"{'q':>3} {'cost':>5} {'depth':>5} {'ancilla':>7}  verified")
    for r in rows:
        print(f"{r['q']:>3} {r['quantum_cost']:>5} {r['depth']:>5} {r['ancilla_count']:>7}  "
              f"{'yes' if r['verified'] else 'NO'} ({r['method']})")
    _write(Path(args.out) if args.out else None, "comparator.json", _dump(rows))
    return 0 if all(r["verified"] for r in rows) else 2


def run_demo(shots: int = 1000, seed: int = 0) -> dict:
    """Unimodal 4-level example and 2x2 binarization, as plain data."""
    basis = IntensityBasis(datasets.CASE1_BASIS)
    effect = GaussianEffect(100, datasets.CASE1_WIDTH, basis)
    weighted = apply_effect(effect, build_uniform_state(basis))
    tree = gen_angles(weighted.probabilities())
    circuit = build_load_circuit(tree)
    counts = sample(simulate(circuit), circuit.measured, shots, seed)
    case1 = analyze(datasets.case1_image()).thresholds

    demo = datasets.demo_2x2_image()
    exact = binarization_counts(demo, datasets.DEMO_THRESHOLD)
    bits = decode_binary(exact, 1, demo.bit_depth)
    return {
        "case1": {
            "basis": list(basis.intensities),
            "amplitudes": [round(float(a), 6) for a in weighted.amplitudes],
            "angles": [round(float(a), 6) for a in tree.angles],
            "counts": counts,
            "shots": shots,
            "seed": seed,
            "threshold": list(case1.thresholds),
        },
        "binarization": {
            "outcomes": sorted(k for k, v in exact.items() if v > 1e-12),
            "image": bits.to_image(8).pixels.tolist(),
        },
    }


def cmd_demo(args) -> int:
    text = _dump(run_demo(args.shots, args.seed))
    sys.stdout.write(text)
    _write(Path(args.out) if args.out else None, "demo.json", text)
    return 0


def _add_peak_options(p, readout: bool = True):
    g = p.add_argument_group("peak detection and readout")
    g.add_argument("--smooth-window", type=int, default=9)
    g.add_argument("--prominence", type=float, default=0.05, help="fraction of the highest bin")
    g.add_argument("--min-separation", type=int, default=10)
    g.add_argument("--width-divisor", type=float, default=2.0)
    g.add_argument("--peaks-json", help="use these peaks instead of detecting them")
    g.add_argument("--basis", choices=("auto", "full", "present"), default="auto")
    if readout:
        g.add_argument("--mode", choices=("exact", "sampled"), default="exact")
        g.add_argument("--shots", type=int, default=1000)
        g.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="umthresh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("thresholds", help="compute thresholds for an image")
    p.add_argument("input")
    p.add_argument("--out", help="directory for thresholds.json, curves.csv, histogram.csv")
    p.add_argument("--binary", action="store_true", help="single threshold from the dominant peak")
    _add_peak_options(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("quantize", help="quantize an image and report PSNR/SSIM")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--rule", choices=("segment-mean", "peak-value", "binary-extremes"))
    p.add_argument("--compare", choices=("none", "otsu", "multi-otsu"), default="none")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--thresholds-json", help="skip detection and use these thresholds")
    _add_peak_options(p)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("binarize", help="binarize through the comparator circuit")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=int, help="default: pipeline threshold of the dominant peak")
    p.add_argument("--route", choices=ROUTES, default="per-pixel-circuit")
    p.add_argument("--shots", type=int, help="sample the full circuit (default: exact)")
    p.add_argument("--seed", type=int, default=0)
    _add_peak_options(p, readout=False)
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("report-comparator", help="comparator cost, depth and verification")
    p.add_argument("--q-min", type=int, default=1)
    p.add_argument("--q-max", type=int, default=4)
    p.add_argument("--pairs", type=int, default=10_000, help="random pairs for large q")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report_comparator)

    p = sub.add_parser("demo", help="reproduce the worked examples")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"umthresh: error: {exc}", file=sys.stderr)
        return 1
    except UmthreshError as exc:
        print(f"umthresh: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"umthresh: error: {exc}", file=sys.stderr)
        return 2
