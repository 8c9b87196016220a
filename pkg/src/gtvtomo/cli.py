"""Command-line interface.

Subcommands mirror the pipeline stages: ``phantom``, ``project``, ``noise``,
``denoise``, ``reconstruct``, ``experiment`` and ``table1``.  Exit codes:
0 success, 2 invalid arguments or spec, 3 I/O failure, 4 numerical
divergence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from gtvtomo.gtv_denoise import DenoiseConfig, denoise
from gtvtomo.noise import NoiseSpec, add_noise
from gtvtomo.patch_graph import PatchConfig, build_graph, extract_patches
from gtvtomo.phantoms import PHANTOM_KINDS, generate_phantom
from gtvtomo.pipeline import ExperimentSpec, run_experiment, run_table1, spec_from_file
from gtvtomo.projector import Geometry, Sinogram, build_projector, forward_project
from gtvtomo.recon import (
    ArtConfig,
    DivergenceError,
    FbpConfig,
    SirtConfig,
    art,
    fbp,
    sirt,
)
from gtvtomo.serialize import (
    read_image_raw,
    read_sinogram_raw,
    write_curve_csv,
    write_graph_edges_csv,
    write_image_pgm,
    write_image_raw,
    write_sinogram_csv,
    write_sinogram_raw,
)


def _add_phantom(sub):
    p = sub.add_parser("phantom", help="generate a test image")
    p.add_argument("--kind", choices=PHANTOM_KINDS, default="shepp-logan")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="raw IMG output path")
    p.add_argument("--pgm", help="also write a PGM preview")


def _add_project(sub):
    p = sub.add_parser("project", help="forward project an image")
    p.add_argument("--image", required=True)
    p.add_argument("--rays", type=int, default=95)
    p.add_argument("--num-angles", type=int, default=36)
    p.add_argument("--span", type=float, default=None, help="detector span (default n*sqrt(2))")
    p.add_argument("--out", required=True, help="raw SINO output path")
    p.add_argument("--csv", help="also write a CSV view (one column per angle)")


def _add_noise(sub):
    p = sub.add_parser("noise", help="add relative Gaussian noise to a sinogram")
    p.add_argument("--sino", required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def _add_denoise(sub):
    p = sub.add_parser(
        "denoise",
        help="graph total-variation denoising of a sinogram",
        description=(
            "The regularization weight multiplies a total variation that "
            "counts each unordered pixel pair once; if your weight was "
            "calibrated against a convention summing over ordered pairs, "
            "double it here."
        ),
    )
    p.add_argument("--sino", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--patch-side", type=int, default=3)
    p.add_argument("--neighbors", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="write the objective trace CSV")
    p.add_argument("--edges", help="write the patch-graph edge list CSV")


def _add_reconstruct(sub):
    p = sub.add_parser("reconstruct", help="reconstruct an image from a sinogram")
    p.add_argument("--sino", required=True)
    p.add_argument("--n", type=int, required=True, help="output image side")
    p.add_argument("--method", choices=("fbp", "art", "sirt"), default="fbp")
    p.add_argument("--span", type=float, default=None)
    p.add_argument("--fbp-filter", choices=("ram-lak", "shepp-logan", "cosine"), default="ram-lak")
    p.add_argument("--fbp-interpolation", choices=("linear", "nearest"), default="linear")
    p.add_argument("--art-lam", type=float, default=0.25)
    p.add_argument("--art-sweeps", type=int, default=100)
    p.add_argument("--art-row-order", choices=("sequential", "randomized"), default="sequential")
    p.add_argument("--sirt-lam", type=float, default=1.0)
    p.add_argument("--sirt-iterations", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", help="reference IMG for per-iteration error tracking")
    p.add_argument("--curve", help="write the error curve CSV (needs --truth)")
    p.add_argument("--out", required=True)
    p.add_argument("--pgm", help="also write a PGM preview")


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="full raw-vs-denoised pipeline run")
    p.add_argument("--spec", help="flat 'key = value' spec file")
    p.add_argument("--out-dir", dest="output_dir")
    p.add_argument("--phantom", choices=PHANTOM_KINDS)
    p.add_argument("--n", type=int)
    p.add_argument("--rays", type=int)
    p.add_argument("--num-angles", type=int)
    p.add_argument("--detector-span", type=float)
    p.add_argument("--noise-level", type=float)
    p.add_argument("--patch-side", type=int)
    p.add_argument("--neighbors", type=int)
    p.add_argument("--gammas", help="comma-separated weights (default: built-in sweep grid)")
    p.add_argument("--methods", help="comma-separated subset of fbp,art,sirt")
    p.add_argument("--art-lam", type=float)
    p.add_argument("--art-sweeps", type=int)
    p.add_argument("--art-row-order", choices=("sequential", "randomized"))
    p.add_argument("--sirt-lam", type=float)
    p.add_argument("--sirt-iterations", type=int)
    p.add_argument("--fbp-filter", choices=("ram-lak", "shepp-logan", "cosine"))
    p.add_argument("--fbp-interpolation", choices=("linear", "nearest"))
    p.add_argument("--denoise-epsilon", type=float)
    p.add_argument("--denoise-max-iters", type=int)
    p.add_argument("--seed", type=int)


def _add_table1(sub):
    p = sub.add_parser("table1", help="built-in four-row raw-vs-denoised benchmark")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seeds", default="1,2,3,4,5", help="comma-separated seed list")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--rays", type=int, default=95)
    p.add_argument("--num-angles", type=int, default=36)
    p.add_argument("--gammas", help="comma-separated sweep grid override")
    p.add_argument("--art-sweeps", type=int, default=100)
    p.add_argument("--sirt-iterations", type=int, default=500)
    p.add_argument("--noise-override", type=float, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtvtomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_phantom(sub)
    _add_project(sub)
    _add_noise(sub)
    _add_denoise(sub)
    _add_reconstruct(sub)
    _add_experiment(sub)
    _add_table1(sub)
    return parser


def _cmd_phantom(args) -> int:
    img = generate_phantom(args.kind, args.n, args.seed)
    write_image_raw(img, args.out)
    if args.pgm:
        write_image_pgm(img, args.pgm)
    return 0


def _cmd_project(args) -> int:
    img = read_image_raw(args.image)
    A = build_projector(Geometry(img.n, args.rays, args.num_angles, args.span))
    sino = forward_project(A, img)
    write_sinogram_raw(sino, args.out)
    if args.csv:
        write_sinogram_csv(sino, args.csv)
    return 0


def _cmd_noise(args) -> int:
    sino = read_sinogram_raw(args.sino)
    write_sinogram_raw(add_noise(sino, NoiseSpec(args.level, args.seed)), args.out)
    return 0


def _cmd_denoise(args) -> int:
    sino = read_sinogram_raw(args.sino)
    pcfg = PatchConfig(args.patch_side, args.neighbors)
    graph = build_graph(extract_patches(sino, pcfg), pcfg)
    cfg = DenoiseConfig(args.gamma, args.epsilon, args.max_iters)
    z, trace = denoise(sino.values, graph, cfg)
    write_sinogram_raw(Sinogram(sino.p, sino.q, z), args.out)
    if args.trace:
        write_curve_csv(trace.objective, args.trace, header=("iteration", "objective"))
    if args.edges:
        write_graph_edges_csv(graph, args.edges)
    print(f"denoised in {trace.iterations_run} iterations (converged={trace.converged})")
    return 0


def _cmd_reconstruct(args) -> int:
    sino = read_sinogram_raw(args.sino)
    geometry = Geometry(args.n, sino.p, sino.q, args.span)
    truth = read_image_raw(args.truth) if args.truth else None
    tracker = (lambda xv: float(np.linalg.norm(xv - truth.pixels))) if truth else None
    if args.method == "fbp":
        img = fbp(sino, geometry, FbpConfig(args.fbp_filter, args.fbp_interpolation))
        curve_values = None
    else:
        A = build_projector(geometry)
        if args.method == "art":
            cfg = ArtConfig(args.art_lam, args.art_sweeps, args.art_row_order, args.seed)
            img, curve = art(A, sino.values, cfg, tracker=tracker)
        else:
            cfg = SirtConfig(args.sirt_lam, args.sirt_iterations)
            img, curve = sirt(A, sino.values, cfg, tracker=tracker)
        curve_values = curve.values
    write_image_raw(img, args.out)
    if args.pgm:
        write_image_pgm(img, args.pgm)
    if args.curve:
        if curve_values is None or curve_values.size == 0:
            raise ValueError("--curve needs --truth and an iterative method")
        write_curve_csv(curve_values, args.curve)
    if truth is not None:
        print(f"l2 error: {float(np.linalg.norm(img.pixels - truth.pixels)):.6f}")
    return 0


def _cmd_experiment(args) -> int:
    overrides = {
        k: getattr(args, k)
        for k in (
            "phantom",
            "n",
            "rays",
            "num_angles",
            "detector_span",
            "noise_level",
            "patch_side",
            "neighbors",
            "art_lam",
            "art_sweeps",
            "art_row_order",
            "sirt_lam",
            "sirt_iterations",
            "fbp_filter",
            "fbp_interpolation",
            "denoise_epsilon",
            "denoise_max_iters",
            "seed",
            "output_dir",
        )
        if getattr(args, k, None) is not None
    }
    if args.gammas:
        overrides["gammas"] = tuple(float(v) for v in args.gammas.split(","))
    if args.methods:
        overrides["methods"] = tuple(m.strip() for m in args.methods.split(","))
    if args.spec:
        spec = spec_from_file(args.spec, overrides)
    else:
        spec = ExperimentSpec(**overrides)
    summary = run_experiment(spec)
    print(f"best gamma: {summary['best_gamma']!r}")
    for method, branches in summary["methods"].items():
        for branch, rec in branches.items():
            print(
                f"{method}/{branch}: final={rec['final_error']:.6f} "
                f"min={rec['min_error']:.6f} argmin={rec['argmin_iteration']}"
            )
    return 0


def _cmd_table1(args) -> int:
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    base = ExperimentSpec(
        n=args.n,
        rays=args.rays,
        num_angles=args.num_angles,
        gammas=tuple(float(v) for v in args.gammas.split(",")) if args.gammas else None,
        art_sweeps=args.art_sweeps,
        sirt_iterations=args.sirt_iterations,
    )
    record = run_table1(args.out_dir, seeds, base, noise_override=args.noise_override)
    with open(record["txt"]) as fh:
        print(fh.read())
    return 0


_COMMANDS = {
    "phantom": _cmd_phantom,
    "project": _cmd_project,
    "noise": _cmd_noise,
    "denoise": _cmd_denoise,
    "reconstruct": _cmd_reconstruct,
    "experiment": _cmd_experiment,
    "table1": _cmd_table1,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
