"""Command-line entry point.

Exit status: 0 success, 1 validation failure (maps differ, shape table
mismatch, bad input values or file contents), 2 I/O or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _Invalid(Exception):
    pass


def _load_scene(args):
    from .camera import load_camera
    from .geometry import load_obj

    return load_obj(args.mesh), load_camera(args.camera)


def cmd_compute(args) -> int:
    from .geometry import build_bvh
    from .occlusion import compute_rics_map, write_rics

    mesh, cam = _load_scene(args)
    t0 = time.perf_counter()
    accel = build_bvh(mesh)
    omap = compute_rics_map(cam, accel, threads=args.threads, epsilon_t=args.epsilon)
    dt = time.perf_counter() - t0
    write_rics(omap, args.output)
    print(f"wrote {args.output}: {omap.width}x{omap.height}, {int(omap.covered.sum())} covered pixels,"
          f" {mesh.n_active} triangles, {dt:.3f}s")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .occlusion import write_rics
    from .oracle import brute_force_rics_map

    mesh, cam = _load_scene(args)
    omap = brute_force_rics_map(cam, mesh, threads=args.threads, epsilon_t=args.epsilon)
    write_rics(omap, args.output)
    print(f"wrote {args.output}: {omap.width}x{omap.height}, {int(omap.covered.sum())} covered pixels")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .occlusion import read_rics

    a, b = read_rics(args.a), read_rics(args.b)
    if a.words.shape != b.words.shape:
        print(f"differ: size {a.width}x{a.height} vs {b.width}x{b.height}")
        return EXIT_INVALID
    diff = a.words != b.words
    if not diff.any():
        print("identical")
        return EXIT_OK
    ys, xs = np.nonzero(diff)
    print(f"differ: {int(diff.sum())} pixels (first at x={xs[0]}, y={ys[0]})")
    return EXIT_INVALID


def cmd_visualize(args) -> int:
    from pathlib import Path

    from .occlusion import read_rics
    from .visualize import export_dir_slices, export_popcount

    omap = read_rics(args.input)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    if args.mode in ("slices", "both"):
        n += len(export_dir_slices(omap, out, args.indices))
    if args.mode in ("popcount", "both"):
        export_popcount(omap, out / "popcount.png")
        n += 1
    print(f"wrote {n} images to {out}")
    return EXIT_OK


def cmd_edge_weights(args) -> int:
    from .harmonization import edge_weight_mask
    from .imageio import read_png, write_imgf

    shading = read_png(args.input)
    mask = edge_weight_mask(shading, args.base, args.alpha, args.sigma, args.low, args.high)
    write_imgf(mask, args.output)
    print(f"wrote {args.output}: {mask.shape[0]}x{mask.shape[1]}, max {float(mask.max()):.6g}")
    return EXIT_OK


def _read_tensor(path):
    from .imageio import read_imgf, read_png

    if str(path).lower().endswith(".png"):
        a = read_png(path)
        return a[..., None] if a.ndim == 2 else a
    return read_imgf(path).astype(np.float64)


def cmd_loss(args) -> int:
    from .harmonization import (
        LossWeights,
        edge_weight_mask,
        feature_matching,
        gan_d_loss,
        gan_g_loss,
        rgb_recon,
        total_objective,
        weighted_l1,
    )

    pred_s = _read_tensor(args.pred_shading)
    true_s = _read_tensor(args.target_shading)
    albedo = _read_tensor(args.albedo)
    true_g = _read_tensor(args.target_rgb)
    if args.weights:
        xw = _read_tensor(args.weights)
    else:
        xw = edge_weight_mask(true_s, args.base, args.alpha)
    recon_s = weighted_l1(pred_s, true_s, xw)
    recon_g = rgb_recon(pred_s, albedo, true_g)

    gan = fm = None
    d_loss = None
    if args.fake_scores:
        fake = _read_tensor(args.fake_scores)
        gan = gan_g_loss(fake)
        if args.real_scores:
            d_loss = gan_d_loss(_read_tensor(args.real_scores), fake)
    if args.real_features or args.fake_features:
        if len(args.real_features or []) != len(args.fake_features or []):
            raise _Invalid("--real-features and --fake-features need the same number of files")
        real = [_read_tensor(p) for p in args.real_features]
        fake_f = [_read_tensor(p) for p in args.fake_features]
        fm = feature_matching(real, fake_f, args.fm_layers or None)

    w = LossWeights(args.w_gan, args.w_fm, args.w_recon_s, args.w_recon_g)
    total = total_objective(gan or 0.0, fm or 0.0, recon_s, recon_g, w)

    def row(name, value, weight):
        shown = "n/a" if value is None else f"{value:.12e}"
        print(f"{name:<10s} {shown:>20s}  weight {weight:g}")

    row("recon_s", recon_s, w.recon_s)
    row("recon_g", recon_g, w.recon_g)
    row("gan_g", gan, w.gan)
    row("fm", fm, w.fm)
    if d_loss is not None:
        print(f"{'gan_d':<10s} {d_loss:>20.12e}")
    print(f"{'total':<10s} {total:>20.12e}")
    return EXIT_OK


def cmd_shapes(args) -> int:
    from .archcheck import verify_builtin_tables

    report = verify_builtin_tables()
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.format())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_slice(args) -> int:
    from .dataset import (
        TEST_STRIDE,
        TEST_WINDOW,
        TRAIN_STRIDE,
        TRAIN_WINDOW,
        read_manifest,
        slice_manifest,
        slice_sequences,
    )

    window = args.window or (TEST_WINDOW if args.mode == "test" else TRAIN_WINDOW)
    stride = args.stride or (TEST_STRIDE if args.mode == "test" else TRAIN_STRIDE)
    if args.manifest:
        rows = read_manifest(args.manifest)
        print("id,camera,start,length")
        for s in slice_manifest(rows, window, stride, not args.keep_short):
            print(f"{s.sequence_id},{s.camera_id},{s.start_frame},{s.length}")
    else:
        print(json.dumps(slice_sequences(args.len, window, stride, not args.keep_short)))
    return EXIT_OK


def cmd_remap(args) -> int:
    from .dataset import remap_labels
    from .imageio import read_png, write_png

    mask = read_png(args.input, normalize=False)
    if mask.ndim != 2:
        raise _Invalid("label mask must be single-channel")
    out = remap_labels(mask.astype(np.int64), args.map)
    write_png(out.astype(np.uint8), args.output)
    print(f"wrote {args.output}: labels {sorted(np.unique(out).tolist())}")
    return EXIT_OK


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rics", description="Self-occlusion maps and harmonization tooling")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, doc in (("compute", cmd_compute, "mesh + camera -> RICS file (BVH)"),
                          ("oracle", cmd_oracle, "mesh + camera -> RICS file (brute force)")):
        s = sub.add_parser(name, help=doc)
        s.add_argument("--mesh", required=True, help="triangulated OBJ file")
        s.add_argument("--camera", required=True, help="camera JSON file")
        s.add_argument("-o", "--output", required=True)
        s.add_argument("--threads", type=_positive_int, default=1)
        s.add_argument("--epsilon", type=float, default=None,
                       help="minimum hit distance (default 1e-4 x bbox diagonal)")
        s.set_defaults(func=fn)

    s = sub.add_parser("verify", help="bit-compare two RICS files")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("visualize", help="RICS file -> PNG direction slices / popcount")
    s.add_argument("input")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--mode", choices=("slices", "popcount", "both"), default="both")
    s.add_argument("--indices", type=int, nargs="+", default=None)
    s.set_defaults(func=cmd_visualize)

    s = sub.add_parser("edge-weights", help="shading PNG -> weight mask tensor")
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--base", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--low", type=float, default=0.05)
    s.add_argument("--high", type=float, default=0.15)
    s.set_defaults(func=cmd_edge_weights)

    s = sub.add_parser("loss", help="tensor dumps -> loss report")
    s.add_argument("--pred-shading", required=True)
    s.add_argument("--target-shading", required=True)
    s.add_argument("--albedo", required=True)
    s.add_argument("--target-rgb", required=True)
    s.add_argument("--weights", help="precomputed weight mask; default derives it from the target shading")
    s.add_argument("--base", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--real-scores")
    s.add_argument("--fake-scores")
    s.add_argument("--real-features", nargs="+")
    s.add_argument("--fake-features", nargs="+")
    s.add_argument("--fm-layers", type=int, nargs="*", default=[2, 3],
                   help="1-based layers for feature matching; empty for all")
    s.add_argument("--w-gan", type=float, default=1.0)
    s.add_argument("--w-fm", type=float, default=1000.0)
    s.add_argument("--w-recon-s", type=float, default=1.0)
    s.add_argument("--w-recon-g", type=float, default=10.0)
    s.set_defaults(func=cmd_loss)

    s = sub.add_parser("shapes", help="verify the built-in network shape tables")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_shapes)

    s = sub.add_parser("slice", help="sequence length or manifest -> window starts")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--len", type=int)
    g.add_argument("--manifest")
    s.add_argument("--mode", choices=("train", "test"), default="train")
    s.add_argument("--window", type=_positive_int)
    s.add_argument("--stride", type=_positive_int)
    s.add_argument("--keep-short", action="store_true")
    s.set_defaults(func=cmd_slice)

    s = sub.add_parser("remap", help="label PNG -> remapped label PNG")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--map", required=True, choices=("surreal14", "fsitting14", "surreal6", "up6"))
    s.set_defaults(func=cmd_remap)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (_Invalid, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
