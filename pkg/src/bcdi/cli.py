"""Command-line pipeline: simulate -> mono -> reconstruct -> metrics -> render.

Exit codes: 0 ok, 2 config error, 3 I/O error, 4 numerical divergence.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, io, retrieval, simulate, solver
from .io import ConfigError, FormatError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4


def _default_threads():
    return int(os.environ.get("BCDI_THREADS", "1"))


def _config_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _spectrum_table(spec):
    return [{"ratio": float(g.ratio), "realized_ratio": float(g.realized_ratio),
             "pad": list(g.pad), "weight": float(w)} for g, w in spec.channels()]


def _write_provenance(out_dir, command, args, seed, extra):
    doc = {"command": command, "version": __version__, "seed": seed,
           "config": str(args.config) if args.config else None,
           "config_sha256": _config_hash(args.config) if args.config else None,
           "threads": args.threads}
    doc.update(extra)
    path = Path(out_dir) / f"{command}.provenance.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _out_dir(args, cfg):
    out = args.out or cfg.get("io", {}).get("output_dir", ".")
    Path(out).mkdir(parents=True, exist_ok=True)
    return Path(out)


def _seed(args, cfg):
    if args.seed is not None:
        return args.seed
    return int(cfg.get("io", {}).get("seed", 0))


def _write_trace_csv(path, rows, header):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_simulate(args):
    cfg = io.load_config(args.config)
    if "phantom" not in cfg:
        raise ConfigError("simulate needs a [phantom] section")
    ph_sec = cfg["phantom"]
    embed = int(ph_sec.get("embed", 128))
    extent = int(ph_sec["extent"]) if "extent" in ph_sec else None
    source = ph_sec.get("file") or ph_sec.get("name")
    if source is None:
        raise ConfigError("[phantom] needs 'name' or 'file'")
    phantom = simulate.load_phantom(source, (embed, embed), extent)

    spec = io.spectrum_from_config(cfg).bind(phantom.embedded.shape)
    mono = simulate.simulate_mono(phantom)
    poly = simulate.simulate_poly_independent(phantom, spec)

    out = _out_dir(args, cfg)
    io.write_pattern(out / "phantom.bcdi", phantom.embedded, io.DOMAIN_OBJECT)
    io.write_pattern(out / "mono.bcdi", mono, io.DOMAIN_PATTERN)
    io.write_pattern(out / "poly.bcdi", poly, io.DOMAIN_PATTERN)
    table = _spectrum_table(spec)
    _write_provenance(out, "simulate", args, _seed(args, cfg),
                      {"phantom": phantom.provenance,
                       "oversampling": phantom.oversampling,
                       "realized_channels": len(table),
                       "realized_spectrum": table})
    print(f"simulate: wrote phantom/mono/poly to {out} "
          f"({len(table)} merged channels)")
    return EXIT_OK


def cmd_monochromatize(args):
    cfg = io.load_config(args.config)
    in_path = cfg.get("io", {}).get("input")
    if in_path is None:
        raise ConfigError("mono needs [io] input = <poly pattern file>")
    b, _domain = io.read_pattern(in_path)
    spec = io.spectrum_from_config(cfg).bind(b.shape)
    scfg = io.solver_from_config(cfg)
    out = _out_dir(args, cfg)
    x, trace = solver.solve(b, spec, scfg)
    io.write_pattern(out / "recovered_mono.bcdi", x, io.DOMAIN_PATTERN)
    rows = solver.trace_csv_rows(trace, float(np.linalg.norm(b)))
    _write_trace_csv(out / "residual_trace.csv", rows,
                     ("iteration", "epsilon", "relative_residual"))
    _write_provenance(out, "mono", args, _seed(args, cfg),
                      {"input": str(in_path), "iterations": len(trace),
                       "final_relative_residual": rows[-1][2],
                       "realized_spectrum": _spectrum_table(spec)})
    print(f"mono: {len(trace)} iterations, final relative residual {rows[-1][2]:.3e}")
    return EXIT_OK


def cmd_reconstruct(args):
    cfg = io.load_config(args.config)
    in_path = cfg.get("io", {}).get("input")
    if in_path is None:
        raise ConfigError("reconstruct needs [io] input = <pattern file>")
    pattern, _domain = io.read_pattern(in_path)
    seed = _seed(args, cfg)
    rcfg, restarts = io.retrieval_from_config(cfg, seed=seed)
    out = _out_dir(args, cfg)
    best, states = retrieval.run_retrieval_multi(pattern, rcfg, restarts=restarts,
                                                 threads=args.threads)
    obj = best.obj.real if rcfg.real_object else np.abs(best.obj)
    io.write_pattern(out / "object.bcdi", obj, io.DOMAIN_OBJECT)
    for i, state in enumerate(states):
        _write_trace_csv(out / f"error_trace_{i}.csv", state.trace,
                         ("iteration", "fourier_error", "support_area"))
    errors = [retrieval.fourier_error(s) for s in states]
    _write_provenance(out, "reconstruct", args, seed,
                      {"input": str(in_path), "restarts": restarts,
                       "algorithm": rcfg.algorithm,
                       "final_errors": errors,
                       "best_restart": int(np.argmin(errors))})
    print(f"reconstruct: best of {restarts} restarts, "
          f"fourier error {min(errors):.4f}")
    return EXIT_OK


def cmd_metrics(args):
    x, _ = io.read_pattern(args.files[0])
    ref, _ = io.read_pattern(args.files[1])
    nrmse = simulate.pattern_nrmse(x, ref)
    rows = [("nrmse_full", nrmse)]
    if args.r_max:
        rows.append(("nrmse_lowfreq",
                     simulate.pattern_nrmse(x, ref, "low-frequency", args.r_max)))
    score, info = retrieval.register_and_compare(x, ref)
    rows.append(("registration_correlation", score))
    rows.append(("registration_shift", f"{info['shift'][0]};{info['shift'][1]}"))
    rows.append(("registration_twin", int(info["twin"])))
    writer = csv.writer(sys.stdout)
    writer.writerow(("metric", "value"))
    writer.writerows(rows)
    return EXIT_OK


def cmd_render(args):
    from PIL import Image

    grid, _ = io.read_pattern(args.files[0])
    if args.crop:
        from .grid import crop_center
        grid = crop_center(grid, (args.crop, args.crop))
    v = np.maximum(grid, 0.0)
    vmax = v.max() or 1.0
    if args.scale == "log":
        disp = np.log1p(v / vmax * 10.0 ** args.log_k)
    else:
        disp = v
    disp = disp / (disp.max() or 1.0)
    if args.gamma != 1.0:
        disp = disp ** (1.0 / args.gamma)
    img = (disp * 65535.0).round().astype(np.uint16)
    Image.fromarray(img).save(args.files[1])
    print(f"render: wrote {args.files[1]}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="bcdi",
                                     description="Broadband CDI monochromatization pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, needs_config=True, files=0):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="run config (INI)")
        else:
            p.set_defaults(config=None)
        if files:
            p.add_argument("files", nargs=files)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=_default_threads())
        p.set_defaults(func=func)
        return p

    add("simulate", cmd_simulate)
    add("mono", cmd_monochromatize)
    add("reconstruct", cmd_reconstruct)
    p = add("metrics", cmd_metrics, needs_config=False, files=2)
    p.add_argument("--r-max", type=float, default=None,
                   help="also report NRMSE over the central shape/r_max block")
    p = add("render", cmd_render, needs_config=False, files=2)
    p.add_argument("--scale", choices=("linear", "log"), default="log")
    p.add_argument("--log-k", type=float, default=4.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--crop", type=int, default=None)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except solver.DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
