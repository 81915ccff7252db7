"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 geometry error, 4 solver error.
The output directory defaults to ``--output`` and can be overridden with
the ``MORTEX_OUTPUT_DIR`` environment variable.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import bench
from .config import bench_grid, build_problem, load_config
from .errors import ConfigError, GeometryError, NonConvergenceError, SolverError
from .io import OUTPUT_ENV, output_dir, write_cut_vtk, write_profiles, write_result_vtk, \
    write_traction_csv

log = logging.getLogger("mortex")

EXIT_OK, EXIT_CONFIG, EXIT_GEOMETRY, EXIT_SOLVER = 0, 2, 3, 4


def _kappa(s: str):
    if s == "auto":
        return s
    try:
        k = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"kappa must be an integer or 'auto', got {s!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("kappa must be >= 1")
    return k


def _int_list(s: str) -> List[int]:
    try:
        return [int(t) for t in s.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {s!r}")


def _common(p: argparse.ArgumentParser, dual_default: Optional[str] = "sli-p1") -> None:
    p.add_argument("--dual", choices=("sli-p0", "sli-p1", "cgi"), default=dual_default,
                   help="multiplier interpolation: standard p0/p1 or coarse-grained")
    p.add_argument("--kappa", type=_kappa, default=None,
                   help="coarse-graining parameter (integer or 'auto' = round(m_c)); cgi only")
    p.add_argument("--output", default="out",
                   help=f"output directory (overridden by ${OUTPUT_ENV})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mortex", description="Mortar tying of embedded meshes.")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve the problem described by a config file")
    p.add_argument("config", help="path to a .cfg file")
    _common(p, dual_default=None)
    p.add_argument("--triangulate", action="store_true", default=None,
                   help="split blending quads into triangles")
    p.add_argument("--dump-cuts", action="store_true", help="also write the cut geometry")

    p = sub.add_parser("patch-test", help="compression or bending patch test")
    _common(p)
    p.add_argument("--case", type=int, choices=(1, 2), default=1, help="1 finer patch, 2 coarser")
    p.add_argument("--load", choices=("compression", "bending"), default="compression")
    p.add_argument("--host", choices=bench.HOST_TYPES, default="distorted", help="host mesh type")
    p.add_argument("--triangulate", action="store_true", help="split blending quads")
    p.add_argument("--contrast", type=float, default=1000.0, help="E1/E2")

    p = sub.add_parser("eshelby", help="circular inclusion against the closed-form solution")
    _common(p)
    p.add_argument("--nm", type=int, default=128, help="number of mortar segments")
    p.add_argument("--mc", type=float, default=6.0, help="target mesh contrast")
    p.add_argument("--triangulate", action="store_true", help="split blending quads")
    p.add_argument("--local", action="store_true", help="per-edge kappa from local contrast")

    p = sub.add_parser("convergence", help="inclusion error against the number of segments")
    p.add_argument("--nm", type=_int_list, default=[128, 256, 512, 1024],
                   help="comma separated segment counts")
    p.add_argument("--kappa", type=int, default=16, help="kappa of the cgi series")
    p.add_argument("--mc", type=float, default=6.0, help="target mesh contrast")
    p.add_argument("--triangulate", action="store_true", help="split blending quads")
    p.add_argument("--output", default="out", help=f"output directory (overridden by ${OUTPUT_ENV})")

    p = sub.add_parser("example", help="plate with a hole, nested multi-level model or the pathology set-up")
    p.add_argument("name", choices=sorted(bench.EXAMPLES))
    p.add_argument("--kappa", type=int, default=None, help="cgi kappa (3 plate, 4 multi-level, sli if unset for pathology)")
    p.add_argument("--output", default="out", help=f"output directory (overridden by ${OUTPUT_ENV})")

    p = sub.add_parser("dump-cuts", help="write the clipped host geometry of a config")
    p.add_argument("config", help="path to a .cfg file")
    p.add_argument("--triangulate", action="store_true", default=None,
                   help="split blending quads into triangles")
    p.add_argument("--output", default="out", help=f"output directory (overridden by ${OUTPUT_ENV})")
    return ap


def _out(args) -> Path:
    return output_dir(args.output)


def _emit(rep: "bench.BenchReport", out: Path, stem: str) -> None:
    bench.write_report_csv([rep], out / f"{stem}.csv")
    write_profiles(rep.profiles, out, prefix=f"{stem}_")
    for k, v in sorted(rep.metrics.items()):
        print(f"{k} = {v:.6e}")
    print(f"wrote {out / (stem + '.csv')}")


def _cmd_patch_test(args) -> None:
    cfg = bench.PatchTestConfig(case=args.case, load=args.load, scheme=args.dual,
                                kappa=args.kappa, host_type=args.host,
                                triangulate=args.triangulate, contrast=args.contrast)
    rep = bench.run_patch_test(cfg)
    out = _out(args)
    stem = f"patch_test_c{args.case}_{args.load}_{args.host}_{args.dual}"
    _emit(rep, out, stem)
    write_result_vtk(rep.result, out, prefix=stem + "_")


def _cmd_eshelby(args) -> None:
    cfg = bench.EshelbyConfig(n_mortar=args.nm, mesh_contrast=args.mc, scheme=args.dual,
                              kappa=args.kappa, triangulate=args.triangulate)
    rep = bench.eshelby_setup(cfg).run(args.dual, args.kappa, local=args.local)
    out = _out(args)
    stem = f"eshelby_n{args.nm}_{args.dual}"
    _emit(rep, out, stem)
    write_result_vtk(rep.result, out, prefix=stem + "_")


def _cmd_convergence(args) -> None:
    rows = bench.run_convergence(args.nm, (("sli-p1", None), ("cgi", args.kappa)),
                                 args.mc, args.triangulate)
    out = _out(args)
    path = out / "convergence.csv"
    bench.write_convergence_csv(rows, path)
    for scheme in ("sli-p1", "cgi"):
        e = [r["E_r"] for r in rows if r["scheme"] == scheme]
        print(f"slope {scheme} = {bench.convergence_slope(args.nm, e):.4f}")
    print(f"wrote {path}")


def _cmd_example(args) -> None:
    kw = {} if args.kappa is None else {"kappa": args.kappa}
    rep = bench.run_example(args.name, **kw)
    _emit(rep, _out(args), args.name)


def _run_bench(cfg, out: Path) -> None:
    b = cfg.bench
    kind = b["kind"]
    reports = []
    if kind == "convergence":
        kap = [k for k in b.get("kappa", [16]) if k != "auto"] or [16]
        schemes = [("sli-p1", None)] + [("cgi", k) for k in kap]
        rows = []
        for tri in b.get("triangulate", [False]):
            rows += bench.run_convergence(b.get("n_mortar", [128, 256, 512, 1024]), schemes,
                                          b.get("mesh_contrast", 6.0), tri)
        bench.write_convergence_csv(rows, out / f"{cfg.run['name']}.csv")
        print(f"wrote {out / (cfg.run['name'] + '.csv')}")
        return
    for point in bench_grid({k: v for k, v in b.items() if k not in ("kind", "kappa", "schemes")}):
        runs = [(s, None) for s in b.get("schemes", ["sli-p1"]) if s != "cgi"]
        if "cgi" in b.get("schemes", ["sli-p1"]):
            runs += [("cgi", k) for k in b.get("kappa", ["auto"])]
        if kind == "patch_test":
            pc = bench.PatchTestConfig(case=point.get("case", 1), load=point.get("load", "compression"),
                                       host_type=point.get("host", "distorted"),
                                       triangulate=point.get("triangulate", False),
                                       contrast=point.get("contrast", 1000.0),
                                       distortion=point.get("distortion", 0.3),
                                       seed=point.get("seed", 0))
            setup = bench.patch_test_setup(pc)
            reports += [setup.run(s, k) for s, k in runs]
        elif kind == "eshelby":
            ec = bench.EshelbyConfig(n_mortar=point.get("n_mortar", 128),
                                     mesh_contrast=point.get("mesh_contrast", 6.0),
                                     triangulate=point.get("triangulate", False))
            setup = bench.eshelby_setup(ec)
            reports += [setup.run(s, k, local=point.get("local_kappa", False)) for s, k in runs]
        else:
            k = b.get("kappa", [None])[0]
            kw = {} if k in (None, "auto") else {"kappa": k}
            reports.append(bench.run_example(point["name"], **kw))
    path = out / f"{cfg.run['name']}.csv"
    bench.write_report_csv(reports, path)
    for rep in reports:
        c = rep.config
        tag = " ".join(f"{k}={c[k]}" for k in ("case", "load", "host_type", "triangulate",
                                                 "contrast", "n_mortar", "scheme", "kappa")
                       if k in c)
        print(f"{rep.name} {tag} E_r={rep.metrics.get('E_r', float('nan')):.4e}")
    print(f"wrote {path}")


def _cmd_run(args) -> None:
    cfg = load_config(args.config)
    if args.dual is not None:
        cfg.run["dual"] = args.dual
    if args.kappa is not None:
        cfg.run["kappa"] = args.kappa
    if args.triangulate is not None:
        cfg.run["triangulate"] = args.triangulate
    out = output_dir(args.output if args.output != "out" else cfg.run["output"])
    if cfg.bench:
        _run_bench(cfg, out)
        return
    prob = build_problem(cfg)
    res = prob.solve(cfg.dual, cfg.kappa if cfg.dual == "cgi" else None,
                     local=cfg.run["local_kappa"])
    name = cfg.run["name"]
    write_result_vtk(res, out, prefix=name + "_")
    for k, t in enumerate(prob.tyings):
        write_traction_csv(res, k, out / f"{name}_{t.patch}_{t.polyline}.csv", t.center)
    for k, mc in enumerate(prob.contrast):
        print(f"tying {k}: N_m = {prob.chains[k].n_edges}, m_c = {mc.global_value:.4f}")
    if res.kappa is not None:
        print(f"kappa = {res.kappa}")
    print(f"residual = {res.solution.residual:.3e}")
    if args.dump_cuts:
        _dump(prob, out, name)
    print(f"wrote {out}")


def _dump(prob, out: Path, name: str) -> None:
    for host, cut in prob.cuts.items():
        p = out / f"{name}_cuts_{host}.vtk"
        write_cut_vtk(p, cut)
        n = cut.counts()
        print(f"{host}: " + ", ".join(f"{k} {v}" for k, v in n.items()) + f" -> {p}")


def _cmd_dump_cuts(args) -> None:
    cfg = load_config(args.config)
    if cfg.bench:
        raise ConfigError("dump-cuts needs a model configuration, not a bench sweep")
    if args.triangulate is not None:
        cfg.run["triangulate"] = args.triangulate
    prob = build_problem(cfg).prepare()
    _dump(prob, output_dir(args.output if args.output != "out" else cfg.run["output"]),
          cfg.run["name"])


_COMMANDS = {"run": _cmd_run, "patch-test": _cmd_patch_test, "eshelby": _cmd_eshelby,
             "convergence": _cmd_convergence, "example": _cmd_example,
             "dump-cuts": _cmd_dump_cuts}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GeometryError, NonConvergenceError) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
