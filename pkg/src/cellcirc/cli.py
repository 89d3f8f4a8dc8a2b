"""Command-line entry points.

Subcommands: ``medium gen|validate``, ``compile``, ``run``, ``voronoi``,
``render``.  Usage errors exit 2 (argparse default), verification
mismatches exit 1.  Given the same arguments and seeds, every output file
is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from .compiler import compile_circuit
from .fields import Field, FieldType
from .lang import ParseError, SpatialTypeError, parse_expr
from .locus import Locus
from .medium import MediumError, SimplicialMedium, build_hex_torus, build_isotropic
from .render import RenderSpec, render_svg
from .runtime import (CircuitDef, Configuration, growth_circuit,
                      interpreter_engine, meet_probe_circuit,
                      run_until_fixpoint, step, write_trace)
from .voronoi import (VoronoiError, compare, oracle_vd, run_vd,
                      seeds_to_field, vd_circuit, wavefront_vd)


def load_medium(spec: str) -> SimplicialMedium:
    if spec.startswith("hex:"):
        cols, rows = spec[4:].split("x")
        return build_hex_torus(int(cols), int(rows))
    if spec.startswith("iso:"):
        parts = spec[4:].split(":")
        n = int(parts[0])
        seed = int(parts[1]) if len(parts) > 1 else 0
        relax = int(parts[2]) if len(parts) > 2 else 30
        return build_isotropic(n, seed, relax)
    return SimplicialMedium.from_json(pathlib.Path(spec).read_text())


def load_circuit(name: str) -> CircuitDef:
    if name == "voronoi":
        return vd_circuit()
    if name == "meetprobe":
        return meet_probe_circuit()
    if name.startswith("growth"):
        k = int(name.split(":")[1]) if ":" in name else 1
        return growth_circuit(k)
    raise SystemExit(f"unknown circuit {name!r} "
                     "(expected voronoi, growth[:k], meetprobe)")


def make_engine(kind, cd, medium):
    if kind == "interp":
        return interpreter_engine(cd, medium)
    from .engines import bitparallel_engine, gate_engine
    if kind == "gate":
        return gate_engine(cd, medium)
    if kind == "bitparallel":
        return bitparallel_engine(cd, medium)
    raise SystemExit(f"unknown engine {kind!r}")


def initial_field(medium, spec, seed):
    t = FieldType(Locus.V, 1)
    if spec.startswith("random:"):
        return Field.random(medium, t, seed, float(spec.split(":")[1]))
    if spec.startswith("points:"):
        pts = [int(p) for p in spec.split(":")[1].split(",") if p]
        return Field.from_points(medium, t, pts)
    raise SystemExit(f"bad --init {spec!r} (random:DENSITY or points:A,B,...)")


def cmd_medium(args):
    if args.action == "gen":
        if args.kind == "hex":
            m = build_hex_torus(args.cols, args.rows)
        else:
            m = build_isotropic(args.n, args.seed, args.relax)
        text = m.to_json()
        if args.out:
            pathlib.Path(args.out).write_text(text)
            print(f"wrote {args.out} ({m.nv} vertices, hash {m.content_hash()})")
        else:
            print(text)
        return 0
    m = load_medium(args.medium)
    rep = m.validate()
    doc = {
        "passed": rep.passed,
        "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in rep.checks],
        "degree_histogram": rep.degree_histogram,
    }
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        for n, ok, d in rep.checks:
            print(f"{'ok  ' if ok else 'FAIL'} {n} {d}")
        print("degrees:", rep.degree_histogram)
    return 0 if rep.passed else 1


def cmd_compile(args):
    m = load_medium(args.medium)
    try:
        if args.expr:
            target = parse_expr(args.expr)
        else:
            target = load_circuit(args.circuit)
        cc = compile_circuit(target, m)
    except (ParseError, SpatialTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    doc = cc.report()
    if args.netlist:
        if cc.tile_program is None:
            print("error: no tile netlist for this medium/expression",
                  file=sys.stderr)
            return 1
        pathlib.Path(args.netlist).write_text(
            json.dumps(cc.tile_program.netlist(), indent=1))
        doc["netlist"] = args.netlist
    print(json.dumps(doc, indent=2) if args.json or args.report else doc)
    return 0


def cmd_run(args):
    m = load_medium(args.medium)
    cd = load_circuit(args.circuit)
    cd.validate(m)
    engine = make_engine(args.engine, cd, m)
    rng = np.random.default_rng(args.seed)
    f = initial_field(m, args.init, args.seed)
    conf = Configuration({"x": f}, 0)
    if args.steps is not None:
        history = [conf]
        for _ in range(args.steps):
            conf = step(cd, m, conf, args.skip_prob, rng, engine)
            history.append(conf)
        from .runtime import RunResult
        result = RunResult(conf, None, conf.t, False, history)
    else:
        result = run_until_fixpoint(cd, m, conf, args.max_steps,
                                    args.skip_prob, rng, engine,
                                    keep_history=bool(args.trace))
    doc = {"circuit": cd.name, "steps": result.steps, "t_c": result.t_c,
           "timed_out": result.timed_out,
           "popcount": {n: f.popcount() for n, f in result.config.fields.items()}}
    if args.trace:
        write_trace(args.trace, m, cd, result, args.seed, args.skip_prob)
        doc["trace"] = args.trace
    print(json.dumps(doc, indent=2) if args.json else doc)
    return 0


def cmd_voronoi(args):
    m = load_medium(args.medium)
    seed_doc = json.loads(pathlib.Path(args.seeds).read_text())
    rng = np.random.default_rng(args.seed)
    try:
        run = run_vd(m, seed_doc, skip_prob=args.skip_prob, rng=rng,
                     max_steps=args.max_steps,
                     keep_history=bool(args.trace))
    except VoronoiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = {
        "t_c": run.t_c,
        "timed_out": run.timed_out,
        "filled": run.final.popcount(),
        "seed_blobs": run.nblobs,
        "multi_vertices": run.multi_vertices.popcount(),
        "blob_counts": run.blob_counts,
    }
    code = 0
    if args.compare_oracle:
        rep = compare(run, oracle_vd(m, run.seeds), m,
                      wavefront_vd(m, run.seeds))
        doc["oracle"] = {
            "wavefront_mismatches": len(rep.mismatches),
            "distance_strict_mismatches": len(rep.distance_mismatches),
            "clean_meetings": rep.clean,
            "blob_count_conserved": rep.blob_count_ok,
            "multi_disjoint": rep.multi_disjoint,
        }
        if rep.mismatches or not rep.blob_count_ok:
            code = 1
    if args.trace:
        cd = vd_circuit()
        from .runtime import RunResult
        hist = RunResult(
            Configuration({"x": run.final}, run.steps), run.t_c, run.steps,
            run.timed_out, [])
        write_trace(args.trace, m, cd, hist, args.seed, args.skip_prob)
        (pathlib.Path(args.trace) / "vertex_vd.ccf").write_bytes(
            run.vertex_vd.dump())
        (pathlib.Path(args.trace) / "multi.ccf").write_bytes(
            run.multi_vertices.dump())
        doc["trace"] = args.trace
    print(json.dumps(doc, indent=2) if args.json else doc)
    return code


def cmd_render(args):
    m = load_medium(args.medium)
    layers = []
    for spec in args.field or []:
        path, _, color = spec.rpartition(":")
        fld = Field.load(m, pathlib.Path(path).read_bytes())
        layers.append((fld, color or "#3b6ea5"))
    for spec in args.expr or []:
        text, _, color = spec.rpartition(":")
        expr = parse_expr(text)
        env = {"x": initial_field(m, args.init, args.seed)}
        from .runtime import interpret
        layers.append((interpret(expr, m, env), color or "#3b6ea5"))
    svg = render_svg(RenderSpec(m, layers, show_transfer=args.transfer_locus))
    pathlib.Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="cellcirc",
        description="fields over maximal planar media, compiled to "
                    "cellular logic circuits")
    p.add_argument("--seed", type=int, default=0, help="global RNG seed")
    p.add_argument("--json", action="store_true",
                   help="machine-readable output on stdout")
    sub = p.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("medium", help="generate or validate media")
    pms = pm.add_subparsers(dest="action", required=True)
    g = pms.add_parser("gen")
    g.add_argument("--kind", choices=("hex", "isotropic"), required=True)
    g.add_argument("--cols", type=int, default=16)
    g.add_argument("--rows", type=int, default=16)
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--relax", type=int, default=30)
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_medium)
    v = pms.add_parser("validate")
    v.add_argument("medium")
    v.set_defaults(func=cmd_medium)

    pc = sub.add_parser("compile", help="lower to gates and report stats")
    pc.add_argument("--medium", required=True, help="hex:CxR, iso:N[:SEED[:RELAX]], or a JSON path")
    src = pc.add_mutually_exclusive_group(required=True)
    src.add_argument("--expr", help="prefix expression, e.g. 'meetV(x)'")
    src.add_argument("--circuit", help="voronoi, growth[:k], meetprobe")
    pc.add_argument("--report", action="store_true", help="JSON report")
    pc.add_argument("--netlist", help="write the tile netlist JSON here")
    pc.set_defaults(func=cmd_compile)

    pr = sub.add_parser("run", help="iterate a sequential circuit")
    pr.add_argument("--medium", required=True)
    pr.add_argument("--circuit", required=True)
    pr.add_argument("--engine", default="interp",
                    choices=("interp", "gate", "bitparallel"))
    pr.add_argument("--init", default="random:0.5")
    pr.add_argument("--steps", type=int)
    pr.add_argument("--max-steps", type=int, default=10000)
    pr.add_argument("--skip-prob", type=float, default=0.0)
    pr.add_argument("--trace")
    pr.set_defaults(func=cmd_run)

    pv = sub.add_parser("voronoi", help="run the Voronoi circuit on seeds")
    pv.add_argument("--medium", required=True)
    pv.add_argument("--seeds", required=True,
                    help="JSON file: list of vertex lists")
    pv.add_argument("--skip-prob", type=float, default=0.0)
    pv.add_argument("--max-steps", type=int)
    pv.add_argument("--trace")
    pv.add_argument("--compare-oracle", action="store_true")
    pv.set_defaults(func=cmd_voronoi)

    prd = sub.add_parser("render", help="render fields over the VEF tiling")
    prd.add_argument("--medium", required=True)
    prd.add_argument("--field", action="append",
                     help="DUMP_PATH:COLOR (repeatable)")
    prd.add_argument("--expr", action="append",
                     help="EXPRESSION:COLOR evaluated on --init (repeatable)")
    prd.add_argument("--init", default="random:0.5")
    prd.add_argument("--transfer-locus", action="store_true")
    prd.add_argument("-o", "--out", required=True)
    prd.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MediumError, VoronoiError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
