"""Sequential cellular circuits: reference interpreter and iteration.

The interpreter is the denotational semantics every other engine must
match bit-for-bit.  Iteration is synchronous; the asynchronous mode keeps
a tile's registers unchanged with probability ``skip_prob`` per step
(the combinational update is always evaluated, only the register write is
skipped).
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field

import numpy as np

from .fields import Field, FieldType
from .lang import (Broadcast, Const, Expr, LayerRead, Pointwise, Reduce,
                   RotateCCW, RotateCW, Symmetry, Transfer, typecheck, walk)
from .locus import Locus


class RuntimeError_(RuntimeError):
    pass


# ----------------------------------------------------------------------
# reference interpreter


def _gather(vals, idx):
    out = vals[np.maximum(idx, 0)]
    out[idx < 0] = 0
    return out


_REDUCERS = {
    "AND": np.bitwise_and,
    "OR": np.bitwise_or,
    "XOR": np.bitwise_xor,
    "MIN": np.minimum,
    "MAX": np.maximum,
    "PLUS": np.add,
}


def eval_expr(e: Expr, medium, env, types=None, memo=None) -> np.ndarray:
    """Evaluate an expression to a value array in canonical point order."""
    if types is None:
        types = {}
        typecheck(e, medium, types)
    if memo is None:
        memo = {}
    for node in walk(e):
        if node in memo:
            continue
        t = types[node]
        if isinstance(node, LayerRead):
            f = env[node.name]
            if f.ftype != node.ftype:
                raise RuntimeError_(f"layer {node.name} is {f.ftype}, "
                                    f"expression wants {node.ftype}")
            memo[node] = f.values
        elif isinstance(node, Const):
            memo[node] = np.full(medium.locus_size(t.locus), node.value,
                                 dtype=np.uint8)
        elif isinstance(node, Pointwise):
            a = [memo[x] for x in node.args]
            op = node.op
            if op == "NOT":
                out = a[0] ^ 1
            elif op == "AND":
                out = a[0] & a[1]
            elif op == "OR":
                out = a[0] | a[1]
            elif op == "XOR":
                out = a[0] ^ a[1]
            elif op == "ADD":
                out = ((a[0].astype(np.int64) + a[1]) & ((1 << t.width) - 1))
            elif op == "MIN":
                out = np.minimum(a[0], a[1])
            elif op == "MAX":
                out = np.maximum(a[0], a[1])
            elif op == "GE":
                out = (a[0] >= node.k)
            elif op == "SHR":
                out = a[0] >> node.k
            memo[node] = out.astype(np.uint8)
        elif isinstance(node, Broadcast):
            memo[node] = memo[node.child][medium.tp_father[t.locus]]
        elif isinstance(node, Transfer):
            memo[node] = memo[node.child][medium.tp_partner[t.locus]]
        elif isinstance(node, Reduce):
            child_t = types[node.child]
            starts = medium.tp_starts[child_t.locus][:-1]
            vals = memo[node.child]
            if node.op == "PLUS":
                out = np.add.reduceat(vals.astype(np.int64), starts)
            else:
                out = _REDUCERS[node.op].reduceat(vals, starts)
            memo[node] = out.astype(np.uint8)
        elif isinstance(node, RotateCW):
            memo[node] = _gather(memo[node.child], medium.tp_succ[t.locus])
        elif isinstance(node, RotateCCW):
            memo[node] = _gather(memo[node.child], medium.tp_pred[t.locus])
        elif isinstance(node, Symmetry):
            memo[node] = _gather(memo[node.child], medium.tp_sym[t.locus])
        else:
            raise RuntimeError_(f"cannot evaluate {node!r}")
    return memo[e]


def interpret(e: Expr, medium, env) -> Field:
    types = {}
    typecheck(e, medium, types)
    vals = eval_expr(e, medium, env, types)
    return Field(medium, types[e], vals.copy())


# ----------------------------------------------------------------------
# circuits and configurations


@dataclass(frozen=True)
class CircuitDef:
    name: str
    layers: dict          # name -> FieldType
    updates: dict         # name -> Expr (same domain and codomain)

    def validate(self, medium):
        from .lang import free_variables
        for name, expr in self.updates.items():
            if name not in self.layers:
                raise RuntimeError_(f"update for undeclared layer {name}")
            for v in free_variables(expr):
                if v not in self.layers:
                    raise RuntimeError_(f"update reads undeclared layer {v}")
            t = typecheck(expr, medium)
            if t != self.layers[name]:
                raise RuntimeError_(
                    f"update for {name} has type {t}, layer is {self.layers[name]}")

    def memory_density(self, medium) -> float:
        total = 0.0
        for t in self.layers.values():
            total += t.width * medium.locus_size(t.locus) / medium.nv
        return total


@dataclass
class Configuration:
    fields: dict  # name -> Field
    t: int = 0

    def __eq__(self, other):
        return (set(self.fields) == set(other.fields)
                and all(self.fields[k] == other.fields[k] for k in self.fields))

    def copy_with(self, new_fields, t=None):
        return Configuration(dict(new_fields), self.t + 1 if t is None else t)


def initial_configuration(medium, cd: CircuitDef, fields=None) -> Configuration:
    out = {}
    for name, t in cd.layers.items():
        if fields and name in fields:
            out[name] = fields[name]
        else:
            out[name] = Field.constant(medium, t, 0)
    return Configuration(out, 0)


def interpreter_engine(cd: CircuitDef, medium):
    """Default engine: evaluate every update with the interpreter."""
    types = {}
    for expr in cd.updates.values():
        typecheck(expr, medium, types)

    def run(config: Configuration) -> dict:
        memo = {}
        out = {}
        for name, expr in cd.updates.items():
            out[name] = eval_expr(expr, medium, config.fields, types, memo).copy()
        return out

    return run


def _freeze_border(medium, name, ftype, vals):
    if medium.topology == "bordered" and ftype.locus is Locus.V:
        vals = vals.copy()
        vals[medium.border_ring] = 0
    return vals


def step(cd: CircuitDef, medium, config: Configuration, skip_prob=0.0,
         rng=None, engine=None) -> Configuration:
    """One synchronous update; per-tile register writes may be skipped."""
    if not 0.0 <= skip_prob < 1.0:
        raise RuntimeError_("skip_prob must be in [0, 1)")
    if engine is None:
        engine = interpreter_engine(cd, medium)
    new_vals = engine(config)
    out = {}
    skip = None
    if skip_prob > 0.0:
        if rng is None:
            raise RuntimeError_("asynchronous mode needs a seeded rng")
        skip = rng.random(medium.nv) < skip_prob
    for name, vals in new_vals.items():
        t = cd.layers[name]
        vals = _freeze_border(medium, name, t, vals)
        if skip is not None:
            mask = skip
            if t.locus is Locus.E:
                mask = skip[medium.tiles().edge_owner]
            elif t.locus is Locus.F:
                mask = skip[medium.tiles().face_owner]
            elif t.locus is not Locus.V:
                raise RuntimeError_("asynchronous layers must live on V, E or F")
            vals = np.where(mask, config.fields[name].values, vals)
        out[name] = Field(medium, t, vals)
    for name, f in config.fields.items():
        if name not in out:
            out[name] = f
    return config.copy_with(out)


@dataclass
class RunResult:
    config: Configuration
    t_c: int | None     # steps until the update stopped changing anything
    steps: int
    timed_out: bool
    history: list = field(default_factory=list)


def run_until_fixpoint(cd: CircuitDef, medium, config: Configuration,
                       max_steps: int, skip_prob=0.0, rng=None, engine=None,
                       keep_history=False, on_step=None) -> RunResult:
    """Iterate until the synchronous image of the state equals the state.

    With skips enabled the run still advances through skipped steps; the
    fixpoint test always asks whether the *unskipped* update would change
    anything, so random skips cannot fake convergence.
    """
    if max_steps < 1:
        raise RuntimeError_("max_steps must be >= 1")
    if engine is None:
        engine = interpreter_engine(cd, medium)
    history = [config] if keep_history else []
    cur = config
    for t in range(max_steps + 1):
        new_vals = engine(cur)
        fixed = True
        for name, vals in new_vals.items():
            vals = _freeze_border(medium, name, cd.layers[name], vals)
            if not np.array_equal(vals, cur.fields[name].values):
                fixed = False
                break
        if fixed:
            return RunResult(cur, cur.t, cur.t, False, history)
        if t == max_steps:
            break
        cur = step(cd, medium, cur, skip_prob, rng, engine)
        if keep_history:
            history.append(cur)
        if on_step:
            on_step(cur)
    return RunResult(cur, None, cur.t, True, history)


# ----------------------------------------------------------------------
# stock circuits


def growth_circuit(k=1) -> CircuitDef:
    """Blobs grow by k rings per step: x -> neighborhood^k(x)."""
    from .blobs import layer, neighborhoodV
    x = layer("x")
    e = x
    for _ in range(k):
        e = neighborhoodV(e)
    return CircuitDef(f"growth{k if k > 1 else ''}",
                      {"x": FieldType(Locus.V, 1)}, {"x": e})


def meet_probe_circuit() -> CircuitDef:
    """Exercises the meet machinery: x -> closure of (meetV, meetE)."""
    from .blobs import closureV, layer, meetE, meetV
    x = layer("x")
    return CircuitDef("meetprobe", {"x": FieldType(Locus.V, 1)},
                      {"x": closureV(meetV(x), meetE(x))})


# ----------------------------------------------------------------------
# trace output


def write_trace(directory, medium, cd, result: RunResult, seed, skip_prob):
    """One field dump per layer per step, plus a JSON run manifest."""
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for conf in result.history or [result.config]:
        for name, f in conf.fields.items():
            (directory / f"{name}_{conf.t:04d}.ccf").write_bytes(f.dump())
    manifest = {
        "circuit": cd.name,
        "medium": medium.content_hash(),
        "seed": seed,
        "skip_prob": skip_prob,
        "t_c": result.t_c,
        "steps": result.steps,
        "timed_out": result.timed_out,
    }
    (directory / "run.json").write_text(json.dumps(manifest, indent=2))
    return manifest
