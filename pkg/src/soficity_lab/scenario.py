"""Scenario files: ordered module operations with wiring, run into a JSON report.

A scenario is JSON::

    {"name": "...", "seed": 0, "output": "report.json",
     "steps": [{"id": "act", "op": "actions.projective", "params": {"d": 5, "p": 2}},
               {"id": "dens", "op": "actions.density", "params": {"action": {"ref": "act"}}}]}

A parameter ``{"ref": "step"}`` resolves to the Python object produced by
that step; ``{"ref": "step.key.sub"}`` digs into the step's JSON payload.
All randomness comes from one ``random.Random(seed)`` per run, consumed in
step order, so payloads are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema

from . import __version__
from . import actions, modmat, obstruction, pingpong, presentations, quotient_structure, schreier, sofic
from .errors import ConfigError, SoficityLabError

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["name", "steps"],
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer"},
        "output": {"type": "string"},
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "op"],
                "properties": {
                    "id": {"type": "string"},
                    "op": {"type": "string"},
                    "params": {"type": "object"},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["scenario", "version", "seed", "config", "steps", "timings"],
    "properties": {
        "scenario": {"type": "string"},
        "version": {"type": "string"},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "op", "payload"],
                "properties": {"id": {"type": "string"}, "op": {"type": "string"}},
            },
        },
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def lower_rational(x: float, denominator: int = 10**6) -> Fraction:
    """Largest multiple of ``1/denominator`` not above ``x``."""
    return Fraction(math.floor(x * denominator), denominator)


@dataclass
class Context:
    seed: int
    rng: random.Random
    objects: dict[str, Any] = field(default_factory=dict)
    payloads: dict[str, Any] = field(default_factory=dict)


# -- operations ---------------------------------------------------------------------
# Each op takes resolved params and the context and returns (payload, object).

def _op_order(params, ctx):
    d, p, n = int(params["d"]), int(params["p"]), int(params.get("n", 1))
    card = modmat.psl_order(d, p)
    out = card.to_json()
    if n > 1:
        out["n"] = n
        out["orderModPn"] = modmat.psl_order_prime_power(d, p, n)
    return out, card


def _op_frattini(params, ctx):
    rep = quotient_structure.frattini_probe(
        int(params["d"]), int(params["p"]), int(params["n"]),
        trials=int(params.get("trials", 50)), seed=int(params.get("seed", ctx.seed)),
    )
    return rep.to_json(), rep


def _named_group(spec):
    kind = spec[0]
    if kind == "alt":
        return quotient_structure.alternating_group(int(spec[1]))
    if kind == "psl":
        return quotient_structure.psl_perm_group(int(spec[1]), int(spec[2]))
    if kind == "trivial":
        return quotient_structure.trivial_group()
    raise ConfigError("", f"unknown group {spec!r}")


def _op_normal_subgroups(params, ctx):
    h1, h2 = (_named_group(s) for s in params["factors"])
    rep = quotient_structure.normal_subgroups_of_product(h1, h2)
    return rep.to_json(), rep


def _action_of(params):
    act = params.get("action")
    if isinstance(act, actions.LabeledAction):
        return act
    return actions.projective_action(int(params["d"]), int(params["p"]))


def _op_projective(params, ctx):
    act = actions.projective_action(int(params["d"]), int(params["p"]))
    return {"n": act.n, "families": {k: list(v) for k, v in act.families.items()}}, act


def _op_density(params, ctx):
    act = _action_of(params)
    rep = actions.density_report(act, params.get("a", "full"), params.get("b", "psl2block"))
    return rep.to_json(), rep


def _op_orbits(params, ctx):
    act = _action_of(params)
    part = actions.orbit_partition(act, params.get("family", "psl2block"))
    sizes = part.size_multiset()
    return {
        "n": act.n,
        "blocks": [list(b) for b in part.blocks],
        "sizeMultiset": {str(k): sizes[k] for k in sorted(sizes)},
    }, part


def _op_containment(params, ctx):
    act = _action_of(params)
    res = actions.orbit_containment_check(act, params.get("a", "full"), params.get("b", "psl2block"))
    return {"holds": res.holds, "witness": list(res.witness) if res.witness else None}, res


def _graph_of(params) -> schreier.MultiGraph:
    g = params.get("graph")
    if isinstance(g, schreier.MultiGraph):
        return g
    kind = params.get("kind")
    if kind == "cycle":
        return schreier.cycle_graph(int(params["n"]))
    if kind == "complete":
        return schreier.complete_graph(int(params["n"]))
    if "edges" in params:
        return schreier.MultiGraph(int(params["n"]), tuple((int(u), int(v), str(lb)) for u, v, lb in params["edges"]))
    return schreier.build_schreier(_action_of(params), params.get("family", "full"))


def _op_graph(params, ctx):
    g = _graph_of(params)
    return {"n": g.n, "edgeCount": len(g.edges), "degrees": g.degrees()}, g


def _op_expansion(params, ctx):
    g = _graph_of(params)
    mode = params.get("mode", "exact" if g.n <= schreier.EXACT_MAX_VERTICES else "spectral")
    res = schreier.expansion_exact(g) if mode == "exact" else schreier.expansion_spectral(g)
    out = res.to_json()
    c = res.value if mode == "exact" else lower_rational(res.lo)
    out["measuredC"] = fraction_str(c)
    return out, res


def covering_instance(d: int = 2, p: int = 5):
    """Cayley graph of PSL_d(F_p) on elementary generators over the Schreier graph on P^{d-1}."""
    gens = modmat.elementary_generators(d, p)
    base_act = actions.projective_action(d, p)
    labels = list(base_act.family("full"))
    cover_act = actions.cayley_action(gens, labels)
    base_point = [1] + [0] * (d - 1)
    fiber = actions.orbit_map(cover_act.point_labels, d, p, base_point)
    cover = schreier.build_schreier(cover_act, "gens")
    base = schreier.build_schreier(base_act, "full")
    return cover, base, fiber


def _op_cover(params, ctx):
    cover, base, fiber = covering_instance(int(params.get("d", 2)), int(params.get("p", 5)))
    rep = schreier.covering_ratio_check(
        cover, base, fiber, trials=int(params.get("trials", 100)), seed=int(params.get("seed", ctx.seed))
    )
    out = rep.to_json()
    out.update({"coverVertices": cover.n, "baseVertices": base.n})
    return out, rep


def _op_sofic_score(params, ctx):
    if "text" in params:
        model = sofic.parse_sofic(params["text"])
    else:
        model = sofic.parse_sofic(Path(params["path"]).read_text())
    rep = sofic.defect_report(model)
    return rep.to_json(), rep


def _op_obstruction(params, ctx):
    act = _action_of(params)
    fam_a, fam_b = params.get("a", "full"), params.get("b", "psl2block")
    c = obstruction.as_fraction(params["measuredC"])
    lam = obstruction.as_fraction(params["measuredLambda"])
    trials = int(params.get("trials", 1))
    taus = params.get("tau")
    reports = []
    for _ in range(trials):
        tau = tuple(taus) if taus is not None else obstruction.random_involution(act.n, ctx.rng)
        inst = obstruction.ObstructionInstance.from_action(act, fam_a, fam_b, tau, c, lam)
        reports.append(obstruction.bad_edge_count(inst))
    out = {
        "trials": trials,
        "reports": [r.to_json() for r in reports],
        "boundHoldsAll": all(r.bound_holds for r in reports if r.theorem_instance),
        "theoremInstances": sum(r.theorem_instance for r in reports),
    }
    return out, reports


def _op_obstruction_instance(params, ctx):
    inst = obstruction.ObstructionInstance.from_json(params["instance"])
    rep = obstruction.bad_edge_count(inst)
    return rep.to_json(), rep


def _ballsets(data):
    return [pingpong.BallSet.from_json(b) for b in data]


def _op_pingpong_check(params, ctx):
    mats = [[list(map(int, r)) for r in m] for m in params["matrices"]]
    if "power" in params:
        mats = [pingpong.matrix_power(m, int(params["power"])) for m in mats]
    if "balls" in params:
        o = _ballsets(params["balls"])
    else:
        r = float(params["radius"])
        o = []
        for m in mats:
            prof = pingpong.classify_hyperbolic(m)
            o.append(pingpong.BallSet.around([prof.alpha, prof.alpha_inv], r))
    res = pingpong.check_rooted_system(mats, o, grid=int(params.get("grid", 2000)),
                                       margin=float(params.get("margin", 1e-3)))
    return res.to_json(), res


def _op_pingpong_free(params, ctx):
    mats = [[list(map(int, r)) for r in m] for m in params["matrices"]]
    if "power" in params:
        mats = [pingpong.matrix_power(m, int(params["power"])) for m in mats]
    res = pingpong.free_witness(mats, int(params.get("maxLen", 8)), names=params.get("names"))
    return res.to_json(), res


def _op_hnn2(params, ctx):
    pres = presentations.HNN2Presentation.from_json(params)
    rels = pres.relators
    return {"relators": [str(w) for w in rels], "count": len(rels)}, rels


OPS: dict[str, Callable] = {
    "modmat.order": _op_order,
    "quotient.frattini": _op_frattini,
    "quotient.normal_subgroups": _op_normal_subgroups,
    "actions.projective": _op_projective,
    "actions.density": _op_density,
    "actions.orbits": _op_orbits,
    "actions.containment": _op_containment,
    "schreier.graph": _op_graph,
    "schreier.expansion": _op_expansion,
    "schreier.cover": _op_cover,
    "sofic.score": _op_sofic_score,
    "obstruction.run": _op_obstruction,
    "obstruction.instance": _op_obstruction_instance,
    "pingpong.check": _op_pingpong_check,
    "pingpong.free": _op_pingpong_free,
    "present.hnn2": _op_hnn2,
}


# -- running ------------------------------------------------------------------------

@dataclass
class Report:
    scenario: str
    version: str
    seed: int
    config: dict
    steps: list[dict]
    timings: dict[str, float]
    objects: dict[str, Any] = field(default_factory=dict, repr=False)

    def payloads(self) -> list[dict]:
        return [{"id": s["id"], "op": s["op"], "payload": s["payload"]} for s in self.steps]

    def payload_bytes(self) -> bytes:
        """Canonical serialization of the deterministic part (everything except timings)."""
        return json.dumps(self.payloads(), sort_keys=True, separators=(",", ":")).encode()

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "version": self.version,
            "seed": self.seed,
            "config": self.config,
            "steps": self.payloads(),
            "timings": self.timings,
        }


def _resolve(value, ctx: Context, step_id: str):
    if isinstance(value, dict):
        if set(value) == {"ref"}:
            ref = str(value["ref"])
            head, *path = ref.split(".")
            if head not in ctx.payloads:
                raise ConfigError(step_id, f"reference to unknown or later step {head!r}")
            if not path:
                return ctx.objects[head]
            cur = ctx.payloads[head]
            for key in path:
                try:
                    cur = cur[int(key)] if isinstance(cur, list) else cur[key]
                except (KeyError, IndexError, ValueError, TypeError):
                    raise ConfigError(step_id, f"reference {ref!r} does not resolve") from None
            return cur
        return {k: _resolve(v, ctx, step_id) for k, v in value.items()}
    if isinstance(value, list):
        return [_resolve(v, ctx, step_id) for v in value]
    return value


def load_scenario(source: str | Path | dict) -> dict:
    """Parse and validate a scenario from a dict, a path, or a bundled scenario name."""
    if isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        if not path.exists():
            bundled = resources.files("soficity_lab") / "scenarios" / f"{source}.json"
            if not bundled.is_file():
                raise ConfigError("", f"no scenario file or bundled scenario named {source!r}")
            text = bundled.read_text()
        else:
            text = path.read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError("", exc.message) from exc
    seen = set()
    for step in data["steps"]:
        if step["op"] not in OPS:
            raise ConfigError(step["id"], f"unknown operation {step['op']!r}")
        if step["id"] in seen:
            raise ConfigError(step["id"], "duplicate step id")
        seen.add(step["id"])
    return data


def bundled_scenarios() -> list[str]:
    root = resources.files("soficity_lab") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def run_scenario(source: str | Path | dict, seed: int | None = None) -> Report:
    data = load_scenario(source)
    seed = int(data.get("seed", 0) if seed is None else seed)
    config = {
        "name": data["name"],
        "seed": seed,
        "output": data.get("output"),
        "steps": [{"id": s["id"], "op": s["op"], "params": s.get("params", {})} for s in data["steps"]],
    }
    ctx = Context(seed, random.Random(seed))
    steps, timings = [], {}
    for step in config["steps"]:
        sid = step["id"]
        params = _resolve(step["params"], ctx, sid)
        start = time.perf_counter()
        try:
            payload, obj = OPS[step["op"]](params, ctx)
        except ConfigError:
            raise
        except (SoficityLabError, KeyError, ValueError, TypeError) as exc:
            raise ConfigError(sid, f"{type(exc).__name__}: {exc}") from exc
        timings[sid] = time.perf_counter() - start
        ctx.payloads[sid] = payload
        ctx.objects[sid] = obj
        steps.append({"id": sid, "op": step["op"], "payload": payload})
    return Report(data["name"], __version__, seed, config, steps, timings, ctx.objects)


# -- output -------------------------------------------------------------------------

def orbit_csv(part: actions.OrbitPartition) -> str:
    """One row per non-singleton orbit, then a single aggregated row for all fixed points."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["block", "size", "count", "points"])
    fixed = []
    for j, b in enumerate(part.blocks):
        if len(b) == 1:
            fixed.append(b[0])
        else:
            w.writerow([j, len(b), 1, " ".join(map(str, b))])
    if fixed:
        w.writerow(["fixed", 1, len(fixed), " ".join(map(str, sorted(fixed)))])
    return buf.getvalue()


def emit_formats(report: Report, out_dir: str | Path, dot: bool = False, csv_tables: bool = False) -> list[Path]:
    """Write ``report.json`` (schema-checked) and optional DOT graphs and orbit CSV tables."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = report.to_json()
    jsonschema.validate(data, REPORT_SCHEMA)
    written = [out_dir / "report.json"]
    written[0].write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    for sid, obj in report.objects.items():
        if dot and isinstance(obj, schreier.MultiGraph):
            path = out_dir / f"{sid}.dot"
            path.write_text(obj.to_dot(sid.replace("-", "_")))
            written.append(path)
        if csv_tables and isinstance(obj, actions.OrbitPartition):
            path = out_dir / f"{sid}.csv"
            path.write_text(orbit_csv(obj))
            written.append(path)
    return written
