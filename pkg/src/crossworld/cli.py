"""Command-line front end.

Exit codes: 0 success, 1 domain error (invalid model, inadmissible query,
failed check), 2 usage error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import fixtures
from .graph import GraphError, Path as GraphPath, all_paths, backdoor_admissible, d_separated
from .inference import (
    QueryError,
    abduction_action_prediction,
    adjustment_estimate,
    check_ci_numeric,
    consistency_check,
    counterfactual_criterion,
    crossworld_joint,
    graphood_eq7,
    oracle_probability,
)
from .scm import ModelError, ProbabilisticSCM, parse_model, validate
from .tables import ZeroProbabilityError
from .worlds import (
    CrossWorldGraph,
    Intervention,
    Role,
    build_teleporter,
    build_twin,
    counterfactual_name,
    export_dot,
    find_teleporters,
    intervene,
    model_graph,
)

_AT_DO = re.compile(r"^(?P<var>[A-Za-z_][A-Za-z0-9_]*)@do\((?P<target>[A-Za-z_][A-Za-z0-9_]*)=(?P<value>[^)]+)\)$")


class DomainError(Exception):
    pass


class UsageError(Exception):
    pass


# -- shared helpers ----------------------------------------------------------------


def _load(source: str) -> ProbabilisticSCM:
    path = Path(source)
    if path.exists():
        return parse_model(path.read_text())
    name = source.removeprefix("fixture:")
    if name in fixtures.FIXTURES:
        return fixtures.load(name)
    raise DomainError(f"no such model file or fixture: {source}")


def _split(values: Sequence[str] | None) -> list[str]:
    out: list[str] = []
    for v in values or ():
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return out


def _assignments(values: Sequence[str] | None) -> dict[str, str]:
    out = {}
    for item in _split(values):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected NAME=value, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def _intervention(text: str | None, model: ProbabilisticSCM, required: bool = True) -> Intervention | None:
    if text is None:
        if required:
            raise UsageError("--do X=x is required")
        return None
    try:
        iv = Intervention.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if iv.target not in model:
        raise DomainError(f"unknown variable {iv.target!r}")
    return iv


def _base_of(name: str, model: ProbabilisticSCM, iv: Intervention | None) -> tuple[str, bool]:
    """Map a user-facing name to (base variable, counterfactual?)."""
    m = _AT_DO.match(name)
    if m:
        if iv is None or (m["target"], m["value"]) != (iv.target, iv.value):
            raise DomainError(f"{name} does not match the active intervention")
        return m["var"], True
    if iv is not None:
        suffix = counterfactual_name("", iv)
        if name.endswith(suffix):
            return name[: -len(suffix)], True
        short = f"_{iv.value}"
        if name not in model and name.endswith(short) and name[: -len(short)] in model:
            return name[: -len(short)], True
    return name, False


def _node(name: str, model: ProbabilisticSCM, iv: Intervention | None, world: CrossWorldGraph | None) -> str:
    base, cf = _base_of(name, model, iv)
    if world is None:
        if cf:
            raise DomainError(f"{name} is counterfactual but the world is single")
        return base
    try:
        return world.resolve(base, counterfactual=cf)
    except ModelError as exc:
        raise DomainError(str(exc)) from None


def _pretty(node: str, world: CrossWorldGraph | None) -> str:
    if world is not None and world.role_map.get(node) is Role.DUPLICATE:
        return f"{world.base_of[node]}_{world.intervention.value}"
    return node


def _pretty_path(path: GraphPath, world: CrossWorldGraph | None) -> str:
    return str(GraphPath(tuple(_pretty(n, world) for n in path.nodes), path.forward))


def _world(model: ProbabilisticSCM, kind: str, iv: Intervention | None):
    if kind == "real":
        return model_graph(model), None
    if iv is None:
        raise UsageError(f"--world {kind} requires --do X=x")
    if kind == "intervened":
        return model_graph(intervene(model, iv)), None
    world = build_twin(model, iv) if kind == "twin" else build_teleporter(model, iv)
    return world.graph, world


def _fmt(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}" if p.denominator != 1 else str(p.numerator)


# -- verbs -------------------------------------------------------------------------


def cmd_validate(args) -> int:
    text = Path(args.model).read_text() if Path(args.model).exists() else fixtures.text(args.model)
    model = parse_model(text, check_model=False)
    report = validate(model)
    if args.json:
        print(json.dumps({"valid": report.ok, "violations": list(report.violations)}, sort_keys=True))
    elif report.ok:
        print(f"OK: {len(model.exogenous)} exogenous, {len(model.endogenous)} endogenous variables")
    else:
        for v in report.violations:
            print(f"violation: {v}")
    return 0 if report.ok else 1


def cmd_dsep(args) -> int:
    model = _load(args.model)
    iv = _intervention(args.do, model, required=args.world != "real")
    graph, world = _world(model, args.world, iv)
    a = _node(args.a, model, iv, world)
    b = _node(args.b, model, iv, world)
    given = [_node(g, model, iv, world) for g in _split(args.given)]
    if a in given or b in given:
        raise UsageError("--given must not contain a query endpoint")
    if a == b:
        raise UsageError("query endpoints must differ")
    verdict = d_separated(graph, a, b, given)
    if args.json:
        print(
            json.dumps(
                {
                    "world": args.world,
                    "a": a,
                    "b": b,
                    "given": sorted(given),
                    "separated": verdict.separated,
                    "witness": list(verdict.witness.nodes) if verdict.witness else None,
                },
                sort_keys=True,
            )
        )
    else:
        print("SEPARATED" if verdict.separated else "CONNECTED")
        if verdict.witness:
            print(f"witness: {_pretty_path(verdict.witness, world)}")
    return 0


def cmd_build(args) -> int:
    model = _load(args.model)
    iv = _intervention(args.do, model, required=args.world != "real")
    graph, world = _world(model, args.world, iv)
    given = [_node(g, model, iv, world) for g in _split(args.given)]
    if args.emit == "dot":
        text = export_dot(world if world is not None else graph, conditioned=given)
    else:
        nodes = []
        for name, kind in graph.nodes:
            entry = {"id": name, "kind": kind.value}
            if world is not None:
                entry["role"] = world.role_map[name].value
                entry["base"] = world.base_of[name]
            nodes.append(entry)
        doc = {
            "world": args.world,
            "intervention": {"target": iv.target, "value": iv.value} if iv else None,
            "nodes": nodes,
            "edges": [list(e) for e in graph.edges],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_method(text: str) -> tuple[str, list[str]]:
    if text in ("enumerate", "abduction"):
        return text, []
    if text.startswith("adjust:") or text == "adjust":
        body = text.partition(":")[2].strip()
        if body in ("", "∅", "{}", "-"):
            return "adjust", []
        return "adjust", _split([body])
    raise UsageError(f"unknown method {text!r}; use enumerate, abduction or adjust:Z,...")


def cmd_query(args) -> int:
    model = _load(args.model)
    iv = _intervention(args.do, model)
    name, sep, value = args.target.rpartition("=")
    if not sep or not name:
        raise UsageError("--target must look like Y_x=y or Y@do(X=x)=y")
    base, _ = _base_of(name, model, iv)
    evidence = _assignments(args.evidence)
    method, adjust = _parse_method(args.method)
    target = (base, value)

    def run(m: str) -> Fraction:
        if m == "enumerate":
            return oracle_probability(model, iv, target, evidence)
        if m == "abduction":
            return abduction_action_prediction(model, iv, target, evidence)
        return adjustment_estimate(model, iv, target, evidence, adjust)

    p = run(method)
    results = {method: p}
    if args.check:
        for m in ("enumerate", "abduction"):
            results.setdefault(m, run(m))
    agree = len(set(results.values())) == 1
    label = f"P({base}@do({iv.target}={iv.value})={value}"
    label += f" | {', '.join(f'{k}={v}' for k, v in evidence.items())})" if evidence else ")"
    if args.json:
        doc = {
            "query": {"intervention": f"{iv.target}={iv.value}", "target": base, "value": value, "evidence": evidence},
            "method": method,
            "adjust": adjust,
            "probability": _fmt(p),
            "decimal": float(p),
        }
        if args.check:
            doc["check"] = {m: _fmt(v) for m, v in sorted(results.items())}
            doc["agree"] = agree
        print(json.dumps(doc, sort_keys=True))
    else:
        print(f"{label} = {_fmt(p)} ≈ {float(p):.6f}")
        if args.check:
            for m, v in sorted(results.items()):
                print(f"  {m:<10} {_fmt(v)}")
            print("all methods agree" if agree else "METHODS DISAGREE")
    return 0 if agree else 1


def cmd_compare(args) -> int:
    model = _load(args.model)
    iv = _intervention(args.do, model)
    twin, tele = build_twin(model, iv), build_teleporter(model, iv)
    reals = list(model.endogenous_names)
    dups = [tele.duplicates[v] for v in reals if v in tele.duplicates]
    rows = []
    for a in reals:
        for b in dups:
            pool = [n for n in (*reals, *dups) if n not in (a, b)]
            for k in range(args.max_given + 1):
                for cond in itertools.combinations(pool, k):
                    t = d_separated(twin.graph, a, b, cond).separated
                    m = d_separated(tele.graph, a, b, cond).separated
                    ci = check_ci_numeric(crossworld_joint(model, iv, (a, b, *cond)), a, b, cond)
                    rows.append((a, _pretty(b, tele), [_pretty(c, tele) for c in cond], t, m, ci))
    if args.json:
        for a, b, cond, t, m, ci in rows:
            print(json.dumps({"a": a, "b": b, "given": cond, "twin": t, "teleporter": m, "oracle_ci": ci}, sort_keys=True))
        return 0
    word = {True: "sep", False: "conn"}
    print(f"{'query':<28} {'twin':<5} {'tele':<5} {'oracle':<7}")
    for a, b, cond, t, m, ci in rows:
        q = f"{a} ⊥ {b}" + (f" | {','.join(cond)}" if cond else "")
        note = "  <- twin misses" if m and not t else ""
        print(f"{q:<28} {word[t]:<5} {word[m]:<5} {'CI' if ci else 'dep':<7}{note}")
    return 0


def cmd_trials(args) -> int:
    from .genrand import run_trials

    report = run_trials(args.seed, args.count, args.queries, args.max_endogenous, args.max_parents, args.workers)
    text = report.dumps()
    if args.out:
        Path(args.out).write_text(text)
        print(json.dumps({"summary": report.summary}, sort_keys=True))
    else:
        sys.stdout.write(text)
    s = report.summary
    bad = s["soundness_violations"] + s["dominance_violations"] + s["nonzero_adjustment_deltas"]
    return 1 if bad or s["consistency_failures"] else 0


# -- examples ----------------------------------------------------------------------


def _scenarios():
    """Yield (scenario, check, expected, actual) for every worked example."""
    m1, iv1 = fixtures.load("fig1"), Intervention("X", "1")
    t1 = build_teleporter(m1, iv1)
    yield "fig1", "endogenous teleporters", "Z", ",".join(sorted(find_teleporters(m1, iv1) & set(m1.endogenous_names)))
    yield "fig1", "U_Z removed", True, "U_Z" not in t1.graph
    yield "fig1", "U_Y role", "shared-exogenous", t1.role_map["U_Y"].value
    yield "fig1", "U_X role", "real-only-exogenous", t1.role_map["U_X"].value
    yield "fig1", "merged node count", 6, len(t1.graph.nodes)
    yield "fig1", "consistency", True, consistency_check(m1, iv1)

    m2, iv2 = fixtures.load("fig2"), Intervention("A", "a")
    twin2, tele2 = build_twin(m2, iv2), build_teleporter(m2, iv2)
    da = counterfactual_name("D", iv2)
    joint2 = crossworld_joint(m2, iv2, ("A", da, "B", "C", "D"))

    def verdict(world, cond):
        return "separated" if d_separated(world.graph, "A", da, cond).separated else "connected"

    yield "fig2", "twin A ⊥ D_a | B", "connected", verdict(twin2, ["B"])
    yield "fig2", "twin A ⊥ D_a | C", "separated", verdict(twin2, ["C"])
    yield "fig2", "teleporter A ⊥ D_a | B", "separated", verdict(tele2, ["B"])
    yield "fig2", "teleporter A ⊥ D_a | C", "separated", verdict(tele2, ["C"])
    yield "fig2", "teleporter A ⊥ D_a | D,C", "connected", verdict(tele2, ["D", "C"])
    yield "fig2", "teleporter A ⊥ D_a | D,B", "separated", verdict(tele2, ["D", "B"])
    yield "fig2", "oracle A ⊥ D_a | B", True, check_ci_numeric(joint2, "A", da, ["B"])
    yield "fig2", "oracle A ⊥ D_a | C", True, check_ci_numeric(joint2, "A", da, ["C"])
    g2 = model_graph(m2)
    yield "fig2", "back-door {B} for (A,D)", True, backdoor_admissible(g2, "A", "D", {"B"})
    yield "fig2", "back-door {C} for (A,D)", True, backdoor_admissible(g2, "A", "D", {"C"})
    yield "fig2", "endogenous teleporters", "B,C", ",".join(sorted(find_teleporters(m2, iv2) & set(m2.endogenous_names)))

    m3, iv3 = fixtures.load("fig3"), Intervention("X", "x")
    twin3, tele3 = build_twin(m3, iv3), build_teleporter(m3, iv3)
    yx = counterfactual_name("Y", iv3)
    open3 = [str(p.path) for p in all_paths(tele3.graph, "X", yx) if not p.blocked]
    yield "fig3", "open X–Y_x paths", f"X←C→Z→T→{yx}", ";".join(open3)
    oracle3 = oracle_probability(m3, iv3, ("Y", "y"))
    for z in ("C", "Z", "T"):
        yield "fig3", f"criterion with {{{z}}}", True, counterfactual_criterion(m3, iv3, "Y", (), [z]).satisfied
        yield "fig3", f"adjust {{{z}}} = oracle", _fmt(oracle3), _fmt(adjustment_estimate(m3, iv3, ("Y", "y"), {}, [z]))
    yield "fig3", "abduction = oracle", _fmt(oracle3), _fmt(abduction_action_prediction(m3, iv3, ("Y", "y")))
    yield "fig3", "twin X ⊥ Y_x | Z", "connected", "separated" if d_separated(twin3.graph, "X", yx, ["Z"]) else "connected"
    yield "fig3", "twin X ⊥ Y_x | C", "separated", "separated" if d_separated(twin3.graph, "X", yx, ["C"]) else "connected"

    m4, iv4 = fixtures.load("fig4"), Intervention("X", "x")
    twin4 = build_twin(m4, iv4)
    yx4 = counterfactual_name("Y", iv4)
    oracle4 = oracle_probability(m4, iv4, ("Y", "y"), {"W": "w"})
    for z in (["T"], ["Z"]):
        label = "{" + ",".join(z) + "}"
        yield "fig4", f"criterion E={{W}} Z={label}", True, counterfactual_criterion(m4, iv4, "Y", ["W"], z).satisfied
        est = adjustment_estimate(m4, iv4, ("Y", "y"), {"W": "w"}, z)
        yield "fig4", f"adjust {label} = oracle", _fmt(oracle4), _fmt(est)
    crit = counterfactual_criterion(m4, iv4, "Y", ["W"], [])
    yield "fig4", "criterion E={W} Z=∅", False, crit.satisfied
    yield "fig4", "witness passes collider W", True, bool(crit.witness_path) and "W" in crit.witness_path.colliders()
    yield "fig4", "twin X ⊥ Y_x | W,T", "connected", "separated" if d_separated(twin4.graph, "X", yx4, ["W", "T"]) else "connected"

    m5, iv5 = fixtures.load("fig5"), Intervention("X", "x")
    r5 = graphood_eq7(m5, iv5, "x'")
    yield "fig5", "teleporter X ⊥ Y_x | E", True, r5.certified
    yield "fig5", "E is a teleporter", True, "E" in find_teleporters(m5, iv5)
    yield "fig5", "environment sum = oracle", True, r5.matches


def cmd_examples(args) -> int:
    if args.emit_fixtures:
        for path in fixtures.emit(args.emit_fixtures):
            print(f"wrote {path}", file=sys.stderr)
    rows = list(_scenarios())
    failures = 0
    if args.json:
        for scen, check, expected, actual in rows:
            failures += expected != actual
            print(json.dumps({"scenario": scen, "check": check, "expected": expected, "actual": actual, "ok": expected == actual}, sort_keys=True))
    else:
        width = max(len(r[1]) for r in rows)
        for scen, check, expected, actual in rows:
            ok = expected == actual
            failures += not ok
            print(f"{scen:<5} {check:<{width}}  expected={expected!s:<24} actual={actual!s:<24} {'ok' if ok else 'MISMATCH'}")
        print(f"{len(rows) - failures}/{len(rows)} checks reproduced")
    return 1 if failures else 0


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crossworld", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dsep", help="d-separation query in a real, twin or teleporter graph")
    p.add_argument("model")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--world", choices=["real", "intervened", "twin", "teleporter"], default="teleporter")
    p.add_argument("--do", metavar="X=x")
    p.add_argument("--given", action="append", metavar="Z,...")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dsep)

    p = sub.add_parser("build", help="construct a graph and emit DOT or JSON")
    p.add_argument("model")
    p.add_argument("--world", choices=["real", "intervened", "twin", "teleporter"], default="teleporter")
    p.add_argument("--do", metavar="X=x")
    p.add_argument("--emit", choices=["dot", "json"], default="dot")
    p.add_argument("--given", action="append", metavar="Z,...", help="nodes drawn as conditioned")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="counterfactual probability P(Y_x=y | e)")
    p.add_argument("model")
    p.add_argument("--do", required=True, metavar="X=x")
    p.add_argument("--target", required=True, metavar="Y_x=y")
    p.add_argument("--evidence", action="append", metavar="E=e")
    p.add_argument("--method", default="enumerate", metavar="{enumerate|abduction|adjust:Z,...}")
    p.add_argument("--check", action="store_true", help="run every applicable method and require agreement")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("compare", help="twin vs teleporter verdicts against the oracle")
    p.add_argument("model")
    p.add_argument("--do", required=True, metavar="X=x")
    p.add_argument("--max-given", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("trials", help="random soundness trials, one JSON record per line")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--queries", type=int, default=3)
    p.add_argument("--max-endogenous", type=int, default=5)
    p.add_argument("--max-parents", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("examples", help="reproduce every worked-example verdict")
    p.add_argument("--emit-fixtures", metavar="DIR")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DomainError, ModelError, GraphError, QueryError, ZeroProbabilityError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
