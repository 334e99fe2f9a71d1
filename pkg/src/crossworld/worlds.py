"""Intervened models and cross-world graphs (twin network and teleporter merge)."""
from __future__ import annotations

import html
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Iterable, Mapping

from .graph import CausalGraph, NodeKind, d_separated, descendants
from .scm import (
    EXOGENOUS_STATE_CAP,
    Endogenous,
    Exogenous,
    ModelError,
    ProbabilisticSCM,
    _evaluate,
)

__all__ = [
    "CrossWorldGraph",
    "CrossWorldModel",
    "Intervention",
    "Role",
    "build_teleporter",
    "build_twin",
    "counterfactual_name",
    "export_dot",
    "find_teleporters",
    "intervene",
    "model_graph",
]


@dataclass(frozen=True)
class Intervention:
    target: str
    value: str

    def __post_init__(self):
        object.__setattr__(self, "value", str(self.value))

    @classmethod
    def parse(cls, text: str) -> "Intervention":
        target, sep, value = text.partition("=")
        if not sep or not target.strip() or not value.strip():
            raise ValueError(f"intervention must look like X=x, got {text!r}")
        return cls(target.strip(), value.strip())

    def __str__(self) -> str:
        return f"do({self.target}={self.value})"


def counterfactual_name(var: str, iv: Intervention) -> str:
    return f"{var}_do_{iv.target}={iv.value}"


def _check_intervention(model: ProbabilisticSCM, iv: Intervention) -> Endogenous:
    var = model[iv.target]
    if isinstance(var, Exogenous):
        raise ModelError(f"cannot intervene on exogenous variable {iv.target}")
    if iv.value not in var.domain:
        raise ModelError(f"{iv.value!r} is not in the domain of {iv.target}")
    return var


def intervene(model: ProbabilisticSCM, iv: Intervention) -> ProbabilisticSCM:
    """The mutilated model: the target's equation becomes the constant ``iv.value``."""
    var = _check_intervention(model, iv)
    constant = replace(var, parents=(), table=(((), iv.value),))
    endo = tuple(constant if v.name == iv.target else v for v in model.endogenous)
    return ProbabilisticSCM(model.exogenous, endo)


def model_graph(model: ProbabilisticSCM) -> CausalGraph:
    nodes = [(ex.name, NodeKind.EXOGENOUS) for ex in model.exogenous]
    nodes += [(v.name, NodeKind.ENDOGENOUS) for v in model.endogenous]
    return CausalGraph(tuple(nodes), tuple(model.edges()))


class Role(str, Enum):
    REAL = "real"
    DUPLICATE = "counterfactual-duplicate"
    TELEPORTER = "teleporter"
    SHARED_EXOGENOUS = "shared-exogenous"
    REAL_ONLY_EXOGENOUS = "real-only-exogenous"


@dataclass(frozen=True)
class CrossWorldGraph:
    """A merged real/counterfactual graph.

    ``base_of`` maps every node to the base-model variable it stands for; for
    duplicates that is the variable they copy. Exogenous variables dropped by
    the teleporter construction are absent from ``role_map``.
    """

    graph: CausalGraph
    method: str
    intervention: Intervention
    role_map: Mapping[str, Role]
    base_of: Mapping[str, str]

    @cached_property
    def duplicates(self) -> dict[str, str]:
        """Base variable -> duplicate node."""
        return {self.base_of[n]: n for n, r in self.role_map.items() if r is Role.DUPLICATE}

    @property
    def degenerate(self) -> bool:
        """True when the intervention has no descendants, so every ``Y_x`` equals ``Y``."""
        return not any(self.base_of[d] != self.intervention.target for d in self.duplicates.values())

    def teleporters(self) -> set[str]:
        return {n for n, r in self.role_map.items() if r is Role.TELEPORTER}

    def resolve(self, var: str, counterfactual: bool = False) -> str:
        """Graph node for base variable ``var`` in the real or the counterfactual world."""
        if var in self.graph and not counterfactual:
            return var
        if counterfactual:
            if var in self.duplicates:
                return self.duplicates[var]
            if var == self.intervention.target:
                raise ModelError(f"the intervened variable {var} is a constant in the counterfactual world")
            if var in self.graph:
                return var
        raise ModelError(f"{var} has no node in the {self.method} graph")


def _exogenous_children(model: ProbabilisticSCM) -> dict[str, list[str]]:
    kids: dict[str, list[str]] = {ex.name: [] for ex in model.exogenous}
    for v in model.endogenous:
        for p in v.parents:
            if p in kids:
                kids[p].append(v.name)
    return kids


def build_twin(model: ProbabilisticSCM, iv: Intervention) -> CrossWorldGraph:
    """Duplicate every endogenous variable, share the exogenous ones, cut arrows into the target copy."""
    _check_intervention(model, iv)
    dup = {v.name: counterfactual_name(v.name, iv) for v in model.endogenous}
    edges = list(model.edges())
    for v in model.endogenous:
        if v.name == iv.target:
            continue
        for p in v.parents:
            edges.append((p if model.is_exogenous(p) else dup[p], dup[v.name]))

    roles: dict[str, Role] = {}
    base_of: dict[str, str] = {}
    kids = _exogenous_children(model)
    for ex in model.exogenous:
        shared = any(c != iv.target for c in kids[ex.name])
        roles[ex.name] = Role.SHARED_EXOGENOUS if shared else Role.REAL_ONLY_EXOGENOUS
        base_of[ex.name] = ex.name
    for v in model.endogenous:
        roles[v.name] = Role.REAL
        roles[dup[v.name]] = Role.DUPLICATE
        base_of[v.name] = v.name
        base_of[dup[v.name]] = v.name

    nodes = [(ex.name, NodeKind.EXOGENOUS) for ex in model.exogenous]
    nodes += [(v.name, NodeKind.ENDOGENOUS) for v in model.endogenous]
    nodes += [(dup[v.name], NodeKind.DUPLICATE) for v in model.endogenous]
    return CrossWorldGraph(CausalGraph(tuple(nodes), tuple(edges)), "twin", iv, roles, base_of)


def find_teleporters(model: ProbabilisticSCM, iv: Intervention) -> set[str]:
    """Variables whose structural equation is the same in both worlds.

    Endogenous teleporters are the variables d-separated from the target in the
    mutilated graph; exogenous ones are those kept and shared by the merge.
    """
    _check_intervention(model, iv)
    mutilated = model_graph(intervene(model, iv))
    endo = {
        v for v in model.endogenous_names if v != iv.target and d_separated(mutilated, iv.target, v).separated
    }
    merged = build_teleporter(model, iv)
    return endo | {n for n, r in merged.role_map.items() if r is Role.SHARED_EXOGENOUS}


def _classify_exogenous(model: ProbabilisticSCM, target: str, affected: set[str]) -> dict[str, Role | None]:
    """Decide what happens to each exogenous variable in the merged graph.

    ``None`` means removed. Affected = the target and its descendants.
    """
    out: dict[str, Role | None] = {}
    for name, kids in _exogenous_children(model).items():
        if any(k in affected for k in kids):
            out[name] = Role.SHARED_EXOGENOUS if any(k != target for k in kids) else Role.REAL_ONLY_EXOGENOUS
        elif len(kids) >= 2:
            # removing a shared root would cut a confounding path between teleporters
            out[name] = Role.SHARED_EXOGENOUS
        else:
            out[name] = None
    return out


def build_teleporter(model: ProbabilisticSCM, iv: Intervention) -> CrossWorldGraph:
    """Merge the real and counterfactual worlds through their common variables.

    Only descendants of the target get a counterfactual copy; everything else
    appears once and serves both worlds. The intervention constant itself is
    not a node.
    """
    _check_intervention(model, iv)
    base = model_graph(model)
    desc = descendants(base, iv.target) - set(model.exogenous_names)
    affected = desc | {iv.target}
    exo_role = _classify_exogenous(model, iv.target, affected)
    if not desc:
        # nothing downstream: keep the real graph as is
        exo_role = {u: r or Role.SHARED_EXOGENOUS for u, r in exo_role.items()}
    dup = {v: counterfactual_name(v, iv) for v in model.endogenous_names if v in desc}

    roles: dict[str, Role] = {}
    base_of: dict[str, str] = {}
    nodes: list[tuple[str, NodeKind]] = []
    for ex in model.exogenous:
        if exo_role[ex.name] is not None:
            roles[ex.name] = exo_role[ex.name]
            base_of[ex.name] = ex.name
            nodes.append((ex.name, NodeKind.EXOGENOUS))
    for v in model.endogenous_names:
        teleporter = v not in affected
        roles[v] = Role.TELEPORTER if teleporter else Role.REAL
        base_of[v] = v
        nodes.append((v, NodeKind.TELEPORTER if teleporter else NodeKind.ENDOGENOUS))
    for v in model.endogenous_names:
        if v in dup:
            roles[dup[v]] = Role.DUPLICATE
            base_of[dup[v]] = v
            nodes.append((dup[v], NodeKind.DUPLICATE))

    edges = [(p, c) for p, c in model.edges() if p in roles]
    for v in model.endogenous:
        if v.name not in dup:
            continue
        for p in v.parents:
            if p == iv.target:
                continue
            edges.append((dup.get(p, p), dup[v.name]))
    return CrossWorldGraph(CausalGraph(tuple(nodes), tuple(edges)), "teleporter", iv, roles, base_of)


class CrossWorldModel:
    """Executable semantics of the merged graph.

    For every exogenous context the real world is solved as usual; a duplicate
    is evaluated with its base equation, reading the constant for the target,
    the duplicate for an affected parent and the shared node otherwise.
    """

    def __init__(self, model: ProbabilisticSCM, iv: Intervention):
        _check_intervention(model, iv)
        self.model = model
        self.intervention = iv
        self.graph = build_teleporter(model, iv)
        target = iv.target
        desc = {self.graph.base_of[d] for d in self.graph.duplicates.values()}
        self._plan = [
            (model[v], counterfactual_name(v, iv)) for v in model.order if v in desc
        ]
        # column layout of the aggregated world table
        self.columns = (*model.endogenous_names, *(name for _, name in self._plan))
        self._alias = {name: i for i, name in enumerate(self.columns)}
        for v in model.endogenous_names:
            cf = counterfactual_name(v, iv)
            if cf not in self._alias and v != target:
                self._alias[cf] = self._alias[v]

    def has(self, name: str) -> bool:
        return name in self._alias or name == counterfactual_name(self.intervention.target, self.intervention)

    def evaluate(self, u: Mapping[str, str]) -> dict[str, str]:
        """Real values keyed by base name, counterfactual values by duplicate name.

        Non-descendants are also reported under their counterfactual name,
        holding the real value.
        """
        iv = self.intervention
        values = _evaluate(self.model, {k: str(u[k]) for k in self.model.exogenous_names})
        cf: dict[str, str] = {}
        for var, name in self._plan:
            key = tuple(
                iv.value if p == iv.target else cf.get(counterfactual_name(p, iv), values[p]) for p in var.parents
            )
            cf[name] = var.lookup[key]
        for v in self.model.endogenous_names:
            cf.setdefault(counterfactual_name(v, iv), iv.value if v == iv.target else values[v])
        return {**values, **cf}

    def world_counts(self, cap: int = EXOGENOUS_STATE_CAP) -> dict[tuple[str, ...], int]:
        return _world_counts(self.model, self.intervention, cap)

    def column(self, name: str) -> int | None:
        """Column index of ``name`` in the world table, ``None`` for the target's constant copy."""
        if name in self._alias:
            return self._alias[name]
        if name == counterfactual_name(self.intervention.target, self.intervention):
            return None
        raise ModelError(f"unknown cross-world variable {name!r}")


@lru_cache(maxsize=128)
def _world_counts(model: ProbabilisticSCM, iv: Intervention, cap: int) -> dict[tuple[str, ...], int]:
    cw = CrossWorldModel(model, iv)
    names = model.exogenous_names
    counts: dict[tuple[str, ...], int] = {}
    for weight, u in model.exogenous_states(cap):
        vals = cw.evaluate(dict(zip(names, u)))
        key = tuple(vals[c] for c in cw.columns)
        counts[key] = counts.get(key, 0) + weight
    return counts


# -- DOT -------------------------------------------------------------------------


def _label(name: str, base_of: Mapping[str, str] | None, iv: Intervention | None) -> str:
    if base_of and iv and base_of.get(name, name) != name:
        sub = html.escape(f"{iv.target}={iv.value}")
        return f"<{html.escape(base_of[name])}<SUB>{sub}</SUB>>"
    return f'"{name}"'


def export_dot(g: CrossWorldGraph | CausalGraph, conditioned: Iterable[str] = ()) -> str:
    """Deterministic Graphviz text.

    Duplicates are dashed, teleporters double-bordered, exogenous variables
    boxed, and ``conditioned`` nodes filled grey.
    """
    conditioned = set(conditioned)
    if isinstance(g, CrossWorldGraph):
        graph, base_of, iv, title = g.graph, g.base_of, g.intervention, g.method
    else:
        graph, base_of, iv, title = g, None, None, "G"
    lines = [f'digraph "{title}" {{']
    for name, kind in graph.nodes:
        attrs = [f"label={_label(name, base_of, iv)}"]
        styles = []
        if kind is NodeKind.EXOGENOUS:
            attrs.append("shape=box")
        else:
            attrs.append("shape=ellipse")
        if kind is NodeKind.DUPLICATE:
            styles.append("dashed")
        if kind is NodeKind.TELEPORTER:
            attrs.append("peripheries=2")
        if name in conditioned:
            styles.append("filled")
            attrs.append("fillcolor=grey")
        if styles:
            attrs.append(f'style="{",".join(styles)}"')
        lines.append(f'  "{name}" [{", ".join(attrs)}];')
    for a, b in graph.edges:
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
