"""Graph-level reasoning over causal DAGs.

Two independent routes decide d-separation:

* :func:`d_separated` walks (node, direction) states breadth-first and is the
  one used everywhere else in the package;
* :func:`all_paths` enumerates every simple path of the skeleton and applies
  the chain/fork/collider blocking clauses one path at a time. It is slow and
  only meant as an oracle.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, NamedTuple

__all__ = [
    "CausalGraph",
    "GraphError",
    "NodeKind",
    "Path",
    "PathStatus",
    "SeparationVerdict",
    "all_paths",
    "ancestors",
    "backdoor_admissible",
    "d_separated",
    "descendants",
    "path_blocked",
]


class GraphError(ValueError):
    pass


class NodeKind(str, Enum):
    ENDOGENOUS = "endogenous"
    EXOGENOUS = "exogenous"
    DUPLICATE = "counterfactual-duplicate"
    TELEPORTER = "teleporter-shared"


@dataclass(frozen=True)
class CausalGraph:
    nodes: tuple[tuple[str, NodeKind], ...]
    edges: tuple[tuple[str, str], ...]
    _kind: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple((n, NodeKind(k)) for n, k in self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        kind = dict(self.nodes)
        if len(kind) != len(self.nodes):
            raise GraphError("duplicate node names")
        for a, b in self.edges:
            if a not in kind or b not in kind:
                raise GraphError(f"edge {a}->{b} references an unknown node")
            if kind[b] is NodeKind.EXOGENOUS:
                raise GraphError(f"exogenous node {b} cannot have parents")
        object.__setattr__(self, "_kind", kind)
        if len(self.topological_order()) != len(self.nodes):
            raise GraphError("graph contains a cycle")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], exogenous: Iterable[str] = (), extra_nodes=()) -> "CausalGraph":
        """Quick construction from an edge list; ``exogenous`` names get the exogenous kind."""
        exo = set(exogenous)
        edges = list(edges)
        order: list[str] = []
        for n in [*extra_nodes, *(x for e in edges for x in e)]:
            if n not in order:
                order.append(n)
        nodes = [(n, NodeKind.EXOGENOUS if n in exo else NodeKind.ENDOGENOUS) for n in order]
        return cls(tuple(nodes), tuple(edges))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.nodes)

    def kind(self, node: str) -> NodeKind:
        self._check(node)
        return self._kind[node]

    def __contains__(self, node: str) -> bool:
        return node in self._kind

    def _check(self, *nodes: str) -> None:
        for n in nodes:
            if n not in self._kind:
                raise GraphError(f"unknown node {n!r}")

    @cached_property
    def _rank(self) -> dict[str, int]:
        return {n: i for i, (n, _) in enumerate(self.nodes)}

    @cached_property
    def _parents(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {n: [] for n, _ in self.nodes}
        for a, b in self.edges:
            out[b].append(a)
        return {n: tuple(sorted(ps, key=self._rank.__getitem__)) for n, ps in out.items()}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {n: [] for n, _ in self.nodes}
        for a, b in self.edges:
            out[a].append(b)
        return {n: tuple(sorted(cs, key=self._rank.__getitem__)) for n, cs in out.items()}

    def parents(self, node: str) -> tuple[str, ...]:
        self._check(node)
        return self._parents[node]

    def children(self, node: str) -> tuple[str, ...]:
        self._check(node)
        return self._children[node]

    def neighbours(self, node: str) -> list[str]:
        return sorted({*self._parents[node], *self._children[node]}, key=self._rank.__getitem__)

    def topological_order(self) -> tuple[str, ...]:
        indeg = {n: 0 for n, _ in self.nodes}
        for _, b in self.edges:
            indeg[b] += 1
        ready = [n for n, _ in self.nodes if indeg[n] == 0]
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort(key=self._rank.__getitem__)
        return tuple(order)

    def without_edges(self, dropped: Iterable[tuple[str, str]]) -> "CausalGraph":
        dropped = set(dropped)
        return CausalGraph(self.nodes, tuple(e for e in self.edges if e not in dropped))


def descendants(g: CausalGraph, v: str) -> set[str]:
    g._check(v)
    seen: set[str] = set()
    stack = list(g._children[v])
    while stack:
        n = stack.pop()
        if n not in seen:
            seen.add(n)
            stack.extend(g._children[n])
    return seen


def ancestors(g: CausalGraph, v: str) -> set[str]:
    g._check(v)
    seen: set[str] = set()
    stack = list(g._parents[v])
    while stack:
        n = stack.pop()
        if n not in seen:
            seen.add(n)
            stack.extend(g._parents[n])
    return seen


@dataclass(frozen=True)
class Path:
    """A simple path; ``forward[i]`` is True when the edge is ``nodes[i] -> nodes[i+1]``."""

    nodes: tuple[str, ...]
    forward: tuple[bool, ...]

    def __str__(self) -> str:
        out = [self.nodes[0]]
        for node, fwd in zip(self.nodes[1:], self.forward):
            out.append("→" if fwd else "←")
            out.append(node)
        return "".join(out)

    def ascii(self) -> str:
        out = [self.nodes[0]]
        for node, fwd in zip(self.nodes[1:], self.forward):
            out.append(" -> " if fwd else " <- ")
            out.append(node)
        return "".join(out)

    def colliders(self) -> list[str]:
        return [self.nodes[i] for i in range(1, len(self.nodes) - 1) if self.forward[i - 1] and not self.forward[i]]

    def starts_into_source(self) -> bool:
        return bool(self.forward) and not self.forward[0]


class PathStatus(NamedTuple):
    path: Path
    blocked: bool


@dataclass(frozen=True)
class SeparationVerdict:
    separated: bool
    witness: Path | None = None

    def __bool__(self) -> bool:
        return self.separated


def _check_query(g: CausalGraph, a: str, b: str, cond: frozenset[str]) -> None:
    g._check(a, b, *cond)
    if a == b:
        raise GraphError("query endpoints must differ")
    if a in cond or b in cond:
        raise GraphError("an endpoint is in the conditioning set")


def _conditioned_ancestry(g: CausalGraph, cond: frozenset[str]) -> set[str]:
    # nodes that are in cond or have a descendant in cond: exactly the open colliders
    out = set(cond)
    stack = list(cond)
    while stack:
        n = stack.pop()
        for p in g._parents[n]:
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def d_separated(g: CausalGraph, a: str, b: str, cond: Iterable[str] = ()) -> SeparationVerdict:
    """Decide whether ``cond`` d-separates ``a`` from ``b``.

    Breadth-first search over states ``(node, arrived_from_child)``: a chain or
    fork node passes the ball on only when unobserved, a collider only when it
    or one of its descendants is observed.
    """
    cond = frozenset(cond)
    _check_query(g, a, b, cond)
    open_colliders = _conditioned_ancestry(g, cond)

    # direction "up": we reached the node from one of its children (moving against an edge)
    start = [(a, "up")]
    seen = set(start)
    queue = deque(start)
    while queue:
        node, direction = queue.popleft()
        if node == b:
            return SeparationVerdict(False, _find_open_path(g, a, b, cond, open_colliders))
        if direction == "up" and node not in cond:
            for p in g._parents[node]:
                if (p, "up") not in seen:
                    seen.add((p, "up"))
                    queue.append((p, "up"))
            for c in g._children[node]:
                if (c, "down") not in seen:
                    seen.add((c, "down"))
                    queue.append((c, "down"))
        elif direction == "down":
            if node not in cond:
                for c in g._children[node]:
                    if (c, "down") not in seen:
                        seen.add((c, "down"))
                        queue.append((c, "down"))
            if node in open_colliders:
                for p in g._parents[node]:
                    if (p, "up") not in seen:
                        seen.add((p, "up"))
                        queue.append((p, "up"))
    return SeparationVerdict(True)


def _find_open_path(g: CausalGraph, a: str, b: str, cond: frozenset[str], open_colliders: set[str]) -> Path:
    # Depth-first search for one simple unblocked path, pruning a prefix as soon
    # as its last interior node blocks. Only called once the BFS found a connection.
    best: list[Path] = []

    def step(nodes: list[str], forward: list[bool]) -> bool:
        here = nodes[-1]
        if here == b:
            best.append(Path(tuple(nodes), tuple(forward)))
            return True
        on_path = set(nodes)
        for nxt in g.neighbours(here):
            if nxt in on_path:
                continue
            fwd = nxt in g._children[here]
            if len(nodes) >= 2:
                collider = forward[-1] and not fwd
                if collider and here not in open_colliders:
                    continue
                if not collider and here in cond:
                    continue
            nodes.append(nxt)
            forward.append(fwd)
            if step(nodes, forward):
                return True
            nodes.pop()
            forward.pop()
        return False

    step([a], [])
    if not best:  # pragma: no cover - BFS and DFS disagree only on a bug
        raise GraphError(f"connected {a}-{b} but no open simple path found")
    return best[0]


def path_blocked(g: CausalGraph, path: Path, cond: Iterable[str]) -> bool:
    """Apply the blocking clauses to each interior node of ``path``."""
    cond = set(cond)
    for i in range(1, len(path.nodes) - 1):
        node = path.nodes[i]
        into_from_left = path.forward[i - 1]
        out_to_right = path.forward[i]
        is_collider = into_from_left and not out_to_right
        if is_collider:
            if node not in cond and not (descendants(g, node) & cond):
                return True
        elif node in cond:
            return True
    return False


def all_paths(g: CausalGraph, a: str, b: str, cond: Iterable[str] = ()) -> list[PathStatus]:
    """Every simple path between ``a`` and ``b`` in the skeleton with its blocked status.

    Sorted lexicographically by node sequence.
    """
    g._check(a, b)
    if a == b:
        raise GraphError("query endpoints must differ")
    cond = set(cond)
    found: list[Path] = []

    def walk(nodes: list[str], forward: list[bool]) -> None:
        here = nodes[-1]
        if here == b:
            found.append(Path(tuple(nodes), tuple(forward)))
            return
        for nxt in g.neighbours(here):
            if nxt not in nodes:
                walk(nodes + [nxt], forward + [nxt in g._children[here]])

    walk([a], [])
    found.sort(key=lambda p: p.nodes)
    return [PathStatus(p, path_blocked(g, p, cond)) for p in found]


def backdoor_admissible(g: CausalGraph, x: str, y: str, z: Iterable[str]) -> bool:
    """Back-door criterion: ``z`` has no descendant of ``x`` and blocks every path into ``x``."""
    z = frozenset(z)
    g._check(x, y, *z)
    if x in z or y in z:
        raise GraphError("treatment and outcome must not be in the adjustment set")
    if z & descendants(g, x):
        return False
    # paths entering x survive removal of x's outgoing edges; all others vanish
    pruned = g.without_edges((x, c) for c in g.children(x))
    return d_separated(pruned, x, y, z).separated
