"""Package-level dependency graph over latest versions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .ingest import RUNTIME, EcosystemSnapshot, UnknownPackage


@dataclass(frozen=True)
class DepGraph:
    nodes: tuple[str, ...]
    forward: Mapping[str, frozenset[str]]
    reverse: Mapping[str, frozenset[str]]

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> "DepGraph":
        nodes = tuple(sorted(set(nodes)))
        fwd: dict[str, set[str]] = {n: set() for n in nodes}
        rev: dict[str, set[str]] = {n: set() for n in nodes}
        for a, b in edges:
            if a == b:
                continue
            fwd[a].add(b)
            rev[b].add(a)
        return cls(
            nodes,
            {n: frozenset(v) for n, v in fwd.items()},
            {n: frozenset(v) for n, v in rev.items()},
        )

    def edge_count(self) -> int:
        return sum(len(v) for v in self.forward.values())

    def _check(self, p: str) -> None:
        if p not in self.forward:
            raise UnknownPackage(p)


def build_graph(s: EcosystemSnapshot) -> DepGraph:
    """One edge per (dependent, target) among latest runtime edges."""
    edges = ((e.dependent, e.target) for e in s.latest_edges if e.kind == RUNTIME)
    return DepGraph.from_edges(s.packages, edges)


def dependent_count(g: DepGraph, p: str) -> int:
    g._check(p)
    return len(g.reverse[p])


def dependency_count(g: DepGraph, p: str) -> int:
    g._check(p)
    return len(g.forward[p])


def _reach(adj: Mapping[str, frozenset[str]], start: str) -> int:
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in adj[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) - 1


def transitive_counts(g: DepGraph, p: str) -> tuple[int, int]:
    """(ancestors, descendants): reachable-set sizes under reverse / forward edges, excluding p."""
    g._check(p)
    return _reach(g.reverse, p), _reach(g.forward, p)


def _scc(nodes: tuple[str, ...], adj: Mapping[str, frozenset[str]]) -> list[list[str]]:
    """Iterative Tarjan; components come out in reverse topological order (sinks first)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(adj[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(adj[w]))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def _reach_all(nodes: tuple[str, ...], adj: Mapping[str, frozenset[str]]) -> dict[str, int]:
    comps = _scc(nodes, adj)
    comp_of = {n: i for i, comp in enumerate(comps) for n in comp}
    bit = {n: 1 << k for k, n in enumerate(nodes)}
    reach: list[int] = [0] * len(comps)  # node bitsets, include the component itself
    out = {}
    for i, comp in enumerate(comps):
        bits = 0
        for n in comp:
            bits |= bit[n]
            for w in adj[n]:
                j = comp_of[w]
                if j != i:
                    bits |= reach[j]
        reach[i] = bits
        size = bin(bits).count("1") - 1
        for n in comp:
            out[n] = size
    return out


def all_transitive_counts(g: DepGraph) -> dict[str, tuple[int, int]]:
    """transitive_counts for every node via SCC condensation; same values as per-node BFS."""
    anc = _reach_all(g.nodes, g.reverse)
    desc = _reach_all(g.nodes, g.forward)
    return {n: (anc[n], desc[n]) for n in g.nodes}


def graph_metrics(g: DepGraph) -> list[dict]:
    tc = all_transitive_counts(g)
    return [
        {
            "package": n,
            "dependent_count": len(g.reverse[n]),
            "transitive_dependents": tc[n][0],
            "dependency_count": len(g.forward[n]),
            "transitive_dependencies": tc[n][1],
        }
        for n in g.nodes
    ]
