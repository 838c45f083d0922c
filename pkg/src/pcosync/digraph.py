"""Simple directed graphs and the structural analysis the synchronization results depend on.

Vertices are ``0..n-1``.  An edge ``(i, j)`` means information flows from
``i`` to ``j``: when ``i`` fires it pulses ``j``.
"""
from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "GraphError", "NotRooted", "BadRoot", "BadSize", "ParseError",
    "Digraph", "GraphAnalysis", "DepthKind",
    "strong_components", "root_set", "condense", "depth", "spanning_tree",
    "analyze", "generate", "FAMILIES", "feeder_pair_graph", "histogram_standin_graph",
    "load_graph", "save_graph", "parse_edge_list",
]

DEPTH_EXACT_LIMIT = 10


class GraphError(ValueError):
    pass


class NotRooted(GraphError):
    pass


class BadRoot(GraphError):
    pass


class BadSize(GraphError):
    pass


class ParseError(GraphError):
    pass


class DepthKind(str, enum.Enum):
    EXACT = "exact"
    LOWER_BOUND = "lower_bound"


@dataclass(frozen=True)
class Digraph:
    """Simple digraph with a canonical (sorted) edge order.

    The edge order doubles as the index used when edges are sampled, so two
    graphs with the same edge set always consume random numbers identically.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise BadSize(f"vertex count must be a positive integer, got {self.n!r}")
        canon = []
        for e in self.edges:
            i, j = (int(x) for x in e)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge {(i, j)} out of range for n={self.n}")
            if i == j:
                raise GraphError(f"self-arc at vertex {i}")
            canon.append((i, j))
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise GraphError(f"duplicate edge {a}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(canon))

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
        return tuple(tuple(a) for a in adj)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[j].append(i)
        return tuple(tuple(a) for a in adj)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.edges)}

    @cached_property
    def analysis(self) -> "GraphAnalysis":
        return analyze(self)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edge_index

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    def relabel(self, perm: Sequence[int]) -> "Digraph":
        """Return the graph with vertex ``v`` renamed ``perm[v]``."""
        return Digraph(self.n, tuple((perm[i], perm[j]) for i, j in self.edges))


@dataclass(frozen=True)
class GraphAnalysis:
    scc_assignment: tuple[int, ...]
    root_set: frozenset[int]
    is_rooted: bool
    is_acyclic: bool
    is_quasi_acyclic: bool
    condensed: Digraph | None
    depth: int | None
    depth_kind: DepthKind | None

    @property
    def num_components(self) -> int:
        return max(self.scc_assignment) + 1

    @property
    def root_component_size(self) -> int:
        return len(self.root_set)


def strong_components(g: Digraph) -> tuple[int, ...]:
    """Component id per vertex (iterative Tarjan).

    Ids follow a topological order of the component DAG: every edge between
    different components goes from a lower id to a higher id.
    """
    n = g.n
    out = g.out_neighbors
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for s in range(n):
        if index[s] != -1:
            continue
        work = [(s, 0)]
        while work:
            v, k = work.pop()
            if k == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            nbrs = out[v]
            while k < len(nbrs):
                w = nbrs[k]
                k += 1
                if index[w] == -1:
                    work.append((v, k))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    # Tarjan emits components in reverse topological order.
    assign = [0] * n
    total = len(comps)
    for cid, comp in enumerate(comps):
        for v in comp:
            assign[v] = total - 1 - cid
    return tuple(assign)


def _source_components(g: Digraph, assign: Sequence[int]) -> set[int]:
    has_in = set()
    for i, j in g.edges:
        if assign[i] != assign[j]:
            has_in.add(assign[j])
    return set(range(max(assign) + 1)) - has_in


def root_set(g: Digraph) -> frozenset[int]:
    """Vertices with a directed path to every other vertex (empty if not rooted)."""
    assign = strong_components(g)
    sources = _source_components(g, assign)
    if len(sources) != 1:
        return frozenset()
    (src,) = sources
    return frozenset(v for v in range(g.n) if assign[v] == src)


def condense(g: Digraph) -> tuple[Digraph, tuple[int, ...]]:
    """Collapse the root component into vertex 0.

    Non-root vertices keep their relative order and are renumbered
    ``1, 2, ...``.  Returns the condensed graph and the old-to-new vertex map.
    """
    roots = root_set(g)
    if not roots:
        raise NotRooted("graph has no root")
    mapping = [0] * g.n
    nxt = 1
    for v in range(g.n):
        if v not in roots:
            mapping[v] = nxt
            nxt += 1
    edges = {(mapping[i], mapping[j]) for i, j in g.edges if mapping[i] != mapping[j]}
    return Digraph(nxt, tuple(edges)), tuple(mapping)


def _is_acyclic(g: Digraph, assign: Sequence[int]) -> bool:
    return max(assign) + 1 == g.n


def _topological_order(g: Digraph) -> list[int]:
    indeg = [len(a) for a in g.in_neighbors]
    q = deque(v for v in range(g.n) if indeg[v] == 0)
    order = []
    while q:
        v = q.popleft()
        order.append(v)
        for w in g.out_neighbors[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                q.append(w)
    if len(order) != g.n:
        raise GraphError("graph has a cycle")
    return order


def _longest_path_dag(g: Digraph, root: int) -> int:
    dist = [-1] * g.n
    dist[root] = 0
    for v in _topological_order(g):
        if dist[v] < 0:
            continue
        for w in g.out_neighbors[v]:
            dist[w] = max(dist[w], dist[v] + 1)
    return max(dist)


def _longest_simple_path(g: Digraph, root: int) -> list[int]:
    """Exhaustive search for a longest simple path starting at ``root``."""
    out = g.out_neighbors
    best: list[int] = [root]
    path = [root]
    visited = 1 << root
    n = g.n

    def dfs(v: int, visited: int) -> bool:
        nonlocal best
        if len(path) > len(best):
            best = list(path)
            if len(best) == n:
                return True
        for w in out[v]:
            if not visited >> w & 1:
                path.append(w)
                if dfs(w, visited | 1 << w):
                    return True
                path.pop()
        return False

    dfs(root, visited)
    return best


def _dfs_tree_parents(g: Digraph, root: int) -> list[int]:
    parent = [-1] * g.n
    seen = [False] * g.n
    seen[root] = True
    stack = [(root, iter(g.out_neighbors[root]))]
    while stack:
        v, it = stack[-1]
        for w in it:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                stack.append((w, iter(g.out_neighbors[w])))
                break
        else:
            stack.pop()
    return parent


def _tree_depth(parent: Sequence[int], root: int) -> int:
    best = 0
    for v in range(len(parent)):
        d = 0
        u = v
        while u != root:
            u = parent[u]
            d += 1
        best = max(best, d)
    return best


def depth(g: Digraph, exact_limit: int = DEPTH_EXACT_LIMIT) -> tuple[int, DepthKind]:
    """Maximal depth of a directed spanning tree of ``g``.

    Exact for acyclic graphs (longest path from the root) and for
    ``n <= exact_limit`` (exhaustive longest simple path over all roots).
    Larger cyclic graphs get the deepest DFS tree over all roots, flagged as a
    lower bound.
    """
    roots = root_set(g)
    if not roots:
        raise NotRooted("depth is defined for rooted graphs only")
    assign = strong_components(g)
    if _is_acyclic(g, assign):
        (root,) = roots
        return _longest_path_dag(g, root), DepthKind.EXACT
    if g.n <= exact_limit:
        return max(len(_longest_simple_path(g, r)) - 1 for r in roots), DepthKind.EXACT
    best = max(_tree_depth(_dfs_tree_parents(g, r), r) for r in roots)
    return best, DepthKind.LOWER_BOUND


def spanning_tree(g: Digraph, root: int, mode: str = "min_depth",
                  exact_limit: int = DEPTH_EXACT_LIMIT) -> Digraph:
    """Directed spanning tree of ``g`` rooted at ``root``.

    ``min_depth`` grows breadth-first layers.  ``max_depth`` lays down a
    longest simple path first (exhaustive when ``n <= exact_limit``, a DFS
    branch otherwise) and attaches the remaining vertices breadth-first.
    """
    roots = root_set(g)
    if not roots:
        raise NotRooted("graph has no root")
    if root not in roots:
        raise BadRoot(f"vertex {root} is not a root")
    parent = [-1] * g.n
    seen = [False] * g.n
    if mode == "min_depth":
        frontier = [root]
    elif mode == "max_depth":
        if g.n <= exact_limit:
            path = _longest_simple_path(g, root)
        else:
            dfs_parent = _dfs_tree_parents(g, root)
            deepest = max(range(g.n), key=lambda v: (_tree_depth_of(dfs_parent, v, root), -v))
            path = [deepest]
            while path[-1] != root:
                path.append(dfs_parent[path[-1]])
            path.reverse()
        for a, b in zip(path, path[1:]):
            parent[b] = a
        for v in path:
            seen[v] = True
        frontier = list(reversed(path))
    else:
        raise ValueError(f"unknown spanning tree mode {mode!r}")
    seen[root] = True
    q = deque(frontier)
    while q:
        v = q.popleft()
        for w in g.out_neighbors[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                q.append(w)
    return Digraph(g.n, tuple((parent[v], v) for v in range(g.n) if v != root))


def _tree_depth_of(parent: Sequence[int], v: int, root: int) -> int:
    d = 0
    while v != root:
        v = parent[v]
        d += 1
    return d


def analyze(g: Digraph, exact_limit: int = DEPTH_EXACT_LIMIT) -> GraphAnalysis:
    assign = strong_components(g)
    roots = root_set(g)
    rooted = bool(roots)
    acyclic = _is_acyclic(g, assign)
    quasi = False
    condensed = None
    dep = kind = None
    if rooted:
        condensed, _ = condense(g)
        quasi = _is_acyclic(condensed, strong_components(condensed))
        dep, kind = depth(g, exact_limit)
    return GraphAnalysis(
        scc_assignment=assign,
        root_set=roots,
        is_rooted=rooted,
        is_acyclic=acyclic,
        is_quasi_acyclic=quasi,
        condensed=condensed,
        depth=dep,
        depth_kind=kind,
    )


# -- generators ---------------------------------------------------------------

FAMILIES = ("path", "cycle", "complete", "random_dag", "random_rooted",
            "strongly_connected", "quasi_acyclic")


def _random_dag_edges(n: int, rng: np.random.Generator, edge_prob: float,
                      order: Sequence[int]) -> set[tuple[int, int]]:
    edges = set()
    for pos in range(1, n):
        v = order[pos]
        edges.add((order[int(rng.integers(pos))], v))
        for q in range(pos):
            if rng.random() < edge_prob:
                edges.add((order[q], v))
    return edges


def generate(family: str, n: int, seed: int | None = 0, *, edge_prob: float = 0.3,
             back_prob: float = 0.15, root_size: int | None = None) -> Digraph:
    """Build a graph from one of the named families.

    ``random_dag`` takes vertex 0 as the root, shuffles the rest into a
    topological order, gives every vertex a uniformly chosen earlier parent
    and adds each other forward edge with probability ``edge_prob``.
    ``random_rooted`` adds backward edges with probability ``back_prob``.
    ``strongly_connected`` is a random Hamiltonian cycle plus extra edges.
    ``quasi_acyclic`` puts a strongly connected root component of
    ``root_size`` vertices in front of a random DAG.
    """
    if n < 1 or (family in ("cycle", "strongly_connected") and n < 2):
        raise BadSize(f"family {family!r} needs more vertices than n={n}")
    rng = np.random.default_rng(seed)
    if family == "path":
        edges = {(i, i + 1) for i in range(n - 1)}
    elif family == "cycle":
        edges = {(i, (i + 1) % n) for i in range(n)}
    elif family == "complete":
        edges = {(i, j) for i in range(n) for j in range(n) if i != j}
    elif family in ("random_dag", "random_rooted"):
        order = [0] + [int(v) + 1 for v in rng.permutation(n - 1)]
        edges = _random_dag_edges(n, rng, edge_prob, order)
        if family == "random_rooted":
            for pos in range(1, n):
                for q in range(pos):
                    if rng.random() < back_prob:
                        edges.add((order[pos], order[q]))
    elif family == "strongly_connected":
        perm = [int(v) for v in rng.permutation(n)]
        edges = {(perm[k], perm[(k + 1) % n]) for k in range(n)} if n > 1 else set()
        for i in range(n):
            for j in range(n):
                if i != j and rng.random() < edge_prob:
                    edges.add((i, j))
    elif family == "quasi_acyclic":
        k = root_size if root_size is not None else max(1, min(n, int(rng.integers(2, 5))))
        if not 1 <= k <= n:
            raise BadSize(f"root component size {k} invalid for n={n}")
        edges = set()
        if k > 1:
            edges |= set(generate("strongly_connected", k, int(rng.integers(2**31)),
                                  edge_prob=edge_prob).edges)
        for v in range(k, n):
            edges.add((int(rng.integers(v)), v))
            for u in range(v):
                if rng.random() < edge_prob:
                    edges.add((u, v))
    else:
        raise ValueError(f"unknown graph family {family!r}")
    return Digraph(n, tuple(edges))


def feeder_pair_graph() -> Digraph:
    """Three-vertex rooted graph whose deterministic dynamics can cycle forever."""
    return Digraph(3, ((0, 1), (1, 2), (2, 1)))


def histogram_standin_graph() -> Digraph:
    """12-vertex rooted digraph with three roots and maximal spanning-tree depth 8.

    Roots 0 -> 1 -> 2 -> 0 form the root component; only vertex 2 leaves it,
    into a layered DAG whose longest path from 2 has six edges.
    """
    edges = [
        (0, 1), (1, 2), (2, 0),
        (2, 3), (2, 4),
        (3, 5), (4, 5), (4, 7),
        (5, 6), (5, 7),
        (6, 8), (7, 8), (6, 9),
        (8, 9), (8, 10), (3, 10),
        (9, 11), (10, 11),
    ]
    return Digraph(12, tuple(edges))


# -- file formats ---------------------------------------------------------------

def parse_edge_list(text: str) -> Digraph:
    """Parse ``i j`` lines (``#`` comments).  ``n`` is 1 + the largest index
    unless a ``# n: <int>`` comment fixes it."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n:"):
                try:
                    n = int(body[2:])
                except ValueError as exc:
                    raise ParseError(f"line {lineno}: bad vertex count") from exc
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'i j', got {raw!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer vertex") from exc
    if n is None:
        if not edges:
            raise ParseError("no edges and no '# n: <int>' line")
        n = 1 + max(max(e) for e in edges)
    return Digraph(n, tuple(edges))


def _graph_from_json(doc: dict) -> Digraph:
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise ParseError('graph JSON needs "n" and "edges"')
    try:
        edges = tuple((int(e[0]), int(e[1])) for e in doc["edges"])
        for e in doc["edges"]:
            if len(e) != 2:
                raise ParseError(f"edge {e!r} is not a pair")
    except (TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"malformed edge list: {exc}") from exc
    return Digraph(int(doc["n"]), edges)


def load_graph(path: str | Path) -> Digraph:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
        return _graph_from_json(doc)
    return parse_edge_list(text)


def save_graph(g: Digraph, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(g.to_json()) + "\n")
    else:
        lines = [f"# n: {g.n}"] + [f"{i} {j}" for i, j in g.edges]
        path.write_text("\n".join(lines) + "\n")

