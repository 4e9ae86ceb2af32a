"""Directed graphs, ASP fact I/O, an exact hamiltonicity oracle, and the
BFS/DFS/beam traversals that feed feature extraction.

Nodes are the integers 1..node_count.  All values are immutable after
construction and safe to share between workers.  Traversals visit successors
in ascending node id so that every derived quantity is deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

from .errors import FactParseError, ValidationError

#: Frontier width used by beam-limited BFS when none is given.
DEFAULT_BEAM_WIDTH = 2


@dataclass(frozen=True)
class DirectedGraph:
    """A loop-free directed graph on nodes 1..node_count.

    Arcs are canonicalized to a tuple sorted ascending by (from, to).
    Construction rejects self-loops, duplicate arcs and endpoints outside
    the node range.
    """

    node_count: int
    arcs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.node_count < 1:
            raise ValidationError("graph must have at least one node")
        arcs = tuple(sorted((int(x), int(y)) for x, y in self.arcs))
        seen: set[tuple[int, int]] = set()
        for x, y in arcs:
            if x == y:
                raise ValidationError(f"self-loop ({x},{y}) is not allowed")
            if not (1 <= x <= self.node_count and 1 <= y <= self.node_count):
                raise ValidationError(
                    f"arc ({x},{y}) has an endpoint outside 1..{self.node_count}"
                )
            if (x, y) in seen:
                raise ValidationError(f"duplicate arc ({x},{y})")
            seen.add((x, y))
        object.__setattr__(self, "arcs", arcs)

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    @cached_property
    def arc_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.arcs)

    @cached_property
    def _succ(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.node_count + 1)]
        for x, y in self.arcs:
            out[x].append(y)
        return tuple(tuple(sorted(s)) for s in out)

    @cached_property
    def _pred(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.node_count + 1)]
        for x, y in self.arcs:
            inc[y].append(x)
        return tuple(tuple(sorted(p)) for p in inc)

    def successors(self, node: int) -> tuple[int, ...]:
        return self._succ[node]

    def predecessors(self, node: int) -> tuple[int, ...]:
        return self._pred[node]

    def out_degree(self, node: int) -> int:
        return len(self._succ[node])

    def in_degree(self, node: int) -> int:
        return len(self._pred[node])

    def degree(self, node: int) -> int:
        return self.out_degree(node) + self.in_degree(node)

    def has_arc(self, x: int, y: int) -> bool:
        return (x, y) in self.arc_set

    @cached_property
    def is_symmetric(self) -> bool:
        """True when (x,y) is an arc iff (y,x) is."""
        return all((y, x) in self.arc_set for x, y in self.arcs)

    def undirected_edges(self) -> tuple[tuple[int, int], ...]:
        """Sorted (x,y) pairs with x<y such that both arcs are present."""
        return tuple(
            (x, y) for x, y in self.arcs if x < y and (y, x) in self.arc_set
        )

    def without_undirected_edge(self, x: int, y: int) -> "DirectedGraph":
        """Copy of the graph with both arcs between x and y removed."""
        drop = {(x, y), (y, x)}
        return DirectedGraph(
            self.node_count, tuple(a for a in self.arcs if a not in drop)
        )


@dataclass(frozen=True)
class CycleWitness:
    """A hamiltonian cycle given as the visiting order, starting at node 1."""

    order: tuple[int, ...]

    def validates(self, graph: DirectedGraph) -> bool:
        """Check the arc-membership invariant without re-solving."""
        order = self.order
        if sorted(order) != list(range(1, graph.node_count + 1)):
            return False
        pairs = zip(order, order[1:] + order[:1])
        return all(graph.has_arc(x, y) for x, y in pairs)


@dataclass(frozen=True)
class DfsProfile:
    """Summary of one deterministic DFS (ascending successor order).

    Depth fields are None when the corresponding back edge never occurs;
    feature vectors serialize None as -1.
    """

    first_back_depth: Optional[int]
    back_to_root_depth: Optional[int]
    back_to_any_depth: Optional[int]
    avg_backjump_depth: float
    sum_choices_along_path: int
    one_path_len: int


# --------------------------------------------------------------------------
# ASP fact text
# --------------------------------------------------------------------------

_FACT_RE = re.compile(
    r"(?P<pred>node|link)\s*\(\s*(?P<a>\d+)\s*"
    r"(?:(?P<dots>\.\.)\s*(?P<b>\d+)\s*|,\s*(?P<c>\d+)\s*)?"
    r"\)\s*\."
)


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    last_nl = text.rfind("\n", 0, pos)
    return line, pos - last_nl


def parse_facts(text: str) -> DirectedGraph:
    """Parse `node(...)` / `link(...)` fact text into a graph.

    Accepts `node(a).`, interval `node(a..b).` and `link(x,y).` facts in any
    order with arbitrary whitespace.  Node ids must tile 1..n; arcs must be
    loop-free, unique and stay inside the declared nodes.
    """
    nodes: set[int] = set()
    arcs: list[tuple[int, int]] = []
    pos, n = 0, len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _FACT_RE.match(text, pos)
        if m is None:
            line, col = _line_col(text, pos)
            raise FactParseError(
                "expected a `node(...)` or `link(X,Y)` fact", line, col
            )
        pred = m.group("pred")
        if pred == "node":
            if m.group("c") is not None:
                line, col = _line_col(text, pos)
                raise FactParseError(
                    "`node` takes a single id or an interval `a..b`", line, col
                )
            a = int(m.group("a"))
            b = int(m.group("b")) if m.group("dots") else a
            nodes.update(range(a, b + 1))  # empty when a > b, like a grounder
        else:
            if m.group("c") is None:
                line, col = _line_col(text, pos)
                raise FactParseError("`link` takes two arguments", line, col)
            arcs.append((int(m.group("a")), int(m.group("c"))))
        pos = m.end()

    if not nodes:
        raise ValidationError("no nodes declared")
    top = max(nodes)
    if nodes != set(range(1, top + 1)):
        missing = sorted(set(range(1, top + 1)) - nodes)[:5]
        raise ValidationError(
            f"node ids must be contiguous from 1 (missing {missing})"
        )
    for x, y in arcs:
        if x not in nodes or y not in nodes:
            raise ValidationError(f"arc ({x},{y}) endpoint is not a declared node")
    return DirectedGraph(top, tuple(arcs))


def emit_facts(graph: DirectedGraph) -> str:
    """Render a graph as fact text; round-trips through parse_facts."""
    lines = [f"node(1..{graph.node_count})."]
    lines.extend(f"link({x},{y})." for x, y in graph.arcs)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Exact hamiltonicity
# --------------------------------------------------------------------------


def hamiltonian_cycle(graph: DirectedGraph) -> Optional[CycleWitness]:
    """Exact hamiltonian-cycle search; returns a witness or None.

    Complete backtracking anchored at node 1, trying successors in ascending
    order, so the returned witness is the lexicographically least cycle
    starting at 1.  Branches are pruned when some unvisited node can no
    longer be reached from the path end, or can no longer reach node 1,
    through unvisited nodes only; both checks are sound, so pruning never
    changes the answer.
    """
    n = graph.node_count
    if n == 1:
        return None  # the closing arc would be a self-loop
    succ = graph._succ
    pred = graph._pred
    for v in range(1, n + 1):
        if not succ[v] or not pred[v]:
            return None

    on_path = bytearray(n + 1)
    on_path[1] = 1
    path = [1]
    seen = [0] * (n + 1)  # scratch for feasibility sweeps, keyed by stamp
    stamp = 0

    def sweep(start: int, adjacency, tag: int) -> int:
        reached = 0
        stack = [start]
        seen[start] = tag
        while stack:
            u = stack.pop()
            for w in adjacency[u]:
                if not on_path[w] and seen[w] != tag:
                    seen[w] = tag
                    reached += 1
                    stack.append(w)
        return reached

    def feasible(current: int) -> bool:
        nonlocal stamp
        remaining = n - len(path)
        if remaining == 0:
            return True
        # every unvisited node must stay reachable from the path end ...
        stamp += 1
        if sweep(current, succ, stamp) != remaining:
            return False
        # ... and must still be able to reach node 1
        stamp += 1
        return sweep(1, pred, stamp) == remaining

    def extend() -> bool:
        current = path[-1]
        if len(path) == n:
            return graph.has_arc(current, 1)
        for v in succ[current]:
            if on_path[v]:
                continue
            on_path[v] = 1
            path.append(v)
            if feasible(v) and extend():
                return True
            path.pop()
            on_path[v] = 0
        return False

    if extend():
        return CycleWitness(tuple(path))
    return None


#: Signature of a pluggable hamiltonicity checker.
HamiltonicityChecker = Callable[[DirectedGraph], Optional[CycleWitness]]


# --------------------------------------------------------------------------
# Traversal probes
# --------------------------------------------------------------------------


def bfs_depths(graph: DirectedGraph) -> list[int]:
    """Depth of the BFS tree rooted at each node 1..n, in that order.

    Depth is the maximum distance among reachable nodes; unreachable nodes
    are ignored, so a sink root has depth 0.
    """
    succ = graph._succ
    n = graph.node_count
    depths = []
    for root in range(1, n + 1):
        visited = bytearray(n + 1)
        visited[root] = 1
        frontier = [root]
        depth = 0
        while True:
            nxt = []
            for u in frontier:
                for w in succ[u]:
                    if not visited[w]:
                        visited[w] = 1
                        nxt.append(w)
            if not nxt:
                break
            frontier = nxt
            depth += 1
        depths.append(depth)
    return depths


def beam_depths(graph: DirectedGraph, width: int = DEFAULT_BEAM_WIDTH) -> list[int]:
    """Beam-limited BFS depth from each root, frontier capped at `width`.

    Each level discovers the unvisited successors of the current frontier,
    marks them all visited, and keeps the `width` smallest ids as the next
    frontier.  With width >= n this equals bfs_depths.
    """
    if width < 1:
        raise ValidationError("beam width must be >= 1")
    succ = graph._succ
    n = graph.node_count
    depths = []
    for root in range(1, n + 1):
        visited = bytearray(n + 1)
        visited[root] = 1
        frontier = [root]
        depth = 0
        while True:
            discovered = set()
            for u in frontier:
                for w in succ[u]:
                    if not visited[w]:
                        discovered.add(w)
            if not discovered:
                break
            for w in discovered:
                visited[w] = 1
            frontier = sorted(discovered)[:width]
            depth += 1
        depths.append(depth)
    return depths


def dfs_profile(graph: DirectedGraph, root: int = 1) -> DfsProfile:
    """Profile of the deterministic DFS from `root`.

    Back edges are arcs to a node on the current DFS stack.  Depths refer to
    the stack depth of the arc's source when the arc is first examined.
    """
    if not 1 <= root <= graph.node_count:
        raise ValidationError(f"root {root} outside 1..{graph.node_count}")
    succ = graph._succ
    depth = {root: 0}
    parent: dict[int, int] = {}
    on_stack = {root}
    preorder = [root]
    first_back: Optional[int] = None
    first_to_root: Optional[int] = None
    jumps: list[int] = []

    stack: list[tuple[int, int]] = [(root, 0)]
    while stack:
        u, i = stack[-1]
        if i < len(succ[u]):
            stack[-1] = (u, i + 1)
            v = succ[u][i]
            if v in depth:
                if v in on_stack:  # back edge u -> v
                    jumps.append(depth[u] - depth[v])
                    if first_back is None:
                        first_back = depth[u]
                    if v == root and first_to_root is None:
                        first_to_root = depth[u]
            else:
                depth[v] = depth[u] + 1
                parent[v] = u
                on_stack.add(v)
                preorder.append(v)
                stack.append((v, 0))
        else:
            stack.pop()
            on_stack.discard(u)

    deepest = root
    for v in preorder:  # ties resolve to the first node reached
        if depth[v] > depth[deepest]:
            deepest = v
    path_sum = 0
    v = deepest
    while True:
        path_sum += len(succ[v]) - 1
        if v == root:
            break
        v = parent[v]

    cur = root
    walked = {root}
    one_path = 0
    while True:
        unvisited = [w for w in succ[cur] if w not in walked]
        if len(unvisited) != 1:
            break
        cur = unvisited[0]
        walked.add(cur)
        one_path += 1

    avg_jump = sum(jumps) / len(jumps) if jumps else 0.0
    return DfsProfile(
        first_back_depth=first_back,
        back_to_root_depth=first_to_root,
        back_to_any_depth=first_back,
        avg_backjump_depth=avg_jump,
        sum_choices_along_path=path_sum,
        one_path_len=one_path,
    )
