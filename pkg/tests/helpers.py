"""Independent reference oracles used to cross-check the production code.

Everything here is deliberately naive: no pruning heuristics beyond following
arcs, no shared code with the implementations under test.
"""

from itertools import permutations
from random import Random

from encsel.graph import DirectedGraph


def perm_hamiltonian(graph: DirectedGraph) -> tuple[int, ...] | None:
    """Enumerate all node orders starting at 1; feasible only for small n."""
    n = graph.node_count
    if n == 1:
        return None
    arcs = set(graph.arcs)
    for rest in permutations(range(2, n + 1)):
        order = (1,) + rest
        if all((order[i], order[(i + 1) % n]) in arcs for i in range(n)):
            return order
    return None


def path_enum_hamiltonian(graph: DirectedGraph) -> tuple[int, ...] | None:
    """Arc-following enumeration of simple paths from node 1.

    Same answers as perm_hamiltonian but skips prefixes that already break
    an arc constraint, which keeps it usable on sparse graphs beyond n=8.
    No feasibility pruning of any kind is applied.
    """
    n = graph.node_count
    if n == 1:
        return None
    arcs = set(graph.arcs)
    succ: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for x, y in graph.arcs:
        succ[x].append(y)
    for v in succ:
        succ[v].sort()

    path = [1]
    used = {1}

    def walk() -> bool:
        u = path[-1]
        if len(path) == n:
            return (u, 1) in arcs
        for w in succ[u]:
            if w not in used:
                used.add(w)
                path.append(w)
                if walk():
                    return True
                path.pop()
                used.remove(w)
        return False

    return tuple(path) if walk() else None


def random_digraph(n: int, arc_probability: float, rng: Random) -> DirectedGraph:
    arcs = [
        (x, y)
        for x in range(1, n + 1)
        for y in range(1, n + 1)
        if x != y and rng.random() < arc_probability
    ]
    return DirectedGraph(n, tuple(arcs))
