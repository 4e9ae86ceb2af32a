"""Structured graph families, random digraphs, and edge thinning.

The structured families are symmetric digraphs (every undirected lattice
edge realized as both arcs).  Thinning removes random undirected edges until
the graph stops being hamiltonian; the whole trajectory is kept so callers
can sample instances at any edge count.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import DataError, PreconditionError, SpecError
from .graph import (
    DirectedGraph,
    HamiltonicityChecker,
    emit_facts,
    hamiltonian_cycle,
    parse_facts,
)


def _both_ways(edges: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    arcs = []
    for x, y in edges:
        arcs.append((x, y))
        arcs.append((y, x))
    return tuple(arcs)


# ---------------------------------------------------------------------------
# Grid family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """A side x side lattice, optionally with a rectangular hole.

    The hole is (row0, col0, height, width) in 0-based lattice coordinates
    and must lie strictly inside the grid, leaving the boundary ring intact.
    With require_hamiltonian the side must be even (odd x odd grid graphs
    are never hamiltonian), the hole area must be even, and the generated
    graph is verified to admit a hamiltonian cycle.
    """

    side: int
    hole: Optional[tuple[int, int, int, int]] = None
    require_hamiltonian: bool = False

    def validate(self) -> None:
        if self.side < 2:
            raise SpecError("grid side must be >= 2")
        if self.require_hamiltonian and self.side % 2 != 0:
            raise SpecError(
                "hamiltonicity-by-construction requires an even grid side"
            )
        if self.hole is not None:
            row0, col0, height, width = self.hole
            if height < 1 or width < 1:
                raise SpecError("hole height and width must be >= 1")
            if row0 < 1 or col0 < 1:
                raise SpecError("hole must not touch the boundary ring")
            if row0 + height > self.side - 1 or col0 + width > self.side - 1:
                raise SpecError("hole must lie strictly inside the grid")
            if self.require_hamiltonian and (height * width) % 2 != 0:
                raise SpecError(
                    "hamiltonicity-by-construction requires an even hole area"
                )

    def params_tag(self) -> str:
        tag = f"s{self.side}"
        if self.hole is not None:
            r, c, h, w = self.hole
            tag += f"h{h}x{w}at{r}-{c}"
        return tag


def gen_grid(
    spec: GridSpec, checker: HamiltonicityChecker = hamiltonian_cycle
) -> DirectedGraph:
    """Build the grid graph for `spec`; node ids are compacted row-major."""
    spec.validate()
    side = spec.side
    in_hole = set()
    if spec.hole is not None:
        row0, col0, height, width = spec.hole
        in_hole = {
            (r, c)
            for r in range(row0, row0 + height)
            for c in range(col0, col0 + width)
        }
    ids: dict[tuple[int, int], int] = {}
    for r in range(side):
        for c in range(side):
            if (r, c) not in in_hole:
                ids[(r, c)] = len(ids) + 1
    edges = []
    for (r, c), v in ids.items():
        for dr, dc in ((0, 1), (1, 0)):
            w = ids.get((r + dr, c + dc))
            if w is not None:
                edges.append((v, w))
    graph = DirectedGraph(len(ids), _both_ways(edges))
    if spec.require_hamiltonian and checker(graph) is None:
        raise SpecError(
            "grid spec admits no hamiltonian cycle; adjust side or hole placement"
        )
    return graph


# ---------------------------------------------------------------------------
# Triangular family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangularSpec:
    """A triangular lattice with `rows` rows; row i holds i+1 nodes.

    cut_depth removes that many rows from the apex ("cutting area").
    """

    rows: int
    cut_depth: int = 0
    require_hamiltonian: bool = False

    def validate(self) -> None:
        if self.rows < 2:
            raise SpecError("triangular lattice needs at least 2 rows")
        if self.cut_depth < 0:
            raise SpecError("cut_depth must be >= 0")
        if self.cut_depth >= self.rows:
            raise SpecError("cut_depth must be smaller than rows")

    def params_tag(self) -> str:
        return f"r{self.rows}c{self.cut_depth}"


def gen_triangular(
    spec: TriangularSpec, checker: HamiltonicityChecker = hamiltonian_cycle
) -> DirectedGraph:
    """Build the (possibly cut) triangular lattice; ids compacted row-major."""
    spec.validate()
    ids: dict[tuple[int, int], int] = {}
    for r in range(spec.cut_depth, spec.rows):
        for j in range(r + 1):
            ids[(r, j)] = len(ids) + 1
    edges = []
    for (r, j), v in ids.items():
        for nr, nj in ((r, j + 1), (r + 1, j), (r + 1, j + 1)):
            w = ids.get((nr, nj))
            if w is not None:
                edges.append((v, w))
    graph = DirectedGraph(len(ids), _both_ways(edges))
    if spec.require_hamiltonian and checker(graph) is None:
        raise SpecError(
            "triangular spec admits no hamiltonian cycle; adjust rows or cut"
        )
    return graph


# ---------------------------------------------------------------------------
# Random digraphs
# ---------------------------------------------------------------------------


def _arc_from_index(idx: int, n: int) -> tuple[int, int]:
    # bijection onto ordered non-loop pairs
    x = idx // (n - 1) + 1
    off = idx % (n - 1) + 1
    y = off if off < x else off + 1
    return x, y


def gen_random_digraph(n: int, m: int, seed: int) -> DirectedGraph:
    """Exactly m distinct non-loop arcs sampled uniformly, seeded."""
    if n < 1:
        raise SpecError("n must be >= 1")
    total = n * (n - 1)
    if not 0 <= m <= total:
        raise SpecError(f"m must be in 0..{total} for n={n}")
    rng = random.Random(seed)
    picks = rng.sample(range(total), m) if m else []
    return DirectedGraph(n, tuple(_arc_from_index(i, n) for i in picks))


# ---------------------------------------------------------------------------
# Thinning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThinStep:
    graph: DirectedGraph
    removed_edge: tuple[int, int]
    hamiltonian: bool


@dataclass(frozen=True)
class ThinningTrajectory:
    """Edge-removal trace ending at the first non-hamiltonian graph."""

    initial: DirectedGraph
    steps: tuple[ThinStep, ...]

    @property
    def final(self) -> DirectedGraph:
        return self.steps[-1].graph

    @property
    def last_hamiltonian(self) -> DirectedGraph:
        if len(self.steps) >= 2:
            return self.steps[-2].graph
        return self.initial

    def sample(
        self, window: Optional[tuple[int, int]] = None
    ) -> list[tuple[int, DirectedGraph, bool]]:
        """Pick (step_index, graph, hamiltonian) triples for instance emission.

        Always includes both endpoint graphs (last hamiltonian and first
        non-hamiltonian).  With a (lo, hi) window, also includes every step
        whose undirected edge count lies in [lo, hi].
        """
        picked: dict[int, tuple[int, DirectedGraph, bool]] = {}
        last_ham_idx = len(self.steps) - 2
        if last_ham_idx >= 0:
            step = self.steps[last_ham_idx]
            picked[last_ham_idx] = (last_ham_idx, step.graph, step.hamiltonian)
        picked[len(self.steps) - 1] = (
            len(self.steps) - 1,
            self.final,
            False,
        )
        if window is not None:
            lo, hi = window
            for i, step in enumerate(self.steps):
                edges = len(step.graph.undirected_edges())
                if lo <= edges <= hi:
                    picked[i] = (i, step.graph, step.hamiltonian)
        return [picked[i] for i in sorted(picked)]


def thin_until_nonhamiltonian(
    graph: DirectedGraph,
    seed: int,
    checker: HamiltonicityChecker = hamiltonian_cycle,
) -> ThinningTrajectory:
    """Remove random undirected edges until the graph stops being hamiltonian.

    The input must be a hamiltonian symmetric digraph.  Each step removes one
    undirected edge (both arcs) chosen uniformly from the remaining ones; the
    run is a pure function of (graph, seed, checker).
    """
    if not graph.is_symmetric:
        raise PreconditionError("thinning requires a symmetric digraph")
    if checker(graph) is None:
        raise PreconditionError("thinning requires a hamiltonian input graph")
    rng = random.Random(seed)
    edges = list(graph.undirected_edges())
    current = graph
    steps: list[ThinStep] = []
    while True:
        x, y = edges.pop(rng.randrange(len(edges)))
        current = current.without_undirected_edge(x, y)
        witness = checker(current)
        steps.append(
            ThinStep(graph=current, removed_edge=(x, y), hamiltonian=witness is not None)
        )
        if witness is None:
            return ThinningTrajectory(initial=graph, steps=tuple(steps))


# ---------------------------------------------------------------------------
# Reasonably-hard filtering
# ---------------------------------------------------------------------------


def filter_reasonably_hard(matrix, low: float = 50.0, cutoff: Optional[float] = None):
    """Instance ids solved by at least one encoding in [low, cutoff) seconds.

    Implements the hardness window literally: instances that time out on all
    encodings ("too hard") and instances solved fast by every encoding
    ("too easy") both fail the predicate.  The matrix must be complete.
    """
    matrix.require_complete()
    if cutoff is None:
        cutoff = matrix.cutoff_s
    hard = set()
    for instance_id in matrix.instance_ids:
        for enc in matrix.encoding_ids:
            outcome = matrix.cells[(instance_id, enc)]
            if outcome.solved and low <= outcome.runtime_s < cutoff:
                hard.add(instance_id)
                break
    return hard


# ---------------------------------------------------------------------------
# Instance files and manifests
# ---------------------------------------------------------------------------

MANIFEST_COLUMNS = (
    "instance_id",
    "family",
    "params",
    "seed",
    "nodes",
    "arcs",
    "hamiltonian_flag",
)


@dataclass(frozen=True)
class InstanceRecord:
    """One generated instance plus the manifest row describing it."""

    family: str
    params: str
    seed: int
    step: int
    graph: DirectedGraph
    hamiltonian: Optional[bool] = None  # None = not checked

    @property
    def instance_id(self) -> str:
        return f"{self.family}_{self.params}_{self.seed}_{self.step}"


def write_instances(records: Sequence[InstanceRecord], out_dir: Path) -> Path:
    """Write one `<instance_id>.lp` file per record plus `manifest.csv`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for rec in records:
            (out_dir / f"{rec.instance_id}.lp").write_text(emit_facts(rec.graph))
            flag = "" if rec.hamiltonian is None else str(rec.hamiltonian).lower()
            writer.writerow(
                [
                    rec.instance_id,
                    rec.family,
                    rec.params,
                    rec.seed,
                    rec.graph.node_count,
                    rec.graph.arc_count,
                    flag,
                ]
            )
    return manifest


def read_instances(in_dir: Path) -> list[tuple[str, DirectedGraph]]:
    """Load (instance_id, graph) pairs per the manifest in `in_dir`."""
    in_dir = Path(in_dir)
    manifest = in_dir / "manifest.csv"
    if not manifest.exists():
        raise DataError(f"no manifest.csv in {in_dir}")
    out = []
    with manifest.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != MANIFEST_COLUMNS:
            raise DataError(
                f"manifest columns {reader.fieldnames} != {list(MANIFEST_COLUMNS)}"
            )
        for row in reader:
            instance_id = row["instance_id"]
            path = in_dir / f"{instance_id}.lp"
            if not path.exists():
                raise DataError(f"instance file missing: {path}")
            out.append((instance_id, parse_facts(path.read_text())))
    return out
