"""Instance feature catalog: 25 graph features and 14 encoding-static ones.

Graph features mix degree statistics with probes of BFS/DFS/beam search
trees (those inform about reachability structure).  Encoding-static features
come from the closed-form ground counts of encoding 1 and carry an `_hc1`
suffix.  Values are always finite; -1 encodes "undefined" where the catalog
allows it.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .encodings import static_counts
from .errors import DataError, SchemaError, ValidationError
from .graph import (
    DEFAULT_BEAM_WIDTH,
    DirectedGraph,
    beam_depths,
    bfs_depths,
    dfs_profile,
)

CATALOG_VERSION = "1"

GRAPH_FEATURES = (
    "ratio_node_edge",
    "ratio_bi_edge",
    "avg_out_degree",
    "avg_in_degree",
    "ratio_of_odd_out_degree",
    "ratio_of_even_out_degree",
    "ratio_of_odd_in_degree",
    "ratio_of_even_in_degree",
    "ratio_of_odd_degree",
    "ratio_of_even_degree",
    "ratio_out_degree_less_than_3",
    "ratio_in_degree_less_than_3",
    "ratio_degree_less_than_3",
    "min_depth_bfs",
    "max_depth_bfs",
    "avg_depth_bfs",
    "dfs_1st_back_depth",
    "sum_of_choices_along_path",
    "depth_avg_dfs_backjump",
    "depth_back_to_root",
    "depth_back_to_any",
    "depth_one_path",
    "min_depth_beam",
    "max_depth_beam",
    "avg_depth_beam",
)

STATIC_FEATURE_BASES = (
    "Frac_Unary_Rules",
    "Frac_Binary_Rules",
    "Frac_Ternary_Rules",
    "Frac_Normal_Rules",
    "Frac_Cardinality_Rules",
    "Frac_Choice_Rules",
    "Constraints",
    "Rules",
    "Problem_Variables",
    "Assigned_Problem_Variables",
    "Free_Problem_Variables",
    "Frac_Binary_Constraints",
    "Frac_Ternary_Constraints",
    "Frac_Other_Constraints",
)

#: Graph features whose value is -1 on degenerate inputs.
_UNDEFINED_ALLOWED = {
    "ratio_node_edge",
    "ratio_bi_edge",
    "dfs_1st_back_depth",
    "depth_back_to_root",
    "depth_back_to_any",
}


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    group: str  # "graph" or "static_hc1".."static_hc6"
    provenance: str
    reconstructed: bool = False
    undefined_allowed: bool = False


@dataclass(frozen=True)
class FeatureCatalog:
    entries: tuple[CatalogEntry, ...]
    beam_width: int = DEFAULT_BEAM_WIDTH
    version: str = CATALOG_VERSION

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(names) != len(set(names)):
            raise ValidationError("catalog feature names must be unique")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    @property
    def groups(self) -> tuple[str, ...]:
        seen: list[str] = []
        for e in self.entries:
            if e.group not in seen:
                seen.append(e.group)
        return tuple(seen)

    def group_names(self, group: str) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries if e.group == group)

    def subset(self, names: Sequence[str]) -> "FeatureCatalog":
        by_name = {e.name: e for e in self.entries}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise SchemaError(f"unknown feature names: {missing}")
        return FeatureCatalog(
            entries=tuple(by_name[n] for n in names),
            beam_width=self.beam_width,
            version=self.version,
        )


_DEGREE_NOTE = "degree statistic; definition fixed by this library"
_SEARCH_NOTE = (
    "search-tree probe; semantics reconstructed by this library, "
    "no external standard"
)
_STATIC_NOTE = "closed-form ground count of encoding {enc} (claspre-style)"


def default_catalog(
    beam_width: int = DEFAULT_BEAM_WIDTH, static_encoding: int = 1
) -> FeatureCatalog:
    """The default 39-entry catalog: 25 graph + 14 static features.

    The source feature list names 41 columns with two duplicates
    (avg_depth_bfs and avg_depth_beam each appear twice); duplicates add
    no information, so the catalog stores the 39 unique names and records
    the discrepancy here.
    """
    entries = []
    for name in GRAPH_FEATURES:
        search = name.endswith(("bfs", "beam")) or name.startswith(
            ("dfs", "depth", "sum_of")
        )
        entries.append(
            CatalogEntry(
                name=name,
                group="graph",
                provenance=_SEARCH_NOTE if search else _DEGREE_NOTE,
                reconstructed=search,
                undefined_allowed=name in _UNDEFINED_ALLOWED,
            )
        )
    suffix = f"_hc{static_encoding}"
    for base in STATIC_FEATURE_BASES:
        entries.append(
            CatalogEntry(
                name=base + suffix,
                group=f"static_hc{static_encoding}",
                provenance=_STATIC_NOTE.format(enc=static_encoding),
                reconstructed=True,
            )
        )
    return FeatureCatalog(entries=tuple(entries), beam_width=beam_width)


# ---------------------------------------------------------------------------
# Feature computation
# ---------------------------------------------------------------------------


def _ratio(count: int, total: int) -> float:
    return count / total if total else 0.0


def graph_features(
    graph: DirectedGraph, beam_width: int = DEFAULT_BEAM_WIDTH
) -> dict[str, float]:
    """The 25 graph features, in catalog order."""
    n = graph.node_count
    a = graph.arc_count
    outs = [graph.out_degree(v) for v in range(1, n + 1)]
    ins = [graph.in_degree(v) for v in range(1, n + 1)]
    totals = [o + i for o, i in zip(outs, ins)]
    bi = sum(1 for x, y in graph.arcs if (y, x) in graph.arc_set)
    bfs = bfs_depths(graph)
    beam = beam_depths(graph, beam_width)
    prof = dfs_profile(graph, 1)

    def none_as_minus1(value: Optional[int]) -> float:
        return -1.0 if value is None else float(value)

    return {
        "ratio_node_edge": n / a if a else -1.0,
        "ratio_bi_edge": bi / a if a else -1.0,
        "avg_out_degree": a / n,
        "avg_in_degree": a / n,
        "ratio_of_odd_out_degree": _ratio(sum(d % 2 for d in outs), n),
        "ratio_of_even_out_degree": _ratio(sum(1 - d % 2 for d in outs), n),
        "ratio_of_odd_in_degree": _ratio(sum(d % 2 for d in ins), n),
        "ratio_of_even_in_degree": _ratio(sum(1 - d % 2 for d in ins), n),
        "ratio_of_odd_degree": _ratio(sum(d % 2 for d in totals), n),
        "ratio_of_even_degree": _ratio(sum(1 - d % 2 for d in totals), n),
        "ratio_out_degree_less_than_3": _ratio(sum(1 for d in outs if d < 3), n),
        "ratio_in_degree_less_than_3": _ratio(sum(1 for d in ins if d < 3), n),
        "ratio_degree_less_than_3": _ratio(sum(1 for d in totals if d < 3), n),
        "min_depth_bfs": float(min(bfs)),
        "max_depth_bfs": float(max(bfs)),
        "avg_depth_bfs": sum(bfs) / n,
        "dfs_1st_back_depth": none_as_minus1(prof.first_back_depth),
        "sum_of_choices_along_path": float(prof.sum_choices_along_path),
        "depth_avg_dfs_backjump": prof.avg_backjump_depth,
        "depth_back_to_root": none_as_minus1(prof.back_to_root_depth),
        "depth_back_to_any": none_as_minus1(prof.back_to_any_depth),
        "depth_one_path": float(prof.one_path_len),
        "min_depth_beam": float(min(beam)),
        "max_depth_beam": float(max(beam)),
        "avg_depth_beam": sum(beam) / n,
    }


def encoding_static_features(
    graph: DirectedGraph, enc: int = 1
) -> dict[str, float]:
    """The 14 static features derived from `static_counts(enc, graph)`."""
    counts = static_counts(enc, graph)
    rules = counts.rules
    cons = counts.constraints
    suffix = f"_hc{enc}"
    values = {
        "Frac_Unary_Rules": _ratio(counts.unary_rules, rules),
        "Frac_Binary_Rules": _ratio(counts.binary_rules, rules),
        "Frac_Ternary_Rules": _ratio(counts.ternary_rules, rules),
        "Frac_Normal_Rules": _ratio(counts.normal_rules, rules),
        "Frac_Cardinality_Rules": _ratio(counts.cardinality_rules, rules),
        "Frac_Choice_Rules": _ratio(counts.choice_rules, rules),
        "Constraints": float(cons),
        "Rules": float(rules),
        "Problem_Variables": float(counts.problem_variables),
        "Assigned_Problem_Variables": float(counts.assigned_problem_variables),
        "Free_Problem_Variables": float(counts.free_problem_variables),
        "Frac_Binary_Constraints": _ratio(counts.binary_constraints, cons),
        "Frac_Ternary_Constraints": _ratio(counts.ternary_constraints, cons),
        "Frac_Other_Constraints": _ratio(counts.other_constraints, cons),
    }
    return {base + suffix: values[base] for base in STATIC_FEATURE_BASES}


def feature_vector(graph: DirectedGraph, catalog: FeatureCatalog) -> list[float]:
    """Feature values for one instance in catalog order."""
    pool = dict(graph_features(graph, catalog.beam_width))
    for group in catalog.groups:
        if group.startswith("static_hc"):
            pool.update(encoding_static_features(graph, int(group[len("static_hc"):])))
    missing = [n for n in catalog.names if n not in pool]
    if missing:
        raise SchemaError(f"catalog names not computable: {missing}")
    values = [pool[name] for name in catalog.names]
    bad = [n for n, v in zip(catalog.names, values) if not math.isfinite(v)]
    if bad:
        raise ValidationError(f"non-finite feature values for {bad}")
    return values


# ---------------------------------------------------------------------------
# Feature tables
# ---------------------------------------------------------------------------


@dataclass
class FeatureTable:
    """One row of feature values per instance, plus extraction wall times."""

    catalog: FeatureCatalog
    instance_ids: tuple[str, ...]
    values: np.ndarray  # shape (len(instance_ids), len(catalog.names))
    extract_seconds: dict[str, float] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)

    def row(self, instance_id: str) -> dict[str, float]:
        idx = self.instance_ids.index(instance_id)
        return dict(zip(self.catalog.names, (float(v) for v in self.values[idx])))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FeatureTable)
            and self.catalog == other.catalog
            and self.instance_ids == other.instance_ids
            and np.array_equal(self.values, other.values)
        )


def build_feature_table(
    instances: Iterable[tuple[str, DirectedGraph]],
    catalog: Optional[FeatureCatalog] = None,
) -> FeatureTable:
    """Assemble the feature table; per-instance failures become row errors."""
    catalog = catalog or default_catalog()
    ids: list[str] = []
    rows: list[list[float]] = []
    times: dict[str, float] = {}
    errors: dict[str, str] = {}
    for instance_id, graph in instances:
        start = time.perf_counter()
        try:
            row = feature_vector(graph, catalog)
        except Exception as exc:  # record and continue with the rest
            errors[instance_id] = str(exc)
            continue
        times[instance_id] = time.perf_counter() - start
        ids.append(instance_id)
        rows.append(row)
    values = np.array(rows, dtype=float) if rows else np.empty((0, len(catalog.names)))
    return FeatureTable(
        catalog=catalog,
        instance_ids=tuple(ids),
        values=values,
        extract_seconds=times,
        errors=errors,
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _format_value(value: float) -> str:
    return repr(float(value))


def _catalog_path(path: Path) -> Path:
    return path.with_suffix(".catalog.json")


def _times_path(path: Path) -> Path:
    return path.with_suffix(".times.csv")


def save_features(table: FeatureTable, path: Path) -> None:
    """Write features.csv plus the catalog and extraction-time sidecars."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("instance_id",) + table.catalog.names)
        for i, instance_id in enumerate(table.instance_ids):
            writer.writerow(
                [instance_id] + [_format_value(v) for v in table.values[i]]
            )
    catalog_doc = {
        "version": table.catalog.version,
        "beam_width": table.catalog.beam_width,
        "entries": [
            {
                "name": e.name,
                "group": e.group,
                "provenance": e.provenance,
                "reconstructed": e.reconstructed,
                "undefined_allowed": e.undefined_allowed,
            }
            for e in table.catalog.entries
        ],
    }
    _catalog_path(path).write_text(json.dumps(catalog_doc, indent=2) + "\n")
    with _times_path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("instance_id", "extract_seconds"))
        for instance_id in table.instance_ids:
            writer.writerow(
                [instance_id, _format_value(table.extract_seconds.get(instance_id, 0.0))]
            )


def load_catalog(path: Path) -> FeatureCatalog:
    doc = json.loads(Path(path).read_text())
    return FeatureCatalog(
        entries=tuple(
            CatalogEntry(
                name=e["name"],
                group=e["group"],
                provenance=e["provenance"],
                reconstructed=e.get("reconstructed", False),
                undefined_allowed=e.get("undefined_allowed", False),
            )
            for e in doc["entries"]
        ),
        beam_width=doc["beam_width"],
        version=doc["version"],
    )


def load_features(
    path: Path, catalog: Optional[FeatureCatalog] = None
) -> FeatureTable:
    """Load features.csv; the header must match the catalog order exactly."""
    path = Path(path)
    if catalog is None:
        sidecar = _catalog_path(path)
        if not sidecar.exists():
            raise SchemaError(f"no catalog given and no sidecar at {sidecar}")
        catalog = load_catalog(sidecar)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        expected = ("instance_id",) + catalog.names
        if header != expected:
            raise SchemaError(
                f"feature header mismatch; expected {list(expected)[:4]}..., "
                f"got {list(header)[:4]}..."
            )
        ids = []
        rows = []
        for row in reader:
            values = [float(v) for v in row[1:]]
            if any(not math.isfinite(v) for v in values):
                raise DataError(f"non-finite feature value in row {row[0]}")
            ids.append(row[0])
            rows.append(values)
    values = np.array(rows, dtype=float) if rows else np.empty((0, len(catalog.names)))
    table = FeatureTable(catalog=catalog, instance_ids=tuple(ids), values=values)
    times_file = _times_path(path)
    if times_file.exists():
        with times_file.open(newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                table.extract_seconds[row["instance_id"]] = float(
                    row["extract_seconds"]
                )
    return table
