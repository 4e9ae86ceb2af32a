from random import Random

import numpy as np
import pytest

from encsel.errors import DataError, SchemaError
from encsel.features import (
    GRAPH_FEATURES,
    FeatureCatalog,
    build_feature_table,
    default_catalog,
    encoding_static_features,
    feature_vector,
    graph_features,
    load_features,
    save_features,
)
from encsel.generators import gen_random_digraph
from encsel.graph import DirectedGraph, bfs_depths
from helpers import random_digraph

# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def test_default_catalog_has_39_unique_entries():
    catalog = default_catalog()
    assert len(catalog.names) == 39
    assert len(set(catalog.names)) == 39
    assert len(catalog.group_names("graph")) == 25
    assert len(catalog.group_names("static_hc1")) == 14


def test_catalog_subset_projection():
    catalog = default_catalog()
    names = ("avg_out_degree", "Rules_hc1", "ratio_node_edge")
    sub = catalog.subset(names)
    assert sub.names == names


def test_catalog_subset_rejects_unknown_names():
    with pytest.raises(SchemaError):
        default_catalog().subset(("no_such_feature",))


# ---------------------------------------------------------------------------
# graph features
# ---------------------------------------------------------------------------


def test_graph_features_g4_goldens(g4):
    f = graph_features(g4)
    assert f["ratio_node_edge"] == pytest.approx(0.6667, abs=1e-4)
    assert f["avg_out_degree"] == 1.5
    assert f["avg_in_degree"] == 1.5
    # paired arcs: (1,2)/(2,1) and (3,4)/(4,3)
    assert f["ratio_bi_edge"] == pytest.approx(0.6667, abs=1e-4)
    assert f["min_depth_bfs"] == 2.0
    assert f["max_depth_bfs"] == 3.0
    assert f["avg_depth_bfs"] == pytest.approx(2.5)
    assert f["dfs_1st_back_depth"] == 1.0
    assert f["depth_back_to_root"] == 1.0
    assert f["depth_back_to_any"] == 1.0
    assert f["depth_avg_dfs_backjump"] == pytest.approx(1.0)
    assert f["sum_of_choices_along_path"] == 2.0
    assert f["depth_one_path"] == 0.0


def test_graph_features_single_node_degenerate():
    f = graph_features(DirectedGraph(1, ()))
    assert f["ratio_node_edge"] == -1.0
    assert f["ratio_bi_edge"] == -1.0
    assert f["ratio_of_odd_out_degree"] == 0.0
    assert f["ratio_of_even_out_degree"] == 1.0
    assert f["ratio_of_odd_degree"] == 0.0
    assert f["ratio_of_even_degree"] == 1.0
    assert f["dfs_1st_back_depth"] == -1.0  # no back edge to report


def test_complete_digraph_fully_bidirectional():
    g = gen_random_digraph(4, 12, seed=0)
    assert graph_features(g)["ratio_bi_edge"] == 1.0


def test_degree_ratio_pairs_sum_to_one():
    rng = Random(17)
    for _ in range(30):
        g = random_digraph(rng.randint(1, 9), rng.uniform(0.05, 0.9), rng)
        f = graph_features(g)
        for kind in ("out_degree", "in_degree", "degree"):
            total = f[f"ratio_of_odd_{kind}"] + f[f"ratio_of_even_{kind}"]
            assert total == pytest.approx(1.0)


def test_degree_less_than_3_is_strict():
    # star out of node 1 with out-degree exactly 3
    g = DirectedGraph(4, ((1, 2), (1, 3), (1, 4)))
    f = graph_features(g)
    assert f["ratio_out_degree_less_than_3"] == pytest.approx(3 / 4)


def test_beam_aggregates_match_bfs_when_wide():
    rng = Random(3)
    for _ in range(20):
        g = random_digraph(rng.randint(1, 8), 0.4, rng)
        f = graph_features(g, beam_width=g.node_count)
        depths = bfs_depths(g)
        assert f["min_depth_beam"] == float(min(depths))
        assert f["max_depth_beam"] == float(max(depths))
        assert f["avg_depth_beam"] == pytest.approx(sum(depths) / g.node_count)
        assert f["min_depth_beam"] == f["min_depth_bfs"]


def test_all_values_finite_on_random_graphs():
    rng = Random(5)
    catalog = default_catalog()
    for _ in range(25):
        g = random_digraph(rng.randint(1, 9), rng.uniform(0.0, 0.9), rng)
        values = feature_vector(g, catalog)
        assert all(np.isfinite(values))


# ---------------------------------------------------------------------------
# encoding-static features
# ---------------------------------------------------------------------------


def test_static_features_g4_goldens(g4):
    f = encoding_static_features(g4, 1)
    assert f["Rules_hc1"] == 38.0
    assert f["Constraints_hc1"] == 16.0
    assert f["Problem_Variables_hc1"] == 32.0
    assert f["Frac_Choice_Rules_hc1"] == pytest.approx(8 / 38, abs=1e-4)
    assert f["Frac_Ternary_Constraints_hc1"] == 1.0


def test_static_feature_class_fractions_partition(g4):
    f = encoding_static_features(g4, 1)
    total = (
        f["Frac_Normal_Rules_hc1"]
        + f["Frac_Cardinality_Rules_hc1"]
        + f["Frac_Choice_Rules_hc1"]
    )
    assert total == pytest.approx(1.0)
    constraints = (
        f["Frac_Binary_Constraints_hc1"]
        + f["Frac_Ternary_Constraints_hc1"]
        + f["Frac_Other_Constraints_hc1"]
    )
    assert constraints == pytest.approx(1.0)


def test_static_features_single_node():
    f = encoding_static_features(DirectedGraph(1, ()), 1)
    assert f["Problem_Variables_hc1"] == 2.0


def test_static_features_other_encoding_suffix(g4):
    f = encoding_static_features(g4, 3)
    assert "Rules_hc3" in f
    assert len(f) == 14


# ---------------------------------------------------------------------------
# table assembly and persistence
# ---------------------------------------------------------------------------


def _instances(count=3):
    return [
        (f"inst_{i}", gen_random_digraph(6, 12 + i, seed=i)) for i in range(count)
    ]


def test_table_shape_and_determinism():
    table_a = build_feature_table(_instances())
    table_b = build_feature_table(_instances())
    assert table_a.values.shape == (3, 39)
    assert table_a == table_b
    assert all(t >= 0 for t in table_a.extract_seconds.values())


def test_table_projection():
    catalog = default_catalog().subset(
        ("ratio_node_edge", "avg_out_degree", "Rules_hc1", "Constraints_hc1",
         "avg_depth_bfs")
    )
    table = build_feature_table(_instances(), catalog)
    assert table.values.shape == (3, 5)


def test_table_roundtrip(tmp_path):
    table = build_feature_table(_instances())
    path = tmp_path / "features.csv"
    save_features(table, path)
    loaded = load_features(path)
    assert loaded == table
    assert loaded.extract_seconds.keys() == table.extract_seconds.keys()


def test_table_roundtrip_with_explicit_catalog(tmp_path):
    table = build_feature_table(_instances())
    path = tmp_path / "features.csv"
    save_features(table, path)
    loaded = load_features(path, catalog=default_catalog())
    assert loaded == table


def test_load_rejects_reordered_columns(tmp_path):
    table = build_feature_table(_instances())
    path = tmp_path / "features.csv"
    save_features(table, path)
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    header[1], header[2] = header[2], header[1]
    path.write_text("\n".join([",".join(header)] + lines[1:]) + "\n")
    with pytest.raises(SchemaError, match="mismatch"):
        load_features(path, catalog=default_catalog())


def test_load_rejects_nan_token(tmp_path):
    table = build_feature_table(_instances(1))
    path = tmp_path / "features.csv"
    save_features(table, path)
    lines = path.read_text().splitlines()
    cells = lines[1].split(",")
    cells[3] = "nan"
    path.write_text("\n".join([lines[0], ",".join(cells)]) + "\n")
    with pytest.raises(DataError, match="non-finite"):
        load_features(path, catalog=default_catalog())


def test_row_lookup():
    table = build_feature_table(_instances())
    row = table.row("inst_1")
    assert set(row) == set(table.catalog.names)
    assert row["avg_out_degree"] == 13 / 6


def test_graph_feature_names_cover_catalog():
    assert set(GRAPH_FEATURES) == set(default_catalog().group_names("graph"))
