from random import Random

import pytest

from encsel.encodings import (
    AGGREGATE_COUNT,
    ENCODING_IDS,
    OPEN_CHOICE,
    PAIRED_EXACT,
    PAIRWISE_REACH,
    ROOT_REACH,
    StaticCounts,
    get_encoding,
    list_encodings,
    render_program,
    static_counts,
)
from encsel.errors import ValidationError
from encsel.graph import DirectedGraph
from helpers import random_digraph

# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def test_exactly_six_encodings():
    specs = list_encodings()
    assert len(specs) == 6
    assert [s.id for s in specs] == [1, 2, 3, 4, 5, 6]


def test_style_product_covered_once_each():
    pairs = {(s.selection_style, s.reach_style) for s in list_encodings()}
    assert len(pairs) == 6
    assert pairs == {
        (sel, reach)
        for sel in (PAIRED_EXACT, OPEN_CHOICE, AGGREGATE_COUNT)
        for reach in (PAIRWISE_REACH, ROOT_REACH)
    }


def test_encoding1_contains_canonical_rules():
    spec = get_encoding(1)
    assert spec.selection_style == PAIRED_EXACT
    assert spec.reach_style == PAIRWISE_REACH
    assert "{ hcyc(X,Y) : link(X,Y) }=1 :- node(X)." in spec.program_template
    assert "{ hcyc(X,Y) : link(X,Y) }=1 :- node(Y)." in spec.program_template
    assert "reach(X,Y) :- hcyc(X,Y)." in spec.program_template
    assert ":- not reach(X,Y),node(X),node(Y)." in spec.program_template


def test_templates_use_only_expected_predicates():
    import re

    for spec in list_encodings():
        predicates = set(re.findall(r"(?<![\w])([a-z]\w*)\s*\(", spec.program_template))
        assert predicates <= {"node", "link", "hcyc", "reach"}, spec.id


def test_unknown_encoding_id_rejected():
    with pytest.raises(ValidationError, match="unknown encoding id"):
        get_encoding(7)


# ---------------------------------------------------------------------------
# render_program
# ---------------------------------------------------------------------------


def test_render_contains_facts_and_rules(g4):
    text = render_program(1, g4)
    assert "node(1..4)." in text
    assert "link(4,3)." in text
    assert ":- not reach(X,Y),node(X),node(Y)." in text


def test_render_byte_stable(g4):
    assert render_program(3, g4) == render_program(3, g4)


def test_root_reach_renders_anchor(g4):
    for enc in (2, 4, 6):
        assert "hcyc(1,Y)" in render_program(enc, g4)


# ---------------------------------------------------------------------------
# static_counts: frozen values for G4 and the 1-node graph
# ---------------------------------------------------------------------------


def test_static_counts_encoding1_g4(g4):
    c = static_counts(1, g4)
    assert c.choice_rules == 8
    assert c.unary_rules == 6
    assert c.binary_rules == 24
    assert c.constraints == 16
    assert c.ternary_constraints == 16
    assert c.rules == 38
    assert c.problem_variables == 32
    assert c.assigned_problem_variables == 10
    assert c.free_problem_variables == 22


def test_static_counts_encoding1_single_node():
    g = DirectedGraph(1, ())
    c = static_counts(1, g)
    assert c.choice_rules == 2
    assert c.rules == 2
    assert c.constraints == 1
    assert c.problem_variables == 2  # node(1) and reach(1,1)


def test_static_counts_invariants_hold_by_construction(g4):
    for enc in ENCODING_IDS:
        c = static_counts(enc, g4)  # __post_init__ enforces the sums
        assert c.assigned_problem_variables + c.free_problem_variables == (
            c.problem_variables
        )


def test_static_counts_type_rejects_inconsistent_sums():
    with pytest.raises(ValidationError):
        StaticCounts(
            rules=3, constraints=0, choice_rules=1, normal_rules=1,
            cardinality_rules=0, unary_rules=1, binary_rules=0, ternary_rules=0,
            binary_constraints=0, ternary_constraints=0, other_constraints=0,
            problem_variables=2, assigned_problem_variables=1,
            free_problem_variables=1,
        )


# ---------------------------------------------------------------------------
# naive ground instantiator (independent counting route)
# ---------------------------------------------------------------------------


def naive_static_counts(enc: int, graph: DirectedGraph) -> dict[str, int]:
    """Count ground instances by explicit enumeration over variable domains.

    Mirrors a naive grounder: every rule is instantiated by looping each
    variable over the node set and keeping assignments whose node/link
    guards hold; distinct assignments are collected into sets.  Fact
    literals are dropped from rule bodies (a grounder simplifies them away)
    but kept in constraint bodies; aggregates have no classical arity.
    """
    spec = get_encoding(enc)
    nodes = range(1, graph.node_count + 1)
    links = set(graph.arcs)

    choice: set[tuple] = set()
    normal: dict[tuple, int] = {}  # ground rule -> counted body arity
    constraint_arities: list[object] = []

    if spec.selection_style == PAIRED_EXACT:
        for x in nodes:
            choice.add(("out", x))
        for y in nodes:
            choice.add(("in", y))
    elif spec.selection_style == OPEN_CHOICE:
        for x in nodes:
            choice.add(("open", x))
        for x in nodes:
            constraint_arities.append("other")  # cardinality bound, out side
        for y in nodes:
            constraint_arities.append("other")  # cardinality bound, in side
    else:
        for x in nodes:
            for y in nodes:
                if (x, y) in links:
                    choice.add(("link", x, y))
        for x in nodes:
            constraint_arities.append("other")  # #count out-degree
        for y in nodes:
            constraint_arities.append("other")  # #count in-degree

    reach_atoms: set[tuple] = set()
    if spec.reach_style == PAIRWISE_REACH:
        for x in nodes:  # reach(X,Y) :- hcyc(X,Y).
            for y in nodes:
                if (x, y) in links:
                    normal[("base", x, y)] = 1
        for x in nodes:  # reach(X,Z) :- reach(X,Y),hcyc(Y,Z).
            for y in nodes:
                for z in nodes:
                    if (y, z) in links:
                        normal[("step", x, y, z)] = 2
        for x in nodes:  # :- not reach(X,Y),node(X),node(Y).
            for y in nodes:
                constraint_arities.append(3)
        for x in nodes:
            for y in nodes:
                reach_atoms.add(("reach", x, y))
    else:
        for y in nodes:  # reach(Y) :- hcyc(1,Y).
            if (1, y) in links:
                normal[("root", y)] = 1
        for x in nodes:  # reach(Y) :- reach(X), hcyc(X,Y).
            for y in nodes:
                if (x, y) in links:
                    normal[("step", x, y)] = 2
        for y in nodes:  # :- node(Y), not reach(Y).
            constraint_arities.append(2)
        for y in nodes:
            reach_atoms.add(("reach", y))

    node_atoms = {("node", v) for v in nodes}
    link_atoms = {("link", x, y) for x, y in links}
    hcyc_atoms = {("hcyc", x, y) for x, y in links}
    facts = node_atoms | link_atoms
    atoms = facts | hcyc_atoms | reach_atoms

    arities = list(normal.values())
    return {
        "rules": len(choice) + len(normal),
        "constraints": len(constraint_arities),
        "choice_rules": len(choice),
        "normal_rules": len(normal),
        "cardinality_rules": 0,
        "unary_rules": arities.count(1),
        "binary_rules": arities.count(2),
        "ternary_rules": arities.count(3),
        "binary_constraints": constraint_arities.count(2),
        "ternary_constraints": constraint_arities.count(3),
        "other_constraints": constraint_arities.count("other"),
        "problem_variables": len(atoms),
        "assigned_problem_variables": len(facts),
        "free_problem_variables": len(atoms) - len(facts),
    }


FIELDS = (
    "rules", "constraints", "choice_rules", "normal_rules", "cardinality_rules",
    "unary_rules", "binary_rules", "ternary_rules", "binary_constraints",
    "ternary_constraints", "other_constraints", "problem_variables",
    "assigned_problem_variables", "free_problem_variables",
)


def test_static_counts_match_naive_instantiator():
    rng = Random(99)
    for trial in range(50):
        n = rng.randint(1, 6)
        g = random_digraph(n, rng.uniform(0.0, 0.9), rng)
        for enc in ENCODING_IDS:
            closed = static_counts(enc, g)
            naive = naive_static_counts(enc, g)
            for field_name in FIELDS:
                assert getattr(closed, field_name) == naive[field_name], (
                    trial, enc, field_name,
                )
