"""The six equivalent ASP encodings of the hamiltonian cycle problem.

Instances supply `node/1` and `link/2` facts; each encoding selects a set of
`hcyc/2` arcs and enforces exactly-one out/in degree plus reachability.  The
registry crosses three edge-selection styles with two reachability styles:

selection styles
  paired-exact-choice          two `{...}=1` choice rules, one per node side
  open-choice-with-constraints open per-node choice plus cardinality-bounded
                               integrity constraints on out- and in-degree
  aggregate-count-constraints  per-link choice plus `#count` constraints

reach styles
  pairwise-reach  reach(X,Y) closure over selected arcs, constrained for
                  every ordered node pair
  root-reach      reach(Y) from node 1 via a non-trivial selected path,
                  constrained for every node

Encoding 1 (paired-exact-choice x pairwise-reach) is the canonical
formulation; the other five are rewrite variants registered by this package.
`static_counts` gives closed-form sizes of the ground instantiation used as
encoding-based instance features.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .graph import DirectedGraph, emit_facts


@dataclass(frozen=True)
class StaticCounts:
    """Closed-form sizes of an encoding's ground instantiation.

    Conventions (fixed so features are consistent across encodings):
    - facts (node/link atoms) are not rules; they count as assigned
      problem variables;
    - rule body arity counts non-fact body literals, mirroring a grounder
      that simplifies true facts away, so ground choice rules have arity 0;
    - constraints keep every body literal, facts included;
    - aggregate-bearing constraints have no classical arity and land in
      other_constraints;
    - rules = normal + choice + cardinality; constraints are separate.
    """

    rules: int
    constraints: int
    choice_rules: int
    normal_rules: int
    cardinality_rules: int
    unary_rules: int
    binary_rules: int
    ternary_rules: int
    binary_constraints: int
    ternary_constraints: int
    other_constraints: int
    problem_variables: int
    assigned_problem_variables: int
    free_problem_variables: int

    def __post_init__(self):
        if self.normal_rules + self.choice_rules + self.cardinality_rules != self.rules:
            raise ValidationError("rule class counts do not sum to rules")
        if (
            self.binary_constraints + self.ternary_constraints + self.other_constraints
            != self.constraints
        ):
            raise ValidationError("constraint buckets do not sum to constraints")
        if (
            self.assigned_problem_variables + self.free_problem_variables
            != self.problem_variables
        ):
            raise ValidationError("assigned + free != problem variables")


PAIRED_EXACT = "paired-exact-choice"
OPEN_CHOICE = "open-choice-with-constraints"
AGGREGATE_COUNT = "aggregate-count-constraints"
PAIRWISE_REACH = "pairwise-reach"
ROOT_REACH = "root-reach"

SELECTION_STYLES = (PAIRED_EXACT, OPEN_CHOICE, AGGREGATE_COUNT)
REACH_STYLES = (PAIRWISE_REACH, ROOT_REACH)

_SELECTION_TEMPLATES = {
    PAIRED_EXACT: (
        "{ hcyc(X,Y) : link(X,Y) }=1 :- node(X).\n"
        "{ hcyc(X,Y) : link(X,Y) }=1 :- node(Y).\n"
    ),
    OPEN_CHOICE: (
        "{ hcyc(X,Y) : link(X,Y) } :- node(X).\n"
        ":- node(X), not 1 { hcyc(X,Y) : link(X,Y) } 1.\n"
        ":- node(Y), not 1 { hcyc(X,Y) : link(X,Y) } 1.\n"
    ),
    AGGREGATE_COUNT: (
        "{ hcyc(X,Y) } :- link(X,Y).\n"
        ":- node(X), #count{ Y : hcyc(X,Y) } != 1.\n"
        ":- node(Y), #count{ X : hcyc(X,Y) } != 1.\n"
    ),
}

_REACH_TEMPLATES = {
    PAIRWISE_REACH: (
        "reach(X,Y) :- hcyc(X,Y).\n"
        "reach(X,Z) :- reach(X,Y),hcyc(Y,Z).\n"
        ":- not reach(X,Y),node(X),node(Y).\n"
    ),
    ROOT_REACH: (
        "reach(Y) :- hcyc(1,Y).\n"
        "reach(Y) :- reach(X), hcyc(X,Y).\n"
        ":- node(Y), not reach(Y).\n"
    ),
}


@dataclass(frozen=True)
class EncodingSpec:
    """One registered encoding: its styles, rule text, and provenance note."""

    id: int
    selection_style: str
    reach_style: str
    program_template: str
    provenance: str


def _build_registry() -> tuple[EncodingSpec, ...]:
    specs = []
    next_id = 1
    for selection in SELECTION_STYLES:
        for reach in REACH_STYLES:
            template = _SELECTION_TEMPLATES[selection] + _REACH_TEMPLATES[reach]
            if next_id == 1:
                note = "canonical formulation"
            else:
                note = (
                    "rewrite variant registered by this package "
                    f"({selection} x {reach})"
                )
            specs.append(
                EncodingSpec(
                    id=next_id,
                    selection_style=selection,
                    reach_style=reach,
                    program_template=template,
                    provenance=note,
                )
            )
            next_id += 1
    return tuple(specs)


ENCODINGS: tuple[EncodingSpec, ...] = _build_registry()
ENCODING_IDS: tuple[int, ...] = tuple(spec.id for spec in ENCODINGS)


def list_encodings() -> tuple[EncodingSpec, ...]:
    """The fixed registry of the six encodings, ids 1..6."""
    return ENCODINGS


def get_encoding(enc: int) -> EncodingSpec:
    if not 1 <= enc <= len(ENCODINGS):
        raise ValidationError(f"unknown encoding id {enc}; expected 1..{len(ENCODINGS)}")
    return ENCODINGS[enc - 1]


def render_program(enc: int, graph: DirectedGraph) -> str:
    """Instance facts followed by the encoding rules; byte-stable."""
    spec = get_encoding(enc)
    return emit_facts(graph) + "\n" + spec.program_template


def static_counts(enc: int, graph: DirectedGraph) -> StaticCounts:
    """Closed-form ground-instantiation counts of `enc` over `graph`."""
    spec = get_encoding(enc)
    n = graph.node_count
    a = graph.arc_count
    d1 = graph.out_degree(1)

    choice = 0
    unary = binary = ternary = 0
    binary_con = ternary_con = other_con = 0

    if spec.selection_style == PAIRED_EXACT:
        choice += 2 * n
    elif spec.selection_style == OPEN_CHOICE:
        choice += n
        other_con += 2 * n  # cardinality-bounded degree constraints
    else:  # AGGREGATE_COUNT
        choice += a
        other_con += 2 * n  # #count degree constraints

    if spec.reach_style == PAIRWISE_REACH:
        unary += a        # reach(X,Y) :- hcyc(X,Y), one per arc
        binary += n * a   # transitive step, node x arc
        ternary_con += n * n
        reach_atoms = n * n
    else:  # ROOT_REACH
        unary += d1       # reach(Y) :- hcyc(1,Y), one per out-arc of node 1
        binary += a       # reach(Y) :- reach(X), hcyc(X,Y), one per arc
        binary_con += n   # :- node(Y), not reach(Y)
        reach_atoms = n

    normal = unary + binary + ternary
    facts = n + a
    atoms = facts + a + reach_atoms  # facts + hcyc candidates + reach candidates
    return StaticCounts(
        rules=normal + choice,
        constraints=binary_con + ternary_con + other_con,
        choice_rules=choice,
        normal_rules=normal,
        cardinality_rules=0,
        unary_rules=unary,
        binary_rules=binary,
        ternary_rules=ternary,
        binary_constraints=binary_con,
        ternary_constraints=ternary_con,
        other_constraints=other_con,
        problem_variables=atoms,
        assigned_problem_variables=facts,
        free_problem_variables=atoms - facts,
    )
