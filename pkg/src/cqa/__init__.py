"""Consistent query answering over relational instances under denial
constraints: conflict hypergraphs, exact independent-set and hitting-set
solvers, tuple- and attribute-based repair semantics, and a static plus
incremental answering path."""

from .answer import (
    AnswerSet,
    Conjunctive,
    GroundAtomic,
    Literal,
    LiteralConjunction,
    Query,
    certain_answers,
    certain_ground_fast,
    certain_literal_conjunction,
    evaluate,
    parse_query,
    possible_answers,
)
from .denial import (
    Atom,
    Comparison,
    Const,
    ConstraintSet,
    DenialConstraint,
    Variable,
    is_consistent,
    parse_constraint,
    parse_constraint_file,
    violating_sets,
)
from .errors import (
    BaseInconsistent,
    BudgetExceeded,
    ChangeTargetMissing,
    CqaError,
    DeleteTargetMissing,
    ForcedOut,
    FormatError,
    NoRepair,
    SchemaMismatch,
    UnsafeQuery,
    UnsafeVariable,
    UnsupportedQueryClass,
    UnsupportedUpdateSequence,
)
from .gadgets import (
    Block,
    SimpleGraph,
    block,
    graph_to_database,
    rhombus_extension,
    twin_extension,
)
from .hypergraph import ConflictHypergraph, build_conflict_hypergraph
from .incremental import (
    IncrementalProblem,
    TouchedRegion,
    incremental_a_certain,
    incremental_c_distance,
    incremental_certain,
    incremental_possible,
    incremental_s_certain,
    incremental_s_possible,
    touched_region,
)
from .model import (
    Change,
    Constant,
    DbTuple,
    Delete,
    Insert,
    Instance,
    RelationDecl,
    Schema,
    UpdateSequence,
    apply_update,
    format_instance,
    minimize_update,
    parse_instance_text,
    parse_update_script,
)
from .repairs import (
    ARepair,
    BoundedA,
    CellChange,
    TupleRepair,
    a_repairs_bounded,
    apply_changes,
    c_repairs,
    quadratic_weight,
    s_repairs,
    unit_weight,
    wc_repairs,
)
from .solve import (
    AlphaResult,
    HittingSetResult,
    SolveBudget,
    SolveStats,
    WeightedAlphaResult,
    alpha,
    alpha_weighted,
    enumerate_maximal_is,
    enumerate_maximum_is,
    hitting_set_at_most,
    in_all_maximum_is,
    in_some_maximum_is,
    min_hitting_set,
)

__version__ = "0.1.0"
