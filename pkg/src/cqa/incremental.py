"""Incremental consistent query answering.

Given a consistent base instance, a short update sequence, and a query,
answer over the updated instance without recomputing the full conflict
structure: because the base was consistent, every violating set of the
updated instance involves at least one inserted or changed tuple, so only
constraints pinned to those tuples need evaluating. Certainty tests then
reduce to minimum-hitting-set size comparisons over that touched region
(binary search on the depth-bounded solver), and membership for untouched
tuples short-circuits to presence in the updated instance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import solve
from .answer import (
    AnswerSet,
    GroundAtomic,
    LiteralConjunction,
    Query,
    certain_answers,
    evaluate,
    possible_answers,
)
from .denial import Const, ConstraintSet, DenialConstraint, Variable, is_consistent, minimal_sets
from .errors import (
    BaseInconsistent,
    BudgetExceeded,
    NoRepair,
    UnsupportedQueryClass,
    UnsupportedUpdateSequence,
)
from .hypergraph import ConflictHypergraph, hypergraph_of
from .model import (
    Constant,
    DbTuple,
    Instance,
    UpdateSequence,
    apply_update,
    minimize_update,
)
from .repairs import BoundedA, Semantics, a_repairs_bounded, apply_changes

_UNCAPPED = solve.SolveBudget(max_vertices=None)


@dataclass(frozen=True)
class IncrementalProblem:
    base: Instance
    seq: UpdateSequence
    ics: ConstraintSet
    query: Query
    semantics: Semantics = "C"
    k_max: int | None = None  # hitting-set depth override; default derived from seq
    max_update_ratio: float | None = None  # optional cap: require m < ratio * |base|

    def __post_init__(self):
        if self.max_update_ratio is not None:
            if len(self.seq) >= self.max_update_ratio * len(self.base):
                raise UnsupportedUpdateSequence(
                    f"update sequence of length {len(self.seq)} exceeds "
                    f"{self.max_update_ratio} * |base|")


@dataclass(frozen=True)
class TouchedRegion:
    """The updated instance plus all the conflict structure it can have:
    the inserted/changed tuples and every hyperedge meeting them (for a
    consistent base, that is every hyperedge of the updated instance)."""

    after: Instance
    updated: frozenset[DbTuple]
    hypergraph: ConflictHypergraph

    @property
    def local_edges(self) -> tuple[frozenset[DbTuple], ...]:
        h = self.hypergraph
        return tuple(h.tuples_of(e) for e in h.edges)


def touched_region(base: Instance, seq: UpdateSequence, ics: ConstraintSet) -> TouchedRegion:
    """Compute the updated instance and all hyperedges meeting updated
    tuples, by evaluating each constraint with one atom pinned to an
    updated tuple."""
    if not is_consistent(base, ics):
        raise BaseInconsistent("base instance violates the constraints")
    after = apply_update(base, seq)
    updated = frozenset(after.tuples - base.tuples)
    edge_sets: dict[frozenset[DbTuple], set[str]] = {}
    if updated:
        for c in ics:
            for binding in _pinned_assignments(after, c, updated):
                edge_sets.setdefault(frozenset(binding), set()).add(c.id)
    kept = minimal_sets(edge_sets.keys())
    h = hypergraph_of(list(after.tuples), {e: edge_sets[e] for e in kept})
    return TouchedRegion(after, updated, h)


def _pinned_assignments(instance: Instance, c: DenialConstraint,
                        updated: frozenset[DbTuple]) -> Iterator[tuple[DbTuple, ...]]:
    """Satisfying assignments of c with at least one atom bound to an
    updated tuple. One atom position is pinned to range over the updated
    tuples only; iterating the pin position covers every such assignment,
    and atoms before the pin skip updated tuples so each assignment is
    produced for its first pinned position only."""
    n = len(c.atoms)
    updated_by_rel: dict[str, list[DbTuple]] = {}
    for t in updated:
        updated_by_rel.setdefault(t.relation, []).append(t)

    var_intro: dict[str, int] = {}
    for i, atom in enumerate(c.atoms):
        for v in atom.variables():
            var_intro.setdefault(v, i)
    check_at: list[list] = [[] for _ in range(n)]
    for comp in c.comparisons:
        stage = max((var_intro[v] for v in comp.variables()), default=0)
        check_at[stage].append(comp)

    env: dict[str, Constant] = {}
    bound: list[DbTuple] = []

    def value(term):
        return env[term.name] if isinstance(term, Variable) else term.value

    def rec(i: int, pinned_at: int) -> Iterator[tuple[DbTuple, ...]]:
        if i == n:
            yield tuple(bound)
            return
        atom = c.atoms[i]
        if i == pinned_at:
            pool = updated_by_rel.get(atom.relation, ())
        else:
            pool = instance.by_relation(atom.relation)
        for t in pool:
            if i < pinned_at and t in updated:
                continue
            newly = []
            ok = True
            for term, arg in zip(atom.terms, t.args):
                if isinstance(term, Const):
                    if term.value != arg:
                        ok = False
                        break
                elif term.name in env:
                    if env[term.name] != arg:
                        ok = False
                        break
                else:
                    env[term.name] = arg
                    newly.append(term.name)
            if ok:
                for comp in check_at[i]:
                    if not comp.holds(value(comp.left), value(comp.right)):
                        ok = False
                        break
            if ok:
                bound.append(t)
                yield from rec(i + 1, pinned_at)
                bound.pop()
            for v in newly:
                del env[v]

    for pinned_at in range(n):
        yield from rec(0, pinned_at)


def _hitting_bound(seq: UpdateSequence) -> int:
    """Depth cap for the bounded hitting-set search: m for insert-only
    sequences, m times the maximum arity otherwise (changes may shift
    conflicts across attribute positions)."""
    minimized = minimize_update(seq)
    m = len(minimized)
    if m == 0:
        return 0
    if minimized.only_inserts():
        return m
    return m * max(op.target.arity for op in minimized.ops)


def _tau(edges: Iterable[frozenset[int]], k_max: int) -> int:
    """Minimum hitting-set size by binary search on the depth-bounded
    decision solver."""
    edge_list = list(edges)
    if not edge_list:
        return 0
    if not solve.hitting_set_at_most(edge_list, k_max):
        raise BudgetExceeded(f"no hitting set within the update-derived bound {k_max}")
    lo, hi = 1, k_max
    while lo < hi:
        mid = (lo + hi) // 2
        if solve.hitting_set_at_most(edge_list, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def incremental_c_distance(base: Instance, seq: UpdateSequence, ics: ConstraintSet,
                           k_max: int | None = None) -> int:
    """Minimum number of deletions restoring consistency of the updated
    instance."""
    region = touched_region(base, seq, ics)
    return _tau(region.hypergraph.edges, k_max if k_max is not None else _hitting_bound(seq))


def _involved_ids(region: TouchedRegion) -> frozenset[int]:
    return frozenset(v for e in region.hypergraph.edges for v in e)


def _certain_ground_c(region: TouchedRegion, k_max: int, t: DbTuple) -> bool:
    if t not in region.after:
        return False
    h = region.hypergraph
    vid = h.id_of(t)
    if vid not in _involved_ids(region):
        return True
    edges_minus = tuple(e for e in h.edges if vid not in e)
    return _tau(edges_minus, k_max) == _tau(h.edges, k_max)


def _possible_ground_c(region: TouchedRegion, t: DbTuple) -> bool:
    if t not in region.after:
        return False
    h = region.hypergraph
    vid = h.id_of(t)
    if vid not in _involved_ids(region):
        return True
    return solve.in_some_maximum_is(h, vid, _UNCAPPED)


def _static_fallback(problem: IncrementalProblem, mode: str) -> AnswerSet:
    warnings.warn("query class not covered by the incremental fast path; "
                  "answering statically over the updated instance",
                  stacklevel=3)
    after = apply_update(problem.base, problem.seq)
    fn = certain_answers if mode == "certain" else possible_answers
    return fn(after, problem.ics, problem.query, problem.semantics)


def incremental_certain(problem: IncrementalProblem) -> AnswerSet:
    """Certain answers under the C semantics via hitting-set comparisons on
    the touched region; ground atomic and ground literal-conjunction
    queries only, others fall back to the static path with a warning."""
    if problem.semantics != "C":
        raise UnsupportedQueryClass("incremental_certain covers the C semantics; "
                                    "use the S/A variants for other semantics")
    query = problem.query
    region = touched_region(problem.base, problem.seq, problem.ics)
    k_max = problem.k_max if problem.k_max is not None else _hitting_bound(problem.seq)
    if isinstance(query, GroundAtomic):
        return AnswerSet.of_bool(_certain_ground_c(region, k_max, query.atom))
    if isinstance(query, LiteralConjunction) and query.is_ground():
        for lit in query.literals:
            t = lit.ground_tuple()
            if lit.positive:
                if not _certain_ground_c(region, k_max, t):
                    return AnswerSet.of_bool(False)
            else:
                if _possible_ground_c(region, t):
                    return AnswerSet.of_bool(False)
        return AnswerSet.of_bool(True)
    return _static_fallback(problem, "certain")


def incremental_possible(problem: IncrementalProblem) -> AnswerSet:
    """Possible answers under the C semantics: the membership test becomes
    "in some maximum independent set" via conditioning on the region."""
    if problem.semantics != "C":
        raise UnsupportedQueryClass("incremental_possible covers the C semantics")
    query = problem.query
    region = touched_region(problem.base, problem.seq, problem.ics)
    if isinstance(query, GroundAtomic):
        return AnswerSet.of_bool(_possible_ground_c(region, query.atom))
    if isinstance(query, LiteralConjunction) and query.is_ground():
        # a conjunction may hold in no single repair even when each literal
        # is separately possible, so enumerate the region's maximum sets
        for s in solve.enumerate_maximum_is(region.hypergraph, _UNCAPPED):
            retained = region.hypergraph.tuples_of(s)
            if _ground_conj_holds(query, retained):
                return AnswerSet.of_bool(True)
        return AnswerSet.of_bool(False)
    return _static_fallback(problem, "possible")


def _ground_conj_holds(query: LiteralConjunction, tuples: frozenset[DbTuple]) -> bool:
    for lit in query.literals:
        if lit.positive != (lit.ground_tuple() in tuples):
            return False
    return True


def _s_repair_instances(region: TouchedRegion) -> list[Instance]:
    out = []
    for s in solve.enumerate_maximal_is(region.hypergraph, _UNCAPPED):
        out.append(region.after.restrict(region.hypergraph.tuples_of(s)))
    return out


def incremental_s_certain(problem: IncrementalProblem) -> AnswerSet:
    """Certain answers under the S semantics: the repairs of the updated
    instance are the maximal independent sets of the touched region (each
    keeps every untouched, conflict-free tuple), enumerated directly. The
    distance of such a repair may exceed the update length."""
    if problem.semantics != "S":
        raise UnsupportedQueryClass("incremental_s_certain covers the S semantics")
    region = touched_region(problem.base, problem.seq, problem.ics)
    answers = [evaluate(r, problem.query) for r in _s_repair_instances(region)]
    return _combine(answers, combine_all=True)


def incremental_s_possible(problem: IncrementalProblem) -> AnswerSet:
    """Possible-mode companion of incremental_s_certain."""
    if problem.semantics != "S":
        raise UnsupportedQueryClass("incremental_s_possible covers the S semantics")
    region = touched_region(problem.base, problem.seq, problem.ics)
    answers = [evaluate(r, problem.query) for r in _s_repair_instances(region)]
    return _combine(answers, combine_all=False)


def _combine(answers: list[AnswerSet], combine_all: bool) -> AnswerSet:
    first = answers[0]
    if first.is_boolean:
        values = [a.boolean for a in answers]
        return AnswerSet.of_bool(all(values) if combine_all else any(values))
    rows = set(first.rows)
    for a in answers[1:]:
        rows = rows & a.rows if combine_all else rows | a.rows
    return AnswerSet.of_rows(first.free_vars, rows)


def incremental_a_certain(problem: IncrementalProblem,
                          candidates: Iterable[Constant] | None = None) -> AnswerSet:
    """Certain answers under bounded-A semantics for change-only update
    sequences; when no change map restores consistency the boolean answer
    is vacuously yes, flagged."""
    sem = problem.semantics
    if not isinstance(sem, BoundedA):
        raise UnsupportedQueryClass("incremental_a_certain needs BoundedA semantics")
    if candidates is not None:
        sem = BoundedA(frozenset(candidates), sem.weight_fn, sem.aggregation)
    if not problem.seq.only_changes():
        raise UnsupportedUpdateSequence(
            "bounded-A incremental answering supports change-only sequences")
    if not is_consistent(problem.base, problem.ics):
        raise BaseInconsistent("base instance violates the constraints")
    after = apply_update(problem.base, problem.seq)
    try:
        reps = a_repairs_bounded(after, problem.ics, sem)
    except NoRepair:
        base_eval = evaluate(after, problem.query)
        if base_eval.is_boolean:
            return AnswerSet.of_bool(True, vacuous=True)
        return AnswerSet.of_rows(base_eval.free_vars, base_eval.rows, vacuous=True)
    answers = [evaluate(apply_changes(after, r.changes), problem.query) for r in reps]
    return _combine(answers, combine_all=True)
