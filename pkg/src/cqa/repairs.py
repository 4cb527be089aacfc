"""Repair semantics over instances.

Tuple-based repairs under denial constraints are deletion-only: set-minimal
(S), cardinality-minimal (C), and weight-minimal (WC) retained sets, read
off the conflict hypergraph as maximal / maximum / maximum-weight
independent sets. Attribute-based repairs (bounded A) instead rewrite cells
using values from a fixed candidate set, minimizing an additive change
cost. Repair lists are canonically ordered for reproducibility.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from . import solve
from .denial import Const, ConstraintSet, Variable, is_consistent
from .errors import BudgetExceeded, NoRepair
from .hypergraph import build_conflict_hypergraph
from .model import Constant, DbTuple, Instance


@dataclass(frozen=True)
class TupleRepair:
    """A deletion-only repair: the retained and deleted tuples plus the
    distance value (deleted count, or deleted weight under WC)."""

    retained: frozenset[DbTuple]
    deleted: frozenset[DbTuple]
    distance: int | Fraction

    def sort_key(self) -> tuple:
        return tuple(sorted(t.sort_key() for t in self.retained))


@dataclass(frozen=True)
class CellChange:
    target: DbTuple
    attr_index: int
    new_value: Constant

    def __post_init__(self):
        if self.new_value == self.target.args[self.attr_index]:
            raise ValueError(f"change to {self.target} attr {self.attr_index} is not a change")

    def sort_key(self) -> tuple:
        return (self.target.sort_key(), self.attr_index, self.new_value.key())

    def __str__(self) -> str:
        return f"change {self.target} attr {self.attr_index} -> {self.new_value}"


@dataclass(frozen=True)
class ARepair:
    changes: frozenset[CellChange]
    cost: Fraction

    def sort_key(self) -> tuple:
        return tuple(sorted(c.sort_key() for c in self.changes))


WeightFn = Callable[[DbTuple, int, Constant], Fraction]


def unit_weight() -> WeightFn:
    """Each attribute change costs 1."""
    return lambda t, i, v: Fraction(1)


def quadratic_weight(coeffs: Mapping[tuple[str, int], Fraction] | None = None) -> WeightFn:
    """Cost of a change is coeff(relation, attr) * (old - new)^2.

    Both values must be integers; the per-attribute coefficient defaults
    to 1.
    """
    table = {k: Fraction(v) for k, v in (coeffs or {}).items()}

    def fn(t: DbTuple, i: int, v: Constant) -> Fraction:
        old = t.args[i].value
        new = v.value
        if not isinstance(old, int) or not isinstance(new, int):
            raise ValueError(f"quadratic weight needs numeric cells, got {t.args[i]} -> {v}")
        return table.get((t.relation, i), Fraction(1)) * (old - new) ** 2

    return fn


@dataclass(frozen=True)
class BoundedA:
    """Attribute-repair semantics with a finite, database-independent
    candidate value set and an additive change cost."""

    candidates: frozenset[Constant]
    weight_fn: WeightFn = field(default_factory=unit_weight)
    aggregation: str = "sum"

    def __post_init__(self):
        if self.aggregation != "sum":
            raise ValueError(f"unsupported aggregation {self.aggregation!r}")


Semantics = str | BoundedA  # "S" | "C" | "WC" | BoundedA(...)


def s_repairs(instance: Instance, ics: ConstraintSet,
              budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> list[TupleRepair]:
    """Set-inclusion-minimal repairs: maximal independent sets of the
    conflict hypergraph, read back as retained-tuple sets."""
    h = build_conflict_hypergraph(instance, ics)
    out = []
    for s in solve.enumerate_maximal_is(h, budget):
        retained = h.tuples_of(s)
        deleted = instance.tuples - retained
        out.append(TupleRepair(retained, deleted, len(deleted)))
    return sorted(out, key=TupleRepair.sort_key)


def c_repairs(instance: Instance, ics: ConstraintSet,
              budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> list[TupleRepair]:
    """Cardinality repairs: maximum independent sets; every distance equals
    |D| - alpha."""
    h = build_conflict_hypergraph(instance, ics)
    out = []
    for s in solve.enumerate_maximum_is(h, budget):
        retained = h.tuples_of(s)
        deleted = instance.tuples - retained
        out.append(TupleRepair(retained, deleted, len(deleted)))
    return sorted(out, key=TupleRepair.sort_key)


def wc_repairs(instance: Instance, ics: ConstraintSet,
               budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> list[TupleRepair]:
    """Weighted cardinality repairs: maximum-weight independent sets;
    distance is the total deleted weight."""
    h = build_conflict_hypergraph(instance, ics)
    maximal = solve.enumerate_maximal_is(h, budget)
    weights = [(s, instance.total_weight(h.tuples_of(s))) for s in maximal]
    best = max(w for _, w in weights)
    out = []
    for s, w in weights:
        if w != best:
            continue
        retained = h.tuples_of(s)
        deleted = instance.tuples - retained
        out.append(TupleRepair(retained, deleted, instance.total_weight(deleted)))
    return sorted(out, key=TupleRepair.sort_key)


def repairs_for(instance: Instance, ics: ConstraintSet, semantics: Semantics,
                budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> list[TupleRepair]:
    if semantics == "S":
        return s_repairs(instance, ics, budget)
    if semantics == "C":
        return c_repairs(instance, ics, budget)
    if semantics == "WC":
        return wc_repairs(instance, ics, budget)
    raise ValueError(f"not a tuple-based semantics: {semantics!r}")


def mutable_cells(instance: Instance, ics: ConstraintSet) -> list[tuple[DbTuple, int]]:
    """Cells whose value can influence some constraint.

    A position matters when some atom over its relation puts a constant
    there, or a variable that is shared with another position or mentioned
    in a comparison. Changes anywhere else can never affect consistency, so
    they never appear in a cost-minimal change map and are pruned.
    """
    influential: set[tuple[str, int]] = set()
    for c in ics:
        occurrences: dict[str, int] = {}
        comp_vars = {v for comp in c.comparisons for v in comp.variables()}
        for atom in c.atoms:
            for term in atom.terms:
                if isinstance(term, Variable):
                    occurrences[term.name] = occurrences.get(term.name, 0) + 1
        for atom in c.atoms:
            for i, term in enumerate(atom.terms):
                if isinstance(term, Const):
                    influential.add((atom.relation, i))
                elif occurrences[term.name] > 1 or term.name in comp_vars:
                    influential.add((atom.relation, i))
    cells = [(t, i) for t in instance.canonical_tuples()
             for i in range(t.arity) if (t.relation, i) in influential]
    return cells


def apply_changes(instance: Instance, changes: Iterable[CellChange]) -> Instance:
    """Instance with the change map applied; several changes may rewrite
    one tuple, and a rewritten tuple merges with an equal existing one."""
    by_target: dict[DbTuple, list[CellChange]] = {}
    for ch in changes:
        by_target.setdefault(ch.target, []).append(ch)
    result: dict[DbTuple, Fraction] = {}
    for t in instance.canonical_tuples():
        w = instance.weight(t)
        if t in by_target:
            args = list(t.args)
            for ch in by_target[t]:
                args[ch.attr_index] = ch.new_value
            t = DbTuple(t.relation, tuple(args))
        result.setdefault(t, w)
    return Instance(instance.schema, frozenset(result),
                    {t: w for t, w in result.items() if w != 1})


def a_repairs_bounded(instance: Instance, ics: ConstraintSet, sem: BoundedA,
                      max_change_maps: int = 1 << 18) -> list[ARepair]:
    """All cost-minimal consistent change maps over the candidate values.

    Exhaustive search in cost order over maps that assign each mutable cell
    either its old value or a candidate; raises NoRepair when no assignment
    restores consistency.
    """
    if is_consistent(instance, ics):
        return [ARepair(frozenset(), Fraction(0))]
    cells = mutable_cells(instance, ics)
    candidates = sorted(sem.candidates, key=Constant.key)
    options: list[list[tuple[CellChange | None, Fraction]]] = []
    for t, i in cells:
        opts: list[tuple[CellChange | None, Fraction]] = [(None, Fraction(0))]
        for v in candidates:
            if v == t.args[i]:
                continue
            opts.append((CellChange(t, i, v), Fraction(sem.weight_fn(t, i, v))))
        options.append(opts)
    total = 1
    for opts in options:
        total *= len(opts)
        if total > max_change_maps:
            raise BudgetExceeded(
                f"change-map space exceeds {max_change_maps} assignments")

    by_cost: dict[Fraction, list[frozenset[CellChange]]] = {}
    for combo in itertools.product(*options):
        changes = frozenset(ch for ch, _ in combo if ch is not None)
        cost = sum((w for _, w in combo), Fraction(0))
        by_cost.setdefault(cost, []).append(changes)

    for cost in sorted(by_cost):
        repairs = [ARepair(m, cost) for m in by_cost[cost]
                   if is_consistent(apply_changes(instance, m), ics)]
        if repairs:
            return sorted(repairs, key=ARepair.sort_key)
    raise NoRepair("no candidate assignment restores consistency")
