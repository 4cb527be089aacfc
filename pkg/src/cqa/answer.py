"""Query evaluation and consistent query answering, static path.

Three query classes: a ground atom, a quantifier-free conjunction of
signed literals (free variables allowed), and an existentially quantified
conjunction of positive atoms plus comparisons. Certain answers hold in
every repair of the chosen semantics, possible answers in at least one;
open queries are answered by full repair enumeration, ground ones also
have dedicated hypergraph fast paths that must agree with enumeration.

Query file syntax (one query per file)::

    ? P(x,y,z)
    ? P(a,c,d), not P(a,b,c)
    ? exists z: P(x,y,z), x = a

The variable convention is the constraint one: bare identifiers starting
with ``u``..``z`` or ``_`` are variables, everything else is a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import solve
from .denial import (
    Atom,
    Comparison,
    Const,
    ConstraintSet,
    Term,
    Variable,
    _parse_term,
    _COMPARISON_OPS,
    _ATOM_RE,
)
from .errors import FormatError, NoRepair, UnsafeQuery, UnsupportedQueryClass
from .hypergraph import build_conflict_hypergraph
from .model import Constant, DbTuple, Instance, split_top_level, strip_comment
from .repairs import BoundedA, Semantics, apply_changes, a_repairs_bounded, repairs_for


@dataclass(frozen=True)
class GroundAtomic:
    atom: DbTuple

    @property
    def free_vars(self) -> tuple[str, ...]:
        return ()

    def __str__(self) -> str:
        return f"? {self.atom}"


@dataclass(frozen=True)
class Literal:
    positive: bool
    relation: str
    terms: tuple[Term, ...]

    def variables(self) -> Iterator[str]:
        for t in self.terms:
            if isinstance(t, Variable):
                yield t.name

    def ground_tuple(self) -> DbTuple:
        if any(isinstance(t, Variable) for t in self.terms):
            raise UnsupportedQueryClass("literal is not ground")
        return DbTuple(self.relation, tuple(t.value for t in self.terms))

    def __str__(self) -> str:
        parts = [t.name if isinstance(t, Variable) else str(t.value) for t in self.terms]
        body = f"{self.relation}(" + ",".join(parts) + ")"
        return body if self.positive else "not " + body


@dataclass(frozen=True)
class LiteralConjunction:
    """Quantifier-free conjunction of signed atoms; every variable is free
    and must occur in a positive literal (safety)."""

    literals: tuple[Literal, ...]

    def __post_init__(self):
        positive_vars = {v for lit in self.literals if lit.positive for v in lit.variables()}
        for lit in self.literals:
            for v in lit.variables():
                if v not in positive_vars:
                    raise UnsafeQuery(f"variable {v} occurs only under negation")
        if not self.literals:
            raise UnsafeQuery("empty query")

    @property
    def free_vars(self) -> tuple[str, ...]:
        seen: list[str] = []
        for lit in self.literals:
            for v in lit.variables():
                if v not in seen:
                    seen.append(v)
        return tuple(seen)

    def is_ground(self) -> bool:
        return not self.free_vars

    def __str__(self) -> str:
        return "? " + ", ".join(str(l) for l in self.literals)


@dataclass(frozen=True)
class Conjunctive:
    """Existentially quantified conjunction of positive atoms plus
    comparisons; head variables are the non-quantified ones."""

    exists_vars: tuple[str, ...]
    atoms: tuple[Atom, ...]
    comparisons: tuple[Comparison, ...] = ()

    def __post_init__(self):
        if not self.atoms:
            raise UnsafeQuery("conjunctive query needs at least one atom")
        atom_vars = {v for a in self.atoms for v in a.variables()}
        for comp in self.comparisons:
            for v in comp.variables():
                if v not in atom_vars:
                    raise UnsafeQuery(f"comparison variable {v} not bound by an atom")
        for v in self.exists_vars:
            if v not in atom_vars:
                raise UnsafeQuery(f"quantified variable {v} not used")

    @property
    def free_vars(self) -> tuple[str, ...]:
        bound = set(self.exists_vars)
        seen: list[str] = []
        for a in self.atoms:
            for v in a.variables():
                if v not in bound and v not in seen:
                    seen.append(v)
        return tuple(seen)

    def __str__(self) -> str:
        items = [str(a) for a in self.atoms] + [str(c) for c in self.comparisons]
        prefix = f"exists {', '.join(self.exists_vars)}: " if self.exists_vars else ""
        return "? " + prefix + ", ".join(items)


Query = GroundAtomic | LiteralConjunction | Conjunctive


@dataclass(frozen=True)
class AnswerSet:
    """Either a boolean verdict or a set of bindings for the free variables.

    `vacuous` flags answers defined over an empty repair set (possible only
    under bounded-A semantics when no change map restores consistency).
    """

    free_vars: tuple[str, ...] = ()
    rows: frozenset[tuple[Constant, ...]] | None = None
    boolean: bool | None = None
    vacuous: bool = False

    @property
    def is_boolean(self) -> bool:
        return self.boolean is not None

    def sorted_rows(self) -> list[tuple[Constant, ...]]:
        assert self.rows is not None
        return sorted(self.rows, key=lambda row: tuple(c.key() for c in row))

    def truthy(self) -> bool:
        return bool(self.boolean) if self.is_boolean else bool(self.rows)

    @classmethod
    def of_bool(cls, value: bool, vacuous: bool = False) -> "AnswerSet":
        return cls(boolean=value, vacuous=vacuous)

    @classmethod
    def of_rows(cls, free_vars: Sequence[str], rows: Iterable[tuple[Constant, ...]],
                vacuous: bool = False) -> "AnswerSet":
        return cls(free_vars=tuple(free_vars), rows=frozenset(rows), vacuous=vacuous)


def parse_query(text: str) -> Query:
    """Parse one query line (see the module docstring for the syntax)."""
    body = strip_comment(text).strip()
    if body.startswith("?"):
        body = body[1:].strip()
    if body.endswith("."):
        body = body[:-1].strip()
    if not body:
        raise FormatError("empty query")
    exists_vars: tuple[str, ...] = ()
    if body.startswith("exists"):
        head, sep, rest = body.partition(":")
        if not sep:
            raise FormatError("exists quantifier needs a ':'")
        exists_vars = tuple(v.strip() for v in head[len("exists"):].split(",") if v.strip())
        if not exists_vars:
            raise FormatError("exists quantifier lists no variables")
        body = rest.strip()
    fresh = iter(range(10**9))
    literals: list[Literal] = []
    comparisons: list[Comparison] = []
    for item in split_top_level(body):
        item = item.strip()
        negated = False
        if item.startswith("not "):
            negated = True
            item = item[4:].strip()
        m = _ATOM_RE.match(item)
        if m:
            args = m.group(2).strip()
            if not args:
                raise FormatError(f"atom {m.group(1)}() has no arguments")
            terms = tuple(_parse_term(tok, fresh, None) for tok in split_top_level(args))
            literals.append(Literal(not negated, m.group(1), terms))
            continue
        if negated:
            raise FormatError(f"'not' must precede an atom, got {item!r}")
        for op in _COMPARISON_OPS:
            if op in item:
                left, _, right = item.partition(op)
                comparisons.append(Comparison(_parse_term(left, fresh, None), op,
                                              _parse_term(right, fresh, None)))
                break
        else:
            raise FormatError(f"expected an atom or comparison, got {item!r}")

    if exists_vars or comparisons:
        if any(not lit.positive for lit in literals):
            raise FormatError("negation is not supported with quantifiers or comparisons")
        atoms = tuple(Atom(lit.relation, lit.terms) for lit in literals)
        return Conjunctive(exists_vars, atoms, tuple(comparisons))
    conj = LiteralConjunction(tuple(literals))
    if len(conj.literals) == 1 and conj.literals[0].positive and conj.is_ground():
        return GroundAtomic(conj.literals[0].ground_tuple())
    return conj


def parse_query_file(text: str) -> Query:
    lines = [strip_comment(l).strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines:
        raise FormatError("query file is empty")
    if len(lines) > 1:
        raise FormatError("query file must contain exactly one query")
    return parse_query(lines[0])


def _bindings(instance: Instance, atoms: Sequence[Atom],
              comparisons: Sequence[Comparison]) -> Iterator[dict[str, Constant]]:
    """Assignments satisfying all positive atoms and comparisons."""
    var_intro: dict[str, int] = {}
    for i, atom in enumerate(atoms):
        for v in atom.variables():
            var_intro.setdefault(v, i)
    check_at: list[list[Comparison]] = [[] for _ in range(len(atoms))]
    deferred = []
    for comp in comparisons:
        stages = [var_intro[v] for v in comp.variables()]
        if stages:
            check_at[max(stages)].append(comp)
        else:
            deferred.append(comp)
    if deferred and atoms:
        check_at[0].extend(deferred)

    env: dict[str, Constant] = {}

    def value(t: Term) -> Constant:
        return env[t.name] if isinstance(t, Variable) else t.value

    def rec(i: int) -> Iterator[dict[str, Constant]]:
        if i == len(atoms):
            yield dict(env)
            return
        atom = atoms[i]
        for t in instance.by_relation(atom.relation):
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
                yield from rec(i + 1)
            for v in newly:
                del env[v]

    return rec(0)


def evaluate(instance: Instance, query: Query) -> AnswerSet:
    """Classical evaluation: backtracking join over positive atoms, negated
    atoms checked as absence once their variables are bound."""
    if isinstance(query, GroundAtomic):
        return AnswerSet.of_bool(query.atom in instance)

    if isinstance(query, LiteralConjunction):
        positives = [Atom(l.relation, l.terms) for l in query.literals if l.positive]
        negatives = [l for l in query.literals if not l.positive]
        free = query.free_vars
        rows = set()
        ok_any = False
        for env in _bindings(instance, positives, ()):
            if any(_instantiate(l, env) in instance for l in negatives):
                continue
            ok_any = True
            rows.add(tuple(env[v] for v in free))
        if not free:
            return AnswerSet.of_bool(ok_any)
        return AnswerSet.of_rows(free, rows)

    free = query.free_vars
    rows = set()
    ok_any = False
    for env in _bindings(instance, query.atoms, query.comparisons):
        ok_any = True
        rows.add(tuple(env[v] for v in free))
    if not free:
        return AnswerSet.of_bool(ok_any)
    return AnswerSet.of_rows(free, rows)


def _instantiate(lit: Literal, env: dict[str, Constant]) -> DbTuple:
    args = []
    for t in lit.terms:
        args.append(env[t.name] if isinstance(t, Variable) else t.value)
    return DbTuple(lit.relation, tuple(args))


def repair_instances(instance: Instance, ics: ConstraintSet, semantics: Semantics,
                     budget: solve.SolveBudget = solve.DEFAULT_BUDGET,
                     ) -> tuple[list[Instance], bool]:
    """The repairs of the instance as instances, plus a vacuous flag that is
    set when the repair set is empty (bounded-A with no repair)."""
    if isinstance(semantics, BoundedA):
        try:
            reps = a_repairs_bounded(instance, ics, semantics)
        except NoRepair:
            return [], True
        return [apply_changes(instance, r.changes) for r in reps], False
    reps = repairs_for(instance, ics, semantics, budget)
    return [instance.restrict(r.retained) for r in reps], False


def _fold(per_repair: list[AnswerSet], query: Query, combine_all: bool,
          vacuous_base: AnswerSet | None = None) -> AnswerSet:
    if vacuous_base is not None:
        return vacuous_base
    first = per_repair[0]
    if first.is_boolean:
        values = [a.boolean for a in per_repair]
        return AnswerSet.of_bool(all(values) if combine_all else any(values))
    rows = set(first.rows)
    for a in per_repair[1:]:
        rows = rows & a.rows if combine_all else rows | a.rows
    return AnswerSet.of_rows(first.free_vars, rows)


def certain_answers(instance: Instance, ics: ConstraintSet, query: Query,
                    semantics: Semantics,
                    budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> AnswerSet:
    """Answers holding in every repair.

    Over an empty repair set the boolean answer is vacuously yes; open
    queries fall back to classical evaluation over the original instance,
    flagged vacuous so callers can tell the difference.
    """
    reps, vacuous = repair_instances(instance, ics, semantics, budget)
    if vacuous:
        base = evaluate(instance, query)
        if base.is_boolean:
            return AnswerSet.of_bool(True, vacuous=True)
        return AnswerSet.of_rows(base.free_vars, base.rows, vacuous=True)
    return _fold([evaluate(r, query) for r in reps], query, combine_all=True)


def possible_answers(instance: Instance, ics: ConstraintSet, query: Query,
                     semantics: Semantics,
                     budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> AnswerSet:
    """Answers holding in at least one repair."""
    reps, vacuous = repair_instances(instance, ics, semantics, budget)
    if vacuous:
        base = evaluate(instance, query)
        if base.is_boolean:
            return AnswerSet.of_bool(False, vacuous=True)
        return AnswerSet.of_rows(base.free_vars, (), vacuous=True)
    return _fold([evaluate(r, query) for r in reps], query, combine_all=False)


def certain_ground_fast(instance: Instance, ics: ConstraintSet, t: DbTuple,
                        semantics: Semantics = "C",
                        budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> bool:
    """Certain answer for a ground atom without repair enumeration.

    Deletion-only repairs never contain absent tuples, so t must be stored;
    a stored tuple is certain iff deleting its vertex lowers the maximum
    (weighted) independent-set value of the conflict hypergraph.
    """
    if semantics not in ("C", "WC"):
        raise UnsupportedQueryClass(f"fast ground path covers C and WC, not {semantics!r}")
    if t not in instance:
        return False
    h = build_conflict_hypergraph(instance, ics)
    vid = h.id_of(t)
    if semantics == "C":
        return solve.in_all_maximum_is(h, vid, budget)
    weights = {i: instance.weight(h.tuple_of(i)) for i in h.vertex_ids}
    best = solve.alpha_weighted(h, weights, budget).weight
    rest = solve.alpha_weighted(h.restrict([vid]), weights, budget).weight
    return rest < best


def certain_literal_conjunction(instance: Instance, ics: ConstraintSet,
                                query: LiteralConjunction,
                                semantics: Semantics = "C",
                                budget: solve.SolveBudget = solve.DEFAULT_BUDGET) -> bool:
    """Certain answer for a ground literal conjunction under C: positive
    literals must sit in every maximum independent set, negated ones in
    none."""
    if semantics != "C":
        raise UnsupportedQueryClass("fast literal-conjunction path covers C only")
    if not query.is_ground():
        raise UnsupportedQueryClass("query must be ground")
    h = build_conflict_hypergraph(instance, ics)
    for lit in query.literals:
        t = lit.ground_tuple()
        if lit.positive:
            if t not in instance or not solve.in_all_maximum_is(h, h.id_of(t), budget):
                return False
        else:
            if t in instance and solve.in_some_maximum_is(h, h.id_of(t), budget):
                return False
    return True
