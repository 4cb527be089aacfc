"""Denial constraints: representation, text parser, satisfaction checking,
and enumeration of minimal violating tuple-sets.

A denial constraint forbids a joint pattern of tuples: it is violated by an
instance exactly when some assignment maps each of its atoms to a stored
tuple (atoms may share a tuple) with all comparison atoms true.

Constraint syntax, one constraint per line::

    :- P(x,y,z), P(x,u,w), y != u.
    :- R(x), S(y).            # no R-tuple may coexist with an S-tuple

Bare identifiers starting with ``u``..``z`` or ``_`` are variables
(`_` is anonymous: each occurrence is fresh); every other identifier,
integer, or ``'quoted'`` token is a constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import FormatError, SchemaMismatch, UnsafeVariable
from .model import (
    Constant,
    DbTuple,
    Instance,
    parse_constant,
    split_top_level,
    strip_comment,
)

_VAR_RE = re.compile(r"[u-z_][A-Za-z0-9_]*\Z")
_ATOM_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*\Z", re.S)
_COMPARISON_OPS = ("<=", ">=", "!=", "=", "<", ">")


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Const:
    value: Constant


Term = Variable | Const


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple[Term, ...]

    def variables(self) -> Iterator[str]:
        for t in self.terms:
            if isinstance(t, Variable):
                yield t.name

    def __str__(self) -> str:
        parts = [t.name if isinstance(t, Variable) else str(t.value) for t in self.terms]
        return f"{self.relation}(" + ",".join(parts) + ")"


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def __post_init__(self):
        if self.op not in _COMPARISON_OPS:
            raise FormatError(f"unknown comparison operator {self.op!r}")

    def variables(self) -> Iterator[str]:
        for t in (self.left, self.right):
            if isinstance(t, Variable):
                yield t.name

    def holds(self, left: Constant, right: Constant) -> bool:
        if self.op == "=":
            return left == right
        if self.op == "!=":
            return left != right
        if self.op == "<":
            return left < right
        if self.op == "<=":
            return left <= right
        if self.op == ">":
            return left > right
        return left >= right

    def __str__(self) -> str:
        def s(t: Term) -> str:
            return t.name if isinstance(t, Variable) else str(t.value)
        return f"{s(self.left)} {self.op} {s(self.right)}"


@dataclass(frozen=True)
class DenialConstraint:
    """One denial: a nonempty atom list plus a comparison conjunction."""

    id: str
    atoms: tuple[Atom, ...]
    comparisons: tuple[Comparison, ...] = ()

    def __post_init__(self):
        if not self.atoms:
            raise FormatError(f"constraint {self.id}: needs at least one atom")
        atom_vars = {v for a in self.atoms for v in a.variables()}
        for comp in self.comparisons:
            for v in comp.variables():
                if v not in atom_vars:
                    raise UnsafeVariable(
                        f"constraint {self.id}: comparison variable {v} "
                        "does not occur in any atom")

    def __str__(self) -> str:
        items = [str(a) for a in self.atoms] + [str(c) for c in self.comparisons]
        return ":- " + ", ".join(items) + "."


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[DenialConstraint, ...] = ()

    def __post_init__(self):
        ids = [c.id for c in self.constraints]
        if len(set(ids)) != len(ids):
            raise FormatError("constraint ids must be unique")

    @property
    def max_atoms(self) -> int:
        """The hyperedge size bound d: the largest atom count."""
        return max((len(c.atoms) for c in self.constraints), default=0)

    def __iter__(self) -> Iterator[DenialConstraint]:
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)


def _parse_term(token: str, fresh: Iterator[int], line: int | None) -> Term:
    token = token.strip()
    if not token:
        raise FormatError("empty term", line)
    if token == "_":
        return Variable(f"_anon{next(fresh)}")
    if token[0].isalpha() or token[0] == "_":
        if _VAR_RE.match(token):
            return Variable(token)
    return Const(parse_constant(token, line))


def parse_constraint(text: str, cid: str = "c1", line: int | None = None) -> DenialConstraint:
    """Parse one `:- atom, ..., comparison, ...` line."""
    body = strip_comment(text).strip()
    if body.startswith(":-"):
        body = body[2:]
    if body.endswith("."):
        body = body[:-1]
    body = body.strip()
    if not body:
        raise FormatError("empty constraint", line)
    fresh = iter(range(10**9))
    atoms: list[Atom] = []
    comparisons: list[Comparison] = []
    for item in split_top_level(body):
        item = item.strip()
        if not item:
            raise FormatError("empty conjunct", line)
        m = _ATOM_RE.match(item)
        if m:
            args = m.group(2).strip()
            if not args:
                raise FormatError(f"atom {m.group(1)}() has no arguments", line)
            terms = tuple(_parse_term(tok, fresh, line) for tok in split_top_level(args))
            atoms.append(Atom(m.group(1), terms))
            continue
        for op in _COMPARISON_OPS:
            if op in item:
                left, _, right = item.partition(op)
                comparisons.append(Comparison(_parse_term(left, fresh, line), op,
                                              _parse_term(right, fresh, line)))
                break
        else:
            raise FormatError(f"expected an atom or comparison, got {item!r}", line)
    return DenialConstraint(cid, tuple(atoms), tuple(comparisons))


def parse_constraint_file(text: str) -> ConstraintSet:
    """One denial per line; `#` comments and blank lines ignored.

    Constraints are labelled c1, c2, ... in file order.
    """
    constraints = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw).strip()
        if not line:
            continue
        constraints.append(parse_constraint(line, cid=f"c{len(constraints) + 1}", line=lineno))
    return ConstraintSet(tuple(constraints))


def format_constraints(ics: ConstraintSet) -> str:
    return "".join(str(c) + "\n" for c in ics)


def _validate_against_schema(c: DenialConstraint, instance: Instance) -> None:
    for atom in c.atoms:
        decl = instance.schema.get(atom.relation)
        if decl is not None and decl.arity != len(atom.terms):
            raise SchemaMismatch(
                f"constraint {c.id}: atom {atom.relation}/{len(atom.terms)} "
                f"does not match declared arity {decl.arity}")


def _assignments(instance: Instance, c: DenialConstraint) -> Iterator[tuple[DbTuple, ...]]:
    """Yield one tuple-binding per satisfying assignment of the constraint's
    atoms, comparisons included. Backtracking join: atoms are bound left to
    right against the per-relation tuple lists, and each comparison is
    checked as soon as both sides are bound."""
    n = len(c.atoms)
    # comparisons become checkable once the atom binding all their variables
    # is in place; constant-only comparisons are checkable up front
    var_intro: dict[str, int] = {}
    for i, atom in enumerate(c.atoms):
        for v in atom.variables():
            var_intro.setdefault(v, i)
    check_at: list[list[Comparison]] = [[] for _ in range(n)]
    for comp in c.comparisons:
        stage = max((var_intro[v] for v in comp.variables()), default=0)
        check_at[stage].append(comp)

    env: dict[str, Constant] = {}
    bound: list[DbTuple] = []

    def value(t: Term) -> Constant:
        return env[t.name] if isinstance(t, Variable) else t.value

    def rec(i: int) -> Iterator[tuple[DbTuple, ...]]:
        if i == n:
            yield tuple(bound)
            return
        atom = c.atoms[i]
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
                bound.append(t)
                yield from rec(i + 1)
                bound.pop()
            for v in newly:
                del env[v]

    return rec(0)


def minimal_sets(sets: Iterable[frozenset]) -> frozenset[frozenset]:
    """Drop every set that strictly contains another (and deduplicate).

    Subset tests are bucketed by cardinality: only strictly smaller kept
    sets can subsume, so uniform-size collections cost nothing extra.
    """
    unique = sorted(set(sets), key=len)
    kept: list[frozenset] = []
    by_elem: dict[object, list[frozenset]] = {}
    for s in unique:
        subsumed = False
        seen: set[int] = set()
        for x in s:
            for small in by_elem.get(x, ()):
                if id(small) in seen:
                    continue
                seen.add(id(small))
                if len(small) < len(s) and small <= s:
                    subsumed = True
                    break
            if subsumed:
                break
        if not subsumed:
            kept.append(s)
            for x in s:
                by_elem.setdefault(x, []).append(s)
    return frozenset(kept)


def violating_sets(instance: Instance, c: DenialConstraint) -> frozenset[frozenset[DbTuple]]:
    """Every set-minimal set of stored tuples that jointly violates c."""
    _validate_against_schema(c, instance)
    return minimal_sets(frozenset(binding) for binding in _assignments(instance, c))


def has_violation(instance: Instance, c: DenialConstraint) -> bool:
    _validate_against_schema(c, instance)
    for _ in _assignments(instance, c):
        return True
    return False


def is_consistent(instance: Instance, ics: ConstraintSet) -> bool:
    """True iff no constraint has a satisfying (violating) assignment."""
    return not any(has_violation(instance, c) for c in ics)
