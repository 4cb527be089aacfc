"""Schemas, constants, tuples, weighted instances, and update sequences.

Instances are immutable values: every operation that "modifies" one returns
a new instance and leaves its input untouched, so instances are safe to
share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Iterator, Mapping

from .errors import (
    ChangeTargetMissing,
    DeleteTargetMissing,
    FormatError,
    SchemaMismatch,
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"-?\d+\Z")


@total_ordering
@dataclass(frozen=True)
class Constant:
    """A domain constant: an integer or a symbol.

    The order is total: integers first (numerically), then symbols
    (lexicographically). Comparison atoms rely on this order.
    """

    value: int | str

    def __post_init__(self):
        if not isinstance(self.value, (int, str)) or isinstance(self.value, bool):
            raise TypeError(f"constant value must be int or str, got {self.value!r}")

    def key(self) -> tuple:
        if isinstance(self.value, int):
            return (0, self.value, "")
        return (1, 0, self.value)

    def __lt__(self, other: "Constant") -> bool:
        if not isinstance(other, Constant):
            return NotImplemented
        return self.key() < other.key()

    def __str__(self) -> str:
        if isinstance(self.value, int):
            return str(self.value)
        if _IDENT_RE.match(self.value) and not _INT_RE.match(self.value):
            return self.value
        return "'" + self.value + "'"


def parse_constant(token: str, line: int | None = None) -> Constant:
    """Parse one constant token: an integer, a bare symbol, or 'quoted'."""
    token = token.strip()
    if _INT_RE.match(token):
        return Constant(int(token))
    if len(token) >= 2 and token[0] == "'" and token[-1] == "'":
        return Constant(token[1:-1])
    if _IDENT_RE.match(token):
        return Constant(token)
    raise FormatError(f"bad constant {token!r}", line)


@dataclass(frozen=True)
class DbTuple:
    """A ground atom: relation name plus an ordered list of constants."""

    relation: str
    args: tuple[Constant, ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    def sort_key(self) -> tuple:
        return (self.relation, tuple(a.key() for a in self.args))

    def replace_arg(self, index: int, value: Constant) -> "DbTuple":
        args = list(self.args)
        args[index] = value
        return DbTuple(self.relation, tuple(args))

    def __str__(self) -> str:
        return f"{self.relation}(" + ",".join(str(a) for a in self.args) + ")"

    @classmethod
    def of(cls, relation: str, *values: int | str | Constant) -> "DbTuple":
        args = tuple(v if isinstance(v, Constant) else Constant(v) for v in values)
        return cls(relation, args)


@dataclass(frozen=True)
class RelationDecl:
    name: str
    arity: int
    attrs: tuple[str, ...] = ()

    def __post_init__(self):
        if self.arity < 1:
            raise SchemaMismatch(f"relation {self.name}: arity must be >= 1")
        if not self.attrs:
            object.__setattr__(self, "attrs", tuple(f"c{i}" for i in range(self.arity)))
        if len(self.attrs) != self.arity or len(set(self.attrs)) != self.arity:
            raise SchemaMismatch(f"relation {self.name}: attribute names must be "
                                 f"{self.arity} distinct identifiers")


@dataclass(frozen=True)
class Schema:
    relations: tuple[RelationDecl, ...] = ()

    def __post_init__(self):
        by_name = {}
        for decl in self.relations:
            if decl.name in by_name:
                raise SchemaMismatch(f"duplicate relation {decl.name}")
            by_name[decl.name] = decl
        object.__setattr__(self, "_by_name", by_name)

    def get(self, name: str) -> RelationDecl | None:
        return self._by_name.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def extended(self, decls: Iterable[RelationDecl]) -> "Schema":
        """Schema with the given declarations added (existing ones win)."""
        extra = tuple(d for d in decls if d.name not in self._by_name)
        if not extra:
            return self
        return Schema(self.relations + extra)

    @classmethod
    def of(cls, **arities: int) -> "Schema":
        return cls(tuple(RelationDecl(name, a) for name, a in arities.items()))

    @classmethod
    def infer(cls, tuples: Iterable[DbTuple]) -> "Schema":
        decls: dict[str, int] = {}
        for t in tuples:
            prev = decls.setdefault(t.relation, t.arity)
            if prev != t.arity:
                raise SchemaMismatch(f"relation {t.relation} used with arities {prev} and {t.arity}")
        return cls(tuple(RelationDecl(name, a) for name, a in sorted(decls.items())))


@dataclass(frozen=True)
class Instance:
    """A finite set of weighted tuples over a schema.

    Weights are exact positive rationals; unweighted tuples carry weight 1.
    """

    schema: Schema
    tuples: frozenset[DbTuple]
    weights: Mapping[DbTuple, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        by_rel: dict[str, list[DbTuple]] = {}
        for t in self.tuples:
            decl = self.schema.get(t.relation)
            if decl is None:
                raise SchemaMismatch(f"tuple {t} uses undeclared relation {t.relation}")
            if decl.arity != t.arity:
                raise SchemaMismatch(f"tuple {t} has arity {t.arity}, declared {decl.arity}")
            by_rel.setdefault(t.relation, []).append(t)
        weights = {}
        for t, w in self.weights.items():
            if t not in self.tuples:
                raise SchemaMismatch(f"weight given for absent tuple {t}")
            w = Fraction(w)
            if w <= 0:
                raise SchemaMismatch(f"non-positive weight {w} for {t}")
            if w != 1:
                weights[t] = w
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_by_relation", {r: tuple(ts) for r, ts in by_rel.items()})

    @classmethod
    def build(cls,
              tuples: Iterable[DbTuple],
              weights: Mapping[DbTuple, Fraction | int | str] | None = None,
              schema: Schema | None = None) -> "Instance":
        ts = frozenset(tuples)
        if schema is None:
            schema = Schema.infer(ts)
        else:
            schema = schema.extended(Schema.infer(ts).relations)
        ws = {t: Fraction(w) for t, w in (weights or {}).items()}
        return cls(schema, ts, ws)

    def weight(self, t: DbTuple) -> Fraction:
        return self.weights.get(t, Fraction(1))

    def total_weight(self, ts: Iterable[DbTuple] | None = None) -> Fraction:
        if ts is None:
            ts = self.tuples
        return sum((self.weight(t) for t in ts), Fraction(0))

    def by_relation(self, name: str) -> tuple[DbTuple, ...]:
        return self._by_relation.get(name, ())

    def canonical_tuples(self) -> list[DbTuple]:
        return sorted(self.tuples, key=DbTuple.sort_key)

    def restrict(self, retained: Iterable[DbTuple]) -> "Instance":
        kept = frozenset(retained)
        missing = kept - self.tuples
        if missing:
            raise SchemaMismatch(f"cannot restrict to tuples outside the instance: {missing}")
        ws = {t: w for t, w in self.weights.items() if t in kept}
        return Instance(self.schema, kept, ws)

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, t: DbTuple) -> bool:
        return t in self.tuples

    def __iter__(self) -> Iterator[DbTuple]:
        return iter(self.tuples)


@dataclass(frozen=True)
class Insert:
    target: DbTuple


@dataclass(frozen=True)
class Delete:
    target: DbTuple


@dataclass(frozen=True)
class Change:
    target: DbTuple
    attr_index: int
    new_value: Constant

    def __post_init__(self):
        if not 0 <= self.attr_index < self.target.arity:
            raise SchemaMismatch(f"change {self.target}: attribute index {self.attr_index} "
                                 f"out of range for arity {self.target.arity}")

    def result(self) -> DbTuple:
        return self.target.replace_arg(self.attr_index, self.new_value)


UpdateOp = Insert | Delete | Change


@dataclass(frozen=True)
class UpdateSequence:
    """An ordered sequence of one-tuple update operations, applied atomically."""

    ops: tuple[UpdateOp, ...] = ()

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self) -> Iterator[UpdateOp]:
        return iter(self.ops)

    def only_changes(self) -> bool:
        return all(isinstance(op, Change) for op in self.ops)

    def only_inserts(self) -> bool:
        return all(isinstance(op, Insert) for op in self.ops)


def apply_update(instance: Instance, seq: UpdateSequence) -> Instance:
    """The instance that results from applying the sequence, left to right.

    Inserting a tuple that is already present is a silent no-op (set
    semantics). A change removes its target and inserts the rewritten tuple,
    inheriting the target's weight; if the rewritten tuple already exists,
    the existing tuple (and its weight) wins.
    """
    present: dict[DbTuple, Fraction] = {t: instance.weight(t) for t in instance.tuples}
    new_decls: list[RelationDecl] = []

    def note_relation(t: DbTuple) -> None:
        decl = instance.schema.get(t.relation)
        if decl is None:
            new_decls.append(RelationDecl(t.relation, t.arity))
        elif decl.arity != t.arity:
            raise SchemaMismatch(f"tuple {t} has arity {t.arity}, declared {decl.arity}")

    for op in seq.ops:
        if isinstance(op, Insert):
            if op.target not in present:
                note_relation(op.target)
                present[op.target] = Fraction(1)
        elif isinstance(op, Delete):
            if op.target not in present:
                raise DeleteTargetMissing(str(op.target))
            del present[op.target]
        else:
            if op.target not in present:
                raise ChangeTargetMissing(str(op.target))
            w = present.pop(op.target)
            res = op.result()
            if res not in present:
                present[res] = w
    schema = instance.schema.extended(new_decls)
    weights = {t: w for t, w in present.items() if w != 1}
    return Instance(schema, frozenset(present), weights)


def minimize_update(seq: UpdateSequence, constraint_class: str = "denial") -> UpdateSequence:
    """Normalized sequence with the same final state modulo dropped deletions.

    Under denial constraints deletions never introduce violations, so for
    the "denial" class each deletion is removed: it cancels its latest
    producer (an insert, or a change whose result it deletes, cascading to
    the change's source) or, lacking one, is simply dropped. The "general"
    class returns the sequence unchanged.

    Minimization is instance-free, so it treats every insert as effective;
    the equivalence-modulo-dropped-deletions contract assumes sequences do
    not re-insert tuples that are already stored and then delete them.
    """
    minimized, _ = minimize_update_with_dropped(seq, constraint_class)
    return minimized


def minimize_update_with_dropped(
        seq: UpdateSequence,
        constraint_class: str = "denial") -> tuple[UpdateSequence, tuple[Delete, ...]]:
    """As minimize_update, also returning the deletions that were dropped
    outright (re-applying them after the minimized sequence restores the
    original final state)."""
    if constraint_class not in ("denial", "general"):
        raise ValueError(f"unknown constraint class {constraint_class!r}")
    if constraint_class == "general":
        return seq, ()

    kept: list[UpdateOp | None] = []
    produced: set[DbTuple] = set()
    dropped: list[Delete] = []

    def cancel(t: DbTuple, limit: int) -> None:
        # Cancel the latest surviving producer of t before position `limit`;
        # cancelling a change re-raises a deletion of its source tuple.
        for i in range(limit - 1, -1, -1):
            op = kept[i]
            if op is None:
                continue
            if isinstance(op, Insert) and op.target == t:
                kept[i] = None
                return
            if isinstance(op, Change) and op.result() == t:
                kept[i] = None
                cancel(op.target, i)
                return
        dropped.append(Delete(t))

    for op in seq.ops:
        if isinstance(op, Delete):
            cancel(op.target, len(kept))
            produced.discard(op.target)
        elif isinstance(op, Insert) and op.target in produced:
            continue  # redundant re-insert: a no-op whatever the base instance
        else:
            if isinstance(op, Insert):
                produced.add(op.target)
            else:
                produced.discard(op.target)
                produced.add(op.result())
            kept.append(op)
    return UpdateSequence(tuple(op for op in kept if op is not None)), tuple(dropped)


# --- text formats ---------------------------------------------------------
#
# Instance files: one tuple per line, `P(a,b,c)` optionally suffixed with
# `@ weight`; optional schema headers `relation P/3 (x,y,z)`. Update
# scripts: `insert P(a,f,d)`, `delete P(a,b,c)`,
# `change P(a,b,c) attr 1 -> f`. `#` starts a comment in either format.

_RELATION_RE = re.compile(
    r"relation\s+([A-Za-z_][A-Za-z0-9_]*)\s*/\s*(\d+)\s*(?:\(([^)]*)\))?\s*\Z")
_ATOM_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*\Z", re.S)


def split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on a separator, ignoring occurrences inside quotes or parens."""
    parts, depth, in_quote, start = [], 0, False, 0
    for i, ch in enumerate(text):
        if in_quote:
            if ch == "'":
                in_quote = False
        elif ch == "'":
            in_quote = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def strip_comment(line: str) -> str:
    in_quote = False
    for i, ch in enumerate(line):
        if ch == "'":
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def parse_ground_atom(text: str, line: int | None = None) -> DbTuple:
    m = _ATOM_RE.match(text.strip())
    if not m:
        raise FormatError(f"expected a ground atom, got {text.strip()!r}", line)
    name, body = m.group(1), m.group(2).strip()
    if not body:
        raise FormatError(f"atom {name}() has no arguments", line)
    args = tuple(parse_constant(tok, line) for tok in split_top_level(body))
    return DbTuple(name, args)


def parse_instance_text(text: str, schema: Schema | None = None) -> Instance:
    decls: list[RelationDecl] = []
    tuples: list[DbTuple] = []
    weights: dict[DbTuple, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw).strip()
        if not line:
            continue
        m = _RELATION_RE.match(line)
        if m:
            name, arity = m.group(1), int(m.group(2))
            attrs = tuple(a.strip() for a in m.group(3).split(",")) if m.group(3) else ()
            try:
                decls.append(RelationDecl(name, arity, attrs))
            except SchemaMismatch as exc:
                raise FormatError(str(exc), lineno) from exc
            continue
        body, weight = line, None
        if "@" in line:
            body, _, wtext = line.partition("@")
            try:
                weight = Fraction(wtext.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise FormatError(f"bad weight {wtext.strip()!r}", lineno) from exc
        t = parse_ground_atom(body, lineno)
        tuples.append(t)
        if weight is not None:
            weights[t] = weight
    base = schema if schema is not None else Schema()
    try:
        full = base.extended(decls).extended(Schema.infer(tuples).relations)
        return Instance(full, frozenset(tuples), weights)
    except SchemaMismatch as exc:
        raise FormatError(str(exc)) from exc


def format_instance(instance: Instance, include_schema: bool = True) -> str:
    lines = []
    if include_schema:
        for decl in sorted(instance.schema.relations, key=lambda d: d.name):
            lines.append(f"relation {decl.name}/{decl.arity} ({','.join(decl.attrs)})")
    for t in instance.canonical_tuples():
        w = instance.weight(t)
        lines.append(f"{t} @ {w}" if w != 1 else str(t))
    return "\n".join(lines) + "\n"


_CHANGE_RE = re.compile(r"(.*)\battr\s+(\d+)\s*->\s*(.+)\Z")


def parse_update_script(text: str) -> UpdateSequence:
    ops: list[UpdateOp] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw).strip()
        if not line:
            continue
        verb, _, rest = line.partition(" ")
        rest = rest.strip()
        if verb == "insert":
            ops.append(Insert(parse_ground_atom(rest, lineno)))
        elif verb == "delete":
            ops.append(Delete(parse_ground_atom(rest, lineno)))
        elif verb == "change":
            m = _CHANGE_RE.match(rest)
            if not m:
                raise FormatError("expected `change R(...) attr I -> value`", lineno)
            target = parse_ground_atom(m.group(1), lineno)
            index = int(m.group(2))
            value = parse_constant(m.group(3), lineno)
            try:
                ops.append(Change(target, index, value))
            except SchemaMismatch as exc:
                raise FormatError(str(exc), lineno) from exc
        else:
            raise FormatError(f"unknown update verb {verb!r}", lineno)
    return UpdateSequence(tuple(ops))


def format_update_script(seq: UpdateSequence) -> str:
    lines = []
    for op in seq.ops:
        if isinstance(op, Insert):
            lines.append(f"insert {op.target}")
        elif isinstance(op, Delete):
            lines.append(f"delete {op.target}")
        else:
            lines.append(f"change {op.target} attr {op.attr_index} -> {op.new_value}")
    return "\n".join(lines) + ("\n" if lines else "")
