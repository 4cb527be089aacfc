"""Conflict hypergraphs: tuple-vertices, minimal violating sets as
hyperedges, and the elementary vertex-deletion / conditioning queries the
solvers are built on.

Vertices are dense integer ids with a side table to the database tuples.
Derived hypergraphs (restrictions, conditionings) keep the original ids,
so results read back directly against the side table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .denial import ConstraintSet, minimal_sets, violating_sets
from .errors import ForcedOut, SchemaMismatch
from .model import DbTuple, Instance


@dataclass(frozen=True)
class ConflictHypergraph:
    vertex_ids: tuple[int, ...]
    edges: tuple[frozenset[int], ...]
    tuple_table: tuple[DbTuple, ...] | None = None
    edge_tags: Mapping[frozenset[int], tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        vset = frozenset(self.vertex_ids)
        if len(vset) != len(self.vertex_ids):
            raise SchemaMismatch("duplicate vertex ids")
        for e in self.edges:
            if not e:
                raise SchemaMismatch("empty hyperedge")
            if not e <= vset:
                raise SchemaMismatch(f"hyperedge {sorted(e)} leaves the vertex set")
        object.__setattr__(self, "_vertex_set", vset)
        index = None
        if self.tuple_table is not None:
            index = {t: i for i, t in enumerate(self.tuple_table)}
        object.__setattr__(self, "_tuple_index", index)

    @property
    def vertex_set(self) -> frozenset[int]:
        return self._vertex_set

    @property
    def max_edge_size(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    def tuple_of(self, vid: int) -> DbTuple:
        if self.tuple_table is None:
            raise SchemaMismatch("hypergraph has no tuple table")
        return self.tuple_table[vid]

    def id_of(self, t: DbTuple) -> int:
        if self._tuple_index is None:
            raise SchemaMismatch("hypergraph has no tuple table")
        try:
            return self._tuple_index[t]
        except KeyError as exc:
            raise SchemaMismatch(f"tuple {t} not in hypergraph") from exc

    def tuples_of(self, vids: Iterable[int]) -> frozenset[DbTuple]:
        return frozenset(self.tuple_of(v) for v in vids)

    def tags_of(self, edge: frozenset[int]) -> tuple[str, ...]:
        return self.edge_tags.get(edge, ())

    def is_independent(self, s: Iterable[int]) -> bool:
        """True iff the vertex set contains no hyperedge."""
        sset = frozenset(s)
        if not sset <= self._vertex_set:
            raise SchemaMismatch("candidate set leaves the vertex set")
        return not any(e <= sset for e in self.edges)

    def restrict(self, removed: Iterable[int]) -> "ConflictHypergraph":
        """Vertex deletion: drop the vertices and every edge meeting them."""
        gone = frozenset(removed)
        if not gone <= self._vertex_set:
            raise SchemaMismatch("removed set leaves the vertex set")
        edges = tuple(e for e in self.edges if not e & gone)
        tags = {e: self.edge_tags[e] for e in edges if e in self.edge_tags}
        return ConflictHypergraph(
            tuple(v for v in self.vertex_ids if v not in gone),
            edges, self.tuple_table, tags)

    def condition_on(self, v: int) -> "ConflictHypergraph":
        """The hypergraph whose maximum independent sets are exactly
        {I - {v} : I maximum among independent sets containing v}.

        v is removed; the other endpoint of every 2-edge through v is
        forced out (with all its edges); larger edges through v keep their
        residue e - {v}, since co-membership in one hyperedge does not
        exclude co-selection.
        """
        if v not in self._vertex_set:
            raise SchemaMismatch(f"vertex {v} not in hypergraph")
        if any(len(e) == 1 and v in e for e in self.edges):
            raise ForcedOut(f"vertex {v} lies in a singleton hyperedge")
        forced = {u for e in self.edges if len(e) == 2 and v in e for u in e if u != v}
        residual: dict[frozenset[int], set[str]] = {}
        for e in self.edges:
            if v in e:
                if len(e) == 2:
                    continue
                e2 = e - {v}
            else:
                e2 = e
            if e2 & forced:
                continue
            residual.setdefault(e2, set()).update(self.edge_tags.get(e, ()))
        kept = minimal_sets(residual.keys())
        edges = tuple(sorted(kept, key=lambda e: (len(e), sorted(e))))
        tags = {e: tuple(sorted(residual[e])) for e in edges if residual[e]}
        removed = forced | {v}
        return ConflictHypergraph(
            tuple(u for u in self.vertex_ids if u not in removed),
            edges, self.tuple_table, tags)

    def export_text(self) -> str:
        """One hyperedge per line as vertex ids, after a header mapping ids
        to tuples; constraint tags trail each edge line."""
        lines = []
        for vid in self.vertex_ids:
            label = str(self.tuple_of(vid)) if self.tuple_table is not None else "-"
            lines.append(f"vertex {vid} {label}")
        for e in sorted(self.edges, key=lambda e: (len(e), sorted(e))):
            tags = self.edge_tags.get(e, ())
            suffix = (" # " + ",".join(tags)) if tags else ""
            lines.append("edge " + " ".join(str(v) for v in sorted(e)) + suffix)
        return "\n".join(lines) + "\n"


def hypergraph_of(tuples: Iterable[DbTuple],
                  edge_sets: Mapping[frozenset[DbTuple], Iterable[str]]) -> ConflictHypergraph:
    """Build a hypergraph over the given tuples (in the given order) from
    tuple-level edges tagged with originating constraint ids. Edges are
    re-minimized across constraints."""
    table = tuple(tuples)
    index = {t: i for i, t in enumerate(table)}
    by_ids: dict[frozenset[int], set[str]] = {}
    for ts, tags in edge_sets.items():
        e = frozenset(index[t] for t in ts)
        by_ids.setdefault(e, set()).update(tags)
    kept = minimal_sets(by_ids.keys())
    edges = tuple(sorted(kept, key=lambda e: (len(e), sorted(e))))
    tags = {e: tuple(sorted(by_ids[e])) for e in edges if by_ids[e]}
    return ConflictHypergraph(tuple(range(len(table))), edges, table, tags)


def build_conflict_hypergraph(instance: Instance, ics: ConstraintSet) -> ConflictHypergraph:
    """Vertices are all stored tuples; hyperedges are the minimal violating
    sets of all constraints, re-minimized globally (an edge from one
    constraint may subsume another's)."""
    edge_sets: dict[frozenset[DbTuple], set[str]] = {}
    for c in ics:
        for vs in violating_sets(instance, c):
            edge_sets.setdefault(vs, set()).add(c.id)
    return hypergraph_of(instance.canonical_tuples(), edge_sets)
