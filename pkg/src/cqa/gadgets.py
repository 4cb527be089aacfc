"""Graph constructions that shuttle between the certain and possible
membership questions, and the graph-to-database encoding.

All constructions allocate fresh vertex ids contiguously above the input's
maximum id, so outputs are deterministic and round-trip through the graph
file format (first line the vertex count, then one `u v` line per edge,
plus a `t <id>` marker line for blocks).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .denial import DenialConstraint, parse_constraint
from .errors import FormatError, SchemaMismatch
from .hypergraph import ConflictHypergraph
from .model import DbTuple, Instance, Schema, strip_comment


@dataclass(frozen=True)
class SimpleGraph:
    vertices: tuple[int, ...]
    edges: frozenset[frozenset[int]]

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise SchemaMismatch("duplicate vertex ids")
        for e in self.edges:
            if len(e) != 2:
                raise SchemaMismatch(f"not a simple edge: {sorted(e)}")
            if not e <= vset:
                raise SchemaMismatch(f"edge {sorted(e)} leaves the vertex set")

    @classmethod
    def build(cls, n_vertices: int, edges: Iterable[tuple[int, int]] = ()) -> "SimpleGraph":
        return cls(tuple(range(n_vertices)),
                   frozenset(frozenset(e) for e in edges))

    def neighbors(self, v: int) -> set[int]:
        return {u for e in self.edges if v in e for u in e if u != v}

    def to_hypergraph(self) -> ConflictHypergraph:
        return ConflictHypergraph(self.vertices, tuple(
            sorted(self.edges, key=lambda e: sorted(e))))

    def _next_id(self) -> int:
        return max(self.vertices, default=-1) + 1


def parse_graph_text(text: str) -> tuple[SimpleGraph, dict[str, int]]:
    """Parse the graph format; returns the graph and any marker lines
    (e.g. `t 12`) as a name-to-id mapping."""
    lines = [strip_comment(l).strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines:
        raise FormatError("graph file is empty")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise FormatError(f"first line must be the vertex count, got {lines[0]!r}") from exc
    edges = []
    markers: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) == 2 and not parts[0].isdigit():
            markers[parts[0]] = int(parts[1])
            continue
        if len(parts) != 2:
            raise FormatError(f"expected `u v` or `name id`, got {line!r}", lineno)
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge {u} {v} outside 0..{n - 1}", lineno)
        if u == v:
            raise FormatError(f"self-loop at {u}", lineno)
        edges.append((u, v))
    return SimpleGraph.build(n, edges), markers


def format_graph(g: SimpleGraph, markers: dict[str, int] | None = None) -> str:
    if tuple(sorted(g.vertices)) != tuple(range(len(g.vertices))):
        raise FormatError("graph file format needs contiguous ids 0..n-1")
    lines = [str(len(g.vertices))]
    for e in sorted(g.edges, key=lambda e: sorted(e)):
        u, v = sorted(e)
        lines.append(f"{u} {v}")
    for name in sorted(markers or {}):
        lines.append(f"{name} {markers[name]}")
    return "\n".join(lines) + "\n"


def twin_extension(g: SimpleGraph, v: int) -> SimpleGraph:
    """Add a twin of v: a fresh vertex adjacent to exactly v's neighbors.

    The twin ties the two membership questions together: v lies in some
    maximum independent set of the input iff v lies in every maximum
    independent set of the output, iff the maximum sizes differ by one.
    """
    if v not in g.vertices:
        raise SchemaMismatch(f"vertex {v} not in graph")
    twin = g._next_id()
    new_edges = set(g.edges) | {frozenset((twin, u)) for u in g.neighbors(v)}
    return SimpleGraph(g.vertices + (twin,), frozenset(new_edges))


def rhombus_extension(g: SimpleGraph, v: int) -> SimpleGraph:
    """Hang a rhombus from v: two fresh vertices adjacent to v, plus a
    third adjacent to those two.

    Afterwards "v in all maximum independent sets of the input" holds iff
    "v in some maximum independent set of the output" does.
    """
    if v not in g.vertices:
        raise SchemaMismatch(f"vertex {v} not in graph")
    base = g._next_id()
    p, q, r = base, base + 1, base + 2
    new_edges = set(g.edges) | {
        frozenset((v, p)), frozenset((v, q)),
        frozenset((p, r)), frozenset((q, r)),
    }
    return SimpleGraph(g.vertices + (p, q, r), frozenset(new_edges))


@dataclass(frozen=True)
class Block:
    """The size-calibration block: vertex t lies in all of its maximum
    independent sets iff the input graph's maximum independent set has
    exactly the calibration size k."""

    graph: SimpleGraph
    t: int
    b: int
    copy_a: tuple[int, ...]
    copy_b: tuple[int, ...]
    indep_k: tuple[int, ...]
    indep_k1: tuple[int, ...]


def block(g: SimpleGraph, k: int) -> Block:
    """Build the calibration block for size k.

    Two disjoint copies of the input graph; an internally edgeless k-set
    joined completely to the first copy and to t; an internally edgeless
    (k+1)-set joined completely to the second copy and to b; and the edge
    t-b. Fresh ids are contiguous: copy A keeps the input ids, then copy B,
    the k-set, the (k+1)-set, t, and b.
    """
    if k < 1:
        raise SchemaMismatch("block needs k >= 1")
    order = tuple(sorted(g.vertices))
    n = len(order)
    base = g._next_id()
    copy_b_of = {v: base + i for i, v in enumerate(order)}
    indep_k = tuple(range(base + n, base + n + k))
    indep_k1 = tuple(range(base + n + k, base + n + 2 * k + 1))
    t = base + n + 2 * k + 1
    b = t + 1

    edges = set(g.edges)
    for e in g.edges:
        u, v = sorted(e)
        edges.add(frozenset((copy_b_of[u], copy_b_of[v])))
    for u in order:
        for w in indep_k:
            edges.add(frozenset((u, w)))
    for u in order:
        for w in indep_k1:
            edges.add(frozenset((copy_b_of[u], w)))
    for w in indep_k:
        edges.add(frozenset((w, t)))
    for w in indep_k1:
        edges.add(frozenset((w, b)))
    edges.add(frozenset((t, b)))

    vertices = order + tuple(copy_b_of[v] for v in order) + indep_k + indep_k1 + (t, b)
    return Block(SimpleGraph(vertices, frozenset(edges)), t, b,
                 order, tuple(copy_b_of[v] for v in order), indep_k, indep_k1)


VERTEX_RELATION = "Vertex"
EDGE_RELATION = "Edges"
GRAPH_ENCODING_CONSTRAINT = f":- {VERTEX_RELATION}(x1), {VERTEX_RELATION}(x2), {EDGE_RELATION}(x1, x2, x3)."


def graph_to_database(g: SimpleGraph) -> tuple[Instance, DenialConstraint]:
    """Encode a graph so that cardinality repairs correspond one-to-one to
    its maximum independent sets.

    One Vertex tuple per vertex; per edge, n padded Edges tuples (n the
    vertex count) with globally distinct third components, which makes
    deleting an edge's copies strictly costlier than deleting an endpoint.
    """
    constraint = parse_constraint(GRAPH_ENCODING_CONSTRAINT, cid="edge_endpoints")
    n = len(g.vertices)
    tuples = [DbTuple.of(VERTEX_RELATION, v) for v in sorted(g.vertices)]
    pad = 1
    for e in sorted(g.edges, key=lambda e: sorted(e)):
        u, v = sorted(e)
        for _ in range(n):
            tuples.append(DbTuple.of(EDGE_RELATION, u, v, pad))
            pad += 1
    schema = Schema.of(**{VERTEX_RELATION: 1, EDGE_RELATION: 3})
    return Instance(schema, frozenset(tuples), {}), constraint
