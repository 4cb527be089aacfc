"""Exact combinatorial solvers over conflict hypergraphs.

Maximum (weighted) independent set, maximal/maximum independent-set
enumeration, bounded-depth minimum hitting set, and the membership tests
"in all / in some maximum independent sets". Everything is exact; optimal
witnesses are tie-broken to the lexicographically least vertex-id set, so
outputs are reproducible byte for byte.

Internally vertices are mapped to bits and hyperedges to integer masks;
the public functions accept and return plain vertex ids.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded, SchemaMismatch
from .hypergraph import ConflictHypergraph


@dataclass(frozen=True)
class SolveBudget:
    """Caps for the exact solvers.

    max_vertices guards the independent-set solvers; max_depth is the
    default hitting-set depth cap; time_limit (seconds) aborts long
    searches. The bounded hitting-set path is depth-capped by construction
    and ignores max_vertices.
    """

    max_vertices: int | None = 10_000
    max_depth: int | None = None
    time_limit: float | None = None

    def check_vertices(self, n: int) -> None:
        if self.max_vertices is not None and n > self.max_vertices:
            raise BudgetExceeded(f"{n} vertices exceeds budget {self.max_vertices}")


DEFAULT_BUDGET = SolveBudget()


@dataclass
class SolveStats:
    """Search-tree statistics, filled in when passed to a solver."""

    nodes: int = 0
    max_depth: int = 0

    def visit(self, depth: int) -> None:
        self.nodes += 1
        if depth > self.max_depth:
            self.max_depth = depth


@dataclass(frozen=True)
class AlphaResult:
    size: int
    witness: frozenset[int]


@dataclass(frozen=True)
class WeightedAlphaResult:
    weight: Fraction
    witness: frozenset[int]


@dataclass(frozen=True)
class HittingSetResult:
    size: int
    witness: frozenset[int]


class _Deadline:
    __slots__ = ("at",)

    def __init__(self, budget: SolveBudget):
        self.at = None if budget.time_limit is None else time.monotonic() + budget.time_limit

    def check(self) -> None:
        if self.at is not None and time.monotonic() > self.at:
            raise BudgetExceeded("time limit exceeded")


def _prepare(h: ConflictHypergraph) -> tuple[list[int], dict[int, int], list[int], int]:
    """Map vertex ids to bit positions in ascending id order."""
    ids = sorted(h.vertex_ids)
    pos = {vid: i for i, vid in enumerate(ids)}
    edges = sorted(h.edges, key=lambda e: (len(e), sorted(e)))
    masks = []
    for e in edges:
        m = 0
        for v in e:
            m |= 1 << pos[v]
        masks.append(m)
    full = (1 << len(ids)) - 1
    return ids, pos, masks, full


def _mask_to_ids(mask: int, ids: Sequence[int]) -> frozenset[int]:
    return frozenset(ids[i] for i in range(len(ids)) if mask >> i & 1)


def _alpha_size(edge_masks: list[int], full: int,
                stats: SolveStats | None = None,
                deadline: _Deadline | None = None) -> int:
    """Exact maximum independent-set size.

    Branch on a free vertex of an active hyperedge (one that no excluded
    vertex deactivates yet), include-first, pruning on the trivial bound
    |in| + |free|.
    """
    best = 0

    def rec(in_mask: int, free: int, in_count: int, depth: int) -> None:
        nonlocal best
        if stats is not None:
            stats.visit(depth)
        if deadline is not None and not depth % 64:
            deadline.check()
        total = in_count + (free).bit_count()
        if total <= best:
            return
        union = in_mask | free
        chosen_free = 0
        chosen_nf = 1 << 62
        for e in edge_masks:
            if e & ~union:
                continue
            f = e & free
            nf = f.bit_count()
            if nf < chosen_nf:
                chosen_free, chosen_nf = f, nf
                if nf == 1:
                    break
        if not chosen_free:
            best = total
            return
        x = chosen_free & -chosen_free
        new_in = in_mask | x
        for e in edge_masks:
            if e & x and not e & ~new_in:
                break
        else:
            rec(new_in, free & ~x, in_count + 1, depth + 1)
        rec(in_mask, free & ~x, in_count, depth + 1)

    rec(0, full, 0, 0)
    return best


def _alpha_weighted_value(edge_masks: list[int], full: int,
                          wts: Sequence[Fraction]) -> Fraction:
    zero = Fraction(0)
    best = zero

    def weight_of(mask: int) -> Fraction:
        w = zero
        while mask:
            b = mask & -mask
            w += wts[b.bit_length() - 1]
            mask ^= b
        return w

    def rec(in_mask: int, free: int, in_weight: Fraction, free_weight: Fraction) -> None:
        nonlocal best
        if in_weight + free_weight <= best:
            return
        union = in_mask | free
        chosen_free = 0
        chosen_nf = 1 << 62
        for e in edge_masks:
            if e & ~union:
                continue
            f = e & free
            nf = f.bit_count()
            if nf < chosen_nf:
                chosen_free, chosen_nf = f, nf
                if nf == 1:
                    break
        if not chosen_free:
            best = in_weight + free_weight
            return
        x = chosen_free & -chosen_free
        wx = wts[x.bit_length() - 1]
        new_in = in_mask | x
        for e in edge_masks:
            if e & x and not e & ~new_in:
                break
        else:
            rec(new_in, free & ~x, in_weight + wx, free_weight - wx)
        rec(in_mask, free & ~x, in_weight, free_weight - wx)

    rec(0, full, zero, weight_of(full))
    return best


def _restrict_masks(edge_masks: list[int], full: int, bit: int) -> tuple[list[int], int]:
    return [e for e in edge_masks if not e & bit], full & ~bit


def _condition_masks(edge_masks: list[int], full: int, bit: int) -> tuple[list[int], int]:
    """Mask-level analogue of ConflictHypergraph.condition_on; the caller
    must rule singleton edges out first."""
    forced = 0
    for e in edge_masks:
        if e & bit and e.bit_count() == 2:
            forced |= e & ~bit
    gone = forced | bit
    out = []
    for e in edge_masks:
        if e & bit:
            if e.bit_count() == 2:
                continue
            e &= ~bit
        if e & gone:
            continue
        out.append(e)
    return out, full & ~gone


def _singleton_bits(edge_masks: list[int]) -> int:
    bits = 0
    for e in edge_masks:
        if e.bit_count() == 1:
            bits |= e
    return bits


def _lex_least_maximum(edge_masks: list[int], full: int, alpha_value: int) -> int:
    """Greedy refinement: walk bits in ascending order and keep a bit iff
    some maximum independent set extends the kept prefix through it."""
    chosen = 0
    target = alpha_value
    edges, avail = edge_masks, full
    bit = 1
    while avail >> (bit.bit_length() - 1):
        if avail & bit:
            if target == 0:
                break
            if any(e == bit for e in edges):
                edges, avail = _restrict_masks(edges, avail, bit)
            else:
                cond_edges, cond_avail = _condition_masks(edges, avail, bit)
                if 1 + _alpha_size(cond_edges, cond_avail) == target:
                    chosen |= bit
                    target -= 1
                    edges, avail = cond_edges, cond_avail
                else:
                    edges, avail = _restrict_masks(edges, avail, bit)
        bit <<= 1
    return chosen


def _lex_least_maximum_weighted(edge_masks: list[int], full: int,
                                wts: Sequence[Fraction], best: Fraction) -> int:
    chosen = 0
    target = best
    edges, avail = edge_masks, full
    bit = 1
    while avail >> (bit.bit_length() - 1):
        if avail & bit:
            if any(e == bit for e in edges):
                edges, avail = _restrict_masks(edges, avail, bit)
            else:
                wx = wts[bit.bit_length() - 1]
                cond_edges, cond_avail = _condition_masks(edges, avail, bit)
                if wx + _alpha_weighted_value(cond_edges, cond_avail, wts) == target:
                    chosen |= bit
                    target -= wx
                    edges, avail = cond_edges, cond_avail
                else:
                    edges, avail = _restrict_masks(edges, avail, bit)
        bit <<= 1
    return chosen


def alpha(h: ConflictHypergraph,
          budget: SolveBudget = DEFAULT_BUDGET,
          stats: SolveStats | None = None) -> AlphaResult:
    """Exact maximum independent-set size, with the lexicographically least
    maximum set as witness."""
    budget.check_vertices(len(h.vertex_ids))
    ids, _, masks, full = _prepare(h)
    deadline = _Deadline(budget)
    size = _alpha_size(masks, full, stats, deadline)
    witness = _lex_least_maximum(masks, full, size)
    return AlphaResult(size, _mask_to_ids(witness, ids))


def alpha_size(h: ConflictHypergraph, budget: SolveBudget = DEFAULT_BUDGET) -> int:
    """As alpha, skipping the witness refinement."""
    budget.check_vertices(len(h.vertex_ids))
    ids, _, masks, full = _prepare(h)
    return _alpha_size(masks, full, deadline=_Deadline(budget))


def alpha_weighted(h: ConflictHypergraph,
                   weights: Mapping[int, Fraction],
                   budget: SolveBudget = DEFAULT_BUDGET) -> WeightedAlphaResult:
    """Maximum-weight independent set (weights are positive rationals keyed
    by vertex id), with the lexicographically least optimal witness."""
    budget.check_vertices(len(h.vertex_ids))
    ids, _, masks, full = _prepare(h)
    wts = [Fraction(weights.get(v, 1)) for v in ids]
    best = _alpha_weighted_value(masks, full, wts)
    witness = _lex_least_maximum_weighted(masks, full, wts, best)
    return WeightedAlphaResult(best, _mask_to_ids(witness, ids))


def enumerate_maximal_is(h: ConflictHypergraph,
                         budget: SolveBudget = DEFAULT_BUDGET) -> list[frozenset[int]]:
    """All set-maximal independent sets, each once, sorted canonically."""
    budget.check_vertices(len(h.vertex_ids))
    ids, _, masks, full = _prepare(h)
    deadline = _Deadline(budget)
    candidates: set[int] = set()

    def rec(in_mask: int, free: int) -> None:
        deadline.check()
        union = in_mask | free
        chosen_free = 0
        chosen_nf = 1 << 62
        for e in masks:
            if e & ~union:
                continue
            f = e & free
            nf = f.bit_count()
            if nf < chosen_nf:
                chosen_free, chosen_nf = f, nf
                if nf == 1:
                    break
        if not chosen_free:
            candidates.add(union)
            return
        x = chosen_free & -chosen_free
        new_in = in_mask | x
        for e in masks:
            if e & x and not e & ~new_in:
                break
        else:
            rec(new_in, free & ~x)
        rec(in_mask, free & ~x)

    rec(0, full)

    def is_maximal(s: int) -> bool:
        rest = full & ~s
        while rest:
            b = rest & -rest
            grown = s | b
            if not any(e & b and not e & ~grown for e in masks):
                return False
            rest ^= b
        return True

    keep = sorted((s for s in candidates if is_maximal(s)),
                  key=lambda s: sorted(_mask_to_ids(s, ids)))
    return [_mask_to_ids(s, ids) for s in keep]


def enumerate_maximum_is(h: ConflictHypergraph,
                         budget: SolveBudget = DEFAULT_BUDGET) -> list[frozenset[int]]:
    """All maximum-cardinality independent sets, sorted canonically."""
    target = alpha_size(h, budget)
    return [s for s in enumerate_maximal_is(h, budget) if len(s) == target]


def _hs_decision(edge_masks: list[int], k: int) -> bool:
    """Is there a hitting set of size <= k? Bounded search tree branching
    on the vertices of a smallest unhit hyperedge."""
    if not edge_masks:
        return True
    if k <= 0:
        return False
    e = min(edge_masks, key=lambda m: (m.bit_count(), m))
    while e:
        b = e & -e
        if _hs_decision([f for f in edge_masks if not f & b], k - 1):
            return True
        e ^= b
    return False


def hitting_set_at_most(h: ConflictHypergraph | Iterable[frozenset[int]], k: int) -> bool:
    """Decision form: does a hitting set of size <= k exist?"""
    masks, _ = _edge_masks_of(h)
    return _hs_decision(masks, k)


def _edge_masks_of(h) -> tuple[list[int], list[int]]:
    if isinstance(h, ConflictHypergraph):
        ids, _, masks, _ = _prepare(h)
        return masks, ids
    edges = sorted({frozenset(e) for e in h}, key=lambda e: (len(e), sorted(e)))
    ids = sorted({v for e in edges for v in e})
    pos = {v: i for i, v in enumerate(ids)}
    masks = []
    for e in edges:
        m = 0
        for v in e:
            m |= 1 << pos[v]
        masks.append(m)
    return masks, ids


def min_hitting_set(h: ConflictHypergraph | Iterable[frozenset[int]],
                    k_max: int,
                    stats: SolveStats | None = None) -> HittingSetResult | None:
    """Minimum hitting set if its size is <= k_max, else None.

    Bounded search tree over the <= d vertices of a smallest unhit edge,
    depth capped at k_max; the witness is the lexicographically least
    optimum, rebuilt greedily from the decision procedure.
    """
    masks, ids = _edge_masks_of(h)
    best: int | None = None

    def rec(edges: list[int], count: int, depth: int) -> None:
        nonlocal best
        if stats is not None:
            stats.visit(depth)
        limit = k_max if best is None else min(k_max, best - 1)
        if count > limit:
            return
        if not edges:
            best = count
            return
        if count == limit:
            return
        e = min(edges, key=lambda m: (m.bit_count(), m))
        while e:
            b = e & -e
            rec([f for f in edges if not f & b], count + 1, depth + 1)
            e ^= b

    rec(masks, 0, 0)
    if best is None:
        return None

    chosen: list[int] = []
    edges = masks
    remaining = best
    for i, vid in enumerate(ids):
        if not edges:
            break
        b = 1 << i
        if not any(e & b for e in edges):
            continue
        rest = [e for e in edges if not e & b]
        if _hs_decision(rest, remaining - 1):
            chosen.append(vid)
            edges = rest
            remaining -= 1
    return HittingSetResult(best, frozenset(chosen))


def in_all_maximum_is(h: ConflictHypergraph, v: int,
                      budget: SolveBudget = DEFAULT_BUDGET) -> bool:
    """True iff v belongs to every maximum independent set: deleting v must
    lower the maximum size (equivalently the minimum hitting-set sizes of h
    and h minus v agree)."""
    if v not in h.vertex_set:
        raise SchemaMismatch(f"vertex {v} not in hypergraph")
    budget.check_vertices(len(h.vertex_ids))
    ids, pos, masks, full = _prepare(h)
    bit = 1 << pos[v]
    a = _alpha_size(masks, full)
    r_masks, r_full = _restrict_masks(masks, full, bit)
    return _alpha_size(r_masks, r_full) == a - 1


def in_some_maximum_is(h: ConflictHypergraph, v: int,
                       budget: SolveBudget = DEFAULT_BUDGET) -> bool:
    """True iff some maximum independent set contains v: v must avoid
    singleton edges and conditioning on it must cost exactly one."""
    if v not in h.vertex_set:
        raise SchemaMismatch(f"vertex {v} not in hypergraph")
    budget.check_vertices(len(h.vertex_ids))
    ids, pos, masks, full = _prepare(h)
    bit = 1 << pos[v]
    if _singleton_bits(masks) & bit:
        return False
    a = _alpha_size(masks, full)
    c_masks, c_full = _condition_masks(masks, full, bit)
    return 1 + _alpha_size(c_masks, c_full) == a
