"""Independent brute-force oracles used to cross-check the engine.

Everything here enumerates exhaustively (all subsets, all assignments, all
change maps) and stays deliberately separate from the engine's search and
minimization code paths.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from cqa.denial import Const, ConstraintSet, Variable
from cqa.model import Constant, DbTuple, Instance

_MASK_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def masks_and_sizes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _MASK_CACHE:
        masks = np.arange(1 << n, dtype=np.int64)
        sizes = np.zeros(1 << n, dtype=np.int16)
        work = masks.copy()
        while work.any():
            sizes += (work & 1).astype(np.int16)
            work >>= 1
        _MASK_CACHE[n] = (masks, sizes)
    return _MASK_CACHE[n]


def mis_profile(n: int, edge_masks: list[int]) -> tuple[int, int, int]:
    """(alpha, union, intersection) over all maximum independent sets of a
    graph/hypergraph given as bit masks, by scanning all 2^n subsets."""
    masks, sizes = masks_and_sizes(n)
    indep = np.ones(1 << n, dtype=bool)
    for e in edge_masks:
        indep &= (masks & e) != e
    alpha = int(sizes[indep].max())
    chosen = masks[indep & (sizes == alpha)]
    union = int(np.bitwise_or.reduce(chosen))
    inter = int(np.bitwise_and.reduce(chosen))
    return alpha, union, inter


def graph_masks(g) -> tuple[int, list[int]]:
    """Bit masks for a SimpleGraph with contiguous ids 0..n-1."""
    n = len(g.vertices)
    assert tuple(sorted(g.vertices)) == tuple(range(n))
    out = []
    for e in g.edges:
        m = 0
        for v in e:
            m |= 1 << v
        out.append(m)
    return n, out


def hypergraph_masks(h) -> tuple[int, list[int]]:
    """Bit masks for a ConflictHypergraph, bit i = i-th vertex id ascending."""
    ids = sorted(h.vertex_ids)
    pos = {v: i for i, v in enumerate(ids)}
    out = []
    for e in h.edges:
        m = 0
        for v in e:
            m |= 1 << pos[v]
        out.append(m)
    return len(ids), out


def all_graph_edge_sets(n: int):
    """Yield every labeled graph on n vertices as a list of (u, v) pairs."""
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        yield [pairs[i] for i in range(len(pairs)) if bits >> i & 1]


def brute_alpha(n: int, edge_masks: list[int]) -> int:
    return mis_profile(n, edge_masks)[0]


# --- direct constraint evaluation -----------------------------------------


def _term_value(term, env):
    return env[term.name] if isinstance(term, Variable) else term.value


def direct_violations(tuples: list[DbTuple], ics: ConstraintSet) -> set[frozenset[DbTuple]]:
    """Tuple sets that are images of violating assignments, found by plain
    product enumeration (not minimized)."""
    found: set[frozenset[DbTuple]] = set()
    for c in ics:
        pools = [[t for t in tuples if t.relation == atom.relation] for atom in c.atoms]
        for combo in itertools.product(*pools):
            env: dict[str, Constant] = {}
            ok = True
            for atom, t in zip(c.atoms, combo):
                for term, arg in zip(atom.terms, t.args):
                    if isinstance(term, Const):
                        if term.value != arg:
                            ok = False
                    elif env.setdefault(term.name, arg) != arg:
                        ok = False
                    if not ok:
                        break
                if not ok:
                    break
            if ok:
                for comp in c.comparisons:
                    if not comp.holds(_term_value(comp.left, env),
                                      _term_value(comp.right, env)):
                        ok = False
                        break
            if ok:
                found.add(frozenset(combo))
    return found


def direct_consistent(tuples, ics: ConstraintSet) -> bool:
    return not direct_violations(list(tuples), ics)


def minimize_masks(masks) -> list[int]:
    out: list[int] = []
    for m in sorted(set(masks), key=lambda m: bin(m).count("1")):
        if not any(k & m == k for k in out):
            out.append(m)
    return out


# --- brute-force repairs ----------------------------------------------------


def brute_tuple_repairs(instance: Instance, ics: ConstraintSet):
    """All S-, C-, and WC-repairs by scanning all 2^|D| subsets.

    Returns three lists of retained-tuple frozensets.
    """
    order = instance.canonical_tuples()
    n = len(order)
    idx = {t: i for i, t in enumerate(order)}
    witnesses = minimize_masks(
        sum(1 << idx[t] for t in vs) for vs in direct_violations(order, ics))

    consistent = [m for m in range(1 << n)
                  if all(w & m != w for w in witnesses)]
    cons_set = set(consistent)
    full = (1 << n) - 1

    def to_tuples(mask: int) -> frozenset[DbTuple]:
        return frozenset(order[i] for i in range(n) if mask >> i & 1)

    s_masks = []
    for m in consistent:
        rest = full & ~m
        maximal = True
        while rest:
            b = rest & -rest
            if (m | b) in cons_set:
                maximal = False
                break
            rest ^= b
        if maximal:
            s_masks.append(m)

    best_card = max((bin(m).count("1") for m in consistent), default=0)
    c_masks = [m for m in s_masks if bin(m).count("1") == best_card]

    def mask_weight(m: int) -> Fraction:
        return sum((instance.weight(order[i]) for i in range(n) if m >> i & 1),
                   Fraction(0))

    best_weight = max((mask_weight(m) for m in consistent), default=Fraction(0))
    wc_masks = [m for m in s_masks if mask_weight(m) == best_weight]

    return ([to_tuples(m) for m in s_masks],
            [to_tuples(m) for m in c_masks],
            [to_tuples(m) for m in wc_masks])


def brute_a_repairs(instance: Instance, ics: ConstraintSet,
                    candidates: list[Constant], weight_fn):
    """All cost-minimal consistent change maps, enumerating every cell of
    every tuple (no pruning). Returns (cost, list of change frozensets)
    where each change is (tuple, attr_index, new_value); None if no map
    restores consistency."""
    order = instance.canonical_tuples()
    cells = [(t, i) for t in order for i in range(t.arity)]
    options = []
    for t, i in cells:
        opts = [None] + [v for v in candidates if v != t.args[i]]
        options.append(opts)
    best_cost = None
    best_maps = []
    for combo in itertools.product(*options):
        changes = tuple((cell[0], cell[1], v)
                        for cell, v in zip(cells, combo) if v is not None)
        try:
            cost = sum((weight_fn(t, i, v) for t, i, v in changes), Fraction(0))
        except ValueError:
            continue
        if best_cost is not None and cost > best_cost:
            continue
        rewritten = {}
        for t in order:
            args = list(t.args)
            for ct, ci, cv in changes:
                if ct == t:
                    args[ci] = cv
            rewritten.setdefault(DbTuple(t.relation, tuple(args)), None)
        if direct_consistent(rewritten.keys(), ics):
            if best_cost is None or cost < best_cost:
                best_cost = cost
                best_maps = [frozenset(changes)]
            elif cost == best_cost:
                best_maps.append(frozenset(changes))
    if best_cost is None:
        return None
    return best_cost, best_maps


# --- query answers over enumerated repairs ---------------------------------


def repair_rows(retained: frozenset[DbTuple], relation: str) -> frozenset[tuple]:
    return frozenset(t.args for t in retained if t.relation == relation)


def certain_open_atom(repairs: list[frozenset[DbTuple]], relation: str) -> frozenset[tuple]:
    rows = [repair_rows(r, relation) for r in repairs]
    out = rows[0]
    for r in rows[1:]:
        out &= r
    return out


def possible_open_atom(repairs: list[frozenset[DbTuple]], relation: str) -> frozenset[tuple]:
    out = frozenset()
    for r in repairs:
        out |= repair_rows(r, relation)
    return out
