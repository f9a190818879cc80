"""Discriminative landmark-set selection.

Given n candidate routes and per-landmark significances, find a landmark
set that is discriminative to all candidates, has size k in
[ceil(log2 n), n], and maximizes mean significance. Three solvers share
the same feasible region and must return the same optimum value:

  * brute_force_select - exhaustive subset enumeration (the oracle)
  * ils_select - enumerate simplest discriminative sets bottom-up, then
    top up each with the highest-significance remaining landmarks
  * greedy_select - depth-first expansion in descending significance
    order, pruning supersets of any discriminative set reached

Every simplest discriminative set is contained in some optimal set's
closure, so topping up simplest sets recovers the exact optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import Infeasible, TooLarge
from .model import CandidateSet, beneficial_landmarks, is_discriminative

BRUTE_FORCE_GUARD = 20


@dataclass
class SelectionStats:
    nodes_expanded: int = 0
    sets_tested: int = 0


@dataclass(frozen=True)
class SelectionProblem:
    routes: CandidateSet
    significance: dict[str, float]
    relax_min_size: bool = False
    beneficial: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if len(self.routes) < 2:
            raise ValueError("selection needs at least two candidate routes")
        ben = beneficial_landmarks(self.routes)
        # Descending significance, ties by id ascending; this order is the
        # backbone of duplicate-free enumeration in both fast algorithms.
        ordered = tuple(sorted(ben, key=lambda l: (-self.significance[l], l)))
        object.__setattr__(self, "beneficial", ordered)

    @property
    def n_routes(self) -> int:
        return len(self.routes)

    @property
    def min_size(self) -> int:
        return 1 if self.relax_min_size else math.ceil(math.log2(self.n_routes))

    @property
    def max_size(self) -> int:
        return self.n_routes


@dataclass(frozen=True)
class SelectionResult:
    chosen: frozenset[str]
    value: float
    algorithm: str
    stats: SelectionStats


def _mean_sig(ids, sig) -> float:
    return sum(sig[l] for l in ids) / len(ids)


def _better(value, ids, best_value, best_ids) -> bool:
    """Tie-break: higher value, then smaller set, then lexicographic ids."""
    if best_ids is None:
        return True
    if value != best_value:
        return value > best_value
    if len(ids) != len(best_ids):
        return len(ids) < len(best_ids)
    return tuple(sorted(ids)) < tuple(sorted(best_ids))


def brute_force_select(p: SelectionProblem) -> SelectionResult:
    """Test every non-empty subset of the beneficial landmarks.

    Exponential; guarded to at most BRUTE_FORCE_GUARD beneficial
    landmarks. Kept as the correctness oracle for the fast algorithms.
    """
    ben = p.beneficial
    if len(ben) > BRUTE_FORCE_GUARD:
        raise TooLarge(f"{len(ben)} beneficial landmarks exceeds the brute-force guard")
    stats = SelectionStats()
    best_ids = None
    best_value = -math.inf
    for mask in range(1, 1 << len(ben)):
        subset = frozenset(ben[i] for i in range(len(ben)) if mask >> i & 1)
        stats.sets_tested += 1
        if not p.min_size <= len(subset) <= p.max_size:
            continue
        if not is_discriminative(subset, p.routes):
            continue
        value = _mean_sig(subset, p.significance)
        if _better(value, subset, best_value, best_ids):
            best_value, best_ids = value, subset
    if best_ids is None:
        raise Infeasible("no discriminative subset within the size range")
    return SelectionResult(best_ids, best_value, "brute", stats)


def enumerate_simplest_sets(p: SelectionProblem,
                            stats: SelectionStats | None = None) -> dict[int, list[frozenset[str]]]:
    """All simplest discriminative sets, grouped by size.

    Bottom-up: start from singletons; expand a non-discriminative set only
    with landmarks later in the descending-significance order (each subset
    is generated exactly once); a discriminative set is never expanded,
    since no strict superset can be simplest.
    """
    if stats is None:
        stats = SelectionStats()
    ben = p.beneficial
    out: dict[int, list[frozenset[str]]] = {}
    frontier = [(i,) for i in range(len(ben))]
    while frontier:
        next_frontier = []
        for combo in frontier:
            subset = frozenset(ben[i] for i in combo)
            stats.sets_tested += 1
            if is_discriminative(subset, p.routes):
                # A set whose chain parent was non-discriminative can still
                # have other discriminative (k-1)-subsets; re-check minimality.
                if all(not is_discriminative(subset - {l}, p.routes) for l in subset):
                    out.setdefault(len(subset), []).append(subset)
                continue
            stats.nodes_expanded += 1
            last = combo[-1]
            for j in range(last + 1, len(ben)):
                next_frontier.append(combo + (j,))
        frontier = next_frontier
    return out


def _fill_to_size(base: frozenset[str], k: int, p: SelectionProblem) -> frozenset[str] | None:
    """Superset of base of size k with maximal significance sum, scanning
    the pre-sorted beneficial order; None if not enough landmarks."""
    need = k - len(base)
    if need < 0:
        return None
    extra = []
    for l in p.beneficial:
        if len(extra) == need:
            break
        if l not in base:
            extra.append(l)
    if len(extra) < need:
        return None
    return base | frozenset(extra)


def _best_filled(base: frozenset[str], p: SelectionProblem,
                 best_value: float, best_ids: frozenset[str] | None):
    """Fold the best top-up of base over every feasible target size."""
    lo = max(len(base), p.min_size)
    for k in range(lo, p.max_size + 1):
        filled = _fill_to_size(base, k, p)
        if filled is None:
            break
        value = _mean_sig(filled, p.significance)
        if _better(value, filled, best_value, best_ids):
            best_value, best_ids = value, filled
    return best_value, best_ids


def ils_select(p: SelectionProblem) -> SelectionResult:
    """Incremental selection via simplest discriminative sets.

    Every optimal set contains a simplest discriminative subset, and the
    best size-k superset of a fixed base is the base plus the k-|base|
    most significant remaining landmarks; maximizing the topped-up value
    over all simplest sets and feasible sizes is therefore exact.
    """
    stats = SelectionStats()
    simplest = enumerate_simplest_sets(p, stats)
    best_ids = None
    best_value = -math.inf
    for size in sorted(simplest):
        if size > p.max_size:
            continue
        for base in simplest[size]:
            best_value, best_ids = _best_filled(base, p, best_value, best_ids)
    if best_ids is None:
        raise Infeasible("no simplest discriminative set within the size range")
    return SelectionResult(best_ids, best_value, "ils", stats)


def greedy_select(p: SelectionProblem) -> SelectionResult:
    """Depth-first expansion in descending significance order.

    Extends only non-discriminative sets; on reaching a discriminative set
    it scores that set and its best top-ups, updates the incumbent, and
    prunes the whole superset subtree.
    """
    stats = SelectionStats()
    ben = p.beneficial
    best: list = [-math.inf, None]

    def expand(combo: tuple[int, ...]):
        stats.nodes_expanded += 1
        last = combo[-1] if combo else -1
        for j in range(last + 1, len(ben)):
            child = combo + (j,)
            subset = frozenset(ben[i] for i in child)
            stats.sets_tested += 1
            if is_discriminative(subset, p.routes):
                best[0], best[1] = _best_filled(subset, p, best[0], best[1])
            else:
                expand(child)

    expand(())
    if best[1] is None:
        raise Infeasible("no discriminative subset within the size range")
    return SelectionResult(best[1], best[0], "greedy", stats)


def select(p: SelectionProblem, algorithm: str = "greedy") -> SelectionResult:
    solvers = {"brute": brute_force_select, "ils": ils_select, "greedy": greedy_select}
    try:
        return solvers[algorithm](p)
    except KeyError:
        raise ValueError(f"unknown algorithm: {algorithm}") from None
