"""Hard-instance family generation and worst-case greedy/optimal ratio search."""

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import GuardExceededError, NotCoverableError
from models import (
    AlwaysOne,
    FamilySpec,
    GroundVar,
    Instance,
    Item,
    OrOf,
    PartialRealization,
    SearchReport,
    TieBreak,
    dummy_cost_for,
)
from optimal import optimal_cost
from policy import build_greedy_tree, expected_cost, greedy_ratios, tied_maximizers
from realizations import belief_model
from utility import HitOneUtility

logger = logging.getLogger(__name__)

MAX_K = 6
MAX_N = 7
DEFAULT_STEP = 0.001
P_LOW = 0.01
P_HIGH = 0.99
GOLDEN_TOL = 1e-6
COST_TIE_TOL = 1e-12
INV_PHI = (math.sqrt(5) - 1) / 2


def _check_guards(k: int, n: int) -> None:
    if not 1 <= k <= MAX_K:
        raise GuardExceededError(f"k={k} outside 1..{MAX_K}")
    if not 2 <= n <= MAX_N:
        raise GuardExceededError(f"n={n} outside 2..{MAX_N}")


def _mask(indices: Sequence[int]) -> int:
    return sum(1 << (i - 1) for i in indices)


def _indices(mask: int) -> Tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


@lru_cache(maxsize=None)
def _permutation_table(k: int) -> np.ndarray:
    """Row per permutation of {1..k}: the image of every subset bitmask."""
    masks = np.arange(2 ** k)
    rows = []
    for perm in itertools.permutations(range(k)):
        image = np.zeros(2 ** k, dtype=np.int64)
        for src, dst in enumerate(perm):
            image |= ((masks >> src) & 1) << dst
        rows.append(image)
    return np.array(rows)


def _canonical_masks(masks: Sequence[int], k: int) -> Tuple[int, ...]:
    images = np.sort(_permutation_table(k)[:, list(masks)], axis=1)
    return min(tuple(row) for row in images.tolist())


def canonical_form(trigger_sets: Sequence[Sequence[int]], k: int) -> Tuple[int, ...]:
    """
    Symmetry-invariant key of a trigger-set multiset.

    The key is the smallest, over all permutations of the ground variables, of
    the sorted tuple of subset bitmasks. Two members are symmetric exactly when
    their keys are equal.
    """
    return _canonical_masks([_mask(s) for s in trigger_sets], k)


@lru_cache(maxsize=None)
def _canonical_multisets(k: int, size: int) -> Tuple[Tuple[int, ...], ...]:
    # Every orbit of size m contains an extension of a canonical (m-1)-representative.
    if size == 0:
        return ((),)
    found = set()
    for base in _canonical_multisets(k, size - 1):
        for mask in range(1, 2 ** k):
            found.add(_canonical_masks(base + (mask,), k))
    return tuple(sorted(found))


def generate_family(k: int, n: int) -> List[FamilySpec]:
    """
    All members with k ground variables and n items, up to ground-variable symmetry.

    Args:
        k: Number of Bernoulli ground variables
        n: Number of items including the dummy

    Returns:
        list: One FamilySpec per symmetry class of multisets of n-1 non-empty
            subsets of {1..k}, in canonical-key order

    Raises:
        GuardExceededError: If k > MAX_K or n > MAX_N
    """
    _check_guards(k, n)
    members = [
        FamilySpec(k, n, tuple(_indices(m) for m in key))
        for key in _canonical_multisets(k, n - 1)
    ]
    logger.info("Family k=%d n=%d has %d members up to symmetry", k, n, len(members))
    return members


def family_instance(spec: FamilySpec, p: float) -> Instance:
    """Instance of a family member: unit-cost items i1..i(n-1) and dummy d of cost 1/(1-p)."""
    ground_vars = tuple(GroundVar(i, 1.0 - p) for i in range(1, spec.k + 1))
    items = tuple(Item(f"i{j}", 1.0, OrOf(s)) for j, s in enumerate(spec.trigger_sets, start=1))
    items += (Item("d", dummy_cost_for(p), AlwaysOne(), tracks_p=True),)
    return Instance(ground_vars, items, p, HitOneUtility())


def _precedes(before: frozenset, first: str, second: str) -> bool:
    frontier, seen = [first], {first}
    while frontier:
        node = frontier.pop()
        for a, b in before:
            if a == node and b not in seen:
                if b == second:
                    return True
                seen.add(b)
                frontier.append(b)
    return False


def _linear_extension(before: frozenset, item_ids: Sequence[str]) -> TieBreak:
    remaining = list(item_ids)
    order = []
    while remaining:
        for e in remaining:
            if not any(b == e and a in remaining for a, b in before):
                order.append(e)
                remaining.remove(e)
                break
    return TieBreak(tuple(order))


def worst_greedy(instance: Instance) -> Tuple[float, TieBreak]:
    """
    Greedy expected cost maximized over tie-breaking priorities.

    Rather than enumerating all n! priorities, every consistent resolution of
    the greedy ties is explored: picking e among tied items forces e before the
    others, and choices contradicting earlier ones are skipped. Any total order
    extending the worst resolution's constraints replays it.

    Returns:
        tuple: (worst greedy expected cost, a priority achieving it)

    Raises:
        GuardExceededError: If the instance has more than MAX_N items
        NotCoverableError: If greedy runs out of items uncovered
    """
    if instance.n > MAX_N:
        raise GuardExceededError(f"{instance.n} items exceed the tie-enumeration guard of {MAX_N}")
    model = belief_model(instance)
    utility = instance.utility
    best: Dict[str, object] = {"cost": None, "before": frozenset()}

    def explore(frontier: Tuple[PartialRealization, ...], before: frozenset, cost: float) -> None:
        while frontier:
            psi, frontier = frontier[0], frontier[1:]
            if utility.is_covered(psi):
                continue
            ratios = greedy_ratios(instance, psi)
            if not ratios:
                raise NotCoverableError(f"greedy exhausted all items uncovered at {psi}")
            tied = tied_maximizers(ratios)
            options = [e for e in tied if not any(_precedes(before, o, e) for o in tied if o != e)]
            if len(options) > 1:
                for e in options:
                    explore(*_advance(psi, e, tied, frontier, before, cost))
                return
            frontier, before, cost = _advance(psi, options[0], tied, frontier, before, cost)
        if best["cost"] is None or cost > best["cost"] + COST_TIE_TOL:
            best["cost"], best["before"] = cost, before

    def _advance(psi, e, tied, frontier, before, cost):
        dist = model.outcome_distribution(e, psi)
        children = tuple(psi.extend(e, w) for w in sorted(dist))
        constraints = before | {(e, o) for o in tied if o != e}
        return frontier + children, constraints, cost + model.reach_prob(psi) * instance.cost(e)

    explore((PartialRealization.empty(),), frozenset(), 0.0)
    return best["cost"], _linear_extension(best["before"], instance.item_ids)


def worst_tiebreak(instance: Instance, p: float) -> TieBreak:
    """The priority maximizing greedy expected cost at this p."""
    return worst_greedy(instance.with_p(p))[1]


def ratio_at(instance: Instance, p: float, tiebreak: Optional[TieBreak] = None) -> Tuple[float, float, float]:
    """
    Greedy cost, optimal cost and their ratio at one p.

    Args:
        instance: Family instance (dummy costs follow p)
        p: Failure probability in (0, 1)
        tiebreak: Greedy priority; None uses the adversarial priority

    Returns:
        tuple: (greedy_cost, opt_cost, rho)
    """
    probe = instance.with_p(p)
    if tiebreak is None:
        greedy, _ = worst_greedy(probe)
    else:
        greedy = expected_cost(probe, build_greedy_tree(probe, tiebreak))
    opt, _ = optimal_cost(probe)
    return greedy, opt, greedy / opt


def _golden_max(func, low: float, high: float, tol: float) -> List[Tuple[float, float]]:
    probes = []
    c = high - INV_PHI * (high - low)
    d = low + INV_PHI * (high - low)
    fc, fd = func(c), func(d)
    probes += [(c, fc), (d, fd)]
    while high - low > tol:
        if fc >= fd:
            high, d, fd = d, c, fc
            c = high - INV_PHI * (high - low)
            fc = func(c)
            probes.append((c, fc))
        else:
            low, c, fc = c, d, fd
            d = low + INV_PHI * (high - low)
            fd = func(d)
            probes.append((d, fd))
    return probes


def maximize_over_p(instance: Instance, step: float = DEFAULT_STEP, tol: float = GOLDEN_TOL) -> Tuple[float, float]:
    """
    Maximizes the adversarial greedy/optimal ratio over p.

    A grid scan on [P_LOW, P_HIGH] locates the best bracket, then golden-section
    refinement narrows it to width ``tol``. The ratio is only piecewise smooth,
    so the best value ever probed is returned, not the final bracket midpoint.

    Returns:
        tuple: (p_star, rho_star)
    """
    def rho(p: float) -> float:
        return ratio_at(instance, float(p))[2]

    count = int(round((P_HIGH - P_LOW) / step)) + 1
    grid = np.linspace(P_LOW, P_HIGH, count)
    values = [rho(p) for p in grid]
    best_index = int(np.argmax(values))
    p_star, rho_star = float(grid[best_index]), values[best_index]

    low = max(P_LOW, p_star - step)
    high = min(P_HIGH, p_star + step)
    for p, value in _golden_max(rho, low, high, tol):
        if value > rho_star:
            p_star, rho_star = p, value
    logger.debug("Ratio maximized at p=%.9f rho=%.12g", p_star, rho_star)
    return p_star, rho_star


def sweep(instance: Instance, grid: Sequence[float], tiebreak: Optional[TieBreak] = None,
          adversarial: bool = False) -> List[Dict[str, float]]:
    """(p, greedy, opt, rho) rows over a grid of p values."""
    if tiebreak is None and not adversarial:
        tiebreak = TieBreak.default_for(instance)
    rows = []
    for p in grid:
        greedy, opt, rho = ratio_at(instance, float(p), None if adversarial else tiebreak)
        rows.append({"p": float(p), "greedy": greedy, "opt": opt, "rho": rho})
    return rows


def evaluate_member(spec: FamilySpec, step: float = DEFAULT_STEP) -> SearchReport:
    """Maximizes one family member's ratio over p and reports it at p_star."""
    instance = family_instance(spec, 0.5)
    p_star, _ = maximize_over_p(instance, step)
    probe = instance.with_p(p_star)
    greedy, tiebreak = worst_greedy(probe)
    opt, _ = optimal_cost(probe)
    return SearchReport(spec, p_star, greedy, opt, greedy / opt, tiebreak)


def _threads_from_env() -> int:
    raw = os.environ.get("ASC_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("Ignoring non-integer ASC_THREADS=%r", raw)
        return 1


class WorstCaseSearch:
    """
    Searches the hard-instance family for the worst greedy/optimal ratio.

    Members are evaluated independently and fanned out to a process pool; the
    merge is deterministic regardless of worker count.

    Supports environment variables:
    - ASC_THREADS: Maximum worker processes (defaults to the number of cores)
    """

    def __init__(self, threads: Optional[int] = None, step: float = DEFAULT_STEP):
        """
        Args:
            threads: Worker cap; None reads ASC_THREADS
            step: Grid step of the p scan
        """
        self.threads = threads if threads is not None else _threads_from_env()
        self.step = step

    def members(self, k_max: int, n_max: int) -> List[FamilySpec]:
        """Members with k_max ground variables and 2..n_max items, duplicates pruned."""
        _check_guards(k_max, n_max)
        specs = [spec for n in range(2, n_max + 1) for spec in generate_family(k_max, n)]
        kept = [spec for spec in specs if not spec.has_duplicates()]
        if len(kept) != len(specs):
            logger.info("Pruned %d members with duplicate trigger sets (dominated by smaller members)",
                        len(specs) - len(kept))
        return kept

    def search_worst(self, k_max: int, n_max: int) -> List[SearchReport]:
        """
        Maximizes the ratio of every member and sorts the reports.

        Returns:
            list: SearchReports by rho descending, ties by canonical encoding

        Raises:
            GuardExceededError: If k_max > MAX_K or n_max > MAX_N
        """
        specs = self.members(k_max, n_max)
        logger.info("Evaluating %d members with %d worker(s)", len(specs), self.threads)
        if self.threads <= 1 or len(specs) <= 1:
            reports = [evaluate_member(spec, self.step) for spec in specs]
        else:
            with ProcessPoolExecutor(max_workers=self.threads) as pool:
                reports = list(pool.map(evaluate_member, specs, itertools.repeat(self.step),
                                        chunksize=max(1, len(specs) // (4 * self.threads))))
        reports.sort(key=lambda r: (-r.rho, r.instance.encode()))
        if reports:
            logger.info("Best rho %.12g for %s", reports[0].rho, reports[0].instance.encode())
        return reports


def search_worst(k_max: int, n_max: int, step: float = DEFAULT_STEP) -> List[SearchReport]:
    return WorstCaseSearch(step=step).search_worst(k_max, n_max)
