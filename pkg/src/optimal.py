"""Exact optimal adaptive policies by memoized dynamic programming, plus a brute-force oracle."""

import itertools
import logging
from typing import Iterator, List, Sequence, Tuple

from exceptions import NotCoverableError, TooManyItemsError
from models import FullRealization, Instance, PartialRealization, PolicyTree, ValueEntry, ValueTable
from policy import expected_cost, fixed_order_tree, policy_cost_on
from realizations import belief_model, enumerate_realizations

logger = logging.getLogger(__name__)

DP_TIE_TOL = 1e-12
MAX_BRUTE_FORCE_ITEMS = 4
ORDER_MATCH_TOL = 1e-9


def optimal_cost(instance: Instance) -> Tuple[float, ValueTable]:
    """
    Solves V(psi) = min_e c_e + E[V(psi ∪ (e, Phi_e)) | psi], with V = 0 once covered.

    States are canonical partial realizations reachable from ∅ with positive
    probability. Items within DP_TIE_TOL of the minimum are all recorded as
    ties; the lexicographically smallest one is the entry's best item.

    Args:
        instance: The cover instance

    Returns:
        tuple: (V(∅), the full ValueTable)

    Raises:
        NotCoverableError: If some reachable state is uncovered with no items left
        GroundSetTooLargeError: If the realization enumeration exceeds its guard
    """
    model = belief_model(instance)
    utility = instance.utility
    ordered_ids = sorted(instance.item_ids)
    table = ValueTable()

    def value(psi: PartialRealization) -> float:
        if psi in table:
            return table[psi].cost
        if utility.is_covered(psi):
            table.entries[psi] = ValueEntry(0.0, None)
            return 0.0
        candidates = [e for e in ordered_ids if e not in psi.dom]
        if not candidates:
            raise NotCoverableError(f"state {psi} is uncovered with every item observed")
        scores = {}
        for e in candidates:
            dist = model.outcome_distribution(e, psi)
            scores[e] = instance.cost(e) + sum(prob * value(psi.extend(e, w)) for w, prob in dist.items())
        best = min(scores.values())
        ties = tuple(e for e in candidates if scores[e] <= best + DP_TIE_TOL)
        table.entries[psi] = ValueEntry(best, ties[0], ties)
        return best

    root = value(PartialRealization.empty())
    logger.debug("Optimal cost %.12g over %d states", root, len(table))
    return root, table


def extract_policy(table: ValueTable, instance: Instance) -> PolicyTree:
    """Policy tree following the best item of every table entry from ∅."""
    model = belief_model(instance)

    def grow(psi: PartialRealization) -> PolicyTree:
        entry = table[psi]
        if entry.is_terminal:
            return PolicyTree.leaf()
        item = entry.best_item
        dist = model.outcome_distribution(item, psi)
        return PolicyTree(item, tuple((w, grow(psi.extend(item, w))) for w in sorted(dist)))

    return grow(PartialRealization.empty())


def _all_trees(instance: Instance, psi: PartialRealization,
               consistent: List[FullRealization]) -> Iterator[PolicyTree]:
    if instance.utility.is_covered(psi):
        yield PolicyTree.leaf()
        return
    for item_id in instance.item_ids:
        if item_id in psi.dom:
            continue
        branches = {}
        for realization in consistent:
            branches.setdefault(realization[item_id], []).append(realization)
        outcomes = sorted(branches)
        subtrees = [list(_all_trees(instance, psi.extend(item_id, w), branches[w])) for w in outcomes]
        for combo in itertools.product(*subtrees):
            yield PolicyTree(item_id, tuple(zip(outcomes, combo)))


def brute_force_optimal(instance: Instance) -> float:
    """
    Minimum expected cost over every valid policy tree, found exhaustively.

    Each tree is scored as sum_phi p(phi) * C(pi, phi) directly over the full
    realizations; nothing is shared with the dynamic program.

    Raises:
        TooManyItemsError: If the instance has more than MAX_BRUTE_FORCE_ITEMS items
        NotCoverableError: If no valid policy tree exists
    """
    if instance.n > MAX_BRUTE_FORCE_ITEMS:
        raise TooManyItemsError(f"{instance.n} items exceed the brute-force guard of {MAX_BRUTE_FORCE_ITEMS}")
    realizations = enumerate_realizations(instance)
    best = None
    count = 0
    for tree in _all_trees(instance, PartialRealization.empty(), realizations):
        count += 1
        cost = sum(r.probability * policy_cost_on(instance, tree, r) for r in realizations)
        if best is None or cost < best:
            best = cost
    if best is None:
        raise NotCoverableError("no policy tree covers every realization")
    logger.debug("Brute force scored %d policy trees", count)
    return best


def optimal_order_range(instance: Instance, order: Sequence[str], grid: Sequence[float]) -> List[float]:
    """Grid points p at which the fixed-order policy attains the optimal cost."""
    matching = []
    for p in grid:
        probe = instance.with_p(float(p))
        fixed = expected_cost(probe, fixed_order_tree(probe, order))
        opt, _ = optimal_cost(probe)
        if abs(fixed - opt) <= ORDER_MATCH_TOL:
            matching.append(float(p))
    return matching
