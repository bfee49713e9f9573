"""Realization enumeration, posteriors and conditional marginal benefits."""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List

import numpy as np

from exceptions import ConditioningOnNullError, GroundSetTooLargeError, ItemAlreadyObservedError
from models import AlwaysOne, FullRealization, Instance, OrOf, OUTCOMES, PartialRealization

logger = logging.getLogger(__name__)

MAX_GROUND_VARS = 24
PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RealizationTable:
    """Distinct item-outcome vectors (rows, columns in item order) with their probabilities."""
    item_ids: tuple
    outcomes: np.ndarray
    probs: np.ndarray


def _ground_product(instance: Instance):
    k = len(instance.ground_vars)
    if k > MAX_GROUND_VARS:
        raise GroundSetTooLargeError(
            f"{k} ground variables exceed the enumeration guard of {MAX_GROUND_VARS}"
        )
    codes = np.arange(2 ** k, dtype=np.int64)
    probs = np.ones(2 ** k)
    bit_of = {}
    for bit, var in enumerate(instance.ground_vars):
        bit_of[var.index] = bit
        is_one = (codes >> bit) & 1 == 1
        probs *= np.where(is_one, var.success_prob, 1.0 - var.success_prob)

    columns = []
    for item in instance.items:
        if isinstance(item.trigger, AlwaysOne):
            columns.append(np.ones(2 ** k, dtype=np.int8))
        else:
            mask = sum(1 << bit_of[i] for i in item.trigger.indices)
            columns.append(((codes & mask) != 0).astype(np.int8))
    outcomes = np.stack(columns, axis=1) if columns else np.zeros((2 ** k, 0), dtype=np.int8)
    return outcomes, probs


@lru_cache(maxsize=1024)
def realization_table(instance: Instance) -> RealizationTable:
    """
    Pushes the prior through the item triggers and merges identical item vectors.

    Args:
        instance: Instance with ground variables or an explicit distribution

    Returns:
        RealizationTable: Positive-probability item-outcome vectors, sorted

    Raises:
        GroundSetTooLargeError: If more than MAX_GROUND_VARS ground variables
    """
    if instance.distribution is not None:
        outcomes = np.array([v for v, _ in instance.distribution], dtype=np.int8).reshape(-1, instance.n)
        probs = np.array([pr for _, pr in instance.distribution], dtype=float)
    else:
        outcomes, probs = _ground_product(instance)

    unique, inverse = np.unique(outcomes, axis=0, return_inverse=True)
    merged = np.bincount(inverse.ravel(), weights=probs, minlength=len(unique))
    keep = merged > 0
    logger.debug("Enumerated %d ground outcomes into %d realizations", len(probs), int(keep.sum()))
    return RealizationTable(instance.item_ids, unique[keep], merged[keep])


def enumerate_realizations(instance: Instance) -> List[FullRealization]:
    """Returns every positive-probability full realization with its exact probability."""
    table = realization_table(instance)
    return [
        FullRealization(tuple(zip(table.item_ids, (int(w) for w in row))), float(prob))
        for row, prob in zip(table.outcomes, table.probs)
    ]


def feasible_partials(instance: Instance) -> List[PartialRealization]:
    """
    Lists every psi with Pr[psi ⪯ Phi] > 0.

    Returns:
        list: Restrictions of every positive-probability realization,
            deduplicated and ordered by size then pairs
    """
    table = realization_table(instance)
    ids = table.item_ids
    seen = set()
    for row in table.outcomes:
        for size in range(len(ids) + 1):
            for cols in itertools.combinations(range(len(ids)), size):
                seen.add(PartialRealization(tuple((ids[j], int(row[j])) for j in cols)))
    return sorted(seen, key=lambda psi: (len(psi), psi.pairs))


def is_subrealization(psi: PartialRealization, psi_prime: PartialRealization) -> bool:
    """True iff every pair of psi appears in psi_prime (psi ⪯ psi_prime)."""
    return psi.is_subrealization(psi_prime)


def are_disjoint(psi: PartialRealization, psi_prime: PartialRealization) -> bool:
    """True iff no full realization extends both partial realizations."""
    return psi.is_disjoint(psi_prime)


class BeliefModel:
    """
    Conditional probabilities and marginal benefits for one instance.

    Reach probabilities Pr[psi ⪯ Phi] are memoized per partial realization, so
    the policy builders, the optimal solver and the checker share the work.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.utility = instance.utility
        self.table = realization_table(instance)
        self._column = {e: j for j, e in enumerate(self.table.item_ids)}
        self._hits = {
            (e, w): self.table.outcomes[:, j] == w
            for e, j in self._column.items()
            for w in OUTCOMES
        }
        self._reach: Dict[PartialRealization, float] = {}
        self._delta: Dict[tuple, float] = {}

    def mask(self, psi: PartialRealization) -> np.ndarray:
        mask = np.ones(len(self.table.probs), dtype=bool)
        for e, w in psi:
            mask &= self._hits[(e, w)]
        return mask

    def reach_prob(self, psi: PartialRealization) -> float:
        """Pr[psi ⪯ Phi]."""
        cached = self._reach.get(psi)
        if cached is None:
            cached = float(self.table.probs[self.mask(psi)].sum())
            self._reach[psi] = cached
        return cached

    def is_feasible(self, psi: PartialRealization) -> bool:
        return self.reach_prob(psi) > 0.0

    def _require_feasible(self, psi: PartialRealization) -> float:
        reach = self.reach_prob(psi)
        if reach <= 0.0:
            raise ConditioningOnNullError(f"Pr[{psi} ⪯ Phi] = 0")
        return reach

    def posterior_prob(self, psi: PartialRealization, event: Callable[[FullRealization], bool]) -> float:
        reach = self._require_feasible(psi)
        mask = self.mask(psi)
        hit = 0.0
        for row, prob in zip(self.table.outcomes[mask], self.table.probs[mask]):
            realization = FullRealization(tuple(zip(self.table.item_ids, (int(w) for w in row))), float(prob))
            if event(realization):
                hit += float(prob)
        return hit / reach

    def outcome_distribution(self, item_id: str, psi: PartialRealization) -> Dict[int, float]:
        """Pr[Phi_e = w | psi] for the outcomes w with positive probability."""
        if item_id in psi.dom:
            raise ItemAlreadyObservedError(f"item {item_id} already observed in {psi}")
        reach = self._require_feasible(psi)
        dist = {}
        for w in OUTCOMES:
            joint = self.reach_prob(psi.extend(item_id, w))
            if joint > 0.0:
                dist[w] = joint / reach
        return dist

    def marginal_benefit(self, item_id: str, psi: PartialRealization) -> float:
        """Delta(e | psi) = sum_w Pr[Phi_e = w | psi] * (f(psi ∪ (e, w)) - f(psi))."""
        key = (item_id, psi)
        cached = self._delta.get(key)
        if cached is not None:
            return cached
        dist = self.outcome_distribution(item_id, psi)
        base = self.utility.evaluate(psi)
        delta = sum(prob * (self.utility.evaluate(psi.extend(item_id, w)) - base) for w, prob in dist.items())
        self._delta[key] = delta
        return delta


@lru_cache(maxsize=256)
def belief_model(instance: Instance) -> BeliefModel:
    return BeliefModel(instance)


def reach_prob(instance: Instance, psi: PartialRealization) -> float:
    return belief_model(instance).reach_prob(psi)


def posterior_prob(instance: Instance, psi: PartialRealization,
                   event: Callable[[FullRealization], bool]) -> float:
    """
    Computes Pr[event | psi ⪯ Phi] over the merged realizations.

    Raises:
        ConditioningOnNullError: If Pr[psi ⪯ Phi] = 0
    """
    return belief_model(instance).posterior_prob(psi, event)


def outcome_distribution(instance: Instance, item_id: str, psi: PartialRealization) -> Dict[int, float]:
    return belief_model(instance).outcome_distribution(item_id, psi)


def marginal_benefit(instance: Instance, item_id: str, psi: PartialRealization) -> float:
    """
    Conditional expected marginal benefit of selecting an item after observing psi.

    Raises:
        ItemAlreadyObservedError: If the item is already in dom(psi)
        ConditioningOnNullError: If Pr[psi ⪯ Phi] = 0
    """
    return belief_model(instance).marginal_benefit(item_id, psi)
