"""Exhaustive verification of monotonicity, coverability and adaptive submodularity."""

import itertools
import logging
from typing import Iterator, List, Sequence, Tuple

from models import (
    CheckReport,
    CoverabilityWitness,
    Instance,
    MonotonicityWitness,
    PartialRealization,
    SubmodularityWitness,
)
from realizations import belief_model, enumerate_realizations, feasible_partials

logger = logging.getLogger(__name__)

VIOLATION_TOL = 1e-9


def _subrealizations(psi_prime: PartialRealization) -> Iterator[PartialRealization]:
    """Every psi ⪯ psi_prime other than psi_prime itself, smallest first."""
    pairs = psi_prime.pairs
    for size in range(len(pairs)):
        for chosen in itertools.combinations(pairs, size):
            yield PartialRealization(chosen)


def check_monotone(instance: Instance) -> CheckReport:
    """
    Checks f(psi) <= f(psi') over covering pairs (psi' = psi plus one observation).

    Covering pairs suffice: any feasible psi ⪯ psi' is joined by a chain of
    single-observation steps through feasible states.

    Returns:
        CheckReport: ``monotone`` set, with a MonotonicityWitness on failure
    """
    f = instance.utility
    checked = 0
    for psi_prime in feasible_partials(instance):
        value_prime = f.evaluate(psi_prime)
        for dropped in psi_prime.pairs:
            psi = PartialRealization(tuple(pair for pair in psi_prime.pairs if pair != dropped))
            checked += 1
            value = f.evaluate(psi)
            if value > value_prime:
                logger.info("Monotonicity fails: f(%s)=%d > f(%s)=%d", psi, value, psi_prime, value_prime)
                return CheckReport(monotone=False, pairs_checked=checked,
                                   witness=MonotonicityWitness(psi, psi_prime, value, value_prime))
    return CheckReport(monotone=True, pairs_checked=checked)


def check_monotone_full(instance: Instance) -> CheckReport:
    """Monotonicity over every feasible pair psi ⪯ psi', not just covering pairs."""
    f = instance.utility
    checked = 0
    for psi_prime in feasible_partials(instance):
        value_prime = f.evaluate(psi_prime)
        for psi in _subrealizations(psi_prime):
            checked += 1
            value = f.evaluate(psi)
            if value > value_prime:
                return CheckReport(monotone=False, pairs_checked=checked,
                                   witness=MonotonicityWitness(psi, psi_prime, value, value_prime))
    return CheckReport(monotone=True, pairs_checked=checked)


def check_coverable(instance: Instance) -> CheckReport:
    """
    Checks f(phi) = Q for every positive-probability full realization.

    Returns:
        CheckReport: ``coverable`` set, with a CoverabilityWitness on failure
    """
    f = instance.utility
    realizations = enumerate_realizations(instance)
    for realization in realizations:
        psi = realization.as_partial()
        value = f.evaluate(psi)
        if value != f.q_max:
            logger.info("Coverability fails at %s (f=%d)", psi, value)
            return CheckReport(coverable=False, pairs_checked=len(realizations),
                               witness=CoverabilityWitness(psi, realization.probability, value))
    return CheckReport(coverable=True, pairs_checked=len(realizations))


def check_adaptive_submodular(instance: Instance) -> CheckReport:
    """
    Checks Delta(e | psi) >= Delta(e | psi') - VIOLATION_TOL for all feasible psi ⪯ psi'
    and every item e outside dom(psi').

    Pairs are visited by |dom(psi')| ascending. On failure the witness is the
    largest violation; among equal violations the first one visited wins.

    Returns:
        CheckReport: ``adaptive_submodular`` set, with the worst SubmodularityWitness
    """
    model = belief_model(instance)
    item_ids = instance.item_ids
    worst = None
    checked = 0
    for psi_prime in feasible_partials(instance):
        outside = [e for e in item_ids if e not in psi_prime.dom]
        if not outside:
            continue
        deltas_prime = {e: model.marginal_benefit(e, psi_prime) for e in outside}
        for psi in _subrealizations(psi_prime):
            checked += 1
            for e in outside:
                delta = model.marginal_benefit(e, psi)
                violation = deltas_prime[e] - delta
                if violation > VIOLATION_TOL and (worst is None or violation > worst.violation):
                    worst = SubmodularityWitness(psi, psi_prime, e, delta, deltas_prime[e])
    if worst is not None:
        logger.info("Adaptive submodularity fails: Delta(%s|%s)=%.12g < Delta(%s|%s)=%.12g",
                    worst.item, worst.psi, worst.delta_psi, worst.item, worst.psi_prime, worst.delta_psi_prime)
        return CheckReport(adaptive_submodular=False, witness=worst, pairs_checked=checked)
    return CheckReport(adaptive_submodular=True, pairs_checked=checked)


def check_all(instance: Instance) -> CheckReport:
    """All three axioms; the witness is the first failure in the order monotone, coverable, submodular."""
    return (check_monotone(instance)
            .merge(check_coverable(instance))
            .merge(check_adaptive_submodular(instance)))


def check_grid(instance: Instance, grid: Sequence[float]) -> List[Tuple[float, CheckReport]]:
    """Runs check_all with the instance re-parameterized at every grid point."""
    return [(float(p), check_all(instance.with_p(float(p)))) for p in grid]
