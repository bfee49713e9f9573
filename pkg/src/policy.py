"""Adaptive greedy and fixed-order policies, and exact evaluation of policy trees."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from exceptions import InstanceValidationError, NoItemsLeftError, NotCoverableError
from models import FullRealization, Instance, PartialRealization, PolicyTree, TieBreak
from realizations import belief_model

logger = logging.getLogger(__name__)

RATIO_TIE_TOL = 1e-9


@dataclass(frozen=True)
class TraceStep:
    """One greedy decision: the observations, every candidate's ratio, and the pick."""
    psi: PartialRealization
    ratios: Dict[str, float]
    chosen: str


def greedy_ratios(instance: Instance, psi: PartialRealization, selected=()) -> Dict[str, float]:
    """
    Greedy ratio Delta(e | psi) / c_e of every unselected item.

    Args:
        instance: The cover instance
        psi: Observations so far
        selected: Items already selected (dom(psi) is always excluded too)

    Returns:
        dict: Item id to ratio, in instance order
    """
    model = belief_model(instance)
    excluded = set(selected) | psi.dom
    return {
        item.id: model.marginal_benefit(item.id, psi) / item.cost
        for item in instance.items
        if item.id not in excluded
    }


def tied_maximizers(ratios: Dict[str, float]) -> List[str]:
    """Items whose ratio is within RATIO_TIE_TOL of the best, in the ratios' order."""
    best = max(ratios.values())
    return [e for e, r in ratios.items() if r >= best - RATIO_TIE_TOL]


def greedy_step(instance: Instance, psi: PartialRealization, selected, tiebreak: TieBreak) -> str:
    """
    One iteration of the adaptive greedy rule: argmax of Delta(e | psi) / c_e.

    Ratios within RATIO_TIE_TOL of the maximum count as tied; the tie goes to
    the item earliest in ``tiebreak.priority``.

    Raises:
        NoItemsLeftError: If every item is selected and psi is still uncovered
    """
    ratios = greedy_ratios(instance, psi, selected)
    if not ratios:
        raise NoItemsLeftError(f"no unselected items left at {psi}")
    tied = tied_maximizers(ratios)
    chosen = min(tied, key=tiebreak.rank)
    if len(tied) > 1:
        logger.debug("Greedy tie at %s among %s, picked %s", psi, tied, chosen)
    return chosen


def build_greedy_tree(instance: Instance, tiebreak: Optional[TieBreak] = None) -> PolicyTree:
    """
    Unrolls the adaptive greedy policy over every reachable outcome branch.

    Args:
        instance: The cover instance
        tiebreak: Tie-breaking priority (defaults to instance item order)

    Returns:
        PolicyTree: The greedy policy tree

    Raises:
        NotCoverableError: If some branch runs out of items before coverage
    """
    tiebreak = tiebreak or TieBreak.default_for(instance)
    tiebreak.validate_or_raise(instance)
    model = belief_model(instance)

    def grow(psi: PartialRealization) -> PolicyTree:
        if instance.utility.is_covered(psi):
            return PolicyTree.leaf()
        try:
            chosen = greedy_step(instance, psi, psi.dom, tiebreak)
        except NoItemsLeftError as e:
            raise NotCoverableError(f"greedy exhausted all items uncovered at {psi}") from e
        dist = model.outcome_distribution(chosen, psi)
        return PolicyTree(chosen, tuple((w, grow(psi.extend(chosen, w))) for w in sorted(dist)))

    return grow(PartialRealization.empty())


def greedy_trace(instance: Instance, tiebreak: Optional[TieBreak] = None) -> List[TraceStep]:
    """Greedy decisions along the branch where every selected item realizes to 0."""
    tiebreak = tiebreak or TieBreak.default_for(instance)
    model = belief_model(instance)
    steps = []
    psi = PartialRealization.empty()
    while not instance.utility.is_covered(psi):
        ratios = greedy_ratios(instance, psi)
        if not ratios:
            break
        chosen = min(tied_maximizers(ratios), key=tiebreak.rank)
        steps.append(TraceStep(psi, ratios, chosen))
        if 0 not in model.outcome_distribution(chosen, psi):
            break
        psi = psi.extend(chosen, 0)
    return steps


def fixed_order_tree(instance: Instance, order: Sequence[str]) -> PolicyTree:
    """
    Policy that selects items in a fixed order until covered.

    Raises:
        InstanceValidationError: If the order names unknown or repeated items
        NotCoverableError: If some realization exhausts the order uncovered
    """
    order = tuple(order)
    unknown = [e for e in order if e not in instance.item_ids]
    if unknown or len(set(order)) != len(order):
        raise InstanceValidationError(f"order {','.join(order)} has unknown or repeated items", field="order")
    model = belief_model(instance)

    def grow(psi: PartialRealization, remaining: Tuple[str, ...]) -> PolicyTree:
        if instance.utility.is_covered(psi):
            return PolicyTree.leaf()
        if not remaining:
            raise NotCoverableError(f"order {','.join(order)} leaves {psi} uncovered")
        chosen = remaining[0]
        dist = model.outcome_distribution(chosen, psi)
        return PolicyTree(chosen, tuple((w, grow(psi.extend(chosen, w), remaining[1:])) for w in sorted(dist)))

    return grow(PartialRealization.empty(), order)


def expected_cost(instance: Instance, tree: PolicyTree) -> float:
    """
    Expected cost c_exp of a policy tree.

    Every internal node contributes Pr[psi ⪯ Phi] * c_e, where psi is the node's
    accumulated observations; this equals the sum over root-to-leaf paths of
    path probability times path cost.
    """
    model = belief_model(instance)
    total = 0.0
    stack = [(tree, PartialRealization.empty())]
    while stack:
        node, psi = stack.pop()
        if node.is_leaf:
            continue
        total += model.reach_prob(psi) * instance.cost(node.item)
        for w, child in node.children:
            stack.append((child, psi.extend(node.item, w)))
    return total


def path_distribution(instance: Instance, tree: PolicyTree) -> List[Tuple[PartialRealization, float, float]]:
    """Every root-to-leaf path as (leaf psi, path probability, path cost)."""
    model = belief_model(instance)
    paths = []

    def walk(node: PolicyTree, psi: PartialRealization, cost: float) -> None:
        if node.is_leaf:
            paths.append((psi, model.reach_prob(psi), cost))
            return
        for w, child in node.children:
            walk(child, psi.extend(node.item, w), cost + instance.cost(node.item))

    walk(tree, PartialRealization.empty(), 0.0)
    return paths


def policy_cost_on(instance: Instance, tree: PolicyTree, realization: FullRealization) -> float:
    """C(pi, phi): total cost the policy pays when run against one full realization."""
    cost = 0.0
    node = tree
    while not node.is_leaf:
        cost += instance.cost(node.item)
        node = node.child(realization[node.item])
        if node is None:
            raise InstanceValidationError("tree has no branch for this realization", field="tree")
    return cost


def validate_tree(instance: Instance, tree: PolicyTree) -> None:
    """
    Checks the policy-tree invariants against an instance.

    Raises:
        InstanceValidationError: On repeated items or missing/extra branches
        NotCoverableError: If a leaf is uncovered
    """
    model = belief_model(instance)

    def walk(node: PolicyTree, psi: PartialRealization) -> None:
        covered = instance.utility.is_covered(psi)
        if node.is_leaf:
            if not covered:
                raise NotCoverableError(f"leaf at {psi} is not covered")
            return
        if covered:
            raise InstanceValidationError(f"internal node at covered state {psi}", field="tree")
        if node.item in psi.dom:
            raise InstanceValidationError(f"item {node.item} repeats on a path", field="tree")
        reachable = set(model.outcome_distribution(node.item, psi))
        if {w for w, _ in node.children} != reachable:
            raise InstanceValidationError(f"branches of {node.item} at {psi} differ from {sorted(reachable)}",
                                          field="tree")
        for w, child in node.children:
            walk(child, psi.extend(node.item, w))

    walk(tree, PartialRealization.empty())


def all_zeros_path(tree: PolicyTree) -> List[str]:
    """Items selected while every outcome so far is 0."""
    path = []
    node = tree
    while not node.is_leaf:
        path.append(node.item)
        node = node.child(0)
        if node is None:
            break
    return path


def render_tree(tree: PolicyTree) -> str:
    """Indented text rendering, one node per line."""
    lines = [tree.item if not tree.is_leaf else "covered"]

    def walk(node: PolicyTree, depth: int) -> None:
        for w, child in node.children:
            label = "covered" if child.is_leaf else child.item
            lines.append(f"{'  ' * depth}{w} -> {label}")
            walk(child, depth + 1)

    walk(tree, 1)
    return "\n".join(lines)
