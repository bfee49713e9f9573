"""Data models for the adaptive-submodular cover toolkit."""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

from exceptions import InstanceValidationError, ItemAlreadyObservedError

if TYPE_CHECKING:
    from utility import UtilityFunction


OUTCOMES = (0, 1)


@dataclass(frozen=True)
class GroundVar:
    """An independent Bernoulli variable X_i feeding the OR triggers."""
    index: int
    success_prob: float

    def validate_or_raise(self) -> None:
        if not 0.0 <= self.success_prob <= 1.0:
            raise InstanceValidationError(
                f"success probability {self.success_prob} outside [0, 1]",
                field=f"ground_vars[{self.index}]",
            )


@dataclass(frozen=True)
class OrOf:
    """Trigger that fires when any listed ground variable is 1."""
    indices: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(set(self.indices))))


@dataclass(frozen=True)
class AlwaysOne:
    """Trigger of an item that realizes to 1 with probability 1."""
    pass


Trigger = Union[OrOf, AlwaysOne]


def dummy_cost_for(p: float) -> float:
    """Cost 1/(1-p) of the always-one item in the hard-instance family."""
    return 1.0 / (1.0 - p)


@dataclass(frozen=True)
class Item:
    """A selectable item with a positive cost and a 0/1 outcome trigger.

    When ``tracks_p`` is set the cost is the family's dummy cost 1/(1-p) and is
    regenerated whenever the instance's p changes.
    """
    id: str
    cost: float
    trigger: Trigger
    tracks_p: bool = False

    def validate_or_raise(self) -> None:
        path = f"items[{self.id}]"
        if not isinstance(self.id, str) or not self.id:
            raise InstanceValidationError("item id must be a non-empty string", field=path)
        if not math.isfinite(self.cost) or self.cost <= 0:
            raise InstanceValidationError(f"cost must be positive, got {self.cost}", field=f"{path}.cost")
        if isinstance(self.trigger, OrOf) and not self.trigger.indices:
            raise InstanceValidationError("or_of must be non-empty", field=f"{path}.or_of")


@dataclass(frozen=True)
class PartialRealization:
    """A set of (item, outcome) pairs with at most one pair per item.

    Pairs are kept sorted by item id so equality and hashing are structural.
    """
    pairs: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((str(e), int(w)) for e, w in self.pairs))
        bad = [(e, w) for e, w in pairs if w not in OUTCOMES]
        if bad:
            raise InstanceValidationError(f"outcomes must be 0 or 1, got {bad}", field="psi")
        for (e1, _), (e2, _) in zip(pairs, pairs[1:]):
            if e1 == e2:
                raise ItemAlreadyObservedError(f"item {e1} appears twice in partial realization")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def empty(cls) -> "PartialRealization":
        return cls(())

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, int]) -> "PartialRealization":
        return cls(tuple(mapping.items()))

    def to_mapping(self) -> Dict[str, int]:
        return dict(self.pairs)

    @property
    def dom(self) -> frozenset:
        return frozenset(e for e, _ in self.pairs)

    def outcome(self, item_id: str) -> Optional[int]:
        for e, w in self.pairs:
            if e == item_id:
                return w
        return None

    def extend(self, item_id: str, outcome: int) -> "PartialRealization":
        """Returns psi ∪ {(item_id, outcome)}."""
        if item_id in self.dom:
            raise ItemAlreadyObservedError(f"item {item_id} already observed")
        return PartialRealization(self.pairs + ((item_id, outcome),))

    def restrict(self, items: Iterable[str]) -> "PartialRealization":
        keep = set(items)
        return PartialRealization(tuple((e, w) for e, w in self.pairs if e in keep))

    def is_subrealization(self, other: "PartialRealization") -> bool:
        return set(self.pairs) <= set(other.pairs)

    def is_disjoint(self, other: "PartialRealization") -> bool:
        mine = self.to_mapping()
        return any(e in mine and mine[e] != w for e, w in other.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(self.pairs)

    def __str__(self) -> str:
        if not self.pairs:
            return "{}"
        return "{" + ",".join(f"({e},{w})" for e, w in self.pairs) + "}"

    def to_list(self) -> list:
        return [[e, w] for e, w in self.pairs]


@dataclass(frozen=True)
class FullRealization:
    """An outcome for every item together with its prior probability."""
    outcomes: Tuple[Tuple[str, int], ...]
    probability: float

    def as_partial(self) -> PartialRealization:
        return PartialRealization(self.outcomes)

    def __getitem__(self, item_id: str) -> int:
        for e, w in self.outcomes:
            if e == item_id:
                return w
        raise KeyError(item_id)

    def to_dict(self) -> dict:
        return {"outcomes": dict(self.outcomes), "probability": self.probability}


@dataclass(frozen=True)
class Instance:
    """A min-cost adaptive-submodular cover instance.

    Either ``ground_vars`` drive the item triggers (the hard-instance family),
    or ``distribution`` lists the joint item-outcome vectors explicitly, in
    item order, with their probabilities.
    """
    ground_vars: Tuple[GroundVar, ...]
    items: Tuple[Item, ...]
    p: float
    utility: "UtilityFunction"
    distribution: Optional[Tuple[Tuple[Tuple[int, ...], float], ...]] = None

    @classmethod
    def from_distribution(cls, items, outcome_vectors, probabilities, utility) -> "Instance":
        """
        Builds an instance from an explicit joint distribution over item outcomes.

        Args:
            items: Items in the column order of ``outcome_vectors``
            outcome_vectors: One 0/1 tuple per joint outcome
            probabilities: Probability of each vector

        Returns:
            Instance: Validated instance with no ground variables

        Raises:
            InstanceValidationError: If vectors or probabilities are malformed
        """
        distribution = tuple(
            (tuple(int(w) for w in vector), float(prob))
            for vector, prob in zip(outcome_vectors, probabilities)
        )
        instance = cls(ground_vars=(), items=tuple(items), p=0.0, utility=utility,
                       distribution=distribution)
        instance.validate_or_raise(require_coverable=False)
        return instance

    @property
    def item_ids(self) -> Tuple[str, ...]:
        return tuple(item.id for item in self.items)

    @property
    def n(self) -> int:
        return len(self.items)

    def item(self, item_id: str) -> Item:
        for item in self.items:
            if item.id == item_id:
                return item
        raise KeyError(item_id)

    def cost(self, item_id: str) -> float:
        return self.item(item_id).cost

    def with_p(self, p: float) -> "Instance":
        """Returns the same structure with every X_i ~ Ber(1-p) and dummy costs 1/(1-p)."""
        if not 0.0 < p < 1.0:
            raise InstanceValidationError(f"p must lie in (0, 1), got {p}", field="p")
        ground_vars = tuple(GroundVar(g.index, 1.0 - p) for g in self.ground_vars)
        items = tuple(
            Item(item.id, dummy_cost_for(p), item.trigger, True) if item.tracks_p else item
            for item in self.items
        )
        return Instance(ground_vars, items, p, self.utility, self.distribution)

    def without_item(self, item_id: str) -> "Instance":
        """Returns this instance with one item removed; coverability is not enforced."""
        index = self.item_ids.index(item_id)
        items = self.items[:index] + self.items[index + 1:]
        distribution = None
        if self.distribution is not None:
            merged: Dict[Tuple[int, ...], float] = {}
            for vector, prob in self.distribution:
                key = vector[:index] + vector[index + 1:]
                merged[key] = merged.get(key, 0.0) + prob
            distribution = tuple(sorted(merged.items()))
        return Instance(self.ground_vars, items, self.p, self.utility, distribution)

    def validate(self, require_coverable: bool = True) -> bool:
        try:
            self.validate_or_raise(require_coverable)
        except InstanceValidationError:
            return False
        return True

    def validate_or_raise(self, require_coverable: bool = True) -> None:
        """
        Validates the instance invariants.

        Args:
            require_coverable: Demand an always-one item when the utility is hit-one

        Raises:
            InstanceValidationError: With the offending field in the message
        """
        if not self.items:
            raise InstanceValidationError("instance has no items", field="items")
        ids = self.item_ids
        if len(set(ids)) != len(ids):
            raise InstanceValidationError("item ids must be distinct", field="items")
        indices = [g.index for g in self.ground_vars]
        if len(set(indices)) != len(indices):
            raise InstanceValidationError("ground variable indices must be unique", field="ground_vars")
        for g in self.ground_vars:
            g.validate_or_raise()
        known = set(indices)
        for item in self.items:
            item.validate_or_raise()
            if isinstance(item.trigger, OrOf):
                missing = [i for i in item.trigger.indices if i not in known]
                if missing:
                    raise InstanceValidationError(
                        f"or_of refers to unknown ground variable(s) {missing}",
                        field=f"items[{item.id}].or_of",
                    )
        if self.distribution is not None:
            self._validate_distribution()
        if require_coverable and getattr(self.utility, "kind", None) == "hit_one":
            if not any(isinstance(item.trigger, AlwaysOne) for item in self.items):
                raise InstanceValidationError(
                    "hit_one utility needs an always_one item to be coverable", field="items"
                )

    def _validate_distribution(self) -> None:
        total = 0.0
        for vector, prob in self.distribution:
            if len(vector) != self.n or any(w not in OUTCOMES for w in vector):
                raise InstanceValidationError(f"bad outcome vector {vector}", field="distribution")
            if prob < 0:
                raise InstanceValidationError(f"negative probability {prob}", field="distribution")
            total += prob
        if abs(total - 1.0) > 1e-12:
            raise InstanceValidationError(f"probabilities sum to {total}, not 1", field="distribution")


@dataclass(frozen=True)
class PolicyTree:
    """Decision tree of a policy: an item to select and one subtree per reachable outcome.

    A node with ``item`` None is a leaf, reached once the utility is covered.
    """
    item: Optional[str] = None
    children: Tuple[Tuple[int, "PolicyTree"], ...] = ()

    @classmethod
    def leaf(cls) -> "PolicyTree":
        return cls()

    @property
    def is_leaf(self) -> bool:
        return self.item is None

    def child(self, outcome: int) -> Optional["PolicyTree"]:
        for w, subtree in self.children:
            if w == outcome:
                return subtree
        return None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(subtree.depth() for _, subtree in self.children)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": True}
        return {"item": self.item, "children": {str(w): t.to_dict() for w, t in self.children}}


@dataclass(frozen=True)
class TieBreak:
    """Total order over item ids used to break greedy-ratio ties."""
    priority: Tuple[str, ...]

    @classmethod
    def from_string(cls, text: str) -> "TieBreak":
        return cls(tuple(part.strip() for part in text.split(",") if part.strip()))

    @classmethod
    def default_for(cls, instance: Instance) -> "TieBreak":
        return cls(instance.item_ids)

    def rank(self, item_id: str) -> int:
        return self.priority.index(item_id)

    def validate_or_raise(self, instance: Instance) -> None:
        if sorted(self.priority) != sorted(instance.item_ids):
            raise InstanceValidationError(
                f"priority {','.join(self.priority)} is not a permutation of "
                f"{','.join(instance.item_ids)}",
                field="priority",
            )

    def __str__(self) -> str:
        return ",".join(self.priority)


@dataclass(frozen=True)
class ValueEntry:
    """Optimal remaining expected cost at a state and the item achieving it."""
    cost: float
    best_item: Optional[str]
    ties: Tuple[str, ...] = ()

    @property
    def is_terminal(self) -> bool:
        return self.best_item is None


@dataclass
class ValueTable:
    """Memoized optimal values keyed by canonical partial realization."""
    entries: Dict[PartialRealization, ValueEntry] = field(default_factory=dict)

    def __getitem__(self, psi: PartialRealization) -> ValueEntry:
        return self.entries[psi]

    def __contains__(self, psi: PartialRealization) -> bool:
        return psi in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def root_value(self) -> float:
        return self.entries[PartialRealization.empty()].cost

    def tied_states(self) -> Dict[PartialRealization, Tuple[str, ...]]:
        return {psi: e.ties for psi, e in self.entries.items() if len(e.ties) > 1}


@dataclass(frozen=True)
class MonotonicityWitness:
    psi: PartialRealization
    psi_prime: PartialRealization
    f_psi: int
    f_psi_prime: int

    def to_dict(self) -> dict:
        return {"axiom": "monotone", "psi": self.psi.to_list(), "psi_prime": self.psi_prime.to_list(),
                "f_psi": self.f_psi, "f_psi_prime": self.f_psi_prime}


@dataclass(frozen=True)
class CoverabilityWitness:
    realization: PartialRealization
    probability: float
    value: int

    def to_dict(self) -> dict:
        return {"axiom": "coverable", "realization": self.realization.to_list(),
                "probability": self.probability, "value": self.value}


@dataclass(frozen=True)
class SubmodularityWitness:
    psi: PartialRealization
    psi_prime: PartialRealization
    item: str
    delta_psi: float
    delta_psi_prime: float

    @property
    def violation(self) -> float:
        return self.delta_psi_prime - self.delta_psi

    def to_dict(self) -> dict:
        return {"axiom": "adaptive_submodular", "psi": self.psi.to_list(),
                "psi_prime": self.psi_prime.to_list(), "item": self.item,
                "delta_psi": self.delta_psi, "delta_psi_prime": self.delta_psi_prime}


Witness = Union[MonotonicityWitness, CoverabilityWitness, SubmodularityWitness]


@dataclass(frozen=True)
class CheckReport:
    """Pass/fail status of the three axioms; None marks a check that was not run."""
    monotone: Optional[bool] = None
    coverable: Optional[bool] = None
    adaptive_submodular: Optional[bool] = None
    witness: Optional[Witness] = None
    pairs_checked: int = 0

    @property
    def passed(self) -> bool:
        return all(v is not False for v in (self.monotone, self.coverable, self.adaptive_submodular))

    def merge(self, other: "CheckReport") -> "CheckReport":
        def pick(a, b):
            return b if a is None else a
        return CheckReport(
            monotone=pick(self.monotone, other.monotone),
            coverable=pick(self.coverable, other.coverable),
            adaptive_submodular=pick(self.adaptive_submodular, other.adaptive_submodular),
            witness=self.witness if self.witness is not None else other.witness,
            pairs_checked=self.pairs_checked + other.pairs_checked,
        )

    def to_dict(self) -> dict:
        return {
            "monotone": self.monotone,
            "coverable": self.coverable,
            "adaptive_submodular": self.adaptive_submodular,
            "witness": self.witness.to_dict() if self.witness is not None else None,
            "pairs_checked": self.pairs_checked,
        }


@dataclass(frozen=True)
class FamilySpec:
    """A member of the hard-instance family: n-1 unit-cost OR items plus a dummy."""
    k: int
    n: int
    trigger_sets: Tuple[Tuple[int, ...], ...]

    def has_duplicates(self) -> bool:
        return len(set(self.trigger_sets)) != len(self.trigger_sets)

    def encode(self) -> str:
        return ";".join("{" + ",".join(str(i) for i in s) + "}" for s in self.trigger_sets)


@dataclass(frozen=True)
class SearchReport:
    """Worst greedy/optimal ratio found for one family member."""
    instance: FamilySpec
    p_star: float
    greedy_cost: float
    opt_cost: float
    rho: float
    tiebreak_used: TieBreak

    def to_dict(self) -> dict:
        return {
            "trigger_sets": self.instance.encode(),
            "k": self.instance.k,
            "n": self.instance.n,
            "p_star": self.p_star,
            "greedy_cost": self.greedy_cost,
            "opt_cost": self.opt_cost,
            "rho": self.rho,
            "tiebreak": str(self.tiebreak_used),
        }


def grid_points(size: int) -> Tuple[float, ...]:
    """The evenly spaced interior grid i/(size+1), i = 1..size (size 9 gives 0.1..0.9)."""
    return tuple(i / (size + 1) for i in range(1, size + 1))
