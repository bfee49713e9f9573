"""Integer-valued utility functions over partial realizations."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, Dict, Mapping, Optional, Tuple

from exceptions import InstanceValidationError, UndefinedEntryError
from models import PartialRealization


class UtilityFunction(ABC):
    """A monotone utility f with f(∅) = 0 and maximal value ``q_max``."""

    kind: ClassVar[str]
    q_max: int

    @abstractmethod
    def evaluate(self, psi: PartialRealization) -> int:
        """Returns f(psi), an integer in [0, q_max]."""

    def is_covered(self, psi: PartialRealization) -> bool:
        """True once the observations reach the maximal value Q."""
        return self.evaluate(psi) == self.q_max


@dataclass(frozen=True)
class HitOneUtility(UtilityFunction):
    """f(psi) = min{|psi ∩ E*|, 1} with E* the set of all (e, 1) pairs."""

    kind: ClassVar[str] = "hit_one"
    q_max: ClassVar[int] = 1

    def evaluate(self, psi: PartialRealization) -> int:
        return 1 if any(w == 1 for _, w in psi) else 0


@dataclass(frozen=True)
class TableUtility(UtilityFunction):
    """
    Utility given by an explicit table over partial realizations.

    Only programmatic: lets arbitrary small functions, including non-monotone
    or non-submodular ones, be fed to the checker.
    """

    kind: ClassVar[str] = "table"
    entries: Tuple[Tuple[PartialRealization, int], ...] = ()
    q_max: Optional[int] = None
    _lookup: Dict[PartialRealization, int] = field(
        default_factory=dict, init=False, compare=False, hash=False, repr=False
    )

    def __post_init__(self):
        lookup = {psi: int(value) for psi, value in self.entries}
        object.__setattr__(self, "_lookup", lookup)
        object.__setattr__(self, "entries", tuple(sorted(lookup.items(), key=lambda kv: kv[0].pairs)))
        if self.q_max is None:
            object.__setattr__(self, "q_max", max(lookup.values(), default=0))
        if lookup.get(PartialRealization.empty(), 0) != 0:
            raise InstanceValidationError(
                "f(∅) must be 0; build the table with TableUtility.normalized", field="utility"
            )
        bad = [v for v in lookup.values() if not 0 <= v <= self.q_max]
        if bad:
            raise InstanceValidationError(f"values {bad} outside [0, {self.q_max}]", field="utility")

    @classmethod
    def from_mapping(cls, values: Mapping[PartialRealization, int], q_max: int = None) -> "TableUtility":
        return cls(tuple(values.items()), q_max)

    @classmethod
    def normalized(cls, values: Mapping[PartialRealization, int], q_max: int = None) -> "TableUtility":
        """
        Builds the equivalent table f - f(∅), so that f(∅) = 0.

        Args:
            values: Raw table, possibly with a non-zero value at ∅
            q_max: Maximal value of the raw function (defaults to the table maximum)

        Returns:
            TableUtility: Shifted table with Q reduced by f(∅)
        """
        base = int(values.get(PartialRealization.empty(), 0))
        raw_q = max(values.values()) if q_max is None else q_max
        return cls(tuple((psi, int(v) - base) for psi, v in values.items()), raw_q - base)

    def evaluate(self, psi: PartialRealization) -> int:
        if psi in self._lookup:
            return self._lookup[psi]
        if not psi.pairs:
            return 0
        raise UndefinedEntryError(f"table utility has no value for {psi}")


def normalized(utility, q_max: int = None) -> UtilityFunction:
    """
    Returns f - f(∅) for a raw value table; utilities already built satisfy f(∅) = 0 and pass through.

    Args:
        utility: A UtilityFunction, or a mapping from partial realization to value
        q_max: Maximal value of a raw table (defaults to its maximum)
    """
    if isinstance(utility, UtilityFunction):
        return utility
    return TableUtility.normalized(utility, q_max)
