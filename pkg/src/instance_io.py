"""Instance file format, serialization, and the built-in four-item gap instance."""

import json
import logging
import numbers
from pathlib import Path
from typing import Optional

from exceptions import InstanceValidationError
from models import AlwaysOne, GroundVar, Instance, Item, OrOf, dummy_cost_for
from utility import HitOneUtility

logger = logging.getLogger(__name__)

TOP_LEVEL_FIELDS = {"p", "ground_vars", "items", "utility"}
ITEM_FIELDS = {"id", "cost", "or_of", "always_one"}
UTILITIES = {"hit_one": HitOneUtility}

GAP_P = 0.7221
GAP_GREEDY_PRIORITY = ("c", "a", "b", "d")
GAP_OPTIMAL_ORDER = ("a", "b", "d")

GAP_DOCUMENT = {
    "p": GAP_P,
    "ground_vars": 4,
    "items": [
        {"id": "a", "cost": 1.0, "or_of": [1, 2]},
        {"id": "b", "cost": 1.0, "or_of": [3, 4]},
        {"id": "c", "cost": 1.0, "or_of": [1, 3]},
        {"id": "d", "cost": "dummy", "always_one": True},
    ],
}


def _is_number(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _parse_item(raw, position: int, ground_count: int, p: float) -> Item:
    path = f"items[{position}]"
    if not isinstance(raw, dict):
        raise InstanceValidationError("item must be an object", field=path)
    unknown = sorted(set(raw) - ITEM_FIELDS)
    if unknown:
        raise InstanceValidationError(f"unknown field(s) {unknown}", field=path)
    item_id = raw.get("id")
    if not isinstance(item_id, str) or not item_id:
        raise InstanceValidationError("id must be a non-empty string", field=f"{path}.id")

    has_or = "or_of" in raw
    always = raw.get("always_one", False)
    if not isinstance(always, bool):
        raise InstanceValidationError("always_one must be a boolean", field=f"{path}.always_one")
    if has_or == always:
        raise InstanceValidationError("exactly one of or_of / always_one:true is required", field=path)
    if has_or:
        indices = raw["or_of"]
        if not isinstance(indices, list) or not indices:
            raise InstanceValidationError("or_of must be a non-empty list", field=f"{path}.or_of")
        for index in indices:
            if not isinstance(index, int) or isinstance(index, bool) or not 1 <= index <= ground_count:
                raise InstanceValidationError(
                    f"ground variable {index!r} not in 1..{ground_count}", field=f"{path}.or_of"
                )
        trigger = OrOf(tuple(indices))
    else:
        trigger = AlwaysOne()

    cost = raw.get("cost")
    if cost == "dummy":
        return Item(item_id, dummy_cost_for(p), trigger, tracks_p=True)
    if not _is_number(cost) or not cost > 0:
        raise InstanceValidationError(f"cost must be a positive number or \"dummy\", got {cost!r}",
                                      field=f"{path}.cost")
    return Item(item_id, float(cost), trigger)


def instance_from_dict(document, p: Optional[float] = None) -> Instance:
    """
    Validates a parsed instance document and builds the Instance.

    Args:
        document: Parsed JSON object
        p: Optional override of the document's p; dummy costs follow it

    Returns:
        Instance: Validated, coverable instance

    Raises:
        InstanceValidationError: With the offending field path
    """
    if not isinstance(document, dict):
        raise InstanceValidationError("instance must be a JSON object", field="$")
    unknown = sorted(set(document) - TOP_LEVEL_FIELDS)
    if unknown:
        raise InstanceValidationError(f"unknown field(s) {unknown}", field="$")

    if p is None:
        p = document.get("p")
    if not _is_number(p) or not 0.0 < p < 1.0:
        raise InstanceValidationError(f"p must be a number in (0, 1), got {p!r}", field="p")
    p = float(p)

    ground_count = document.get("ground_vars")
    if not isinstance(ground_count, int) or isinstance(ground_count, bool) or ground_count < 0:
        raise InstanceValidationError("ground_vars must be a non-negative integer", field="ground_vars")

    utility_name = document.get("utility", "hit_one")
    if utility_name not in UTILITIES:
        raise InstanceValidationError(f"unsupported utility {utility_name!r}", field="utility")

    raw_items = document.get("items")
    if not isinstance(raw_items, list) or not raw_items:
        raise InstanceValidationError("items must be a non-empty list", field="items")
    items = tuple(_parse_item(raw, i, ground_count, p) for i, raw in enumerate(raw_items))

    ground_vars = tuple(GroundVar(i, 1.0 - p) for i in range(1, ground_count + 1))
    instance = Instance(ground_vars, items, p, UTILITIES[utility_name]())
    instance.validate_or_raise(require_coverable=True)
    return instance


def instance_to_dict(instance: Instance) -> dict:
    """Inverse of instance_from_dict for Bernoulli-family instances."""
    if instance.distribution is not None:
        raise InstanceValidationError("explicit distributions have no file form", field="distribution")
    items = []
    for item in instance.items:
        entry = {"id": item.id, "cost": "dummy" if item.tracks_p else item.cost}
        if isinstance(item.trigger, AlwaysOne):
            entry["always_one"] = True
        else:
            entry["or_of"] = list(item.trigger.indices)
        items.append(entry)
    return {
        "p": instance.p,
        "ground_vars": len(instance.ground_vars),
        "items": items,
        "utility": instance.utility.kind,
    }


def dump_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2)


def load_instance(path, p: Optional[float] = None) -> Instance:
    """
    Reads and validates an instance file.

    Raises:
        FileNotFoundError: If the file does not exist
        InstanceValidationError: If the file is unreadable, not valid UTF-8 JSON
            or violates the schema
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    except UnicodeDecodeError as e:
        raise InstanceValidationError(f"not UTF-8 text (byte {e.start})", field=str(path)) from e
    except OSError as e:
        raise InstanceValidationError(f"cannot read file ({e.strerror or e})", field=str(path)) from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceValidationError(f"invalid JSON ({e.msg} at line {e.lineno})", field=str(path)) from e
    try:
        instance = instance_from_dict(document, p)
    except InstanceValidationError as e:
        raise InstanceValidationError(str(e), field=str(path)) from e
    logger.debug("Loaded %s: %d items, %d ground variables", path, instance.n, len(instance.ground_vars))
    return instance


def gap_instance(p: float = GAP_P) -> Instance:
    """Items a, b, c over X1..X4 (a = X1∨X2, b = X3∨X4, c = X1∨X3) plus always-one d."""
    return instance_from_dict(GAP_DOCUMENT, p)


def gap_optimal_cost(p: float) -> float:
    """Expected cost 1 + p^2 + p^4/(1-p) of the order a, b, d on the gap instance."""
    return 1 + p ** 2 + p ** 4 / (1 - p)


def gap_greedy_cost(p: float) -> float:
    """Expected cost 1 + p^2 + p^3 + p^4/(1-p) of greedy with priority c, a, b, d."""
    return 1 + p ** 2 + p ** 3 + p ** 4 / (1 - p)


BUILTIN_INSTANCES = {"paper": gap_instance, "gap4": gap_instance}


def builtin_instance(name: str, p: Optional[float] = None) -> Instance:
    if name not in BUILTIN_INSTANCES:
        raise InstanceValidationError(f"unknown builtin {name!r}", field="builtin")
    return BUILTIN_INSTANCES[name](GAP_P if p is None else p)
