"""JSON file formats for instances, assignments and solver results.

Instance files look like::

    {"n": 6, "m": 3,
     "parents": {"2": 1, "3": 1, "4": 2, "5": 2, "6": 2},
     "weights": [[0, 0, 0], [0, 0, 8], ...]}

where row ``i - 1`` of ``weights`` belongs to node ``i``.  Assignments are
arrays of ``[node, task]`` pairs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .core import Assignment, Instance, InvalidInstanceError, build_tree


def _number(v: float) -> int | float:
    return int(v) if float(v).is_integer() else float(v)


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    return {
        "n": instance.node_count,
        "m": instance.task_count,
        "parents": {str(c): p for c, p in sorted(instance.tree.parent.items())},
        "weights": [[_number(v) for v in row] for row in instance.weights],
    }


def instance_from_dict(data: dict[str, Any]) -> Instance:
    try:
        n = int(data["n"])
        m = int(data["m"])
        parents = {int(k): int(v) for k, v in data["parents"].items()}
        weights = data["weights"]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InvalidInstanceError(f"malformed instance document: {exc}") from exc
    return Instance(build_tree(parents, n), m, weights)


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=None, separators=(",", ":")) + "\n"


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"instance is not valid JSON: {exc}") from exc
    return instance_from_dict(data)


def read_instance(path: str | Path) -> Instance:
    return loads_instance(Path(path).read_text())


def write_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(instance))


def assignment_from_json(pairs: list[list[int]]) -> Assignment:
    return Assignment.of((int(i), int(j)) for i, j in pairs)


def write_json(data: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())
