"""Category registry: the label vocabulary shared by every video.

A registry is a list of ``{"id": int, "name": str, "isthing": 0|1}``
objects ordered by id. Ids 0 and 255 are reserved (0 is the panoptic void
segment id, 255 the semantic void value) and may not be used as category
ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import SchemaError

VOID_SEGMENT_ID = 0
VOID_CATEGORY = 255

_FIELDS = {"id", "name", "isthing"}


@dataclass(frozen=True)
class Category:
    id: int
    name: str
    isthing: bool


class CategorySet:
    """Validated, immutable set of categories with the thing/stuff split."""

    def __init__(self, entries: Iterable[Category]):
        entries = tuple(entries)
        prev = -1
        for cat in entries:
            if type(cat.id) is not int:
                raise SchemaError(f"category id {cat.id!r} is not an integer")
            if cat.id in (VOID_SEGMENT_ID, VOID_CATEGORY):
                raise SchemaError(
                    f"category id {cat.id} collides with a reserved void sentinel")
            if cat.id < 0:
                raise SchemaError(f"category id {cat.id} is negative")
            if cat.id == prev:
                raise SchemaError(f"duplicate category id {cat.id}")
            if cat.id < prev:
                raise SchemaError("category ids must be strictly increasing")
            prev = cat.id
        self._entries = entries
        self._by_id = {cat.id: cat for cat in entries}
        self.thing_ids = frozenset(c.id for c in entries if c.isthing)
        self.stuff_ids = frozenset(c.id for c in entries if not c.isthing)

    @property
    def entries(self) -> tuple[Category, ...]:
        return self._entries

    @property
    def num_things(self) -> int:
        return len(self.thing_ids)

    @property
    def num_stuff(self) -> int:
        return len(self.stuff_ids)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Category]:
        return iter(self._entries)

    def __contains__(self, category_id: int) -> bool:
        return category_id in self._by_id

    def __eq__(self, other) -> bool:
        return isinstance(other, CategorySet) and self._entries == other._entries

    def __getitem__(self, category_id: int) -> Category:
        return self._by_id[category_id]

    def is_thing(self, category_id: int) -> bool:
        return category_id in self.thing_ids

    def is_stuff(self, category_id: int) -> bool:
        return category_id in self.stuff_ids

    def __repr__(self) -> str:
        return (f"CategorySet({len(self)} categories, "
                f"{self.num_things} thing / {self.num_stuff} stuff)")


def load_categories(path: str | Path) -> CategorySet:
    """Read and validate a category registry file.

    Raises SchemaError for anything that is not a list of well-formed
    entries ordered by strictly increasing id.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot parse categories file {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise SchemaError("categories file must contain a list of objects")
    entries = []
    for obj in raw:
        if not isinstance(obj, dict):
            raise SchemaError(f"category entry {obj!r} is not an object")
        missing = _FIELDS - obj.keys()
        if missing:
            raise SchemaError(f"category entry missing fields {sorted(missing)}")
        unknown = obj.keys() - _FIELDS
        if unknown:
            raise SchemaError(f"category entry has unknown fields {sorted(unknown)}")
        if type(obj["id"]) is not int:
            raise SchemaError(f"category id {obj['id']!r} is not an integer")
        if not isinstance(obj["name"], str):
            raise SchemaError(f"category name {obj['name']!r} is not a string")
        if obj["isthing"] not in (0, 1) or type(obj["isthing"]) is bool:
            raise SchemaError(f"isthing must be 0 or 1, got {obj['isthing']!r}")
        entries.append(Category(obj["id"], obj["name"], bool(obj["isthing"])))
    return CategorySet(entries)


def dump_categories(categories: CategorySet, path: str | Path) -> None:
    """Write a registry in the canonical on-disk form (ordered by id)."""
    payload = [
        {"id": c.id, "name": c.name, "isthing": int(c.isthing)}
        for c in categories
    ]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
