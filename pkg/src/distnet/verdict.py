"""Three-valued verdicts and JSON conversion of their witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from .multiset import SignedMultiset, sort_key


class Status(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Any = None
    note: str = ""
    truncated: bool = False

    @property
    def is_yes(self) -> bool:
        return self.status is Status.YES

    @property
    def is_no(self) -> bool:
        return self.status is Status.NO

    @property
    def is_unknown(self) -> bool:
        return self.status is Status.UNKNOWN

    def __bool__(self):
        raise TypeError("a Verdict is three-valued; test .is_yes / .is_no")

    def to_json(self) -> dict:
        d = {"status": self.status.value, "truncated": self.truncated}
        if self.note:
            d["note"] = self.note
        if self.witness is not None:
            d["witness"] = jsonable(self.witness)
        return d


def yes(witness=None, note="") -> Verdict:
    return Verdict(Status.YES, witness, note)


def no(witness=None, note="") -> Verdict:
    return Verdict(Status.NO, witness, note)


def unknown(note="truncated", witness=None) -> Verdict:
    return Verdict(Status.UNKNOWN, witness, note, truncated=True)


def jsonable(x):
    """Convert witnesses (multisets, tuples, sets, dataclasses) to JSON data."""
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, SignedMultiset):
        return {str(k): v for k, v in x.items()}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in sorted(x.items(), key=lambda kv: sort_key(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [jsonable(y) for y in x]
    if isinstance(x, (set, frozenset)):
        return [jsonable(y) for y in sorted(x, key=sort_key)]
    if hasattr(x, "to_json"):
        return x.to_json()
    if hasattr(x, "__dataclass_fields__"):
        return {k: jsonable(getattr(x, k)) for k in x.__dataclass_fields__}
    return x


__all__ = ["Status", "Verdict", "yes", "no", "unknown", "jsonable"]
