"""Signed multisets: finite maps from elements to nonzero integers."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from typing import Callable, Union

MAX_MULTIPLICITY = 2**63 - 1


def sort_key(x):
    """Total order over mixed element types (strings, ints, tuples, ...)."""
    if isinstance(x, tuple):
        return (type(x).__name__, tuple(sort_key(y) for y in x))
    if isinstance(x, SignedMultiset):
        return ("SignedMultiset", tuple((sort_key(k), v) for k, v in x.items()))
    return (type(x).__name__, x)


def _check(v: int) -> int:
    if v > MAX_MULTIPLICITY or v < -MAX_MULTIPLICITY:
        raise OverflowError(f"multiplicity {v} out of range")
    return v


class SignedMultiset(Mapping):
    """Immutable signed multiset in canonical form (no zero entries).

    Missing keys read as 0. Equality and hashing are extensional.
    """

    __slots__ = ("_items", "_hash", "_map")

    def __init__(self, entries: Union[Mapping, Iterable, None] = None):
        acc: dict = {}
        if entries is None:
            pass
        elif isinstance(entries, Mapping):
            for k, v in entries.items():
                if not isinstance(v, int):
                    raise TypeError(f"multiplicity of {k!r} must be int")
                acc[k] = acc.get(k, 0) + v
        else:
            # an iterable of elements, each counted once
            for k in entries:
                acc[k] = acc.get(k, 0) + 1
        items = tuple(sorted(((k, _check(v)) for k, v in acc.items() if v != 0),
                             key=lambda kv: sort_key(kv[0])))
        self._items = items
        self._hash = None
        self._map = None

    @classmethod
    def _raw(cls, items: tuple) -> "SignedMultiset":
        obj = cls.__new__(cls)
        obj._items = items
        obj._hash = None
        obj._map = None
        return obj

    def _lookup(self) -> dict:
        if self._map is None:
            self._map = dict(self._items)
        return self._map

    # Mapping protocol
    def __getitem__(self, key):
        return self._lookup().get(key, 0)

    def get(self, key, default=0):
        v = self[key]
        return v if v != 0 else default

    def __contains__(self, key):
        return key in self._lookup()

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def items(self):
        return list(self._items)

    def __eq__(self, other):
        if isinstance(other, SignedMultiset):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self == SignedMultiset(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    def __lt__(self, other):
        return sort_key(self) < sort_key(other)

    def __repr__(self):
        inner = ", ".join(f"{k!r}: {v}" for k, v in self._items)
        return "{" + inner + "}"

    def __bool__(self):
        return bool(self._items)

    # algebra
    def __add__(self, other):
        return combine("add", self, other)

    def __sub__(self, other):
        return combine("subtract", self, other)

    def __or__(self, other):
        return combine("union", self, other)

    def __and__(self, other):
        return combine("intersect", self, other)

    def __rmul__(self, k: int):
        return scale(k, self)

    def __neg__(self):
        return SignedMultiset._raw(tuple((k, -v) for k, v in self._items))

    def __le__(self, other):
        return leq(self, other)

    def is_multiset(self) -> bool:
        return all(v > 0 for _, v in self._items)

    def support(self) -> frozenset:
        return frozenset(k for k, _ in self._items)

    def cardinality(self) -> int:
        return cardinality(self)

    def restrict(self, ys) -> "SignedMultiset":
        return restrict(self, ys)

    def to_dict(self) -> dict:
        return dict(self._items)


EMPTY = SignedMultiset()


def ms(*elements, **named) -> SignedMultiset:
    """Shorthand: ms("p", "q") counts elements; ms(p=2) uses keywords."""
    acc: dict = {}
    for e in elements:
        acc[e] = acc.get(e, 0) + 1
    for k, v in named.items():
        acc[k] = acc.get(k, 0) + v
    return SignedMultiset(acc)


def _as_ms(a) -> SignedMultiset:
    return a if isinstance(a, SignedMultiset) else SignedMultiset(a)


_OPS = {
    "add": lambda x, y: x + y,
    "subtract": lambda x, y: x - y,
    "union": max,
    "intersect": min,
}


def combine(op: str, a, b) -> SignedMultiset:
    try:
        f = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown multiset operation {op!r}") from None
    a, b = _as_ms(a), _as_ms(b)
    da, db = dict(a._items), dict(b._items)
    keys = set(da) | set(db)
    return SignedMultiset({k: f(da.get(k, 0), db.get(k, 0)) for k in keys})


def scale(k: int, a) -> SignedMultiset:
    if k < 0:
        raise ValueError("scalar must be nonnegative")
    a = _as_ms(a)
    return SignedMultiset({x: k * v for x, v in a._items})


def restrict(a, ys) -> SignedMultiset:
    ys = set(ys)
    a = _as_ms(a)
    return SignedMultiset._raw(tuple((x, v) for x, v in a._items if x in ys))


def cardinality(a) -> int:
    return sum(abs(v) for _, v in _as_ms(a)._items)


def leq(a, b) -> bool:
    a, b = _as_ms(a), _as_ms(b)
    da, db = dict(a._items), dict(b._items)
    return all(da.get(k, 0) <= db.get(k, 0) for k in set(da) | set(db))


def lift(f: Callable, a, zero=EMPTY) -> Union[SignedMultiset, int]:
    """Linear extension of f to signed multisets: sum of A(x)*f(x).

    f may return ints (the result is an int) or multisets. For an empty
    argument f is never called, so `zero` is returned.
    """
    a = _as_ms(a)
    total_int = 0
    acc: dict = {}
    used_ms = False
    for x, n in a._items:
        fx = f(x)
        if isinstance(fx, int):
            total_int += n * fx
        else:
            used_ms = True
            for y, m in _as_ms(fx)._items:
                acc[y] = acc.get(y, 0) + n * m
    if used_ms:
        if total_int:
            raise TypeError("lift mixes integer and multiset images")
        return SignedMultiset(acc)
    if not a._items:
        return zero
    return _check(total_int)
