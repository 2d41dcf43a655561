"""Finite partial n-place functions stored as dense tables.

A function on ``A = {0, ..., m-1}`` of arity ``n`` is a table of ``m**n``
slots.  Slot ``k`` holds the value at the tuple whose mixed-radix digits
(first argument most significant) spell ``k``, or ``UNDEFINED``.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapExceeded, StructuralError

UNDEFINED = -1
DEFAULT_MAX_SLOTS = 4096

_DTYPE = np.int32


@lru_cache(maxsize=None)
def tuple_table(m: int, n: int) -> np.ndarray:
    """All of ``A^n`` in slot order, shape ``(m**n, n)``."""
    if m == 0:
        out = np.zeros((0, n), dtype=np.int64)
    else:
        out = np.array(list(itertools.product(range(m), repeat=n)), dtype=np.int64).reshape(-1, n)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def diagonal_slots(m: int, n: int) -> np.ndarray:
    """Slot index of ``(a, ..., a)`` for every ``a`` in ``A``."""
    step = sum(m**j for j in range(n))
    out = np.arange(m, dtype=np.int64) * step
    out.setflags(write=False)
    return out


def tuple_index(args: Sequence[int], m: int) -> int:
    k = 0
    for a in args:
        k = k * m + int(a)
    return k


class NPlaceFunction:
    """Immutable partial map ``A^n -> A``."""

    __slots__ = ("arity", "base", "table", "_hash")

    def __init__(self, arity: int, base: int, table, *, max_slots: int | None = DEFAULT_MAX_SLOTS):
        arity = int(arity)
        base = int(base)
        if arity < 1:
            raise StructuralError(f"arity must be >= 1, got {arity}")
        if base < 0:
            raise StructuralError(f"base size must be >= 0, got {base}")
        slots = base**arity
        if max_slots is not None and slots > max_slots:
            raise CapExceeded(f"{base}**{arity} = {slots} slots exceeds cap {max_slots}")
        arr = np.array(table, dtype=_DTYPE).reshape(-1)
        if arr.shape[0] != slots:
            raise StructuralError(f"table has {arr.shape[0]} slots, expected {slots}")
        if arr.size and (arr.min() < UNDEFINED or arr.max() >= base):
            raise StructuralError("table entry out of range")
        arr.setflags(write=False)
        self.arity = arity
        self.base = base
        self.table = arr
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def empty(cls, arity: int, base: int, **kw) -> "NPlaceFunction":
        return cls(arity, base, np.full(base**arity, UNDEFINED), **kw)

    @classmethod
    def from_mapping(cls, arity: int, base: int, mapping: Mapping, **kw) -> "NPlaceFunction":
        """Build from ``{(a1, ..., an): b}``; bare ints are accepted as keys when n=1."""
        table = np.full(base**arity, UNDEFINED)
        for args, value in mapping.items():
            if not isinstance(args, tuple):
                args = (args,)
            if len(args) != arity or not all(0 <= a < base for a in args):
                raise StructuralError(f"bad argument tuple {args!r}")
            table[tuple_index(args, base)] = value
        return cls(arity, base, table, **kw)

    @classmethod
    def from_callable(cls, arity: int, base: int, func, **kw) -> "NPlaceFunction":
        """``func(*args)`` returns a value or ``None`` for undefined."""
        table = [func(*args) for args in itertools.product(range(base), repeat=arity)]
        return cls(arity, base, [UNDEFINED if v is None else v for v in table], **kw)

    # -- queries ------------------------------------------------------
    def __call__(self, *args: int):
        if len(args) != self.arity:
            raise StructuralError(f"expected {self.arity} arguments, got {len(args)}")
        v = int(self.table[tuple_index(args, self.base)])
        return None if v == UNDEFINED else v

    def domain(self) -> list[tuple[int, ...]]:
        rows = tuple_table(self.base, self.arity)[self.table != UNDEFINED]
        return [tuple(int(a) for a in r) for r in rows]

    def graph(self) -> dict[tuple[int, ...], int]:
        tt = tuple_table(self.base, self.arity)
        return {tuple(int(a) for a in tt[k]): int(v) for k, v in enumerate(self.table) if v != UNDEFINED}

    def is_empty(self) -> bool:
        return bool((self.table == UNDEFINED).all())

    def sort_key(self) -> bytes:
        """Canonical ordering key: table with UNDEFINED shifted to 0, big-endian."""
        return (self.table.astype(np.int64) + 1).astype(">u4").tobytes()

    def __eq__(self, other):
        if not isinstance(other, NPlaceFunction):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.base == other.base
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.arity, self.base, self.table.tobytes()))
        return self._hash

    def __repr__(self):
        body = ", ".join(
            f"{args[0] if self.arity == 1 else args}->{v}" for args, v in self.graph().items()
        )
        return f"NPlaceFunction(n={self.arity}, m={self.base}, {{{body}}})"

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "base": self.base,
            "table": [None if v == UNDEFINED else int(v) for v in self.table],
        }

    @classmethod
    def from_json(cls, obj: Mapping, **kw) -> "NPlaceFunction":
        try:
            table = [UNDEFINED if v is None else int(v) for v in obj["table"]]
            return cls(obj["arity"], obj["base"], table, **kw)
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed function object: {exc}") from exc


def _check_compatible(fs: Iterable[NPlaceFunction]) -> tuple[int, int]:
    fs = list(fs)
    n, m = fs[0].arity, fs[0].base
    for f in fs[1:]:
        if f.arity != n or f.base != m:
            raise StructuralError(
                f"incompatible functions: (n={f.arity}, m={f.base}) vs (n={n}, m={m})"
            )
    return n, m


# ----------------------------------------------------------------------
# Table-level operations.  Tables may carry leading batch axes; the last
# axis is always the slot axis of length m**n.
# ----------------------------------------------------------------------

def compose_tables(f, gs, m: int, n: int) -> np.ndarray:
    """Menger composition on raw tables, strict in undefinedness.

    ``f`` has shape ``(..., S)``; ``gs`` is a sequence of ``n`` arrays of
    shape ``(..., S)``; leading axes broadcast.
    """
    gs = [np.asarray(g, dtype=np.int64) for g in gs]
    if len(gs) != n:
        raise StructuralError(f"need {n} inner functions, got {len(gs)}")
    ok = np.ones(np.broadcast(*gs).shape, dtype=bool)
    idx = np.zeros(ok.shape, dtype=np.int64)
    for g in gs:
        ok &= g != UNDEFINED
        idx = idx * m + np.where(g == UNDEFINED, 0, g)
    f = np.asarray(f, dtype=np.int64)
    shape = np.broadcast_shapes(f.shape[:-1], idx.shape[:-1]) + idx.shape[-1:]
    fb = np.broadcast_to(f, np.broadcast_shapes(f.shape[:-1], idx.shape[:-1]) + f.shape[-1:])
    vals = np.take_along_axis(fb, np.broadcast_to(idx, shape), axis=-1)
    return np.where(np.broadcast_to(ok, shape), vals, UNDEFINED)


def restrict_tables(i: int, f, m: int, n: int) -> np.ndarray:
    """``R_i`` on raw tables; ``i`` is 1-based."""
    f = np.asarray(f)
    return np.where(f != UNDEFINED, tuple_table(m, n)[:, i - 1], UNDEFINED)


def meet_tables(f, g) -> np.ndarray:
    f = np.asarray(f)
    return np.where(f == np.asarray(g), f, UNDEFINED)


# ----------------------------------------------------------------------
# Function-level operations
# ----------------------------------------------------------------------

def compose(f: NPlaceFunction, gs: Sequence[NPlaceFunction]) -> NPlaceFunction:
    """``f[g1 ... gn]``: defined at a iff every gi(a) and f(g1(a), ..., gn(a)) are."""
    if len(gs) != f.arity:
        raise StructuralError(f"need {f.arity} inner functions, got {len(gs)}")
    n, m = _check_compatible([f, *gs])
    table = compose_tables(f.table, [g.table for g in gs], m, n)
    return NPlaceFunction(n, m, table, max_slots=None)


def proj_restrict(i: int, f: NPlaceFunction) -> NPlaceFunction:
    """``R_i f``: the i-th projection (1-based) restricted to the domain of ``f``."""
    if not 1 <= i <= f.arity:
        raise StructuralError(f"projection index {i} outside 1..{f.arity}")
    return NPlaceFunction(f.arity, f.base, restrict_tables(i, f.table, f.base, f.arity), max_slots=None)


def intersect(f: NPlaceFunction, g: NPlaceFunction) -> NPlaceFunction:
    n, m = _check_compatible([f, g])
    return NPlaceFunction(n, m, meet_tables(f.table, g.table), max_slots=None)


def is_subfunction(f: NPlaceFunction, g: NPlaceFunction) -> bool:
    _check_compatible([f, g])
    defined = f.table != UNDEFINED
    return bool(np.array_equal(f.table[defined], g.table[defined]))


def fixed_points(f: NPlaceFunction) -> set[int]:
    diag = f.table[diagonal_slots(f.base, f.arity)]
    return {a for a in range(f.base) if diag[a] == a}
