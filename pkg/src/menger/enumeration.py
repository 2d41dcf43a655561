"""Closed sets of n-place functions: closure, enumeration, abstractification."""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .algebra import AbstractAlgebra, find_zero
from .errors import CapExceeded, ClosureViolation, StructuralError
from .nfun import (
    DEFAULT_MAX_SLOTS,
    UNDEFINED,
    NPlaceFunction,
    compose_tables,
    meet_tables,
    restrict_tables,
)

DEFAULT_MAX_MEMBERS = 512
DEFAULT_MAX_UNIVERSE = 1024
_UNIVERSE_TABLE_LIMIT = 1 << 24
_BATCH = 1 << 22


def _canonical_order(tables: np.ndarray) -> np.ndarray:
    # UNDEFINED (-1) is the smallest value, so raw lexicographic order equals
    # the order of the UNDEFINED-shifted table bytes
    if tables.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(tables.T[::-1])


def _row_keys(tables: np.ndarray) -> np.ndarray:
    t = np.ascontiguousarray(tables, dtype=np.int32)
    return t.view(np.dtype((np.void, t.dtype.itemsize * t.shape[-1]))).reshape(t.shape[:-1])


class ConcreteAlgebra:
    """A closed, canonically ordered set of n-place functions on ``range(base)``."""

    def __init__(self, base: int, rank: int, tables, *, check_closed: bool = False):
        self.base = int(base)
        self.rank = int(rank)
        t = np.array(tables, dtype=np.int32).reshape(-1, self.base**self.rank)
        if t.shape[0] == 0:
            raise StructuralError("a concrete algebra needs at least one member")
        t = t[_canonical_order(t)]
        keys = _row_keys(t)
        if np.unique(keys).size != keys.size:
            raise StructuralError("duplicate members")
        if t.size and (t.min() < UNDEFINED or t.max() >= self.base):
            raise StructuralError("table entry out of range")
        t.setflags(write=False)
        self.tables = t
        self._sorted_keys_order = np.argsort(keys)
        self._sorted_keys = keys[self._sorted_keys_order]
        if check_closed:
            abstractify(self)

    @property
    def size(self) -> int:
        return self.tables.shape[0]

    @property
    def slots(self) -> int:
        return self.tables.shape[1]

    @property
    def members(self) -> list[NPlaceFunction]:
        return [NPlaceFunction(self.rank, self.base, row, max_slots=None) for row in self.tables]

    def __len__(self):
        return self.size

    def lookup(self, tables) -> np.ndarray:
        """Member index of every row of ``tables`` (any leading shape), -1 if absent."""
        tables = np.asarray(tables, dtype=np.int32)
        keys = _row_keys(tables.reshape(-1, self.slots))
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, self._sorted_keys.size - 1)
        found = self._sorted_keys[pos] == keys
        out = np.where(found, self._sorted_keys_order[pos], -1)
        return out.reshape(tables.shape[:-1])

    def index_of(self, f: NPlaceFunction) -> int:
        if f.arity != self.rank or f.base != self.base:
            raise StructuralError("function does not live on this algebra's base")
        k = int(self.lookup(f.table[None, :])[0])
        if k < 0:
            raise KeyError(f)
        return k

    def __contains__(self, f: NPlaceFunction) -> bool:
        try:
            self.index_of(f)
        except (KeyError, StructuralError):
            return False
        return True

    def key(self) -> tuple:
        return (self.base, self.rank, self.tables.tobytes())

    def __eq__(self, other):
        if not isinstance(other, ConcreteAlgebra):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"ConcreteAlgebra(m={self.base}, n={self.rank}, size={self.size})"

    def to_json(self) -> dict:
        return {
            "base": self.base,
            "rank": self.rank,
            "members": [[None if v == UNDEFINED else int(v) for v in row] for row in self.tables],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ConcreteAlgebra":
        try:
            rows = [[UNDEFINED if v is None else int(v) for v in row] for row in obj["members"]]
            return cls(obj["base"], obj["rank"], rows)
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed concrete algebra: {exc}") from exc


# ----------------------------------------------------------------------
# closure on raw tables
# ----------------------------------------------------------------------

def _compose_block(T, idx, m, n):
    """Compose over the product of index arrays ``idx[0] x ... x idx[n]``."""
    S = T.shape[1]
    parts = []
    for j, ix in enumerate(idx):
        shape = [1] * (n + 1) + [S]
        shape[j] = len(ix)
        parts.append(T[ix].reshape(shape))
    return compose_tables(parts[0], parts[1:], m, n).reshape(-1, S)


def _new_compositions(T, n_old, m, n):
    """All compositions over ``T`` whose argument tuple touches a row >= n_old."""
    N = T.shape[0]
    old = np.arange(n_old)
    new = np.arange(n_old, N)
    every = np.arange(N)
    out = []
    for s in range(n + 1):
        idx = [old] * s + [new] + [every] * (n - s)
        if any(len(ix) == 0 for ix in idx):
            continue
        # chunk the outer axis to bound memory
        total = np.prod([len(ix) for ix in idx[1:]], dtype=np.int64) * T.shape[1]
        step = max(1, int(_BATCH // max(total, 1)))
        for lo in range(0, len(idx[0]), step):
            out.append(_compose_block(T, [idx[0][lo:lo + step]] + idx[1:], m, n))
    return out


def close(generators: Iterable[NPlaceFunction], max_members: int = DEFAULT_MAX_MEMBERS) -> ConcreteAlgebra:
    """Least set containing ``generators`` closed under composition, meet and every R_i."""
    gens = list(generators)
    if not gens:
        raise StructuralError("close() needs at least one generator")
    n, m = gens[0].arity, gens[0].base
    for g in gens:
        if g.arity != n or g.base != m:
            raise StructuralError("generators must share arity and base")
    T = np.unique(np.stack([g.table for g in gens]).astype(np.int32), axis=0)
    n_old = 0
    while n_old < T.shape[0]:
        if T.shape[0] > max_members:
            raise CapExceeded(f"closure exceeds {max_members} members", partial_size=T.shape[0])
        new = T[n_old:]
        produced = _new_compositions(T, n_old, m, n)
        produced.append(meet_tables(T[:, None, :], new[None, :, :]).reshape(-1, T.shape[1]))
        produced += [restrict_tables(i, new, m, n) for i in range(1, n + 1)]
        cand = np.unique(np.concatenate(produced).astype(np.int32), axis=0)
        known = set(_row_keys(T).tolist())
        fresh = np.array([k not in known for k in _row_keys(cand).tolist()], dtype=bool)
        n_old = T.shape[0]
        T = np.concatenate([T, cand[fresh]])
    if T.shape[0] > max_members:
        raise CapExceeded(f"closure exceeds {max_members} members", partial_size=T.shape[0])
    return ConcreteAlgebra(m, n, T)


# ----------------------------------------------------------------------
# the universe of all partial functions, for fast enumeration
# ----------------------------------------------------------------------

class Universe:
    """All ``(m+1)**(m**n)`` partial functions with their operation tables.

    Function codes are the UNDEFINED-shifted tables read as base ``m+1``
    numbers (first slot most significant), so code order is canonical order.
    """

    def __init__(self, m: int, n: int):
        self.m, self.n = m, n
        S = m**n
        self.size = (m + 1) ** S
        self.tables = np.array(list(itertools.product(range(-1, m), repeat=S)), dtype=np.int32).reshape(-1, S)
        self.weights = ((m + 1) ** np.arange(S - 1, -1, -1)).astype(np.int64)
        U = self.size
        comp = np.empty(U ** (n + 1), dtype=np.int64)
        step = max(1, _BATCH // max(U**n * S, 1))
        every = np.arange(U)
        for lo in range(0, U, step):
            block = _compose_block(self.tables, [np.arange(lo, min(U, lo + step))] + [every] * n, m, n)
            comp[lo * U**n:min(U, lo + step) * U**n] = self.encode(block)
        self.comp = comp
        self.meet = self.encode(meet_tables(self.tables[:, None, :], self.tables[None, :, :])).reshape(-1)
        self.rt = np.stack([self.encode(restrict_tables(i, self.tables, m, n)) for i in range(1, n + 1)])

    def encode(self, tables) -> np.ndarray:
        return (np.asarray(tables, dtype=np.int64) + 1) @ self.weights

    def closure(self, codes: Sequence[int], max_members: int) -> Optional[np.ndarray]:
        """Sorted member codes of the closure, or ``None`` above ``max_members``."""
        out = kernels.closure_codes(self.comp, self.meet, self.rt, self.size, self.n,
                                    np.asarray(codes, dtype=np.int64), max_members)
        if len(out) == 1 and out[0] < 0:
            return None
        return np.asarray(out, dtype=np.int64)


def check_enumeration_params(m: int, n: int, max_universe: int = DEFAULT_MAX_UNIVERSE,
                             max_slots: int = DEFAULT_MAX_SLOTS):
    if m < 1 or n < 1:
        raise StructuralError("need m >= 1 and n >= 1")
    if m**n > max_slots:
        raise CapExceeded(f"m**n = {m**n} slots exceeds cap {max_slots}")
    # compare in log space to avoid building huge integers
    if (m**n) * np.log2(m + 1) > np.log2(max_universe):
        raise CapExceeded(f"(m+1)**(m**n) partial functions exceed universe cap {max_universe}")
    U = (m + 1) ** (m**n)
    if U ** (n + 1) > _UNIVERSE_TABLE_LIMIT:
        raise CapExceeded(f"universe composition table of {U}**{n + 1} entries is too large")


@lru_cache(maxsize=8)
def universe(m: int, n: int) -> Universe:
    return Universe(m, n)


def enumerate_closed(m: int, n: int, max_members: int = DEFAULT_MAX_MEMBERS,
                     max_universe: int = DEFAULT_MAX_UNIVERSE, stats: Optional[dict] = None):
    """Every distinct closure of a generator set of size 1 or 2.

    Output is sorted by ``(size, member tables)``.  Closures above
    ``max_members`` are dropped and counted in ``stats["over_cap"]``.
    """
    check_enumeration_params(m, n, max_universe)
    uni = universe(m, n)
    U = uni.size
    singles = []
    for a in range(U):
        singles.append(uni.closure([a], max_members))
    found = {}
    over = 0
    tried = 0
    for a in range(U):
        ca = singles[a]
        for b in range(a, U):
            tried += 1
            if b == a:
                c = ca
            elif ca is not None and np.searchsorted(ca, b) < ca.size and ca[np.searchsorted(ca, b)] == b:
                c = ca
            else:
                c = uni.closure([a, b], max_members)
            if c is None:
                over += 1
                continue
            found.setdefault(c.tobytes(), c)
    algebras = sorted(found.values(), key=lambda c: (c.size, c.tolist()))
    if stats is not None:
        stats.update(generator_sets=tried, over_cap=over, algebras=len(algebras))
    return [ConcreteAlgebra(m, n, uni.tables[c]) for c in algebras]


# ----------------------------------------------------------------------
# abstractification
# ----------------------------------------------------------------------

def abstractify(phi: ConcreteAlgebra) -> tuple[AbstractAlgebra, list[NPlaceFunction]]:
    """Operation tables of ``phi`` on member indices, plus index -> function."""
    T, m, n, G = phi.tables, phi.base, phi.rank, phi.size
    every = np.arange(G)
    sup = np.empty(G ** (n + 1), dtype=np.int64)
    step = max(1, _BATCH // max(G**n * phi.slots, 1))
    for lo in range(0, G, step):
        hi = min(G, lo + step)
        sup[lo * G**n:hi * G**n] = phi.lookup(_compose_block(T, [np.arange(lo, hi)] + [every] * n, m, n))
    meet = phi.lookup(meet_tables(T[:, None, :], T[None, :, :])).reshape(-1)
    r = np.stack([phi.lookup(restrict_tables(i, T, m, n)) for i in range(1, n + 1)])
    for name, t in (("composition", sup), ("intersection", meet), ("R_i", r)):
        if (t < 0).any():
            raise ClosureViolation(f"{name} result escapes the member set")
    alg = AbstractAlgebra(n, G, sup, meet, r)
    alg = alg.with_zero(find_zero(alg))
    return alg, phi.members


def verify_isomorphism(alg: AbstractAlgebra, phi: ConcreteAlgebra) -> bool:
    """Re-evaluate every table entry with the function-level operations."""
    from .nfun import compose, intersect, proj_restrict

    fs = phi.members
    G, n = alg.size, alg.rank
    for x in range(G):
        for ys in itertools.product(range(G), repeat=n):
            if compose(fs[x], [fs[y] for y in ys]) != fs[alg.compose(x, ys)]:
                return False
        for y in range(G):
            if intersect(fs[x], fs[y]) != fs[alg.meet_of(x, y)]:
                return False
        for i in range(1, n + 1):
            if proj_restrict(i, fs[x]) != fs[alg.R(i, x)]:
                return False
    return True
