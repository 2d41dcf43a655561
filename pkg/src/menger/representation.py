"""Representations of a table-form algebra by n-place functions on class indices.

A :class:`ClassPartition` fixes an equivalence on the carrier plus an
optional distinguished class ``W``.  The simplest representation sends
``g`` to the function on the non-``W`` class indices that maps
``(a1, ..., an)`` to the class containing every ``g[h1 ... hn]`` with
``hi`` in class ``ai``, undefined when one of those lands in ``W``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .algebra import AbstractAlgebra, BinaryRelation, Check, chi, is_l_ideal
from .errors import IntegrityError, StructuralError
from .kernels import _digits, _flat
from .nfun import UNDEFINED, NPlaceFunction, diagonal_slots, meet_tables, restrict_tables


@dataclass(frozen=True)
class ClassPartition:
    """Partition of ``range(size)``; class ids are ordered by minimal member."""

    class_of: tuple
    w_class: Optional[int] = None

    @classmethod
    def from_relation(cls, matrix, w_elements=None) -> "ClassPartition":
        """Partition induced by an equivalence matrix.

        ``w_elements`` (a bool mask or None) names the class to treat as ``W``.
        """
        rel = BinaryRelation(matrix)
        if not rel.is_equivalence():
            bad = _first_equivalence_failure(rel.matrix)
            raise IntegrityError(f"relation is not an equivalence: {bad}")
        mins = rel.matrix.argmax(axis=1)
        ids = {int(v): k for k, v in enumerate(sorted(set(mins.tolist())))}
        class_of = tuple(ids[int(v)] for v in mins)
        w_class = None
        if w_elements is not None:
            w = np.asarray(w_elements, dtype=bool)
            if w.any():
                classes = {class_of[x] for x in np.flatnonzero(w)}
                if len(classes) != 1:
                    raise IntegrityError(f"W spans several classes {sorted(classes)}")
                w_class = classes.pop()
                members = {x for x in range(len(class_of)) if class_of[x] == w_class}
                if members != set(np.flatnonzero(w).tolist()):
                    raise IntegrityError("W is not a whole class")
        return cls(class_of, w_class)

    @property
    def size(self) -> int:
        return len(self.class_of)

    @property
    def n_classes(self) -> int:
        return max(self.class_of) + 1 if self.class_of else 0

    @property
    def indexing(self) -> list[int]:
        """Non-W class ids in canonical order; position = index in ``A_E``."""
        return [c for c in range(self.n_classes) if c != self.w_class]

    def classes(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_classes)]
        for x, c in enumerate(self.class_of):
            out[c].append(x)
        return out

    def w_members(self) -> list[int]:
        if self.w_class is None:
            return []
        return [x for x, c in enumerate(self.class_of) if c == self.w_class]

    @cached_property
    def position(self) -> np.ndarray:
        """Index in ``A_E`` of each element's class, ``-1`` for W."""
        pos = {c: k for k, c in enumerate(self.indexing)}
        return np.array([pos.get(c, -1) for c in self.class_of], dtype=np.int64)

    def relation(self) -> BinaryRelation:
        c = np.array(self.class_of)
        return BinaryRelation(c[:, None] == c[None, :])


def _first_equivalence_failure(m):
    G = m.shape[0]
    for x in range(G):
        if not m[x, x]:
            return f"not reflexive at {x}"
    for x in range(G):
        for y in range(G):
            if m[x, y] != m[y, x]:
                return f"not symmetric at ({x}, {y})"
    for x in range(G):
        for y in np.flatnonzero(m[x]):
            for z in np.flatnonzero(m[y]):
                if not m[x, z]:
                    return f"not transitive at ({x}, {int(y)}, {int(z)})"
    return "unknown"


def equivalence_v_regular_witness(alg: AbstractAlgebra, class_of) -> Optional[dict]:
    """First ``(z, w)`` where ``z[w]`` and ``z[reps(w)]`` fall in different classes.

    For an equivalence, compatibility with every inner argument reduces to
    invariance under replacing each argument by its class's minimal member.
    """
    c = np.asarray(class_of, dtype=np.int64)
    G, n = alg.size, alg.rank
    first = np.full(c.max() + 1, G, dtype=np.int64)
    np.minimum.at(first, c, np.arange(G))
    rep = first[c]
    ydig = _digits(G, n)
    repflat = _flat([rep[ydig[:, j]] for j in range(n)], G)
    bad = c[alg.sup2] != c[alg.sup2[:, repflat]]
    hit = np.flatnonzero(bad)
    if hit.size == 0:
        return None
    z, wf = np.unravel_index(hit[0], bad.shape)
    return {"z": int(z), "w": ydig[wf].tolist(), "reps": rep[ydig[wf]].tolist()}


def build_eg_wg(alg: AbstractAlgebra, g: int) -> ClassPartition:
    """The partition ``E_g`` with ``W_g`` = elements outside the ⊏-image of ``g``.

    ``x ~ y`` iff ``g ⊏ x meet y`` or neither ``x`` nor ``y`` is ⊏-above ``g``.
    The equivalence, its v-regularity and the l-ideal property of ``W_g`` are
    verified on every call.
    """
    C = chi(alg).matrix
    above = C[g]
    E = C[g][alg.meet2] | (~above[:, None] & ~above[None, :])
    part = ClassPartition.from_relation(E, ~above)
    bad = equivalence_v_regular_witness(alg, part.class_of)
    if bad is not None:
        raise IntegrityError(f"E_{g} is not v-regular: {bad}")
    w = ~above
    if w.any() and not is_l_ideal(alg, w):
        raise IntegrityError(f"W_{g} is not an l-ideal")
    return part


# ----------------------------------------------------------------------
# representations
# ----------------------------------------------------------------------

def verify_homomorphism(alg: AbstractAlgebra, tables: np.ndarray, base: int) -> dict:
    """Check that ``g -> tables[g]`` preserves superposition, meet and every R_i.

    Returns ``{"superposition": Check, "meet": Check, "R": Check}``.
    """
    G, n = alg.size, alg.rank
    T = np.asarray(tables, dtype=np.int64)
    out = {}
    v = kernels.homomorphism_violation(alg.sup, T, G, n, base)
    out["superposition"] = Check(True) if len(v) == 0 else Check(
        False, {"x": int(v[0]), "y": v[1:].tolist()})

    e = np.arange(G)
    mt = meet_tables(T[:, None, :], T[None, :, :])                 # (G, G, S)
    bad = (mt != T[alg.meet2]).any(axis=-1)
    hit = np.flatnonzero(bad)
    out["meet"] = Check(True) if hit.size == 0 else Check(False, dict(zip(("x", "y"), map(int, divmod(int(hit[0]), G)))))

    out["R"] = Check(True)
    for i in range(1, n + 1):
        bad = (restrict_tables(i, T, base, n) != T[alg.r[i - 1]]).any(axis=-1)
        hit = np.flatnonzero(bad)
        if hit.size:
            out["R"] = Check(False, {"i": i, "x": int(e[hit[0]])})
            break
    return out


@dataclass
class Representation:
    """``g -> function`` on a finite index set.

    An elementary representation stores its tables directly.  A sum keeps
    its parts; its tables over the tagged disjoint union are built on demand.
    """

    source: AbstractAlgebra
    base: int
    origin: Optional[int] = None
    tags: list = field(default_factory=list)
    parts: Optional[list] = None
    partition: Optional[ClassPartition] = None
    _tables: Optional[np.ndarray] = None

    @property
    def is_sum(self) -> bool:
        return self.parts is not None

    @cached_property
    def tables(self) -> np.ndarray:
        """``(G, base**n)`` array of image tables."""
        if self._tables is not None:
            return self._tables
        return _materialize_sum(self.source, self.parts, self.base)

    def function(self, g: int) -> NPlaceFunction:
        return NPlaceFunction(self.source.rank, self.base, self.tables[g], max_slots=None)

    def __call__(self, g: int) -> NPlaceFunction:
        return self.function(g)

    def fixed_point_mask(self) -> np.ndarray:
        """Whether each ``P(g)`` has a fixed point ``P(g)(a, ..., a) = a``."""
        if self.is_sum:
            out = np.zeros(self.source.size, dtype=bool)
            for p in self.parts:
                out |= p.fixed_point_mask()
            return out
        if self.base == 0:
            return np.zeros(self.source.size, dtype=bool)
        diag = self.tables[:, diagonal_slots(self.base, self.source.rank)]
        return (diag == np.arange(self.base)[None, :]).any(axis=1)

    def fixed_point_witness(self, g: int) -> Optional[tuple]:
        """``(origin, local index)`` of the first fixed point of ``P(g)``."""
        if self.is_sum:
            for p in self.parts:
                w = p.fixed_point_witness(g)
                if w is not None:
                    return w
            return None
        if self.base == 0:
            return None
        diag = self.tables[g, diagonal_slots(self.base, self.source.rank)]
        hits = np.flatnonzero(diag == np.arange(self.base))
        return (self.origin, int(hits[0])) if hits.size else None

    @cached_property
    def verdict(self) -> dict:
        """Homomorphism checks; for a sum, the conjunction over its parts."""
        if not self.is_sum:
            return verify_homomorphism(self.source, self.tables, self.base)
        out = {"superposition": Check(True), "meet": Check(True), "R": Check(True)}
        for p in self.parts:
            for k, c in p.verdict.items():
                if not c.passed and out[k].passed:
                    out[k] = Check(False, {"origin": p.origin, **(c.counterexample or {})})
        return out

    @property
    def is_representation(self) -> bool:
        return all(c.passed for c in self.verdict.values())

    def signature_rows(self) -> np.ndarray:
        """Per-element concatenation of all part tables (faithfulness witness)."""
        if self.is_sum:
            if not self.parts:
                return np.zeros((self.source.size, 0), dtype=np.int64)
            return np.concatenate([p.signature_rows() for p in self.parts], axis=1)
        return np.asarray(self.tables, dtype=np.int64)

    def to_json(self) -> dict:
        return {
            "origin": self.origin,
            "indices": [list(t) for t in self.tags],
            "map": {str(g): self.function(g).to_json() for g in range(self.source.size)},
        }


def _materialize_sum(alg: AbstractAlgebra, parts: Sequence[Representation], base: int) -> np.ndarray:
    n, G = alg.rank, alg.size
    out = np.full((G, base**n), UNDEFINED, dtype=np.int64)
    offset = 0
    for p in parts:
        k = p.base
        if k:
            local = _digits(k, n)
            slots = _flat([local[:, j] + offset for j in range(n)], base)
            vals = p.tables
            out[:, slots] = np.where(vals == UNDEFINED, UNDEFINED, vals + offset)
        offset += k
    return out


def simplest_representation(alg: AbstractAlgebra, part: ClassPartition, origin: Optional[int] = None) -> Representation:
    """Class-indexed representation determined by ``part`` and its W class."""
    G, n = alg.size, alg.rank
    if part.size != G:
        raise StructuralError("partition carrier does not match algebra")
    pos = part.position
    K = len(part.indexing)
    ydig = _digits(G, n)
    valid = (pos[ydig] >= 0).all(axis=1)
    slot = _flat([pos[ydig[valid, j]] for j in range(n)], K) if K else np.zeros(0, dtype=np.int64)
    res = pos[alg.sup2[:, valid]]                                  # (G, nv), -1 in W
    lo = np.full((G, K**n), K, dtype=np.int64)
    hi = np.full((G, K**n), -1, dtype=np.int64)
    rows = np.broadcast_to(np.arange(G)[:, None], res.shape)
    cols = np.broadcast_to(slot[None, :], res.shape)
    np.minimum.at(lo, (rows, cols), res)
    np.maximum.at(hi, (rows, cols), res)
    straddle = (lo >= 0) & (lo != hi)
    if straddle.any():
        g, s = np.unravel_index(np.flatnonzero(straddle)[0], straddle.shape)
        raise IntegrityError(
            f"image of g={int(g)} on class tuple {_digits(K, n)[s].tolist()} straddles classes"
        )
    tables = np.where(lo >= 0, lo, UNDEFINED)
    tags = [(origin, a) for a in range(K)]
    return Representation(alg, K, origin=origin, tags=tags, partition=part, _tables=tables)


def sum_representations(alg: AbstractAlgebra, parts: Sequence[Representation]) -> Representation:
    """Sum over disjoint index sets; index ``k`` of part ``i`` is tagged ``(origin_i, k)``."""
    parts = list(parts)
    for p in parts:
        if p.source is not alg and p.source != alg:
            raise StructuralError("all parts must represent the same algebra")
    tags = []
    for p in parts:
        tags.extend((p.origin, a) for a in range(p.base))
    return Representation(alg, sum(p.base for p in parts), origin=None, tags=tags, parts=parts)


def is_faithful(rep: Representation) -> bool:
    rows = rep.signature_rows()
    if rows.shape[1] == 0:
        return rep.source.size == 1
    return np.unique(rows, axis=0).shape[0] == rep.source.size
