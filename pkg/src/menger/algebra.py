"""Table-form Menger algebras of type (n+1, 2, 1, ..., 1).

Elements are ``0 .. G-1``.  ``sup`` is the flat row-major superposition
table: ``x[y1 ... yn]`` lives at ``((x*G + y1)*G + y2)...``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

import numpy as np

from . import kernels
from .errors import ContractError, StructuralError
from .kernels import _digits, _flat

AXIOMS = ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10")


class AbstractAlgebra:
    """Immutable algebra ``(G, o, meet, R_1..R_n)`` with an optional zero."""

    def __init__(self, rank: int, size: int, sup, meet, r, zero: Optional[int] = None):
        rank, size = int(rank), int(size)
        if rank < 1 or size < 1:
            raise StructuralError(f"need rank >= 1 and size >= 1, got rank={rank}, size={size}")
        sup = np.array(sup, dtype=np.int64).reshape(-1)
        meet = np.array(meet, dtype=np.int64).reshape(-1)
        r = np.array(r, dtype=np.int64)
        if sup.size != size ** (rank + 1):
            raise StructuralError(f"sup table has {sup.size} entries, expected {size ** (rank + 1)}")
        if meet.size != size * size:
            raise StructuralError(f"meet table has {meet.size} entries, expected {size * size}")
        if r.shape != (rank, size):
            raise StructuralError(f"r tables have shape {r.shape}, expected {(rank, size)}")
        for name, t in (("sup", sup), ("meet", meet), ("r", r)):
            if t.min() < 0 or t.max() >= size:
                raise StructuralError(f"{name} table entry out of range 0..{size - 1}")
        for t in (sup, meet, r):
            t.setflags(write=False)
        self.rank = rank
        self.size = size
        self.sup = sup
        self.meet = meet
        self.r = r
        if zero is not None:
            zero = int(zero)
            if not 0 <= zero < size or not self.is_absorbing(zero):
                raise StructuralError(f"declared zero {zero} is not two-sided absorbing")
        self.zero = zero

    # -- views --------------------------------------------------------
    @cached_property
    def sup2(self) -> np.ndarray:
        """``sup`` as ``(G, G**n)``: outer element by flattened inner tuple."""
        return self.sup.reshape(self.size, -1)

    @cached_property
    def meet2(self) -> np.ndarray:
        return self.meet.reshape(self.size, self.size)

    @cached_property
    def r_flat(self) -> np.ndarray:
        """Flat inner index of ``(R_1 y, ..., R_n y)`` for every y."""
        return _flat([self.r[j] for j in range(self.rank)], self.size)

    @cached_property
    def rest(self) -> np.ndarray:
        """``rest[t, y] = t[R_1 y ... R_n y]``."""
        return self.sup2[:, self.r_flat]

    @cached_property
    def diag(self) -> np.ndarray:
        """``diag[x, y] = x[y ... y]``."""
        G = self.size
        step = sum(G**j for j in range(self.rank))
        return self.sup2[:, np.arange(G) * step]

    def compose(self, x: int, ys) -> int:
        ys = list(ys)
        if len(ys) != self.rank:
            raise StructuralError(f"need {self.rank} inner arguments, got {len(ys)}")
        return int(self.sup2[x, _flat([np.int64(y) for y in ys], self.size)])

    def meet_of(self, x: int, y: int) -> int:
        return int(self.meet2[x, y])

    def R(self, i: int, x: int) -> int:
        if not 1 <= i <= self.rank:
            raise StructuralError(f"R index {i} outside 1..{self.rank}")
        return int(self.r[i - 1, x])

    def is_absorbing(self, z: int) -> bool:
        G = self.size
        return bool((self.sup2[z] == z).all() and (self.diag[:, z] == z).all()) if G else False

    def with_zero(self, zero: Optional[int]) -> "AbstractAlgebra":
        return AbstractAlgebra(self.rank, self.size, self.sup, self.meet, self.r, zero)

    @cached_property
    def axiom_report(self) -> "AxiomReport":
        return check_axioms(self)

    def __eq__(self, other):
        if not isinstance(other, AbstractAlgebra):
            return NotImplemented
        return (
            self.rank == other.rank and self.size == other.size and self.zero == other.zero
            and np.array_equal(self.sup, other.sup) and np.array_equal(self.meet, other.meet)
            and np.array_equal(self.r, other.r)
        )

    __hash__ = None

    def __repr__(self):
        return f"AbstractAlgebra(rank={self.rank}, size={self.size}, zero={self.zero})"

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "size": self.size,
            "sup": self.sup.tolist(),
            "meet": self.meet.tolist(),
            "r": self.r.tolist(),
            "zero": self.zero,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "AbstractAlgebra":
        try:
            return cls(obj["rank"], obj["size"], obj["sup"], obj["meet"], obj["r"], obj.get("zero"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise StructuralError(f"malformed algebra object: {exc}") from exc


# ----------------------------------------------------------------------
# Axiom checking
# ----------------------------------------------------------------------

@dataclass
class Check:
    """Outcome of one exhaustive sweep; ``passed is None`` marks a skipped check."""

    passed: Optional[bool]
    counterexample: Optional[dict] = None

    @classmethod
    def skipped(cls, reason: str) -> "Check":
        return cls(None, {"reason": reason})

    @property
    def status(self) -> str:
        return "skipped" if self.passed is None else ("pass" if self.passed else "fail")

    @property
    def failed(self) -> bool:
        return self.passed is False

    def to_json(self) -> dict:
        return {"status": self.status, "counterexample": self.counterexample}


@dataclass
class AxiomReport:
    semilattice: dict = field(default_factory=dict)
    axioms: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.semilattice.values()) and all(
            c.passed for c in self.axioms.values()
        )

    def failures(self) -> list[str]:
        return [k for k, c in {**self.semilattice, **self.axioms}.items() if not c.passed]

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "semilattice": {k: c.to_json() for k, c in self.semilattice.items()},
            "axioms": {k: c.to_json() for k, c in self.axioms.items()},
        }


def _hit(bad: np.ndarray, names, decode=None) -> Check:
    """First True cell of ``bad`` (C order) as a named counterexample."""
    flat = np.flatnonzero(bad)
    if flat.size == 0:
        return Check(True)
    idx = [int(v) for v in np.unravel_index(flat[0], bad.shape)]
    if decode is not None:
        idx = decode(idx)
    return Check(False, dict(zip(names, idx)))


def _tuple(f, G, n):
    out = []
    for _ in range(n):
        out.append(f % G)
        f //= G
    return out[::-1]


def _semilattice(alg: AbstractAlgebra) -> dict:
    G = alg.size
    m2 = alg.meet2
    e = np.arange(G)
    return {
        "idempotent": _hit(m2[e, e] != e, ["x"]),
        "commutative": _hit(m2 != m2.T, ["x", "y"]),
        "associative": _hit(m2[m2[:, :, None], e[None, None, :]] != m2[e[:, None, None], m2[None, :, :]],
                            ["x", "y", "z"]),
    }


def check_axioms(alg: AbstractAlgebra) -> AxiomReport:
    """Exhaustive sweep of the semilattice laws and A1-A10.

    Every check runs even after earlier failures.  Counterexamples are the
    lexicographically first violating assignment in the quantifier order
    given by the keys of the counterexample dict.  In A3/A4/A6 an
    unbracketed ``R_i x[...]`` means ``R_i`` applied to ``x[...]``.
    """
    G, n = alg.size, alg.rank
    Gn = G**n
    sup2, meet2, r, rest = alg.sup2, alg.meet2, alg.r, alg.rest
    e = np.arange(G)
    ydig = _digits(G, n)
    rep = AxiomReport(semilattice=_semilattice(alg))
    ax = rep.axioms

    v = kernels.a1_violation(alg.sup, G, n)
    ax["A1"] = Check(True) if len(v) == 0 else Check(
        False, {"x": int(v[0]), "y": v[1:n + 1].tolist(), "z": v[n + 1:].tolist()})

    ax["A2"] = _hit(sup2[e, alg.r_flat] != e, ["x"])

    v = kernels.a3_violation(alg.sup, r, G, n)
    ax["A3"] = Check(True) if len(v) == 0 else Check(
        False, {"i": int(v[0]) + 1, "x": int(v[1]), "w": v[2:n + 2].tolist(), "y": int(v[n + 2])})

    # R_i(x[R y]) = (R_i x)[R y]
    lhs = r[:, rest]                       # (i, x, y)
    rhs = rest[r]                          # (i, x, y)
    ax["A4"] = _hit(lhs != rhs, ["i", "x", "y"], lambda t: [t[0] + 1, t[1], t[2]])

    # x[Ry][Rz] = x[Rz][Ry]
    lhs = rest[rest]                       # [x, y, z] = rest[rest[x,y], z]
    ax["A5"] = _hit(lhs != lhs.transpose(0, 2, 1), ["x", "y", "z"])

    # R_i(x[y]) = R_i((R_k x)[y])
    lhs = r[:, None, sup2]                 # (i, 1, x, yf)
    rhs = r[:, sup2[r]]                    # (i, k, x, yf)
    ax["A6"] = _hit(np.broadcast_to(lhs, rhs.shape) != rhs, ["i", "k", "x", "y"],
                    lambda t: [t[0] + 1, t[1] + 1, t[2], _tuple(t[3], G, n)])

    # (R_i x)[y] = y_i[R(x[y])]
    lhs = sup2[r]                          # (i, x, yf)
    inner = alg.r_flat[sup2]               # (x, yf)
    rhs = sup2[ydig.T[:, None, :], inner[None, :, :]]  # (i, x, yf)
    ax["A7"] = _hit(lhs != rhs, ["i", "x", "y"], lambda t: [t[0] + 1, t[1], _tuple(t[2], G, n)])

    # x meet y[Rz] = (x meet y)[Rz]
    lhs = meet2[e[:, None, None], rest[None, :, :]]
    rhs = rest[meet2]
    ax["A8"] = _hit(lhs != rhs, ["x", "y", "z"])

    # x meet y = x[R(x meet y)]
    ax["A9"] = _hit(meet2 != rest[e[:, None], meet2], ["x", "y"])

    v = kernels.a10_violation(alg.sup, alg.meet, G, n)
    ax["A10"] = Check(True) if len(v) == 0 else Check(
        False, {"x": int(v[0]), "y": int(v[1]), "z": v[2:].tolist()})
    return rep


def _require_axioms(alg: AbstractAlgebra):
    if not alg.axiom_report.passed:
        raise ContractError(
            f"algebra fails {', '.join(alg.axiom_report.failures())}; relation requires a passing algebra"
        )


# ----------------------------------------------------------------------
# Relations
# ----------------------------------------------------------------------

class BinaryRelation:
    """Relation on ``range(size)`` as a boolean matrix, plus attached verdicts."""

    def __init__(self, matrix, verdicts: Optional[dict] = None):
        m = np.array(matrix, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructuralError("relation matrix must be square")
        m.setflags(write=False)
        self.matrix = m
        self.size = m.shape[0]
        self.verdicts = dict(verdicts or {})

    def __contains__(self, pair) -> bool:
        x, y = pair
        return bool(self.matrix[x, y])

    def __eq__(self, other):
        if not isinstance(other, BinaryRelation):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    def image(self, x: int) -> set[int]:
        """``{y : (x, y) in rho}``."""
        return {int(y) for y in np.flatnonzero(self.matrix[x])}

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(self.matrix))]

    def is_reflexive(self) -> bool:
        return bool(self.matrix.diagonal().all())

    def is_symmetric(self) -> bool:
        return bool((self.matrix == self.matrix.T).all())

    def is_antisymmetric(self) -> bool:
        both = self.matrix & self.matrix.T
        return bool((both == np.eye(self.size, dtype=bool) & both).all())

    def is_transitive(self) -> bool:
        m = self.matrix.astype(np.int64)
        return bool(((m @ m > 0) <= self.matrix).all())

    def is_equivalence(self) -> bool:
        return self.is_reflexive() and self.is_symmetric() and self.is_transitive()

    def is_partial_order(self) -> bool:
        return self.is_reflexive() and self.is_antisymmetric() and self.is_transitive()

    def is_quasi_order(self) -> bool:
        return self.is_reflexive() and self.is_transitive()


def zeta(alg: AbstractAlgebra) -> BinaryRelation:
    """``x <= y`` iff ``x = y[R_1 x ... R_n x]``."""
    _require_axioms(alg)
    e = np.arange(alg.size)
    rel = BinaryRelation(alg.rest.T == e[:, None])
    rel.verdicts["partial_order"] = rel.is_partial_order()
    return rel


def chi(alg: AbstractAlgebra) -> BinaryRelation:
    """``x ⊏ y`` iff ``R_1 x <= R_1 y``; cross-checked against ``x[R y] = x``."""
    z = zeta(alg).matrix
    r1 = alg.r[0]
    via_r = z[np.ix_(r1, r1)]
    e = np.arange(alg.size)
    via_rest = alg.rest == e[:, None]
    rel = BinaryRelation(via_r)
    rel.verdicts["quasi_order"] = rel.is_quasi_order()
    rel.verdicts["forms_agree"] = bool(np.array_equal(via_r, via_rest))
    return rel


def find_zero(alg: AbstractAlgebra) -> Optional[int]:
    """The two-sided absorbing element of the superposition, if any."""
    G = alg.size
    e = np.arange(G)
    outer = (alg.sup2 == e[:, None]).all(axis=1)
    inner = (alg.diag == e[None, :]).all(axis=0)
    hits = np.flatnonzero(outer & inner)
    return int(hits[0]) if hits.size else None


def _mask(alg: AbstractAlgebra, H) -> np.ndarray:
    if isinstance(H, np.ndarray) and H.dtype == bool:
        if H.shape != (alg.size,):
            raise StructuralError("subset mask has wrong length")
        return H
    mask = np.zeros(alg.size, dtype=bool)
    for h in H:
        if not 0 <= int(h) < alg.size:
            raise StructuralError(f"element {h} outside carrier")
        mask[int(h)] = True
    return mask


def is_meet_quasi_stable(alg: AbstractAlgebra, H: Iterable[int]) -> bool:
    """``x in H`` implies ``x[x ... x] meet x in H``."""
    h = _mask(alg, H)
    if not h.any():
        raise ContractError("quasi-stability is defined for nonempty subsets only")
    e = np.arange(alg.size)
    q = alg.meet2[alg.diag[e, e], e]
    return bool(h[q[h]].all())


def is_l_ideal(alg: AbstractAlgebra, H: Iterable[int]) -> bool:
    """``x[y1 ... yn] in H`` whenever some ``yi`` is in ``H``."""
    h = _mask(alg, H)
    touches = h[_digits(alg.size, alg.rank)].any(axis=1)
    return bool(h[alg.sup2[:, touches]].all())


@dataclass
class RelationFlags:
    stable: Check
    l_regular: Check
    v_regular: Check
    i_regular: list
    v_negative: Check

    def flags(self) -> dict:
        return {
            "stable": self.stable.passed,
            "l_regular": self.l_regular.passed,
            "v_regular": self.v_regular.passed,
            "i_regular": [c.passed for c in self.i_regular],
            "v_negative": self.v_negative.passed,
        }


def _pairs_check(v, n, lead):
    if len(v) == 0:
        return Check(True)
    v = v.tolist()
    out = dict(zip(lead, v[:len(lead)]))
    rest = v[len(lead):]
    out["pairs"] = [rest[2 * j:2 * j + 2] for j in range(n)]
    return Check(False, out)


def relation_properties(alg: AbstractAlgebra, rho: BinaryRelation) -> RelationFlags:
    """Stability and regularity flags of ``rho``, each from a short-circuiting sweep."""
    G, n = alg.size, alg.rank
    if rho.size != G:
        raise StructuralError("relation carrier does not match algebra")
    rel = np.ascontiguousarray(rho.matrix)
    stable = _pairs_check(kernels.stable_violation(alg.sup, rel, G, n), n, ["x", "y"])
    v_reg = _pairs_check(kernels.v_regular_violation(alg.sup, rel, G, n), n, ["z"])
    v = kernels.l_regular_violation(alg.sup, rel, G, n)
    l_reg = Check(True) if len(v) == 0 else Check(
        False, {"x": int(v[0]), "y": int(v[1]), "z": v[2:].tolist()})
    i_reg = []
    for i in range(n):
        v = kernels.i_regular_violation(alg.sup, rel, i, G, n)
        i_reg.append(Check(True) if len(v) == 0 else Check(
            False, {"x": int(v[0]), "y": int(v[1]), "u": int(v[2]), "w": v[3:].tolist()}))
    # (x[y], y_i) in rho
    ydig = _digits(G, n)
    bad = ~rel[alg.sup2[None, :, :], ydig.T[:, None, :]]  # (i, x, yf)
    v_neg = _hit(bad, ["i", "x", "y"], lambda t: [t[0] + 1, t[1], _tuple(t[2], G, n)])
    return RelationFlags(stable, l_reg, v_reg, i_reg, v_neg)


def check_relation_laws(alg: AbstractAlgebra) -> dict:
    """The displayed order laws linking ``<=``, ``⊏`` and the ``R_i``.

    Meaningful on algebras that pass :func:`check_axioms`; runs regardless
    so that fault-injected tables name the law they break.
    """
    G, n = alg.size, alg.rank
    e = np.arange(G)
    r, sup2, rest = alg.r, alg.sup2, alg.rest
    Z = rest.T == e[:, None]                     # x <= y
    r1 = r[0]
    C = Z[np.ix_(r1, r1)]                        # x ⊏ y
    ydig = _digits(G, n)
    laws = {}
    ZR = Z[r[:, :, None], r[:, None, :]]         # (i, x, y): R_i x <= R_i y
    laws["zeta_monotone_R"] = _hit(Z[None] & ~ZR, ["i", "x", "y"], lambda t: [t[0] + 1, t[1], t[2]])
    laws["chi_iff_R_below"] = _hit(C[None] != ZR, ["i", "x", "y"], lambda t: [t[0] + 1, t[1], t[2]])
    laws["chi_iff_restriction"] = _hit(C != (rest == e[:, None]), ["x", "y"])
    # (R_i x)[y] <= y_i
    comp = sup2[r]                                # (i, x, yf)
    yi = np.broadcast_to(ydig.T[:, None, :], comp.shape)
    laws["R_composite_below_arg"] = _hit(~Z[comp, yi], ["i", "x", "y"],
                                         lambda t: [t[0] + 1, t[1], _tuple(t[2], G, n)])
    # x[R_1 y_1 ... R_n y_n] <= x
    rflat = _flat([r[j][ydig[:, j]] for j in range(n)], G)
    laws["restriction_below"] = _hit(~Z[sup2[:, rflat], e[:, None]], ["x", "y"],
                                     lambda t: [t[0], _tuple(t[1], G, n)])
    # R_i x = R_i R_k x
    laws["R_absorbs_R"] = _hit(r[:, None, :] != r[:, r], ["i", "k", "x"],
                               lambda t: [t[0] + 1, t[1] + 1, t[2]])
    laws["chi_contains_zeta"] = _hit(Z & ~C, ["x", "y"])
    zr, cr = BinaryRelation(Z), BinaryRelation(C)
    laws["zeta_partial_order"] = Check(zr.is_partial_order())
    laws["chi_quasi_order"] = Check(cr.is_quasi_order())
    return laws
