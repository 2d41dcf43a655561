"""Stationary subsets: members with a diagonal fixed point, and their abstract characterization.

Concretely, ``St(Phi)`` collects the functions ``f`` with ``f(a, ..., a) = a``
for some ``a``.  Abstractly, a nonempty ``H`` is stationary when some
faithful representation pulls the concrete notion back to exactly ``H``.
The syntactic test is a ∧-quasi-stability requirement plus three closure
conditions involving the zero; the semantic test builds the sum of the
simplest representations attached to every element (dropping the zero when
it lies outside ``H``) and compares its fixed-point pullback with ``H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .algebra import AbstractAlgebra, Check, _mask, chi, find_zero, zeta
from .enumeration import ConcreteAlgebra, abstractify
from .errors import ClosureViolation, ContractError
from .nfun import UNDEFINED, compose_tables, diagonal_slots, meet_tables, restrict_tables
from .representation import (
    Representation,
    build_eg_wg,
    is_faithful,
    simplest_representation,
    sum_representations,
)

CONDITIONS = ("quasi_stable", "zero_restriction", "fixed_diagonal", "diagonal_meet_nonzero")

DEFAULT_EXHAUSTIVE_CAP = 12
DEFAULT_SAMPLES = 10_000


# ----------------------------------------------------------------------
# concrete side
# ----------------------------------------------------------------------

def stationary_mask(phi: ConcreteAlgebra) -> np.ndarray:
    """Per member: does it have a fixed point on the diagonal?"""
    diag = phi.tables[:, diagonal_slots(phi.base, phi.rank)]
    return (diag == np.arange(phi.base)[None, :]).any(axis=1)


def stationary_subset(phi: ConcreteAlgebra) -> frozenset:
    """Indices (canonical member order) of the members with a fixed point."""
    return frozenset(int(k) for k in np.flatnonzero(stationary_mask(phi)))


def _lookup_all(phi: ConcreteAlgebra, tables) -> np.ndarray:
    idx = phi.lookup(np.asarray(tables, dtype=np.int32))
    if (idx < 0).any():
        raise ClosureViolation("an operation result is not a member")
    return idx


@dataclass
class _ConcreteOps:
    """Member-index tables of the concrete operations that the implications use."""

    st: np.ndarray
    included: np.ndarray      # included[f, g]: graph of f inside graph of g
    diag_sq: np.ndarray       # diag_sq[f, g] = f[g ... g]
    meet: np.ndarray
    r: np.ndarray             # r[i, f] = R_{i+1} f
    empty: np.ndarray         # empty[f]: f is the empty function


def _concrete_ops(phi: ConcreteAlgebra) -> _ConcreteOps:
    m, n = phi.base, phi.rank
    T = phi.tables.astype(np.int64)
    defined = T != UNDEFINED
    included = (~defined[:, None, :] | (T[:, None, :] == T[None, :, :])).all(axis=-1)
    sq = compose_tables(T[:, None, :], [T[None, :, :]] * n, m, n)
    meet = meet_tables(T[:, None, :], T[None, :, :])
    r = np.stack([restrict_tables(i, T, m, n) for i in range(1, n + 1)])
    return _ConcreteOps(
        st=stationary_mask(phi),
        included=included,
        diag_sq=_lookup_all(phi, sq),
        meet=_lookup_all(phi, meet),
        r=_lookup_all(phi, r),
        empty=~defined.any(axis=1),
    )


def _first(bad: np.ndarray, names) -> Check:
    hit = np.flatnonzero(bad)
    if hit.size == 0:
        return Check(True)
    idx = np.unravel_index(hit[0], bad.shape)
    out = {}
    for name, v in zip(names, idx):
        out[name] = int(v) + 1 if name == "i" else int(v)
    return Check(False, out)


def check_fixed_point_implications(phi: ConcreteAlgebra, alg: Optional[AbstractAlgebra] = None) -> dict:
    """Sweep the eight fixed-point implications over all members and indices.

    Evaluated on the concrete functions; only the identity of the zero is
    taken from the abstract tables.  Implications that mention the zero are
    reported as skipped when there is none.
    """
    if alg is None:
        alg, _ = abstractify(phi)
    ops = _concrete_ops(phi)
    st, sq = ops.st, ops.diag_sq
    z = alg.zero if alg.zero is not None else find_zero(alg)
    G = phi.size
    g_col = np.arange(G)[None, :]
    out = {
        "inclusion_upward": _first(ops.included & st[:, None] & ~st[None, :], ["f", "g"]),
        "self_superposition": _first(st & ~st[sq[np.arange(G), np.arange(G)]], ["f"]),
        "restriction": _first(st[None, :] & ~st[ops.r], ["i", "f"]),
        "fixes_stationary": _first((sq == g_col) & st[None, :] & ~st[:, None], ["f", "g"]),
    }
    if z is None:
        reason = "no zero"
        for key in ("fixes_nonzero", "nonzero_superposition_restriction",
                    "meets_argument", "zero_restriction"):
            out[key] = Check.skipped(reason)
        return out
    out["fixes_nonzero"] = _first((sq == g_col) & (g_col != z) & ~st[:, None], ["f", "g"])
    nz = sq != z
    out["nonzero_superposition_restriction"] = _first(
        nz[None, :, :] & ~st[ops.r][:, :, None], ["i", "f", "g"])
    meets = ops.meet[sq, np.arange(G)[None, :]]
    out["meets_argument"] = _first((meets != z) & ~st[:, None], ["f", "g"])
    if st[z]:
        out["zero_restriction"] = Check(True)
    else:
        out["zero_restriction"] = _first(ops.r[:, z] != z, ["i"])
    return out


def check_null_equivalence(phi: ConcreteAlgebra, alg: Optional[AbstractAlgebra] = None) -> Check:
    """The zero is a nonempty function exactly when every member is stationary."""
    if alg is None:
        alg, _ = abstractify(phi)
    z = alg.zero if alg.zero is not None else find_zero(alg)
    if z is None:
        return Check.skipped("no zero")
    zero_nonempty = bool((phi.tables[z] != UNDEFINED).any())
    all_stationary = bool(stationary_mask(phi).all())
    if zero_nonempty == all_stationary:
        return Check(True)
    return Check(False, {"zero": int(z), "zero_nonempty": zero_nonempty,
                         "all_stationary": all_stationary})


# ----------------------------------------------------------------------
# syntactic side
# ----------------------------------------------------------------------

def _require_zero(alg: AbstractAlgebra) -> int:
    z = alg.zero if alg.zero is not None else find_zero(alg)
    if z is None:
        raise ContractError(
            "algebra has no zero; in a zero-free algebra every element is stationary"
        )
    return z


@dataclass
class SyntacticVerdict:
    passed: bool
    failing_condition: Optional[str] = None
    counterexample: Optional[dict] = None

    def to_json(self) -> dict:
        return {"pass": self.passed, "failing_condition": self.failing_condition,
                "counterexample": self.counterexample}


class _SyntacticTables:
    """Subset-independent data for the four conditions, reusable across subsets."""

    def __init__(self, alg: AbstractAlgebra):
        z = _require_zero(alg)
        G = alg.size
        e = np.arange(G)
        self.zero = z
        self.size = G
        self.quasi = alg.meet2[alg.diag[e, e], e]
        self.zero_moved = [i + 1 for i in range(alg.rank) if alg.r[i][z] != z]
        # fixes[y, x]: x[y ... y] = y
        self.fixes = (alg.diag == e[None, :]).T
        # forced[x]: some y has x[y ... y] meet y != zero
        dm = alg.meet2[alg.diag, e[None, :]]
        self.forced = (dm != z).any(axis=1)
        self._forced_y = np.argmax(dm != z, axis=1)

    def first_failure(self, h: np.ndarray) -> SyntacticVerdict:
        bad = h & ~h[self.quasi]
        if bad.any():
            x = int(np.argmax(bad))
            return SyntacticVerdict(False, "quasi_stable", {"x": x, "image": int(self.quasi[x])})
        if not h[self.zero] and self.zero_moved:
            return SyntacticVerdict(False, "zero_restriction", {"i": self.zero_moved[0]})
        bad = self.fixes & h[:, None] & ~h[None, :]
        if bad.any():
            y, x = np.unravel_index(np.argmax(bad), bad.shape)
            return SyntacticVerdict(False, "fixed_diagonal", {"x": int(x), "y": int(y)})
        bad = self.forced & ~h
        if bad.any():
            x = int(np.argmax(bad))
            return SyntacticVerdict(False, "diagonal_meet_nonzero",
                                    {"x": x, "y": int(self._forced_y[x])})
        return SyntacticVerdict(True)

    def batch(self, masks: np.ndarray) -> np.ndarray:
        """Index into :data:`CONDITIONS` of the first failing condition, -1 if none."""
        H = np.asarray(masks, dtype=bool)
        out = np.full(H.shape[0], -1, dtype=np.int64)
        fails = [
            (H & ~H[:, self.quasi]).any(axis=1),
            ~H[:, self.zero] if self.zero_moved else np.zeros(H.shape[0], dtype=bool),
            (((H.astype(np.float32) @ self.fixes.astype(np.float32)) > 0) & ~H).any(axis=1),
            (~H[:, self.forced]).any(axis=1),
        ]
        for k in range(len(fails) - 1, -1, -1):
            out[fails[k]] = k
        return out


def syntactic_conditions(alg: AbstractAlgebra, H: Iterable[int]) -> SyntacticVerdict:
    """∧-quasi-stability and the three zero conditions, checked in that order."""
    h = _mask(alg, H)
    if not h.any():
        raise ContractError("stationary subsets are nonempty by definition")
    return _SyntacticTables(alg).first_failure(h)


def syntactic_batch(alg: AbstractAlgebra, masks: np.ndarray) -> np.ndarray:
    """Vectorized :func:`syntactic_conditions` over rows of a bool matrix."""
    masks = np.asarray(masks, dtype=bool)
    if masks.ndim != 2 or masks.shape[1] != alg.size:
        raise ContractError("masks must have shape (k, size)")
    if not masks.any(axis=1).all():
        raise ContractError("stationary subsets are nonempty by definition")
    return _SyntacticTables(alg).batch(masks)


# ----------------------------------------------------------------------
# semantic side
# ----------------------------------------------------------------------

class RepresentationCache:
    """Simplest representations ``P_h`` of one algebra, built once and shared.

    The sum used for a subset depends only on whether the zero belongs to
    it, so at most two sums are ever needed.
    """

    def __init__(self, alg: AbstractAlgebra):
        self.alg = alg
        self.zero = _require_zero(alg)
        self._parts: dict[int, Representation] = {}
        self._sums: dict[bool, Representation] = {}
        self._summary: dict[bool, dict] = {}

    def part(self, h: int) -> Representation:
        if h not in self._parts:
            self._parts[h] = simplest_representation(self.alg, build_eg_wg(self.alg, h), origin=h)
        return self._parts[h]

    def origins(self, zero_in_h: bool) -> list[int]:
        return [h for h in range(self.alg.size) if zero_in_h or h != self.zero]

    def sum_for(self, zero_in_h: bool) -> Representation:
        if zero_in_h not in self._sums:
            parts = [self.part(h) for h in self.origins(zero_in_h)]
            self._sums[zero_in_h] = sum_representations(self.alg, parts)
        return self._sums[zero_in_h]

    def summary(self, zero_in_h: bool) -> dict:
        """Representation verdict, faithfulness and fixed-point mask of one sum."""
        if zero_in_h not in self._summary:
            P = self.sum_for(zero_in_h)
            self._summary[zero_in_h] = {
                "verdict": P.verdict,
                "is_representation": P.is_representation,
                "faithful": is_faithful(P),
                "fixed": P.fixed_point_mask(),
            }
        return self._summary[zero_in_h]


@dataclass
class SemanticVerdict:
    passed: bool
    is_representation: bool
    faithful: bool
    pullback_matches: bool
    origins: list = field(default_factory=list)
    mismatch: Optional[int] = None
    fixed_point_witnesses: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "is_representation": self.is_representation,
            "faithful": self.faithful,
            "pullback_matches": self.pullback_matches,
            "mismatch": self.mismatch,
            "witness": {
                "origins": self.origins,
                "fixed_points": {str(g): list(w) for g, w in self.fixed_point_witnesses.items()},
            },
        }


def semantic_check(alg: AbstractAlgebra, H: Iterable[int],
                   cache: Optional[RepresentationCache] = None,
                   witnesses: bool = True) -> SemanticVerdict:
    """Build the sum of simplest representations and test its fixed-point pullback."""
    h = _mask(alg, H)
    if not h.any():
        raise ContractError("stationary subsets are nonempty by definition")
    cache = cache or RepresentationCache(alg)
    zero_in = bool(h[cache.zero])
    info = cache.summary(zero_in)
    diff = np.flatnonzero(info["fixed"] != h)
    ok = info["is_representation"] and info["faithful"] and diff.size == 0
    fp = {}
    if witnesses and ok:
        P = cache.sum_for(zero_in)
        fp = {int(g): P.fixed_point_witness(int(g)) for g in np.flatnonzero(h)}
    return SemanticVerdict(
        passed=bool(ok),
        is_representation=bool(info["is_representation"]),
        faithful=bool(info["faithful"]),
        pullback_matches=bool(diff.size == 0),
        origins=cache.origins(zero_in),
        mismatch=int(diff[0]) if diff.size else None,
        fixed_point_witnesses=fp,
    )


# ----------------------------------------------------------------------
# the characterization sweep
# ----------------------------------------------------------------------

def mask_to_bits(h: np.ndarray) -> int:
    """Bitmask with element ``x`` at bit ``x``."""
    return sum(1 << int(x) for x in np.flatnonzero(h))


def bits_to_mask(bits: int, size: int) -> np.ndarray:
    return np.array([(bits >> x) & 1 for x in range(size)], dtype=bool)


@dataclass
class SubsetVerdict:
    bits: int
    syntactic: SyntacticVerdict
    semantic: SemanticVerdict

    @property
    def mismatch(self) -> bool:
        return self.syntactic.passed != self.semantic.passed

    def to_json(self) -> dict:
        return {
            "H": self.bits,
            "syntactic": self.syntactic.passed,
            "semantic": self.semantic.passed,
            "failing_condition": self.syntactic.failing_condition,
            "witness": self.semantic.to_json()["witness"] if self.semantic.passed else None,
        }


class SweepReport:
    """Verdicts on a family of subsets, ordered by bitmask.

    Pass/fail arrays are computed in bulk; :meth:`verdict` materializes the
    detailed record of one subset on demand.
    """

    def __init__(self, alg, masks, first_fail, semantic_pass, exhaustive, necessity, cache, tabs):
        self.alg = alg
        self.size = alg.size
        self.masks = masks
        self.first_fail = first_fail
        self.syntactic_pass = first_fail < 0
        self.semantic_pass = semantic_pass
        self.exhaustive = exhaustive
        self.necessity = necessity
        self._cache = cache
        self._tabs = tabs
        self.representation_ok = {
            ("with_zero" if z else "without_zero"): bool(
                cache.summary(z)["is_representation"] and cache.summary(z)["faithful"])
            for z in (False, True)
        }

    def __len__(self):
        return self.masks.shape[0]

    def verdict(self, k: int) -> SubsetVerdict:
        h = self.masks[k]
        syn = self._tabs.first_failure(h) if self.first_fail[k] >= 0 else SyntacticVerdict(True)
        sem = semantic_check(self.alg, h, self._cache, witnesses=bool(self.semantic_pass[k]))
        return SubsetVerdict(mask_to_bits(h), syn, sem)

    def verdicts(self):
        for k in range(len(self)):
            yield self.verdict(k)

    @property
    def mismatch_indices(self) -> np.ndarray:
        return np.flatnonzero(self.syntactic_pass != self.semantic_pass)

    @property
    def stationary_indices(self) -> np.ndarray:
        """Subsets passing both tests."""
        return np.flatnonzero(self.syntactic_pass & self.semantic_pass)

    @property
    def findings(self) -> int:
        return int(self.mismatch_indices.size) + int(self.necessity.failed) + sum(
            not ok for ok in self.representation_ok.values())

    def counts(self) -> dict:
        return {
            "subsets": len(self),
            "exhaustive": self.exhaustive,
            "syntactic_pass": int(self.syntactic_pass.sum()),
            "semantic_pass": int(self.semantic_pass.sum()),
            "mismatches": int(self.mismatch_indices.size),
        }


def _candidates(G: int, cap: int, samples: int, seed: int, extra: list) -> tuple[np.ndarray, bool]:
    if G <= cap:
        bits = np.arange(1, 1 << G, dtype=np.int64)
        return ((bits[:, None] >> np.arange(G)[None, :]) & 1).astype(bool), True
    rng = np.random.default_rng(seed)
    masks = rng.random((samples, G)) < 0.5
    masks = np.concatenate([masks, np.array(extra, dtype=bool).reshape(-1, G)])
    masks = np.unique(masks[masks.any(axis=1)], axis=0)
    # ascending bitmask: the highest element is the most significant key
    return masks[np.lexsort(masks.T)], False


def verify_characterization(alg: AbstractAlgebra, exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
                       samples: int = DEFAULT_SAMPLES, seed: int = 0,
                       concrete_st: Optional[np.ndarray] = None,
                       cache: Optional[RepresentationCache] = None) -> SweepReport:
    """Compare the syntactic and semantic verdicts on nonempty subsets.

    Exhaustive up to ``exhaustive_cap`` elements.  Beyond that a seeded
    random sample is taken, topped up with the whole carrier, the
    fixed-point pullbacks of both representation sums and ``concrete_st``
    so that the passing subsets are always exercised.
    """
    cache = cache or RepresentationCache(alg)
    tabs = _SyntacticTables(alg)
    G = alg.size
    extra = [np.ones(G, dtype=bool), cache.summary(False)["fixed"], cache.summary(True)["fixed"]]
    if concrete_st is not None:
        extra.append(np.asarray(concrete_st, dtype=bool))
    masks, exhaustive = _candidates(G, exhaustive_cap, samples, seed, extra)
    first_fail = tabs.batch(masks)

    semantic = np.zeros(masks.shape[0], dtype=bool)
    zero_in = masks[:, tabs.zero]
    for z in (False, True):
        info = cache.summary(z)
        if info["is_representation"] and info["faithful"]:
            sel = zero_in == z
            semantic[sel] = (masks[sel] == info["fixed"][None, :]).all(axis=1)

    if concrete_st is None:
        necessity = Check.skipped("no concrete model")
    elif not np.any(concrete_st):
        necessity = Check.skipped("empty stationary subset")
    else:
        syn = tabs.first_failure(np.asarray(concrete_st, dtype=bool))
        necessity = Check(True) if syn.passed else Check(
            False, {"failing_condition": syn.failing_condition, **(syn.counterexample or {})})
    return SweepReport(alg, masks, first_fail, semantic, exhaustive, necessity, cache, tabs)


def check_zero_forces_whole(alg: AbstractAlgebra, H: Iterable[int]) -> Check:
    """A stationary subset containing the zero is the whole carrier."""
    h = _mask(alg, H)
    z = _require_zero(alg)
    if h[z] and not h.all():
        return Check(False, {"missing": int(np.argmin(h))})
    return Check(True)


def check_stationary_consequences(alg: AbstractAlgebra, H: Iterable[int]) -> dict:
    """Sweep the eight consequences that every stationary subset satisfies."""
    h = _mask(alg, H)
    z = _require_zero(alg)
    G, n = alg.size, alg.rank
    le = zeta(alg).matrix
    sq = chi(alg).matrix
    e = np.arange(G)
    r = alg.r
    dg = alg.diag
    zin = bool(h[z])
    col = e[None, :]
    return {
        "zero_below_all": Check(True) if zin else _first(~le[z], ["x"]),
        "upward_closed": _first(le & h[:, None] & ~h[None, :], ["x", "y"]),
        "self_superposition": _first(h & ~h[dg[e, e]], ["x"]),
        "restriction": _first(h[None, :] & ~h[r], ["i", "x"]),
        "nonzero_superposition_restriction": _first(
            (dg != z)[None, :, :] & ~h[r][:, :, None], ["i", "x", "y"]),
        "fixes_nonzero": _first((dg == col) & (col != z) & ~h[:, None], ["x", "y"]),
        "domain_above_restriction": _first(
            (h[:, None] & sq)[None, :, :] & ~h[r][:, None, :], ["i", "x", "y"]),
        "below_zero_domain": Check(True) if zin else _first(sq[:, z] & (e != z), ["x"]),
    }
