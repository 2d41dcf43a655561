"""Per-instance analysis and the corpus driver behind the ``corpus`` command."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .algebra import Check, check_relation_laws, chi, zeta
from .enumeration import DEFAULT_MAX_MEMBERS, ConcreteAlgebra, abstractify, enumerate_closed
from .nfun import UNDEFINED, fixed_points
from .representation import Representation, is_faithful
from .stationary import (
    DEFAULT_EXHAUSTIVE_CAP,
    DEFAULT_SAMPLES,
    RepresentationCache,
    check_zero_forces_whole,
    check_null_equivalence,
    check_fixed_point_implications,
    check_stationary_consequences,
    stationary_mask,
    verify_characterization,
)


@dataclass(frozen=True)
class SweepConfig:
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP
    samples: int = DEFAULT_SAMPLES
    seed: int = 0


def instance_seed(seed: int, index: int) -> int:
    """Seed for the subset sample of instance ``index``, independent of scheduling."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _status(checks: dict) -> dict:
    return {k: c.status for k, c in checks.items()}


def _failed(checks: dict) -> list:
    return [k for k, c in checks.items() if c.failed]


def concrete_orders(phi: ConcreteAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """Graph inclusion and domain inclusion between members."""
    T = phi.tables
    d = T != UNDEFINED
    graph = (~d[:, None, :] | (T[:, None, :] == T[None, :, :])).all(axis=-1)
    dom = (~d[:, None, :] | d[None, :, :]).all(axis=-1)
    return graph, dom


def identity_pullback(phi: ConcreteAlgebra, alg) -> Check:
    """The member tables form a faithful representation whose pullback is St."""
    P = Representation(alg, phi.base, origin=None, _tables=phi.tables.astype(np.int64))
    if not P.is_representation:
        return Check(False, {"reason": "identity map is not a homomorphism"})
    if not is_faithful(P):
        return Check(False, {"reason": "identity map is not injective"})
    direct = np.array([bool(fixed_points(f)) for f in phi.members], dtype=bool)
    diff = np.flatnonzero(direct != P.fixed_point_mask())
    return Check(True) if diff.size == 0 else Check(False, {"x": int(diff[0])})


def analyze_instance(phi: ConcreteAlgebra, config: SweepConfig = SweepConfig(),
                     index: int = 0) -> dict:
    """Every check applicable to one concrete algebra, as a JSON-ready record.

    ``findings`` lists the names of failed checks; an empty list means the
    instance verified.
    """
    alg, _ = abstractify(phi)
    st = stationary_mask(phi)
    rec = {
        "index": index,
        "size": phi.size,
        "zero": alg.zero,
        "stationary": int(st.sum()),
    }
    checks = {}
    checks["axioms"] = Check(alg.axiom_report.passed,
                             None if alg.axiom_report.passed else {"failures": alg.axiom_report.failures()})
    laws = check_relation_laws(alg)
    checks["relation_laws"] = Check(not _failed(laws), {"failures": _failed(laws)} if _failed(laws) else None)
    graph, dom = concrete_orders(phi)
    checks["zeta_is_graph_inclusion"] = Check(bool(np.array_equal(zeta(alg).matrix, graph)))
    checks["chi_is_domain_inclusion"] = Check(bool(np.array_equal(chi(alg).matrix, dom)))
    checks["identity_pullback"] = identity_pullback(phi, alg)

    prop = check_fixed_point_implications(phi, alg)
    checks.update({f"concrete.{k}": c for k, c in prop.items()})
    checks["null_equivalence"] = check_null_equivalence(phi, alg)

    if alg.zero is None:
        checks["zero_free_all_stationary"] = Check(bool(st.all()),
                                                   None if st.all() else {"x": int(np.argmin(st))})
        rec["sweep"] = None
    else:
        cache = RepresentationCache(alg)
        sweep = verify_characterization(alg, config.exhaustive_cap, config.samples,
                                   instance_seed(config.seed, index), concrete_st=st, cache=cache)
        checks["necessity"] = sweep.necessity
        mism = sweep.mismatch_indices
        checks["syntactic_equals_semantic"] = Check(
            mism.size == 0, None if mism.size == 0 else {"H": _bits(sweep.masks[mism[0]])})
        for name, ok in sweep.representation_ok.items():
            checks[f"faithful_sum_{name}"] = Check(ok)
        cor, consequences = Check(True), {}
        for k in sweep.stationary_indices:
            h = sweep.masks[k]
            c = check_zero_forces_whole(alg, h)
            if c.failed and cor.passed:
                cor = Check(False, {"H": _bits(h), **c.counterexample})
            for name, c in check_stationary_consequences(alg, h).items():
                if c.failed and consequences.get(name, Check(True)).passed:
                    consequences[name] = Check(False, {"H": _bits(h), **c.counterexample})
                consequences.setdefault(name, Check(True))
        checks["zero_in_subset_means_all"] = cor
        checks.update({f"consequence.{k}": c for k, c in consequences.items()})
        rec["sweep"] = {**sweep.counts(), "stationary_subsets": [_bits(sweep.masks[k]) for k in sweep.stationary_indices]}
    rec["checks"] = _status(checks)
    rec["findings"] = _failed(checks)
    rec["counterexamples"] = {k: checks[k].counterexample for k in rec["findings"]}
    return rec


def _bits(h) -> int:
    return sum(1 << int(x) for x in np.flatnonzero(h))


def _analyze_job(args):
    obj, config, index = args
    return analyze_instance(ConcreteAlgebra.from_json(obj), config, index)


def analyze_corpus(algebras: list, config: SweepConfig = SweepConfig(), jobs: int = 1) -> list:
    """Records for every algebra, in input order regardless of ``jobs``."""
    if jobs <= 1 or len(algebras) <= 1:
        return [analyze_instance(phi, config, k) for k, phi in enumerate(algebras)]
    payload = [(phi.to_json(), config, k) for k, phi in enumerate(algebras)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_analyze_job, payload, chunksize=max(1, len(payload) // (4 * jobs))))


def summarize(records: list) -> dict:
    out = {
        "instances": len(records),
        "with_zero": sum(r["zero"] is not None for r in records),
        "zero_free": sum(r["zero"] is None for r in records),
        "empty_stationary": sum(r["stationary"] == 0 for r in records),
        "subsets_checked": sum(r["sweep"]["subsets"] for r in records if r["sweep"]),
        "stationary_subsets": sum(len(r["sweep"]["stationary_subsets"]) for r in records if r["sweep"]),
        "mismatches": sum(r["sweep"]["mismatches"] for r in records if r["sweep"]),
        "instances_with_findings": sum(bool(r["findings"]) for r in records),
    }
    failing = {}
    for r in records:
        for k in r["findings"]:
            failing[k] = failing.get(k, 0) + 1
    out["failures_by_check"] = dict(sorted(failing.items()))
    return out


def run_corpus(m: int, n: int, max_members: int = DEFAULT_MAX_MEMBERS,
               config: SweepConfig = SweepConfig(), jobs: int = 1,
               stats: Optional[dict] = None) -> tuple[list, list]:
    """Enumerate, then analyze every closed algebra; returns ``(algebras, records)``."""
    algebras = enumerate_closed(m, n, max_members, stats=stats)
    return algebras, analyze_corpus(algebras, config, jobs)


def report_header(command: str, config: dict, seed: int) -> dict:
    return {"tool": "menger", "version": __version__, "command": command,
            "config": config, "seed": seed}
