import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from menger.enumeration import ConcreteAlgebra, abstractify
from menger.errors import ContractError
from menger.nfun import NPlaceFunction
from menger.stationary import (
    CONDITIONS,
    RepresentationCache,
    bits_to_mask,
    check_zero_forces_whole,
    check_null_equivalence,
    check_fixed_point_implications,
    check_stationary_consequences,
    mask_to_bits,
    semantic_check,
    stationary_mask,
    stationary_subset,
    syntactic_batch,
    syntactic_conditions,
    verify_characterization,
)

from conftest import EMPTY, ID, SWAP


def zero_free(corpus):
    return next((phi, alg) for phi, alg in corpus if alg.zero is None)


def one_point():
    phi = ConcreteAlgebra(2, 1, [[0, 1]])
    return phi, abstractify(phi)[0]


# -- concrete side ---------------------------------------------------------

def test_stationary_subset_examples(micro, corpus_m2n1):
    assert stationary_subset(micro[0]) == {ID}
    phi, _ = zero_free(corpus_m2n1)
    assert stationary_subset(phi) == set(range(phi.size))
    assert stationary_subset(ConcreteAlgebra(2, 1, [[-1, -1]])) == frozenset()


def test_implications_on_micro(micro):
    phi, alg = micro
    out = check_fixed_point_implications(phi, alg)
    assert len(out) == 8 and all(c.status == "pass" for c in out.values())


def test_implications_skips_zero_clauses_without_zero(corpus_m2n1):
    phi, alg = zero_free(corpus_m2n1)
    out = check_fixed_point_implications(phi, alg)
    skipped = {k for k, c in out.items() if c.status == "skipped"}
    assert skipped == {"fixes_nonzero", "nonzero_superposition_restriction",
                       "meets_argument", "zero_restriction"}
    assert not any(c.failed for c in out.values())


def test_implications_detects_wrong_stationary_set(micro, monkeypatch):
    import menger.stationary as mod

    phi, alg = micro
    monkeypatch.setattr(mod, "stationary_mask", lambda p: np.array([False, False, True]))
    out = mod.check_fixed_point_implications(phi, alg)
    assert out["fixes_stationary"].failed


def test_null_equivalence(micro, corpus_m2n1):
    assert check_null_equivalence(*micro).passed
    assert check_null_equivalence(*zero_free(corpus_m2n1)).status == "skipped"
    phi, alg = one_point()
    assert alg.zero == 0 and check_null_equivalence(phi, alg).passed


# -- syntactic side --------------------------------------------------------

def test_syntactic_examples(micro):
    _, alg = micro
    assert syntactic_conditions(alg, [ID]).passed
    v = syntactic_conditions(alg, [SWAP])
    assert not v.passed and v.failing_condition == "quasi_stable"
    assert syntactic_conditions(alg, [EMPTY, ID, SWAP]).passed
    assert syntactic_conditions(alg, [ID, SWAP]).failing_condition == "quasi_stable"
    assert syntactic_conditions(alg, [EMPTY]).failing_condition == "fixed_diagonal"


def test_syntactic_contracts(micro, corpus_m2n1):
    with pytest.raises(ContractError):
        syntactic_conditions(micro[1], [])
    with pytest.raises(ContractError):
        syntactic_conditions(zero_free(corpus_m2n1)[1], [0])
    with pytest.raises(ContractError):
        syntactic_batch(micro[1], np.zeros((1, 3), dtype=bool))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2**31))
def test_batch_agrees_with_single(corpus_m2n1, pick, seed):
    with_zero = [a for _, a in corpus_m2n1 if a.zero is not None]
    alg = with_zero[pick % len(with_zero)]
    rng = np.random.default_rng(seed)
    masks = rng.random((20, alg.size)) < rng.random()
    masks[:, rng.integers(alg.size)] = True
    got = syntactic_batch(alg, masks)
    for h, k in zip(masks, got):
        v = syntactic_conditions(alg, h)
        assert v.passed == (k < 0)
        if k >= 0:
            assert v.failing_condition == CONDITIONS[k]


# -- semantic side ---------------------------------------------------------

def test_semantic_examples(micro):
    _, alg = micro
    v = semantic_check(alg, [ID])
    assert v.passed and v.origins == [ID, SWAP]
    assert v.fixed_point_witnesses == {ID: (ID, 0)}
    assert semantic_check(alg, [EMPTY, ID, SWAP]).passed
    bad = semantic_check(alg, [SWAP])
    assert not bad.passed and bad.is_representation and bad.faithful and bad.mismatch == ID


def test_semantic_one_point():
    _, alg = one_point()
    assert semantic_check(alg, [0]).passed
    report = verify_characterization(alg)
    assert len(report) == 1 and report.stationary_indices.tolist() == [0]


def test_cache_builds_each_part_once(micro):
    _, alg = micro
    cache = RepresentationCache(alg)
    semantic_check(alg, [ID], cache)
    semantic_check(alg, [ID, SWAP], cache)
    assert sorted(cache._parts) == [ID, SWAP]


# -- the sweep -------------------------------------------------------------

def test_micro_sweep(micro):
    phi, alg = micro
    report = verify_characterization(alg, concrete_st=stationary_mask(phi))
    assert report.exhaustive and len(report) == 7
    assert [mask_to_bits(report.masks[k]) for k in report.stationary_indices] == [0b010, 0b111]
    assert report.findings == 0 and report.necessity.passed
    lines = [v.to_json() for v in report.verdicts()]
    assert [d["H"] for d in lines] == list(range(1, 8))
    assert lines[1]["witness"]["fixed_points"] == {"1": [1, 0]}


def test_sampled_sweep_is_seeded_and_targets_passing_sets(micro):
    phi, alg = micro
    a = verify_characterization(alg, exhaustive_cap=1, samples=4, seed=5, concrete_st=stationary_mask(phi))
    b = verify_characterization(alg, exhaustive_cap=1, samples=4, seed=5, concrete_st=stationary_mask(phi))
    assert not a.exhaustive and np.array_equal(a.masks, b.masks)
    bits = [mask_to_bits(h) for h in a.masks]
    assert bits == sorted(bits) and {0b010, 0b111} <= set(bits)
    assert a.findings == 0


def test_bit_helpers():
    assert mask_to_bits(np.array([True, False, True])) == 5
    assert bits_to_mask(5, 3).tolist() == [True, False, True]


def test_zero_forces_whole_and_consequences(micro):
    _, alg = micro
    assert check_zero_forces_whole(alg, [EMPTY, ID, SWAP]).passed
    assert check_zero_forces_whole(alg, [ID]).passed
    assert check_zero_forces_whole(alg, [EMPTY, ID]).failed
    for H in ([ID], [EMPTY, ID, SWAP]):
        out = check_stationary_consequences(alg, H)
        assert len(out) == 8 and all(c.passed for c in out.values())
    assert not all(c.passed for c in check_stationary_consequences(alg, [SWAP]).values())


def test_corpus_sweep_characterization(corpus_m2n1):
    for phi, alg in corpus_m2n1:
        if alg.zero is None:
            assert stationary_mask(phi).all()
            continue
        st_mask = stationary_mask(phi)
        report = verify_characterization(alg, concrete_st=st_mask)
        assert report.findings == 0
        passing = [report.masks[k] for k in report.stationary_indices]
        # the sum depends only on whether the zero is in H: at most two winners
        assert 1 <= len(passing) <= 2 and passing[-1].all()
        if st_mask.any():
            assert any(np.array_equal(h, st_mask) for h in passing)
        for h in passing:
            assert check_zero_forces_whole(alg, h).passed
            assert all(c.passed for c in check_stationary_consequences(alg, h).values())
