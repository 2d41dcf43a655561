import numpy as np
import pytest

from menger.algebra import zeta
from menger.errors import IntegrityError
from menger.nfun import is_subfunction
from menger.representation import (
    ClassPartition,
    build_eg_wg,
    equivalence_v_regular_witness,
    is_faithful,
    simplest_representation,
    sum_representations,
    verify_homomorphism,
)

from conftest import EMPTY, ID, SWAP


def test_micro_partition_for_identity(micro):
    _, alg = micro
    part = build_eg_wg(alg, ID)
    assert part.classes() == [[0], [1], [2]]
    assert part.w_members() == [EMPTY]
    assert part.position.tolist() == [-1, 0, 1]


def test_micro_partition_for_zero_is_trivial(micro):
    _, alg = micro
    part = build_eg_wg(alg, EMPTY)
    assert part.classes() == [[0, 1, 2]] and part.w_class is None
    rep = simplest_representation(alg, part, EMPTY)
    assert rep.base == 1 and rep.tables.tolist() == [[0], [0], [0]]
    assert not is_faithful(rep)


def test_micro_simplest_representation(micro):
    _, alg = micro
    rep = simplest_representation(alg, build_eg_wg(alg, ID), ID)
    assert rep.tables.tolist() == [[-1, -1], [0, 1], [1, 0]]
    assert rep.is_representation and is_faithful(rep)
    assert rep.fixed_point_mask().tolist() == [False, True, False]
    assert rep.fixed_point_witness(ID) == (ID, 0)
    assert rep.fixed_point_witness(SWAP) is None
    assert rep.function(SWAP).graph() == {(0,): 1, (1,): 0}


def test_micro_sum(micro):
    _, alg = micro
    parts = [simplest_representation(alg, build_eg_wg(alg, g), g) for g in (ID, SWAP)]
    P = sum_representations(alg, parts)
    assert P.base == 4 and P.tags == [(ID, 0), (ID, 1), (SWAP, 0), (SWAP, 1)]
    assert P.is_representation and is_faithful(P)
    assert P.fixed_point_mask().tolist() == [False, True, False]
    # the materialized sum is itself a representation on the disjoint union
    assert all(c.passed for c in verify_homomorphism(alg, P.tables, P.base).values())


def test_homomorphism_check_detects_corruption(micro):
    _, alg = micro
    rep = simplest_representation(alg, build_eg_wg(alg, ID), ID)
    T = np.array(rep.tables)
    T[SWAP] = [0, 1]
    # still compatible with composition, but id meet swap must be empty
    v = verify_homomorphism(alg, T, 2)
    assert v["superposition"].passed and not v["meet"].passed
    T = np.array(rep.tables)
    T[ID] = [1, 0]
    v = verify_homomorphism(alg, T, 2)
    assert v["superposition"].counterexample == {"x": ID, "y": [ID]}


def test_non_v_regular_partition_detected(micro):
    _, alg = micro
    # {empty, id} | {swap}: swap o id = swap but swap o empty = empty
    assert equivalence_v_regular_witness(alg, (0, 0, 1)) is not None
    assert equivalence_v_regular_witness(alg, (0, 1, 2)) is None


def test_partition_rejects_non_equivalence():
    with pytest.raises(IntegrityError):
        ClassPartition.from_relation(np.array([[1, 1], [0, 1]], dtype=bool))
    with pytest.raises(IntegrityError):
        ClassPartition.from_relation(np.eye(3, dtype=bool), np.array([1, 1, 0], dtype=bool))


def test_straddling_image_rejected(micro):
    _, alg = micro
    with pytest.raises(IntegrityError):
        simplest_representation(alg, ClassPartition((0, 0, 1), None))


def _all_parts(alg):
    return [simplest_representation(alg, build_eg_wg(alg, g), g) for g in range(alg.size)]


def test_invariants_on_corpus(corpus_m2n1, corpus_m2n2_small):
    for _, alg in corpus_m2n1 + corpus_m2n2_small:
        z = zeta(alg).matrix
        parts = _all_parts(alg)
        for g, rep in enumerate(parts):
            assert g not in rep.partition.w_members()
            assert rep.is_representation
        P = sum_representations(alg, parts)
        assert is_faithful(P)
        xs, ys = np.nonzero(z)
        for x, y in zip(xs[:200], ys[:200]):
            assert is_subfunction(P.function(int(x)), P.function(int(y)))
        # restricting a summed table to a part's block recovers the part
        offset, n = 0, alg.rank
        T = P.tables.reshape((alg.size,) + (P.base,) * n)
        for p in parts:
            block = T[(slice(None),) + (slice(offset, offset + p.base),) * n].reshape(alg.size, -1)
            local = np.where(block >= 0, block - offset, -1)
            assert np.array_equal(local, p.tables)
            offset += p.base


def test_json_shape(micro):
    _, alg = micro
    rep = simplest_representation(alg, build_eg_wg(alg, ID), ID)
    obj = rep.to_json()
    assert obj["origin"] == ID and obj["indices"] == [[ID, 0], [ID, 1]]
    assert obj["map"][str(SWAP)]["table"] == [1, 0]
