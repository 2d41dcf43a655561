import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from menger import kernels
from menger.algebra import chi, zeta
from menger.enumeration import close, universe
from menger.nfun import NPlaceFunction
from menger.representation import build_eg_wg, simplest_representation


@st.composite
def random_algebra_tables(draw):
    G = draw(st.integers(1, 4))
    n = draw(st.integers(1, 2))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return (G, n, rng.integers(0, G, G ** (n + 1)), rng.integers(0, G, G * G),
            rng.integers(0, G, (n, G)), rng.random((G, G)) < 0.5)


def both(name, *args):
    a = getattr(kernels, name)(*args, backend="numba")
    b = getattr(kernels, name)(*args, backend="numpy")
    return np.asarray(a), np.asarray(b)


@settings(max_examples=150, deadline=None)
@given(random_algebra_tables())
def test_backends_agree_on_random_tables(t):
    G, n, sup, meet, r, rel = t
    cases = [
        ("a1_violation", sup, G, n),
        ("a3_violation", sup, r, G, n),
        ("a10_violation", sup, meet, G, n),
        ("stable_violation", sup, rel, G, n),
        ("v_regular_violation", sup, rel, G, n),
        ("l_regular_violation", sup, rel, G, n),
    ] + [("i_regular_violation", sup, rel, i, G, n) for i in range(n)]
    for name, *args in cases:
        a, b = both(name, *args)
        assert np.array_equal(a, b), name


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 2), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_homomorphism_backends_agree(G, n, K, seed):
    rng = np.random.default_rng(seed)
    sup = rng.integers(0, G, G ** (n + 1))
    T = rng.integers(-1, K, (G, K**n))
    a, b = both("homomorphism_violation", sup, T, G, n, K)
    assert np.array_equal(a, b)


def test_homomorphism_kernel_accepts_true_representations(corpus_m2n2_small):
    for _, alg in corpus_m2n2_small[-5:]:
        for g in range(alg.size):
            rep = simplest_representation(alg, build_eg_wg(alg, g), g)
            T = np.asarray(rep.tables, dtype=np.int64)
            for backend in ("numba", "numpy"):
                v = kernels.homomorphism_violation(alg.sup, T, alg.size, alg.rank, rep.base, backend=backend)
                assert len(v) == 0


def test_relation_kernels_on_corpus(corpus_m2n2_small):
    for _, alg in corpus_m2n2_small:
        for rel in (zeta(alg).matrix, chi(alg).matrix):
            for name in ("stable_violation", "v_regular_violation", "l_regular_violation"):
                a, b = both(name, alg.sup, rel, alg.size, alg.rank)
                assert np.array_equal(a, b)


@pytest.mark.parametrize("m,n", [(2, 1), (3, 1), (2, 2)])
def test_closure_kernel_matches_table_closure(m, n):
    uni = universe(m, n)
    rng = np.random.default_rng(m * 10 + n)
    for _ in range(25):
        gens = rng.choice(uni.size, size=2, replace=False)
        a, b = both("closure_codes", uni.comp, uni.meet, uni.rt, uni.size, n, gens, 512)
        assert np.array_equal(a, b)
        fs = [NPlaceFunction(n, m, uni.tables[c]) for c in gens]
        phi = close(fs)
        assert np.array_equal(np.sort(uni.encode(phi.tables)), a)


def test_closure_kernel_reports_cap():
    uni = universe(2, 2)
    gens = np.array([uni.size - 1, uni.size - 2])
    out = kernels.closure_codes(uni.comp, uni.meet, uni.rt, uni.size, 2, gens, 2)
    assert out.tolist() == [-1]


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.a1_violation(np.zeros(1, dtype=np.int64), 1, 1, backend="fortran")


def test_env_flag_selects_numpy_path(tmp_path):
    import os
    import subprocess
    import sys

    code = (
        "from menger import _accel, kernels\n"
        "from menger.nfun import NPlaceFunction\n"
        "from menger.enumeration import close, abstractify\n"
        "from menger.stationary import verify_characterization\n"
        "assert not _accel.USE_NUMBA\n"
        "assert kernels._impl('a1', None) is kernels.NUMPY_KERNELS['a1']\n"
        "alg, _ = abstractify(close([NPlaceFunction.from_mapping(1, 2, {0: 1, 1: 0})]))\n"
        "assert alg.axiom_report.passed and verify_characterization(alg).findings == 0\n"
    )
    env = dict(os.environ, MENGER_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
