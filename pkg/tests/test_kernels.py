"""Backend kernels against an independent dense oracle, and against each other."""

import itertools
import math

import numpy as np
import pytest

import ruelleop as ro
from ruelleop import _kernels as k


def dense_oracle(f, depth):
    """Dense operator matrix built straight from the definition.

    Row u, column v: sum over leading symbols a with v = (a,) + u[:-1]
    of weight(a) * exp(f evaluated on the depth-(d+1) history (a,) + u).
    Only uses word enumeration and Potential.evaluate.
    """
    n = f.space.size
    rows = n**depth
    M = np.zeros((rows, rows))
    for j, u in enumerate(itertools.product(range(n), repeat=depth)):
        for a in range(n):
            hist = (a,) + u
            col = ro.word_index(hist[:depth], n)
            M[j, col] += f.space.weights[a] * math.exp(f.evaluate(hist))
    return M


def cases():
    two = ro.uniform_space(2)
    three = ro.finite_space([0.2, 0.5, 0.3])
    rng = np.random.default_rng(7)
    out = []
    out.append((ro.builtin_ising(two, 1.1, -0.3), 2))  # depth > k - 1
    out.append((ro.builtin_ising(two, 0.6), 1))  # edge depth d = k - 1
    out.append((ro.Potential(three, 1, rng.uniform(-1, 1, 3)), 2))  # k = 1
    out.append((ro.Potential(three, 2, rng.uniform(-1, 1, 9)), 3))
    out.append((ro.Potential(two, 3, rng.uniform(-1, 1, 8)), 2))  # k = 3 edge
    out.append((ro.Potential(two, 3, rng.uniform(-1, 1, 8)), 4))
    return out


@pytest.mark.parametrize("f,depth", cases())
def test_matvec_matches_dense_oracle(f, depth):
    kern = ro.build_kernel(f, depth)
    M = dense_oracle(f, depth)
    rng = np.random.default_rng(100 + depth)
    for _ in range(5):
        phi = rng.uniform(-1.0, 2.0, kern.size)
        assert np.allclose(kern.matvec(phi), M @ phi, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("f,depth", cases())
def test_tmatvec_matches_dense_transpose(f, depth):
    kern = ro.build_kernel(f, depth)
    M = dense_oracle(f, depth)
    rng = np.random.default_rng(200 + depth)
    for _ in range(5):
        nu = rng.uniform(0.0, 1.0, kern.size)
        assert np.allclose(kern.tmatvec(nu), M.T @ nu, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("f,depth", cases())
def test_to_dense_matches_oracle(f, depth):
    kern = ro.build_kernel(f, depth)
    assert np.allclose(kern.to_dense(), dense_oracle(f, depth), rtol=1e-15, atol=0)


def test_log_matvec_agrees_with_linear_path(two_space):
    f = ro.builtin_ising(two_space, 0.9, 0.2)
    kern = ro.build_kernel(f, 3)
    rng = np.random.default_rng(3)
    phi = rng.uniform(0.5, 2.0, kern.size)
    got = kern.log_matvec(np.log(phi))
    want = np.log(kern.matvec(phi))
    assert np.allclose(got, want, rtol=1e-13, atol=1e-13)


def test_log_matvec_survives_huge_offsets(two_space):
    # values that would overflow exp() must pass through the log path unharmed
    f = ro.builtin_ising(two_space, 1.0)
    kern = ro.build_kernel(f, 2)
    lphi = np.full(kern.size, 800.0)
    out = kern.log_matvec(lphi)
    assert np.all(np.isfinite(out))
    base = kern.log_matvec(np.zeros(kern.size))
    assert np.allclose(out, base + 800.0, rtol=1e-13, atol=1e-10)


def test_log_matvec_handles_minus_infinity(two_space):
    # a zero entry of phi is a -inf log entry; sums must stay well defined
    f = ro.builtin_ising(two_space, 0.5)
    kern = ro.build_kernel(f, 2)
    lphi = np.zeros(kern.size)
    lphi[0] = -np.inf
    out = kern.log_matvec(lphi)
    phi = np.exp(lphi)
    want = np.log(kern.matvec(phi))
    assert np.allclose(out, want, rtol=1e-13, atol=1e-13)


@pytest.mark.skipif(not ro.HAS_NUMBA, reason="numba not installed")
def test_backends_agree():
    # linear kernels share the accumulation order: identical doubles;
    # the log kernel calls exp/log inside, where the libms may differ by an ulp
    rng = np.random.default_rng(17)
    for f, depth in cases():
        kern = ro.build_kernel(f, depth)
        phi = rng.uniform(-1.0, 1.0, kern.size)
        nu = rng.uniform(0.0, 1.0, kern.size)
        a = k.matvec_numpy(phi, kern.ew, f.space.size, kern.s_pot)
        b = k.matvec_numba(phi, kern.ew, f.space.size, kern.s_pot)
        assert np.array_equal(a, b)
        la = k.log_matvec_numpy(phi, kern.log_ew, f.space.size, kern.s_pot)
        lb = k.log_matvec_numba(phi, kern.log_ew, f.space.size, kern.s_pot)
        assert np.allclose(la, lb, rtol=0, atol=1e-15)
        if depth >= f.depth:
            ta = k.tmatvec_deep_numpy(nu, kern.ew_col, f.space.size, kern.n_rep)
            tb = k.tmatvec_deep_numba(nu, kern.ew_col, f.space.size, kern.n_rep)
        else:
            ta = k.tmatvec_edge_numpy(nu, kern.ew_col, f.space.size)
            tb = k.tmatvec_edge_numba(nu, kern.ew_col, f.space.size)
        assert np.array_equal(ta, tb)


def test_backend_choice_is_reported():
    assert ro.BACKEND in ("numba", "numpy")
    if not ro.HAS_NUMBA:
        assert ro.BACKEND == "numpy"
