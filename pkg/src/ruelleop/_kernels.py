"""Hot inner loops for transfer-operator iteration.

The structured sparsity of the operator (every depth-d word has exactly
one predecessor per symbol, obtained by prepending) makes each product
a gather-multiply-accumulate over ``n_sym`` strided entries.  The loops
here are compiled with numba when available; a pure-numpy twin of each
kernel exists for environments without a JIT and for benchmarking.

Backend selection: the environment variable ``RUELLEOP_BACKEND`` may be
``auto`` (default: numba when importable), ``numba`` (fail if missing)
or ``numpy``.  Both implementations accumulate in the same symbol
order, so the purely linear kernels agree bit for bit.  The log-domain
kernel evaluates exp/log inside, where the two runtimes' libm may round
an ulp apart.

Index conventions (canonical word order, depth d, k = potential depth):
  * ``ew[a, m]``     = w_a * exp(table[a, m]) over depth-(k-1) prefixes m
  * ``ew_col[m]``    = w_{first symbol of m} * exp(table[m]) over depth-k words
  * ``s_pot``        = n_sym**(d-k+1): stride from a depth-d index to its
                       depth-(k-1) prefix
  * ``n_rep``        = n_sym**(d-k): repetition count of ew_col along a
                       depth-d column index
"""

import math
import os

import numpy as np

_ENV_VAR = "RUELLEOP_BACKEND"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# pure-numpy kernels
# ---------------------------------------------------------------------------

def matvec_numpy(phi, ew, n_sym, s_pot):
    """out[i] = sum_a ew[a, i // s_pot] * phi[a*npred + i // n_sym]."""
    nd = phi.shape[0]
    npred = nd // n_sym
    out = np.zeros(nd)
    for a in range(n_sym):
        out += np.repeat(ew[a], s_pot) * np.repeat(phi[a * npred : (a + 1) * npred], n_sym)
    return out


def log_matvec_numpy(lphi, lew, n_sym, s_pot):
    """Log-space twin of matvec: out[i] = LSE_a(lew[a, .] + lphi[pred_a(i)])."""
    nd = lphi.shape[0]
    npred = nd // n_sym
    terms = np.empty((n_sym, nd))
    for a in range(n_sym):
        terms[a] = np.repeat(lew[a], s_pot) + np.repeat(lphi[a * npred : (a + 1) * npred], n_sym)
    peak = terms.max(axis=0)
    out = np.full(nd, -np.inf)
    ok = np.isfinite(peak)
    out[ok] = peak[ok] + np.log(np.exp(terms[:, ok] - peak[ok]).sum(axis=0))
    return out


def tmatvec_deep_numpy(nu, ew_col, n_sym, n_rep):
    """Adjoint product for d >= k: column weights constant in the last symbol."""
    colsum = nu.reshape(-1, n_sym).sum(axis=1)
    return np.repeat(ew_col, n_rep) * np.tile(colsum, n_sym)


def tmatvec_edge_numpy(nu, ew_col, n_sym):
    """Adjoint product at the minimal depth d = k-1: weights depend on the last symbol."""
    nd = nu.shape[0]
    npred = nd // n_sym
    weights = ew_col.reshape(nd, n_sym)
    blocks = np.tile(nu.reshape(npred, n_sym), (n_sym, 1))
    return (weights * blocks).sum(axis=1)


# ---------------------------------------------------------------------------
# loop kernels (numba targets)
# ---------------------------------------------------------------------------

def _matvec_loop(phi, ew, n_sym, s_pot):
    nd = phi.shape[0]
    npred = nd // n_sym
    out = np.empty(nd)
    for i in range(nd):
        m = i // s_pot
        q = i // n_sym
        acc = 0.0
        for a in range(n_sym):
            acc += ew[a, m] * phi[a * npred + q]
        out[i] = acc
    return out


def _log_matvec_loop(lphi, lew, n_sym, s_pot):
    nd = lphi.shape[0]
    npred = nd // n_sym
    out = np.empty(nd)
    for i in range(nd):
        m = i // s_pot
        q = i // n_sym
        peak = -np.inf
        for a in range(n_sym):
            v = lew[a, m] + lphi[a * npred + q]
            if v > peak:
                peak = v
        if peak == -np.inf:
            out[i] = -np.inf
            continue
        acc = 0.0
        for a in range(n_sym):
            acc += math.exp(lew[a, m] + lphi[a * npred + q] - peak)
        out[i] = peak + math.log(acc)
    return out


def _tmatvec_deep_loop(nu, ew_col, n_sym, n_rep):
    nd = nu.shape[0]
    npred = nd // n_sym
    colsum = np.empty(npred)
    for q in range(npred):
        acc = 0.0
        for r in range(n_sym):
            acc += nu[q * n_sym + r]
        colsum[q] = acc
    out = np.empty(nd)
    for j in range(nd):
        out[j] = ew_col[j // n_rep] * colsum[j % npred]
    return out


def _tmatvec_edge_loop(nu, ew_col, n_sym):
    nd = nu.shape[0]
    npred = nd // n_sym
    out = np.empty(nd)
    for j in range(nd):
        base = (j % npred) * n_sym
        acc = 0.0
        for r in range(n_sym):
            acc += ew_col[j * n_sym + r] * nu[base + r]
        out[j] = acc
    return out


if HAS_NUMBA:
    _jit = njit(cache=True, nogil=True)
    matvec_numba = _jit(_matvec_loop)
    log_matvec_numba = _jit(_log_matvec_loop)
    tmatvec_deep_numba = _jit(_tmatvec_deep_loop)
    tmatvec_edge_numba = _jit(_tmatvec_edge_loop)


def _pick_backend():
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise RuntimeError(f"{_ENV_VAR}=numba requested but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"{_ENV_VAR} must be auto, numba or numpy, not {choice!r}")


BACKEND = _pick_backend()

if BACKEND == "numba":
    matvec = matvec_numba
    log_matvec = log_matvec_numba
    tmatvec_deep = tmatvec_deep_numba
    tmatvec_edge = tmatvec_edge_numba
else:
    matvec = matvec_numpy
    log_matvec = log_matvec_numpy
    tmatvec_deep = tmatvec_deep_numpy
    tmatvec_edge = tmatvec_edge_numpy
