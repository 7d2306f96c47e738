"""The weighted prepend-and-sum operator on cylinder functions.

One application maps a depth-m function phi to

    (L phi)(x) = sum_a w_a * exp(f(a x)) * phi(a x),

which is again locally constant, of depth max(k-1, m-1, 0) for a
depth-k potential.  At a fixed working depth d the operator is a sparse
square matrix with exactly one entry per symbol per row: the
predecessors of a word u are the words a u_1..u_{d-1}.  The kernel
stores that structure in factored form (per-symbol weight tables plus
index strides) rather than as explicit coordinates; the coordinate list
and the dense matrix are materialized on demand for export and for
small-instance cross-checks.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import check_cylinder_count, cylinder_cap
from .errors import NumericError, ResourceCapError
from .potential import Potential
from .space import SymbolSpace, index_word

LOG_SPACE_THRESHOLD = 300.0
LINEAR_VALUE_CEILING = 700.0


def _same_space(a, b):
    return a is b or (
        a.size == b.size
        and np.array_equal(a.weights, b.weights)
        and ((a.nodes is None) == (b.nodes is None))
        and (a.nodes is None or np.array_equal(a.nodes, b.nodes))
    )


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    """A function constant on depth-d cylinders, stored in canonical order."""

    space: SymbolSpace
    depth: int
    values: np.ndarray

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.shape != (self.space.size**self.depth,):
            raise ValueError(
                f"depth-{self.depth} function needs {self.space.size**self.depth} "
                f"values, got {v.size}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("cylinder function values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __repr__(self):
        return f"CylinderFunction(size={self.space.size}, depth={self.depth})"


def ones_function(space, depth):
    """The constant function 1 at the given depth."""
    return CylinderFunction(space, depth, np.ones(space.size**depth))


def lift(phi, depth):
    """Re-express a cylinder function at a deeper level (values repeat blockwise)."""
    if depth < phi.depth:
        raise ValueError("lift target must be at least the current depth")
    check_cylinder_count(phi.space.size, depth)
    reps = phi.space.size ** (depth - phi.depth)
    return CylinderFunction(phi.space, depth, np.repeat(phi.values, reps))


@dataclass(frozen=True, eq=False)
class TransferKernel:
    """Square realization of the operator on depth-d cylinder vectors.

    The matrix M satisfies M[u, v] = w_{v_1} * exp(f(v_1 u)) when
    v_2..v_d = u_1..u_{d-1} and is zero otherwise: exactly one entry
    per symbol per row.  Stored factored:

      * ``ew``     (n_sym, n_sym**(k-1)): row-side weights by prefix
      * ``ew_col`` (n_sym**k,): the same numbers keyed by depth-k word
      * ``s_pot``, ``n_rep``: index strides (see _kernels)
    """

    space: SymbolSpace
    potential: Potential
    depth: int
    ew: np.ndarray
    log_ew: np.ndarray
    ew_col: np.ndarray
    s_pot: int
    n_rep: int

    @property
    def size(self):
        return self.space.size**self.depth

    @property
    def nnz(self):
        return self.space.size ** (self.depth + 1)

    def matvec(self, x):
        return _kernels.matvec(np.asarray(x, dtype=float), self.ew, self.space.size, self.s_pot)

    def log_matvec(self, lx):
        return _kernels.log_matvec(
            np.asarray(lx, dtype=float), self.log_ew, self.space.size, self.s_pot
        )

    def tmatvec(self, x):
        """Adjoint product: (M^T x)[v] = sum_u M[u, v] x[u]."""
        x = np.asarray(x, dtype=float)
        if self.depth >= self.potential.depth:
            return _kernels.tmatvec_deep(x, self.ew_col, self.space.size, self.n_rep)
        return _kernels.tmatvec_edge(x, self.ew_col, self.space.size)

    def to_dense(self):
        """Materialize M as a dense array (small instances only)."""
        nd = self.size
        if nd * nd > cylinder_cap():
            raise ResourceCapError(f"dense {nd}x{nd} kernel exceeds the cylinder cap")
        n = self.space.size
        npred = nd // n
        rows = np.arange(nd)
        dense = np.zeros((nd, nd))
        for a in range(n):
            dense[rows, a * npred + rows // n] = self.ew[a, rows // self.s_pot]
        return dense

    def export_coo(self, stream):
        """Write the coordinate list as text lines: row-word col-word value.

        Rows appear in canonical order, the entries of each row in
        symbol order; values carry 17 significant digits.
        """
        n = self.space.size
        nd = self.size
        npred = nd // n
        for i in range(nd):
            u = ".".join(map(str, index_word(i, n, self.depth)))
            for a in range(n):
                v = ".".join(map(str, index_word(a * npred + i // n, n, self.depth)))
                stream.write(f"{u} {v} {self.ew[a, i // self.s_pot]:.17g}\n")


def build_kernel(f, depth):
    """Build the depth-d square kernel of the operator for potential f.

    Requires depth >= max(k - 1, 1) so that prepending one symbol to a
    depth-d word determines the potential value.
    """
    k = f.depth
    n = f.space.size
    if depth < max(k - 1, 1):
        raise ValueError(f"kernel depth {depth} below the minimum {max(k - 1, 1)} for k={k}")
    check_cylinder_count(n, depth)
    check_cylinder_count(n, k)
    table = f.table.reshape(n, n ** (k - 1))
    ew = f.space.weights[:, None] * np.exp(table)
    log_ew = np.log(f.space.weights)[:, None] + table
    for arr in (ew, log_ew):
        arr.flags.writeable = False
    return TransferKernel(
        space=f.space,
        potential=f,
        depth=depth,
        ew=ew,
        log_ew=log_ew,
        ew_col=ew.reshape(-1),
        s_pot=n ** (depth - k + 1),
        n_rep=n ** max(depth - k, 0),
    )


def apply_transfer(f, phi):
    """One application of the operator: a depth-max(k-1, m-1, 0) function.

    Reference implementation used by everything that is not an inner
    loop; the square-kernel matvec must agree with it entrywise.
    """
    if not _same_space(f.space, phi.space):
        raise ValueError("potential and function live on different symbol spaces")
    n = f.space.size
    k = f.depth
    m = phi.depth
    d_out = max(k - 1, m - 1, 0)
    check_cylinder_count(n, d_out)
    nd = n**d_out
    ew = f.space.weights[:, None] * np.exp(f.table.reshape(n, n ** (k - 1)))
    out = np.zeros(nd)
    for a in range(n):
        pot = np.repeat(ew[a], nd // n ** (k - 1))
        if m == 0:
            val = phi.values[0]
        else:
            block = phi.values[a * n ** (m - 1) : (a + 1) * n ** (m - 1)]
            val = np.repeat(block, nd // n ** (m - 1))
        out += pot * val
    return CylinderFunction(f.space, d_out, out)


def iterate_one(f, n, depth, return_log=False):
    """n applications of the operator to the constant function 1, at a fixed depth.

    Computed by n sparse products.  When n * sup_norm(f) exceeds 300 the
    whole iteration runs in log space; if the result then has entries
    too large for a double, linear values cannot be returned and the
    caller should ask for logs (``return_log=True``).
    """
    if n < 0:
        raise ValueError("iteration count must be non-negative")
    kernel = build_kernel(f, depth)
    use_log = return_log or n * f.sup_norm > LOG_SPACE_THRESHOLD
    if use_log:
        lv = np.zeros(kernel.size)
        for _ in range(n):
            lv = kernel.log_matvec(lv)
        if return_log:
            return CylinderFunction(f.space, depth, lv)
        if np.max(lv) > LINEAR_VALUE_CEILING:
            raise NumericError(
                "iterate values overflow double precision; request return_log=True"
            )
        return CylinderFunction(f.space, depth, np.exp(lv))
    v = np.ones(kernel.size)
    for _ in range(n):
        v = kernel.matvec(v)
    return CylinderFunction(f.space, depth, v)


def brute_force_iterate(f, n, word):
    """Enumerate all length-n symbol strings to evaluate the n-th iterate at one word.

    Independent of the kernel machinery: sums, over all prepend
    histories, the product of symbol weights and exponentiated
    potential values, exactly as the operator definition unrolls.
    Exponential cost; guarded by the cylinder cap.
    """
    if n < 1:
        raise ValueError("brute force needs at least one application")
    k = f.depth
    if len(word) < k - 1:
        raise ValueError(f"word depth {len(word)} too shallow for a depth-{k} potential")
    nsym = f.space.size
    check_cylinder_count(nsym, n)
    weights = [float(w) for w in f.space.weights]

    def rec(current, steps):
        if steps == 0:
            return 1.0
        total = 0.0
        for a in range(nsym):
            ext = (a,) + current
            total += weights[a] * math.exp(f.evaluate(ext)) * rec(ext, steps - 1)
        return total

    return rec(tuple(word), n)
