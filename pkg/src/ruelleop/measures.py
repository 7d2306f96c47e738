"""Cylinder measures: eigenmeasure certificates, equilibrium states, entropy.

A measure is stored as its weights over depth-d cylinders.  The adjoint
transfer operator acts on these weight vectors through the same sparse
kernels as the forward operator; an eigenmeasure extends to deeper
cylinders by one closed-form step per level,

    nu[a u] = (1/lam) * w_a * exp(f(a u)) * nu[u],

and the equilibrium state is the eigenmeasure reweighted by the
eigenfunction.  Entropy here is always relative to the product of the
a-priori symbol weights: H_n >= 0 grows linearly for ergodic measures,
and the signed entropy rate entering the variational functional is
minus its increment, so the pressure inequality reads

    log lam >= -(H_{n+1} - H_n) + integral of f  (equality at equilibrium).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .config import check_cylinder_count
from .errors import NumericError
from .potential import Potential
from .space import SymbolSpace, word_index
from .transfer import build_kernel

EXTENSION_MASS_ABORT = 1e-6


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """A probability weight per depth-d cylinder, in canonical order.

    ``mass_dev`` records any deviation from unit mass that was absorbed
    by renormalization when the measure was constructed.
    """

    space: SymbolSpace
    depth: int
    weights: np.ndarray
    mass_dev: float = 0.0

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.shape != (self.space.size**self.depth,):
            raise ValueError(
                f"depth-{self.depth} measure needs {self.space.size**self.depth} "
                f"weights, got {w.size}"
            )
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("measure weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-13:
            raise ValueError(f"measure weights sum to {w.sum()!r}, expected 1 within 1e-13")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def __repr__(self):
        return f"CylinderMeasure(size={self.space.size}, depth={self.depth})"


def product_measure(space, depth):
    """The product of the a-priori symbol weights over depth-d cylinders."""
    check_cylinder_count(space.size, depth)
    w = np.ones(1)
    for _ in range(depth):
        w = np.kron(w, space.weights)
    return CylinderMeasure(space, depth, w)


def marginalize(mu, depth):
    """Restrict a measure to shallower cylinders by summing trailing symbols."""
    if not 0 <= depth <= mu.depth:
        raise ValueError(f"marginal depth {depth} outside 0..{mu.depth}")
    w = mu.weights.reshape(mu.space.size**depth, -1).sum(axis=1)
    return CylinderMeasure(mu.space, depth, w, mass_dev=mu.mass_dev)


def _extend_raw(f, lam, weights, depth):
    """One eigen-extension step without renormalization (length n**(depth+1))."""
    n = f.space.size
    k = f.depth
    if depth < k - 1:
        raise ValueError(f"measure depth {depth} too shallow for a depth-{k} potential")
    check_cylinder_count(n, depth + 1)
    ew_col = np.repeat(f.space.weights, n ** (k - 1)) * np.exp(f.table)
    return np.repeat(ew_col, n ** (depth + 1 - k)) * np.tile(weights, n) / lam


def check_eigenmeasure(f, lam, nu, test_depth):
    """Worst deviation of <L 1_[u], nu> from lam * nu([u]) over depth-t cylinders."""
    if not 0 <= test_depth <= nu.depth:
        raise ValueError(f"test depth {test_depth} outside 0..{nu.depth}")
    kernel = build_kernel(f, nu.depth)
    t = kernel.tmatvec(nu.weights)
    blocks = nu.space.size**test_depth
    lhs = t.reshape(blocks, -1).sum(axis=1)
    rhs = lam * nu.weights.reshape(blocks, -1).sum(axis=1)
    return float(np.max(np.abs(lhs - rhs)))


def extend_eigenmeasure(f, lam, nu):
    """Extend an eigenmeasure by one cylinder depth via the closed-form step.

    The extension of a true eigenmeasure has unit mass; the observed
    deviation is recorded on the result and absorbed by renormalization.
    A deviation above 1e-6 means the input does not satisfy the eigen
    relation and the extension is refused.
    """
    w = _extend_raw(f, lam, nu.weights, nu.depth)
    mass = w.sum()
    dev = abs(mass - 1.0)
    if dev > EXTENSION_MASS_ABORT:
        raise NumericError(
            f"extension mass deviates from 1 by {dev:.3e}; "
            "the input does not satisfy the eigenmeasure relation at this depth"
        )
    return CylinderMeasure(nu.space, nu.depth + 1, w / mass, mass_dev=dev)


def equilibrium_measure(spec, residual_tol=1e-8):
    """The shift-invariant measure h * nu from converged spectral data.

    Refuses spectral data that is flagged non-converged or whose
    residuals exceed ``residual_tol``.
    """
    if not spec.converged or max(spec.residual_right, spec.residual_left) > residual_tol:
        raise NumericError(
            "non-converged input refused: eigendata residuals "
            f"(right {spec.residual_right:.3e}, left {spec.residual_left:.3e}) "
            f"are not certified below {residual_tol:.1e}"
        )
    w = spec.h.values * spec.nu.weights
    mass = w.sum()
    dev = abs(mass - 1.0)
    if dev > EXTENSION_MASS_ABORT:
        raise NumericError(f"h*nu mass deviates from 1 by {dev:.3e}")
    return CylinderMeasure(spec.nu.space, spec.nu.depth, w / mass, mass_dev=dev)


def extend_equilibrium(spec, f, depth):
    """The equilibrium measure on depth-d cylinders, d at least the stored depth.

    The eigenmeasure is pushed to depth d by eigen-extension steps and
    reweighted by the eigenfunction of the first stored-depth symbols.
    """
    mu0 = equilibrium_measure(spec)
    if depth < mu0.depth:
        raise ValueError(f"extension depth {depth} below stored depth {mu0.depth}")
    nu_w = spec.nu.weights
    d = spec.nu.depth
    while d < depth:
        nu_w = _extend_raw(f, spec.lam, nu_w, d)
        d += 1
    reps = f.space.size ** (depth - spec.h.depth)
    w = np.repeat(spec.h.values, reps) * nu_w
    mass = w.sum()
    dev = abs(mass - 1.0)
    if dev > EXTENSION_MASS_ABORT:
        raise NumericError(f"extended equilibrium mass deviates from 1 by {dev:.3e}")
    return CylinderMeasure(f.space, depth, w / mass, mass_dev=dev)


def check_invariance(mu, f, lam, nu):
    """Worst deviation of mu(preimage of [u]) from mu([u]) at the stored depth.

    The preimage weights come from the eigen-extension of nu reweighted
    by h = mu/nu on the first d coordinates; for the true equilibrium
    state both sides agree.  No renormalization is applied, so feeding a
    non-eigenmeasure here shows up as a large residual rather than an
    exception.
    """
    if mu.depth != nu.depth:
        raise ValueError("mu and nu must share a depth")
    if np.any(nu.weights <= 0):
        raise ValueError("nu must be strictly positive on cylinders")
    n = mu.space.size
    h = mu.weights / nu.weights
    nu_ext = _extend_raw(f, lam, nu.weights, nu.depth)
    mu_ext = np.repeat(h, n) * nu_ext  # h of the first d symbols of each word
    preimage = mu_ext.reshape(n, -1).sum(axis=0)
    return float(np.max(np.abs(preimage - mu.weights)))


def check_intertwine(f, lam, nu, word):
    """Residual of the adjoint intertwining identity on one cylinder word.

    Pairs, against every indicator of depth len(word)-1, the adjoint
    applied to (indicator-after-shift * nu) with 1/lam times the adjoint
    applied twice to (indicator * nu).  Both restrictions are read from
    the stored weights of nu, which must live one level deeper than the
    word: the first reads nu on the prepended cylinders, the second on
    the appended ones, so the comparison ties the deep weights to their
    own shifted marginals and vanishes only when nu satisfies the eigen
    relation with eigenvalue lam.  Rebuilding the deep level from the
    closed-form extension instead would make both sides multiples of
    nu([word]) with identical coefficients for every input.
    """
    d = len(word)
    k = f.depth
    if d < max(k - 1, 1):
        raise ValueError(f"word depth {d} too shallow for a depth-{k} potential")
    if nu.depth < d + 1:
        raise ValueError(f"nu must be stored at depth {d + 1} or deeper, got {nu.depth}")
    n = f.space.size
    deep = nu.weights if nu.depth == d + 1 else marginalize(nu, d + 1).weights
    idx = word_index(word, n)
    kernel = build_kernel(f, d + 1)

    shifted = np.zeros(n ** (d + 1))
    sel = np.arange(n) * n**d + idx  # words r.word for each first symbol r
    shifted[sel] = deep[sel]
    lhs = kernel.tmatvec(shifted).reshape(n ** (d - 1), -1).sum(axis=1)

    pointed = np.zeros(n ** (d + 1))
    sel = idx * n + np.arange(n)  # words word.b for each last symbol b
    pointed[sel] = deep[sel]
    rhs = kernel.tmatvec(kernel.tmatvec(pointed)) / lam
    rhs = rhs.reshape(n ** (d - 1), -1).sum(axis=1)
    return float(np.max(np.abs(lhs - rhs)))


def relative_entropy(mu, rho, depth=None):
    """Relative entropy of mu against rho on depth-n cylinders.

    Sum of mu * log(mu/rho) where mu > 0, with 0 * log(0/q) = 0; if mu
    charges a cylinder that rho does not, the result is +inf.
    """
    if depth is None:
        depth = min(mu.depth, rho.depth)
    a = marginalize(mu, depth).weights
    b = marginalize(rho, depth).weights
    pos = a > 0
    if np.any(b[pos] <= 0):
        return math.inf
    return float(np.sum(a[pos] * (np.log(a[pos]) - np.log(b[pos]))))


@dataclass(frozen=True, eq=False)
class EntropyReport:
    """Entropy diagnostics over a range of cylinder depths.

    ``H`` is the relative entropy against the a-priori product measure
    at each depth in ``n``; ``entropy_rate`` holds the signed rates
    -(H_{n+1} - H_n) (exact for Markov measures once n reaches the
    potential depth).  When produced by :func:`variational_gap` the
    integral term and the gap sequence are filled in as well.
    """

    n: np.ndarray
    H: np.ndarray
    h_per_n: np.ndarray
    entropy_rate: np.ndarray
    integral: float = None
    integral_err: float = None
    gaps: np.ndarray = None
    flags: dict = field(default_factory=dict)

    @property
    def gap(self):
        return None if self.gaps is None else float(self.gaps[-1])


def specific_entropy(mu, n_max):
    """Relative entropies of mu against the a-priori product, depths 1..n_max.

    Needs mu stored at depth n_max or deeper (shallower depths come from
    marginals).  Infinite values are legal and flagged.
    """
    if not 1 <= n_max <= mu.depth:
        raise ValueError(f"n_max {n_max} outside 1..{mu.depth}")
    rho = product_measure(mu.space, n_max)
    H = np.array([relative_entropy(mu, rho, d) for d in range(1, n_max + 1)])
    ns = np.arange(1, n_max + 1)
    with np.errstate(invalid="ignore"):
        rate = -(H[1:] - H[:-1])
    flags = {"finite": bool(np.all(np.isfinite(H)))}
    return EntropyReport(n=ns, H=H, h_per_n=H / ns, entropy_rate=rate, flags=flags)


def integral_term(f, mu):
    """Integral of f against mu with its truncation-error bound."""
    if mu.depth < f.depth:
        raise ValueError(f"measure depth {mu.depth} below potential depth {f.depth}")
    val = float(np.dot(f.table, marginalize(mu, f.depth).weights))
    return val, f.var_bound


def invariance_defect(mu):
    """Worst deviation of the first-symbol marginal consistency of mu itself.

    Compares mu summed over its first symbol with mu summed over its
    last: equal for shift-invariant measures.
    """
    n = mu.space.size
    drop_first = mu.weights.reshape(n, -1).sum(axis=0)
    drop_last = mu.weights.reshape(-1, n).sum(axis=1)
    return float(np.max(np.abs(drop_first - drop_last)))


def variational_gap(mu, f, spec, n, invariance_tol=1e-10):
    """Gap sequence log(lam) - (entropy rate + integral of f) for a test measure.

    Non-negative for every shift-invariant test measure, zero exactly at
    the equilibrium state.  ``mu`` must be stored at depth n+1 or deeper
    so the entropy increment at n is available.  The report flags a
    measure whose own invariance defect exceeds ``invariance_tol``.
    """
    if mu.depth < n + 1:
        raise ValueError(f"need mu at depth {n + 1} for the increment at n={n}")
    if mu.depth < f.depth:
        raise ValueError("measure too shallow to integrate the potential")
    ent = specific_entropy(mu, n + 1)
    integral, err = integral_term(f, mu)
    gaps = math.log(spec.lam) - (ent.entropy_rate[:n] + integral)
    defect = invariance_defect(mu)
    flags = dict(ent.flags)
    flags.update(
        {
            "invariant": bool(defect <= invariance_tol),
            "invariance_defect": defect,
            "spec_converged": bool(spec.converged),
        }
    )
    return EntropyReport(
        n=ent.n[:n],
        H=ent.H[:n],
        h_per_n=ent.h_per_n[:n],
        entropy_rate=ent.entropy_rate[:n],
        integral=integral,
        integral_err=err,
        gaps=gaps,
        flags=flags,
    )
