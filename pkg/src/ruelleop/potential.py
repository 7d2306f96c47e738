"""Locally constant potentials: tables over depth-k cylinders.

A depth-k potential assigns one real to every depth-k word; its value
on an infinite sequence is the table entry of the first k symbols.
Potentials that are not exactly locally constant are carried as a table
plus ``var_bound``, a bound on how much the true function can oscillate
within one cylinder.  Downstream log-quantities inherit an additive
error of var_bound per operator application, which callers surface as
``n * var_bound`` after n applications.
"""

from dataclasses import dataclass, field

import numpy as np

from .space import SymbolSpace, word_index

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Potential:
    """Table of values over depth-k cylinders, plus an oscillation bound.

    Parameters
    ----------
    space : SymbolSpace
    depth : int
        k >= 1; the table has space.size**k entries in canonical order.
    table : ndarray
    var_bound : float
        Bound on sup |f(x) - f(y)| over x, y sharing their first k
        symbols, and on |f(x) - table(first k symbols of x)|.  Zero for
        exactly locally constant potentials.
    """

    space: SymbolSpace
    depth: int
    table: np.ndarray
    var_bound: float = 0.0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("potential depth must be at least 1")
        t = np.asarray(self.table, dtype=float).reshape(-1)
        if t.shape != (self.space.size**self.depth,):
            raise ValueError(
                f"depth-{self.depth} table over {self.space.size} symbols needs "
                f"{self.space.size**self.depth} entries, got {t.size}"
            )
        if not np.all(np.isfinite(t)):
            raise ValueError("potential table must be finite")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)
        if not (np.isfinite(self.var_bound) and self.var_bound >= 0):
            raise ValueError("var_bound must be finite and non-negative")

    @property
    def sup_norm(self):
        """Upper bound on the true sup norm: max table magnitude plus var_bound."""
        return float(np.max(np.abs(self.table))) + self.var_bound

    def evaluate(self, word):
        """Value on the cylinder of a word with depth >= k (extra symbols ignored)."""
        if len(word) < self.depth:
            raise ValueError(f"need at least {self.depth} symbols, got {len(word)}")
        return float(self.table[word_index(word[: self.depth], self.space.size)])

    def __repr__(self):
        return (
            f"Potential(size={self.space.size}, depth={self.depth}, "
            f"var_bound={self.var_bound!r})"
        )


def scale(f, beta):
    """The potential beta * f; var_bound scales by |beta|."""
    return Potential(f.space, f.depth, float(beta) * f.table, abs(float(beta)) * f.var_bound)


@dataclass(frozen=True, eq=False)
class VariationPotential:
    """A potential presented at finite depth with per-depth oscillation bounds.

    ``var_bounds[j]`` bounds the true function's oscillation over any
    depth-j cylinder (and its deviation from the stored table on that
    cylinder), for j = 0..depth.  Truncating to depth k picks
    ``var_bounds[k]`` instead of re-deriving a bound from the table.
    """

    space: SymbolSpace
    depth: int
    table: np.ndarray
    var_bounds: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float).reshape(-1)
        if t.shape != (self.space.size**self.depth,):
            raise ValueError("table size does not match depth")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)
        if self.var_bounds is None:
            raise ValueError("VariationPotential needs explicit var_bounds")
        v = np.asarray(self.var_bounds, dtype=float).reshape(-1)
        if v.shape != (self.depth + 1,):
            raise ValueError(f"need {self.depth + 1} variation bounds, got {v.size}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("variation bounds must be finite and non-negative")
        v.flags.writeable = False
        object.__setattr__(self, "var_bounds", v)


def _anchor_indices(n_symbols, k, m):
    """Canonical depth-m indices of the anchor extensions of all depth-k words.

    The anchor extension repeats the last symbol until depth m.
    """
    idx = np.arange(n_symbols**k, dtype=np.int64)
    last = idx % n_symbols
    out = idx.copy()
    for _ in range(m - k):
        out = out * n_symbols + last
    return out


def truncate(g, k):
    """Truncate a potential to depth k.

    The depth-k table takes the value at each word's anchor extension
    (last symbol repeated).  For a :class:`VariationPotential` the
    supplied closed-form bound ``var_bounds[k]`` is used; for a plain
    :class:`Potential` the bound is the worst tablewise oscillation
    within a depth-k cylinder plus twice the carried var_bound.
    Truncating to the potential's own depth is the identity.
    """
    if isinstance(g, VariationPotential):
        if not 1 <= k <= g.depth:
            raise ValueError(f"truncation depth {k} outside 1..{g.depth}")
        table = g.table[_anchor_indices(g.space.size, k, g.depth)]
        return Potential(g.space, k, table, float(g.var_bounds[k]))
    if not 1 <= k <= g.depth:
        raise ValueError(f"truncation depth {k} outside 1..{g.depth}")
    if k == g.depth:
        return g
    n = g.space.size
    table = g.table[_anchor_indices(n, k, g.depth)]
    blocks = g.table.reshape(n**k, n ** (g.depth - k))
    osc = float(np.max(blocks.max(axis=1) - blocks.min(axis=1)))
    return Potential(g.space, k, table, osc + 2.0 * g.var_bound)


def builtin_constant(space, c):
    """The constant potential f = c, stored at depth 1."""
    return Potential(space, 1, np.full(space.size, float(c)))


def builtin_ising(space, coupling, external_field=0.0):
    """Nearest-neighbour spin potential J*s(u1)*s(u2) + h*s(u1), spins s(0)=-1, s(1)=+1."""
    if space.size != 2:
        raise ValueError("the spin potential needs a two-symbol space")
    s = np.array([-1.0, 1.0])
    table = coupling * np.outer(s, s) + external_field * s[:, None]
    return Potential(space, 2, table.ravel())


def builtin_xy(space, coupling):
    """Rotor pair potential J*cos(2*pi*(t(u1) - t(u2))) on quadrature nodes t."""
    if space.nodes is None:
        raise ValueError("the rotor potential needs a quadrature space with nodes")
    t = space.nodes
    table = coupling * np.cos(TWO_PI * (t[:, None] - t[None, :]))
    return Potential(space, 2, table.ravel())


@dataclass(frozen=True)
class RenewalTail:
    """Behaviour of a renewal payoff sequence beyond the stored horizon.

    ``limit`` is the payoff value at the all-zeros fixed point;
    ``bound`` dominates |s_j - limit| for every j past the horizon.
    """

    limit: float
    bound: float = 0.0


def builtin_renewal(space, payoffs, tail="constant"):
    """Renewal potential: value s_{j+1} on the cylinder with j leading zeros then a one.

    The word 0^j 1 ... gets payoff ``payoffs[j]`` (j = 0..K-1 zeros);
    the all-zeros depth-K cylinder gets ``payoffs[K-1]``.  The returned
    :class:`VariationPotential` has depth K = len(payoffs) and carries
    closed-form oscillation bounds: a depth-j cylinder either pins the
    position of the first one (zero oscillation) or is the all-zeros
    cylinder, whose value set is the remaining payoffs plus the tail.

    ``tail`` is ``"constant"`` (payoffs continue at their last value,
    making the depth-K table exact) or a :class:`RenewalTail`.
    """
    if space.size != 2:
        raise ValueError("the renewal potential needs a two-symbol space")
    s = np.asarray(payoffs, dtype=float).reshape(-1)
    if s.size < 1:
        raise ValueError("need at least one payoff")
    horizon = s.size
    if tail == "constant":
        tail = RenewalTail(limit=float(s[-1]), bound=0.0)
    elif not isinstance(tail, RenewalTail):
        raise ValueError("tail must be 'constant' or a RenewalTail")

    # leading-zero count of the K-bit index: K minus the bit length
    idx = np.arange(1, 2**horizon, dtype=np.int64)
    bit_length = np.frexp(idx.astype(np.float64))[1]
    leading_zeros = horizon - bit_length
    table = np.empty(2**horizon)
    table[0] = s[-1]
    table[1:] = s[leading_zeros]

    var_bounds = np.empty(horizon + 1)
    for j in range(horizon + 1):
        # on [0^j] the true value is one of s[j..K-1], something in the
        # tail band, or the limit; the stored table uses s[K-1] there
        vals = [tail.limit - tail.bound, tail.limit + tail.bound, float(s[-1])]
        vals.extend(float(v) for v in s[j:])
        var_bounds[j] = max(vals) - min(vals)
    return VariationPotential(space, horizon, table, var_bounds)
