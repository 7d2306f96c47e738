"""Spectral quantities of the operator: pressure, radius, Perron eigendata.

The pressure is bracketed from the iterates of the constant function 1:

    p_inf[n] = min log(L^n 1)/n  <=  log(radius)  <=  max log(L^n 1)/n = p_sup[n]

(the two sides are the extreme row sums of the n-th kernel power, which
pinch the Perron root of a non-negative matrix).  Long products run in
log space once n * sup|f| crosses 300.

Eigendata come from simultaneous power iteration: the adjoint iteration
renormalizes by total mass, whose limit is the leading eigenvalue, and
the forward iteration rescales by the same estimate.  Near-degenerate
second eigenvalues of opposite sign show up as a period-2 oscillation
of the mass sequence; averaging two consecutive iterates removes the
alternating mode and the iteration then proceeds normally.  A run that
exhausts its iteration budget returns flagged data together with both
accumulation vectors instead of raising.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .measures import CylinderMeasure
from .transfer import LOG_SPACE_THRESHOLD, CylinderFunction, build_kernel

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITERS = 100_000

OSC_DETECT_NEAR = 1e-3  # period-2 detector: lam[t] vs lam[t-2] this much closer...
OSC_DETECT_FAR = 1e2 * OSC_DETECT_NEAR  # ...than lam[t] vs lam[t-1]


@dataclass(frozen=True, eq=False)
class PressureEstimate:
    """Bracket sequences for the pressure at one working depth.

    ``p_sup[n-1]`` and ``p_inf[n-1]`` bound log(radius) after n
    applications; ``estimate`` is the final midpoint, ``width`` the
    final bracket width, and ``trunc_bound`` the additive log-scale
    error inherited from the potential's variation bound.
    """

    n_max: int
    p_sup: np.ndarray
    p_inf: np.ndarray
    estimate: float
    width: float
    trunc_bound: float


def pressure_bracket(f, depth, n_max):
    """Bracket the pressure by iterating the constant function 1 n_max times."""
    if n_max < 1:
        raise ValueError("need at least one application")
    kernel = build_kernel(f, depth)
    p_sup = np.empty(n_max)
    p_inf = np.empty(n_max)
    if n_max * f.sup_norm > LOG_SPACE_THRESHOLD:
        lv = np.zeros(kernel.size)
        for n in range(1, n_max + 1):
            lv = kernel.log_matvec(lv)
            p_sup[n - 1] = lv.max() / n
            p_inf[n - 1] = lv.min() / n
    else:
        v = np.ones(kernel.size)
        log_scale = 0.0
        for n in range(1, n_max + 1):
            v = kernel.matvec(v)
            peak = v.max()
            v /= peak
            log_scale += math.log(peak)
            p_sup[n - 1] = log_scale / n
            p_inf[n - 1] = (log_scale + math.log(v.min())) / n
    return PressureEstimate(
        n_max=n_max,
        p_sup=p_sup,
        p_inf=p_inf,
        estimate=0.5 * (p_sup[-1] + p_inf[-1]),
        width=float(p_sup[-1] - p_inf[-1]),
        trunc_bound=f.var_bound,
    )


def gelfand_radius(f, depth, n_max):
    """The n-th root upper estimates exp(p_sup[n]) of the spectral radius."""
    return np.exp(pressure_bracket(f, depth, n_max).p_sup)


@dataclass(frozen=True, eq=False)
class PowerIterationResult:
    """Raw output of the simultaneous iteration at the working depth."""

    lam: float
    right: np.ndarray
    left: np.ndarray
    residual_right: float
    residual_left: float
    iterations: int
    converged: bool
    right_prev: np.ndarray
    left_prev: np.ndarray


def power_iterate(kernel, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, left0=None, right0=None):
    """Simultaneous forward/adjoint power iteration on a built kernel.

    Stops when the forward residual, the adjoint residual and the
    relative eigenvalue step all fall below tol.  Non-convergence is
    reported in the result, not raised; the previous iterates are kept
    so a caller can inspect both accumulation points.
    """
    nd = kernel.size
    left = np.full(nd, 1.0 / nd) if left0 is None else np.asarray(left0, float) / np.sum(left0)
    right = np.ones(nd) if right0 is None else np.asarray(right0, float).copy()
    left_prev = left
    right_prev = right
    lam = math.nan
    resid_l = resid_r = math.inf
    converged = False
    history = []
    it = 0
    while it < max_iters:
        it += 1
        t_left = kernel.tmatvec(left)
        mass = float(t_left.sum())
        if not (np.isfinite(mass) and mass > 0):
            raise NumericError(f"adjoint iteration produced mass {mass!r}")
        t_right = kernel.matvec(right)
        resid_l = float(np.max(np.abs(t_left - mass * left))) / mass
        resid_r = float(np.max(np.abs(t_right - mass * right))) / mass
        dlam = abs(mass - lam) / mass if not math.isnan(lam) else math.inf
        lam = mass
        left_prev, left = left, t_left / mass
        right_prev, right = right, t_right / mass
        if max(resid_l, resid_r, dlam) < tol:
            converged = True
            break
        history.append(mass)
        if len(history) >= 3:
            step_2 = abs(history[-1] - history[-3])
            step_1 = abs(history[-1] - history[-2])
            if step_2 < OSC_DETECT_NEAR * step_1 and step_1 > OSC_DETECT_FAR * tol * mass:
                # period-2 oscillation: project out the alternating mode
                left = 0.5 * (left + left_prev)
                left /= left.sum()
                right = 0.5 * (right + right_prev)
                history.clear()
        # keep the forward iterate in floating range; scale is fixed at the end
        peak = np.max(np.abs(right))
        if peak > 1e100 or (0 < peak < 1e-100):
            right = right / peak
    return PowerIterationResult(
        lam=lam,
        right=right,
        left=left,
        residual_right=resid_r,
        residual_left=resid_l,
        iterations=it,
        converged=converged,
        right_prev=right_prev,
        left_prev=left_prev,
    )


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Perron eigendata at the canonical depth max(k-1, 1).

    ``h`` is the strictly positive eigenfunction scaled so its integral
    against ``nu`` is one; ``nu`` is the probability eigenmeasure of the
    adjoint.  ``mass_dev`` and ``hnu_dev`` certify the normalizations;
    the residuals are scale-free sup-norm defects at the stored depth.
    ``work_*`` keep the working-depth vectors; ``alt_*`` hold the other
    accumulation point when the iteration did not converge.
    """

    lam: float
    h: CylinderFunction
    nu: CylinderMeasure
    residual_right: float
    residual_left: float
    iterations: int
    converged: bool
    mass_dev: float
    hnu_dev: float
    trunc_bound: float
    work_depth: int
    h_work: np.ndarray
    nu_work: np.ndarray
    alt_h: np.ndarray = None
    alt_nu: np.ndarray = None


def perron_eigendata(f, depth, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Leading eigenvalue, eigenfunction and eigenmeasure of the operator.

    Iterates at the requested depth, then stores the eigendata at the
    canonical depth max(k-1, 1): the eigenmeasure by marginalizing, the
    eigenfunction by nu-conditional block averages, which keeps h * nu
    consistent across depths.
    """
    kernel = build_kernel(f, depth)
    raw = power_iterate(kernel, tol=tol, max_iters=max_iters)
    return _package_eigendata(f, depth, raw, tol)


def _package_eigendata(f, depth, raw, tol):
    n = f.space.size
    d0 = max(f.depth - 1, 1)
    if depth < d0:
        raise ValueError(f"working depth {depth} below canonical depth {d0}")
    reps = n ** (depth - d0)
    nu_blocks = raw.left.reshape(-1, reps)
    nu0 = nu_blocks.sum(axis=1)
    hnu_blocks = (raw.right * raw.left).reshape(-1, reps).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        h0 = np.where(nu0 > 0, hnu_blocks / np.where(nu0 > 0, nu0, 1.0), 0.0)
    mass = nu0.sum()
    mass_dev = abs(mass - 1.0)
    nu0 = nu0 / mass
    scale = float(np.dot(h0, nu0))
    if not (np.isfinite(scale) and scale > 0):
        raise NumericError("eigenfunction integral against the eigenmeasure is not positive")
    h0 = h0 / scale
    hnu_dev = abs(float(np.dot(h0, nu0)) - 1.0)
    kernel0 = build_kernel(f, d0)
    lam = raw.lam
    resid_r = float(np.max(np.abs(kernel0.matvec(h0) - lam * h0))) / lam
    resid_l = float(np.max(np.abs(kernel0.tmatvec(nu0) - lam * nu0))) / lam
    return SpectralData(
        lam=lam,
        h=CylinderFunction(f.space, d0, h0),
        nu=CylinderMeasure(f.space, d0, nu0),
        residual_right=resid_r,
        residual_left=resid_l,
        iterations=raw.iterations,
        converged=raw.converged,
        mass_dev=mass_dev,
        hnu_dev=hnu_dev,
        trunc_bound=f.var_bound,
        work_depth=depth,
        h_work=raw.right,
        nu_work=raw.left,
        alt_h=None if raw.converged else raw.right_prev,
        alt_nu=None if raw.converged else raw.left_prev,
    )


def xi_sequence(f, depth, n_max, lam):
    """The rescaled iterates lam^-n L^n(1) and their sup-norm increments.

    Returns (functions, increments) with increments[j] the sup distance
    between the j-th and (j+1)-th entries of (1, xi_1, .., xi_n_max).
    A correct lam makes the sequence Cauchy; a wrong one makes it run
    off geometrically, which the increments expose.
    """
    if n_max < 1:
        raise ValueError("need at least one term")
    kernel = build_kernel(f, depth)
    v = np.ones(kernel.size)
    functions = []
    increments = np.empty(n_max)
    for j in range(n_max):
        nxt = kernel.matvec(v) / lam
        if not np.all(np.isfinite(nxt)):
            raise NumericError("rescaled iterate left floating range; check lam")
        increments[j] = float(np.max(np.abs(nxt - v)))
        functions.append(CylinderFunction(f.space, depth, nxt))
        v = nxt
    return functions, increments
