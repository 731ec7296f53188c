"""Conjugates, duality certificates, the density dual and Kusuoka mixtures.

The conjugate of a risk functional over simple variables,

    rho#(Y) = sup_X { E[XY] - rho(X) },

is not finitely computable for arbitrary rho, so :func:`conjugate_sharp` is
honest about status: closed forms where the family pins them down (AVaR and
the higher-order family have indicator conjugates over density sets),
divergence flags along the rays that force +inf for cash-additive monotone
functionals, and certified lower bounds from multi-start ascent otherwise.

The higher-order dual  max{ E[-X Z] : Z >= 0, E[Z] = 1, ||Z||_q <= c }  is
solved in closed form through its stationarity structure
Z ~ ((a - lam)^+)^{1/(q-1)}, a = -X, with an outer bisection on lam; the
Kusuoka layer re-expresses the same optimum as a mixture of AVaR levels and
certifies the sandwich against the primal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import UnresolvedConjugateError
from .orlicz import orlicz_norm, perspective
from .prob_core import FiniteProbSpace, Partition, RandomVariable, cond_exp
from .risk_core import OrliczTriple, RiskFunctional, avar_many

INF = math.inf

DIVERGENCE_THRESHOLD = 1e6


@dataclass(frozen=True)
class Density:
    """Nonnegative values with probability-weighted mean one (a dQ/dP)."""

    space: FiniteProbSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.space.atom_count,):
            raise ValueError("one value per atom required")
        if np.any(v < -1e-12):
            raise ValueError("density values must be nonnegative")
        v = np.clip(v, 0.0, None)
        mean = float(self.space.probs @ v)
        if abs(mean - 1.0) > 1e-10:
            raise ValueError(f"density mean {mean!r} is not 1 within 1e-10")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def as_variable(self) -> RandomVariable:
        return RandomVariable(self.space, self.values)


@dataclass(frozen=True)
class MixingMeasure:
    """Weights on a strictly increasing grid of AVaR levels in (0, 1]."""

    levels: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if lv.ndim != 1 or lv.shape != w.shape or lv.size == 0:
            raise ValueError("levels and weights must be matching 1-d vectors")
        if np.any(lv <= 0.0) or np.any(lv > 1.0) or np.any(np.diff(lv) <= 0.0):
            raise ValueError("levels must be strictly increasing inside (0, 1]")
        if np.any(w < -1e-12):
            raise ValueError("weights must be nonnegative")
        w = np.clip(w, 0.0, None)
        total = float(w.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {total!r}, not 1 within 1e-10")
        lv = lv.copy()
        w = w / total
        lv.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "weights", w)

    @classmethod
    def point_mass(cls, level: float) -> "MixingMeasure":
        return cls(np.array([level]), np.array([1.0]))


def _q_norm(values: np.ndarray, probs: np.ndarray, q: float) -> float:
    return float((probs @ np.abs(values) ** q) ** (1.0 / q))


# ---------------------------------------------------------------------------
# conjugate with certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjugateValue:
    """Conjugate evaluation with provenance.

    status: "closed_form" (exact), "diverged" (certified +inf along a ray) or
    "lower_bound" (best ascent value only; not a certified conjugate).
    """

    value: float
    status: str
    lower_bound: float
    best_point: Optional[np.ndarray] = None

    @property
    def resolved(self) -> bool:
        return self.status != "lower_bound"


def _dual_ball(rho: RiskFunctional):
    """Recognize families whose conjugate is the indicator of a density set.

    Returns ("box", bound) for sup-bounded densities (AVaR-type) or
    ("ball", c, q) for q-norm-bounded densities (higher-order type); None if
    the family is not recognized.
    """
    if rho.kind == "avar":
        return ("box", 1.0 / rho.alpha)
    if rho.kind == "higher_order":
        c, p = rho.c, rho.p
        if p == 1.0:
            return ("box", c)
        return ("ball", c, p / (p - 1.0))
    if rho.kind == "transformed" and rho.triple is not None:
        t = rho.triple
        if t.f.name == "linear" and t.h.name == "positive_part":
            c = t.f.params[0]
            if t.g.name == "linear":
                return ("box", c * t.g.params[0])
            if t.g.name == "power" and t.g.params[1] == 1.0:
                p = t.g.params[0]
                return ("ball", c, p / (p - 1.0))
    return None


def _ball_membership(ball, z: np.ndarray, probs: np.ndarray) -> bool:
    if np.any(z < -1e-12):
        return False
    if abs(float(probs @ z) - 1.0) > 1e-9:
        return False
    if ball[0] == "box":
        return float(np.max(z)) <= ball[1] * (1.0 + 1e-12) + 1e-12
    _, c, q = ball
    return _q_norm(z, probs, q) <= c + 1e-9


def _ray_divergence(obj: Callable, y: np.ndarray) -> bool:
    """Probe the rays that force an infinite conjugate for cash-additive
    monotone functionals: constants (mass mismatch) and indicators of the
    sign sets of y (monotonicity violation), plus single-atom spikes."""
    n = y.size
    rays = [np.ones(n), -np.ones(n)]
    if np.any(y > 0):
        rays.append((y > 0).astype(float))
    if np.any(y < 0):
        rays.append(-(y < 0).astype(float))
    for i in range(n):
        e = np.zeros(n)
        e[i] = -1.0
        rays.append(e)
    for d in rays:
        for k in range(0, 22):
            if obj((2.0 ** k) * d) > DIVERGENCE_THRESHOLD:
                return True
    return False


def _pattern_search(obj: Callable, x0: np.ndarray, iters: int = 200):
    x = x0.copy()
    fx = obj(x)
    step = 1.0
    for _ in range(iters):
        improved = False
        for i in range(x.size):
            for d in (step, -step):
                cand = x.copy()
                cand[i] += d
                fc = obj(cand)
                if fc > fx:
                    x, fx = cand, fc
                    improved = True
        if improved:
            step = min(step * 2.0, 1e6)  # grow the search box while it pays
        else:
            step *= 0.5
            if step < 1e-9:
                break
    return x, fx


def conjugate_sharp(rho: RiskFunctional, y: RandomVariable,
                    restarts: int = 2, seed: int = 0) -> ConjugateValue:
    """Best-effort rho#(y) = sup_X {E[Xy] - rho(X)} with a certificate.

    Recognized families resolve exactly (indicator of their density set).
    Otherwise ray probes certify divergence, and multi-start pattern search
    supplies a certified lower bound (any evaluated point is one).
    """
    probs = y.space.probs

    def obj(vals: np.ndarray) -> float:
        xv = RandomVariable(y.space, vals)
        r = rho(xv)
        if r == INF:
            return -INF
        return float(probs @ (vals * y.values)) - r

    ball = _dual_ball(rho)
    closed = None
    if ball is not None:
        closed = 0.0 if _ball_membership(ball, -y.values, probs) else INF

    diverged = _ray_divergence(obj, y.values) if closed is None or restarts > 0 else False

    lower = -INF
    best_point = None
    if restarts > 0:
        rng = np.random.default_rng(seed)
        starts = [np.zeros(y.space.atom_count), -y.values.copy()]
        for _ in range(max(0, restarts - 1)):
            starts.append(rng.normal(scale=2.0, size=y.space.atom_count))
        for s in starts:
            pt, val = _pattern_search(obj, s)
            if val > lower:
                lower, best_point = val, pt

    if closed is not None:
        return ConjugateValue(closed, "closed_form", lower, best_point)
    if diverged:
        return ConjugateValue(INF, "diverged", max(lower, DIVERGENCE_THRESHOLD), best_point)
    return ConjugateValue(lower, "lower_bound", lower, best_point)


def fenchel_gap(rho: RiskFunctional, x: RandomVariable, y: RandomVariable,
                restarts: int = 2, seed: int = 0) -> float:
    """rho(x) + rho#(y) - E[xy]; nonnegative for every resolved pair.

    The dual representation is certified at x when some y drives the gap
    below 1e-5.  Refuses when the conjugate is only a lower bound."""
    cs = conjugate_sharp(rho, y, restarts=restarts, seed=seed)
    if not cs.resolved:
        raise UnresolvedConjugateError(
            "conjugate is lower-bound-only; gap would be meaningless"
        )
    pairing = float(x.space.probs @ (x.values * y.values))
    return float(rho(x)) + cs.value - pairing


def conjugate_dilatation_check(rho: RiskFunctional, y: RandomVariable, p: Partition,
                               restarts: int = 0, seed: int = 0) -> bool:
    """Check rho#(E[Y|p]) <= rho#(Y) + 1e-5 (coarsening never increases the
    conjugate).  Raises when either side is unresolved."""
    lhs = conjugate_sharp(rho, cond_exp(y, p), restarts=restarts, seed=seed)
    rhs = conjugate_sharp(rho, y, restarts=restarts, seed=seed)
    if not (lhs.resolved and rhs.resolved):
        raise UnresolvedConjugateError("conjugate unresolved on one side")
    if rhs.value == INF:
        return True
    return lhs.value <= rhs.value + 1e-5


# ---------------------------------------------------------------------------
# higher-order dual density problem
# ---------------------------------------------------------------------------


def _blend_feasible(z: np.ndarray, probs: np.ndarray, c: float, q: float) -> np.ndarray:
    """Restore ||z||_q <= c exactly by mixing toward the uniform density
    (norm 1 < c), preserving the unit mass; a no-op when already feasible."""
    if _q_norm(z, probs, q) <= c:
        return z
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _q_norm((1.0 - mid) * z + mid, probs, q) <= c:
            hi = mid
        else:
            lo = mid
    return (1.0 - hi) * z + hi


def _enter_at_kink(d, probs, c, q, r, tau_e):
    """Direction when the mass root sits at (or below float resolution of) an
    entry kink: freeze the already-entered coordinates at the kink, which are
    constant to machine precision across the unresolvable gap, and solve the
    entering class's coordinate w directly.  The mass of the rescaled
    direction is increasing in w, so bisection applies."""
    u = np.clip(d + tau_e, 0.0, None)
    v = (u / tau_e) ** r
    entering = (-d == tau_e)

    def mass(w: float) -> float:
        vw = np.where(entering, w, v)
        return c * float(probs @ vw) / _q_norm(vw, probs, q) - 1.0

    if mass(0.0) >= 0.0:
        return v
    w_lo, w_hi = 0.0, 1.0
    if mass(1.0) < 0.0:
        return np.where(entering, 1.0, v)  # best effort: blend repairs the rest
    for _ in range(200):
        mid = 0.5 * (w_lo + w_hi)
        if mass(mid) < 0.0:
            w_lo = mid
        else:
            w_hi = mid
    return np.where(entering, 0.5 * (w_lo + w_hi), v)


def _fallback_projected(a, probs, c, q, iters=4000):
    """Projected-gradient fallback for the density problem; 1e-5 grade."""
    n = a.size
    z = np.ones(n)
    best_z, best_v = z.copy(), float(probs @ (a * z))
    step = 1.0 / max(1.0, float(np.max(np.abs(a))))
    for k in range(iters):
        z = z + step * a / math.sqrt(1.0 + k)
        z = np.clip(z, 0.0, None)
        s = float(probs @ z)
        z = z / s if s > 0 else np.ones(n)
        if _q_norm(z, probs, q) > c:
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                cand = (1.0 - mid) * z + mid * np.ones(n)
                if _q_norm(cand, probs, q) <= c:
                    hi = mid
                else:
                    lo = mid
            z = (1.0 - hi) * z + hi * np.ones(n)
        v = float(probs @ (a * z))
        if v > best_v:
            best_z, best_v = z.copy(), v
    return best_v, best_z


def dual_higher_order(x: RandomVariable, c: float, q: float) -> Tuple[float, Density]:
    """max E[-X Z] over {Z >= 0, E[Z] = 1, ||Z||_q <= c} by stationarity.

    Interior case: the vertex Z = 1_{X = min X} / P(min) when its q-norm
    already fits inside the ball.  Active case: Z is proportional to
    ((a - lam)^+)^{1/(q-1)} with a = -X, rescaled onto the sphere; the mass
    constraint E[Z] = 1 pins lam by bisection (the mass of the rescaled
    direction is nonincreasing in lam).  The optimum value matches the primal
    hull within 1e-7 (strong duality), and Z is returned as the certificate.
    """
    if not (c > 1.0 and q > 1.0):
        raise ValueError("need c > 1 and q = p/(p-1) > 1")
    probs = x.space.probs
    a = -x.values
    amax = float(a.max())
    # group ulp-scale near-ties: a gap the lam-bisection cannot resolve anyway
    tie_tol = 4.0 * np.finfo(float).eps * max(1.0, abs(amax))
    at_max = a >= amax - tie_tol
    z_vertex = at_max / float(probs @ at_max)
    if _q_norm(z_vertex, probs, q) <= c * (1.0 + 1e-12):
        return float(probs @ (a * z_vertex)), Density(x.space, z_vertex)

    r = 1.0 / (q - 1.0)
    # solve in the gap tau = amax - lam > 0: u_i = (a_i - amax) + tau avoids
    # the catastrophic cancellation of a_i - lam when tau is tiny, and the
    # normalized direction (u/tau)**r never exceeds one
    d = a - amax

    def mass_excess(tau: float) -> float:
        u = np.clip(d + tau, 0.0, None)
        v = (u / tau) ** r
        return c * float(probs @ v) / _q_norm(v, probs, q) - 1.0

    def finish(v: np.ndarray):
        z = c * v / _q_norm(v, probs, q)
        z = z / float(probs @ z)
        z = _blend_feasible(z, probs, c, q)
        return float(probs @ (a * z)), Density(x.space, z)

    # atoms join the support as tau crosses the entry ladder -d_i > 0; the
    # mass excess is continuous and nondecreasing in tau, constant before the
    # first entry, with limit c - 1 > 0, so the root's segment is found by
    # exact sign evaluation at the entries (u vanishes exactly there)
    entries = np.unique(-d[d < 0.0])
    seg_lo, seg_hi = None, None
    for tau_e in entries:
        if mass_excess(float(tau_e)) > 0.0:
            seg_hi = float(tau_e)
            break
        seg_lo = float(tau_e)
    if seg_lo is None:
        warnings.warn("density dual: no bracket; projected-gradient fallback")
        val, z = _fallback_projected(a, probs, c, q)
        z = z / float(probs @ z)
        return float(probs @ (a * z)), Density(x.space, z)
    if seg_hi is None:
        # root beyond the last entry: all atoms active, no kink ahead
        seg_hi = 2.0 * seg_lo
        for _ in range(200):
            if mass_excess(seg_hi) > 0.0:
                break
            seg_hi *= 2.0
        else:
            warnings.warn("density dual: no bracket; projected-gradient fallback")
            val, z = _fallback_projected(a, probs, c, q)
            z = z / float(probs @ z)
            return float(probs @ (a * z)), Density(x.space, z)

    # zoom in the distance delta to the lower kink: the entering coordinate
    # grows like delta**r (infinite slope when q > 2), so the root needs
    # relative resolution in delta.  Work on the precomputed base d + seg_lo
    # rather than on tau = seg_lo + delta: the sum would quantize delta at
    # ulp(seg_lo) and reintroduce the cancellation this stage exists to avoid.
    base = d + seg_lo

    def excess_at(delta: float) -> float:
        u = np.clip(base + delta, 0.0, None)
        tau = seg_lo + delta
        v = (u / tau) ** r
        return c * float(probs @ v) / _q_norm(v, probs, q) - 1.0

    def dir_at(delta: float) -> np.ndarray:
        u = np.clip(base + delta, 0.0, None)
        return (u / (seg_lo + delta)) ** r

    delta_hi = seg_hi - seg_lo
    delta_lo = None
    probe = delta_hi
    for _ in range(500):
        probe /= 16.0
        if probe <= 0.0 or not probe > 5e-324:
            break  # below float resolution: root is at the kink
        if excess_at(probe) < 0.0:
            delta_lo = probe
            break
        delta_hi = probe
    if delta_lo is None:
        return finish(_enter_at_kink(d, probs, c, q, r, seg_lo))
    for _ in range(400):
        if delta_hi <= delta_lo * (1.0 + 1e-14):
            break
        mid = math.sqrt(delta_lo * delta_hi)
        if excess_at(mid) > 0.0:
            delta_hi = mid
        else:
            delta_lo = mid
    delta = math.sqrt(delta_lo * delta_hi)
    if abs(excess_at(delta)) > 1e-9:
        return finish(_enter_at_kink(d, probs, c, q, r, seg_lo))
    return finish(dir_at(delta))


# ---------------------------------------------------------------------------
# eta-form of the transformed-norm conjugate
# ---------------------------------------------------------------------------


def t_sharp_eta(t: OrliczTriple, z: Density, eta_grid: int = 200) -> float:
    """min over eta >= 0 with {eta = 0} inside {z = 0} of
    E[eta * Hconj(z/eta on the support)] + Fconj(||eta||*_G).

    For a linear outer transform with positive-part reshaping the problem
    collapses: feasible (value 0) exactly when the Orlicz norm of z stays
    within the slope, +inf otherwise.  Other triples go through a projected
    subgradient on eta seeded at z; the result is a best-effort upper value.
    """
    probs = z.space.probs
    if t.f.name == "linear" and t.h.name == "positive_part":
        c = t.f.params[0]
        return 0.0 if orlicz_norm(z.as_variable(), t.g) <= c + 1e-9 else INF

    fstar = t.f.conjugate()
    support = z.values > 0.0

    def objective(eta: np.ndarray) -> float:
        if np.any(eta < 0.0) or np.any(support & (eta <= 0.0)):
            return INF
        total = 0.0
        for pi, zi, ei in zip(probs, z.values, eta):
            term = perspective(ei, zi, t.h.conjugate_value)
            if term == INF:
                return INF
            total += pi * term
        tail = fstar(orlicz_norm(RandomVariable(z.space, eta), t.g))
        if tail == INF:
            return INF
        return total + tail

    eta = np.where(support, z.values, 0.0)
    best = objective(eta)
    iters = max(50, int(eta_grid))
    floor = 1e-12
    scale = max(1.0, float(z.values.max()))
    for k in range(iters):
        step = 0.5 * scale / math.sqrt(1.0 + k)
        grad = np.zeros_like(eta)
        f0 = objective(eta)
        if f0 == INF:
            break
        h = 1e-6 * scale
        for i in range(eta.size):
            bump = eta.copy()
            bump[i] += h
            fp = objective(bump)
            if fp == INF:
                grad[i] = 1.0
                continue
            grad[i] = (fp - f0) / h
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < 1e-14:
            break
        eta = eta - step * grad / gnorm
        eta = np.clip(eta, 0.0, None)
        eta[support] = np.maximum(eta[support], floor)
        cur = objective(eta)
        if cur < best:
            best = cur
    return best


# ---------------------------------------------------------------------------
# Kusuoka layer
# ---------------------------------------------------------------------------


def kusuoka_constraint(mu: MixingMeasure, q: float) -> float:
    """Exact value of the mixture constraint integral.

    sigma(alpha) = sum of w_i / a_i over grid levels a_i >= alpha is
    piecewise constant between levels, so the integral of sigma**q over (0,1]
    is a finite sum -- no quadrature error."""
    if q <= 1.0:
        raise ValueError("q must exceed 1")
    lv, w = mu.levels, mu.weights
    sigma = np.cumsum((w / lv)[::-1])[::-1]
    edges = np.concatenate([[0.0], lv])
    return float(np.sum(sigma ** q * np.diff(edges)))


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho_idx = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    theta = css[rho_idx] / (rho_idx + 1.0)
    return np.clip(v - theta, 0.0, None)


def _restore_feasible(w: np.ndarray, levels: np.ndarray, q: float, cq: float) -> np.ndarray:
    """Shrink toward the point mass at level 1 (strictly feasible) until the
    constraint holds; bisection on the mixing parameter."""
    mm = MixingMeasure(levels, w / w.sum())
    if kusuoka_constraint(mm, q) <= cq:
        return mm.weights
    anchor = np.zeros_like(w)
    anchor[-1] = 1.0
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        cand = (1.0 - mid) * mm.weights + mid * anchor
        if kusuoka_constraint(MixingMeasure(levels, cand), q) <= cq:
            hi = mid
        else:
            lo = mid
    return (1.0 - hi) * mm.weights + hi * anchor


def _distribution_breaks(x: RandomVariable):
    """Cumulative probabilities at the sorted distinct values (last pinned to 1),
    plus the first atom index of each value class."""
    _, first_idx, inverse = np.unique(x.values, return_index=True, return_inverse=True)
    class_prob = np.bincount(inverse, weights=x.space.probs)
    breaks = np.cumsum(class_prob)
    breaks[-1] = 1.0
    return breaks, first_idx


def kusuoka_levels(x: RandomVariable, grid_size: int) -> np.ndarray:
    """Level grid: geometric from 1/(4N) to 1 (denser near 0, where AVaR moves
    fastest), augmented with the distribution's cumulative-probability
    breakpoints so step spectra of the scenario itself are representable."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    n = x.space.atom_count
    geo = np.geomspace(1.0 / (4.0 * n), 1.0, grid_size)
    breaks, _ = _distribution_breaks(x)
    levels = np.unique(np.concatenate([geo, breaks, [1.0]]))
    return levels[(levels > 0.0) & (levels <= 1.0)]


def kusuoka_value(x: RandomVariable, c: float, p: float,
                  grid_size: int = 256, seed: int = 0,
                  subgradient_iters: int = 200) -> Tuple[float, MixingMeasure]:
    """Best AVaR mixture value over the constrained set of mixing measures.

    Maximizes sum_i w_i AVaR_{a_i}(x) over {w >= 0, sum w = 1,
    kusuoka_constraint <= c**q}.  Three feasible candidates are combined and
    the best is returned: the spectral measure rebuilt from the optimal dual
    density (exact when the grid carries the distribution breakpoints, which
    :func:`kusuoka_levels` guarantees), the feasible point masses, and a
    projected-subgradient ascent from the point mass at level one with
    feasibility restoration toward it.  Every candidate is feasible, so the
    value never exceeds the primal hull beyond float noise.
    """
    if not (c > 1.0 and p > 1.0):
        raise ValueError("need c > 1 and p > 1")
    q = p / (p - 1.0)
    cq = c ** q
    levels = kusuoka_levels(x, grid_size)
    m = levels.size
    avars = avar_many(x, levels)
    feas_tol = cq * (1.0 + 1e-12)

    best_w = np.zeros(m)
    best_w[-1] = 1.0  # point mass at level 1: constraint value 1 < c**q
    best_val = float(avars[-1])

    def consider(w: np.ndarray):
        nonlocal best_w, best_val
        w = np.clip(w, 0.0, None)
        s = w.sum()
        if s <= 0:
            return
        w = w / s
        if kusuoka_constraint(MixingMeasure(levels, w), q) > feas_tol:
            w = _restore_feasible(w, levels, q, cq)
        val = float(w @ avars)
        # require a genuine improvement; float-noise ties keep the earlier
        # (spectral) candidate
        if val > best_val + 1e-12 * (1.0 + abs(best_val)):
            best_w, best_val = w, val

    # spectral candidate: the optimal dual density, read as a step spectrum
    # (z is constant on value classes, nonincreasing against sorted values)
    _, zstar = dual_higher_order(x, c, q)
    breaks, first_idx = _distribution_breaks(x)
    sigma = zstar.values[first_idx]
    w_spec = np.zeros(m)
    pos = np.searchsorted(levels, breaks)
    drops = sigma - np.concatenate([sigma[1:], [0.0]])
    np.add.at(w_spec, pos, breaks * np.clip(drops, 0.0, None))
    consider(w_spec)

    # feasible point masses
    singleton_ok = levels ** (1.0 - q) <= cq
    for i in np.flatnonzero(singleton_ok):
        w = np.zeros(m)
        w[i] = 1.0
        consider(w)

    # projected subgradient with restoration (seeded, diminishing steps)
    rng = np.random.default_rng(seed)
    w = np.zeros(m)
    w[-1] = 1.0
    direction = avars / max(1.0, float(np.max(np.abs(avars))))
    for k in range(subgradient_iters):
        step = 1.0 / math.sqrt(1.0 + k)
        w = _project_simplex(w + step * direction + 1e-12 * rng.standard_normal(m))
        if w.sum() <= 0:
            w = np.zeros(m)
            w[-1] = 1.0
        consider(w)
        w = _restore_feasible(np.clip(w, 0.0, None) + 1e-300, levels, q, cq)

    return best_val, MixingMeasure(levels, best_w)
