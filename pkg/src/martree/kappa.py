"""The kappa profile of a constraint subspace.

For a vector v in V with v_j >= -1,

    kappa_v(theta) = theta * log((1/m) sum_j |1 + v_j|^{1/theta})
                   = log || 1 + v ||_{L_{1/theta}},

and kappa(theta) is the supremum of kappa_v over all v admitting some a != 0
with v (x) a in W.  The profile is convex, non-increasing, vanishes at
theta = 1, and its slope at 1,

    kappa'(1) = inf { -(1/m) sum_j (1 + v_j) log(1 + v_j) },

controls the lower Hausdorff dimension bound 1 + kappa'(1)/log m.

The feasible set is the rank-one slice of W intersected with a box, so the
search works in two stages: alternating projections between W and the
rank-one cone harvest candidate directions, each direction contributes the
exact optimum of the induced one-parameter family (a full scaling ray stays
inside W), and an SLSQP polish with explicit membership constraints explores
curved parts of the variety from those starting points.  Every witness
returned is re-snapped to an exactly feasible ray point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .spacew import SubspaceW, project

# A witness must land this close to W, relative to its size.
WITNESS_DISTANCE_TOL = 1e-10

# Reported optimizer accuracy; strict_gap_check margins below this are
# treated as equality.
OPTIMIZER_TOL = 1e-6


def kappa_v(v: np.ndarray, theta: float) -> float:
    """log of the L_{1/theta} norm of 1 + v on m uniform points; theta in [0, 1]."""
    v = np.asarray(v, dtype=float)
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    return float(kappa_v_many(v[None, :], theta)[0])


def kappa_v_many(V: np.ndarray, theta: float) -> np.ndarray:
    """kappa_v for a whole batch of vectors; V has shape (batch, m)."""
    mags = np.abs(1.0 + np.asarray(V, dtype=float))
    if theta == 0.0:
        return np.log(mags.max(axis=1))
    with np.errstate(divide="ignore"):
        logs = np.log(mags)
    return theta * logsumexp(logs / theta, axis=1, b=1.0 / mags.shape[1])


def entropy_v(v: np.ndarray) -> float:
    """-(1/m) sum (1+v_j) log(1+v_j) with 0 log 0 = 0."""
    v = np.asarray(v, dtype=float)
    if np.any(v < -1 - 1e-12):
        raise ValueError("entropy requires v_j >= -1")
    return float(entropy_v_many(v[None, :])[0])


def entropy_v_many(V: np.ndarray) -> np.ndarray:
    """entropy_v for a batch of vectors; values outside the box are clipped."""
    x = np.clip(1.0 + np.asarray(V, dtype=float), 0.0, None)
    terms = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
    return -terms.mean(axis=1)


def kappa_upper_bound(theta: float, m: int) -> float:
    """(1 - theta) log m: the vertex bound valid for every W."""
    return (1.0 - theta) * np.log(m)


@dataclass
class KappaWitness:
    v: np.ndarray
    a: np.ndarray
    value: float
    residual: float  # distance of v (x) a from W


@dataclass
class KappaProfile:
    theta_grid: np.ndarray
    values: np.ndarray
    witnesses: list[KappaWitness]
    kappa_prime_one: float
    prime_witness: KappaWitness
    dimension_bound: float
    oracle_values: np.ndarray | None = None


def rank_one_directions(W: SubspaceW, n_starts: int = 32, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Unit rank-one directions (u, a) with u (x) a numerically inside W.

    Alternating projection between W and the rank-one cone from random
    starting elements of W; distinct limits are deduplicated.
    """
    if W.dim == 0:
        return []
    rng = np.random.default_rng(seed)
    found: list[tuple[np.ndarray, np.ndarray]] = []

    def register(u, a):
        X = np.outer(u, a)
        for u2, a2 in found:
            if abs(np.sum(X * np.outer(u2, a2))) > 1.0 - 1e-8:
                return
        found.append((u, a))

    for _ in range(n_starts):
        coeffs = rng.standard_normal(W.dim)
        X = W.combine(coeffs)
        norm = np.linalg.norm(X)
        if norm == 0:
            continue
        X /= norm
        for _ in range(200):
            U, s, Vt = np.linalg.svd(X)
            R = s[0] * np.outer(U[:, 0], Vt[0])
            X_new = project(R, W)
            norm = np.linalg.norm(X_new)
            if norm < 1e-14:
                break
            X_new /= norm
            if np.linalg.norm(X_new - X) < 1e-15:
                X = X_new
                break
            X = X_new
        U, s, Vt = np.linalg.svd(X)
        if s[0] > 0 and (s[1:] ** 2).sum() <= 1e-20 and W.distance(X) <= 1e-10:
            u = U[:, 0]
            if abs(u.sum()) < 1e-8:
                register(u, Vt[0])
    return found


def feasible_interval(u: np.ndarray) -> tuple[float, float]:
    """The t-range with t * u_j >= -1 for all j."""
    u = np.asarray(u, dtype=float)
    pos = u > 1e-14
    neg = u < -1e-14
    t_lo = np.max(-1.0 / u[pos]) if np.any(pos) else -np.inf
    t_hi = np.min(-1.0 / u[neg]) if np.any(neg) else np.inf
    return float(t_lo), float(t_hi)


def _optimize_ray(u, objective, objective_many, maximize, grid_points=4001):
    """Exact-ish optimum of objective(t * u) over the feasible t-interval."""
    t_lo, t_hi = feasible_interval(u)
    if not np.isfinite(t_lo) or not np.isfinite(t_hi):
        # u in V always has entries of both signs, so this cannot trigger for
        # genuine directions; guard anyway.
        t_lo, t_hi = max(t_lo, -1e6), min(t_hi, 1e6)
    ts = np.linspace(t_lo, t_hi, grid_points)
    vals = objective_many(ts[:, None] * u[None, :])
    best_idx = int(np.argmax(vals) if maximize else np.argmin(vals))
    lo = ts[max(best_idx - 1, 0)]
    hi = ts[min(best_idx + 1, grid_points - 1)]
    sign = -1.0 if maximize else 1.0
    res = optimize.minimize_scalar(
        lambda t: sign * objective(t * u),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13},
    )
    candidates = [(vals[best_idx], ts[best_idx]), (sign * res.fun, float(res.x)),
                  (vals[0], t_lo), (vals[-1], t_hi)]
    if maximize:
        value, t = max(candidates, key=lambda c: c[0])
    else:
        value, t = min(candidates, key=lambda c: c[0])
    return float(value), float(t)


def _joint_polish(W, v0, a0, objective, maximize):
    m, ell = W.m, W.ell

    def neg_obj(z):
        return (-1.0 if maximize else 1.0) * objective(z[:m])

    def eq_resid(z):
        v, a = z[:m], z[m:]
        X = np.outer(v, a)
        return np.concatenate([(X - project(X, W)).ravel(), [a @ a - 1.0]])

    z0 = np.concatenate([v0, a0])
    try:
        res = optimize.minimize(
            neg_obj,
            z0,
            method="SLSQP",
            bounds=[(-1.0, None)] * m + [(None, None)] * ell,
            constraints=[{"type": "eq", "fun": eq_resid}],
            options={"maxiter": 300, "ftol": 1e-14},
        )
    except (ValueError, FloatingPointError):
        return None
    if not np.all(np.isfinite(res.x)):
        return None
    return res.x[:m], res.x[m:]


def _snap_to_feasible_ray(W, v, a, objective, objective_many, maximize):
    """Project (v, a) to an exactly feasible ray point and re-optimize the ray."""
    X = project(np.outer(v, a), W)
    for _ in range(100):
        U, s, Vt = np.linalg.svd(X)
        X_new = project(s[0] * np.outer(U[:, 0], Vt[0]), W)
        if np.linalg.norm(X_new - X) < 1e-15 * max(1.0, s[0]):
            X = X_new
            break
        X = X_new
    U, s, Vt = np.linalg.svd(X)
    if s[0] < 1e-12 or W.distance(X / s[0]) > WITNESS_DISTANCE_TOL:
        return None
    u, a_hat = U[:, 0], Vt[0]
    value, t = _optimize_ray(u, objective, objective_many, maximize)
    v_best = t * u
    residual = W.distance(np.outer(v_best, a_hat)) if t != 0 else 0.0
    return KappaWitness(v=v_best, a=a_hat, value=value, residual=residual)


def _optimize_over_rank_ones(W, objective, objective_many, maximize, n_starts, seed, directions=None):
    zero = KappaWitness(v=np.zeros(W.m), a=np.zeros(W.ell), value=objective(np.zeros(W.m)), residual=0.0)
    if W.dim == 0:
        return zero
    if directions is None:
        directions = rank_one_directions(W, n_starts=n_starts, seed=seed)
    best = zero
    better = (lambda x, y: x > y) if maximize else (lambda x, y: x < y)
    ray_optima = []
    for u, a in directions:
        value, t = _optimize_ray(u, objective, objective_many, maximize)
        witness = KappaWitness(v=t * u, a=a, value=value,
                               residual=W.distance(np.outer(t * u, a)) if t else 0.0)
        ray_optima.append(witness)
        if witness.residual <= WITNESS_DISTANCE_TOL and better(witness.value, best.value):
            best = witness
    if W.dim >= 2:
        # The rank-one slice of W may be curved; explore it from the ray optima.
        for witness in sorted(ray_optima, key=lambda w: w.value, reverse=maximize)[:4]:
            a0 = witness.a if np.linalg.norm(witness.a) else np.eye(W.ell)[0]
            out = _joint_polish(W, witness.v, a0, objective, maximize)
            if out is None:
                continue
            snapped = _snap_to_feasible_ray(W, out[0], out[1], objective, objective_many, maximize)
            if snapped is not None and better(snapped.value, best.value):
                best = snapped
    return best


def kappa_of(W: SubspaceW, theta: float, n_starts: int = 32, seed: int = 0, directions=None) -> KappaWitness:
    """kappa(theta): supremum of kappa_v over the feasible rank-one slice of W.

    v = 0 is always feasible, so the value is >= 0.  The returned witness has
    an exactly feasible rank-one (residual <= 1e-10).
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    return _optimize_over_rank_ones(
        W,
        lambda v: kappa_v(v, theta),
        lambda V: kappa_v_many(V, theta),
        maximize=True,
        n_starts=n_starts,
        seed=seed,
        directions=directions,
    )


def kappa_prime_one(W: SubspaceW, n_starts: int = 32, seed: int = 0, directions=None) -> KappaWitness:
    """kappa'(1): infimum of the negative-entropy functional; value in [-log m, 0]."""
    return _optimize_over_rank_ones(
        W, entropy_v, entropy_v_many, maximize=False, n_starts=n_starts, seed=seed, directions=directions
    )


def dimension_bound(W: SubspaceW, n_starts: int = 32, seed: int = 0) -> float:
    """1 + kappa'(1)/log m, the lower Hausdorff dimension bound; in [0, 1]."""
    kp = kappa_prime_one(W, n_starts=n_starts, seed=seed)
    return float(np.clip(1.0 + kp.value / np.log(W.m), 0.0, 1.0))


def strict_gap_check(W: SubspaceW, p: float, n_starts: int = 32, seed: int = 0) -> tuple[bool, float]:
    """Whether kappa(1/p) sits strictly below ((p-1)/p) log m, with the margin.

    Numerically equivalent to the second structural condition.
    """
    if p != np.inf and p <= 1:
        raise ValueError(f"p must exceed 1 (or be inf), got {p}")
    theta = 0.0 if p == np.inf else 1.0 / p
    bound = kappa_upper_bound(theta, W.m)
    witness = kappa_of(W, theta, n_starts=n_starts, seed=seed)
    margin = bound - witness.value
    return bool(margin > OPTIMIZER_TOL), float(margin)


def ray_grid_oracle(u: np.ndarray, objective_many, maximize: bool, resolution: int = 100_000) -> float:
    """Dense-grid optimum over one feasible ray; brute-force reference."""
    t_lo, t_hi = feasible_interval(u)
    ts = np.linspace(t_lo, t_hi, resolution)
    vals = objective_many(ts[:, None] * np.asarray(u, dtype=float)[None, :])
    return float(vals.max() if maximize else vals.min())


def kappa_profile(W: SubspaceW, grid_size: int = 21, n_starts: int = 32, seed: int = 0) -> KappaProfile:
    """kappa on a theta grid plus kappa'(1), with grid oracles when dim W = 1."""
    thetas = np.linspace(0.0, 1.0, grid_size)
    directions = rank_one_directions(W, n_starts=n_starts, seed=seed)
    witnesses = [kappa_of(W, float(t), directions=directions) for t in thetas]
    values = np.array([w.value for w in witnesses])
    prime = kappa_prime_one(W, directions=directions)
    oracle = None
    if W.dim == 1 and directions:
        u, _ = directions[0]
        oracle = np.array(
            [ray_grid_oracle(u, lambda V, t=float(t): kappa_v_many(V, t), True, resolution=20_001) for t in thetas]
        )
        oracle = np.maximum(oracle, 0.0)
    return KappaProfile(
        theta_grid=thetas,
        values=values,
        witnesses=witnesses,
        kappa_prime_one=prime.value,
        prime_witness=prime,
        dimension_bound=float(np.clip(1.0 + prime.value / np.log(W.m), 0.0, 1.0)),
        oracle_values=oracle,
    )
