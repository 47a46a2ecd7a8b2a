"""Exact norms of simple tree functions: L_p, weak L_p, Lorentz L_{p,1}, Besov, H_1.

All functions here are simple (constant on the atoms of one level), so every
norm reduces to a finite sum over the distinct values of the pointwise
Euclidean magnitude.  The Lorentz norm is fixed as

    ||g||_{p,1} = p * int_0^inf mu{ |g| > s }^{1/p} ds
               = int_0^1 t^{1/p - 1} g*(t) dt,

which is exact on simple functions and, for p > 1, a genuine norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filtration import FiltrationSpec, Martingale, TreeMeasure, evaluate, evaluate_all


@dataclass
class SimpleFunction:
    """A function constant on the atoms of one level; values is (m^level, ell)."""

    spec: FiltrationSpec
    level: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n_atoms = self.spec.atoms_at(self.level)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape != (n_atoms, self.spec.ell):
            raise ValueError(
                f"values shape {self.values.shape} does not match {(n_atoms, self.spec.ell)}"
            )

    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    @property
    def atom_weight(self) -> float:
        return float(self.spec.m) ** (-self.level)


def martingale_level(F: Martingale, n: int) -> SimpleFunction:
    """F_n as a simple function."""
    return SimpleFunction(F.spec, n, evaluate(F, n))


def martingale_difference(F: Martingale, n: int) -> SimpleFunction:
    """f_n as a simple function at level n (f_0 is the constant F_0)."""
    return SimpleFunction(F.spec, n, F.difference_values(n))


def lp_norm(g: SimpleFunction, p: float) -> float:
    """(sum_atoms m^{-n} |g|^p)^{1/p}; exact max for p = inf."""
    mags = g.magnitudes()
    if p == np.inf:
        return float(mags.max()) if mags.size else 0.0
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float((g.atom_weight * np.sum(mags**p)) ** (1.0 / p))


def lp_norm_weighted(mags: np.ndarray, weights: np.ndarray, p: float) -> float:
    if p == np.inf:
        return float(np.max(mags[weights > 0])) if np.any(weights > 0) else 0.0
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.sum(weights * mags**p) ** (1.0 / p))


def lorentz_p1_from_distribution(mags: np.ndarray, weights: np.ndarray, p: float) -> float:
    """p * int mu{|g|>s}^{1/p} ds as a finite sum over the sorted values.

    ``mags``/``weights`` describe the distribution of |g|; atoms where g
    vanishes may be omitted since they never enter the layer-cake integral.
    """
    if p <= 1:
        raise ValueError(f"Lorentz L_(p,1) requires p > 1, got {p}")
    keep = mags > 0
    if not np.any(keep):
        return 0.0
    vals = mags[keep]
    wts = weights[keep] if weights.shape == mags.shape else np.full(vals.shape, float(weights))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    cum = np.cumsum(wts[order])
    drops = vals - np.append(vals[1:], 0.0)
    return float(p * np.sum(cum ** (1.0 / p) * drops))


def weak_lp_from_distribution(mags: np.ndarray, weights: np.ndarray, p: float) -> float:
    """sup_s s * mu{|g|>s}^{1/p}; the sup sits just below one of the values."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    keep = mags > 0
    if not np.any(keep):
        return 0.0
    vals = mags[keep]
    wts = weights[keep] if weights.shape == mags.shape else np.full(vals.shape, float(weights))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    cum = np.cumsum(wts[order])
    return float(np.max(vals * cum ** (1.0 / p)))


def lorentz_p1_norm(g: SimpleFunction, p: float) -> float:
    mags = g.magnitudes()
    return lorentz_p1_from_distribution(mags, np.full(mags.shape, g.atom_weight), p)


def weak_lp_norm(g: SimpleFunction, p: float) -> float:
    mags = g.magnitudes()
    return weak_lp_from_distribution(mags, np.full(mags.shape, g.atom_weight), p)


def besov_norm(F: Martingale, beta: float, p: float) -> float:
    """sum_{n=0}^N m^{beta n} ||f_n||_{L_p}, with the convention f_0 = F_0."""
    if p != np.inf and p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    total = 0.0
    for n in range(F.spec.depth + 1):
        total += float(F.spec.m) ** (beta * n) * lp_norm(martingale_difference(F, n), p)
    return total


def h1_norm(F: Martingale) -> float:
    """E max_{0 <= n <= N} |F_n|, computed exactly over the leaves."""
    spec = F.spec
    levels = evaluate_all(F)
    running = np.linalg.norm(levels[0], axis=1)
    for n in range(1, spec.depth + 1):
        mags = np.linalg.norm(levels[n], axis=1)
        running = np.maximum(np.repeat(running, spec.m), mags)
    return float(running.mean())


def lp_nu_norm(g: SimpleFunction, nu: TreeMeasure, p: float) -> float:
    """(sum_atoms |g|^p nu(atom))^{1/p} with nu aggregated to g's level."""
    if not nu.is_scalar:
        raise ValueError("L_p(nu) norms require a scalar reference measure")
    if np.any(nu.leaf_mass < 0):
        raise ValueError("L_p(nu) norms require a nonnegative reference measure")
    if g.level > nu.spec.depth:
        raise ValueError("function level is finer than the reference measure")
    mass = nu.level_mass(g.level)
    mags = g.magnitudes()
    if p == np.inf:
        support = mass > 0
        return float(np.max(mags[support])) if np.any(support) else 0.0
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.sum(mass * mags**p) ** (1.0 / p))
