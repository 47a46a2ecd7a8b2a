"""Epsilon-convex/flat atom decomposition and the flat forest.

An atom omega at level n is eps-convex for F when

    E(|F_{n+1}| - |F_n|) chi_omega >= eps * E|F_n| chi_omega,

and eps-flat otherwise.  Atoms where F vanishes together with its children
(both sides zero) are labeled flat: the letter of the definition would make
them convex through 0 >= 0, but they carry no growth and would degenerate the
forest of the zero martingale.  Flat atoms connected by parent/child edges
form trees; each tree root's parent (if any) is convex.  Fruits of a tree are
the convex atoms hanging off it, and its leaf cylinders are the bottom-level
atoms below a flat parent, so every tree root is partitioned by its fruits
and leaves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .filtration import AtomId, Martingale, evaluate_all
from .norms import (
    lorentz_p1_from_distribution,
    lp_norm_weighted,
)


@dataclass
class FlatTree:
    root: AtomId
    members: dict[int, np.ndarray]        # level -> sorted atom indices
    fruits: list[AtomId] = field(default_factory=list)
    leaf_atoms: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))


@dataclass
class FlatForest:
    epsilon: float
    convex: list[np.ndarray]              # per level n < N, boolean mask
    trees: list[FlatTree]
    increments: list[np.ndarray]          # E(|F_{n+1}|-|F_n|) chi_omega per atom
    level_masses: list[np.ndarray]        # E|F_n| chi_omega per atom

    def n_convex(self) -> int:
        return int(sum(mask.sum() for mask in self.convex))


def classify_atoms(F: Martingale, epsilon: float) -> FlatForest:
    """Label every internal atom convex or flat and assemble the flat forest."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    spec = F.spec
    m = spec.m
    levels = evaluate_all(F)
    mags = [np.linalg.norm(v, axis=1) for v in levels]
    convex = []
    increments = []
    level_masses = []
    for n in range(spec.depth):
        weight = float(m) ** (-n)
        child_mean = mags[n + 1].reshape(-1, m).mean(axis=1)
        inc = weight * (child_mean - mags[n])
        base = weight * mags[n]
        is_convex = (inc >= epsilon * base) & (child_mean > 0)
        convex.append(is_convex)
        increments.append(inc)
        level_masses.append(base)

    # Sweep top-down: a flat atom joins its parent's tree when the parent is
    # flat, otherwise it roots a new tree.
    trees: list[FlatTree] = []
    tree_of: list[np.ndarray] = []
    for n in range(spec.depth):
        flat_idx = np.flatnonzero(~convex[n])
        ids = np.full(spec.atoms_at(n), -1, dtype=np.int64)
        for i in flat_idx:
            parent_tree = -1
            if n > 0:
                parent_tree = tree_of[n - 1][i // m]
            if parent_tree >= 0:
                ids[i] = parent_tree
                trees[parent_tree].members.setdefault(n, []).append(i)
            else:
                ids[i] = len(trees)
                trees.append(FlatTree(root=AtomId(n, int(i)), members={n: [i]}))
        tree_of.append(ids)

    for tree in trees:
        tree.members = {lvl: np.asarray(sorted(idx), dtype=np.int64) for lvl, idx in tree.members.items()}

    # Fruits: convex atoms whose parent is flat.  Leaves: bottom atoms whose
    # parent is flat.
    for n in range(1, spec.depth):
        conv_idx = np.flatnonzero(convex[n])
        for i in conv_idx:
            t = tree_of[n - 1][i // m]
            if t >= 0:
                trees[t].fruits.append(AtomId(n, int(i)))
    bottom_parent = tree_of[spec.depth - 1]
    leaf_indices = np.arange(spec.leaves)
    parent_tree = bottom_parent[leaf_indices // m]
    for t, tree in enumerate(trees):
        tree.leaf_atoms = leaf_indices[parent_tree == t]

    return FlatForest(
        epsilon=epsilon,
        convex=convex,
        trees=trees,
        increments=increments,
        level_masses=level_masses,
    )


def split_convex_flat(F: Martingale, forest: FlatForest) -> tuple[Martingale, Martingale]:
    """F = F_co + F_fl blockwise; the flat part carries F_0 (constants are flat)."""
    if len(forest.convex) != F.spec.depth:
        raise ValueError("forest does not match the martingale's depth")
    co_diffs, fl_diffs = [], []
    for n in range(F.spec.depth):
        mask = forest.convex[n][:, None, None]
        co_diffs.append(np.where(mask, F.diffs[n], 0.0))
        fl_diffs.append(np.where(mask, 0.0, F.diffs[n]))
    F_co = Martingale(F.spec, np.zeros(F.spec.ell), co_diffs, validate=False)
    F_fl = Martingale(F.spec, F.f0.copy(), fl_diffs, validate=False)
    return F_co, F_fl


@dataclass
class StepwiseReport:
    increment_sum: float        # sum of E(|F_{n+1}| - |F_n|)
    final_l1: float             # E|F_N|
    initial_l1: float           # E|F_0|
    min_atom_increment: float
    identity_gap: float         # increment_sum - (final_l1 - initial_l1)


def verify_stepwise_identity(F: Martingale) -> StepwiseReport:
    """Telescoping of the stepwise growth, with the F_0 convention exposed.

    The literal statement sum_n E(|F_{n+1}|-|F_n|) = ||F||_{L_1} only holds
    when F_0 = 0; the report carries E|F_0| so either convention can be read
    off.  Every atom increment is nonnegative because blocks sum to zero.
    """
    forest = classify_atoms(F, epsilon=1.0)  # labels unused; reuse the sums
    increment_sum = float(sum(inc.sum() for inc in forest.increments))
    levels = evaluate_all(F)
    final_l1 = float(np.linalg.norm(levels[-1], axis=1).mean())
    initial_l1 = float(np.linalg.norm(F.f0))
    min_atom = float(min(inc.min() for inc in forest.increments))
    return StepwiseReport(
        increment_sum=increment_sum,
        final_l1=final_l1,
        initial_l1=initial_l1,
        min_atom_increment=min_atom,
        identity_gap=increment_sum - (final_l1 - initial_l1),
    )


@dataclass
class ConvexLemmaReport:
    constant: float             # (eps + 2)/eps
    max_atom_ratio: float       # worst E|f_{n+1}|chi / (constant * increment)
    besov_co: float             # ||F_co||_{B_1^{0,1}}
    telescoped_bound: float     # constant * (E|F_N| - E|F_0|)
    holds: bool


def verify_convex_lemma(F: Martingale, forest: FlatForest) -> ConvexLemmaReport:
    """Per-atom bound E|f_{n+1}| chi <= ((eps+2)/eps) E(|F_{n+1}|-|F_n|) chi on
    convex atoms, and its Besov aggregate."""
    spec = F.spec
    m = spec.m
    constant = (forest.epsilon + 2.0) / forest.epsilon
    max_ratio = 0.0
    besov_co = 0.0
    for n in range(spec.depth):
        diff_mags = np.linalg.norm(F.diffs[n], axis=2)  # (atoms, m)
        atom_f_l1 = float(m) ** (-(n + 1)) * diff_mags.sum(axis=1)
        mask = forest.convex[n]
        besov_co += float(atom_f_l1[mask].sum())
        bound = constant * forest.increments[n][mask]
        vals = atom_f_l1[mask]
        positive = bound > 0
        if np.any(positive):
            max_ratio = max(max_ratio, float(np.max(vals[positive] / bound[positive])))
        if np.any(vals[~positive] > 1e-13):
            # convex atoms always have positive increment; flag if violated
            max_ratio = np.inf
    report = verify_stepwise_identity(F)
    telescoped = constant * (report.final_l1 - report.initial_l1)
    return ConvexLemmaReport(
        constant=constant,
        max_atom_ratio=max_ratio,
        besov_co=besov_co,
        telescoped_bound=telescoped,
        holds=bool(besov_co <= telescoped * (1 + 1e-12) + 1e-15 and max_ratio <= 1 + 1e-12),
    )


@dataclass
class TreeGrowthReport:
    alpha: float
    max_ratio: float
    per_tree: list[dict]


def verify_flat_tree_growth(
    F: Martingale, forest: FlatForest, p: float, kappa_at_inv_p: float, alpha_margin: float
) -> TreeGrowthReport:
    """Ratios of ||sum_{omega in T cap AF_n} F_{n+1} chi|| _{L_p} against the
    e^{alpha(n - n_0)} envelope from the tree root, alpha = kappa(1/p) + margin."""
    spec = F.spec
    m = spec.m
    alpha = kappa_at_inv_p + alpha_margin
    levels = evaluate_all(F)
    max_ratio = 0.0
    per_tree = []
    for tree in forest.trees:
        n0 = tree.root.level
        root_norm = float(m) ** (-n0 / p) * np.linalg.norm(levels[n0][tree.root.index])
        rows = []
        if root_norm == 0.0:
            per_tree.append({"root": tree.root, "ratios": rows, "degenerate": True})
            continue
        for n, members in sorted(tree.members.items()):
            child_idx = (members[:, None] * m + np.arange(m)[None, :]).ravel()
            mags = np.linalg.norm(levels[n + 1][child_idx], axis=1)
            lhs = lp_norm_weighted(mags, np.full(mags.shape, float(m) ** (-(n + 1))), p)
            ratio = lhs / (np.exp(alpha * (n - n0)) * root_norm)
            rows.append((n, float(ratio)))
            max_ratio = max(max_ratio, float(ratio))
        per_tree.append({"root": tree.root, "ratios": rows, "degenerate": False})
    return TreeGrowthReport(alpha=alpha, max_ratio=max_ratio, per_tree=per_tree)


@dataclass
class TreeSummationReport:
    p: float
    max_lorentz_ratio: float
    max_stopping_ratio: float
    per_tree: list[dict]


def verify_tree_summation(F: Martingale, forest: FlatForest, p: float) -> TreeSummationReport:
    """Per tree: the weighted Lorentz sum against E|F_{n_0}| chi_{omega_0}, and
    the stopping-time control ||F_T||_{L_1} <= C ||F||_{L_1}."""
    spec = F.spec
    m = spec.m
    levels = evaluate_all(F)
    total_l1 = float(np.linalg.norm(levels[-1], axis=1).mean())
    max_lorentz = 0.0
    max_stopping = 0.0
    per_tree = []
    for tree in forest.trees:
        n0 = tree.root.level
        root_mass = float(m) ** (-n0) * float(np.linalg.norm(levels[n0][tree.root.index]))
        lorentz_sum = 0.0
        # F_T at the bottom, accumulated only inside the root cylinder.
        span = m ** (spec.depth - n0)
        base = tree.root.index * span
        leaf_vals = np.zeros((span, spec.ell))
        for n, members in sorted(tree.members.items()):
            block = F.diffs[n][members].reshape(-1, spec.ell)
            mags = np.linalg.norm(block, axis=1)
            norm = lorentz_p1_from_distribution(
                mags, np.full(mags.shape, float(m) ** (-(n + 1))), p
            )
            lorentz_sum += float(m) ** (-(p - 1) / p * n) * norm
            rep = m ** (spec.depth - n - 1)
            child_idx = (members[:, None] * m + np.arange(m)[None, :]).ravel()
            offsets = child_idx * rep - base
            for off, val in zip(offsets, block):
                leaf_vals[off : off + rep] += val
        ft_l1 = float(m) ** (-spec.depth) * float(np.linalg.norm(leaf_vals, axis=1).sum())
        entry = {"root": tree.root, "lorentz_sum": lorentz_sum, "root_mass": root_mass, "ft_l1": ft_l1}
        if root_mass > 0:
            entry["lorentz_ratio"] = lorentz_sum / root_mass
            max_lorentz = max(max_lorentz, entry["lorentz_ratio"])
        elif lorentz_sum > 1e-13:
            entry["lorentz_ratio"] = np.inf
            max_lorentz = np.inf
        if total_l1 > 0:
            max_stopping = max(max_stopping, ft_l1 / total_l1)
        per_tree.append(entry)
    return TreeSummationReport(
        p=p,
        max_lorentz_ratio=max_lorentz,
        max_stopping_ratio=max_stopping,
        per_tree=per_tree,
    )
