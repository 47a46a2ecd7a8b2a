"""m-adic tree probability space: atoms, tree measures, adapted martingales.

The ambient space is the boundary of a rooted m-ary tree truncated at depth N.
Atoms at level n are cylinders of mass m^{-n}.  The atom with index i at level
n has children with indices m*i + j, j in [0, m), at level n + 1; this fixed
child ordering is the global identification between difference blocks and
m-tuples used throughout the package.  All martingale data is stored as
level-ordered contiguous arrays, so everything here is plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Cap on the leaf count; the storage grows like m^N and is inherently
# exponential, so we refuse absurd depths instead of thrashing.
MAX_LEAVES = 2_000_000

# Tolerance for the zero-sum constraint of difference blocks, relative to the
# largest entry of the block array.
BLOCK_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FiltrationSpec:
    """Branching factor, depth and value dimension of the tree model."""

    m: int
    depth: int
    ell: int = 1

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"branching factor must be >= 3, got {self.m}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.ell < 1:
            raise ValueError(f"value dimension must be >= 1, got {self.ell}")
        if self.m**self.depth > MAX_LEAVES:
            raise ValueError(
                f"m^depth = {self.m}^{self.depth} exceeds the cap of {MAX_LEAVES} leaves"
            )

    def atoms_at(self, level: int) -> int:
        if not 0 <= level <= self.depth:
            raise ValueError(f"level {level} outside [0, {self.depth}]")
        return self.m**level

    @property
    def leaves(self) -> int:
        return self.m**self.depth

    def truncated(self, depth: int) -> "FiltrationSpec":
        return FiltrationSpec(self.m, depth, self.ell)


@dataclass(frozen=True)
class AtomId:
    """Address of one atom: its level and its index in [0, m^level)."""

    level: int
    index: int

    def parent(self, m: int) -> "AtomId":
        if self.level == 0:
            raise ValueError("the root atom has no parent")
        return AtomId(self.level - 1, self.index // m)

    def digits(self, m: int) -> tuple[int, ...]:
        """Base-m expansion of the index, most significant digit first."""
        return atom_digits(self.index, m, self.level)

    def children(self, m: int) -> list["AtomId"]:
        return [AtomId(self.level + 1, m * self.index + j) for j in range(m)]


def atom_digits(index: int, m: int, level: int) -> tuple[int, ...]:
    digits = []
    for _ in range(level):
        digits.append(index % m)
        index //= m
    return tuple(reversed(digits))


def tree_distance(spec: FiltrationSpec, a: AtomId, b: AtomId) -> float:
    """m^{-k} where k is the length of the common digit prefix; 0 if equal."""
    if a.level != spec.depth or b.level != spec.depth:
        raise ValueError("tree_distance expects two leaves at the full depth")
    if a.index == b.index:
        return 0.0
    da, db = a.digits(spec.m), b.digits(spec.m)
    k = 0
    while da[k] == db[k]:
        k += 1
    return float(spec.m) ** (-k)


class Martingale:
    """An R^ell-valued martingale stored as F_0 plus per-atom difference blocks.

    ``diffs[n]`` has shape (m^n, m, ell); row block ``diffs[n][i]`` holds the
    values of f_{n+1} on the children of atom i at level n and sums to zero
    along its first axis (each block lies in V^ell).
    """

    def __init__(self, spec: FiltrationSpec, f0: np.ndarray, diffs: list[np.ndarray], *, validate: bool = True):
        self.spec = spec
        self.f0 = np.asarray(f0, dtype=float).reshape(spec.ell)
        self.diffs = [np.asarray(d, dtype=float) for d in diffs]
        if validate:
            self._validate()

    def _validate(self):
        m, N, ell = self.spec.m, self.spec.depth, self.spec.ell
        if len(self.diffs) != N:
            raise ValueError(f"expected {N} difference levels, got {len(self.diffs)}")
        for n, block in enumerate(self.diffs):
            if block.shape != (m**n, m, ell):
                raise ValueError(
                    f"diffs[{n}] has shape {block.shape}, expected {(m ** n, m, ell)}"
                )
            scale = max(1.0, float(np.max(np.abs(block))) if block.size else 1.0)
            worst = float(np.max(np.abs(block.sum(axis=1)))) if block.size else 0.0
            if worst > BLOCK_SUM_TOL * scale:
                raise ValueError(
                    f"diffs[{n}] blocks do not sum to zero (residual {worst:.3e})"
                )

    @classmethod
    def zero(cls, spec: FiltrationSpec) -> "Martingale":
        diffs = [np.zeros((spec.m**n, spec.m, spec.ell)) for n in range(spec.depth)]
        return cls(spec, np.zeros(spec.ell), diffs, validate=False)

    def copy(self) -> "Martingale":
        return Martingale(self.spec, self.f0.copy(), [d.copy() for d in self.diffs], validate=False)

    def scaled(self, factors) -> "Martingale":
        """New martingale with diffs[n] multiplied by factors[n]; F_0 unchanged."""
        factors = np.asarray(factors, dtype=float)
        if factors.shape != (self.spec.depth,):
            raise ValueError("need one factor per difference level")
        diffs = [f * d for f, d in zip(factors, self.diffs)]
        return Martingale(self.spec, self.f0.copy(), diffs, validate=False)

    def __add__(self, other: "Martingale") -> "Martingale":
        if other.spec != self.spec:
            raise ValueError("cannot add martingales over different filtrations")
        diffs = [a + b for a, b in zip(self.diffs, other.diffs)]
        return Martingale(self.spec, self.f0 + other.f0, diffs, validate=False)

    def truncated(self, depth: int) -> "Martingale":
        """Restriction to the first ``depth`` levels (stopped martingale)."""
        spec = self.spec.truncated(depth)
        return Martingale(spec, self.f0.copy(), [d.copy() for d in self.diffs[:depth]], validate=False)

    def difference_values(self, n: int) -> np.ndarray:
        """Values of f_n as an array over level-n atoms; f_0 is the constant F_0."""
        if n == 0:
            return self.f0.reshape(1, self.spec.ell)
        return self.diffs[n - 1].reshape(self.spec.m**n, self.spec.ell)


def evaluate(F: Martingale, n: int) -> np.ndarray:
    """Values of F_n on the level-n atoms, shape (m^n, ell)."""
    if not 0 <= n <= F.spec.depth:
        raise ValueError(f"level {n} outside [0, {F.spec.depth}]")
    values = F.f0.reshape(1, F.spec.ell)
    for k in range(n):
        values = np.repeat(values, F.spec.m, axis=0) + F.difference_values(k + 1)
    return values


def evaluate_all(F: Martingale) -> list[np.ndarray]:
    """Values of F_0, ..., F_N in one prefix sweep."""
    out = [F.f0.reshape(1, F.spec.ell)]
    for k in range(F.spec.depth):
        out.append(np.repeat(out[-1], F.spec.m, axis=0) + F.difference_values(k + 1))
    return out


@dataclass
class TreeMeasure:
    """A measure on the tree boundary stored by its leaf masses.

    ``leaf_mass`` has shape (m^N,) for scalar measures or (m^N, ell) for
    vector ones.  Masses of coarser atoms are obtained by aggregation, so
    additivity holds by construction.
    """

    spec: FiltrationSpec
    leaf_mass: np.ndarray

    def __post_init__(self):
        self.leaf_mass = np.asarray(self.leaf_mass, dtype=float)
        n_leaves = self.spec.leaves
        if self.leaf_mass.shape not in ((n_leaves,), (n_leaves, self.spec.ell)):
            raise ValueError(
                f"leaf_mass shape {self.leaf_mass.shape} does not match {n_leaves} leaves"
            )

    @property
    def is_scalar(self) -> bool:
        return self.leaf_mass.ndim == 1

    def level_mass(self, n: int) -> np.ndarray:
        """Masses of the level-n atoms (children sums of the leaf masses)."""
        if not 0 <= n <= self.spec.depth:
            raise ValueError(f"level {n} outside [0, {self.spec.depth}]")
        mass = self.leaf_mass
        block = self.spec.m ** (self.spec.depth - n)
        if self.is_scalar:
            return mass.reshape(self.spec.m**n, block).sum(axis=1)
        return mass.reshape(self.spec.m**n, block, self.spec.ell).sum(axis=1)

    def total(self) -> np.ndarray | float:
        t = self.leaf_mass.sum(axis=0)
        return float(t) if self.is_scalar else t

    def is_probability(self, tol: float = 1e-9) -> bool:
        if not self.is_scalar:
            return False
        return bool(np.all(self.leaf_mass >= -tol) and abs(self.leaf_mass.sum() - 1.0) <= tol)

    def truncated(self, depth: int) -> "TreeMeasure":
        spec = self.spec.truncated(depth)
        return TreeMeasure(spec, self.level_mass(depth))


def measure_to_martingale(mu: TreeMeasure) -> Martingale:
    """Martingale of conditional densities: F_n on an atom is mu(atom) * m^n.

    The density normalization makes the L_1 martingale norm equal to the total
    variation of mu, and E F_n chi_atom = mu(atom) for every atom.
    """
    spec = mu.spec
    ell = spec.ell
    if mu.is_scalar and ell != 1:
        raise ValueError("scalar measure over a vector-valued filtration spec")
    masses = [mu.level_mass(n) for n in range(spec.depth + 1)]
    dens = []
    for n, mass in enumerate(masses):
        d = mass * float(spec.m) ** n
        dens.append(d[:, None] if mu.is_scalar else d.reshape(spec.m**n, ell))
    diffs = []
    for n in range(spec.depth):
        child = dens[n + 1].reshape(spec.m**n, spec.m, ell)
        diffs.append(child - dens[n][:, None, :])
    return Martingale(spec, dens[0][0], diffs)


def martingale_to_measure(F: Martingale) -> TreeMeasure:
    """Inverse of measure_to_martingale: leaf mass is m^{-N} F_N."""
    values = evaluate(F, F.spec.depth)
    mass = values / float(F.spec.m) ** F.spec.depth
    if F.spec.ell == 1:
        mass = mass[:, 0]
    return TreeMeasure(F.spec, mass)


def multiplicative_martingale(spec: FiltrationSpec, v: np.ndarray) -> Martingale:
    """The product martingale G_n = prod_{i <= n} (1 + h_i) with h_i = J[v].

    v must lie in V (zero sum) with v_j >= -1; G is then the density martingale
    of the multiplicative measure with branch weights (1 + v_j)/m.  Scalar
    (ell = 1) by construction.
    """
    v = np.asarray(v, dtype=float).reshape(spec.m)
    if abs(v.sum()) > 1e-9 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("v must have zero coordinate sum")
    if np.any(v < -1 - 1e-12):
        raise ValueError("v must satisfy v_j >= -1")
    if spec.ell != 1:
        raise ValueError("multiplicative martingales are scalar; lift afterwards")
    factors = 1.0 + v
    values = np.ones(1)
    diffs = []
    for n in range(spec.depth):
        diffs.append((values[:, None] * v)[:, :, None])
        values = (values[:, None] * factors).reshape(-1)
    return Martingale(spec, np.ones(1), diffs, validate=False)


def sample_paths(mu: TreeMeasure, n_samples: int, seed) -> np.ndarray:
    """Leaf indices drawn with probability proportional to their mass.

    Deterministic given the seed.  Raises on negative masses or zero total.
    """
    if not mu.is_scalar:
        raise ValueError("sampling requires a scalar measure")
    mass = mu.leaf_mass
    if np.any(mass < 0):
        raise ValueError("sampling requires nonnegative masses")
    total = float(mass.sum())
    if total <= 0:
        raise ValueError("sampling requires positive total mass")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(mass)
    u = rng.random(n_samples) * total
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, mu.spec.leaves - 1)


def sample_path(mu: TreeMeasure, seed) -> AtomId:
    """One leaf drawn with probability equal to its mass."""
    return AtomId(mu.spec.depth, int(sample_paths(mu, 1, seed)[0]))


def leaf_digit_matrix(indices: np.ndarray, m: int, depth: int) -> np.ndarray:
    """Base-m digits (most significant first) of many leaf indices at once."""
    indices = np.asarray(indices, dtype=np.int64)
    out = np.empty((indices.size, depth), dtype=np.int64)
    rem = indices.copy()
    for pos in range(depth - 1, -1, -1):
        out[:, pos] = rem % m
        rem //= m
    return out
