"""On-disk formats: tree measures, martingales, subspaces, fiber families.

Everything is JSON with an explicit ``kind`` tag and the (m, depth/ell)
header, floats written through Python's shortest-roundtrip repr (at most 17
significant digits, bit-exact on reload).  Complex fiber entries are stored
as [re, im] pairs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .filtration import FiltrationSpec, Martingale, TreeMeasure
from .groupfourier import FiberFamily, FiniteAbelianGroup
from .spacew import SubspaceW


def _dump(path, document):
    Path(path).write_text(json.dumps(document, indent=1) + "\n")


def _load(path, expected_kind):
    doc = json.loads(Path(path).read_text())
    if doc.get("kind") != expected_kind:
        raise ValueError(f"{path}: expected kind {expected_kind!r}, got {doc.get('kind')!r}")
    return doc


def write_measure(path, mu: TreeMeasure) -> None:
    _dump(
        path,
        {
            "kind": "tree-measure",
            "m": mu.spec.m,
            "depth": mu.spec.depth,
            "ell": mu.spec.ell,
            "scalar": mu.is_scalar,
            "leaf_mass": mu.leaf_mass.tolist(),
        },
    )


def read_measure(path) -> TreeMeasure:
    doc = _load(path, "tree-measure")
    spec = FiltrationSpec(doc["m"], doc["depth"], doc["ell"])
    return TreeMeasure(spec, np.asarray(doc["leaf_mass"], dtype=float))


def write_martingale(path, F: Martingale) -> None:
    blocks = []
    for n, level in enumerate(F.diffs):
        for i, block in enumerate(level):
            if np.any(block != 0):
                blocks.append({"level": n, "atom": i, "values": block.tolist()})
    _dump(
        path,
        {
            "kind": "martingale",
            "m": F.spec.m,
            "depth": F.spec.depth,
            "ell": F.spec.ell,
            "f0": F.f0.tolist(),
            "blocks": blocks,
        },
    )


def read_martingale(path) -> Martingale:
    doc = _load(path, "martingale")
    spec = FiltrationSpec(doc["m"], doc["depth"], doc["ell"])
    F = Martingale.zero(spec)
    diffs = [d.copy() for d in F.diffs]
    for row in doc["blocks"]:
        diffs[row["level"]][row["atom"]] = np.asarray(row["values"], dtype=float)
    return Martingale(spec, np.asarray(doc["f0"], dtype=float), diffs)


def write_subspace(path, W: SubspaceW) -> None:
    _dump(
        path,
        {
            "kind": "subspace-w",
            "m": W.m,
            "ell": W.ell,
            "k": W.dim,
            "basis": W.basis.tolist(),
        },
    )


def read_subspace(path) -> SubspaceW:
    doc = _load(path, "subspace-w")
    basis = np.asarray(doc["basis"], dtype=float).reshape(doc["k"], doc["m"], doc["ell"])
    return SubspaceW(doc["m"], doc["ell"], basis)


def write_fibers(path, fibers: FiberFamily) -> None:
    packed = {}
    for gamma, basis in fibers.fibers.items():
        packed[str(gamma)] = np.stack([basis.real, basis.imag], axis=-1).tolist()
    _dump(
        path,
        {
            "kind": "fiber-family",
            "factors": list(fibers.group.factors),
            "ell": fibers.ell,
            "fibers": packed,
        },
    )


def read_fibers(path) -> FiberFamily:
    doc = _load(path, "fiber-family")
    group = FiniteAbelianGroup(tuple(doc["factors"]))
    fibers = {}
    for key, rows in doc["fibers"].items():
        arr = np.asarray(rows, dtype=float)
        if arr.size == 0:
            fibers[int(key)] = np.zeros((0, doc["ell"]), dtype=complex)
        else:
            fibers[int(key)] = arr[..., 0] + 1j * arr[..., 1]
    return FiberFamily(group=group, ell=doc["ell"], fibers=fibers)
