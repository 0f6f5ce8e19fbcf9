"""Finite probability spaces, product spaces and distributions.

Everything here is immutable once built. Atomless spaces are approximated by
uniform refinement (:func:`refine`); the largest cell weight of a space is its
*atomicity level* and is what the audits report.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

WEIGHT_TOL = 1e-12


class MeasureError(ValueError):
    """Raised when a space, distribution or map violates its invariants."""


def _check_weights(weights: Sequence[float], what: str) -> None:
    if any(not math.isfinite(w) or w < -WEIGHT_TOL for w in weights):
        raise MeasureError(f"{what}: weights must be finite and nonnegative")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise MeasureError(f"{what}: weights sum to {total!r}, expected 1")


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a finite ordered support."""

    support: tuple
    mass: tuple

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "mass", tuple(float(m) for m in self.mass))
        if len(self.support) != len(self.mass):
            raise MeasureError("support and mass differ in length")
        if len(set(self.support)) != len(self.support):
            raise MeasureError("duplicate support points")
        _check_weights(self.mass, "distribution")

    def __getitem__(self, y) -> float:
        try:
            return self.mass[self.support.index(y)]
        except ValueError:
            raise KeyError(y) from None

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.mass))

    @classmethod
    def point(cls, support: Sequence, y) -> "Distribution":
        support = tuple(support)
        return cls(support, [1.0 if s == y else 0.0 for s in support])

    @classmethod
    def from_dict(cls, support: Sequence, mass: Mapping) -> "Distribution":
        support = tuple(support)
        unknown = set(mass) - set(support)
        if unknown:
            raise MeasureError(f"mass on points outside support: {sorted(map(str, unknown))}")
        return cls(support, [float(mass.get(y, 0.0)) for y in support])


@dataclass(frozen=True)
class FiniteProbSpace:
    """Atoms with weights and a partition of the atoms into measurable cells.

    ``cells`` defaults to the finest partition, in which case each cell is
    named after its atom.
    """

    atoms: tuple
    weights: tuple
    cells: tuple = None
    cell_ids: tuple = None
    _cell_index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple(self.atoms)
        weights = tuple(float(w) for w in self.weights)
        if len(atoms) != len(weights):
            raise MeasureError("atoms and weights differ in length")
        if len(set(atoms)) != len(atoms):
            raise MeasureError("atom identifiers must be unique")
        if not atoms:
            raise MeasureError("a probability space needs at least one atom")
        _check_weights(weights, "space")
        if self.cells is None:
            cells = tuple((a,) for a in atoms)
            cell_ids = tuple(str(a) for a in atoms) if self.cell_ids is None else tuple(self.cell_ids)
        else:
            cells = tuple(tuple(c) for c in self.cells)
            cell_ids = (tuple(f"c{k}" for k in range(len(cells)))
                        if self.cell_ids is None else tuple(self.cell_ids))
        if len(cell_ids) != len(cells) or len(set(cell_ids)) != len(cell_ids):
            raise MeasureError("cell ids must be unique, one per cell")
        index = {}
        for k, cell in enumerate(cells):
            if not cell:
                raise MeasureError("empty sigma cell")
            for a in cell:
                if a in index:
                    raise MeasureError(f"atom {a!r} lies in two cells")
                index[a] = k
        if set(index) != set(atoms):
            raise MeasureError("cells must cover exactly the atoms")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "cell_ids", cell_ids)
        object.__setattr__(self, "_cell_index", index)

    @classmethod
    def uniform(cls, atoms: Sequence, cells=None, cell_ids=None) -> "FiniteProbSpace":
        atoms = tuple(atoms)
        return cls(atoms, [1.0 / len(atoms)] * len(atoms), cells, cell_ids)

    def weight(self, atom) -> float:
        return self.weights[self.atoms.index(atom)]

    def cell_of(self, atom) -> int:
        return self._cell_index[atom]

    def cell_id_of(self, atom) -> str:
        return self.cell_ids[self._cell_index[atom]]

    @property
    def cell_weights(self) -> tuple:
        w = dict(zip(self.atoms, self.weights))
        return tuple(math.fsum(w[a] for a in cell) for cell in self.cells)

    @property
    def is_finest(self) -> bool:
        return all(len(c) == 1 for c in self.cells)

    def atomicity_level(self) -> float:
        """Largest weight of a measurable cell; zero would mean atomless."""
        return max(self.cell_weights)


@dataclass(frozen=True)
class ProductSpace:
    """A joint measure over the full Cartesian product of factor atom sets.

    The joint need not be a product measure. Atoms missing from ``weights``
    carry weight zero.
    """

    factors: tuple
    joint: FiniteProbSpace

    @classmethod
    def from_weights(cls, factors: Sequence[Sequence], weights: Mapping) -> "ProductSpace":
        factors = tuple(tuple(f) for f in factors)
        grid = list(itertools.product(*factors))
        known = set(grid)
        for omega in weights:
            if tuple(omega) not in known:
                raise MeasureError(f"joint atom {omega!r} outside the factor product")
        w = {tuple(k): float(v) for k, v in weights.items()}
        return cls(factors, FiniteProbSpace(grid, [w.get(o, 0.0) for o in grid]))

    @classmethod
    def product(cls, spaces: Sequence[FiniteProbSpace]) -> "ProductSpace":
        """Independent product of the given spaces."""
        factors = tuple(s.atoms for s in spaces)
        weights = {}
        for combo in itertools.product(*(zip(s.atoms, s.weights) for s in spaces)):
            weights[tuple(a for a, _ in combo)] = math.prod(w for _, w in combo)
        return cls.from_weights(factors, weights)

    def __post_init__(self):
        factors = tuple(tuple(f) for f in self.factors)
        object.__setattr__(self, "factors", factors)
        if set(self.joint.atoms) != set(itertools.product(*factors)):
            raise MeasureError("joint atoms must be the full product of factor atoms")

    @property
    def n_coords(self) -> int:
        return len(self.factors)

    def items(self) -> Iterable[tuple]:
        """(omega, weight) pairs with positive weight."""
        return ((o, w) for o, w in zip(self.joint.atoms, self.joint.weights) if w > 0.0)

    def marginal_weights(self, coords: Sequence[int]) -> dict:
        coords = tuple(coords)
        for c in coords:
            if not 0 <= c < self.n_coords:
                raise MeasureError(f"coordinate {c} out of range")
        acc: dict = {key: [] for key in itertools.product(*(self.factors[c] for c in coords))}
        for omega, w in zip(self.joint.atoms, self.joint.weights):
            acc[tuple(omega[c] for c in coords)].append(w)
        return {k: math.fsum(v) for k, v in acc.items()}


def coordinate_projection(omega: Sequence, i: int, shock: bool | None = None):
    """Return player ``i``'s coordinate of a joint atom (players count from 0).

    With ``shock=None`` the atom is read as one coordinate per player. With
    ``shock`` set, the atom is read as ``(z_0, x_0, z_1, x_1, ...)`` and the
    type (``shock=False``) or payoff shock (``shock=True``) is returned.
    """
    omega = tuple(omega)
    if shock is None:
        if not 0 <= i < len(omega):
            raise IndexError(f"player {i} out of range for atom of length {len(omega)}")
        return omega[i]
    if len(omega) % 2:
        raise MeasureError("type/shock atoms must have even length")
    if not 0 <= i < len(omega) // 2:
        raise IndexError(f"player {i} out of range")
    return omega[2 * i + (1 if shock else 0)]


def pushforward(space: FiniteProbSpace, f: Callable | Mapping, support: Sequence | None = None) -> Distribution:
    """Image measure of ``space`` under ``f``.

    ``support`` fixes the ordered target set; by default it is the image in
    order of first appearance.
    """
    get = f.__getitem__ if isinstance(f, Mapping) else f
    mass: dict = {}
    for a, w in zip(space.atoms, space.weights):
        try:
            y = get(a)
        except KeyError:
            raise MeasureError(f"map undefined on atom {a!r}") from None
        mass.setdefault(y, []).append(w)
    if support is None:
        support = tuple(mass)
    elif set(mass) - set(support):
        raise MeasureError("map takes values outside the declared support")
    return Distribution(support, [math.fsum(mass.get(y, [0.0])) for y in support])


def marginal(p: ProductSpace, i: int) -> Distribution:
    w = p.marginal_weights((i,))
    return Distribution(p.factors[i], [w[(a,)] for a in p.factors[i]])


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    tv_deviation: float
    max_atom_deviation: float


def independence_deviation(p: ProductSpace, grouping: Sequence[Sequence[int]], tol: float = WEIGHT_TOL) -> IndependenceReport:
    """Compare the joint law of the grouped coordinates with the product of
    the group laws.

    Groups must be nonempty and disjoint; coordinates left out of every group
    are integrated away. Two gaps are reported: total variation and the largest
    single-atom discrepancy. The verdict uses total variation.
    """
    groups = [tuple(g) for g in grouping]
    flat = [c for g in groups for c in g]
    if not groups or any(not g for g in groups) or len(set(flat)) != len(flat):
        raise MeasureError("grouping must consist of nonempty disjoint index sets")
    if any(not 0 <= c < p.n_coords for c in flat):
        raise MeasureError("grouping refers to a coordinate out of range")
    joint = p.marginal_weights(flat)
    group_laws = [p.marginal_weights(g) for g in groups]
    diffs = []
    for key, w in joint.items():
        parts, pos = [], 0
        for g in groups:
            parts.append(key[pos:pos + len(g)])
            pos += len(g)
        q = math.prod(law[part] for law, part in zip(group_laws, parts))
        diffs.append(abs(w - q))
    tv = 0.5 * math.fsum(diffs)
    return IndependenceReport(tv <= tol, tv, max(diffs))


def is_mutually_independent(p: ProductSpace, grouping: Sequence[Sequence[int]], tol: float = WEIGHT_TOL) -> bool:
    return independence_deviation(p, grouping, tol).independent


def refine(space: FiniteProbSpace, k: int) -> FiniteProbSpace:
    """Split every atom into ``k`` equal sub-atoms.

    Cell ``C`` becomes ``k`` cells ``C#0 .. C#k-1``, the ``j``-th one holding
    the ``j``-th sub-atom of each atom of ``C``. The new partition refines the
    old one, so anything measurable before stays measurable, while each cell
    weight drops by a factor ``k``.
    """
    if not isinstance(k, int) or k < 1:
        raise MeasureError("refinement factor must be a positive integer")
    if k == 1:
        return space
    atoms, weights = [], []
    for a, w in zip(space.atoms, space.weights):
        for j in range(k):
            atoms.append(f"{a}#{j}")
            weights.append(w / k)
    cells, ids = [], []
    for cid, cell in zip(space.cell_ids, space.cells):
        for j in range(k):
            cells.append(tuple(f"{a}#{j}" for a in cell))
            ids.append(f"{cid}#{j}")
    return FiniteProbSpace(atoms, weights, cells, ids)


def tv_distance(p: Distribution, q: Distribution) -> float:
    if p.support != q.support:
        if set(p.support) != set(q.support):
            raise MeasureError("distributions have different supports")
        q = Distribution(p.support, [q[y] for y in p.support])
    return 0.5 * math.fsum(abs(a - b) for a, b in zip(p.mass, q.mass))
