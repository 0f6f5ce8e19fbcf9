"""Measurable selections and the distribution sets they generate.

Selections are *almost everywhere* objects by default (``ae=True``): only
cells of positive weight are constrained, and a null cell receives a fixed
default choice (its lowest-index admissible action, or the lowest-index
action overall when its value is empty). Such choices are listed in
``Selection.unconstrained``. Pass ``ae=False`` to constrain every cell.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .correspondence import Correspondence, CorrespondenceError, is_measurable
from .geometry import hausdorff_to_hull, hull_distance
from .measure import Distribution, FiniteProbSpace, pushforward, tv_distance

DEFAULT_BUDGET = 10**6
DEFAULT_SEED = 0
_KEY_DIGITS = 12


class SelectionError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """An exhaustive method was requested but its count exceeds the budget."""


@dataclass(frozen=True)
class Selection:
    source: FiniteProbSpace
    target: tuple
    choice: dict
    unconstrained: frozenset = frozenset()

    def __call__(self, atom):
        return self.choice[atom]

    def by_cell(self) -> dict:
        return {cid: self.choice[cell[0]] for cid, cell in zip(self.source.cell_ids, self.source.cells)}

    def distribution(self) -> Distribution:
        return pushforward(self.source, self.choice, self.target)

    def is_selection_of(self, F: Correspondence) -> bool:
        """Choice lies in ``F`` off the unconstrained atoms and is cell-constant."""
        ok_value = all(self.choice[a] in F(a) for a in self.source.atoms if a not in self.unconstrained)
        ok_cells = all(len({self.choice[a] for a in cell}) == 1 for cell in self.source.cells)
        return ok_value and ok_cells


@dataclass(frozen=True)
class DistributionSet:
    members: tuple
    exact: bool
    support: tuple

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def matrix(self) -> np.ndarray:
        return np.array([m.mass for m in self.members], dtype=float).reshape(len(self.members), len(self.support))

    def contains(self, dist: Distribution, tol: float = 1e-9) -> bool:
        return self.nearest(dist)[1] <= tol

    def nearest(self, dist: Distribution) -> tuple:
        """(member, tv distance) of the closest member; ties go to the earlier one."""
        if not self.members:
            raise SelectionError("empty distribution set")
        best, bd = None, math.inf
        for m in self.members:
            d = tv_distance(m, dist)
            if d < bd - 1e-15:
                best, bd = m, d
        return best, bd


def _cell_values(F: Correspondence, space: FiniteProbSpace) -> list:
    if set(F.domain) != set(space.atoms):
        raise SelectionError("correspondence domain must equal the space's atoms")
    out = []
    for cell in space.cells:
        vals = {F(a) for a in cell}
        if len(vals) != 1:
            raise SelectionError("correspondence is not measurable: not constant on a sigma cell")
        v = vals.pop()
        out.append([y for y in F.codomain if y in v])
    return out


def _check_measurable(F: Correspondence, space: FiniteProbSpace) -> list:
    probe = Correspondence(F.domain, F.codomain, F.values, sigma=space.cells)
    if not is_measurable(probe):
        raise SelectionError("correspondence is not measurable with respect to the space")
    return _cell_values(F, space)


def _null_default(values: list, codomain: tuple):
    return values[0] if values else codomain[0]


def _split(space: FiniteProbSpace, values: list, ae: bool):
    """Indices of constrained cells and default choices of the others."""
    weights = space.cell_weights
    live, fixed = [], {}
    for k, v in enumerate(values):
        if ae and weights[k] <= 0.0:
            fixed[k] = v
        else:
            live.append(k)
    return live, fixed


def _make(space, codomain, per_cell: dict, fixed: dict) -> Selection:
    choice, loose = {}, []
    for k, cell in enumerate(space.cells):
        if k in per_cell:
            y = per_cell[k]
        else:
            y = _null_default(fixed[k], codomain)
            loose.extend(cell)
        for a in cell:
            choice[a] = y
    return Selection(space, codomain, choice, frozenset(loose))


def selection_count(F: Correspondence, space: FiniteProbSpace, ae: bool = True) -> int:
    values = _check_measurable(F, space)
    live, _ = _split(space, values, ae)
    return math.prod(len(values[k]) for k in live)


def enumerate_selections(F: Correspondence, space: FiniteProbSpace, ae: bool = True) -> Iterator[Selection]:
    """All measurable selections, cells varying in lexicographic order with
    the last cell fastest and actions in codomain order."""
    values = _check_measurable(F, space)
    live, fixed = _split(space, values, ae)
    for combo in itertools.product(*(values[k] for k in live)):
        yield _make(space, F.codomain, dict(zip(live, combo)), fixed)


def greedy_selection(F: Correspondence, space: FiniteProbSpace, priority: Sequence, ae: bool = True) -> Selection | None:
    """Each cell takes the first admissible action in ``priority`` order."""
    values = _check_measurable(F, space)
    live, fixed = _split(space, values, ae)
    rank = {y: r for r, y in enumerate(priority)}
    per_cell = {}
    for k in live:
        if not values[k]:
            return None
        per_cell[k] = min(values[k], key=rank.__getitem__)
    return _make(space, F.codomain, per_cell, fixed)


def _extreme_orders(codomain: tuple, limit: int = 120) -> list:
    if math.factorial(len(codomain)) <= limit:
        return list(itertools.permutations(codomain))
    return [codomain[r:] + codomain[:r] for r in range(len(codomain))]


def _key(mass) -> tuple:
    return tuple(round(m, _KEY_DIGITS) + 0.0 for m in mass)


def _sorted_members(vectors: dict, support: tuple) -> tuple:
    keys = sorted(vectors, key=lambda k: tuple(-x for x in k))
    return tuple(Distribution(support, _normalise(vectors[k])) for k in keys)


def _normalise(v) -> list:
    v = [max(0.0, x) for x in v]
    s = math.fsum(v)
    return [x / s for x in v]


def distribution_set(F: Correspondence, space: FiniteProbSpace, budget: int = DEFAULT_BUDGET,
                     seed: int = DEFAULT_SEED, ae: bool = True, samples: int | None = None) -> DistributionSet:
    """Pushforwards of the measurable selections of ``F``.

    Exact when the number of selections is within ``budget``. The exact set is
    built cell by cell as a set of partial sums, which yields the same
    vectors as pushing every selection forward. Over budget, a seeded uniform
    sample of selections plus the greedy extreme selections is returned with
    ``exact=False``.
    """
    values = _check_measurable(F, space)
    live, _ = _split(space, values, ae)
    support = F.codomain
    idx = {y: j for j, y in enumerate(support)}
    cw = space.cell_weights
    if any(not values[k] for k in live):
        return DistributionSet((), True, support)
    count = math.prod(len(values[k]) for k in live)
    d = len(support)
    if count <= budget:
        partial = {_key([0.0] * d): [0.0] * d}
        for k in live:
            nxt = {}
            for vec in partial.values():
                for y in values[k]:
                    v = list(vec)
                    v[idx[y]] += cw[k]
                    nxt.setdefault(_key(v), v)
            partial = nxt
        if not live:
            partial = {}
            sel = _make(space, support, {}, dict(enumerate(values)))
            v = list(sel.distribution().mass)
            partial[_key(v)] = v
        return DistributionSet(_sorted_members(partial, support), True, support)

    rng = random.Random(seed)
    found = {}
    n_samples = samples if samples is not None else min(budget, 10_000)
    for order in _extreme_orders(support):
        g = greedy_selection(F, space, order, ae)
        v = list(g.distribution().mass)
        found.setdefault(_key(v), v)
    for _ in range(n_samples):
        v = [0.0] * d
        for k in live:
            v[idx[rng.choice(values[k])]] += cw[k]
        found.setdefault(_key(v), v)
    return DistributionSet(_sorted_members(found, support), False, support)


def _require_exact(D: DistributionSet) -> None:
    if not D.exact:
        raise SelectionError("operation needs an exhaustively enumerated distribution set")


def convexification_gap(D: DistributionSet) -> float:
    """Hausdorff tv distance between ``D`` and its convex hull."""
    _require_exact(D)
    if not D.members:
        raise SelectionError("empty distribution set has no hull")
    return hausdorff_to_hull(D.matrix())


def is_compact_closed(D: DistributionSet) -> bool:
    """Finite sets are compact; what can fail is nonemptiness."""
    _require_exact(D)
    return len(D.members) > 0


@dataclass(frozen=True)
class Purification:
    selection: Selection
    error: float
    bound: float
    method: str


def _uniform_weight(weights: list) -> float | None:
    pos = [w for w in weights if w > 0]
    if pos and max(pos) - min(pos) <= 1e-12:
        return pos[0]
    return None


def _match_counts(values: list, live: list, targets: list, support: tuple) -> dict | None:
    """Assign live cells to actions, action ``j`` receiving at most
    ``targets[j]`` cells (augmenting paths; the finite marriage lemma)."""
    cap = list(targets)
    owner: dict = {j: [] for j in range(len(support))}
    assigned = {}
    idx = {y: j for j, y in enumerate(support)}

    def augment(k, seen):
        for y in values[k]:
            j = idx[y]
            if j in seen:
                continue
            seen.add(j)
            if len(owner[j]) < cap[j]:
                owner[j].append(k)
                assigned[k] = j
                return True
            for other in list(owner[j]):
                if augment(other, seen):
                    owner[j].remove(other)
                    owner[j].append(k)
                    assigned[k] = j
                    return True
        return False

    for k in live:
        if not augment(k, set()):
            return None
    return {k: support[j] for k, j in assigned.items()}


def _flow_round(values, live, weight, target, support):
    """Best integer cell counts for a uniform space, by min-cost flow.

    Each action's cost is the convex function |count - n * target| split into
    unit increments, so a minimum-cost assignment of all cells minimises the
    L1 error among assignments respecting the admissible sets."""
    import networkx as nx

    n = len(live)
    scale = 10**9
    G = nx.MultiDiGraph()
    G.add_node("s", demand=-n)
    G.add_node("t", demand=n)
    for k in live:
        G.add_edge("s", ("c", k), capacity=1, weight=0)
        for y in values[k]:
            G.add_edge(("c", k), ("a", y), capacity=1, weight=0)
    for j, y in enumerate(support):
        goal = target[j] / weight
        for c in range(1, n + 1):
            inc = abs(c - goal) - abs(c - 1 - goal)
            G.add_edge(("a", y), "t", capacity=1, weight=int(round(inc * scale)))
    _, flow = nx.network_simplex(G)
    out = {}
    for k in live:
        for y, edges in flow[("c", k)].items():
            if any(v > 0 for v in edges.values()):
                out[k] = y[1]
    return out


def _nearest_exact(values, live, cw, idx, t, d):
    """Selection whose pushforward is tv-closest to ``t``, by the partial-sum
    recursion with back-pointers."""
    layers = [{_key([0.0] * d): ([0.0] * d, None, None)}]
    for k in live:
        nxt = {}
        for key, (vec, _, _) in layers[-1].items():
            for y in values[k]:
                v = list(vec)
                v[idx[y]] += cw[k]
                nxt.setdefault(_key(v), (v, key, y))
        layers.append(nxt)
    best = min(layers[-1], key=lambda kk: (math.fsum(abs(a - b) for a, b in zip(layers[-1][kk][0], t)), kk))
    assign, key = {}, best
    for k, layer in zip(reversed(live), reversed(layers[1:])):
        _, key, assign[k] = layer[key]
    return assign


def purify(F: Correspondence, space: FiniteProbSpace, target: Distribution, tol: float = 1e-9,
           ae: bool = True, budget: int = DEFAULT_BUDGET) -> Purification:
    """A pure selection whose pushforward approximates ``target``.

    Greedy fill (heaviest cells first, each to the admissible action with the
    largest remaining deficit), then single-cell reassignments while they
    lower the error. On spaces whose positive cells share one weight the
    result is further improved by an exact assignment of cell counts. When
    the error is still above ``tol`` and the selections number at most
    ``budget``, the exact nearest member of the distribution set is used.
    """
    values = _check_measurable(F, space)
    live, fixed = _split(space, values, ae)
    support = F.codomain
    if target.support != support:
        target = Distribution(support, [target[y] for y in support])
    if any(not values[k] for k in live):
        raise SelectionError("correspondence has an empty value; no selection exists")
    D_hull = _hull_members(F, space, ae)
    outside = hull_distance(target.mass, D_hull)
    if outside > tol:
        raise SelectionError(f"target lies {outside:.3g} (tv) outside the hull of the distribution set")

    cw = space.cell_weights
    idx = {y: j for j, y in enumerate(support)}
    t = list(target.mass)
    # selections are cell-constant, so the effective atoms are the cells
    w_max = max(cw)
    bound = max(tol, w_max / 2 * len(support))

    def error(assign):
        got = [0.0] * len(support)
        for k, y in assign.items():
            got[idx[y]] += cw[k]
        return 0.5 * math.fsum(abs(a - b) for a, b in zip(got, t))

    order = sorted(live, key=lambda k: (-cw[k], k))
    assign, deficit = {}, list(t)
    for k in order:
        best = max(values[k], key=lambda y: (deficit[idx[y]], -idx[y]))
        assign[k] = best
        deficit[idx[best]] -= cw[k]
    err = error(assign)
    method = "greedy"
    improved = True
    while improved and err > 0:
        improved = False
        for k in sorted(live):
            for y in values[k]:
                if y == assign[k]:
                    continue
                trial = dict(assign)
                trial[k] = y
                e = error(trial)
                if e < err - 1e-15:
                    assign, err, improved = trial, e, True
                    method = "greedy+swap"

    pos = [k for k in live if cw[k] > 0]
    w = _uniform_weight([cw[k] for k in pos])
    if err > tol and w is not None:
        nulls = {k: assign[k] for k in live if cw[k] <= 0}
        counts = [x / w for x in t]
        if all(abs(c - round(c)) <= 1e-9 for c in counts):
            matched = _match_counts(values, pos, [round(c) for c in counts], support)
            if matched is not None:
                matched.update(nulls)
                assign, err, method = matched, error(matched), "matching"
        if err > tol:
            rounded = _flow_round(values, pos, w, t, support)
            rounded.update(nulls)
            e = error(rounded)
            if e < err - 1e-15:
                assign, err, method = rounded, e, "flow"
    if err > tol and math.prod(len(values[k]) for k in live) <= budget:
        exact = _nearest_exact(values, sorted(live), cw, idx, t, len(support))
        exact.update({k: assign[k] for k in live if k not in exact})
        e = error(exact)
        if e < err - 1e-15:
            assign, err, method = exact, e, "exact"
    sel = _make(space, support, assign, fixed)
    return Purification(sel, err, bound, method)


def _hull_members(F, space, ae) -> np.ndarray:
    """Points spanning the hull of the distribution set: the greedy extremes."""
    vecs = []
    for order in _extreme_orders(F.codomain, limit=720):
        g = greedy_selection(F, space, order, ae)
        if g is not None:
            vecs.append(g.distribution().mass)
    return np.array(vecs, dtype=float)


def dmap_usc_check(Fparam: dict, grid, space: FiniteProbSpace, H: Correspondence | None,
                   delta: float, eps: float, budget: int = DEFAULT_BUDGET, ae: bool = True) -> bool:
    """Finite upper semicontinuity of ``x -> D_{F(., x)}``.

    ``Fparam`` maps each grid point to a correspondence over the space's
    atoms; ``H`` must dominate every one of them. Passes when, for all grid
    points closer than ``delta``, each member at ``x'`` lies within ``eps``
    of some member at ``x``.
    """
    if H is None:
        raise SelectionError("a dominating correspondence H is required")
    if not delta > 0 or eps < 0:
        raise SelectionError("delta must be positive and eps nonnegative")
    for x in grid.points:
        F = Fparam[x]
        if any(not F(t) <= H(t) for t in space.atoms):
            raise SelectionError(f"H does not dominate F at parameter {x!r}")
    sets = {x: distribution_set(Fparam[x], space, budget, ae=ae) for x in grid.points}
    pts = grid.points
    for i, j in grid.close_pairs(delta):
        here, there = sets[pts[i]], sets[pts[j]]
        if not here.members:
            if there.members:
                return False
            continue
        for m in there.members:
            if here.nearest(m)[1] > eps:
                return False
    return True
