"""Abstract economies with private information.

Each player ``i`` has a type space, a measurable constraint ``D_i`` on
actions, and three DSL-defined maps from ``(type, lambdas)`` to action sets:
the feasibility map ``alpha_i``, the preference map ``P_i`` and an optional
selector ``G_i``. ``lambdas`` is a tuple of action distributions, one per
player, normally the ones induced by a strategy profile.

The equilibrium search follows the fixed-point construction: on the set
``U_i`` where ``alpha_i`` and ``P_i`` do not meet, the switching map equals
``alpha_i``; elsewhere it equals ``alpha_i & P_i`` (or ``G_i`` in selector
mode). ``phi`` sends ``lambdas`` to the distribution sets of the switching
maps and an equilibrium is read off a fixed point of ``phi``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .correspondence import Correspondence, MetricGrid, max_usc_modulus, usc_modulus
from .dsl import CorrespondenceSpec
from .geometry import hull_distance, simplex_grid
from .measure import Distribution, FiniteProbSpace, ProductSpace, refine as refine_space, tv_distance
from .selection import (DEFAULT_BUDGET, DEFAULT_SEED, BudgetExceeded, DistributionSet, Selection, distribution_set,
                        enumerate_selections, greedy_selection, purify, selection_count,
                        _extreme_orders)

DEFAULT_TOL = 1e-9
DEFAULT_MESH = 1 / 16


class EconomyError(ValueError):
    pass


class HypothesisError(EconomyError):
    """A map that the existence theorem needs nonempty came out empty."""

    def __init__(self, message: str, player: int, cell: str):
        super().__init__(message)
        self.player = player
        self.cell = cell


@dataclass(frozen=True)
class EconomyInstance:
    """``types[i]`` holds player ``i``'s marginal type law and sigma cells;
    ``labels[i]`` maps each cell id to the name predicates see as ``zcell``
    (they differ only after refinement)."""

    types: tuple
    actions: tuple
    constraints: tuple
    alpha: tuple
    P: tuple
    joint: ProductSpace
    G: tuple | None = None
    theorem4: bool = False
    labels: tuple = None

    def __post_init__(self):
        n = len(self.types)
        if not n or not (len(self.actions) == len(self.constraints) == len(self.alpha) == len(self.P) == n):
            raise EconomyError("per-player data must have one entry per player")
        if self.G is not None and len(self.G) != n:
            raise EconomyError("selector G needs one entry per player")
        if self.theorem4 and self.G is None:
            raise EconomyError("selector mode requires G")
        if self.joint.n_coords != n:
            raise EconomyError("joint atoms must have one type coordinate per player")
        if self.labels is None:
            object.__setattr__(self, "labels", tuple({c: c for c in sp.cell_ids} for sp in self.types))
        for i in range(n):
            sp = self.types[i]
            if tuple(self.joint.factors[i]) != sp.atoms:
                raise EconomyError(f"player {i}: joint factor differs from the type atoms")
            w = self.joint.marginal_weights((i,))
            if any(abs(w[(a,)] - sp.weight(a)) > 1e-9 for a in sp.atoms):
                raise EconomyError(f"player {i}: type weights disagree with the joint marginal")
            D = self.constraints[i]
            if set(D.domain) != set(sp.atoms) or tuple(D.codomain) != tuple(self.actions[i]):
                raise EconomyError(f"player {i}: constraint must map types to actions")
            if any(not D(z) for z in D.domain):
                raise EconomyError(f"player {i}: constraint has an empty value")
            if any(len({D(a) for a in cell}) != 1 for cell in sp.cells):
                raise EconomyError(f"player {i}: constraint is not measurable")
            specs = [self.alpha[i], self.P[i]] + ([self.G[i]] if self.G is not None else [])
            if any(tuple(s.actions) != tuple(self.actions[i]) for s in specs):
                raise EconomyError(f"player {i}: predicates must cover exactly the player's actions")

    @classmethod
    def build(cls, type_cells, actions, constraints, alpha, P, joint: ProductSpace, G=None,
              theorem4: bool = False, cell_ids=None, labels=None) -> "EconomyInstance":
        n = len(actions)
        types = []
        for i in range(n):
            atoms = tuple(joint.factors[i])
            w = joint.marginal_weights((i,))
            ids = None if cell_ids is None else cell_ids[i]
            types.append(FiniteProbSpace(atoms, [w[(a,)] for a in atoms], type_cells[i], ids))
        cons = tuple(Correspondence(types[i].atoms, tuple(actions[i]), constraints[i], allow_empty=False)
                     for i in range(n))
        return cls(tuple(types), tuple(tuple(a) for a in actions), cons, tuple(alpha), tuple(P), joint,
                   None if G is None else tuple(G), theorem4, labels)

    @property
    def n_players(self) -> int:
        return len(self.types)

    def positive_cells(self, i: int) -> list:
        sp = self.types[i]
        return [(cid, cell) for cid, cell, w in zip(sp.cell_ids, sp.cells, sp.cell_weights) if w > 0]

    def profile_from_cells(self, choices: Sequence[dict]) -> tuple:
        out = []
        for i, table in enumerate(choices):
            sp = self.types[i]
            choice = {}
            for cid, cell in zip(sp.cell_ids, sp.cells):
                if cid not in table:
                    raise EconomyError(f"player {i}: no action for cell {cid!r}")
                if table[cid] not in self.actions[i]:
                    raise EconomyError(f"player {i}: unknown action {table[cid]!r}")
                for a in cell:
                    choice[a] = table[cid]
            out.append(Selection(sp, self.actions[i], choice))
        return tuple(out)

    def with_theorem4(self, flag: bool) -> "EconomyInstance":
        return EconomyInstance(self.types, self.actions, self.constraints, self.alpha, self.P, self.joint,
                               self.G, flag, self.labels)


def build_DDi(econ: EconomyInstance, i: int, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED) -> DistributionSet:
    """Distributions of player ``i``'s feasible pure strategies."""
    return distribution_set(econ.constraints[i], econ.types[i], budget, seed)


def _spec(econ: EconomyInstance, which: str, i: int) -> CorrespondenceSpec:
    if which == "alpha":
        return econ.alpha[i]
    if which == "P":
        return econ.P[i]
    if which == "G":
        if econ.G is None:
            raise EconomyError("economy has no selector G")
        return econ.G[i]
    raise EconomyError(f"unknown correspondence {which!r}")


def _label(econ: EconomyInstance, i: int, z) -> str:
    return econ.labels[i][econ.types[i].cell_id_of(z)]


def eval_correspondence(econ: EconomyInstance, which: str, i: int, z, lambdas: Sequence[Distribution]) -> frozenset:
    """Value of ``alpha_i``, ``P_i`` or ``G_i`` at type atom ``z``."""
    if len(lambdas) != econ.n_players:
        raise EconomyError("lambdas must hold one distribution per player")
    return _spec(econ, which, i)(_label(econ, i, z), lambdas)


def induced_lambdas(econ: EconomyInstance, profile: Sequence[Selection]) -> tuple:
    return tuple(g.distribution() for g in profile)


def in_U(econ: EconomyInstance, i: int, z, lambdas) -> bool:
    return not (eval_correspondence(econ, "alpha", i, z, lambdas) & eval_correspondence(econ, "P", i, z, lambdas))


def switch_F(econ: EconomyInstance, i: int, z, lambdas: Sequence[Distribution]) -> frozenset:
    """``alpha_i`` on ``U_i``; off it ``alpha_i & P_i``, or ``G_i`` in selector mode."""
    alpha = eval_correspondence(econ, "alpha", i, z, lambdas)
    P = eval_correspondence(econ, "P", i, z, lambdas)
    if not (alpha & P):
        out = alpha
    elif econ.theorem4:
        out = eval_correspondence(econ, "G", i, z, lambdas)
    else:
        out = alpha & P
    if not out:
        raise HypothesisError("switching map is empty; alpha (or G) must be nonempty-valued",
                              i, econ.types[i].cell_id_of(z))
    return out


def switch_correspondence(econ: EconomyInstance, i: int, lambdas) -> Correspondence:
    """``z -> switch_F(z) & D_i(z)`` over player ``i``'s type atoms.

    The intersection with ``D_i`` keeps ``phi`` inside the product of the
    feasible distribution sets. Null cells are not evaluated for emptiness.
    """
    sp = econ.types[i]
    D = econ.constraints[i]
    vals = {}
    for cid, cell, w in zip(sp.cell_ids, sp.cells, sp.cell_weights):
        if w > 0:
            v = switch_F(econ, i, cell[0], lambdas) & D(cell[0])
            if not v:
                raise HypothesisError(f"player {i}: switching map leaves D at cell {cid!r}", i, cid)
        else:
            v = D(cell[0])
        for a in cell:
            vals[a] = v
    return Correspondence(sp.atoms, econ.actions[i], vals, allow_empty=True)


def phi(econ: EconomyInstance, lambdas: Sequence[Distribution], budget: int = DEFAULT_BUDGET,
        seed: int = DEFAULT_SEED) -> tuple:
    return tuple(distribution_set(switch_correspondence(econ, i, lambdas), econ.types[i], budget, seed)
                 for i in range(econ.n_players))


# ------------------------------------------------------------- verification

@dataclass(frozen=True)
class CheckRecord:
    player: int
    cell: str
    action: object
    feasible: bool
    in_alpha: bool
    alpha_P_empty: bool

    @property
    def passed(self) -> bool:
        return self.feasible and self.in_alpha and self.alpha_P_empty


@dataclass(frozen=True)
class Verdict:
    lambdas: tuple
    checks: tuple

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def offending(self) -> list:
        return [(c.player, c.cell) for c in self.checks if not c.passed]


@dataclass(frozen=True)
class EquilibriumCertificate:
    profile: tuple
    lambdas: tuple
    checks: tuple


def check_equilibrium(econ: EconomyInstance, profile: Sequence[Selection]) -> Verdict:
    """Both equilibrium conditions at every type cell of positive weight,
    plus feasibility of the chosen action under ``D_i``."""
    if len(profile) != econ.n_players:
        raise EconomyError("profile needs one strategy per player")
    for i, g in enumerate(profile):
        if g.source.atoms != econ.types[i].atoms:
            raise EconomyError(f"player {i}: strategy is defined on the wrong type space")
        if any(len({g.choice[a] for a in cell}) != 1 for cell in econ.types[i].cells):
            raise EconomyError(f"player {i}: strategy is not measurable")
    lam = induced_lambdas(econ, profile)
    checks = []
    for i, g in enumerate(profile):
        for cid, cell in econ.positive_cells(i):
            z = cell[0]
            a = g.choice[z]
            alpha = eval_correspondence(econ, "alpha", i, z, lam)
            P = eval_correspondence(econ, "P", i, z, lam)
            checks.append(CheckRecord(i, cid, a, a in econ.constraints[i](z), a in alpha, not (alpha & P)))
    return Verdict(lam, tuple(checks))


def is_equilibrium(econ: EconomyInstance, profile: Sequence[Selection]) -> EquilibriumCertificate | None:
    v = check_equilibrium(econ, profile)
    if not v.valid:
        return None
    return EquilibriumCertificate(tuple(profile), v.lambdas, v.checks)


# ------------------------------------------------------------- U_i

def lambda_metric(a: Sequence[Distribution], b: Sequence[Distribution]) -> float:
    return max(tv_distance(x, y) for x, y in zip(a, b))


@dataclass(frozen=True)
class UiReport:
    members: frozenset
    interior: frozenset
    grid_size: int
    delta: float

    @property
    def is_open(self) -> bool:
        return self.members == self.interior


def build_Ui(econ: EconomyInstance, i: int, lambda_grid: Sequence[tuple], delta: float) -> UiReport:
    """Grid points ``(cell_id, k)`` (``k`` indexes ``lambda_grid``) where
    ``alpha_i`` and ``P_i`` do not meet, and those whose ``delta``-neighbours
    all belong as well."""
    grid = MetricGrid.from_metric(range(len(lambda_grid)), lambda a, b: lambda_metric(lambda_grid[a], lambda_grid[b]))
    sp = econ.types[i]
    members = set()
    for cid, cell in zip(sp.cell_ids, sp.cells):
        for k, lam in enumerate(lambda_grid):
            if in_U(econ, i, cell[0], lam):
                members.add((cid, k))
    close = grid.close_pairs(delta)
    nbrs = {k: [] for k in range(len(lambda_grid))}
    for a, b in close:
        nbrs[a].append(b)
    interior = {(cid, k) for cid, k in members if all((cid, j) in members for j in nbrs[k])}
    return UiReport(frozenset(members), frozenset(interior), len(lambda_grid), delta)


def hull_grid(D: DistributionSet, mesh: float = DEFAULT_MESH) -> list:
    """Mesh points of the simplex lying in the hull of ``D``."""
    M = D.matrix()
    pts = simplex_grid(len(D.support), mesh)
    return [Distribution(D.support, p) for p in pts if hull_distance(p, M) <= 1e-9]


def lambda_grid(econ: EconomyInstance, budget: int = DEFAULT_BUDGET, mesh: float | None = None,
                max_points: int = 600) -> tuple:
    """Product grid of distribution tuples: hull grids at ``mesh`` when the
    product stays under ``max_points``, else the exact feasible sets."""
    exact = [list(build_DDi(econ, i, budget)) for i in range(econ.n_players)]
    if mesh is not None:
        grids = [hull_grid(build_DDi(econ, i, budget), mesh) for i in range(econ.n_players)]
        if math.prod(len(g) for g in grids) <= max_points:
            return tuple(itertools.product(*grids)), "hull-grid"
    return tuple(itertools.product(*exact)), "exact"


# ------------------------------------------------------------- search

@dataclass
class EquilibriumSearch:
    certificate: EquilibriumCertificate | None
    strategy: str
    complete: bool
    fixed_points: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    scanned: int = 0

    @property
    def found(self) -> bool:
        return self.certificate is not None


def _extract(econ, lam, tol, budget, seed) -> tuple | None:
    """Per player, the first selection of the switching map realising ``lam[i]``."""
    profile = []
    for i in range(econ.n_players):
        F = switch_correspondence(econ, i, lam)
        got = None
        if selection_count(F, econ.types[i]) <= budget:
            for g in enumerate_selections(F, econ.types[i]):
                if tv_distance(g.distribution(), lam[i]) <= tol:
                    got = g
                    break
        if got is None:
            try:
                got = purify(F, econ.types[i], lam[i], tol).selection
            except ValueError:
                return None
        profile.append(got)
    return tuple(profile)


def _is_fixed(econ, lam, tol, budget, seed) -> tuple:
    ph = phi(econ, lam, budget, seed)
    return all(ph[i].contains(lam[i], tol) for i in range(econ.n_players)), ph


def _key(lam) -> tuple:
    return tuple(tuple(round(m, 12) for m in d.mass) for d in lam)


def find_equilibrium(econ: EconomyInstance, budget: int = DEFAULT_BUDGET, tol: float = DEFAULT_TOL,
                     strategy: str = "auto", max_iter: int = 200, mesh: float = DEFAULT_MESH,
                     damping: float = 1.0, seed: int = DEFAULT_SEED) -> EquilibriumSearch:
    """Search for a fixed point of ``phi`` and certify the profile behind it.

    ``exhaustive`` scans every tuple of the exact feasible distribution sets
    and records all fixed points; ``iterative`` moves each component to its
    nearest member of ``phi`` from every extreme starting tuple. ``auto``
    picks the scan when the tuple count is within ``budget``.
    """
    sets = [build_DDi(econ, i, budget, seed) for i in range(econ.n_players)]
    total = math.prod(len(s) for s in sets)
    exact = all(s.exact for s in sets)
    if strategy == "auto":
        strategy = "exhaustive" if exact and total <= budget else "iterative"
    if strategy == "exhaustive":
        if not exact or total > budget:
            raise BudgetExceeded(f"exhaustive search needs {total} exact tuples; budget is {budget}")
        return _exhaustive(econ, sets, budget, tol, seed)
    if strategy == "iterative":
        return _iterative(econ, sets, budget, tol, max_iter, mesh, damping, seed)
    raise EconomyError(f"unknown search strategy {strategy!r}")


def _exhaustive(econ, sets, budget, tol, seed) -> EquilibriumSearch:
    out = EquilibriumSearch(None, "exhaustive", all(s.exact for s in sets))
    for lam in itertools.product(*sets):
        out.scanned += 1
        try:
            fixed, _ = _is_fixed(econ, lam, tol, budget, seed)
        except HypothesisError as e:
            out.violations.append({"lambdas": lam, "player": e.player, "cell": e.cell, "message": str(e)})
            continue
        if not fixed:
            continue
        cert = None
        profile = _extract(econ, lam, tol, budget, seed)
        if profile is not None:
            cert = is_equilibrium(econ, profile)
        out.fixed_points.append({"lambdas": lam, "certified": cert is not None})
        if cert is not None and out.certificate is None:
            out.certificate = cert
    return out


def _starts(econ, sets) -> list:
    per = []
    for i, s in enumerate(sets):
        pts = []
        for order in _extreme_orders(econ.actions[i]):
            g = greedy_selection(econ.constraints[i], econ.types[i], order)
            d = g.distribution()
            if all(tv_distance(d, q) > 1e-12 for q in pts):
                pts.append(d)
        per.append(pts)
    return list(itertools.product(*per))


def _snap(mass, mesh) -> list:
    steps = round(1 / mesh)
    v = np.floor(np.asarray(mass) * steps + 1e-9).astype(int)
    rem = steps - v.sum()
    frac = np.asarray(mass) * steps - v
    for j in np.argsort(-frac, kind="stable")[:rem]:
        v[j] += 1
    return list(v / steps)


def _iterative(econ, sets, budget, tol, max_iter, mesh, damping, seed) -> EquilibriumSearch:
    out = EquilibriumSearch(None, "iterative", False)
    grid_tol = tol if damping >= 1.0 else mesh / 2
    seen_fixed = set()
    for start in _starts(econ, sets):
        lam = tuple(start)
        visited = {_key(lam)}
        for _ in range(max_iter):
            out.scanned += 1
            try:
                ph = phi(econ, lam, budget, seed)
            except HypothesisError as e:
                out.violations.append({"lambdas": lam, "player": e.player, "cell": e.cell, "message": str(e)})
                break
            near = [ph[i].nearest(lam[i]) for i in range(econ.n_players)]
            if all(d <= grid_tol for _, d in near):
                k = _key(lam)
                if k not in seen_fixed:
                    seen_fixed.add(k)
                    profile = _extract(econ, lam, grid_tol, budget, seed)
                    cert = is_equilibrium(econ, profile) if profile is not None else None
                    out.fixed_points.append({"lambdas": lam, "certified": cert is not None})
                    if cert is not None and out.certificate is None:
                        out.certificate = cert
                break
            if damping >= 1.0:
                lam = tuple(m for m, _ in near)
            else:
                lam = tuple(Distribution(l.support, _snap([(1 - damping) * a + damping * b
                                                           for a, b in zip(l.mass, m.mass)], mesh))
                            for l, (m, _) in zip(lam, near))
            k = _key(lam)
            if k in visited:
                break
            visited.add(k)
        if out.certificate is not None:
            break
    return out


def all_profiles(econ: EconomyInstance, feasible: bool = True):
    """Every pure profile, over ``D_i`` (``feasible``) or over all of ``A_i``."""
    spaces = []
    for i in range(econ.n_players):
        sp = econ.types[i]
        F = econ.constraints[i] if feasible else Correspondence(
            sp.atoms, econ.actions[i], {a: econ.actions[i] for a in sp.atoms})
        spaces.append(list(enumerate_selections(F, sp)))
    return itertools.product(*spaces)


def profile_count(econ: EconomyInstance, feasible: bool = True) -> int:
    if feasible:
        return math.prod(selection_count(econ.constraints[i], econ.types[i]) for i in range(econ.n_players))
    return math.prod(len(econ.actions[i]) ** sum(1 for _ in econ.positive_cells(i)) for i in range(econ.n_players))


# ------------------------------------------------------------- audit

def audit_theorem3(econ: EconomyInstance, budget: int = DEFAULT_BUDGET, audit_budget: int = 10_000,
                   mesh: float = DEFAULT_MESH, delta: float | None = None) -> dict:
    """Finite-scale status of each existence hypothesis, keyed T3a..T3f
    (plus T4d for the selector in selector mode). Hypotheses are reported
    separately; no attempt is made to reconcile them."""
    n = econ.n_players
    grid, grid_kind = lambda_grid(econ, budget, mesh)
    if delta is None:
        delta = 1.5 * mesh
    report = {"lambda_grid": {"kind": grid_kind, "size": len(grid), "mesh": mesh, "delta": delta}}

    report["T3a"] = [{"player": i, "atomicity_level": econ.types[i].atomicity_level(),
                      "atomless": econ.types[i].atomicity_level() == 0.0} for i in range(n)]
    report["T3b"] = [{"player": i, "measurable": True,
                      "nonempty": all(econ.constraints[i](z) for z in econ.types[i].atoms)} for i in range(n)]

    metric = MetricGrid.from_metric(range(len(grid)), lambda a, b: lambda_metric(grid[a], grid[b]))
    for label, which in (("T3c", "alpha"), ("T3d", "P")):
        report[label] = [_usc_audit(econ, which, i, grid, metric, delta) for i in range(n)]
    if econ.G is not None:
        report["T4d"] = [_selector_audit(econ, i, grid, metric, delta) for i in range(n)]

    which_e = "G" if econ.theorem4 else "P"
    total = profile_count(econ, feasible=False)
    violations, scanned = [], 0
    for prof in all_profiles(econ, feasible=False):
        if scanned >= audit_budget:
            break
        scanned += 1
        lam = induced_lambdas(econ, prof)
        for i, g in enumerate(prof):
            for cid, cell in econ.positive_cells(i):
                if g.choice[cell[0]] in eval_correspondence(econ, which_e, i, cell[0], lam):
                    violations.append({"player": i, "cell": cid, "profile": [h.by_cell() for h in prof]})
    report["T3e"] = {"against": which_e, "scanned": scanned, "complete": scanned >= total,
                     "violation_count": len(violations), "violations": violations[:20],
                     "holds": not violations}
    report["T3f"] = []
    for i in range(n):
        u = build_Ui(econ, i, grid, delta)
        report["T3f"].append({"player": i, "members": len(u.members), "interior": len(u.interior),
                              "points": u.grid_size * len(econ.types[i].cells), "open": u.is_open})
    return report


def _value_map(econ, which, i, z, grid, metric) -> Correspondence:
    return Correspondence(tuple(range(len(grid))), econ.actions[i],
                          {k: eval_correspondence(econ, which, i, z, lam) for k, lam in enumerate(grid)},
                          metric=metric)


def _usc_audit(econ, which, i, grid, metric, delta) -> dict:
    sp = econ.types[i]
    spec = _spec(econ, which, i)
    cells = []
    for cid, cell in zip(sp.cell_ids, sp.cells):
        F = _value_map(econ, which, i, cell[0], grid, metric)
        cells.append({"cell": cid, "nonempty": all(F(k) for k in F.domain),
                      "usc": usc_modulus(F, delta), "max_usc_modulus": max_usc_modulus(F)})
    return {"player": i, "form": spec.tag, "nonempty": all(c["nonempty"] for c in cells),
            "usc": all(c["usc"] for c in cells), "cells": cells}


def _selector_audit(econ, i, grid, metric, delta) -> dict:
    rep = _usc_audit(econ, "G", i, grid, metric, delta)
    inside = True
    for cell in econ.types[i].cells:
        for lam in grid:
            g = eval_correspondence(econ, "G", i, cell[0], lam)
            cap = eval_correspondence(econ, "alpha", i, cell[0], lam) & eval_correspondence(econ, "P", i, cell[0], lam)
            if not g <= cap:
                inside = False
    rep["selector_inclusion"] = inside
    return rep


def refine(econ: EconomyInstance, k: int) -> EconomyInstance:
    """Split every type atom into ``k`` equal parts. Predicates keep seeing
    the parent cell names."""
    if k == 1:
        return econ
    n = econ.n_players
    types = [refine_space(sp, k) for sp in econ.types]
    weights = {}
    for omega, w in zip(econ.joint.joint.atoms, econ.joint.joint.weights):
        for sub in itertools.product(range(k), repeat=n):
            weights[tuple(f"{omega[i]}#{sub[i]}" for i in range(n))] = w / k**n
    joint = ProductSpace.from_weights([sp.atoms for sp in types], weights)
    cons, labels = [], []
    for i in range(n):
        D = econ.constraints[i]
        cons.append({f"{a}#{j}": D(a) for a in econ.types[i].atoms for j in range(k)})
        labels.append({f"{cid}#{j}": econ.labels[i][cid] for cid in econ.types[i].cell_ids for j in range(k)})
    return EconomyInstance.build([sp.cells for sp in types], econ.actions, cons, econ.alpha, econ.P, joint,
                                 econ.G, econ.theorem4, [sp.cell_ids for sp in types], tuple(labels))
