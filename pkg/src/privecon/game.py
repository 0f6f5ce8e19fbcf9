"""Finite games with private information and pure-strategy Nash equilibria.

Joint atoms are ordered ``(z_0, x_0, z_1, x_1, ...)``: player ``i`` observes
its type ``z_i`` and is paid according to the action profile and its own
shock ``x_i``. Players are indexed from 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from .correspondence import Correspondence
from .measure import (FiniteProbSpace, ProductSpace, coordinate_projection,
                      independence_deviation, refine as refine_space)
from .selection import (DEFAULT_BUDGET, Selection, enumerate_selections,
                        greedy_selection, selection_count)

DEFAULT_EPS = 1e-9


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class PrivateInfoGame:
    """``types[i]`` carries the marginal law of player ``i``'s type and its
    sigma cells; ``payoffs[i]`` maps ``(action_profile, shock)`` to a number."""

    types: tuple
    shocks: tuple
    actions: tuple
    constraints: tuple
    payoffs: tuple
    joint: ProductSpace
    _atoms: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.types)
        if not n or not (len(self.shocks) == len(self.actions) == len(self.constraints) == len(self.payoffs) == n):
            raise GameError("per-player data must have one entry per player")
        if self.joint.n_coords != 2 * n:
            raise GameError("joint atoms must be (type, shock) pairs for every player")
        for i in range(n):
            if tuple(self.joint.factors[2 * i]) != tuple(self.types[i].atoms):
                raise GameError(f"player {i}: joint type factor differs from the type atoms")
            if tuple(self.joint.factors[2 * i + 1]) != tuple(self.shocks[i]):
                raise GameError(f"player {i}: joint shock factor differs from the shock atoms")
            w = self.joint.marginal_weights((2 * i,))
            if any(abs(w[(a,)] - self.types[i].weight(a)) > 1e-9 for a in self.types[i].atoms):
                raise GameError(f"player {i}: type weights disagree with the joint marginal")
            D = self.constraints[i]
            if set(D.domain) != set(self.types[i].atoms) or tuple(D.codomain) != tuple(self.actions[i]):
                raise GameError(f"player {i}: constraint must map types to actions")
            if any(not D(z) for z in D.domain):
                raise GameError(f"player {i}: constraint has an empty value")
            for a in itertools.product(*self.actions):
                for x in self.shocks[i]:
                    if (a, x) not in self.payoffs[i]:
                        raise GameError(f"player {i}: payoff missing for actions {a} and shock {x!r}")
        atoms = tuple(
            (w, tuple(coordinate_projection(o, j, shock=False) for j in range(n)),
             tuple(coordinate_projection(o, j, shock=True) for j in range(n)))
            for o, w in self.joint.items())
        object.__setattr__(self, "_atoms", atoms)

    @classmethod
    def build(cls, type_cells: Sequence, shocks: Sequence, actions: Sequence, constraints: Sequence,
              payoffs: Sequence, joint: ProductSpace, cell_ids: Sequence | None = None) -> "PrivateInfoGame":
        """Assemble a game, deriving each type law from the joint.

        ``type_cells[i]`` is a list of cells (lists of type atoms);
        ``constraints[i]`` maps each type atom to its admissible actions.
        """
        n = len(actions)
        types = []
        for i in range(n):
            atoms = tuple(joint.factors[2 * i])
            w = joint.marginal_weights((2 * i,))
            ids = None if cell_ids is None else cell_ids[i]
            types.append(FiniteProbSpace(atoms, [w[(a,)] for a in atoms], type_cells[i], ids))
        cons = tuple(Correspondence(types[i].atoms, tuple(actions[i]), constraints[i], allow_empty=False)
                     for i in range(n))
        return cls(tuple(types), tuple(tuple(s) for s in shocks), tuple(tuple(a) for a in actions),
                   cons, tuple(dict(p) for p in payoffs), joint)

    @property
    def n_players(self) -> int:
        return len(self.types)

    def strategies(self, i: int):
        return enumerate_selections(self.constraints[i], self.types[i])

    def strategy_count(self, i: int) -> int:
        return selection_count(self.constraints[i], self.types[i])

    def profile_from_cells(self, choices: Sequence[dict]) -> tuple:
        """Build a profile from per-player ``{cell_id: action}`` tables."""
        out = []
        for i, table in enumerate(choices):
            sp = self.types[i]
            choice = {}
            for cid, cell in zip(sp.cell_ids, sp.cells):
                if cid not in table:
                    raise GameError(f"player {i}: no action for cell {cid!r}")
                for a in cell:
                    choice[a] = table[cid]
            out.append(Selection(sp, self.actions[i], choice))
        return tuple(out)


def _check_profile(game: PrivateInfoGame, profile: Sequence[Selection]) -> None:
    if len(profile) != game.n_players:
        raise GameError("profile needs one strategy per player")
    for i, g in enumerate(profile):
        if not g.is_selection_of(game.constraints[i]):
            raise GameError(f"player {i}: strategy is not a measurable selection of its constraint")


def expected_payoff(game: PrivateInfoGame, profile: Sequence[Selection], i: int) -> float:
    """Expectation under the joint law of player ``i``'s payoff."""
    u = game.payoffs[i]
    terms = []
    for w, zs, xs in game._atoms:
        a = tuple(g.choice[z] for g, z in zip(profile, zs))
        try:
            terms.append(w * u[(a, xs[i])])
        except KeyError:
            raise GameError(f"payoff missing for actions {a} and shock {xs[i]!r}") from None
    return math.fsum(terms)


def _cell_values(game: PrivateInfoGame, profile, i: int) -> list:
    """Per cell of player ``i``: {action: contribution to U_i} with the other
    players held at ``profile``. U_i is additive over these cells."""
    sp = game.types[i]
    D = game.constraints[i]
    u = game.payoffs[i]
    table = [{y: [] for y in D.ordered(cell[0])} for cell in sp.cells]
    for w, zs, xs in game._atoms:
        k = sp.cell_of(zs[i])
        base = [g.choice[z] for g, z in zip(profile, zs)]
        for y, acc in table[k].items():
            base[i] = y
            acc.append(w * u[(tuple(base), xs[i])])
    return [{y: math.fsum(v) for y, v in row.items()} for row in table]


def best_response(game: PrivateInfoGame, profile: Sequence[Selection], i: int) -> Selection:
    """Cellwise maximiser; keeps the current action on ties, else the
    lowest-index best action."""
    sp = game.types[i]
    rows = _cell_values(game, profile, i)
    current = profile[i]
    choice = {}
    for cell, row in zip(sp.cells, rows):
        top = max(row.values())
        cur = current.choice[cell[0]]
        if cur in row and row[cur] >= top - 1e-12:
            y = cur
        else:
            y = next(a for a, v in row.items() if v >= top - 1e-12)
        for a in cell:
            choice[a] = y
    return Selection(sp, game.actions[i], choice)


@dataclass(frozen=True)
class NashReport:
    is_nash: bool
    max_gain: float
    worst_player: int | None
    deviation: Selection | None
    gains: tuple
    complete: bool
    methods: tuple


def is_nash(game: PrivateInfoGame, profile: Sequence[Selection], eps: float = DEFAULT_EPS,
            budget: int = DEFAULT_BUDGET) -> NashReport:
    """Check every unilateral deviation within the measurable selections.

    Deviations are enumerated when there are at most ``budget`` of them;
    otherwise the best deviation is found cell by cell, which is exact
    because expected payoff is a sum of per-cell terms.
    """
    _check_profile(game, profile)
    gains, devs, methods = [], [], []
    for i in range(game.n_players):
        base = expected_payoff(game, profile, i)
        if game.strategy_count(i) <= budget:
            best, arg = base, None
            for g in game.strategies(i):
                trial = list(profile)
                trial[i] = g
                v = expected_payoff(game, trial, i)
                if v > best + 1e-15:
                    best, arg = v, g
            methods.append("enumerate")
        else:
            arg = best_response(game, profile, i)
            trial = list(profile)
            trial[i] = arg
            best = max(base, expected_payoff(game, trial, i))
            methods.append("cellwise")
        gains.append(best - base)
        devs.append(arg)
    worst = max(range(game.n_players), key=lambda i: (gains[i], -i))
    max_gain = gains[worst]
    return NashReport(max_gain <= eps, max_gain, worst if max_gain > 0 else None,
                      devs[worst] if max_gain > 0 else None, tuple(gains), True, tuple(methods))


def pointwise_gain(game: PrivateInfoGame, profile: Sequence[Selection], i: int) -> float:
    """Largest gain from changing the action on a single cell."""
    rows = _cell_values(game, profile, i)
    sp = game.types[i]
    gain = 0.0
    for cell, row in zip(sp.cells, rows):
        cur = profile[i].choice[cell[0]]
        gain = max(gain, max(row.values()) - row[cur])
    return gain


@dataclass(frozen=True)
class NashSearch:
    profile: tuple | None
    status: str
    complete: bool
    method: str
    scanned: int
    report: NashReport | None


def find_nash(game: PrivateInfoGame, budget: int = DEFAULT_BUDGET, max_iter: int = 1000,
              eps: float = DEFAULT_EPS) -> NashSearch:
    """First equilibrium in enumeration order, or best-response iteration
    when the profile space exceeds ``budget``.

    An empty result is not a contradiction at finite scale: atoms of
    positive weight break the atomless hypothesis of the existence theorem.
    """
    counts = [game.strategy_count(i) for i in range(game.n_players)]
    total = math.prod(counts)
    if total <= budget:
        spaces = [list(game.strategies(i)) for i in range(game.n_players)]
        scanned = 0
        for prof in itertools.product(*spaces):
            scanned += 1
            rep = is_nash(game, prof, eps, budget)
            if rep.is_nash:
                return NashSearch(tuple(prof), "found", True, "exhaustive", scanned, rep)
        return NashSearch(None, "not_found", True, "exhaustive", scanned, None)

    prof = tuple(greedy_selection(game.constraints[i], game.types[i], game.actions[i])
                 for i in range(game.n_players))
    seen = {_profile_key(prof)}
    for it in range(max_iter):
        changed = False
        for i in range(game.n_players):
            br = best_response(game, prof, i)
            if br.choice != prof[i].choice:
                prof = prof[:i] + (br,) + prof[i + 1:]
                changed = True
        if not changed:
            rep = is_nash(game, prof, eps, budget)
            if rep.is_nash:
                return NashSearch(prof, "found", False, "best-response", it + 1, rep)
            break
        key = _profile_key(prof)
        if key in seen:
            break
        seen.add(key)
    return NashSearch(None, "not_found", False, "best-response", len(seen), None)


def _profile_key(profile) -> tuple:
    return tuple(tuple(sorted(g.choice.items(), key=repr)) for g in profile)


def audit_theorem2(game: PrivateInfoGame) -> dict:
    """Finite-scale status of the four hypotheses of the existence theorem
    for games, keyed T2a..T2d."""
    n = game.n_players
    T2a = [{"player": i, "atomicity_level": game.types[i].atomicity_level(),
            "atomless": game.types[i].atomicity_level() == 0.0} for i in range(n)]
    T2b = []
    for i in range(n):
        grouping = [[2 * j] for j in range(n) if j != i] + [[2 * i, 2 * i + 1]]
        rep = independence_deviation(game.joint, grouping)
        T2b.append({"player": i, "independent": rep.independent,
                    "deviation": rep.max_atom_deviation, "tv_deviation": rep.tv_deviation})
    T2c = {"satisfied": True,
           "note": "finite action profiles are discrete, so every payoff is continuous in actions; "
                   "finite shock sets make every payoff measurable in the shock"}
    T2d = []
    profiles = list(itertools.product(*game.actions))
    for i in range(n):
        u = game.payoffs[i]
        h = [(w, max(abs(u[(a, xs[i])]) for a in profiles)) for w, _, xs in game._atoms]
        T2d.append({"player": i, "integral": math.fsum(w * v for w, v in h),
                    "sup": max((v for _, v in h), default=0.0), "finite": True})
    return {"T2a": T2a, "T2b": T2b, "T2c": T2c, "T2d": T2d}


def refine(game: PrivateInfoGame, k: int) -> PrivateInfoGame:
    """Split every type atom into ``k`` equal parts; shocks are untouched."""
    if k == 1:
        return game
    n = game.n_players
    types = [refine_space(sp, k) for sp in game.types]
    parent = [{f"{a}#{j}": a for a in sp.atoms for j in range(k)} for sp in game.types]
    weights = {}
    for omega, w in zip(game.joint.joint.atoms, game.joint.joint.weights):
        for sub in itertools.product(range(k), repeat=n):
            key = []
            for i in range(n):
                key += [f"{omega[2 * i]}#{sub[i]}", omega[2 * i + 1]]
            weights[tuple(key)] = w / k**n
    factors = []
    for i in range(n):
        factors += [types[i].atoms, game.shocks[i]]
    joint = ProductSpace.from_weights(factors, weights)
    cons = []
    for i in range(n):
        D = game.constraints[i]
        cons.append({a: D(parent[i][a]) for a in types[i].atoms})
    return PrivateInfoGame.build([sp.cells for sp in types], game.shocks, game.actions, cons,
                                 game.payoffs, joint, [sp.cell_ids for sp in types])
