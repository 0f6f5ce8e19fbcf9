"""Seeded random instances for property checks."""
from __future__ import annotations

import itertools
import random

from .correspondence import Correspondence, MetricGrid
from .dsl import CorrespondenceSpec, Declaration, print_canonical, random_predicate
from .economy import EconomyInstance
from .game import PrivateInfoGame
from .measure import Distribution, FiniteProbSpace, ProductSpace


def random_weights(rng: random.Random, n: int, zero_prob: float = 0.0) -> list:
    raw = [0.0 if rng.random() < zero_prob else rng.random() + 0.05 for _ in range(n)]
    if not any(raw):
        raw[rng.randrange(n)] = 1.0
    total = sum(raw)
    w = [x / total for x in raw]
    w[-1] = 1.0 - sum(w[:-1])
    if w[-1] < 0:
        w[-1] = 0.0
        w[0] = 1.0 - sum(w[1:])
    return w


def random_partition(rng: random.Random, atoms: list, n_cells: int) -> list:
    atoms = list(atoms)
    n_cells = max(1, min(n_cells, len(atoms)))
    labels = list(range(n_cells)) + [rng.randrange(n_cells) for _ in range(len(atoms) - n_cells)]
    rng.shuffle(labels)
    cells = [[a for a, l in zip(atoms, labels) if l == c] for c in range(n_cells)]
    return cells


def random_space(rng: random.Random, n_atoms: int, n_cells: int | None = None, zero_prob: float = 0.0,
                 prefix: str = "t") -> FiniteProbSpace:
    atoms = [f"{prefix}{k}" for k in range(n_atoms)]
    cells = random_partition(rng, atoms, n_cells if n_cells is not None else rng.randint(1, n_atoms))
    return FiniteProbSpace(atoms, random_weights(rng, n_atoms, zero_prob), cells)


def random_correspondence(rng: random.Random, space: FiniteProbSpace, actions: tuple,
                          empty_prob: float = 0.0) -> Correspondence:
    """Cell-constant random values; a value is empty with ``empty_prob``."""
    vals = {}
    for cell in space.cells:
        if rng.random() < empty_prob:
            v = []
        else:
            v = [a for a in actions if rng.random() < 0.5] or [rng.choice(actions)]
        for a in cell:
            vals[a] = v
    return Correspondence(space.atoms, actions, vals, sigma=space.cells, allow_empty=True)


def _action_names(rng: random.Random, k: int) -> tuple:
    return tuple(f"a{j}" for j in range(k))


def random_game(rng: random.Random, max_profiles: int = 64, max_players: int = 2) -> PrivateInfoGame:
    """Random game whose pure profile count is at most ``max_profiles``."""
    while True:
        n = rng.randint(1, max_players)
        type_atoms = [[f"z{i}_{k}" for k in range(rng.randint(1, 3))] for i in range(n)]
        shocks = [[f"x{i}_{k}" for k in range(rng.randint(1, 2))] for i in range(n)]
        actions = [_action_names(rng, rng.randint(1, 3)) for _ in range(n)]
        cells = [random_partition(rng, t, rng.randint(1, len(t))) for t in type_atoms]
        cons = []
        count = 1
        for i in range(n):
            c = {}
            for cell in cells[i]:
                v = [a for a in actions[i] if rng.random() < 0.6] or [rng.choice(actions[i])]
                count *= len(v)
                for a in cell:
                    c[a] = v
            cons.append(c)
        if count <= max_profiles:
            break
    factors = []
    for i in range(n):
        factors += [type_atoms[i], shocks[i]]
    combos = list(itertools.product(*factors))
    w = random_weights(rng, len(combos), zero_prob=0.2)
    joint = ProductSpace.from_weights(factors, dict(zip(combos, w)))
    profiles = list(itertools.product(*actions))
    payoffs = [{(a, x): float(rng.randint(-5, 5)) if rng.random() < 0.5 else round(rng.uniform(-3, 3), 3)
                for a in profiles for x in shocks[i]} for i in range(n)]
    return PrivateInfoGame.build(cells, shocks, actions, cons, payoffs, joint)


def random_economy(rng: random.Random, max_players: int = 2, max_atoms: int = 2, max_actions: int = 2,
                   depth: int = 2, alpha_full_prob: float = 0.5) -> EconomyInstance:
    """Small random economy with predicate-defined ``alpha`` and ``P``.

    ``alpha`` is either full or keeps one random action, so it is never
    empty; the switching map can still miss ``D``, which the search reports.
    """
    n = rng.randint(1, max_players)
    atoms = [[f"z{i}_{k}" for k in range(rng.randint(1, max_atoms))] for i in range(n)]
    actions = [_action_names(rng, rng.randint(1, max_actions)) for _ in range(n)]
    cells = [random_partition(rng, a, rng.randint(1, len(a))) for a in atoms]
    ids = [[f"c{k}" for k in range(len(c))] for c in cells]
    cons = []
    for i in range(n):
        c = {}
        for cell in cells[i]:
            v = [a for a in actions[i] if rng.random() < 0.7] or [rng.choice(actions[i])]
            for a in cell:
                c[a] = v
        cons.append(c)
    decl_actions = {i + 1: frozenset(actions[i]) for i in range(n)}
    alpha, P = [], []
    for i in range(n):
        decl = Declaration(decl_actions, frozenset(ids[i]))
        keep = rng.choice(actions[i])
        if rng.random() < alpha_full_prob:
            texts = {a: "true" for a in actions[i]}
        else:
            texts = {a: "true" if a == keep else print_canonical(random_predicate(rng, decl, depth))
                     for a in actions[i]}
        alpha.append(CorrespondenceSpec.from_texts(actions[i], texts, decl))
        ptexts = {a: print_canonical(random_predicate(rng, decl, depth)) for a in actions[i]}
        P.append(CorrespondenceSpec.from_texts(actions[i], ptexts, decl))
    combos = list(itertools.product(*atoms))
    w = random_weights(rng, len(combos))
    joint = ProductSpace.from_weights(atoms, dict(zip(combos, w)))
    return EconomyInstance.build(cells, actions, cons, alpha, P, joint, cell_ids=ids)


def random_lambdas(rng: random.Random, econ: EconomyInstance) -> tuple:
    return tuple(Distribution(a, random_weights(rng, len(a), zero_prob=0.3)) for a in econ.actions)


def random_line_grid(rng: random.Random, n: int) -> MetricGrid:
    coords = sorted({round(rng.uniform(0, 1), 3) for _ in range(n)})
    while len(coords) < 2:
        coords = sorted({round(rng.uniform(0, 1), 3) for _ in range(n)})
    return MetricGrid.on_line(coords)


def random_glue_triple(rng: random.Random, n_points: int = 8, n_actions: int = 3):
    """``(F1, F2, A, delta)`` with ``F2 <= F1`` on ``A`` and both parts
    satisfying the usc and lsc containment tests at ``delta``.

    Values are drawn per cluster of points joined by distances below
    ``delta``, which makes both parts locally constant at that resolution.
    ``A`` is an arbitrary subset, so its separation may be smaller than
    ``delta``.
    """
    grid = random_line_grid(rng, n_points)
    pts = grid.points
    ds = grid.distinct_distances()
    delta = rng.choice(ds[: max(1, len(ds) // 2)])
    # clusters: connected components of the "closer than delta" graph
    parent = list(range(len(pts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in grid.close_pairs(delta):
        parent[find(i)] = find(j)
    roots = sorted({find(i) for i in range(len(pts))})
    Y = tuple(f"y{k}" for k in range(n_actions))
    big = {r: [y for y in Y if rng.random() < 0.6] or [Y[0]] for r in roots}
    small = {r: [y for y in big[r] if rng.random() < 0.6] for r in roots}
    A = [p for p in pts if rng.random() < 0.5]
    F1 = Correspondence(pts, Y, {pts[i]: big[find(i)] for i in range(len(pts))}, metric=grid)
    F2 = Correspondence(pts, Y, {pts[i]: small[find(i)] for i in range(len(pts))}, metric=grid)
    return F1, F2, A, delta
