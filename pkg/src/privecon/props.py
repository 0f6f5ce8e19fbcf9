"""Seeded invariant suites, run by ``privecon props``.

Each check draws one random case from ``rng`` and raises ``AssertionError``
when the invariant fails.
"""
from __future__ import annotations

import math
import random
import traceback

from . import correspondence as corr
from . import dsl, economy, game, measure, selection
from . import generators as gen


def _pushforward_total(rng):
    sp = gen.random_space(rng, rng.randint(1, 6))
    Y = ("u", "v", "w")
    f = {a: rng.choice(Y) for a in sp.atoms}
    d = measure.pushforward(sp, f, Y)
    for y in Y:
        manual = math.fsum(sp.weight(a) for a in sp.atoms if f[a] == y)
        assert abs(d[y] - manual) <= 1e-12


def _refine_atomicity(rng):
    sp = gen.random_space(rng, rng.randint(1, 5))
    k = rng.randint(1, 6)
    assert abs(measure.refine(sp, k).atomicity_level() - sp.atomicity_level() / k) <= 1e-12


def _product_independent(rng):
    spaces = [gen.random_space(rng, rng.randint(1, 3), prefix=f"s{i}_") for i in range(rng.randint(2, 3))]
    p = measure.ProductSpace.product(spaces)
    rep = measure.independence_deviation(p, [[i] for i in range(len(spaces))])
    assert rep.independent and rep.tv_deviation <= 1e-12


def _inverse_duality(rng):
    sp = gen.random_space(rng, rng.randint(1, 6))
    F = gen.random_correspondence(rng, sp, ("u", "v", "w"), empty_prob=0.2)
    A = {y for y in F.codomain if rng.random() < 0.5}
    up, low = corr.upper_inverse(F, A), corr.lower_inverse(F, A)
    comp = set(F.codomain) - A
    assert up == frozenset(F.domain) - corr.lower_inverse(F, comp)
    assert all(x in low for x in up if F(x))
    assert corr.is_measurable(F)


def _gluing(rng):
    F1, F2, A, delta = gen.random_glue_triple(rng)
    H = corr.glue(F1, F2, A)
    dp = corr.glue_modulus(F1, A, delta)
    assert corr.usc_modulus(H, dp) and corr.lsc_modulus(H, dp)


def _selection_count(rng):
    sp = gen.random_space(rng, rng.randint(1, 5))
    F = gen.random_correspondence(rng, sp, ("u", "v", "w"), empty_prob=0.15)
    sels = list(selection.enumerate_selections(F, sp, ae=False))
    expect = math.prod(len(F(c[0])) for c in sp.cells)
    assert len(sels) == expect == selection.selection_count(F, sp, ae=False)
    assert bool(sels) == all(F(c[0]) for c in sp.cells)
    assert all(g.is_selection_of(F) for g in sels)


def _distribution_set(rng):
    sp = gen.random_space(rng, rng.randint(1, 4))
    F = gen.random_correspondence(rng, sp, ("u", "v", "w"))
    D = selection.distribution_set(F, sp)
    got = [g.distribution() for g in selection.enumerate_selections(F, sp)]
    assert all(D.contains(d, 1e-12) for d in got)
    assert all(any(measure.tv_distance(m, d) <= 1e-12 for d in got) for m in D)


def _dsl_round_trip(rng):
    decl = dsl.Declaration({1: frozenset({"a", "b"}), 2: frozenset({"x"})}, frozenset({"c1", "c2"}))
    e = dsl.random_predicate(rng, decl, rng.randint(1, 5))
    assert dsl.parse(dsl.print_canonical(e), decl) == e


def _payoff_affine(rng):
    g1 = gen.random_game(rng, 16)
    w2 = gen.random_weights(rng, len(g1.joint.joint.atoms))
    joint2 = measure.ProductSpace.from_weights(g1.joint.factors, dict(zip(g1.joint.joint.atoms, w2)))
    t = rng.random()
    mixed_w = [t * a + (1 - t) * b for a, b in zip(g1.joint.joint.weights, w2)]
    mixed = measure.ProductSpace.from_weights(g1.joint.factors, dict(zip(g1.joint.joint.atoms, mixed_w)))

    def rebuild(joint):
        return game.PrivateInfoGame.build(
            [sp.cells for sp in g1.types], g1.shocks, g1.actions,
            [{a: g1.constraints[i](a) for a in g1.types[i].atoms} for i in range(g1.n_players)],
            g1.payoffs, joint, [sp.cell_ids for sp in g1.types])

    g2, gm = rebuild(joint2), rebuild(mixed)
    prof = tuple(next(iter(g1.strategies(i))) for i in range(g1.n_players))
    profs = [tuple(selection.Selection(g.types[i], g.actions[i], prof[i].choice) for i in range(g.n_players))
             for g in (g1, g2, gm)]
    for i in range(g1.n_players):
        lhs = game.expected_payoff(gm, profs[2], i)
        rhs = t * game.expected_payoff(g1, profs[0], i) + (1 - t) * game.expected_payoff(g2, profs[1], i)
        assert abs(lhs - rhs) <= 1e-12


def _nash_output(rng):
    g = gen.random_game(rng, 32)
    s = game.find_nash(g)
    if s.profile is not None:
        assert game.is_nash(g, s.profile, eps=0.0).is_nash
        for i in range(g.n_players):
            assert game.pointwise_gain(g, s.profile, i) <= 1e-9


def _switch_inside_alpha(rng):
    e = gen.random_economy(rng)
    lam = gen.random_lambdas(rng, e)
    for i in range(e.n_players):
        for z in e.types[i].atoms:
            try:
                F = economy.switch_F(e, i, z, lam)
            except economy.HypothesisError:
                continue
            assert F <= economy.eval_correspondence(e, "alpha", i, z, lam)


def _cell_measurability(rng):
    e = gen.random_economy(rng, max_atoms=3)
    lam = gen.random_lambdas(rng, e)
    for i in range(e.n_players):
        for cell in e.types[i].cells:
            vals = {economy.eval_correspondence(e, "P", i, z, lam) for z in cell}
            assert len(vals) == 1


def _certificate_soundness(rng):
    e = gen.random_economy(rng)
    s = economy.find_equilibrium(e)
    if s.found:
        prof = s.certificate.profile
        lam = tuple(measure.pushforward(e.types[i], prof[i].choice, e.actions[i]) for i in range(e.n_players))
        for i, g in enumerate(prof):
            for cid, cell in e.positive_cells(i):
                z = cell[0]
                alpha = e.alpha[i](e.labels[i][cid], lam)
                P = e.P[i](e.labels[i][cid], lam)
                assert g(z) in alpha and not (alpha & P)


def _phi_constant(rng):
    e = gen.random_economy(rng)
    empty = tuple(dsl.CorrespondenceSpec.constant(a, []) for a in e.actions)
    full = tuple(dsl.CorrespondenceSpec.constant(a, a) for a in e.actions)
    e0 = economy.EconomyInstance(e.types, e.actions, e.constraints, full, empty, e.joint)
    lam = gen.random_lambdas(rng, e0)
    got = economy.phi(e0, lam)
    for i in range(e0.n_players):
        assert got[i].members == economy.build_DDi(e0, i).members


SUITES = {
    "measure.pushforward": _pushforward_total,
    "measure.refine_atomicity": _refine_atomicity,
    "measure.product_independence": _product_independent,
    "correspondence.inverse_duality": _inverse_duality,
    "correspondence.gluing": _gluing,
    "selection.count": _selection_count,
    "selection.distribution_set": _distribution_set,
    "dsl.round_trip": _dsl_round_trip,
    "game.payoff_affine": _payoff_affine,
    "game.nash_output": _nash_output,
    "economy.switch_inside_alpha": _switch_inside_alpha,
    "economy.cell_measurability": _cell_measurability,
    "economy.certificate_soundness": _certificate_soundness,
    "economy.phi_constant": _phi_constant,
}


def run(cases: int = 50, seed: int = 0, suites=None) -> dict:
    """``{suite: {"passed", "failed", "first_failure"}}``; each suite gets its
    own generator seeded from ``seed`` and the suite name."""
    out = {}
    for name in suites or SUITES:
        check = SUITES[name]
        rng = random.Random(f"{seed}:{name}")
        passed, failed, first = 0, 0, None
        for k in range(cases):
            try:
                check(rng)
                passed += 1
            except Exception as exc:  # a crash counts as a failed case
                failed += 1
                if first is None:
                    line = traceback.extract_tb(exc.__traceback__)[-1].lineno
                    first = f"case {k}: {type(exc).__name__} at line {line}: {exc}".rstrip(": ")
        out[name] = {"passed": passed, "failed": failed, "first_failure": first}
    return out
