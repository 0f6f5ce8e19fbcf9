import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from privecon import generators as gen
from privecon.dsl import CorrespondenceSpec, Declaration
from privecon.economy import (EconomyInstance, HypothesisError, audit_theorem3, build_DDi, build_Ui,
                              check_equilibrium, eval_correspondence, find_equilibrium, is_equilibrium, phi, refine,
                              switch_F)
from privecon.measure import Distribution, ProductSpace
from privecon.selection import BudgetExceeded, convexification_gap, enumerate_selections
from privecon.instance import load

from oracles import economy_equilibria as oracle_equilibria


def make_econ(atoms, actions, alpha, P, D=None, G=None, theorem4=False, weights=None):
    """Singleton cells named after their atoms; predicates given as
    per-player ``{action: text}`` tables."""
    n = len(atoms)
    if weights is None:
        combos = list(itertools.product(*atoms))
        weights = {c: 1 / len(combos) for c in combos}
    joint = ProductSpace.from_weights(atoms, weights)
    decl = {i + 1: frozenset(actions[i]) for i in range(n)}
    def specs(tables):
        return [CorrespondenceSpec.from_texts(actions[i], tables[i], Declaration(decl, frozenset(atoms[i])))
                for i in range(n)]
    D = D or [{z: actions[i] for z in atoms[i]} for i in range(n)]
    return EconomyInstance.build([[[z] for z in atoms[i]] for i in range(n)], actions, D, specs(alpha), specs(P),
                                 joint, None if G is None else specs(G), theorem4,
                                 cell_ids=atoms)


def const(actions, texts="true"):
    return [{a: texts for a in acts} for acts in actions]


TH = dict(atoms=[["z1", "z2"]], actions=[("a", "b")], alpha=const([("a", "b")]))


def threshold():
    return make_econ(P=[{"a": "lam[1][a] < 0.5", "b": "lam[1][a] < 0.5"}], **TH)


def test_build_DDi_examples():
    e = make_econ([["z1", "z2"]], [("a", "b")], const([("a", "b")]), const([("a", "b")], "false"),
                  D=[{"z1": ["a"], "z2": ["b"]}])
    assert len(build_DDi(e, 0)) == 1
    e = make_econ([["z1", "z2"]], [("a", "b")], const([("a", "b")]), const([("a", "b")], "false"))
    assert [d.mass for d in build_DDi(e, 0)] == [(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)]
    canon = load("instances/canonical_two_action.json").model
    assert convexification_gap(build_DDi(refine(canon, 10), 0)) == pytest.approx(1 / 20)


def test_eval_examples():
    lam = (Distribution(("a", "b"), (0.5, 0.5)), Distribution(("a", "b"), (0.0, 1.0)))
    e = make_econ([["z"], ["y"]], [("a", "b"), ("a", "b")],
                  [{"a": "lam[2][b] <= 0.5", "b": "true"}, {"a": "true", "b": "true"}],
                  const([("a", "b")] * 2, "false"))
    assert eval_correspondence(e, "alpha", 1, "y", lam) == {"a", "b"}
    assert eval_correspondence(e, "P", 0, "z", lam) == frozenset()
    assert eval_correspondence(e, "alpha", 0, "z", lam) == {"b"}


def test_is_equilibrium_examples():
    free = make_econ(P=const([("a", "b")], "false"), **TH)
    assert all(is_equilibrium(free, p) is not None for p in free_profiles(free))
    full = make_econ(P=const([("a", "b")]), **TH)
    assert all(is_equilibrium(full, p) is None for p in free_profiles(full))
    th = threshold()
    good = th.profile_from_cells([{"z1": "a", "z2": "a"}])
    bad = th.profile_from_cells([{"z1": "b", "z2": "b"}])
    cert = is_equilibrium(th, good)
    assert cert is not None and cert.lambdas[0]["a"] == 1.0
    assert is_equilibrium(th, bad) is None
    v = check_equilibrium(th, bad)
    assert not v.valid and v.offending == [(0, "z1"), (0, "z2")]


def free_profiles(e):
    return itertools.product(*[list(enumerate_selections(e.constraints[i], e.types[i])) for i in range(e.n_players)])


def lam1(a):
    return (Distribution(("a", "b"), (a, 1 - a)),)


def test_build_Ui_examples():
    grid = [lam1(x / 4) for x in range(5)]
    free = make_econ(P=const([("a", "b")], "false"), **TH)
    assert len(build_Ui(free, 0, grid, 0.3).members) == 10
    same = make_econ(P=const([("a", "b")]), **TH)
    assert not build_Ui(same, 0, grid, 0.3).members
    u = build_Ui(threshold(), 0, grid, 0.3)
    assert u.members == {(c, k) for c in ("z1", "z2") for k in (2, 3, 4)}
    # the boundary point 0.5 has a non-member within 0.3, so the finite openness test flags it
    assert (("z1", 2) not in u.interior) and not u.is_open


def test_switch_examples():
    free = make_econ(P=const([("a", "b")], "false"), **TH)
    assert switch_F(free, 0, "z1", lam1(0.3)) == {"a", "b"}
    e = make_econ(P=[{"a": "false", "b": "true"}], **TH)
    assert switch_F(e, 0, "z1", lam1(0.3)) == {"b"}
    sel = make_econ(P=const([("a", "b")]), G=[{"a": "false", "b": "true"}], theorem4=True, **TH)
    assert switch_F(sel, 0, "z1", lam1(0.3)) == {"b"}
    hole = make_econ(P=const([("a", "b")]), G=[{"a": "false", "b": "false"}], theorem4=True, **TH)
    with pytest.raises(HypothesisError) as info:
        switch_F(hole, 0, "z1", lam1(0.3))
    assert (info.value.player, info.value.cell) == (0, "z1")


def test_phi_examples():
    free = make_econ(P=const([("a", "b")], "false"), **TH)
    for x in (0.0, 0.5, 1.0):
        assert phi(free, lam1(x))[0].members == build_DDi(free, 0).members
    single = make_econ(P=const([("a", "b")]), alpha=[{"a": "true", "b": "false"}], atoms=TH["atoms"],
                       actions=TH["actions"])
    assert len(phi(single, lam1(0.5))[0]) == 1
    th = make_econ(P=[{"a": "lam[1][a] < 0.5", "b": "lam[1][a] < 0.5"}], atoms=[["z1", "z2"]], actions=[("a", "b")],
                   alpha=[{"a": "true", "b": "zcell in {z2}"}])
    got = phi(th, lam1(1.0))[0]
    by_hand = {g.distribution().mass for g in enumerate_selections(
        th.constraints[0].__class__(("z1", "z2"), ("a", "b"), {"z1": ["a"], "z2": ["a", "b"]}), th.types[0])}
    assert {m.mass for m in got} == by_hand


def test_find_equilibrium_examples():
    free = make_econ(P=const([("a", "b")], "false"), **TH)
    s1, s2 = find_equilibrium(free), find_equilibrium(free)
    assert s1.found and [g.choice for g in s1.certificate.profile] == [g.choice for g in s2.certificate.profile]

    th = threshold()
    s = find_equilibrium(th)
    assert s.found and s.complete
    oracle = oracle_equilibria(th)
    assert [g.by_cell() for g in s.certificate.profile] in oracle

    same = make_econ(P=const([("a", "b")]), **TH)
    s = find_equilibrium(same)
    assert not s.found and s.complete and s.strategy == "exhaustive"
    assert oracle_equilibria(same) == []


def test_forced_exhaustive_over_budget():
    with pytest.raises(BudgetExceeded):
        find_equilibrium(threshold(), budget=2, strategy="exhaustive")
    s = find_equilibrium(threshold(), budget=2)
    assert s.strategy == "iterative" and not s.complete
    assert not s.found or is_equilibrium(threshold(), s.certificate.profile) is not None


def test_audit_examples():
    free = make_econ(P=const([("a", "b")], "false"), **TH)
    a = audit_theorem3(free)
    assert a["T3d"][0]["nonempty"] is False
    assert a["T3c"][0]["usc"] and a["T3c"][0]["nonempty"]
    assert a["T3e"]["holds"] and a["T3e"]["complete"]
    base = a["T3a"][0]["atomicity_level"]
    assert audit_theorem3(refine(free, 8))["T3a"][0]["atomicity_level"] == pytest.approx(base / 8)
    mixed = audit_theorem3(threshold())
    assert mixed["T3d"][0]["form"] == "mixed"
    assert not mixed["T3e"]["holds"]


def test_refine_keeps_parent_labels():
    r = refine(threshold(), 3)
    assert len(r.types[0].atoms) == 6
    assert set(r.labels[0].values()) == {"z1", "z2"}
    assert oracle_equilibria(r) and find_equilibrium(r).found


def small_econ(seed):
    return gen.random_economy(random.Random(seed))


@given(st.integers(0, 10**9))
def test_switch_inside_alpha(seed):
    rng = random.Random(seed)
    e = gen.random_economy(rng)
    lam = gen.random_lambdas(rng, e)
    for i in range(e.n_players):
        for z in e.types[i].atoms:
            try:
                F = switch_F(e, i, z, lam)
            except HypothesisError:
                continue
            assert F and F <= eval_correspondence(e, "alpha", i, z, lam)


@given(st.integers(0, 10**9))
def test_types_in_one_cell_agree(seed):
    rng = random.Random(seed)
    e = gen.random_economy(rng, max_atoms=3)
    lam = gen.random_lambdas(rng, e)
    for i in range(e.n_players):
        for cell in e.types[i].cells:
            for which in ("alpha", "P"):
                assert len({eval_correspondence(e, which, i, z, lam) for z in cell}) == 1


@given(st.integers(0, 10**9))
def test_search_agrees_with_profile_oracle(seed):
    e = small_econ(seed)
    s = find_equilibrium(e)
    oracle = oracle_equilibria(e)
    if s.found:
        assert [g.by_cell() for g in s.certificate.profile] in oracle
    if s.complete and oracle:
        assert s.found


@given(st.integers(0, 10**9))
def test_certificates_reverify(seed):
    e = small_econ(seed)
    s = find_equilibrium(e)
    if s.found:
        cert = s.certificate
        again = is_equilibrium(e, cert.profile)
        assert again is not None
        assert [d.mass for d in again.lambdas] == [d.mass for d in cert.lambdas]
        assert all(c.passed for c in again.checks)


@given(st.integers(0, 10**9))
def test_phi_constant_when_P_empty(seed):
    rng = random.Random(seed)
    e = gen.random_economy(rng)
    empty = tuple(CorrespondenceSpec.constant(a, []) for a in e.actions)
    full = tuple(CorrespondenceSpec.constant(a, a) for a in e.actions)
    e0 = EconomyInstance(e.types, e.actions, e.constraints, full, empty, e.joint)
    for _ in range(3):
        got = phi(e0, gen.random_lambdas(rng, e0))
        for i in range(e0.n_players):
            assert got[i].members == build_DDi(e0, i).members
