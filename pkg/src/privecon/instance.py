"""Instance and profile files.

An instance is a JSON document validated against the shipped schema, then
checked semantically (declared identifiers, weights, predicates) while the
model is built. Players are numbered from 1 in files and reports, matching
``lam[j][...]`` in predicates.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import economy as econ_mod
from . import game as game_mod
from .dsl import CorrespondenceSpec, Declaration, DSLError, parse, print_canonical
from .measure import FiniteProbSpace, ProductSpace


class SchemaError(ValueError):
    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"


class SemanticError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    budget: int = 10**6
    audit_budget: int = 10_000
    tol: float = 1e-9
    eps: float = 1e-9
    refine: int = 1
    theorem4: bool = False
    seed: int = 0
    mesh: float = 1 / 16
    max_iter: int = 200
    damping: float = 1.0
    strategy: str = "auto"

    def as_dict(self) -> dict:
        return asdict(self)

    def override(self, **changes) -> "SolverConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


@dataclass(frozen=True)
class Instance:
    kind: str
    names: tuple
    model: object
    config: SolverConfig
    description: str = ""

    def solved_model(self, config: SolverConfig | None = None):
        """The model after refinement and selector-mode switches from ``config``."""
        cfg = config or self.config
        m = self.model
        if self.kind == "economy":
            if cfg.theorem4 != m.theorem4:
                if cfg.theorem4 and m.G is None:
                    raise SemanticError("selector mode needs a G block for every player")
                m = m.with_theorem4(cfg.theorem4)
            return econ_mod.refine(m, cfg.refine)
        return game_mod.refine(m, cfg.refine)


def _schema(name: str) -> dict:
    return json.loads(resources.files("privecon").joinpath("schemas", name).read_text())


def _validate(doc, schema_name: str) -> None:
    validator = jsonschema.Draft202012Validator(_schema(schema_name))
    e = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if e is not None:
        pointer = "".join(f"/{p}" for p in e.absolute_path)
        raise SchemaError(e.message, pointer)


def _weight(w) -> float:
    return float(Fraction(w)) if isinstance(w, str) else float(w)


def _space_cells(block: dict, where: str):
    atoms = list(block["atoms"])
    cells = block.get("cells")
    if cells is None:
        return atoms, [[a] for a in atoms], [str(a) for a in atoms]
    for cid, members in cells.items():
        for a in members:
            if a not in atoms:
                raise SemanticError(f"{where}/cells/{cid}: undeclared atom {a!r}")
    return atoms, [list(v) for v in cells.values()], list(cells)


def _product_mu(doc: dict) -> dict:
    factors = []
    for k, p in enumerate(doc["players"]):
        blocks = [("types", p["types"])]
        if doc["kind"] == "game":
            blocks.append(("shocks", p.get("shocks", {})))
        for name, b in blocks:
            if "weights" not in b:
                raise SemanticError(f"/players/{k}/{name}: 'mu: product' needs weights")
            if len(b["weights"]) != len(b["atoms"]):
                raise SemanticError(f"/players/{k}/{name}: one weight per atom expected")
            factors.append(list(zip(b["atoms"], (_weight(w) for w in b["weights"]))))
    out = {}
    for combo in itertools.product(*factors):
        w = 1.0
        for _, x in combo:
            w *= x
        out[tuple(a for a, _ in combo)] = w
    return out


def _mu(doc: dict, factors: list) -> ProductSpace:
    if doc["mu"] == "product":
        weights = _product_mu(doc)
    else:
        weights = {}
        for k, entry in enumerate(doc["mu"]):
            key = tuple(entry["atoms"])
            if len(key) != len(factors):
                raise SemanticError(f"/mu/{k}/atoms: expected {len(factors)} coordinates")
            for c, a in enumerate(key):
                if a not in factors[c]:
                    raise SemanticError(f"/mu/{k}/atoms/{c}: undeclared atom {a!r}")
            if key in weights:
                raise SemanticError(f"/mu/{k}: duplicate atom tuple")
            weights[key] = _weight(entry["weight"])
    try:
        return ProductSpace.from_weights(factors, weights)
    except ValueError as e:
        raise SemanticError(f"/mu: {e}") from None


def _constraint(p: dict, k: int, atoms, cells, ids) -> dict:
    D = p["D"]
    for cid in D:
        if cid not in ids:
            raise SemanticError(f"/players/{k}/D/{cid}: undeclared cell")
    out = {}
    for cid, members in zip(ids, cells):
        if cid not in D:
            raise SemanticError(f"/players/{k}/D: no entry for cell {cid!r}")
        for a in D[cid]:
            if a not in p["actions"]:
                raise SemanticError(f"/players/{k}/D/{cid}: undeclared action {a!r}")
        if not D[cid]:
            raise SemanticError(f"/players/{k}/D/{cid}: empty constraint")
        for atom in members:
            out[atom] = list(D[cid])
    return out


def _predicates(p: dict, k: int, which: str, decl: Declaration) -> CorrespondenceSpec:
    texts = p[which]
    for a in texts:
        if a not in p["actions"]:
            raise SemanticError(f"/players/{k}/{which}/{a}: undeclared action")
    for a in p["actions"]:
        if a not in texts:
            raise SemanticError(f"/players/{k}/{which}: no predicate for action {a!r}")
        try:
            parse(texts[a], decl)
        except DSLError as e:
            raise SemanticError(f"/players/{k}/{which}/{a}: {e}") from None
    return CorrespondenceSpec.from_texts(p["actions"], texts, decl)


def from_document(doc: dict) -> Instance:
    _validate(doc, "instance.schema.json")
    kind = doc["kind"]
    players = doc["players"]
    names = tuple(p.get("name", f"player{k + 1}") for k, p in enumerate(players))
    cfg = SolverConfig().override(**doc.get("solver", {}))
    spaces = [_space_cells(p["types"], f"/players/{k}/types") for k, p in enumerate(players)]
    for k, (atoms, cells, ids) in enumerate(spaces):
        covered = [a for c in cells for a in c]
        if sorted(covered) != sorted(atoms) or len(covered) != len(set(covered)):
            raise SemanticError(f"/players/{k}/types/cells: cells must partition the atoms")
    cons = [_constraint(p, k, *spaces[k]) for k, p in enumerate(players)]
    try:
        if kind == "game":
            model = _build_game(players, spaces, cons, doc)
        else:
            model = _build_economy(players, spaces, cons, doc, cfg.theorem4)
    except (game_mod.GameError, econ_mod.EconomyError) as e:
        raise SemanticError(str(e)) from None
    return Instance(kind, names, model, cfg, doc.get("description", ""))


def _build_game(players, spaces, cons, doc) -> game_mod.PrivateInfoGame:
    factors, shocks, payoffs = [], [], []
    for k, p in enumerate(players):
        for key in ("shocks", "payoff"):
            if key not in p:
                raise SemanticError(f"/players/{k}: game players need '{key}'")
        for key in ("alpha", "P", "G"):
            if key in p:
                raise SemanticError(f"/players/{k}/{key}: predicates belong to economies")
        factors += [spaces[k][0], list(p["shocks"]["atoms"])]
        shocks.append(list(p["shocks"]["atoms"]))
    action_sets = [p["actions"] for p in players]
    for k, p in enumerate(players):
        table = {}
        for r, row in enumerate(p["payoff"]):
            prof = tuple(row["profile"])
            if len(prof) != len(players) or any(a not in action_sets[j] for j, a in enumerate(prof)):
                raise SemanticError(f"/players/{k}/payoff/{r}/profile: not an action profile")
            if row["shock"] not in shocks[k]:
                raise SemanticError(f"/players/{k}/payoff/{r}/shock: undeclared shock {row['shock']!r}")
            if (prof, row["shock"]) in table:
                raise SemanticError(f"/players/{k}/payoff/{r}: duplicate row")
            table[(prof, row["shock"])] = float(row["u"])
        payoffs.append(table)
    joint = _mu(doc, factors)
    return game_mod.PrivateInfoGame.build([s[1] for s in spaces], shocks, action_sets, cons, payoffs, joint,
                                          [s[2] for s in spaces])


def _build_economy(players, spaces, cons, doc, theorem4) -> econ_mod.EconomyInstance:
    decl_actions = {k + 1: frozenset(p["actions"]) for k, p in enumerate(players)}
    alpha, P, G = [], [], []
    has_G = ["G" in p for p in players]
    if any(has_G) and not all(has_G):
        raise SemanticError("/players: G must be given for every player or for none")
    for k, p in enumerate(players):
        for key in ("shocks", "payoff"):
            if key in p:
                raise SemanticError(f"/players/{k}/{key}: shocks and payoffs belong to games")
        for key in ("alpha", "P"):
            if key not in p:
                raise SemanticError(f"/players/{k}: economy players need '{key}'")
        decl = Declaration(decl_actions, frozenset(spaces[k][2]))
        alpha.append(_predicates(p, k, "alpha", decl))
        P.append(_predicates(p, k, "P", decl))
        if has_G[0]:
            G.append(_predicates(p, k, "G", decl))
    if theorem4 and not has_G[0]:
        raise SemanticError("/solver/theorem4: selector mode needs a G block for every player")
    joint = _mu(doc, [s[0] for s in spaces])
    return econ_mod.EconomyInstance.build([s[1] for s in spaces], [p["actions"] for p in players], cons,
                                          alpha, P, joint, G if has_G[0] else None, theorem4,
                                          [s[2] for s in spaces])


def loads(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg} at line {e.lineno} column {e.colno}") from None
    return from_document(doc)


def load(path) -> Instance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"cannot read instance: {e.strerror}") from None
    return loads(text)


def _space_block(sp: FiniteProbSpace) -> dict:
    return {"atoms": list(sp.atoms), "cells": {cid: list(c) for cid, c in zip(sp.cell_ids, sp.cells)}}


def to_document(inst: Instance) -> dict:
    """Normalized document: explicit cells, explicit solver block, canonical
    predicate text and the joint law as a list of positive-weight tuples."""
    m = inst.model
    players = []
    for i in range(m.n_players):
        sp = m.types[i]
        D = m.constraints[i]
        block = {"name": inst.names[i], "types": _space_block(sp), "actions": list(m.actions[i]),
                 "D": {cid: [a for a in m.actions[i] if a in D(c[0])] for cid, c in zip(sp.cell_ids, sp.cells)}}
        if inst.kind == "game":
            block["shocks"] = {"atoms": list(m.shocks[i])}
            block["payoff"] = [{"profile": list(a), "shock": x, "u": m.payoffs[i][(a, x)]}
                               for a in itertools.product(*m.actions) for x in m.shocks[i]]
        else:
            for key, specs in (("alpha", m.alpha), ("P", m.P), ("G", m.G)):
                if specs is not None:
                    block[key] = {a: print_canonical(e) for a, e in zip(specs[i].actions, specs[i].exprs)}
        players.append(block)
    doc = {"kind": inst.kind, "players": players,
           "mu": [{"atoms": list(o), "weight": w} for o, w in m.joint.items()],
           "solver": inst.config.as_dict()}
    if inst.description:
        doc["description"] = inst.description
    return doc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def save(inst: Instance, path) -> None:
    Path(path).write_text(dumps(to_document(inst)), encoding="utf-8")


def digest(inst: Instance) -> str:
    return hashlib.sha256(dumps(to_document(inst)).encode("utf-8")).hexdigest()


def load_profile(path, model) -> tuple:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise SchemaError(f"cannot read profile: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg} at line {e.lineno} column {e.colno}") from None
    return profile_from_document(doc, model)


def profile_from_document(doc, model) -> tuple:
    _validate(doc, "profile.schema.json")
    tables = doc["profile"]
    if len(tables) != len(model.types):
        raise SemanticError(f"/profile: expected {len(model.types)} players, got {len(tables)}")
    for k, table in enumerate(tables):
        for cid in table:
            if cid not in model.types[k].cell_ids:
                raise SemanticError(f"/profile/{k}/{cid}: undeclared cell")
    try:
        return model.profile_from_cells(tables)
    except ValueError as e:
        raise SemanticError(f"/profile: {e}") from None


def profile_document(profile: tuple) -> dict:
    return {"profile": [g.by_cell() for g in profile]}
