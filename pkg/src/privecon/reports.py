"""Command results as plain JSON-ready dictionaries.

Every function here is deterministic for a fixed instance and config, so the
serialized report is byte-stable. Players appear 1-based.
"""
from __future__ import annotations

import math

from . import economy as econ_mod
from . import game as game_mod
from .instance import Instance, SemanticError, SolverConfig, digest
from .measure import Distribution
from .selection import BudgetExceeded, convexification_gap, distribution_set, purify


def jsonable(obj):
    """Recursively convert results to JSON values; non-finite floats become strings."""
    if isinstance(obj, Distribution):
        return {str(y): m for y, m in zip(obj.support, obj.mass)}
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else ("inf" if obj > 0 else "-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(v) for v in obj)
    return obj


_PLAYER_KEYS = ("player", "worst_player")


def _one_based(obj):
    if isinstance(obj, dict):
        return {k: (v + 1 if k in _PLAYER_KEYS and isinstance(v, int) and not isinstance(v, bool) else _one_based(v))
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [_one_based(v) for v in obj]
    return obj


def _profile(profile) -> list:
    return [g.by_cell() for g in profile]


def certificate_dict(cert: econ_mod.EquilibriumCertificate) -> dict:
    return {"profile": _profile(cert.profile),
            "lambdas": list(cert.lambdas),
            "checks": [{"player": c.player, "cell": c.cell, "action": c.action, "feasible": c.feasible,
                        "in_alpha": c.in_alpha, "alpha_P_empty": c.alpha_P_empty} for c in cert.checks]}


def _nash_dict(rep: game_mod.NashReport | None) -> dict | None:
    if rep is None:
        return None
    return {"is_nash": rep.is_nash, "max_gain": rep.max_gain, "worst_player": rep.worst_player,
            "deviation": rep.deviation.by_cell() if rep.deviation is not None else None,
            "gains": list(rep.gains), "complete": rep.complete, "methods": list(rep.methods)}


def _require(inst: Instance, kind: str, command: str) -> None:
    if inst.kind != kind:
        raise SemanticError(f"'{command}' works on {kind} instances, not on a {inst.kind}")


def solve(inst: Instance, cfg: SolverConfig) -> dict:
    _require(inst, "economy", "solve")
    m = inst.solved_model(cfg)
    s = econ_mod.find_equilibrium(m, cfg.budget, cfg.tol, cfg.strategy, cfg.max_iter, cfg.mesh,
                                  cfg.damping, cfg.seed)
    out = {"status": "found" if s.found else "none", "complete": s.complete, "strategy": s.strategy,
           "scanned": s.scanned, "fixed_points": s.fixed_points, "hypothesis_violations": s.violations,
           "certificate": None}
    if s.found:
        out["certificate"] = certificate_dict(s.certificate)
        out["reverified"] = econ_mod.is_equilibrium(m, s.certificate.profile) is not None
    return out


def solve_game(inst: Instance, cfg: SolverConfig) -> dict:
    _require(inst, "game", "solve-game")
    g = inst.solved_model(cfg)
    s = game_mod.find_nash(g, cfg.budget, cfg.max_iter, cfg.eps)
    return {"status": "found" if s.profile is not None else "none", "complete": s.complete, "method": s.method,
            "scanned": s.scanned, "profile": _profile(s.profile) if s.profile is not None else None,
            "nash": _nash_dict(s.report)}


def verify(inst: Instance, cfg: SolverConfig, profile) -> dict:
    m = inst.solved_model(cfg)
    if inst.kind == "game":
        rep = game_mod.is_nash(m, profile, cfg.eps, cfg.budget)
        return {"verdict": "valid" if rep.is_nash else "invalid", "profile": _profile(profile),
                "nash": _nash_dict(rep)}
    v = econ_mod.check_equilibrium(m, profile)
    out = {"verdict": "valid" if v.valid else "invalid", "profile": _profile(profile), "lambdas": list(v.lambdas),
           "offending": [{"player": i, "cell": c} for i, c in v.offending],
           "checks": certificate_dict(econ_mod.EquilibriumCertificate(profile, v.lambdas, v.checks))["checks"]}
    return out


def audit(inst: Instance, cfg: SolverConfig) -> dict:
    m = inst.solved_model(cfg)
    if inst.kind == "game":
        return game_mod.audit_theorem2(m)
    return econ_mod.audit_theorem3(m, cfg.budget, cfg.audit_budget, cfg.mesh)


def purify_player(inst: Instance, cfg: SolverConfig, player: int, target) -> dict:
    m = inst.solved_model(cfg)
    if not 1 <= player <= m.n_players:
        raise SemanticError(f"player must be between 1 and {m.n_players}")
    i = player - 1
    actions = m.actions[i]
    if isinstance(target, dict):
        unknown = [a for a in target if a not in actions]
        if unknown:
            raise SemanticError(f"target mentions undeclared action {unknown[0]!r}")
        mass = [float(target.get(a, 0.0)) for a in actions]
    else:
        if len(target) != len(actions):
            raise SemanticError(f"target needs {len(actions)} masses")
        mass = [float(x) for x in target]
    dist = Distribution(actions, mass)
    res = purify(m.constraints[i], m.types[i], dist, cfg.tol)
    return {"player": i, "target": dist, "selection": res.selection.by_cell(),
            "distribution": res.selection.distribution(), "error": res.error, "bound": res.bound,
            "within_bound": res.error <= res.bound + 1e-12, "method": res.method}


def refine_study(inst: Instance, cfg: SolverConfig, ks) -> dict:
    rows = []
    for k in ks:
        if k < 1:
            raise SemanticError("refinement factors must be positive")
        c = cfg.override(refine=k * cfg.refine)
        m = inst.solved_model(c)
        gaps = []
        for i in range(m.n_players):
            D = econ_mod.build_DDi(m, i, c.budget, c.seed) if inst.kind == "economy" else \
                distribution_set(m.constraints[i], m.types[i], c.budget, c.seed)
            gaps.append(convexification_gap(D) if D.exact else None)
        if inst.kind == "economy":
            try:
                found = econ_mod.find_equilibrium(m, c.budget, c.tol, c.strategy, c.max_iter, c.mesh,
                                                  c.damping, c.seed).found
            except BudgetExceeded:
                found = None
        else:
            found = game_mod.find_nash(m, c.budget, c.max_iter, c.eps).profile is not None
        known = [g for g in gaps if g is not None]
        rows.append({"k": k, "atomicity_level": max(sp.atomicity_level() for sp in m.types),
                     "gaps": gaps, "convexification_gap": max(known) if len(known) == len(gaps) else None,
                     "equilibrium_found": found})
    return {"rows": rows}


def report(inst: Instance, cfg: SolverConfig, command: str, result: dict, audit_section: dict | None = None) -> dict:
    out = {"command": command,
           "instance": {"kind": inst.kind, "sha256": digest(inst), "players": list(inst.names)},
           "config": cfg.as_dict(),
           "result": _one_based(jsonable(result))}
    if audit_section is not None:
        out["audit"] = _one_based(jsonable(audit_section))
    return out
