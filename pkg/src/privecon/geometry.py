"""Convex-hull computations for finite sets of distributions.

All distances are total variation, ``tv(p, q) = sum_y max(0, q_y - p_y)`` on
the simplex. Hull membership is a linear program; the gap between a finite
set and its hull is a max-min problem. It is solved exactly in one
dimension; otherwise the simplex is cut into boxes on which every distance to
a member is linear, and each box that can still beat the incumbent is one
linear program. When there are too many boxes, a mixed-integer program with
lazily added members takes over.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

_LP_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def tv_to_set(points: np.ndarray, members: np.ndarray) -> np.ndarray:
    """tv distance from each row of ``points`` to its nearest member."""
    points = np.atleast_2d(points)
    d = 0.5 * np.abs(points[:, None, :] - members[None, :, :]).sum(axis=2)
    return d.min(axis=1)


def hull_distance(target, members) -> float:
    """tv distance from ``target`` to the convex hull of ``members``."""
    M = np.asarray(members, dtype=float)
    t = np.asarray(target, dtype=float)
    m, d = M.shape
    # variables: w (m), e (d); minimise sum(e) / 2
    c = np.concatenate([np.zeros(m), 0.5 * np.ones(d)])
    A_ub = np.block([[M.T, -np.eye(d)], [-M.T, -np.eye(d)]])
    b_ub = np.concatenate([t, -t])
    A_eq = np.concatenate([np.ones(m), np.zeros(d)])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (m + d), method="highs", options=_LP_OPTS)
    if res.status != 0:
        raise RuntimeError(f"hull distance LP failed: {res.message}")
    return max(0.0, float(res.fun))


def in_hull(point, points, tol: float = 1e-9) -> bool:
    """Exact-arithmetic-free membership test in the hull of arbitrary vectors."""
    P = np.asarray(points, dtype=float)
    x = np.asarray(point, dtype=float)
    m = P.shape[0]
    A_eq = np.vstack([P.T, np.ones(m)])
    b_eq = np.concatenate([x, [1.0]])
    res = linprog(np.zeros(m), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * m,
                  method="highs", options=_LP_OPTS)
    if res.status != 0:
        return False
    return bool(np.abs(P.T @ res.x - x).max() <= tol)


def _dedupe(M: np.ndarray) -> np.ndarray:
    keys = {}
    for row in M:
        keys.setdefault(tuple(np.round(row, 12)), row)
    return np.array(list(keys.values()))


def _gap_1d(x: np.ndarray) -> float:
    x = np.sort(x)
    return float(np.max(np.diff(x), initial=0.0)) / 2.0


def _solve_milp(M: np.ndarray, S: list[int]):
    """max t over p in conv(M) with t <= tv(p, M[s]) for s in S."""
    m, d = M.shape
    k = len(S)
    nw, np_, nt, ns = m, d, 1, k * d
    n = nw + np_ + nt + 2 * ns
    iw, ip, it, is_, ib = 0, nw, nw + np_, nw + np_ + 1, nw + np_ + 1 + ns
    rows, lo, hi = [], [], []

    def row():
        r = np.zeros(n)
        rows.append(r)
        return r

    r = row(); r[iw:iw + m] = 1.0; lo.append(1.0); hi.append(1.0)
    for y in range(d):
        r = row(); r[iw:iw + m] = -M[:, y]; r[ip + y] = 1.0; lo.append(0.0); hi.append(0.0)
    for a, s in enumerate(S):
        r = row(); r[it] = 1.0
        for y in range(d):
            r[is_ + a * d + y] = -1.0
        lo.append(-np.inf); hi.append(0.0)
        for y in range(d):
            j = a * d + y
            # s <= m_y - p_y + 2(1 - b)
            r = row(); r[is_ + j] = 1.0; r[ip + y] = 1.0; r[ib + j] = 2.0
            lo.append(-np.inf); hi.append(M[s, y] + 2.0)
            # s <= b
            r = row(); r[is_ + j] = 1.0; r[ib + j] = -1.0
            lo.append(-np.inf); hi.append(0.0)
    c = np.zeros(n); c[it] = -1.0
    integrality = np.zeros(n); integrality[ib:] = 1
    res = milp(c, constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=integrality, bounds=Bounds(np.zeros(n), np.ones(n)),
               options={"mip_rel_gap": 0.0})
    if res.x is None:
        raise RuntimeError(f"hull gap MILP failed: {res.message}")
    w = np.clip(res.x[iw:iw + m], 0.0, None)
    return -float(res.fun), (w / w.sum()) @ M


def _polish(M: np.ndarray, S: list[int], p0: np.ndarray):
    """Local LP on the sign cell of ``p0``, where each tv is linear."""
    m, d = M.shape
    n = m + 1
    A_ub, b_ub = [], []
    for s in S:
        above = M[s] > p0
        # t - sum_{y in above} (M_sy - p_y) <= 0, p_y = sum_w w M_y
        r = np.zeros(n); r[m] = 1.0
        r[:m] = M[:, above].sum(axis=1)
        A_ub.append(r); b_ub.append(M[s, above].sum())
        for y in range(d):
            r = np.zeros(n)
            if above[y]:
                r[:m] = M[:, y]; A_ub.append(r); b_ub.append(M[s, y])
            else:
                r[:m] = -M[:, y]; A_ub.append(r); b_ub.append(-M[s, y])
    c = np.zeros(n); c[m] = -1.0
    A_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
    res = linprog(c, A_ub=np.array(A_ub), b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * m + [(0, 1)], method="highs", options=_LP_OPTS)
    if res.status != 0:
        return p0
    w = np.clip(res.x[:m], 0.0, None)
    return (w / w.sum()) @ M


def _boxes(M: np.ndarray, max_boxes: int):
    """Products of breakpoint intervals, one per coordinate, that meet the
    plane ``sum p = 1``; ``None`` when there are more than ``max_boxes``."""
    d = M.shape[1]
    cuts = [np.unique(np.concatenate([[0.0, 1.0], M[:, y]])) for y in range(d)]
    spans = [list(zip(c[:-1], c[1:])) for c in cuts]
    top = [c[-1] for c in cuts]
    tail_hi = np.concatenate([np.cumsum(top[::-1])[::-1][1:], [0.0]])
    out = []

    def rec(y, lo_sum, hi_sum, acc):
        if len(out) > max_boxes:
            return
        if y == d:
            if lo_sum <= 1.0 + 1e-12 and hi_sum >= 1.0 - 1e-12:
                out.append(acc)
            return
        for lo, hi in spans[y]:
            if lo_sum + lo > 1.0 + 1e-12:
                break
            if hi_sum + hi + tail_hi[y] < 1.0 - 1e-12:
                continue
            rec(y + 1, lo_sum + lo, hi_sum + hi, acc + [(lo, hi)])

    rec(0, 0.0, 0.0, [])
    if len(out) > max_boxes:
        return None
    B = np.array(out, dtype=float)
    return B[:, :, 0], B[:, :, 1]


def _box_bounds(M: np.ndarray, lo: np.ndarray, hi: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Per box, ``min_s max_{p in box} tv(p, M[s])``; exact for each ``s``
    because tv is linear on the box."""
    out = np.empty(len(lo))
    for a in range(0, len(lo), chunk):
        L, H = lo[a:a + chunk, None, :], hi[a:a + chunk, None, :]
        above = M[None, :, :] <= L + 1e-15          # coordinates where p_y >= m_y on the whole box
        up = np.minimum(np.where(above, H, 0.0).sum(axis=2), 1.0 - np.where(above, 0.0, L).sum(axis=2))
        val = up - np.where(above, M[None, :, :], 0.0).sum(axis=2)
        out[a:a + chunk] = val.min(axis=1)
    return out


def _box_lp(M: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """max over the box and the hull of ``min_s tv(p, M[s])``."""
    m, d = M.shape
    above = M <= lo + 1e-15
    # variables: w (m), p (d), t
    n = m + d + 1
    A_ub = np.zeros((m, n))
    A_ub[:, m:m + d] = -above.astype(float)
    A_ub[:, -1] = 1.0
    b_ub = -(M * above).sum(axis=1)
    A_eq = np.zeros((d + 1, n))
    A_eq[:d, :m] = M.T
    A_eq[:d, m:m + d] = -np.eye(d)
    A_eq[d, :m] = 1.0
    b_eq = np.concatenate([np.zeros(d), [1.0]])
    bounds = [(0, None)] * m + list(zip(lo, hi)) + [(-1.0, 1.0)]
    c = np.zeros(n)
    c[-1] = -1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs", options=_LP_OPTS)
    if res.status != 0:
        return None
    return -float(res.fun)


def gap_by_boxes(M: np.ndarray, max_boxes: int = 200_000, tol: float = 1e-12) -> float | None:
    """Exact max-min over the hull by box decomposition; ``None`` when the
    decomposition is too large."""
    boxes = _boxes(M, max_boxes)
    if boxes is None:
        return None
    lo, hi = boxes
    ub = _box_bounds(M, lo, hi)
    best = 0.0
    for k in np.argsort(-ub, kind="stable"):
        if ub[k] <= best + tol:
            break
        v = _box_lp(M, lo[k], hi[k])
        if v is not None:
            best = max(best, min(v, ub[k]))
    return best


def gap_by_milp(M: np.ndarray, seed_size: int = 8, max_rounds: int = 500) -> float:
    """The same max-min as a mixed-integer program over a growing member set."""
    # farthest-point seed set
    S = [0]
    dmin = 0.5 * np.abs(M - M[0]).sum(axis=1)
    while len(S) < min(seed_size, len(M)):
        nxt = int(np.argmax(dmin))
        if dmin[nxt] <= 0:
            break
        S.append(nxt)
        dmin = np.minimum(dmin, 0.5 * np.abs(M - M[nxt]).sum(axis=1))

    best = 0.0
    for _ in range(max_rounds):
        upper, p = _solve_milp(M, S)
        q = _polish(M, S, p)
        vals = tv_to_set(np.vstack([p, q]), M)
        best = max(best, float(vals.max()))
        if upper <= best + 1e-9:
            break
        added = False
        for point in (p, q):
            order = np.argsort(0.5 * np.abs(M - point).sum(axis=1), kind="stable")
            for j in order[:2]:
                if int(j) not in S:
                    S.append(int(j))
                    added = True
        if not added:
            # the relaxation bound is off only by solver tolerance
            break
    return best


def _reduced(members) -> np.ndarray:
    M = _dedupe(np.asarray(members, dtype=float))
    return M[:, np.nonzero(M.max(axis=0) > 0)[0]] if len(M) else M


def hausdorff_to_hull(members, method: str = "auto") -> float:
    """Hausdorff tv distance between a finite set and its convex hull.

    Since the set lies inside its hull this is ``max_{p in hull} min_m tv(p, m)``.
    ``method`` is ``auto``, ``boxes`` or ``milp``.
    """
    M = _reduced(members)
    if len(M) <= 1 or M.shape[1] <= 1:
        return 0.0
    if M.shape[1] == 2 and method == "auto":
        return _gap_1d(M[:, 0])
    if method in ("auto", "boxes"):
        v = gap_by_boxes(M)
        if v is not None:
            return v
        if method == "boxes":
            raise ValueError("box decomposition exceeds its size limit")
    return gap_by_milp(M)


def simplex_grid(dim: int, mesh: float) -> np.ndarray:
    """All points of the probability simplex in R^dim with coordinates on a
    ``mesh`` lattice (``1/mesh`` must be an integer)."""
    steps = round(1.0 / mesh)
    if not math.isclose(steps * mesh, 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError("mesh must divide 1")

    def rec(k, left):
        if k == 1:
            yield (left,)
            return
        for v in range(left, -1, -1):
            for rest in rec(k - 1, left - v):
                yield (v,) + rest

    return np.array(list(rec(dim, steps)), dtype=float) / steps
