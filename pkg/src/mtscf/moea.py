"""Constrained NSGA-III over binary substitution masks.

Genomes are boolean ``(k, d)`` matrices: a set cell means "take the donor's
value at this time step and channel". Every candidate carries the full
objective triple ``(m1, m2, m3)``:

* ``m1`` target-class probability (maximized, and constrained to ``>= theta``),
* ``m2`` fraction of changed cells (minimized),
* ``m3`` distance to the query (minimized).

Selection only looks at the *active* subset of objectives, so the same engine
serves the two-objective ablations.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Callable, Sequence

import numpy as np

from .core import MtsInstance
from .errors import StructuralError

# Maximize m1, minimize m2 and m3.
MAXIMIZE = np.array([True, False, False])

OBJECTIVE_MODES: dict[str, tuple[int, ...]] = {
    "co_pr": (0, 2),
    "co_sp": (0, 1),
    "sp_pr": (1, 2),
    "co_sp_pr": (0, 1, 2),
}


def active_objectives(mode: str) -> tuple[int, ...]:
    try:
        return OBJECTIVE_MODES[mode.lower()]
    except KeyError:
        raise StructuralError(f"unknown objective mode {mode!r}; choose from {sorted(OBJECTIVE_MODES)}") from None


@dataclass(eq=False)
class MaskCandidate:
    genome: np.ndarray
    objectives: np.ndarray
    feasible: bool
    decoded: MtsInstance
    proba: np.ndarray | None = None

    @property
    def m1(self) -> float:
        return float(self.objectives[0])

    @property
    def m2(self) -> float:
        return float(self.objectives[1])

    @property
    def m3(self) -> float:
        return float(self.objectives[2])

    def key(self) -> bytes:
        return np.packbits(self.genome.ravel()).tobytes() + str(self.genome.shape).encode()


def das_dennis(m: int, p: int) -> np.ndarray:
    """All points of the simplex grid with spacing ``1/p`` in ``m`` dimensions.

    Rows are in lexicographic order of their integer numerators.
    """
    if m < 2 or p < 1:
        raise StructuralError("das_dennis needs m >= 2 and p >= 1")
    rows = []
    # stars and bars: choose m-1 bar positions among p+m-1 slots
    for bars in combinations(range(p + m - 1), m - 1):
        parts, prev = [], -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(p + m - 2 - prev)
        rows.append(parts)
    rows.sort()
    pts = np.array(rows, dtype=np.float64) / p
    assert len(pts) == comb(p + m - 1, m - 1)
    return pts


def _minimization_view(objs: np.ndarray, maximize) -> np.ndarray:
    objs = np.asarray(objs, dtype=np.float64)
    if maximize is None:
        return objs
    flip = np.where(np.asarray(maximize, dtype=bool), -1.0, 1.0)
    return objs * flip


def dominance_matrix(objs: np.ndarray, maximize=None, violation=None) -> np.ndarray:
    """``D[i, j]`` is True when candidate ``i`` dominates ``j``.

    With ``violation`` given, feasibility comes first: a feasible candidate
    (violation <= 0) dominates any infeasible one, and among infeasible ones
    the smaller violation dominates.
    """
    g = _minimization_view(objs, maximize)
    le = np.all(g[:, None, :] <= g[None, :, :], axis=2)
    lt = np.any(g[:, None, :] < g[None, :, :], axis=2)
    dom = le & lt
    if violation is None:
        return dom
    v = np.asarray(violation, dtype=np.float64)
    feas = v <= 0
    both_feas = feas[:, None] & feas[None, :]
    both_infeas = ~feas[:, None] & ~feas[None, :]
    return (both_feas & dom) | (feas[:, None] & ~feas[None, :]) | (both_infeas & (v[:, None] < v[None, :]))


def nondominated_sort(objs, maximize=None, violation=None) -> list[list[int]]:
    """Split a population into fronts of ascending rank; indices ascend within a front."""
    objs = np.asarray(objs, dtype=np.float64)
    if objs.ndim != 2 or len(objs) == 0:
        raise StructuralError("nondominated_sort needs a non-empty (n, m) array")
    if not np.all(np.isfinite(objs)):
        raise StructuralError("objective values must be finite")
    dom = dominance_matrix(objs, maximize, violation)
    n_dominators = dom.sum(axis=0)
    remaining = np.ones(len(objs), dtype=bool)
    fronts = []
    while remaining.any():
        front = np.flatnonzero(remaining & (n_dominators == 0))
        fronts.append(front.tolist())
        remaining[front] = False
        n_dominators = n_dominators - dom[front].sum(axis=0)
    return fronts


def binary_sampling(k: int, d: int, z: int, rng: np.random.Generator) -> list[np.ndarray]:
    """``z`` random masks with cells set with probability 1/2; the first is all ones."""
    if z < 1:
        raise StructuralError("population size must be at least 1")
    pop = rng.random((z, k, d)) < 0.5
    pop[0] = True
    return list(pop)


def two_point_crossover(a, b, rng: np.random.Generator, cuts: tuple[int, int] | None = None):
    """Swap the flattened segment ``[u, v)`` between two parents."""
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise StructuralError(f"genome shapes differ: {a.shape} vs {b.shape}")
    n = a.size
    if cuts is None:
        u, v = sorted(rng.choice(n + 1, size=2, replace=False)) if n >= 1 else (0, 0)
    else:
        u, v = cuts
    if not 0 <= u <= v <= n:
        raise StructuralError(f"invalid cut points ({u}, {v}) for length {n}")
    fa, fb = a.ravel().copy(), b.ravel().copy()
    fa[u:v], fb[u:v] = b.ravel()[u:v], a.ravel()[u:v]
    return fa.reshape(a.shape), fb.reshape(b.shape)


def bit_flip_mutation(g, pm: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= pm <= 1.0:
        raise StructuralError(f"mutation rate must lie in [0, 1], got {pm}")
    g = np.asarray(g, dtype=bool)
    return g ^ (rng.random(g.shape) < pm)


def _violation(cands: Sequence[MaskCandidate], theta: float) -> np.ndarray:
    m1 = np.array([c.objectives[0] for c in cands])
    return np.maximum(0.0, theta - m1)


def _perpendicular_distances(points: np.ndarray, refs: np.ndarray) -> np.ndarray:
    """Distance of each point to each reference line through the origin, shape (n, r)."""
    unit = refs / np.linalg.norm(refs, axis=1, keepdims=True)
    proj = points @ unit.T
    sq = np.einsum("ij,ij->i", points, points)[:, None] - proj**2
    return np.sqrt(np.maximum(sq, 0.0))


def _normalize(g: np.ndarray, front0: list[int]) -> np.ndarray:
    """Scale so the ideal point (best of all rows) maps to 0 and the worst of front 0 to 1."""
    ideal = g.min(axis=0)
    span = g[front0].max(axis=0) - ideal
    # degenerate axes fall back to the full population range, then to 1
    span = np.where(span > 1e-12, span, g.max(axis=0) - ideal)
    span = np.where(span > 1e-12, span, 1.0)
    return (g - ideal) / span


def environmental_selection(
    cands: Sequence[MaskCandidate],
    z: int,
    refs: np.ndarray,
    theta: float,
    active: Sequence[int],
) -> list[int]:
    """Indices of the ``z`` candidates that survive into the next generation."""
    active = list(active)
    objs = np.array([c.objectives[active] for c in cands])
    maximize = MAXIMIZE[active]
    viol = _violation(cands, theta)
    fronts = nondominated_sort(objs, maximize, viol)

    chosen: list[int] = []
    last: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= z:
            chosen.extend(front)
            if len(chosen) == z:
                return sorted(chosen)
        else:
            last = front
            break
    need = z - len(chosen)
    if not last:
        return sorted(chosen)

    if viol[last[0]] > 0:
        # an infeasible front shares a single violation level; keep the lowest indices
        return sorted(chosen + last[:need])

    g = _minimization_view(objs, maximize)
    pool = chosen + last
    norm = _normalize(g, fronts[0])[pool]
    dist = _perpendicular_distances(norm, refs)
    assoc = np.argmin(dist, axis=1)
    pdist = dist[np.arange(len(pool)), assoc]

    n_chosen = len(chosen)
    niche = np.bincount(assoc[:n_chosen], minlength=len(refs)).astype(np.int64)
    open_members = list(range(n_chosen, len(pool)))  # positions in `pool`

    # keep the per-objective extremes of the boundary front first
    picked: list[int] = []
    for j in range(g.shape[1]):
        if len(picked) >= need:
            break
        best = min(open_members, key=lambda p: (g[pool[p], j], p))
        if best not in picked:
            picked.append(best)
            open_members.remove(best)
            niche[assoc[best]] += 1

    while len(picked) < need:
        refs_open = {}
        for p in open_members:
            r = int(assoc[p])
            if r not in refs_open or (pdist[p], p) < (pdist[refs_open[r]], refs_open[r]):
                refs_open[r] = p
        r_star = min(refs_open, key=lambda r: (niche[r], pdist[refs_open[r]], r))
        p = refs_open[r_star]
        picked.append(p)
        open_members.remove(p)
        niche[r_star] += 1
    return sorted(chosen + [pool[p] for p in picked])


def make_offspring(
    parents: Sequence[np.ndarray],
    n: int,
    pc: float,
    pm: float,
    rng: np.random.Generator,
) -> list[np.ndarray]:
    """Random mating: shuffle, pair neighbours, cross with probability ``pc``, then mutate."""
    z = len(parents)
    children: list[np.ndarray] = []
    while len(children) < n:
        order = rng.permutation(z)
        if z == 1:
            order = np.array([0, 0])
        for i in range(0, len(order) - 1, 2):
            a, b = parents[order[i]], parents[order[i + 1]]
            if rng.random() < pc:
                a, b = two_point_crossover(a, b, rng)
            children.append(bit_flip_mutation(a, pm, rng))
            children.append(bit_flip_mutation(b, pm, rng))
            if len(children) >= n:
                break
        if z % 2 == 1 and z > 1 and len(children) < n:
            a = parents[order[-1]]
            children.append(bit_flip_mutation(a, pm, rng))
    return children[:n]


def dedupe(cands: Sequence[MaskCandidate]) -> list[MaskCandidate]:
    seen, out = set(), []
    for c in cands:
        k = c.key()
        if k not in seen:
            seen.add(k)
            out.append(c)
    return out


def pareto_survivors(pop: Sequence[MaskCandidate], theta: float, active: Sequence[int]) -> list[MaskCandidate]:
    """Feasible members of the first constrained front, duplicates removed."""
    active = list(active)
    objs = np.array([c.objectives[active] for c in pop])
    front0 = nondominated_sort(objs, MAXIMIZE[active], _violation(pop, theta))[0]
    return dedupe([pop[i] for i in front0 if pop[i].feasible])


def nsga3_evolve(
    initial: Sequence[MaskCandidate],
    evaluate: Callable[[np.ndarray], MaskCandidate],
    refs: np.ndarray,
    generations: int,
    pop_size: int,
    pc: float,
    pm: float,
    theta: float,
    rng: np.random.Generator,
    active: Sequence[int] = (0, 1, 2),
    on_generation: Callable[[int, list[MaskCandidate]], None] | None = None,
) -> tuple[list[MaskCandidate], np.ndarray]:
    """Run the generational loop and return the feasible non-dominated survivors.

    Each generation creates ``pop_size`` offspring and keeps ``pop_size`` of
    the union. The second return value holds the survivors' ``(m1, m2)`` pairs.
    An empty survivor list means nothing feasible was found.
    """
    if len(initial) != pop_size:
        raise StructuralError(f"initial population has {len(initial)} members, expected {pop_size}")
    if generations < 1:
        raise StructuralError("generations must be at least 1")
    refs = np.asarray(refs, dtype=np.float64)
    if refs.shape[1] != len(active):
        raise StructuralError(f"reference points have {refs.shape[1]} dims, {len(active)} objectives are active")
    pop = list(initial)
    if on_generation is not None:
        on_generation(0, pop)
    for gen in range(1, generations + 1):
        genomes = make_offspring([c.genome for c in pop], pop_size, pc, pm, rng)
        union = pop + [evaluate(gnm) for gnm in genomes]
        keep = environmental_selection(union, pop_size, refs, theta, active)
        pop = [union[i] for i in keep]
        if on_generation is not None:
            on_generation(gen, pop)
    survivors = pareto_survivors(pop, theta, active)
    scores = np.array([[c.m1, c.m2] for c in survivors]).reshape(-1, 2)
    return survivors, scores
