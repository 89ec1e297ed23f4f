"""Random instance families and a brute-force vertex enumeration oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lp_driver import RawLP


def bounded_feasible(rng: np.random.Generator, m: int, n: int) -> RawLP:
    """Gaussian rows around a strictly feasible point; the cost is a positive
    combination of the rows, so the program is bounded."""
    A = rng.standard_normal((m, n))
    x0 = rng.standard_normal(n)
    b = A @ x0 - rng.uniform(0.1, 1.0, m)
    c = A.T @ rng.uniform(0.0, 1.0, m)
    return RawLP(A, b, c)


def integer_feasible(rng: np.random.Generator, m: int, n: int, spread: int = 3) -> RawLP:
    A = _integer_rows(rng, m, n, spread)
    x0 = rng.integers(-2, 3, n)
    b = A @ x0 - rng.integers(0, 3, m)
    c = A.T @ rng.integers(0, 3, m)
    if not np.any(c):
        c = A[0].copy()
    return RawLP(A.astype(float), b.astype(float), c.astype(float), integrality=True)


def integer_infeasible(rng: np.random.Generator, m: int, n: int, spread: int = 3) -> RawLP:
    """A feasible system plus a pair ``a x >= k`` and ``a x <= k - 1``."""
    lp = integer_feasible(rng, m - 2, n, spread)
    a = _integer_rows(rng, 1, n, spread)[0]
    k = int(rng.integers(-3, 4))
    A = np.vstack([lp.A, a, -a])
    b = np.concatenate([lp.b, [k, -(k - 1)]])
    return RawLP(A, b, lp.c, integrality=True)


def integer_unbounded(rng: np.random.Generator, m: int, n: int, spread: int = 3) -> RawLP:
    """Feasible, with a recession direction ``d`` (``A d >= 0``) along which the cost falls."""
    d = rng.integers(-2, 3, n)
    while not np.any(d):
        d = rng.integers(-2, 3, n)
    rows = []
    while len(rows) < m:
        a = _integer_rows(rng, 1, n, spread)[0]
        if a @ d >= 0:
            rows.append(a)
    A = np.array(rows)
    x0 = rng.integers(-2, 3, n)
    b = A @ x0 - rng.integers(0, 3, m)
    c = rng.integers(-spread, spread + 1, n)
    while c @ d >= 0:
        c = rng.integers(-spread, spread + 1, n)
    return RawLP(A.astype(float), b.astype(float), c.astype(float), integrality=True)


def _integer_rows(rng: np.random.Generator, m: int, n: int, spread: int) -> np.ndarray:
    A = rng.integers(-spread, spread + 1, (m, n))
    for i in range(m):
        while not np.any(A[i]):
            A[i] = rng.integers(-spread, spread + 1, n)
    return A


def duplicate_rows(lp: RawLP, k: int) -> RawLP:
    return RawLP(np.repeat(lp.A, k, axis=0), np.repeat(lp.b, k), lp.c, lp.integrality)


@dataclass
class Vertex:
    x: np.ndarray
    objective: float
    tight: frozenset[int]


def enumerate_vertices(
    lp: RawLP, feas_tol: float = 1e-9, tight_tol: float = 1e-7, batch: int = 65536
) -> list[Vertex]:
    """Every basic feasible solution, found by solving all n-row subsystems.

    Subsystems are solved in stacked batches, so m = 30, n = 6 (about
    six hundred thousand subsystems) takes a second or two.
    """
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    scale = 1.0 + float(np.max(np.abs(b)))
    seen: dict[tuple, Vertex] = {}
    combos = itertools.combinations(range(m), n)
    while True:
        rows = np.array(list(itertools.islice(combos, batch)), dtype=np.intp).reshape(-1, n)
        if rows.size == 0:
            break
        sub = A[rows]
        keep = np.abs(np.linalg.det(sub)) >= 1e-10
        if not np.any(keep):
            continue
        X = np.linalg.solve(sub[keep], b[rows[keep]][..., None])[..., 0]
        S = X @ A.T - b
        for x, s in zip(X[np.min(S, axis=1) >= -feas_tol * scale], S[np.min(S, axis=1) >= -feas_tol * scale]):
            key = tuple(np.round(x, 9))
            if key not in seen:
                tight = frozenset(np.flatnonzero(np.abs(s) <= tight_tol * scale).tolist())
                seen[key] = Vertex(x, float(c @ x), tight)
    return list(seen.values())


def enumeration_optimum(lp: RawLP, rel_tol: float = 1e-9) -> tuple[float, list[Vertex]]:
    """Optimal value over the vertices and every vertex attaining it.

    Only meaningful for bounded programs whose polytope has a vertex.
    """
    verts = enumerate_vertices(lp)
    if not verts:
        raise ValueError("no basic feasible solution")
    best = min(v.objective for v in verts)
    tol = rel_tol * (1.0 + abs(best))
    return best, [v for v in verts if v.objective <= best + tol]
