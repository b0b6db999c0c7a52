"""Shared test helpers: seeded instance factories and small oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

import divmax


def random_certified(seed: int, n: int, kind: str = "l2", dim: int = 3):
    """Random negative-type DistanceMatrix; gaussian points or random sets."""
    rng = np.random.default_rng(seed)
    if kind in ("l1", "l2"):
        return divmax.build_distance(rng.standard_normal((n, dim)), kind)
    if kind == "lp":
        return divmax.build_distance(rng.standard_normal((n, dim)), "lp", p=1.5)
    if kind == "cosine":
        pts = rng.standard_normal((n, dim))
        norms = np.linalg.norm(pts, axis=1)
        pts[norms < 1e-9] = 1.0
        return divmax.build_distance(pts, "cosine")
    universe = max(2 * dim, 4)
    sets = []
    for _ in range(n):
        mask = rng.random(universe) < 0.5
        if not mask.any():
            mask[rng.integers(universe)] = True
        sets.append(set(np.nonzero(mask)[0].tolist()))
    return divmax.build_distance(sets, kind, universe=universe)


def random_matroid(seed: int, n: int):
    """Uniform or partition matroid with random parameters."""
    rng = np.random.default_rng(seed)
    if rng.random() < 0.5:
        return divmax.UniformMatroid(n, int(rng.integers(1, n + 1)))
    num_blocks = int(rng.integers(1, min(4, n) + 1))
    perm = rng.permutation(n)
    cuts = sorted(rng.choice(np.arange(1, n), size=num_blocks - 1, replace=False))
    blocks, start = [], 0
    for cut in list(cuts) + [n]:
        blocks.append([int(e) for e in perm[start:cut]])
        start = cut
    caps = [int(rng.integers(1, len(b) + 1)) for b in blocks]
    return divmax.PartitionMatroid(blocks, caps)


def enumerate_independent(m, max_size=None):
    """All independent sets by rank oracle, size-ascending then lexicographic."""
    top = m.full_rank if max_size is None else min(max_size, m.full_rank)
    for size in range(top + 1):
        for combo in itertools.combinations(range(m.n), size):
            if m.rank(combo) == size:
                yield combo


def random_base_point(m, seed: int) -> np.ndarray:
    """Random point in the base polytope: convex combination of greedy bases."""
    rng = np.random.default_rng(seed)
    n, k = m.n, m.full_rank
    x = np.zeros(n)
    weights = rng.dirichlet(np.ones(6))
    for lam in weights:
        x += lam * divmax.greedy_basis_lmo(m, k, rng.standard_normal(n))
    return x


@pytest.fixture
def line_points_dm():
    # Collinear points 0, 1, 2, 3 under l1.
    return divmax.build_distance([[0.0], [1.0], [2.0], [3.0]], "l1")


@pytest.fixture
def triangle_not_negtype():
    # Side lengths (1, 1, 5): a metric-violating triangle that fails
    # the negative-type test with min eigenvalue -1/2.
    return divmax.DistanceMatrix(np.array([[0.0, 1, 1], [1, 0, 5], [1, 5, 0]]))


@pytest.fixture
def allones_dm4():
    d = np.ones((4, 4)) - np.eye(4)
    return divmax.DistanceMatrix(d)
