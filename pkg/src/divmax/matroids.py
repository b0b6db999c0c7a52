"""Matroid rank oracles and matroid-polytope primitives.

Supported matroid kinds: uniform, partition, graphic (ground set = edges),
and explicit rank tables for small ground sets.  On top of the rank oracle
this module provides the pieces the solver and the rounding procedure need:

  * greedy_basis_lmo   -- max-weight basis of the rank-alpha truncation;
                          this is exact linear maximization over the slice
                          {x in P(M) : sum(x) == alpha} because that slice
                          is the base polytope of the truncated matroid
  * slack_minimize     -- min of r(prefix|T) - x(prefix|T) over windowed
                          subsets T that contain i and avoid j
  * max_feasible_step  -- how far x can move along e_i - e_j
  * lift_to_base       -- raise a polytope point to the base polytope

Subset searches use closed forms for uniform and partition matroids and
bounded brute force (window size <= W_MAX) otherwise.  Tie-breaking is
deterministic everywhere: smaller subsets first, then lexicographic by
sorted element tuple; per-size selections prefer larger x then lower index.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InternalInvariantError, InvalidInputError

# Hard cap on brute-force subset windows for oracle-only matroids.
W_MAX = 20
NUM_TOL = 1e-9


class Matroid:
    """Abstract rank oracle over ground set {0, ..., n-1}."""

    n: int = 0
    kind: str = "abstract"

    def rank(self, subset) -> int:
        raise NotImplementedError

    def is_independent(self, subset) -> bool:
        s = _as_set(subset, self.n)
        return self.rank(s) == len(s)

    @property
    def full_rank(self) -> int:
        cached = getattr(self, "_full_rank", None)
        if cached is None:
            cached = self.rank(range(self.n))
            self._full_rank = cached
        return cached

    def incremental(self):
        """Stateful one-element-at-a-time independence oracle."""
        return _GenericIncremental(self)


def _as_set(subset, n: int) -> frozenset:
    s = frozenset(int(e) for e in subset)
    for e in s:
        if not 0 <= e < n:
            raise InvalidInputError(f"element {e} out of range for n={n}")
    return s


class UniformMatroid(Matroid):
    kind = "uniform"

    def __init__(self, n: int, k: int):
        if n < 1:
            raise InvalidInputError("uniform matroid needs n >= 1")
        if not 0 <= k <= n:
            raise InvalidInputError(f"uniform matroid needs 0 <= k <= n, got k={k}, n={n}")
        self.n = int(n)
        self.k = int(k)

    def rank(self, subset) -> int:
        return min(len(_as_set(subset, self.n)), self.k)

    def incremental(self):
        return _UniformIncremental(self.k)


class PartitionMatroid(Matroid):
    """Disjoint blocks with per-block capacities; r(S) = sum min(|S&B|, cap)."""

    kind = "partition"

    def __init__(self, blocks, capacities):
        blocks = [sorted(int(e) for e in b) for b in blocks]
        caps = [int(c) for c in capacities]
        if len(blocks) != len(caps):
            raise InvalidInputError("one capacity per block required")
        if not blocks:
            raise InvalidInputError("partition matroid needs at least one block")
        flat = [e for b in blocks for e in b]
        n = len(flat)
        if sorted(flat) != list(range(n)):
            raise InvalidInputError("blocks must partition {0..n-1} exactly")
        for b, c in zip(blocks, caps):
            if not b:
                raise InvalidInputError("blocks must be nonempty")
            if not 0 <= c <= len(b):
                raise InvalidInputError(f"capacity {c} invalid for block of size {len(b)}")
        self.n = n
        self.blocks = [tuple(b) for b in blocks]
        self.capacities = tuple(caps)
        self.block_of = np.empty(n, dtype=int)
        for bi, b in enumerate(self.blocks):
            for e in b:
                self.block_of[e] = bi

    def rank(self, subset) -> int:
        s = _as_set(subset, self.n)
        counts = {}
        for e in s:
            bi = int(self.block_of[e])
            counts[bi] = counts.get(bi, 0) + 1
        return sum(min(c, self.capacities[bi]) for bi, c in counts.items())

    def incremental(self):
        return _PartitionIncremental(self)


class GraphicMatroid(Matroid):
    """Ground set = edge list; rank = |S| minus cycle defect (forest rank)."""

    kind = "graphic"

    def __init__(self, num_vertices: int, edges):
        if num_vertices < 1:
            raise InvalidInputError("graphic matroid needs at least one vertex")
        edges = [(int(u), int(v)) for u, v in edges]
        for u, v in edges:
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise InvalidInputError(f"edge ({u},{v}) out of vertex range")
        if not edges:
            raise InvalidInputError("graphic matroid needs at least one edge")
        self.num_vertices = int(num_vertices)
        self.edges = tuple(edges)
        self.n = len(edges)

    def rank(self, subset) -> int:
        s = _as_set(subset, self.n)
        parent = list(range(self.num_vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        r = 0
        for e in sorted(s):
            u, v = self.edges[e]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                r += 1
        return r

    def incremental(self):
        return _GraphicIncremental(self)


class ExplicitRankMatroid(Matroid):
    """Rank table indexed by subset bitmask (element e <-> bit e); n <= 20."""

    kind = "explicit_rank"

    def __init__(self, ranks, *, validate: bool | None = None):
        ranks = np.asarray(ranks, dtype=int)
        size = len(ranks)
        n = size.bit_length() - 1
        if size < 2 or (1 << n) != size:
            raise InvalidInputError("rank table length must be a power of two >= 2")
        if n > W_MAX:
            raise InvalidInputError(f"explicit rank tables support n <= {W_MAX}")
        self.n = n
        self.ranks = ranks
        if ranks[0] != 0:
            raise InvalidInputError("rank of the empty set must be 0")
        if validate is None:
            validate = n <= 10
        if validate:
            validate_rank_table(ranks)

    def rank(self, subset) -> int:
        mask = 0
        for e in _as_set(subset, self.n):
            mask |= 1 << e
        return int(self.ranks[mask])

    def rank_mask(self, mask: int) -> int:
        return int(self.ranks[mask])

    def incremental(self):
        return _ExplicitIncremental(self)

    @classmethod
    def from_matroid(cls, m: Matroid, *, truncate_to: int | None = None):
        """Tabulate another matroid's rank function (optionally truncated)."""
        if m.n > W_MAX:
            raise InvalidInputError(f"tabulation supports n <= {W_MAX}")
        table = np.zeros(1 << m.n, dtype=int)
        for mask in range(1, 1 << m.n):
            s = [e for e in range(m.n) if mask >> e & 1]
            table[mask] = m.rank(s)
        if truncate_to is not None:
            table = np.minimum(table, int(truncate_to))
        return cls(table, validate=False)


def validate_rank_table(ranks) -> None:
    """Check the matroid rank axioms on an explicit table; raise if violated.

    Uses the local form: r(0) == 0, unit increments, and
    r(S+e) - r(S) >= r(S+e+f) - r(S+f)  for all S and e, f not in S,
    which together are equivalent to the global axioms.
    """
    ranks = np.asarray(ranks, dtype=int)
    n = len(ranks).bit_length() - 1
    if ranks[0] != 0:
        raise InvalidInputError("rank of empty set must be 0")
    for mask in range(1 << n):
        r = ranks[mask]
        for e in range(n):
            if mask >> e & 1:
                continue
            gain_e = ranks[mask | 1 << e] - r
            if gain_e not in (0, 1):
                raise InvalidInputError(f"rank gain of element {e} at mask {mask} is {gain_e}")
            for f in range(n):
                if f == e or mask >> f & 1:
                    continue
                with_f = mask | 1 << f
                if ranks[with_f | 1 << e] - ranks[with_f] > gain_e:
                    raise InvalidInputError(
                        f"submodularity fails at mask {mask} with elements {e}, {f}"
                    )


class _UniformIncremental:
    def __init__(self, k):
        self.k = k
        self.count = 0

    def try_add(self, e) -> bool:
        if self.count < self.k:
            self.count += 1
            return True
        return False


class _PartitionIncremental:
    def __init__(self, m: PartitionMatroid):
        self.m = m
        self.counts = [0] * len(m.blocks)

    def try_add(self, e) -> bool:
        bi = int(self.m.block_of[e])
        if self.counts[bi] < self.m.capacities[bi]:
            self.counts[bi] += 1
            return True
        return False


class _GraphicIncremental:
    def __init__(self, m: GraphicMatroid):
        self.m = m
        self.parent = list(range(m.num_vertices))

    def _find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def try_add(self, e) -> bool:
        u, v = self.m.edges[e]
        ru, rv = self._find(u), self._find(v)
        if ru == rv:
            return False
        self.parent[ru] = rv
        return True


class _ExplicitIncremental:
    def __init__(self, m: ExplicitRankMatroid):
        self.m = m
        self.mask = 0
        self.rank = 0

    def try_add(self, e) -> bool:
        new_mask = self.mask | 1 << e
        if self.m.rank_mask(new_mask) == self.rank + 1:
            self.mask = new_mask
            self.rank += 1
            return True
        return False


class _GenericIncremental:
    def __init__(self, m: Matroid):
        self.m = m
        self.members = []

    def try_add(self, e) -> bool:
        cand = self.members + [e]
        if self.m.rank(cand) == len(cand):
            self.members = cand
            return True
        return False


def greedy_basis_lmo(m: Matroid, alpha: int, w) -> np.ndarray:
    """Max-weight basis of the rank-alpha truncation, as a 0/1 float vector.

    Elements are scanned by decreasing weight (ties: lower index first) and
    kept while independent, stopping at alpha elements.  Because every basis
    of the truncation has exactly alpha elements, this greedy scan maximizes
    w @ x over the slice vertices even for negative weights.
    """
    alpha = int(alpha)
    if not 1 <= alpha <= m.full_rank:
        raise InvalidInputError(f"alpha must be in [1, {m.full_rank}], got {alpha}")
    w = np.asarray(w, dtype=float)
    if w.shape != (m.n,):
        raise InvalidInputError(f"weights must have shape ({m.n},), got {w.shape}")
    order = np.lexsort((np.arange(m.n), -w))
    oracle = m.incremental()
    x = np.zeros(m.n)
    taken = 0
    for e in order:
        if oracle.try_add(int(e)):
            x[e] = 1.0
            taken += 1
            if taken == alpha:
                break
    if taken != alpha:
        raise InternalInvariantError("greedy failed to reach the requested truncation rank")
    return x


@dataclass(frozen=True)
class SlackResult:
    """Windowed slack minimum: value and the achieving subset T."""

    min_slack: float
    argmin: frozenset


def _sorted_pool(pool, x):
    # Larger mass first, lower index on ties: canonical per-size selection.
    return sorted(pool, key=lambda e: (-x[e], e))


def _scan_sizes(k_of_t, pool_sorted, x, forced, base_mass):
    """Minimize k_of_t(|T|) - x(T) over T = forced members plus a pool prefix.

    Candidate subsets are `forced` plus the first m elements of the
    (mass-descending) pool, m = 0..len(pool); per size this maximizes the
    subtracted mass, so the scan visits the per-size minima.  Sizes are
    scanned ascending with strict improvement, so smaller subsets win ties.
    Returns (best_value, best_members).
    """
    best_val = None
    best_members = None
    mass = base_mass
    members = list(forced)
    t = len(members)
    while True:
        val = k_of_t(t) - mass
        if best_val is None or val < best_val:
            best_val = val
            best_members = list(members)
        if t - len(forced) >= len(pool_sorted):
            break
        nxt = pool_sorted[t - len(forced)]
        members.append(nxt)
        mass += x[nxt]
        t += 1
    return best_val, best_members


def _slack_uniform(m: UniformMatroid, x, i, j, window, prefix):
    pool = _sorted_pool([e for e in window if e != i and e != j], x)
    p_size = len(prefix)
    p_mass = float(sum(x[e] for e in prefix))
    best_val, best_members = _scan_sizes(
        lambda t: float(min(p_size + t, m.k)), pool, x, [i], p_mass + x[i]
    )
    return SlackResult(float(best_val), frozenset(best_members))


def _slack_partition(m: PartitionMatroid, x, i, j, window, prefix):
    total = 0.0
    members: list[int] = []
    for bi, block in enumerate(m.blocks):
        block_set = set(block)
        w_b = [e for e in window if e in block_set]
        p_b = [e for e in prefix if e in block_set]
        cap = m.capacities[bi]
        p_size = len(p_b)
        p_mass = float(sum(x[e] for e in p_b))
        forced = [i] if i in block_set else []
        pool = _sorted_pool([e for e in w_b if e != i and e != j], x)
        base_mass = p_mass + (x[i] if forced else 0.0)
        val, mem = _scan_sizes(
            lambda t, cap=cap, p=p_size: float(min(p + t, cap)), pool, x, forced, base_mass
        )
        total += val
        members.extend(mem)
    return SlackResult(float(total), frozenset(members))


def _slack_brute(m: Matroid, x, i, j, window, prefix):
    if len(window) > W_MAX:
        raise InvalidInputError(
            f"window of size {len(window)} exceeds the brute-force cap {W_MAX} "
            f"for matroid kind {m.kind!r}"
        )
    pool = sorted(e for e in window if e != i and e != j)
    prefix_list = sorted(prefix)
    base_mass = float(sum(x[e] for e in prefix_list)) + x[i]
    best_val = None
    best_members = None
    for t in range(len(pool) + 1):
        for combo in combinations(pool, t):
            members = [i] + list(combo)
            mass = base_mass + float(sum(x[e] for e in combo))
            val = m.rank(prefix_list + members) - mass
            if best_val is None or val < best_val:
                best_val = val
                best_members = members
    return SlackResult(float(best_val), frozenset(best_members))


def slack_minimize(m: Matroid, x, i, j, window, prefix=frozenset()) -> SlackResult:
    """Minimize r(prefix|T) - x(prefix|T) over T <= window with i in T, j not.

    `j=None` drops the exclusion constraint (then T ranges over all window
    subsets containing i).  `prefix` must be disjoint from the window; the
    returned argmin is T itself, not prefix|T.  Closed-form scans handle
    uniform and partition matroids; other kinds brute-force the window,
    which must then have size <= W_MAX.
    """
    x = np.asarray(x, dtype=float)
    window_set = _as_set(window, m.n)
    prefix_set = _as_set(prefix, m.n)
    if window_set & prefix_set:
        raise InvalidInputError("window and prefix must be disjoint")
    i = int(i)
    if i not in window_set:
        raise InvalidInputError(f"element i={i} must lie in the window")
    if j is not None:
        j = int(j)
        if j not in window_set:
            raise InvalidInputError(f"element j={j} must lie in the window")
        if j == i:
            raise InvalidInputError("i and j must differ")

    if isinstance(m, UniformMatroid):
        return _slack_uniform(m, x, i, j, window_set, prefix_set)
    if isinstance(m, PartitionMatroid):
        return _slack_partition(m, x, i, j, window_set, prefix_set)
    return _slack_brute(m, x, i, j, window_set, prefix_set)


def max_feasible_step(m: Matroid, x, i, j, window, prefix=frozenset()) -> float:
    """Largest eps >= 0 keeping x + eps*(e_i - e_j) inside the polytope slice.

    The binding quantities are x[j] (j hitting zero), 1 - x[i], and the
    windowed slack minimum over sets containing i but not j.
    """
    x = np.asarray(x, dtype=float)
    res = slack_minimize(m, x, i, j, window, prefix)
    eps = min(float(x[j]), 1.0 - float(x[i]), res.min_slack)
    if eps < -NUM_TOL * (1.0 + abs(eps)):
        raise InternalInvariantError(f"negative feasible step {eps}; x violates the polytope")
    return max(eps, 0.0)


def lift_to_base(m: Matroid, x) -> np.ndarray:
    """Raise x in P(M) coordinatewise until sum(z) == rank of the ground set.

    Scans elements in index order; each element is raised by its maximum
    feasible amount (the slack minimum over supporting sets).  After one
    pass every element lies in a tight set, so z is in the base polytope.
    The result dominates x, hence never decreases a monotone objective.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (m.n,):
        raise InvalidInputError(f"x must have shape ({m.n},), got {x.shape}")
    if (x < -NUM_TOL).any():
        raise InvalidInputError("x must be nonnegative")
    z = x.copy()
    for i in range(m.n):
        window = set(np.nonzero(z > 0)[0].tolist())
        window.add(i)
        res = slack_minimize(m, z, i, None, window)
        gain = min(res.min_slack, 1.0 - z[i])
        if gain > 0:
            z[i] += gain
    total = z.sum()
    if abs(total - m.full_rank) > 1e-6 * (1.0 + m.full_rank):
        raise InternalInvariantError(
            f"lift ended at mass {total}, expected rank {m.full_rank}"
        )
    return z


def polytope_min_slack(m: Matroid, x) -> float:
    """Global minimum of r(S) - x(S) over nonempty S; >= 0 iff x(S) <= r(S) all S.

    Closed forms for uniform/partition; brute force otherwise (n <= W_MAX).
    Combine with x >= 0 to get full membership in P(M).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(m, UniformMatroid):
        pool = _sorted_pool(range(m.n), x)
        best = None
        mass = 0.0
        for t, e in enumerate(pool, start=1):
            mass += x[e]
            val = min(t, m.k) - mass
            if best is None or val < best:
                best = val
        return float(best)
    if isinstance(m, PartitionMatroid):
        block_mins = []
        for bi, block in enumerate(m.blocks):
            pool = _sorted_pool(block, x)
            cap = m.capacities[bi]
            best = None
            mass = 0.0
            for t, e in enumerate(pool, start=1):
                mass += x[e]
                val = min(t, cap) - mass
                if best is None or val < best:
                    best = val
            block_mins.append(best)
        negative = sum(v for v in block_mins if v < 0)
        if negative < 0:
            return float(negative)
        return float(min(block_mins))
    if m.n > W_MAX:
        raise InvalidInputError(f"global slack scan needs n <= {W_MAX} for kind {m.kind!r}")
    best = None
    for mask in range(1, 1 << m.n):
        s = [e for e in range(m.n) if mask >> e & 1]
        val = m.rank(s) - float(sum(x[e] for e in s))
        if best is None or val < best:
            best = val
    return float(best)


def in_polytope(m: Matroid, x, tol: float = NUM_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if (x < -tol).any():
        return False
    return polytope_min_slack(m, x) >= -tol * (1.0 + m.full_rank)


@dataclass(frozen=True)
class FractionalPoint:
    """A point of the matroid polytope with its mass and optional cached value."""

    x: np.ndarray
    mass: float
    value: float | None = None

    @classmethod
    def of(cls, x, value: float | None = None) -> "FractionalPoint":
        x = np.asarray(x, dtype=float).copy()
        x.setflags(write=False)
        return cls(x=x, mass=float(x.sum()), value=value)
