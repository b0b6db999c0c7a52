"""Distance spaces of negative type: catalogue, transforms, certification.

A symmetric nonnegative matrix D with zero diagonal is of negative type when
b @ D @ b <= 0 for every coefficient vector b with sum(b) == 0.  By
Schoenberg's classical criterion this happens exactly when the square roots
of the distances embed isometrically into l2, which in turn makes the
dispersion x @ D @ x concave on every slice {x : sum(x) == alpha}.

Everything here runs through one decomposition.  Fix a base point (index 0
by default) and set

    c[i]    = d(base, i)
    Q[i, j] = (d(base, i) + d(base, j) - d(i, j)) / 2

so that d(i, j) == c[i] + c[j] - 2 * Q[i, j] for all i, j, hence

    x @ D @ x == 2 * sum(x) * (c @ x) - 2 * (x @ Q @ x)

identically in x.  D is of negative type exactly when Q is positive
semidefinite, which is what `certify_negative_type` checks spectrally; a
negative eigenvector of Q converts directly into a violating vector b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalInvariantError, InvalidInputError

# PSD acceptance cutoff is PSD_TOL_SCALE * (1 + ||Q||_inf), with ||.||_inf
# the max absolute row sum.
PSD_TOL_SCALE = 1e-8
# Relative tolerance for numeric identities and inequality checks.
NUM_TOL = 1e-9
# Additive slack allowed when checking the triangle inequality.
METRIC_TOL = 1e-9

NORM_KINDS = ("l1", "l2", "lp", "cosine")
SET_KINDS = ("jaccard", "dice", "simple_matching", "russell_rao")
DISTANCE_KINDS = NORM_KINDS + SET_KINDS + ("explicit",)
TRANSFORM_NAMES = ("power", "ratio", "log1p", "exp_decay", "metric_power")


@dataclass(frozen=True)
class DistanceMatrix:
    """Validated pairwise distances over ground set {0, ..., n-1}.

    Invariants enforced at construction: square, n >= 2, finite, nonnegative,
    exactly symmetric, zero diagonal.  The wrapped array is read-only.
    """

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidInputError(f"distance matrix must be square, got shape {d.shape}")
        if d.shape[0] < 2:
            raise InvalidInputError("distance matrix needs at least 2 elements")
        if not np.isfinite(d).all():
            raise InvalidInputError("distance matrix entries must be finite")
        if (d < 0).any():
            raise InvalidInputError("distances must be nonnegative")
        if not np.array_equal(d, d.T):
            raise InvalidInputError("distance matrix must be symmetric")
        if np.diagonal(d).any():
            raise InvalidInputError("distance matrix diagonal must be zero")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class SchoenbergForm:
    """Base-point decomposition d(i,j) = c[i] + c[j] - 2 Q[i,j]."""

    q: np.ndarray
    c: np.ndarray
    base_point: int


@dataclass(frozen=True)
class NegTypeCertificate:
    """Outcome of spectral negative-type certification.

    `min_eigenvalue` is the smallest eigenvalue of Q restricted to the
    non-base coordinates (the base row and column of Q are identically
    zero and carry no information).  On failure, `witness` is a vector b
    with sum(b) == 0 and b @ D @ b == witness_value > 0.
    """

    is_negative_type: bool
    min_eigenvalue: float
    witness: np.ndarray | None = None
    witness_value: float | None = None

    @property
    def verdict(self) -> str:
        return "negative_type" if self.is_negative_type else "not_negative_type"


@dataclass(frozen=True)
class UnionInequalityCheck:
    """Both sides of the per-mass dispersion superadditivity inequality."""

    holds: bool
    lhs: float
    rhs: float


def _finalize(m: np.ndarray) -> DistanceMatrix:
    # Exact symmetrization plus diagonal/negativity cleanup of float fuzz.
    m = np.asarray(m, dtype=float)
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 0.0)
    np.clip(m, 0.0, None, out=m)
    return DistanceMatrix(m)


def _points_array(data) -> np.ndarray:
    pts = np.asarray(data, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise InvalidInputError(f"points must be a 1-D or 2-D array, got ndim={pts.ndim}")
    if pts.shape[0] < 2:
        raise InvalidInputError("need at least 2 points")
    if not np.isfinite(pts).all():
        raise InvalidInputError("points must be finite")
    return pts


def _incidence(data, universe) -> np.ndarray:
    if universe is None:
        raise InvalidInputError("set-based distances require an explicit universe")
    if isinstance(universe, (int, np.integer)):
        items = list(range(int(universe)))
    else:
        items = list(universe)
        if len(set(items)) != len(items):
            raise InvalidInputError("universe contains duplicate items")
    index = {item: pos for pos, item in enumerate(items)}
    sets = [frozenset(s) for s in data]
    if len(sets) < 2:
        raise InvalidInputError("need at least 2 sets")
    b = np.zeros((len(sets), max(len(items), 1)), dtype=float)
    for i, s in enumerate(sets):
        for item in s:
            if item not in index:
                raise InvalidInputError(f"set member {item!r} is not in the universe")
            b[i, index[item]] = 1.0
    return b[:, : len(items)] if items else np.zeros((len(sets), 0))


def build_distance(data, kind: str, *, p: float | None = None, universe=None) -> DistanceMatrix:
    """Build a DistanceMatrix from points, sets, or an explicit matrix.

    kind:
      "l1", "l2"          -- Minkowski distances of points (rows of `data`)
      "lp"                -- Minkowski with exponent `p`, 1 <= p <= 2
      "cosine"            -- angle arccos(<u,v>/|u||v|) in [0, pi]; rejects
                             zero vectors
      "jaccard"           -- 1 - |A&B|/|A|B|; d(empty, empty) = 0
      "dice"              -- |A^B| / (|A| + |B|); 0 when both sets empty
      "simple_matching"   -- |A^B| / |U|
      "russell_rao"       -- 1 - |A&B|/|U| off-diagonal; the diagonal is
                             forced to zero (the raw formula has nonzero
                             self-dissimilarity, and dropping it preserves
                             the negative-type property)
      "explicit"          -- `data` is the matrix itself

    Set-based kinds require `universe` (an int size or an iterable of items).
    """
    if kind == "explicit":
        return DistanceMatrix(np.asarray(data, dtype=float))

    if kind in NORM_KINDS:
        pts = _points_array(data)
        if kind == "cosine":
            norms = np.linalg.norm(pts, axis=1)
            if (norms <= 0).any():
                raise InvalidInputError("cosine distance is undefined for zero vectors")
            cos = (pts @ pts.T) / np.outer(norms, norms)
            return _finalize(np.arccos(np.clip(cos, -1.0, 1.0)))
        if kind == "l1":
            p = 1.0
        elif kind == "l2":
            p = 2.0
        else:
            if p is None:
                raise InvalidInputError("kind 'lp' requires the exponent p")
            p = float(p)
            if not 1.0 <= p <= 2.0:
                raise InvalidInputError(f"lp exponent must satisfy 1 <= p <= 2, got {p}")
        diff = np.abs(pts[:, None, :] - pts[None, :, :])
        if p == 1.0:
            m = diff.sum(axis=-1)
        elif p == 2.0:
            m = np.sqrt((diff**2).sum(axis=-1))
        else:
            m = (diff**p).sum(axis=-1) ** (1.0 / p)
        return _finalize(m)

    if kind in SET_KINDS:
        b = _incidence(data, universe)
        u_size = b.shape[1]
        inter = b @ b.T
        sizes = b.sum(axis=1)
        total = sizes[:, None] + sizes[None, :]
        symdiff = total - 2.0 * inter
        if kind == "jaccard":
            union = total - inter
            with np.errstate(invalid="ignore", divide="ignore"):
                m = np.where(union > 0, 1.0 - inter / np.where(union > 0, union, 1.0), 0.0)
        elif kind == "dice":
            with np.errstate(invalid="ignore", divide="ignore"):
                m = np.where(total > 0, symdiff / np.where(total > 0, total, 1.0), 0.0)
        else:
            if u_size < 1:
                raise InvalidInputError(f"kind '{kind}' requires a nonempty universe")
            if kind == "simple_matching":
                m = symdiff / u_size
            else:  # russell_rao
                m = 1.0 - inter / u_size
        return _finalize(m)

    raise InvalidInputError(f"unknown distance kind {kind!r}")


def is_metric(dm: DistanceMatrix, tol: float = METRIC_TOL) -> bool:
    """Check the triangle inequality d(i,j) <= d(i,k) + d(k,j) up to `tol`."""
    d = dm.d
    through = np.min(d[:, None, :] + d[None, :, :], axis=2)
    return bool(np.all(d <= through + tol))


def transform_distance(
    dm: DistanceMatrix,
    transform: str,
    *,
    alpha: float | None = None,
    lam: float | None = None,
) -> DistanceMatrix:
    """Apply an entrywise transform that preserves the negative-type property.

    transform:
      "power"         -- d**alpha with 0 < alpha <= 1
      "ratio"         -- d / (1 + d)
      "log1p"         -- log(1 + d)
      "exp_decay"     -- 1 - exp(-lam * d) with lam > 0
      "metric_power"  -- d**log2(n/(n-1)); requires d to be a metric, and
                         maps any metric to a negative-type (indeed metric)
                         distance
    """
    d = dm.d
    if transform == "power":
        if alpha is None or not 0.0 < float(alpha) <= 1.0:
            raise InvalidInputError("power transform requires alpha in (0, 1]")
        out = d ** float(alpha)
    elif transform == "ratio":
        out = d / (1.0 + d)
    elif transform == "log1p":
        out = np.log1p(d)
    elif transform == "exp_decay":
        if lam is None or not float(lam) > 0.0:
            raise InvalidInputError("exp_decay transform requires lam > 0")
        out = -np.expm1(-float(lam) * d)
    elif transform == "metric_power":
        if not is_metric(dm):
            raise InvalidInputError("metric_power requires a metric input")
        out = d ** math.log2(dm.n / (dm.n - 1))
    else:
        raise InvalidInputError(f"unknown transform {transform!r}")
    return _finalize(out)


def schoenberg_form(dm: DistanceMatrix, base_point: int = 0) -> SchoenbergForm:
    """Compute c and Q for the decomposition d(i,j) = c[i] + c[j] - 2 Q[i,j]."""
    n = dm.n
    if not 0 <= base_point < n:
        raise InvalidInputError(f"base point {base_point} out of range for n={n}")
    c = dm.d[base_point].copy()
    q = 0.5 * (c[:, None] + c[None, :] - dm.d)
    # The base row/column is zero in exact arithmetic; pin it exactly.
    q[base_point, :] = 0.0
    q[:, base_point] = 0.0
    q = 0.5 * (q + q.T)
    q.setflags(write=False)
    c.setflags(write=False)
    return SchoenbergForm(q=q, c=c, base_point=base_point)


def certify_negative_type(dm: DistanceMatrix) -> NegTypeCertificate:
    """Spectral test: D is of negative type iff Q is PSD.

    The eigendecomposition runs on Q restricted to the non-base coordinates.
    Acceptance threshold: min eigenvalue >= -PSD_TOL_SCALE * (1 + ||Q||_inf).
    On rejection the certificate carries a witness b (zero-sum, b @ D @ b > 0)
    assembled from the most negative eigenvector.
    """
    form = schoenberg_form(dm, 0)
    sub = form.q[1:, 1:]
    evals, evecs = np.linalg.eigh(sub)
    min_eig = float(evals[0])
    tau = PSD_TOL_SCALE * (1.0 + float(np.abs(form.q).sum(axis=1).max()))
    if min_eig >= -tau:
        return NegTypeCertificate(is_negative_type=True, min_eigenvalue=min_eig)
    u = evecs[:, 0]
    b = np.empty(dm.n)
    b[1:] = u
    b[0] = -u.sum()
    value = float(b @ dm.d @ b)
    if value <= 0:
        # b @ D @ b == -2 * min_eig * |u|^2 > 0 must hold for a genuinely
        # negative eigenvalue; anything else is a numerical contradiction.
        raise InternalInvariantError(
            f"negative eigenvalue {min_eig} produced a non-violating witness ({value})"
        )
    b.setflags(write=False)
    return NegTypeCertificate(
        is_negative_type=False, min_eigenvalue=min_eig, witness=b, witness_value=value
    )


def dispersion(dm: DistanceMatrix, x, w=None) -> float:
    """Ordered-pair dispersion x @ D @ x, plus w @ x when scores are given.

    For an indicator vector this counts every unordered pair twice.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (dm.n,):
        raise InvalidInputError(f"x must have shape ({dm.n},), got {x.shape}")
    val = float(x @ dm.d @ x)
    if w is not None:
        w = np.asarray(w, dtype=float)
        if w.shape != (dm.n,):
            raise InvalidInputError(f"w must have shape ({dm.n},), got {w.shape}")
        val += float(w @ x)
    return val


def check_union_inequality(dm: DistanceMatrix, x, a, b) -> UnionInequalityCheck:
    """Evaluate f(x^(A|B))/mass(A|B) >= f(x^A)/mass(A) + f(x^B)/mass(B).

    x^S zeroes x outside S and f is the pure quadratic dispersion.  The
    inequality is guaranteed for negative-type D; this helper just measures
    both sides.  A and B must be disjoint and each carry positive mass.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (dm.n,):
        raise InvalidInputError(f"x must have shape ({dm.n},), got {x.shape}")
    a_set = frozenset(int(e) for e in a)
    b_set = frozenset(int(e) for e in b)
    for e in a_set | b_set:
        if not 0 <= e < dm.n:
            raise InvalidInputError(f"element {e} out of range")
    if a_set & b_set:
        raise InvalidInputError("A and B must be disjoint")

    def _side(subset):
        xs = np.zeros(dm.n)
        idx = sorted(subset)
        xs[idx] = x[idx]
        mass = xs.sum()
        if mass <= 0:
            raise InvalidInputError("each side must carry positive mass")
        return float(xs @ dm.d @ xs) / mass

    lhs = _side(a_set | b_set)
    rhs = _side(a_set) + _side(b_set)
    holds = lhs >= rhs - NUM_TOL * (1.0 + abs(rhs))
    return UnionInequalityCheck(holds=holds, lhs=lhs, rhs=rhs)
