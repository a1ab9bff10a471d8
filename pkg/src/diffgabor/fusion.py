"""Gabor fusion frames: the N coordinate subspaces W_i = {x : supp(x) = S + i}.

All projections are diagonal 0/1 matrices, so traces and products reduce to
exact set intersections; floats only enter when comparing against the real-
valued closed forms (simplex bound, chordal distance).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError

CLOSED_FORM_TOL = 1e-12


@dataclass(frozen=True)
class FusionSubspace:
    index: int
    support: frozenset
    dimension: int


@dataclass
class GaborFusionFrame:
    diffset: object
    subspaces: list

    @property
    def N(self):
        return self.diffset.N

    @property
    def K(self):
        return self.diffset.params.K

    def projection_matrix(self, i):
        """Dense diagonal 0/1 projection onto W_i (cross-checks only)."""
        P = np.zeros((self.N, self.N))
        idx = sorted(self.subspaces[i].support)
        P[idx, idx] = 1.0
        return P

    def projection_sum_diagonal(self):
        """Integer diagonal of sum_i P_i; equals K everywhere for a valid set."""
        diag = [0] * self.N
        for sub in self.subspaces:
            for m in sub.support:
                diag[m] += 1
        return diag


@dataclass
class FusionReport:
    tight_bound: float
    chordal_distances: np.ndarray  # pairwise d_c matrix (square roots)
    dc_squared: Optional[float]
    simplex_bound: float
    equidistant: bool
    sparsity: int
    optimal_packing: bool


def build_fusion_frame(ds):
    """Fusion frame of all N translates of the difference-set support."""
    base = [int(e) for e in ds.elements]
    K = ds.params.K
    subs = [
        FusionSubspace(i, frozenset((k + i) % ds.N for k in base), K)
        for i in range(ds.N)
    ]
    return GaborFusionFrame(ds, subs)


def fusion_frame_bounds(ff):
    """(A, B) = extreme eigenvalues of sum_i P_i — min/max diagonal counts."""
    diag = ff.projection_sum_diagonal()
    return float(min(diag)), float(max(diag))


def chordal_distance(W_a, W_b):
    """d_c = sqrt(m - Tr[P_a P_b]) = sqrt(m - |support_a intersect support_b|)."""
    if W_a.dimension != W_b.dimension:
        raise InvalidInputError(
            f"chordal distance needs equal dimensions, got {W_a.dimension} != {W_b.dimension}"
        )
    overlap = len(W_a.support & W_b.support)
    return float(np.sqrt(W_a.dimension - overlap))


def chordal_distance_matrix(ff):
    N = ff.N
    D = np.zeros((N, N))
    for a in range(N):
        for b in range(a + 1, N):
            D[a, b] = D[b, a] = chordal_distance(ff.subspaces[a], ff.subspaces[b])
    return D


def simplex_bound(m, M, N):
    """Packing bound m(N-m)M / (N(M-1)) on the minimal squared chordal distance."""
    if not 1 <= m <= N:
        raise InvalidInputError(f"subspace dimension m={m} out of range for N={N}")
    if M < 2:
        raise InvalidInputError(f"need at least two subspaces, got M={M}")
    return float(m * (N - m) * M / (N * (M - 1)))


def equidistance_check(ff, tol=CLOSED_FORM_TOL):
    """All pairwise d_c^2 equal, and equal to both K - lambda and K(N-K)/(N-1).

    Returns (True/False, common d_c^2 or None).
    """
    N, K, lam = ff.N, ff.K, ff.diffset.params.lam
    values = set()
    for a in range(N):
        for b in range(a + 1, N):
            overlap = len(ff.subspaces[a].support & ff.subspaces[b].support)
            values.add(K - overlap)  # exact integer d_c^2
    if len(values) != 1:
        return False, None
    dc2 = float(values.pop())
    ok = abs(dc2 - (K - lam)) == 0 and abs(dc2 - K * (N - K) / (N - 1)) <= tol
    return ok, dc2


def sparsity_count(ff):
    """Total support size KN of the canonical orthonormal subspace bases.

    Returns (KN, bases) where bases[i] lists the canonical-vector indices
    {(k + i) mod N : k in S} spanning W_i — each basis vector is 1-sparse.
    """
    bases = [sorted(sub.support) for sub in ff.subspaces]
    return ff.K * ff.N, bases


def support_product_norm(support_a, support_b):
    """Spectral norm of the product of two diagonal 0/1 projections: 1 iff they overlap."""
    return 1.0 if frozenset(support_a) & frozenset(support_b) else 0.0


def projection_product_norm(ff, a, b):
    """||P_a P_b||_2 for distinct subspaces; lambda >= 1 forces overlap, so 1."""
    if a == b:
        raise InvalidInputError("projection product norm is defined for distinct pairs")
    return support_product_norm(ff.subspaces[a].support, ff.subspaces[b].support)


def fusion_report(ff, tol=CLOSED_FORM_TOL):
    """Aggregate tightness / equidistance / packing / sparsity diagnostics."""
    A, B = fusion_frame_bounds(ff)
    equidistant, dc2 = equidistance_check(ff, tol)
    sb = simplex_bound(ff.K, ff.N, ff.N)
    sparsity, _ = sparsity_count(ff)
    tight = A == B
    optimal = bool(tight and equidistant and dc2 is not None and abs(dc2 - sb) <= tol)
    return FusionReport(
        tight_bound=A if tight else float("nan"),
        chordal_distances=chordal_distance_matrix(ff),
        dc_squared=dc2,
        simplex_bound=sb,
        equidistant=equidistant,
        sparsity=sparsity,
        optimal_packing=optimal,
    )
