"""In-house ADMM solvers for complex basis pursuit and its block variant.

Splitting: min ||z||_1 (or sum of block norms) subject to x in {Ax = y}, x = z.
The x-update is an exact affine projection — a scalar correction for tight
frames (A A* = cI) and an SVD pseudoinverse otherwise — and the z-update is
the complex (block) soft threshold.  Basis pursuit is positively homogeneous,
so the iteration runs on y/||y|| and the solution is rescaled afterwards;
this keeps convergence behavior scale-free.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import FactorizationError, InvalidInputError

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters_reached"

# relative tolerance for accepting A A* as a multiple of the identity
_SCALAR_PATH_TOL = 1e-10
# relative residual above which y is declared outside the range of A
_CONSISTENCY_TOL = 1e-8


@dataclass
class SolverConfig:
    rho: float = 10.0
    max_iters: int = 5000
    tol_primal: float = 1e-9
    tol_dual: float = 1e-9

    def __post_init__(self):
        if self.rho <= 0:
            raise InvalidInputError(f"rho={self.rho} must be positive")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be at least 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise InvalidInputError("tolerances must be positive")


@dataclass
class SolveResult:
    solution: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    status: str
    # (iterations, 2) array of per-iteration (primal, dual) residual norms,
    # in the normalized problem's scale; kept for divergence diagnostics.
    residual_history: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    objective: float = 0.0


@dataclass(frozen=True)
class BlockStructure:
    block_count: int
    block_size: int

    def __post_init__(self):
        if self.block_count < 1 or self.block_size < 1:
            raise InvalidInputError("block structure needs positive count and size")

    @property
    def dimension(self):
        return self.block_count * self.block_size

    def block_of(self, index):
        """Block containing coefficient `index` (coefficients are contiguous)."""
        if not 0 <= index < self.dimension:
            raise InvalidInputError(f"coefficient index {index} out of range")
        return index // self.block_size


class AffineProjection:
    """Orthogonal projection onto the affine set {x : Ax = y}.

    When A A* = cI (tight frame rows) the projection is the closed form
    w + A*(y - Aw)/c with no factorization.  Otherwise an economy SVD gives
    the row-space projector and a particular solution; y must then lie in
    the range of A or FactorizationError is raised.
    """

    def __init__(self, matrix, y):
        A = np.asarray(matrix, dtype=complex)
        if A.ndim != 2:
            raise InvalidInputError("matrix must be 2-d")
        y = np.asarray(y, dtype=complex).reshape(-1)
        n, d = A.shape
        if y.shape[0] != n:
            raise InvalidInputError(f"y has length {y.shape[0]}, expected {n}")
        self.matrix = A
        self.y = y
        H = A @ A.conj().T
        c = float(np.real(np.trace(H))) / n if n else 0.0
        if c <= 0.0:
            raise FactorizationError("measurement matrix has no energy")
        if np.max(np.abs(H - c * np.eye(n))) <= _SCALAR_PATH_TOL * c:
            self.scalar = c
            self.uses_factorization = False
            self.rank = n
            return
        self.scalar = None
        self.uses_factorization = True
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
        cutoff = s[0] * max(n, d) * np.finfo(float).eps
        r = int(np.sum(s > cutoff))
        if r == 0:
            raise FactorizationError("measurement matrix has rank zero")
        self.rank = r
        Ur, sr, self._Vr = U[:, :r], s[:r], Vh[:r, :]
        coeffs = Ur.conj().T @ y
        if np.linalg.norm(y - Ur @ coeffs) > _CONSISTENCY_TOL * max(1.0, np.linalg.norm(y)):
            raise FactorizationError("y is not in the range of the measurement matrix")
        self._particular = self._Vr.conj().T @ (coeffs / sr)

    def __call__(self, w):
        w = np.asarray(w, dtype=complex).reshape(-1)
        if not self.uses_factorization:
            return w + self.matrix.conj().T @ ((self.y - self.matrix @ w) / self.scalar)
        return w - self._Vr.conj().T @ (self._Vr @ w) + self._particular


def affine_projection(matrix, y):
    """Operator x -> x + A*(AA*)^+ (y - Ax); see AffineProjection."""
    return AffineProjection(matrix, y)


def complex_soft_threshold(z, tau):
    """Proximal map of the complex modulus: z * max(1 - tau/|z|, 0)."""
    if tau < 0:
        raise InvalidInputError(f"threshold tau={tau} must be nonnegative")
    arr = np.asarray(z, dtype=complex)
    mag = np.abs(arr)
    out = arr * np.maximum(1.0 - tau / np.maximum(mag, np.finfo(float).tiny), 0.0)
    if out.ndim == 0:
        return complex(out)
    return out


def block_soft_threshold(z, tau, blocks):
    """Per-block shrinkage: each block scales by max(1 - tau/||z_b||, 0)."""
    if tau < 0:
        raise InvalidInputError(f"threshold tau={tau} must be nonnegative")
    arr = np.asarray(z, dtype=complex).reshape(blocks.block_count, blocks.block_size)
    norms = np.linalg.norm(arr, axis=1)
    scale = np.maximum(1.0 - tau / np.maximum(norms, np.finfo(float).tiny), 0.0)
    return (arr * scale[:, None]).reshape(-1)


def _admm(matrix, y, cfg, shrink, objective):
    A = np.asarray(matrix, dtype=complex)
    y = np.asarray(y, dtype=complex).reshape(-1)
    d = A.shape[1]
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        sol = np.zeros(d, dtype=complex)
        return SolveResult(sol, 0, 0.0, 0.0, STATUS_CONVERGED, np.zeros((0, 2)), 0.0)
    project = AffineProjection(A, y / ynorm)
    x = np.zeros(d, dtype=complex)
    z = np.zeros(d, dtype=complex)
    u = np.zeros(d, dtype=complex)
    sqrt_d = np.sqrt(d)
    tau = 1.0 / cfg.rho
    history = np.empty((cfg.max_iters, 2))
    status = STATUS_MAX_ITERS
    r_norm = s_norm = np.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        x = project(z - u)
        z_old = z
        z = shrink(x + u, tau)
        u = u + x - z
        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(cfg.rho * np.linalg.norm(z - z_old))
        history[it - 1] = (r_norm, s_norm)
        eps_pri = cfg.tol_primal * sqrt_d * max(1.0, np.linalg.norm(x), np.linalg.norm(z))
        eps_dual = cfg.tol_dual * sqrt_d * max(1.0, cfg.rho * np.linalg.norm(u))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            status = STATUS_CONVERGED
            break
    solution = x * ynorm
    return SolveResult(
        solution=solution,
        iterations=it,
        primal_residual=r_norm,
        dual_residual=s_norm,
        status=status,
        residual_history=history[:it].copy(),
        objective=float(objective(solution)),
    )


def basis_pursuit(matrix, y, cfg=None):
    """min ||x||_1 subject to Ax = y, complex-native ADMM.

    The returned solution is the last projection output, so it satisfies the
    measurements to machine precision whenever y is consistent; on
    convergence it also matches the shrunk iterate to the stated tolerances.
    """
    cfg = cfg or SolverConfig()
    return _admm(matrix, y, cfg, complex_soft_threshold, lambda v: np.sum(np.abs(v)))


def block_basis_pursuit(matrix, y, blocks, cfg=None):
    """min sum_b ||x_b||_2 subject to Ax = y (mixed l2/l1, block sparsity)."""
    cfg = cfg or SolverConfig()
    A = np.asarray(matrix, dtype=complex)
    if blocks.dimension != A.shape[1]:
        raise InvalidInputError(
            f"block structure covers {blocks.dimension} coefficients, matrix has {A.shape[1]}"
        )

    def shrink(w, tau):
        return block_soft_threshold(w, tau, blocks)

    def objective(v):
        return np.sum(np.linalg.norm(v.reshape(blocks.block_count, blocks.block_size), axis=1))

    return _admm(A, y, cfg, shrink, objective)


def gaussian_measurement_coefficients(n, N, seed, complex_valued=False):
    """Seeded i.i.d. Gaussian n x N coefficient matrix (real by default).

    complex_valued=True switches to circular complex entries with unit
    variance, (g1 + i g2)/sqrt(2).
    """
    if n < 1 or N < 1:
        raise InvalidInputError("coefficient matrix needs positive dimensions")
    rng = np.random.default_rng(seed)
    if complex_valued:
        return (rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))) / np.sqrt(2)
    return rng.standard_normal((n, N))


@dataclass
class FusionMeasurementOperator:
    coefficients: np.ndarray  # n x N
    fusion_frame: object
    effective: np.ndarray  # (n*N_amb) x (N*K)
    block_structure: BlockStructure
    subspace_bases: list  # per subspace: sorted canonical support indices


def assemble_fusion_operator(a, ff):
    """Stacked matrix of the measurement map {c_j} -> {sum_j a_ij B_j c_j}_i.

    B_j is the canonical 1-sparse basis of W_j (columns e_m, m in the sorted
    support), so column block j of the effective matrix is a[:, j] placed on
    the support rows of every measurement copy.  Shape: (n*N) x (N*K).
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise InvalidInputError("coefficients must be an n x N matrix")
    n, cols = a.shape
    N, K = ff.N, ff.K
    if cols != N:
        raise InvalidInputError(f"coefficients have {cols} columns, fusion frame has {N}")
    effective = np.zeros((n * N, N * K), dtype=complex)
    row_base = np.arange(n) * N
    bases = []
    for j, sub in enumerate(ff.subspaces):
        support = sorted(sub.support)
        bases.append(support)
        for c_idx, m in enumerate(support):
            effective[row_base + m, j * K + c_idx] = a[:, j]
    return FusionMeasurementOperator(a, ff, effective, BlockStructure(N, K), bases)


def coefficients_to_subspace_vectors(ff, coeffs):
    """Expand stacked coefficients {c_j} to ambient vectors x_j = B_j c_j (rows)."""
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    N, K = ff.N, ff.K
    if coeffs.shape[0] != N * K:
        raise InvalidInputError(f"expected {N * K} stacked coefficients, got {coeffs.shape[0]}")
    out = np.zeros((N, N), dtype=complex)
    for j, sub in enumerate(ff.subspaces):
        out[j, sorted(sub.support)] = coeffs[j * K:(j + 1) * K]
    return out


def write_complex_matrix_csv(path, matrix):
    """CSV matrix format: header `rows,cols`, then rows*cols `re,im` lines, row-major."""
    M = np.asarray(matrix, dtype=complex)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise InvalidInputError("only vectors and matrices are supported")
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"{M.shape[0]},{M.shape[1]}\n")
        for value in M.reshape(-1):
            fh.write(f"{value.real:.17g},{value.imag:.17g}\n")
    return path


def read_complex_matrix_csv(path):
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InvalidInputError(f"{path}: empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split(","))
        entries = [complex(float(re), float(im)) for re, im in
                   (ln.split(",") for ln in lines[1:])]
    except ValueError as exc:
        raise InvalidInputError(f"{path}: malformed matrix CSV") from exc
    if rows < 0 or cols < 0 or len(entries) != rows * cols:
        raise InvalidInputError(
            f"{path}: header says {rows}x{cols} but {len(entries)} entries present"
        )
    return np.array(entries, dtype=complex).reshape(rows, cols)
