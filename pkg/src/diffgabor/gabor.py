"""Gabor systems on Z_N: construction, Gram/coherence analytics, ETF checks.

A generator g in C^N yields the N^2 columns M_j T_k g with
T_k g(n) = g(n-k mod N) and M_j g(n) = exp(2 pi i j n / N) g(n).
Columns are ordered c(k, j) = k*N + j so the translates form contiguous
blocks [B_0 B_1 ... B_{N-1}]; everything downstream relies on that layout.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diffsets import DifferenceSetParams, normalized_generator
from .errors import InvalidInputError, UnsupportedParametersError

# Brute-force Gram scans are the oracle against the closed forms; they are
# kept dense only at desk scale.
DENSE_GRAM_LIMIT = 64
_SCAN_CHUNK = 256


@dataclass
class Generator:
    values: np.ndarray
    kind: str = "custom"  # difference_set | alltop | random_torus | custom
    params: Optional[DifferenceSetParams] = None
    norm: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        self.norm = float(np.linalg.norm(self.values))


@dataclass
class GaborFrame:
    generator: Generator
    N: int
    columns: np.ndarray  # N x N^2, column c(k,j) = k*N + j
    tightness_error: float  # max-entry deviation of Phi Phi* from N ||g||^2 I

    def column_index(self, k, j):
        return k * self.N + j

    def block(self, k):
        """Columns of the k-th translate block B_k (all modulations of T_k g)."""
        return self.columns[:, k * self.N:(k + 1) * self.N]


@dataclass
class CoherenceReport:
    mutual_coherence: float
    argmax_pair: tuple
    diagonal_block_offdiag_value: Optional[float]
    offdiag_block_max: Optional[float]
    welch_bound: float
    predicted: Optional[float]


@dataclass
class BlockCoherenceProfile:
    params: DifferenceSetParams
    within_block_offdiag_max: np.ndarray  # per translate k
    within_block_offdiag_min: np.ndarray
    within_block_expected: float  # sqrt((N-K)/(K(N-1)))
    offdiag_block_max: float
    offdiag_block_min: float  # min entry over off-diagonal blocks (lambda=1: == 1/K)
    offdiag_block_expected: float  # lambda/K
    diag_unit_error: float  # max | |<col,col>| - 1 | over all columns
    block_tightness_errors: np.ndarray  # per k: max |B_k B_k* - (N/K) P_k|


@dataclass
class EtfCheck:
    is_etf: bool
    norm_spread: float
    tightness_error: float
    equiangularity_spread: float
    coherence: float
    welch_bound_value: float


def translate(g, k):
    """T_k g(n) = g(n - k mod N)."""
    g = np.asarray(g)
    return np.roll(g, k % g.shape[0])


def modulate(g, j):
    """M_j g(n) = exp(2 pi i j n / N) g(n)."""
    g = np.asarray(g, dtype=complex)
    N = g.shape[0]
    n = np.arange(N)
    return np.exp(2j * np.pi * j * n / N) * g


def difference_set_generator(ds):
    """Unit-norm difference-set window chi_S / sqrt(K), with params attached."""
    return Generator(normalized_generator(ds), kind="difference_set", params=ds.params)


def alltop_generator(N):
    """Cubic-phase unimodular window g(j) = exp(2 pi i j^3 / N)/sqrt(N), N prime >= 5."""
    from .diffsets import _is_prime

    if not _is_prime(N) or N < 5:
        raise UnsupportedParametersError(f"Alltop window needs prime N >= 5, got {N}")
    j = np.arange(N)
    values = np.exp(2j * np.pi * (j ** 3 % N) / N) / np.sqrt(N)
    return Generator(values, kind="alltop")


def random_torus_generator(N, seed):
    """Window with i.i.d. uniform phases, entries exp(2 pi i u_j)/sqrt(N); seeded."""
    rng = np.random.default_rng(seed)
    u = rng.random(N)
    return Generator(np.exp(2j * np.pi * u) / np.sqrt(N), kind="random_torus")


def build_gabor_frame(generator):
    """All N^2 time-frequency shifts of a window, plus its tightness defect.

    Parameters
    ----------
    generator : Generator or array_like
        Nonzero window; plain arrays are wrapped as kind="custom".

    Returns
    -------
    GaborFrame
        columns[:, k*N + j] = M_j T_k g; tightness_error is the max-entry
        deviation of Phi Phi* from N ||g||^2 I (the system is always an
        N ||g||^2 - tight frame, so this is pure roundoff).
    """
    if not isinstance(generator, Generator):
        generator = Generator(generator)
    g = generator.values
    N = g.shape[0]
    if generator.norm == 0.0:
        raise InvalidInputError("zero generator does not span anything")
    n = np.arange(N)
    phases = np.exp(2j * np.pi * np.outer(n, n) / N)  # phases[n, j]
    columns = np.empty((N, N * N), dtype=complex)
    for k in range(N):
        columns[:, k * N:(k + 1) * N] = phases * np.roll(g, k)[:, None]
    H = columns @ columns.conj().T
    target = N * generator.norm ** 2
    err = float(np.max(np.abs(H - target * np.eye(N))))
    return GaborFrame(generator, N, columns, err)


def _coherence_scan(columns):
    """Brute-force max normalized |<phi_i, phi_j>|, i != j.

    Chunked over rows of the Gram matrix so memory stays bounded; the argmax
    pair is the lexicographically smallest one achieving the maximum.
    """
    norms = np.linalg.norm(columns, axis=0)
    if np.any(norms == 0):
        raise InvalidInputError("coherence undefined with zero columns")
    d = columns.shape[1]
    best = -1.0
    best_pair = (0, 0)
    for lo in range(0, d, _SCAN_CHUNK):
        hi = min(lo + _SCAN_CHUNK, d)
        block = np.abs(columns[:, lo:hi].conj().T @ columns)  # (hi-lo) x d
        block /= np.outer(norms[lo:hi], norms)
        block[np.arange(lo, hi) - lo, np.arange(lo, hi)] = -1.0  # mask diagonal
        idx = int(np.argmax(block))
        val = float(block.flat[idx])
        if val > best:
            best = val
            best_pair = (lo + idx // d, idx % d)
    return best, best_pair


def predicted_coherence(params):
    """Closed-form mutual coherence of the difference-set Gabor frame.

    sqrt((N-K)/(K(N-1))) when lambda = 1, otherwise the max of that and
    (K-1)/(N-1).
    """
    N, K = params.N, params.K
    base = np.sqrt((N - K) / (K * (N - 1)))
    if params.lam == 1:
        return float(base)
    return float(max((K - 1) / (N - 1), base))


def welch_bound(M, N):
    """Coherence lower bound sqrt((M-N)/(N(M-1))) for M >= N vectors in C^N.

    M = N gives 0 (a non-redundant system, e.g. an orthonormal basis);
    M < N is rejected because the bound only concerns spanning families.
    """
    if N < 1 or M < N:
        raise InvalidInputError(f"Welch bound needs M >= N >= 1, got M={M}, N={N}")
    if M == N:
        return 0.0
    return float(np.sqrt((M - N) / (N * (M - 1))))


def mutual_coherence(frame):
    """Brute-force coherence report for a GaborFrame (or a plain column matrix).

    For difference-set windows the report also splits the Gram maximum into
    the within-block value (all equal by the diagonal-block proposition) and
    the off-diagonal-block maximum, and carries the closed-form prediction.
    """
    if isinstance(frame, GaborFrame):
        columns = frame.columns
        params = frame.generator.params
        is_ds = frame.generator.kind == "difference_set" and params is not None
    else:
        columns = np.asarray(frame, dtype=complex)
        params = None
        is_ds = False
    mu, pair = _coherence_scan(columns)
    wb = welch_bound(columns.shape[1], columns.shape[0])
    diag_val = off_max = predicted = None
    if is_ds:
        profile = block_coherence_profile(frame, params)
        diag_val = float(np.max(profile.within_block_offdiag_max))
        off_max = profile.offdiag_block_max
        predicted = predicted_coherence(params)
    return CoherenceReport(mu, pair, diag_val, off_max, wb, predicted)


def block_coherence_profile(frame, params=None):
    """Per-block Gram diagnostics for a difference-set Gabor frame.

    Within every translate block B_k the off-diagonal Gram magnitudes are all
    sqrt((N-K)/(K(N-1))); entries of off-diagonal blocks B_r* B_q are 1/K for
    lambda = 1 and at most lambda/K otherwise.  Each block is also an
    N/K-tight frame for its coordinate span, checked via B_k B_k*.
    """
    if params is None:
        params = frame.generator.params
    if frame.generator.kind != "difference_set" or params is None:
        raise UnsupportedParametersError("block profile needs a difference-set generator")
    if frame.N > DENSE_GRAM_LIMIT:
        raise UnsupportedParametersError(f"dense block scan capped at N={DENSE_GRAM_LIMIT}")
    N, K, lam = params.N, params.K, params.lam
    cols = frame.columns
    G = np.abs(cols.conj().T @ cols)
    d = N * N
    diag = G[np.arange(d), np.arange(d)]
    diag_unit_error = float(np.max(np.abs(diag - 1.0)))

    within_max = np.empty(N)
    within_min = np.empty(N)
    off_mask = np.ones((d, d), dtype=bool)
    for k in range(N):
        sl = slice(k * N, (k + 1) * N)
        W = G[sl, sl].copy()
        off = ~np.eye(N, dtype=bool)
        within_max[k] = W[off].max()
        within_min[k] = W[off].min()
        off_mask[sl, sl] = False
    off_entries = G[off_mask]

    expected_within = float(np.sqrt((N - K) / (K * (N - 1))))
    block_errs = np.empty(N)
    support0 = np.asarray(sorted({int(e) for e in frame.generator.values.nonzero()[0]}))
    for k in range(N):
        Bk = frame.block(k)
        S = Bk @ Bk.conj().T
        supp = np.zeros(N)
        supp[(support0 + k) % N] = 1.0
        block_errs[k] = np.max(np.abs(S - (N / K) * np.diag(supp)))

    return BlockCoherenceProfile(
        params=params,
        within_block_offdiag_max=within_max,
        within_block_offdiag_min=within_min,
        within_block_expected=expected_within,
        offdiag_block_max=float(off_entries.max()),
        offdiag_block_min=float(off_entries.min()),
        offdiag_block_expected=lam / K,
        diag_unit_error=diag_unit_error,
        block_tightness_errors=block_errs,
    )


def is_etf(frame, tol=1e-10):
    """Check the three ETF axioms: equal norms, tightness, equiangularity.

    Works on a GaborFrame or any column matrix.  Diagnostics report the three
    defects plus the measured coherence and the Welch bound it should meet.
    """
    columns = frame.columns if isinstance(frame, GaborFrame) else np.asarray(frame, dtype=complex)
    rows, M = columns.shape
    if M > DENSE_GRAM_LIMIT ** 2:
        raise UnsupportedParametersError("dense ETF check capped at desk scale")
    norms = np.linalg.norm(columns, axis=0)
    if np.any(norms == 0):
        raise InvalidInputError("zero column")
    norm_spread = float(norms.max() - norms.min())
    unit = columns / norms
    H = unit @ unit.conj().T
    tight_err = float(np.max(np.abs(H - (M / rows) * np.eye(rows))))
    G = np.abs(unit.conj().T @ unit)
    off = ~np.eye(M, dtype=bool)
    vals = G[off]
    eq_spread = float(vals.max() - vals.min())
    mu = float(vals.max())
    wb = welch_bound(M, rows)
    ok = norm_spread <= tol * max(1.0, norms.max()) and tight_err <= tol * M / rows and eq_spread <= tol
    return EtfCheck(bool(ok), norm_spread, tight_err, eq_spread, mu, wb)


def _singer_family_mu2(q, d):
    if d == 2:
        return q / (q + 1) ** 2
    return (q ** d - q) ** 2 / (q ** 2 * (q ** d - 1) ** 2)


def family_table_rows(quadratic=(), quartic=(), singer=(), catalog=None, measure_limit=DENSE_GRAM_LIMIT):
    """Rows of the difference-set family table: predicted mu^2 vs Welch, plus
    a brute-force measurement whenever the catalog has the set at desk scale.

    quadratic: primes q = 3 mod 4 -> (q, (q-1)/2, (q-3)/4), mu^2 = (q-3)^2/(4(q-1)^2).
    quartic:   primes p in {37, 101} (catalog-backed) -> (p, (p-1)/4, (p-5)/16),
               mu^2 = (3p+1)/(p-1)^2 below p=57 and (p-5)^2/(16(p-1)^2) above.
    singer:    pairs (q, d) -> ((q^{d+1}-1)/(q-1), (q^d-1)/(q-1), (q^{d-1}-1)/(q-1)).
    """
    from . import diffsets

    if catalog is None:
        catalog = diffsets.catalog_lookup
    rows = []

    def add(family, N, K, lam, mu2):
        params = DifferenceSetParams(N, K, lam)
        row = {
            "family": family,
            "N": N,
            "K": K,
            "lambda": lam,
            "mu_squared": float(mu2),
            "welch_squared": 1.0 / (N + 1),
            "predicted_mu_squared": predicted_coherence(params) ** 2,
            "measured_mu_squared": None,
        }
        ds = catalog(N, K)
        if ds is not None and N <= measure_limit:
            fr = build_gabor_frame(difference_set_generator(ds))
            row["measured_mu_squared"] = _coherence_scan(fr.columns)[0] ** 2
        rows.append(row)

    for q, d in singer:
        N = (q ** (d + 1) - 1) // (q - 1)
        K = (q ** d - 1) // (q - 1)
        lam = (q ** (d - 1) - 1) // (q - 1)
        add(f"singer d={d}", N, K, lam, _singer_family_mu2(q, d))
    for q in quadratic:
        add("quadratic", q, (q - 1) // 2, (q - 3) // 4, (q - 3) ** 2 / (4 * (q - 1) ** 2))
    for p in quartic:
        mu2 = (3 * p + 1) / (p - 1) ** 2 if p < 57 else (p - 5) ** 2 / (16 * (p - 1) ** 2)
        add("quartic", p, (p - 1) // 4, (p - 5) // 16, mu2)
    return rows
