"""Dense Hermitian linear algebra: ground-truth eigendecomposition, random
matrix generators, the planted sign-vector hard instance, and projector
helpers used as oracles by the perturbation tests.

All randomness flows through explicit `numpy.random.Generator` arguments and
all returned arrays are frozen (non-writeable), so values can be shared
read-only across parallel trial workers.
"""

import json
from dataclasses import dataclass

import numpy as np

from ._validation import check_hermitian

__all__ = [
    "HermitianMatrix",
    "SpectralDecomposition",
    "HardInstance",
    "eigendecompose",
    "jacobi_eigh",
    "project_above",
    "left_singular_projector",
    "gen_hard_instance",
    "gen_symmetric_gaussian",
    "gen_gaussian_rect",
    "random_unit_vector",
    "save_matrix",
    "load_matrix",
    "save_hard_instance",
    "load_hard_instance",
]


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HermitianMatrix:
    """A validated dense Hermitian matrix.

    `values` is immutable and satisfies values[i, j] == conj(values[j, i])
    exactly.  `norm_bounded` records whether the caller asserted (or a check
    established) that the spectral norm is at most 1; algorithms that require
    a contraction consult this flag.
    """

    values: np.ndarray
    field_tag: str
    norm_bounded: bool = False

    def __post_init__(self):
        M = check_hermitian(np.asarray(self.values), name="values")
        if np.iscomplexobj(M):
            tag = "complex"
            M = M.astype(np.complex128, copy=True)
        else:
            tag = "real"
            M = M.astype(np.float64, copy=True)
        if self.field_tag not in ("real", "complex"):
            raise ValueError(f"field_tag must be 'real' or 'complex', got {self.field_tag!r}")
        if tag == "complex" and self.field_tag == "real":
            raise ValueError("complex entries with field_tag='real'")
        object.__setattr__(self, "values", _freeze(M))

    @classmethod
    def from_array(cls, A, norm_bounded=False):
        A = np.asarray(A)
        tag = "complex" if np.iscomplexobj(A) else "real"
        return cls(values=A, field_tag=tag, norm_bounded=norm_bounded)

    @property
    def dim(self):
        return self.values.shape[0]

    def assert_contraction(self, tol=1e-10):
        norm = np.linalg.norm(self.values, 2)
        if norm > 1.0 + tol:
            raise ValueError(f"spectral norm {norm:.6g} exceeds 1")
        object.__setattr__(self, "norm_bounded", True)
        return norm


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted by decreasing absolute value plus orthonormal
    eigenvectors (columns); the ground truth for every error metric."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _freeze(np.asarray(self.eigenvalues, dtype=float)))
        object.__setattr__(self, "eigenvectors", _freeze(np.asarray(self.eigenvectors)))
        lam = self.eigenvalues
        if np.any(np.abs(lam[:-1]) < np.abs(lam[1:]) - 1e-12):
            raise ValueError("eigenvalues are not sorted by decreasing absolute value")

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def gap(self, q):
        """|lambda_q| - |lambda_{q+1}| with 1-indexed q."""
        lam = np.abs(self.eigenvalues)
        if not 1 <= q < self.dim:
            raise ValueError(f"q must be in [1, {self.dim - 1}], got {q}")
        return float(lam[q - 1] - lam[q])

    def top_vector(self):
        return self.eigenvectors[:, 0]

    def check_invariants(self, A, ortho_tol=1e-10, recon_tol=None):
        V = self.eigenvectors
        d = self.dim
        gram = V.conj().T @ V - np.eye(d)
        if np.max(np.abs(gram)) > ortho_tol:
            raise ValueError(f"eigenvector columns not orthonormal: max dev {np.max(np.abs(gram)):.3g}")
        A = np.asarray(A)
        resid = np.linalg.norm(A - (V * self.eigenvalues) @ V.conj().T)
        bound = (1e-8 * d) if recon_tol is None else recon_tol
        if resid > bound:
            raise ValueError(f"reconstruction residual {resid:.3g} exceeds {bound:.3g}")
        return resid


def _orient_columns(V, tol=1e-12):
    """Rotate each column's global phase so its first significant entry is
    real and positive (sign flip in the real case)."""
    V = V.copy()
    d = V.shape[0]
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        i = idx[0] if idx.size else 0
        pivot = col[i]
        if np.iscomplexobj(V):
            if abs(pivot) > 0:
                V[:, j] = col * (pivot.conjugate() / abs(pivot))
        else:
            if pivot < 0:
                V[:, j] = -col
    return V


def _canonical_order(vals, V):
    """Order eigenpairs: |lambda| descending, then signed lambda descending,
    then (for exact ties) lexicographically smallest oriented eigenvector."""
    V = _orient_columns(V)
    order = np.lexsort((-vals, -np.abs(vals)))
    vals = vals[order]
    V = V[:, order]
    # break exact (|lambda|, lambda) ties by column content
    j = 0
    d = len(vals)
    while j < d - 1:
        k = j + 1
        while k < d and vals[k] == vals[j]:
            k += 1
        if k - j > 1:
            cols = sorted(range(j, k), key=lambda i: tuple(np.concatenate([V[:, i].real, V[:, i].imag]) if np.iscomplexobj(V) else V[:, i]))
            vals[j:k] = vals[cols]
            V[:, j:k] = V[:, cols]
        j = k
    return vals, V


class JacobiConvergenceError(RuntimeError):
    pass


def jacobi_eigh(A, tol=1e-14, max_sweeps=64):
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors) in ascending-eigenvalue order like
    `numpy.linalg.eigh`.  Complex off-diagonal entries are first rotated to
    the real axis by a diagonal phase, then eliminated by a real Givens
    rotation.  Deterministic for a fixed input; raises
    :class:`JacobiConvergenceError` with the residual norm if the off-diagonal
    mass does not vanish within `max_sweeps` sweeps.
    """
    A = check_hermitian(A, name="A")
    d = A.shape[0]
    complex_input = np.iscomplexobj(A)
    B = A.astype(np.complex128 if complex_input else np.float64, copy=True)
    V = np.eye(d, dtype=B.dtype)
    scale = np.linalg.norm(A)
    if d == 1 or scale == 0.0:
        return np.diag(B).real.copy(), V

    def offnorm():
        return np.sqrt(max(np.linalg.norm(B) ** 2 - np.linalg.norm(np.diag(B)) ** 2, 0.0))

    for _sweep in range(max_sweeps):
        if offnorm() <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = B[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                if complex_input and apq.imag != 0.0:
                    # diag phase making B[p, q] real positive
                    phase = apq / abs(apq)
                    B[:, q] *= phase.conjugate()
                    B[q, :] *= phase
                    V[:, q] *= phase.conjugate()
                    apq = B[p, q].real
                else:
                    apq = apq.real if complex_input else apq
                app = B[p, p].real
                aqq = B[q, q].real
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = B[p, :].copy()
                rq = B[q, :].copy()
                B[p, :] = c * rp - s * rq
                B[q, :] = s * rp + c * rq
                cp = B[:, p].copy()
                cq = B[:, q].copy()
                B[:, p] = c * cp - s * cq
                B[:, q] = s * cp + c * cq
                B[p, p] = app - t * apq
                B[q, q] = aqq + t * apq
                B[p, q] = 0.0
                B[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise JacobiConvergenceError(
            f"Jacobi sweeps did not converge: off-diagonal residual {offnorm():.3g} "
            f"after {max_sweeps} sweeps (scale {scale:.3g})"
        )
    vals = np.diag(B).real.copy()
    order = np.argsort(vals)
    return vals[order], V[:, order]


def eigendecompose(A, backend="auto"):
    """Ground-truth spectral decomposition with deterministic tie-breaking.

    Eigenpairs are ordered by decreasing |lambda| (among equal |lambda|, the
    larger signed value first; exact ties broken by the lexicographically
    smallest oriented eigenvector), and each eigenvector's first significant
    entry is made real positive.

    `backend` is "lapack" (default for speed at every size), "jacobi" (the
    dependency-free cyclic-sweep reference, practical for d up to a few
    hundred), or "auto" which currently picks "lapack".  Both backends pass
    through the same canonicalization, so they agree to roundoff.
    """
    M = check_hermitian(A, name="A")
    if backend == "auto":
        backend = "lapack"
    if backend == "jacobi":
        vals, V = jacobi_eigh(M)
    elif backend == "lapack":
        vals, V = np.linalg.eigh(M)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    vals, V = _canonical_order(vals, V)
    dec = SpectralDecomposition(eigenvalues=vals, eigenvectors=V)
    dec.check_invariants(M)
    return dec


def project_above(dec, threshold, mode="eigen-abs"):
    """Projector onto the span of eigenvectors with |lambda| > threshold.

    For Hermitian input the "singular" mode coincides with "eigen-abs" since
    the singular values are |lambda_i|; both are accepted.
    """
    if mode not in ("eigen-abs", "singular"):
        raise ValueError(f"mode must be 'eigen-abs' or 'singular', got {mode!r}")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    sel = np.abs(dec.eigenvalues) > threshold
    V = dec.eigenvectors[:, sel]
    P = V @ V.conj().T
    assert np.max(np.abs(P - P.conj().T)) <= 1e-10
    assert np.max(np.abs(P @ P - P)) <= 1e-10
    return P


def left_singular_projector(X, threshold, strict=True):
    """Projector onto left-singular vectors of X with singular value above
    (strict) or at least (non-strict) `threshold`."""
    U, svals, _ = np.linalg.svd(np.asarray(X), full_matrices=False)
    sel = svals > threshold if strict else svals >= threshold
    Us = U[:, sel]
    return Us @ Us.conj().T


# ---------------------------------------------------------------------------
# random matrix generators
# ---------------------------------------------------------------------------


def _symmetrize_upper(upper):
    """Reflect the upper triangle (including diagonal) to a symmetric matrix."""
    return upper + np.triu(upper, 1).T


def gen_symmetric_gaussian(d, scales, rng):
    """Symmetric matrix G with G_ij = scales_ij * g_ij, g iid standard normal
    on the upper triangle (diagonal included), reflected below."""
    b = np.asarray(scales, dtype=float)
    if b.shape != (d, d):
        raise ValueError(f"scales must be ({d}, {d})")
    if np.any(b < 0) or not np.array_equal(b, b.T):
        raise ValueError("scales must be symmetric and nonnegative")
    G = np.zeros((d, d))
    iu = np.triu_indices(d)
    G[iu] = b[iu] * rng.standard_normal(len(iu[0]))
    return HermitianMatrix.from_array(_symmetrize_upper(np.triu(G)))


def gen_gaussian_rect(N, n, field, rng):
    """N x n matrix with iid real or complex standard normal entries (complex:
    independent real/imag parts of variance 1/2)."""
    if not (N >= n >= 1):
        raise ValueError(f"need N >= n >= 1, got N={N}, n={n}")
    if field == "real":
        return rng.standard_normal((N, n))
    if field == "complex":
        return (rng.standard_normal((N, n)) + 1j * rng.standard_normal((N, n))) / np.sqrt(2.0)
    raise ValueError(f"field must be 'real' or 'complex', got {field!r}")


def random_unit_vector(d, rng):
    """Uniform point on the unit sphere (normalized standard Gaussian)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    while True:
        g = rng.standard_normal(d)
        nrm = np.linalg.norm(g)
        if nrm > 0:
            return g / nrm


# ---------------------------------------------------------------------------
# hard instance: planted sign vector under entrywise Gaussian noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HardInstance:
    """A = u u^T / d + N with u in {-1,1}^d and N symmetric Gaussian noise of
    entrywise standard deviation 1/(2000 sqrt(d)).  With high probability the
    top eigenvalue is 1 + O(1/1000), the second is below 0.08, and the top
    eigenvector is sign-aligned with u on more than 99.4% of entries."""

    dim: int
    sign_vector: np.ndarray
    noise_sigma: float
    matrix: HermitianMatrix
    seed: object

    def __post_init__(self):
        object.__setattr__(self, "sign_vector", _freeze(np.asarray(self.sign_vector, dtype=np.int8)))


def gen_hard_instance(d, seed):
    """Draw a planted-sign hard instance of dimension d >= 4."""
    if d < 4:
        raise ValueError("d must be >= 4")
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 2, size=d).astype(np.int8) * 2 - 1
    sigma = 1.0 / (2000.0 * np.sqrt(d))
    upper = np.zeros((d, d))
    iu = np.triu_indices(d)
    upper[iu] = sigma * rng.standard_normal(len(iu[0]))
    noise = _symmetrize_upper(upper)
    A = np.outer(u, u) / d + noise
    return HardInstance(
        dim=d,
        sign_vector=u,
        noise_sigma=sigma,
        matrix=HermitianMatrix.from_array(A),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# serialization: row-major CSV with a one-line header, JSON sidecar for the
# hard instance
# ---------------------------------------------------------------------------


def save_matrix(path, H):
    """Write a HermitianMatrix as CSV: header `dim=<d>,field=<tag>`, then one
    row per matrix row (complex entries interleaved as re,im)."""
    if not isinstance(H, HermitianMatrix):
        H = HermitianMatrix.from_array(H)
    M = H.values
    with open(path, "w") as fh:
        fh.write(f"dim={H.dim},field={H.field_tag}\n")
        for row in M:
            if H.field_tag == "complex":
                flat = np.empty(2 * len(row))
                flat[0::2] = row.real
                flat[1::2] = row.imag
            else:
                flat = row
            fh.write(",".join(repr(float(x)) for x in flat) + "\n")


def load_matrix(path):
    with open(path) as fh:
        header = fh.readline().strip()
        fields = dict(part.split("=") for part in header.split(","))
        d = int(fields["dim"])
        tag = fields["field"]
        rows = []
        for line in fh:
            vals = np.array([float(x) for x in line.strip().split(",")])
            if tag == "complex":
                rows.append(vals[0::2] + 1j * vals[1::2])
            else:
                rows.append(vals)
    M = np.array(rows)
    if M.shape != (d, d):
        raise ValueError(f"matrix shape {M.shape} does not match header dim={d}")
    return HermitianMatrix.from_array(M)


def save_hard_instance(path_prefix, inst):
    """Write `<prefix>.csv` (matrix) and `<prefix>.json` (d, seed, u)."""
    save_matrix(f"{path_prefix}.csv", inst.matrix)
    with open(f"{path_prefix}.json", "w") as fh:
        json.dump({"d": inst.dim, "seed": inst.seed, "u": [int(x) for x in inst.sign_vector]}, fh)


def load_hard_instance(path_prefix):
    H = load_matrix(f"{path_prefix}.csv")
    with open(f"{path_prefix}.json") as fh:
        meta = json.load(fh)
    u = np.asarray(meta["u"], dtype=np.int8)
    return HardInstance(
        dim=meta["d"],
        sign_vector=u,
        noise_sigma=1.0 / (2000.0 * np.sqrt(meta["d"])),
        matrix=H,
        seed=meta["seed"],
    )
