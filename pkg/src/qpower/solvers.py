"""Top-level eigensolver algorithms.

* `npm_classical`: power iteration with an injected additive error each step;
  converges to the top eigenvector provided the error keeps a small norm and
  a tiny overlap with it.
* `ipe` / `qnpm`: the simulated quantum variant, estimating each coordinate
  of the matrix-vector product with a sub-Gaussian phase-estimation error and
  charging the query ledger with the closed-form quantum costs.
* `estimate_lambda_q`: binary search for the q-th absolute eigenvalue from an
  amplitude-estimated counting statistic over a phase-estimation rounding
  model.
* `subspace_tomography`: recovery of a rank-q projector from (emulated)
  reflection access by doubling rounds of state tomography and a final SVD
  threshold at 1/14.
* `top_q_pipeline`, `prepare_v1_emulated`: compositions of the above.

Iteration and sample counts use base-2 logarithms and ceilings throughout so
runs are exactly reproducible.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_hermitian, check_in_interval
from .kptree import KPTree
from .phase import amp_estimate, subgpe, subgpe_many
from .spectral import eigendecompose, project_above, random_unit_vector
from .tomography import refined_tomography

__all__ = [
    "NPMConfig",
    "IPEConfig",
    "SubspaceConfig",
    "NPMResult",
    "QNPMResult",
    "SubspaceResult",
    "npm_classical",
    "compliant_noise_oracle",
    "cancelling_noise_oracle",
    "ipe",
    "qnpm",
    "qnpm_auto_gamma",
    "qnpm_matrix_query_charge",
    "estimate_lambda_q",
    "subspace_tomography",
    "top_q_pipeline",
    "prepare_v1_emulated",
]


# ---------------------------------------------------------------------------
# classical noisy power method
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NPMConfig:
    """Iteration schedule of the noisy power method.

    K defaults to ceil(10 * lambda1 / gamma * log2(20 d / eps)); passing a
    larger K only helps."""

    gamma: float
    eps: float
    K: int = None
    lambda1: float = 1.0

    def iterations(self, d):
        if self.K is not None:
            if self.K < 1:
                raise ValueError("K must be >= 1")
            return self.K
        return math.ceil(10.0 * abs(self.lambda1) / self.gamma * math.log2(20.0 * d / self.eps))


@dataclass
class NPMResult:
    w: np.ndarray
    n_iterations: int
    history: list = field(default_factory=list)


def npm_classical(A, cfg, noise_oracle, rng, ground_truth=None):
    """Noisy power iteration w <- (A w + G_k)/||.||, starting uniform on the
    sphere.

    If every G_k satisfies |<G_k, v1>| <= gamma/(50 sqrt(d)) and
    ||G_k|| <= eps*gamma/5, the output overlaps v1 by at least 1 - eps^2/2
    with probability at least 0.9.  When `ground_truth` (a
    SpectralDecomposition) is given, per-iteration tangents and noise stats
    are recorded for auditing the contraction.
    """
    M = check_hermitian(A, name="A")
    check_in_interval(cfg.eps, 0.0, 0.5, "eps", lo_open=True, hi_open=True)
    d = M.shape[0]
    K = cfg.iterations(d)
    w = random_unit_vector(d, rng)
    result = NPMResult(w=w, n_iterations=K)
    v1 = ground_truth.top_vector() if ground_truth is not None else None
    for k in range(K):
        G = noise_oracle(k, w, rng) if noise_oracle is not None else 0.0
        y = M @ w + G
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            raise ArithmeticError(f"iterate vanished at iteration {k}")
        w_next = y / nrm
        if v1 is not None:
            a1 = abs(float(v1 @ w))
            tan_before = math.sqrt(max(1.0 - a1 * a1, 0.0)) / max(a1, 1e-300)
            a1n = abs(float(v1 @ w_next))
            tan_after = math.sqrt(max(1.0 - a1n * a1n, 0.0)) / max(a1n, 1e-300)
            g_arr = G if isinstance(G, np.ndarray) else np.zeros(d)
            result.history.append(
                {
                    "iteration": k,
                    "tan_before": tan_before,
                    "tan_after": tan_after,
                    "noise_norm": float(np.linalg.norm(g_arr)),
                    "noise_v1_overlap": abs(float(v1 @ g_arr)),
                }
            )
        w = w_next
    result.w = w
    return result


def compliant_noise_oracle(v1, gamma, eps):
    """Noise driven to the admissible boundary: each G_k has norm exactly eps*gamma/5,
    with its v1 component drawn uniformly inside the allowed band
    [-gamma/(50 sqrt(d)), +gamma/(50 sqrt(d))]."""
    v1 = np.asarray(v1, dtype=float)
    d = len(v1)
    norm_target = eps * gamma / 5.0
    cap = min(gamma / (50.0 * math.sqrt(d)), norm_target)

    def oracle(_k, _w, rng):
        a = rng.uniform(-cap, cap)
        g = rng.standard_normal(d)
        g -= (v1 @ g) * v1
        g /= np.linalg.norm(g)
        return a * v1 + math.sqrt(norm_target**2 - a * a) * g

    return oracle


def cancelling_noise_oracle(A, v1, from_iteration=0):
    """Adversarial negative control: from `from_iteration` on, the noise
    exactly cancels the v1 component of A w (a violation of the allowed
    overlap bound by a factor of order sqrt(d)), so the iterate keeps zero
    overlap with v1 and the method cannot converge.  Cancelling at every
    step rather than once keeps roundoff from re-seeding the overlap, which
    exact arithmetic would rule out anyway."""
    M = A.values if hasattr(A, "values") else np.asarray(A)
    v1 = np.asarray(v1, dtype=float)

    def oracle(k, w, _rng):
        if k < from_iteration:
            return np.zeros(len(v1))
        return -(v1 @ (M @ w)) * v1

    return oracle


# ---------------------------------------------------------------------------
# inner-product estimation and the quantum noisy power method
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IPEConfig:
    """Error parameters of the inner-product estimator: failure budget delta,
    sub-Gaussian closeness tau, error width zeta.  Rows are split at entry
    magnitude d^{-1/4} (the boundary value counts as small)."""

    tau: float
    delta: float
    zeta: float

    def __post_init__(self):
        for name in ("tau", "delta"):
            check_in_interval(getattr(self, name), 0.0, 0.1, name, lo_open=True)
        if self.zeta <= 0:
            raise ValueError("zeta must be positive")

    @classmethod
    def for_qnpm(cls, d, K, eps, gamma):
        delta = 1.0 / (1000.0 * K * d)
        tau = delta / (1000.0 * K * d * d)
        zeta = eps * gamma / (100.0 * math.sqrt(d) * math.sqrt(math.log2(1000.0 * K * d / delta)))
        return cls(tau=tau, delta=delta, zeta=zeta)


def ipe_matrix_query_charge(d, delta, zeta):
    """Closed-form per-call query charge: d^0.75 log2(d/delta) for locating
    the large entries plus d^0.25 / zeta for the phase-estimated small part
    (constants 1, logs base 2)."""
    return d**0.75 * math.log2(d / delta) + d**0.25 / zeta


def _split_mask(u, d):
    # strict comparison: entries exactly at the threshold stay in the small part
    return np.abs(u) > d**-0.25


def ipe(u, w_tree, cfg, rng, ledger=None):
    """Estimate <u, w> for a unit w stored in a KP-tree and a row u with
    ||u|| <= 1.

    Entries of u above d^{-1/4} (at most sqrt(d) of them) are located and
    their contribution computed exactly through tree reads; the remaining
    small-entry part is estimated by the sub-Gaussian phase estimator at
    width cfg.zeta.  The total error is tau-close to tau-subG(zeta^2) with
    probability >= 1 - delta.
    """
    u = np.asarray(u, dtype=float)
    d = len(u)
    if np.linalg.norm(u) > 1.0 + 1e-12:
        raise ValueError("row norm exceeds 1")
    large = _split_mask(u, d)
    exact = 0.0
    for j in np.flatnonzero(large):
        exact += u[j] * w_tree.leaf_value(j).real
        if ledger is not None:
            ledger.charge("ipe", "ipe.tree_read=log2(d)", max(w_tree.depth, 1), counter="kp_reads")
    w_vec, _ = w_tree.subnormalized_amplitudes()
    a_small = float(u[~large] @ w_vec[~large].real)
    est = exact + subgpe(a_small, cfg.zeta, cfg.tau, rng, ledger=ledger)
    if ledger is not None:
        ledger.charge("ipe", "ipe.queries=d^0.75*log2(d/delta)+d^0.25/zeta",
                      ipe_matrix_query_charge(d, cfg.delta, cfg.zeta), counter="matrix_queries")
    return est


@dataclass
class QNPMResult:
    w: np.ndarray
    n_iterations: int
    config: IPEConfig
    K: int
    history: list = field(default_factory=list)
    gamma_used: float = None
    n_guesses: int = 1


def qnpm_matrix_query_charge(d, gamma, eps, lambda1=1.0):
    """Deterministic total matrix-query charge of one qnpm run:
    K * d * (d^0.75 log2(d/delta) + d^0.25/zeta)."""
    K = math.ceil(10.0 * lambda1 / gamma * math.log2(20.0 * d / eps))
    cfg = IPEConfig.for_qnpm(d, K, eps, gamma)
    return K * d * ipe_matrix_query_charge(d, cfg.delta, cfg.zeta)


def qnpm(A, gamma, eps, rng, ledger=None, lambda1=1.0, ground_truth=None):
    """Quantum noisy power method (simulated).

    Each iteration stores the iterate in a KP-tree and estimates every row
    inner product <A_j, w> with the inner-product estimator; the resulting
    per-coordinate errors are sub-Gaussian of width zeta, small enough that
    the classical convergence guarantee applies with probability >= 0.89.

    Rows are rescaled by max(1, ||A_j||) before estimation and the estimate
    scaled back, guarding against roundoff pushing a row norm above 1.
    """
    M = check_hermitian(A, name="A", require_contraction=False)
    check_in_interval(eps, 0.0, 1.0, "eps", lo_open=True)
    d = M.shape[0]
    K = math.ceil(10.0 * lambda1 / gamma * math.log2(20.0 * d / eps))
    cfg = IPEConfig.for_qnpm(d, K, eps, gamma)

    row_norms = np.linalg.norm(M, axis=1)
    scale = np.maximum(1.0, row_norms)
    rows = M / scale[:, None]
    large = _split_mask(rows, d)
    rows_large = np.where(large, rows, 0.0)
    rows_small = np.where(large, 0.0, rows)
    n_large = int(large.sum())

    v1 = ground_truth.top_vector() if ground_truth is not None else None
    per_iter_charge = d * ipe_matrix_query_charge(d, cfg.delta, cfg.zeta)

    w = random_unit_vector(d, rng)
    result = QNPMResult(w=w, n_iterations=K, config=cfg, K=K)
    for k in range(K):
        tree = KPTree.build(w)
        exact_part = rows_large @ w
        a_small = rows_small @ w
        est_small = subgpe_many(a_small, cfg.zeta, cfg.tau, rng, ledger=None)
        y = scale * (exact_part + est_small)
        if ledger is not None:
            ledger.charge("qnpm", "ipe.queries=d^0.75*log2(d/delta)+d^0.25/zeta",
                          per_iter_charge, counter="matrix_queries")
            ledger.charge("qnpm", "kptree.state_prep_reads", d * tree.state_prep_charge(),
                          counter="kp_reads")
            ledger.charge("qnpm", "ipe.tree_read=log2(d)", n_large * max(tree.depth, 1),
                          counter="kp_reads")
            ledger.charge("qnpm", "subgpe.controlled_u=log2(1/tau)/eps",
                          d * math.ceil(math.log2(1.0 / cfg.tau) / cfg.zeta),
                          counter="controlled_U_calls")
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            raise ArithmeticError(f"iterate vanished at iteration {k}")
        if v1 is not None:
            e = scale * (est_small - a_small)
            result.history.append(
                {
                    "iteration": k,
                    "noise_norm": float(np.linalg.norm(e)),
                    "noise_v1_overlap": abs(float(v1 @ e)),
                    "overlap": abs(float(v1 @ w)),
                }
            )
        w = y / nrm
    result.w = w
    return result


def qnpm_auto_gamma(A, eps, rng, ledger=None, gamma0=1.0, shrink=0.5, max_guesses=20,
                    lambda1=1.0):
    """Gap-oblivious driver: try exponentially decreasing gap guesses, running
    the quantum power method at each, until one verification matrix-vector
    residual certifies an approximate eigenvector.

    The residual check ||A w - (w^T A w) w|| <= gamma_guess / 4 accepts once
    the guess is at or below the true gap (where the output is eps-close to
    the top eigenvector, making the residual of order eps * gamma); each
    verification charges one approximate matrix-vector estimate.
    """
    M = check_hermitian(A, name="A")
    d = M.shape[0]
    gamma = gamma0
    last = None
    for guess in range(max_guesses):
        res = qnpm(M, gamma, eps, rng, ledger=ledger, lambda1=lambda1)
        approx = M @ res.w
        lam_hat = float(res.w @ approx)
        residual = float(np.linalg.norm(approx - lam_hat * res.w))
        if ledger is not None:
            ledger.charge("qnpm_auto_gamma", "autogamma.verify=d^1.5/gamma",
                          d**1.5 / gamma, counter="matrix_queries")
        res.gamma_used = gamma
        res.n_guesses = guess + 1
        last = res
        if residual <= gamma / 4.0:
            return res
        gamma *= shrink
    return last


# ---------------------------------------------------------------------------
# eigenvalue-magnitude search
# ---------------------------------------------------------------------------


def _fejer_kernel(x, M):
    x = np.mod(np.asarray(x, dtype=float) + 0.5, 1.0) - 0.5
    den = M * np.sin(np.pi * x)
    num = np.sin(np.pi * M * x)
    out = np.empty_like(x)
    tiny = np.abs(den) < 1e-300
    out[~tiny] = (num[~tiny] / den[~tiny]) ** 2
    out[tiny] = 1.0
    return out


def _binom_sf_half(r, q):
    """P[Bin(r, q) >= (r+1)/2] for odd r, vectorized over q."""
    from scipy.stats import binom

    return binom.sf((r + 1) // 2 - 1, r, q)


def estimate_lambda_q(dec, q, gamma, delta, rng, ledger=None):
    """Estimate |lambda_q| within gamma/100 with probability >= 1 - delta.

    Models phase estimation at precision gamma/200 (sine-kernel rounding,
    median-boosted so each eigenvalue rounds outside +-gamma/200 with
    probability at most delta/(10 d)), computes the exact mixture probability
    p_mu that the rounded magnitude clears a threshold mu, estimates
    sqrt(p_mu) by the amplitude-estimation emulator at precision
    1/(5 sqrt(q d)), and binary-searches mu on the grid {0, gamma/300, ...}.
    """
    d = dec.dim
    if not 1 <= q < d:
        raise ValueError(f"q must be in [1, {d - 1}], got {q}")
    check_in_interval(delta, 0.0, 1.0, "delta", lo_open=True, hi_open=True)
    lam = dec.eigenvalues
    delta_p = delta / (10.0 * d)

    # rounding model: Fejer kernel on a grid of lambda-resolution <= gamma/400,
    # median of r shots so the outside-(gamma/200) mass is below delta'
    M_pe = 1 << max(int(math.ceil(math.log2(1600.0 / gamma))), 3)
    grid = np.arange(M_pe)
    lam_grid = 4.0 * (grid / M_pe - 0.5)
    kernels = np.stack([_fejer_kernel(grid / M_pe - (lv / 4.0 + 0.5), M_pe) for lv in lam])
    kernels /= kernels.sum(axis=1, keepdims=True)
    # calibrate the median repetitions from the exact single-shot tail
    tails = np.array([k_row[np.abs(lam_grid - lv) > gamma / 200.0].sum()
                      for k_row, lv in zip(kernels, lam)])
    q_out = float(min(max(tails.max(), 1e-12), 0.49))
    r = 3
    while float(_binom_sf_half(r, q_out)) > delta_p:
        r += 2

    def p_mu(mu):
        q_single = kernels[:, np.abs(lam_grid) >= mu].sum(axis=1)
        q_single = np.clip(q_single, 0.0, 1.0)
        return float(np.mean(_binom_sf_half(r, q_single)))

    a_hi = math.sqrt(q / d * (1.0 - delta_p))
    a_lo = math.sqrt((q - 1.0) / d + delta_p * (d - q + 1.0) / d)
    split = 0.5 * (a_hi + a_lo)
    M_ae = math.ceil(5.0 * math.sqrt(q * d))
    n_grid_steps = math.ceil(300.0 / gamma) + 2
    delta_pp = delta / (10.0 * max(1.0, math.log2(300.0 / gamma)))

    lo, hi = 0, n_grid_steps
    step = gamma / 300.0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        est = amp_estimate(p_mu(mid * step), M_ae, delta_pp, rng, ledger=ledger)
        if est >= split:
            lo = mid
        else:
            hi = mid
    if ledger is not None:
        T = 1 << (int(math.ceil(math.log2(200.0 * math.log2(1.0 / delta_p) / gamma))) + 2)
        ledger.charge("estimate_lambda_q", "findgap.hamsim=T*M*log2(1/delta'')*iters",
                      T * M_ae * max(1, math.ceil(math.log2(1.0 / delta_pp)))
                      * max(1, math.ceil(math.log2(n_grid_steps))),
                      counter="controlled_U_calls")
    return 0.5 * (lo + hi) * step


# ---------------------------------------------------------------------------
# rank-q projector process tomography
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubspaceConfig:
    """Derived parameters of the projector-recovery algorithm."""

    d: int
    q: int
    eps: float
    delta_prime: float
    c: float = 1.0
    C: float = 1.0
    c_prime: float = 1.0
    m: int = None
    K: int = None
    eps_prime: float = None
    eta: float = None
    singular_threshold: float = 1.0 / 14.0
    abort_norm: float = 2.0

    @classmethod
    def create(cls, d, q, eps, delta_prime, c=1.0, C=1.0, c_prime=1.0):
        check_in_interval(eps, 0.0, 0.5, "eps", lo_open=True)
        check_in_interval(delta_prime, 0.0, 0.5, "delta_prime", lo_open=True)
        if not 1 <= q <= d:
            raise ValueError("need 1 <= q <= d")
        m = min(math.ceil(max(16.0 * C * C * q, 8.0 * c * math.log(10.0 / delta_prime))), d)
        K = max(math.ceil(math.log2(math.sqrt(d / m) + 1.0)), 1)
        eps_prime = eps / (65.0 + 98.0 * math.sqrt(math.log(10.0 * d / delta_prime) / c_prime))
        eta = 4.0 * 2.0**-K / (7.0 * math.sqrt(m))
        return cls(d=d, q=q, eps=eps, delta_prime=delta_prime, c=c, C=C, c_prime=c_prime,
                   m=m, K=K, eps_prime=eps_prime, eta=eta)


@dataclass
class SubspaceResult:
    W: np.ndarray
    aborted: bool
    V: np.ndarray = None
    V_ideal: np.ndarray = None
    E_tomo: np.ndarray = None
    config: SubspaceConfig = None
    singular_values: np.ndarray = None


def subspace_tomography(proj, cfg, rng, ledger=None, tomography_mode="sampled"):
    """Recover an isometry W with W W^dagger close to a rank<=q projector.

    Starts m Gaussian vectors scaled by eta (or basis vectors / 4 when m = d),
    runs K doubling rounds of {project through the emulated block-encoding,
    tomograph to relative precision, double}, aborts if any iterate norm
    exceeds 2, and returns the left-singular vectors of the final bundle with
    singular value above 1/14.  With the stated parameters
    ||W W^dagger - proj|| <= eps holds with probability >= 1 - delta_prime.

    tomography_mode "exact" injects error-free tomography (audit path).
    """
    P = np.asarray(proj)
    d = P.shape[0]
    if np.max(np.abs(P - P.conj().T)) > 1e-10 or np.max(np.abs(P @ P - P)) > 1e-10:
        raise ValueError("proj must be an orthogonal projector (within 1e-10)")
    rank = int(round(float(np.trace(P).real)))
    if rank > cfg.q:
        raise ValueError(f"projector rank {rank} exceeds configured q={cfg.q}")
    complex_case = np.iscomplexobj(P)

    m, K = cfg.m, cfg.K
    if m == d:
        G0 = np.eye(d, dtype=complex if complex_case else float) / 4.0
    else:
        if complex_case:
            G0 = cfg.eta * (rng.standard_normal((d, m)) + 1j * rng.standard_normal((d, m))) / math.sqrt(2.0)
        else:
            G0 = cfg.eta * rng.standard_normal((d, m))
    delta_tomo = cfg.delta_prime / (5.0 * m * K)

    if np.any(np.linalg.norm(G0, axis=0) > cfg.abort_norm):
        return SubspaceResult(W=None, aborted=True, config=cfg)

    cols = [G0[:, j].copy() for j in range(m)]
    for j in range(m):
        g = cols[j]
        for _k in range(K):
            gnorm = np.linalg.norm(g)
            psi = P @ (g / gnorm)
            # l2 target eps'/(2||g||) keeps the per-round error below eps'
            # after the doubling
            eps_call = min(cfg.eps_prime / (2.0 * gnorm), 0.49)
            est = refined_tomography(psi, eps_call, delta_tomo, rng, k=d, ledger=ledger,
                                     exact=(tomography_mode == "exact"))
            g = 2.0 * gnorm * est.psi_tilde
            if not complex_case:
                g = g.real
            if np.linalg.norm(g) > cfg.abort_norm:
                return SubspaceResult(W=None, aborted=True, config=cfg)
        cols[j] = g
    V = np.stack(cols, axis=1)
    V_ideal = (2.0**K) * (P @ G0)
    U, svals, _ = np.linalg.svd(V, full_matrices=False)
    keep = svals > cfg.singular_threshold
    W = U[:, keep]
    if ledger is not None:
        ledger.charge("subspace_tomography", "learnproj.u_pi=d*q/eps*log2(d/delta')",
                      math.ceil(d * cfg.q / cfg.eps * math.log2(d / cfg.delta_prime)),
                      counter="controlled_U_calls")
    return SubspaceResult(W=W, aborted=False, V=V, V_ideal=V_ideal, E_tomo=V - V_ideal,
                          config=cfg, singular_values=svals)


# ---------------------------------------------------------------------------
# compositions
# ---------------------------------------------------------------------------


def top_q_pipeline(A, q, gamma, eps, delta, rng, ledger=None, tomography_mode="sampled"):
    """Estimate |lambda_q|, build the spectral projector above the estimate
    minus gamma/2 (emulating the singular-value-transform construction), and
    recover its image by process tomography."""
    M = check_hermitian(A, name="A")
    dec = eigendecompose(M)
    lam_q = estimate_lambda_q(dec, q, gamma, delta / 2.0, rng, ledger=ledger)
    threshold = max(lam_q - gamma / 2.0, 0.0)
    P = project_above(dec, threshold)
    cfg = SubspaceConfig.create(M.shape[0], q, eps, delta / 2.0)
    if ledger is not None:
        ledger.charge("top_q_pipeline", "pipeline.qsvt_block=sqrt(d)/gamma*log2(dq/(eps*delta))",
                      math.ceil(math.sqrt(M.shape[0]) / gamma
                                * math.log2(M.shape[0] * q / (eps * delta))),
                      counter="controlled_U_calls")
    res = subspace_tomography(P, cfg, rng, ledger=ledger, tomography_mode=tomography_mode)
    res.lambda_q_estimate = lam_q
    res.projector = P
    return res


def prepare_v1_emulated(A, gamma, eps, rng, ledger=None):
    """Emulate preparing the top-eigenvector state: project a Gaussian start
    through the exact rank-1 projector and perturb by at most eps/2 to model
    approximate fixed-point amplification.

    Returns (state, overlap_ok); overlap_ok reports whether the Gaussian
    start had the 1/(100 sqrt(2 d)) overlap that makes the amplification
    succeed, which happens with probability >= 0.98 - exp(-d/2).
    """
    M = check_hermitian(A, name="A")
    d = M.shape[0]
    check_in_interval(eps, 0.0, 1.0, "eps", lo_open=True, hi_open=True)
    dec = eigendecompose(M)
    v1 = dec.top_vector()
    while True:
        g = rng.standard_normal(d)
        ov = float(v1 @ g)
        if ov != 0.0:
            break
    overlap_ok = abs(ov) / np.linalg.norm(g) >= 1.0 / (100.0 * math.sqrt(2.0 * d))
    v = math.copysign(1.0, ov) * v1
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    out = v + (eps / 2.0) * rng.uniform(0.0, 1.0) * direction
    out /= np.linalg.norm(out)
    if ledger is not None:
        ledger.charge("prepare_v1", "prepare_v1.queries=d*log2(2/eps)/gamma",
                      math.ceil(d * math.log2(2.0 / eps) / gamma), counter="matrix_queries")
    return out, overlap_ok
