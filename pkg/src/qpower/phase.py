"""Statevector-level simulation of Gaussian-window phase estimation, a
calibrated amplitude-estimation emulator, and their outcome laws.

The phase estimator prepares a discrete-Gaussian-weighted register of even
size N, imprints the eigenphase exp(i pi a z / 4) together with a (-1)^z
sign, applies the inverse Fourier transform and measures.  Its outcome
distribution can be produced two ways:

* "exact"   -- build the N-dimensional register and FFT it (the literal
               simulation; memory O(N));
* "lattice" -- the closed form obtained through Poisson summation: the
               outcome y is a discrete Gaussian of width N/(sqrt(2) s)
               centered at N*(a/8 + 1/2).  In the admissible parameter
               regime the two laws agree to double-precision roundoff (the
               truncation and wrap-around corrections are exp(-Omega(s^2))),
               which a property test pins down; the lattice path is what
               makes large-N runs tractable.

Phases a are accepted in [-1, 1]: the mapped value a' = a/8 + 1/2 then stays
inside [3/8, 5/8], which keeps the same wrap-around margin the analysis needs
for a in [0, 1].
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_in_interval

__all__ = [
    "PhaseRegister",
    "GPEResult",
    "qft",
    "inverse_qft",
    "default_gpe_params",
    "subgpe_params",
    "gpe_initial_state",
    "gpe_outcome_distribution",
    "gpe_run",
    "gpe_sample_errors",
    "subgpe",
    "subgpe_many",
    "amp_estimate",
    "amp_estimate_many",
]


@dataclass(frozen=True)
class PhaseRegister:
    """Length-N unit-norm amplitude vector; register value r encodes
    z = r - N * [r >= N/2] in {-N/2, ..., N/2 - 1}."""

    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.N % 2 != 0 or self.N <= 0:
            raise ValueError("N must be even and positive")
        if amps.shape != (self.N,):
            raise ValueError(f"amplitudes must have shape ({self.N},)")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ValueError("amplitudes must have unit norm")
        object.__setattr__(self, "amplitudes", amps)


def inverse_qft(reg):
    """Exact inverse Fourier transform, kernel exp(-2 pi i r y / N)/sqrt(N)."""
    out = np.fft.fft(reg.amplitudes) / math.sqrt(reg.N)
    return PhaseRegister(reg.N, out / np.linalg.norm(out))


def qft(reg):
    out = np.fft.ifft(reg.amplitudes) * math.sqrt(reg.N)
    return PhaseRegister(reg.N, out / np.linalg.norm(out))


@dataclass(frozen=True)
class GPEResult:
    """One phase-estimation outcome: raw register value y, the estimate
    8 y / N - 4 (exactly), and the recovered lattice shift nu in [0, 1)."""

    estimate: float
    y: int
    nu: float
    a: float
    s: float
    N: int
    delta: float


def default_gpe_params(delta):
    check_in_interval(delta, 0.0, 0.1, "delta", lo_open=True)
    s = 20.0 * math.sqrt(2.0 * math.log2(1.0 / delta))
    N = 200 * math.ceil(s * math.sqrt(math.log2(100.0 / delta)))
    return s, N


def _validate_gpe(a, s, N, delta):
    check_in_interval(delta, 0.0, 0.1, "delta", lo_open=True)
    if not -1.0 <= a <= 1.0:
        raise ValueError(f"phase violation: a={a} outside [-1, 1]")
    if s < 20.0 * math.sqrt(2.0 * math.log2(1.0 / delta)) - 1e-9:
        raise ValueError(f"regime violation: s={s} < 20*sqrt(2*log2(1/delta))")
    if N % 2 != 0:
        raise ValueError(f"regime violation: N={N} must be even")
    if N < 16.0 * s * math.sqrt(2.0 * math.log(1.0 / delta)):
        raise ValueError(f"regime violation: N={N} < 16*s*sqrt(2*ln(1/delta))")


def gpe_initial_state(a, s, N):
    """Register proportional to rho(s, z) * (-1)^z * exp(i pi a z / 4)."""
    r = np.arange(N)
    z = r - N * (r >= N // 2)
    amps = np.exp(-np.pi * z * z / (s * s)) * np.exp(1j * np.pi * z * (a / 4.0 + 1.0))
    return PhaseRegister(N, amps / np.linalg.norm(amps))


# Exact simulation is used below this register size, the Poisson closed form
# above it.
_EXACT_LIMIT = 1 << 21
# Support radius of the outcome law in units of its width; the truncated mass
# is below exp(-pi * 4.6^2) ~ 1e-29.
_LATTICE_WIDTHS = 4.6


def gpe_outcome_distribution(a, s, N, delta=0.1, method="auto"):
    """Measurement law of the final register: (y values, probabilities, nu).

    y values are integers in [0, N); probabilities sum to 1.  With
    method="lattice" only the essential support window is materialized.
    """
    _validate_gpe(a, s, N, delta)
    a_prime = a / 8.0 + 0.5
    nu = (N * a_prime) % 1.0
    if method == "auto":
        method = "exact" if N <= _EXACT_LIMIT else "lattice"
    if method == "exact":
        reg = inverse_qft(gpe_initial_state(a, s, N))
        probs = np.abs(reg.amplitudes) ** 2
        probs /= probs.sum()
        return np.arange(N), probs, nu
    if method != "lattice":
        raise ValueError(f"unknown method {method!r}")
    center = N * a_prime
    width = N / (math.sqrt(2.0) * s)
    radius = int(math.ceil(_LATTICE_WIDTHS * width)) + 1
    y = np.arange(round(center) - radius, round(center) + radius + 1)
    if y[0] < 0 or y[-1] >= N:
        raise ValueError("outcome window leaves the register range; parameters out of regime")
    probs = np.exp(-np.pi * (y - center) ** 2 / (width * width))
    probs /= probs.sum()
    return y, probs, nu


def _sample_pmf(values, probs, rng, size):
    cdf = np.cumsum(probs)
    u = rng.random(size)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(values) - 1)
    return values[idx]


def gpe_run(a, rng, s=None, N=None, delta=0.01, ledger=None, method="auto"):
    """One Gaussian phase estimation run; the estimate is 8 y / N - 4.

    The estimation error (estimate - a) is delta-close in total variation to
    the discrete Gaussian on (8/N)(Z - nu) of width 8/(sqrt(2) s).
    """
    if s is None or N is None:
        s_def, N_def = default_gpe_params(delta)
        s = s if s is not None else s_def
        N = N if N is not None else N_def
    y_vals, probs, nu = gpe_outcome_distribution(a, s, N, delta, method)
    y = int(_sample_pmf(y_vals, probs, rng, None))
    if ledger is not None:
        ledger.charge("gpe", "gpe.controlled_u=s*log2(s/delta)",
                      math.ceil(s * math.log2(s / delta)), counter="controlled_U_calls")
    return GPEResult(estimate=8.0 * y / N - 4.0, y=y, nu=nu, a=a, s=s, N=N, delta=delta)


def gpe_sample_errors(a, s, N, size, rng, delta=0.01, method="auto"):
    """Vector of `size` iid estimation errors (estimate - a) at fixed (a,s,N)."""
    y_vals, probs, _ = gpe_outcome_distribution(a, s, N, delta, method)
    y = _sample_pmf(y_vals, probs, rng, size)
    return 8.0 * y / N - 4.0 - a


def subgpe_params(eps, tau):
    check_in_interval(eps, 0.0, 0.1, "eps", lo_open=True)
    check_in_interval(tau, 0.0, 0.1, "tau", lo_open=True)
    s = 4.0 * math.sqrt(2.0) / eps
    if s < 20.0 * math.sqrt(2.0 * math.log2(1.0 / tau)):
        raise ValueError(
            f"regime violation: s=4*sqrt(2)/eps={s:.4g} < 20*sqrt(2*log2(1/tau)); decrease eps or increase tau"
        )
    N = 200 * math.ceil(s * math.sqrt(math.log2(100.0 / tau)))
    return s, N


def subgpe(a, eps, tau, rng, ledger=None, method="auto"):
    """Sub-Gaussian phase estimate: the error is tau-close in total variation
    to a tau-sub-Gaussian(eps^2) random variable."""
    s, N = subgpe_params(eps, tau)
    res = gpe_run(a, rng, s=s, N=N, delta=tau, ledger=None, method=method)
    if ledger is not None:
        ledger.charge("subgpe", "subgpe.controlled_u=log2(1/tau)/eps",
                      math.ceil(math.log2(1.0 / tau) / eps), counter="controlled_U_calls")
    return res.estimate


def subgpe_many(a_values, eps, tau, rng, ledger=None):
    """Vectorized sub-Gaussian phase estimates for an array of phases sharing
    (eps, tau).  Uses the lattice outcome law; each row keeps its own center
    N*(a/8 + 1/2), so the per-phase lattice shift nu is faithfully preserved.
    """
    a_values = np.asarray(a_values, dtype=float)
    if np.any(np.abs(a_values) > 1.0):
        raise ValueError("phases must lie in [-1, 1]")
    s, N = subgpe_params(eps, tau)
    width = N / (math.sqrt(2.0) * s)
    radius = int(math.ceil(_LATTICE_WIDTHS * width)) + 1
    offsets = np.arange(-radius, radius + 1, dtype=float)
    center = N * (a_values / 8.0 + 0.5)
    base = np.rint(center)
    frac = center - base
    logits = -np.pi * (offsets[None, :] - frac[:, None]) ** 2 / (width * width)
    probs = np.exp(logits)
    probs /= probs.sum(axis=1, keepdims=True)
    cdf = np.cumsum(probs, axis=1)
    u = rng.random((len(a_values), 1))
    idx = (cdf < u).sum(axis=1)
    y = base + offsets[idx]
    if ledger is not None:
        ledger.charge("subgpe", "subgpe.controlled_u=log2(1/tau)/eps",
                      len(a_values) * math.ceil(math.log2(1.0 / tau) / eps),
                      counter="controlled_U_calls")
    return 8.0 * y / N - 4.0


# ---------------------------------------------------------------------------
# amplitude estimation emulator (sine-kernel outcome law, median boosted)
# ---------------------------------------------------------------------------


def _fejer(x, M):
    """sin^2(pi M x) / (M sin(pi x))^2 with the removable singularity at
    integer x filled in."""
    x = np.mod(np.asarray(x, dtype=float) + 0.5, 1.0) - 0.5
    den = M * np.sin(np.pi * x)
    num = np.sin(np.pi * M * x)
    out = np.empty_like(x)
    tiny = np.abs(den) < 1e-300
    out[~tiny] = (num[~tiny] / den[~tiny]) ** 2
    out[tiny] = 1.0
    return out


def _ae_outcome_law(p_true, M):
    """Grid and single-shot outcome pmf of canonical phase-estimation-based
    amplitude estimation with an internal grid fine enough for |sqrt(p) -
    estimate| <= 1/(2M) on a hit."""
    M_int = 2 * math.ceil(math.pi * M)
    phi = math.asin(math.sqrt(p_true)) / math.pi  # in [0, 1/2]
    y = np.arange(M_int)
    probs = 0.5 * _fejer(y / M_int - phi, M_int) + 0.5 * _fejer(y / M_int + phi, M_int)
    probs /= probs.sum()
    estimates = np.abs(np.sin(np.pi * y / M_int))
    return estimates, probs


def _ae_reps(delta):
    return 2 * math.ceil(2.1 * math.log(2.0 / delta)) + 1


def amp_estimate(p_true, M, delta, rng, ledger=None):
    """Estimate sqrt(p_true) within 1/M with probability >= 1 - delta.

    Emulates the standard phase-estimation outcome distribution (sine kernel
    around the rotation angle) and takes a median of O(log 1/delta) shots.
    """
    return float(amp_estimate_many(p_true, M, delta, 1, rng, ledger)[0])


def amp_estimate_many(p_true, M, delta, size, rng, ledger=None):
    if not 0.0 <= p_true <= 1.0:
        raise ValueError("p_true must be in [0, 1]")
    if M < 1:
        raise ValueError("M must be >= 1")
    check_in_interval(delta, 0.0, 1.0, "delta", lo_open=True, hi_open=True)
    estimates, probs = _ae_outcome_law(p_true, M)
    r = _ae_reps(delta)
    shots = _sample_pmf(estimates, probs, rng, (size, r))
    if ledger is not None:
        ledger.charge("amp_estimate", "ae.unitary_calls=M*log2(1/delta)",
                      size * M * max(1, math.ceil(math.log2(1.0 / delta))),
                      counter="controlled_U_calls")
    return np.median(shots, axis=1)
