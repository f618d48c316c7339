import math

import numpy as np
import pytest

from qpower.ledger import QueryLedger
from qpower.phase import (
    PhaseRegister,
    amp_estimate,
    amp_estimate_many,
    default_gpe_params,
    gpe_outcome_distribution,
    gpe_run,
    gpe_sample_errors,
    inverse_qft,
    qft,
    subgpe,
    subgpe_many,
    subgpe_params,
)


class TestQFT:
    def test_uniform_to_point_mass(self):
        N = 16
        reg = PhaseRegister(N, np.full(N, 1 / 4.0))
        out = inverse_qft(reg)
        probs = np.abs(out.amplitudes) ** 2
        assert probs[0] == pytest.approx(1.0, abs=1e-12)

    def test_point_mass_to_uniform(self):
        N = 16
        amps = np.zeros(N)
        amps[0] = 1.0
        out = inverse_qft(PhaseRegister(N, amps))
        assert np.allclose(np.abs(out.amplitudes), 1 / 4.0, atol=1e-12)

    def test_round_trip(self, rng):
        N = 64
        a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        a /= np.linalg.norm(a)
        reg = PhaseRegister(N, a)
        back = qft(inverse_qft(reg))
        assert np.max(np.abs(back.amplitudes - a)) <= 1e-10

    def test_unitary(self, rng):
        N = 32
        a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        a /= np.linalg.norm(a)
        out = inverse_qft(PhaseRegister(N, a))
        assert abs(np.linalg.norm(out.amplitudes) - 1.0) <= 1e-12

    def test_register_validation(self):
        with pytest.raises(ValueError, match="unit norm"):
            PhaseRegister(4, np.array([1.0, 1.0, 0.0, 0.0]))
        with pytest.raises(ValueError, match="even"):
            PhaseRegister(3, np.ones(3) / math.sqrt(3))


def _predicted_lattice_tv(a, s, N, delta):
    """TV between the exact outcome law and the predicted shifted discrete
    Gaussian, computed exactly over the full register."""
    y_exact, p_exact, _ = gpe_outcome_distribution(a, s, N, delta, method="exact")
    y_lat, p_lat, _ = gpe_outcome_distribution(a, s, N, delta, method="lattice")
    full = np.zeros(N)
    full[np.asarray(y_lat, dtype=int) % N] += p_lat
    return 0.5 * np.abs(p_exact - full).sum()


class TestGPE:
    def test_dual_route_agreement(self):
        # the Poisson closed form is the exact law to machine precision
        for a in (0.0, 0.37, 1.0, -0.6):
            tv = _predicted_lattice_tv(a, 60.0, 39000, 0.05)
            assert tv <= 1e-10

    def test_exact_tv_within_delta(self):
        delta = 0.05
        s, N = default_gpe_params(delta)
        for a in (0.0, 0.5, 1.0):
            assert _predicted_lattice_tv(a, s, N, delta) <= delta

    def test_estimate_rescaling_invariant(self, rng):
        res = gpe_run(0.3, rng, delta=0.05)
        assert res.estimate == 8.0 * res.y / res.N - 4.0
        assert 0.0 <= res.nu < 1.0

    def test_zero_phase_concentration(self, rng):
        delta = 0.01
        s, N = default_gpe_params(delta)
        errs = gpe_sample_errors(0.0, s, N, 2000, rng, delta=delta)
        bound = 8.0 * math.sqrt(math.log2(1 / delta)) / s
        assert np.mean(np.abs(errs) > bound) <= 2 * delta + 0.02

    def test_regime_validation_names_inequality(self, rng):
        with pytest.raises(ValueError, match="20"):
            gpe_run(0.5, rng, s=5.0, N=20000, delta=0.01)
        with pytest.raises(ValueError, match="even"):
            gpe_run(0.5, rng, s=80.0, N=20001, delta=0.01)
        with pytest.raises(ValueError, match="a="):
            gpe_run(1.5, rng, delta=0.05)

    def test_ledger_charge(self, rng):
        led = QueryLedger()
        gpe_run(0.2, rng, delta=0.05, ledger=led)
        s, _ = default_gpe_params(0.05)
        assert led.total("controlled_U_calls") == math.ceil(s * math.log2(s / 0.05))


class TestSubGPE:
    def test_tail_bound(self, rng):
        eps, tau, a = 0.05, 0.01, 0.3
        s, N = subgpe_params(eps, tau)
        errs = gpe_sample_errors(a, s, N, 20000, rng, delta=tau)
        for t in (1, 2, 3):
            emp = np.mean(np.abs(errs) > t * eps)
            bound = 2 * math.exp(tau) * math.exp(-t * t / 2) + tau
            assert emp <= bound + 3 * math.sqrt(bound / 20000) + 1e-3

    def test_mean_near_zero(self, rng):
        eps = 0.1
        vals = np.array([subgpe(0.0, eps, 0.08, rng) for _ in range(500)])
        assert abs(vals.mean()) <= 3 * eps / math.sqrt(500)

    def test_boundary_phase(self, rng):
        eps, tau = 0.05, 0.01
        est = subgpe(1.0, eps, tau, rng)
        half_width = 4 * eps * math.sqrt(math.log2(1 / tau))
        assert 1 - half_width <= est <= 1 + half_width

    def test_regime_error(self, rng):
        with pytest.raises(ValueError, match="decrease eps"):
            subgpe(0.0, 0.1, 1e-12, rng)

    def test_batch_matches_scalar_distribution(self, rng):
        eps, tau, a = 0.05, 0.05, 0.42
        batch = subgpe_many(np.full(4000, a), eps, tau, rng) - a
        singles = np.array([subgpe(a, eps, tau, rng) - a for _ in range(800)])
        # same law: compare moments within Monte-Carlo error
        assert abs(batch.mean() - singles.mean()) <= 4 * eps / math.sqrt(800)
        assert abs(batch.std() - singles.std()) <= 0.2 * eps

    def test_batch_ledger(self, rng):
        led = QueryLedger()
        subgpe_many(np.zeros(10), 0.05, 0.05, rng, ledger=led)
        assert led.total("controlled_U_calls") == 10 * math.ceil(math.log2(1 / 0.05) / 0.05)


class TestAmpEstimate:
    def test_zero_amplitude_fixed_point(self, rng):
        for _ in range(20):
            assert amp_estimate(0.0, 30, 0.1, rng) == 0.0

    def test_full_amplitude_fixed_point(self, rng):
        for _ in range(20):
            assert amp_estimate(1.0, 30, 0.1, rng) == 1.0

    def test_guarantee_grid(self, rng):
        for M in (10, 100):
            for delta in (0.1, 0.01):
                for p in np.linspace(0.0, 1.0, 11):
                    lam = amp_estimate_many(p, M, delta, 200, rng)
                    fail = np.mean(np.abs(lam - math.sqrt(p)) > 1.0 / M)
                    assert fail <= delta + 3 * math.sqrt(delta / 200) + 0.015

    def test_validation(self, rng):
        with pytest.raises(ValueError):
            amp_estimate(1.5, 10, 0.1, rng)
        with pytest.raises(ValueError):
            amp_estimate(0.5, 0, 0.1, rng)


class TestLedger:
    def test_empty(self):
        led = QueryLedger()
        assert led.total("matrix_queries") == 0
        assert led.report()["entries"] == []

    def test_single_charge(self):
        led = QueryLedger()
        led.charge("x", "f", 5)
        assert led.total("matrix_queries") == 5

    def test_negative_rejected(self):
        led = QueryLedger()
        with pytest.raises(ValueError, match="nonnegative"):
            led.charge("x", "f", -1)

    def test_unknown_counter(self):
        with pytest.raises(ValueError, match="counter"):
            QueryLedger().charge("x", "f", 1, counter="bogus")

    def test_totals_equal_log_sum(self):
        led = QueryLedger()
        led.charge("a", "f1", 2)
        led.charge("a", "f1", 3)
        led.charge("b", "f2", 4, counter="kp_reads")
        rep = led.report()
        for counter in ("matrix_queries", "kp_reads"):
            total = sum(e["total"] for e in rep["entries"] if e["counter"] == counter)
            assert total == rep["totals"][counter]
        assert led.subroutine_total("a") == 5

    def test_merge(self):
        a, b = QueryLedger(), QueryLedger()
        a.charge("s", "f", 1)
        b.charge("s", "f", 2)
        b.charge("t", "g", 7, counter="state_preps")
        a.merge(b)
        assert a.total("matrix_queries") == 3
        assert a.total("state_preps") == 7
