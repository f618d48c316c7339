import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpower.dgauss import (
    DiscreteGaussianSpec,
    check_subgaussian,
    gaussian_lattice_sum,
    gaussian_state_closeness,
    rho,
    sample,
    subgaussian_hypothesis_holds,
    variant_tv_distance,
)


class TestRho:
    def test_at_zero(self):
        assert rho(3.7, 0.0) == 1.0

    def test_unit_point(self):
        assert rho(1.0, 1.0) == pytest.approx(math.exp(-math.pi), rel=1e-12)

    def test_even(self, rng):
        for _ in range(20):
            s = rng.uniform(0.1, 10)
            x = rng.uniform(-5, 5)
            assert rho(s, x) == rho(s, -x)

    def test_positive_width_required(self):
        with pytest.raises(ValueError):
            rho(0.0, 1.0)


class TestPmf:
    def test_symmetry_centered(self):
        spec = DiscreteGaussianSpec.full(s=2.5)
        for k in range(6):
            assert spec.pmf(k) == pytest.approx(spec.pmf(-k), rel=1e-14)

    def test_normalization(self):
        for spec in (
            DiscreteGaussianSpec.full(3.0, c=0.3),
            DiscreteGaussianSpec.truncated(3.0, L=6.0, R=9.0),
            DiscreteGaussianSpec.modular(3.0, N=16),
        ):
            assert abs(spec.probabilities.sum() - 1.0) <= 1e-12

    def test_normalizer_against_wider_window(self):
        # independent oracle: renormalize over a window 10x wider
        spec = DiscreteGaussianSpec.full(3.0)
        k = np.arange(-150, 151)
        w = np.exp(-np.pi * k * k / 9.0)
        oracle = w[150] / w.sum()
        assert spec.pmf(0) == pytest.approx(oracle, rel=1e-13)

    def test_modular_close_to_full(self):
        # d_TV(D, D mod N) <= 2*delta once N >= 2 s sqrt(2 ln(1/delta))
        s, delta = 3.0, 0.01
        N = 2 * math.ceil(s * math.sqrt(2 * math.log(1 / delta)))
        full = DiscreteGaussianSpec.full(s)
        mod = DiscreteGaussianSpec.modular(s, N=N)
        assert variant_tv_distance(full, mod) <= 2 * delta

    def test_outside_support_is_zero(self):
        spec = DiscreteGaussianSpec.modular(2.0, N=8)
        assert spec.pmf(5) == 0.0
        assert spec.pmf(-5) == 0.0
        trunc = DiscreteGaussianSpec.truncated(2.0, L=3.0, R=3.0)
        assert trunc.pmf(4) == 0.0

    def test_variant_validation(self):
        with pytest.raises(ValueError):
            DiscreteGaussianSpec.modular(2.0, N=7)
        with pytest.raises(ValueError):
            DiscreteGaussianSpec.truncated(2.0, L=-1.0, R=2.0)
        with pytest.raises(ValueError):
            DiscreteGaussianSpec(s=-1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.3, max_value=20.0), st.floats(min_value=-3.0, max_value=3.0))
def test_pmf_sums_to_one(s, c):
    spec = DiscreteGaussianSpec.full(s, c=c)
    assert abs(spec.probabilities.sum() - 1.0) <= 1e-12


class TestSampler:
    def test_point_mass_limit(self, rng):
        spec = DiscreteGaussianSpec.full(0.05)
        assert np.all(sample(spec, rng, size=1000) == 0)

    def test_clt_mean(self, rng):
        spec = DiscreteGaussianSpec.full(4.0)
        xs = sample(spec, rng, size=10**6)
        sigma = math.sqrt(np.sum(spec.values() ** 2 * spec.probabilities))
        assert abs(xs.mean()) <= 3 * sigma / 1000.0

    def test_truncated_support(self, rng):
        s = 2.0
        bound = s * math.sqrt(2 * math.log(10))
        spec = DiscreteGaussianSpec.truncated(s, L=bound, R=bound)
        xs = sample(spec, rng, size=20000)
        assert np.all((xs >= -bound) & (xs <= bound))

    def test_empirical_matches_pmf(self, rng):
        spec = DiscreteGaussianSpec.full(3.0, c=0.4)
        xs = sample(spec, rng, size=10**6)
        ks, counts = np.unique(xs, return_counts=True)
        emp = np.zeros_like(spec.probabilities)
        lookup = {int(k): i for i, k in enumerate(spec.support)}
        for k, cnt in zip(ks, counts):
            emp[lookup[int(k)]] = cnt / 10**6
        tv = 0.5 * np.abs(emp - spec.probabilities).sum()
        assert tv <= 0.01


class TestSubGaussian:
    def test_integer_lattice_always_certified(self):
        for s in (0.7, 1.0, 3.0, 8.0):
            cert = check_subgaussian(DiscreteGaussianSpec.full(s), alpha=s, tau=0.0)
            assert cert.valid, cert

    def test_shifted_lattice_with_hypothesis(self):
        tau = 0.1
        s = math.sqrt(math.log2(12 / tau) / math.pi)
        spec = DiscreteGaussianSpec.full(s, c=0.5)
        assert subgaussian_hypothesis_holds(spec, tau)
        assert check_subgaussian(spec, alpha=s, tau=tau).valid

    def test_point_mass(self):
        spec = DiscreteGaussianSpec.full(0.05)
        for alpha in (0.01, 1.0):
            assert check_subgaussian(spec, alpha=alpha, tau=0.0).valid

    def test_certificate_fails_when_too_tight(self):
        # width-s lattice Gaussian is not 0-subG(alpha^2) for alpha much
        # smaller than its actual standard deviation
        spec = DiscreteGaussianSpec.full(8.0)
        cert = check_subgaussian(spec, alpha=1.0, tau=0.0)
        assert not cert.valid

    def test_tail_bound(self, rng):
        spec = DiscreteGaussianSpec.full(3.0, c=0.5)
        tau = 0.1
        assert subgaussian_hypothesis_holds(spec, tau)
        cert = check_subgaussian(spec, alpha=3.0, tau=tau)
        assert cert.valid
        xs = sample(spec, rng, size=10**5) + 0.5
        for t in (2.0, 4.0, 6.0):
            emp = np.mean(np.abs(xs) > t)
            assert emp <= 2 * math.exp(tau) * math.exp(-t * t / 18.0) + 0.01

    def test_weighted_sum_closure(self):
        # MGF of a weighted sum of independent certified variables stays
        # below the composed certificate; exact product-form computation
        specs = [DiscreteGaussianSpec.full(2.0), DiscreteGaussianSpec.full(3.0, c=0.5)]
        taus = [0.0, 0.1]
        weights = [0.7, -1.3]
        alpha_tilde = math.sqrt(sum(w * w * sp.s**2 for w, sp in zip(weights, specs)))
        tau_tilde = sum(taus)
        for t in np.linspace(-2.0 / alpha_tilde, 2.0 / alpha_tilde, 21):
            log_mgf = 0.0
            for w, sp in zip(weights, specs):
                x = sp.values()
                log_mgf += math.log(np.sum(sp.probabilities * np.exp(t * w * x)))
            assert log_mgf <= tau_tilde + alpha_tilde**2 * t * t / 2 + 1e-9


class TestVariantDistances:
    def test_identical_specs(self):
        a = DiscreteGaussianSpec.full(2.0)
        assert variant_tv_distance(a, a) == 0.0

    def test_mismatched_params_error(self):
        with pytest.raises(ValueError):
            variant_tv_distance(DiscreteGaussianSpec.full(2.0), DiscreteGaussianSpec.full(3.0))

    def test_variant_closeness_bound(self):
        # full, truncated and modular variants are 4 delta e^tau close once
        # the window exceeds 10 s sqrt(2 ln(2/delta))
        delta, tau = 0.01, 0.1
        s = math.sqrt(math.log2(12 / tau) / math.pi)
        cut = 10 * s * math.sqrt(2 * math.log(2 / delta))
        bound = 4 * delta * math.exp(tau)
        c = 0.25
        full = DiscreteGaussianSpec.full(s, c=c)
        trunc = DiscreteGaussianSpec.truncated(s, L=cut, R=cut, c=c)
        mod = DiscreteGaussianSpec.modular(s, N=2 * math.ceil(cut), c=c)
        assert variant_tv_distance(full, trunc) <= bound
        assert variant_tv_distance(full, mod) <= bound
        assert variant_tv_distance(trunc, mod) <= bound


class TestStateCloseness:
    def _params(self, delta):
        s = 8 * math.sqrt(2 * math.log2(1 / delta))
        N = 2 * math.ceil(8 * s * math.sqrt(2 * math.log(1 / delta)))
        return s, N

    def test_trivial_phase(self):
        delta = 0.05
        s, N = self._params(delta)
        dists = gaussian_state_closeness(s, N, 0.0, lambda x: np.ones_like(x), delta)
        assert all(dv <= 9 * delta for dv in dists)
        assert all(dv <= 0.45 for dv in dists)

    def test_regime_error_names_inequality(self):
        with pytest.raises(ValueError, match="16"):
            gaussian_state_closeness(30.0, 64, 0.0, lambda x: np.ones_like(x), 0.05)
        with pytest.raises(ValueError, match="N/8"):
            s, N = self._params(0.05)
            gaussian_state_closeness(s, N, N, lambda x: np.ones_like(x), 0.05)

    def test_shifted_random_phase(self, rng):
        delta = 0.05
        s, N = self._params(delta)
        phases = rng.uniform(0, 2 * np.pi, size=10**6)

        def phase_fn(x):
            idx = np.asarray(np.abs(x) % len(phases), dtype=int)
            return np.exp(1j * phases[idx])

        dists = gaussian_state_closeness(s, N, N / 8.0, phase_fn, delta)
        assert all(dv <= 9 * delta for dv in dists)


def test_poisson_summation():
    for step in (0.5, 1.0, 2.0):
        for s in (1.0, 3.0, 8.0):
            lhs = gaussian_lattice_sum(s, step)
            rhs = (s / step) * gaussian_lattice_sum(1.0 / s, 1.0 / step)
            assert abs(lhs - rhs) <= 1e-10
