import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from mixcenter.distributions import (
    AtomUniform,
    Cauchy,
    CountableMixture,
    FiniteDiscrete,
    GenericDensity,
    Pareto,
    PowerTwoGeometric,
    Uniform,
    avg_quantile,
    cauchy_inverse_density,
    cauchy_quantile,
    model_from_spec,
    reflect,
)
from mixcenter.errors import DomainError

PI = math.pi


# frozen oracle values
TAN_04PI = 3.0776835371752527          # tan(0.4*pi), high-precision evaluation
CAUCHY_AVG_02_09 = 0.2923746290202891  # adaptive quadrature of the tan quantile


class TestCauchyQuantile:
    def test_symmetry_center(self):
        assert cauchy_quantile(0.5) == 0.0

    def test_tan_quarter(self):
        assert_allclose(cauchy_quantile(0.75), 1.0, rtol=1e-15)

    def test_high_level(self):
        assert_allclose(cauchy_quantile(0.9), TAN_04PI, rtol=1e-15)

    def test_strictly_increasing(self):
        ts = np.linspace(0.01, 0.99, 197)
        assert np.all(np.diff(cauchy_quantile(ts)) > 0)

    @pytest.mark.parametrize("t", [0.0, 1.0, -0.2, 1.3])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            cauchy_quantile(t)


class TestCauchyInverseDensity:
    def test_mode(self):
        assert cauchy_inverse_density(1.0 / PI) == 0.0

    def test_unit(self):
        assert_allclose(cauchy_inverse_density(1.0 / (2 * PI)), 1.0, rtol=1e-14)

    def test_two(self):
        assert_allclose(cauchy_inverse_density(1.0 / (5 * PI)), 2.0, rtol=1e-14)

    def test_zero_level_sentinel(self):
        assert cauchy_inverse_density(0.0) == math.inf
        assert cauchy_inverse_density(-1.0) == math.inf

    def test_above_mode_rejected(self):
        with pytest.raises(DomainError):
            cauchy_inverse_density(0.5)

    def test_round_trip(self):
        f = Cauchy().pdf
        for y in (1e-6, 1e-3, 0.05, 0.3):
            assert abs(f(cauchy_inverse_density(y)) - y) <= 1e-12


class TestCauchyModel:
    def test_density_normalized(self):
        val, _ = quad(Cauchy().pdf, -np.inf, np.inf)
        assert abs(val - 1.0) <= 1e-10

    def test_quantile_cdf_round_trip(self):
        c = Cauchy()
        xs = np.linspace(-100, 100, 401)
        assert_allclose(c.quantile(c.cdf(xs)), xs, atol=1e-9)

    def test_mean_status(self):
        assert Cauchy().mean_status == "undefined"

    def test_scale_wrapper(self):
        c = Cauchy(scale=4.0)
        assert_allclose(c.quantile(0.75), 4.0, rtol=1e-14)
        assert_allclose(c.cdf(4.0), 0.75, rtol=1e-14)

    def test_survival_integral_matches_quadrature(self):
        c = Cauchy()
        for a, b in [(-3.0, 2.0), (0.5, 11.0), (-20.0, -1.0)]:
            ref, _ = quad(lambda x: 1 - c.cdf(x), a, b)
            assert_allclose(c.survival_integral(a, b), ref, atol=1e-9)


class TestAvgQuantile:
    def test_cauchy_symmetric_window(self):
        assert abs(avg_quantile(Cauchy(), 0.25, 0.75)) <= 1e-12

    def test_cauchy_symmetric_windows_sweep(self):
        for a in (0.01, 0.1, 0.3, 0.45):
            assert abs(avg_quantile(Cauchy(), a, 1 - a)) <= 1e-10

    def test_cauchy_asymmetric_window_oracle(self):
        # cross-checked against (1/0.7)(1/pi) log(sin(0.2 pi)/sin(0.1 pi))
        got = avg_quantile(Cauchy(), 0.2, 0.9)
        closed = math.log(math.sin(0.2 * PI) / math.sin(0.1 * PI)) / (PI * 0.7)
        assert_allclose(got, CAUCHY_AVG_02_09, atol=1e-10)
        assert_allclose(got, closed, atol=1e-10)

    def test_uniform_midpoint(self):
        assert_allclose(avg_quantile(Uniform(0, 1), 0.2, 0.8), 0.5, rtol=1e-15)

    def test_rightward_shift_monotone(self):
        for model in (Cauchy(), Uniform(0, 1), AtomUniform(0, 1, 0.3)):
            base = avg_quantile(model, 0.2, 0.6)
            shifted = avg_quantile(model, 0.25, 0.65)
            assert shifted >= base - 1e-12

    def test_finite_discrete_exact(self):
        m = FiniteDiscrete([(0.0, 0.25), (1.0, 0.5), (3.0, 0.25)])
        # quantile is 0 on (0,.25], 1 on (.25,.75], 3 on (.75,1)
        got = avg_quantile(m, 0.2, 0.8)
        expected = (0.05 * 0 + 0.5 * 1 + 0.05 * 3) / 0.6
        assert got == pytest.approx(expected, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            avg_quantile(Cauchy(), 0.5, 0.5)


class TestGeneralizedInverse:
    MODELS = [
        Cauchy(),
        Uniform(-2, 5),
        FiniteDiscrete([(-1.0, 0.3), (0.5, 0.2), (2.0, 0.5)]),
        AtomUniform(0.0, 1.0, 0.5),
        Pareto(0.5),
        PowerTwoGeometric("positive"),
        PowerTwoGeometric("negative"),
    ]

    @pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__ + getattr(m, "sign", ""))
    def test_cdf_nondecreasing(self, model):
        xs = np.linspace(-40, 40, 301)
        cdf = np.array([float(model.cdf(x)) for x in xs])
        assert np.all(np.diff(cdf) >= -1e-15)

    @pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__ + getattr(m, "sign", ""))
    def test_quantile_is_generalized_inverse(self, model):
        eps = 1e-9
        for x in np.linspace(-30, 30, 41):
            t = float(model.cdf(x))
            if t + eps >= 1.0 or t + eps <= 0.0:
                continue
            assert float(model.quantile(t + eps)) >= x - 1e-9


class TestFiniteDiscrete:
    def test_prob_sum_enforced(self):
        with pytest.raises(DomainError):
            FiniteDiscrete([(0, 0.5), (1, 0.5001)])

    def test_values_strictly_increasing(self):
        with pytest.raises(DomainError):
            FiniteDiscrete([(1, 0.5), (1, 0.5)])

    def test_sampling_bernoulli(self):
        m = FiniteDiscrete([(0.0, 0.5), (1.0, 0.5)])
        rng = np.random.default_rng(11)
        draws = m.sample(rng, 10_000)
        assert abs(draws.mean() - 0.5) <= 0.02

    def test_reflected_exact(self):
        m = FiniteDiscrete([(0.0, 0.25), (1.0, 0.75)])
        r = m.reflected()
        assert list(r.values) == [-1.0, 0.0]
        assert list(r.probs) == [0.75, 0.25]


class TestPowerTwoGeometric:
    def test_positive_pmf(self):
        nu = PowerTwoGeometric("positive", 10)
        pmf = dict(nu.pmf_fractions())
        assert pmf[1] == Fraction(1, 2)
        assert pmf[4] == Fraction(1, 8)

    def test_truncated_mass_exact(self):
        for K in (1, 5, 20, 40):
            nu = PowerTwoGeometric("positive", K)
            total = sum(p for _, p in nu.pmf_fractions())
            assert total == 1 - Fraction(1, 2 ** (K + 1))
            gamma = PowerTwoGeometric("negative", K)
            total_g = sum(p for _, p in gamma.pmf_fractions())
            assert total_g == 1 - Fraction(1, 2 ** (K + 1))

    def test_sampling_atom_one(self):
        nu = PowerTwoGeometric("positive")
        rng = np.random.default_rng(5)
        draws = nu.sample(rng, 10_000)
        assert abs((draws == 1.0).mean() - 0.5) <= 0.02

    def test_quantiles(self):
        nu = PowerTwoGeometric("positive")
        assert nu.quantile(0.3) == 1.0
        assert nu.quantile(0.6) == 2.0
        assert nu.quantile(0.8) == 4.0
        gamma = PowerTwoGeometric("negative")
        # F(-2)=1, F(-4)=1/2, F(-8)=1/4; quantile is the generalized inverse
        assert gamma.quantile(0.6) == -2.0
        assert gamma.quantile(0.5) == -4.0
        assert gamma.quantile(0.4) == -4.0
        assert gamma.quantile(0.3) == -4.0
        assert gamma.quantile(0.2) == -8.0

    def test_mean_statuses(self):
        assert PowerTwoGeometric("positive").mean_status == "+inf"
        assert PowerTwoGeometric("negative").mean_status == "-inf"


class TestAtomUniform:
    def test_mean_consistent_with_cdf(self):
        m = AtomUniform(0.0, 1.0, 0.5)
        # mean = lower endpoint + integral of the survival function
        surv, _ = quad(lambda x: 1.0 - m.cdf(x), 0.0, 1.0, limit=200)
        assert_allclose(m.mean, 0.0 + surv, atol=1e-12)
        assert_allclose(m.mean, 0.5 * 0 + 0.5 * 0.5, atol=1e-15)

    def test_quantiles(self):
        m = AtomUniform(0.0, 1.0, 0.5)
        assert m.quantile(0.3) == 0.0
        assert_allclose(m.quantile(5 / 8), 0.25, rtol=1e-14)
        assert_allclose(m.quantile(7 / 8), 0.75, rtol=1e-14)


class TestGenericDensity:
    def test_normalization(self):
        g = GenericDensity(lambda x: 0.5 / (1 + x * x), lambda x: -x / (1 + x * x) ** 2)
        assert_allclose(g.pdf(0.0), 1.0 / PI, rtol=1e-9)

    def test_symmetry_enforced(self):
        with pytest.raises(DomainError):
            GenericDensity(
                lambda x: math.exp(-abs(x - 0.3)),
                lambda x: -math.copysign(math.exp(-abs(x - 0.3)), x - 0.3),
            )

    def test_quantile_round_trip(self):
        g = GenericDensity(lambda x: 0.5 / (1 + x * x), lambda x: -x / (1 + x * x) ** 2)
        for t in (0.1, 0.4, 0.5, 0.8, 0.95):
            assert abs(g.cdf(g.quantile(t)) - t) <= 1e-10

    def test_inverse_pdf(self):
        g = GenericDensity(lambda x: 0.5 / (1 + x * x), lambda x: -x / (1 + x * x) ** 2)
        x = g.inverse_pdf(1.0 / (2 * PI))
        assert_allclose(x, 1.0, rtol=1e-9)


class TestReflection:
    def test_avg_quantile_identity(self):
        m = AtomUniform(0.0, 1.0, 0.3)
        r = reflect(m)
        got = avg_quantile(r, 0.2, 0.7)
        expected = -avg_quantile(m, 0.3, 0.8)
        assert_allclose(got, expected, atol=1e-14)

    def test_mean_status_flip(self):
        assert reflect(Pareto(0.5)).mean_status == "-inf"


class TestSerialization:
    SPECS = [
        {"kind": "cauchy"},
        {"kind": "cauchy", "scale": 2.5},
        {"kind": "uniform", "a": 0.0, "b": 1.0},
        {"kind": "finite", "atoms": [[0.0, 0.3], [1.0, 0.7]]},
        {"kind": "point", "value": 2.0},
        {"kind": "ex01_nu", "truncation_K": 12},
        {"kind": "ex01_gamma", "truncation_K": 12},
        {"kind": "atom_uniform", "atom_x": 0.0, "right_y": 1.0, "atom_weight": 0.4},
        {"kind": "pareto", "shape": 0.5},
    ]

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: s["kind"])
    def test_build(self, spec):
        model = model_from_spec(spec)
        assert float(model.cdf(10.0 ** 9)) == pytest.approx(1.0, abs=1e-4)

    def test_round_trip(self):
        spec = {"kind": "atom_uniform", "atom_x": 0.0, "right_y": 1.0, "atom_weight": 0.4}
        model = model_from_spec(spec)
        assert model.to_spec() == spec

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            model_from_spec({"kind": "zeta"})


class TestSamplingGoodnessOfFit:
    def test_cauchy_ks_at_1e5(self):
        # threshold is the asymptotic 99% KS quantile at 1e5 samples
        c = Cauchy()
        rng = np.random.default_rng(1)
        draws = c.sample(rng, 100_000)
        s = np.sort(draws)
        i = np.arange(1, s.size + 1)
        F = c.cdf(s)
        ks = max(np.abs(i / s.size - F).max(), np.abs((i - 1) / s.size - F).max())
        assert ks <= 0.006

    def test_countable_mixture_sampling(self):
        mix = CountableMixture(
            [(Fraction(2, 3), PowerTwoGeometric("positive")),
             (Fraction(1, 3), PowerTwoGeometric("negative"))]
        )
        rng = np.random.default_rng(3)
        draws = mix.sample(rng, 20_000)
        assert abs((draws == 1.0).mean() - 1.0 / 3) <= 0.02
