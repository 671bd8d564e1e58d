import numpy as np
import pytest
from numpy.testing import assert_allclose

from mixcenter.cauchy_mix import MixerConfig, build_mixer
from mixcenter.discrete_mix import zero_one_couplings
from mixcenter.distributions import Cauchy, PowerTwoGeometric
from mixcenter.errors import DomainError
from mixcenter.verify import (
    COUPLING_INVARIANTS,
    MIXER_INVARIANTS,
    SYMMETRIC_MIXER_INVARIANTS,
    ks_distance,
    ks_threshold,
    ks_two_sample,
    run_invariant_suite,
    sum_stats,
)


@pytest.fixture(scope="module")
def mixer():
    return build_mixer(MixerConfig(n=3, c=0.15, t_grid=512, seed=7))


class TestKsDistance:
    def test_self_samples_within_99_threshold(self):
        c = Cauchy()
        rng = np.random.default_rng(0)
        samples = c.sample(rng, 100_000)
        assert ks_distance(samples, c.cdf) <= 0.0065

    def test_all_samples_at_median(self):
        c = Cauchy()
        assert ks_distance(np.zeros(1000), c.cdf) == pytest.approx(0.5)

    def test_single_sample_at_median(self):
        c = Cauchy()
        assert ks_distance(np.array([0.0]), c.cdf) == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ks_distance(np.array([]), Cauchy().cdf)

    def test_threshold_levels(self):
        assert_allclose(ks_threshold(100_000), 1.628 / np.sqrt(100_000))
        assert ks_threshold(100, 0.95) < ks_threshold(100, 0.99)

    def test_two_sample_identical(self):
        a = np.arange(100.0)
        assert ks_two_sample(a, a) == 0.0

    def test_two_sample_disjoint(self):
        assert ks_two_sample(np.zeros(10), np.ones(10)) == 1.0


class TestSumStats:
    def test_zero_matrix(self):
        stats = sum_stats(np.zeros((10, 3)), 0.0)
        assert stats.mean_dev == 0.0
        assert stats.max_abs_dev == 0.0

    def test_exact_rows(self):
        rows = np.array([[0.1, 0.2, 0.15], [0.05, 0.3, 0.1]])
        stats = sum_stats(rows, 0.45)
        assert stats.max_abs_dev == pytest.approx(0.0, abs=1e-15)

    def test_per_branch_breakdown(self):
        rows = np.array([[1.0, 0.0], [0.0, 0.5]])
        stats = sum_stats(rows, 1.0, branch=np.array([1, 2]))
        assert stats.per_branch[1]["max_abs_dev"] == pytest.approx(0.0)
        assert stats.per_branch[2]["max_abs_dev"] == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            sum_stats(np.zeros((0, 3)), 0.0)


class TestInvariantSuite:
    def test_mixer_everything_passes(self, mixer):
        rep = run_invariant_suite(mixer)
        assert rep.all_pass
        assert rep.target == "constructive_mixer"

    def test_suite_coverage_matches_manifest(self, mixer):
        rep = run_invariant_suite(mixer)
        assert rep.names() == MIXER_INVARIANTS

    def test_each_invariant_appears_once(self, mixer):
        names = run_invariant_suite(mixer).names()
        assert len(names) == len(set(names))

    def test_symmetric_manifest(self):
        rep = run_invariant_suite(build_mixer(MixerConfig(n=3, c=0.0, seed=1)))
        assert rep.names() == SYMMETRIC_MIXER_INVARIANTS
        assert rep.all_pass

    def test_reflected_unwraps(self):
        rep = run_invariant_suite(
            build_mixer(MixerConfig(n=3, c=-0.1, t_grid=512, seed=2))
        )
        assert rep.names() == MIXER_INVARIANTS
        assert rep.all_pass
        assert rep.config["reflected_center"] == -0.1

    def test_coupling_suite(self):
        mix_x, _ = zero_one_couplings(12)
        nu = PowerTwoGeometric("positive", 12).truncated()
        gamma = PowerTwoGeometric("negative", 12).truncated()
        rep = run_invariant_suite(mix_x, marginals=[nu, nu, gamma], center=0)
        assert rep.names() == COUPLING_INVARIANTS
        assert rep.all_pass

    def test_rejected_config_never_reaches_suite(self):
        with pytest.raises(DomainError):
            run_invariant_suite(build_mixer(MixerConfig(n=3, c=0.3)))

    def test_unknown_target(self):
        with pytest.raises(TypeError):
            run_invariant_suite(42)

    def test_report_determinism(self):
        cfg = MixerConfig(n=3, c=0.12, t_grid=512, seed=3)
        rep_a = run_invariant_suite(build_mixer(cfg)).to_json()
        rep_b = run_invariant_suite(build_mixer(cfg)).to_json()
        assert rep_a == rep_b

    def test_report_dict_shape(self, mixer):
        d = run_invariant_suite(mixer).to_dict()
        assert set(d) == {"target", "all_pass", "invariants", "config", "seed", "extras"}
        for row in d["invariants"]:
            assert set(row) == {"name", "passed", "measured", "threshold"}
