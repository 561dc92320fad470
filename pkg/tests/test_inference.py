"""Sampler, MAP, and diagnostics tests.

The heavier end-to-end recovery checks live in the acceptance suite; these
tests pin the contracts: log-posterior arithmetic, seed determinism,
warmup exclusion, diagnostics behavior on engineered chains, and MAP
domination of the sampled posterior.
"""

import math

import numpy as np
import pytest

from ppmkit import (
    Dataset,
    DiagnosticsError,
    FitConfig,
    FitError,
    MeanFunctionSpec,
    ModelSpec,
    PosteriorDraws,
    VarianceFunctionSpec,
    diagnostics,
    fit,
    fit_ensemble,
    log_posterior,
    normal,
    plug_in_fit,
    posterior_predictive,
    simulate_dataset,
    truncated_normal,
)
from ppmkit.inference import compute_diagnostics

HALF_LOG_2PI = 0.9189385332046727


def constant_mean_model(sigma_prior=None):
    """Linear mean with slope pinned near zero: y ~ Normal(theta0, sigma)."""
    return ModelSpec(
        mean=MeanFunctionSpec("linear"),
        variance=VarianceFunctionSpec("constant"),
        priors=(normal(0.0, 5.0), normal(0.0, 5.0),
                sigma_prior or truncated_normal(0.0, 2.0, lower=0.0)),
    )


def true_model_spec():
    return ModelSpec(
        mean=MeanFunctionSpec("true_model"),
        variance=VarianceFunctionSpec("constant"),
    )


class TestModelSpec:
    def test_prior_count_enforced(self):
        with pytest.raises(ValueError):
            ModelSpec(
                mean=MeanFunctionSpec("true_model"),
                variance=VarianceFunctionSpec("constant"),
                priors=(normal(0.0, 5.0),),
            )

    def test_default_priors_fill_in(self):
        m = true_model_spec()
        assert len(m.priors) == 3
        assert m.priors[2].family == "truncated_normal"

    def test_bernoulli_requires_zero_one_link(self):
        with pytest.raises(ValueError):
            ModelSpec(mean=MeanFunctionSpec("linear", n_features=2), family="bernoulli",
                      mean_link="identity")

    def test_bernoulli_takes_no_variance(self):
        with pytest.raises(ValueError):
            ModelSpec(
                mean=MeanFunctionSpec("linear", n_features=2),
                family="bernoulli",
                mean_link="logit",
                variance=VarianceFunctionSpec("constant"),
            )

    def test_regression_requires_variance(self):
        with pytest.raises(ValueError):
            ModelSpec(mean=MeanFunctionSpec("true_model"))

    def test_student_t_needs_df(self):
        with pytest.raises(ValueError):
            ModelSpec(
                mean=MeanFunctionSpec("true_model"),
                family="student_t",
                variance=VarianceFunctionSpec("constant"),
            )

    def test_parameter_names(self):
        m = ModelSpec(
            mean=MeanFunctionSpec("quadratic"),
            variance=VarianceFunctionSpec("linear_in_mu"),
        )
        assert m.parameter_names == ("theta0", "theta1", "theta2", "sigma0", "sigma1")

    def test_json_round_trip(self, tmp_path):
        m = ModelSpec(
            mean=MeanFunctionSpec("exp2"),
            mean_link="identity",
            variance=VarianceFunctionSpec("constant"),
            truncation=(0.0, None),
            name="exp2-demo",
        )
        p = tmp_path / "model.json"
        m.save(p)
        back = ModelSpec.load(p)
        assert back == m


class TestLogPosterior:
    def test_single_point_at_the_mean(self):
        # likelihood term of one observation sitting exactly on the mean of
        # a unit-scale normal is -0.5*ln(2*pi)
        model = constant_mean_model()
        data = Dataset(x=np.array([0.7]), y=np.array([0.4]))
        theta = np.array([0.4, 0.0, 1.0])
        lp = log_posterior(model, data, theta)
        prior_part = sum(p.log_density(v) for p, v in zip(model.priors, theta))
        assert lp - prior_part == pytest.approx(-HALF_LOG_2PI, abs=1e-12)

    def test_additive_over_rows(self):
        model = true_model_spec()
        a = simulate_dataset(10, seed=1)
        b = simulate_dataset(7, seed=2)
        both = Dataset(x=np.concatenate([a.x, b.x]), y=np.concatenate([a.y, b.y]))
        theta = np.array([3.0, 0.25, 0.12])
        prior_part = sum(p.log_density(v) for p, v in zip(model.priors, theta))
        lp_a = log_posterior(model, a, theta)
        lp_b = log_posterior(model, b, theta)
        lp_ab = log_posterior(model, both, theta)
        assert lp_ab == pytest.approx(lp_a + lp_b - prior_part, abs=1e-9)

    def test_nonpositive_scale_gives_neg_inf(self):
        model = true_model_spec()
        data = simulate_dataset(10, seed=0)
        assert log_posterior(model, data, np.array([3.0, 0.2, 0.0])) == -math.inf
        assert log_posterior(model, data, np.array([3.0, 0.2, -0.5])) == -math.inf

    def test_empty_dataset_is_an_error(self):
        model = true_model_spec()
        empty = Dataset(x=np.array([]), y=np.array([]))
        with pytest.raises(ValueError):
            log_posterior(model, empty, np.array([3.0, 0.2, 0.1]))

    def test_wrong_length_theta(self):
        model = true_model_spec()
        data = simulate_dataset(5, seed=0)
        with pytest.raises(ValueError):
            log_posterior(model, data, np.array([3.0, 0.2]))


class TestFit:
    def test_recovers_generating_parameters(self):
        data = simulate_dataset(100, 3.25, 0.2, 0.1, seed=0)
        draws = fit(true_model_spec(), data, FitConfig(chains=4, warmup=800, samples=800, seed=1))
        m = draws.draws.mean(axis=0)
        s = draws.draws.std(axis=0, ddof=1)
        z = np.abs(m - np.array([3.25, 0.2, 0.1])) / s
        assert np.all(z < 3.0)

    def test_deterministic_given_seed(self):
        data = simulate_dataset(30, seed=3)
        cfg = FitConfig(chains=2, warmup=100, samples=100, seed=5)
        a = fit(true_model_spec(), data, cfg)
        b = fit(true_model_spec(), data, cfg)
        np.testing.assert_array_equal(a.draws, b.draws)

    def test_chain_seed_is_master_plus_index(self):
        # chain 1 of a seed-4 run replays as chain 0 of a seed-5 run
        data = simulate_dataset(30, seed=3)
        a = fit(true_model_spec(), data, FitConfig(chains=2, warmup=100, samples=100, seed=4))
        b = fit(true_model_spec(), data, FitConfig(chains=2, warmup=100, samples=100, seed=5))
        np.testing.assert_array_equal(a.by_chain()[1], b.by_chain()[0])

    def test_retained_draw_count_exact_and_no_warmup(self):
        data = simulate_dataset(30, seed=3)
        cfg = FitConfig(chains=3, warmup=50, samples=40, seed=0)
        draws = fit(true_model_spec(), data, cfg)
        assert draws.draws.shape == (120, 3)
        assert draws.n_chains == 3
        counts = np.bincount(draws.chain)
        assert np.all(counts == 40)

    def test_log_posterior_finite_at_every_retained_draw(self):
        data = simulate_dataset(30, seed=3)
        model = true_model_spec()
        draws = fit(model, data, FitConfig(chains=2, warmup=200, samples=150, seed=2))
        lps = [log_posterior(model, data, th) for th in draws.draws]
        assert np.all(np.isfinite(lps))

    def test_all_chains_stuck_raises_with_diagnostics(self):
        data = simulate_dataset(20, seed=1)
        # an absurd frozen proposal scale rejects every sampling move
        cfg = FitConfig(chains=2, warmup=1, samples=50, init_scale=1e12, seed=0)
        with pytest.raises(FitError) as err:
            fit(true_model_spec(), data, cfg)
        assert err.value.diagnostics is not None
        assert err.value.diagnostics.acceptance == (0.0, 0.0)

    def test_thinning_keeps_count(self):
        data = simulate_dataset(30, seed=3)
        draws = fit(true_model_spec(), data, FitConfig(chains=2, warmup=100, samples=60, thin=3, seed=0))
        assert draws.draws.shape == (120, 3)

    def test_posterior_contraction_with_more_data(self):
        # doubling n must not widen the theta1 posterior beyond noise
        sds_small, sds_big = [], []
        cfg = FitConfig(chains=2, warmup=400, samples=400, seed=0)
        for rep in range(5):
            small = simulate_dataset(100, seed=100 + rep)
            big = simulate_dataset(200, seed=200 + rep)
            sds_small.append(fit(true_model_spec(), small, cfg).column("theta1").std(ddof=1))
            sds_big.append(fit(true_model_spec(), big, cfg).column("theta1").std(ddof=1))
        assert np.mean(sds_big) <= np.mean(sds_small) * 1.10


class TestHeavyTailedOutcome:
    def test_student_t_likelihood_matches_scalar_sum(self):
        from ppmkit import student_t

        model = ModelSpec(
            mean=MeanFunctionSpec("true_model"),
            family="student_t",
            df=4.0,
            variance=VarianceFunctionSpec("constant"),
        )
        data = simulate_dataset(15, seed=8)
        theta = np.array([3.1, 0.22, 0.12])
        mu = 0.22 + np.tanh(3.1 * data.x / 2.0)
        expected = sum(
            student_t(m, 0.12, df=4.0).log_density(y) for m, y in zip(mu, data.y)
        ) + sum(p.log_density(v) for p, v in zip(model.priors, theta))
        assert log_posterior(model, data, theta) == pytest.approx(expected, abs=1e-9)

    def test_student_t_fit_runs_and_recovers(self):
        data = simulate_dataset(80, seed=6)
        model = ModelSpec(
            mean=MeanFunctionSpec("true_model"),
            family="student_t",
            df=30.0,
            variance=VarianceFunctionSpec("constant"),
        )
        draws = fit(model, data, FitConfig(chains=2, warmup=600, samples=600, seed=4))
        m = draws.draws.mean(axis=0)
        s = draws.draws.std(axis=0, ddof=1)
        assert np.all(np.abs(m - np.array([3.25, 0.2, 0.1])) < 4.0 * s)


class TestVarianceTrend:
    def test_detects_scale_growing_with_mean(self):
        from ppmkit import demo

        data = demo.heteroscedastic_example(seed=3)
        model = demo.variance_trend_model()
        draws = fit(model, data, FitConfig(chains=2, warmup=1500, samples=800, thin=3, seed=7))
        # the generator's scale rises with the mean; the fitted trend
        # coefficient should be decisively positive
        slope = draws.column("sigma1")
        assert np.quantile(slope, 0.05) > 0.0


class TestMichaelisMenten:
    def test_plug_in_recovers_noiseless_curve(self):
        x = np.linspace(0.05, 1.0, 15)
        t1, t2 = 1.6, 0.25
        y = t1 * x / (t2 + x)
        model = ModelSpec(
            mean=MeanFunctionSpec("michaelis_menten"),
            variance=VarianceFunctionSpec("constant"),
        )
        theta = plug_in_fit(model, Dataset(x=x, y=y), seed=1)
        np.testing.assert_allclose(theta[:2], [t1, t2], atol=1e-3)


class TestPosteriorDrawsContainer:
    def test_immutable(self):
        data = simulate_dataset(20, seed=1)
        draws = fit(true_model_spec(), data, FitConfig(chains=2, warmup=50, samples=50, seed=0))
        with pytest.raises(ValueError):
            draws.draws[0, 0] = 1.0

    def test_csv_round_trip(self, tmp_path):
        data = simulate_dataset(20, seed=1)
        draws = fit(true_model_spec(), data, FitConfig(chains=2, warmup=50, samples=50, seed=0))
        p = tmp_path / "draws.csv"
        draws.to_csv(p)
        back = PosteriorDraws.from_csv(p)
        np.testing.assert_array_equal(back.draws, draws.draws)
        np.testing.assert_array_equal(back.chain, draws.chain)
        assert back.parameter_names == draws.parameter_names


class TestPlugInFit:
    def test_noiseless_quadratic_interpolation(self):
        x = np.linspace(0.0, 1.0, 20)
        coef = (0.3, 1.8, -0.9)
        y = coef[0] + coef[1] * x + coef[2] * x**2
        model = ModelSpec(
            mean=MeanFunctionSpec("quadratic"), variance=VarianceFunctionSpec("constant")
        )
        theta = plug_in_fit(model, Dataset(x=x, y=y), seed=0)
        np.testing.assert_allclose(theta[:3], coef, atol=1e-4)

    def test_deterministic(self):
        data = simulate_dataset(25, seed=2)
        model = true_model_spec()
        a = plug_in_fit(model, data, seed=3)
        b = plug_in_fit(model, data, seed=3)
        np.testing.assert_array_equal(a, b)

    def test_map_dominates_posterior_draws(self):
        data = simulate_dataset(40, seed=4)
        model = true_model_spec()
        draws = fit(model, data, FitConfig(chains=2, warmup=400, samples=400, seed=1))
        theta = plug_in_fit(model, data, seed=0)
        lp_hat = log_posterior(model, data, theta)
        lp_draws = np.array([log_posterior(model, data, th) for th in draws.draws])
        assert lp_hat >= lp_draws.max() - 1e-6


class TestDiagnostics:
    def _draws_from_chains(self, chains, names=("a",)):
        chains = np.asarray(chains, dtype=float)
        c, s = chains.shape[:2]
        flat = chains.reshape(c * s, -1)
        labels = np.repeat(np.arange(c), s)
        return PosteriorDraws(draws=flat, chain=labels, parameter_names=names)

    def test_iid_chains_near_one(self):
        rng = np.random.default_rng(0)
        d = self._draws_from_chains(rng.standard_normal((4, 500, 1)))
        out = diagnostics(d)
        assert 0.99 <= out.r_hat["a"] <= 1.02
        assert out.ess["a"] > 1000.0

    def test_identical_chains_with_repeated_halves_give_exactly_one(self):
        # all split chains coincide, so the between-chain term vanishes and
        # the clamped statistic is exactly 1
        rng = np.random.default_rng(1)
        half = rng.standard_normal(250)
        chain = np.concatenate([half, half])
        d = self._draws_from_chains(np.stack([chain, chain])[:, :, None])
        assert diagnostics(d).r_hat["a"] == 1.0

    def test_shifted_chain_flags_divergence(self):
        rng = np.random.default_rng(2)
        chains = rng.standard_normal((2, 400, 1))
        chains[1] += 100.0
        out = diagnostics(self._draws_from_chains(chains))
        assert out.r_hat["a"] > 1.1
        assert "a" in out.flagged

    def test_constant_chains_error_not_division_by_zero(self):
        chains = np.ones((2, 100, 1))
        with pytest.raises(DiagnosticsError):
            diagnostics(self._draws_from_chains(chains))

    def test_single_chain_error(self):
        rng = np.random.default_rng(3)
        d = PosteriorDraws(
            draws=rng.standard_normal((100, 1)),
            chain=np.zeros(100, dtype=int),
            parameter_names=("a",),
        )
        with pytest.raises(DiagnosticsError):
            diagnostics(d)

    def test_compute_diagnostics_on_arrays(self):
        rng = np.random.default_rng(4)
        draws = rng.standard_normal((200, 2))
        chain = np.repeat([0, 1], 100)
        out = compute_diagnostics(draws, chain, ("p0", "p1"))
        assert set(out.r_hat) == {"p0", "p1"}


class TestFitEnsemble:
    def test_duplicate_seeds_give_identical_fits(self):
        data = simulate_dataset(25, seed=0)
        cfg = FitConfig(chains=2, warmup=100, samples=100, seed=0)
        fits = fit_ensemble(true_model_spec(), data, [1, 1], cfg)
        np.testing.assert_array_equal(fits[0].draws, fits[1].draws)

    def test_empty_seed_list_rejected(self):
        data = simulate_dataset(25, seed=0)
        with pytest.raises(ValueError):
            fit_ensemble(true_model_spec(), data, [])

    def test_results_follow_seed_order(self):
        data = simulate_dataset(25, seed=0)
        cfg = FitConfig(chains=2, warmup=100, samples=100, seed=0)
        fits = fit_ensemble(true_model_spec(), data, [7, 3], cfg)
        again = fit_ensemble(true_model_spec(), data, [3, 7], cfg)
        np.testing.assert_array_equal(fits[0].draws, again[1].draws)
        np.testing.assert_array_equal(fits[1].draws, again[0].draws)

    def test_pooled_predictive_consistent_with_single_seed(self):
        data = simulate_dataset(100, seed=0)
        model = true_model_spec()
        cfg = FitConfig(chains=4, warmup=400, samples=400, seed=0)
        fits = fit_ensemble(model, data, [1, 2], cfg)
        solo = posterior_predictive(model, fits[0], 0.5, per_draw=4,
                                    rng=np.random.default_rng(0))
        pooled_samples = np.concatenate([
            posterior_predictive(model, f, 0.5, per_draw=4,
                                 rng=np.random.default_rng(i)).samples
            for i, f in enumerate(fits)
        ])
        # Monte Carlo standard error from between-chain spread of the solo fit
        chain_means = [
            solo.samples[i::cfg.chains].mean() for i in range(cfg.chains)
        ]
        se = np.std(chain_means, ddof=1) / math.sqrt(cfg.chains)
        assert abs(pooled_samples.mean() - solo.samples.mean()) < 2.0 * se + 1e-3
