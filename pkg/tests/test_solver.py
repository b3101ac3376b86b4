"""Observation model, losses, objective, descent, and thresholding."""

import numpy as np
import pytest

import hypertv as hv


@pytest.fixture
def demo_obs():
    return hv.Observation((0, 2, 4, 6), np.array([0.95, 0.05, 0.95, 0.05]))


class TestObservation:
    def test_duplicate_indices_rejected(self):
        with pytest.raises(hv.ValidationError, match="distinct"):
            hv.Observation((0, 0), np.array([0.1, 0.2]))

    def test_negative_index_rejected(self):
        with pytest.raises(hv.ValidationError, match="nonnegative"):
            hv.Observation((-1,), np.array([0.1]))

    def test_length_mismatch_rejected(self):
        with pytest.raises(hv.ValidationError, match="one value per"):
            hv.Observation((0, 1), np.array([0.1]))

    def test_too_many_for_vertex_count(self):
        obs = hv.Observation((0, 1, 2), np.zeros(3))
        with pytest.raises(hv.ValidationError):
            obs.validate_against(2)


class TestSampling:
    def test_identity_sampling(self):
        f = np.array([0.3, 0.7, 0.1])
        obs = hv.Observation((0, 1, 2), f)
        assert np.array_equal(hv.apply_sampling(obs, f), f)

    def test_coordinate_selection(self):
        obs = hv.Observation((2, 0), np.zeros(2))
        out = hv.apply_sampling(obs, np.array([1.0, 2.0, 3.0]))
        assert np.array_equal(out, np.array([3.0, 1.0]))

    def test_out_of_range(self):
        obs = hv.Observation((5,), np.zeros(1))
        with pytest.raises(hv.ValidationError, match="outside"):
            hv.apply_sampling(obs, np.zeros(3))

    def test_sampling_of_scatter_round_trips(self):
        rng = np.random.default_rng(61)
        obs = hv.Observation((4, 1, 7), np.zeros(3))
        values = rng.standard_normal(3)
        assert np.array_equal(
            hv.apply_sampling(obs, hv.scatter(obs, values, 9)), values
        )


class TestLossAndGrad:
    def test_squared_perfect_fit(self):
        obs = hv.Observation((0, 1), np.array([0.4, 0.9]))
        f = np.array([0.4, 0.9, 0.0])
        loss, grad = hv.loss_and_grad("squared_error", obs, f)
        assert loss == 0.0
        assert np.array_equal(grad, np.zeros(3))

    def test_cross_entropy_stationary_at_observation(self):
        obs = hv.Observation((1,), np.array([0.95]))
        f = np.array([0.0, 0.95, 0.0])
        loss, grad = hv.loss_and_grad("cross_entropy", obs, f)
        assert grad[1] == 0.0
        assert loss > 0.0
        assert grad[0] == grad[2] == 0.0

    def test_cross_entropy_domain_error(self):
        obs = hv.Observation((0,), np.array([1.5]))
        with pytest.raises(hv.ValidationError, match=r"\[0, 1\]"):
            hv.loss_and_grad("cross_entropy", obs, np.array([0.5]))

    def test_unknown_kind(self):
        obs = hv.Observation((0,), np.array([0.5]))
        with pytest.raises(hv.ValidationError, match="loss_kind"):
            hv.loss_and_grad("absolute", obs, np.array([0.5]))

    def test_clamped_entries_get_zero_gradient(self):
        obs = hv.Observation((0, 1), np.array([0.95, 0.05]))
        f = np.array([0.0, 1.0])
        loss, grad = hv.loss_and_grad("cross_entropy", obs, f, clamp_eps=1e-6)
        assert np.isfinite(loss)
        assert np.array_equal(grad, np.zeros(2))

    @pytest.mark.parametrize("kind", ["cross_entropy", "squared_error"])
    def test_matches_finite_differences(self, kind):
        rng = np.random.default_rng(62)
        step = 1e-6
        for _ in range(20):
            n = int(rng.integers(3, 9))
            k = int(rng.integers(1, n + 1))
            idx = tuple(int(i) for i in rng.choice(n, size=k, replace=False))
            y = rng.uniform(0.05, 0.95, size=k)
            obs = hv.Observation(idx, y)
            f = rng.uniform(0.1, 0.9, size=n)
            _, grad = hv.loss_and_grad(kind, obs, f)
            for i in range(n):
                up, down = f.copy(), f.copy()
                up[i] += step
                down[i] -= step
                numeric = (
                    hv.loss_and_grad(kind, obs, up)[0]
                    - hv.loss_and_grad(kind, obs, down)[0]
                ) / (2 * step)
                assert grad[i] == pytest.approx(numeric, rel=1e-5, abs=1e-7)


class TestObjective:
    def test_lambda_zero_is_pure_loss(self, demo7_model, demo_obs):
        cfg = hv.SolverConfig(lam=0.0)
        f = np.linspace(0.1, 0.9, 7)
        loss, _ = hv.loss_and_grad("cross_entropy", demo_obs, f)
        assert hv.objective(cfg, demo_obs, demo7_model, f) == loss

    def test_constant_signal_has_zero_tv_term(self, demo7_model):
        obs = hv.Observation((0, 1), np.array([0.7, 0.7]))
        cfg = hv.SolverConfig(lam=123.0)
        f = np.full(7, 0.7)
        loss, _ = hv.loss_and_grad("cross_entropy", obs, f)
        assert hv.objective(cfg, obs, demo7_model, f) == loss

    def test_componentwise_recomputation(self, demo7_model, demo_obs):
        rng = np.random.default_rng(63)
        cfg = hv.SolverConfig(lam=0.37)
        for _ in range(5):
            f = rng.uniform(0.05, 0.95, size=7)
            loss, _ = hv.loss_and_grad(cfg.loss_kind, demo_obs, f, cfg.clamp_eps)
            tv = hv.tv_total(demo7_model.operators, demo7_model.transform, f)
            assert hv.objective(cfg, demo_obs, demo7_model, f) == loss + cfg.lam * tv


class TestSolverConfig:
    def test_validations(self):
        with pytest.raises(hv.ValidationError):
            hv.SolverConfig(lam=-1.0)
        with pytest.raises(hv.ValidationError):
            hv.SolverConfig(step_size=0.0)
        with pytest.raises(hv.ValidationError):
            hv.SolverConfig(clamp_eps=0.7)
        with pytest.raises(hv.ValidationError):
            hv.SolverConfig(loss_kind="huber")

    def test_unprojected_cross_entropy_rejected(self):
        with pytest.raises(hv.ValidationError, match="project"):
            hv.SolverConfig(project=False)

    def test_unprojected_squared_allowed(self):
        cfg = hv.SolverConfig(loss_kind="squared_error", project=False)
        assert not cfg.project


class TestRecover:
    def test_full_observation_identity(self, demo7_model):
        y = np.linspace(0.1, 0.9, 7)
        obs = hv.Observation(tuple(range(7)), y)
        cfg = hv.SolverConfig(lam=0.0, loss_kind="squared_error", step_size=0.5,
                              grad_tol=1e-8)
        result = hv.recover(cfg, obs, demo7_model)
        assert result.converged
        assert np.allclose(result.estimate, y, atol=1e-7)

    def test_agreeing_observations_pull_to_constant(self, demo7_model):
        obs = hv.Observation((0, 1, 2, 3, 4, 5, 6), np.full(7, 0.95))
        cfg = hv.SolverConfig(lam=0.1, step_size=0.05, max_iters=20000)
        result = hv.recover(cfg, obs, demo7_model)
        assert result.objective_trace[-1] <= result.objective_trace[0]
        assert np.all(np.abs(result.estimate - 0.95) < 0.02)
        tv = hv.tv_total(demo7_model.operators, demo7_model.transform, result.estimate)
        assert tv < 1e-3

    def test_demo_objective_decreases(self, demo7_model, demo_obs):
        # eta=0.1 is small enough for the squared-error curvature; cross
        # entropy at y=0.95 needs a smaller step to descend monotonically
        cfg = hv.SolverConfig(lam=0.001, step_size=0.1, max_iters=5000,
                              loss_kind="squared_error")
        result = hv.recover(cfg, demo_obs, demo7_model)
        assert result.final_objective <= result.objective_trace[0]
        assert result.final_objective == result.objective_trace[-1]
        assert result.iterations_run <= 5000
        # converged flag mirrors the gradient tolerance
        g_loss = hv.loss_and_grad(cfg.loss_kind, demo_obs, result.estimate)[1]
        g_tv = hv.tv_gradient(demo7_model.operators, demo7_model.transform,
                              result.estimate)
        grad_norm = np.max(np.abs(g_loss + cfg.lam * g_tv))
        assert result.converged == (grad_norm < cfg.grad_tol)

    def test_descent_trace_monotone_at_small_step(self, demo7_model, demo_obs):
        cfg = hv.SolverConfig(lam=0.01, step_size=1e-3, max_iters=300)
        result = hv.recover(cfg, demo_obs, demo7_model)
        diffs = np.diff(result.objective_trace)
        assert np.all(diffs <= 1e-12)

    def test_estimate_stays_in_unit_box(self, demo7_model, demo_obs):
        for step in (0.05, 0.5, 2.0):
            cfg = hv.SolverConfig(lam=0.5, step_size=step, max_iters=500)
            result = hv.recover(cfg, demo_obs, demo7_model)
            assert np.all(result.estimate >= 0.0)
            assert np.all(result.estimate <= 1.0)

    def test_deterministic_bitwise(self, demo7_model, demo_obs):
        cfg = hv.SolverConfig(lam=0.001, step_size=0.1, max_iters=800)
        first = hv.recover(cfg, demo_obs, demo7_model)
        second = hv.recover(cfg, demo_obs, demo7_model)
        assert np.array_equal(first.estimate, second.estimate)
        assert np.array_equal(first.objective_trace, second.objective_trace)
        assert first.final_objective == second.final_objective

    def test_trace_off_matches_trace_on(self, demo7_model, demo_obs):
        on = hv.SolverConfig(lam=0.001, max_iters=300, record_trace=True)
        off = hv.SolverConfig(lam=0.001, max_iters=300, record_trace=False)
        res_on = hv.recover(on, demo_obs, demo7_model)
        res_off = hv.recover(off, demo_obs, demo7_model)
        assert np.array_equal(res_on.estimate, res_off.estimate)
        assert res_off.objective_trace.size == 0
        assert res_off.final_objective == res_on.final_objective

    def test_divergence_raises_with_iteration(self, demo7_model, demo_obs):
        cfg = hv.SolverConfig(
            lam=1.0, step_size=1e12, max_iters=100,
            loss_kind="squared_error", project=False,
        )
        with pytest.raises(hv.DivergenceError, match="iteration"):
            hv.recover(cfg, demo_obs, demo7_model)

    def test_cross_entropy_range_check(self, demo7_model):
        obs = hv.Observation((0,), np.array([1.2]))
        with pytest.raises(hv.ValidationError, match=r"\[0, 1\]"):
            hv.recover(hv.SolverConfig(), obs, demo7_model)


class TestThresholdLabels:
    def test_two_sided(self):
        out = hv.threshold_labels(np.array([0.7, 0.3]), 0.5, 0.05, 0.95)
        assert np.array_equal(out, np.array([0.95, 0.05]))

    def test_tie_goes_up(self):
        assert hv.threshold_labels(np.array([0.5]), 0.5, 0.05, 0.95)[0] == 0.95

    def test_all_below(self):
        out = hv.threshold_labels(np.array([0.1, 0.2]), 0.5, 0.0, 1.0)
        assert np.array_equal(out, np.zeros(2))


class TestObservationFiles:
    def test_round_trip(self, tmp_path, demo_obs):
        path = tmp_path / "obs.txt"
        hv.save_observations(demo_obs, path)
        loaded = hv.load_observations(path)
        assert loaded.sampled_indices == demo_obs.sampled_indices
        assert np.array_equal(loaded.values, demo_obs.values)

    def test_comments_allowed(self, tmp_path):
        path = tmp_path / "obs.txt"
        path.write_text("# header\n0 0.95\n2 0.05\n")
        obs = hv.load_observations(path)
        assert obs.sampled_indices == (0, 2)

    def test_bad_line(self, tmp_path):
        path = tmp_path / "obs.txt"
        path.write_text("0 0.95\n1 2 3\n")
        with pytest.raises(hv.ParseError, match=r":2"):
            hv.load_observations(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(hv.ParseError):
            hv.load_observations(tmp_path / "nope.txt")
