import json
import random

import numpy as np
import pytest

import bruteforce
from kelly_memory import estimate, model, simulate
from kelly_memory.errors import (
    DimensionMismatch,
    DomainError,
    EmptyResult,
    InputError,
    InsufficientData,
    SingularDesign,
)


def simulate_outcomes(omega, history, n, seed):
    spec = model.GameSpec(
        params=model.validate_params(omega),
        history=model.History(tuple(history)),
        n=n,
    )
    return simulate.sample_path(spec, stream_seed=seed)


class TestIngestPrices:
    def test_plain_moves(self):
        np.testing.assert_array_equal(
            estimate.ingest_prices([100, 101, 99]), [1, -1]
        )

    def test_tie_dropped(self):
        np.testing.assert_array_equal(
            estimate.ingest_prices([100, 100, 101]), [1]
        )

    def test_tie_down(self):
        np.testing.assert_array_equal(
            estimate.ingest_prices([100, 100, 101], tie_rule="down"), [-1, 1]
        )

    def test_tie_up(self):
        np.testing.assert_array_equal(
            estimate.ingest_prices([100, 100, 101], tie_rule="up"), [1, 1]
        )

    def test_no_usable_moves(self):
        with pytest.raises(EmptyResult):
            estimate.ingest_prices([100, 100], tie_rule="drop")
        with pytest.raises(EmptyResult):
            estimate.ingest_prices([100])

    def test_nonpositive_price(self):
        with pytest.raises(DomainError):
            estimate.ingest_prices([100, -5, 101])

    def test_unknown_rule(self):
        with pytest.raises(DomainError):
            estimate.ingest_prices([1, 2], tie_rule="flip")


class TestObservationSet:
    def test_rejects_bad_values(self):
        with pytest.raises(DomainError):
            estimate.ObservationSet(data=(1, 0, -1), m=1)

    def test_rejects_too_short(self):
        with pytest.raises(InsufficientData):
            estimate.ObservationSet(data=(1,), m=1)

    def test_rejects_bad_depth(self):
        with pytest.raises(DimensionMismatch):
            estimate.ObservationSet(data=(1, -1), m=0)


class TestBuildRegression:
    def test_hand_example(self):
        obs = estimate.ObservationSet(data=(1, -1, 1, -1), m=1)
        X, y = estimate.build_regression(obs)
        np.testing.assert_allclose(X, [[1, 1], [1, -1], [1, 1]])
        np.testing.assert_allclose(y, [0, 1, 0])

    def test_all_heads(self):
        obs = estimate.ObservationSet(data=(1,) * 6, m=1)
        X, y = estimate.build_regression(obs)
        assert np.all(y == 1)
        assert np.all(X[:, 1] == 1)

    def test_single_row_boundary(self):
        obs = estimate.ObservationSet(data=(1, -1, 1, -1), m=3)
        X, y = estimate.build_regression(obs)
        assert X.shape == (1, 4)
        np.testing.assert_allclose(X, [[1, 1, -1, 1]])
        np.testing.assert_allclose(y, [0])

    def test_conditional_mean_property(self):
        # Grouped by lag pattern, the mean response should approach the
        # model's conditional head probability.
        omega = [0.55, 0.20]
        data = simulate_outcomes(omega, [1], n=40_000, seed=905)
        obs = estimate.ObservationSet(data=tuple(int(v) for v in data), m=1)
        X, y = estimate.build_regression(obs)
        for lag, expected in ((1, 0.75), (-1, 0.35)):
            mask = X[:, 1] == lag
            count = mask.sum()
            sigma = np.sqrt(expected * (1 - expected) / count)
            assert abs(y[mask].mean() - expected) < 3 * sigma


class TestOlsFit:
    def test_recovers_truth_on_long_sample(self):
        omega = [0.55, 0.20]
        data = simulate_outcomes(omega, [1], n=100_000, seed=11)
        obs = estimate.ObservationSet(data=tuple(int(v) for v in data), m=1)
        fit = estimate.ols_fit(obs)
        assert abs(fit.omega_hat[0] - 0.55) < 0.02
        assert abs(fit.omega_hat[1] - 0.20) < 0.02
        assert not fit.constrained and not fit.projected

    def test_alternating_data_hits_diamond_boundary(self):
        data = tuple(1 if i % 2 == 0 else -1 for i in range(400))
        fit = estimate.ols_fit(estimate.ObservationSet(data=data, m=1))
        assert fit.omega_hat[0] == pytest.approx(0.5, abs=1e-8)
        assert fit.omega_hat[1] == pytest.approx(-0.5, abs=1e-8)

    def test_fair_iid_data(self):
        rng = np.random.default_rng(13)
        data = tuple(int(v) for v in rng.choice([-1, 1], size=50_000))
        fit = estimate.ols_fit(estimate.ObservationSet(data=data, m=1))
        assert abs(fit.omega_hat[0] - 0.5) < 0.02
        assert abs(fit.omega_hat[1]) < 0.02

    def test_constant_data_is_singular(self):
        with pytest.raises(SingularDesign):
            estimate.ols_fit(estimate.ObservationSet(data=(1,) * 50, m=1))

    def test_insufficient_rows(self):
        with pytest.raises(InsufficientData):
            estimate.ols_fit(estimate.ObservationSet(data=(1, -1, 1), m=1))

    def test_residual_orthogonality(self):
        rng = random.Random(17)
        for _ in range(10):
            m = rng.randint(1, 3)
            omega = bruteforce.random_valid_omega(rng, m)
            history = bruteforce.random_history(rng, m)
            data = simulate_outcomes(omega, history, n=2000, seed=rng.randrange(2**32))
            obs = estimate.ObservationSet(data=tuple(int(v) for v in data), m=m)
            fit = estimate.ols_fit(obs)
            X, y = estimate.build_regression(obs)
            resid = X.T @ (y - X @ np.asarray(fit.omega_hat))
            assert np.abs(resid).max() < 1e-8 * len(obs)


class TestConstrainedFit:
    def test_interior_ols_returned_unchanged(self):
        omega = [0.55, 0.20]
        data = simulate_outcomes(omega, [1], n=20_000, seed=19)
        obs = estimate.ObservationSet(data=tuple(int(v) for v in data), m=1)
        ols = estimate.ols_fit(obs)
        fit = estimate.constrained_fit(obs)
        assert fit.omega_hat == ols.omega_hat
        assert fit.rss == ols.rss
        assert fit.constrained and not fit.projected
        assert fit.iterations == 0

    def test_alternating_data_projected_to_boundary(self):
        data = tuple(1 if i % 2 == 0 else -1 for i in range(400))
        obs = estimate.ObservationSet(data=data, m=1)
        ols = estimate.ols_fit(obs)
        fit = estimate.constrained_fit(obs)
        assert fit.projected
        dist = abs(fit.omega_hat[0] - 0.5) + abs(fit.omega_hat[1])
        assert dist <= estimate.DIAMOND_RADIUS + 1e-12
        assert dist == pytest.approx(estimate.DIAMOND_RADIUS, abs=1e-6)
        assert fit.rss >= ols.rss

    def test_rss_never_below_ols(self):
        rng = random.Random(23)
        for _ in range(10):
            n = rng.randint(30, 200)
            data = tuple(rng.choice((-1, 1)) for _ in range(n))
            obs = estimate.ObservationSet(data=data, m=rng.randint(1, 2))
            try:
                ols = estimate.ols_fit(obs)
            except SingularDesign:
                continue
            fit = estimate.constrained_fit(obs)
            assert fit.rss >= ols.rss - 1e-12
            dist = abs(fit.omega_hat[0] - 0.5) + sum(abs(w) for w in fit.omega_hat[1:])
            assert dist <= estimate.DIAMOND_RADIUS + 1e-12

    def test_statistical_consistency(self):
        # Median recovery error over seeds should shrink as N grows.
        omega = [0.55, 0.20]
        medians = []
        for n in (1_000, 10_000, 100_000):
            errors = []
            for seed in range(20):
                data = simulate_outcomes(omega, [1], n=n, seed=10_000 * n + seed)
                obs = estimate.ObservationSet(data=tuple(int(v) for v in data), m=1)
                fit = estimate.constrained_fit(obs)
                errors.append(max(abs(w - t) for w, t in zip(fit.omega_hat, omega)))
            medians.append(float(np.median(errors)))
        assert medians[0] > medians[1] > medians[2]


class TestProjectHyperdiamond:
    def test_interior_point_unchanged(self):
        point = np.array([0.52, 0.1, -0.05])
        np.testing.assert_allclose(
            estimate.project_hyperdiamond(point, 0.5), point, atol=1e-15
        )

    def test_single_excess_coordinate(self):
        np.testing.assert_allclose(
            estimate.project_hyperdiamond([0.5, 0.8], 0.5), [0.5, 0.5], atol=1e-12
        )

    def test_bad_radius(self):
        with pytest.raises(DomainError):
            estimate.project_hyperdiamond([0.5, 0.1], 0.0)

    def test_feasible_idempotent_nonexpansive(self):
        rng = np.random.default_rng(29)
        radius = estimate.DIAMOND_RADIUS
        for _ in range(500):
            dim = rng.integers(2, 7)
            a = rng.normal(scale=1.5, size=dim) + np.eye(dim)[0] * 0.5
            b = rng.normal(scale=1.5, size=dim) + np.eye(dim)[0] * 0.5
            pa = estimate.project_hyperdiamond(a, radius)
            pb = estimate.project_hyperdiamond(b, radius)
            for p in (pa, pb):
                assert abs(p[0] - 0.5) + np.abs(p[1:]).sum() <= radius + 1e-12
            np.testing.assert_allclose(
                estimate.project_hyperdiamond(pa, radius), pa, atol=1e-12
            )
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12

    def test_beats_random_feasible_points(self):
        rng = np.random.default_rng(31)
        radius = 0.5
        for _ in range(5):
            dim = 3
            point = rng.normal(scale=2.0, size=dim)
            point[0] += 0.5
            projected = estimate.project_hyperdiamond(point, radius)
            best = np.linalg.norm(point - projected)
            # Random feasible candidates: random l1 radii spread over
            # coordinates with random signs, shifted to the diamond center.
            for _ in range(10_000):
                raw = rng.dirichlet(np.ones(dim)) * rng.uniform(0, radius)
                cand = raw * rng.choice((-1.0, 1.0), size=dim)
                cand[0] += 0.5
                assert np.linalg.norm(point - cand) >= best - 1e-12


class TestFileIO:
    def test_plain_signed_lines(self, tmp_path):
        f = tmp_path / "o.txt"
        f.write_text("+1\n-1\n\n1\n-1\n")
        np.testing.assert_array_equal(estimate.read_outcomes(f), [1, -1, 1, -1])

    def test_zero_one_lines(self, tmp_path):
        f = tmp_path / "o.txt"
        f.write_text("1\n0\n1\n")
        np.testing.assert_array_equal(estimate.read_outcomes(f), [1, -1, 1])

    def test_csv_column(self, tmp_path):
        f = tmp_path / "o.csv"
        f.write_text("day,move\n1,1\n2,-1\n3,1\n")
        np.testing.assert_array_equal(
            estimate.read_outcomes(f, column="move"), [1, -1, 1]
        )

    def test_missing_column(self, tmp_path):
        f = tmp_path / "o.csv"
        f.write_text("day,move\n1,1\n")
        with pytest.raises(InputError):
            estimate.read_outcomes(f, column="direction")

    def test_non_numeric_line(self, tmp_path):
        f = tmp_path / "o.txt"
        f.write_text("up\ndown\n")
        with pytest.raises(InputError):
            estimate.read_outcomes(f)

    def test_bad_values(self, tmp_path):
        f = tmp_path / "o.txt"
        f.write_text("1\n2\n")
        with pytest.raises(DomainError):
            estimate.read_outcomes(f)

    def test_empty_file(self, tmp_path):
        f = tmp_path / "o.txt"
        f.write_text("\n\n")
        with pytest.raises(EmptyResult):
            estimate.read_outcomes(f)

    def test_prices_csv(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,price,volume\na,100,5\nb,101,6\nc,99,2\n")
        assert estimate.read_prices(f) == [100.0, 101.0, 99.0]

    def test_prices_missing_column(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,close\na,100\n")
        with pytest.raises(InputError):
            estimate.read_prices(f)

    def test_fit_result_json_schema(self):
        data = tuple(1 if i % 3 else -1 for i in range(60))
        fit = estimate.ols_fit(estimate.ObservationSet(data=data, m=1))
        payload = fit.as_json_dict()
        assert set(payload) == {"omega", "rss", "constrained", "projected"}
        assert json.dumps(payload)  # serializable
        assert payload["constrained"] is False
