"""Tests for reports, replicates, mixing diagnostics, experiments and the partition-function estimator."""
from __future__ import annotations

import json
import math

import numpy as np
import pytest

from tests.conftest import load_pin

from src.bp.fields import PhiFunction
from src.errors import BudgetExceededError, DegenerateFactorError, DomainError
from src.estimators import (
    Report,
    bp_accuracy,
    burn_in_probe,
    coupling_contraction,
    detailed_balance_violation,
    empirical_tv,
    estimate_Z,
    fixed_point_experiment,
    mixing_experiment,
    mixing_time_exact,
    oriented_comparison,
    run_replicates,
    run_suite,
    run_tasks,
    stationarity_check,
    tv_by_matrix_power,
    tv_curve,
    tv_exact,
    uniformity_experiment,
    uniqueness_scan,
)
from src.estimators.experiments import bucket_times, start_set
from src.estimators.partition import factor_schedule
from src.estimators.suites import count_suite, phi_suite
from src.estimators.report import mean_with_half_width, proportion_with_half_width
from src.graph import Graph, diameter, named_graph, random_regular
from src.model import IndependentSet, lambda_c
from src.oracle import exact_distribution, exact_glauber_kernel, exact_marginal, exact_partition


def _draw(offset: int, seed: np.random.SeedSequence) -> int:
    return offset + int(np.random.default_rng(seed).integers(1 << 30))


class TestReport:
    """Threshold evaluation and serialization."""

    def _report(self) -> Report:
        report = Report(experiment_id="demo", inputs={"lambda": 1.0}, wall_clock_seconds=1.5)
        report.add_metric("tv", 0.004, replicates=10, seed=3, method="sampled")
        report.add_metric("rate", 0.9)
        return report

    def test_no_thresholds(self) -> None:
        assert self._report().evaluate() is None

    def test_max_and_min_bounds(self) -> None:
        report = self._report()
        report.thresholds = {"tv.max": 0.01, "rate.min": 0.5}
        assert report.evaluate() is True
        report.thresholds = {"tv.max": 0.001}
        assert report.evaluate() is False

    def test_missing_metric_fails(self) -> None:
        report = self._report()
        report.thresholds = {"absent.max": 1.0}
        assert report.evaluate() is False

    def test_bad_threshold_key(self) -> None:
        report = self._report()
        report.thresholds = {"tv.below": 1.0}
        with pytest.raises(ValueError):
            report.evaluate()

    def test_nan_becomes_null(self) -> None:
        report = Report(experiment_id="demo")
        assert report.add_metric("x", float("nan")).estimate is None

    def test_json_leaves_out_timing_by_default(self) -> None:
        report = self._report()
        body = json.loads(report.to_json())
        assert "wall_clock_seconds" not in body
        assert "rows" not in body
        assert body["metrics"]["tv"]["estimate"] == 0.004
        assert body["metrics"]["tv"]["method"] == "sampled"
        assert json.loads(report.to_json(include_timing=True))["wall_clock_seconds"] == 1.5

    def test_json_is_stable(self) -> None:
        assert self._report().to_json() == self._report().to_json()

    def test_csv_prefers_rows(self, tmp_path) -> None:
        report = self._report()
        assert report.to_csv().splitlines()[0].startswith("metric,")
        report.rows = [{"replicate": 0, "value": 1.0}, {"replicate": 1, "value": 2.0}]
        path = tmp_path / "rows.csv"
        text = report.to_csv(path)
        assert text.splitlines() == ["replicate,value", "0,1.0", "1,2.0"]
        assert path.read_text(encoding="utf-8") == text

    def test_mean_half_width(self) -> None:
        assert mean_with_half_width([2.0, 2.0, 2.0]) == (2.0, 0.0)
        mean, hw = mean_with_half_width([1.0])
        assert mean == 1.0 and math.isnan(hw)
        mean, hw = mean_with_half_width([0.0, 2.0])
        assert mean == 1.0
        assert hw == pytest.approx(1.959964 * math.sqrt(2.0) / math.sqrt(2.0), rel=1e-5)

    def test_proportion_half_width(self) -> None:
        p, hw = proportion_with_half_width(5, 10)
        assert p == 0.5
        assert hw == pytest.approx(1.959964 * math.sqrt(0.025), rel=1e-5)
        assert all(math.isnan(x) for x in proportion_with_half_width(0, 0))


class TestReplicates:
    """Derived seeds and ordering."""

    def test_results_follow_task_order(self) -> None:
        results = run_tasks(_draw, [0, 10, 20], root_seed=1, tag="demo")
        again = run_tasks(_draw, [0, 10, 20], root_seed=1, tag="demo")
        assert results == again
        assert len({r - offset for r, offset in zip(results, [0, 10, 20])}) == 3

    def test_tags_separate_streams(self) -> None:
        assert run_replicates(_draw, 0, 1, "a", 4) != run_replicates(_draw, 0, 1, "b", 4)

    def test_worker_count_does_not_change_results(self) -> None:
        assert run_replicates(_draw, 0, 5, "demo", 6, jobs=1) == run_replicates(_draw, 0, 5, "demo", 6, jobs=2)


class TestMixing:
    """Exact total variation and mixing times."""

    def test_single_vertex_curve(self, single_vertex: Graph) -> None:
        kernel = exact_glauber_kernel(single_vertex, 1.0)
        curve = tv_curve(kernel, IndependentSet.empty(1), 5)
        assert curve[0] == pytest.approx(0.5)
        assert np.allclose(curve[1:], 0.0, atol=1e-15)
        assert mixing_time_exact(single_vertex, 1.0, 0.25) == 1

    def test_start_distance_is_missing_mass(self, petersen: Graph) -> None:
        table = exact_distribution(petersen, 1.3)
        empty = IndependentSet.empty(10)
        assert tv_exact(petersen, 1.3, 0, empty) == pytest.approx(1 - table.probability_of(empty), abs=1e-14)

    def test_curve_is_non_increasing(self, cycle5: Graph) -> None:
        kernel = exact_glauber_kernel(cycle5, 2.0)
        for mask in kernel.states:
            curve = tv_curve(kernel, IndependentSet.from_mask(5, int(mask)), 60)
            assert np.all(np.diff(curve) <= 1e-12)

    def test_matrix_power_agrees(self, cycle5: Graph) -> None:
        start = IndependentSet.from_vertices(5, [0, 2])
        for t in (0, 1, 5, 20):
            assert tv_exact(cycle5, 1.5, t, start) == pytest.approx(tv_by_matrix_power(cycle5, 1.5, t, start), abs=1e-12)

    def test_mixing_time_monotone_in_eps(self, path4: Graph) -> None:
        assert mixing_time_exact(path4, 1.0, 0.1) >= mixing_time_exact(path4, 1.0, 0.25)

    def test_mixing_time_budget(self, petersen: Graph) -> None:
        with pytest.raises(BudgetExceededError):
            mixing_time_exact(petersen, 1.0, 0.01, t_max=0)

    def test_eps_validated(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            mixing_time_exact(path4, 1.0, 1.5)

    def test_detailed_balance(self, petersen: Graph) -> None:
        assert detailed_balance_violation(exact_glauber_kernel(petersen, 2.0)) <= 1e-12

    def test_empirical_tv(self, single_vertex: Graph, single_edge: Graph) -> None:
        assert empirical_tv(np.zeros(100, dtype=np.int64), single_vertex, 1.0) == pytest.approx(0.5)
        assert empirical_tv(np.array([0, 1, 0, 1]), single_vertex, 1.0) == pytest.approx(0.0)
        # mask 3 is not an independent set of the edge
        assert empirical_tv(np.array([3, 3]), single_edge, 1.0) == pytest.approx(1.0)

    def test_mixing_experiment_series(self, single_vertex: Graph) -> None:
        report = mixing_experiment(single_vertex, 1.0, 0.25, t_max=4)
        assert report.metrics["t_mix"].estimate == 1.0
        assert report.series["tv_from_0"][0] == pytest.approx(0.5)
        assert len(report.series["t"]) == 5

    @pytest.mark.slow
    def test_stationarity_check_passes(self) -> None:
        report = stationarity_check(named_graph("path:4"), 1.0, 1_000_000, seed=0)
        assert report.passed is True


class TestPartitionEstimate:
    """Telescoping Ẑ."""

    def test_empty_vertex_set(self) -> None:
        est = estimate_Z(Graph.empty(0), 1.0, 0.1)
        assert est.estimate == 1.0
        assert est.p_hats.size == 0

    def test_schedule(self) -> None:
        assert factor_schedule(1, 5, 0.2, 64) == (0, 8000, 1)
        assert factor_schedule(3, 3, 0.2, 64) == (math.ceil(60 * math.log(3)), 4800, 3)

    def test_empty_graph(self) -> None:
        est = estimate_Z(Graph.empty(5), 1.0, 0.2, seed=0)
        assert est.relative_error(32.0) <= 0.2
        assert est.lower <= est.estimate <= est.upper

    def test_triangle(self, triangle: Graph) -> None:
        est = estimate_Z(triangle, 1.0, 0.2, seed=3)
        assert est.relative_error(4.0) <= 0.2
        assert [row["component_size"] for row in est.factors] == [3, 2, 1]

    def test_path_with_custom_order(self, path4: Graph) -> None:
        truth = exact_partition(path4, 0.7)
        est = estimate_Z(path4, 0.7, 0.2, seed=1, order=[1, 3, 0, 2])
        assert est.relative_error(truth) <= 0.2

    def test_reproducible(self, cycle5: Graph) -> None:
        a = estimate_Z(cycle5, 1.0, 0.5, seed=9)
        b = estimate_Z(cycle5, 1.0, 0.5, seed=9)
        assert np.array_equal(a.p_hats, b.p_hats)
        assert a.to_report().to_json() == b.to_report().to_json()

    def test_report_rows(self, path4: Graph) -> None:
        report = estimate_Z(path4, 1.0, 0.5, seed=0).to_report({"lambda": 1.0})
        assert set(report.metrics) >= {"z", "log_z", "z_lower", "z_upper", "total_steps"}
        assert len(report.rows) == 4

    def test_degenerate_factor(self) -> None:
        with pytest.raises(DegenerateFactorError):
            estimate_Z(Graph.empty(2), 1.0, 0.5, floor=0.99)

    def test_order_must_be_permutation(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            estimate_Z(path4, 1.0, 0.2, order=[0, 1, 1, 2])

    def test_parameters_validated(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            estimate_Z(path4, 0.0, 0.2)
        with pytest.raises(DomainError):
            estimate_Z(path4, 1.0, 0.0)


class TestCouplingExperiments:
    """Coupling contraction and G versus G*_w."""

    def test_coalesced_start_stays_at_zero(self, petersen: Graph) -> None:
        report = coupling_contraction(petersen, 1.0, steps=200, replicates=5, seed=0, start_policy="coalesced")
        assert report.metrics["mean_hamming"].estimate == 0.0
        assert report.metrics["mean_weighted"].estimate == 0.0
        assert report.metrics["coalesced_fraction"].estimate == 1.0

    def test_single_vertex_coalesces(self, single_vertex: Graph) -> None:
        report = coupling_contraction(
            single_vertex, 1.0, steps=1, replicates=4, seed=2, start_policy="empty", phi=PhiFunction.ones(1)
        )
        assert report.metrics["mean_hamming"].estimate == 0.0
        assert report.metrics["mean_increment_per_step"].estimate == -1.0
        assert all(row["start_vertex"] == 0 for row in report.rows)

    def test_trace_series(self, petersen: Graph) -> None:
        report = coupling_contraction(petersen, 0.5, steps=20, replicates=3, seed=1, start_policy="empty",
                                      trace=True, every=5)
        assert report.series["step"] == [5.0, 10.0, 15.0, 20.0]
        assert len(report.series["mean_weighted"]) == 4

    def test_unknown_policy(self, petersen: Graph) -> None:
        with pytest.raises(DomainError):
            coupling_contraction(petersen, 1.0, steps=1, replicates=1, seed=0, start_policy="side")

    def test_oriented_comparison(self) -> None:
        g = random_regular(30, 3, seed=1)
        report = oriented_comparison(g, 0.5, w=0, r=2, steps=300, replicates=3, seed=0)
        assert 0.0 <= report.metrics["outside_disagreement_fraction"].estimate <= 1.0
        assert report.inputs["oriented_edges"] > 0
        assert len(report.rows) == 3


class TestBurnIn:
    """Above-suspicion fractions over time."""

    def test_bucket_times(self) -> None:
        assert bucket_times(100, 4) == [0, 25, 50, 75, 100]
        assert bucket_times(0, 3) == [0]

    def test_empty_start_is_above_suspicion(self, petersen: Graph) -> None:
        report = burn_in_probe(petersen, 1.0, 0, rho=1.0, r=1, horizon=100, replicates=4, seed=0, start_policy="empty")
        assert report.metrics["fraction_at_start"].estimate == 1.0
        assert report.series["t"][0] == 0.0

    def test_side_start_is_heavy(self, heawood: Graph) -> None:
        report = burn_in_probe(heawood, 1.0, 0, rho=0.1, r=0, horizon=10, replicates=3, seed=0, start_policy="side")
        assert report.metrics["fraction_at_start"].estimate == 0.0
        assert report.inputs["start_size"] == 7

    def test_defaults(self, heawood: Graph) -> None:
        report = burn_in_probe(heawood, 1.0, 0, rho=50.0, r=None, horizon=None, replicates=2, seed=0)
        assert report.inputs["radius"] == int(3 ** 0.9)
        assert report.inputs["horizon"] == math.ceil(10 * 14 * math.log(3))

    def test_needs_degree_three(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            burn_in_probe(path4, 1.0, 0, rho=1.0, r=1, horizon=10, replicates=1, seed=0)

    def test_start_policies(self, petersen: Graph) -> None:
        assert start_set(petersen, "empty").size == 0
        # not bipartite, so the side policy falls back to a greedy set
        assert start_set(petersen, "side") == start_set(petersen, "greedy")
        with pytest.raises(DomainError):
            start_set(petersen, "random")


class TestDeterministicExperiments:
    """BP accuracy, uniqueness tables and fixed-point traces."""

    @pytest.mark.parametrize("lam", [0.1, 1.0, 4.0])
    def test_bp_exact_on_trees(self, random_trees: list, lam: float) -> None:
        for tree in random_trees:
            report = bp_accuracy(tree, lam, max(diameter(tree), 1))
            assert report.metrics["max_edge_ratio_error"].estimate <= 1e-9
            assert report.metrics["max_vertex_ratio_error"].estimate <= 1e-9

    def test_bp_accuracy_rows(self, cycle5: Graph) -> None:
        report = bp_accuracy(cycle5, 1.0, 10)
        assert len(report.rows) == 10
        assert report.metrics["max_edge_ratio_error"].estimate > 0

    def test_uniqueness_scan_rows(self) -> None:
        report = uniqueness_scan(0.2, [3, 4, 5])
        assert [row["max_degree"] for row in report.rows] == [3, 4, 5]
        assert report.rows[0]["lambda"] == pytest.approx(0.8 * lambda_c(3))
        assert "min_margin" in report.metrics

    def test_uniqueness_scan_without_degrees(self) -> None:
        report = uniqueness_scan(0.2, [])
        assert report.rows == []
        assert report.metrics == {}

    def test_fixed_point_trace(self, petersen: Graph) -> None:
        report = fixed_point_experiment(petersen, 1.0)
        assert report.passed is True
        assert len(report.series["residual"]) == len(report.series["envelope"])
        assert report.metrics["final_residual"].estimate <= 1e-10

    def test_uniformity_uses_exact_stationary_mass(self, petersen: Graph) -> None:
        report = uniformity_experiment(petersen, 1.0, 0, eps=0.5, burn_in=100, window=20, replicates=3, seed=0)
        stationary = report.metrics["stationary_fraction"]
        assert stationary.method == "exact"
        assert 0.0 < stationary.estimate <= 1.0
        assert len(report.rows) == 3

    def test_uniformity_slack_covers_all_mass(self, petersen: Graph) -> None:
        # εΔ ≥ Δ leaves every configuration inside the band
        report = uniformity_experiment(petersen, 1.0, 0, eps=1.0, burn_in=0, window=0, replicates=1, seed=0)
        assert report.metrics["stationary_fraction"].estimate == pytest.approx(1.0)

    def test_marginal_sanity(self, single_vertex: Graph) -> None:
        assert exact_marginal(single_vertex, 1.0, 0) == 0.5


class TestSuites:
    """verify suites."""

    def test_unknown_suite(self) -> None:
        with pytest.raises(DomainError):
            run_suite("nope")

    @pytest.mark.slow
    def test_oracle_suite_passes(self) -> None:
        report = run_suite("oracle")
        assert report.passed is True
        assert report.metrics["max_relative_error"].estimate <= 1e-12

    @pytest.mark.slow
    def test_bp_suite_passes(self) -> None:
        assert run_suite("bp").passed is True

    @pytest.mark.slow
    def test_bp_suite_covers_degrees_above_alpha_one(self) -> None:
        report = run_suite("bp")
        assert report.passed is True
        by_degree = {row["max_degree"]: row for row in report.rows}
        assert sorted(by_degree) == [4, 6, 8, 12]
        assert not by_degree[4]["rate_checked"] and not by_degree[6]["rate_checked"]
        assert by_degree[8]["rate_checked"] and by_degree[12]["rate_checked"]
        assert "newton" in by_degree[4]["methods"]
        assert all(row["spread"] <= 1e-8 for row in report.rows)

    def test_phi_suite_checks_every_degree_with_a_margin(self) -> None:
        report = run_suite("phi")
        assert report.passed is True
        degrees = [row["max_degree"] for row in report.rows]
        assert degrees == list(range(15, 41))
        assert all(row["margin"] >= 0 and row["passed"] for row in report.rows)
        assert all(1.0 <= row["phi_min"] <= row["phi_max"] <= 12.0 for row in report.rows)

    def test_phi_suite_without_margin_fails_threshold(self) -> None:
        report = phi_suite(degrees=(3, 4))
        assert report.metrics["checked_pairs"].estimate == 0.0
        assert report.passed is False

    @pytest.mark.slow
    def test_sampler_suite_passes(self) -> None:
        report = run_suite("sampler")
        assert report.passed is True
        assert [row["graph"] for row in report.rows] == ["path:4", "cycle:5", "star:4", "complete:4", "petersen"]
        assert report.metrics["max_empirical_tv"].estimate <= 0.01

    @pytest.mark.slow
    def test_count_suite_z_within_five_percent(self) -> None:
        report = count_suite(seed=0, trials=100, jobs=4)
        assert report.passed is True
        triangle, regular = report.rows
        assert triangle["exact_z"] == pytest.approx(4.0)
        assert regular["graph"] == "regular:20:3"
        assert regular["lambda"] == pytest.approx(2.0)
        for row in report.rows:
            assert row["trials"] == 100
            assert row["within"] >= 95


class TestRegressionPins:
    """Frozen values measured by exact enumeration and independent simulation, ±10%."""

    @pytest.mark.slow
    def test_heawood_uniformity_pin(self, heawood: Graph) -> None:
        pin = load_pin("estimators.heawood_uniformity")
        report = uniformity_experiment(heawood, 0.5 * lambda_c(3), 0, eps=0.3, burn_in=500, window=14,
                                       replicates=4000, seed=0, every=1, start_policy="empty")
        # plain F iteration cycles at λ = 2 on a 3-regular graph
        assert report.inputs["fixed_point_method"] == "newton"
        assert report.metrics["stationary_fraction"].method == "exact"
        for metric, expected in pin["metrics"].items():
            assert report.metrics[metric].estimate == pytest.approx(expected, rel=pin["rel"]), metric

    @pytest.mark.slow
    def test_coupling_hamming_pin(self) -> None:
        pin = load_pin("estimators.coupling_hamming_12_regular")
        g = random_regular(2000, 12, seed=7)
        lam = 0.7 * lambda_c(12)
        report = coupling_contraction(g, lam, steps=10 * g.vertex_count, replicates=60_000, seed=0,
                                      start_policy="burn_in", burn_in=20_000, jobs=4)
        assert report.metrics["mean_hamming"].estimate == pytest.approx(pin["metrics"]["mean_hamming"], rel=pin["rel"])
        assert report.metrics["mean_hamming"].estimate < 1.0
