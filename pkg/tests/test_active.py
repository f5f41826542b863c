"""Active loop: oracles, schedules, level mechanics, and full runs."""
import json

import numpy as np
import numpy.testing as npt
import pytest

from cac import (ActiveState, BudgetExhausted, CallbackOracle, ConfigError,
                 DensityField, KernelConfig, ReplayOracle, Schedule,
                 TruthOracle, default_eta_constant, eta_for,
                 gen_two_moons, median_nearest_neighbor, run, run_level)
from cac.active import NEIGHBOR_SCALE


# ---------------------------------------------------------------------------
# oracles


def test_truth_oracle_counts_distinct_queries():
    oracle = TruthOracle([1, 2, 2, 1])
    assert oracle.query(2) == 2
    assert oracle.query(2) == 2          # repeat is free
    assert oracle.query(0) == 1
    assert oracle.query_count == 2
    assert oracle.queried_indices == [0, 2]
    with pytest.raises(IndexError):
        oracle.query(9)


def test_budget_blocks_only_fresh_queries():
    oracle = TruthOracle([1, 2, 1], budget=1)
    assert oracle.query(1) == 2
    assert oracle.query(1) == 2
    with pytest.raises(BudgetExhausted):
        oracle.query(0)
    assert oracle.query_count == 1


def test_replay_oracle_from_file(tmp_path):
    f = tmp_path / "script.csv"
    f.write_text("# session from last tuesday\n3,2\n\n7,1\n")
    oracle = ReplayOracle.from_file(f)
    assert oracle.query(7) == 1
    assert oracle.query(3) == 2
    with pytest.raises(BudgetExhausted, match="no label for point 5"):
        oracle.query(5)


def test_replay_oracle_rejects_malformed_lines(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("3,2\nnonsense\n")
    with pytest.raises(ValueError, match="line 2"):
        ReplayOracle.from_file(f)


def test_callback_oracle_caches():
    calls = []

    def fn(i):
        calls.append(i)
        return 5

    oracle = CallbackOracle(fn)
    assert oracle.query(4) == 5
    assert oracle.query(4) == 5
    assert calls == [4]


# ---------------------------------------------------------------------------
# schedule plumbing


def test_eta_for_examples():
    assert eta_for(4, 0.25, 1.0) == 1.0
    assert eta_for(8, 0.25, 1.0) == 0.5
    with pytest.raises(ValueError):
        eta_for(4, 0.0, 1.0)


def test_median_nearest_neighbor_cases():
    line = np.column_stack([np.arange(5.0), np.zeros(5)])
    assert median_nearest_neighbor(line) == 1.0
    assert median_nearest_neighbor(line[:1]) == 0.0
    dup = np.zeros((4, 2))
    assert median_nearest_neighbor(dup) == 0.0


def test_default_eta_constant_sets_first_level_scale():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 1, (100, 2))
    sched = Schedule(n_start=4, n_max=6, theta_init=0.25)
    c = default_eta_constant(pts, sched)
    eta0 = eta_for(sched.n_start, sched.theta_init, c)
    npt.assert_allclose(eta0, NEIGHBOR_SCALE * median_nearest_neighbor(pts),
                        rtol=1e-12)


def test_schedule_validation():
    with pytest.raises(ConfigError):
        Schedule(n_start=5, n_max=4)
    with pytest.raises(ConfigError):
        Schedule(n_start=4, n_max=6, step=0.0)
    with pytest.raises(ConfigError):
        Schedule(n_start=4, n_max=6, theta_init=1.5)
    with pytest.raises(ConfigError):
        Schedule(n_start=4, n_max=6, tau=1.0)
    with pytest.raises(ConfigError):
        Schedule(n_start=4, n_max=6, eta_constant=-1.0)


# ---------------------------------------------------------------------------
# single-level mechanics on hand-built fields
#
# two 1-d blobs joined by one bridge point; densities are handpicked so the
# bridge is a member at theta=0.2 but not at 0.4


BLOB_X = np.array([0.0, 0.1, 0.2, 0.3, 0.4,          # blob A (0..4)
                   0.55,                              # bridge (5)
                   0.7, 0.8, 0.9, 1.0, 1.1])[:, None]  # blob B (6..10)
BLOB_VALUES = np.array([0.9, 0.95, 1.0, 0.95, 0.9,
                        0.3,
                        0.85, 0.9, 0.97, 0.9, 0.85])


def blob_state(theta=0.2, labeled=None, max_escalations=20):
    field = DensityField(values=BLOB_VALUES, sample_max=1.0,
                         config=KernelConfig(n=2, q=1), point_count=11)
    sched = Schedule(n_start=2, n_max=2, theta_init=theta, tau=2.0,
                     eta_constant=0.2,
                     max_escalations_per_level=max_escalations)
    state = ActiveState.fresh(11, sched, eta_constant=0.2)
    state.labeled = dict(labeled or {})
    for i, lab in state.labeled.items():      # as a prior query would have
        state.predicted[i] = lab
    return state, field, sched


def test_single_unlabeled_component_queries_the_mode():
    state, field, sched = blob_state()
    oracle = TruthOracle(np.full(11, 7))
    run_level(state, BLOB_X, field, oracle, sched)
    # one component (bridge holds), one query at the densest point (idx 2)
    assert oracle.queried_indices == [2]
    rec = state.history[-1]
    assert rec["components"] == 1
    assert rec["queries"] == [{"index": 2, "label": 7}]
    assert np.all(state.predicted == 7)
    assert state.flags[0] == "queried"
    assert len(state.confident) == 11


def test_conflict_escalates_until_the_bridge_drops():
    state, field, sched = blob_state(labeled={0: 1, 8: 2})
    oracle = TruthOracle(np.full(11, 9))
    run_level(state, BLOB_X, field, oracle, sched)
    rec = state.history[-1]
    assert rec["escalations"] == 1
    assert state.theta == pytest.approx(0.4)
    assert rec["components"] == 2
    assert rec["queries"] == []          # both halves had their anchor
    assert oracle.query_count == 0
    npt.assert_array_equal(state.predicted[:5], 1)
    npt.assert_array_equal(state.predicted[6:], 2)
    assert state.predicted[5] == 0       # bridge fell out of the support
    assert state.component_of[5] == -1
    assert not state.degraded
    assert state.flags[0] == "agreed" and state.flags[1] == "agreed"


def test_exhausted_escalation_splits_by_nearest_anchor():
    state, field, sched = blob_state(labeled={0: 1, 8: 2},
                                     max_escalations=0)
    oracle = TruthOracle(np.full(11, 9))
    run_level(state, BLOB_X, field, oracle, sched)
    rec = state.history[-1]
    assert rec["escalations"] == 0
    assert rec["splits"] == [0]
    assert state.degraded
    assert oracle.query_count == 0
    # midpoint of the anchors at 0.0 and 0.9 is 0.45
    npt.assert_array_equal(state.predicted[:5], 1)
    npt.assert_array_equal(state.predicted[5:], 2)
    assert state.flags[0] == "split"


def test_dropped_anchor_is_adopted_within_graph_range():
    # the labeled point (idx 5, value 0.3) drops out of the support, 0.12
    # from blob A but 0.38 from blob B; with eta/2 = 0.15 only A adopts it
    x = np.array([0.0, 0.1, 0.2, 0.3, 0.4,
                  0.52,
                  0.9, 1.0, 1.1, 1.2, 1.3])[:, None]
    field = DensityField(values=BLOB_VALUES, sample_max=1.0,
                         config=KernelConfig(n=2, q=1), point_count=11)
    sched = Schedule(n_start=2, n_max=2, theta_init=0.4, tau=2.0,
                     eta_constant=0.24)
    state = ActiveState.fresh(11, sched, eta_constant=0.24)
    state.labeled = {5: 3}
    state.predicted[5] = 3
    oracle = TruthOracle(np.full(11, 9))
    run_level(state, x, field, oracle, sched)
    rec = state.history[-1]
    assert rec["adoptions"] == 1
    # blob A (nearest) adopted the dropped label; blob B had to ask
    assert state.flags[0] == "adopted"
    assert state.flags[1] == "queried"
    assert oracle.query_count == 1
    npt.assert_array_equal(state.predicted[:5], 3)
    npt.assert_array_equal(state.predicted[6:], 9)


def test_budget_error_carries_state():
    state, field, sched = blob_state()
    oracle = TruthOracle(np.full(11, 7), budget=0)
    with pytest.raises(BudgetExhausted) as exc_info:
        run_level(state, BLOB_X, field, oracle, sched)
    assert exc_info.value.state is state


def test_schedule_budget_checked_before_the_oracle():
    state, field, sched = blob_state(theta=0.4)   # two components, no bridge
    sched2 = Schedule(n_start=2, n_max=2, theta_init=0.4, tau=2.0,
                      eta_constant=0.2, query_budget=1)
    oracle = TruthOracle(np.full(11, 7))
    with pytest.raises(BudgetExhausted, match="query budget 1"):
        run_level(state, BLOB_X, field, oracle, sched2)
    assert oracle.query_count == 1       # first component got its answer


# ---------------------------------------------------------------------------
# full runs


def test_two_moons_example_two_components_two_queries():
    ds = gen_two_moons(1000, 0.07, seed=12)
    report, state = run(ds.points, TruthOracle(ds.labels),
                        Schedule(n_start=6, n_max=6),
                        KernelConfig(n=6, q=2), truth=ds.labels)
    assert report.levels[0]["components"] == 2
    assert report.query_total == 2
    assert report.complete
    assert report.scores.confident_accuracy == 1.0


def test_single_point_run():
    pts = np.array([[0.2, -0.4]])
    report, state = run(pts, TruthOracle([4]), Schedule(n_start=2, n_max=2),
                        KernelConfig(n=2, q=2))
    assert report.query_total == 1
    assert list(report.assignments) == [4]
    assert list(report.confident) == [0]
    assert report.complete


def test_run_fills_every_point_after_witness_pass():
    ds = gen_two_moons(1000, 0.05, seed=3)
    report, _ = run(ds.points, TruthOracle(ds.labels),
                    Schedule(n_start=6, n_max=6, theta_init=0.35),
                    KernelConfig(n=6, q=2), truth=ds.labels)
    assert np.all(report.predicted > 0)
    assert report.scores.confident_fraction < 1.0   # witness pass had work
    assert report.scores.accuracy > 0.95


def test_budget_exhaustion_attaches_partial_report():
    ds = gen_two_moons(1000, 0.05, seed=3)   # needs two queries at n=6
    oracle = TruthOracle(ds.labels, budget=1)
    with pytest.raises(BudgetExhausted) as exc_info:
        run(ds.points, oracle, Schedule(n_start=6, n_max=6),
            KernelConfig(n=6, q=2), truth=ds.labels)
    rep = exc_info.value.report
    assert rep is not None
    assert not rep.complete
    assert rep.query_total == 1      # the answered query is retained
    assert rep.levels == []          # the aborted level left no record
    assert exc_info.value.state.labeled


def test_reports_are_deterministic_documents():
    ds = gen_two_moons(300, 0.05, seed=8)
    args = (ds.points, Schedule(n_start=4, n_max=5), KernelConfig(n=4, q=2))
    rep1, _ = run(args[0], TruthOracle(ds.labels), args[1], args[2],
                  truth=ds.labels, dataset_name="moons")
    rep2, _ = run(args[0], TruthOracle(ds.labels), args[1], args[2],
                  truth=ds.labels, dataset_name="moons")
    assert rep1.to_json() == rep2.to_json()
    doc = json.loads(rep1.to_json())
    assert doc["dataset"] == "moons"
    assert [lvl["n"] for lvl in doc["levels"]] == [4.0, 5.0]
    assert "scores" in doc and "kernel" in doc


def test_truth_is_never_required():
    ds = gen_two_moons(300, 0.05, seed=8)
    rep, _ = run(ds.points, TruthOracle(ds.labels),
                 Schedule(n_start=4, n_max=4), KernelConfig(n=4, q=2))
    assert rep.scores is None
    assert "scores" not in rep.levels[0]


def test_run_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        run(np.zeros((5, 3)), TruthOracle([1] * 5),
            Schedule(n_start=2, n_max=2), KernelConfig(n=2, q=2))
