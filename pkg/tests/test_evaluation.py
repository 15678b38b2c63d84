import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from goa_osfs.data import load_train_test
from goa_osfs.evaluation import (GOA_GRID, XSAOLA_GRID, EvalSettings, RunReport, fair_compare,
                                 pick_baseline, run_grid, run_trials, score_subset,
                                 selected_count_mode)
from goa_osfs.streaming import InfeasibleStream, ScenarioSpec

from conftest import DATA, make_dataset


def rep(delta, feats, acc, svm=None, algorithm="GOA"):
    return RunReport("d", algorithm, "A", delta, feats, acc, acc if svm is None else svm, 0, [])


def test_under_budget_rule():
    res = fair_compare([rep(0.3, 2, 0.90), rep(0.5, 5, 0.95)], rep(0.1, 3, 0.8, algorithm="XSAOLA"))
    assert res.chosen_delta == 0.3 and res.rule_applied == "UnderBudgetBest"


def test_over_budget_regardless_of_performance():
    res = fair_compare([rep(0.3, 7, 0.99), rep(0.5, 5, 0.10)], rep(0.1, 3, 0.8))
    assert res.chosen_report.n_selected == 5 and res.rule_applied == "ClosestOverBudget"


def test_boundary_is_under_budget():
    res = fair_compare([rep(0.2, 3, 0.5), rep(0.4, 2, 0.4)], rep(0.1, 3, 0.8))
    assert res.chosen_delta == 0.2 and res.rule_applied == "UnderBudgetBest"


def test_ties_fewer_features_then_smaller_delta():
    base = rep(0.1, 5, 0.8)
    assert fair_compare([rep(0.6, 3, 0.9), rep(0.4, 2, 0.9)], base).chosen_delta == 0.4
    assert fair_compare([rep(0.6, 2, 0.9), rep(0.4, 2, 0.9)], base).chosen_delta == 0.4


def test_classifier_flag():
    cands = [rep(0.2, 2, 0.9, svm=0.5), rep(0.4, 2, 0.8, svm=0.95)]
    assert fair_compare(cands, rep(0.1, 2, 0.0), "svm").chosen_delta == 0.4
    assert fair_compare(cands, rep(0.1, 2, 0.0), "knn").chosen_delta == 0.2
    with pytest.raises(ValueError):
        fair_compare([], rep(0.1, 2, 0.0))


candidate = st.builds(lambda d, f, a: rep(d, f, a), st.sampled_from(GOA_GRID),
                      st.integers(0, 12), st.floats(0, 1))


@settings(max_examples=200)
@given(st.lists(candidate, min_size=1, max_size=20), st.integers(0, 12))
def test_fair_compare_invariants(cands, budget):
    res = fair_compare(cands, rep(0.01, budget, 0.5))
    chosen = res.chosen_report
    under = [c for c in cands if c.n_selected <= budget]
    if under:
        assert res.rule_applied == "UnderBudgetBest"
        assert chosen.n_selected <= budget
        assert chosen.acc_knn == max(c.acc_knn for c in under)
    else:
        assert res.rule_applied == "ClosestOverBudget"
        assert chosen.n_selected == min(c.n_selected for c in cands)


def test_pick_baseline():
    grid = [rep(0.1, 3, 0.8), rep(0.2, 2, 0.8), rep(0.3, 1, 0.7)]
    assert pick_baseline(grid).delta == 0.2


def test_count_mode():
    assert selected_count_mode([2, 2, 3]) == 2
    assert selected_count_mode([2, 3, 3, 2]) == 3


def test_grids():
    assert GOA_GRID[0] == 0.05 and GOA_GRID[-1] == 0.95 and len(GOA_GRID) == 19
    assert len(XSAOLA_GRID) == 20 and XSAOLA_GRID[0] == pytest.approx(1e-3)
    assert XSAOLA_GRID[-1] == pytest.approx(1.0)


@pytest.fixture(scope="module")
def small():
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 3, 240)
    X = rng.standard_normal((240, 5)) + labels[:, None] * np.array([1.0, 0.8, 0.0, 0.5, 0.0])
    X[:, 4] = X[:, 0] + 0.05 * rng.standard_normal(240)
    return make_dataset(X, labels, name="small")


def test_empty_subset_falls_back_to_majority(small):
    tr, te = np.arange(160), np.arange(160, 240)
    knn, svm, fb = score_subset(small, tr, te, [], EvalSettings(), 0)
    maj = np.argmax(np.bincount(small.labels[tr]))
    assert fb and knn == svm == np.mean(small.labels[te] == maj)


def test_run_trials_deterministic(small):
    a = run_trials(small, "GOA", 0.3, ScenarioSpec("B1", min_per_class=2), seed=4)
    b = run_trials(small, "goa", 0.3, ScenarioSpec("B1", min_per_class=2), seed=4)
    assert a.to_json(timing=False) == b.to_json(timing=False)
    assert len(a.trial_seeds) == 5 and len(a.acc_knn_per_trial) == 5
    assert a.acc_knn == pytest.approx(np.mean(a.acc_knn_per_trial))
    assert a.n_selected == selected_count_mode(a.n_selected_per_trial)
    assert 0.0 <= a.acc_svm <= 1.0


def test_grid_matches_single_runs(small):
    spec = ScenarioSpec("A")
    grid = run_grid(small, "XSAOLA", [0.01, 0.2], spec, seed=1)
    single = run_trials(small, "XSAOLA", 0.2, spec, seed=1)
    assert grid[1].to_json(timing=False) == single.to_json(timing=False)


def test_fixed_split_single_trial(tmp_path):
    ds = load_train_test(DATA / "wdbc_train.csv", DATA / "wdbc_test.csv", "diagnosis")
    r = run_trials(ds, "XSAOLA", 0.05, ScenarioSpec("A"))
    assert len(r.acc_knn_per_trial) == 1 and np.var(r.acc_knn_per_trial) == 0.0


def test_infeasible_reports_trial(small):
    with pytest.raises(InfeasibleStream, match="trial 0: scenario B3"):
        run_trials(small, "GOA", 0.3, ScenarioSpec("B3", b3_spans=4, min_per_class=9))


def test_unknown_algorithm(small):
    with pytest.raises(ValueError, match="unknown algorithm"):
        run_trials(small, "LASSO", 0.3, ScenarioSpec("A"))


def test_report_roundtrip(tmp_path, small):
    r = run_trials(small, "GOA", 0.5, ScenarioSpec("A"), EvalSettings(n_trials=2))
    assert "runtime_ms" not in r.to_dict(timing=False)
    (tmp_path / "r.json").write_text(r.to_json())
    assert RunReport.load(tmp_path / "r.json") == r
