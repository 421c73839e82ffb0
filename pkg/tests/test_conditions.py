import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bandit_instances
from pg_orderlab import instances, verify
from pg_orderlab.bandit import BanditInstance
from pg_orderlab.conditions import (
    check_non_domination,
    check_optimal_action_preservation,
    check_order_preservation,
    consecutive_pairs,
    predict,
    preserves_order,
)


def get(name):
    return instances.builtin(name).instance


def test_non_domination_examples():
    for name in ("example1", "example2", "example3", "example4"):
        assert check_non_domination(get(name)) == (True, None)
    holds, pair = check_non_domination(get("prop2"))
    assert not holds
    # Action 3 (index 2) is dominated by action 2 (index 1): <x3, x2> >= ||x3||^2.
    assert pair == (2, 1)


@pytest.mark.parametrize("name, feasible", [("example1", True), ("example3", True), ("example2", False), ("example5", False)])
def test_order_preservation_examples(name, feasible):
    inst = get(name)
    res = check_order_preservation(inst)
    assert res.feasible is feasible
    if feasible:
        assert preserves_order(inst.r, inst.X @ res.witness, margin=res.margin - 1e-9)
        assert np.all(np.abs(res.witness) <= 1 + 1e-12)
    else:
        assert res.witness is None and res.margin <= 1e-9


def test_example1_witness():
    res = check_order_preservation(get("example1"))
    assert np.allclose(res.witness, [-1, -1])
    assert res.margin == pytest.approx(1.0)


def test_projections_and_optimal_action():
    oap, r_hat = check_optimal_action_preservation(get("example1"))
    assert oap is True and np.allclose(r_hat, [4.4, -0.8, -2.2, 1.6])
    oap, r_hat = check_optimal_action_preservation(get("example3"))
    assert oap is False and np.allclose(r_hat, np.array([-3, 18, -9, 6]) / 5)
    # The projection of r = (9, 8, 7, 6) on span{(0,0,-1,2), (-2,1,0,0)} is (4,-2,-1,2),
    # whose residual norm sqrt(205) matches the known approximation error.
    oap, r_hat = check_optimal_action_preservation(get("example2"))
    assert np.allclose(r_hat, [4, -2, -1, 2])
    assert oap is True
    oap, r_hat = check_optimal_action_preservation(get("example4"))
    assert oap is False and np.allclose(r_hat, [1, 1, -1, -1])


def test_tied_optimum_is_undefined():
    inst = BanditInstance(np.array([[1.0], [2.0], [0.0]]), np.array([3.0, 3.0, 1.0]))
    oap, _ = check_optimal_action_preservation(inst)
    assert oap is None
    assert predict(inst).npg_prediction == "unsupported-tied-optimum"


def test_predictions():
    assert predict(get("example1")).pg_prediction == "guaranteed-global"
    assert predict(get("example1")).npg_prediction == "global"
    assert predict(get("example2")).pg_prediction == "unknown"
    assert predict(get("example4")).npg_prediction == "not-global"
    assert predict(get("prop2")).pg_prediction == "unknown"


def test_tied_rewards_become_equalities():
    X = np.array([[1.0], [1.0], [0.0]])
    inst = BanditInstance(X, np.array([2.0, 2.0, 0.0]))
    res = check_order_preservation(inst)
    assert res.feasible
    # Ties that X cannot match make the order unpreservable.
    inst = BanditInstance(np.array([[2.0], [1.0], [0.0]]), np.array([2.0, 2.0, 0.0]))
    assert not check_order_preservation(inst).feasible


def test_consecutive_pairs_sorted_by_reward():
    assert consecutive_pairs([1.0, 3.0, 2.0]) == [(1, 2), (2, 0)]


def test_preserves_order():
    assert preserves_order([3, 2, 1], [10, 0, -5])
    assert not preserves_order([3, 2, 1], [10, 11, -5])
    assert not preserves_order([3, 3, 1], [1, 2, 0])
    assert not preserves_order([3, 2, 1], [3, 2, 1], margin=1.5)


@settings(max_examples=150, deadline=None)
@given(bandit_instances())
def test_feasibility_is_invariant_under_positive_scaling(inst):
    base = check_order_preservation(inst)
    scaled = check_order_preservation(BanditInstance(inst.X * 3.0, inst.r))
    assert base.feasible == scaled.feasible or abs(base.margin) < 1e-6


@settings(max_examples=150, deadline=None)
@given(bandit_instances(), st.integers(0, 2**31))
def test_feasibility_depends_only_on_reward_order(inst, seed):
    rng = np.random.default_rng(seed)
    r2 = verify.order_preserving_transform(rng, inst.r)
    base = check_order_preservation(inst)
    other = check_order_preservation(BanditInstance(inst.X, r2))
    assert base.feasible == other.feasible


@settings(max_examples=150, deadline=None)
@given(bandit_instances())
def test_witness_orders_rewards(inst):
    res = check_order_preservation(inst)
    if res.feasible:
        assert preserves_order(inst.r, inst.X @ res.witness, margin=res.margin * (1 - 1e-6))


@settings(max_examples=100, deadline=None)
@given(bandit_instances(max_K=5, d=2))
def test_agrees_with_angular_oracle(inst):
    res = check_order_preservation(inst)
    _, margin = verify.angular_oracle(inst, n_dirs=2000)
    # The sampled grid can miss a thin feasible cone; only clear-cut cases are compared.
    if abs(margin) > 1e-3 * max(1.0, np.abs(inst.X).max()):
        assert res.feasible == (margin > 0)
