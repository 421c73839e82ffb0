import warnings

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import instance_and_theta
from pg_orderlab import instances
from pg_orderlab.bandit import expected_reward, pg_gradient, policy_of, safe_step_size, suboptimality_gap
from pg_orderlab.optim import (
    RunConfig,
    StepSizeWarning,
    classify_support,
    default_stride,
    npg_direction,
    policies,
    run,
    step_npg,
    step_pg,
)


def get(name):
    return instances.builtin(name)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig("sgd", 0.1, [0.0], 10)
    with pytest.raises(ValueError):
        RunConfig("pg", 0.0, [0.0], 10)
    with pytest.raises(ValueError):
        RunConfig("pg", 0.1, [0.0], 0)
    with pytest.raises(ValueError):
        RunConfig("pg", 0.1, [0.0], 10, record_stride=0)
    assert default_stride(10) == 1 and default_stride(10**7) == 1000


def test_kernel_matches_numpy_steps():
    ni = get("example1")
    inst = ni.instance
    with pytest.warns(StepSizeWarning):
        traj = run(inst, RunConfig("pg", 0.2, ni.canonical_theta1, 50))
    theta = ni.canonical_theta1.copy()
    for k in range(50):
        assert np.allclose(traj.theta[k], theta, rtol=1e-12, atol=1e-12)
        pi = policy_of(inst, theta)
        assert traj.value[k] == pytest.approx(expected_reward(inst, pi), rel=1e-13)
        assert traj.gap[k] == pytest.approx(suboptimality_gap(inst, pi), rel=1e-11)
        assert traj.grad_norm[k] == pytest.approx(np.linalg.norm(pg_gradient(inst, theta)), rel=1e-11)
        theta = step_pg(inst, theta, 0.2)
    assert list(traj.t) == list(range(1, 51))
    assert traj.iterations == 50 and traj.terminal == "max-iters"


def test_stride_keeps_first_and_last():
    ni = get("example1")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StepSizeWarning)
        traj = run(ni.instance, RunConfig("pg", 0.2, ni.canonical_theta1, 95, record_stride=10))
    assert list(traj.t) == [1, 11, 21, 31, 41, 51, 61, 71, 81, 91, 95]


def test_npg_example1_closed_form():
    ni = get("example1")
    inst = ni.instance
    direction = npg_direction(inst)
    assert np.allclose(direction.w_star, [0.8, -2.2])
    assert direction.delta_hat == pytest.approx(2.8)
    traj = run(inst, RunConfig("npg", 0.2, ni.canonical_theta1, 30))
    for k, t in enumerate(traj.t):
        theta = ni.canonical_theta1 + 0.2 * (t - 1) * direction.w_star
        assert np.allclose(traj.theta[k], theta)
    theta = step_npg(inst, ni.canonical_theta1, direction, 0.2)
    assert np.allclose(theta, traj.theta[1])


def test_gap_tolerance_stops_run():
    ni = get("example1")
    traj = run(ni.instance, RunConfig("npg", 0.2, ni.canonical_theta1, 10**6, gap_tol=1e-6))
    assert traj.terminal == "reached-gap-tol"
    assert traj.final_gap < 1e-6 <= traj.gap[-2]
    assert traj.limit_action == 0 and traj.support == "one-hot"


def test_npg_example3_converges_to_wrong_action():
    ni = get("example3")
    traj = run(ni.instance, RunConfig("npg", 0.2, ni.canonical_theta1, 2000))
    assert traj.limit_action == 1


def test_npg_example4_keeps_ratio():
    ni = get("example4")
    traj = run(ni.instance, RunConfig("npg", 0.2, ni.canonical_theta1, 300))
    pis = policies(ni.instance, traj.theta)
    ratio = pis[:, 0] / pis[:, 1]
    assert np.allclose(ratio, ratio[0], rtol=1e-10)
    assert traj.limit_action is None


def test_enforce_safe_eta():
    ni = get("example1")
    with pytest.raises(ValueError, match="bound"):
        run(ni.instance, RunConfig("pg", 0.2, ni.canonical_theta1, 10, enforce_safe_eta=True))
    eta = safe_step_size(ni.instance)
    with warnings.catch_warnings():
        warnings.simplefilter("error", StepSizeWarning)
        run(ni.instance, RunConfig("pg", eta, ni.canonical_theta1, 10, enforce_safe_eta=True))


def test_numerical_failure_reports_last_finite_iterate():
    ni = get("example1")
    traj = run(ni.instance, RunConfig("npg", 1e7, ni.canonical_theta1, 100))
    assert traj.terminal == "numerical-failure"
    assert np.all(np.isfinite(traj.final_theta))
    assert traj.iterations < 100


def test_theta_length_checked():
    with pytest.raises(ValueError, match="theta1"):
        run(get("example1").instance, RunConfig("npg", 0.1, [0.0, 0.0, 0.0], 5))


def test_classify_support():
    inst = get("example4").instance
    assert classify_support(inst, np.array([0.9999, 1e-4, 0, 0])) == (0, "one-hot")
    assert classify_support(inst, np.array([0.5, 0.5, 0, 0])) == (None, "spread")
    tied = instances.parse("K 3\nd 1\nX\n1\n2\n0\nr 3 3 1\n").instance
    assert classify_support(tied, np.array([0.5, 0.5, 0.0])) == (None, "tied-support")


@settings(max_examples=60, deadline=None)
@given(instance_and_theta())
def test_safe_step_ascends(case):
    inst, theta = case
    eta = safe_step_size(inst)
    traj = run(inst, RunConfig("pg", eta, theta, 200))
    assert np.all(np.diff(traj.value) >= -1e-12)
