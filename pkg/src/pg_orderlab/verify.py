"""Reproduction suite: every acceptance fact with its expected values.

Each fact is a function ``fact(get) -> list[Check]`` where ``get`` maps an
instance name to a :class:`~pg_orderlab.instances.NamedInstance`. Passing a
different ``get`` lets the suite run against altered data.

Action and column numbers in check labels are 1-based.
"""

import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import instances
from .analysis import fit_rate, fit_rate_arrays
from .bandit import (
    BanditInstance,
    InstanceError,
    covariance,
    covariance_pairwise,
    expected_reward,
    pg_gradient,
    policy_of,
    safe_step_size,
    smoothness_beta,
    softmax,
)
from .conditions import (
    check_non_domination,
    check_optimal_action_preservation,
    check_order_preservation,
    preserves_order,
)
from .linalg import least_squares
from .optim import RunConfig, StepSizeWarning, npg_direction, policies, run

THREADS_ENV = "PG_ORDERLAB_THREADS"

# Expected values.
EPS_APPROX_SQ = {"example1": 202.6, "example2": 205.0, "example3": 212.0}
R_HAT = {
    "example1": [22 / 5, -4 / 5, -11 / 5, 8 / 5],
    "example2": [-3 / 5, 18 / 5, -9 / 5, -6 / 5],
    "example4": [1.0, 1.0, -1.0, -1.0],
}
ORDER_FEASIBLE = {"example1": True, "example3": True, "example2": False, "example5": False}
NON_DOMINATION = {"example1": True, "example2": True, "example3": True, "example4": True, "prop2": False}
PROP2_PAIR = (3, 2)
OPTIMAL_ACTION_PRESERVED = {"example1": True, "example2": False, "example3": False, "example4": False}
NPG_EX1_SLOPE = -0.2 * (22 - 8) / 5  # -eta * delta_hat
PG_TARGET_VALUE = 8.9
PG_BUDGETS = {"example1": 10**7, "example3": 10**7, "example5": 2 * 10**6}
PG_RUN_SECONDS = 30.0
LP_ORACLE_SECONDS = 5.0


@dataclass
class Check:
    label: str
    passed: bool
    detail: str = ""


@dataclass
class Fact:
    key: str
    title: str
    func: object
    slow: bool = False


@dataclass
class FactResult:
    fact: Fact
    checks: list = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self):
        return self.error is None and all(c.passed for c in self.checks)


def _close(a, b, tol):
    return bool(np.all(np.abs(np.asarray(a, float) - np.asarray(b, float)) <= tol))


def _run(ni, alg, max_iters, **kw):
    cfg = RunConfig(alg, kw.pop("eta", ni.canonical_eta), kw.pop("theta1", ni.canonical_theta1), max_iters, **kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StepSizeWarning)
        return run(ni.instance, cfg)


def fact_approximation_errors(get):
    out = []
    for name, sq in EPS_APPROX_SQ.items():
        _, _, res = least_squares(get(name).instance.X, get(name).instance.r)
        out.append(Check(f"{name} eps_approx = sqrt({sq:g})", abs(res - math.sqrt(sq)) <= 1e-9,
                         f"got {res:.12f}, want {math.sqrt(sq):.12f}"))
    return out


def fact_projections(get):
    out = []
    for name, want in R_HAT.items():
        _, r_hat, _ = least_squares(get(name).instance.X, get(name).instance.r)
        out.append(Check(f"{name} r_hat", _close(r_hat, want, 1e-10),
                         f"got {np.round(r_hat, 12).tolist()}, want {np.round(want, 12).tolist()}"))
    return out


def fact_condition_matrix(get):
    out = []
    t0 = time.perf_counter()
    for name, want in ORDER_FEASIBLE.items():
        res = check_order_preservation(get(name).instance)
        out.append(Check(f"{name} order preservation {'feasible' if want else 'infeasible'}",
                         res.feasible == want, f"got {res.status}, margin {res.margin:.6g}"))
    for name, want in NON_DOMINATION.items():
        ok, pair = check_non_domination(get(name).instance)
        shown = None if pair is None else (pair[0] + 1, pair[1] + 1)
        passed = ok == want and (want or shown == PROP2_PAIR)
        label = f"{name} non-domination {want}" + ("" if want else f" with pair {PROP2_PAIR}")
        out.append(Check(label, passed, f"got {ok}, pair {shown}"))
    for name, want in OPTIMAL_ACTION_PRESERVED.items():
        ok, r_hat = check_optimal_action_preservation(get(name).instance)
        out.append(Check(f"{name} optimal-action preservation {want}", ok == want,
                         f"got {ok}, r_hat {np.round(r_hat, 6).tolist()}"))
    out.append(Check("timing (informational)", True, f"{1e3 * (time.perf_counter() - t0):.1f} ms"))
    return out


def _closed_form_gaps(inst, theta1, eta, w_star, n):
    t = np.arange(1, n + 1)
    thetas = theta1[None, :] + eta * (t - 1)[:, None] * w_star[None, :]
    pi = policies(inst, thetas)
    return t, pi @ (inst.r.max() - inst.r)


def fact_npg_example1(get):
    ni = get("example1")
    traj = _run(ni, "npg", 150)
    d = npg_direction(ni.instance)
    t, oracle_gap = _closed_form_gaps(ni.instance, ni.canonical_theta1, ni.canonical_eta, d.w_star, 150)
    oracle_fit = fit_rate_arrays(t, oracle_gap, "exp", 0.5)
    fit = fit_rate(traj, "exp", 0.5)
    rel = abs(fit.slope - NPG_EX1_SLOPE) / abs(NPG_EX1_SLOPE)
    return [
        Check("gap < 1e-6 after 150 iterations", traj.final_gap < 1e-6, f"gap {traj.final_gap:.3e}"),
        Check("limit action 1", traj.limit_action == 0, f"got {_action(traj.limit_action)}"),
        Check("closed-form oracle slope matches -eta*delta_hat",
              abs(oracle_fit.slope - NPG_EX1_SLOPE) <= 0.1 * abs(NPG_EX1_SLOPE), f"oracle slope {oracle_fit.slope:.6f}"),
        Check("tail-half exp slope within 10% of -0.56", rel <= 0.1,
              f"slope {fit.slope:.6f} over t in {fit.window}, rel err {rel:.2e}"),
        Check("R^2 > 0.999", fit.r_squared > 0.999, f"R^2 {fit.r_squared:.9f}"),
    ]


def fact_npg_failures(get):
    ex3 = _run(get("example3"), "npg", 150)
    ni4 = get("example4")
    ex4 = _run(ni4, "npg", 150)
    pi = policies(ni4.instance, ex4.theta)
    ratio = pi[:, 0] / pi[:, 1]
    drift = float(np.abs(ratio - ratio[0]).max())
    return [
        Check("example3 value -> 8 +- 1e-3", abs(ex3.final_value - 8) <= 1e-3, f"value {ex3.final_value:.9f}"),
        Check("example3 limit action 2", ex3.limit_action == 1, f"got {_action(ex3.limit_action)}"),
        Check("example4 pi(1)/pi(2) constant to 1e-9", drift <= 1e-9 and len(ratio) == 150,
              f"ratio {ratio[0]:.12g}, max drift {drift:.2e} over {len(ratio)} iterates"),
        Check("example4 no limit action", ex4.limit_action is None, f"support {ex4.support}"),
    ]


def fact_pg_global(get):
    out = []
    for name, budget in PG_BUDGETS.items():
        t0 = time.perf_counter()
        traj = _run(get(name), "pg", budget, gap_tol=get(name).instance.r_max - PG_TARGET_VALUE)
        secs = time.perf_counter() - t0
        out.append(Check(f"{name} PG value > 8.9 within {budget:.0e} iterations",
                         traj.final_value > PG_TARGET_VALUE,
                         f"value {traj.final_value:.6f} at t={traj.iterations}, {secs:.2f} s"))
        out.append(Check(f"{name} runtime <= {PG_RUN_SECONDS:g} s", secs <= PG_RUN_SECONDS, f"{secs:.2f} s"))
    return out


def fact_pg_failure(get):
    traj = _run(get("example2"), "pg", 10**7)
    return [
        Check("example2 PG value in [7.99, 8.01]", 7.99 <= traj.final_value <= 8.01, f"value {traj.final_value:.9f}"),
        Check("example2 limit action 2", traj.limit_action == 1, f"got {_action(traj.limit_action)}"),
    ]


def fact_prop2_region(get):
    ni = get("prop2")
    traj = _run(ni, "pg", 10**6, record_stride=1)
    scores = traj.theta @ ni.instance.X.T
    log13 = scores[:, 0] - scores[:, 2]
    log23 = scores[:, 1] - scores[:, 2]
    p1 = policies(ni.instance, traj.theta)[:, 0]
    n = len(traj.t)
    return [
        Check("every step recorded", n == 10**6, f"{n} iterates"),
        Check("pi(1)/pi(3) < 1/2 at every step", bool(np.all(log13 < math.log(0.5))),
              f"max ratio {math.exp(log13.max()):.6g}"),
        Check("pi(1)/pi(3) strictly decreasing", bool(np.all(np.diff(log13) < 0)),
              f"largest log-ratio step {np.diff(log13).max():.3e}"),
        Check("pi(2)/pi(3) > 3 at every step", bool(np.all(log23 > math.log(3))),
              f"min ratio {math.exp(log23.min()):.6g}"),
        Check("pi(1) <= 0.4 at every step", bool(p1.max() <= 0.4), f"max pi(1) {p1.max():.3e}"),
    ]


def fact_pg_power_rate(get):
    traj = _run(get("example1"), "pg", 10**7)
    fit = fit_rate(traj, "power", 0.5)
    return [Check("tail-half log-log slope in [-1.1, -0.9]", -1.1 <= fit.slope <= -0.9,
                  f"slope {fit.slope:.4f}, R^2 {fit.r_squared:.6f}, t in {fit.window}")]


def random_instance(rng, K_range, d_range, integer=None, max_tries=1000):
    """Draw a valid instance; integer=(lo, hi) draws integer entries."""
    for _ in range(max_tries):
        K = int(rng.integers(K_range[0], K_range[1] + 1))
        d = int(rng.integers(d_range[0], min(d_range[1], K - 1) + 1))
        if integer:
            lo, hi = integer
            X = rng.integers(lo, hi + 1, size=(K, d)).astype(float)
            r = rng.integers(lo, hi + 1, size=K).astype(float)
        else:
            X = rng.standard_normal((K, d))
            r = rng.uniform(-5, 5, size=K)
        try:
            return BanditInstance(X, r)
        except InstanceError:
            continue
    raise RuntimeError("could not draw a valid instance")


def fact_monotone_ascent(get, n_instances=20, steps=10**4, seed=2024):
    rng = np.random.default_rng(seed)
    worst_drop = 0.0
    worst_slack = math.inf
    for _ in range(n_instances):
        inst = random_instance(rng, (3, 6), (1, 3))
        eta = 0.9 * safe_step_size(inst)
        beta = smoothness_beta(inst)
        theta1 = rng.standard_normal(inst.d)
        traj = run(inst, RunConfig("pg", eta, theta1, steps, record_stride=1))
        improvement = traj.gap[:-1] - traj.gap[1:]
        bound = eta * (1 - eta * beta / 2) * traj.grad_norm[:-1] ** 2
        worst_drop = min(worst_drop, float(improvement.min()))
        worst_slack = min(worst_slack, float((improvement - bound).min()))
    return [
        Check("value never decreases (tol 1e-12)", worst_drop >= -1e-12, f"worst change {worst_drop:.3e}"),
        Check("improvement >= eta(1 - eta beta/2)|g|^2 - 1e-10", worst_slack >= -1e-10,
              f"min slack {worst_slack:.3e}"),
    ]


def _random_policy(rng, K):
    return softmax(rng.standard_normal(K) * rng.uniform(0.1, 5))


def order_preserving_transform(rng, r):
    """Random vector ordered exactly like r (ties kept as ties)."""
    levels = np.unique(r)
    new = np.sort(rng.uniform(-10, 10, size=levels.size))
    while np.any(np.diff(new) <= 0):
        new = np.sort(rng.uniform(-10, 10, size=levels.size))
    return new[np.searchsorted(levels, r)]


def central_difference_gradient(inst, theta, h=1e-6):
    g = np.empty(inst.d)
    for k in range(inst.d):
        e = np.zeros(inst.d)
        e[k] = h
        up = expected_reward(inst, policy_of(inst, theta + e))
        down = expected_reward(inst, policy_of(inst, theta - e))
        g[k] = (up - down) / (2 * h)
    return g


def fact_identities(get, seed=7):
    rng = np.random.default_rng(seed)
    worst_id = 0.0
    for _ in range(500):
        K = int(rng.integers(2, 9))
        pi = _random_policy(rng, K)
        x, y = rng.standard_normal(K), rng.standard_normal(K)
        worst_id = max(worst_id, abs(covariance(pi, x, y) - covariance_pairwise(pi, x, y)))
    worst_cov = math.inf
    for _ in range(500):
        K = int(rng.integers(2, 9))
        r = rng.integers(-3, 4, size=K).astype(float)
        r_prime = order_preserving_transform(rng, r)
        worst_cov = min(worst_cov, covariance(_random_policy(rng, K), r_prime, r))
    worst_rel = 0.0
    for _ in range(100):
        inst = random_instance(rng, (3, 8), (1, 4))
        theta = rng.standard_normal(inst.d)
        g = pg_gradient(inst, theta)
        fd = central_difference_gradient(inst, theta)
        worst_rel = max(worst_rel, float(np.linalg.norm(g - fd) / np.linalg.norm(g)))
    return [
        Check("covariance == pairwise form to 1e-12 (500 draws)", worst_id <= 1e-12, f"max diff {worst_id:.2e}"),
        Check("cov_pi(r', r) >= -1e-12 for order-preserving r' (500 draws)", worst_cov >= -1e-12,
              f"min {worst_cov:.3e}"),
        Check("PG gradient vs central differences rel err < 1e-6 (100 points)", worst_rel < 1e-6,
              f"max rel err {worst_rel:.2e}"),
    ]


def angular_oracle(inst, n_dirs=10**5):
    """Best order margin over unit-box directions for d = 2.

    Returns ``(feasible, margin)`` with ``margin`` the best min-over-pairs
    score difference among sampled directions w = (cos phi, sin phi)/||.||_inf.
    Tied rewards pin w to the null directions of their difference vectors,
    which are added to the candidate set exactly.
    """
    X, r = inst.X, inst.r
    K = inst.K
    strict = np.array([X[i] - X[j] for i in range(K) for j in range(K) if r[i] > r[j]])
    tied = [X[i] - X[j] for i in range(K) for j in range(i + 1, K) if r[i] == r[j]]
    tied = [D for D in tied if np.any(D != 0)]
    if tied:
        D = tied[0]
        cand = np.array([[-D[1], D[0]], [D[1], -D[0]]], dtype=float)
        ok = np.all([np.abs(cand @ T) <= 1e-12 for T in tied], axis=0)
        cand = cand[ok]
        if cand.size == 0:
            return False, 0.0
    else:
        phi = np.linspace(0, 2 * np.pi, n_dirs, endpoint=False)
        cand = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    cand = cand / np.abs(cand).max(axis=1, keepdims=True)
    margins = (cand @ strict.T).min(axis=1)
    best = float(margins.max())
    return best > 0, best


def fact_lp_oracle(get, n_instances=200, seed=11):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    disagreements = skipped = feasible = 0
    bad_witness = 0
    for _ in range(n_instances):
        inst = random_instance(rng, (3, 5), (2, 2), integer=(-3, 3))
        res = check_order_preservation(inst)
        ok, margin = angular_oracle(inst)
        if res.feasible:
            feasible += 1
            if not preserves_order(inst.r, inst.X @ res.witness, margin=res.margin - 1e-9):
                bad_witness += 1
        if abs(margin) < 1e-6:
            skipped += 1
        elif ok != res.feasible:
            disagreements += 1
    secs = time.perf_counter() - t0
    return [
        Check("LP agrees with angular oracle", disagreements == 0,
              f"{disagreements} disagreements, {skipped} near-degenerate skipped, {feasible} feasible"),
        Check("every witness preserves all pairwise orders", bad_witness == 0, f"{bad_witness} bad witnesses"),
        Check(f"runtime < {LP_ORACLE_SECONDS:g} s", secs < LP_ORACLE_SECONDS, f"{secs:.2f} s"),
    ]


def fact_witness_monotone(get):
    ni = get("example1")
    res = check_order_preservation(ni.instance)
    if not res.feasible:
        return [Check("example1 has an order-preserving witness", False, "LP infeasible")]
    traj = _run(ni, "pg", 10**5, record_stride=1)
    proj = traj.theta @ res.witness
    worst = float(np.diff(proj).min())
    return [Check("w^T theta_t nondecreasing over 1e5 PG steps", worst >= -1e-12,
                  f"w = {np.round(res.witness, 6).tolist()}, worst step {worst:.3e}")]


def _action(a):
    return None if a is None else a + 1


FACTS = [
    Fact("C1", "approximation errors of examples 1-3", fact_approximation_errors),
    Fact("C2", "least-squares projections", fact_projections),
    Fact("C3", "condition matrix", fact_condition_matrix),
    Fact("C4", "NPG global convergence on example 1", fact_npg_example1),
    Fact("C5", "NPG failure cases (examples 3, 4)", fact_npg_failures),
    Fact("C6", "PG global convergence (examples 1, 3, 5)", fact_pg_global, slow=True),
    Fact("C7", "PG failure case (example 2)", fact_pg_failure, slow=True),
    Fact("C8", "region invariant on the prop2 counterexample", fact_prop2_region, slow=True),
    Fact("C9", "PG power-law rate on example 1", fact_pg_power_rate, slow=True),
    Fact("C10", "monotone ascent below the safe step size", fact_monotone_ascent),
    Fact("C11", "covariance identities and gradient check", fact_identities),
    Fact("C12", "LP versus angular-grid oracle", fact_lp_oracle),
    Fact("C13", "witness direction monotonicity", fact_witness_monotone),
]


def fact_by_key(key):
    for f in FACTS:
        if f.key == key:
            return f
    raise KeyError(key)


def evaluate(fact, get=instances.builtin):
    t0 = time.perf_counter()
    result = FactResult(fact)
    try:
        result.checks = fact.func(get)
    except Exception as exc:  # a crashing fact is a failed fact
        result.error = f"{type(exc).__name__}: {exc}"
    result.seconds = time.perf_counter() - t0
    return result


def thread_cap():
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_suite(fast=False, get=instances.builtin, threads=None):
    facts = [f for f in FACTS if not (fast and f.slow)]
    threads = min(threads or thread_cap(), len(facts))
    if threads <= 1:
        return [evaluate(f, get) for f in facts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda f: evaluate(f, get), facts))


def format_result(res):
    mark = "PASS" if res.passed else "FAIL"
    lines = [f"{mark} {res.fact.key:<4} {res.fact.title} ({res.seconds:.2f} s)"]
    if res.error:
        lines.append(f"     error: {res.error}")
    for c in res.checks:
        lines.append(f"     [{'ok' if c.passed else 'XX'}] {c.label}: {c.detail}")
    return "\n".join(lines)
