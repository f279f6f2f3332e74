"""End-to-end acceptance checks, one test per numbered criterion.

Every test records a one-line verdict (see ``acceptance_log``) before asserting,
so the terminal summary lists all nine criteria even when some fail. The
regret runs take several minutes each on a single core.
"""

import math
from pathlib import Path

import numpy as np
import pytest

import oracles
from acceptance_log import record_criterion
from robust_ucb.bounds import BoundInput, expected_pulls_bound, prop1_free_bound, prop1_gap_bound, thm_catoni_bound
from robust_ucb.bounds import thm_mom_bound, thm_truncated_bound
from robust_ucb.distributions import (
    BanditInstance,
    Gaussian,
    Pareto,
    Shifted,
    StudentT,
    lemma1_tightness_instance,
    lower_bound_pair,
    moments,
)
from robust_ucb.estimators import (
    EstimatorKind,
    EstimatorSpec,
    MomentParams,
    catoni_alpha,
    catoni_mean,
    catoni_tolerance,
    empirical_mean,
    median_of_means,
    truncated_mean,
)
from robust_ucb.harness.concentration import run_concentration
from robust_ucb.harness.config import ExperimentConfig, PolicyConfig, load_config
from robust_ucb.harness.io import trace_to_csv
from robust_ucb.harness.runner import run_experiment, run_repetition
from robust_ucb.policies import ModifiedRobustUCB, RobustUCB

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parent.parent / "scripts" / "configs"
REGRET_POLICIES = ("truncated", "mom", "catoni")
SEED = 1729


def spec(kind, eps=1.0, **bounds):
    return EstimatorSpec.build(kind, MomentParams(eps, **bounds))


# --- criterion 1: concentration suite ------------------------------------------------


def concentration_cases():
    nu1, nu2 = lower_bound_pair(0.2, 1.0)
    pareto = Pareto(2.2)
    centered = Shifted(Pareto(2.5), -Pareto(2.5).mean())
    central = lambda d: moments(d, 1.0).central
    return [
        ("truncated", "two-point best", nu1, spec(EstimatorKind.TRUNCATED, raw_bound_u=1.0)),
        ("truncated", "two-point worse", nu2, spec(EstimatorKind.TRUNCATED, raw_bound_u=1.0)),
        ("truncated", "pareto(2.2)", pareto, spec(EstimatorKind.TRUNCATED, raw_bound_u=moments(pareto, 1.0).raw)),
        ("mom", "pareto(2.2)", pareto, spec(EstimatorKind.MEDIAN_OF_MEANS, central_bound_v=central(pareto))),
        ("mom", "pareto(2.2)+100", Shifted(pareto, 100.0), spec(EstimatorKind.MEDIAN_OF_MEANS, central_bound_v=central(pareto))),
        ("mom", "gaussian(0,1)", Gaussian(0.0, 1.0), spec(EstimatorKind.MEDIAN_OF_MEANS, central_bound_v=1.0)),
        ("catoni", "gaussian(0,1)", Gaussian(0.0, 1.0), spec(EstimatorKind.CATONI, central_bound_v=1.0)),
        ("catoni", "centered pareto(2.5)", centered, spec(EstimatorKind.CATONI, central_bound_v=central(centered))),
    ]


def test_criterion_1_concentration_suite():
    trials = 10_000
    failures, worst = [], 0.0
    for c, (est, label, dist, s) in enumerate(concentration_cases()):
        for n in (50, 500, 5000):
            for d_i, delta in enumerate((0.1, 0.01)):
                report = run_concentration(s, dist, n, trials, seed=SEED + 1000 * c + 10 * n + d_i, delta=delta)
                limit = delta + 3.0 * math.sqrt(delta * (1.0 - delta) / trials)
                worst = max(worst, report.upper_rate / limit, report.lower_rate / limit)
                if report.upper_rate > limit or report.lower_rate > limit:
                    failures.append(f"{est}/{label}/n={n}/delta={delta}: {report.upper_rate}, {report.lower_rate}")
    detail = f"48 configurations, worst rate/limit = {worst:.3f}" + (f"; failing: {failures}" if failures else "")
    assert record_criterion(1, not failures, detail), detail


# --- criterion 2: polynomial tail of the empirical mean -------------------------------


def test_criterion_2_empirical_mean_tail():
    n, eta, trials = 100, 0.2, 100_000
    dist = lemma1_tightness_instance(n, eta, 1.0)
    report = run_concentration(spec(EstimatorKind.EMPIRICAL, central_bound_v=1.0), dist, n, trials, seed=SEED, eta=eta)
    p = report.upper_rate
    se = math.sqrt(p * (1.0 - p) / trials)
    lower, upper = 1.0 / (n * (2 * eta) ** 2), 3.0 / (n * eta**2)
    ok = lower - 3 * se <= p <= upper
    detail = f"measured {p:.6f}, window [{lower:.4f} - 3*{se:.6f} = {lower - 3 * se:.6f}, {upper:.2f}]"
    assert record_criterion(2, ok, detail), detail


def test_tail_probability_matches_exact_binomial():
    # the estimate exceeds mu + eta exactly when the heavy atom appears at least once
    n, eta, trials = 100, 0.2, 100_000
    dist = lemma1_tightness_instance(n, eta, 1.0)
    report = run_concentration(spec(EstimatorKind.EMPIRICAL, central_bound_v=1.0), dist, n, trials, seed=SEED, eta=eta)
    exact = 1.0 - (1.0 - dist.p_hi) ** n
    assert abs(report.upper_rate - exact) <= 3.0 * math.sqrt(exact * (1.0 - exact) / trials)


# --- criteria 3, 4, 8: regret on the two-arm lower-bound instance ---------------------


@pytest.fixture(scope="module")
def regret_runs():
    runs = {}
    for name in REGRET_POLICIES:
        config = load_config(CONFIGS / f"lower_bound_{name}.json")
        runs[name] = (config, run_experiment(config, workers=1))
    return runs


def regret_bound(name, config, t):
    gaps = config.instance.gaps
    est = config.policy.estimator
    if name == "truncated":
        return thm_truncated_bound(BoundInput(n=t, gaps=gaps, u=est.params.raw_bound_u))
    if name == "mom":
        return thm_mom_bound(BoundInput(n=t, gaps=gaps, v=est.params.central_bound_v))
    return thm_catoni_bound(BoundInput(n=t, gaps=gaps, v=est.params.central_bound_v))


def test_criterion_3_regret_upper_bounds(regret_runs):
    parts, ok = [], True
    for name, (config, trace) in regret_runs.items():
        est = config.policy.estimator
        for arm in config.instance.arms:
            m = moments(arm, 1.0)
            assert m.raw <= 1.0 + 1e-12 and m.central <= 1.0 + 1e-12
        bounds = np.array([regret_bound(name, config, t) for t in trace.checkpoints])
        regret_ok = bool(np.all(trace.regret_mean <= bounds))
        pulls_cap = expected_pulls_bound(config.instance.gaps[1], est.c_policy, est.v_policy, est.epsilon, config.horizon)
        pulls = trace.pulls_mean[-1][1]
        pulls_ok = pulls <= pulls_cap + 3.0 * trace.pulls_stderr(1)
        ok &= regret_ok and pulls_ok
        parts.append(
            f"{name}: regret {trace.regret_mean[-1]:.1f} <= {bounds[-1]:.1f} "
            f"(max ratio {np.max(trace.regret_mean / bounds):.3f}), T_2 {pulls:.1f} <= {pulls_cap:.1f}"
        )
    detail = "; ".join(parts)
    assert record_criterion(3, ok, detail), detail


def relative_spread(trace, horizon):
    """(max - min) / mean of regret / log t over checkpoints in [horizon/10, horizon]."""
    t = np.array(trace.checkpoints, dtype=float)
    mask = t >= horizon / 10.0
    ratio = trace.regret_mean[mask] / np.log(t[mask])
    return float((ratio.max() - ratio.min()) / ratio.mean())


def test_criterion_4_logarithmic_growth(regret_runs):
    spreads = {name: relative_spread(trace, config.horizon) for name, (config, trace) in regret_runs.items()}
    ok = all(s < 0.25 for s in spreads.values())
    detail = "relative spread of regret/log n over the last decade: " + ", ".join(
        f"{k} {v:.3f}" for k, v in spreads.items()
    ) + " (threshold 0.25)"
    assert record_criterion(4, ok, detail), detail


def test_criterion_8_worker_determinism(regret_runs):
    mismatched = []
    for name, (config, trace) in regret_runs.items():
        parallel = run_experiment(config, workers=8)
        if trace_to_csv(parallel) != trace_to_csv(trace):
            mismatched.append(name)
    detail = "1 vs 8 workers, CSV bytes identical for " + ", ".join(n for n in REGRET_POLICIES if n not in mismatched)
    if mismatched:
        detail += f"; differing: {mismatched}"
    assert record_criterion(8, not mismatched, detail), detail


# --- criterion 5: distribution-free bound --------------------------------------------


def test_criterion_5_distribution_free_bound():
    config = load_config(CONFIGS / "distribution_free_mom.json")
    k, n, eps = config.instance.n_arms, config.horizon, 1.0
    assert k == 5 and n == 10_000 and config.repetitions == 100
    gap = config.instance.gaps[1]
    assert gap == pytest.approx((k / n) ** (eps / (1 + eps)), rel=1e-15) and gap < 0.25
    est = config.policy.estimator
    trace = run_experiment(config)
    bound = prop1_free_bound(BoundInput(n=n, gaps=config.instance.gaps, c=est.c_policy, v=est.v_policy, K=k, epsilon=eps))
    regret = trace.regret_mean[-1]
    ok = regret <= bound
    detail = f"mean regret {regret:.1f} <= distribution-free bound {bound:.1f}"
    assert record_criterion(5, ok, detail), detail


# --- criterion 6: shift coupling ------------------------------------------------------


def random_instance(rng):
    arms = []
    for _ in range(int(rng.integers(2, 5))):
        law = rng.integers(3)
        if law == 0:
            arms.append(Gaussian(float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2.0))))
        elif law == 1:
            shape = float(rng.uniform(2.1, 4.0))
            arms.append(Shifted(Pareto(shape), float(rng.uniform(-3, 0))))
        else:
            arms.append(Shifted(StudentT(float(rng.uniform(2.1, 5.0))), float(rng.uniform(-1, 1))))
    return BanditInstance(tuple(arms))


def arm_sequence(policy, instance, seed, horizon):
    config = ExperimentConfig(instance, policy, horizon=horizon, repetitions=1, master_seed=seed, record_arms=True)
    return run_repetition(config, 0).arms


def test_criterion_6_shift_coupling():
    rng = np.random.default_rng(SEED)
    shift, horizon = 1e6, 300
    policies = {
        "mom": PolicyConfig("robust_ucb", estimator=spec(EstimatorKind.MEDIAN_OF_MEANS, central_bound_v=4.0)),
        "catoni": PolicyConfig("modified_robust_ucb", estimator=spec(EstimatorKind.CATONI, central_bound_v=4.0)),
    }
    truncated = PolicyConfig("robust_ucb", estimator=spec(EstimatorKind.TRUNCATED, raw_bound_u=4.0))
    broken = {name: 0 for name in policies}
    witnesses = 0
    for _ in range(100):
        instance, seed = random_instance(rng), int(rng.integers(2**32))
        moved = instance.shifted(shift)
        for name, policy in policies.items():
            if not np.array_equal(arm_sequence(policy, instance, seed, horizon), arm_sequence(policy, moved, seed, horizon)):
                broken[name] += 1
        if witnesses == 0 and not np.array_equal(
            arm_sequence(truncated, instance, seed, horizon), arm_sequence(truncated, moved, seed, horizon)
        ):
            witnesses += 1
    ok = not any(broken.values()) and witnesses > 0
    detail = f"100 pairs, differing sequences: mom {broken['mom']}, catoni {broken['catoni']}; truncated witness found: {witnesses > 0}"
    assert record_criterion(6, ok, detail), detail


# --- criterion 7: oracle equivalence -------------------------------------------------


def random_policy(rng, k, use_cache):
    which = int(rng.integers(4))
    if which == 3:
        return ModifiedRobustUCB(float(rng.uniform(0.5, 3)), k, use_cache=use_cache), "catoni"
    kinds = [
        spec(EstimatorKind.TRUNCATED, eps=float(rng.uniform(0.2, 1.0)), raw_bound_u=float(rng.uniform(0.5, 3))),
        spec(EstimatorKind.MEDIAN_OF_MEANS, eps=float(rng.uniform(0.2, 1.0)), central_bound_v=float(rng.uniform(0.5, 3))),
        spec(EstimatorKind.EMPIRICAL, eps=float(rng.uniform(0.2, 1.0)), central_bound_v=float(rng.uniform(0.5, 3))),
    ]
    return RobustUCB(kinds[which], k, use_cache=use_cache), kinds[which].kind.value


def check_states(count):
    mismatches = 0
    for i in range(count):
        rng = np.random.default_rng([SEED, i])
        k = int(rng.integers(1, 5))
        cached, _ = random_policy(np.random.default_rng([SEED, i, 0]), k, True)
        plain, _ = random_policy(np.random.default_rng([SEED, i, 0]), k, False)
        counts = rng.integers(0, 31, size=k)
        scale = 10.0 ** rng.uniform(-3, 3)
        order = np.repeat(np.arange(k), counts)
        rng.shuffle(order)
        for step, arm in enumerate(order):
            r = float(rng.standard_t(2.5) * scale)
            cached.update(int(arm), r)
            plain.update(int(arm), r)
            if step % 7 == 0 and cached.select_arm() != plain.select_arm():
                mismatches += 1
        for t in (cached.t + 1, cached.t + int(rng.integers(1, 1000))):
            if cached.select_arm(t) != plain.select_arm(t):
                mismatches += 1
            if any(cached.index(a, t) != plain.index(a, t) for a in range(k)):
                mismatches += 1
    return mismatches


def check_estimators(count):
    worst = {"empirical": 0.0, "truncated": 0.0, "median_of_means": 0.0, "catoni_residual": 0.0}
    for i in range(count):
        rng = np.random.default_rng([SEED, 7, i])
        n = int(rng.integers(1, 13))
        x = rng.standard_t(2.5, size=n) * 10.0 ** rng.uniform(-2, 2) + rng.normal()
        xs = x.tolist()
        delta = float(rng.uniform(0.01, 0.9))
        eps = float(rng.uniform(0.1, 1.0))
        u = float(rng.uniform(0.1, 10.0))
        scale = max(1.0, float(np.max(np.abs(x))))
        worst["empirical"] = max(worst["empirical"], abs(empirical_mean(x) - oracles.empirical(xs)) / scale)
        got = truncated_mean(x, delta, MomentParams(eps, raw_bound_u=u))
        worst["truncated"] = max(worst["truncated"], abs(got - oracles.truncated(xs, delta, u, eps)) / scale)
        worst["median_of_means"] = max(
            worst["median_of_means"], abs(median_of_means(x, delta) - oracles.median_of_means(xs, delta)) / scale
        )
        log_inv = math.log(1 / delta)
        if n > 2 * log_inv:
            v = float(rng.uniform(0.1, 10.0))
            params = MomentParams(1.0, central_bound_v=v)
            m = catoni_mean(x, delta, params)
            a = oracles.catoni_alpha(n, delta, v)
            assert a == pytest.approx(catoni_alpha(n, delta, v), rel=1e-14)
            residual = abs(sum(oracles.psi(a * (xi - m)) for xi in xs))
            tolerance = 1e-9 * n * max(1.0, a * (max(xs) - min(xs)))
            assert tolerance == pytest.approx(catoni_tolerance(n, a, max(xs) - min(xs)), rel=1e-12)
            worst["catoni_residual"] = max(worst["catoni_residual"], residual / tolerance)
    return worst


def test_criterion_7_oracle_equivalence():
    mismatches = check_states(1000)
    worst = check_estimators(1000)
    ok = (
        mismatches == 0
        and worst["empirical"] <= 1e-12
        and worst["truncated"] <= 1e-12
        and worst["median_of_means"] <= 1e-12
        and worst["catoni_residual"] <= 1.0
    )
    detail = f"cache/no-cache mismatches {mismatches} over 1000 states; worst scaled estimator errors " + ", ".join(
        f"{k} {v:.2e}" for k, v in worst.items()
    )
    assert record_criterion(7, ok, detail), detail


# --- criterion 9: bound identities ---------------------------------------------------


def test_criterion_9_bound_identities():
    rng = np.random.default_rng(SEED)
    worst_trunc = worst_mom = 0.0
    for _ in range(100):
        eps = float(rng.uniform(0.05, 1.0))
        m = float(10.0 ** rng.uniform(-2, 2))
        n = float(10.0 ** rng.uniform(0.5, 7))
        gaps = (0.0,) + tuple(float(g) for g in 10.0 ** rng.uniform(-3, 0.5, size=int(rng.integers(1, 6))))
        thm = thm_truncated_bound(BoundInput(n=n, gaps=gaps, u=m, epsilon=eps))
        gen = prop1_gap_bound(BoundInput(n=n, gaps=gaps, c=4 ** ((1 + eps) / eps), v=m, epsilon=eps))
        worst_trunc = max(worst_trunc, abs(thm - gen) / gen)
        thm = thm_mom_bound(BoundInput(n=n, gaps=gaps, v=m, epsilon=eps))
        gen = prop1_gap_bound(BoundInput(n=n, gaps=gaps, c=16.0, v=12.0 * m, epsilon=eps))
        worst_mom = max(worst_mom, abs(thm - gen) / gen)
    ok = worst_trunc <= 1e-12 and worst_mom <= 1e-12
    detail = f"100-point grid, worst relative difference truncated {worst_trunc:.1e}, median-of-means {worst_mom:.1e}"
    assert record_criterion(9, ok, detail), detail


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
