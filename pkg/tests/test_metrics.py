import dataclasses
import math

import numpy as np
import pytest

from mfgil.envs import build_env
from mfgil.metrics import (CSV_FIELDS, LipschitzEstimates, MetricsRecord,
                           estimate_lipschitz, lemma_checks, proxy_mc,
                           read_metrics_csv, relative_exploitability,
                           reward_vs_expert, theorem_bounds,
                           write_metrics_csv)
from mfgil.policies import UniformPolicy, random_tabular


def _est(l_r=0.5, l_p=0.5, l_e=0.5, r_max=1.0):
    return LipschitzEstimates(l_r=l_r, l_p=l_p, l_e=l_e, r_max=r_max,
                              r_max_flow=r_max)


def test_theorem_bounds_hand_values():
    # delta_bc = 0.1, r_max = 1, H = 2, L_r = L_P = L_E = 0.5:
    # B3 = 4 * 0.1 * 1 = 0.4
    # B1 = 0.1 * [1*4 + 2*(1+1)^2/1^2 * (0.5 + 1*1.5)] = 0.1 * 20 = 2.0
    b = theorem_bounds(0.1, 0.0, _est(), horizon=2)
    assert abs(b.b3 - 0.4) < 1e-12
    assert abs(b.b1 - 2.0) < 1e-12


def test_theorem_bounds_b2_b4_hand_values():
    # delta_adv = 0.1, same constants, H = 2:
    # B2 = 0.1 * [2*(1 + 1.5 + 1) + 3*1*4*1] = 0.1 * 19 = 1.9
    # B4 = 1 * 0.1 * [2*1.5 + 4*1] = 0.7
    b = theorem_bounds(0.0, 0.1, _est(), horizon=2)
    assert abs(b.b2 - 1.9) < 1e-12
    assert abs(b.b4 - 0.7) < 1e-12


def test_theorem_bounds_zero_deltas():
    b = theorem_bounds(0.0, 0.0, _est(), horizon=10)
    assert b.b1 == b.b2 == b.b3 == b.b4 == 0.0
    assert not b.degenerate_lipschitz and not b.overflow


def test_theorem_bounds_degenerate_lipschitz():
    est = _est(l_p=0.0, l_e=0.0)
    b = theorem_bounds(0.1, 0.1, est, horizon=5)
    assert b.degenerate_lipschitz
    assert math.isinf(b.b1)
    # the other bounds remain finite
    assert math.isfinite(b.b2) and math.isfinite(b.b3) and math.isfinite(b.b4)
    b0 = theorem_bounds(0.0, 0.0, est, horizon=5)
    assert b0.b1 == 0.0


def test_theorem_bounds_overflow_saturates():
    b = theorem_bounds(0.1, 0.0, _est(l_p=5.0, l_e=5.0), horizon=400)
    assert b.overflow
    assert math.isinf(b.b1)


def test_theorem_bounds_rejects_negative_inputs():
    with pytest.raises(ValueError):
        theorem_bounds(-0.1, 0.0, _est(), horizon=2)


def test_theorem_bounds_monotone_in_deltas():
    lo = theorem_bounds(0.1, 0.1, _est(), horizon=5)
    hi = theorem_bounds(0.2, 0.3, _est(), horizon=5)
    assert hi.b1 > lo.b1 and hi.b2 > lo.b2
    assert hi.b3 > lo.b3 and hi.b4 > lo.b4


def test_lipschitz_estimates_reject_negative():
    with pytest.raises(ValueError):
        LipschitzEstimates(l_r=-1.0, l_p=0.0, l_e=0.0, r_max=1.0,
                           r_max_flow=1.0)


def test_proxy_identity_exact_zero(rng):
    model = build_env("two_state", horizon=6)
    pol = random_tabular(6, 2, 2, rng)
    prx = proxy_mc(pol, pol, model, 20, rng)
    assert np.all(prx.delta_bc_t == 0.0)
    assert np.all(prx.delta_adv_t == 0.0)
    assert prx.delta_bc == 0.0 and prx.delta_adv == 0.0


def test_proxy_summary_is_max_of_per_step(rng):
    model = build_env("two_state", horizon=6)
    a = random_tabular(6, 2, 2, rng)
    b = random_tabular(6, 2, 2, rng)
    prx = proxy_mc(a, b, model, 50, rng)
    assert prx.delta_bc == prx.delta_bc_t.max()
    assert prx.delta_adv == prx.delta_adv_t.max()
    assert prx.delta_bc > 0 and prx.delta_adv > 0


def test_lemma_checks_pass_for_random_imitator(rng):
    model = build_env("two_state", horizon=6)
    expert = random_tabular(6, 2, 2, rng)
    agent = random_tabular(6, 2, 2, rng)
    checks = lemma_checks(expert, agent, model, 200, rng)
    names = {c.name for c in checks}
    assert names == {"flow_gap_vs_h2_bc", "state_action_gap_vs_h2_bc",
                     "marginal_le_joint_pathwise"}
    for c in checks:
        assert c.passed, f"{c.name}: lhs={c.lhs} rhs={c.rhs}"


def test_lemma_checks_identical_policies_are_tight_zero(rng):
    model = build_env("two_state", horizon=6)
    pol = random_tabular(6, 2, 2, rng)
    for c in lemma_checks(pol, pol, model, 50, rng):
        assert c.passed
        assert abs(c.lhs) < 1e-12


def test_estimate_lipschitz_analytic_substitutions(rng):
    two = build_env("two_state", horizon=5)
    est = estimate_lipschitz(two, random_tabular(5, 2, 2, rng), 200, rng)
    assert est.l_r == 1.0 and est.methods["l_r"] == "analytic"
    assert est.l_p > 0 and est.methods["l_p"] == "sampled"
    bar = build_env("beach_bar", x_half=1, horizon=5)
    est2 = estimate_lipschitz(
        bar, UniformPolicy(bar.n_states, bar.n_actions), 200, rng)
    assert est2.l_p == 0.0 and est2.methods["l_p"] == "analytic"
    assert est2.r_max_flow <= est2.r_max + 1e-12
    with pytest.raises(ValueError):
        estimate_lipschitz(two, random_tabular(5, 2, 2, rng), 0, rng)


def test_reward_vs_expert_degenerate_flag(rng):
    model = build_env("two_state", horizon=4)
    zero_reward = dataclasses.replace(
        model, reward_matrices=lambda rhos: np.zeros(
            (np.asarray(rhos).shape[0], 2, 2)))
    out = reward_vs_expert(UniformPolicy(2, 2), random_tabular(4, 2, 2, rng),
                           zero_reward, 10, rng)
    assert out["degenerate"]
    assert out["rel_reward"] is None


def test_relative_exploitability_degenerate_and_normal(rng):
    model = build_env("two_state", horizon=4)
    uni = UniformPolicy(2, 2)
    out = relative_exploitability(uni, uni, model, lambda p: p, 10, rng)
    assert out["rel_exploitability"] == 0.0
    zero_reward = dataclasses.replace(
        model, reward_matrices=lambda rhos: np.zeros(
            (np.asarray(rhos).shape[0], 2, 2)))
    out2 = relative_exploitability(uni, uni, zero_reward, lambda p: p, 10, rng)
    assert out2["degenerate"]
    assert out2["rel_exploitability"] is None


def _record(**over):
    base = dict(env="two_state", policy_id="vanilla", seed=3, n_paths=10,
                n_mc=10, delta_bc=0.5, se_bc=0.01, delta_adv=0.7, se_adv=0.02,
                delta_bc_t=[0.1, 0.5], delta_adv_t=[0.7, 0.2],
                v_expert=-1.5, se_v_expert=0.1, v_agent_vs_expert=-1.6,
                se_v_agent=0.1, rel_reward=-0.066, exploitability=0.2,
                se_exploitability=0.03, rel_exploitability=0.13,
                degenerate_value=False)
    base.update(over)
    return MetricsRecord(**base)


def test_metrics_record_validates_summary_consistency():
    _record()
    with pytest.raises(ValueError):
        _record(delta_bc=0.9)


def test_metrics_csv_round_trip(tmp_path):
    recs = [_record(), _record(policy_id="adaptive", rel_reward=None,
                              rel_exploitability=None, degenerate_value=True)]
    path = tmp_path / "metrics.csv"
    write_metrics_csv(path, recs)
    rows = read_metrics_csv(path)
    assert len(rows) == 2
    assert rows[0]["policy_id"] == "vanilla"
    assert float(rows[0]["delta_bc"]) == 0.5
    assert rows[1]["rel_reward"] == ""  # None maps to empty cell
    assert rows[1]["degenerate_value"] == "1"
    assert set(rows[0]) == set(CSV_FIELDS)


def test_metrics_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_metrics_csv(path)
