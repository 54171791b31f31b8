"""Evaluation: BC/ADV proxies, value comparisons, theorem bound
evaluators, lemma checks, and Lipschitz-constant estimation."""

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .flows import deviation_flow_batch, exploitability, path_values, population_flow_batch

DEGENERATE_VALUE_TOL = 1e-9

#: sentinel reported when a bound's formula degenerates or overflows
INF_SENTINEL = math.inf


@dataclass
class ProxyResult:
    """Monte-Carlo BC/ADV proxies over shared noise paths."""

    delta_bc_t: np.ndarray   # (H,) per-step means
    delta_adv_t: np.ndarray  # (H,)
    se_bc_t: np.ndarray
    se_adv_t: np.ndarray
    delta_bc: float          # max over t
    delta_adv: float
    se_bc: float             # SE at the maximizing step
    se_adv: float
    n_paths: int


def proxy_mc(expert, agent, model, n_paths, rng):
    """BC and ADV divergence proxies along self-consistent flows.

    Both flows share the sampled noise paths: the BC term weights the
    action-law gap by the expert flow, and the ADV term compares the
    two state-action laws entrywise. With agent == expert both arrays
    are exactly zero.
    """
    noises = model.sample_noise_paths(rng, n_paths)
    rho_e = population_flow_batch(expert, noises, model)  # (N, H, X)
    rho_a = population_flow_batch(agent, noises, model)
    h = model.horizon
    bc = np.empty((n_paths, h))
    adv = np.empty((n_paths, h))
    for t in range(h):
        pi_e = expert.action_probs(t, rho_e[:, t])  # (N, X, A)
        pi_a_on_e = agent.action_probs(t, rho_e[:, t])
        bc[:, t] = (rho_e[:, t] * np.abs(pi_a_on_e - pi_e).sum(axis=2)).sum(axis=1)
        pi_a = agent.action_probs(t, rho_a[:, t])
        mu_a = rho_a[:, t][:, :, None] * pi_a
        mu_e = rho_e[:, t][:, :, None] * pi_e
        adv[:, t] = np.abs(mu_a - mu_e).sum(axis=(1, 2))
    def _se(block):
        if n_paths < 2:
            return np.zeros(h)
        return block.std(axis=0, ddof=1) / np.sqrt(n_paths)
    bc_t, adv_t = bc.mean(axis=0), adv.mean(axis=0)
    se_bc_t, se_adv_t = _se(bc), _se(adv)
    i_bc, i_adv = int(bc_t.argmax()), int(adv_t.argmax())
    return ProxyResult(delta_bc_t=bc_t, delta_adv_t=adv_t,
                       se_bc_t=se_bc_t, se_adv_t=se_adv_t,
                       delta_bc=float(bc_t[i_bc]), delta_adv=float(adv_t[i_adv]),
                       se_bc=float(se_bc_t[i_bc]), se_adv=float(se_adv_t[i_adv]),
                       n_paths=n_paths)


def reward_vs_expert(expert, agent, model, n_mc, rng):
    """V(agent, expert flow), V(expert, expert flow), and the relative gap.

    Shared noise paths reduce the variance of the difference. When
    |V(expert, expert)| is below tolerance the relative metric is
    undefined and reported as None.
    """
    noises = model.sample_noise_paths(rng, n_mc)
    v_a = path_values(agent, expert, model, noises)
    v_e = path_values(expert, expert, model, noises)
    va, ve = float(v_a.mean()), float(v_e.mean())
    se_a = float(v_a.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    se_e = float(v_e.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    rel = None if abs(ve) <= DEGENERATE_VALUE_TOL else (va - ve) / abs(ve)
    return {"v_agent": va, "v_expert": ve, "se_agent": se_a, "se_expert": se_e,
            "rel_reward": rel, "degenerate": rel is None}


def relative_exploitability(agent, expert, model, br_solver, n_mc, rng):
    """Exploitability of the agent normalized by |V(expert, expert)|."""
    expl = exploitability(agent, model, br_solver, n_mc, rng)
    v_e, _ = _value_mean(expert, model, n_mc, rng)
    if abs(v_e) <= DEGENERATE_VALUE_TOL:
        return {"exploitability": expl.value, "se": expl.se,
                "rel_exploitability": None, "degenerate": True}
    return {"exploitability": expl.value, "se": expl.se,
            "rel_exploitability": expl.value / abs(v_e), "degenerate": False}


def _value_mean(policy, model, n_mc, rng):
    noises = model.sample_noise_paths(rng, n_mc)
    vals = path_values(policy, policy, model, noises)
    se = float(vals.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    return float(vals.mean()), se


@dataclass
class LipschitzEstimates:
    l_r: float
    l_p: float
    l_e: float
    r_max: float
    r_max_flow: float  # restricted to realized flow fields
    methods: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("l_r", "l_p", "l_e", "r_max", "r_max_flow"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass
class TheoremBounds:
    b1: float
    b2: float
    b3: float
    b4: float
    degenerate_lipschitz: bool = False  # L_P + L_E = 0 invalidates B1
    overflow: bool = False


def theorem_bounds(delta_bc, delta_adv, est, horizon):
    """Evaluate the four performance-gap bounds.

    B1/B3 consume the BC proxy, B2/B4 the ADV proxy. B1's formula
    divides by (L_P + L_E)^2; when that sum is zero the bound is
    reported as the infinity sentinel with the degenerate flag set.
    Overflow of the exponential term saturates to the same sentinel.
    """
    if min(delta_bc, delta_adv, horizon) < 0:
        raise ValueError("bound inputs must be nonnegative")
    h = float(horizon)
    l_r, l_p, l_e, r_max = est.l_r, est.l_p, est.l_e, est.r_max
    lpe = l_p + l_e
    degenerate = lpe == 0.0
    overflow = False
    if degenerate:
        b1 = INF_SENTINEL if delta_bc > 0 else 0.0
    else:
        with np.errstate(over="ignore"):
            growth = float(np.float64(1.0 + lpe) ** h)
        if math.isinf(growth):
            overflow = True
            b1 = INF_SENTINEL if delta_bc > 0 else 0.0
        else:
            b1 = delta_bc * (r_max * h**2
                             + 2.0 * growth / lpe**2 * (l_r + r_max * (l_e + 1.0)))
    b2 = delta_adv * (h * (2.0 * l_r + 3.0 * l_e * r_max + r_max)
                      + 3.0 * r_max * h**2 * (l_e + l_p))
    b3 = h**2 * delta_bc * r_max
    b4 = r_max * delta_adv * (h * (l_e + 1.0) + h**2 * (l_p + l_e))
    return TheoremBounds(b1=b1, b2=b2, b3=b3, b4=b4,
                         degenerate_lipschitz=degenerate, overflow=overflow)


@dataclass
class LemmaCheck:
    name: str
    lhs: float
    rhs: float
    slack: float  # 3*SE allowance added to the RHS
    passed: bool


def lemma_checks(expert, agent, model, n_paths, rng):
    """Monte-Carlo checks of the appendix inequalities.

    Checked statements: E[sum_t ||rho^E_t - rho^{EA}_t||_1] <= H^2 dBC,
    the state-action counterpart with mu, and the pathwise
    ||rho^A_t - rho^E_t||_1 <= ||mu^A_t - mu^E_t||_1. rho^{EA} is the
    deviator's law when a single agent plays the imitator inside the
    expert population.
    """
    noises = model.sample_noise_paths(rng, n_paths)
    h = model.horizon
    rho_e, rho_ea = deviation_flow_batch(expert, agent, noises, model)
    rho_a = population_flow_batch(agent, noises, model)
    gap_rho = np.zeros(n_paths)   # sum_t ||rho^E - rho^EA||
    gap_mu = np.zeros(n_paths)    # sum_t ||mu^E - mu^EA||
    bc = np.zeros((n_paths, h))
    marg = np.empty((n_paths, h))   # ||rho^A - rho^E||
    joint = np.empty((n_paths, h))  # ||mu^A - mu^E||
    for t in range(h):
        pi_e = expert.action_probs(t, rho_e[:, t])
        pi_a_on_e = agent.action_probs(t, rho_e[:, t])
        pi_a = agent.action_probs(t, rho_a[:, t])
        gap_rho += np.abs(rho_e[:, t] - rho_ea[:, t]).sum(axis=1)
        mu_e = rho_e[:, t][:, :, None] * pi_e
        mu_ea = rho_ea[:, t][:, :, None] * pi_a_on_e
        mu_a = rho_a[:, t][:, :, None] * pi_a
        gap_mu += np.abs(mu_e - mu_ea).sum(axis=(1, 2))
        bc[:, t] = (rho_e[:, t] * np.abs(pi_a_on_e - pi_e).sum(axis=2)).sum(axis=1)
        marg[:, t] = np.abs(rho_a[:, t] - rho_e[:, t]).sum(axis=1)
        joint[:, t] = np.abs(mu_a - mu_e).sum(axis=(1, 2))
    delta_bc = float(bc.mean(axis=0).max())
    se_bc = (float(bc.std(axis=0, ddof=1).max() / np.sqrt(n_paths))
             if n_paths > 1 else 0.0)
    def _mc(vals):
        se = float(vals.std(ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else 0.0
        return float(vals.mean()), se
    checks = []
    for name, vals in (("flow_gap_vs_h2_bc", gap_rho),
                       ("state_action_gap_vs_h2_bc", gap_mu)):
        lhs, se = _mc(vals)
        rhs = h**2 * delta_bc
        slack = 3.0 * (se + h**2 * se_bc)
        checks.append(LemmaCheck(name=name, lhs=lhs, rhs=rhs, slack=slack,
                                 passed=lhs <= rhs + slack))
    # the marginalization inequality holds pathwise and stepwise, exactly
    worst = float((marg - joint).max())
    checks.append(LemmaCheck(name="marginal_le_joint_pathwise",
                             lhs=worst, rhs=0.0, slack=1e-12,
                             passed=worst <= 1e-12))
    return checks


def estimate_lipschitz(model, policy, n_probe, rng):
    """Sampled lower bounds of the constants in the performance bounds.

    Probes pair random simplex points with realized flow fields.
    Analytic values are substituted where the environment makes them
    exact: the two-state reward has L_r = 1 and the torus environments
    have mean-field-independent kernels (L_P = 0).
    """
    if n_probe < 1:
        raise ValueError("n_probe must be positive")
    x_dim = model.n_states
    flows = population_flow_batch(
        policy, model.sample_noise_paths(rng, max(2, n_probe // model.horizon + 1)),
        model)
    flow_fields = flows.reshape(-1, x_dim)
    random_fields = rng.dirichlet(np.ones(x_dim), size=n_probe)
    fields = np.concatenate([flow_fields, random_fields], axis=0)
    pairs = rng.integers(0, len(fields), size=(n_probe, 2))
    rho_a, rho_b = fields[pairs[:, 0]], fields[pairs[:, 1]]
    d_rho = np.abs(rho_a - rho_b).sum(axis=1)
    keep = d_rho > 1e-12  # coincident probes carry no slope information
    rho_a, rho_b, d_rho = rho_a[keep], rho_b[keep], d_rho[keep]

    methods = {}
    r_a = model.reward_matrices(rho_a)
    r_b = model.reward_matrices(rho_b)
    if model.name == "two_state":
        l_r = 1.0
        methods["l_r"] = "analytic"
    else:
        l_r = float((np.abs(r_a - r_b).max(axis=(1, 2)) / d_rho).max())
        methods["l_r"] = "sampled"

    if not model.rho_dependent_kernel:
        l_p = 0.0
        methods["l_p"] = "analytic"
    else:
        e0s = model.sample_noise_batch(rng, len(rho_a))
        p_a = model.transition_matrices(rho_a, e0s)
        p_b = model.transition_matrices(rho_b, e0s)
        l_p = float((np.abs(p_a - p_b).sum(axis=3).max(axis=(1, 2)) / d_rho).max())
        methods["l_p"] = "sampled"

    l_e = 0.0
    for t in range(model.horizon):
        pi_a = policy.action_probs(t, rho_a)
        pi_b = policy.action_probs(t, rho_b)
        l_e = max(l_e, float((np.abs(pi_a - pi_b).sum(axis=2).max(axis=1)
                              / d_rho).max()))
    methods["l_e"] = "sampled"

    r_all = model.reward_matrices(fields)
    r_flow = model.reward_matrices(flow_fields)
    methods["r_max"] = "sampled"
    return LipschitzEstimates(l_r=l_r, l_p=l_p, l_e=l_e,
                              r_max=float(np.abs(r_all).max()),
                              r_max_flow=float(np.abs(r_flow).max()),
                              methods=methods)


CSV_FIELDS = [
    "env", "policy_id", "seed", "n_paths", "n_mc",
    "delta_bc", "se_bc", "delta_adv", "se_adv",
    "v_expert", "se_v_expert", "v_agent_vs_expert", "se_v_agent",
    "rel_reward", "exploitability", "se_exploitability",
    "rel_exploitability", "degenerate_value",
]


@dataclass
class MetricsRecord:
    """One evaluated policy: the six headline metrics plus uncertainty."""

    env: str
    policy_id: str
    seed: int
    n_paths: int
    n_mc: int
    delta_bc: float
    se_bc: float
    delta_adv: float
    se_adv: float
    delta_bc_t: List[float]
    delta_adv_t: List[float]
    v_expert: float
    se_v_expert: float
    v_agent_vs_expert: float
    se_v_agent: float
    rel_reward: Optional[float]
    exploitability: float
    se_exploitability: float
    rel_exploitability: Optional[float]
    degenerate_value: bool = False

    def __post_init__(self):
        for arr, m in ((self.delta_bc_t, self.delta_bc),
                       (self.delta_adv_t, self.delta_adv)):
            if arr and abs(max(arr) - m) > 1e-9:
                raise ValueError("max of per-step deltas disagrees with summary")

    def to_csv_row(self):
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return str(int(v))
            if isinstance(v, float):
                return repr(v)
            return str(v)
        return [fmt(getattr(self, name)) for name in CSV_FIELDS]

    def to_json(self):
        out = {name: getattr(self, name) for name in CSV_FIELDS}
        out["delta_bc_t"] = list(map(float, self.delta_bc_t))
        out["delta_adv_t"] = list(map(float, self.delta_adv_t))
        return out


def write_metrics_csv(path, records):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_FIELDS)
        for rec in records:
            w.writerow(rec.to_csv_row())


def read_metrics_csv(path):
    """Round-trip reader for the documented schema; returns dict rows."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != CSV_FIELDS:
            raise ValueError(f"unexpected metrics header in {path}")
        return [dict(zip(header, row)) for row in reader]
