"""Acceptance criteria 1-10 at their stated tolerances.

Each test prints a detail line; the conftest hook prints one PASS/FAIL line
per criterion at the end of the run. `python tests/test_acceptance.py` runs
only this file.
"""
import math
import time

import numpy as np
import pytest

from disclosure import genq as g
from disclosure import thresholds as th
from disclosure.agent import default_grid, obedience_check, continuation_value, posterior_under_schedule
from disclosure.cli import main
from disclosure.contracts import contract_lp_oracle, optimal_contract
from disclosure.env import Environment, v_complete, w_complete, LOW
from disclosure.oracle import (mu_sweep, monte_carlo, solve_pessimistic_lp, solve_stationary_lp,
                               time_nodes, two_point_oracle, values)
from disclosure.policies import (PolicyKind, make_dpd, make_ipd, make_kg, make_mdd, optimal_policy,
                                 shirk_schedule)
from conftest import SET_A, SET_B, env_a, env_b


def report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


def random_env(rng, kind):
    """r, r_p in [0.02, 0.5]; lambda_l, c in [0.3, 3]; lambda_h = lambda_l (stationary) or
    lambda_l * [1.1, 4] (pessimistic); L in [0.05, 0.9] c/lambda_l; H in [1.1, 5] c/lambda_h."""
    r, r_p = rng.uniform(0.02, 0.5, 2)
    lam_l, c = rng.uniform(0.3, 3.0, 2)
    lam_h = lam_l if kind == "stationary" else lam_l * rng.uniform(1.1, 4.0)
    L = c / lam_l * rng.uniform(0.05, 0.9)
    H = max(c / lam_h * rng.uniform(1.1, 5.0), 1.2 * L)
    return Environment(mu=0.5, r=r, r_p=r_p, lambda_h=lam_h, lambda_l=lam_l, c=c, H=H, L=L)


# ----------------------------------------------------------------------------- 1

def test_criterion_01_stationary_lp():
    literal = 0.469434          # value printed in the criterion
    exact = 0.5 ** (1.2 / 1.1)  # the expression it names, 0.4694654553...
    ok, parts = True, []
    for rp, target in ((0.2, exact), (0.05, 0.5)):
        e = env_a(r_p=rp)
        for n, tol in ((512, 1e-3), (2048, 2.5e-4)):
            t0 = time.perf_counter()
            obj = solve_stationary_lp(e, time_nodes(e, n)).objective
            dt = time.perf_counter() - t0
            gap = abs(obj - target)
            this = gap <= tol and dt < 5.0
            if rp == 0.2:
                this &= abs(obj - literal) <= tol
            ok &= this
            parts.append(f"rp={rp} n={n} obj={obj:.7f} gap={gap:.1e} t={dt:.2f}s")
    report(1, ok, "; ".join(parts))
    assert ok


# ----------------------------------------------------------------------------- 2

def test_criterion_02_pessimistic_lp():
    ok, parts = True, []
    for mu in (0.1, 0.5):
        for rp in (0.05, 0.2):
            e = env_b(mu=mu, r_p=rp)
            pol = optimal_policy(e)
            closed = shirk_schedule(pol, e).low.discount(e.r_p + e.lambda_l)
            lp = solve_pessimistic_lp(e)
            gap = abs(lp.objective - closed)
            before = lp.mass_before(th.t_bar(e)) if mu > th.mu_hat(e) else 0.0
            ok &= gap <= 1e-3 and before < 1e-6
            parts.append(f"mu={mu} rp={rp} {pol.kind.value} gap={gap:.1e} early_mass={before:.1e}")
    report(2, ok, "; ".join(parts))
    assert ok


# ----------------------------------------------------------------------------- 3

def test_criterion_03_two_point_oracle():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        e = random_env(rng, "stationary")
        e = e.replace(mu=rng.uniform(0.05, 0.95) * th.mu_bar(e))
        t = time_nodes(e, 512)
        worst = max(worst, abs(two_point_oracle(e, t).objective - solve_stationary_lp(e, t).objective))
    ok = worst <= 1e-6
    report(3, ok, f"100 instances, max |two-point - simplex| = {worst:.1e}")
    assert ok


# ----------------------------------------------------------------------------- 4

def _binding_value(env, pol, sched):
    if env.pessimistic and env.mu > th.mu_hat(env):
        return continuation_value(env, sched, th.t_bar(env))
    return values(env, sched)[1]


def test_criterion_04_obedience_suite():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst_min, worst_ir, kinds = math.inf, 0.0, set()
    for i in range(200):
        e = random_env(rng, "stationary" if i % 2 == 0 else "pessimistic")
        if e.pessimistic:
            e = e.replace(mu=rng.uniform(0.02, 0.98))
        else:
            e = e.replace(mu=rng.uniform(0.02, 0.98) * th.mu_bar(e))
        pol = optimal_policy(e)
        kinds.add(pol.kind.value)
        sched = shirk_schedule(pol, e)
        rep = obedience_check(e, sched, tol=1e-7)
        worst_min = min(worst_min, rep.min_value)
        worst_ir = max(worst_ir, abs(_binding_value(e, pol, sched)))
    dt = time.perf_counter() - t0
    ok = worst_min >= -1e-7 and worst_ir <= 1e-8 and dt < 60
    report(4, ok, f"200 envs ({', '.join(sorted(kinds))}): min V_s = {worst_min:.1e}, "
                  f"max |binding V| = {worst_ir:.1e}, {dt:.1f}s")
    assert ok


# ----------------------------------------------------------------------------- 5

def test_criterion_05_regime_flip():
    mus = np.linspace(0, 1, 202)[1:-1]
    violations = 0
    for rp in (0.2, 0.05):
        e = env_a(r_p=rp)
        rows = np.array(mu_sweep(e, mus))
        inside = rows[:, 0] < th.mu_bar(e)
        diff = rows[inside, 2] - rows[inside, 1]
        violations += int(np.sum(diff <= 0)) if rp > e.r else int(np.sum(diff >= 0))
    ok = violations == 0
    report(5, ok, f"sign violations = {violations}")
    assert ok


# ----------------------------------------------------------------------------- 6

def test_criterion_06_ipd_belief_stationarity():
    e = env_b(mu=0.1)
    sched = shirk_schedule(make_ipd(e), e)
    dev = float(np.max(np.abs(posterior_under_schedule(e, sched, default_grid(e, 512)) - th.mu_hat(e))))
    ok = dev < 1e-9
    report(6, ok, f"max |posterior - mu_hat| = {dev:.1e}")
    assert ok


# ----------------------------------------------------------------------------- 7

def test_criterion_07_monte_carlo():
    cases = {
        "KG": (env_a(r_p=0.05), make_kg),
        "MDD": (env_a(), make_mdd),
        "IPD": (env_b(mu=0.1, r_p=0.05), make_ipd),
        "DPD": (env_b(r_p=0.05), make_dpd),
    }
    t0 = time.perf_counter()
    ok, parts = True, []
    for name, (e, make) in cases.items():
        pol = make(e)
        W, V = values(e, shirk_schedule(pol, e))
        mc = monte_carlo(e, pol, 1_000_000, 20240601)
        zw = (mc.W - W) / mc.W_se
        zv = (mc.V - V) / mc.V_se
        ok &= abs(zw) <= 3 and abs(zv) <= 3
        parts.append(f"{name} zW={zw:+.2f} zV={zv:+.2f}")
    dt = time.perf_counter() - t0
    ok &= dt < 30
    report(7, ok, "; ".join(parts) + f"; {dt:.1f}s")
    assert ok


# ----------------------------------------------------------------------------- 8

def test_criterion_08_general_quality():
    law = g.QualityLaw("uniform", (0.0, 1.8))
    b, label = g.parse_bonus(1.0)
    ok, parts = True, []
    qs = g.q_star(law, g.GeneralEnv(0.1, 0.2, 1.0, 1.0, b, label))
    ok &= abs(qs - 0.2) <= 1e-9
    parts.append(f"q*={qs:.12f}")
    for rp in (0.2, 1.0):
        env = g.GeneralEnv(0.1, rp, 1.0, 1.0, b, label)
        rep = g.program_b_oracle(law, env)
        agree = abs(rep.direct - rep.reduced)
        y0 = g.feasible_cutoff_floor(law, env)
        ys = np.linspace(y0, g.q_bar(env), 1001)[:-1]
        drop = max(0.0, -float(np.min(np.diff(g.reduced_objective_curve(law, env, ys)))))
        ok &= agree <= 1e-6 and drop <= 1e-10
        parts.append(f"rp={rp} {rep.branch} |direct-reduced|={agree:.1e} max drop={drop:.1e}")
    report(8, ok, "; ".join(parts))
    assert ok


# ----------------------------------------------------------------------------- 9

def test_criterion_09a_worked_contracts():
    ifd = optimal_contract(env_a(r_p=0.05, b_l=0.4), 0.3, 2.0)
    kg = optimal_contract(env_a(r_p=0.05, b_l=0.5), 0.3, 2.0)
    mdd = optimal_contract(env_a(), 0.3, 2.0)
    t_star = mdd.wage.times[0]
    formula = math.log(2 / (1.1 * 0.3)) / 1.1      # = 1.6380089..., printed as 1.637973
    ok = (ifd.policy.kind == PolicyKind.IFD and abs(ifd.M - (0.3 - 0.2 / 1.1)) <= 1e-12
          and kg.policy.kind == PolicyKind.KG and abs(kg.M - 0.3) <= 1e-12
          and mdd.policy.kind == PolicyKind.MDD and mdd.M == 0.0
          and abs(t_star - formula) <= 1e-12 and mdd.margin >= 0)
    report("9a", ok, f"IFD M={ifd.M:.6f}; KG M={kg.M:.6f}; MDD T*={t_star:.6f} "
                     f"(printed 1.637973 differs by {t_star - 1.637973:.1e}), margin={mdd.margin:.1e}")
    assert ok


def _budget_slope():
    e = env_a()
    Bs = np.array([2.0, 20.0, 200.0])
    limit = th.c1(e) ** (1.2 / 1.1)
    gaps = np.array([contract_lp_oracle(e, 0.3, B) - limit for B in Bs])
    return float(np.polyfit(np.log(Bs), np.log(gaps), 1)[0])


def test_criterion_09b_budget_slope_as_stated():
    # stated target -(r_p + lambda)/(r + lambda); the model's wage term decays as
    # B**(1 - theta), so the fitted slope is near -0.0909 (see decisions ledger)
    slope = _budget_slope()
    target = -1.2 / 1.1
    ok = abs(slope - target) <= 0.1 * abs(target)
    report("9b", ok, f"fitted slope {slope:.5f} vs stated {target:.5f} "
                     f"(derivable rate 1 - theta = {1 - 1.2 / 1.1:.5f})")
    assert ok


def test_criterion_09c_budget_slope_derived():
    slope = _budget_slope()
    target = 1 - 1.2 / 1.1
    ok = abs(slope - target) <= 0.1 * abs(target)
    report("9c", ok, f"fitted slope {slope:.5f} vs 1 - theta = {target:.5f}")
    assert ok


# ----------------------------------------------------------------------------- 10

def test_criterion_10_sweep_determinism(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    import json
    cfg.write_text(json.dumps({"label": "det", "environment": SET_B,
                               "sweep": {"mu_points": 200, "r_p_values": [0.2, 0.05]}}))
    outs = []
    for k in range(2):
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / f"run{k}"), "--seed", "42"]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / f"run{k}").glob("*.csv"))})
    capsys.readouterr()
    ok = outs[0] == outs[1] and len(outs[0]) == 4
    report(10, ok, f"{len(outs[0])} CSV files byte-identical across two runs")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
