"""Command line interface: solve | verify | sweep | contract | genq."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import HIGH, LOW, Environment, InvalidEnvironment, w_complete, w_shirk
from . import thresholds as th
from .policies import (Policy, PolicyKind, PreconditionError, optimal_policy, shirk_schedule,
                       make_kg, make_mdd)
from .agent import continuation_value, obedience_check
from .oracle import values, solve_stationary_lp, solve_pessimistic_lp, time_nodes, monte_carlo
from .oracle.curves import mu_sweep, MU_SWEEP_COLUMNS
from .contracts import ContractAssumptionError, contract_values, optimal_contract
from . import genq

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    environment: dict
    seed: int = 0
    grid: int = 512
    tol: float = 1e-7
    out: str | None = None
    label: str = "run"
    mc_paths: int = 200_000
    perturb_delay: float | None = None
    sweep: dict = field(default_factory=dict)
    contract: dict = field(default_factory=dict)
    genq: dict = field(default_factory=dict)

    def env(self) -> Environment:
        return Environment.from_dict(self.environment)


def load_config(path: str | None, args) -> RunConfig:
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    if "environment" in raw:
        env_d = raw.pop("environment")
    else:
        # a bare environment object is accepted as a config
        env_d = {k: raw.pop(k) for k in list(raw) if k in ("mu", "r", "r_p", "lambda_h", "lambda_l",
                                                          "c", "H", "L", "b_h", "b_l")}
    known = {"seed", "grid", "tol", "out", "label", "mc_paths", "perturb_delay", "sweep", "contract", "genq"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(environment=env_d, **raw)
    for name in ("seed", "grid", "tol", "out"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if cfg.seed < 0 or cfg.seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg.grid < 8:
        raise ConfigError("grid must have at least 8 points")
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    return cfg


def _clean(obj):
    """JSON-safe copy: infinities become the string 'inf', NaN becomes null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump(report: dict, cfg: RunConfig, name: str) -> str:
    text = json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    return text


def case_name(env: Environment) -> str:
    if env.stationary:
        return "stationary"
    return "pessimistic" if env.pessimistic else "optimistic"


# ---------------------------------------------------------------- solve

def cmd_solve(cfg: RunConfig) -> tuple[int, dict]:
    env = cfg.env()
    pol = optimal_policy(env)
    W, V = values(env, shirk_schedule(pol, env))
    report = {"case": case_name(env), "optimal_policy": pol.to_dict(), "W": W, "V": V,
              "thresholds": th.thresholds(env).to_dict()}
    return EXIT_OK, report


# ---------------------------------------------------------------- verify

def _check(name, passed, **detail):
    return {"check": name, "pass": bool(passed), **detail}


def _binding_time(env: Environment, pol: Policy) -> float | None:
    """Time at which the agent's obedience constraint should bind, if any."""
    if pol.kind in (PolicyKind.NONE, PolicyKind.IFD, PolicyKind.DD):
        return None
    if env.pessimistic and env.mu > th.mu_hat(env) and pol.kind in (PolicyKind.MDD, PolicyKind.DPD):
        return th.t_bar(env)
    if env.pessimistic and pol.kind == PolicyKind.KG:
        return None
    return 0.0


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    env = cfg.env()
    if cfg.mc_paths < 1:
        raise ConfigError("mc_paths must be >= 1")
    checks = []
    vh_mix = th.mu_bar(env)
    from .env import v_complete
    resid = vh_mix * v_complete(env, HIGH) + (1 - vh_mix) * v_complete(env, LOW)
    checks.append(_check("mu_bar_root", abs(resid) <= 1e-10, residual=resid))
    if env.pessimistic:
        m = th.mu_hat(env)
        resid = (m * (env.r + env.lambda_h) * v_complete(env, HIGH)
                 + (1 - m) * (env.r + env.lambda_l) * v_complete(env, LOW))
        checks.append(_check("mu_hat_root", abs(resid) <= 1e-10, residual=resid))

    best = optimal_policy(env)
    pol = best
    if cfg.perturb_delay is not None:
        t = th.t_tilde(env) + cfg.perturb_delay
        pol = Policy(PolicyKind.DD, {"t": t})
    sched = shirk_schedule(pol, env)
    W, V = values(env, sched)

    rep = obedience_check(env, sched, tol=cfg.tol)
    checks.append(_check("obedience", rep.passed, **rep.to_dict()))

    tb = _binding_time(env, pol)
    if tb is not None:
        vb = V if tb == 0.0 else continuation_value(env, sched, tb)
        checks.append(_check("binding_ir", abs(vb) <= 1e-8, time=tb, value=vb))

    # discretized program against the optimal policy's closed form
    persuasion = env.pessimistic or env.mu < th.mu_bar(env)
    if persuasion:
        best_sched = shirk_schedule(best, env)
        closed = best_sched.low.discount(env.r_p + env.lambda_l)
        times = time_nodes(env, cfg.grid)
        lp = solve_pessimistic_lp(env, times) if env.pessimistic else solve_stationary_lp(env, times)
        checks.append(_check("lp_vs_closed_form", abs(lp.objective - closed) <= 1e-3,
                             lp=lp.objective, closed_form=closed))

    mc = monte_carlo(env, pol, cfg.mc_paths, cfg.seed, tol=cfg.tol)
    zw = (mc.W - W) / mc.W_se if mc.W_se > 0 else 0.0
    zv = (mc.V - V) / mc.V_se if mc.V_se > 0 else 0.0
    checks.append(_check("monte_carlo", abs(zw) <= 3 and abs(zv) <= 3,
                         W=W, W_hat=mc.W, W_se=mc.W_se, V=V, V_hat=mc.V, V_se=mc.V_se,
                         violations=mc.violations, n=mc.n, seed=mc.seed))
    ok = all(c["pass"] for c in checks)
    report = {"case": case_name(env), "policy": pol.to_dict(), "pass": ok, "checks": checks}
    return (EXIT_OK if ok else EXIT_FAIL), report


# ---------------------------------------------------------------- sweep

def _fmt(x) -> str:
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_bytes(buf.getvalue().encode("utf-8"))


def _revalidate(env: Environment, rows, every: int = 100) -> list[str]:
    """Recompute a deterministic 1% sample of rows from independent formulas."""
    problems = []
    mb = th.mu_bar(env)
    for row in rows[::every]:
        mu, w_kg, w_mdd, w_pd, w_no, w_cc = row
        e = env.replace(mu=mu)
        if w_cc < w_no - 1e-12:
            problems.append(f"mu={mu}: concavified value below the curve")
        if env.pessimistic:
            if w_pd < w_kg - 1e-9:
                problems.append(f"mu={mu}: Poisson disclosure below KG")
            continue
        wh, wl = w_complete(e, HIGH), w_complete(e, LOW)
        kg = mu * wh + (mu * (1 - mb) / mb * wl if mu < mb else (1 - mu) * wl)
        mdd = mu * wh + (1 - mu) * w_shirk(e, th.t_tilde(e), LOW)
        if abs(kg - w_kg) > 1e-9 or abs(mdd - w_mdd) > 1e-9:
            problems.append(f"mu={mu}: value mismatch")
    return problems


def cmd_sweep(cfg: RunConfig) -> tuple[int, dict]:
    env = cfg.env()
    sw = dict(cfg.sweep)
    n = int(sw.get("mu_points", 200))
    if n < 1:
        raise ConfigError("empty mu grid")
    lo, hi = sw.get("mu_range", [0.0, 1.0])
    mus = np.linspace(lo, hi, n + 2)[1:-1]
    rps = sw.get("r_p_values", [env.r_p])
    dd_time = float(sw.get("dd_time", 0.3))
    workers = int(sw.get("workers", 4))
    out = Path(cfg.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise OSError("not writable")
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    files, problems = [], []
    for rp in rps:
        e = env.replace(r_p=float(rp))
        rows = mu_sweep(e, mus, workers=workers)
        problems += _revalidate(e, rows)
        name = f"{cfg.label}_mu_sweep_rp{rp:g}.csv"
        _write_csv(out / name, MU_SWEEP_COLUMNS, rows)
        files.append(name)
        if e.stationary:
            dd_rows = []
            for mu, w_kg, *_ in rows:
                em = e.replace(mu=mu)
                started = mu >= th.mu_tilde(em, dd_time)
                w_dd = mu * w_complete(em, HIGH) + (1 - mu) * w_shirk(em, dd_time, LOW) if started else 0.0
                dd_rows.append((mu, dd_time, w_dd, w_kg))
            name = f"{cfg.label}_dd_sweep_rp{rp:g}.csv"
            _write_csv(out / name, ("mu", "t", "W_DD", "W_KG"), dd_rows)
            files.append(name)
        elif e.pessimistic:
            t_rows = [(mu, th.t_bar(e, mu), th.t_tilde(e, mu)) for mu in mus]
            name = f"{cfg.label}_thresholds_rp{rp:g}.csv"
            _write_csv(out / name, ("mu", "t_bar", "t_tilde"), t_rows)
            files.append(name)
    report = {"files": files, "seed": cfg.seed, "mu_points": n, "pass": not problems,
              "problems": problems}
    return (EXIT_OK if not problems else EXIT_FAIL), report


# ---------------------------------------------------------------- contract

def cmd_contract(cfg: RunConfig) -> tuple[int, dict]:
    env = cfg.env()
    terms = cfg.contract
    if "v_bar" not in terms or "B" not in terms:
        raise ConfigError("contract section needs v_bar and B")
    c = optimal_contract(env, float(terms["v_bar"]), float(terms["B"]), grid=cfg.grid)
    W, V = contract_values(env, c)
    ok = abs(V - c.v_bar) <= 1e-8 and (c.margin is None or c.margin >= -1e-6)
    return (EXIT_OK if ok else EXIT_FAIL), {"contract": c.to_dict(), "W": W, "V": V, "pass": ok}


# ---------------------------------------------------------------- genq

def _general_env(cfg: RunConfig) -> tuple[genq.QualityLaw, genq.GeneralEnv]:
    g = dict(cfg.genq)
    law = genq.QualityLaw.from_dict(g.get("law", {"family": "uniform", "low": 0.0, "high": 1.8}))
    bonus, label = genq.parse_bonus(g.get("bonus", 1.0))
    env = genq.GeneralEnv(float(g.get("r", 0.1)), float(g.get("r_p", 0.2)),
                          float(g.get("lambda", 1.0)), float(g.get("c", 1.0)), bonus, label,
                          q_min=max(law.support[0], 0.0))
    return law, env


def cmd_genq(cfg: RunConfig) -> tuple[int, dict]:
    law, env = _general_env(cfg)
    genq.check_law(law, env)
    report = {"q_bar": genq.q_bar(env), "q_star": genq.q_star(law, env),
              "u0": genq.u_ratio(env, 0.0), "bonus": env.bonus_label}
    sched = genq.optimal_cutoff(law, env)
    report["branch"] = sched.name
    report["parameters"] = sched.params
    prog = genq.program_b_oracle(law, env)
    report["program"] = prog.to_dict()
    ob = genq.cutoff_obedience(law, env, sched, tol=cfg.tol)
    report["obedience"] = ob.to_dict()
    agree = prog.reduced is None or abs(prog.direct - prog.reduced) <= 1e-6
    ok = ob.passed and agree and abs(prog.direct - prog.closed_form) <= 1e-6
    report["pass"] = ok
    s_points = int(cfg.genq.get("s_points", 200))
    s_grid = np.linspace(0.0, float(cfg.genq.get("s_max", 20.0)), s_points)
    names, rows = genq.cutoff_curves(law, env, s_grid, cfg.genq.get("dd_time"))
    if cfg.out:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        _write_csv(Path(cfg.out) / f"{cfg.label}_cutoffs.csv", names, rows)
    return (EXIT_OK if ok else EXIT_FAIL), report


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "sweep": cmd_sweep,
            "contract": cmd_contract, "genq": cmd_genq}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disclosure", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--grid", type=int, help="time-grid points")
        sp.add_argument("--tol", type=float, help="obedience tolerance")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.config is None and args.command != "genq":
            raise ConfigError("--config is required")
        cfg = load_config(args.config, args)
        if args.command == "genq" and not cfg.environment:
            cfg.environment = {}
        code, report = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidEnvironment, ContractAssumptionError, PreconditionError,
            genq.BranchError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(_dump(report, cfg, f"{cfg.label}_{args.command}.json"))
    return code


if __name__ == "__main__":
    sys.exit(main())
