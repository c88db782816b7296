"""Continuum task quality: cutoff disclosure policies and their verification.

With a continuous quality law the principal discloses, at each instant,
whether quality is above a moving cutoff.  The gradual policies here order
disclosures by the loss/gain ratio u(q) = -v(q)/w(q).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ndtr

from .env import NEVER


class QuadratureError(RuntimeError):
    pass


class BranchError(ValueError):
    """Raised when a solver is called outside the parameter region it covers."""


# ---------------------------------------------------------------- numerics

def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 50) -> float:
    """Iterative adaptive Simpson; tol is absolute for integrals of size <= 1, relative above."""
    if b <= a:
        return 0.0

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, a, b)
    tol *= max(1.0, abs(whole))
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(flo, flm, fmid, lo, mid)
        right = simpson(fmid, frm, fhi, mid, hi)
        delta = left + right - est
        # force a few levels so narrow features are not missed
        # below floating-point resolution further splitting cannot help
        tiny = hi - lo <= 1e-13 * (1.0 + abs(lo) + abs(hi))
        if (depth >= 4 and abs(delta) <= 15.0 * eps) or tiny:
            total += left + right + delta / 15.0
        elif depth >= max_depth:
            raise QuadratureError(f"adaptive Simpson did not converge on [{lo}, {hi}]")
        else:
            stack.append((lo, mid, flo, flm, fmid, left, eps / 2.0, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, eps / 2.0, depth + 1))
    return total


def bisect(g: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of a monotone function with g(lo) and g(hi) of opposite sign."""
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise BranchError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


Q_TOL = 1e-10
T_TOL = 1e-9


# ---------------------------------------------------------------- model

@dataclass(frozen=True)
class GeneralEnv:
    """Stationary primitives with a quality-dependent bonus b(q)."""
    r: float
    r_p: float
    lam: float
    c: float
    bonus: Callable[[float], float] = field(default=lambda q: 1.0, compare=False)
    bonus_label: str = "constant:1"
    q_min: float = 0.0   # lowest quality in play; gradual disclosure starts here

    def __post_init__(self):
        for name in ("r", "r_p", "lam", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.q_min < self.c / self.lam:
            raise ValueError("q_min must lie in [0, q_bar)")

    @property
    def t_max(self) -> float:
        return 100.0 / (self.r + self.lam)

    def v(self, q: float) -> float:
        return (self.lam * q - self.c) / (self.r + self.lam)

    def w(self, q: float) -> float:
        return self.lam * self.bonus(q) / (self.r_p + self.lam)


def parse_bonus(value) -> tuple[Callable[[float], float], str]:
    """'identity' or a number (constant bonus)."""
    if value == "identity":
        return (lambda q: q), "identity"
    val = float(value)
    if val <= 0:
        raise ValueError("constant bonus must be positive")
    return (lambda q, val=val: val), f"constant:{val:g}"


@dataclass(frozen=True)
class QualityLaw:
    family: str
    params: tuple

    def __post_init__(self):
        f, p = self.family, self.params
        if f == "uniform":
            a, b = p
            if not 0 <= a < b:
                raise ValueError("uniform law needs 0 <= a < b")
        elif f == "exponential":
            if not p[0] > 0:
                raise ValueError("exponential rate must be positive")
        elif f == "truncated-lognormal":
            m, s, upper = p
            if not (s > 0 and upper > 0):
                raise ValueError("lognormal needs sigma > 0 and upper > 0")
        elif f == "tabulated":
            q, d = (np.asarray(x, float) for x in p)
            if q.ndim != 1 or q.shape != d.shape or np.any(np.diff(q) <= 0) or q[0] < 0:
                raise ValueError("tabulated law needs increasing nodes >= 0 with matching densities")
            if np.any(d <= 0):
                raise ValueError("tabulated density must be positive on its support")
            mass = float(np.trapezoid(d, q))
            object.__setattr__(self, "params", (tuple(q), tuple(d / mass)))
        else:
            raise ValueError(f"unknown quality law family {f!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "QualityLaw":
        fam = d["family"]
        if fam == "uniform":
            return cls(fam, (float(d["low"]), float(d["high"])))
        if fam == "exponential":
            return cls(fam, (float(d["rate"]),))
        if fam == "truncated-lognormal":
            return cls(fam, (float(d["mu_log"]), float(d["sigma"]), float(d["upper"])))
        if fam == "tabulated":
            return cls(fam, (tuple(d["q"]), tuple(d["density"])))
        raise ValueError(f"unknown quality law family {fam!r}")

    @property
    def support(self) -> tuple[float, float]:
        f, p = self.family, self.params
        if f == "uniform":
            return p
        if f == "exponential":
            return 0.0, 40.0 / p[0]  # tail mass e^-40 is below any tolerance used here
        if f == "truncated-lognormal":
            return 0.0, p[2]
        return p[0][0], p[0][-1]

    def breakpoints(self) -> list[float]:
        if self.family == "tabulated":
            return list(self.params[0])
        return list(self.support)

    def pdf(self, q: float) -> float:
        lo, hi = self.support
        if q < lo or q > hi:
            return 0.0
        f, p = self.family, self.params
        if f == "uniform":
            return 1.0 / (p[1] - p[0])
        if f == "exponential":
            return p[0] * math.exp(-p[0] * q)
        if f == "truncated-lognormal":
            m, s, upper = p
            if q <= 0:
                return 0.0
            norm = ndtr((math.log(upper) - m) / s)
            z = (math.log(q) - m) / s
            return math.exp(-0.5 * z * z) / (q * s * math.sqrt(2 * math.pi) * norm)
        return float(np.interp(q, p[0], p[1]))


def integrate_law(law: QualityLaw, g: Callable[[float], float], a: float, b: float,
                  extra_breaks=(), tol: float = 1e-10) -> float:
    """Integral of g(q) f(q) over [a, b], split at the law's kinks and extra_breaks."""
    lo, hi = law.support
    a, b = max(a, lo), min(b, hi)
    if b <= a:
        return 0.0
    pts = sorted({a, b, *(x for x in (*law.breakpoints(), *extra_breaks) if a < x < b)})
    eps = tol / max(len(pts) - 1, 1)
    return sum(adaptive_simpson(lambda q: g(q) * law.pdf(q), x0, x1, eps)
               for x0, x1 in zip(pts[:-1], pts[1:]))


def q_bar(env: GeneralEnv) -> float:
    """Quality at which completing the task is worth exactly zero to the agent."""
    return env.c / env.lam


def expected_v(law: QualityLaw, env: GeneralEnv) -> float:
    return integrate_law(law, env.v, -math.inf, math.inf, (q_bar(env),))


def c3(law: QualityLaw, env: GeneralEnv) -> float:
    return -expected_v(law, env)


def check_law(law: QualityLaw, env: GeneralEnv) -> None:
    if not expected_v(law, env) < 0:
        raise ValueError("quality law must satisfy E[v(q)] < 0")
    if not law.support[1] > q_bar(env):
        raise ValueError("quality law puts no mass above q_bar")
    if law.support[0] < env.q_min:
        raise ValueError("quality law puts mass below q_min")


def q_star(law: QualityLaw, env: GeneralEnv) -> float:
    """Cutoff of the optimal static policy: the tail above it is worth exactly zero."""
    check_law(law, env)
    qb = q_bar(env)
    lo = law.support[0]

    def tail(x):
        return integrate_law(law, env.v, x, math.inf, (qb,))
    return bisect(tail, lo, qb, Q_TOL)


def u_ratio(env: GeneralEnv, q: float) -> float:
    w = env.w(q)
    if w <= 0:
        raise ValueError(f"w({q}) = 0 makes u infinite; use a bonus with b(q) > 0")
    return max(-env.v(q), 0.0) / w


def u_inverse(env: GeneralEnv, x: float) -> float:
    qb = q_bar(env)
    if x <= 0:
        return qb
    if x >= u_ratio(env, env.q_min):
        return env.q_min
    return bisect(lambda q: u_ratio(env, q) - x, env.q_min, qb, Q_TOL * 1e-2)


def _need_impatient(env: GeneralEnv) -> None:
    if not env.r_p > env.r:
        raise BranchError("gradual disclosure needs r_p > r")


# ---------------------------------------------------------------- cutoff schedules

@dataclass(frozen=True)
class CutoffSchedule:
    """Cutoff q~(s) and the induced shirk map tau(q)."""
    name: str
    cutoff: Callable[[float], float]
    tau: Callable[[float], float]
    params: dict = field(default_factory=dict)
    breaks: tuple = ()   # qualities where tau jumps


def tau_igd(env: GeneralEnv, q0: float, q: float) -> float:
    _need_impatient(env)
    qb = q_bar(env)
    if q < q0:
        return 0.0
    if q >= qb:
        return NEVER
    return math.log(u_ratio(env, q0) / u_ratio(env, q)) / (env.r_p - env.r)


def tau_dgd(env: GeneralEnv, t: float, q: float) -> float:
    _need_impatient(env)
    if q >= q_bar(env):
        return NEVER
    return t + math.log(u_ratio(env, env.q_min) / u_ratio(env, q)) / (env.r_p - env.r)


def kg_cutoff(law: QualityLaw, env: GeneralEnv) -> CutoffSchedule:
    qs = q_star(law, env)
    return CutoffSchedule("KG", lambda s: qs, lambda q: 0.0 if q < qs else NEVER,
                          {"q_star": qs}, (qs,))


def dd_cutoff(env: GeneralEnv, t: float) -> CutoffSchedule:
    qb = q_bar(env)
    return CutoffSchedule("DD", lambda s: 0.0 if s < t else qb,
                          lambda q: t if q < qb else NEVER, {"t": t})


def igd_cutoff(env: GeneralEnv, q0: float, name: str = "IGD") -> CutoffSchedule:
    _need_impatient(env)
    u0 = u_ratio(env, q0)
    gap = env.r_p - env.r
    return CutoffSchedule(name, lambda s: u_inverse(env, u0 * math.exp(-gap * s)),
                          lambda q: tau_igd(env, q0, q), {"q0": q0}, (q0,))


def dgd_cutoff(env: GeneralEnv, t: float, name: str = "DGD") -> CutoffSchedule:
    _need_impatient(env)
    u0 = u_ratio(env, env.q_min)
    gap = env.r_p - env.r
    return CutoffSchedule(name, lambda s: env.q_min if s < t else u_inverse(env, u0 * math.exp(-gap * (s - t))),
                          lambda q: tau_dgd(env, t, q), {"t": t})


def custom_cutoff(env: GeneralEnv, cutoff: Callable[[float], float], name: str = "CUSTOM") -> CutoffSchedule:
    """Schedule from a non-decreasing cutoff; tau(q) = inf{s : cutoff(s) > q} by bisection."""
    qb = q_bar(env)
    horizon = env.t_max

    def tau(q):
        if q >= qb or cutoff(horizon) <= q:
            return NEVER
        if cutoff(0.0) > q:
            return 0.0
        lo, hi = 0.0, horizon
        while hi - lo > T_TOL:
            mid = 0.5 * (lo + hi)
            if cutoff(mid) > q:
                hi = mid
            else:
                lo = mid
        return hi
    return CutoffSchedule(name, cutoff, tau)


def agent_value(law: QualityLaw, env: GeneralEnv, tau: Callable[[float], float],
                breaks=()) -> float:
    """Agent's ex-ante value of a shirk map."""
    k = env.r + env.lam

    def g(q):
        t = tau(q)
        if t == NEVER:
            return env.v(q)
        return -math.expm1(-k * t) * env.v(q)
    return integrate_law(law, g, -math.inf, math.inf, (q_bar(env), *breaks))


def principal_cost(law: QualityLaw, env: GeneralEnv, tau: Callable[[float], float],
                   breaks=()) -> float:
    """Discounted bonus the principal forgoes through shirking below q_bar."""
    k = env.r_p + env.lam

    def g(q):
        t = tau(q)
        return 0.0 if t == NEVER else math.exp(-k * t) * env.w(q)
    return integrate_law(law, g, -math.inf, q_bar(env), breaks)


def igd_value(law: QualityLaw, env: GeneralEnv, q0: float) -> float:
    return agent_value(law, env, lambda q: tau_igd(env, q0, q), (q0,))


def igd0_is_ir(law: QualityLaw, env: GeneralEnv) -> bool:
    return igd_value(law, env, env.q_min) >= 0.0


def solve_q_double_star(law: QualityLaw, env: GeneralEnv) -> float:
    """Initial cutoff of the optimal gradual policy when IGD(0) is not individually rational."""
    _need_impatient(env)
    if igd0_is_ir(law, env):
        raise BranchError("IGD(0) is individually rational; use the delayed branch")
    qs = q_star(law, env)
    return bisect(lambda q0: igd_value(law, env, q0), env.q_min, qs, Q_TOL)


def dgd_value(law: QualityLaw, env: GeneralEnv, t: float) -> float:
    return agent_value(law, env, lambda q: tau_dgd(env, t, q))


def solve_t_tilde_general(law: QualityLaw, env: GeneralEnv) -> float:
    """Delay of the optimal gradual policy when IGD(0) is individually rational."""
    _need_impatient(env)
    if not igd0_is_ir(law, env):
        raise BranchError("IGD(0) is not individually rational; use the initial-cutoff branch")
    return bisect(lambda t: dgd_value(law, env, t), 0.0, env.t_max, T_TOL)


def optimal_cutoff(law: QualityLaw, env: GeneralEnv) -> CutoffSchedule:
    if env.r_p <= env.r:
        return kg_cutoff(law, env)
    if igd0_is_ir(law, env):
        return dgd_cutoff(env, solve_t_tilde_general(law, env), name="MDGD")
    return igd_cutoff(env, solve_q_double_star(law, env), name="OIGD")


@dataclass(frozen=True)
class CutoffReport:
    min_h: float
    argmin_time: float
    value: float
    passed: bool

    def to_dict(self) -> dict:
        return {"min_value": self.min_h, "argmin_time": self.argmin_time,
                "ex_ante": self.value, "pass": self.passed}


def cutoff_obedience(law: QualityLaw, env: GeneralEnv, schedule: CutoffSchedule,
                     s_grid=None, tol: float = 1e-7) -> CutoffReport:
    """Check h(s) = integral over q >= cutoff(s) of v(tau(q) - s, q) dF is non-negative."""
    if s_grid is None:
        s_grid = np.concatenate([[0.0], np.geomspace(env.t_max * 1e-4, env.t_max, 96)])
    k = env.r + env.lam
    qb = q_bar(env)
    hs = []
    for s in s_grid:
        lo = schedule.cutoff(float(s))

        def g(q, s=s):
            t = schedule.tau(q)
            if t == NEVER:
                return env.v(q)
            return -math.expm1(-k * max(t - s, 0.0)) * env.v(q)
        hs.append(integrate_law(law, g, lo, math.inf, (qb, *schedule.breaks)))
    hs = np.asarray(hs)
    i = int(np.argmin(hs))
    value = agent_value(law, env, schedule.tau, schedule.breaks)
    return CutoffReport(float(hs[i]), float(s_grid[i]), value,
                        bool(hs[i] >= -tol and value >= -tol))


# ---------------------------------------------------------------- continuum program

def _exponents(env: GeneralEnv):
    gap = env.r_p - env.r
    return ((env.r_p + env.lam) / (env.r + env.lam),      # theta
            (env.r + env.lam) / gap,                      # k
            (env.r_p + env.lam) / gap)


def z2(law: QualityLaw, env: GeneralEnv, y: float, upper: float | None = None) -> float:
    _, k, kp = _exponents(env)
    qb = q_bar(env)
    upper = qb if upper is None else upper
    return integrate_law(law, lambda q: max(-env.v(q), 0.0) ** kp * env.w(q) ** (-k), y, upper)


def h1(law: QualityLaw, env: GeneralEnv, y: float) -> float:
    """Largest attainable persuasion credit once every quality below y is told to shirk."""
    _, k, _ = _exponents(env)
    loss = integrate_law(law, lambda q: -env.v(q), -math.inf, y)
    return loss + u_ratio(env, y) ** (-k) * z2(law, env, y)


def feasible_cutoff_floor(law: QualityLaw, env: GeneralEnv) -> float:
    """Smallest y for which the reduced program is feasible (h1 is increasing)."""
    need = c3(law, env)
    if h1(law, env, env.q_min) >= need:
        return env.q_min
    return bisect(lambda y: h1(law, env, y) - need, env.q_min, q_star(law, env), Q_TOL)


@dataclass(frozen=True)
class ProgramReport:
    branch: str
    direct: float
    reduced: float | None
    closed_form: float
    y_opt: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _direct_program(law: QualityLaw, env: GeneralEnv, n: int) -> float:
    """Discretized continuum program: per-point discount factors y_i = exp(-(r+lam) tau_i) in [0, 1]."""
    qb = q_bar(env)
    lo, hi = law.support
    a, b = lo, min(qb, hi)
    edges = np.linspace(a, b, n + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    omega = np.array([law.pdf(q) for q in mid]) * np.diff(edges)
    loss = np.array([-env.v(q) for q in mid])
    gain = np.array([env.w(q) for q in mid])
    need = c3(law, env)
    theta = (env.r_p + env.lam) / (env.r + env.lam)
    if theta <= 1.0:
        # concave objective: bang-bang, lowest qualities (largest u) shirk first
        cum = np.cumsum(loss * omega)
        j = int(np.searchsorted(cum, need))
        yv = np.zeros(n)
        yv[:j] = 1.0
        if j < n:
            prev = cum[j - 1] if j else 0.0
            yv[j] = (need - prev) / (loss[j] * omega[j])
        return float(np.sum(gain * omega * yv ** theta))
    u = loss / gain
    p = 1.0 / (theta - 1.0)

    def y_of(log_nu):
        return np.minimum(1.0, (np.exp(log_nu) * u / theta) ** p)

    def credit(log_nu):
        return float(np.sum(y_of(log_nu) * loss * omega)) - need
    lo_nu, hi_nu = -50.0, 50.0
    while credit(hi_nu) < 0:
        hi_nu *= 2
    log_nu = bisect(credit, lo_nu, hi_nu, 1e-13)
    return float(np.sum(gain * omega * y_of(log_nu) ** theta))


def reduced_objective(law: QualityLaw, env: GeneralEnv, y: float) -> float:
    """Objective of the reduced program at cutoff y, with the smallest admissible z1."""
    theta, _, _ = _exponents(env)
    shirk = integrate_law(law, env.w, -math.inf, y)
    z1 = max(c3(law, env) - integrate_law(law, lambda q: -env.v(q), -math.inf, y), 0.0)
    if z1 == 0.0:
        return shirk
    return shirk + z1 ** theta * z2(law, env, y) ** (1.0 - theta)


def reduced_objective_curve(law: QualityLaw, env: GeneralEnv, ys) -> np.ndarray:
    """Reduced objective on an increasing y-grid below q_bar.

    Integrals are accumulated piecewise between neighbouring grid points so
    quadrature noise cannot masquerade as a decrease.
    """
    theta, k, kp = _exponents(env)
    qb = q_bar(env)
    ys = np.asarray(ys, dtype=float)
    if np.any(np.diff(ys) <= 0) or ys[0] < 0 or ys[-1] >= qb:
        raise ValueError("y-grid must be increasing inside [0, q_bar)")
    knots = np.concatenate([[-math.inf], ys, [qb]])
    tight = 1e-13

    def pieces(g):
        return np.array([integrate_law(law, g, a, b, tol=tight) for a, b in zip(knots[:-1], knots[1:])])
    shirk = np.cumsum(pieces(env.w))[:-1]
    loss = np.cumsum(pieces(lambda q: -env.v(q)))[:-1]
    tail = pieces(lambda q: max(-env.v(q), 0.0) ** kp * env.w(q) ** (-k))
    z2v = np.cumsum(tail[::-1])[::-1][1:]
    z1 = np.maximum(c3(law, env) - loss, 0.0)
    with np.errstate(divide="ignore"):
        extra = np.where(z1 > 0, z1 ** theta * z2v ** (1.0 - theta), 0.0)
    return shirk + extra


def _reduced_program(law: QualityLaw, env: GeneralEnv, y_lo: float) -> tuple[float, float]:
    qb = q_bar(env)
    grid = np.linspace(y_lo, qb, 41)[:-1]
    vals = [reduced_objective(law, env, y) for y in grid]
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if b > a:
        res = minimize_scalar(lambda y: reduced_objective(law, env, y), bounds=(a, b),
                              method="bounded", options={"xatol": 1e-10})
        if res.fun < vals[i]:
            return float(res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def program_b_oracle(law: QualityLaw, env: GeneralEnv, n: int = 20000) -> ProgramReport:
    """Solve the continuum program two independent ways and report the closed form."""
    check_law(law, env)
    direct = _direct_program(law, env, n)
    if env.r_p <= env.r:
        qs = q_star(law, env)
        closed = integrate_law(law, env.w, -math.inf, qs)
        return ProgramReport("KG", direct, None, closed, qs)
    sched = optimal_cutoff(law, env)
    closed = principal_cost(law, env, sched.tau, sched.breaks)
    reduced, y_opt = _reduced_program(law, env, feasible_cutoff_floor(law, env))
    return ProgramReport(sched.name, direct, reduced, closed, y_opt)


def cutoff_curves(law: QualityLaw, env: GeneralEnv, s_grid, dd_time: float | None = None):
    """Rows (s, KG, DD, IGD(q*), DGD(0), optimal) of cutoff qualities over time."""
    qs = q_star(law, env)
    kg = kg_cutoff(law, env)
    dd = dd_cutoff(env, 1.0 if dd_time is None else dd_time)
    cols = [kg, dd]
    if env.r_p > env.r:
        cols += [igd_cutoff(env, qs), dgd_cutoff(env, 1.0), optimal_cutoff(law, env)]
    rows = []
    for s in s_grid:
        row = [float(s)] + [c.cutoff(float(s)) for c in cols]
        row += [math.nan] * (6 - len(row))
        rows.append(tuple(row))
    names = ["s", "KG", "DD", "IGD_qstar", "DGD_1", "optimal"]
    return names, rows
