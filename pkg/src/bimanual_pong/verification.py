"""Self-checks behind ``pong verify``.

Each check returns a :class:`CheckResult`. The math checks compare the
package against independent computations (least squares, dense inverses,
finite differences, brute-force grids); the rally checks test the
qualitative scenario behaviour.
"""

from dataclasses import dataclass

import numpy as np

from .attention_model import TrackingProblem, terminal_error, woodbury_inverse
from .attention_solver import SolverConfig, solve_tracking
from .gradcheck import check_gradients
from .lq_tracker import PenaltyVector, TrackingTarget, closed_form_controls, oracle_minimize
from .rally import SCENARIOS, ScenarioConfig, detect_steady_state, run_rally, summarize
from .tasks import attention_spread, easy_task, hard_task
from .trajectory_algebra import build_rollout, discretize_paddle, extract_geometry

B_INPUT = np.array([1.0, 0.0])


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_closed_form(trials=100, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        N = int(rng.integers(2, 11))
        roll = build_rollout(discretize_paddle(rng.uniform(0, 3)), B_INPUT, N)
        x1 = rng.normal(0, 0.2, 2)
        target = TrackingTarget.from_rollout(rng.normal(0, 0.5, 2 * (N - 1)), roll, x1)
        q = PenaltyVector(np.exp(rng.uniform(-3, 3, 2 * (N - 1))), rng.uniform(0.5, 2))
        u = closed_form_controls(target, q, roll)
        ref = oracle_minimize(target, q, roll)
        worst = max(worst, np.linalg.norm(u - ref) / max(np.linalg.norm(ref), 1e-300))
    return CheckResult("closed-form controls vs least squares", worst < 1e-6,
                       f"max relative difference {worst:.2e} over {trials} instances")


def check_woodbury(samples=200, seed=0):
    rng = np.random.default_rng(seed)
    geom = extract_geometry(build_rollout(discretize_paddle(1.0), B_INPUT, 10))
    prob = TrackingProblem(zp=np.zeros(9), geom=geom)
    worst = 0.0
    for _ in range(samples):
        q = np.exp(rng.uniform(np.log(1e-9), np.log(1e6), 9))
        M = prob.r * np.eye(9) + geom.Bp.T @ (q[:, None] * geom.Bp)
        worst = max(worst, np.abs(M @ woodbury_inverse(q, prob) - np.eye(9)).max())
    return CheckResult("Woodbury inverse residual", worst < 1e-8,
                       f"max |M Minv - I| = {worst:.2e}")


def check_gradient(trials=50, seed=0):
    rep = check_gradients(seed, trials)
    return CheckResult("analytic gradient vs finite differences", rep.max_rel_error < 1e-4,
                       f"max relative error {rep.max_rel_error:.2e}")


def grid_oracle_2d(prob, lo=1e-4, hi=1e3, n=400):
    """Brute-force the 2-D problem (last two entries free, the rest at the floor).

    Returns ``(grid, feasible_mask, best_index)`` where ``grid`` is the 1-D
    log-spaced axis shared by both dimensions.
    """
    grid = np.geomspace(lo, hi, n)
    Bp, b, r = prob.geom.Bp, prob.geom.bpN, prob.r
    m = Bp.shape[1]
    base = r * np.eye(m) + prob.qfloor * (Bp[:-2].T @ Bp[:-2])
    rhs0 = prob.qfloor * (Bp[:-2].T @ prob.zp[:-2])
    a, c = Bp[-2], Bp[-1]
    Aa, Ac = np.outer(a, a), np.outer(c, c)
    E = np.empty((n, n))
    for i, qa in enumerate(grid):
        M = base[None] + qa * Aa[None] + grid[:, None, None] * Ac[None]
        rhs = rhs0[None] + qa * prob.zp[-2] * a[None] + grid[:, None] * prob.zp[-1] * c[None]
        u = np.linalg.solve(M, rhs[..., None])[..., 0]
        E[i] = prob.zpN - u @ b
    feasible = np.abs(E) <= prob.eps
    cost = np.where(feasible, grid[:, None] ** 2 + grid[None, :] ** 2, np.inf)
    best = np.unravel_index(np.argmin(cost), cost.shape)
    return grid, feasible, best


def check_grid_2d(seed=0):
    prob = hard_task()
    sol = solve_tracking(prob, SolverConfig(active_dims=2))
    grid, feasible, best = grid_oracle_2d(prob)
    step = np.log(grid[1] / grid[0])
    cells = np.abs(np.log(sol.qp_full[-2:]) - np.log(grid[list(best)])) / step
    # convexity: midpoints of random feasible pairs stay feasible
    rng = np.random.default_rng(seed)
    idx = np.argwhere(feasible)
    pick = rng.integers(0, len(idx), (1000, 2))
    bad = 0
    for i, j in pick:
        qa, qb = grid[idx[i]], grid[idx[j]]
        q = np.full(prob.dim, prob.qfloor)
        q[-2:] = 0.5 * (qa + qb)
        bad += abs(terminal_error(q, prob)) > prob.eps
    ok = cells.max() <= 2 and bad == 0 and sol.qp_full[-2] < sol.qp_full[-1]
    return CheckResult("2-D solve vs 400x400 grid", ok,
                       f"offset {cells.max():.2f} cells, {bad} infeasible midpoints of 1000")


def check_spread():
    easy = solve_tracking(easy_task(), SolverConfig(active_dims=9))
    hard = solve_tracking(hard_task(), SolverConfig(active_dims=9))
    one = solve_tracking(hard_task(), SolverConfig(active_dims=1))
    s_easy, s_hard = attention_spread(easy.qp_full), attention_spread(hard.qp_full)
    ratio = one.cost_pA / hard.cost_pA
    return CheckResult("hard vs easy attention spread", s_hard > s_easy and ratio > 1.2,
                       f"sigma hard {s_hard:.3f} > easy {s_easy:.3f}; one-dim cost ratio {ratio:.2f}")


def _tail_means(log, first=11, last=40):
    recs = [r for r in log.records if first <= r.index <= last]
    mean = {s: np.mean([r.attention_cost for r in recs if r.side == s]) for s in ("left", "right")}
    return mean


def check_scenarios():
    logs = {name: run_rally(ScenarioConfig.preset(name)) for name in SCENARIOS}
    out = []

    none = logs["none"]
    att = none.series("attention_cost")
    ok = bool(np.all(np.diff(att) > 0)) and not none.completed and len(none.records) <= 15
    out.append(CheckResult("scenario none diverges", ok,
                           f"{none.termination}, attention {att[0]:.3g} -> {att[-1]:.3g}"))

    strong, weak = logs["coordination-strong"], logs["coordination-weak"]
    a = strong.series("attention_cost")
    ks, kw = detect_steady_state(strong).kind, detect_steady_state(weak).kind
    ok = a[-1] < 0.05 * a.max() and kw == "drift" and ks != "drift"
    out.append(CheckResult("coordination converges, weak drifts", ok,
                           f"strong final/peak {a[-1] / a.max():.2e}, strong {ks}, weak {kw}"))

    lo, hi = logs["handedness-low"], logs["handedness-high"]
    ml, mh = _tail_means(lo), _tail_means(hi)
    kl, kh = detect_steady_state(lo).kind, detect_steady_state(hi).kind
    ok = (ml["left"] > ml["right"] and mh["left"] > mh["right"]
          and kl == "converged-to-zero" and kh != "converged-to-zero")
    out.append(CheckResult("handedness gap and drift", ok,
                           f"low L {ml['left']:.3g} R {ml['right']:.3g} ({kl}); "
                           f"high L {mh['left']:.3g} R {mh['right']:.3g} ({kh})"))

    cl, ch = detect_steady_state(logs["centering-low"]), detect_steady_state(logs["centering-high"])
    ok = (cl.kind == ch.kind == "oscillating-decay"
          and ch.zero_crossing_rate > cl.zero_crossing_rate)
    out.append(CheckResult("centering oscillates and decays", ok,
                           f"low {cl.kind} rate {cl.zero_crossing_rate:.3f}; "
                           f"high {ch.kind} rate {ch.zero_crossing_rate:.3f}"))

    tot = {name: summarize(log).attention for name, log in logs.items()}
    pairs = [("none", "coordination-weak"), ("coordination-weak", "coordination-strong"),
             ("handedness-high", "handedness-low"), ("centering-high", "centering-low"),
             ("centering-low", "coordination-strong"), ("centering-high", "coordination-strong")]
    broken = [f"{a} <= {b}" for a, b in pairs if not tot[a] > tot[b]]
    out.append(CheckResult("twelve-collision attention orderings", not broken,
                           "all hold" if not broken else "; ".join(broken)))
    return out


def run_checks():
    results = [check_closed_form(), check_woodbury(), check_gradient(), check_grid_2d(),
               check_spread()]
    results.extend(check_scenarios())
    return results
