"""Log-barrier interior-point solver for the attention allocation problem.

Tracking problem::

    min  q_p^T q_p        s.t.  E(q)^2 <= eps^2,  q >= qfloor

Full problem (tracking plus coordination) adds the terminal velocity
penalty ``q_v`` as a decision variable and ``q_v^2 + qhat(q_v)^2`` to the
objective, where ``qhat`` is the opposite paddle's estimated attention.

Only the trailing ``active_dims`` position entries are optimized; earlier
entries stay pinned at ``qfloor``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .attention_model import grad_terminal_error, terminal_error
from .coordination_model import coordination_cost_and_gradient

logger = logging.getLogger(__name__)


class InfeasibleTaskError(RuntimeError):
    """No attention up to the escalation ceiling brings the miss distance within the margin.

    ``attempt`` holds the last (largest) attention vector that was tried.
    """

    def __init__(self, message, attempt=None):
        super().__init__(message)
        self.attempt = attempt


class BarrierDomainError(ValueError):
    """The barrier objective was evaluated outside the strict interior."""


@dataclass(frozen=True)
class SolverConfig:
    active_dims: int = 4
    t0: float = 1.0
    growth: float = 10.0
    outer_rounds: int = 6
    max_inner: int = 4000
    grad_tol: float = 1e-6
    step_min: float = 1e-12
    step_max: float = 1e2
    step_grow: float = 1.5
    qinit: float = 1.0
    qmax: float = 1e12
    ftol: float = 1e-13
    stall_window: int = 8

    def __post_init__(self):
        if self.active_dims < 1:
            raise ValueError("active_dims must be >= 1")
        if not self.growth > 1:
            raise ValueError("barrier growth factor must exceed 1")


@dataclass
class AttentionSolution:
    q: np.ndarray  # full attention vector (position entries, then q_v if present)
    qp_full: np.ndarray
    qvRN: float
    qhat_pL: float
    cost_pA: float
    cost_vA: float
    E: float
    feasible: bool
    converged: bool
    iterations: int
    # accepted steps as (barrier weight t, barrier value, E, decrease of the barrier value)
    history: list = field(default_factory=list, repr=False)

    @property
    def cost(self):
        return self.cost_pA + self.cost_vA


def _free_mask(prob, cfg):
    n = prob.zp.size
    k = min(cfg.active_dims, n)
    mask = np.zeros(prob.dim, bool)
    mask[n - k:n] = True
    if prob.with_velocity:
        mask[-1] = True
    return mask


def objective_and_gradient(q, prob, ctx=None):
    """Attention cost ``q_p^T q_p (+ q_v^2 + qhat^2)`` and its gradient."""
    n = prob.zp.size
    qp = q[:n]
    value = float(qp @ qp)
    grad = np.zeros_like(q)
    grad[:n] = 2.0 * qp
    if prob.with_velocity and ctx is not None:
        cv, dcv, _ = coordination_cost_and_gradient(q[-1], ctx)
        value += cv
        grad[-1] = dcv
    return value, grad


class _BarrierPoint:
    """Barrier objective pieces at one interior point, kept apart so that
    differences between nearby points can be formed without cancellation."""

    __slots__ = ("q", "f", "E", "slack_e", "slack_q", "qhat", "value", "grad")

    def __init__(self, q, prob, ctx, t, free):
        slack_q = q[free] - prob.qfloor
        if np.any(slack_q <= 0):
            raise BarrierDomainError("attention entry at or below the floor")
        E = terminal_error(q, prob)
        slack_e = prob.eps**2 - E * E
        if slack_e <= 0:
            raise BarrierDomainError(f"|E| = {abs(E):.3g} is not below eps = {prob.eps:g}")
        n = prob.zp.size
        grad = np.zeros_like(q)
        grad[:n] = 2.0 * q[:n]
        f = float(q[:n] @ q[:n])
        self.qhat = 0.0
        if prob.with_velocity and ctx is not None:
            cv, dcv, self.qhat = coordination_cost_and_gradient(q[-1], ctx)
            f += cv
            grad[-1] = dcv
        grad += (2.0 * E / slack_e) * grad_terminal_error(q, prob) / t
        grad[free] -= 1.0 / (slack_q * t)
        grad[~free] = 0.0
        self.q, self.f, self.E = q, f, E
        self.slack_e, self.slack_q = slack_e, slack_q
        self.value = f - (np.log(slack_e) + np.log(slack_q).sum()) / t
        self.grad = grad

    def decrease_to(self, other, prob, t):
        """``value(other) - value(self)`` accurate to the size of the difference."""
        n = prob.zp.size
        a, b = self.q, other.q
        df = float((b[:n] - a[:n]) @ (b[:n] + a[:n]))
        if prob.with_velocity:
            df += (b[-1] - a[-1]) * (b[-1] + a[-1])
            df += (other.qhat - self.qhat) * (other.qhat + self.qhat)
        d_slack_e = (self.E - other.E) * (self.E + other.E)
        dlog = np.log1p(d_slack_e / self.slack_e)
        dlog += np.log1p((other.slack_q - self.slack_q) / self.slack_q).sum()
        return df - dlog / t


def barrier_objective_and_gradient(point, prob, ctx, t, free=None):
    """Barrier objective ``f - (1/t) [log(eps^2 - E^2) + sum log(q_i - qfloor)]``.

    ``f`` is the attention cost (plus the coordination cost when ``ctx`` is
    given). The floor terms run over the ``free`` entries only (all by
    default). Raises :class:`BarrierDomainError` outside the strict interior.
    """
    q = np.asarray(point, float)
    if free is None:
        free = np.ones(q.size, bool)
    pt = _BarrierPoint(q, prob, ctx, t, free)
    return pt.value, pt.grad


def _escalate(prob, free, cfg):
    """Uniform attention on ``free`` entries, multiplied by 10 until strictly inside the margin."""
    level = cfg.qinit
    q = prob.floor_point()
    while level <= cfg.qmax * (1 + 1e-12):
        q = prob.floor_point()
        q[free] = level
        if abs(terminal_error(q, prob)) < prob.eps:
            return q
        level *= 10.0
    raise InfeasibleTaskError(
        f"miss distance {prob.zpN:.4g} m cannot be brought within {prob.eps:g} m "
        f"with attention up to {cfg.qmax:g}",
        attempt=q,
    )


def initial_feasible_point(prob, cfg=SolverConfig()):
    """Floor point if it already hits, else a uniform attention escalated by 10x.

    Raises :class:`InfeasibleTaskError` once ``cfg.qmax`` is exceeded.
    """
    floor = prob.floor_point()
    if abs(terminal_error(floor, prob)) <= prob.eps:
        return floor
    return _escalate(prob, _free_mask(prob, cfg), cfg)


def _interior_start(prob, free, cfg):
    """A strictly interior starting point for the barrier iterations."""
    q = initial_feasible_point(prob, cfg)
    if _is_interior(q, prob, free):
        return q
    # the floor point hits, but the floor barrier needs free entries above it
    q = q.copy()
    q[free] = 2.0 * prob.qfloor
    if _is_interior(q, prob, free):
        return q
    return _escalate(prob, free, cfg)


def _is_interior(q, prob, free):
    if np.any(q[free] <= prob.qfloor):
        return False
    return abs(terminal_error(q, prob)) < prob.eps


def _descend(q, prob, ctx, t, free, cfg, history):
    """Quasi-Newton descent with backtracking on the barrier objective at weight ``t``.

    The search direction is ``-H g`` with ``H`` a BFGS inverse-Hessian estimate
    over the free entries (reset each call). Steps are halved until the trial
    point is strictly interior and the objective decreases; after a success
    the next trial step grows by ``step_grow``.
    """
    cur = _BarrierPoint(q, prob, ctx, t, free)
    idx = np.flatnonzero(free)
    H = np.eye(idx.size)
    step = 1.0
    flat = 0
    for iterations in range(1, cfg.max_inner + 1):
        g = cur.grad[idx]
        if np.linalg.norm(g) < cfg.grad_tol * (1.0 + np.linalg.norm(cur.q)):
            return cur.q, cur.value, iterations - 1, True
        direction = -H @ g
        slope = g @ direction
        if slope >= 0:
            H = np.eye(idx.size)
            direction, slope = -g, -(g @ g)
        steepest = np.array_equal(H, np.eye(idx.size))
        while True:
            trial = cur.q.copy()
            trial[idx] += step * direction
            if _is_interior(trial, prob, free):
                nxt = _BarrierPoint(trial, prob, ctx, t, free)
                if cur.decrease_to(nxt, prob, t) < 1e-4 * step * slope:
                    break
            step *= 0.5
            if step < cfg.step_min:
                break
        if step < cfg.step_min:
            if steepest:
                # no representable step decreases the objective: stationary to precision
                return cur.q, cur.value, iterations, True
            H = np.eye(idx.size)
            step = 1.0
            continue
        s = nxt.q[idx] - cur.q[idx]
        y = nxt.grad[idx] - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            V = np.eye(idx.size) - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
        gain = -cur.decrease_to(nxt, prob, t)
        flat = flat + 1 if gain <= cfg.ftol * (1.0 + abs(cur.value)) else 0
        cur = nxt
        history.append((t, cur.value, cur.E, gain))
        if flat >= cfg.stall_window:
            # the objective no longer moves at working precision
            return cur.q, cur.value, iterations, True
        step = min(max(step * cfg.step_grow, 1.0), cfg.step_max)
    return cur.q, cur.value, cfg.max_inner, False


def _solve(prob, ctx, cfg):
    free = _free_mask(prob, cfg)
    floor = prob.floor_point()
    E0 = terminal_error(floor, prob)
    if not prob.with_velocity and abs(E0) <= prob.eps:
        # zero attention already hits the ball: the global optimum
        return _package(floor, prob, ctx, E0, converged=True, iterations=0, history=[])

    q = _interior_start(prob, free, cfg)
    t = cfg.t0
    total = 0
    converged = False
    history = []
    for _ in range(cfg.outer_rounds):
        q, _, iters, converged = _descend(q, prob, ctx, t, free, cfg, history)
        total += iters
        t *= cfg.growth
    E = terminal_error(q, prob)
    return _package(q, prob, ctx, E, converged=converged, iterations=total, history=history)


def _package(q, prob, ctx, E, converged, iterations, history):
    n = prob.zp.size
    qp = q[:n].copy()
    qv = float(q[-1]) if prob.with_velocity else 0.0
    qhat = 0.0
    cost_vA = 0.0
    if prob.with_velocity and ctx is not None:
        cost_vA, _, qhat = coordination_cost_and_gradient(qv, ctx)
    return AttentionSolution(
        q=np.asarray(q, float).copy(),
        qp_full=qp,
        qvRN=qv,
        qhat_pL=qhat,
        cost_pA=float(qp @ qp),
        cost_vA=float(cost_vA),
        E=float(E),
        feasible=abs(E) <= prob.eps + 1e-6,
        converged=converged,
        iterations=iterations,
        history=history,
    )


def solve_tracking(prob, cfg=SolverConfig()):
    """Minimum attention ``q_p^T q_p`` that hits the ball within ``eps``."""
    if prob.with_velocity:
        raise ValueError("tracking problem must not carry a terminal velocity entry")
    return _solve(prob, None, cfg)


def solve_full(prob, ctx, cfg=SolverConfig()):
    """Tracking plus coordination: ``q_p^T q_p + q_v^2 + qhat(q_v)^2``."""
    if not prob.with_velocity:
        raise ValueError("full problem needs a terminal velocity target (zvN)")
    return _solve(prob, ctx, cfg)
