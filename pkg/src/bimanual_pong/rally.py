"""Multi-collision pong rally driven by the two-layer controller.

Timeline: collisions happen every ``N`` steps, alternating sides. The
active paddle's window runs from ``t = 1`` (the step after the opposite
collision) to ``t = N`` (its own collision). At ``t = 1`` the whole ball
flight is known, so the upper layer picks the attention, the lower layer
computes the input sequence and the paddle is rolled forward. The idle
paddle receives zero input.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .attention_model import QFLOOR, TrackingProblem, terminal_error
from .attention_solver import (InfeasibleTaskError, SolverConfig, solve_full,
                               solve_tracking)
from .coordination_model import CoordinationContext, free_collision_velocity
from .lq_tracker import PenaltyVector, TrackingTarget, closed_form_controls
from .pong_dynamics import (BallState, collide, flight_positions,
                            propagate_to_next_collision)
from .trajectory_algebra import (build_rollout, discretize_paddle,
                                 extract_geometry, position_indices)

logger = logging.getLogger(__name__)

KINDS = ("none", "coordination", "handedness", "centering")
B_INPUT = np.array([1.0, 0.0])

# Named presets. Coordination margins and damping values are repository
# choices; the rally initial conditions are shared by all of them.
SCENARIOS = {
    "none": dict(kind="none"),
    "coordination-weak": dict(kind="coordination", coord_eps=0.06),
    "coordination-strong": dict(kind="coordination", coord_eps=0.01),
    "handedness-low": dict(kind="handedness", coord_eps=0.03, damping_left=2.0),
    "handedness-high": dict(kind="handedness", coord_eps=0.03, damping_left=4.0),
    "centering-low": dict(kind="centering", coord_eps=0.015, centering=0.73),
    "centering-high": dict(kind="centering", coord_eps=0.015, centering=0.55),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Rally parameters. Initial conditions are repository defaults."""

    kind: str = "coordination"
    collisions: Optional[int] = None  # 12 for kind "none", 40 otherwise
    N: int = 10
    r: float = 1.0
    eps: float = 0.03  # tracking margin of both paddles (m)
    coord_eps: float = 0.01  # margin inside the opposite-attention estimate
    damping_left: float = 1.0
    damping_right: float = 1.0
    centering: float = 1.0
    rail: float = 0.65
    ball_speed: float = 0.13  # horizontal m/step
    ball_v_vert: float = 0.06
    ball_p_vert: float = 0.0
    paddle_left: tuple = (0.0, 0.0)  # (velocity, position)
    paddle_right: tuple = (0.0, 0.0)
    attention_capacity: float = 100.0  # largest uniform attention tried before giving up
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}, expected one of {KINDS}")
        if self.collisions is None:
            object.__setattr__(self, "collisions", 12 if self.kind == "none" else 40)
        if self.collisions < 1:
            raise ValueError("collisions must be >= 1")
        if not (self.eps > 0 and self.coord_eps > 0):
            raise ValueError("margins must be positive")
        if self.damping_left < 0 or self.damping_right < 0:
            raise ValueError("damping must be nonnegative")
        if not 0.0 <= self.centering <= 1.0:
            raise ValueError("centering fraction must lie in [0, 1]")
        if not self.attention_capacity > 0:
            raise ValueError("attention capacity must be positive")
        for name in ("paddle_left", "paddle_right"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @classmethod
    def preset(cls, name, **overrides):
        """Config for a named scenario from :data:`SCENARIOS`, with field overrides."""
        if name not in SCENARIOS:
            raise ValueError(f"unknown scenario {name!r}, expected one of {sorted(SCENARIOS)}")
        return cls(**{**SCENARIOS[name], **overrides})

    @property
    def solver_config(self):
        """Solver settings with the escalation ceiling set to the attention capacity."""
        return replace(self.solver, qmax=self.attention_capacity)

    @property
    def coordinated(self):
        return self.kind != "none"

    def initial_ball(self):
        """Ball one step after bouncing off the left rail, heading right."""
        return BallState(self.ball_v_vert, self.ball_speed, self.ball_p_vert,
                         -self.rail + self.ball_speed)


@dataclass(frozen=True)
class Plant:
    A: np.ndarray
    roll: object
    geom: object
    damping: float

    @classmethod
    def from_damping(cls, damping, N):
        A = discretize_paddle(damping)
        roll = build_rollout(A, B_INPUT, N)
        return cls(A=A, roll=roll, geom=extract_geometry(roll), damping=damping)


@dataclass
class CollisionRecord:
    index: int
    side: str
    attention_cost: float
    coord_cost: float
    control_cost: float
    delta_xp: float
    E: float
    ball: BallState  # post-collision
    ball_at_collision: BallState
    paddle_velocity: float
    iterations: int
    feasible: bool
    converged: bool
    q: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    qhat_opp: float = 0.0
    r: float = 1.0


@dataclass
class RallyLog:
    records: list
    termination: str  # "completed" or "infeasible at i"
    config: Optional[ScenarioConfig] = None

    def series(self, name, side=None):
        return np.array([getattr(rec, name) for rec in self.records
                         if side is None or rec.side == side])

    @property
    def completed(self):
        return self.termination == "completed"


@dataclass(frozen=True)
class RallyState:
    """Everything at ``t = 1`` of the next active window."""

    ball: BallState
    paddles: dict  # side -> np.ndarray [velocity, position]
    index: int = 1

    @property
    def side(self):
        return "right" if self.ball.v_horiz > 0 else "left"


def initial_state(cfg):
    return RallyState(
        ball=cfg.initial_ball(),
        paddles={"left": np.array(cfg.paddle_left, float),
                 "right": np.array(cfg.paddle_right, float)},
    )


def plants_for(cfg):
    return {"left": Plant.from_damping(cfg.damping_left, cfg.N),
            "right": Plant.from_damping(cfg.damping_right, cfg.N)}


def _other(side):
    return "left" if side == "right" else "right"


def build_problems(state, cfg, plants):
    """Tracking problem (and coordination context) for the active side at ``state``."""
    N = cfg.N
    side = state.side
    act, opp = plants[side], plants[_other(side)]
    x1 = state.paddles[side]
    ball_N = propagate_to_next_collision(state.ball, N - 1)
    positions = flight_positions(state.ball, N)

    if not cfg.coordinated:
        prob = TrackingProblem.from_trajectory(
            positions, x1, act.roll, act.geom, r=cfg.r, eps=cfg.eps, qfloor=QFLOOR)
        return prob, None

    x_opp_N = (np.linalg.matrix_power(opp.A, N - 1) @ state.paddles[_other(side)])[1]
    v_o = free_collision_velocity(act.A, x1, N)
    ctx = CoordinationContext.build(
        ball_at_collision=ball_N, x_opp_N=x_opp_N, v_o=v_o,
        geom_act=act.geom, geom_opp=opp.geom, r_act=cfg.r, r_opp=cfg.r,
        eps=cfg.coord_eps, N=N, centering=cfg.centering)
    prob = TrackingProblem.from_trajectory(
        positions, x1, act.roll, act.geom, v_target=ctx.v_d,
        r=cfg.r, eps=cfg.eps, qfloor=QFLOOR)
    return prob, ctx


def penalty_from_attention(q, prob, N, r):
    """Interleaved penalty vector: position entries from ``q``, terminal velocity if present."""
    full = np.zeros(2 * (N - 1))
    full[position_indices(N)] = q[:N - 1]
    if prob.with_velocity:
        full[-2] = q[-1]
    return PenaltyVector(full, r)


def desired_trajectory(prob, roll, x1):
    """Stacked ``xd``: ball positions, zero velocities, terminal velocity target if any."""
    free = roll.Abold @ np.asarray(x1, float)
    xd = np.zeros(2 * (roll.N - 1))
    xd[position_indices(roll.N)] = prob.zp + free[position_indices(roll.N)]
    if prob.with_velocity:
        xd[-2] = prob.zvN + free[-2]
    return xd


def _realize(state, cfg, plants, prob, q):
    """Roll the active paddle under attention ``q`` and apply the collision."""
    N = cfg.N
    side = state.side
    act = plants[side]
    x1 = state.paddles[side]
    penalties = penalty_from_attention(q, prob, N, cfg.r)
    target = TrackingTarget.from_rollout(desired_trajectory(prob, act.roll, x1), act.roll, x1)
    u = closed_form_controls(target, penalties, act.roll)
    xN = act.roll.trajectory(x1, u)[-2:]
    ball_N = propagate_to_next_collision(state.ball, N - 1)
    post = collide(ball_N, xN[0])
    opp = _other(side)
    next_paddles = {
        side: act.A @ xN,
        opp: np.linalg.matrix_power(plants[opp].A, N) @ state.paddles[opp],
    }
    return u, xN, ball_N, post, next_paddles


def step_collision(state, cfg, plants=None):
    """Solve, control, collide. Returns ``(record, next_state)``.

    Raises :class:`InfeasibleTaskError` when the ball cannot be reached within
    the attention capacity; the exception's ``record`` attribute then holds
    the collision as played with the largest attention that was tried.
    """
    plants = plants or plants_for(cfg)
    side = state.side
    x1 = state.paddles[side]
    prob, ctx = build_problems(state, cfg, plants)
    solver = cfg.solver_config

    try:
        sol = solve_tracking(prob, solver) if ctx is None else solve_full(prob, ctx, solver)
    except InfeasibleTaskError as exc:
        q = exc.attempt
        u, xN, ball_N, post, _ = _realize(state, cfg, plants, prob, q)
        qp = q[:prob.zp.size]
        exc.record = CollisionRecord(
            index=state.index, side=side,
            attention_cost=float(qp @ qp),
            coord_cost=float(q[-1] ** 2) if prob.with_velocity else 0.0,
            control_cost=float(cfg.r * u @ u),
            delta_xp=float(xN[1] - x1[1]),
            E=float(ball_N.p_vert - xN[1]),
            ball=post, ball_at_collision=ball_N, paddle_velocity=float(xN[0]),
            iterations=0, feasible=False, converged=False, q=q, u=u, r=cfg.r,
        )
        raise

    u, xN, ball_N, post, next_paddles = _realize(state, cfg, plants, prob, sol.q)
    E = ball_N.p_vert - xN[1]
    record = CollisionRecord(
        index=state.index,
        side=side,
        attention_cost=sol.cost_pA,
        coord_cost=sol.qvRN**2,
        control_cost=float(cfg.r * u @ u),
        delta_xp=float(xN[1] - x1[1]),
        E=float(E),
        ball=post,
        ball_at_collision=ball_N,
        paddle_velocity=float(xN[0]),
        iterations=sol.iterations,
        feasible=abs(E) <= cfg.eps + 1e-6,
        converged=sol.converged,
        q=sol.q,
        u=u,
        qhat_opp=sol.qhat_pL,
        r=cfg.r,
    )
    return record, RallyState(ball=post, paddles=next_paddles, index=state.index + 1)


def run_rally(cfg):
    """Alternate collisions until ``cfg.collisions`` or an infeasible task.

    An infeasible collision is still logged (with ``feasible=False``) as the
    last record.
    """
    plants = plants_for(cfg)
    state = initial_state(cfg)
    records = []
    termination = "completed"
    for _ in range(cfg.collisions):
        try:
            rec, state = step_collision(state, cfg, plants)
        except InfeasibleTaskError as exc:
            records.append(exc.record)
            termination = f"infeasible at {state.index}"
            logger.info("rally stopped: %s", exc)
            break
        records.append(rec)
        if not rec.feasible:
            termination = f"infeasible at {rec.index}"
            break
    log = RallyLog(records=records, termination=termination, config=cfg)
    for entry in rank_one_audit(log):
        if entry.within_factor_2 is False:
            logger.debug("rank-one estimate off at i=%d: predicted %.3g, realized %.3g",
                         entry.index, entry.predicted, entry.realized)
    return log


@dataclass(frozen=True)
class CostTotals:
    attention: float
    control: float
    coordination: float
    collisions: int


def summarize(log, count=12):
    """Attention, control and coordination costs summed over the first ``count`` collisions.

    Only collisions that were actually hit are counted; the infeasible
    attempt that ends a rally is left out.
    """
    recs = [r for r in log.records[:count] if r.feasible]
    return CostTotals(
        attention=float(sum(r.attention_cost for r in recs)),
        control=float(sum(r.control_cost for r in recs)),
        coordination=float(sum(r.coord_cost for r in recs)),
        collisions=len(recs),
    )


STEADY_KINDS = ("converged-to-zero", "drift", "diverging", "oscillating-decay")


@dataclass(frozen=True)
class SteadyState:
    kind: str
    zero_crossing_rate: float
    tail_delta_xp: float  # mean |delta_xp| over the last few collisions
    attention_ratio: float  # last attention over peak attention


def sign_changes(values, deadband=0.0):
    """Indices where ``values`` takes a new sign, ignoring entries within ``deadband`` of zero."""
    changes = []
    last = 0.0
    for i, v in enumerate(values):
        if abs(v) <= deadband:
            continue
        if last and np.sign(v) != last:
            changes.append(i)
        last = np.sign(v)
    return changes


def zero_crossing_rate(values, deadband=0.0):
    """Sign changes per collision.

    With two or more changes this is the inverse of their mean spacing, which
    does not depend on where the window happens to start. With fewer it is the
    plain count divided by the number of intervals.
    """
    changes = sign_changes(values, deadband)
    if len(changes) >= 2:
        return (len(changes) - 1) / (changes[-1] - changes[0])
    return len(changes) / max(len(values) - 1, 1)


def detect_steady_state(log, window=30, zero_tol=2e-3, deadband=1e-3):
    """Classify the tail of a rally.

    Over the last ``window`` collisions:

    * ``diverging``: the rally ended infeasible or attention rises every collision;
    * ``oscillating-decay``: ``delta_xp`` changes sign at least twice (ignoring
      values within ``deadband``) and the second half of the window swings
      less than the first;
    * ``converged-to-zero``: the last few ``|delta_xp|`` average below ``zero_tol``;
    * ``drift``: otherwise, the paddles keep moving by a visible amount.
    """
    n = len(log.records)
    if not 2 <= window <= n:
        raise ValueError(f"window must lie in [2, {n}], got {window}")
    att = log.series("attention_cost")
    dx = log.series("delta_xp")[-window:]
    k = max(3, window // 5)
    tail = np.abs(dx[-k:])
    peak = att.max()
    ratio = float(att[-1] / peak) if peak > 0 else 0.0
    crossings = len(sign_changes(dx, deadband))
    rate = zero_crossing_rate(dx, deadband)

    def result(kind):
        return SteadyState(kind, rate, float(tail.mean()), ratio)

    if not log.completed or np.all(np.diff(att[-window:]) > 0):
        return result("diverging")
    half = window // 2
    if crossings >= 2 and np.abs(dx[half:]).max() < np.abs(dx[:half]).max():
        return result("oscillating-decay")
    if tail.mean() <= zero_tol:
        return result("converged-to-zero")
    return result("drift")


@dataclass(frozen=True)
class AuditEntry:
    index: int
    predicted: float  # qhat^2 from the previous collision
    realized: float  # attention cost actually spent
    within_factor_2: Optional[bool]  # None when the prediction is zero


def rank_one_audit(log):
    """Compare each collision's attention with the estimate made one collision earlier."""
    out = []
    for prev, rec in zip(log.records, log.records[1:]):
        predicted = prev.qhat_opp**2
        if predicted > 0:
            ok = bool(0.5 <= rec.attention_cost / predicted <= 2.0)
        else:
            ok = None
        out.append(AuditEntry(rec.index, predicted, rec.attention_cost, ok))
    return out
