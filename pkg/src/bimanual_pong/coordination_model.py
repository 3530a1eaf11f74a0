"""Inter-paddle coordination quantities.

The hitting ("active") paddle can steer the ball by its velocity at the
collision. Its terminal velocity is a blend ``mu * v_d + (1 - mu) * v_o`` of
the target velocity ``v_d`` (ball lands on the opposite paddle) and the free
collision velocity ``v_o``. The opposite paddle's attention one collision
ahead is estimated in closed form from the resulting landing miss distance.
"""

from dataclasses import dataclass

import numpy as np

from .attention_model import scalar_attention_for_error


@dataclass(frozen=True)
class CoordinationContext:
    """Scalars describing the coordination trade-off at one collision.

    ``gamma_opp = r_opp / kp_opp`` and ``gamma_act = r_act / kv_act`` where
    ``kp_opp`` is the squared norm of the opposite paddle's terminal position
    row and ``kv_act`` that of the active paddle's terminal velocity row.
    ``kappa1 + N * kappa2`` is the landing miss distance if the active paddle
    applied no input.
    """

    gamma_opp: float
    gamma_act: float
    kappa1: float
    kappa2: float
    eps: float
    N: int
    v_o: float = 0.0
    v_d: float = 0.0
    centering: float = 1.0

    def __post_init__(self):
        if not (self.gamma_opp > 0 and self.gamma_act > 0):
            raise ValueError("gamma ratios must be positive")
        if not self.eps > 0:
            raise ValueError("coordination margin must be positive")

    @property
    def free_miss(self):
        return self.kappa1 + self.N * self.kappa2

    @classmethod
    def build(cls, *, ball_at_collision, x_opp_N, v_o, geom_act, geom_opp, r_act, r_opp,
              eps, N, centering=1.0):
        """Assemble the context for one collision from plant geometry and ball state."""
        kp_opp = float(geom_opp.bpN @ geom_opp.bpN)
        kv_act = float(geom_act.bvN @ geom_act.bvN)
        aim = centering * x_opp_N
        return cls(
            gamma_opp=r_opp / kp_opp,
            gamma_act=r_act / kv_act,
            kappa1=ball_at_collision.p_vert - aim,
            kappa2=ball_at_collision.v_vert + v_o,
            eps=eps,
            N=N,
            v_o=v_o,
            v_d=target_velocity(x_opp_N, ball_at_collision, N, centering),
            centering=centering,
        )


@dataclass(frozen=True)
class CoordinationSolution:
    qvRN: float
    qhat_pL: float
    mu: float


def free_collision_velocity(A, x1, N):
    """Velocity component of ``A^(N-1) x1``: the paddle's collision velocity with no input."""
    x = np.linalg.matrix_power(np.asarray(A, float), N - 1) @ np.asarray(x1, float)
    return float(x[0])


def target_velocity(x_opp_N, ball_at_collision, N, centering=1.0):
    """Paddle velocity at collision that sends the ball to ``centering * x_opp_N``."""
    if not 0.0 <= centering <= 1.0:
        raise ValueError(f"centering fraction must lie in [0, 1], got {centering}")
    return (centering * x_opp_N - ball_at_collision.p_vert) / N - ball_at_collision.v_vert


def interpolation_weight(qv, gamma_act):
    """``mu = qv / (gamma_act + qv)``, in ``[0, 1)``."""
    return qv / (gamma_act + qv)


def interpolation_weight_derivative(qv, gamma_act):
    return gamma_act / (gamma_act + qv) ** 2


def collision_velocity(mu, ctx):
    return mu * ctx.v_d + (1.0 - mu) * ctx.v_o


def opposite_attention_estimate(mu, ctx):
    """Single-dimension attention the opposite paddle needs, clamped at zero.

    The landing miss distance is ``(1 - mu) * (kappa1 + N * kappa2)``; the
    estimate inverts ``z / (1 + q / gamma) = eps``. The sign of the miss is
    irrelevant, so its magnitude is used.
    """
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")
    miss = (1.0 - mu) * ctx.free_miss
    return max(0.0, scalar_attention_for_error(miss, ctx.eps, ctx.gamma_opp))


def coordination_cost_and_gradient(qv, ctx):
    """``qv^2 + qhat(qv)^2`` and its derivative in ``qv``.

    The clamp at zero makes the second term continuously differentiable.
    """
    mu = interpolation_weight(qv, ctx.gamma_act)
    qhat = opposite_attention_estimate(mu, ctx)
    dqhat = 0.0
    if qhat > 0.0:
        dqhat = -ctx.gamma_opp * abs(ctx.free_miss) / ctx.eps * interpolation_weight_derivative(
            qv, ctx.gamma_act)
    return qv * qv + qhat * qhat, 2.0 * qv + 2.0 * qhat * dqhat, qhat
