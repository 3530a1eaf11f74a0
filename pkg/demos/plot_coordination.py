"""
Coordination: paying attention for the other hand
=================================================

The hitting paddle can also penalize its velocity at the collision. That
steers the return shot toward the opposite paddle and lowers the attention
that paddle will need. The trade-off is one-dimensional: the coordination
penalty ``q_v`` against the estimated opposite attention ``qhat(q_v)``.
"""

import numpy as np

from bimanual_pong.attention_model import TrackingProblem
from bimanual_pong.attention_solver import solve_full
from bimanual_pong.coordination_model import (
    CoordinationContext,
    coordination_cost_and_gradient,
    interpolation_weight,
)
from bimanual_pong.pong_dynamics import BallState
from bimanual_pong.trajectory_algebra import build_rollout, discretize_paddle, extract_geometry

geom = extract_geometry(build_rollout(discretize_paddle(1.0), np.array([1.0, 0.0]), 10))

# %%
# The ball arrives at the paddle's height moving up at 0.03 m per step; left
# alone it would land 0.3 m from the opposite paddle.
ball = BallState(0.03, 0.13, 0.0, 0.65)
ctx = CoordinationContext.build(ball_at_collision=ball, x_opp_N=0.0, v_o=0.0, geom_act=geom,
                                geom_opp=geom, r_act=1.0, r_opp=1.0, eps=0.01, N=10)
print(f"free landing miss {ctx.free_miss:.3f} m, target velocity {ctx.v_d:+.3f} m/step")

# %%
# Sweep the coordination penalty.
for qv in (0.0, 0.3, 1.0, 1.28, 3.0, 10.0):
    cost, _, qhat = coordination_cost_and_gradient(qv, ctx)
    print(f"q_v {qv:5.2f}: mu {interpolation_weight(qv, ctx.gamma_act):.3f}, "
          f"opposite attention {qhat:7.3f}, coordination cost {cost:7.3f}")

# %%
# The full solver finds the same balance while still hitting the ball.
prob = TrackingProblem(zp=np.zeros(9), geom=geom, zvN=ctx.v_d)
sol = solve_full(prob, ctx)
print(f"solver: q_v {sol.qvRN:.3f}, opposite attention {sol.qhat_pL:.3f}, miss {sol.E:+.4f} m")
