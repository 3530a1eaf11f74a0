"""
The lower layer: tracking a ball with an attention vector
=========================================================

A paddle is a damped double integrator. Over a window of ``N`` steps its
whole trajectory is a linear function of the initial state and the input
sequence, so tracking the ball with penalties ``q`` is a least-squares
problem with a closed-form answer. Raising ``q`` at a step pulls the paddle
toward the ball at that step.
"""

from pathlib import Path

import numpy as np

from bimanual_pong.lq_tracker import PenaltyVector, TrackingTarget, closed_form_controls
from bimanual_pong.svgplot import line_plot
from bimanual_pong.trajectory_algebra import build_rollout, discretize_paddle, position_indices

OUT = Path("demo-out")
OUT.mkdir(exist_ok=True)

# %%
# Build the plant and the stacked rollout for a ten-step window.
N = 10
A = discretize_paddle(1.0)
roll = build_rollout(A, np.array([1.0, 0.0]), N)
print("A =\n", A)
print("Bbold shape:", roll.Bbold.shape)

# %%
# The ball climbs from the paddle's height at 0.06 m per step.
t = np.arange(2, N + 1)
ball = 0.06 * (t - 1)
xd = np.zeros(2 * (N - 1))
xd[position_indices(N)] = ball
x1 = np.zeros(2)
target = TrackingTarget.from_rollout(xd, roll, x1)

# %%
# Three attention profiles: none, only the last step, and uniform.
profiles = {"none": np.zeros(N - 1), "last step": np.r_[np.zeros(N - 2), 5.0],
            "uniform": np.full(N - 1, 5.0)}
series = {"ball": (t, ball)}
for name, qp in profiles.items():
    q = np.zeros(2 * (N - 1))
    q[position_indices(N)] = qp
    u = closed_form_controls(target, PenaltyVector(q), roll)
    paddle = roll.trajectory(x1, u)[position_indices(N)]
    series[name] = (t, paddle)
    print(f"{name:>10}: miss at collision {ball[-1] - paddle[-1]:+.4f} m, "
          f"control cost {u @ u:.4f}")

(OUT / "lower_controller.svg").write_text(
    line_plot(series, "Paddle position under three attention profiles", "step t", "height (m)"),
    encoding="utf-8")
