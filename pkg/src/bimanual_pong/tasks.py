"""Single-collision tracking tasks used to study how attention spreads in time.

Both tasks start with the paddle at rest at height 0 and give the ball a
straight-line flight over the horizon.

* Easy: the ball sweeps up across the paddle's height and finishes 0.15 m
  above it. Tracking early samples would pull the paddle the wrong way, so
  attention sits at the last step.
* Hard: the ball leaves from the paddle's height and climbs away, ending
  0.54 m off. The paddle needs a long run-up, so attention starts early.
"""

import numpy as np

from .attention_model import TrackingProblem
from .trajectory_algebra import build_rollout, discretize_paddle, extract_geometry

B_INPUT = np.array([1.0, 0.0])


def line_task(p_start, slope, damping=1.0, N=10, eps=0.03, r=1.0, x1=(0.0, 0.0)):
    """Tracking problem for a ball at ``p_start + slope * (t - 1)``, ``t = 2..N``."""
    roll = build_rollout(discretize_paddle(damping), B_INPUT, N)
    geom = extract_geometry(roll)
    t = np.arange(2, N + 1)
    positions = p_start + slope * (t - 1)
    return TrackingProblem.from_trajectory(positions, np.asarray(x1, float), roll, geom,
                                           r=r, eps=eps)


def easy_task(damping=1.0, N=10):
    return line_task(-0.3, 0.05, damping=damping, N=N)


def hard_task(damping=1.0, N=10):
    return line_task(0.0, 0.06, damping=damping, N=N)


def attention_spread(q):
    """Standard deviation of the time index, weighting step ``t = 2..N`` by ``q[t]``.

    A large value means attention is spread over a long window before the
    collision; a value near zero means it is concentrated in one step.
    """
    q = np.asarray(q, float)
    if np.any(q < 0) or q.sum() <= 0:
        raise ValueError("attention weights must be nonnegative and not all zero")
    t = np.arange(2, q.size + 2)
    w = q / q.sum()
    mean = w @ t
    return float(np.sqrt(w @ (t - mean) ** 2))
