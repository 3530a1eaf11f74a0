"""Ball flight and paddle-ball collision maps.

Ball state is ``(v_vert, v_horiz, p_vert, p_horiz)``; velocities are in
metres per step.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BallState:
    v_vert: float
    v_horiz: float
    p_vert: float
    p_horiz: float

    def as_array(self):
        return np.array([self.v_vert, self.v_horiz, self.p_vert, self.p_horiz])

    @classmethod
    def from_array(cls, xi):
        v_vert, v_horiz, p_vert, p_horiz = (float(x) for x in xi)
        return cls(v_vert, v_horiz, p_vert, p_horiz)


@dataclass(frozen=True)
class CollisionEvent:
    side: str
    step_index: int
    pre_ball: BallState
    paddle_velocity: float
    post_ball: BallState


def paddle_step(A, B, x, u):
    """One step of ``x[t+1] = A x[t] + B u[t]``."""
    return np.asarray(A, float) @ np.asarray(x, float) + np.asarray(B, float).reshape(2) * u


def collide(ball, paddle_v):
    """Collision map: the paddle velocity adds to the vertical velocity,
    the horizontal velocity flips, and position advances by the new velocity.
    """
    v_vert = ball.v_vert + paddle_v
    v_horiz = -ball.v_horiz
    return BallState(v_vert, v_horiz, ball.p_vert + v_vert, ball.p_horiz + v_horiz)


def propagate_to_next_collision(ball, steps):
    """Free flight for ``steps`` steps: velocity unchanged, position += steps * velocity."""
    return BallState(
        ball.v_vert,
        ball.v_horiz,
        ball.p_vert + steps * ball.v_vert,
        ball.p_horiz + steps * ball.v_horiz,
    )


def flight_positions(ball, N):
    """Vertical ball positions at ``t = 2..N`` when ``ball`` is the state at ``t = 1``."""
    t = np.arange(2, N + 1)
    return ball.p_vert + (t - 1) * ball.v_vert
