"""Terminal hitting error as a function of the attention vector.

For a paddle tracking the ball with position penalties ``q`` (optionally
extended by a terminal velocity penalty), the vertical miss distance at the
collision step is

    E(q) = z_N - b^T (r I + U^T Q U)^{-1} U^T Z q

where ``U`` holds the rows of ``Bbold`` that carry a penalty and ``b`` is the
terminal position row. The gradient is assembled from the Woodbury form

    (r I + U^T Q U)^{-1} = r^{-1} I - r^{-2} U^T C^{-1} U,   C = Q^{-1} + r^{-1} P,
    P = U U^T.

``C^{-1}`` is applied as ``S (I + S P S / r)^{-1} S`` with ``S = diag(sqrt(q))``
which is the same matrix but never forms ``Q^{-1}``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular

from .trajectory_algebra import GeometryRows, position_indices

QFLOOR = 1e-9


class SingularAttentionError(ValueError):
    """An attention entry fell below the floor that keeps ``Q`` invertible."""


@dataclass(frozen=True)
class TrackingProblem:
    """Everything needed to evaluate ``E`` and its gradient.

    ``zp`` are the position residuals at ``t = 2..N``. When ``zvN`` is given
    the attention vector gains a trailing terminal-velocity entry.
    """

    zp: np.ndarray
    geom: GeometryRows
    r: float = 1.0
    eps: float = 0.03
    qfloor: float = QFLOOR
    zvN: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "zp", np.asarray(self.zp, float))
        if not (self.eps > 0 and self.r > 0 and self.qfloor > 0):
            raise ValueError("eps, r and qfloor must be positive")

    @classmethod
    def from_trajectory(cls, ball_positions, x1, roll, geom, v_target=None, **kw):
        """Residuals of the ball flight against the paddle's free response."""
        free = roll.Abold @ np.asarray(x1, float)
        zp = np.asarray(ball_positions, float) - free[position_indices(roll.N)]
        zvN = None if v_target is None else float(v_target - free[-2])
        return cls(zp=zp, geom=geom, zvN=zvN, **kw)

    @property
    def zpN(self):
        return float(self.zp[-1])

    @property
    def with_velocity(self):
        return self.zvN is not None

    @property
    def dim(self):
        return self.zp.size + (1 if self.with_velocity else 0)

    @property
    def U(self):
        if self.with_velocity:
            return np.vstack([self.geom.Bp, self.geom.bvN])
        return self.geom.Bp

    @property
    def z(self):
        if self.with_velocity:
            return np.append(self.zp, self.zvN)
        return self.zp

    @property
    def P(self):
        if self.with_velocity:
            U = self.U
            return U @ U.T
        return self.geom.P

    @property
    def k0(self):
        return self.U @ self.geom.bpN

    def floor_point(self):
        return np.full(self.dim, self.qfloor)


def _check(q, prob):
    q = np.asarray(q, float)
    if q.shape != (prob.dim,):
        raise ValueError(f"attention vector must have shape ({prob.dim},), got {q.shape}")
    # tolerate the rounding of qfloor * (1 - tiny)
    if np.any(q < prob.qfloor * (1 - 1e-12)):
        raise SingularAttentionError(
            f"attention entries must be >= {prob.qfloor:g}, min was {q.min():g}"
        )
    return q


def controls(q, prob):
    """Closed-form controls ``(r I + U^T Q U)^{-1} U^T Z q`` for this problem."""
    q = np.asarray(q, float)
    U = prob.U
    M = prob.r * np.eye(U.shape[1]) + U.T @ (q[:, None] * U)
    return cho_solve(cho_factor(M), U.T @ (prob.z * q))


def terminal_error(q, prob):
    """Vertical miss distance ``E`` at the collision step (direct form)."""
    q = _check(q, prob)
    return prob.zpN - float(prob.geom.bpN @ controls(q, prob))


def _c_inverse(q, P, r):
    s = np.sqrt(q)
    G = np.eye(q.size) + (s[:, None] * P * s[None, :]) / r
    return s[:, None] * cho_solve(cho_factor(G, lower=True), np.diag(s))


def woodbury_inverse(q, prob):
    """``(r I + U^T Q U)^{-1}`` through ``r^{-1} I - r^{-2} U^T C^{-1} U``."""
    q = _check(q, prob)
    U, r = prob.U, prob.r
    SU = np.sqrt(q)[:, None] * U
    G = np.eye(q.size) + (SU @ SU.T) / r
    # U^T C^{-1} U = X^T X with X = L^{-1} S U, G = L L^T; the Gram form keeps it symmetric
    X = solve_triangular(cholesky(G, lower=True), SU, lower=True)
    return (np.eye(U.shape[1]) - (X.T @ X) / r) / r


def grad_terminal_error(q, prob):
    """Analytic ``dE/dq``.

    With ``k0 = U b``, ``k1 = Z q`` and ``K = C^{-1} P``::

        dE/dq = -r^{-1} Z k0 + r^{-2} Z K^T k0 + r^{-2} q^{-2} * (C^{-1} k0) * (K k1)

    where ``*`` is the elementwise product; the last term comes from
    ``d C / d q_i = -q_i^{-2} e_i e_i^T``.
    """
    q = _check(q, prob)
    r, z, P = prob.r, prob.z, prob.P
    k0 = prob.k0
    k1 = z * q
    Cinv = _c_inverse(q, P, r)
    Cinv_k0 = Cinv @ k0
    K_k1 = Cinv @ (P @ k1)
    third = (Cinv_k0 / q) * (K_k1 / q)
    return -z * k0 / r + z * (P @ Cinv_k0) / r**2 + third / r**2


def scalar_error(q, z, gamma):
    """One-dimensional miss distance ``z / (1 + q / gamma)``."""
    return z / (1.0 + q / gamma)


def scalar_attention_for_error(z, eps, gamma):
    """Inverse of :func:`scalar_error`: attention that brings ``|z|`` down to ``eps``."""
    return gamma * (abs(z) / eps - 1.0)
