"""Condensed LQ trajectory tracking (the lower-layer paddle controller).

The cost over the stacked trajectory ``x = Abold x1 + Bbold u`` is

    J = x^T Q x - 2 xd^T Q x + r u^T u,       Q = diag(q)

whose minimizer is ``u = (r I + B^T Q B)^{-1} B^T Z q`` with
``z = xd - Abold x1`` and ``Z = diag(z)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve


class OracleFailure(RuntimeError):
    """The independent least-squares oracle could not produce a solution."""


@dataclass(frozen=True)
class TrackingTarget:
    """Desired trajectory ``xd`` and its residual ``z = xd - Abold x1``."""

    xd: np.ndarray
    z: np.ndarray

    @classmethod
    def from_rollout(cls, xd, roll, x1):
        xd = np.asarray(xd, float)
        return cls(xd=xd, z=xd - roll.Abold @ np.asarray(x1, float))

    @property
    def Zdiag(self):
        return np.diag(self.z)


@dataclass(frozen=True)
class PenaltyVector:
    """Interleaved penalties ``[q_v[2], q_p[2], ..., q_v[N], q_p[N]]`` and control weight ``r``."""

    q: np.ndarray
    r: float = 1.0

    def __post_init__(self):
        q = np.asarray(self.q, float)
        if np.any(q < 0):
            raise ValueError("penalties must be nonnegative")
        if not self.r > 0:
            raise ValueError(f"control penalty must be positive, got {self.r}")
        object.__setattr__(self, "q", q)


def closed_form_controls(target, q, roll):
    """Minimizer of the tracking cost, by Cholesky solve of the normal equations."""
    B = roll.Bbold
    H = q.r * np.eye(B.shape[1]) + B.T @ (q.q[:, None] * B)
    return cho_solve(cho_factor(H), B.T @ (target.z * q.q))


def tracking_cost(u, target, q, roll, x1):
    """``x^T Q x - 2 xd^T Q x + r u^T u`` (the constant ``xd^T Q xd`` is dropped)."""
    u = np.asarray(u, float)
    x = roll.trajectory(x1, u)
    Qx = q.q * x
    return float(x @ Qx - 2.0 * target.xd @ Qx + q.r * u @ u)


def tracking_cost_gradient(u, target, q, roll):
    """Gradient of :func:`tracking_cost` with respect to ``u``."""
    u = np.asarray(u, float)
    B = roll.Bbold
    return 2.0 * (B.T @ (q.q * (B @ u - target.z)) + q.r * u)


def oracle_minimize(target, q, roll):
    """Independent minimizer: the cost is a stacked linear least-squares problem

        min || [sqrt(Q) B; sqrt(r) I] u - [sqrt(Q) z; 0] ||^2

    solved by SVD-based ``lstsq`` (never forms ``B^T Q B``).
    """
    B = roll.Bbold
    n = B.shape[1]
    w = np.sqrt(q.q)
    M = np.vstack([w[:, None] * B, np.sqrt(q.r) * np.eye(n)])
    rhs = np.concatenate([w * target.z, np.zeros(n)])
    u, _, rank, _ = np.linalg.lstsq(M, rhs, rcond=None)
    if rank < n or not np.all(np.isfinite(u)):
        raise OracleFailure(f"least-squares oracle is rank deficient (rank {rank} < {n})")
    return u
