"""Paddle discretization and condensed rollout matrices.

Paddle state is ordered ``[velocity, position]`` throughout the package.
A trajectory ``x = [x[2], ..., x[N]]`` is stacked as
``[v[2], p[2], v[3], p[3], ..., v[N], p[N]]`` so that position entries sit
at odd (0-based) indices.
"""

from dataclasses import dataclass

import numpy as np

# damping below this uses the undamped limit of the closed form
_SMALL_DAMPING = 1e-8


class InvalidHorizonError(ValueError):
    """Raised when a horizon shorter than two steps is requested."""


def discretize_paddle(damping):
    """Exact exponential of ``[[-d, 0], [1, 0]]`` for the damped integrator.

    Returns ``[[exp(-d), 0], [(1 - exp(-d)) / d, 1]]`` with the ``d -> 0``
    limit ``[[1, 0], [1, 1]]``.
    """
    d = float(damping)
    if d < 0:
        raise ValueError(f"damping must be nonnegative, got {d}")
    if d < _SMALL_DAMPING:
        return np.array([[1.0, 0.0], [1.0, 1.0]])
    decay = np.exp(-d)
    return np.array([[decay, 0.0], [-np.expm1(-d) / d, 1.0]])


@dataclass(frozen=True)
class RolloutMatrices:
    """Zero-input response ``Abold`` and input response ``Bbold`` over ``N`` steps."""

    Abold: np.ndarray  # (2(N-1), 2)
    Bbold: np.ndarray  # (2(N-1), N-1)
    N: int

    def trajectory(self, x1, u):
        """Stacked states ``x[2..N]`` for initial state ``x1`` and inputs ``u``."""
        return self.Abold @ np.asarray(x1, float) + self.Bbold @ np.asarray(u, float)


@dataclass(frozen=True)
class GeometryRows:
    """Position/velocity row extractions of ``Bbold``.

    ``Bp`` holds every position row, ``bpN``/``bvN`` the transposed terminal
    position/velocity rows and ``P = Bp @ Bp.T``.
    """

    Bp: np.ndarray
    bpN: np.ndarray
    bvN: np.ndarray
    P: np.ndarray


def build_rollout(A, B, N):
    """Stack ``x = Abold x[1] + Bbold u`` for ``x[t+1] = A x[t] + B u[t]``."""
    if int(N) != N or N < 2:
        raise InvalidHorizonError(f"horizon must be an integer >= 2, got {N}")
    N = int(N)
    A = np.asarray(A, float)
    B = np.asarray(B, float).reshape(2)
    n = N - 1

    powers = [np.eye(2)]
    for _ in range(n):
        powers.append(A @ powers[-1])

    Abold = np.vstack(powers[1:])
    Bbold = np.zeros((2 * n, n))
    for i in range(n):
        for j in range(i + 1):
            Bbold[2 * i:2 * i + 2, j] = powers[i - j] @ B
    return RolloutMatrices(Abold=Abold, Bbold=Bbold, N=N)


def extract_geometry(roll):
    """Position rows, terminal rows and Gram matrix of a rollout."""
    Bp = roll.Bbold[1::2]
    bpN = roll.Bbold[-1].copy()
    bvN = roll.Bbold[-2].copy()
    P = Bp @ Bp.T
    # exact symmetry, the product can differ in the last ulp
    P = 0.5 * (P + P.T)
    return GeometryRows(Bp=Bp, bpN=bpN, bvN=bvN, P=P)


def position_indices(N):
    """Indices of position entries in a stacked trajectory of horizon ``N``."""
    return np.arange(1, 2 * (N - 1), 2)


def velocity_indices(N):
    """Indices of velocity entries in a stacked trajectory of horizon ``N``."""
    return np.arange(0, 2 * (N - 1), 2)
