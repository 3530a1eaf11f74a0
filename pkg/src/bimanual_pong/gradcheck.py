"""Random-instance comparison of the analytic ``dE/dq`` against central differences."""

from dataclasses import dataclass

import numpy as np

from .attention_model import QFLOOR, TrackingProblem, grad_terminal_error, terminal_error
from .trajectory_algebra import build_rollout, discretize_paddle, extract_geometry

B_INPUT = np.array([1.0, 0.0])


@dataclass(frozen=True)
class GradientReport:
    trials: int
    seed: int
    max_rel_error: float
    worst_trial: int

    def passed(self, tol=1e-3):
        return self.max_rel_error <= tol

    def lines(self):
        return [
            f"trials: {self.trials}",
            f"seed: {self.seed}",
            f"max relative error: {self.max_rel_error:.3e}",
            f"worst trial: {self.worst_trial}",
        ]


def random_problem(rng):
    """Random plant, horizon, residuals and attention; half the draws carry a velocity target."""
    N = int(rng.integers(3, 11))
    roll = build_rollout(discretize_paddle(rng.uniform(0.0, 3.0)), B_INPUT, N)
    geom = extract_geometry(roll)
    zp = rng.normal(0.0, 0.3, N - 1)
    zvN = float(rng.normal(0.0, 0.1)) if rng.random() < 0.5 else None
    prob = TrackingProblem(zp=zp, geom=geom, r=float(rng.uniform(0.5, 2.0)), zvN=zvN)
    q = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), prob.dim))
    return prob, q


def central_difference(f, q, step=1e-4, floor=QFLOOR):
    """Central differences with step ``step * (1 + |q_i|)``.

    Where the backward point would drop below ``floor`` a forward difference
    is used instead.
    """
    q = np.asarray(q, float)
    g = np.empty_like(q)
    for i in range(q.size):
        h = step * (1.0 + abs(q[i]))
        up = q.copy()
        up[i] += h
        if q[i] - h < floor:
            g[i] = (f(up) - f(q)) / h
            continue
        down = q.copy()
        down[i] -= h
        g[i] = (f(up) - f(down)) / (2.0 * h)
    return g


def relative_error(analytic, numeric):
    """Componentwise error scaled by the larger magnitude, floored at 1e-6 of the largest entry."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)),
                       1e-6 * np.abs(numeric).max() + 1e-300)
    return np.abs(analytic - numeric) / scale


def check_gradients(seed=0, trials=50):
    """Largest componentwise relative error over ``trials`` random instances."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst, worst_trial = 0.0, 0
    for k in range(trials):
        prob, q = random_problem(rng)
        analytic = grad_terminal_error(q, prob)
        numeric = central_difference(lambda x: terminal_error(x, prob), q)
        err = float(relative_error(analytic, numeric).max())
        if err > worst:
            worst, worst_trial = err, k
    return GradientReport(trials=trials, seed=seed, max_rel_error=worst, worst_trial=worst_trial)
