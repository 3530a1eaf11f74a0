"""
The feasible region in two attention dimensions
===============================================

Restricting attention to the last two steps before a collision makes the
hitting constraint ``|E(q)| <= eps`` a region in the plane. Its boundary is
a convex curve in the positive orthant, and the least-attention point on it
puts far less weight on step ``N - 1`` than on step ``N`` when the task is
easy.
"""

from pathlib import Path

import numpy as np

from bimanual_pong.attention_model import terminal_error
from bimanual_pong.attention_solver import SolverConfig, solve_tracking
from bimanual_pong.svgplot import line_plot
from bimanual_pong.tasks import easy_task, hard_task
from bimanual_pong.verification import grid_oracle_2d

OUT = Path("demo-out")
OUT.mkdir(exist_ok=True)

# %%
# Solve both tasks with two active dimensions and compare with brute force.
for name, task in (("easy", easy_task()), ("hard", hard_task())):
    sol = solve_tracking(task, SolverConfig(active_dims=2))
    grid, feasible, best = grid_oracle_2d(task)
    print(f"{name}: solver q[N-1], q[N] = {sol.qp_full[-2]:.3g}, {sol.qp_full[-1]:.3g}; "
          f"grid optimum {grid[best[0]]:.3g}, {grid[best[1]]:.3g}")

# %%
# Trace the boundary of the hard task: for each q[N-1], the smallest
# feasible q[N] on the grid.
task = hard_task()
grid, feasible, _ = grid_oracle_2d(task)
qa, qb = [], []
for i, row in enumerate(feasible):
    if row.any():
        qa.append(np.log10(grid[i]))
        qb.append(np.log10(grid[np.argmax(row)]))

# %%
# Midpoints of feasible pairs stay feasible: the region is convex.
rng = np.random.default_rng(0)
idx = np.argwhere(feasible)
bad = 0
for i, j in rng.integers(0, len(idx), (1000, 2)):
    q = task.floor_point()
    q[-2:] = 0.5 * (grid[idx[i]] + grid[idx[j]])
    bad += abs(terminal_error(q, task)) > task.eps
print(f"infeasible midpoints: {bad} of 1000")

(OUT / "feasible_boundary.svg").write_text(
    line_plot({"boundary": (qa, qb)}, "Hard task: feasible boundary",
              "log10 q[N-1]", "log10 q[N]"), encoding="utf-8")
