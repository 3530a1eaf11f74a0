"""
Easy and hard tasks: where attention goes in time
=================================================

When the ball sweeps across the paddle's height, attending early would pull
the paddle the wrong way, so attention concentrates at the last step. When
the ball runs away from the paddle, it needs a long run-up and attention
spreads back in time. Forcing a hard task to use only the last step costs
noticeably more.
"""

import numpy as np

from bimanual_pong.attention_solver import SolverConfig, solve_tracking
from bimanual_pong.tasks import attention_spread, easy_task, hard_task

full = SolverConfig(active_dims=9)

# %%
# Solve both tasks over the whole horizon.
for name, task in (("easy", easy_task()), ("hard", hard_task())):
    sol = solve_tracking(task, full)
    print(f"{name}: cost {sol.cost_pA:.4f}, spread {attention_spread(sol.qp_full):.3f}")
    print("   q =", np.array2string(sol.qp_full, precision=3))

# %%
# One-dimensional restriction of the hard task.
multi = solve_tracking(hard_task(), full)
single = solve_tracking(hard_task(), SolverConfig(active_dims=1))
print(f"single-step cost {single.cost_pA:.3f} vs multi-step {multi.cost_pA:.3f} "
      f"(ratio {single.cost_pA / multi.cost_pA:.2f})")

# %%
# The solver optimizes the last four steps by default. On the hard task that
# truncation is not free.
four = solve_tracking(hard_task())
print(f"four active steps: {four.cost_pA:.3f} ({four.cost_pA / multi.cost_pA - 1:+.1%})")
