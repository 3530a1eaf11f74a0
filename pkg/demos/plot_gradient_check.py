"""
Checking the analytic gradient
==============================

The solver relies on the analytic derivative of the miss distance with
respect to attention. This script compares it with central differences on
random plants, horizons and attention vectors, the same check that
``pong check-gradients`` runs.
"""

from bimanual_pong.gradcheck import check_gradients

for seed in range(3):
    report = check_gradients(seed=seed, trials=50)
    print(f"seed {seed}: max relative error {report.max_rel_error:.2e} "
          f"(worst trial {report.worst_trial})")
