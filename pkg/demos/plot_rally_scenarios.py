"""
Rallies: four ways to play a long exchange
==========================================

Each collision the hitting paddle solves for its attention, tracks the ball
and sends it back. Without coordination the rally drifts into ever harder
shots until the ball is out of reach. With coordination attention settles,
and the margin of the coordination estimate, a slower left hand or aiming
closer to the centre change how it settles.
"""

from pathlib import Path

from bimanual_pong.rally import SCENARIOS, ScenarioConfig, detect_steady_state, run_rally, summarize
from bimanual_pong.svgplot import line_plot

OUT = Path("demo-out")
OUT.mkdir(exist_ok=True)

# %%
# Run every preset and print the twelve-collision totals.
logs = {name: run_rally(ScenarioConfig.preset(name)) for name in SCENARIOS}
print(f"{'scenario':<22}{'attention':>12}{'control':>10}  ending / steady state")
for name, log in logs.items():
    tot = summarize(log)
    window = min(30, len(log.records))
    steady = detect_steady_state(log, window)
    print(f"{name:<22}{tot.attention:>12.3f}{tot.control:>10.3f}  {log.termination} / {steady.kind}")

# %%
# Net paddle movement per collision for the coordinated presets.
series = {name: ([r.index for r in log.records], log.series("delta_xp"))
          for name, log in logs.items() if name.startswith(("coordination", "centering"))}
(OUT / "rally_delta_xp.svg").write_text(
    line_plot(series, "Net paddle movement", "collision i", "delta x_p (m)"), encoding="utf-8")
