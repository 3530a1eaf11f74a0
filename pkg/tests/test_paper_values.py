"""Published constants and orderings, read from paper.md and compared with the package."""

import re
from pathlib import Path

import pytest

from bimanual_pong.rally import SCENARIOS, ScenarioConfig, summarize
from bimanual_pong.trajectory_algebra import build_rollout, discretize_paddle

PAPER = Path(__file__).resolve().parent.parent / "paper.md"

pytestmark = pytest.mark.skipif(not PAPER.exists(), reason="paper.md not available")

ROWS = {
    "No Coordination": "none",
    "Weak Coordination": "coordination-weak",
    "Strong Coordination": "coordination-strong",
    "Low Asymmetry": "handedness-low",
    "High Asymmetry": "handedness-high",
    "Low Centering": "centering-low",
    "High Centering": "centering-high",
}
# the orderings the acceptance criteria require, as (larger, smaller)
ORDERINGS = [("none", "coordination-weak"), ("coordination-weak", "coordination-strong"),
             ("handedness-high", "handedness-low"), ("centering-high", "centering-low"),
             ("centering-low", "coordination-strong"),
             ("centering-high", "coordination-strong")]


@pytest.fixture(scope="module")
def text():
    return PAPER.read_text(encoding="utf-8")


@pytest.fixture(scope="module")
def table(text):
    out = {}
    for label, name in ROWS.items():
        m = re.search(rf"\) {label} & (\d+) & (\d+)", text)
        assert m, label
        out[name] = (int(m.group(1)), int(m.group(2)))
    return out


def test_simulation_constants(text):
    cfg = ScenarioConfig()
    assert re.search(r"error margin \$\\upepsilon\$ is 0\.03m", text)
    assert cfg.eps == 0.03
    assert "$r$ is fixed at 1" in text and cfg.r == 1.0
    assert "1.3m apart" in text and 2 * cfg.rail == pytest.approx(1.3)
    assert "results in $N=10$" in text and cfg.N == 10
    # 1.3 m between rails crossed in N = 10 steps
    assert cfg.ball_speed * cfg.N == pytest.approx(1.3)
    assert r"B = [1 \hspace{0.2cm} 0]^\top" in text
    assert build_rollout(discretize_paddle(1.0), [1.0, 0.0], 3).Bbold[0, 0] == 1.0


def test_four_dimension_truncation(text):
    assert "four dimensions ($N$ to $N-3$)" in text
    assert ScenarioConfig().solver.active_dims == 4


def test_centering_fractions(text):
    assert "use 0.73 and 0.55 of $x_{pL}[N]$" in text
    assert SCENARIOS["centering-low"]["centering"] == 0.73
    assert SCENARIOS["centering-high"]["centering"] == 0.55


def test_handedness_damping_differences(text):
    assert re.search(r"difference between actuators for Low and High asymmetry is 1 and 3", text)
    base = ScenarioConfig().damping_right
    assert SCENARIOS["handedness-low"]["damping_left"] - base == 1.0
    assert SCENARIOS["handedness-high"]["damping_left"] - base == 3.0


def test_single_dimension_ratio_threshold(text):
    m = re.search(r"is (\d+), which is significantly greater.*?=(\d+)\)", text)
    single, multi = int(m.group(1)), int(m.group(2))
    assert (single, multi) == (72361, 39748)
    # the acceptance threshold of 1.2 sits below the published ratio
    assert single / multi > 1.2


def test_required_orderings_are_the_published_ones(table):
    for hi, lo in ORDERINGS:
        assert table[hi][0] > table[lo][0], (hi, lo)


def test_reproduced_orderings(table, logs):
    ours = {name: summarize(log).attention for name, log in logs.items()}
    for hi, lo in ORDERINGS:
        assert ours[hi] > ours[lo], (hi, lo)
