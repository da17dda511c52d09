"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Tolerances are stated inline next to each assertion.
"""

import csv
import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from arusim.agents import (
    LearningConfig,
    eq9_ratio,
    greedy_trajectory,
    new_qtable,
    q_update,
    run_q_learning,
    run_sarsa,
    sarsa_update,
    value_iteration,
)
from arusim.channel import (
    ChannelParams,
    LinkGeometry,
    draw_channel,
    los_probability,
    mimo_downlink,
    mimo_uplink,
    path_loss_db,
)
from arusim.environment import GridEnvironment, Mode, RewardSpec
from arusim.harness import compare_report, load_config, run_experiment
from arusim.objective import NetworkLayout, PositionBox, nonconvexity_probe

SEEDS_20 = tuple(range(20))
MANHATTAN_5X5 = 8


def _report(line):
    print(f"\nACCEPTANCE {line}")


def test_criterion_1_channel_oracles():
    params = ChannelParams()
    # independent scalar evaluation of the full path-loss expression
    d = math.sqrt(100.0**2 + 100.0**2)
    theta_deg = math.degrees(math.atan2(100.0, 100.0))
    p_los = 1.0 / (1.0 + 9.6 * math.exp(-0.15 * (theta_deg - 9.6)))
    expected_pl = (
        20.0 * math.log10(4.0 * math.pi * 6.0e9 * d / 3.0e8)
        + p_los * 1.0
        + (1.0 - p_los) * 20.0
    )
    geom = LinkGeometry.from_altitude_horizontal(100.0, 100.0)
    got = path_loss_db(geom, params)
    assert abs(got - expected_pl) < 1e-9
    assert abs(got - 92.86) < 0.1  # documented reference value, 0.1 dB tolerance

    # LoS probability at the four reference angles, 1e-3 tolerance
    cases = {
        1e-9: 1.0 / (1.0 + 9.6 * math.exp(0.15 * 9.6)),   # theta -> 0+
        math.radians(9.6): 1.0 / 10.6,
        math.radians(45.0): 0.9547063474618231,
        math.radians(90.0): 0.9999444536332709,
    }
    for angle, expected in cases.items():
        assert abs(los_probability(angle, params) - expected) < 1e-3

    # free-space growth per distance doubling: 6.0206 dB within 0.001
    fs = ChannelParams(eta_los=0.0, eta_nlos=0.0)
    for dist in (60.0, 100.0, 250.0):
        g1 = LinkGeometry.from_altitude_horizontal(dist, 0.0)
        g2 = LinkGeometry.from_altitude_horizontal(2 * dist, 0.0)
        delta = path_loss_db(g2, fs) - path_loss_db(g1, fs)
        assert abs(delta - 6.0206) < 0.001
    _report("criterion 1 PASS: channel oracles (path loss, LoS, 6.02 dB/doubling)")


def test_criterion_2_policy_oracle_equivalence():
    t0 = time.time()
    env = GridEnvironment()
    # exact-planning oracle: the optimal path length is the Manhattan distance
    oracle = value_iteration(env.to_mdp(), gamma=0.8)
    oracle_trace = greedy_trajectory(oracle, env)
    assert oracle_trace.step_count == MANHATTAN_5X5

    wins = 0
    for seed in SEEDS_20:
        q, _ = run_q_learning(env, LearningConfig(seed=seed))
        trace = greedy_trajectory(q, env)
        if not trace.non_convergent and trace.step_count == MANHATTAN_5X5:
            wins += 1
    elapsed = time.time() - t0
    assert wins >= 18, f"shortest-path trajectories: {wins}/20"
    assert elapsed < 30.0, f"runtime {elapsed:.1f}s exceeds 30s budget"
    _report(
        f"criterion 2 PASS: Q-learning greedy path == Manhattan for {wins}/20 seeds "
        f"(>= 18 required) in {elapsed:.1f}s"
    )


def test_criterion_3_reward_mode_direction():
    env_pl = GridEnvironment(reward=RewardSpec(mode=Mode.PL))
    env_inv = GridEnvironment(reward=RewardSpec(mode=Mode.INV_PL))
    wins = 0
    for seed in SEEDS_20:
        cfg = LearningConfig(seed=seed)
        _, m_pl = run_q_learning(env_pl, cfg)
        _, m_inv = run_q_learning(env_inv, cfg)
        if m_pl.total_reward[-50:].mean() > m_inv.total_reward[-50:].mean():
            wins += 1
    assert wins >= 18, f"PL-mode above InvPL-mode: {wins}/20"
    _report(
        f"criterion 3 PASS: PL-mode final smoothed reward above InvPL for "
        f"{wins}/20 seeds (>= 18 required)"
    )


def _comparison_orderings(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    metrics = {r["name"]: float(r["value"]) for r in rows if r["kind"] == "metric"}
    orderings = {r["name"]: r["value"] == "true" for r in rows if r["kind"] == "ordering"}
    return metrics, orderings


def test_criterion_4_discount_selection_orderings(tmp_path):
    # 5x5 comparison at the matched discount (gamma = 0.7): the exact agent
    # satisfies the |Q0 - AR|/|Q0 + AR| <= 0.1 condition from the first
    # episode; SARSA needs (many) more. Asserted on a fixed 10-seed set.
    base = (
        "[learning]\ngamma = 0.7\n"
        "[run]\nseeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]\n"
    )
    cfg = load_config(base)
    m_vi = run_experiment(replace(cfg, algorithm="value_iteration",
                                  output_dir=str(tmp_path / "vi5")))
    m_sa = run_experiment(replace(cfg, algorithm="sarsa",
                                  output_dir=str(tmp_path / "sa5")))
    summary = compare_report([m_vi, m_sa], str(tmp_path / "cmp5"), delta=0.1)
    vi_eps = summary["value_iteration"]["episodes_to_criterion"]
    sa_eps = summary["sarsa"]["episodes_to_criterion"]
    assert vi_eps <= sa_eps, f"vi {vi_eps} vs sarsa {sa_eps}"
    _, orderings = _comparison_orderings(tmp_path / "cmp5" / "comparison.csv")
    assert orderings["value_iteration_reaches_criterion_before_sarsa"]

    # 20x20 scaled-up reproduction report: recorded, not asserted (the
    # source makes the claim without numeric margins).
    big = (
        "[grid]\ncols = 20\nrows = 20\nterminal_cell = [19, 19]\n"
        "[learning]\nepisodes = 10000\nmax_steps_per_episode = 800\n"
        "[run]\nseeds = [0, 1, 2]\n"
    )
    bcfg = load_config(big)
    b_vi = run_experiment(replace(bcfg, algorithm="value_iteration",
                                  output_dir=str(tmp_path / "vi20")))
    b_sa = run_experiment(replace(bcfg, algorithm="sarsa",
                                  output_dir=str(tmp_path / "sa20")))
    big_summary = compare_report([b_vi, b_sa], str(tmp_path / "cmp20"), delta=0.1)
    sarsa_higher = (
        big_summary["sarsa"]["final_smoothed_avg_reward"]
        >= big_summary["value_iteration"]["final_smoothed_avg_reward"]
    )
    _report(
        "criterion 4 PASS: 5x5 ordering asserted "
        f"(vi episodes-to-criterion {vi_eps:.0f} <= sarsa {sa_eps:.0f}); "
        f"20x20 reproduction recorded: sarsa>=vi is {sarsa_higher} "
        f"(sarsa {big_summary['sarsa']['final_smoothed_avg_reward']:.2f}, "
        f"vi {big_summary['value_iteration']['final_smoothed_avg_reward']:.2f})"
    )


def test_criterion_5_nonconvexity_probe():
    t0 = time.time()
    layout = NetworkLayout(
        ue_xy=[(60.0, 60.0), (100.0, 60.0), (340.0, 340.0), (300.0, 340.0)],
        ue_tx_power_w=[0.001] * 4,
        cu_xy=[(200.0, 0.0)],
        cu_height_m=[30.0],
        association=[1],
        uav_tx_power_w=0.01,
    )
    report = nonconvexity_probe(layout, PositionBox(), 81, ChannelParams())
    elapsed = time.time() - t0
    assert len(report.local_maxima) >= 2, report.local_maxima
    assert elapsed < 10.0
    _report(
        f"criterion 5 PASS: {len(report.local_maxima)} strict local maxima on the "
        f"81x81 scan in {elapsed:.2f}s"
    )


def test_criterion_6_ratio_identities():
    rng = np.random.default_rng(123)
    for _ in range(1000):
        v = rng.uniform(-1e8, 1e8)
        assert eq9_ratio(v, v) == 0.0
    checked = 0
    while checked < 1000:
        q0, ar = rng.uniform(-100, 100, 2)
        if abs(q0 + ar) < 1e-9:
            continue
        c = rng.uniform(1e-4, 1e4)
        assert eq9_ratio(c * q0, c * ar) == pytest.approx(eq9_ratio(q0, ar), rel=1e-9)
        checked += 1
    _report("criterion 6 PASS: ratio identity and scale invariance (1000 cases each)")


def test_criterion_7_update_rule_algebra():
    q = new_qtable(4, 4)
    assert q_update(q, 0, 1, 1.0, 2, alpha=0.9, gamma=0.8) == pytest.approx(0.9, abs=0)
    q2 = new_qtable(4, 4)
    assert sarsa_update(q2, 0, 1, 1.0, 2, 3, alpha=0.9, gamma=0.8) == pytest.approx(
        0.9, abs=0
    )
    # alpha = 1, gamma = 0 overwrites with the reward exactly
    q3 = new_qtable(2, 2)
    q3[0, 0] = 123.0
    assert q_update(q3, 0, 0, 2.5, 1, alpha=1.0, gamma=0.0) == 2.5

    env = GridEnvironment()
    cfg = LearningConfig(episodes=200, epsilon=0.0, seed=42)
    q_a, m_a = run_q_learning(env, cfg)
    q_b, m_b = run_sarsa(env, cfg)
    assert np.array_equal(q_a, q_b)
    assert np.array_equal(m_a.total_reward, m_b.total_reward)
    assert np.array_equal(m_a.steps, m_b.steps)
    _report(
        "criterion 7 PASS: update algebra exact; greedy Q-learning == greedy SARSA "
        "(identical tables and traces)"
    )


def test_criterion_8_statistical_checks():
    rng = np.random.default_rng(2024)
    h = draw_channel(100, 1000, rng)  # 1e5 entries
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.05

    sigma = 0.35
    noise_only = mimo_downlink(
        np.zeros((100, 1000)), np.zeros((1000, 1000)), sigma, rng
    )
    var = np.mean(np.abs(noise_only) ** 2)
    assert abs(var - sigma**2) / sigma**2 < 0.05

    x = draw_channel(1, 2, rng)
    h_ul = draw_channel(2, 2, rng)
    h_dl = draw_channel(2, 100, rng)
    chained = mimo_downlink(mimo_uplink(x, h_ul, 0.0), h_dl, 0.0, rng)
    direct = x @ h_ul @ h_dl
    assert np.allclose(chained, direct, rtol=1e-12, atol=0.0)
    _report(
        "criterion 8 PASS: |h|^2 mean within 5%, noise variance within 5%, "
        "linear chain exact to 1e-12"
    )


def test_criterion_9_determinism_and_defaults(tmp_path):
    text = "[learning]\nepisodes = 50\n[run]\nalgorithm = \"qlearning\"\nseeds = [3]\n"
    p1 = run_experiment(replace(load_config(text), output_dir=str(tmp_path / "a")))
    p2 = run_experiment(replace(load_config(text), output_dir=str(tmp_path / "b")))
    f1 = os.path.join(os.path.dirname(p1), "qlearning_seed3", "metrics.csv")
    f2 = os.path.join(os.path.dirname(p2), "qlearning_seed3", "metrics.csv")
    with open(f1, "rb") as a, open(f2, "rb") as b:
        assert a.read() == b.read()

    cfg = load_config("")
    ch = cfg.grid.channel
    assert ch.mu == 9.6
    assert ch.psi == 0.15
    assert ch.eta_los == 1.0
    assert ch.eta_nlos == 20.0
    assert ch.carrier_hz == 6.0e9
    assert cfg.learning.delta == 0.1
    assert cfg.learning.epsilon == 0.3
    assert cfg.learning.alpha == 0.9
    assert cfg.learning.gamma == 0.8
    assert cfg.box.x_range == (0.0, 400.0)
    assert cfg.box.y_range == (0.0, 400.0)
    assert cfg.box.h_range == (100.0, 200.0)
    assert cfg.antennas.n_t_ue == 2
    assert cfg.antennas.n_r_uav == 2
    assert cfg.antennas.n_t_uav == 2
    assert cfg.antennas.n_r_cu == 100
    assert (cfg.grid.cols, cfg.grid.rows) == (5, 5)
    assert cfg.grid.cell_size_m == 80.0
    assert cfg.grid.altitude_band_m == (100.0, 200.0)
    _report(
        "criterion 9 PASS: byte-identical reruns; empty config reproduces the "
        "reference defaults field by field"
    )
