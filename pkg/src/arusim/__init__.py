"""arusim: aerial radio unit trajectory simulator.

Air-to-ground channel and MIMO signal model, network-throughput objective
with a nonconvexity probe, episodic gridworld/ladder environments with
path-loss-driven sigmoid rewards, and tabular trajectory planners
(Q-learning, SARSA, exact value iteration) under one seeded experiment
harness.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelParams,
    LinkGeometry,
    draw_channel,
    elevation_angle,
    link_rate,
    los_probability,
    mimo_downlink,
    mimo_uplink,
    path_loss_db,
    sinr,
    spectral_rate,
)
from .environment import (
    Action,
    EpisodeTrace,
    GridEnvironment,
    GridWorld,
    LadderEnvironment,
    LadderMdp,
    MdpSpec,
    Mode,
    RewardSpec,
    cell_path_loss,
    interference_at,
    ladder_step,
    normalize_pl,
    reward_inv_pl,
    reward_pl,
)
from .agents import (
    DiscountSelection,
    LearningConfig,
    Policy,
    RunMetrics,
    average_reward,
    epsilon_greedy,
    eq9_ratio,
    greedy_trajectory,
    new_qtable,
    q_update,
    run_mdp_rollouts,
    run_q_learning,
    run_sarsa,
    sarsa_update,
    select_discount_factor,
    value_iteration,
)
from .objective import (
    FeasibilityReport,
    NetworkLayout,
    PositionBox,
    ProbeReport,
    feasibility_check,
    nonconvexity_probe,
    select_cu,
    throughput_objective,
)
