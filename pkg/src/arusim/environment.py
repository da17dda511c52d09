"""Episodic decision environments for the aerial radio unit.

Two scenarios:

* a 4-action gridworld over the serviced area, where the per-step reward is
  a sigmoid of the (normalized) fronthaul path loss sampled at the cell the
  UAV moves into, with -1 step-penalty shaping and a revisit penalty;
* a 2-action ladder MDP whose per-state rewards come from a fixed per-rail
  path-loss profile through the same sigmoid machinery.

The reward path loss is measured on the UAV-to-tower link (the tower site is
part of the grid layout), so different cells genuinely differ in expected
path loss. The UAV's intra-cell position and altitude are resampled every
step, which is what makes the reward stochastic.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum

import numpy as np

from .channel import ChannelParams, LinkGeometry, path_loss_db

NUDGE = 1e-9  # displacement applied to a normalized PL of exactly 0 in InvPL mode


class Action(IntEnum):
    UP = 0      # +1 row
    DOWN = 1    # -1 row
    LEFT = 2    # -1 col
    RIGHT = 3   # +1 col


GRID_ACTIONS = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)
LADDER_ACTIONS = (Action.UP, Action.DOWN)


class Mode(str, Enum):
    PL = "PL"          # sigmoid(x): reward grows with path loss
    INV_PL = "InvPL"   # sigmoid(1/x): reward falls with path loss for x > 0


@dataclass
class RewardSpec:
    """Reward shaping: sigmoid-of-path-loss on productive moves, -1 otherwise.

    ``pl_min_db``/``pl_max_db`` are the normalization bounds; leave them None
    to have the environment compute them from the grid (min/max path loss
    over all cell centers at the altitude-band midpoint).
    """

    mode: Mode = Mode.PL
    pl_min_db: float = None
    pl_max_db: float = None
    step_penalty: float = -1.0
    revisit_penalty: float = -2.0
    terminal_bonus: float = 10.0

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.pl_min_db is not None and self.pl_max_db is not None:
            if not self.pl_min_db < self.pl_max_db:
                raise ValueError("require pl_min_db < pl_max_db")
        if self.revisit_penalty > self.step_penalty:
            raise ValueError("revisit_penalty must not exceed step_penalty")


def normalize_pl(pl_db, spec):
    """Map [pl_min, pl_max] affinely onto [-1, 1], clamping outside."""
    midpoint = (spec.pl_min_db + spec.pl_max_db) / 2.0
    x = 2.0 * (pl_db - midpoint) / (spec.pl_max_db - spec.pl_min_db)
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def reward_pl(x):
    """Logistic sigmoid of the normalized path loss, in (0, 1)."""
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    return 1.0 / (1.0 + math.exp(-x))


def reward_inv_pl(x):
    """Sigmoid of 1/x; decreasing in x for x > 0. Singular at x = 0."""
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    if x == 0.0:
        raise ValueError("reward_inv_pl is singular at x = 0")
    return 1.0 / (1.0 + math.exp(-(1.0 / x)))


def channel_reward(x, mode):
    """Reward-function dispatch used by the environments.

    In InvPL mode a normalized path loss of exactly 0 (the band midpoint)
    is nudged by 1e-9 instead of raising, so episodes cannot die on the
    measure-zero singularity.
    """
    if mode is Mode.PL:
        return 1.0 / (1.0 + math.exp(-x))
    if x == 0.0:
        x = NUDGE
    return 1.0 / (1.0 + math.exp(-(1.0 / x)))


@dataclass
class EpisodeTrace:
    """Ordered record of one episode: (state, action, reward, next_state)
    tuples plus the visited-cell set and a flight-time proxy."""

    seconds_per_step: float
    steps: list = field(default_factory=list)
    visited: set = field(default_factory=set)
    total_reward: float = 0.0
    non_convergent: bool = False

    def record(self, state, action, reward, next_state):
        self.steps.append((state, action, reward, next_state))
        self.visited.add(next_state)
        self.total_reward += reward

    @property
    def step_count(self):
        return len(self.steps)

    @property
    def wall_time_proxy_s(self):
        return self.step_count * self.seconds_per_step


@dataclass
class GridWorld:
    """Geometric layout of the gridded service area.

    Default: a 400 x 400 m area in 80 x 80 m cells (5 x 5 grid), takeoff at
    cell (0, 0) and landing at (4, 4), altitude band [100, 200] m, fronthaul
    tower on the ground at the takeoff-cell center.
    """

    cols: int = 5
    rows: int = 5
    cell_size_m: float = 80.0
    start_cell: tuple = (0, 0)
    terminal_cell: tuple = (4, 4)
    altitude_band_m: tuple = (100.0, 200.0)
    nodes_per_cell: int = 2
    node_tx_power_w: float = 0.1
    speed_mps: float = 20.0
    tower_xy_m: tuple = None
    channel: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if self.cols < 2 or self.rows < 1:
            raise ValueError("grid must be at least 2 x 1")
        for cell in (self.start_cell, self.terminal_cell):
            if not self.in_bounds(cell):
                raise ValueError(f"cell {cell} out of bounds")
        if tuple(self.start_cell) == tuple(self.terminal_cell):
            raise ValueError("start and terminal cells must differ")
        lo, hi = self.altitude_band_m
        if not 0 < lo <= hi:
            raise ValueError("invalid altitude band")
        if self.nodes_per_cell < 0 or self.node_tx_power_w < 0:
            raise ValueError("node counts and powers must be non-negative")
        if self.speed_mps <= 0:
            raise ValueError("speed must be positive")
        if self.tower_xy_m is None:
            self.tower_xy_m = self.cell_center(self.start_cell)

    def in_bounds(self, cell):
        col, row = cell
        return 0 <= col < self.cols and 0 <= row < self.rows

    def cell_center(self, cell):
        col, row = cell
        return ((col + 0.5) * self.cell_size_m, (row + 0.5) * self.cell_size_m)

    def cell_index(self, cell):
        col, row = cell
        return row * self.cols + col

    def index_cell(self, index):
        return (index % self.cols, index // self.cols)

    @property
    def n_cells(self):
        return self.cols * self.rows

    @property
    def band_mid_m(self):
        lo, hi = self.altitude_band_m
        return (lo + hi) / 2.0


def _tower_link_pl(grid, uav_x, uav_y, altitude_m):
    tx, ty = grid.tower_xy_m
    ddx = uav_x - tx
    ddy = uav_y - ty
    horizontal = math.sqrt(ddx * ddx + ddy * ddy)
    geom = LinkGeometry.from_altitude_horizontal(altitude_m, horizontal)
    return path_loss_db(geom, grid.channel)


def cell_path_loss(grid, cell, rng):
    """Sample the fronthaul path loss for the UAV flying over ``cell``.

    The horizontal offset from the cell center is uniform in
    [-cell/2, cell/2]^2 (the UAV never leaves the cell, so no handover) and
    the altitude is uniform in the altitude band.
    """
    if not grid.in_bounds(cell):
        raise ValueError(f"cell {cell} out of bounds")
    half = grid.cell_size_m / 2.0
    cx, cy = grid.cell_center(cell)
    lo, hi = grid.altitude_band_m
    dx = -half + (half - -half) * rng.random()
    dy = -half + (half - -half) * rng.random()
    h = lo + (hi - lo) * rng.random()
    return _tower_link_pl(grid, cx + dx, cy + dy, h)


def cell_path_loss_expected(grid, cell):
    """Deterministic-geometry path loss: cell center, band-midpoint altitude."""
    cx, cy = grid.cell_center(cell)
    return _tower_link_pl(grid, cx, cy, grid.band_mid_m)


def pl_bounds(grid):
    """Min/max expected path loss over all cell centers (band-mid altitude)."""
    values = [
        cell_path_loss_expected(grid, (c, r))
        for r in range(grid.rows)
        for c in range(grid.cols)
    ]
    lo, hi = min(values), max(values)
    if not lo < hi:
        raise ValueError("degenerate path-loss range over the grid")
    return lo, hi


def sampled_pl_range(grid, pad_db=0.5):
    """Bounds on the path loss the intra-cell sampler can actually produce,
    probed at cell-offset corners and altitude-band ends plus a small pad."""
    half = grid.cell_size_m / 2.0
    lo_h, hi_h = grid.altitude_band_m
    heights = (lo_h, (lo_h + hi_h) / 2.0, hi_h)
    offsets = ((0.0, 0.0), (-half, -half), (-half, half), (half, -half), (half, half))
    lo = math.inf
    hi = -math.inf
    for r in range(grid.rows):
        for c in range(grid.cols):
            cx, cy = grid.cell_center((c, r))
            for dx, dy in offsets:
                for h in heights:
                    pl = _tower_link_pl(grid, cx + dx, cy + dy, h)
                    lo = min(lo, pl)
                    hi = max(hi, pl)
    return lo - pad_db, hi + pad_db


def reward_pl_window(grid):
    """Normalization window used by the gridworld reward.

    The window is anchored so its midpoint sits at the top of the samplable
    path-loss range: every realized normalized value is then strictly
    negative. On the negative axis both reward functions are monotone
    (sigmoid(x) increasing, sigmoid(1/x) decreasing in path loss), which is
    what gives the two reward modes their opposite trajectory preferences;
    a window straddling zero would let sigmoid(1/x) jump across its
    singularity instead.
    """
    lo, hi = sampled_pl_range(grid)
    return lo, lo + 2.0 * (hi - lo)


def interference_at(grid, cell, rng):
    """Received powers of the cell's co-transmitting ground nodes, with the
    serving node excluded: nodes_per_cell - 1 independently faded uplinks."""
    if not grid.in_bounds(cell):
        raise ValueError(f"cell {cell} out of bounds")
    half = grid.cell_size_m / 2.0
    lo, hi = grid.altitude_band_m
    powers = []
    for _ in range(max(grid.nodes_per_cell - 1, 0)):
        dx = -half + (half - -half) * rng.random()
        dy = -half + (half - -half) * rng.random()
        h = lo + (hi - lo) * rng.random()
        horizontal = math.sqrt(dx * dx + dy * dy)
        geom = LinkGeometry.from_altitude_horizontal(h, horizontal)
        pl = path_loss_db(geom, grid.channel)
        powers.append(grid.node_tx_power_w * 10.0 ** (-pl / 10.0))
    return powers


class GridEnvironment:
    """Stateless-step gridworld: callers hold the current state and trace.

    Four actions; moves off the grid leave the state unchanged. The reward is
    the channel-derived sigmoid when the move reaches a new cell or strictly
    reduces the Manhattan distance to the terminal, the step penalty
    otherwise; re-entering a visited cell additionally costs the revisit
    penalty; entering the terminal grants the terminal bonus and ends the
    episode.
    """

    def __init__(self, grid=None, reward=None):
        self.grid = grid if grid is not None else GridWorld()
        reward = reward if reward is not None else RewardSpec()
        if reward.pl_min_db is None or reward.pl_max_db is None:
            lo, hi = reward_pl_window(self.grid)
            reward = replace(reward, pl_min_db=lo, pl_max_db=hi)
        self.reward = reward
        self.n_states = self.grid.n_cells
        self.n_actions = 4
        self.start_index = self.grid.cell_index(self.grid.start_cell)
        self.terminal_index = self.grid.cell_index(self.grid.terminal_cell)
        self.seconds_per_step = self.grid.cell_size_m / self.grid.speed_mps

    def new_trace(self):
        trace = EpisodeTrace(seconds_per_step=self.seconds_per_step)
        trace.visited.add(self.start_index)
        return trace

    def manhattan_to_terminal(self, state_index):
        col, row = self.grid.index_cell(state_index)
        tcol, trow = self.grid.terminal_cell
        return abs(col - tcol) + abs(row - trow)

    def next_state(self, state_index, action):
        col, row = self.grid.index_cell(state_index)
        action = Action(action)
        if action is Action.UP:
            row += 1
        elif action is Action.DOWN:
            row -= 1
        elif action is Action.LEFT:
            col -= 1
        else:
            col += 1
        if not self.grid.in_bounds((col, row)):
            return state_index
        return self.grid.cell_index((col, row))

    def sample_channel_reward(self, state_index, rng):
        pl = cell_path_loss(self.grid, self.grid.index_cell(state_index), rng)
        x = normalize_pl(pl, self.reward)
        return channel_reward(x, self.reward.mode)

    def expected_channel_reward(self, state_index):
        pl = cell_path_loss_expected(self.grid, self.grid.index_cell(state_index))
        x = normalize_pl(pl, self.reward)
        return channel_reward(x, self.reward.mode)

    def step(self, state_index, action, trace, rng):
        """Advance one step; returns (next_state, reward, done)."""
        ns = self.next_state(state_index, action)
        moved = ns != state_index
        is_new = ns not in trace.visited
        closer = self.manhattan_to_terminal(ns) < self.manhattan_to_terminal(
            state_index
        )
        if is_new or closer:
            reward = self.sample_channel_reward(ns, rng)
        else:
            reward = self.reward.step_penalty
        if moved and not is_new:
            reward += self.reward.revisit_penalty
        done = ns == self.terminal_index
        if done:
            reward += self.reward.terminal_bonus
        trace.record(state_index, int(action), reward, ns)
        return ns, reward, done

    def to_mdp(self):
        """Export as an explicit MDP with deterministic-geometry rewards.

        The revisit bookkeeping is history-dependent and cannot live in a
        25-state MDP; the export keeps the Markov core: channel reward on
        moves that strictly approach the terminal, step penalty otherwise.
        """
        n = self.n_states
        next_state = np.zeros((n, 4), dtype=np.int64)
        rewards = np.zeros((n, 4), dtype=float)
        terminal = np.zeros(n, dtype=bool)
        terminal[self.terminal_index] = True
        for s in range(n):
            for a in range(4):
                if s == self.terminal_index:
                    next_state[s, a] = s
                    continue
                ns = self.next_state(s, a)
                next_state[s, a] = ns
                closer = self.manhattan_to_terminal(ns) < self.manhattan_to_terminal(s)
                if closer:
                    r = self.expected_channel_reward(ns)
                else:
                    r = self.reward.step_penalty
                if ns == self.terminal_index:
                    r += self.reward.terminal_bonus
                rewards[s, a] = r
        return MdpSpec(
            n_states=n,
            n_actions=4,
            next_state=next_state,
            rewards=rewards,
            terminal=terminal,
            start=self.start_index,
        )


@dataclass
class LadderMdp:
    """Two-rail ladder: the UAV advances one stage per step and the action
    picks the rail entered at the next stage. Blocked states carry a penalty
    reward; the terminal is any state at the last stage."""

    stages: int = 8
    rails: int = 2
    rewards: np.ndarray = None  # (stages, rails) entered-state rewards
    blocked: frozenset = frozenset({(3, 0), (5, 1)})
    blocked_penalty: float = -5.0
    start_rail: int = 0
    speed_mps: float = 20.0
    stage_length_m: float = 80.0

    def __post_init__(self):
        if self.stages < 2 or self.rails != 2:
            raise ValueError("ladder needs at least 2 stages and exactly 2 rails")
        if self.rewards is None:
            self.rewards = default_ladder_rewards(self.stages)
        self.rewards = np.asarray(self.rewards, dtype=float)
        if self.rewards.shape != (self.stages, self.rails):
            raise ValueError("reward table shape must be (stages, rails)")
        if not np.all(np.isfinite(self.rewards)):
            raise ValueError("reward table must be finite")
        for stage, rail in self.blocked:
            if not (0 <= stage < self.stages and 0 <= rail < self.rails):
                raise ValueError(f"blocked state {(stage, rail)} out of range")
            self.rewards[stage, rail] = self.blocked_penalty


def default_ladder_rewards(stages, mode=Mode.PL):
    """Per-(stage, rail) rewards from a fixed per-rail path-loss profile.

    The upper rail runs farther from the tower (higher loss), the lower rail
    closer; both ramp up along the flight. The profile is pushed through the
    same normalize-then-sigmoid chain the gridworld uses, with the window
    anchored the same way (midpoint at the profile top, so the normalized
    values stay negative).
    """
    pl = np.zeros((stages, 2))
    for stage in range(stages):
        pl[stage, 0] = 96.0 + 0.5 * stage  # upper rail
        pl[stage, 1] = 92.0 + 0.5 * stage  # lower rail
    lo = float(pl.min()) - 0.5
    hi = float(pl.max()) + 0.5
    spec = RewardSpec(mode=mode, pl_min_db=lo, pl_max_db=lo + 2.0 * (hi - lo))
    out = np.zeros_like(pl)
    for stage in range(stages):
        for rail in range(2):
            out[stage, rail] = channel_reward(normalize_pl(pl[stage, rail], spec), spec.mode)
    return out


def ladder_step(mdp, stage, rail, action):
    """Deterministic ladder transition; returns (stage, rail, reward, done)."""
    if not (0 <= stage < mdp.stages - 1):
        raise ValueError(f"cannot step from stage {stage}")
    if not (0 <= rail < mdp.rails):
        raise ValueError(f"rail {rail} out of range")
    action = Action(action)
    if action not in LADDER_ACTIONS:
        raise ValueError("ladder actions are Up and Down only")
    next_rail = 0 if action is Action.UP else 1
    next_stage = stage + 1
    reward = float(mdp.rewards[next_stage, next_rail])
    done = next_stage == mdp.stages - 1
    return next_stage, next_rail, reward, done


class LadderEnvironment:
    """Episode protocol wrapper around LadderMdp (2 actions, (stage, rail)
    states in row-major index order)."""

    def __init__(self, mdp=None):
        self.mdp = mdp if mdp is not None else LadderMdp()
        self.n_states = self.mdp.stages * self.mdp.rails
        self.n_actions = 2
        self.start_index = 0 * self.mdp.rails + self.mdp.start_rail
        self.terminal_index = None  # any state at the last stage
        self.seconds_per_step = self.mdp.stage_length_m / self.mdp.speed_mps

    def state_index(self, stage, rail):
        return stage * self.mdp.rails + rail

    def index_state(self, index):
        return divmod(index, self.mdp.rails)

    def new_trace(self):
        trace = EpisodeTrace(seconds_per_step=self.seconds_per_step)
        trace.visited.add(self.start_index)
        return trace

    def step(self, state_index, action, trace, rng):
        stage, rail = self.index_state(state_index)
        next_stage, next_rail, reward, done = ladder_step(self.mdp, stage, rail, action)
        ns = self.state_index(next_stage, next_rail)
        trace.record(state_index, int(action), reward, ns)
        return ns, reward, done

    def to_mdp(self):
        n = self.n_states
        next_state = np.zeros((n, 2), dtype=np.int64)
        rewards = np.zeros((n, 2), dtype=float)
        terminal = np.zeros(n, dtype=bool)
        for s in range(n):
            stage, rail = self.index_state(s)
            if stage == self.mdp.stages - 1:
                terminal[s] = True
                next_state[s, :] = s
                continue
            for a in range(2):
                ns_stage, ns_rail, r, _ = ladder_step(self.mdp, stage, rail, a)
                next_state[s, a] = self.state_index(ns_stage, ns_rail)
                rewards[s, a] = r
        return MdpSpec(
            n_states=n,
            n_actions=2,
            next_state=next_state,
            rewards=rewards,
            terminal=terminal,
            start=self.start_index,
            horizon=self.mdp.stages - 1,
        )


@dataclass
class MdpSpec:
    """Explicit deterministic (S, A, next-state, reward) description.

    ``horizon`` marks a finite-horizon layered problem (the ladder), solved
    by backward induction instead of fixed-point iteration.
    """

    n_states: int
    n_actions: int
    next_state: np.ndarray  # (S, A) int
    rewards: np.ndarray     # (S, A) float
    terminal: np.ndarray    # (S,) bool
    start: int
    horizon: int = None
