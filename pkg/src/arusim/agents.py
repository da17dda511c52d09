"""Decision procedures over the environments.

Tabular Q-learning (offline), SARSA (online), and exact value iteration /
backward induction over the exported MDP, plus epsilon-greedy exploration,
the discount-selection criterion |Q0 - AR| / |Q0 + AR| <= Delta, and greedy
trajectory extraction.

All runs are reproducible: (config, seed) determines every draw. Ties in
argmax are always broken toward the lowest action index.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .environment import GridEnvironment, Mode


@dataclass
class LearningConfig:
    """Learner hyper-parameters; defaults follow the reference setup."""

    alpha: float = 0.9
    gamma: float = 0.8
    epsilon: float = 0.3
    episodes: int = 2000
    max_steps_per_episode: int = 200
    delta: float = 0.1
    gamma_candidates: tuple = (0.5, 0.8, 0.9)
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha", "gamma", "epsilon"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.episodes < 1:
            raise ValueError("episodes must be at least 1")
        if self.max_steps_per_episode < 1:
            raise ValueError("max_steps_per_episode must be at least 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not self.gamma_candidates:
            raise ValueError("gamma_candidates must be non-empty")


@dataclass
class RunMetrics:
    """Per-episode learning curves for one run."""

    episode: np.ndarray            # 1-based index
    total_reward: np.ndarray
    average_reward: np.ndarray     # running mean of per-episode total reward
    q0: np.ndarray                 # max_a Q(start, a) before the episode
    q0_ar_ratio: np.ndarray        # |Q0 - AR| / |Q0 + AR|, AR per step
    steps: np.ndarray
    time_proxy_s: np.ndarray       # steps * cell_size / cruise_speed

    def __len__(self):
        return len(self.episode)

    @property
    def per_step_mean_reward(self):
        return float(self.total_reward.sum() / self.steps.sum())


@dataclass
class Policy:
    """Greedy policy and state values from value iteration."""

    action_of: np.ndarray   # (S,) int
    value_of: np.ndarray    # (S,) float
    qvalues: np.ndarray     # (S, A) float


def new_qtable(n_states, n_actions):
    return np.zeros((n_states, n_actions), dtype=float)


def q_update(qtable, s, a, r, s_next, alpha, gamma):
    """Off-policy one-step update toward r + gamma * max_a' Q(s', a').

    Returns the new Q(s, a); only that entry changes.
    """
    _check_index(qtable, s, a)
    _check_index(qtable, s_next, 0)
    if not (0.0 <= alpha <= 1.0 and 0.0 <= gamma <= 1.0):
        raise ValueError("alpha and gamma must lie in [0, 1]")
    target = r + gamma * qtable[s_next].max()
    qtable[s, a] += alpha * (target - qtable[s, a])
    return float(qtable[s, a])


def sarsa_update(qtable, s, a, r, s_next, a_next, alpha, gamma):
    """On-policy one-step update toward r + gamma * Q(s', a_taken)."""
    _check_index(qtable, s, a)
    _check_index(qtable, s_next, a_next)
    if not (0.0 <= alpha <= 1.0 and 0.0 <= gamma <= 1.0):
        raise ValueError("alpha and gamma must lie in [0, 1]")
    target = r + gamma * qtable[s_next, a_next]
    qtable[s, a] += alpha * (target - qtable[s, a])
    return float(qtable[s, a])


def _check_index(qtable, s, a):
    n_states, n_actions = qtable.shape
    if not (0 <= s < n_states and 0 <= a < n_actions):
        raise ValueError(f"state/action index ({s}, {a}) out of range")


def epsilon_greedy(q_row, epsilon, rng):
    """Argmax with probability 1 - epsilon (lowest index on ties), uniform
    otherwise. Draw order matches the episode kernels exactly."""
    n = len(q_row)
    if n == 0:
        raise ValueError("empty action-value row")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    a = int(np.argmax(q_row))
    if epsilon > 0.0:
        if rng.random() < epsilon:
            a = int(rng.random() * n)
    return a


def eq9_ratio(q0, ar):
    """Discount-selection ratio |Q0 - AR| / |Q0 + AR| (0 when both vanish)."""
    num = abs(q0 - ar)
    den = abs(q0 + ar)
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def _grid_kernel_args(env):
    g = env.grid
    r = env.reward
    ch = g.channel
    half = g.cell_size_m / 2.0
    return dict(
        cols=g.cols,
        rows=g.rows,
        start=env.start_index,
        terminal=env.terminal_index,
        tcol=g.terminal_cell[0],
        trow=g.terminal_cell[1],
        cell_size=g.cell_size_m,
        off_lo=-half,
        off_hi=half,
        h_lo=g.altitude_band_m[0],
        h_hi=g.altitude_band_m[1],
        tower_x=g.tower_xy_m[0],
        tower_y=g.tower_xy_m[1],
        mu=ch.mu,
        psi=ch.psi,
        eta_los=ch.eta_los,
        eta_nlos=ch.eta_nlos,
        fourpi_fc=4.0 * math.pi * ch.carrier_hz,
        light_speed=ch.light_speed,
        pl_mid=(r.pl_min_db + r.pl_max_db) / 2.0,
        pl_range=r.pl_max_db - r.pl_min_db,
        inv_mode=1 if r.mode is Mode.INV_PL else 0,
        step_penalty=r.step_penalty,
        revisit_penalty=r.revisit_penalty,
        terminal_bonus=r.terminal_bonus,
    )


def _run_episode_generic(env, q, alpha, gamma, epsilon, learn, sarsa, max_steps, rng):
    """Reference episode loop over the environment protocol.

    Used for the ladder (and as the semantic oracle for the grid kernels in
    the tests); draw order is identical to the kernels.
    """
    s = env.start_index
    trace = env.new_trace()
    total = 0.0
    steps = 0
    reached = False
    a = epsilon_greedy(q[s], epsilon, rng)
    for _ in range(max_steps):
        ns, r, done = env.step(s, a, trace, rng)
        total += r
        steps += 1
        if done:
            if learn:
                q[s, a] += alpha * (r - q[s, a])
            reached = True
            break
        a2 = epsilon_greedy(q[ns], epsilon, rng)
        if learn:
            target = q[ns, a2] if sarsa else q[ns].max()
            q[s, a] += alpha * (r + gamma * target - q[s, a])
        s = ns
        a = a2
    return total, steps, reached


def _run_learner(env, config, sarsa, learn=True, qtable=None):
    rng = np.random.default_rng(config.seed)
    q = new_qtable(env.n_states, env.n_actions) if qtable is None else qtable
    n = config.episodes
    totals = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    q0 = np.zeros(n)
    ratio = np.zeros(n)
    avg = np.zeros(n)

    use_kernel = isinstance(env, GridEnvironment) and env.n_actions == 4
    if use_kernel:
        args = _grid_kernel_args(env)
        visited = np.zeros(env.n_states, dtype=np.int64)

    cum_reward = 0.0
    cum_steps = 0
    start = env.start_index
    for e in range(n):
        q0[e] = q[start].max()
        if use_kernel:
            total, nsteps, _ = kernels.run_episode(
                q,
                visited,
                e + 1,
                **args,
                alpha=config.alpha,
                gamma=config.gamma,
                epsilon=config.epsilon,
                learn=1 if learn else 0,
                sarsa=1 if sarsa else 0,
                max_steps=config.max_steps_per_episode,
                rng=rng,
            )
        else:
            total, nsteps, _ = _run_episode_generic(
                env,
                q,
                config.alpha,
                config.gamma,
                config.epsilon,
                learn,
                sarsa,
                config.max_steps_per_episode,
                rng,
            )
        totals[e] = total
        steps[e] = nsteps
        cum_reward += total
        cum_steps += nsteps
        avg[e] = cum_reward / (e + 1)
        ratio[e] = eq9_ratio(q0[e], cum_reward / cum_steps)

    metrics = RunMetrics(
        episode=np.arange(1, n + 1),
        total_reward=totals,
        average_reward=avg,
        q0=q0,
        q0_ar_ratio=ratio,
        steps=steps,
        time_proxy_s=steps * env.seconds_per_step,
    )
    return q, metrics


def run_q_learning(env, config):
    """Off-policy learning run; returns the final table and per-episode metrics."""
    return _run_learner(env, config, sarsa=False)


def run_sarsa(env, config):
    """On-policy learning run; the bootstrap target is the action actually taken."""
    return _run_learner(env, config, sarsa=True)


def value_iteration(mdp, gamma, tolerance=1e-9):
    """Exact solution of an explicit deterministic MDP.

    Infinite-horizon: iterate v <- max_a [r + gamma * v(next)] until the
    max-norm change drops below ``tolerance``. Finite-horizon (ladder):
    exact backward induction over ``mdp.horizon`` sweeps, no tolerance.
    """
    if mdp.horizon is None and not 0.0 <= gamma < 1.0:
        raise ValueError("infinite-horizon value iteration needs gamma in [0, 1)")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    live = ~mdp.terminal
    v = np.zeros(mdp.n_states)
    if mdp.horizon is not None:
        for _ in range(mdp.horizon):
            qsa = mdp.rewards + gamma * v[mdp.next_state]
            v = np.where(live, qsa.max(axis=1), 0.0)
    else:
        while True:
            qsa = mdp.rewards + gamma * v[mdp.next_state]
            v_new = np.where(live, qsa.max(axis=1), 0.0)
            change = np.abs(v_new - v).max()
            v = v_new
            if change < tolerance:
                break
    qsa = mdp.rewards + gamma * v[mdp.next_state]
    qsa[mdp.terminal] = 0.0
    return Policy(action_of=qsa.argmax(axis=1), value_of=v, qvalues=qsa)


def run_mdp_rollouts(env, config, tolerance=1e-9):
    """The exact-planning agent: value iteration once, then greedy rollouts
    on the live environment each episode (no learning transient)."""
    policy = value_iteration(env.to_mdp(), config.gamma, tolerance)
    q = policy.qvalues.copy()
    greedy = replace(config, epsilon=0.0)
    return _run_learner(env, greedy, sarsa=False, learn=False, qtable=q)


def greedy_trajectory(policy_or_qtable, env, max_steps=10_000, rng=None):
    """Roll out argmax actions from the start; stops at the terminal, at
    ``max_steps``, or on the first revisited state (non-convergent policy)."""
    if isinstance(policy_or_qtable, Policy):
        action_of = policy_or_qtable.action_of
    else:
        action_of = np.argmax(policy_or_qtable, axis=1)
    if rng is None:
        rng = np.random.default_rng(0)
    trace = env.new_trace()
    s = env.start_index
    seen = {s}
    for _ in range(max_steps):
        a = int(action_of[s])
        ns, _, done = env.step(s, a, trace, rng)
        if done:
            return trace
        if ns in seen:
            trace.non_convergent = True
            return trace
        seen.add(ns)
        s = ns
    trace.non_convergent = True
    return trace


def average_reward(metrics):
    """Mean per-episode total reward over the run."""
    if len(metrics) == 0:
        raise ValueError("metrics must be non-empty")
    return float(metrics.total_reward.mean())


@dataclass
class DiscountSelection:
    """Result of the discount-factor sweep: the chosen gamma (or None) and
    the full per-candidate ratio traces for plotting."""

    gamma_star: float = None
    traces: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    @property
    def selected(self):
        return self.gamma_star is not None


def select_discount_factor(env, config, algorithm="qlearning"):
    """Sweep gamma candidates; pick the first whose ratio trace stays at or
    below Delta over the final 10% of episodes."""
    runners = {
        "qlearning": run_q_learning,
        "sarsa": run_sarsa,
        "value_iteration": run_mdp_rollouts,
    }
    run = runners[algorithm]
    result = DiscountSelection()
    tail = max(1, config.episodes // 10)
    for gamma in config.gamma_candidates:
        _, metrics = run(env, replace(config, gamma=gamma))
        result.traces[gamma] = metrics.q0_ar_ratio
        result.metrics[gamma] = metrics
        if result.gamma_star is None and np.all(
            metrics.q0_ar_ratio[-tail:] <= config.delta
        ):
            result.gamma_star = gamma
    return result
