"""Experiment harness: configuration, seeding, orchestration, artifacts.

A TOML document with flat sections configures the whole experiment; every
omitted field falls back to the reference simulation parameters, so an empty
document reproduces the default setup exactly. Unknown sections or keys are
rejected with a field path (typo safety).

``run_experiment`` executes each (algorithm, seed) pair, writing per-run
``metrics.csv`` / ``trajectory.csv`` plus SVG plots, and a root
``manifest.csv`` listing every artifact with its seed and config hash.
``compare_report`` condenses several runs into ``comparison.csv`` with
per-algorithm summary metrics and pairwise ordering booleans.
"""

import csv
import hashlib
import json
import os
import shutil
from dataclasses import dataclass, field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import plots
from .agents import (
    LearningConfig,
    greedy_trajectory,
    run_mdp_rollouts,
    run_q_learning,
    run_sarsa,
)
from .channel import ChannelParams
from .environment import (
    GridEnvironment,
    GridWorld,
    LadderEnvironment,
    LadderMdp,
    Mode,
    RewardSpec,
)
from .objective import NetworkLayout, PositionBox, nonconvexity_probe


class ConfigError(ValueError):
    """Malformed, out-of-range, or unknown configuration input."""


ALGORITHMS = ("qlearning", "sarsa", "value_iteration")
SCENARIOS = ("gridworld", "ladder")
SMOOTH_WINDOW = 50


@dataclass
class AntennaCounts:
    """Array sizes of the reference setup (UE uplink, UAV relay, CU receiver)."""

    n_t_ue: int = 2
    n_r_uav: int = 2
    n_t_uav: int = 2
    n_r_cu: int = 100


@dataclass
class ProbeSpec:
    """Objective-landscape scan: network layout plus scan resolution.

    The default layout (two UE clusters at opposite corners, one mid-edge
    tower, milliwatt-class node powers) produces a clearly bimodal
    objective over the default service area.
    """

    resolution: int = 81
    ue_xy: tuple = ((60.0, 60.0), (100.0, 60.0), (340.0, 340.0), (300.0, 340.0))
    ue_tx_power_w: tuple = (0.001, 0.001, 0.001, 0.001)
    cu_xy: tuple = ((200.0, 0.0),)
    cu_height_m: tuple = (30.0,)
    uav_tx_power_w: float = 0.01

    def layout(self):
        association = [0] * len(self.cu_xy)
        association[0] = 1
        return NetworkLayout(
            ue_xy=np.asarray(self.ue_xy, dtype=float),
            ue_tx_power_w=np.asarray(self.ue_tx_power_w, dtype=float),
            cu_xy=np.asarray(self.cu_xy, dtype=float),
            cu_height_m=np.asarray(self.cu_height_m, dtype=float),
            association=np.asarray(association),
            uav_tx_power_w=self.uav_tx_power_w,
        )


@dataclass
class ExperimentConfig:
    """Full experiment description; defaults reproduce the reference setup."""

    scenario: str = "gridworld"
    algorithm: str = "all"
    seeds: tuple = (0,)
    output_dir: str = "out"
    grid: GridWorld = field(default_factory=GridWorld)
    ladder: LadderMdp = field(default_factory=LadderMdp)
    learning: LearningConfig = field(default_factory=LearningConfig)
    reward: RewardSpec = field(default_factory=RewardSpec)
    box: PositionBox = field(default_factory=PositionBox)
    antennas: AntennaCounts = field(default_factory=AntennaCounts)
    probe: ProbeSpec = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if self.algorithm not in ALGORITHMS + ("all",):
            raise ConfigError(f"algorithm must be one of {ALGORITHMS + ('all',)}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")

    @property
    def algorithms(self):
        return ALGORITHMS if self.algorithm == "all" else (self.algorithm,)

    def environment(self):
        if self.scenario == "gridworld":
            return GridEnvironment(self.grid, self.reward)
        return LadderEnvironment(self.ladder)

    def semantic_dict(self, include_run=True):
        out = {
            "grid": _plain(self.grid),
            "ladder": _plain(self.ladder),
            "learning": _plain(self.learning),
            "channel": _plain(self.grid.channel),
            "reward": _plain(self.reward),
            "box": _plain(self.box),
            "antennas": _plain(self.antennas),
            "probe": _plain(self.probe) if self.probe else None,
            "scenario": self.scenario,
        }
        if include_run:
            out["algorithm"] = self.algorithm
            out["seeds"] = list(self.seeds)
        return out

    def config_hash(self):
        return _digest(self.semantic_dict(include_run=True))

    def env_hash(self):
        return _digest(self.semantic_dict(include_run=False))


def _plain(obj):
    """Dataclass -> JSON-serializable dict (tuples/arrays to lists)."""
    if obj is None:
        return None
    out = {}
    for name, value in vars(obj).items():
        if isinstance(value, np.ndarray):
            out[name] = value.tolist()
        elif isinstance(value, (tuple, list)):
            out[name] = [list(v) if isinstance(v, (tuple, list)) else v for v in value]
        elif isinstance(value, frozenset):
            out[name] = sorted(list(v) for v in value)
        elif isinstance(value, Mode):
            out[name] = value.value
        elif isinstance(value, (ChannelParams,)):
            out[name] = _plain(value)
        else:
            out[name] = value
    return out


def _digest(payload):
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Config parsing

_SECTION_FIELDS = {
    "run": ("scenario", "algorithm", "seeds", "output_dir"),
    "grid": (
        "cols",
        "rows",
        "cell_size_m",
        "start_cell",
        "terminal_cell",
        "altitude_band_m",
        "nodes_per_cell",
        "node_tx_power_w",
        "speed_mps",
        "tower_xy_m",
    ),
    "ladder": ("stages", "start_rail", "blocked", "blocked_penalty"),
    "learning": (
        "alpha",
        "gamma",
        "epsilon",
        "episodes",
        "max_steps_per_episode",
        "delta",
        "gamma_candidates",
        "seed",
    ),
    "channel": (
        "mu",
        "psi",
        "eta_los",
        "eta_nlos",
        "carrier_hz",
        "light_speed",
        "noise_power",
        "beta",
        "noise_sigma",
    ),
    "reward": (
        "mode",
        "pl_min_db",
        "pl_max_db",
        "step_penalty",
        "revisit_penalty",
        "terminal_bonus",
    ),
    "box": ("x_range", "y_range", "h_range"),
    "antennas": ("n_t_ue", "n_r_uav", "n_t_uav", "n_r_cu"),
    "probe": (
        "resolution",
        "ue_xy",
        "ue_tx_power_w",
        "cu_xy",
        "cu_height_m",
        "uav_tx_power_w",
    ),
}


def load_config(text):
    """Parse a TOML document into an ExperimentConfig with full defaults."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    for section in doc:
        if section not in _SECTION_FIELDS:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(doc[section], dict):
            raise ConfigError(f"[{section}] must be a section, not a value")
        for key in doc[section]:
            if key not in _SECTION_FIELDS[section]:
                raise ConfigError(f"unknown key '{section}.{key}'")

    def section(name):
        return {k: _tuplify(v) for k, v in doc.get(name, {}).items()}

    def build(cls, name, **extra):
        try:
            return cls(**section(name), **extra)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid [{name}] value: {exc}") from None

    channel = build(ChannelParams, "channel")
    grid_kwargs = section("grid")
    try:
        grid = GridWorld(**grid_kwargs, channel=channel)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [grid] value: {exc}") from None

    ladder_kwargs = section("ladder")
    if "blocked" in ladder_kwargs:
        ladder_kwargs["blocked"] = frozenset(
            tuple(b) for b in ladder_kwargs["blocked"]
        )
    try:
        ladder = LadderMdp(**ladder_kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [ladder] value: {exc}") from None

    learning = build(LearningConfig, "learning")
    reward = build(RewardSpec, "reward")
    box = build(PositionBox, "box")
    antennas = build(AntennaCounts, "antennas")
    probe = build(ProbeSpec, "probe") if "probe" in doc else None

    run = section("run")
    try:
        return ExperimentConfig(
            grid=grid,
            ladder=ladder,
            learning=learning,
            reward=reward,
            box=box,
            antennas=antennas,
            probe=probe,
            **run,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [run] value: {exc}") from None


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


# ---------------------------------------------------------------------------
# Artifact emission

def _fmt(value):
    """Serialize a number with 17 significant digits (round-trip exact)."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


METRICS_HEADER = (
    "episode",
    "total_reward",
    "average_reward",
    "q0",
    "q0_ar_ratio",
    "steps",
    "time_proxy_s",
)

_RUNNERS = {
    "qlearning": run_q_learning,
    "sarsa": run_sarsa,
    "value_iteration": run_mdp_rollouts,
}


def write_metrics(metrics, path):
    rows = zip(
        metrics.episode,
        metrics.total_reward,
        metrics.average_reward,
        metrics.q0,
        metrics.q0_ar_ratio,
        metrics.steps,
        metrics.time_proxy_s,
    )
    write_csv(path, METRICS_HEADER, rows)


def read_metrics(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    cols = {name: np.array([float(r[name]) for r in rows]) for name in METRICS_HEADER}
    return cols


def _trajectory_cells(env, qtable, config):
    trace = greedy_trajectory(
        qtable, env, rng=np.random.default_rng(config.learning.seed)
    )
    if hasattr(env, "grid"):
        decode = env.grid.index_cell
    else:
        decode = lambda idx: tuple(reversed(env.index_state(idx)))
    cells = [decode(trace.steps[0][0])] if trace.steps else []
    cells += [decode(ns) for _, _, _, ns in trace.steps]
    return cells, trace


def run_experiment(config):
    """Run every (algorithm, seed) pair and emit all artifacts.

    Returns the manifest as a list of (file, algorithm, seed, config_hash,
    env_hash) rows; the same rows land in ``<output_dir>/manifest.csv``.
    """
    out_root = config.output_dir
    os.makedirs(out_root, exist_ok=True)
    manifest = []
    cfg_hash = config.config_hash()
    env_hash = config.env_hash()

    for algorithm in config.algorithms:
        for seed in config.seeds:
            run_dir = os.path.join(out_root, f"{algorithm}_seed{seed}")
            try:
                files = _run_single(config, algorithm, seed, run_dir)
            except Exception:
                shutil.rmtree(run_dir, ignore_errors=True)
                raise
            manifest += [(os.path.relpath(f, out_root), algorithm, seed) for f in files]

    manifest_rows = [
        (name, algorithm, seed, cfg_hash, env_hash)
        for name, algorithm, seed in manifest
    ]
    manifest_path = os.path.join(out_root, "manifest.csv")
    write_csv(
        manifest_path,
        ("file", "algorithm", "seed", "config_hash", "env_hash"),
        manifest_rows,
    )
    return manifest_path


def _run_single(config, algorithm, seed, run_dir):
    os.makedirs(run_dir, exist_ok=True)
    env = config.environment()
    learning = replace(config.learning, seed=seed)
    qtable, metrics = _RUNNERS[algorithm](env, learning)

    files = []

    metrics_path = os.path.join(run_dir, "metrics.csv")
    write_metrics(metrics, metrics_path)
    files.append(metrics_path)

    cells, _ = _trajectory_cells(env, qtable, config)
    traj_path = os.path.join(run_dir, "trajectory.csv")
    write_csv(
        traj_path,
        ("step", "col", "row"),
        [(i, c, r) for i, (c, r) in enumerate(cells)],
    )
    files.append(traj_path)

    if config.probe is not None:
        report = nonconvexity_probe(
            config.probe.layout(), config.box, config.probe.resolution, config.grid.channel
        )
        field_path = os.path.join(run_dir, "objective_field.csv")
        write_csv(field_path, ("x", "y", "objective"), report.rows())
        files.append(field_path)

    avg_path = os.path.join(run_dir, "avg_reward.svg")
    plots.save_avg_reward(metrics, avg_path, SMOOTH_WINDOW)
    files.append(avg_path)

    ratio_path = os.path.join(run_dir, "q0_ratio.svg")
    plots.save_q0_ratio(metrics, ratio_path, config.learning.delta)
    files.append(ratio_path)

    traj_svg = os.path.join(run_dir, "trajectory.svg")
    if config.scenario == "gridworld":
        plots.save_trajectory(
            cells,
            config.grid.cols,
            config.grid.rows,
            config.grid.start_cell,
            config.grid.terminal_cell,
            traj_svg,
        )
    else:
        plots.save_trajectory(
            cells,
            config.ladder.stages,
            config.ladder.rails,
            (0, config.ladder.start_rail),
            (config.ladder.stages - 1, 0),
            traj_svg,
        )
    files.append(traj_svg)
    return files


def run_probe(config):
    """Standalone objective-landscape scan; emits the field CSV, the local
    maxima table, the heatmap SVG, and a manifest."""
    if config.probe is None:
        raise ConfigError("no [probe] section in the configuration")
    out_root = config.output_dir
    os.makedirs(out_root, exist_ok=True)
    report = nonconvexity_probe(
        config.probe.layout(), config.box, config.probe.resolution, config.grid.channel
    )
    files = []
    field_path = os.path.join(out_root, "objective_field.csv")
    write_csv(field_path, ("x", "y", "objective"), report.rows())
    files.append(field_path)
    maxima_path = os.path.join(out_root, "local_maxima.csv")
    write_csv(
        maxima_path,
        ("x", "y", "objective"),
        report.local_maxima,
    )
    files.append(maxima_path)
    svg_path = os.path.join(out_root, "objective_field.svg")
    plots.save_field(report, svg_path)
    files.append(svg_path)
    write_csv(
        os.path.join(out_root, "manifest.csv"),
        ("file", "algorithm", "seed", "config_hash", "env_hash"),
        [
            (os.path.relpath(f, out_root), "probe", "", config.config_hash(), config.env_hash())
            for f in files
        ],
    )
    return report


# ---------------------------------------------------------------------------
# Comparison report

def episodes_to_criterion(ratio, delta):
    """First 1-based episode from which the ratio stays <= delta through the
    end of the run; len(ratio) + 1 when it never settles below."""
    n = len(ratio)
    if n == 0 or ratio[-1] > delta:
        return n + 1
    i = n - 1
    while i > 0 and ratio[i - 1] <= delta:
        i -= 1
    return i + 1


def final_smoothed(values, window=SMOOTH_WINDOW):
    w = min(window, len(values))
    return float(np.mean(values[-w:]))


def _read_manifest(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows, os.path.dirname(os.path.abspath(path))


def compare_report(manifest_paths, out_dir, delta=0.1):
    """Summarize several runs into comparison.csv.

    Per algorithm (averaged over seeds): episodes-to-criterion, final
    smoothed average reward (window 50), mean steps, mean flight-time proxy.
    Pairwise orderings are strict (ties emit false).
    """
    per_algo = {}
    env_hashes = set()
    for path in manifest_paths:
        rows, root = _read_manifest(path)
        for row in rows:
            env_hashes.add(row["env_hash"])
            if len(env_hashes) > 1:
                raise ValueError(
                    "mismatched environments: manifests carry different env hashes"
                )
            if not row["file"].endswith("metrics.csv"):
                continue
            algo = row["algorithm"]
            metrics = read_metrics(os.path.join(root, row["file"]))
            per_algo.setdefault(algo, []).append(metrics)

    if len(per_algo) < 2:
        raise ValueError("compare_report needs runs from at least 2 algorithms")

    summary = {}
    for algo, runs in per_algo.items():
        summary[algo] = {
            "episodes_to_criterion": float(
                np.mean([episodes_to_criterion(m["q0_ar_ratio"], delta) for m in runs])
            ),
            "final_smoothed_avg_reward": float(
                np.mean([final_smoothed(m["total_reward"]) for m in runs])
            ),
            "mean_steps": float(np.mean([m["steps"].mean() for m in runs])),
            "mean_time_proxy_s": float(
                np.mean([m["time_proxy_s"].mean() for m in runs])
            ),
        }

    rows = []
    for algo in sorted(summary):
        for key, value in summary[algo].items():
            rows.append(("metric", f"{algo}.{key}", value))
    algos = sorted(summary)
    for a in algos:
        for b in algos:
            if a == b:
                continue
            rows.append(
                (
                    "ordering",
                    f"{a}_reaches_criterion_before_{b}",
                    summary[a]["episodes_to_criterion"]
                    < summary[b]["episodes_to_criterion"],
                )
            )
            rows.append(
                (
                    "ordering",
                    f"{a}_final_reward_above_{b}",
                    summary[a]["final_smoothed_avg_reward"]
                    > summary[b]["final_smoothed_avg_reward"],
                )
            )

    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "comparison.csv"), ("kind", "name", "value"), rows)
    return summary
