"""Benchmark the compiled episode kernel against the pure-Python fallback.

Both backends consume the same generator stream and produce bit-identical
results; this script measures the speed difference on realistic learning
workloads.

Run: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import arusim._grid_kernel_py as py_kernel
from arusim.agents import _grid_kernel_args
from arusim.environment import GridEnvironment, GridWorld

try:
    import arusim._grid_kernel as cy_kernel
except ImportError:
    cy_kernel = None


def run_backend(mod, env, episodes, seed):
    args = _grid_kernel_args(env)
    rng = np.random.default_rng(seed)
    q = np.zeros((env.n_states, env.n_actions))
    visited = np.zeros(env.n_states, dtype=np.int64)
    t0 = time.perf_counter()
    total_steps = 0
    for e in range(episodes):
        _, steps, _ = mod.run_episode(
            q, visited, e + 1, **args,
            alpha=0.9, gamma=0.8, epsilon=0.3,
            learn=1, sarsa=0, max_steps=200, rng=rng,
        )
        total_steps += steps
    elapsed = time.perf_counter() - t0
    return elapsed, total_steps, q


def bench(name, grid, episodes, seed=0):
    env = GridEnvironment(grid)
    t_py, steps, q_py = run_backend(py_kernel, env, episodes, seed)
    line = f"{name:24s} {episodes:6d} ep {steps:9d} steps | python {t_py:7.3f}s"
    if cy_kernel is not None:
        t_cy, steps_cy, q_cy = run_backend(cy_kernel, env, episodes, seed)
        assert steps_cy == steps and np.array_equal(q_py, q_cy), "backends diverged"
        line += f" | cython {t_cy:7.3f}s | speedup {t_py / t_cy:6.1f}x"
    else:
        line += " | cython unavailable"
    print(line)


def main():
    print("episode-kernel backend benchmark (identical seeds, identical results)")
    bench("5x5 default grid", GridWorld(), 2000)
    bench("10x10 grid", GridWorld(cols=10, rows=10, terminal_cell=(9, 9)), 2000)
    bench(
        "20x20 grid",
        GridWorld(cols=20, rows=20, terminal_cell=(19, 19)),
        2000,
    )


if __name__ == "__main__":
    main()
