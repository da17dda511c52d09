"""Pure-Python episode kernel for the gridworld.

Fallback twin of the compiled kernel in ``_grid_kernel.pyx``. The two are
kept arithmetic-identical (same operations in the same order, same draws
from the same generator stream), so a run produces bit-identical results on
either backend. Any change here must be mirrored in the .pyx file.
"""

import math

RAD2DEG = 180.0 / math.pi

BACKEND = "python"


def run_episode(
    q,
    visited,
    mark,
    cols,
    rows,
    start,
    terminal,
    tcol,
    trow,
    cell_size,
    off_lo,
    off_hi,
    h_lo,
    h_hi,
    tower_x,
    tower_y,
    mu,
    psi,
    eta_los,
    eta_nlos,
    fourpi_fc,
    light_speed,
    pl_mid,
    pl_range,
    inv_mode,
    step_penalty,
    revisit_penalty,
    terminal_bonus,
    alpha,
    gamma,
    epsilon,
    learn,
    sarsa,
    max_steps,
    rng,
):
    """Run one episode; updates ``q`` and ``visited`` in place.

    Returns (total_reward, steps, reached_terminal).
    """
    uniform = rng.random
    n_actions = 4

    def select(s):
        q0 = q[s, 0]
        q1 = q[s, 1]
        q2 = q[s, 2]
        q3 = q[s, 3]
        a = 0
        best = q0
        if q1 > best:
            a = 1
            best = q1
        if q2 > best:
            a = 2
            best = q2
        if q3 > best:
            a = 3
        if epsilon > 0.0:
            if uniform() < epsilon:
                a = int(uniform() * n_actions)
        return a

    s = start
    visited[s] = mark
    total = 0.0
    steps = 0
    reached = False
    a = select(s)

    for _ in range(max_steps):
        col = s % cols
        row = s // cols
        ncol = col
        nrow = row
        if a == 0:
            nrow = row + 1
        elif a == 1:
            nrow = row - 1
        elif a == 2:
            ncol = col - 1
        else:
            ncol = col + 1
        if ncol < 0 or ncol >= cols or nrow < 0 or nrow >= rows:
            ncol = col
            nrow = row
        ns = nrow * cols + ncol

        moved = ns != s
        is_new = visited[ns] != mark
        closer = (
            abs(ncol - tcol) + abs(nrow - trow) < abs(col - tcol) + abs(row - trow)
        )

        if is_new or closer:
            u = uniform()
            dx = off_lo + (off_hi - off_lo) * u
            u = uniform()
            dy = off_lo + (off_hi - off_lo) * u
            u = uniform()
            h = h_lo + (h_hi - h_lo) * u
            ux = (ncol + 0.5) * cell_size + dx
            uy = (nrow + 0.5) * cell_size + dy
            ddx = ux - tower_x
            ddy = uy - tower_y
            horizontal = math.sqrt(ddx * ddx + ddy * ddy)
            d = math.sqrt(h * h + horizontal * horizontal)
            theta_deg = math.atan2(h, horizontal) * RAD2DEG
            p_los = 1.0 / (1.0 + mu * math.exp(-psi * (theta_deg - mu)))
            pl = (
                20.0 * math.log10(fourpi_fc * d / light_speed)
                + p_los * eta_los
                + (1.0 - p_los) * eta_nlos
            )
            x = 2.0 * (pl - pl_mid) / pl_range
            if x > 1.0:
                x = 1.0
            elif x < -1.0:
                x = -1.0
            if inv_mode:
                if x == 0.0:
                    x = 1e-9
                r = 1.0 / (1.0 + math.exp(-(1.0 / x)))
            else:
                r = 1.0 / (1.0 + math.exp(-x))
        else:
            r = step_penalty

        if moved and not is_new:
            r += revisit_penalty

        done = ns == terminal
        if done:
            r += terminal_bonus

        total += r
        steps += 1
        visited[ns] = mark

        if done:
            if learn:
                q[s, a] += alpha * (r - q[s, a])
            reached = True
            break

        a2 = select(ns)
        if learn:
            if sarsa:
                target = q[ns, a2]
            else:
                target = q[ns, 0]
                if q[ns, 1] > target:
                    target = q[ns, 1]
                if q[ns, 2] > target:
                    target = q[ns, 2]
                if q[ns, 3] > target:
                    target = q[ns, 3]
            q[s, a] += alpha * (r + gamma * target - q[s, a])
        s = ns
        a = a2

    return total, steps, reached
