# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled episode kernel for the gridworld.

Arithmetic-identical twin of ``_grid_kernel_py.py`` (same operations in the
same order, same draws from the same generator stream). Any change here must
be mirrored there.

The kernel consumes the numpy Generator's bit stream directly through the
BitGenerator capsule, so compiled and pure-Python runs are bit-identical.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport atan2, exp, log10, sqrt, M_PI

from numpy.random cimport bitgen_t

BACKEND = "cython"

cdef double RAD2DEG = 180.0 / M_PI


cdef inline int _select(double[:, ::1] q, Py_ssize_t s, double epsilon,
                        bitgen_t *bg) noexcept:
    cdef double q0 = q[s, 0]
    cdef double q1 = q[s, 1]
    cdef double q2 = q[s, 2]
    cdef double q3 = q[s, 3]
    cdef int a = 0
    cdef double best = q0
    cdef double u
    if q1 > best:
        a = 1
        best = q1
    if q2 > best:
        a = 2
        best = q2
    if q3 > best:
        a = 3
    if epsilon > 0.0:
        u = bg.next_double(bg.state)
        if u < epsilon:
            u = bg.next_double(bg.state)
            a = <int>(u * 4.0)
    return a


def run_episode(
    double[:, ::1] q,
    long long[::1] visited,
    long long mark,
    int cols,
    int rows,
    int start,
    int terminal,
    int tcol,
    int trow,
    double cell_size,
    double off_lo,
    double off_hi,
    double h_lo,
    double h_hi,
    double tower_x,
    double tower_y,
    double mu,
    double psi,
    double eta_los,
    double eta_nlos,
    double fourpi_fc,
    double light_speed,
    double pl_mid,
    double pl_range,
    int inv_mode,
    double step_penalty,
    double revisit_penalty,
    double terminal_bonus,
    double alpha,
    double gamma,
    double epsilon,
    int learn,
    int sarsa,
    int max_steps,
    rng,
):
    """Run one episode; updates ``q`` and ``visited`` in place.

    Returns (total_reward, steps, reached_terminal).
    """
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng must be a numpy Generator")
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef Py_ssize_t s = start
    cdef Py_ssize_t ns
    cdef int a, a2, col, row, ncol, nrow
    cdef bint moved, is_new, closer, done, reached = False
    cdef double total = 0.0
    cdef int steps = 0
    cdef int t
    cdef double u, dx, dy, h, ux, uy, ddx, ddy, horizontal, d
    cdef double theta_deg, p_los, pl, x, r, target

    visited[s] = mark
    a = _select(q, s, epsilon, bg)

    for t in range(max_steps):
        col = <int>(s % cols)
        row = <int>(s // cols)
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
            u = bg.next_double(bg.state)
            dx = off_lo + (off_hi - off_lo) * u
            u = bg.next_double(bg.state)
            dy = off_lo + (off_hi - off_lo) * u
            u = bg.next_double(bg.state)
            h = h_lo + (h_hi - h_lo) * u
            ux = (ncol + 0.5) * cell_size + dx
            uy = (nrow + 0.5) * cell_size + dy
            ddx = ux - tower_x
            ddy = uy - tower_y
            horizontal = sqrt(ddx * ddx + ddy * ddy)
            d = sqrt(h * h + horizontal * horizontal)
            theta_deg = atan2(h, horizontal) * RAD2DEG
            p_los = 1.0 / (1.0 + mu * exp(-psi * (theta_deg - mu)))
            pl = (
                20.0 * log10(fourpi_fc * d / light_speed)
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
                r = 1.0 / (1.0 + exp(-(1.0 / x)))
            else:
                r = 1.0 / (1.0 + exp(-x))
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

        a2 = _select(q, ns, epsilon, bg)
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
