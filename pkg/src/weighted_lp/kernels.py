"""Compiled inner loops for the path-following hot path.

The public functions in ``linalg``, ``weights`` and ``smoothing`` are the
reference implementations; the kernels here compute the same quantities
with fewer temporaries and no interpreter overhead per element.  Every
kernel reports failure through a flag instead of raising.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def row_factor(B, floor):
    """Lower factor ``L`` with ``L L^T = B^T B``, from a QR factorization of ``B``.

    Returns ``(L, Q, ok)``; ``ok`` is False when a pivot falls below ``floor``
    times the norm of its column.  Rows enter the factorization by
    decreasing norm, which keeps small rows accurate when the row scales
    are graded over many orders of magnitude.
    """
    m, n = B.shape
    norms = np.empty(m)
    for r in range(m):
        norms[r] = np.sum(B[r] * B[r])
    order = np.argsort(-norms, kind="mergesort")
    Qs, R = np.linalg.qr(B[order])
    Q = np.empty((m, n))
    for k in range(m):
        Q[order[k]] = Qs[k]
    L = np.zeros((n, n))
    for j in range(n):
        col = 0.0
        for i in range(j + 1):
            col += R[i, j] * R[i, j]
        if not (abs(R[j, j]) > floor * np.sqrt(col)):
            return L, Q, False
    for i in range(n):
        for j in range(i, n):
            L[j, i] = R[i, j]
    return L, Q, True


@njit(cache=True)
def forward(L, v):
    n = L.shape[0]
    y = np.empty(n)
    for i in range(n):
        acc = v[i]
        for k in range(i):
            acc -= L[i, k] * y[k]
        y[i] = acc / L[i, i]
    return y


@njit(cache=True)
def backward(L, y):
    n = L.shape[0]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= L[k, i] * x[k]
        x[i] = acc / L[i, i]
    return x


@njit(cache=True)
def newton_data(A, s, w, tc, floor):
    """Newton step, centrality and slack sensitivity at one iterate.

    Returns ``(h, delta, gamma, ok)``.
    """
    m, n = A.shape
    B = np.empty((m, n))
    for r in range(m):
        q = np.sqrt(w[r]) / s[r]
        for j in range(n):
            B[r, j] = A[r, j] * q
    L, Q, ok = row_factor(B, floor)
    h = np.zeros(n)
    if not ok:
        return h, np.inf, np.inf, False
    grad = tc.copy()
    for r in range(m):
        q = w[r] / s[r]
        for j in range(n):
            grad[j] -= A[r, j] * q
    u = forward(L, grad)
    delta = np.sqrt(np.sum(u * u))
    h = backward(L, u)
    gmax = 0.0
    row = np.empty(n)
    for r in range(m):
        for j in range(n):
            row[j] = A[r, j] / s[r]
        y = forward(L, row)
        g = np.sum(y * y)
        if g > gmax:
            gmax = g
    return h, delta, np.sqrt(gmax), True


@njit(cache=True)
def weight_pieces(As, z, alpha, floor):
    """Leverage scores and ``Sigma - P*P`` for the rows of ``As`` under weights ``z^alpha``.

    Uses a QR factorization of the row-weighted matrix, which keeps the
    projection accurate when the slacks span many orders of magnitude.
    """
    m, n = As.shape
    B = np.empty((m, n))
    for r in range(m):
        rx = np.sqrt(z[r] ** alpha)
        for j in range(n):
            B[r, j] = As[r, j] * rx
    sigma = np.zeros(m)
    lap = np.zeros((m, m))
    L, Q, ok = row_factor(B, floor)
    if not ok:
        return sigma, lap, False
    P = Q @ np.ascontiguousarray(Q.T)
    for i in range(m):
        sigma[i] = P[i, i]
    for i in range(m):
        for j in range(m):
            lap[i, j] = -P[i, j] * P[i, j]
        lap[i, i] += sigma[i]
    return sigma, lap, True


@njit(cache=True)
def weight_newton_step(As, z, alpha, beta, floor):
    """One undamped Newton step on the weight fixed-point equation.

    Returns ``(z_new, residual_before, largest_relative_step, ok)``.
    """
    m = z.shape[0]
    sigma, lap, ok = weight_pieces(As, z, alpha, floor)
    if not ok:
        return z, np.inf, np.inf, False
    F = z - sigma - beta
    err = 0.0
    for i in range(m):
        e = abs(F[i]) / z[i]
        if e > err:
            err = e
    J = -alpha * lap
    for i in range(m):
        J[i, i] += sigma[i] + beta
    step = np.linalg.solve(J, -F)
    big = 0.0
    for i in range(m):
        if abs(step[i]) > big:
            big = abs(step[i])
    if big > 0.5:
        return z, err, big, False
    return z * (1.0 + step), err, big, True


@njit(cache=True)
def ball_box(a, l):
    """Maximizer of ``<a, x>`` over the unit ball intersected with the box ``|x| <= l``."""
    m = a.shape[0]
    nrm = np.sqrt(np.sum(a * a))
    x = np.zeros(m)
    if nrm == 0.0:
        return x
    an = a / nrm
    key = np.empty(m)
    for i in range(m):
        key[i] = -abs(an[i]) / l[i]
    order = np.argsort(key, kind="mergesort")
    # unused ball mass of the suffix, summed from the tail to avoid cancellation
    suffix = np.zeros(m + 1)
    for i in range(m - 1, -1, -1):
        j = order[i]
        suffix[i] = suffix[i + 1] + an[j] * an[j]
    l_left = 1.0
    a_left = suffix[0]
    k = m
    for i in range(m):
        j = order[i]
        a_left = suffix[i]
        if l_left <= 0.0 or a_left <= 0.0:
            k = i
            break
        if (l_left / a_left) * an[j] * an[j] <= l[j] * l[j]:
            k = i
            break
        l_left -= l[j] * l[j]
        a_left = suffix[i + 1]
    scale = 0.0
    if k < m and a_left > 0.0 and l_left > 0.0:
        scale = np.sqrt(l_left / a_left)
    for i in range(m):
        j = order[i]
        if i < k:
            x[j] = np.sign(an[j]) * l[j]
        else:
            x[j] = scale * an[j]
    return x


@njit(cache=True)
def leverage(As, x, floor):
    """Leverage scores of the rows of ``As`` under row weights ``x``."""
    m, n = As.shape
    B = np.empty((m, n))
    for r in range(m):
        rx = np.sqrt(x[r])
        for j in range(n):
            B[r, j] = As[r, j] * rx
    sigma = np.zeros(m)
    L, Q, ok = row_factor(B, floor)
    if not ok:
        return sigma, False
    for r in range(m):
        acc = 0.0
        for j in range(n):
            acc += Q[r, j] * Q[r, j]
        sigma[r] = acc
    return sigma, True


# status codes returned by centering_step
OK, NON_INTERIOR, RANK_DEFICIENT, OVERFLOW = 0, 1, 2, 3


@njit(cache=True)
def centering_step(A, x, s, w, h, delta, r, z_prev, alpha, beta, box, rounds,
                   mu, eps_game, c_gamma, floor, clip, project):
    """r-step, truncated weight tracking and the potential-guided weight move.

    The weight estimate ``z`` starts at ``z_prev`` and takes ``rounds`` clamped
    averaging steps with exact leverage scores at the new slacks.  With
    ``clip`` no coordinate of ``log w`` is moved past ``log z``.  With
    ``project`` the move is instead the point of the move set nearest (in
    the local weighted norm) to the correction ``log z - log w``.
    Returns ``(x_new, s_new, w_new, z, status)``.
    """
    m, n = A.shape
    Ah = A @ h
    x_new = x - h / (1.0 + r)
    s_new = np.empty(m)
    w_mid = np.empty(m)
    for i in range(m):
        rel = Ah[i] / s[i]
        s_new[i] = s[i] * (1.0 - rel / (1.0 + r))
        w_mid[i] = w[i] * (1.0 + (r / (1.0 + r)) * rel)
        if not (s_new[i] > 0.0 and w_mid[i] > 0.0):
            return x_new, s_new, w_mid, z_prev, NON_INTERIOR
    As = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            As[i, j] = A[i, j] / s_new[i]
    z = z_prev.copy()
    for _ in range(rounds):
        sigma, ok = leverage(As, z**alpha, floor)
        if not ok:
            return x_new, s_new, w_mid, z, RANK_DEFICIENT
        for i in range(m):
            v = 0.5 * (z[i] + sigma[i] + beta)
            lo = z_prev[i] * (1.0 - box)
            hi = z_prev[i] * (1.0 + box)
            z[i] = min(max(v, lo), hi)
    if delta <= 0.0:
        return x_new, s_new, w_mid, z, OK
    grad = np.empty(m)
    psi = np.empty(m)
    any_grad = False
    for i in range(m):
        psi[i] = np.log(z[i]) - np.log(w_mid[i])
        a = mu * abs(psi[i])
        if a > 700.0:
            return x_new, s_new, w_mid, z, OVERFLOW
        grad[i] = mu * np.sign(psi[i]) * 2.0 * np.sinh(a)
        if grad[i] != 0.0:
            any_grad = True
    if not any_grad:
        return x_new, s_new, w_mid, z, OK
    b = (r + 0.14) / (r + 1.0) * delta
    cap = 4.0 * c_gamma * delta
    root_w = np.sqrt(w_mid)
    w_new = np.empty(m)
    if project:
        u = project_ball_box(psi * root_w / b, cap * root_w / b)
        for i in range(m):
            w_new[i] = w_mid[i] * np.exp(u[i] * b / root_w[i])
        return x_new, s_new, w_new, z, OK
    u = ball_box(grad / root_w, cap * root_w / b)
    for i in range(m):
        lift = (1.0 + eps_game) * u[i] * b / root_w[i]
        if clip and abs(lift) > abs(psi[i]):
            lift = psi[i]
        w_new[i] = w_mid[i] * np.exp(lift)
    return x_new, s_new, w_new, z, OK


STEP_TOO_LARGE = 4


@njit(cache=True)
def run_segment(A, c, x, s, w, z, t, t_end, growth, steps, r, alpha, beta, box,
                rounds, mu, eps_game, c_gamma, floor, gamma_bound, clip, project):
    """Up to ``steps`` certified centering steps with geometric updates of ``t``.

    Stops early when ``t`` reaches ``t_end`` or a step fails.  ``gamma_bound``
    <= 0 means the exact slack sensitivity is used in the step-size check.
    Returns ``(x, s, w, z, t, taken, status, ts, deltas, gammas)``; the
    trace arrays hold the certified values before each step taken.
    """
    up = t_end >= t
    ts = np.empty(steps)
    deltas = np.empty(steps)
    gammas = np.empty(steps)
    taken = 0
    status = OK
    while taken < steps:
        if (up and t >= t_end) or ((not up) and t <= t_end):
            break
        h, delta, gamma, ok = newton_data(A, s, w, t * c, floor)
        if not ok:
            status = RANK_DEFICIENT
            break
        g = gamma if gamma_bound <= 0.0 else gamma_bound
        if delta * g > 0.125:
            status = STEP_TOO_LARGE
            break
        x_new, s_new, w_new, z_new, status = centering_step(
            A, x, s, w, h, delta, r, z, alpha, beta, box, rounds,
            mu, eps_game, c_gamma, floor, clip, project,
        )
        if status != OK:
            break
        ts[taken] = t
        deltas[taken] = delta
        gammas[taken] = gamma
        x, s, w, z = x_new, s_new, w_new, z_new
        taken += 1
        if up:
            t = min(t * (1.0 + growth), t_end)
        else:
            t = max(t / (1.0 + growth), t_end)
    return x, s, w, z, t, taken, status, ts[:taken], deltas[:taken], gammas[:taken]


@njit(cache=True)
def exact_weight_polish(As, z, alpha, beta, floor, max_steps, tol):
    """Plain Newton steps on the weight equation from a nearby start.

    Returns ``(z, converged, steps)``; callers fall back to a globalized solver.
    """
    for k in range(max_steps):
        z_new, err, big, ok = weight_newton_step(As, z, alpha, beta, floor)
        if not ok:
            return z, False, k + 1
        z = z_new
        if big <= tol:
            return z, True, k + 1
    return z, False, max_steps


@njit(cache=True)
def project_ball_box(v, l):
    """Euclidean projection of ``v`` onto ``{x : ||x|| <= 1, |x_i| <= l_i}``.

    The minimizer is ``clip(v / (1 + lam), -l, l)`` for the smallest
    ``lam >= 0`` giving norm at most one; ``lam`` is found by bisection.
    """
    m = v.shape[0]
    x = np.empty(m)

    def clipped_norm(scale):
        acc = 0.0
        for i in range(m):
            c = min(max(v[i] * scale, -l[i]), l[i])
            acc += c * c
        return np.sqrt(acc)

    if clipped_norm(1.0) <= 1.0:
        lo = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if clipped_norm(mid) <= 1.0:
                lo = mid
            else:
                hi = mid
    for i in range(m):
        x[i] = min(max(v[i] * lo, -l[i]), l[i])
    return x
