"""Numba kernels for the grid updates, sweeping and trajectory stepping.

Everything here operates on plain arrays; the public modules wrap these with
problem objects.  Conventions:

* ``U`` has shape ``(n_modes, n1, n2)`` with ``+inf`` marking unreached or
  blocked points; ``labels`` is ``(n1, n2)`` int8 with 0 FREE, 1 TARGET,
  2 BLOCKED.
* Orthants are enumerated in the fixed order ``(+,+), (+,-), (-,+), (-,-)``;
  ties in the orthant minimization keep the earliest orthant.
* ``ceiling`` caps sentinel cross-mode values inside the point-implicit
  (Eulerian) coupling sum so that coupled sweeps can descend from the
  all-unreached start; pass ``inf`` for strict sentinel propagation.

``fastmath`` stays off: the sweeping logic relies on exact IEEE inf
comparisons.
"""

import numpy as np
from numba import njit

# Gridpoint labels (mirrors model.py).
FREE, TGT, BLK = 0, 1, 2

# Update provenance codes.
PROV_NONE, PROV_TWO_SIDED, PROV_ONE_SIDED, PROV_SIMPLEX = -1, 0, 1, 2

# Trajectory outcomes.
ARRIVED, COLLIDED, TIMED_OUT = 0, 1, 2

_ORT1 = np.array([1, 1, -1, -1], dtype=np.int64)
_ORT2 = np.array([1, -1, 1, -1], dtype=np.int64)
_NB1 = np.array([-1, 1, 0, 0], dtype=np.int64)
_NB2 = np.array([0, 0, -1, 1], dtype=np.int64)

_INVPHI = 0.6180339887498949
_INVPHI2 = 0.3819660112501051
_XTOL = 1e-10


@njit(cache=True)
def axis_speed(eps_k, wk, w1, w2, s):
    """Magnitude c > 0 of the axis-aligned velocity s*a + w = c*eps_k*e_k."""
    wa = eps_k * wk
    return wa + np.sqrt(wa * wa + s * s - w1 * w1 - w2 * w2)


@njit(cache=True)
def one_sided_value(b, eps_k, wk, w1, w2, s, C, L, S, h):
    """One-sided update along eps_k*e_axis from neighbor value b.

    L = sum of switching rates out of the current mode, S = sum of
    rate-weighted values of the other modes at the point itself.
    """
    if not (np.isfinite(b) and np.isfinite(S)):
        return np.inf
    tau = h / axis_speed(eps_k, wk, w1, w2, s)
    return (tau * C + b + tau * S) / (1.0 + tau * L)


@njit(cache=True)
def two_sided_value(b1, b2, e1, e2, w1, w2, s, C, L, S, h):
    """Per-quadrant quadratic update; (value, a1, a2) or (inf, 0, 0) if rejected.

    Solves the discretized equation s^2 |D|^2 = (D.w - L*U + S + C)^2 for U
    where D is the one-sided gradient built from neighbor values b1, b2;
    keeps the larger root, then enforces that the velocity at the recovered
    control points into the quadrant (e_k * f_k >= 0).
    """
    if not (np.isfinite(b1) and np.isfinite(b2) and np.isfinite(S)):
        return np.inf, 0.0, 0.0
    beta1 = 1.0 / (e1 * h)
    beta2 = 1.0 / (e2 * h)
    alpha1 = b1 * beta1
    alpha2 = b2 * beta2
    gamma = w1 * beta1 + w2 * beta2 + L
    K = w1 * alpha1 + w2 * alpha2 + S + C
    s2 = s * s
    A = s2 * (beta1 * beta1 + beta2 * beta2) - gamma * gamma
    B = -2.0 * s2 * (alpha1 * beta1 + alpha2 * beta2) + 2.0 * gamma * K
    Cq = s2 * (alpha1 * alpha1 + alpha2 * alpha2) - K * K
    scale = s2 * (beta1 * beta1 + beta2 * beta2) + gamma * gamma
    if abs(A) <= 1e-14 * scale:
        if B == 0.0:
            return np.inf, 0.0, 0.0
        root = -Cq / B
    else:
        disc = B * B - 4.0 * A * Cq
        if disc < 0.0:
            return np.inf, 0.0, 0.0
        sq = np.sqrt(disc)
        r1 = (-B - sq) / (2.0 * A)
        r2 = (-B + sq) / (2.0 * A)
        root = r1 if r1 > r2 else r2
    d1 = alpha1 - beta1 * root
    d2 = alpha2 - beta2 * root
    nrm = np.sqrt(d1 * d1 + d2 * d2)
    if nrm == 0.0:
        return np.inf, 0.0, 0.0
    # squaring admits roots with bracket = -s|D| < 0; those never solve the
    # underlying equation (cannot occur while h * L < speed - |wind|)
    bracket = w1 * d1 + w2 * d2 - L * root + S + C
    if bracket < -1e-9 * (1.0 + s * nrm + abs(S) + abs(C)):
        return np.inf, 0.0, 0.0
    a1 = -d1 / nrm
    a2 = -d2 / nrm
    f1 = s * a1 + w1
    f2 = s * a2 + w2
    if e1 * f1 >= 0.0 and e2 * f2 >= 0.0:
        return root, a1, a2
    return np.inf, 0.0, 0.0


@njit(cache=True)
def euler_point(U, labels, speed, wind, cost, lam, i, ix, iy, h, ceiling):
    """Eulerian update at one gridpoint/mode: (value, a1, a2, provenance)."""
    n = U.shape[0]
    n1 = U.shape[1]
    n2 = U.shape[2]
    s = speed[ix, iy]
    w1 = wind[i, ix, iy, 0]
    w2 = wind[i, ix, iy, 1]
    C = cost[i, ix, iy]
    L = 0.0
    S = 0.0
    for j in range(n):
        if j == i:
            continue
        lij = lam[i, j]
        if lij > 0.0:
            L += lij
            uj = U[j, ix, iy]
            if uj > ceiling:
                uj = ceiling
            S += lij * uj
    best = np.inf
    ba1 = np.nan
    ba2 = np.nan
    prov = PROV_NONE
    for oi in range(4):
        e1 = _ORT1[oi]
        e2 = _ORT2[oi]
        jx = ix + e1
        jy = iy + e2
        b1 = np.inf
        if 0 <= jx < n1 and labels[jx, iy] != BLK:
            b1 = U[i, jx, iy]
        b2 = np.inf
        if 0 <= jy < n2 and labels[ix, jy] != BLK:
            b2 = U[i, ix, jy]
        val, a1, a2 = two_sided_value(b1, b2, e1, e2, w1, w2, s, C, L, S, h)
        if np.isfinite(val):
            if val < best:
                best = val
                ba1 = a1
                ba2 = a2
                prov = PROV_TWO_SIDED
        else:
            v1 = one_sided_value(b1, e1, w1, w1, w2, s, C, L, S, h)
            if v1 < best:
                c = axis_speed(e1, w1, w1, w2, s)
                best = v1
                ba1 = (c * e1 - w1) / s
                ba2 = -w2 / s
                prov = PROV_ONE_SIDED
            v2 = one_sided_value(b2, e2, w2, w1, w2, s, C, L, S, h)
            if v2 < best:
                c = axis_speed(e2, w2, w1, w2, s)
                best = v2
                ba1 = -w1 / s
                ba2 = (c * e2 - w2) / s
                prov = PROV_ONE_SIDED
    return best, ba1, ba2, prov


@njit(cache=True)
def simplex_candidate(t, e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h):
    """Value of the simplex update at barycentric point (t, 1-t) in one orthant.

    u_k is the current-mode value at the axis-k neighbor, S_k the
    rate-weighted sum of the other-mode values there.  Any needed sentinel
    makes the candidate sentinel.
    """
    xi1 = t
    xi2 = 1.0 - t
    if xi1 > 0.0 and not np.isfinite(u1 + S1):
        return np.inf
    if xi2 > 0.0 and not np.isfinite(u2 + S2):
        return np.inf
    vn = np.sqrt(xi1 * xi1 + xi2 * xi2)
    ux = e1 * xi1 / vn
    uy = e2 * xi2 / vn
    wa = ux * w1 + uy * w2
    m = wa + np.sqrt(wa * wa + s * s - w1 * w1 - w2 * w2)
    tau = h * vn / m
    uu = 0.0
    ss = 0.0
    if xi1 > 0.0:
        uu += xi1 * u1
        ss += xi1 * S1
    if xi2 > 0.0:
        uu += xi2 * u2
        ss += xi2 * S2
    return tau * (C - L * uu + ss) + uu


@njit(cache=True)
def simplex_minimize(e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h):
    """Minimize the simplex candidate over t in [0, 1] for one orthant.

    A 17-point scan seeds a golden-section refinement (absolute tolerance
    1e-10) to sidestep local minima introduced by the coupling term.
    Returns (value, t)."""
    best_v = np.inf
    best_t = 0.0
    bj = 0
    for jj in range(17):
        t = jj / 16.0
        v = simplex_candidate(t, e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h)
        if v < best_v:
            best_v = v
            best_t = t
            bj = jj
    a = (bj - 1) / 16.0
    if a < 0.0:
        a = 0.0
    b = (bj + 1) / 16.0
    if b > 1.0:
        b = 1.0
    c = a + _INVPHI2 * (b - a)
    d = a + _INVPHI * (b - a)
    fc = simplex_candidate(c, e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h)
    fd = simplex_candidate(d, e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h)
    while b - a > _XTOL:
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = a + _INVPHI2 * (b - a)
            fc = simplex_candidate(c, e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INVPHI * (b - a)
            fd = simplex_candidate(d, e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h)
    if fc < best_v:
        best_v = fc
        best_t = c
    if fd < best_v:
        best_v = fd
        best_t = d
    return best_v, best_t


@njit(cache=True)
def _neighbor_mode_data(U, labels, lam, i, jx, jy, inb):
    """(u, S) at a neighbor column; (inf, inf) when unusable."""
    n = U.shape[0]
    if not inb or labels[jx, jy] == BLK:
        return np.inf, np.inf
    u = U[i, jx, jy]
    S = 0.0
    for j in range(n):
        if j == i:
            continue
        lij = lam[i, j]
        if lij > 0.0:
            S += lij * U[j, jx, jy]
    return u, S


@njit(cache=True)
def semilag_point(U, labels, speed, wind, cost, lam, i, ix, iy, h):
    """Semi-Lagrangian update at one gridpoint/mode: (value, a1, a2)."""
    n = U.shape[0]
    n1 = U.shape[1]
    n2 = U.shape[2]
    s = speed[ix, iy]
    w1 = wind[i, ix, iy, 0]
    w2 = wind[i, ix, iy, 1]
    C = cost[i, ix, iy]
    L = 0.0
    for j in range(n):
        if j != i:
            L += lam[i, j]
    best = np.inf
    bt = 0.0
    bo = -1
    for oi in range(4):
        e1 = _ORT1[oi]
        e2 = _ORT2[oi]
        jx = ix + e1
        jy = iy + e2
        u1, S1 = _neighbor_mode_data(U, labels, lam, i, jx, iy, 0 <= jx < n1)
        u2, S2 = _neighbor_mode_data(U, labels, lam, i, ix, jy, 0 <= jy < n2)
        v, t = simplex_minimize(e1, e2, u1, S1, u2, S2, L, s, w1, w2, C, h)
        if v < best:
            best = v
            bt = t
            bo = oi
    if bo < 0:
        return np.inf, np.nan, np.nan
    e1 = _ORT1[bo]
    e2 = _ORT2[bo]
    xi1 = bt
    xi2 = 1.0 - bt
    vn = np.sqrt(xi1 * xi1 + xi2 * xi2)
    ux = e1 * xi1 / vn
    uy = e2 * xi2 / vn
    wa = ux * w1 + uy * w2
    m = wa + np.sqrt(wa * wa + s * s - w1 * w1 - w2 * w2)
    return best, (m * ux - w1) / s, (m * uy - w2) / s


@njit(cache=True)
def sweep_pass(U, dirs, active, labels, speed, wind, cost, lam, h,
               order, scheme, ceiling, use_flags):
    """One Gauss-Seidel sweep in the given geometric ordering.

    order: 0 from SW, 1 from SE, 2 from NE, 3 from NW.
    scheme: 0 Eulerian, 1 semi-Lagrangian.
    Accepts a recomputed value only when strictly smaller; on acceptance
    re-activates the influenced gridpoints of the scheme.  Returns the
    largest accepted change (inf when a point left the sentinel state).
    """
    n = U.shape[0]
    n1 = U.shape[1]
    n2 = U.shape[2]
    if order == 0:
        xa, xb, xs = 0, n1, 1
        ya, yb, ys = 0, n2, 1
    elif order == 1:
        xa, xb, xs = n1 - 1, -1, -1
        ya, yb, ys = 0, n2, 1
    elif order == 2:
        xa, xb, xs = n1 - 1, -1, -1
        ya, yb, ys = n2 - 1, -1, -1
    else:
        xa, xb, xs = 0, n1, 1
        ya, yb, ys = n2 - 1, -1, -1
    maxch = 0.0
    for ix in range(xa, xb, xs):
        for iy in range(ya, yb, ys):
            if labels[ix, iy] != FREE:
                continue
            for i in range(n):
                if use_flags and not active[i, ix, iy]:
                    continue
                active[i, ix, iy] = False
                if scheme == 0:
                    val, a1, a2, _ = euler_point(
                        U, labels, speed, wind, cost, lam, i, ix, iy, h, ceiling)
                else:
                    val, a1, a2 = semilag_point(
                        U, labels, speed, wind, cost, lam, i, ix, iy, h)
                cur = U[i, ix, iy]
                if val < cur:
                    ch = cur - val
                    if ch > maxch:
                        maxch = ch
                    U[i, ix, iy] = val
                    dirs[i, ix, iy, 0] = a1
                    dirs[i, ix, iy, 1] = a2
                    if scheme == 0:
                        for kk in range(4):
                            jx = ix + _NB1[kk]
                            jy = iy + _NB2[kk]
                            if 0 <= jx < n1 and 0 <= jy < n2 and labels[jx, jy] == FREE:
                                active[i, jx, jy] = True
                        for j in range(n):
                            active[j, ix, iy] = True
                    else:
                        for kk in range(4):
                            jx = ix + _NB1[kk]
                            jy = iy + _NB2[kk]
                            if 0 <= jx < n1 and 0 <= jy < n2 and labels[jx, jy] == FREE:
                                for j in range(n):
                                    active[j, jx, jy] = True
    return maxch


@njit(cache=True)
def direction_pass(U, labels, speed, wind, cost, lam, h, scheme, ceiling,
                   out_dirs, out_prov):
    """Recompute every FREE point once, recording the winning direction only."""
    n = U.shape[0]
    n1 = U.shape[1]
    n2 = U.shape[2]
    for ix in range(n1):
        for iy in range(n2):
            if labels[ix, iy] != FREE:
                continue
            for i in range(n):
                if scheme == 0:
                    val, a1, a2, prov = euler_point(
                        U, labels, speed, wind, cost, lam, i, ix, iy, h, ceiling)
                else:
                    val, a1, a2 = semilag_point(
                        U, labels, speed, wind, cost, lam, i, ix, iy, h)
                    prov = PROV_SIMPLEX
                if np.isfinite(val):
                    out_dirs[i, ix, iy, 0] = a1
                    out_dirs[i, ix, iy, 1] = a2
                    out_prov[i, ix, iy] = prov


# ---------------------------------------------------------------------------
# Off-grid policy queries and trajectory integration.

@njit(cache=True)
def bilerp(V, lo1, lo2, h, px, py):
    """Plain bilinear interpolation of a fully finite grid array."""
    n1 = V.shape[0]
    n2 = V.shape[1]
    rx = (px - lo1) / h
    ry = (py - lo2) / h
    cx = int(np.floor(rx))
    cy = int(np.floor(ry))
    if cx < 0:
        cx = 0
    elif cx > n1 - 2:
        cx = n1 - 2
    if cy < 0:
        cy = 0
    elif cy > n2 - 2:
        cy = n2 - 2
    tx = rx - cx
    ty = ry - cy
    if tx < 0.0:
        tx = 0.0
    elif tx > 1.0:
        tx = 1.0
    if ty < 0.0:
        ty = 0.0
    elif ty > 1.0:
        ty = 1.0
    return ((1.0 - tx) * (1.0 - ty) * V[cx, cy]
            + tx * (1.0 - ty) * V[cx + 1, cy]
            + (1.0 - tx) * ty * V[cx, cy + 1]
            + tx * ty * V[cx + 1, cy + 1])


@njit(cache=True)
def bilerp_renorm(V, lo1, lo2, h, px, py):
    """Bilinear interpolation with sentinel corners dropped by weight renormalization."""
    n1 = V.shape[0]
    n2 = V.shape[1]
    rx = (px - lo1) / h
    ry = (py - lo2) / h
    cx = int(np.floor(rx))
    cy = int(np.floor(ry))
    if cx < 0:
        cx = 0
    elif cx > n1 - 2:
        cx = n1 - 2
    if cy < 0:
        cy = 0
    elif cy > n2 - 2:
        cy = n2 - 2
    tx = rx - cx
    ty = ry - cy
    if tx < 0.0:
        tx = 0.0
    elif tx > 1.0:
        tx = 1.0
    if ty < 0.0:
        ty = 0.0
    elif ty > 1.0:
        ty = 1.0
    acc = 0.0
    wsum = 0.0
    v = V[cx, cy]
    if np.isfinite(v):
        w = (1.0 - tx) * (1.0 - ty)
        acc += w * v
        wsum += w
    v = V[cx + 1, cy]
    if np.isfinite(v):
        w = tx * (1.0 - ty)
        acc += w * v
        wsum += w
    v = V[cx, cy + 1]
    if np.isfinite(v):
        w = (1.0 - tx) * ty
        acc += w * v
        wsum += w
    v = V[cx + 1, cy + 1]
    if np.isfinite(v):
        w = tx * ty
        acc += w * v
        wsum += w
    if wsum <= 1e-14:
        return np.inf
    return acc / wsum


@njit(cache=True)
def policy_dir(V, D, lo1, lo2, h, px, py):
    """Control direction at an off-grid point (a1, a2, ok).

    Forms the gradient of the renormalized bilinear interpolant of the value
    grid V by central differences at +-h/2 and returns the Eikonal-form
    direction -g/|g|; with fewer than two finite corners in the containing
    cell (or a degenerate gradient) falls back to the nearest stored grid
    direction from D.  ok is False when no information exists at all.
    """
    n1 = V.shape[0]
    n2 = V.shape[1]
    cx = int(np.floor((px - lo1) / h))
    cy = int(np.floor((py - lo2) / h))
    if cx < 0:
        cx = 0
    elif cx > n1 - 2:
        cx = n1 - 2
    if cy < 0:
        cy = 0
    elif cy > n2 - 2:
        cy = n2 - 2
    nfin = 0
    for dx in range(2):
        for dy in range(2):
            if np.isfinite(V[cx + dx, cy + dy]):
                nfin += 1
    if nfin >= 2:
        gp = bilerp_renorm(V, lo1, lo2, h, px + 0.5 * h, py)
        gm = bilerp_renorm(V, lo1, lo2, h, px - 0.5 * h, py)
        hp = bilerp_renorm(V, lo1, lo2, h, px, py + 0.5 * h)
        hm = bilerp_renorm(V, lo1, lo2, h, px, py - 0.5 * h)
        if np.isfinite(gp) and np.isfinite(gm) and np.isfinite(hp) and np.isfinite(hm):
            g1 = (gp - gm) / h
            g2 = (hp - hm) / h
            nrm = np.sqrt(g1 * g1 + g2 * g2)
            if nrm > 0.0:
                return -g1 / nrm, -g2 / nrm, True
    if nfin == 0:
        return 0.0, 0.0, False
    bestd = np.inf
    ba1 = 0.0
    ba2 = 0.0
    found = False
    for dx in range(2):
        for dy in range(2):
            jx = cx + dx
            jy = cy + dy
            d1 = D[jx, jy, 0]
            d2 = D[jx, jy, 1]
            if np.isfinite(d1) and np.isfinite(d2):
                gx = lo1 + jx * h - px
                gy = lo2 + jy * h - py
                dist = gx * gx + gy * gy
                if dist < bestd:
                    bestd = dist
                    ba1 = d1
                    ba2 = d2
                    found = True
    if found:
        return ba1, ba2, True
    return 0.0, 0.0, False


@njit(cache=True)
def segment_events(px, py, qx, qy, tgx, tgy, rcap, obstacles, box):
    """Earliest event along the segment p -> q.

    Returns (u, kind) with kind 0 none, 1 capture-disk entry, 2 collision
    (obstacle entry or domain-box exit).  Rectangles are closed.
    """
    dx = qx - px
    dy = qy - py
    u_arr = np.inf
    a = dx * dx + dy * dy
    bx = px - tgx
    by = py - tgy
    c0 = bx * bx + by * by - rcap * rcap
    if c0 <= 0.0:
        u_arr = 0.0
    elif a > 0.0:
        b = 2.0 * (dx * bx + dy * by)
        disc = b * b - 4.0 * a * c0
        if disc >= 0.0:
            u = (-b - np.sqrt(disc)) / (2.0 * a)
            if 0.0 <= u <= 1.0:
                u_arr = u
    u_col = np.inf
    for m in range(obstacles.shape[0]):
        u0 = 0.0
        u1 = 1.0
        ok = True
        for axis in range(2):
            p = px if axis == 0 else py
            d = dx if axis == 0 else dy
            lo = obstacles[m, axis]
            hi = obstacles[m, axis + 2]
            if d == 0.0:
                if p < lo or p > hi:
                    ok = False
                    break
            else:
                t0 = (lo - p) / d
                t1 = (hi - p) / d
                if t0 > t1:
                    t0, t1 = t1, t0
                if t0 > u0:
                    u0 = t0
                if t1 < u1:
                    u1 = t1
                if u0 > u1:
                    ok = False
                    break
        if ok and u0 < u_col:
            u_col = u0
    u_exit = np.inf
    for axis in range(2):
        p = px if axis == 0 else py
        d = dx if axis == 0 else dy
        lo = box[axis]
        hi = box[axis + 2]
        if d > 0.0:
            u = (hi - p) / d
            if u < u_exit:
                u_exit = u
        elif d < 0.0:
            u = (lo - p) / d
            if u < u_exit:
                u_exit = u
    if u_exit < u_col:
        u_col = u_exit
    if u_arr <= u_col and u_arr <= 1.0:
        return u_arr, 1
    if u_col <= 1.0:
        return u_col, 2
    return 1.0, 0


@njit(cache=True)
def trajectory(values, dirs, speedA, windA, lo1, lo2, h, obstacles, box,
               tgx, tgy, rcap, x0, y0, i0, sw_t, sw_m, dt, tmax, record):
    """Integrate the controlled process with a pre-sampled mode path.

    The control is re-queried every dt seconds and at every switch instant
    (the straddling step is split exactly).  Events (capture, collision,
    domain exit) are located along each sub-segment.  Returns
    (status, t_end, x_end, y_end, switches_applied, n_rec,
     rec_t, rec_x, rec_y, rec_m, sw_x, sw_y).
    """
    nsw = sw_t.shape[0]
    cap = 1
    if record:
        cap = int(np.ceil(tmax / dt)) + nsw + 4
    rec_t = np.empty(cap)
    rec_x = np.empty(cap)
    rec_y = np.empty(cap)
    rec_m = np.empty(cap, np.int64)
    sw_x = np.empty(nsw)
    sw_y = np.empty(nsw)
    t = 0.0
    x = x0
    y = y0
    mode = i0
    k = 0
    nrec = 0
    if record:
        rec_t[0] = t
        rec_x[0] = x
        rec_y[0] = y
        rec_m[0] = mode
        nrec = 1
    if (x - tgx) ** 2 + (y - tgy) ** 2 <= rcap * rcap:
        return ARRIVED, 0.0, x, y, 0, nrec, rec_t, rec_x, rec_y, rec_m, sw_x, sw_y
    status = TIMED_OUT
    while t < tmax - 1e-15:
        a1, a2, ok = policy_dir(values[mode], dirs[mode], lo1, lo2, h, x, y)
        if not ok:
            status = COLLIDED  # no policy information: abort in place
            break
        s = bilerp(speedA, lo1, lo2, h, x, y)
        w1 = bilerp(windA[mode, :, :, 0], lo1, lo2, h, x, y)
        w2 = bilerp(windA[mode, :, :, 1], lo1, lo2, h, x, y)
        f1 = s * a1 + w1
        f2 = s * a2 + w2
        t_seg = t + dt
        if k < nsw and sw_t[k] < t_seg:
            t_seg = sw_t[k]
        if t_seg > tmax:
            t_seg = tmax
        seg = t_seg - t
        qx = x + seg * f1
        qy = y + seg * f2
        u, kind = segment_events(x, y, qx, qy, tgx, tgy, rcap, obstacles, box)
        if kind != 0:
            t = t + u * seg
            x = x + u * seg * f1
            y = y + u * seg * f2
            status = ARRIVED if kind == 1 else COLLIDED
            break
        t = t_seg
        x = qx
        y = qy
        while k < nsw and sw_t[k] <= t + 1e-15:
            mode = sw_m[k]
            sw_x[k] = x
            sw_y[k] = y
            k += 1
        if record and nrec < cap:
            rec_t[nrec] = t
            rec_x[nrec] = x
            rec_y[nrec] = y
            rec_m[nrec] = mode
            nrec += 1
    if status == TIMED_OUT:
        t = tmax
    if record and nrec < cap:
        rec_t[nrec] = t
        rec_x[nrec] = x
        rec_y[nrec] = y
        rec_m[nrec] = mode
        nrec += 1
    return status, t, x, y, k, nrec, rec_t, rec_x, rec_y, rec_m, sw_x, sw_y
