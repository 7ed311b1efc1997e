"""Numba kernels shared by the public API and the batch simulator.

Every geometric and kinematic rule lives here exactly once: the same njit
functions are called per-step from the Python API (motility.advance,
transport.step_transport) and inside the compiled channel-use loop, so the
two paths cannot diverge.

Conventions: edges are packed chain-by-chain as (E,2)/(E,) float64 arrays
with unit directions and unit interior normals (interior on the left);
``chain_ptr`` delimits chains CSR-style; wall state is a global edge index
(-1 while free) plus a traversal sign along the chain.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def chain_of(e, chain_ptr):
    c = 0
    while chain_ptr[c + 1] <= e:
        c += 1
    return c


@njit(cache=True)
def interior_margin(x, y, kind, half_w, half_l, apothem, inner_radius):
    """Lower bound on the distance from (x, y) to the boundary.

    kind: 0 rectangle, 1 convex polygon, 2 polygon ring.
    """
    if kind == 0:
        mx = half_w - abs(x)
        my = half_l - abs(y)
        return mx if mx < my else my
    rho = math.sqrt(x * x + y * y)
    m = apothem - rho
    if kind == 2:
        m2 = rho - inner_radius
        if m2 < m:
            m = m2
    return m


@njit(cache=True)
def contains_point(x, y, kind, half_w, half_l, apothem, inner_radius,
                   e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang,
                   eps):
    if kind == 0:
        return abs(x) <= half_w + eps and abs(y) <= half_l + eps
    # inside the outer chain: on the interior side of every outer edge
    for e in range(chain_ptr[0], chain_ptr[1]):
        s = (x - e_start[e, 0]) * e_norm[e, 0] + (y - e_start[e, 1]) * e_norm[e, 1]
        if s < -eps:
            return False
    if kind == 2:
        # excluded only when strictly inside the open hole
        in_hole = True
        for e in range(chain_ptr[1], chain_ptr[2]):
            s = (x - e_start[e, 0]) * e_norm[e, 0] + (y - e_start[e, 1]) * e_norm[e, 1]
            if s >= -eps:
                in_hole = False
                break
        if in_hole:
            return False
    return True


@njit(cache=True)
def contains_points(pts, out, kind, half_w, half_l, apothem, inner_radius,
                    e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang,
                    eps):
    for i in range(pts.shape[0]):
        out[i] = contains_point(
            pts[i, 0], pts[i, 1], kind, half_w, half_l, apothem, inner_radius,
            e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang, eps,
        )


@njit(cache=True)
def first_exit_hit(fx, fy, tx, ty,
                   e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang,
                   eps):
    """First outward boundary crossing of the segment (fx,fy)->(tx,ty).

    Returns (edge index, hit x, hit y, travelled distance); edge index is -1
    when the segment stays in the closed interior.  The hit point is snapped
    onto the edge segment.
    """
    dx = tx - fx
    dy = ty - fy
    seg = math.sqrt(dx * dx + dy * dy)
    if seg == 0.0:
        return -1, 0.0, 0.0, 0.0
    best_t = 1.0e30
    best_e = -1
    for e in range(e_len.shape[0]):
        nx = e_norm[e, 0]
        ny = e_norm[e, 1]
        if dx * nx + dy * ny >= 0.0:
            continue  # motion not outward through this edge
        s0 = (fx - e_start[e, 0]) * nx + (fy - e_start[e, 1]) * ny
        if s0 < -eps:
            continue  # starts beyond this edge already
        s1 = (tx - e_start[e, 0]) * nx + (ty - e_start[e, 1]) * ny
        if s1 >= -eps:
            continue  # never leaves the eps shell
        t = s0 / (s0 - s1)
        if t < 0.0:
            t = 0.0
        if t >= best_t:
            continue
        hx = fx + t * dx
        hy = fy + t * dy
        u = (hx - e_start[e, 0]) * e_unit[e, 0] + (hy - e_start[e, 1]) * e_unit[e, 1]
        if u < -eps or u > e_len[e] + eps:
            continue  # crosses the edge's line outside the segment
        best_t = t
        best_e = e
    if best_e < 0:
        return -1, 0.0, 0.0, 0.0
    # snap onto the edge so wall-following starts exactly on the boundary
    hx = fx + best_t * dx
    hy = fy + best_t * dy
    u = (hx - e_start[best_e, 0]) * e_unit[best_e, 0] \
        + (hy - e_start[best_e, 1]) * e_unit[best_e, 1]
    if u < 0.0:
        u = 0.0
    elif u > e_len[best_e]:
        u = e_len[best_e]
    hx = e_start[best_e, 0] + u * e_unit[best_e, 0]
    hy = e_start[best_e, 1] + u * e_unit[best_e, 1]
    return best_e, hx, hy, best_t * seg


@njit(cache=True)
def walk_wall(x, y, edge, along, remaining, e_start, e_unit, e_len, chain_ptr):
    """Slide `remaining` along the boundary chain, wrapping corners."""
    guard = 0
    while remaining > 0.0 and guard < 1000000:
        guard += 1
        sx = e_start[edge, 0]
        sy = e_start[edge, 1]
        ux = e_unit[edge, 0]
        uy = e_unit[edge, 1]
        u = (x - sx) * ux + (y - sy) * uy
        if u < 0.0:
            u = 0.0
        elif u > e_len[edge]:
            u = e_len[edge]
        room = e_len[edge] - u if along > 0 else u
        if remaining <= room:
            u += along * remaining
            x = sx + u * ux
            y = sy + u * uy
            remaining = 0.0
        else:
            remaining -= room
            c = chain_of(edge, chain_ptr)
            lo = chain_ptr[c]
            n = chain_ptr[c + 1] - lo
            if along > 0:
                edge = lo + (edge - lo + 1) % n
                x = e_start[edge, 0]  # corner = next edge's start
                y = e_start[edge, 1]
            else:
                x = e_start[edge, 0]  # corner = this edge's start
                y = e_start[edge, 1]
                edge = lo + (edge - lo - 1) % n
    return x, y, edge


@njit(cache=True)
def advance_step(rng, x, y, th, wedge, walong,
                 kind, half_w, half_l, apothem, inner_radius,
                 e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang,
                 mean_r, sig_r, sig_th, eps):
    """One motion step: draws exactly two Gaussians (step length, then turn).

    Returns (x, y, heading, wall edge, wall direction, distance travelled).
    Wall contact sets the heading to the boundary direction of travel (the
    filament body aligns with the wall); the turn recursion then continues
    from that value, so detachment happens when a freshly sampled heading
    tilts strictly into the interior.
    """
    z1 = rng.standard_normal()
    z2 = rng.standard_normal()
    dr = mean_r + sig_r * z1
    if dr < 0.0:
        dr = 0.0  # negative Gaussian step lengths are truncated
    th = th + sig_th * z2
    if th > math.pi:
        th -= TWO_PI
    elif th <= -math.pi:
        th += TWO_PI
    hx = math.cos(th)
    hy = math.sin(th)

    if wedge >= 0:
        if hx * e_norm[wedge, 0] + hy * e_norm[wedge, 1] > 0.0:
            wedge = -1  # heading points inward: resume free gliding
        else:
            # still in contact: slide along the chain (direction chosen at
            # attachment persists through corners) and realign the heading
            # with the wall
            x, y, wedge = walk_wall(x, y, wedge, walong, dr,
                                    e_start, e_unit, e_len, chain_ptr)
            th = e_ang[wedge, 0] if walong > 0 else e_ang[wedge, 1]
            return x, y, th, wedge, walong, dr

    if dr == 0.0:
        return x, y, th, wedge, walong, 0.0

    px = x + dr * hx
    py = y + dr * hy
    if dr < interior_margin(x, y, kind, half_w, half_l, apothem, inner_radius):
        return px, py, th, wedge, walong, dr

    e, qx, qy, trav = first_exit_hit(x, y, px, py,
                                     e_start, e_unit, e_len, e_norm,
                                     chain_ptr, ccw_sign, e_ang, eps)
    if e < 0:
        return px, py, th, wedge, walong, dr

    # collision: bend onto the edge direction nearest the incoming heading
    # (ties break counter-clockwise in the plane) and spend the remaining
    # distance along the boundary
    d = hx * e_unit[e, 0] + hy * e_unit[e, 1]
    if d > 0.0:
        walong = 1
    elif d < 0.0:
        walong = -1
    else:
        walong = ccw_sign[chain_of(e, chain_ptr)]
    x, y, wedge = walk_wall(qx, qy, e, walong, dr - trav,
                            e_start, e_unit, e_len, chain_ptr)
    th = e_ang[wedge, 0] if walong > 0 else e_ang[wedge, 1]
    return x, y, th, wedge, walong, dr


@njit(cache=True)
def sample_pose(rng, xmin, xmax, ymin, ymax,
                kind, half_w, half_l, apothem, inner_radius,
                e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang,
                eps):
    """Uniform position over the interior (rejection from the bbox), uniform
    heading.  Consumes 2 uniforms per rejection round plus 1 for the heading."""
    px = 0.0
    py = 0.0
    while True:
        px = rng.uniform(xmin, xmax)
        py = rng.uniform(ymin, ymax)
        if contains_point(px, py, kind, half_w, half_l, apothem, inner_radius,
                          e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign,
                          e_ang, eps):
            break
    th = rng.uniform(-math.pi, math.pi)
    return px, py, th


@njit(cache=True)
def select_cells(rng, n_cells, k):
    """k distinct indices out of range(n_cells), uniform without replacement
    (partial Fisher-Yates)."""
    idx = np.arange(n_cells)
    for i in range(k):
        j = i + rng.integers(0, n_cells - i)
        tmp = idx[i]
        idx[i] = idx[j]
        idx[j] = tmp
    return idx[:k]


@njit(cache=True)
def channel_use(rng, n_steps, mt_count, max_load, n_particles,
                kind, half_w, half_l, apothem, inner_radius,
                e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang,
                xmin, xmax, ymin, ymax,
                gx0, gy0, cell_size, cell_kind, tx_ix, tx_iy,
                mean_r, sig_r, sig_th, eps):
    """One full channel use.

    Draw order is pinned for reproducibility: MT poses (in MT order), then
    the particle placement, then two Gaussians per MT per step with MTs
    advanced in index order within each step.  Zone effects are applied to
    each MT right after its own move.
    """
    mt_x = np.empty(mt_count)
    mt_y = np.empty(mt_count)
    mt_th = np.empty(mt_count)
    mt_edge = np.full(mt_count, -1, dtype=np.int64)
    mt_along = np.ones(mt_count, dtype=np.int64)
    for m in range(mt_count):
        px, py, th = sample_pose(rng, xmin, xmax, ymin, ymax,
                                 kind, half_w, half_l, apothem, inner_radius,
                                 e_start, e_unit, e_len, e_norm, chain_ptr,
                                 ccw_sign, e_ang, eps)
        mt_x[m] = px
        mt_y[m] = py
        mt_th[m] = th

    occ = np.zeros(cell_kind.shape, dtype=np.uint8)
    chosen = select_cells(rng, tx_ix.shape[0], n_particles)
    for i in range(n_particles):
        occ[tx_ix[chosen[i]], tx_iy[chosen[i]]] = 1

    cargo = np.zeros(mt_count, dtype=np.int64)
    phase = np.zeros(mt_count, dtype=np.int64)  # 0 = needs tx, 1 = needs rx
    trips = np.zeros(mt_count, dtype=np.int64)
    delivered = 0
    remaining = n_particles
    in_transit = 0
    nx_cells = cell_kind.shape[0]
    ny_cells = cell_kind.shape[1]

    for _t in range(n_steps):
        for m in range(mt_count):
            x, y, th, we, wa, _trav = advance_step(
                rng, mt_x[m], mt_y[m], mt_th[m], mt_edge[m], mt_along[m],
                kind, half_w, half_l, apothem, inner_radius,
                e_start, e_unit, e_len, e_norm, chain_ptr, ccw_sign, e_ang,
                mean_r, sig_r, sig_th, eps,
            )
            mt_x[m] = x
            mt_y[m] = y
            mt_th[m] = th
            mt_edge[m] = we
            mt_along[m] = wa
            # a wall-following head sits exactly on the boundary, where the
            # floor lattice would assign it to the outside cell; look it up a
            # hair inside instead
            lx = x
            ly = y
            if we >= 0:
                lx += 1e-6 * e_norm[we, 0]
                ly += 1e-6 * e_norm[we, 1]
            ix = int(math.floor((lx - gx0) / cell_size))
            iy = int(math.floor((ly - gy0) / cell_size))
            if 0 <= ix < nx_cells and 0 <= iy < ny_cells:
                kcell = cell_kind[ix, iy]
                if kcell == 1:
                    phase[m] = 1
                    if occ[ix, iy] == 1 and cargo[m] < max_load:
                        occ[ix, iy] = 0
                        cargo[m] += 1
                        remaining -= 1
                        in_transit += 1
                elif kcell == 2:
                    if cargo[m] > 0:
                        delivered += cargo[m]
                        in_transit -= cargo[m]
                        cargo[m] = 0
                    if phase[m] == 1:
                        trips[m] += 1
                        phase[m] = 0

    return (delivered, remaining, in_transit, trips, cargo, phase,
            mt_x, mt_y, mt_th, mt_edge, mt_along)
