"""Exact solver for the dense transportation problem.

Network-simplex specialization to the complete bipartite transportation
polytope: basis kept as a spanning tree over supply and demand nodes,
most-negative block pricing, Bland's rule as an anti-cycling fallback.
Used by :mod:`dynamb.wasserstein` for general-weight optimal transport;
``scipy.optimize.linprog`` remains available there as a cross-check path.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OPTIMAL = 0
STATUS_PIVOT_LIMIT = 1


@njit(cache=True)
def _rebuild_tree(n, m, arc_row, arc_col, C, parent, parent_arc, depth, pot, order, stack):
    """BFS over the basis tree from node 0; fills parents, depths, potentials."""
    N = n + m
    nb = N - 1
    deg = np.zeros(N, np.int64)
    for k in range(nb):
        deg[arc_row[k]] += 1
        deg[n + arc_col[k]] += 1
    ptr = np.zeros(N + 1, np.int64)
    for x in range(N):
        ptr[x + 1] = ptr[x] + deg[x]
    adj_node = np.empty(2 * nb, np.int64)
    adj_arc = np.empty(2 * nb, np.int64)
    cur = ptr[:N].copy()
    for k in range(nb):
        x = arc_row[k]
        y = n + arc_col[k]
        adj_node[cur[x]] = y
        adj_arc[cur[x]] = k
        cur[x] += 1
        adj_node[cur[y]] = x
        adj_arc[cur[y]] = k
        cur[y] += 1

    for x in range(N):
        parent[x] = -2
    parent[0] = -1
    parent_arc[0] = -1
    depth[0] = 0
    top = 0
    stack[top] = 0
    nout = 0
    order[nout] = 0
    nout += 1
    while top >= 0:
        x = stack[top]
        top -= 1
        for idx in range(ptr[x], ptr[x + 1]):
            y = adj_node[idx]
            if parent[y] == -2:
                parent[y] = x
                parent_arc[y] = adj_arc[idx]
                depth[y] = depth[x] + 1
                top += 1
                stack[top] = y
                order[nout] = y
                nout += 1

    pot[0] = 0.0
    for t in range(1, N):
        x = order[t]
        k = parent_arc[x]
        i = arc_row[k]
        jn = n + arc_col[k]
        if x == jn:
            pot[x] = C[i, arc_col[k]] - pot[i]
        else:
            pot[x] = C[x, arc_col[k]] - pot[jn]


@njit(cache=True)
def _solve(C, a, b, price_tol, max_pivots):
    n, m = C.shape
    N = n + m
    nb = N - 1

    arc_row = np.empty(nb, np.int64)
    arc_col = np.empty(nb, np.int64)
    arc_flow = np.empty(nb, np.float64)

    # Northwest-corner start: monotone staircase gives exactly n+m-1 basics.
    ra = a.copy()
    rb = b.copy()
    i = 0
    j = 0
    for k in range(nb):
        arc_row[k] = i
        arc_col[k] = j
        f = ra[i] if ra[i] < rb[j] else rb[j]
        if f < 0.0:
            f = 0.0
        arc_flow[k] = f
        ra[i] -= f
        rb[j] -= f
        if i == n - 1:
            j += 1
        elif j == m - 1:
            i += 1
        elif ra[i] <= rb[j]:
            i += 1
        else:
            j += 1

    parent = np.empty(N, np.int64)
    parent_arc = np.empty(N, np.int64)
    depth = np.empty(N, np.int64)
    pot = np.empty(N, np.float64)
    order = np.empty(N, np.int64)
    stack = np.empty(N, np.int64)

    cyc_arc = np.empty(N, np.int64)
    cyc_sign = np.empty(N, np.int64)
    arcs_a = np.empty(N, np.int64)
    child_a = np.empty(N, np.int64)
    arcs_b = np.empty(N, np.int64)
    child_b = np.empty(N, np.int64)

    block = 64
    nblocks = (m + block - 1) // block
    cursor = 0
    bland = False
    stall = 0

    pivots = 0
    while True:
        _rebuild_tree(n, m, arc_row, arc_col, C, parent, parent_arc, depth, pot, order, stack)

        # --- pricing ---
        ei = -1
        ej = -1
        if bland:
            done = True
            for j2 in range(m):
                for i2 in range(n):
                    rc = C[i2, j2] - pot[i2] - pot[n + j2]
                    if rc < -price_tol:
                        ei = i2
                        ej = j2
                        done = False
                        break
                if not done:
                    break
            if done:
                return STATUS_OPTIMAL, arc_row, arc_col, arc_flow
        else:
            found = False
            for _ in range(nblocks):
                c0 = cursor * block
                c1 = c0 + block
                if c1 > m:
                    c1 = m
                best = -price_tol
                for j2 in range(c0, c1):
                    pj = pot[n + j2]
                    for i2 in range(n):
                        rc = C[i2, j2] - pot[i2] - pj
                        if rc < best:
                            best = rc
                            ei = i2
                            ej = j2
                cursor = (cursor + 1) % nblocks
                if best < -price_tol:
                    found = True
                    break
            if not found:
                return STATUS_OPTIMAL, arc_row, arc_col, arc_flow

        pivots += 1
        if pivots > max_pivots:
            return STATUS_PIVOT_LIMIT, arc_row, arc_col, arc_flow

        # --- cycle through the tree between row ei and column node n+ej ---
        xa = ei
        xb = n + ej
        na = 0
        nb_side = 0
        da = depth[xa]
        db = depth[xb]
        while da > db:
            arcs_a[na] = parent_arc[xa]
            child_a[na] = xa
            na += 1
            xa = parent[xa]
            da -= 1
        while db > da:
            arcs_b[nb_side] = parent_arc[xb]
            child_b[nb_side] = xb
            nb_side += 1
            xb = parent[xb]
            db -= 1
        while xa != xb:
            arcs_a[na] = parent_arc[xa]
            child_a[na] = xa
            na += 1
            xa = parent[xa]
            arcs_b[nb_side] = parent_arc[xb]
            child_b[nb_side] = xb
            nb_side += 1
            xb = parent[xb]

        # traversal: entering (ei -> n+ej) [+], up the b-side child->parent,
        # then down the a-side parent->child.
        ncyc = 0
        for t in range(nb_side):
            x = child_b[t]
            k = arcs_b[t]
            # child->parent: col->row is -, row->col is +
            if x >= n:
                cyc_sign[ncyc] = -1
            else:
                cyc_sign[ncyc] = 1
            cyc_arc[ncyc] = k
            ncyc += 1
        for t in range(na - 1, -1, -1):
            x = child_a[t]
            k = arcs_a[t]
            # parent->child: row->col is + when child is a column node
            if x >= n:
                cyc_sign[ncyc] = 1
            else:
                cyc_sign[ncyc] = -1
            cyc_arc[ncyc] = k
            ncyc += 1

        theta = np.inf
        leave = -1
        for t in range(ncyc):
            if cyc_sign[t] < 0:
                fl = arc_flow[cyc_arc[t]]
                if fl < theta:
                    theta = fl
                    leave = cyc_arc[t]

        if leave < 0:
            # cannot happen on a balanced problem; guard against blow-up
            return STATUS_PIVOT_LIMIT, arc_row, arc_col, arc_flow

        if theta <= 1e-15:
            stall += 1
            if stall > 2000:
                bland = True
        else:
            stall = 0

        for t in range(ncyc):
            k = cyc_arc[t]
            if cyc_sign[t] < 0:
                arc_flow[k] -= theta
                if arc_flow[k] < 0.0:
                    arc_flow[k] = 0.0
            else:
                arc_flow[k] += theta

        arc_row[leave] = ei
        arc_col[leave] = ej
        arc_flow[leave] = theta


def solve_transport(cost: np.ndarray, supply: np.ndarray, demand: np.ndarray,
                    max_pivots: int | None = None):
    """Solve min <cost, plan> over the transportation polytope.

    Returns ``(value, plan_rows, plan_cols, plan_flows)`` with the optimal
    basic flows; raises ``RuntimeError`` if the pivot limit is hit.
    """
    C = np.ascontiguousarray(cost, dtype=np.float64)
    a = np.ascontiguousarray(supply, dtype=np.float64)
    b = np.ascontiguousarray(demand, dtype=np.float64)
    n, m = C.shape
    if max_pivots is None:
        max_pivots = 2000 * (n + m) + 200_000
    scale = float(np.max(np.abs(C))) if C.size else 1.0
    price_tol = 1e-11 * (scale + 1.0)
    status, rows, cols, flows = _solve(C, a, b, price_tol, max_pivots)
    if status != STATUS_OPTIMAL:
        raise RuntimeError("transportation solve hit the pivot limit")
    value = float(np.sum(np.asarray(flows) * C[rows, cols], dtype=np.longdouble))
    return value, rows, cols, flows
