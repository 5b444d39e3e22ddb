"""Compiled inner loops for circuit evaluation.

A circuit is flattened to a gate list in time order. ``kinds[g]`` is 0 for a
U3 slot (matrix ``u[refs[g]]`` on qubit ``q0[g]``) and 1 for a fixed
two-qubit gate (matrix ``fixed[refs[g]]`` on ordered link ``(q0[g], q1[g])``).
Gates are applied by left multiplication on the rows of a dim x dim matrix.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _apply1(v, u, q, n):
    dim = v.shape[0]
    stride = 1 << (n - 1 - q)
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for i in range(dim):
        if i & stride:
            continue
        i1 = i + stride
        for c in range(v.shape[1]):
            x0 = v[i, c]
            x1 = v[i1, c]
            v[i, c] = u00 * x0 + u01 * x1
            v[i1, c] = u10 * x0 + u11 * x1


@njit(cache=True)
def _apply2(v, g, a, b, n):
    dim = v.shape[0]
    sa = 1 << (n - 1 - a)
    sb = 1 << (n - 1 - b)
    g00, g01, g02, g03 = g[0, 0], g[0, 1], g[0, 2], g[0, 3]
    g10, g11, g12, g13 = g[1, 0], g[1, 1], g[1, 2], g[1, 3]
    g20, g21, g22, g23 = g[2, 0], g[2, 1], g[2, 2], g[2, 3]
    g30, g31, g32, g33 = g[3, 0], g[3, 1], g[3, 2], g[3, 3]
    for i in range(dim):
        if i & sa or i & sb:
            continue
        i1 = i + sb
        i2 = i + sa
        i3 = i + sa + sb
        for c in range(v.shape[1]):
            x0 = v[i, c]
            x1 = v[i1, c]
            x2 = v[i2, c]
            x3 = v[i3, c]
            v[i, c] = g00 * x0 + g01 * x1 + g02 * x2 + g03 * x3
            v[i1, c] = g10 * x0 + g11 * x1 + g12 * x2 + g13 * x3
            v[i2, c] = g20 * x0 + g21 * x1 + g22 * x2 + g23 * x3
            v[i3, c] = g30 * x0 + g31 * x1 + g32 * x2 + g33 * x3


@njit(cache=True)
def _dagger2(g):
    out = np.empty((g.shape[1], g.shape[0]), dtype=np.complex128)
    for i in range(g.shape[0]):
        for j in range(g.shape[1]):
            out[j, i] = np.conj(g[i, j])
    return out


@njit(cache=True)
def forward(n, kinds, q0, q1, refs, u, fixed):
    dim = 1 << n
    v = np.eye(dim, dtype=np.complex128)
    for g in range(kinds.shape[0]):
        if kinds[g] == 0:
            _apply1(v, u[refs[g]], q0[g], n)
        else:
            _apply2(v, fixed[refs[g]], q0[g], q1[g], n)
    return v


@njit(cache=True)
def trace_gradient(n, kinds, q0, q1, refs, u, du, fixed, target):
    """Circuit unitary V and d Tr(T^dagger V) / d(slot params).

    The reverse sweep keeps B (product of gates before the current one) and
    L = A^dagger T (A = product of gates after it), both recovered by
    applying inverse gates, so each gate costs O(dim^2).
    """
    dim = 1 << n
    v = forward(n, kinds, q0, q1, refs, u, fixed)
    b = v.copy()
    lmat = target.copy()
    dtr = np.zeros((u.shape[0], 3), dtype=np.complex128)
    env = np.empty((2, 2), dtype=np.complex128)
    for g in range(kinds.shape[0] - 1, -1, -1):
        if kinds[g] == 0:
            slot = refs[g]
            q = q0[g]
            ud = _dagger2(u[slot])
            _apply1(b, ud, q, n)
            stride = 1 << (n - 1 - q)
            env[:, :] = 0
            for i in range(dim):
                alpha = 1 if i & stride else 0
                base = i - alpha * stride
                for beta in range(2):
                    k = base + beta * stride
                    acc = 0j
                    for c in range(dim):
                        acc += np.conj(lmat[i, c]) * b[k, c]
                    env[alpha, beta] += acc
            for j in range(3):
                s = 0j
                for r in range(2):
                    for t in range(2):
                        s += du[slot, j, r, t] * env[r, t]
                dtr[slot, j] = s
            _apply1(lmat, ud, q, n)
        else:
            gd = _dagger2(fixed[refs[g]])
            _apply2(b, gd, q0[g], q1[g], n)
            _apply2(lmat, gd, q0[g], q1[g], n)
    return v, dtr


@njit(cache=True)
def u3_tables(p, with_grad):
    """U3 matrices (k, 2, 2) and derivatives (k, 3, 2, 2) for a (k, 3) array."""
    k = p.shape[0]
    u = np.empty((k, 2, 2), dtype=np.complex128)
    du = np.zeros((k if with_grad else 0, 3, 2, 2), dtype=np.complex128)
    for i in range(k):
        c = np.cos(0.5 * p[i, 0])
        s = np.sin(0.5 * p[i, 0])
        ep = np.exp(1j * p[i, 1])
        el = np.exp(1j * p[i, 2])
        u[i, 0, 0] = c
        u[i, 0, 1] = -el * s
        u[i, 1, 0] = ep * s
        u[i, 1, 1] = ep * el * c
        if with_grad:
            du[i, 0, 0, 0] = -0.5 * s
            du[i, 0, 0, 1] = -0.5 * el * c
            du[i, 0, 1, 0] = 0.5 * ep * c
            du[i, 0, 1, 1] = -0.5 * ep * el * s
            du[i, 1, 1, 0] = 1j * u[i, 1, 0]
            du[i, 1, 1, 1] = 1j * u[i, 1, 1]
            du[i, 2, 0, 1] = 1j * u[i, 0, 1]
            du[i, 2, 1, 1] = 1j * u[i, 1, 1]
    return u, du
