"""Eigenfunctions of the unit equilateral triangle and their three-fold symmetrizations.

All functions take coordinate arrays (x, y) and broadcast like numpy ufuncs.
"""
from __future__ import annotations

import numpy as np

PI = np.pi
SQRT3 = np.sqrt(3.0)

# frequencies in y
_W = 2 * PI / SQRT3


def u1(x, y):
    return np.sin(4 * PI * x / 3) + 2 * np.cos(_W * y) * np.sin(2 * PI * x / 3)


def u1_hat(x, y):
    return np.sin(8 * PI * x / 3) - 2 * np.cos(2 * _W * y) * np.sin(4 * PI * x / 3)


def grad_u1(x, y):
    gx = (4 * PI / 3) * (np.cos(4 * PI * x / 3) + np.cos(_W * y) * np.cos(2 * PI * x / 3))
    gy = -2 * _W * np.sin(_W * y) * np.sin(2 * PI * x / 3)
    return gx, gy


def grad_u1_hat(x, y):
    gx = (8 * PI / 3) * (np.cos(8 * PI * x / 3) - np.cos(2 * _W * y) * np.cos(4 * PI * x / 3))
    gy = 4 * _W * np.sin(2 * _W * y) * np.sin(4 * PI * x / 3)
    return gx, gy


def v_k(k, x, y):
    """Test function (1-k) u1 + k u1_hat."""
    return (1 - k) * u1(x, y) + k * u1_hat(x, y)


def grad_v_k(k, x, y):
    ax, ay = grad_u1(x, y)
    bx, by = grad_u1_hat(x, y)
    return (1 - k) * ax + k * bx, (1 - k) * ay + k * by


def reflect(i: int, x, y):
    """Reflection across the line -x + sqrt3 y = 1/2 (i=1) or x + sqrt3 y = 1/2 (i=2)."""
    if i == 1:
        return x / 2 + SQRT3 * y / 2 - 0.25, SQRT3 * x / 2 - y / 2 + SQRT3 / 4
    if i == 2:
        return x / 2 - SQRT3 * y / 2 + 0.25, -SQRT3 * x / 2 - y / 2 + SQRT3 / 4
    raise ValueError(f"reflection index must be 1 or 2, got {i}")


def phi_psi_eta(x, y):
    cx, c2x = np.cos(2 * PI * x), np.cos(4 * PI * x)
    phi = np.cos(2 * _W * y) - 2 * np.cos(_W * y) * cx
    psi = c2x - 2 * np.cos(3 * _W * y) * cx
    eta = np.cos(4 * _W * y) + 2 * np.cos(2 * _W * y) * c2x
    return phi, psi, eta


def grad_phi_psi_eta(x, y):
    """Analytic gradients ((phi_x, phi_y), (psi_x, psi_y), (eta_x, eta_y))."""
    cx, sx = np.cos(2 * PI * x), np.sin(2 * PI * x)
    c2x, s2x = np.cos(4 * PI * x), np.sin(4 * PI * x)
    c1, s1 = np.cos(_W * y), np.sin(_W * y)
    c2, s2 = np.cos(2 * _W * y), np.sin(2 * _W * y)
    s3, c3 = np.sin(3 * _W * y), np.cos(3 * _W * y)
    s4 = np.sin(4 * _W * y)
    dphi = (4 * PI * c1 * sx, -2 * _W * s2 + 2 * _W * s1 * cx)
    dpsi = (-4 * PI * s2x + 4 * PI * c3 * sx, 6 * _W * s3 * cx)
    deta = (-8 * PI * c2 * s2x, -4 * _W * s4 - 4 * _W * s2 * c2x)
    return dphi, dpsi, deta


def sym_combos(x, y):
    """(U1, U2, U3, V1, V2, V3) written through phi, psi, eta."""
    phi, psi, eta = phi_psi_eta(x, y)
    c = 8 * PI**2 / 3
    return (
        3 * (1.5 + phi),
        3 * (1.5 + eta),
        -3 * (psi / 2 + phi),
        c * (3 - phi),
        4 * c * (3 - eta),
        2 * c * (psi - phi),
    )


def _orbit(x, y):
    return [(x, y), reflect(1, x, y), reflect(2, x, y)]


def sym_combos_direct(x, y):
    """Same six quantities summed over the orbit {id, sigma1, sigma2} of the point."""
    out = np.zeros((6,) + np.broadcast(x, y).shape)
    for px, py in _orbit(x, y):
        a, b = u1(px, py), u1_hat(px, py)
        (ax, ay), (bx, by) = grad_u1(px, py), grad_u1_hat(px, py)
        out[0] += a * a
        out[1] += b * b
        out[2] += a * b
        out[3] += ax * ax + ay * ay
        out[4] += bx * bx + by * by
        out[5] += ax * bx + ay * by
    return tuple(out)


def _mix(k, t1, t2, t3):
    return (1 - k) ** 2 * t1 + k**2 * t2 + 2 * k * (1 - k) * t3


def U(k, x, y):
    """Symmetrized square of v_k, expanded in phi, psi, eta."""
    phi, psi, eta = phi_psi_eta(x, y)
    return 1.5 * _mix(k, 3 + 2 * phi, 3 + 2 * eta, -psi - 2 * phi)


def V(k, x, y):
    """Symmetrized squared gradient of v_k, expanded in phi, psi, eta."""
    phi, psi, eta = phi_psi_eta(x, y)
    return (8 * PI**2 / 3) * ((1 - k) ** 2 * (3 - phi) + 4 * k**2 * (3 - eta) + 4 * k * (1 - k) * (psi - phi))


def U_combination(k, x, y):
    u = sym_combos(x, y)
    return _mix(k, u[0], u[1], u[2])


def V_combination(k, x, y):
    u = sym_combos(x, y)
    return _mix(k, u[3], u[4], u[5])


def grad_U(k, x, y):
    (px, py), (qx, qy), (ex, ey) = grad_phi_psi_eta(x, y)
    gx = 1.5 * _mix(k, 2 * px, 2 * ex, -qx - 2 * px)
    gy = 1.5 * _mix(k, 2 * py, 2 * ey, -qy - 2 * py)
    return gx, gy


def U_at_A(k, a):
    """U at A = (0, sqrt3 (1-a)/2), closed form."""
    c = np.cos
    return 1.5 * _mix(
        k,
        3 + 2 * c(2 * PI * a) + 4 * c(PI * a),
        3 + 2 * c(4 * PI * a) + 4 * c(2 * PI * a),
        -1 - 2 * c(3 * PI * a) - 2 * c(2 * PI * a) - 4 * c(PI * a),
    )


def U_at_B(k, a):
    """U at B = (a/2, sqrt3 (1-a)/2), closed form."""
    c = np.cos
    return 1.5 * _mix(
        k,
        5 + 4 * c(2 * PI * a),
        5 + 4 * c(4 * PI * a),
        -6 * c(2 * PI * a) - c(4 * PI * a) - 2,
    )
