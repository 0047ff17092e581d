"""Pure-numpy implementation of the fused time-step kernel.

Must stay numerically interchangeable with ``_ckernels.pyx``; the backend
agreement test compares the two record by record.
"""

from __future__ import annotations

import math

import numpy as np

from ._layout import (
    C_DECAY, C_GAIN, C_SGAIN, C_IDECAY, C_IGAIN, C_ISGAIN, C_OUTW, C_MEAS, C_RATES, C_MU,
    P_DX, P_DT, P_A, P_B, P_P, P_G0, P_EKDT, P_FLUX_EXTRA, P_SOURCE, P_DIRICHLET,
    S_Q, S_S, S_INT_UT2, S_INT_U2, S_H, S_INT_DISS, S_VB_PREV,
    Q_UT2, Q_UX2, Q_U2, Q_UP, Q_UUT, Q_GCIRC, Q_PHI_EN, Q_PHI_DISS, Q_PSI2, Q_L8,
    Q_PHIMU, Q_UL, Q_O, Q_INT_UT2, Q_INT_U2, Q_H, Q_INT_DISS, Q_MEMS, Q_UX2_NEXT, Q_FINITE,
)


def _trap(f: np.ndarray, dx: float) -> float:
    return dx * (float(f.sum()) - 0.5 * (f[0] + f[-1]))


def advance(u_prev, u, u_next, R, P, phi, Phi, coef, forcing, scal, prm, row):
    """Compute u_next from (u_prev, u), record level-n quantities, advance histories.

    Mutates ``u_next``, ``R``, ``P``, ``phi``, ``Phi``, ``scal`` and ``row``.
    """
    dx = prm[P_DX]
    dt = prm[P_DT]
    a = prm[P_A]
    b = prm[P_B]
    p = prm[P_P]
    g0 = prm[P_G0]
    ekdt = prm[P_EKDT]
    n = u.shape[0] - 1
    inv_dx2 = 1.0 / (dx * dx)

    out_w = coef[C_OUTW]
    meas = coef[C_MEAS]
    rates = coef[C_RATES]
    o_val = float(out_w @ phi)
    flux = -b * o_val + prm[P_FLUX_EXTRA]

    rhs = np.empty_like(u)
    rhs[1:n] = (u[:n - 1] - 2.0 * u[1:n] + u[2:]) * inv_dx2
    rhs[n] = 2.0 * (u[n - 1] - u[n]) * inv_dx2 + 2.0 * flux / dx
    if g0 != 0.0:
        rhs[1:n] -= g0 * (R[:n - 1] - 2.0 * R[1:n] + R[2:]) * inv_dx2
        rhs[n] -= g0 * 2.0 * (R[n - 1] - R[n]) * inv_dx2
    if prm[P_SOURCE] != 0.0:
        rhs += np.abs(u) ** (p - 2.0) * u
    if forcing is not None:
        rhs += forcing
    cp = 1.0 + 0.5 * a * dt
    cm = 1.0 - 0.5 * a * dt
    u_next[:] = (2.0 * u - cm * u_prev + dt * dt * rhs) / cp
    u_next[0] = 0.0
    if prm[P_DIRICHLET] != 0.0:
        u_next[n] = 0.0

    # level-n record
    v = (u_next - u_prev) / (2.0 * dt)
    du = np.diff(u)
    du_next = np.diff(u_next)
    ux2 = float(du @ du) / dx
    row[Q_UT2] = _trap(v * v, dx)
    row[Q_UX2] = ux2
    row[Q_U2] = u2 = _trap(u * u, dx)
    row[Q_UP] = _trap(np.abs(u) ** p, dx)
    row[Q_UUT] = _trap(u * v, dx)
    row[Q_GCIRC] = g0 * (ux2 * scal[S_S] - 2.0 * float(du @ P) + scal[S_Q]) if g0 != 0.0 else 0.0
    cphi = meas * phi
    row[Q_PHI_EN] = float(cphi @ phi)
    row[Q_PHI_DISS] = diss = float((cphi * rates) @ phi)
    cr_Phi = meas * rates * Phi
    row[Q_PSI2] = psi2 = float(cr_Phi @ Phi)
    row[Q_L8] = float(cr_Phi @ phi)
    row[Q_PHIMU] = float(cphi @ coef[C_MU])
    row[Q_UL] = u[n]
    row[Q_O] = o_val
    row[Q_INT_UT2] = scal[S_INT_UT2]
    row[Q_INT_U2] = scal[S_INT_U2]
    row[Q_H] = scal[S_H]
    row[Q_INT_DISS] = scal[S_INT_DISS]
    row[Q_MEMS] = scal[S_S]
    ux2_next = float(du_next @ du_next) / dx
    row[Q_UX2_NEXT] = ux2_next

    # diffusive variables, forced by the boundary velocity linear across two half steps
    vb = (u_next[n] - u[n]) / dt
    slope = (vb - scal[S_VB_PREV]) / dt
    Phi += coef[C_IDECAY] * phi + coef[C_IGAIN] * vb + coef[C_ISGAIN] * slope
    phi *= coef[C_DECAY]
    phi += coef[C_GAIN] * vb + coef[C_SGAIN] * slope
    scal[S_VB_PREV] = vb

    # memory histories
    h = 0.5 * dt
    R *= ekdt
    R += (ekdt * h) * u + h * u_next
    P *= ekdt
    P += ((ekdt * h) * du + h * du_next) / dx
    scal[S_Q] = ekdt * (scal[S_Q] + h * ux2) + h * ux2_next
    scal[S_S] = ekdt * (scal[S_S] + h) + h

    # running time integrals
    cphi = meas * phi
    diss_next = float((cphi * rates) @ phi)
    psi2_next = float((meas * rates * Phi) @ Phi)
    dv = (u_next - u) / dt
    scal[S_INT_UT2] += dt * _trap(dv * dv, dx)
    scal[S_INT_U2] += h * (u2 + _trap(u_next * u_next, dx))
    scal[S_H] += h * (psi2 + psi2_next)
    scal[S_INT_DISS] += h * (diss + diss_next)

    finite = math.isfinite(ux2_next) and math.isfinite(diss_next) and math.isfinite(u_next[n])
    row[Q_FINITE] = 1.0 if finite else 0.0
