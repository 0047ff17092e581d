# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fused time-step kernel; mirrors ``_kernels_py.advance`` loop for loop."""

from libc.math cimport fabs, pow, isfinite

# keep in sync with _layout.py
cdef enum:
    C_DECAY = 0
    C_GAIN = 1
    C_SGAIN = 2
    C_IDECAY = 3
    C_IGAIN = 4
    C_ISGAIN = 5
    C_OUTW = 6
    C_MEAS = 7
    C_RATES = 8
    C_MU = 9


cdef inline double _abspow(double x, double p) nogil:
    if x == 0.0:
        return 0.0
    return pow(fabs(x), p)


def advance(double[::1] u_prev, double[::1] u, double[::1] u_next,
            double[::1] R, double[::1] P, double[::1] phi, double[::1] Phi,
            double[:, ::1] coef, forcing, double[::1] scal, double[::1] prm,
            double[::1] row):
    cdef double dx = prm[0], dt = prm[1], a = prm[2], b = prm[3], p = prm[4]
    cdef double g0 = prm[5], ekdt = prm[6], flux_extra = prm[7]
    cdef bint source_on = prm[8] != 0.0, dirichlet = prm[9] != 0.0
    cdef Py_ssize_t n = u.shape[0] - 1, K = phi.shape[0], i, k
    cdef double inv_dx2 = 1.0 / (dx * dx)
    cdef double[::1] fv
    cdef bint has_forcing = forcing is not None
    if has_forcing:
        fv = forcing
    cdef double o_val = 0.0
    for k in range(K):
        o_val += coef[C_OUTW, k] * phi[k]
    cdef double flux = -b * o_val + flux_extra
    cdef double cp = 1.0 + 0.5 * a * dt, cm = 1.0 - 0.5 * a * dt
    cdef double rhs, dt2 = dt * dt

    with nogil:
        for i in range(1, n + 1):
            if i < n:
                rhs = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_dx2
                if g0 != 0.0:
                    rhs -= g0 * (R[i - 1] - 2.0 * R[i] + R[i + 1]) * inv_dx2
            else:
                rhs = 2.0 * (u[n - 1] - u[n]) * inv_dx2 + 2.0 * flux / dx
                if g0 != 0.0:
                    rhs -= g0 * 2.0 * (R[n - 1] - R[n]) * inv_dx2
            if source_on:
                rhs += _abspow(u[i], p - 2.0) * u[i]
            if has_forcing:
                rhs += fv[i]
            u_next[i] = (2.0 * u[i] - cm * u_prev[i] + dt2 * rhs) / cp
        u_next[0] = 0.0
        if dirichlet:
            u_next[n] = 0.0

    cdef double ut2 = 0.0, u2 = 0.0, up = 0.0, uut = 0.0, w, v
    cdef double ux2 = 0.0, ux2n = 0.0, cross = 0.0, du, dun
    cdef double u2n = 0.0, dv2 = 0.0, dv
    cdef double inv2dt = 0.5 / dt
    with nogil:
        for i in range(n + 1):
            w = dx
            if i == 0 or i == n:
                w = 0.5 * dx
            v = (u_next[i] - u_prev[i]) * inv2dt
            ut2 += w * v * v
            u2 += w * u[i] * u[i]
            up += w * _abspow(u[i], p)
            uut += w * u[i] * v
            u2n += w * u_next[i] * u_next[i]
            dv = (u_next[i] - u[i]) / dt
            dv2 += w * dv * dv
        for i in range(n):
            du = u[i + 1] - u[i]
            dun = u_next[i + 1] - u_next[i]
            ux2 += du * du
            ux2n += dun * dun
            cross += du * P[i]
        ux2 /= dx
        ux2n /= dx

    cdef double phi_en = 0.0, diss = 0.0, psi2 = 0.0, l8 = 0.0, phimu = 0.0, c
    with nogil:
        for k in range(K):
            c = coef[C_MEAS, k]
            phi_en += c * phi[k] * phi[k]
            diss += c * coef[C_RATES, k] * phi[k] * phi[k]
            psi2 += c * coef[C_RATES, k] * Phi[k] * Phi[k]
            l8 += c * coef[C_RATES, k] * Phi[k] * phi[k]
            phimu += c * coef[C_MU, k] * phi[k]

    row[0] = ut2
    row[1] = ux2
    row[2] = u2
    row[3] = up
    row[4] = uut
    row[5] = g0 * (ux2 * scal[1] - 2.0 * cross + scal[0]) if g0 != 0.0 else 0.0
    row[6] = phi_en
    row[7] = diss
    row[8] = psi2
    row[9] = l8
    row[10] = phimu
    row[11] = u[n]
    row[12] = o_val
    row[13] = scal[2]
    row[14] = scal[3]
    row[15] = scal[4]
    row[16] = scal[5]
    row[17] = scal[1]
    row[18] = ux2n

    cdef double vb = (u_next[n] - u[n]) / dt
    cdef double slope = (vb - scal[6]) / dt
    cdef double diss_n = 0.0, psi2_n = 0.0, old
    with nogil:
        for k in range(K):
            old = phi[k]
            Phi[k] += coef[C_IDECAY, k] * old + coef[C_IGAIN, k] * vb + coef[C_ISGAIN, k] * slope
            phi[k] = coef[C_DECAY, k] * old + coef[C_GAIN, k] * vb + coef[C_SGAIN, k] * slope
            c = coef[C_MEAS, k] * coef[C_RATES, k]
            diss_n += c * phi[k] * phi[k]
            psi2_n += c * Phi[k] * Phi[k]
    scal[6] = vb

    cdef double h = 0.5 * dt
    with nogil:
        for i in range(n + 1):
            R[i] = ekdt * R[i] + (ekdt * h) * u[i] + h * u_next[i]
        for i in range(n):
            P[i] = ekdt * P[i] + ((ekdt * h) * (u[i + 1] - u[i]) + h * (u_next[i + 1] - u_next[i])) / dx
    scal[0] = ekdt * (scal[0] + h * ux2) + h * ux2n
    scal[1] = ekdt * (scal[1] + h) + h
    scal[2] += dt * dv2
    scal[3] += h * (u2 + u2n)
    scal[4] += h * (psi2 + psi2_n)
    scal[5] += h * (diss + diss_n)

    row[19] = 1.0 if (isfinite(ux2n) and isfinite(diss_n) and isfinite(u_next[n])) else 0.0
