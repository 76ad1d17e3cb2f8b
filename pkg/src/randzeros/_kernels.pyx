# cython: language_level=3
"""Compiled kernels: scaled Horner, Aberth sweeps, Fekete coordinate ascent.

Mirrors ``_kernels_py`` exactly in semantics.  Scaled numbers are
``mantissa * 2**exponent`` with ``max(|re|, |im|)`` of the mantissa in
``[0.5, 1)``; zero carries ``ZERO_EXPONENT``.
"""
import numpy as np
cimport cython
from libc.math cimport ldexp, frexp, fabs, log, log2, sqrt, cos, sin, exp, hypot

cdef long long ZERO_EXPONENT = -(1 << 40)
cdef long long SHIFT_FLOOR = -2000
cdef long long SHIFT_CLAMP = 1000

ctypedef double complex cplx


cdef inline long long _clip(long long v, long long lo, long long hi) noexcept nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef inline cplx _ldexp_c(cplx m, long long k) noexcept nogil:
    cdef int kk = <int>_clip(k, -100000, 100000)
    return ldexp(m.real, kk) + 1j * ldexp(m.imag, kk)


cdef inline void _norm(cplx *m, long long *e) noexcept nogil:
    cdef double s = fabs(m[0].real)
    cdef double si = fabs(m[0].imag)
    cdef int k
    if si > s:
        s = si
    if s == 0:
        e[0] = ZERO_EXPONENT
        m[0] = 0
        return
    frexp(s, &k)
    m[0] = ldexp(m[0].real, -k) + 1j * ldexp(m[0].imag, -k)
    e[0] = e[0] + k


cdef inline void _add(cplx am, long long ae, cplx bm, long long be,
                      cplx *om, long long *oe) noexcept nogil:
    cdef long long top = ae if ae > be else be
    cdef cplx r = _ldexp_c(am, _clip(ae - top, SHIFT_FLOOR, 0)) + \
                  _ldexp_c(bm, _clip(be - top, SHIFT_FLOOR, 0))
    om[0] = r
    oe[0] = top
    _norm(om, oe)


cdef inline void _muladd(cplx am, long long ae, cplx zm, long long ze,
                         cplx cm, long long ce, cplx *om, long long *oe) noexcept nogil:
    cdef long long pe
    if am == 0:
        pe = ZERO_EXPONENT
    else:
        pe = ae + ze
    _add(am * zm, pe, cm, ce, om, oe)


cdef inline double _log2abs(cplx m, long long e) noexcept nogil:
    cdef double a = hypot(m.real, m.imag)
    if a == 0:
        return -1e308
    return log2(a) + <double>e


cdef inline void _step(cplx *m, long long *e, cplx zm, long long ze,
                       cplx cm, long long ce) noexcept nogil:
    # m*2^e <- m*2^e * zm*2^ze + cm*2^ce, renormalized only when needed
    cdef long long E
    cdef cplx t
    cdef double s
    if m[0] == 0:
        m[0] = cm
        e[0] = ce
        return
    E = e[0] + ze
    t = m[0] * zm
    if cm != 0:
        if ce > E:
            t = _ldexp_c(t, _clip(E - ce, SHIFT_FLOOR, 0)) + cm
            E = ce
        else:
            t = t + _ldexp_c(cm, _clip(ce - E, SHIFT_FLOOR, 0))
    m[0] = t
    e[0] = E
    s = fabs(t.real)
    if fabs(t.imag) > s:
        s = fabs(t.imag)
    if s > 1e90 or s < 1e-90:
        _norm(m, e)


cdef void _horner_one(const cplx[:] cm, const long long[:] ce, const double[:] cabs,
                      cplx zm, long long ze,
                      cplx *pm, long long *pe, cplx *dm, long long *de,
                      cplx *bm, long long *be) noexcept nogil:
    cdef Py_ssize_t deg = cm.shape[0] - 1
    cdef Py_ssize_t k
    cdef cplx am = cm[deg]
    cdef long long ae = ce[deg]
    cdef cplx d = 0
    cdef long long dexp = ZERO_EXPONENT
    cdef cplx b = cabs[deg]
    cdef long long bexp = ce[deg]
    cdef cplx zabs = hypot(zm.real, zm.imag)
    for k in range(deg - 1, -1, -1):
        _step(&d, &dexp, zm, ze, am, ae)
        _step(&am, &ae, zm, ze, cm[k], ce[k])
        _step(&b, &bexp, zabs, ze, cabs[k], ce[k])
    _norm(&am, &ae)
    _norm(&d, &dexp)
    _norm(&b, &bexp)
    pm[0] = am
    pe[0] = ae
    dm[0] = d
    de[0] = dexp
    bm[0] = b
    be[0] = bexp


def horner(cm, ce, zm, ze):
    """Evaluate p, p' and sum |c_k||z|^k at each point (see _kernels_py.horner)."""
    cdef const cplx[:] c_m = np.ascontiguousarray(cm, dtype=complex)
    cdef const long long[:] c_e = np.ascontiguousarray(ce, dtype=np.int64)
    cdef const double[:] c_abs = np.abs(np.asarray(c_m))
    cdef const cplx[:] z_m = np.ascontiguousarray(zm, dtype=complex)
    cdef const long long[:] z_e = np.ascontiguousarray(ze, dtype=np.int64)
    cdef Py_ssize_t n = z_m.shape[0]
    out_pm = np.empty(n, dtype=complex)
    out_pe = np.empty(n, dtype=np.int64)
    out_dm = np.empty(n, dtype=complex)
    out_de = np.empty(n, dtype=np.int64)
    out_bm = np.empty(n, dtype=float)
    out_be = np.empty(n, dtype=np.int64)
    cdef cplx[:] vpm = out_pm
    cdef long long[:] vpe = out_pe
    cdef cplx[:] vdm = out_dm
    cdef long long[:] vde = out_de
    cdef double[:] vbm = out_bm
    cdef long long[:] vbe = out_be
    cdef Py_ssize_t i
    cdef cplx pm, dm, bm
    cdef long long pe, de, be
    with nogil:
        for i in range(n):
            _horner_one(c_m, c_e, c_abs, z_m[i], z_e[i], &pm, &pe, &dm, &de, &bm, &be)
            vpm[i] = pm
            vpe[i] = pe
            vdm[i] = dm
            vde[i] = de
            vbm[i] = bm.real
            vbe[i] = be
    return out_pm, out_pe, out_dm, out_de, out_bm, out_be


def aberth(cm, ce, zm, ze, double tol, int max_iter):
    """Aberth-Ehrlich iteration (see _kernels_py.aberth for the contract)."""
    cdef const cplx[:] c_m = np.ascontiguousarray(cm, dtype=complex)
    cdef const long long[:] c_e = np.ascontiguousarray(ce, dtype=np.int64)
    cdef const double[:] c_abs = np.abs(np.asarray(c_m))
    z_m_arr = np.array(zm, dtype=complex)
    z_e_arr = np.array(ze, dtype=np.int64)
    cdef cplx[:] z_m = z_m_arr
    cdef long long[:] z_e = z_e_arr
    cdef Py_ssize_t n = z_m.shape[0]
    cdef Py_ssize_t deg = c_m.shape[0] - 1
    active_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[:] active = active_arr
    new_m_arr = np.empty(n, dtype=complex)
    new_e_arr = np.empty(n, dtype=np.int64)
    done_arr = np.zeros(n, dtype=np.uint8)
    cdef cplx[:] new_m = new_m_arr
    cdef long long[:] new_e = new_e_arr
    cdef unsigned char[:] done = done_arr
    res_arr = np.empty(n, dtype=float)
    cdef double[:] res_out = res_arr
    cdef double log2tol = log2(tol)
    cdef double floor = log2(4.0 * (deg + 1) * 2.220446049250313e-16)
    cdef int sweeps = 0
    cdef int it
    cdef Py_ssize_t i, j
    cdef cplx pm, dm, bm, nm, acc, u, diff, na, den, wm
    cdef long long pe, de, be, ne, we
    cdef double res
    cdef int any_active
    with nogil:
        for it in range(1, max_iter + 1):
            any_active = 0
            for i in range(n):
                if active[i]:
                    any_active = 1
                    break
            if not any_active:
                break
            sweeps = it
            for i in range(n):
                done[i] = 0
                if not active[i]:
                    continue
                _horner_one(c_m, c_e, c_abs, z_m[i], z_e[i], &pm, &pe, &dm, &de, &bm, &be)
                res = _log2abs(pm, pe) - (log2(bm.real) + <double>be)
                if dm == 0:
                    nm = 1.0
                    ne = z_e[i] - 30
                else:
                    nm = pm / dm
                    ne = pe - de
                _norm(&nm, &ne)
                acc = 0
                for j in range(n):
                    if j == i:
                        continue
                    u = _ldexp_c(z_m[j], _clip(z_e[j] - z_e[i], -SHIFT_CLAMP, SHIFT_CLAMP))
                    diff = z_m[i] - u
                    if diff == 0:
                        diff = 2.2250738585072014e-308
                    acc = acc + 1.0 / diff
                na = _ldexp_c(nm * acc, _clip(ne - z_e[i], -SHIFT_CLAMP, SHIFT_CLAMP))
                den = 1.0 - na
                if hypot(den.real, den.imag) < 1e-300:
                    wm = nm
                else:
                    wm = nm / den
                we = ne
                _norm(&wm, &we)
                _add(z_m[i], z_e[i], -wm, we, &new_m[i], &new_e[i])
                if _log2abs(wm, we) <= log2tol + _log2abs(new_m[i], new_e[i]) or res <= floor:
                    done[i] = 1
            for i in range(n):
                if active[i]:
                    z_m[i] = new_m[i]
                    z_e[i] = new_e[i]
                    if done[i]:
                        active[i] = 0
        for i in range(n):
            _horner_one(c_m, c_e, c_abs, z_m[i], z_e[i], &pm, &pe, &dm, &de, &bm, &be)
            res_out[i] = _log2abs(pm, pe) - (log2(bm.real) + <double>be)
    conv = active_arr == 0
    res_arr[res_arr < -1e300] = -np.inf
    return z_m_arr, z_e_arr, conv, sweeps, res_arr


cdef inline cplx _pt(int kind, double t, double c, double b1) noexcept nogil:
    cdef cplx e
    if kind == 0:
        e = cos(t) + 1j * sin(t)
        return c * e + b1 / e
    return t + 0j


def log_vandermonde(z):
    cdef const cplx[:] zz = np.ascontiguousarray(z, dtype=complex)
    cdef Py_ssize_t n = zz.shape[0]
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    cdef cplx d
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d = zz[i] - zz[j]
                s += log(hypot(d.real, d.imag))
    return s


def fekete_sweeps(t, int kind, double c, double b1, double lo, double hi,
                  int max_sweeps, double tol):
    """Projected coordinate ascent (see _kernels_py.fekete_sweeps)."""
    t_arr = np.array(t, dtype=float)
    cdef double[:] tt = t_arr
    cdef Py_ssize_t n = tt.shape[0]
    z_arr = np.empty(n, dtype=complex)
    cdef cplx[:] z = z_arr
    cdef Py_ssize_t i, j
    cdef int sweeps = 0
    cdef int it, bt
    cdef double gain, f0, f1, d1, d2, step, cap, tn, dmin, a, g1abs
    cdef cplx g, g1, g2, e, r, zn, diff
    cdef int ok
    for i in range(n):
        z[i] = _pt(kind, tt[i], c, b1)
    with nogil:
        for it in range(1, max_sweeps + 1):
            sweeps = it
            gain = 0.0
            for i in range(n):
                if kind == 0:
                    e = cos(tt[i]) + 1j * sin(tt[i])
                    g = c * e + b1 / e
                    g1 = 1j * (c * e - b1 / e)
                    g2 = -(c * e + b1 / e)
                else:
                    g = tt[i] + 0j
                    g1 = 1.0
                    g2 = 0.0
                f0 = 0.0
                d1 = 0.0
                d2 = 0.0
                dmin = 1e308
                for j in range(n):
                    if j == i:
                        continue
                    diff = g - z[j]
                    a = hypot(diff.real, diff.imag)
                    if a < dmin:
                        dmin = a
                    f0 += log(a)
                    r = 1.0 / diff
                    d1 += (g1 * r).real
                    d2 += (g2 * r - (g1 * r) * (g1 * r)).real
                if d2 < 0:
                    step = -d1 / d2
                else:
                    step = 0.1 * dmin * (1.0 if d1 > 0 else (-1.0 if d1 < 0 else 0.0))
                g1abs = hypot(g1.real, g1.imag)
                if g1abs < 1e-300:
                    g1abs = 1e-300
                cap = 0.5 * dmin / g1abs
                if fabs(step) > cap:
                    step = cap if step > 0 else -cap
                for bt in range(40):
                    tn = tt[i] + step
                    if kind == 1:
                        if tn < lo:
                            tn = lo
                        if tn > hi:
                            tn = hi
                    zn = _pt(kind, tn, c, b1)
                    f1 = 0.0
                    ok = 1
                    for j in range(n):
                        if j == i:
                            continue
                        diff = zn - z[j]
                        a = hypot(diff.real, diff.imag)
                        if a == 0:
                            ok = 0
                            break
                        f1 += log(a)
                    if ok and f1 > f0:
                        tt[i] = tn
                        z[i] = zn
                        gain += f1 - f0
                        break
                    step *= 0.5
            if gain < tol:
                break
    return t_arr, log_vandermonde(z_arr), sweeps
