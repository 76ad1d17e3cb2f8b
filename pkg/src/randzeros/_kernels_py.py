"""NumPy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_kernels`` module; used
when the extension is not built or ``RANDZEROS_PURE=1`` is set.

Numbers travel as ``(mantissa, exponent)`` pairs meaning
``mantissa * 2**exponent`` with ``max(|re|, |im|)`` of the mantissa in
``[0.5, 1)``.  Zero carries ``ZERO_EXPONENT``.
"""
import numpy as np

from .logarray import ZERO_EXPONENT, normalize_scaled

SHIFT_FLOOR = -2000
SHIFT_CLAMP = 1000


def _ldexp_c(m, k):
    return np.ldexp(m.real, k) + 1j * np.ldexp(m.imag, k)


def _add(am, ae, bm, be):
    top = np.maximum(ae, be)
    sa = np.clip(ae - top, SHIFT_FLOOR, 0)
    sb = np.clip(be - top, SHIFT_FLOOR, 0)
    return normalize_scaled(_ldexp_c(am, sa) + _ldexp_c(bm, sb), top)


def _muladd(am, ae, zm, ze, cm, ce):
    # a*z + c; a zero accumulator must not dominate through its exponent
    pe = np.where(am == 0, ZERO_EXPONENT, ae + ze)
    return _add(am * zm, pe, cm, ce)


def horner(cm, ce, zm, ze):
    """Evaluate p, p' and the bound sum |c_k||z|^k at points z.

    Parameters
    ----------
    cm, ce : ndarray
        Coefficients in ascending degree, scaled form.
    zm, ze : ndarray
        Evaluation points, scaled form.

    Returns
    -------
    tuple
        ``(pm, pe, dm, de, bm, be)``; ``bm`` is real.
    """
    cm = np.asarray(cm, dtype=complex)
    ce = np.asarray(ce, dtype=np.int64)
    zm = np.asarray(zm, dtype=complex)
    ze = np.asarray(ze, dtype=np.int64)
    deg = cm.shape[0] - 1
    npts = zm.shape[0]
    am = np.full(npts, cm[deg], dtype=complex)
    ae = np.full(npts, ce[deg], dtype=np.int64)
    dm = np.zeros(npts, dtype=complex)
    de = np.full(npts, ZERO_EXPONENT, dtype=np.int64)
    zabs = np.abs(zm).astype(complex)
    bm = np.full(npts, abs(cm[deg]), dtype=complex)
    be = ae.copy()
    cabs = np.abs(cm)
    for k in range(deg - 1, -1, -1):
        dm, de = _muladd(dm, de, zm, ze, am, ae)
        am, ae = _muladd(am, ae, zm, ze, cm[k], ce[k])
        bm, be = _muladd(bm, be, zabs, ze, cabs[k], ce[k])
    return am, ae, dm, de, bm.real, be


def _log2abs(m, e):
    with np.errstate(divide="ignore"):
        return np.log2(np.abs(m)) + e


def aberth(cm, ce, zm, ze, tol, max_iter):
    """Aberth-Ehrlich iteration with Jacobi updates and per-root freezing.

    A root stops moving once its correction is below ``tol * |z|`` or its
    backward residual ``|p(z)| / sum|c_k||z|^k`` is at rounding level.

    Returns
    -------
    tuple
        ``(zm, ze, converged, sweeps, log2_residual)`` where the residual is
        evaluated at the returned roots.
    """
    cm = np.asarray(cm, dtype=complex)
    ce = np.asarray(ce, dtype=np.int64)
    zm = np.array(zm, dtype=complex)
    ze = np.array(ze, dtype=np.int64)
    n = zm.shape[0]
    deg = cm.shape[0] - 1
    active = np.ones(n, dtype=bool)
    log2tol = np.log2(tol)
    floor = np.log2(4.0 * (deg + 1) * np.finfo(float).eps)
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            sweeps -= 1
            break
        zi_m, zi_e = zm[idx], ze[idx]
        pm, pe, dm, de, bm, be = horner(cm, ce, zi_m, zi_e)
        res = _log2abs(pm, pe) - (np.log2(bm) + be)

        bad = dm == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            nm = np.where(bad, 1.0, pm / np.where(bad, 1.0, dm))
        ne = np.where(bad, zi_e - 30, pe - de)
        nm, ne = normalize_scaled(nm, ne)

        shift = np.clip(ze[None, :] - zi_e[:, None], -SHIFT_CLAMP, SHIFT_CLAMP)
        u = _ldexp_c(np.broadcast_to(zm, shift.shape), shift)
        diff = zi_m[:, None] - u
        rows = np.arange(idx.size)
        diff[rows, idx] = 1.0
        diff[diff == 0] = np.finfo(float).tiny
        inv = 1.0 / diff
        inv[rows, idx] = 0.0
        acc = inv.sum(axis=1)

        na = _ldexp_c(nm * acc, np.clip(ne - zi_e, -SHIFT_CLAMP, SHIFT_CLAMP))
        den = 1.0 - na
        small = np.abs(den) < 1e-300
        wm = np.where(small, nm, nm / np.where(small, 1.0, den))
        wm, we = normalize_scaled(wm, ne)

        new_m, new_e = _add(zi_m, zi_e, -wm, we)
        done = (_log2abs(wm, we) <= log2tol + _log2abs(new_m, new_e)) | (res <= floor)
        zm[idx] = new_m
        ze[idx] = new_e
        active[idx[done]] = False
    pm, pe, _, _, bm, be = horner(cm, ce, zm, ze)
    res = _log2abs(pm, pe) - (np.log2(bm) + be)
    return zm, ze, ~active, sweeps, res


# --- Fekete coordinate ascent -------------------------------------------------

def _curve(kind, t, c, b1):
    if kind == 0:
        e = np.exp(1j * t)
        return c * e + b1 / e, 1j * (c * e - b1 / e), -(c * e + b1 / e)
    return t + 0j, np.ones_like(t) + 0j, np.zeros_like(t) + 0j


def _point(kind, t, c, b1):
    if kind == 0:
        e = np.exp(1j * t)
        return c * e + b1 / e
    return complex(t)


def log_vandermonde(z):
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    iu = np.triu_indices(n, 1)
    d = np.abs(z[:, None] - z[None, :])[iu]
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(d)))


def fekete_sweeps(t, kind, c, b1, lo, hi, max_sweeps, tol):
    """Projected coordinate ascent on sum_{i<j} log|z_i - z_j|.

    ``kind`` 0 parameterizes the curve ``c e^{it} + b1 e^{-it}`` by angle;
    kind 1 is the real segment ``[lo, hi]`` parameterized by coordinate
    (steps are projected back onto it).  Each coordinate takes one
    safeguarded Newton step per sweep.

    Returns
    -------
    tuple
        ``(t, energy, sweeps)``.
    """
    t = np.array(t, dtype=float)
    n = t.shape[0]
    z = _curve(kind, t, c, b1)[0]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        gain = 0.0
        for i in range(n):
            others = np.delete(z, i)
            ti = t[i]
            g, g1, g2 = _curve(kind, np.array([ti]), c, b1)
            r = 1.0 / (g[0] - others)
            f0 = float(np.sum(np.log(np.abs(g[0] - others))))
            d1 = float(np.sum((g1[0] * r).real))
            d2 = float(np.sum((g2[0] * r - (g1[0] * r) ** 2).real))
            if d2 < 0:
                step = -d1 / d2
            else:
                step = 0.1 * np.sign(d1) * float(np.min(np.abs(g[0] - others)))
            cap = 0.5 * float(np.min(np.abs(g[0] - others))) / max(abs(g1[0]), 1e-300)
            if abs(step) > cap:
                step = np.sign(step) * cap
            for _ in range(40):
                tn = ti + step
                if kind == 1:
                    tn = min(max(tn, lo), hi)
                zn = _point(kind, tn, c, b1)
                d = np.abs(zn - others)
                if np.all(d > 0):
                    f1 = float(np.sum(np.log(d)))
                    if f1 > f0:
                        t[i] = tn
                        z[i] = zn
                        gain += f1 - f0
                        break
                step *= 0.5
        if gain < tol:
            break
    return t, log_vandermonde(z), sweeps
