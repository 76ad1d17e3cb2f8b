"""Zeros of polynomials with coefficients spanning huge dynamic ranges.

The primary solver is Aberth-Ehrlich in extended-range arithmetic (see
``_kernels_py``), started from the Newton polygon of the coefficients.
A balanced companion matrix with a small complex QR iteration serves as an
independent cross-check for low degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import CapabilityError, PartialResultError, ValidationError
from .logarray import LN2, LogComplexArray, as_log_array

ROOT_TOL = 1e-12
MAX_SWEEPS = 500
COMPANION_MAX_DEGREE = 64
INITIAL_ANGLE = 0.3


@dataclass(frozen=True, eq=False)
class RootResult:
    """Roots of one polynomial plus solver diagnostics.

    Attributes
    ----------
    log_roots : LogComplexArray
        Roots in extended range (``D`` entries, multiplicity included).
    converged : ndarray of bool
    diagnostics : dict
        ``iterations``, ``max_residual`` (backward, relative), ``rescale_exponent``
        (power of two removed from the coefficients), ``out_of_range``
        (roots whose modulus does not fit a double), ``degree``,
        ``zero_roots`` and ``backend``.
    """

    log_roots: LogComplexArray
    converged: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def roots(self) -> np.ndarray:
        return self.log_roots.to_complex()

    @property
    def degree(self) -> int:
        return len(self.log_roots)


def _trim(zeta):
    z = as_log_array(zeta)
    nz = np.flatnonzero(np.isfinite(z.logabs))
    if nz.size == 0:
        raise ValidationError("all coefficients are zero")
    return z, int(nz[0]), int(nz[-1])


def newton_polygon(logabs) -> list[tuple[int, int]]:
    """Edges of the upper convex hull of ``(k, log|c_k|)`` over finite entries."""
    ks = np.flatnonzero(np.isfinite(logabs))
    hull: list[int] = []
    for k in ks:
        while len(hull) >= 2:
            k1, k2 = hull[-2], hull[-1]
            # drop k2 when it lies on or below the chord k1 -> k
            cross = (k2 - k1) * (logabs[k] - logabs[k1]) - (k - k1) * (logabs[k2] - logabs[k1])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(int(k))
    return list(zip(hull[:-1], hull[1:]))


def initial_guesses(logabs) -> LogComplexArray:
    """Newton-polygon radii with equispaced, offset angles."""
    D = int(np.flatnonzero(np.isfinite(logabs))[-1])
    logr, ang = [], []
    for k1, k2 in newton_polygon(logabs):
        m = k2 - k1
        lr = (logabs[k1] - logabs[k2]) / m
        base = 2.0 * np.pi * k1 / D + INITIAL_ANGLE
        for i in range(m):
            logr.append(lr)
            ang.append(base + 2.0 * np.pi * i / m)
    return LogComplexArray(np.asarray(logr), np.exp(1j * np.asarray(ang)))


def roots(zeta, tol: float = ROOT_TOL, max_iter: int = MAX_SWEEPS) -> RootResult:
    """All zeros of ``sum_k zeta_k z^k``.

    Parameters
    ----------
    zeta : array-like of complex or LogComplexArray
        Ascending coefficients.  Trailing zeros lower the degree; leading
        zeros contribute exact roots at 0.
    tol : float
        A root stops moving once its Aberth correction is below
        ``tol * |z|``, or once its backward residual is at rounding level.
    max_iter : int
        Sweep limit.

    Returns
    -------
    RootResult
        Empty when the effective degree is 0.

    Raises
    ------
    ValidationError
        All coefficients vanish.
    PartialResultError
        Some roots did not converge; ``best`` holds the last RootResult.
    """
    z, lo, D = _trim(zeta)
    zero_roots = lo
    core = z[lo: D + 1]
    deg = D - lo
    if D == 0:
        return RootResult(LogComplexArray(np.zeros(0), np.zeros(0, complex)), np.zeros(0, bool),
                          {"iterations": 0, "max_residual": 0.0, "rescale_exponent": 0,
                           "out_of_range": 0, "degree": 0, "zero_roots": 0, "backend": _backend.NAME})
    cm, ce = core.to_scaled()
    shift = int(np.max(ce))
    ce = ce - shift
    if deg > 0:
        init = initial_guesses(core.logabs)
        zm, ze = init.to_scaled()
        zm, ze, conv, sweeps, res = _backend.aberth(cm, ce, zm, ze, tol, max_iter)
        found = LogComplexArray.from_scaled(zm, ze)
    else:
        conv, sweeps, res = np.zeros(0, bool), 0, np.zeros(0)
        found = LogComplexArray(np.zeros(0), np.zeros(0, complex))
    logabs = np.concatenate([np.full(zero_roots, -np.inf), found.logabs])
    phase = np.concatenate([np.ones(zero_roots, complex), found.phase])
    conv = np.concatenate([np.ones(zero_roots, bool), np.asarray(conv, bool)])
    resid = np.asarray(res, dtype=float)
    max_res = float(np.exp2(np.max(resid))) if resid.size else 0.0
    diag = {
        "iterations": int(sweeps),
        "max_residual": max_res,
        "rescale_exponent": -shift,
        "out_of_range": int(np.count_nonzero(np.abs(found.logabs) > 709.0)),
        "degree": D,
        "zero_roots": zero_roots,
        "backend": _backend.NAME,
    }
    out = RootResult(LogComplexArray(logabs, phase), conv, diag)
    if not np.all(conv):
        raise PartialResultError(
            f"{int(np.count_nonzero(~conv))} of {D} roots unconverged after {sweeps} sweeps",
            best=out, residual=max_res)
    return out


# --- companion-matrix cross-check ---------------------------------------------

def _balance(A, max_rounds=100):
    A = A.copy()
    n = A.shape[0]
    for _ in range(max_rounds):
        done = True
        for i in range(n):
            # off-diagonal norms summed directly; subtraction can go negative
            c = float(np.sum(np.abs(np.delete(A[:, i], i))))
            r = float(np.sum(np.abs(np.delete(A[i, :], i))))
            if c == 0 or r == 0 or not math.isfinite(c + r):
                continue
            f = 1.0
            s = c + r
            while c < r / 2:
                c *= 2
                r /= 2
                f *= 2
            while c >= r * 2:
                c /= 2
                r *= 2
                f /= 2
            if c + r < 0.95 * s:
                done = False
                A[:, i] *= f
                A[i, :] /= f
        if done:
            break
    return A


def _givens(x, y):
    r = math.hypot(abs(x), abs(y))
    if r == 0:
        return np.eye(2, dtype=complex)
    return np.array([[np.conj(x) / r, np.conj(y) / r], [-y / r, x / r]])


def hessenberg_eigvals(H, max_iter_per_eig: int = 60) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by shifted complex QR.

    Single Wilkinson shifts, Givens rotations, deflation on negligible
    subdiagonals and an exceptional shift every tenth stalled step.
    """
    H = np.array(H, dtype=complex)
    n = H.shape[0]
    eps = np.finfo(float).eps
    out = []
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            out.append(H[0, 0])
            break
        l = hi
        while l > 0:
            if abs(H[l, l - 1]) <= eps * (abs(H[l, l]) + abs(H[l - 1, l - 1])):
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            out.append(H[hi, hi])
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_iter_per_eig:
            raise CapabilityError("companion QR failed to converge")
        a, b, c, d = H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi]
        if its % 10 == 0:
            mu = d + 0.75 * abs(c)
        else:
            tr2 = (a + d) / 2
            disc = np.sqrt(tr2 * tr2 - (a * d - b * c))
            m1, m2 = tr2 + disc, tr2 - disc
            mu = m1 if abs(m1 - d) < abs(m2 - d) else m2
        idx = np.arange(l, hi + 1)
        H[idx, idx] -= mu
        rots = []
        for k in range(l, hi):
            G = _givens(H[k, k], H[k + 1, k])
            H[k:k + 2, k:hi + 1] = G @ H[k:k + 2, k:hi + 1]
            rots.append(G)
        for k, G in zip(range(l, hi), rots):
            top = min(k + 2, hi)
            H[l:top + 1, k:k + 2] = H[l:top + 1, k:k + 2] @ G.conj().T
        H[idx, idx] += mu
    return np.asarray(out)


def roots_companion(zeta) -> np.ndarray:
    """Roots as eigenvalues of the balanced companion matrix (degree <= 64).

    Raises
    ------
    CapabilityError
        Degree above 64, or monic coefficients outside double range.
    """
    z, lo, D = _trim(zeta)
    deg = D - lo
    if D > COMPANION_MAX_DEGREE:
        raise CapabilityError(f"companion solver limited to degree {COMPANION_MAX_DEGREE}")
    zeros = np.zeros(lo, dtype=complex)
    if deg == 0:
        return zeros
    core = z[lo: D + 1]
    rel = core.logabs[:-1] - core.logabs[-1]
    if np.any(rel > 700):
        raise CapabilityError("monic coefficients overflow; use roots()")
    with np.errstate(under="ignore"):
        mono = np.exp(rel) * core.phase[:-1] / core.phase[-1]
    C = np.zeros((deg, deg), dtype=complex)
    C[0, :] = -mono[::-1]
    C[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    return np.concatenate([zeros, hessenberg_eigvals(_balance(C))])


# --- checks ---------------------------------------------------------------------

class VietaReport(NamedTuple):
    sum_error: float
    log_product_error: float
    arg_product_error: float
    flagged: bool


def vieta_check(zeta, found, threshold: float = 1e-6) -> VietaReport:
    """Compare root sum and product with the coefficient identities.

    The product is compared as ``sum log|z_i|`` against
    ``log|zeta_0| - log|zeta_D|`` plus the argument; the sum as a relative
    error normalized by ``sum |z_i|``, all in scaled form.
    """
    z, _, D = _trim(zeta)
    if isinstance(found, RootResult):
        r = found.log_roots
    else:
        r = as_log_array(found)
    if len(r) != D:
        raise ValidationError(f"expected {D} roots, got {len(r)}")
    if D == 0:
        return VietaReport(0.0, 0.0, 0.0, False)
    # product
    lp = float(np.sum(r.logabs))
    target_lp = float(z.logabs[0] - z.logabs[D])
    if np.isinf(lp) and np.isinf(target_lp):
        lerr, aerr = 0.0, 0.0
    else:
        lerr = abs(lp - target_lp) if np.isfinite(lp - target_lp) else math.inf
        arg_r = float(np.sum(np.angle(r.phase)))
        arg_t = float(np.angle(((-1) ** D) * z.phase[0] / z.phase[D]))
        aerr = abs(math.remainder(arg_r - arg_t, 2 * math.pi))
    # sum, scaled by the largest root
    M = float(np.max(r.logabs))
    if not np.isfinite(M):
        serr = 0.0 if not np.isfinite(z.logabs[D - 1]) else math.inf
    else:
        w = np.exp(r.logabs - M)
        s = np.sum(w * r.phase)
        denom = float(np.sum(w))
        if np.isfinite(z.logabs[D - 1]):
            lt = z.logabs[D - 1] - z.logabs[D] - M
            t = -math.exp(min(lt, 700.0)) * z.phase[D - 1] / z.phase[D]
        else:
            t = 0.0
        serr = abs(s - t) / denom
    flagged = bool(max(serr, lerr, aerr) > threshold)
    return VietaReport(float(serr), float(lerr), float(aerr), flagged)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLIT = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def compensated_horner(coeffs, z) -> np.ndarray:
    """Evaluate ``sum c_k z^k`` with error-free transformations.

    The accumulator carries a correction term for both real and imaginary
    parts, giving roughly twice the working precision.
    """
    c = np.asarray(coeffs, dtype=complex)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x, y = z.real, z.imag
    rh = np.full(z.shape, c[-1].real)
    ih = np.full(z.shape, c[-1].imag)
    rl = np.zeros(z.shape)
    il = np.zeros(z.shape)
    for k in range(c.shape[0] - 2, -1, -1):
        p1, e1 = _two_prod(rh, x)
        p2, e2 = _two_prod(ih, y)
        p3, e3 = _two_prod(rh, y)
        p4, e4 = _two_prod(ih, x)
        re, e5 = _two_sum(p1, -p2)
        im, e6 = _two_sum(p3, p4)
        re, e7 = _two_sum(re, c[k].real)
        im, e8 = _two_sum(im, c[k].imag)
        rl_new = (e1 - e2 + e5 + e7) + (rl * x - il * y)
        il_new = (e3 + e4 + e6 + e8) + (rl * y + il * x)
        rh, ih, rl, il = re, im, rl_new, il_new
    return (rh + rl) + 1j * (ih + il)


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Uniform probability measure on ``D`` roots.

    Attributes
    ----------
    log_points : LogComplexArray
    count : int
    """

    log_points: LogComplexArray
    count: int

    @property
    def points(self) -> np.ndarray:
        return self.log_points.to_complex()

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.count, 1.0 / self.count) if self.count else np.zeros(0)

    def union(self, other: "EmpiricalMeasure") -> "EmpiricalMeasure":
        lp = LogComplexArray(np.concatenate([self.log_points.logabs, other.log_points.logabs]),
                             np.concatenate([self.log_points.phase, other.log_points.phase]))
        return EmpiricalMeasure(lp, self.count + other.count)


def zero_measure(found, D_n: int | None = None) -> EmpiricalMeasure:
    """Wrap roots as an empirical measure with normalizer ``D_n``.

    Raises
    ------
    ValidationError
        ``len(roots) != D_n``.
    """
    r = found.log_roots if isinstance(found, RootResult) else as_log_array(found)
    D = len(r) if D_n is None else int(D_n)
    if len(r) != D:
        raise ValidationError(f"{len(r)} roots but D_n = {D}")
    return EmpiricalMeasure(r, D)


def roots_to_log2(found: RootResult) -> np.ndarray:
    """``log2|z|`` per root (diagnostic for saturation)."""
    return found.log_roots.logabs / LN2
