"""Asymptotically minimal polynomial families and their diagnostics.

Four families are built on the supports of :mod:`randzeros.supports`:
orthonormal (Arnoldi/Stieltjes on node values), L^p-minimal (IRLS for
finite p, Remez exchange for the sup norm on an interval), Fekete
polynomials and Faber polynomials.

Monomial coefficients are kept for the random sums, but values are always
computed from a stable representation (Hessenberg recurrence, product form
or Faber recurrence): monomial evaluation on an interval is hopeless past
degree 30 or so.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import _backend
from .errors import CapabilityError, IterationLimitError, RankError, ValidationError
from .supports import (
    DiscretizedMeasure,
    Support,
    build_support,
    default_node_count,
    node_count_for,
    reference_measure,
)

BASIS_KINDS = ("orthonormal", "lp_minimal", "fekete", "faber")
SUP_GRID = 2048
NOISE = 64 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class Basis:
    """Triangular family ``p_n = sum_k a[n, k] z^k`` for ``n = 0..N``.

    Attributes
    ----------
    kind : str
        One of ``BASIS_KINDS``.
    degree_max : int
    coeffs : ndarray, shape (N+1, N+1)
        Lower-triangular monomial coefficients, ``a[n, n]`` real positive.
    support : Support
    measure : DiscretizedMeasure or None
    norms : ndarray
        ``||p_n||`` in the family's own norm.
    p : float
        Exponent of the family's norm (2 for orthonormal, inf for Fekete
        and Faber).
    evaluation : dict
        Stable evaluation data; ``method`` is one of ``hessenberg``,
        ``product``, ``faber``.
    """

    kind: str
    degree_max: int
    coeffs: np.ndarray
    support: Support
    measure: DiscretizedMeasure | None
    norms: np.ndarray
    p: float = 2.0
    evaluation: dict = field(default_factory=dict)

    @property
    def leading(self):
        return np.real(np.diag(self.coeffs))

    def evaluate(self, z):
        """Values of all ``p_0..p_N`` at ``z``; shape ``(N+1, len(z))``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        ev = self.evaluation
        meth = ev.get("method", "monomial")
        N = self.degree_max
        if meth == "hessenberg":
            P = _hessenberg_values(ev["H"], z, N)
            T = ev.get("T")
            return P if T is None else T @ P
        if meth == "product":
            out = np.empty((N + 1, z.shape[0]), dtype=complex)
            out[0] = self.coeffs[0, 0]
            for n in range(1, N + 1):
                pts = ev["points"][n - 1]
                out[n] = ev["gamma"][n] * np.prod(z[None, :] - pts[:, None], axis=0)
            return out
        if meth == "faber":
            return _faber_values(ev["c"], ev["b0"], ev["b1"], z, N) * np.asarray(ev["scale"])[:, None]
        out = np.empty((N + 1, z.shape[0]), dtype=complex)
        for n in range(N + 1):
            out[n] = np.polyval(self.coeffs[n, : n + 1][::-1], z)
        return out

    def to_json(self) -> str:
        """Serialize as ``{kind, N, coeffs, support, evaluation, ...}``."""
        rows = [[[float(v.real), float(v.imag)] for v in self.coeffs[n, : n + 1]]
                for n in range(self.degree_max + 1)]
        ev = {}
        for k, v in self.evaluation.items():
            if k == "points":
                ev[k] = [_pairs(a) for a in v]
            elif isinstance(v, np.ndarray):
                ev[k] = {"shape": list(v.shape), "data": _pairs(v.ravel())}
            else:
                ev[k] = v
        meas = None
        if self.measure is not None:
            meas = {"density": self.measure.density, "node_count": int(self.measure.nodes.shape[0])}
        return json.dumps({
            "kind": self.kind,
            "N": self.degree_max,
            "p": _encode_p(self.p),
            "coeffs": rows,
            "norms": [float(x) for x in self.norms],
            "support": self.support.to_dict(),
            "measure": meas,
            "evaluation": ev,
        })

    @classmethod
    def from_json(cls, text: str) -> "Basis":
        """Load and validate a basis exported by :meth:`to_json`."""
        d = json.loads(text)
        try:
            N = int(d["N"])
            kind = d["kind"]
            support = build_support(d["support"])
            rows = d["coeffs"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed basis JSON: {exc}") from None
        if kind not in BASIS_KINDS or len(rows) != N + 1:
            raise ValidationError("basis JSON has wrong kind or row count")
        a = np.zeros((N + 1, N + 1), dtype=complex)
        for n, row in enumerate(rows):
            if len(row) != n + 1:
                raise ValidationError(f"row {n} is not triangular")
            a[n, : n + 1] = [complex(re, im) for re, im in row]
        ev = {}
        for k, v in d.get("evaluation", {}).items():
            if k == "points":
                ev[k] = [_unpairs(x) for x in v]
            elif isinstance(v, dict) and "shape" in v:
                arr = _unpairs(v["data"]).reshape(v["shape"])
                ev[k] = arr.real.copy() if k in ("scale", "gamma") else arr
            else:
                ev[k] = v
        measure = None
        if d.get("measure"):
            measure = reference_measure(support, d["measure"]["density"], d["measure"]["node_count"])
        basis = cls(kind, N, a, support, measure, np.asarray(d["norms"], float), _decode_p(d["p"]), ev)
        validate_basis(basis)
        return basis


def _pairs(arr):
    arr = np.asarray(arr, dtype=complex).ravel()
    return [[float(v.real), float(v.imag)] for v in arr]


def _unpairs(lst):
    arr = np.asarray(lst, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


def _encode_p(p):
    return "inf" if math.isinf(p) else float(p)


def _decode_p(p):
    return math.inf if p == "inf" else float(p)


def validate_basis(basis: Basis, tol: float = 1e-6) -> None:
    """Check the structural invariants of a basis.

    Raises
    ------
    ValidationError
        Non-triangular coefficients, a non-positive leading coefficient, a
        non-identity Gram matrix (orthonormal) or a sup norm away from one
        (Fekete and Faber).
    """
    a = basis.coeffs
    N = basis.degree_max
    if a.shape != (N + 1, N + 1) or np.any(np.triu(a, 1) != 0):
        raise ValidationError("coefficient array is not lower triangular")
    lead = np.diag(a)
    if np.any(lead.real <= 0) or np.any(np.abs(lead.imag) > 1e-12 * np.abs(lead.real)):
        raise ValidationError("leading coefficients must be real and positive")
    if basis.kind == "orthonormal" and basis.measure is not None:
        G = gram_matrix(basis, basis.measure)
        if np.max(np.abs(G - np.eye(N + 1))) > 1e-8:
            raise ValidationError("orthonormal basis fails the Gram check")
    if basis.kind in ("fekete", "faber"):
        s = sup_norms(basis)
        if np.max(np.abs(s - 1.0)) > tol:
            raise ValidationError("sup-normalized basis has a norm away from 1")


# --- evaluation helpers -------------------------------------------------------

def _hessenberg_values(H, z, N):
    P = np.empty((N + 1, z.shape[0]), dtype=complex)
    P[0] = 1.0
    for n in range(N):
        acc = z * P[n] - H[: n + 1, n] @ P[: n + 1]
        P[n + 1] = acc / H[n + 1, n].real
    return P


def _faber_values(c, b0, b1, z, N):
    F = np.empty((N + 1, z.shape[0]), dtype=complex)
    F[0] = 1.0
    for n in range(N):
        acc = (z - b0) * F[n]
        if n >= 1:
            acc = acc - b1 * F[n - 1]
        if n == 1:
            acc = acc - b1
        F[n + 1] = acc / c
    return F


def _faber_coeffs(c, b0, b1, N):
    a = np.zeros((N + 1, N + 1), dtype=complex)
    a[0, 0] = 1.0
    for n in range(N):
        row = np.zeros(N + 1, dtype=complex)
        row[1: n + 2] = a[n, : n + 1]
        row[: n + 1] -= b0 * a[n, : n + 1]
        if n >= 1:
            row[:n] -= b1 * a[n - 1, :n]
        if n == 1:
            row[0] -= b1
        a[n + 1] = row / c
    return a


def sup_norm(fun, support: Support, grid: int = SUP_GRID) -> float:
    """Sup of ``|fun|`` on the boundary: dense grid plus local refinement.

    ``fun`` maps complex points to values.  The grid is ``Psi(e^{i t})``
    with equispaced t; the best few grid maxima are refined in t.
    """
    theta = 2.0 * np.pi * np.arange(grid) / grid
    vals = np.abs(fun(support.psi(np.exp(1j * theta))))
    best = float(np.max(vals))
    h = 2.0 * np.pi / grid
    for i in np.argsort(vals)[-4:]:
        res = minimize_scalar(
            lambda t: -float(np.abs(fun(support.psi(np.exp(1j * np.array([t])))))[0]),
            bounds=(theta[i] - h, theta[i] + h), method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


def sup_norms(basis: Basis, grid: int = SUP_GRID) -> np.ndarray:
    out = np.empty(basis.degree_max + 1)
    for n in range(basis.degree_max + 1):
        out[n] = sup_norm(lambda z, n=n: _row_values(basis, n, z), basis.support, grid)
    return out


def _row_values(basis: Basis, n: int, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    ev = basis.evaluation
    if ev.get("method") == "product":
        if n == 0:
            return np.full(z.shape, basis.coeffs[0, 0])
        return ev["gamma"][n] * np.prod(z[None, :] - ev["points"][n - 1][:, None], axis=0)
    return basis.evaluate(z)[n]


def gram_matrix(basis: Basis, measure: DiscretizedMeasure) -> np.ndarray:
    """``G[m, n] = integral p_m conj(p_n) d tau``."""
    V = basis.evaluate(measure.nodes)
    return (V * measure.weights) @ V.conj().T


def lp_norms(basis: Basis, measure: DiscretizedMeasure, p: float) -> np.ndarray:
    """``||p_n||`` in ``L^p(tau)``; for ``p = inf`` the boundary sup norm."""
    if math.isinf(p):
        return sup_norms(basis)
    V = np.abs(basis.evaluate(measure.nodes))
    return np.sum(measure.weights * V ** p, axis=1) ** (1.0 / p)


# --- orthonormal --------------------------------------------------------------

def _arnoldi(measure: DiscretizedMeasure, N: int):
    x = measure.nodes
    w = measure.weights
    M = x.shape[0]
    Q = np.zeros((N + 1, M), dtype=complex)
    H = np.zeros((N + 1, N), dtype=complex)
    Q[0] = 1.0 / math.sqrt(float(np.sum(w)))
    for n in range(N):
        u = x * Q[n]
        before = math.sqrt(float(np.sum(w * np.abs(u) ** 2)))
        for _ in range(2):
            h = (Q[: n + 1].conj() * w) @ u
            u = u - h @ Q[: n + 1]
            H[: n + 1, n] += h
        nrm = math.sqrt(float(np.sum(w * np.abs(u) ** 2)))
        if not nrm > 1e-10 * before:
            raise RankError(f"orthogonalization broke down at degree {n + 1} "
                            f"({M} nodes)")
        H[n + 1, n] = nrm
        Q[n + 1] = u / nrm
    return Q, H


def _coeffs_from_hessenberg(H, N):
    a = np.zeros((N + 1, N + 1), dtype=complex)
    a[0, 0] = 1.0
    for n in range(N):
        row = np.zeros(N + 1, dtype=complex)
        row[1: n + 2] = a[n, : n + 1]
        row -= H[: n + 1, n] @ a[: n + 1]
        a[n + 1] = row / H[n + 1, n].real
    return a


def orthonormal_basis(measure: DiscretizedMeasure, N: int) -> Basis:
    """Orthonormal polynomials of ``L^2(tau)`` up to degree N.

    Parameters
    ----------
    measure : DiscretizedMeasure
        Must integrate degree ``2N`` products exactly.
    N : int

    Raises
    ------
    ValidationError
        When the quadrature is not exact to degree 2N.
    RankError
        When the node set cannot carry degree N.
    """
    if N < 0:
        raise ValidationError("N must be non-negative")
    if measure.exactness_degree < 2 * N:
        raise ValidationError(
            f"measure is exact to degree {measure.exactness_degree}, need {2 * N}")
    _, H = _arnoldi(measure, N)
    H[np.arange(1, N + 1), np.arange(N)] = H[np.arange(1, N + 1), np.arange(N)].real
    # recurrence entries at rounding level are structural zeros; left in,
    # heavy-tailed coefficients would amplify them into spurious terms
    H[np.abs(H) < NOISE * float(np.max(np.abs(measure.nodes)))] = 0.0
    a = _coeffs_from_hessenberg(H, N)
    return Basis("orthonormal", N, a, measure.support, measure, np.ones(N + 1), 2.0,
                 {"method": "hessenberg", "H": H})


# --- L^p minimal --------------------------------------------------------------

def _irls(b, A, w, p, tol=1e-10, max_iter=500):
    """Minimize ``sum w |b + A c|^p`` over complex c."""
    sw = np.sqrt(w)
    c = np.linalg.lstsq(sw[:, None] * A, -sw * b, rcond=None)[0]
    if p == 2.0:
        return c
    prev = None
    obj = math.inf
    for _ in range(max_iter):
        r = b + A @ c
        ar = np.abs(r)
        obj = float(np.sum(w * ar ** p))
        if prev is not None and abs(prev - obj) <= tol * obj:
            return c
        prev = obj
        floor = 1e-8 * float(np.max(ar))
        om = np.sqrt(w * np.maximum(ar, floor) ** (p - 2.0))
        c_new = np.linalg.lstsq(om[:, None] * A, -om * b, rcond=None)[0]
        c = c + (c_new - c) / (p - 1.0) if p > 2.0 else c_new
    raise IterationLimitError(f"IRLS did not converge for p={p}", best=c, residual=obj)


def _remez(f, A, x, max_iter=100, tol=1e-12):
    """Real minimax of ``f + A c`` over grid x (Haar system); returns (c, E)."""
    n = A.shape[1]
    lo, hi = x[0], x[-1]
    ref_x = (lo + hi) / 2 - (hi - lo) / 2 * np.cos(np.pi * np.arange(n + 1) / n) if n else np.array([lo])
    ref = np.searchsorted(x, ref_x).clip(0, x.shape[0] - 1)
    sgn = (-1.0) ** np.arange(n + 1)
    c = np.zeros(n)
    err = math.inf
    for _ in range(max_iter):
        S = np.column_stack([A[ref], -sgn])
        sol = np.linalg.solve(S, -f[ref])
        c, E = sol[:n], sol[n]
        e = f + A @ c
        err = float(np.max(np.abs(e)))
        if err - abs(E) <= tol * err:
            return c, err
        ref = _exchange(e, n + 1)
    raise IterationLimitError("Remez exchange did not converge", best=c, residual=err)


def _exchange(e, k):
    """Pick k alternating extrema of e (one per sign run, largest kept)."""
    s = np.sign(e)
    s[s == 0] = 1
    runs = np.flatnonzero(np.diff(s)) + 1
    bounds = np.concatenate([[0], runs, [e.shape[0]]])
    idx = np.array([lo + int(np.argmax(np.abs(e[lo:hi]))) for lo, hi in zip(bounds[:-1], bounds[1:])])
    while idx.shape[0] > k:
        mag = np.abs(e[idx])
        if idx.shape[0] - k == 1:
            drop = 0 if mag[0] < mag[-1] else idx.shape[0] - 1
        else:
            j = int(np.argmin(np.minimum(mag[:-1], mag[1:])))
            # drop a neighbouring pair to keep alternation
            drop = [j, j + 1]
        idx = np.delete(idx, drop)
    return idx


def lp_minimal_basis(measure: DiscretizedMeasure, p: float, N: int) -> Basis:
    """Monic ``L^p(tau)`` minimizers rescaled to unit norm.

    Parameters
    ----------
    measure : DiscretizedMeasure
    p : float
        In ``[1, inf]``.  ``inf`` is the sup norm on the support and is
        available for circles and intervals only.
    N : int

    Raises
    ------
    CapabilityError
        ``p = inf`` on an ellipse.
    IterationLimitError
        IRLS or Remez failed to converge; carries the best iterate.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValidationError("p must lie in [1, inf]")
    support = measure.support
    if math.isinf(p) and support.kind == "ellipse":
        raise CapabilityError("sup-norm minimal polynomials are not available on ellipses")
    ob = orthonormal_basis(measure, N)
    H = ob.evaluation["H"]
    T = np.zeros((N + 1, N + 1), dtype=complex)
    norms = np.ones(N + 1)
    lead = np.real(np.diag(ob.coeffs))
    if math.isinf(p) and support.kind == "interval":
        a, b = support.params["a"], support.params["b"]
        K = 8192
        x = np.unique(np.concatenate([
            (a + b) / 2 - (b - a) / 2 * np.cos(np.pi * np.arange(K + 1) / K),
            *[(a + b) / 2 - (b - a) / 2 * np.cos(np.pi * np.arange(n + 1) / n) for n in range(1, N + 1)],
        ]))
        V = _hessenberg_values(H, x.astype(complex), N).real
    else:
        V = ob.evaluate(measure.nodes)
    for n in range(N + 1):
        if n == 0 or (math.isinf(p) and support.kind == "circle"):
            T[n, n] = 1.0
            continue
        f = V[n] / lead[n]
        A = V[:n].T
        if math.isinf(p):
            c, nrm = _remez(f, A, x)
        else:
            c = _irls(f, A, measure.weights, p)
            nrm = float(np.sum(measure.weights * np.abs(f + A @ c) ** p) ** (1.0 / p))
        row = np.append(c, 1.0 / lead[n]) / nrm
        row[np.abs(row) < NOISE * np.max(np.abs(row))] = 0.0
        T[n, : n + 1] = row
    a = T @ ob.coeffs
    a[np.diag_indices(N + 1)] = np.diag(a).real
    if math.isinf(p) and support.kind == "interval":
        norms = np.array([float(np.max(np.abs(T[n] @ V))) for n in range(N + 1)])
    return Basis("lp_minimal", N, a, support, measure, norms, p,
                 {"method": "hessenberg", "H": H, "T": T})


# --- Fekete -------------------------------------------------------------------

class FeketeResult(NamedTuple):
    points: np.ndarray
    energy: float


def _fekete_energy_grad(t, kind, c, b1):
    if kind == 0:
        e = np.exp(1j * t)
        z = c * e + b1 / e
        dz = 1j * (c * e - b1 / e)
    else:
        z = t.astype(complex)
        dz = np.ones_like(z)
    D = z[:, None] - z[None, :]
    np.fill_diagonal(D, 1.0)
    absd = np.abs(D)
    if np.any(absd == 0):
        return -np.inf, np.zeros_like(t)
    E = float(np.sum(np.triu(np.log(absd), 1)))
    R = 1.0 / D
    np.fill_diagonal(R, 0.0)
    g = np.real(dz * R.sum(axis=1))
    return E, g


def fekete_points(support: Support, n: int, restarts: int = 8, seed: int = 0,
                  max_sweeps: int = 2000, tol: float = 1e-12) -> FeketeResult:
    """Local maximizer of ``sum_{i<j} log|z_i - z_j|`` on the boundary.

    A quasi-Newton warm start is followed by projected coordinate ascent
    in the boundary parameter; the best of ``restarts`` starts is kept.
    Circle configurations are rotated so the first angle is 0; interval
    points are sorted.
    """
    support = build_support(support)
    if n < 2:
        raise ValidationError("need at least 2 Fekete points")
    kind, c, b1, lo, hi = support.fekete_geometry()
    rng = np.random.default_rng(seed)
    best_t, best_E = None, -np.inf
    for r in range(restarts):
        if kind == 0:
            t0 = 2 * np.pi * np.arange(n) / n if r == 0 else np.sort(rng.uniform(0, 2 * np.pi, n))
            bounds = None
        else:
            t0 = ((lo + hi) / 2 - (hi - lo) / 2 * np.cos(np.pi * np.arange(n) / (n - 1))
                  if r == 0 else np.sort(rng.uniform(lo, hi, n)))
            bounds = [(lo, hi)] * n

        def fun(t):
            E, g = _fekete_energy_grad(t, kind, c, b1)
            return -E, -g

        res = minimize(fun, t0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-10})
        t1 = np.asarray(res.x, dtype=float)
        if kind == 1:
            t1 = np.clip(t1, lo, hi)
        if not np.isfinite(_fekete_energy_grad(t1, kind, c, b1)[0]):
            t1 = t0
        t2, E, _ = _backend.fekete_sweeps(t1, kind, c, b1, lo, hi, max_sweeps, tol)
        if E > best_E + 1e-13:
            best_t, best_E = np.asarray(t2), float(E)
    if kind == 0:
        ang = np.sort(np.mod(best_t, 2 * np.pi))
        if support.kind == "circle":
            ang = np.mod(ang - ang[0], 2 * np.pi)
        ang = np.sort(ang)
        e = np.exp(1j * ang)
        pts = c * e + b1 / e
    else:
        pts = np.sort(best_t).astype(complex)
    return FeketeResult(pts, float(_backend.log_vandermonde(pts)))


def fekete_basis(support: Support, N: int, restarts: int = 8, seed: int = 0) -> Basis:
    """``p_n = gamma_n prod (z - z_{n,j})`` with unit sup norm on the support."""
    support = build_support(support)
    if N < 1:
        raise ValidationError("N must be at least 1")
    a = np.zeros((N + 1, N + 1), dtype=complex)
    a[0, 0] = 1.0
    gamma = np.ones(N + 1)
    points = []
    for n in range(1, N + 1):
        if n == 1:
            pts = np.array([support.laurent[1]], dtype=complex)
        else:
            pts = fekete_points(support, n, restarts=restarts, seed=seed + n).points
        points.append(pts)
        s = sup_norm(lambda z, pts=pts: np.prod(np.atleast_1d(z)[None, :] - pts[:, None], axis=0), support)
        gamma[n] = 1.0 / s
        a[n, : n + 1] = gamma[n] * np.poly(pts)[::-1]
    norms = np.ones(N + 1)
    return Basis("fekete", N, a, support, None, norms, math.inf,
                 {"method": "product", "points": points, "gamma": gamma})


# --- Faber --------------------------------------------------------------------

def faber_basis(support: Support, N: int) -> Basis:
    """Faber polynomials of the exterior map, rescaled to unit sup norm."""
    support = build_support(support)
    c, b0, b1 = support.laurent
    raw = _faber_coeffs(c, b0, b1, N)
    scale = np.ones(N + 1)
    for n in range(N + 1):
        s = sup_norm(lambda z, n=n: _faber_values(c, b0, b1, np.atleast_1d(z), n)[n], support)
        scale[n] = 1.0 / s
    a = raw * scale[:, None]
    a[np.diag_indices(N + 1)] = np.diag(a).real
    return Basis("faber", N, a, support, None, np.ones(N + 1), math.inf,
                 {"method": "faber", "c": c, "b0": b0, "b1": b1, "scale": scale})


def build_basis(kind: str, support, N: int, density: str = "equilibrium_density",
                p: float = 2.0, node_count: int | None = None, **kw) -> Basis:
    """Dispatch helper used by the experiment runner and the CLI."""
    support = build_support(support)
    measure = reference_measure(support, density, node_count or node_count_for(support, N, density))
    if kind == "orthonormal":
        return orthonormal_basis(measure, N)
    if kind == "lp_minimal":
        return lp_minimal_basis(measure, p, N)
    if kind == "fekete":
        return fekete_basis(support, N, **kw)
    if kind == "faber":
        return faber_basis(support, N)
    raise ValidationError(f"unknown basis kind {kind!r}")


# --- minimality diagnostics ---------------------------------------------------

def default_window(n: int) -> int:
    """``floor(log(n)**2)``; zero for n = 1."""
    return int(math.floor(math.log(n) ** 2)) if n > 1 else 0


@dataclass(frozen=True)
class MinimalityReport:
    """Finite-n slopes for ``n = 1..N`` (index ``n - 1``).

    ``lead_slope`` tends to 0 and ``norm_slope`` to at most 0 for an
    asymptotically minimal family; ``near_lead_slope`` should stay above 0
    in the limit.
    """

    n: np.ndarray
    lead_slope: np.ndarray
    norm_slope: np.ndarray
    near_lead_slope: np.ndarray
    window: np.ndarray
    p: float


def near_lead_slope(coeffs, norms, capacity, n: int, i: int) -> float:
    """``(1/n) log(||p_n|| / |a[n, n-i]|) - log cap``; +inf for a zero coefficient."""
    coef = abs(coeffs[n, n - i])
    if coef == 0:
        return math.inf
    return math.log(norms[n] / coef) / n - math.log(capacity)


def minimality_report(basis: Basis, measure: DiscretizedMeasure | None = None,
                      p: float | None = None, i_n_override=None) -> MinimalityReport:
    """Lead, norm and near-lead slopes of a basis.

    Parameters
    ----------
    basis : Basis
    measure : DiscretizedMeasure, optional
        Measure for the ``L^p`` norm; defaults to the basis' own or the
        equilibrium rule.
    p : float, optional
        Defaults to the basis' own exponent.
    i_n_override : int, sequence or callable, optional
        Window ``i_n``; default ``floor(log^2 n)``, clipped to ``n``.
    """
    N = basis.degree_max
    if N < 8:
        raise ValidationError("minimality report needs degree at least 8")
    p = basis.p if p is None else float(p)
    if measure is None:
        measure = basis.measure or reference_measure(basis.support, "equilibrium_density",
                                                     default_node_count(N))
    norms = lp_norms(basis, measure, p)
    cap = basis.support.capacity
    ns = np.arange(1, N + 1)
    lead = np.log(basis.leading[1:]) / ns + math.log(cap)
    nslope = np.log(norms[1:]) / ns
    win = np.empty(N, dtype=int)
    near = np.empty(N)
    for n in ns:
        if i_n_override is None:
            i = default_window(n)
        elif callable(i_n_override):
            i = int(i_n_override(n))
        elif np.ndim(i_n_override) == 0:
            i = int(i_n_override)
        else:
            i = int(i_n_override[n - 1])
        i = min(max(i, 0), n)
        win[n - 1] = i
        near[n - 1] = near_lead_slope(basis.coeffs, norms, cap, n, i)
    return MinimalityReport(ns, lead, nslope, near, win, p)


def near_lead_floor(basis: Basis, norms, n_max: int | None = None) -> tuple[float, int, int]:
    """Minimum of near_lead_slope over ``n <= n_max`` and all ``i <= floor(log^2 n)``.

    Returns ``(value, n, i)`` at the minimum.
    """
    n_max = basis.degree_max if n_max is None else n_max
    best = (math.inf, 0, 0)
    for n in range(1, n_max + 1):
        for i in range(0, min(default_window(n), n) + 1):
            v = near_lead_slope(basis.coeffs, norms, basis.support.capacity, n, i)
            if v < best[0]:
                best = (v, n, i)
    return best
