"""Compact supports, reference measures and equilibrium oracles.

Every built-in support is the image of the closed unit disk's exterior
under a map of the form

    Psi(w) = c*w + b0 + b1/w,

with ``c`` the logarithmic capacity.  The circle has ``b1 = 0``, the
ellipse ``b1 = (alpha - beta)/2`` and the interval is the degenerate case
``b1 = c``.  Everything potential-theoretic below goes through ``Psi`` and
its inverse ``Phi``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapabilityError, ValidationError

KINDS = ("circle", "interval", "ellipse")
DENSITIES = ("equilibrium_density", "uniform_arclength")


@dataclass(frozen=True)
class Support:
    """A built-in compact set K.

    Attributes
    ----------
    kind : str
        ``"circle"``, ``"interval"`` or ``"ellipse"``.
    params : dict
        ``{"radius"}``, ``{"a", "b"}`` or ``{"alpha", "beta"}``.
    capacity : float
        Logarithmic capacity of K.
    interior_flag : bool
        True when the polynomially convex hull has interior.
    """

    kind: str
    params: dict = field(hash=False)
    capacity: float
    interior_flag: bool

    # --- exterior map -----------------------------------------------------
    @property
    def laurent(self) -> tuple[float, float, float]:
        """``(c, b0, b1)`` in ``Psi(w) = c w + b0 + b1/w``."""
        p = self.params
        if self.kind == "circle":
            return float(p["radius"]), 0.0, 0.0
        if self.kind == "interval":
            c = (p["b"] - p["a"]) / 4.0
            return c, (p["a"] + p["b"]) / 2.0, c
        return (p["alpha"] + p["beta"]) / 2.0, 0.0, (p["alpha"] - p["beta"]) / 2.0

    def psi(self, w):
        c, b0, b1 = self.laurent
        w = np.asarray(w, dtype=complex)
        return c * w + b0 + b1 / w

    def phi(self, z):
        """Exterior conformal map onto ``|w| > 1`` (larger root of the inverse)."""
        c, b0, b1 = self.laurent
        u = np.asarray(z, dtype=complex) - b0
        if b1 == 0:
            return u / c
        s = np.sqrt(u * u - 4.0 * c * b1)
        flip = (u.real * s.real + u.imag * s.imag) < 0
        s = np.where(flip, -s, s)
        return (u + s) / (2.0 * c)

    def log_abs_phi(self, z):
        """``max(0, log|Phi(z)|)``: the Green function with pole at infinity."""
        with np.errstate(divide="ignore"):
            g = np.log(np.abs(self.phi(z)))
        return np.maximum(g, 0.0)

    # --- grids -------------------------------------------------------------
    def boundary_points(self, m: int):
        """``m`` boundary points ``Psi(e^{i theta})``, theta equispaced from 0."""
        theta = 2.0 * np.pi * np.arange(m) / m
        return self.psi(np.exp(1j * theta))

    def level_curve(self, R: float, m: int):
        """Points ``Psi(R e^{i theta})`` on the level set ``|Phi| = R``."""
        theta = 2.0 * np.pi * np.arange(m) / m
        return self.psi(R * np.exp(1j * theta))

    def interior_points(self, scales=(0.2, 0.5, 0.8), m: int = 32):
        """Scaled copies of the boundary; empty for the interval."""
        if not self.interior_flag:
            return np.zeros(0, dtype=complex)
        b = self.boundary_points(m)
        return np.concatenate([s * b for s in scales])

    def boundary_distance(self, z, m: int = 2048):
        """Approximate distance from z to the boundary of P(K)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.kind == "circle":
            return np.abs(np.abs(z) - self.params["radius"])
        if self.kind == "interval":
            x = np.clip(z.real, self.params["a"], self.params["b"])
            return np.abs(z - x)
        b = self.boundary_points(m)
        out = np.empty(z.shape[0])
        for lo in range(0, z.shape[0], 512):
            blk = z[lo:lo + 512]
            out[lo:lo + 512] = np.min(np.abs(blk[:, None] - b[None, :]), axis=1)
        return out

    def level_radius(self, margin: float) -> float:
        """Smallest R whose level curve stays at least ``margin`` from K."""
        if margin <= 0:
            return 1.0
        lo, hi = 1.0, 2.0
        while np.min(self.boundary_distance(self.level_curve(hi, 512))) < margin:
            hi *= 2.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if np.min(self.boundary_distance(self.level_curve(mid, 512))) >= margin:
                hi = mid
            else:
                lo = mid
        return hi

    def boundary_parameter(self, z):
        """Project points to the boundary parameter in [0, 1).

        Angle of ``Phi(z)`` over 2 pi for closed curves; normalized real
        part for the interval.
        """
        z = np.asarray(z, dtype=complex)
        if self.kind == "interval":
            a, b = self.params["a"], self.params["b"]
            return np.clip((z.real - a) / (b - a), 0.0, 1.0)
        return np.mod(np.angle(self.phi(z)), 2.0 * np.pi) / (2.0 * np.pi)

    def fekete_geometry(self):
        """``(kind_code, c, b1, lo, hi)`` for the coordinate-ascent kernel."""
        c, _, b1 = self.laurent
        if self.kind == "interval":
            return 1, 0.0, 0.0, float(self.params["a"]), float(self.params["b"])
        return 0, c, b1, 0.0, 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def build_support(spec) -> Support:
    """Construct a :class:`Support` from a descriptor.

    Parameters
    ----------
    spec : dict
        ``{"kind": ..., "params": {...}}``; the params may also be given at
        the top level, e.g. ``{"kind": "circle", "radius": 1}``.

    Raises
    ------
    ValidationError
        Unknown kind or parameters outside their domain.
    """
    if isinstance(spec, Support):
        return spec
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("support descriptor needs a 'kind'")
    kind = spec["kind"]
    params = dict(spec.get("params", {}))
    for k, v in spec.items():
        if k not in ("kind", "params"):
            params[k] = v
    try:
        params = {k: float(v) for k, v in params.items()}
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"non-numeric support parameter: {exc}") from None
    if kind == "circle":
        rho = params.setdefault("radius", 1.0)
        if not (rho > 0 and math.isfinite(rho)):
            raise ValidationError("circle radius must be positive")
        return Support("circle", {"radius": rho}, rho, True)
    if kind == "interval":
        if "a" not in params or "b" not in params:
            raise ValidationError("interval needs 'a' and 'b'")
        a, b = params["a"], params["b"]
        if not (a < b and math.isfinite(a) and math.isfinite(b)):
            raise ValidationError("interval needs a < b")
        return Support("interval", {"a": a, "b": b}, (b - a) / 4.0, False)
    if kind == "ellipse":
        if "alpha" not in params or "beta" not in params:
            raise ValidationError("ellipse needs 'alpha' and 'beta'")
        al, be = params["alpha"], params["beta"]
        if not (al >= be > 0 and math.isfinite(al)):
            raise ValidationError("ellipse needs alpha >= beta > 0")
        return Support("ellipse", {"alpha": al, "beta": be}, (al + be) / 2.0, True)
    raise ValidationError(f"unknown support kind {kind!r}")


@dataclass(frozen=True, eq=False)
class DiscretizedMeasure:
    """Quadrature rule representing a probability measure on a support.

    Attributes
    ----------
    support : Support
    nodes : ndarray of complex
    weights : ndarray of float
        Positive, summing to one.
    exactness_degree : int
        ``integral q * conj(r)`` is exact (to about 1e-13 relative for the
        ellipse arclength rule) when ``deg q + deg r`` is at most this; -1
        when no degree is guaranteed.
    density : str
    """

    support: Support
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int
    density: str = "equilibrium_density"

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values))

    def lp_norm(self, values, p: float) -> float:
        v = np.abs(np.asarray(values))
        if math.isinf(p):
            return float(np.max(v))
        return float(np.sum(self.weights * v ** p) ** (1.0 / p))

    def gram(self, m: int):
        """Gram matrix of the monomials ``1, z, ..., z^m``."""
        V = self.nodes[:, None] ** np.arange(m + 1)[None, :]
        return (V.T * self.weights) @ V.conj()

    def to_csv(self, path) -> None:
        """Write nodes and weights; interval nodes are real (two columns)."""
        real = self.support.kind == "interval"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if real:
                w.writerow(["node_re", "weight"])
                for x, wt in zip(self.nodes.real, self.weights):
                    w.writerow([repr(float(x)), repr(float(wt))])
            else:
                w.writerow(["node_re", "node_im", "weight"])
                for z, wt in zip(self.nodes, self.weights):
                    w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(wt))])


def default_node_count(N: int) -> int:
    """Nodes needed so Gram integrals up to degree 2N are exact."""
    return 4 * (N + 1)


def reference_measure(support: Support, density: str = "equilibrium_density",
                      node_count: int = 64) -> DiscretizedMeasure:
    """Quadrature rule for a regular reference measure on ``support``.

    Parameters
    ----------
    support : Support
    density : {"equilibrium_density", "uniform_arclength"}
    node_count : int
        At least 4.

    Returns
    -------
    DiscretizedMeasure
        Circle: trapezoid rule (both densities coincide).  Interval:
        Gauss-Chebyshev for the arcsine law, Gauss-Legendre for uniform.
        Ellipse: trapezoid rule in the conformal angle, weighted by
        ``|Psi'|`` for arclength.
    """
    support = build_support(support)
    if density not in DENSITIES:
        raise CapabilityError(f"unsupported density {density!r}")
    if node_count < 4:
        raise ValidationError("node_count must be at least 4")
    M = int(node_count)
    if support.kind == "interval":
        a, b = support.params["a"], support.params["b"]
        mid, half = (a + b) / 2.0, (b - a) / 2.0
        if density == "equilibrium_density":
            t = np.cos((2 * np.arange(M) + 1) * np.pi / (2 * M))[::-1]
            w = np.full(M, 1.0 / M)
        else:
            t, w = np.polynomial.legendre.leggauss(M)
            w = w / w.sum()
        return DiscretizedMeasure(support, (mid + half * t).astype(complex), w, 2 * M - 1, density)
    theta = 2.0 * np.pi * np.arange(M) / M
    e = np.exp(1j * theta)
    nodes = support.psi(e)
    if support.kind == "circle" or density == "equilibrium_density":
        return DiscretizedMeasure(support, nodes, np.full(M, 1.0 / M), M - 1, density)
    c, _, b1 = support.laurent
    w = np.abs(c - b1 / e ** 2)
    exact = max(M - 1 - _arclength_band(support), -1)
    return DiscretizedMeasure(support, nodes, w / w.sum(), exact, density)


_ALIAS_TOL = 1e-13


def _arclength_band(support: Support) -> int:
    """Fourier band of ``|Psi'|`` on the circle, up to a relative tail of ``_ALIAS_TOL``.

    ``|Psi'(e^{it})| = c |1 - q e^{-2it}|`` with ``q = b1 / c``.  Expanding
    both square roots bounds the coefficient at frequency ``2m`` by
    ``c S q^m`` with ``S = (2 - sqrt(1 - q))^2``, while the mean is at least
    ``c (1 - q)``.  The trapezoid rule with ``M`` nodes is then accurate to
    the tolerance for trigonometric degree up to ``M - 1 - K``.
    """
    c, _, b1 = support.laurent
    q = abs(b1 / c)
    if q == 0.0:
        return 0
    S = (2.0 - math.sqrt(1.0 - q)) ** 2
    m0 = math.log(_ALIAS_TOL * (1.0 - q) ** 3 / (2.0 * S)) / math.log(q)
    return 2 * max(int(math.ceil(m0)) - 1, 0)


def node_count_for(support: Support, N: int, density: str = "equilibrium_density") -> int:
    """Smallest node count, at least ``default_node_count(N)``, exact to degree ``2N``."""
    support = build_support(support)
    M = default_node_count(N)
    if support.kind == "ellipse" and density == "uniform_arclength":
        M = max(M, 2 * N + 1 + _arclength_band(support))
    return M


@dataclass(frozen=True, eq=False)
class EquilibriumOracle:
    """Closed-form equilibrium measure of a built-in support.

    Attributes
    ----------
    support : Support
    potential : callable
        ``p(z) = -integral log|z - x| dmu_K(x)``.
    boundary_cdf : callable
        CDF of the equilibrium measure in the boundary parameter t in [0, 1].
    """

    support: Support
    potential: Callable
    boundary_cdf: Callable

    def discretize(self, n: int):
        """``n`` points at the equilibrium quantiles ``(k + 1/2)/n``."""
        q = (np.arange(n) + 0.5) / n
        if self.support.kind == "interval":
            a, b = self.support.params["a"], self.support.params["b"]
            x = a + (b - a) * np.sin(np.pi * q / 2.0) ** 2
            return x.astype(complex)
        return self.support.psi(np.exp(2j * np.pi * q))


def equilibrium_oracle(support: Support) -> EquilibriumOracle:
    """Equilibrium potential and boundary CDF for a built-in support."""
    support = build_support(support)
    robin = -math.log(support.capacity)

    def potential(z):
        z = np.asarray(z, dtype=complex)
        out = robin - support.log_abs_phi(z)
        return float(out) if out.ndim == 0 else out

    if support.kind == "interval":
        def cdf(t):
            t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
            return (2.0 / np.pi) * np.arcsin(np.sqrt(t))
    else:
        def cdf(t):
            return np.clip(np.asarray(t, dtype=float), 0.0, 1.0)

    return EquilibriumOracle(support, potential, cdf)
