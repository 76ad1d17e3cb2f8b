"""Potentials, energies and distances between zero measures and mu_K.

Also houses empirical checkers for Cartan's estimate, the annulus-curve
lemma and the two-condition deterministic criterion.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import stats

from . import _backend
from .bases import Basis, lp_norms
from .errors import ValidationError
from .logarray import LN2, LogComplexArray, as_log_array, log_abs_diff, scaled_from_complex
from .rootfinding import EmpiricalMeasure
from .supports import DiscretizedMeasure, EquilibriumOracle

DEFAULT_MARGIN = 0.2
GRID_POINTS = 128


def log_potential(measure, z):
    """``p_mu(z) = -integral log|z - x| dmu(x)``.

    Parameters
    ----------
    measure : EmpiricalMeasure or EquilibriumOracle
    z : complex or array-like

    Returns
    -------
    float or ndarray
        ``+inf`` where z coincides with an atom of an empirical measure.
    """
    if isinstance(measure, EquilibriumOracle):
        return measure.potential(z)
    scalar = np.ndim(z) == 0
    zz = as_log_array(np.atleast_1d(np.asarray(z, dtype=complex)))
    pts = measure.log_points
    if measure.count == 0:
        raise ValidationError("empty measure has no potential")
    L = log_abs_diff(zz.logabs[:, None], zz.phase[:, None], pts.logabs[None, :], pts.phase[None, :])
    with np.errstate(invalid="ignore"):
        out = -np.sum(L, axis=1) / measure.count
    out = np.where(np.any(np.isneginf(L), axis=1), np.inf, out)
    return float(out[0]) if scalar else out


def energy(measure: EmpiricalMeasure) -> float:
    """Pairwise energy ``-(2/(D(D-1))) sum_{i<j} log|z_i - z_j|``.

    Coincident points give ``+inf`` and a :class:`RuntimeWarning`.
    """
    D = measure.count
    if D < 2:
        raise ValidationError("energy needs at least two points")
    p = measure.log_points
    L = log_abs_diff(p.logabs[:, None], p.phase[:, None], p.logabs[None, :], p.phase[None, :])
    iu = np.triu_indices(D, 1)
    vals = L[iu]
    if np.any(np.isneginf(vals)):
        warnings.warn("coincident points: energy is infinite", RuntimeWarning, stacklevel=2)
        return math.inf
    return float(-2.0 * np.sum(vals) / (D * (D - 1)))


def exterior_grid(oracle: EquilibriumOracle, margin: float = DEFAULT_MARGIN,
                  m: int = GRID_POINTS):
    """Two level curves of the exterior map: ``R1`` at ``margin`` from K and ``2 R1 - 1``."""
    s = oracle.support
    R1 = s.level_radius(margin)
    return np.concatenate([s.level_curve(R1, m), s.level_curve(2.0 * R1 - 1.0, m)])


def potential_discrepancy(emp: EmpiricalMeasure, oracle: EquilibriumOracle, grid=None,
                          margin: float = DEFAULT_MARGIN, m: int = GRID_POINTS) -> float:
    """``max |p_emp - p_oracle|`` over an exterior grid."""
    z = exterior_grid(oracle, margin, m) if grid is None else np.atleast_1d(np.asarray(grid, complex))
    diff = np.abs(log_potential(emp, z) - oracle.potential(z))
    return float(np.max(diff))


class KSResult(NamedTuple):
    statistic: float
    im_mean: float


def project(emp: EmpiricalMeasure, oracle: EquilibriumOracle, projection: str | None = None):
    """Boundary parameter of each point (``angle`` or ``real_part``)."""
    s = oracle.support
    projection = projection or ("real_part" if s.kind == "interval" else "angle")
    pts = emp.points
    finite = np.isfinite(pts)
    if projection == "angle":
        if s.kind == "interval":
            raise ValidationError("angle projection needs a closed curve support")
        t = np.empty(emp.count)
        t[finite] = s.boundary_parameter(pts[finite])
        # Phi(z) ~ z / c far out, so the phase is the angle
        t[~finite] = np.mod(np.angle(emp.log_points.phase[~finite]), 2 * np.pi) / (2 * np.pi)
        return t
    if projection == "real_part":
        if s.kind != "interval":
            raise ValidationError("real_part projection needs an interval support")
        return s.boundary_parameter(np.where(finite, pts, np.sign(pts.real) * 1e300))
    raise ValidationError(f"unknown projection {projection!r}")


def boundary_ks(emp: EmpiricalMeasure, oracle: EquilibriumOracle,
                projection: str | None = None) -> KSResult:
    """One-sample KS distance of the projected roots to the equilibrium CDF.

    ``im_mean`` is the mean ``|Im z|`` (the interval companion statistic;
    reported for every support).
    """
    t = project(emp, oracle, projection)
    ks = stats.kstest(t, oracle.boundary_cdf).statistic
    pts = emp.points
    im = float(np.mean(np.abs(pts.imag))) if emp.count else 0.0
    return KSResult(float(ks), im)


def mass_outside(emp: EmpiricalMeasure, r: float) -> float:
    """Fraction of points with ``|z| > r``."""
    if not r > 0:
        raise ValidationError("r must be positive")
    if emp.count == 0:
        return 0.0
    return float(np.count_nonzero(emp.log_points.logabs > math.log(r)) / emp.count)


def interior_mass_defect(emp: EmpiricalMeasure, oracle: EquilibriumOracle, scale: float = 0.8) -> float:
    """Mass inside the ``scale``-shrunk copy of P(K); 0 for the interval.

    The equilibrium measure sits on the outer boundary, so this should
    vanish in the limit.
    """
    s = oracle.support
    if not s.interior_flag or emp.count == 0:
        return 0.0
    pts = emp.points
    pts = pts[np.isfinite(pts)] / scale
    inside = s.log_abs_phi(pts) <= 0
    return float(np.count_nonzero(inside) / emp.count)


# --- lemma checkers -----------------------------------------------------------

def _monic(zeta):
    z = as_log_array(zeta)
    nz = np.flatnonzero(np.isfinite(z.logabs))
    if nz.size == 0:
        raise ValidationError("zero polynomial")
    D = int(nz[-1])
    z = z[: D + 1]
    return LogComplexArray(z.logabs - z.logabs[D], z.phase / z.phase[D]), D


def _log_abs_poly(monic: LogComplexArray, z):
    """``log|p(z)|`` by scaled Horner."""
    cm, ce = monic.to_scaled()
    zm, ze = scaled_from_complex(z)
    pm, pe, *_ = _backend.horner(cm, ce, zm, ze)
    with np.errstate(divide="ignore"):
        return (np.log2(np.abs(pm)) + pe) * LN2


def fujiwara_bound(monic: LogComplexArray) -> float:
    """Fujiwara's bound on the root moduli of a monic polynomial (log form)."""
    D = len(monic) - 1
    k = np.arange(1, D + 1)
    la = monic.logabs[D - k].copy()
    la[-1] -= math.log(2.0)
    with np.errstate(invalid="ignore"):
        terms = la / k
    top = float(np.max(np.where(np.isfinite(terms), terms, -np.inf)))
    return math.log(2.0) + top


class CartanResult(NamedTuple):
    area: float
    standard_error: float
    bound: float
    passed: bool


def cartan_check(zeta, h: float, mc_samples: int = 100_000, seed: int = 0) -> CartanResult:
    """Monte Carlo area of ``{|p| <= h^n}`` against ``25 pi e^2 h^2``.

    ``p`` is ``zeta`` made monic.  Samples are uniform in the disk of
    radius (Fujiwara bound + h), which contains the sublevel set.  Passes
    when ``area <= bound * (1 + 3 * standard_error)``.
    """
    if not h > 0:
        raise ValidationError("h must be positive")
    monic, n = _monic(zeta)
    bound = 25.0 * math.pi * math.e ** 2 * h * h
    if n == 0:
        return CartanResult(0.0, 0.0, bound, True)
    lb = fujiwara_bound(monic)
    R = math.exp(lb) + h if lb < 700 else math.inf
    if not math.isfinite(R):
        raise ValidationError("root bound overflows; rescale the polynomial")
    rng = np.random.default_rng(seed)
    rad = R * np.sqrt(rng.random(mc_samples))
    z = rad * np.exp(2j * np.pi * rng.random(mc_samples))
    inside = _log_abs_poly(monic, z) <= n * math.log(h)
    frac = float(np.mean(inside))
    disk = math.pi * R * R
    area = disk * frac
    se = disk * math.sqrt(frac * (1.0 - frac) / mc_samples)
    return CartanResult(area, se, bound, bool(area <= bound * (1.0 + 3.0 * se)))


class AnnulusResult(NamedTuple):
    best_rho: float
    floor: float
    log_floor: float
    threshold: float
    passed: bool


def annulus_floor(zeta, r1: float, r2: float, radial_steps: int = 64,
                  angular_steps: int = 512) -> AnnulusResult:
    """Best circle in ``r1 < |z| < r2`` for the lower bound on ``|p|``.

    For each radius the floor is ``min_theta |p(rho e^{i theta})|`` (``p``
    monic); the radius with the largest floor is returned.  Passes when
    the floor reaches ``((r2 - r1)/5)^n``.
    """
    if not 0 < r1 < r2:
        raise ValidationError("need 0 < r1 < r2")
    monic, n = _monic(zeta)
    rho = r1 + (r2 - r1) * (np.arange(radial_steps) + 0.5) / radial_steps
    theta = 2 * np.pi * np.arange(angular_steps) / angular_steps
    z = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    lp = _log_abs_poly(monic, z).reshape(radial_steps, angular_steps)
    floors = lp.min(axis=1)
    k = int(np.argmax(floors))
    lt = n * math.log((r2 - r1) / 5.0)
    lf = float(floors[k])
    return AnnulusResult(float(rho[k]), math.exp(min(lf, 700.0)), lf, math.exp(lt), bool(lf >= lt))


@dataclass(frozen=True)
class DetCriterionReport:
    """Per-n values of the two finite-n criterion quantities.

    ``c1`` wants ``limsup <= 0`` and ``c2`` wants ``liminf >= 0``.
    ``zero_coefficient`` marks n where ``a_{n, n-i_n} = 0`` (``c1`` is then
    set to ``-inf`` and cannot certify the first condition).
    """

    n: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    zero_coefficient: np.ndarray
    vacuous_interior: bool


def _window(i_n, n, k):
    if i_n is None:
        return 0
    if callable(i_n):
        return int(i_n(n))
    if np.ndim(i_n) == 0:
        return int(i_n)
    return int(i_n[k])


def det_criterion_report(source, measure: DiscretizedMeasure, p: float = 2.0, i_n=0,
                         interior_grid=None, ns=None) -> DetCriterionReport:
    """Evaluate the deterministic criterion along a basis or a random sequence.

    Parameters
    ----------
    source : Basis or sequence of RandomPolynomial
        For a basis, ``p_n`` runs over ``ns`` (default ``1..N``).  For
        random polynomials, each ``G_n`` plays ``p_n`` with coefficients
        ``zeta_n``.
    measure : DiscretizedMeasure
        Reference measure for the ``L^p`` norm.
    p : float
    i_n : int, sequence or callable
        Near-leading offset per n.
    interior_grid : array-like, optional
        Points of Int P(K); defaults to scaled copies of the boundary.
    """
    support = measure.support
    vacuous = not support.interior_flag
    if interior_grid is None:
        interior_grid = support.interior_points()
    grid = np.atleast_1d(np.asarray(interior_grid, dtype=complex))
    lcap = math.log(support.capacity)
    if isinstance(source, Basis):
        ns = list(range(1, source.degree_max + 1)) if ns is None else list(ns)
        norms = lp_norms(source, measure, p)
        V = source.evaluate(grid) if grid.size else None
        items = []
        for n in ns:
            logc = as_log_array(source.coeffs[n, : n + 1])
            with np.errstate(divide="ignore"):
                lv = np.log(np.abs(V[n])) if V is not None else np.zeros(0)
            items.append((n, math.log(norms[n]), logc, lv))
    else:
        items = []
        for G in source:
            n = G.n
            basis = G.basis
            S = G.xi.logabs
            top = float(np.max(S))
            w = np.exp(S - top) * G.xi.phase
            Vn = basis.evaluate(measure.nodes)[: n + 1]
            vals = w @ Vn
            if math.isinf(p):
                lnorm = math.log(float(np.max(np.abs(vals)))) + top
            else:
                lnorm = math.log(float(np.sum(measure.weights * np.abs(vals) ** p)) ** (1.0 / p)) + top
            with np.errstate(divide="ignore"):
                lv = (np.log(np.abs(w @ basis.evaluate(grid)[: n + 1])) + top) if grid.size else np.zeros(0)
            items.append((n, lnorm, G.zeta, lv))
    nn, c1, c2, zflag = [], [], [], []
    for k, (n, lnorm, logc, lv) in enumerate(items):
        i = min(max(_window(i_n, n, k), 0), n)
        la = float(logc.logabs[n - i])
        nn.append(n)
        if not np.isfinite(la):
            zflag.append(True)
            c1.append(-math.inf)
            c2.append(math.inf)
            continue
        zflag.append(False)
        c1.append((lnorm - la) / n - lcap)
        c2.append(float(np.min(lv) - la) / n - lcap if lv.size else math.nan)
    return DetCriterionReport(np.asarray(nn), np.asarray(c1), np.asarray(c2),
                              np.asarray(zflag), vacuous)


# --- reports ------------------------------------------------------------------

CSV_FIELDS = ("n", "trial", "discrepancy", "ks", "mass_r1", "mass_r2", "im_mean", "energy")


@dataclass
class ConvergenceReport:
    """Rows keyed by ``(n, trial)``; see ``CSV_FIELDS`` for the fixed columns.

    Each row is a dict that may also carry ``interior_mass_defect`` and a
    ``failed`` flag for trials whose root solve did not converge.
    """

    rows: list = field(default_factory=list)

    def add(self, row: dict) -> None:
        self.rows.append(row)

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: (r["n"], r["trial"]))

    def column(self, name, n=None):
        return np.array([r[name] for r in self.sorted_rows()
                         if (n is None or r["n"] == n) and not r.get("failed")], dtype=float)


def measure_metrics(emp: EmpiricalMeasure, oracle: EquilibriumOracle, radii=(3.0, 5.0),
                    margin: float = DEFAULT_MARGIN) -> dict:
    """All per-trial metrics for one zero measure."""
    ks = boundary_ks(emp, oracle)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        en = energy(emp) if emp.count >= 2 else math.nan
    return {
        "discrepancy": potential_discrepancy(emp, oracle, margin=margin),
        "ks": ks.statistic,
        "mass_r1": mass_outside(emp, radii[0]),
        "mass_r2": mass_outside(emp, radii[1]),
        "im_mean": ks.im_mean,
        "energy": en,
        "interior_mass_defect": interior_mass_defect(emp, oracle),
    }
