"""Coefficient laws, random sums G_n and coefficient statistics.

Each coefficient ``xi_j`` consumes exactly two uniforms, at stream
positions ``2j`` and ``2j + 1`` of a Philox generator keyed by the trial
seed, so ``xi_j`` depends only on ``(seed, j)``: prefixes agree across
different n and parallel trials cannot disturb one another.

Moduli are handled as ``S = log|xi|`` throughout; heavy laws produce
``S`` far beyond the double range of ``exp``.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import lambertw

from .bases import Basis
from .errors import UndefinedStatisticError, ValidationError
from .logarray import LogComplexArray, as_log_array

DIST_NAMES = ("gaussian", "uniform_disk", "two_point", "log_light", "log_intermediate", "log_heavy")
DEFAULT_S0 = 3.0


@dataclass(frozen=True)
class CoefficientDistribution:
    """A built-in coefficient law with closed-form tail ``T(s) = P(|xi| > e^s)``.

    Attributes
    ----------
    name : str
    s0 : float
        Knee of the log-tailed laws (ignored by the others).
    log_moment_finite : bool
        ``E log(1 + |xi|) < inf``, i.e. ``integral T < inf``.
    in_prob_condition : bool
        ``n T(n) -> 0``.
    """

    name: str
    s0: float = DEFAULT_S0
    log_moment_finite: bool = True
    in_prob_condition: bool = True

    def tail(self, s):
        """``P(|xi| > e^s)``, vectorized."""
        s = np.asarray(s, dtype=float)
        nm = self.name
        if nm in ("gaussian", "log_light"):
            with np.errstate(over="ignore"):
                return np.exp(-np.exp(2.0 * s))
        if nm == "uniform_disk":
            with np.errstate(over="ignore"):
                return np.where(s < 0, np.maximum(0.0, 1.0 - np.exp(2.0 * np.minimum(s, 0.0))), 0.0)
        if nm == "two_point":
            return np.where(s < 0, 1.0, 0.0)
        s0 = self.s0
        safe = np.maximum(s, s0)
        if nm == "log_intermediate":
            return np.where(s <= s0, 1.0, np.minimum(1.0, s0 * math.log(s0) / (safe * np.log(safe))))
        return np.where(s <= s0, 1.0, np.minimum(1.0, s0 / safe))

    def log_modulus(self, u):
        """Inverse-CDF map from ``u`` in (0, 1] to ``S = log|xi|``."""
        u = np.asarray(u, dtype=float)
        nm = self.name
        if nm in ("gaussian", "log_light"):
            with np.errstate(divide="ignore"):
                return 0.5 * np.log(-np.log(u))
        if nm == "uniform_disk":
            return 0.5 * np.log(u)
        if nm == "two_point":
            return np.zeros_like(u)
        if nm == "log_intermediate":
            K = self.s0 * math.log(self.s0)
            return np.exp(lambertw(K / u).real)
        return self.s0 / u

    def phases(self, u1, u2):
        u2 = np.asarray(u2, dtype=float)
        if self.name == "two_point":
            return np.where(np.asarray(u1) <= 0.5, 1.0 + 0j, -1.0 + 0j)
        return np.exp(2j * np.pi * u2)

    def to_dict(self) -> dict:
        d = {"name": self.name}
        if self.name.startswith("log_") and self.name != "log_light":
            d["s0"] = self.s0
        return d


def make_distribution(spec) -> CoefficientDistribution:
    """Build a distribution from a name or ``{"name", "s0"}`` dict.

    Raises
    ------
    ValidationError
        Unknown name or ``s0 <= 1``.
    """
    if isinstance(spec, CoefficientDistribution):
        return spec
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec.get("name")
    if name not in DIST_NAMES:
        raise ValidationError(f"unknown distribution {name!r}")
    s0 = float(spec.get("s0", DEFAULT_S0))
    if not s0 > 1.0:
        raise ValidationError("s0 must exceed 1")
    flags = {
        "log_intermediate": (False, True),
        "log_heavy": (False, False),
    }.get(name, (True, True))
    return CoefficientDistribution(name, s0, *flags)


def trial_seed(master_seed: int, trial: int, tag: str = "xi") -> int:
    """Deterministic 128-bit seed for one trial and stream."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(trial), zlib.crc32(tag.encode())])
    a, b = ss.generate_state(2, dtype=np.uint64)
    return (int(a) << 64) | int(b)


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """First ``count`` doubles in (0, 1] of the Philox stream for ``seed``."""
    gen = np.random.Generator(np.random.Philox(key=seed & (2**128 - 1)))
    return 1.0 - gen.random(count)


def sample_log_xi(dist: CoefficientDistribution, count: int, seed: int):
    """``(S, phase)`` for ``xi_0..xi_{count-1}``."""
    u = uniform_stream(seed, 2 * count).reshape(count, 2)
    return dist.log_modulus(u[:, 0]), dist.phases(u[:, 0], u[:, 1])


def sample_xi(dist: CoefficientDistribution, count: int, seed: int) -> LogComplexArray:
    S, ph = sample_log_xi(dist, count, seed)
    return LogComplexArray(S, ph)


@dataclass(frozen=True, eq=False)
class RandomPolynomial:
    """``G_n = sum_{j<=n} xi_j p_j`` with monomial coefficients ``zeta``.

    Attributes
    ----------
    basis : Basis
    n : int
    xi : LogComplexArray
        ``xi_0..xi_n``.
    zeta : LogComplexArray
        ``zeta_{n,0}..zeta_{n,n}``.
    D_n : int
        Largest j with ``xi_j != 0``; -1 when all vanish.
    """

    basis: Basis
    n: int
    xi: LogComplexArray
    zeta: LogComplexArray
    D_n: int

    @property
    def xi_complex(self):
        return self.xi.to_complex()

    @property
    def zeta_complex(self):
        return self.zeta.to_complex()


def accumulate_zeta(coeffs, xi: LogComplexArray, n: int) -> LogComplexArray:
    """``zeta_i = sum_{j=i}^n xi_j a[j, i]`` evaluated per column in log form."""
    a = np.asarray(coeffs)[: n + 1, : n + 1]
    absa = np.abs(a)
    with np.errstate(divide="ignore"):
        la = np.log(absa)
    pa = np.where(absa > 0, a / np.where(absa > 0, absa, 1.0), 1.0)
    L = xi.logabs[: n + 1, None] + la  # row j, column i
    P = xi.phase[: n + 1, None] * pa
    top = np.max(L, axis=0)
    ftop = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore"):
        s = np.sum(np.exp(L - ftop[None, :]) * P, axis=0)
    mod = np.abs(s)
    nz = (mod > 0) & np.isfinite(top)
    logabs = np.full(n + 1, -np.inf)
    logabs[nz] = np.log(mod[nz]) + ftop[nz]
    phase = np.ones(n + 1, dtype=complex)
    phase[nz] = s[nz] / mod[nz]
    return LogComplexArray(logabs, phase)


def sample_G(basis: Basis, dist: CoefficientDistribution, n: int, seed: int,
             xi_override=None) -> RandomPolynomial:
    """Draw ``G_n`` on ``basis``.

    Parameters
    ----------
    basis : Basis
    dist : CoefficientDistribution
    n : int
        At most ``basis.degree_max``.
    seed : int
        Stream key; identical arguments give bitwise-identical output.
    xi_override : array-like or LogComplexArray, optional
        Use these coefficients instead of sampling (testing hook).
    """
    dist = make_distribution(dist)
    if not 0 <= n <= basis.degree_max:
        raise ValidationError(f"n={n} outside 0..{basis.degree_max}")
    if xi_override is not None:
        xi = as_log_array(xi_override)
        if len(xi) != n + 1:
            raise ValidationError("xi_override must have n + 1 entries")
    else:
        xi = sample_xi(dist, n + 1, seed)
    zeta = accumulate_zeta(basis.coeffs, xi, n)
    nz = np.flatnonzero(np.isfinite(xi.logabs))
    D = int(nz[-1]) if nz.size else -1
    return RandomPolynomial(basis, n, xi, zeta, D)


# --- statistics ---------------------------------------------------------------

def _logabs(x):
    if isinstance(x, LogComplexArray):
        return x.logabs
    return as_log_array(x).logabs


def max_log_stat(xi, n: int) -> float:
    """``L_n = max_{1<=i<=n} (1/n) log|xi_i|``.

    ``xi`` may hold ``xi_0..xi_n`` (length n + 1 or more; ``xi_0`` is
    skipped) or exactly ``xi_1..xi_n`` (length n).
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    S = _logabs(xi)
    if S.shape[0] == n:
        seg = S
    elif S.shape[0] >= n + 1:
        seg = S[1: n + 1]
    else:
        raise ValidationError("xi is shorter than n")
    m = float(np.max(seg))
    if not np.isfinite(m):
        raise UndefinedStatisticError("all coefficients are zero")
    return m / n


class NearLeading(NamedTuple):
    I_n: int
    index: int
    logabs: float
    value: complex


def near_leading_index(zeta, n: int) -> NearLeading:
    """Largest ``|zeta_j|`` over ``j`` in ``[floor(n - log^2 n), n]``.

    Ties go to the larger index.  Returns ``I_n = n - argmax`` together
    with the index, ``log|zeta|`` and the (possibly overflowing) value.
    """
    if n < 2:
        raise ValidationError("n must be at least 2")
    z = as_log_array(zeta)
    lo = max(0, int(math.floor(n - math.log(n) ** 2)))
    seg = z.logabs[lo: n + 1]
    top = float(np.max(seg))
    if not np.isfinite(top):
        raise UndefinedStatisticError("near-leading window is all zeros")
    j = lo + int(np.flatnonzero(seg == top)[-1])
    return NearLeading(n - j, j, top, complex(z[j].to_complex()[0]))


class DominanceEvents(NamedTuple):
    A: bool
    B: bool
    j: int
    gap: float


def dominance_events(S, n: int, c: float, r_margin: float = 0.0) -> DominanceEvents:
    """Evaluate ``A_{n,c}`` and ``B_{n,c}`` on log-moduli ``S_0..S_n``.

    ``B`` asks for a ``j`` in ``[n/4, n/2]`` with
    ``S_j >= c n + r_margin + S_i`` for every other ``i <= n``; ``gap`` is
    the best ``S_j - max_{i != j} S_i`` over that range.
    """
    S = np.asarray(S, dtype=float)[: n + 1]
    half = n // 2
    others = np.delete(S, half)
    A = bool(S[half] >= (c + 1.0) * n and np.all(others < n))
    order = np.argsort(S, kind="stable")
    top, second = int(order[-1]), int(order[-2])
    lo, hi = math.ceil(n / 4), half
    js = np.arange(lo, hi + 1)
    if js.size == 0:
        return DominanceEvents(A, False, -1, -math.inf)
    rest = np.where(js == top, S[second], S[top])
    gaps = S[js] - rest
    k = int(np.argmax(gaps))
    gap = float(gaps[k])
    return DominanceEvents(A, bool(gap >= c * n + r_margin), int(js[k]), gap)


def dominance_event_frequency(dist, n: int, c: float, r_margin: float = 0.0,
                              trials: int = 1000, seed: int = 0) -> tuple[float, float]:
    """Empirical frequencies of ``A_{n,c}`` and ``B_{n,c}`` over seeded trials."""
    dist = make_distribution(dist)
    if trials < 1:
        raise ValidationError("trials must be positive")
    a = b = 0
    for t in range(trials):
        S, _ = sample_log_xi(dist, n + 1, trial_seed(seed, t))
        ev = dominance_events(S, n, c, r_margin)
        a += ev.A
        b += ev.B
    return a / trials, b / trials


def spike_counter(dist, N: int, eps: float, seed: int) -> int:
    """``#{1 <= n <= N : (1/n) log|xi_n| > eps}`` along one path."""
    dist = make_distribution(dist)
    if not eps > 0:
        raise ValidationError("eps must be positive")
    S, _ = sample_log_xi(dist, N + 1, seed)
    n = np.arange(1, N + 1)
    return int(np.count_nonzero(S[1:] > eps * n))


def expected_spikes(dist, N: int, eps: float) -> float:
    """``sum_{n<=N} T(eps n)``: the mean of :func:`spike_counter`."""
    dist = make_distribution(dist)
    return float(np.sum(dist.tail(eps * np.arange(1, N + 1))))
