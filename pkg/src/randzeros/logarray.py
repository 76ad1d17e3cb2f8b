"""Extended-range complex arrays.

Heavy-tailed coefficients routinely reach ``exp(1000)`` and beyond, which
does not fit in a double.  :class:`LogComplexArray` keeps ``log|x|`` and the
unit phase ``x/|x|`` separately; exact zeros have ``logabs = -inf`` and
phase 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LN2 = float(np.log(2.0))
# exponent carried by an exact zero in (mantissa, base-2 exponent) form
ZERO_EXPONENT = -(1 << 40)


@dataclass(frozen=True, eq=False)
class LogComplexArray:
    """Complex vector stored as ``exp(logabs) * phase``.

    Parameters
    ----------
    logabs : ndarray of float
        Natural log of the modulus; ``-inf`` marks an exact zero.
    phase : ndarray of complex
        Unit-modulus phase factors.
    """

    logabs: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        logabs = np.asarray(self.logabs, dtype=float).reshape(-1)
        phase = np.asarray(self.phase, dtype=complex).reshape(-1)
        if logabs.shape != phase.shape:
            raise ValueError("logabs and phase must have the same length")
        object.__setattr__(self, "logabs", logabs)
        object.__setattr__(self, "phase", phase)

    @classmethod
    def from_complex(cls, values) -> "LogComplexArray":
        v = np.asarray(values, dtype=complex).reshape(-1)
        mod = np.abs(v)
        nz = mod > 0
        with np.errstate(divide="ignore"):
            logabs = np.log(mod)
        phase = np.ones_like(v)
        # componentwise: complex division by a subnormal modulus overflows
        vn, mn = v[nz], mod[nz]
        phase[nz] = vn.real / mn + 1j * (vn.imag / mn)
        return cls(logabs, phase)

    @classmethod
    def from_scaled(cls, mantissa, exponent) -> "LogComplexArray":
        """Build from ``mantissa * 2**exponent`` pairs."""
        m = np.asarray(mantissa, dtype=complex).reshape(-1)
        e = np.asarray(exponent, dtype=np.int64).reshape(-1)
        mod = np.abs(m)
        nz = mod > 0
        logabs = np.full(m.shape, -np.inf)
        logabs[nz] = np.log(mod[nz]) + e[nz] * LN2
        phase = np.ones_like(m)
        phase[nz] = m[nz].real / mod[nz] + 1j * (m[nz].imag / mod[nz])
        return cls(logabs, phase)

    def to_complex(self) -> np.ndarray:
        """Plain complex values; moduli beyond double range become inf or 0."""
        with np.errstate(over="ignore", invalid="ignore"):
            mod = np.exp(self.logabs)
            out = mod * self.phase
        big = np.isinf(mod)
        if big.any():
            # keep the direction of overflowed entries
            ph = self.phase[big]
            out.real[big] = np.where(ph.real != 0, np.copysign(np.inf, ph.real), 0.0)
            out.imag[big] = np.where(ph.imag != 0, np.copysign(np.inf, ph.imag), 0.0)
        return out

    def to_scaled(self):
        """Return ``(mantissa, exponent)`` with ``value = mantissa * 2**exponent``.

        Mantissas are normalized so that ``max(|re|, |im|)`` lies in ``[0.5, 1)``.
        """
        nz = np.isfinite(self.logabs)
        e = np.full(self.logabs.shape, ZERO_EXPONENT, dtype=np.int64)
        m = np.zeros(self.logabs.shape, dtype=complex)
        l2 = self.logabs[nz] / LN2
        base = np.floor(l2)
        m[nz] = self.phase[nz] * np.exp2(l2 - base)
        e[nz] = base.astype(np.int64)
        return normalize_scaled(m, e)

    @property
    def is_zero(self) -> np.ndarray:
        return ~np.isfinite(self.logabs)

    def __len__(self):
        return self.logabs.shape[0]

    def __getitem__(self, item) -> "LogComplexArray":
        return LogComplexArray(np.atleast_1d(self.logabs[item]), np.atleast_1d(self.phase[item]))

    def __repr__(self):
        return f"LogComplexArray(n={len(self)}, max_logabs={np.max(self.logabs, initial=-np.inf):.4g})"


def normalize_scaled(m, e):
    """Renormalize mantissas to ``max(|re|, |im|) in [0.5, 1)``; zeros get ZERO_EXPONENT."""
    m = np.asarray(m, dtype=complex)
    e = np.asarray(e, dtype=np.int64)
    s = np.maximum(np.abs(m.real), np.abs(m.imag))
    _, k = np.frexp(s)
    k = k.astype(np.int64)
    out = np.ldexp(m.real, -k) + 1j * np.ldexp(m.imag, -k)
    return out, np.where(s > 0, e + k, ZERO_EXPONENT)


def as_log_array(values) -> LogComplexArray:
    if isinstance(values, LogComplexArray):
        return values
    return LogComplexArray.from_complex(values)


def scaled_from_complex(values):
    """Exact power-of-two split of complex values (no rounding)."""
    v = np.asarray(values, dtype=complex).reshape(-1)
    return normalize_scaled(v, np.zeros(v.shape, dtype=np.int64))


def log_abs_diff(la, pa, lb, pb):
    """``log|a - b|`` for extended-range operands given as (logabs, phase).

    Broadcasts like NumPy.  Returns ``-inf`` where the operands coincide.
    """
    la = np.asarray(la, dtype=float)
    lb = np.asarray(lb, dtype=float)
    top = np.maximum(la, lb)
    finite_top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        a = np.exp(la - finite_top) * pa
        b = np.exp(lb - finite_top) * pb
        d = np.abs(a - b)
    with np.errstate(divide="ignore"):
        out = np.log(d) + finite_top
    # both operands zero
    return np.where(np.isfinite(top) | (top > 0), out, -np.inf)
