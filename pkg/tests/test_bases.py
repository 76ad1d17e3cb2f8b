import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev, legendre

from randzeros.bases import (
    Basis,
    build_basis,
    default_window,
    faber_basis,
    fekete_basis,
    fekete_points,
    gram_matrix,
    lp_minimal_basis,
    lp_norms,
    minimality_report,
    near_lead_floor,
    orthonormal_basis,
    sup_norms,
)
from randzeros.errors import CapabilityError, ValidationError
from randzeros.supports import build_support, reference_measure

CIRCLE = build_support({"kind": "circle", "radius": 1.0})
INTERVAL = build_support({"kind": "interval", "a": -2.0, "b": 2.0})
ELLIPSE = build_support({"kind": "ellipse", "alpha": 1.25, "beta": 0.75})


def cheb_rows(N, scale=0.5):
    """Monomial coefficients of T_n(scale * x)."""
    rows = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        c = chebyshev.cheb2poly(np.eye(N + 1)[n][: n + 1])
        rows[n, : n + 1] = c * scale ** np.arange(n + 1)
    return rows


def test_circle_orthonormal_is_monomial():
    b = build_basis("orthonormal", CIRCLE, 64)
    assert np.max(np.abs(b.coeffs - np.eye(65))) < 1e-10


def test_circle_radius_scaling():
    b = build_basis("orthonormal", {"kind": "circle", "radius": 2.0}, 10)
    assert np.allclose(np.diag(b.coeffs).real, 2.0 ** -np.arange(11), rtol=1e-12)


def test_interval_orthonormal_is_scaled_chebyshev():
    b = build_basis("orthonormal", INTERVAL, 40)
    x = np.linspace(-2, 2, 301)
    V = b.evaluate(x)
    T = np.cos(np.arange(41)[:, None] * np.arccos(x / 2)[None, :])
    T[1:] *= math.sqrt(2)
    assert np.max(np.abs(V - T)) < 1e-8


def test_interval_legendre_measure():
    m = reference_measure(INTERVAL, "uniform_arclength", 60)
    b = orthonormal_basis(m, 12)
    x = np.linspace(-2, 2, 41)
    P = np.array([legendre.legval(x / 2, np.eye(13)[n]) * math.sqrt(2 * n + 1) for n in range(13)])
    assert np.allclose(b.evaluate(x).real, P, atol=1e-9)


@pytest.mark.parametrize("support", [CIRCLE, INTERVAL, ELLIPSE])
def test_gram_identity(support):
    b = build_basis("orthonormal", support, 30)
    assert np.allclose(gram_matrix(b, b.measure), np.eye(31), atol=1e-10)


def test_insufficient_exactness():
    with pytest.raises(ValidationError):
        orthonormal_basis(reference_measure(CIRCLE, node_count=20), 20)


def test_lp2_matches_orthonormal():
    m = reference_measure(ELLIPSE, node_count=100)
    a = lp_minimal_basis(m, 2.0, 12)
    b = orthonormal_basis(m, 12)
    assert np.allclose(a.coeffs, b.coeffs, atol=1e-8)


def test_sup_minimal_interval_is_chebyshev():
    b = lp_minimal_basis(reference_measure(INTERVAL, node_count=80), math.inf, 16)
    assert np.allclose(b.coeffs.real, cheb_rows(16), atol=1e-8)
    assert np.allclose(b.norms, 1.0, atol=1e-9)


def test_sup_minimal_circle_is_monomial():
    b = lp_minimal_basis(reference_measure(CIRCLE, node_count=80), math.inf, 10)
    assert np.allclose(b.coeffs, np.eye(11), atol=1e-12)


def test_sup_minimal_ellipse_unavailable():
    with pytest.raises(CapabilityError):
        lp_minimal_basis(reference_measure(ELLIPSE, node_count=40), math.inf, 4)


def test_lp_norms_unit():
    m = reference_measure(ELLIPSE, node_count=80)
    b = lp_minimal_basis(m, 4.0, 10)
    assert np.allclose(lp_norms(b, m, 4.0), 1.0, atol=1e-8)


def test_fekete_circle_roots_of_unity():
    res = fekete_points(CIRCLE, 9, restarts=3)
    expected = np.exp(2j * np.pi * np.arange(9) / 9)
    assert np.allclose(np.sort_complex(res.points), np.sort_complex(expected), atol=1e-7)
    assert res.energy == pytest.approx(4.5 * math.log(9), abs=1e-10)


def test_fekete_interval_legendre_points():
    res = fekete_points(build_support({"kind": "interval", "a": -1, "b": 1}), 6, restarts=3)
    # endpoints plus zeros of P_5' (mpmath)
    inner = [-0.7650553239294647, -0.2852315164806451, 0.2852315164806451, 0.7650553239294647]
    assert np.allclose(res.points.real, [-1.0, *inner, 1.0], atol=1e-7)


def test_fekete_basis_sup_normalized():
    b = fekete_basis(ELLIPSE, 10, restarts=2)
    assert np.allclose(sup_norms(b), 1.0, rtol=1e-6)
    z = np.array([0.3 + 0.2j, 1.5])
    direct = np.array([np.polyval(b.coeffs[n, : n + 1][::-1], z) for n in range(11)])
    assert np.allclose(b.evaluate(z), direct, atol=1e-10)


def test_faber_interval_is_chebyshev():
    b = faber_basis(INTERVAL, 20)
    assert np.allclose(b.coeffs.real, cheb_rows(20), atol=1e-10)


def test_faber_ellipse_closed_form():
    b = faber_basis(ELLIPSE, 12)
    c, _, b1 = ELLIPSE.laurent
    w = 1.4 * np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    q = b1 / c
    n = np.arange(13)[:, None]
    raw = w[None, :] ** n + q ** n * w[None, :] ** (-n)
    raw[0] = 1.0
    scale = 1.0 / (1.0 + np.abs(q) ** np.arange(13))
    scale[0] = 1.0
    assert np.allclose(b.evaluate(ELLIPSE.psi(w)), raw * scale[:, None], atol=1e-10)


@pytest.mark.parametrize("kind", ["orthonormal", "lp_minimal", "faber"])
def test_json_roundtrip(kind):
    b = build_basis(kind, ELLIPSE, 8, p=3.0)
    b2 = Basis.from_json(b.to_json())
    z = np.array([0.1, 2 + 1j])
    assert np.allclose(b.evaluate(z), b2.evaluate(z), atol=1e-12)
    assert b2.p == b.p


def test_json_rejects_malformed():
    b = build_basis("faber", CIRCLE, 4)
    bad = b.to_json().replace('"N": 4', '"N": 5')
    with pytest.raises(ValidationError):
        Basis.from_json(bad)


def test_default_window():
    assert default_window(1) == 0
    assert default_window(48) == math.floor(math.log(48) ** 2) == 14


def test_minimality_circle_exact():
    rep = minimality_report(build_basis("orthonormal", CIRCLE, 24))
    assert np.allclose(rep.lead_slope, 0, atol=1e-12)
    assert np.allclose(rep.norm_slope, 0, atol=1e-12)


def test_near_lead_floor_circle_monomials():
    b = build_basis("orthonormal", CIRCLE, 20)
    v, n, i = near_lead_floor(b, np.ones(21))
    assert v == pytest.approx(0.0, abs=1e-12) and i == 0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 3.0), st.integers(4, 12))
def test_interval_orthonormal_any_interval(length, N):
    s = build_support({"kind": "interval", "a": -1.0, "b": -1.0 + length})
    b = build_basis("orthonormal", s, N)
    assert np.allclose(gram_matrix(b, b.measure), np.eye(N + 1), atol=1e-9)
    # leading coefficient 2^n / (length/2)^n / sqrt2 * ... : rate matches capacity
    assert b.leading[N] == pytest.approx(math.sqrt(2) * 2 ** (N - 1) / (length / 2) ** N, rel=1e-8)


@pytest.mark.parametrize("support", [CIRCLE, INTERVAL, ELLIPSE])
def test_gram_identity_N60(support):
    b = build_basis("orthonormal", support, 60)
    G = gram_matrix(b, b.measure)
    assert np.max(np.abs(G - np.diag(np.diag(G)))) < 1e-8
    assert np.max(np.abs(np.diag(G) - 1)) < 1e-8


@pytest.mark.parametrize("support", [CIRCLE, INTERVAL, ELLIPSE])
def test_l2_minimality_against_random_monic(support):
    b = build_basis("orthonormal", support, 10)
    m = b.measure
    rng = np.random.default_rng(0)
    n = 10
    own = m.lp_norm(b.evaluate(m.nodes)[n] / b.coeffs[n, n], 2.0)
    for _ in range(100):
        c = np.r_[rng.normal(size=n) + 1j * rng.normal(size=n), 1.0]
        assert own <= m.lp_norm(np.polyval(c[::-1], m.nodes), 2.0) + 1e-8
