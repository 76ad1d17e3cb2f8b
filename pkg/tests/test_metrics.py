import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randzeros.bases import build_basis
from randzeros.ensembles import near_leading_index, sample_G, trial_seed
from randzeros.logarray import LogComplexArray
from randzeros.metrics import (
    CSV_FIELDS,
    ConvergenceReport,
    annulus_floor,
    boundary_ks,
    cartan_check,
    det_criterion_report,
    energy,
    exterior_grid,
    fujiwara_bound,
    interior_mass_defect,
    log_potential,
    mass_outside,
    potential_discrepancy,
)
from randzeros.rootfinding import roots, zero_measure
from randzeros.supports import build_support, equilibrium_oracle

CIRCLE = build_support({"kind": "circle", "radius": 1.0})
INTERVAL = build_support({"kind": "interval", "a": -2.0, "b": 2.0})
ORACLE = equilibrium_oracle(CIRCLE)


def emp(points):
    return zero_measure(LogComplexArray.from_complex(np.asarray(points, dtype=complex)))


def unity(n):
    return emp(np.exp(2j * np.pi * np.arange(n) / n))


def test_potential_of_roots_of_unity():
    z = np.array([2.0, 1.5j, -3 + 1j])
    assert np.allclose(log_potential(unity(8), z), -np.log(np.abs(z ** 8 - 1)) / 8, atol=1e-13)


def test_potential_infinite_at_atom():
    assert log_potential(emp([1.0, 2.0]), 1.0) == math.inf


def test_potential_additivity_and_translation():
    rng = np.random.default_rng(0)
    a = rng.normal(size=6) + 1j * rng.normal(size=6)
    b = rng.normal(size=6) + 1j * rng.normal(size=6)
    z = np.array([5.0, 4j, -3 - 3j])
    u = emp(a).union(emp(b))
    avg = (log_potential(emp(a), z) + log_potential(emp(b), z)) / 2
    assert np.allclose(log_potential(u, z), avg, atol=1e-12)
    w = 0.7 - 1.1j
    assert np.allclose(log_potential(emp(a + w), z + w), log_potential(emp(a), z), atol=1e-12)


def test_potential_extended_range():
    # a root at 1e400 contributes -log|z - 1e400| ~ -400 log 10
    big = LogComplexArray(np.array([400 * math.log(10), 0.0]), np.array([1, 1], complex))
    p = log_potential(zero_measure(big), 0.5)
    assert p == pytest.approx(-(400 * math.log(10) + math.log(0.5)) / 2, rel=1e-12)


def test_energy_roots_of_unity():
    # sum_{i<j} log|z_i - z_j| = (n/2) log n
    n = 10
    assert energy(unity(n)) == pytest.approx(-(2 / (n * (n - 1))) * (n / 2) * math.log(n), abs=1e-12)


def test_energy_coincident_points():
    with pytest.warns(RuntimeWarning):
        assert energy(emp([1.0, 1.0, 2.0])) == math.inf


def test_discrepancy_delta_at_center_vanishes():
    # delta_0 has the same exterior potential as the equilibrium measure of the unit circle
    assert potential_discrepancy(emp([0.0]), ORACLE) < 1e-12


def test_discrepancy_delta_at_one():
    # worst grid point is z = R1 = 1.2 on the real axis: |log(0.2) - log(1.2)| = log 6
    grid = exterior_grid(ORACLE)
    assert np.min(np.abs(grid - 1.2)) < 1e-12
    assert potential_discrepancy(emp([1.0]), ORACLE) == pytest.approx(math.log(6), abs=1e-12)


def test_ks_roots_of_unity():
    n = 16
    shifted = emp(np.exp(2j * np.pi * (np.arange(n) + 0.5) / n))
    assert boundary_ks(shifted, ORACLE).statistic <= 1 / n + 1e-12
    assert boundary_ks(unity(n), ORACLE).statistic == pytest.approx(1 / n, abs=1e-12)


def test_ks_point_mass():
    n = 40
    assert boundary_ks(emp(np.full(n, 1.0 + 1e-9j)), ORACLE).statistic >= 1 - 1 / n


@pytest.mark.parametrize("kind", ["circle", "interval", "ellipse"])
def test_ks_oracle_discretization(kind):
    s = build_support({"circle": {"kind": "circle", "radius": 2.0},
                       "interval": {"kind": "interval", "a": -1, "b": 3},
                       "ellipse": {"kind": "ellipse", "alpha": 1.5, "beta": 0.5}}[kind])
    o = equilibrium_oracle(s)
    n = 50
    assert boundary_ks(emp(o.discretize(n)), o).statistic <= 1 / n + 1e-12


def test_mass_outside_examples():
    assert mass_outside(emp([1j, -1j]), 2.0) == 0.0
    eps, M = 1e-3, 1e3
    r = roots(np.array([eps, M, eps]))
    assert mass_outside(zero_measure(r), 5.0) == 0.5


@settings(max_examples=30)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=30), st.floats(0.1, 10), st.floats(0.1, 10))
def test_mass_outside_monotone(xs, r1, r2):
    e = emp(np.array(xs) + 0.5j)
    lo, hi = sorted((r1, r2))
    assert mass_outside(e, lo) >= mass_outside(e, hi)


def test_interior_mass_defect():
    assert interior_mass_defect(emp([0.0, 0.1, 2.0, 1.0]), ORACLE) == 0.5
    assert interior_mass_defect(emp([0.0]), equilibrium_oracle(INTERVAL)) == 0.0


def test_fujiwara_bound_covers_roots():
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.normal(size=8) * 10 ** rng.uniform(-3, 3, 8)
        c = np.poly(z)[::-1]
        monic = LogComplexArray.from_complex(c / c[-1])
        assert np.max(np.abs(z)) <= math.exp(fujiwara_bound(monic)) * (1 + 1e-12)


def test_cartan_monomial_exact_disk():
    c = np.zeros(9)
    c[8] = 1.0
    res = cartan_check(c, 0.5, 200_000, seed=1)
    assert res.area == pytest.approx(math.pi / 4, abs=4 * res.standard_error + 1e-3)
    assert res.passed and res.bound == pytest.approx(25 * math.pi * math.e ** 2 * 0.25)


def test_cartan_large_h():
    rng = np.random.default_rng(2)
    z = rng.uniform(0, 1, 5) * np.exp(2j * np.pi * rng.random(5))
    res = cartan_check(np.poly(z)[::-1], 10.0, 50_000)
    assert res.passed and res.area <= math.pi * 11 ** 2


def test_cartan_random_degree20():
    rng = np.random.default_rng(3)
    for k in range(100):
        z = rng.normal(size=20) + 1j * rng.normal(size=20)
        assert cartan_check(np.poly(z)[::-1], 0.3, 20_000, seed=k).passed


def test_annulus_monomial():
    c = np.zeros(7)
    c[6] = 1
    res = annulus_floor(c, 1.0, 2.0)
    assert res.passed and res.best_rho > 1.95
    assert res.floor == pytest.approx(res.best_rho ** 6, rel=1e-12)


def test_annulus_roots_inside():
    rng = np.random.default_rng(4)
    for _ in range(100):
        z = 3 * np.sqrt(rng.random(15)) * np.exp(2j * np.pi * rng.random(15))
        res = annulus_floor(np.poly(z)[::-1], 4.0, 5.0)
        assert res.passed and res.floor >= (res.best_rho - 3.0) ** 15 * (1 - 1e-9)


def test_det_criterion_monomials():
    b = build_basis("orthonormal", CIRCLE, 20)
    rep = det_criterion_report(b, b.measure, 2.0, 0, CIRCLE.interior_points((0.5, 0.8)))
    assert np.allclose(rep.c1, 0, atol=1e-12)
    assert np.allclose(rep.c2, math.log(0.5), atol=1e-12)
    assert not rep.vacuous_interior


def test_det_criterion_zero_coefficient_convention():
    b = build_basis("orthonormal", CIRCLE, 8)
    rep = det_criterion_report(b, b.measure, 2.0, 1)
    assert rep.zero_coefficient.all() and np.all(rep.c1 == -np.inf)


def test_det_criterion_interval_vacuous():
    b = build_basis("orthonormal", INTERVAL, 8)
    assert det_criterion_report(b, b.measure).vacuous_interior


def test_det_criterion_random_kac():
    b = build_basis("orthonormal", CIRCLE, 128)
    grid = CIRCLE.interior_points((0.2, 0.5, 0.8))
    ok = []
    for t in range(50):
        G = sample_G(b, "gaussian", 128, trial_seed(11, t))
        i = near_leading_index(G.zeta, 128).I_n
        rep = det_criterion_report([G], b.measure, 2.0, i, grid)
        ok.append(rep.c2[0] >= -0.2)
    assert np.mean(ok) >= 0.9


def test_convergence_report():
    r = ConvergenceReport()
    r.add({"n": 2, "trial": 1, "ks": 0.5, "failed": False})
    r.add({"n": 1, "trial": 0, "ks": 0.2, "failed": False})
    r.add({"n": 1, "trial": 1, "ks": 0.9, "failed": True})
    assert [x["n"] for x in r.sorted_rows()] == [1, 1, 2]
    assert r.column("ks", 1).tolist() == [0.2]
    assert CSV_FIELDS[:2] == ("n", "trial")
