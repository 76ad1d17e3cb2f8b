"""Exit criteria, one test per criterion, at the stated tolerances.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time

import numpy as np
import pytest

from randzeros.bases import build_basis, lp_norms, minimality_report, near_lead_floor
from randzeros.ensembles import make_distribution, sample_G, spike_counter, trial_seed
from randzeros.experiments import load_config, run_convergence, run_necessity
from randzeros.logarray import LogComplexArray
from randzeros.metrics import annulus_floor, cartan_check
from randzeros.rootfinding import roots, roots_companion, vieta_check
from randzeros.supports import (
    build_support,
    default_node_count,
    equilibrium_oracle,
    reference_measure,
)

pytestmark = pytest.mark.acceptance

CIRCLE = {"kind": "circle", "params": {"radius": 1.0}}
INTERVAL = {"kind": "interval", "params": {"a": -2.0, "b": 2.0}}
ELLIPSE = {"kind": "ellipse", "params": {"alpha": 1.25, "beta": 0.75}}
MASTER_SEED = 20240601


def matched_distance(a, b):
    b = list(b)
    worst = 0.0
    for x in a:
        k = int(np.argmin(np.abs(np.asarray(b) - x)))
        worst = max(worst, abs(x - b.pop(k)))
    return worst


def test_1_basis_exactness(acceptance):
    t0 = time.perf_counter()
    circ = build_basis("orthonormal", CIRCLE, 64)
    e_circ = float(np.max(np.abs(circ.coeffs - np.eye(65))))
    iv = build_basis("orthonormal", INTERVAL, 40)
    x = iv.measure.nodes.real
    T = np.cos(np.arange(41)[:, None] * np.arccos(np.clip(x / 2, -1, 1))[None, :])
    T[1:] *= math.sqrt(2)
    e_int = float(np.max(np.abs(iv.evaluate(x) - T)))
    dt = time.perf_counter() - t0
    ok = e_circ < 1e-10 and e_int < 1e-8 and dt < 5
    acceptance(1, "basis exactness", ok,
               f"circle max|a-I|={e_circ:.2e} (<1e-10), interval max|p-sqrt2 T|={e_int:.2e} (<1e-8), {dt:.1f}s (<5s)")
    assert ok


def test_2_minimality_certificates(acceptance):
    t0 = time.perf_counter()
    fails, rows = [], 0
    for spec in (CIRCLE, INTERVAL, ELLIPSE):
        s = build_support(spec)
        p = 4.0 if s.kind == "ellipse" else math.inf
        for kind in ("orthonormal", "lp_minimal", "fekete", "faber"):
            b = build_basis(kind, s, 48, p=p)
            rep = minimality_report(b)
            meas = b.measure or reference_measure(s, "equilibrium_density", default_node_count(48))
            floor, n_at, i_at = near_lead_floor(b, lp_norms(b, meas, b.p))
            rows += 1
            if abs(rep.lead_slope[-1]) > 0.1:
                fails.append(f"{s.kind}/{kind} lead={rep.lead_slope[-1]:.3f}")
            if rep.norm_slope[-1] > 0.1:
                fails.append(f"{s.kind}/{kind} norm={rep.norm_slope[-1]:.3f}")
            if floor < -0.1:
                fails.append(f"{s.kind}/{kind} near_lead={floor:.3f}@(n={n_at},i={i_at})")
    dt = time.perf_counter() - t0
    ok = not fails and dt < 60
    acceptance(2, "minimality certificates", ok,
               f"{rows} bases, {dt:.1f}s (<60s); violations: {'; '.join(fails) or 'none'}")
    assert ok


def test_3_root_engine(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED)
    worst = 0.0
    for _ in range(500):
        c = rng.normal(size=31) + 1j * rng.normal(size=31)
        worst = max(worst, matched_distance(roots(c).roots, roots_companion(c)))
    # scaling invariance: p(z / s) across 10^-200 .. 10^200
    scale_err = 0.0
    for k in range(20):
        c = LogComplexArray.from_complex(rng.normal(size=31) + 1j * rng.normal(size=31))
        base = roots(c).log_roots
        ref = np.sort_complex(base.logabs + 1j * np.angle(base.phase))
        for e10 in (-200, -100, 0, 100, 200):
            s = e10 * math.log(10)
            r = roots(LogComplexArray(c.logabs - s * np.arange(31), c.phase)).log_roots
            got = np.sort_complex((r.logabs - s) + 1j * np.angle(r.phase))
            scale_err = max(scale_err, matched_distance(got, ref))
    # Vieta on heavy-tailed degree-100 instances
    circ = build_basis("orthonormal", CIRCLE, 100)
    heavy = make_distribution("log_heavy")
    vieta_err = 0.0
    for t in range(50):
        G = sample_G(circ, heavy, 100, trial_seed(MASTER_SEED, t, "vieta"))
        rep = vieta_check(G.zeta, roots(G.zeta))
        scale = max(1.0, abs(G.zeta.logabs[0] - G.zeta.logabs[100]))
        vieta_err = max(vieta_err, rep.log_product_error / scale, rep.arg_product_error, rep.sum_error)
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and scale_err < 1e-6 and vieta_err < 1e-6 and dt < 60
    acceptance(3, "root engine", ok,
               f"aberth-vs-companion {worst:.1e} (<1e-6), scaling over 400 decades {scale_err:.1e}, "
               f"vieta rel {vieta_err:.1e} (<1e-6), {dt:.1f}s (<60s)")
    assert ok


def test_4_sufficiency(acceptance, tmp_path):
    t0 = time.perf_counter()
    parts, ok = [], True
    for dist in ("gaussian", "log_intermediate"):
        cfg = load_config(overrides=[f'distribution.name="{dist}"', "trials=50",
                                     "schedule=[32,64,128,256]", f"master_seed={MASTER_SEED}"],
                          output_dir=str(tmp_path / dist))
        res = run_convergence(cfg, workers=1)
        top = res.summary["per_n"][256]
        ks = [res.summary["per_n"][n]["ks"] for n in (32, 64, 128, 256)]
        good = res.exit_code == 0
        ok &= good
        parts.append(f"{dist}: KS {'/'.join(f'{v:.3f}' for v in ks)}, disc {top['discrepancy']:.3f}, "
                     f"mass(3) {top['mass_r1']:.3f} -> {'ok' if good else 'FAIL'}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    acceptance(4, "sufficiency", ok, "; ".join(parts) + f"; {dt:.0f}s (<300s)")
    assert ok


def test_5_necessity(acceptance, tmp_path):
    t0 = time.perf_counter()
    base = ["trials=500", "schedule=[64,128,256]", f"master_seed={MASTER_SEED}"]
    heavy = run_necessity(load_config(overrides=base + ['distribution.name="log_heavy"'],
                                      output_dir=str(tmp_path / "heavy")), workers=1)
    ctrl = run_necessity(load_config(overrides=base + ['distribution.name="gaussian"', "necessity.control=true"],
                                     output_dir=str(tmp_path / "control")), workers=1)
    dt = time.perf_counter() - t0
    hp = heavy.summary["per_n"]
    bfreq = ", ".join(f"{v['freq_B']:.3f}" for v in hp.values())
    freq = {n: v["freq_escape"] for n, v in hp.items()}
    vio = sum(v["rouche_violations"] for v in hp.values())
    cfreq = max(v["freq_escape"] for v in ctrl.summary["per_n"].values())
    ok = max(freq.values()) > 0.02 and vio == 0 and cfreq == 0 and dt < 600
    acceptance(5, "necessity", ok,
               f"escape freq {', '.join(f'n={n}:{f:.3f}' for n, f in freq.items())} (>0.02 somewhere), "
               f"B freq {bfreq}, Rouche counterexamples {vio}, "
               f"gaussian control {cfreq:.3f} (=0), {dt:.0f}s (<600s)")
    assert ok


def test_6_regime_separation(acceptance):
    t0 = time.perf_counter()
    seeds = [trial_seed(MASTER_SEED, s, "spikes") for s in range(50)]
    g = max(spike_counter("gaussian", 1_000_000, 1.0, s) for s in seeds)
    li = {N: float(np.mean([spike_counter("log_intermediate", N, 1.0, s) for s in seeds]))
          for N in (100_000, 1_000_000)}
    N = 100_000
    lh = float(np.mean([spike_counter("log_heavy", N, 1.0, s) for s in seeds]))
    target = 3 * math.log(N)
    dt = time.perf_counter() - t0
    ok = (g == 0 and li[100_000] > 0 and li[1_000_000] >= li[100_000]
          and 0.5 * target <= lh <= 2 * target and dt < 60)
    acceptance(6, "regime separation", ok,
               f"gaussian max {g} (=0), log_intermediate mean {li[100_000]:.2f} -> {li[1_000_000]:.2f} (>0, growing), "
               f"log_heavy mean {lh:.1f} vs 3 log N = {target:.1f} ([0.5, 2]x), {dt:.1f}s (<60s)")
    assert ok


def test_7_lemma_checkers(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED)
    cartan_fail = 0
    for deg in (5, 20, 50):
        for k in range(100):
            z = rng.normal(size=deg) + 1j * rng.normal(size=deg)
            cartan_fail += not cartan_check(np.poly(z)[::-1], 0.3, 100_000, seed=int(rng.integers(2**62))).passed
    ann_fail = 0
    for _ in range(100):
        z = 3.0 * np.sqrt(rng.random(15)) * np.exp(2j * np.pi * rng.random(15))
        ann_fail += not annulus_floor(np.poly(z)[::-1], 4.0, 5.0).passed
    level_err, exterior_ok, quad_err = 0.0, True, 0.0
    for spec in (CIRCLE, INTERVAL, ELLIPSE):
        s = build_support(spec)
        o = equilibrium_oracle(s)
        robin = -math.log(s.capacity)
        level = [s.boundary_points(512)] + ([s.interior_points()] if s.interior_flag else [])
        for pts in level:
            level_err = max(level_err, float(np.max(np.abs(o.potential(pts) - robin))))
        exterior_ok &= bool(np.all(o.potential(s.level_curve(1.5, 256)) < robin))
        x = o.discretize(4000)
        z = s.level_curve(2.0, 32)
        approx = -np.mean(np.log(np.abs(z[:, None] - x[None, :])), axis=1)
        quad_err = max(quad_err, float(np.max(np.abs(approx - o.potential(z)))))
    oracle_ok = level_err < 1e-9 and exterior_ok and quad_err < 1e-6
    dt = time.perf_counter() - t0
    ok = cartan_fail == 0 and ann_fail == 0 and oracle_ok and dt < 120
    acceptance(7, "lemma checkers", ok,
               f"cartan failures {cartan_fail}/300, annulus failures {ann_fail}/100, "
               f"oracle identities {'hold' if oracle_ok else 'violated'}, {dt:.0f}s (<120s)")
    assert ok


def test_8_determinism(acceptance, tmp_path):
    t0 = time.perf_counter()
    blobs = {}
    for tag, w in (("w1a", 1), ("w1b", 1), ("w4", 4), ("w8", 8)):
        cfg = load_config(overrides=["trials=50", f"master_seed={MASTER_SEED}"], output_dir=str(tmp_path / tag))
        run_convergence(cfg, workers=w)
        blobs[tag] = tuple((tmp_path / tag / f).read_bytes() for f in ("results.csv", "roots.csv"))
    same = len(set(blobs.values())) == 1
    dt = time.perf_counter() - t0
    acceptance(8, "determinism", same,
               f"results.csv and roots.csv byte-identical across workers 1,1,4,8: {same} ({dt:.0f}s)")
    assert same
