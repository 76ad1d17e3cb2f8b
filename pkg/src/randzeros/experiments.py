"""Seeded experiment orchestration, persistence and plot data.

Every run is described by an :class:`ExperimentConfig`.  Its canonical
JSON (minus the output directory) is hashed, and the hash is stamped into
every output file.  Trials draw their randomness from
``trial_seed(master_seed, trial)`` only, so results do not depend on the
number of workers (``RANDZEROS_WORKERS``) or on scheduling.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bases import (
    Basis,
    build_basis,
    default_window,
    lp_norms,
    minimality_report,
    near_lead_floor,
)
from .ensembles import (
    dominance_events,
    make_distribution,
    sample_G,
    sample_log_xi,
    trial_seed,
)
from .errors import ConfigError, PartialResultError, RandZerosError, ValidationError
from .metrics import (
    CSV_FIELDS,
    ConvergenceReport,
    annulus_floor,
    cartan_check,
    det_criterion_report,
    log_potential,
    mass_outside,
    measure_metrics,
)
from .rootfinding import roots, zero_measure
from .supports import build_support, default_node_count, equilibrium_oracle, reference_measure

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VIOLATED, EXIT_INFRA = 0, 2, 3
FAILED_TRIAL_LIMIT = 0.10

DEFAULTS: dict = {
    "support": {"kind": "circle", "params": {"radius": 1.0}},
    "measure": {"density": "equilibrium_density", "node_count": None},
    "basis": {"kind": "orthonormal", "N": 256, "p": 2.0},
    "distribution": {"name": "gaussian"},
    "schedule": [32, 64, 128, 256],
    "trials": 50,
    "master_seed": 20240601,
    "thresholds": {
        "ks_max": 0.08,
        "discrepancy_max": 0.1,
        "mass_r1_max": 0.02,
        "im_mean_max": None,
        "ks_monotone": True,
        "escape_freq_min": 0.02,
        "lead_slope_max": 0.1,
        "norm_slope_max": 0.1,
        "near_lead_min": -0.1,
    },
    "radii": [3.0, 5.0],
    "margin": 0.2,
    "output_dir": "results",
    "necessity": {"r": 5.0, "c": None, "r_margin": 1e-9, "control": False,
                  "radial_steps": 32, "angular_steps": 512},
    "checks": {"cartan_degrees": [5, 20, 50], "cartan_per_degree": 100, "cartan_h": 0.3,
               "cartan_samples": 100_000, "annulus_instances": 100, "annulus_degree": 15,
               "annulus_r1": 4.0, "annulus_r2": 5.0, "annulus_root_radius": 3.0,
               "minimality_N": 48},
}


def _merge(base: dict, upd: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in upd.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as JSON when possible."""
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, val = item.split("=", 1)
        parts = key.strip().split(".")
        node = cfg
        for p in parts[:-1]:
            if not isinstance(node.setdefault(p, {}), dict):
                raise ConfigError(f"cannot descend into {p!r}")
            node = node[p]
        node[parts[-1]] = _coerce(val.strip())
    return cfg


@dataclass
class ExperimentConfig:
    """Resolved experiment configuration (see ``DEFAULTS`` for the keys)."""

    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    def __post_init__(self):
        self.data = _merge(DEFAULTS, self.data)
        self.validate()

    # convenience accessors
    @property
    def support(self):
        return build_support(self.data["support"])

    @property
    def schedule(self) -> list:
        return [int(n) for n in self.data["schedule"]]

    @property
    def trials(self) -> int:
        return int(self.data["trials"])

    @property
    def master_seed(self) -> int:
        return int(self.data["master_seed"])

    @property
    def thresholds(self) -> dict:
        return self.data["thresholds"]

    @property
    def output_dir(self) -> Path:
        return Path(self.data["output_dir"])

    def validate(self) -> None:
        d = self.data
        try:
            build_support(d["support"])
            make_distribution(d["distribution"])
        except ValidationError as exc:
            raise ConfigError(str(exc)) from None
        if not d["schedule"] or min(int(n) for n in d["schedule"]) < 2:
            raise ConfigError("degree schedule must be non-empty with degrees at least 2")
        if int(d["trials"]) < 1:
            raise ConfigError("trials must be at least 1")
        for k, v in d["thresholds"].items():
            if isinstance(v, bool) or v is None or k == "near_lead_min":
                continue
            if not float(v) > 0:
                raise ConfigError(f"threshold {k} must be positive")

    def check_schedule(self) -> None:
        if max(self.schedule) > int(self.data["basis"]["N"]):
            raise ConfigError("degree schedule exceeds basis N")

    def canonical(self) -> str:
        d = {k: v for k, v in self.data.items() if k != "output_dir"}
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def basis(self) -> Basis:
        b = self.data["basis"]
        m = self.data["measure"]
        return build_basis(b["kind"], self.data["support"], int(b["N"]), m["density"],
                           float(b.get("p", 2.0)), m.get("node_count"))


def load_config(path=None, overrides=None, **extra) -> ExperimentConfig:
    """Read TOML or JSON, then apply dotted overrides."""
    data: dict = {}
    if path is not None:
        p = Path(path)
        raw = p.read_bytes()
        if p.suffix.lower() == ".toml":
            try:
                import tomllib  # type: ignore[import-not-found]
            except ModuleNotFoundError:
                import tomli as tomllib
            data = tomllib.loads(raw.decode())
        else:
            data = json.loads(raw)
    data = apply_overrides(_merge(DEFAULTS, data), overrides)
    data = _merge(data, extra)
    return ExperimentConfig(data)


def worker_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("RANDZEROS_WORKERS", default)))
    except ValueError:
        return default


# --- formatting ---------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def write_csv(path, header, rows, config_hash: str, note: str | None = None) -> Path:
    """CSV with ``# schema_version``, ``# config_hash`` and optional ``# note`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n# config_hash: {config_hash}\n")
    if note:
        buf.write(f"# note: {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])
    path.write_text(buf.getvalue())
    return path


def read_csv(path):
    """Return ``(meta, header, rows)`` from a file written by :func:`write_csv`."""
    meta, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition(":")
            meta[k.strip()] = v.strip()
        else:
            lines.append(line)
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=1) + "\n")
    return path


# --- convergence --------------------------------------------------------------

AS_NOTE = ("almost-sure convergence is not testable at finite n; the surrogate is per-seed "
           "monotone improvement of metrics along n for light tails plus spike_counter "
           "evidence for the intermediate regime")

_CACHE: dict = {}


def _context(cfg_data: dict):
    key = json.dumps(cfg_data, sort_keys=True)
    if key not in _CACHE:
        cfg = ExperimentConfig(cfg_data)
        _CACHE.clear()
        _CACHE[key] = (cfg, cfg.basis(), make_distribution(cfg.data["distribution"]),
                       equilibrium_oracle(cfg.support))
    return _CACHE[key]


def _convergence_trial(args):
    cfg_data, n, trial = args
    cfg, basis, dist, oracle = _context(cfg_data)
    G = sample_G(basis, dist, n, trial_seed(cfg.master_seed, trial))
    row = {"n": n, "trial": trial}
    try:
        res = roots(G.zeta)
        failed = False
    except PartialResultError as exc:
        res = exc.best
        failed = True
    emp = zero_measure(res, G.D_n)
    row.update(measure_metrics(emp, oracle, tuple(cfg.data["radii"]), float(cfg.data["margin"])))
    row["failed"] = failed
    row["iterations"] = res.diagnostics["iterations"]
    row["rescale_exponent"] = res.diagnostics["rescale_exponent"]
    pts = res.log_roots
    return row, (pts.logabs, pts.phase)


def _map(fn, tasks, workers):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass
class RunResult:
    exit_code: int
    summary: dict
    paths: dict
    report: object = None


def _summarize_convergence(report: ConvergenceReport, cfg: ExperimentConfig) -> tuple[dict, list]:
    th = cfg.thresholds
    per_n = {}
    for n in cfg.schedule:
        per_n[n] = {m: float(np.median(report.column(m, n))) if report.column(m, n).size else math.nan
                    for m in CSV_FIELDS[2:]}
    nmax = max(cfg.schedule)
    top = per_n[nmax]
    violations = []
    for key, metric in (("ks_max", "ks"), ("discrepancy_max", "discrepancy"),
                        ("mass_r1_max", "mass_r1"), ("im_mean_max", "im_mean")):
        if th.get(key) is not None and not top[metric] < float(th[key]):
            violations.append(f"median {metric} at n={nmax} is {top[metric]:.4g} >= {th[key]}")
    if th.get("ks_monotone"):
        ks = [per_n[n]["ks"] for n in sorted(cfg.schedule)]
        if any(b > a for a, b in zip(ks, ks[1:])):
            violations.append("median KS is not nonincreasing in n")
    return {"per_n": per_n, "violations": violations}, violations


def run_convergence(config: ExperimentConfig, workers: int | None = None,
                    write: bool = True) -> RunResult:
    """Sample, solve and score every ``(n, trial)`` of the schedule.

    Writes ``results.csv``, ``results.json`` and ``roots.csv`` under the
    output directory.  Exit code 0 when every configured threshold holds,
    2 otherwise; more than 10% failed solves raises an infrastructure
    error.
    """
    dist = make_distribution(config.data["distribution"])
    if not dist.in_prob_condition:
        log.warning("distribution %s violates n T(n) -> 0; convergence is not expected", dist.name)
    config.check_schedule()
    workers = worker_count() if workers is None else workers
    tasks = [(config.data, n, t) for n in config.schedule for t in range(config.trials)]
    out = _map(_convergence_trial, tasks, workers)
    report = ConvergenceReport()
    root_rows = []
    for row, (la, ph) in out:
        report.add(row)
        for l, p in zip(la, ph):
            with np.errstate(over="ignore"):
                z = math.exp(l) * p if l < 709 else complex(math.inf, math.inf)
            root_rows.append((row["n"], row["trial"], z.real, z.imag, l))
    failed = sum(bool(r["failed"]) for r in report.rows)
    if failed > FAILED_TRIAL_LIMIT * len(report.rows):
        raise RandZerosError(f"{failed} of {len(report.rows)} trials failed to converge")
    summary, violations = _summarize_convergence(report, config)
    summary["failed_trials"] = failed
    summary["note"] = AS_NOTE
    code = EXIT_OK if not violations else EXIT_VIOLATED
    paths = {}
    if write:
        h = config.hash
        od = config.output_dir
        rows = [[r[f] for f in CSV_FIELDS] for r in report.sorted_rows()]
        paths["results.csv"] = write_csv(od / "results.csv", CSV_FIELDS, rows, h, AS_NOTE)
        root_rows.sort(key=lambda r: (r[0], r[1]))
        paths["roots.csv"] = write_csv(od / "roots.csv", ("n", "trial", "re", "im", "log_abs"), root_rows, h)
        paths["results.json"] = write_json(od / "results.json", {
            "schema_version": SCHEMA_VERSION, "config_hash": h, "config": config.data,
            "summary": summary, "exit_code": code, "rows": report.sorted_rows()})
    return RunResult(code, summary, paths, report)


# --- necessity ----------------------------------------------------------------

def calibrate_c(basis: Basis, n: int, r: float, radial_steps: int = 32,
                angular_steps: int = 512) -> tuple[float, float, int]:
    """Smallest dominance exponent that forces a Rouche comparison.

    For each ``j`` in ``[n/4, n/2]`` take the circle ``|z| = rho`` in
    ``(r, r + 1)`` minimizing ``max_theta (1/n) log(sum_{i != j}|p_i| / |p_j|)``;
    ``c_n`` is the largest such value over j.  Returns ``(c_n, rho, j)`` at
    the maximizing j.
    """
    rho = r + (np.arange(radial_steps) + 0.5) / radial_steps
    theta = 2 * np.pi * np.arange(angular_steps) / angular_steps
    z = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    V = np.abs(basis.evaluate(z)[: n + 1]).reshape(n + 1, radial_steps, angular_steps)
    total = V.sum(axis=0)
    best = (-math.inf, math.nan, -1)
    for j in range(math.ceil(n / 4), n // 2 + 1):
        with np.errstate(divide="ignore"):
            ratio = np.log(total - V[j]) - np.log(V[j])
        per_rho = ratio.max(axis=1) / n
        k = int(np.argmin(per_rho))
        if per_rho[k] > best[0]:
            best = (float(per_rho[k]), float(rho[k]), j)
    if not math.isfinite(best[0]):
        raise ConfigError("calibration failed: p_j vanishes on every candidate circle "
                          "(inspect annulus_floor for the basis)")
    return best


def _necessity_trial(args):
    cfg_data, n, trial, c = args
    cfg, basis, dist, _ = _context(cfg_data)
    nc = cfg.data["necessity"]
    seed = trial_seed(cfg.master_seed, trial)
    S, _ = sample_log_xi(dist, n + 1, seed)
    ev = dominance_events(S, n, c, float(nc["r_margin"]))
    G = sample_G(basis, dist, n, seed)
    failed = False
    try:
        res = roots(G.zeta)
    except PartialResultError as exc:
        res, failed = exc.best, True
    emp = zero_measure(res, G.D_n)
    m = mass_outside(emp, float(nc["r"]))
    return {"n": n, "trial": trial, "A": ev.A, "B": ev.B, "j": ev.j, "gap": ev.gap,
            "mass_r": m, "escape": m >= 0.5, "failed": failed}


def run_necessity(config: ExperimentConfig, workers: int | None = None,
                  write: bool = True) -> RunResult:
    """Dominance events versus mass escape beyond ``necessity.r``.

    For each n, ``c_n`` comes from :func:`calibrate_c`; every trial
    records ``A``, ``B`` and whether ``mass_outside(r) >= 1/2``.  The run
    passes when the escape frequency reaches ``escape_freq_min`` at some n
    and no trial has ``B`` without escape.  With ``necessity.control``
    (light tails) the escape frequency must be 0 instead.
    """
    dist = make_distribution(config.data["distribution"])
    nc = config.data["necessity"]
    control = bool(nc.get("control"))
    config.check_schedule()
    if not control and dist.in_prob_condition and dist.log_moment_finite:
        raise ConfigError("necessity runs need a heavy-tailed law (or necessity.control = true)")
    workers = worker_count() if workers is None else workers
    _, basis, _, _ = _context(config.data)
    calib = {}
    for n in config.schedule:
        if nc.get("c") is not None:
            calib[n] = (float(nc["c"]), math.nan, -1)
        else:
            calib[n] = calibrate_c(basis, n, float(nc["r"]), int(nc["radial_steps"]),
                                   int(nc["angular_steps"]))
    tasks = [(config.data, n, t, calib[n][0]) for n in config.schedule for t in range(config.trials)]
    rows = sorted(_map(_necessity_trial, tasks, workers), key=lambda r: (r["n"], r["trial"]))
    per_n = {}
    for n in config.schedule:
        rs = [r for r in rows if r["n"] == n]
        per_n[n] = {
            "c": calib[n][0], "rho": calib[n][1], "j": calib[n][2],
            "freq_A": float(np.mean([r["A"] for r in rs])),
            "freq_B": float(np.mean([r["B"] for r in rs])),
            "freq_escape": float(np.mean([r["escape"] for r in rs])),
            "rouche_violations": int(sum(r["B"] and not r["escape"] for r in rs)),
            "failed": int(sum(r["failed"] for r in rs)),
        }
    violations = []
    vio = sum(v["rouche_violations"] for v in per_n.values())
    if vio:
        violations.append(f"{vio} trials with B but no mass escape")
    top = max(v["freq_escape"] for v in per_n.values())
    if control:
        if top > 0:
            violations.append(f"control run shows escape frequency {top}")
    elif not top > float(config.thresholds["escape_freq_min"]):
        violations.append(f"escape frequency {top} never exceeds {config.thresholds['escape_freq_min']}")
    summary = {"per_n": per_n, "violations": violations, "control": control}
    code = EXIT_OK if not violations else EXIT_VIOLATED
    paths = {}
    if write:
        h = config.hash
        od = config.output_dir
        hdr = ("n", "trial", "A", "B", "j", "gap", "mass_r", "escape", "failed")
        paths["necessity.csv"] = write_csv(od / "necessity.csv", hdr, [[r[k] for k in hdr] for r in rows], h)
        paths["results.json"] = write_json(od / "necessity.json", {
            "schema_version": SCHEMA_VERSION, "config_hash": h, "config": config.data,
            "summary": summary, "exit_code": code})
    return RunResult(code, summary, paths, rows)


# --- lemma and certificate checks ---------------------------------------------

def _random_monic(rng, degree, radius=None):
    if radius is None:
        r = rng.normal(size=degree) + 1j * rng.normal(size=degree)
    else:
        r = radius * np.sqrt(rng.random(degree)) * np.exp(2j * np.pi * rng.random(degree))
    return np.poly(r)[::-1]


def run_checks(config: ExperimentConfig, write: bool = True) -> RunResult:
    """Batch lemma checkers and certificates with a pass/fail table.

    Hard checks: Cartan, annulus floor, equilibrium identities, lead and
    norm slopes for every basis kind, near-lead slopes on the circle, and
    the vacuous-interior flag on the interval.  Near-lead slopes on the
    interval and the ellipse are recorded as diagnostics only.
    """
    ck = config.data["checks"]
    th = config.thresholds
    rng = np.random.default_rng(trial_seed(config.master_seed, 0, "checks"))
    table = []

    def add(check, instance, value, threshold, passed, hard=True):
        table.append({"check": check, "instance": instance, "value": float(value),
                      "threshold": float(threshold), "passed": bool(passed), "hard": hard})

    h = float(ck["cartan_h"])
    for deg in ck["cartan_degrees"]:
        worst, ok = 0.0, True
        for k in range(int(ck["cartan_per_degree"])):
            res = cartan_check(_random_monic(rng, int(deg)), h, int(ck["cartan_samples"]),
                               seed=int(rng.integers(2**63)))
            worst = max(worst, res.area)
            ok &= res.passed
        add("cartan", f"degree={deg}", worst, 25 * math.pi * math.e ** 2 * h * h, ok)
    r1, r2 = float(ck["annulus_r1"]), float(ck["annulus_r2"])
    ok, worst = True, math.inf
    for k in range(int(ck["annulus_instances"])):
        res = annulus_floor(_random_monic(rng, int(ck["annulus_degree"]), float(ck["annulus_root_radius"])), r1, r2)
        ok &= res.passed
        worst = min(worst, res.log_floor - int(ck["annulus_degree"]) * math.log((r2 - r1) / 5.0))
    add("annulus_floor", f"degree={ck['annulus_degree']}", worst, 0.0, ok)

    for spec in ({"kind": "circle", "params": {"radius": 1.0}},
                 {"kind": "interval", "params": {"a": -2.0, "b": 2.0}},
                 {"kind": "ellipse", "params": {"alpha": 1.25, "beta": 0.75}}):
        s = build_support(spec)
        o = equilibrium_oracle(s)
        ext = s.level_curve(1.5, 200)
        gap = float(np.max(o.potential(ext)) + math.log(s.capacity))
        add("equilibrium_max_principle", s.kind, gap, 1e-9, gap <= 1e-9)
        if s.interior_flag:
            dev = float(np.max(np.abs(o.potential(s.interior_points()) + math.log(s.capacity))))
            add("equilibrium_interior", s.kind, dev, 1e-9, dev <= 1e-9)

    N = int(ck["minimality_N"])
    supports = [({"kind": "circle", "params": {"radius": 1.0}}, ("orthonormal", "lp_minimal", "fekete", "faber"), math.inf),
                ({"kind": "interval", "params": {"a": -2.0, "b": 2.0}}, ("orthonormal", "lp_minimal", "fekete", "faber"), math.inf),
                ({"kind": "ellipse", "params": {"alpha": 1.25, "beta": 0.75}}, ("orthonormal", "lp_minimal", "fekete", "faber"), 4.0)]
    for spec, kinds, lp in supports:
        s = build_support(spec)
        for kind in kinds:
            b = build_basis(kind, s, N, p=lp if kind == "lp_minimal" else 2.0)
            rep = minimality_report(b)
            inst = f"{s.kind}/{kind}"
            add("lead_slope", inst, abs(rep.lead_slope[-1]), th["lead_slope_max"],
                abs(rep.lead_slope[-1]) <= th["lead_slope_max"])
            add("norm_slope", inst, rep.norm_slope[-1], th["norm_slope_max"],
                rep.norm_slope[-1] <= th["norm_slope_max"])
            meas = b.measure or reference_measure(s, "equilibrium_density", default_node_count(N))
            fl = near_lead_floor(b, lp_norms(b, meas, b.p))[0]
            add("near_lead_floor", inst, fl, th["near_lead_min"], fl >= th["near_lead_min"],
                hard=(s.kind == "circle"))

    circ = build_support({"kind": "circle", "params": {"radius": 1.0}})
    mono = build_basis("orthonormal", circ, 32)
    dc = det_criterion_report(mono, mono.measure, 2.0, 0, circ.interior_points((0.5, 0.8)))
    add("det_criterion_c1_monomials", "circle", float(np.max(np.abs(dc.c1))), 1e-12,
        float(np.max(np.abs(dc.c1))) <= 1e-12)
    add("det_criterion_c2_monomials_negative", "circle", float(np.max(dc.c2)), 0.0, float(np.max(dc.c2)) < 0)
    iv = build_support({"kind": "interval", "params": {"a": -2.0, "b": 2.0}})
    ib = build_basis("orthonormal", iv, 16)
    dci = det_criterion_report(ib, ib.measure, 2.0, 0)
    add("det_criterion_vacuous_interval", "interval", float(dci.vacuous_interior), 1.0, dci.vacuous_interior)

    hard_fail = [r for r in table if r["hard"] and not r["passed"]]
    code = EXIT_OK if not hard_fail else EXIT_VIOLATED
    summary = {"rows": len(table), "hard_failures": len(hard_fail),
               "diagnostic_failures": sum(1 for r in table if not r["hard"] and not r["passed"])}
    paths = {}
    if write:
        hdr = ("check", "instance", "value", "threshold", "passed", "hard")
        paths["checks.csv"] = write_csv(config.output_dir / "checks.csv", hdr,
                                        [[r[k] for k in hdr] for r in table], config.hash)
        paths["checks.json"] = write_json(config.output_dir / "checks.json", {
            "schema_version": SCHEMA_VERSION, "config_hash": config.hash,
            "summary": summary, "table": table, "exit_code": code})
    return RunResult(code, summary, paths, table)


# --- plot data and merging ----------------------------------------------------

PLOT_KINDS = ("zero_scatter", "potential_heatmap", "metric_vs_n")


def emit_plot_data(results_dir, kind: str, config: ExperimentConfig | None = None,
                   grid_size: int = 64) -> list[Path]:
    """Write plot-ready CSVs under ``<results_dir>/plots``.

    ``zero_scatter`` gives one row per root; ``metric_vs_n`` one file per
    metric with one row per n; ``potential_heatmap`` evaluates
    ``p_emp - p_oracle`` for the largest n (trial 0) on a square grid that
    skips the band within ``margin`` of the support boundary.
    """
    if kind not in PLOT_KINDS:
        raise ValidationError(f"unknown plot kind {kind!r}")
    rd = Path(results_dir)
    meta = json.loads((rd / "results.json").read_text())
    h = meta["config_hash"]
    config = config or ExperimentConfig(meta["config"])
    out = []
    if kind == "zero_scatter":
        _, _, rows = read_csv(rd / "roots.csv")
        out.append(write_csv(rd / "plots" / "zero_scatter.csv", ("re", "im", "n", "trial"),
                             [[float(r[2]), float(r[3]), int(r[0]), int(r[1])] for r in rows], h))
    elif kind == "metric_vs_n":
        _, hdr, rows = read_csv(rd / "results.csv")
        arr = np.array([[float(v) for v in r] for r in rows]) if rows else np.zeros((0, len(hdr)))
        for m in hdr[2:]:
            col = hdr.index(m)
            lines = []
            for n in sorted(set(arr[:, 0].astype(int))):
                v = arr[arr[:, 0] == n, col]
                v = v[np.isfinite(v)]
                q = np.percentile(v, [50, 25, 75]) if v.size else [math.nan] * 3
                lines.append([n, q[0], q[1], q[2]])
            out.append(write_csv(rd / "plots" / f"metric_vs_n_{m}.csv", ("n", "median", "q25", "q75"), lines, h))
    else:
        _, _, rows = read_csv(rd / "roots.csv")
        nmax = max(int(r[0]) for r in rows)
        pts = [(float(r[4]), complex(float(r[2]), float(r[3]))) for r in rows
               if int(r[0]) == nmax and int(r[1]) == 0]
        from .logarray import LogComplexArray
        la = np.array([p[0] for p in pts])
        ph = np.array([p[1] / abs(p[1]) if np.isfinite(p[1]) and p[1] != 0 else 1.0 for p in pts])
        emp = zero_measure(LogComplexArray(la, ph))
        s = config.support
        oracle = equilibrium_oracle(s)
        ext = float(np.max(np.abs(s.level_curve(2.0, 256)))) * 1.1
        g = np.linspace(-ext, ext, grid_size)
        Z = (g[None, :] + 1j * g[:, None]).ravel()
        Z = Z[s.boundary_distance(Z) >= float(config.data["margin"])]
        vals = log_potential(emp, Z) - oracle.potential(Z)
        out.append(write_csv(rd / "plots" / "potential_heatmap.csv", ("re", "im", "diff"),
                             [[z.real, z.imag, v] for z, v in zip(Z, vals)], h))
    return out


def merge_reports(paths, out_path=None):
    """Concatenate ``results.csv`` files that share a config hash.

    Raises
    ------
    ConfigError
        When the hashes differ.
    """
    hashes, header, rows = set(), None, []
    for p in paths:
        meta, hdr, rs = read_csv(p)
        hashes.add(meta.get("config_hash"))
        if header is None:
            header = hdr
        elif hdr != header:
            raise ConfigError("reports have different headers")
        rows.extend(rs)
    if len(hashes) != 1:
        raise ConfigError(f"refusing to merge reports with differing config hashes: {sorted(map(str, hashes))}")
    seen = {}
    for r in rows:
        seen[(int(r[0]), int(r[1]))] = r
    merged = [seen[k] for k in sorted(seen)]
    if out_path is not None:
        write_csv(out_path, header, merged, hashes.pop())
    return header, merged
