"""Command-line entry point: ``randzeros <subcommand> ...``.

Exit codes: 0 success, 2 an acceptance threshold was violated, 3 bad
configuration or an infrastructure failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import NAME as BACKEND
from .bases import Basis, build_basis, minimality_report
from .ensembles import make_distribution, sample_G
from .errors import ConfigError, PartialResultError, RandZerosError
from .experiments import (
    EXIT_INFRA,
    EXIT_OK,
    PLOT_KINDS,
    load_config,
    run_checks,
    run_convergence,
    run_necessity,
    emit_plot_data,
    write_csv,
)
from .logarray import LogComplexArray
from .rootfinding import roots

log = logging.getLogger("randzeros")


def _config(args):
    extra = {}
    if getattr(args, "output_dir", None):
        extra["output_dir"] = str(args.output_dir)
    return load_config(args.config, args.set, **extra)


def _pairs_to_log(values) -> LogComplexArray:
    z = np.array([complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in values])
    return LogComplexArray.from_complex(z)


def cmd_basis(args) -> int:
    cfg = _config(args)
    b = cfg.basis()
    Path(args.out).write_text(b.to_json())
    rep = minimality_report(b) if b.degree_max >= 8 else None
    info = {"kind": b.kind, "support": b.support.kind, "degree_max": b.degree_max, "out": args.out}
    if rep is not None:
        info.update(lead_slope=float(rep.lead_slope[-1]), norm_slope=float(rep.norm_slope[-1]),
                    near_lead_slope=float(rep.near_lead_slope[-1]))
    print(json.dumps(info, indent=1))
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _config(args)
    b = Basis.from_json(Path(args.basis).read_text()) if args.basis else cfg.basis()
    dist = make_distribution(cfg.data["distribution"])
    G = sample_G(b, dist, args.n, args.seed)
    out = {"n": G.n, "seed": args.seed, "distribution": dist.to_dict(), "D_n": G.D_n,
           "xi_logabs": G.xi.logabs.tolist(), "xi_phase": [[p.real, p.imag] for p in G.xi.phase],
           "zeta_logabs": G.zeta.logabs.tolist(), "zeta_phase": [[p.real, p.imag] for p in G.zeta.phase]}
    text = json.dumps(out, allow_nan=True)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def _load_coeffs(path) -> LogComplexArray:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict) and "zeta_logabs" in data:
        ph = np.array([complex(a, b) for a, b in data["zeta_phase"]])
        return LogComplexArray(np.array(data["zeta_logabs"], dtype=float), ph)
    if isinstance(data, dict):
        data = data["coeffs"]
    return _pairs_to_log(data)


def cmd_roots(args) -> int:
    zeta = _load_coeffs(args.coeffs)
    code = EXIT_OK
    try:
        res = roots(zeta, tol=args.tol)
    except PartialResultError as exc:
        res, code = exc.best, EXIT_INFRA
        log.error("%s", exc)
    rows = []
    for la, ph in zip(res.log_roots.logabs, res.log_roots.phase):
        z = math.exp(la) * ph if la < 709 else complex(math.inf, math.inf)
        rows.append((z.real, z.imag, la, math.atan2(ph.imag, ph.real)))
    write_csv(args.out, ("re", "im", "log_abs", "arg"), rows, "none")
    print(json.dumps({k: (v if not isinstance(v, float) or math.isfinite(v) else str(v))
                      for k, v in res.diagnostics.items()}, indent=1, default=str))
    return code


def _report(result) -> int:
    print(json.dumps({"exit_code": result.exit_code, "summary": result.summary,
                      "outputs": {k: str(v) for k, v in result.paths.items()}},
                     indent=1, default=str))
    return result.exit_code


def cmd_converge(args) -> int:
    return _report(run_convergence(_config(args), workers=args.workers))


def cmd_necessity(args) -> int:
    return _report(run_necessity(_config(args), workers=args.workers))


def cmd_checks(args) -> int:
    return _report(run_checks(_config(args)))


def cmd_plot(args) -> int:
    kinds = PLOT_KINDS if args.kind == "all" else (args.kind,)
    for k in kinds:
        for p in emit_plot_data(args.results, k):
            print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randzeros", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, workers=False):
        p.add_argument("--config", type=Path, help="TOML or JSON experiment config")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted override, e.g. basis.N=128 (repeatable)")
        p.add_argument("--output-dir", type=Path)
        if workers:
            p.add_argument("--workers", type=int, default=None,
                           help="process count (default RANDZEROS_WORKERS or 1)")
        return p

    p = common(sub.add_parser("basis", help="build a basis and write it as JSON"))
    p.add_argument("--out", default="basis.json")
    p.set_defaults(func=cmd_basis)

    p = common(sub.add_parser("sample", help="draw one random polynomial"))
    p.add_argument("--basis", help="basis JSON (default: build from config)")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("roots", help="roots of a coefficient file")
    p.add_argument("coeffs", help="JSON list of [re, im] (ascending) or a sample file")
    p.add_argument("--out", default="roots.csv")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_roots)

    p = common(sub.add_parser("converge", help="convergence experiment"), workers=True)
    p.set_defaults(func=cmd_converge)
    p = common(sub.add_parser("necessity", help="heavy-tail necessity experiment"), workers=True)
    p.set_defaults(func=cmd_necessity)
    p = common(sub.add_parser("checks", help="lemma checkers and certificates"))
    p.set_defaults(func=cmd_checks)

    p = sub.add_parser("plot", help="plot-ready CSVs from a results directory")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--kind", choices=PLOT_KINDS + ("all",), default="all")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args))
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except RandZerosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
