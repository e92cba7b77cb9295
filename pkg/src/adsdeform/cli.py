"""adsdeform command line.

Exit codes: 0 ok, 2 configuration error, 3 verification failure, 4 I/O error.
ADSDEFORM_THREADS caps BLAS threads and worker processes (default 1).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import report
from .config import ConfigError, RunConfig

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def threads_from_env() -> int:
    raw = os.environ.get("ADSDEFORM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"ADSDEFORM_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"ADSDEFORM_THREADS must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------- function specs


def parse_fn(spec: str):
    """'gauss:c1,c2,sigma[,twist]' or 'bump:c1,c2,R' on (a, l) / (t, s) coordinates."""
    from .symsym_p11 import bump

    try:
        kind, args = spec.split(":", 1)
        vals = [float(v) for v in args.split(",")]
    except ValueError:
        raise ConfigError(f"bad function spec {spec!r} (want kind:c1,c2,width[,twist])") from None
    if kind == "bump" and len(vals) == 3 and vals[2] > 0:
        return bump((vals[0], vals[1]), vals[2])
    if kind == "gauss" and len(vals) in (3, 4) and vals[2] > 0:
        c, sg = np.array(vals[:2]), vals[2]
        tw = vals[3] if len(vals) == 4 else 0.0
        return lambda p: np.exp(-np.sum((np.asarray(p) - c) ** 2, -1) / (2 * sg * sg)) * (1 + 1j * tw * np.asarray(p)[..., 1])
    raise ConfigError(f"bad function spec {spec!r}")


# ---------------------------------------------------------------- subcommands


def cmd_verify(cfg: RunConfig, args) -> tuple[str, int]:
    from .suites import SUITES, run_suites

    names = list(SUITES) if args.suite == "all" else [args.suite]
    res = run_suites(cfg, names)
    ok = all(r["passed"] for r in res.values())
    doc = report.envelope(cfg, {"command": "verify", "suite": args.suite, "passed": ok, "suites": res})
    return report.dumps(doc), EXIT_OK if ok else EXIT_VERIFY


def _classify_chunk(job):
    from .bhtz_geometry import CausalClass, PathEscapeError, causal_character, component_id, in_horizon, in_singularity
    from .lie_core import GroupElement

    xi, pts = job
    rows = []
    for phi, n, a in pts:
        x = GroupElement(phi, n, a)
        c = causal_character(xi, x)
        comp = ""
        if c is CausalClass.SPACELIKE_REGION:
            try:
                comp = component_id(xi, x)
            except PathEscapeError:
                comp = "escape"
        rows.append((phi, n, a, c.value, int(in_horizon(x)), int(in_singularity(x)), comp))
    return rows


def parse_grid_spec(spec: str) -> tuple[int, int, int]:
    try:
        dims = tuple(int(v) for v in spec.lower().split("x"))
    except ValueError:
        raise ConfigError(f"bad grid spec {spec!r} (want NPHIxNNxNA)") from None
    if len(dims) != 3 or min(dims) < 1:
        raise ConfigError(f"bad grid spec {spec!r} (want NPHIxNNxNA)")
    return dims


def cmd_classify(cfg: RunConfig, args) -> tuple[str, int]:
    from .bhtz_geometry import rotating_pair, spinless_pair

    nphi, nn, na = parse_grid_spec(args.grid)
    xi = spinless_pair(cfg.mass) if cfg.spin == 0 else rotating_pair(cfg.mass, cfg.spin)[0]
    phis = np.linspace(*args.phi_range, nphi)
    ns = np.linspace(*args.n_range, nn)
    as_ = np.linspace(*args.a_range, na)
    pts = [(float(p), float(n), float(a)) for p in phis for n in ns for a in as_]
    size = max(1, len(pts) // 64)
    jobs = [(xi, pts[i:i + size]) for i in range(0, len(pts), size)]
    workers = threads_from_env()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_classify_chunk, jobs))
    else:
        chunks = [_classify_chunk(j) for j in jobs]
    rows = [r for c in chunks for r in c]
    header = ["phi", "n", "a", "causal_class", "horizon", "singularity", "component"]
    return report.csv_text(cfg, header, rows), EXIT_OK


def cmd_bfield(cfg: RunConfig, args) -> tuple[str, int]:
    from .suites import bfield_scan

    cfg = cfg.replace(bfield_range=list(args.range) if args.range else list(cfg.bfield_range),
                      bfield_samples=args.samples or cfg.bfield_samples)
    rows = bfield_scan(cfg, args.profile)
    ok = max(r[2] for r in rows) < cfg.tolerances["bfield.residual"]
    return report.csv_text(cfg, ["a", "f", "residual"], rows), EXIT_OK if ok else EXIT_VERIFY


def cmd_torus(cfg: RunConfig, args) -> tuple[str, int]:
    from .rieffel_torus import DeformationMatrix, TrigPolynomial, mode_product, star_theta

    with open(args.modes, encoding="utf-8") as fh:  # OSError -> exit 4
        text = fh.read()
    try:
        data = json.loads(text)
        modes = [tuple(int(v) for v in m) for m in data["modes"]]
        d = len(modes[0])
        J = DeformationMatrix(np.array(data.get("J", DeformationMatrix.standard(d).J.tolist()), dtype=float))
    except (json.JSONDecodeError, KeyError, TypeError, IndexError, ValueError) as e:
        raise ConfigError(f"bad modes file: {e}") from None
    th = cfg.theta
    table = []
    for m in modes:
        for n in modes:
            c, k = mode_product(m, n, th, J)
            table.append({"m": list(m), "n": list(n), "coeff": complex(c), "mode": list(k)})
    eps = np.finfo(float).eps
    worst = 0.0
    for m in modes:
        for n in modes:
            for p in modes:
                a, b, c = (TrigPolynomial.mode(x) for x in (m, n, p))
                lhs = star_theta(star_theta(a, b, th, J), c, th, J)
                rhs = star_theta(a, star_theta(b, c, th, J), th, J)
                arg = abs(J.pair(m, n)) + abs(J.pair(m, p)) + abs(J.pair(n, p))
                worst = max(worst, lhs.max_diff(rhs) / (eps * (1 + abs(th) * arg)))
    ok = worst <= cfg.tolerances["torus.exact_ulps"]
    doc = report.envelope(cfg, {"command": "torus", "J": J.J, "products": table,
                                "report": {"associativity_in_ulps": worst, "passed": ok}})
    return report.dumps(doc), EXIT_OK if ok else EXIT_VERIFY


def cmd_symsym(cfg: RunConfig, args) -> tuple[str, int]:
    from . import symsym_p11 as sp

    if args.grid is not None:
        if args.grid % cfg.grid_order:
            raise ConfigError(f"--grid must be a multiple of the quadrature order {cfg.grid_order}")
        cfg = cfg.replace(grid_cells=args.grid // cfg.grid_order)
    grid = cfg.grid()
    u, v = parse_fn(args.fn_a), parse_fn(args.fn_b)
    U, V = grid.sample(u), grid.sample(v)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        try:
            prod = sp.star_symsym(U, V, cfg.theta)
        except sp.GridSupportError as e:
            raise ConfigError(str(e)) from None
    th = cfg.theta
    pts = np.array([[0.1, 0.1], [0.2, -0.3], [-0.1, 0.2]])
    w = np.array([0.1, 0.05])
    rep = {
        "trace_defect": sp.trace_defect(u, v, th, grid),
        "associativity_defect": sp.associativity_defect(u, v, u, th, grid),
        "invariance_defect": sp.covariance_defect(u, v, lambda p: sp.symmetry(w, p), pts, th, grid),
    }
    t = cfg.tolerances
    ok = (rep["trace_defect"] < t["star.trace"] and rep["associativity_defect"] < t["star.associativity"]
          and rep["invariance_defect"] < t["symsym.invariance"])
    rep["passed"] = ok
    rep["warnings"] = sorted({str(c.message) for c in caught})
    doc = report.envelope(cfg, {"command": "symsym", "fn_a": args.fn_a, "fn_b": args.fn_b,
                                "grid": grid.to_json(), "product": prod.values, "report": rep})
    text = report.dumps(doc)
    return text, EXIT_OK if ok else EXIT_VERIFY


def cmd_bhtz_product(cfg: RunConfig, args) -> tuple[str, int]:
    from . import udf_bhtz as ud
    from .lie_core import ANElement
    from .symsym_p11 import Grid

    spin = cfg.spin if args.kind == "rotating" else 0.0
    if args.kind == "rotating" and spin == 0:
        raise ConfigError("rotating kind needs a non-zero spin")
    act = ud.bhtz_raction(args.kind, cfg.mass, spin)
    fa, fb = parse_fn(args.fn_a), parse_fn(args.fn_b)
    chart = lambda fn: ud.chart_function(act, lambda fib, t, s: fn(np.stack([np.asarray(t), np.asarray(s)], -1)))
    a, b = chart(fa), chart(fb)
    fiber = (0.3, 0) if args.kind == "spinless" else 0.4
    rs = [(0.0, 0.0), (0.2, -0.3), (-0.1, 0.2), (0.3, 0.1)]
    samples = []
    for t, s in rs:
        x = act.from_chart(fiber, ANElement(t, s))
        samples.append({"r": [t, s], "value": ud.udf_product(a, b, x, cfg.theta, act, warn=False)})
    x0 = act.from_chart(fiber, ANElement(0.2, -0.3))
    tr = ud.orbit_trace(a, b, fiber, cfg.theta, act, Grid(8, 6, -1.6, 1.6, 12, -2.4, 2.4),
                        Grid(10, 6, -3, 3, 16, -8, 8))
    rep = {"r_covariance": ud.covariance_defect(a, b, x0, ANElement(0.3, 0.2), cfg.theta, act),
           "trace_right_haar": tr["right"], "trace_left_haar": tr["left"]}
    ok = rep["r_covariance"] < cfg.tolerances["udf.covariance"] and rep["trace_right_haar"] < cfg.tolerances["star.trace"]
    rep["passed"] = ok
    doc = report.envelope(cfg, {"command": "bhtz-product", "kind": args.kind, "fiber": list(np.atleast_1d(fiber)),
                                "fn_a": args.fn_a, "fn_b": args.fn_b, "samples": samples, "report": rep})
    return report.dumps(doc), EXIT_OK if ok else EXIT_VERIFY


def cmd_spectral(cfg: RunConfig, args) -> tuple[str, int]:
    from .suites import spectral_report

    rep = spectral_report(cfg, args.check)
    t = cfg.tolerances
    if args.check == "derivation":
        ok = max(rep["commuting"].values()) < t["spectral.derivation"] and \
            rep["non_commuting"]["right_H"] > t["spectral.negative_control"]
    elif args.check == "dirac":
        ok = rep["coarse"]["defect"] < t["spectral.dirac"] and rep["fine"]["defect"] < rep["coarse"]["defect"]
    else:
        ok = rep["associativity"] < 1e-2 and rep["endo_compatibility"] < 1e-2 and max(rep["unit"].values()) < 1e-2
    rep["passed"] = ok
    doc = report.envelope(cfg, {"command": "spectral", "check": args.check, "report": rep})
    return report.dumps(doc), EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    from .suites import SUITES

    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig keys (default: built-in defaults)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--theta", type=float, help="deformation parameter (default 1.0)")
    common.add_argument("--seed", type=int, help="random seed (default 20240611)")
    common.add_argument("--mass", type=float, help="BTZ mass M (default 2.0)")
    common.add_argument("--spin", type=float, help="BTZ angular momentum J (default 1.0)")

    p = _Parser(prog="adsdeform", description="Deformation quantization checks on AdS3/BTZ backgrounds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="run verification suites, JSON report")
    v.add_argument("--suite", default="all", choices=["all", *SUITES], help="suite to run (default all)")

    c = sub.add_parser("classify", parents=[common], help="causal classification scan, CSV")
    c.add_argument("--grid", default="64x64x16", help="NPHIxNNxNA points (default 64x64x16)")
    c.add_argument("--phi-range", type=float, nargs=2, default=(-2 * math.pi, 2 * math.pi), help="default [-2pi, 2pi]")
    c.add_argument("--n-range", type=float, nargs=2, default=(-3.0, 3.0), help="default [-3, 3]")
    c.add_argument("--a-range", type=float, nargs=2, default=(-2.0, 2.0), help="default [-2, 2]")

    b = sub.add_parser("bfield", parents=[common], help="B-field residual scan, CSV")
    b.add_argument("--range", type=float, nargs=2, metavar=("A0", "A1"), help="a-range (default -3 3)")
    b.add_argument("--samples", type=int, help="number of a samples (default 61)")
    b.add_argument("--profile", choices=["tanh", "derived"], default="tanh", help="profile f (default tanh)")

    t = sub.add_parser("torus", parents=[common], help="quantum torus product table, JSON")
    t.add_argument("--modes", required=True, help='JSON file {"modes": [[..], ..], "J": [[..], ..] (optional)}')

    s = sub.add_parser("symsym", parents=[common], help="symmetric-space star product on a grid, JSON")
    s.add_argument("--grid", type=int, help="nodes per axis (default 24)")
    s.add_argument("--fn-a", default="bump:0,0,0.8", help="first factor (default bump:0,0,0.8)")
    s.add_argument("--fn-b", default="bump:0.3,-0.2,0.8", help="second factor (default bump:0.3,-0.2,0.8)")

    h = sub.add_parser("bhtz-product", parents=[common], help="product on a BTZ orbit, JSON")
    h.add_argument("--kind", choices=["spinless", "rotating"], default="spinless", help="default spinless")
    h.add_argument("--fn-a", default="gauss:0.1,-0.2,0.35", help="chart function (t, s) (default gauss:0.1,-0.2,0.35)")
    h.add_argument("--fn-b", default="gauss:-0.2,0.1,0.35,0.3", help="default gauss:-0.2,0.1,0.35,0.3")

    sp = sub.add_parser("spectral", parents=[common], help="spinor/Dirac verification report, JSON")
    sp.add_argument("--check", choices=["dirac", "derivation", "module"], default="dirac", help="default dirac")
    return p


COMMANDS = {
    "verify": cmd_verify, "classify": cmd_classify, "bfield": cmd_bfield, "torus": cmd_torus,
    "symsym": cmd_symsym, "bhtz-product": cmd_bhtz_product, "spectral": cmd_spectral,
}


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:  # OSError -> exit 4
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in ("theta", "seed", "mass", "spin", "out"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return RunConfig.from_mapping(data)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args)
        n = threads_from_env()
        if cfg.out not in (None, "-"):
            parent = os.path.dirname(os.path.abspath(cfg.out))
            if not os.path.isdir(parent):
                raise FileNotFoundError(f"output directory does not exist: {parent}")
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=n):
            text, code = COMMANDS[args.command](cfg, args)
        report.emit(text, cfg.out)
        return code
    except ConfigError as e:
        print(f"adsdeform: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"adsdeform: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
