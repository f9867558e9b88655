"""Command-line interface: ``isodist {dist,example-qubit,lift,sweep,verify}``.

Exit codes: 0 ok, 1 invalid input, 2 states not isospectral, 3 optimizer did
not converge (report still written), 4 an invariant check failed.
"""

from __future__ import annotations

import argparse
import io as _stdio
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from . import io
from .bures import QubitExample, bures_distance, compare_distances, qubit_example
from .checks import jensen_check, jensen_samples, run_checks
from .dynamics import TimeGrid, curve_length, h_distance, horizontal_lift, schrodinger_lift, uncertainty_trace
from .errors import InvalidStateError, NotIsospectralError, RetractionError
from .geodesics import OptimizerConfig, dynamic_distance, horizontality_residual
from .states import Spectrum, canonical_purification, random_isospectral, spectrum_of, trace_distance

log = logging.getLogger("isodist")

EXIT_OK, EXIT_INPUT, EXIT_ISOSPECTRAL, EXIT_CONVERGENCE, EXIT_INVARIANT = 0, 1, 2, 3, 4

SMALL_EPS = 0.3
SWEEP_HEADER = (
    "sample", "d_ab", "d_bc", "d_ac", "d_ba", "bures_ab", "bures_bc", "bures_ac", "trace_ab",
    "noether_drift", "symmetry_ok", "triangle_ok", "bures_ok", "jensen_ok", "noether_ok",
)


class UsageError(Exception):
    pass


def _config(args) -> OptimizerConfig:
    base = {}
    if args.config:
        doc = io.read_json(args.config)
        unknown = set(doc) - set(OptimizerConfig.__dataclass_fields__)
        if unknown:
            raise InvalidStateError(f"unknown optimizer config keys: {sorted(unknown)}")
        base.update(doc)
    for key in ("n_coarse", "n_max", "rel_tol", "max_sweeps", "n_starts"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    base["seed"] = _seed(args)
    return OptimizerConfig(**base)


def _seed(args) -> int:
    env = os.environ.get("ISODIST_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"ISODIST_SEED must be an integer, got {env!r}")
    return args.seed


def _envelope(command: str, cfg: OptimizerConfig | None, args, body: dict) -> dict:
    echo = {k: v for k, v in vars(args).items() if k not in ("func", "default_format", "command") and v is not None}
    return {
        "command": command,
        "version": __version__,
        "arguments": echo,
        "config": asdict(cfg) if cfg else None,
        **body,
    }


def _emit(args, doc: dict | None = None, header=None, rows=None) -> None:
    if rows is not None:
        buf = _stdio.StringIO()
        io.write_csv(buf, header, rows)
        text = buf.getvalue()
    else:
        text = json.dumps(doc, indent=2, allow_nan=False, default=_jsonable) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_trace(path, report) -> None:
    if path:
        io.write_csv(path, io.ENERGY_TRACE_HEADER, report.energy_trace)


def cmd_dist(args) -> int:
    cfg = _config(args)
    rho_a, rho_b = io.read_state(args.state_a), io.read_state(args.state_b)
    if rho_a.shape != rho_b.shape:
        raise InvalidStateError(f"dimension mismatch: {rho_a.shape} vs {rho_b.shape}")
    cmp = compare_distances(rho_a, rho_b, cfg)
    body = cmp.to_dict()
    _write_trace(args.trace, cmp.report)
    if args.format == "csv":
        cols = ("dynamic", "bures", "trace", "gap", "converged")
        _emit(args, header=cols, rows=[[body["dynamic"], body["bures"], body["trace"], body["gap"], cmp.report.converged]])
    else:
        _emit(args, _envelope("dist", cfg, args, body))
    return EXIT_OK if cmp.report.converged else EXIT_CONVERGENCE


def cmd_example_qubit(args) -> int:
    cfg = _config(args)
    p1, eps = args.p1, args.eps
    if not (0.5 <= p1 < 1) or not eps > 0:
        raise UsageError("need 0.5 <= p1 < 1 (0.5 is degenerate) and eps > 0")
    flags = []
    if p1 == 0.5:
        log.warning("p1 = 0.5: degenerate spectrum, the curve is vertical and the comparison is vacuous")
        flags.append("degenerate_spectrum")
    res = qubit_example(QubitExample(p1, 1 - p1, eps), cfg.n_max)
    d_opt, report = dynamic_distance(res.rho0, res.rho1, cfg)
    out = {
        "D_optimizer": d_opt,
        "eps": eps,
        "L_curve": curve_length(res.curve),
        "D_B_fidelity": bures_distance(res.rho0, res.rho1),
        "D_B_closed_form": res.d_bures_closed_form,
        "horizontality_residual": horizontality_residual(res.curve),
        "optimizer_report": report.to_dict(),
    }
    status = EXIT_OK
    if "degenerate_spectrum" in flags:
        pass
    elif eps <= SMALL_EPS:
        out["matches_eps"] = abs(d_opt - eps) <= 1e-3
        if not out["matches_eps"]:
            status = EXIT_INVARIANT
    else:
        flags.append("eps_outside_small_window")
    out["flags"] = flags
    _write_trace(args.trace, report)
    _emit(args, _envelope("example-qubit", cfg, args, out))
    if status == EXIT_OK and not report.converged:
        status = EXIT_CONVERGENCE
    return status


def cmd_lift(args) -> int:
    h = io.read_hamiltonian(args.hamiltonian)
    rho0 = io.read_state(args.state_a)
    if h.shape != rho0.shape:
        raise InvalidStateError(f"dimension mismatch: H {h.shape}, rho {rho0.shape}")
    if not args.t1 > 0:
        raise UsageError("--t1 must be positive")
    grid = TimeGrid(0.0, args.t1, args.n or 256)
    sigma = spectrum_of(rho0)
    values, curve = uncertainty_trace(h, rho0, grid)
    d_h, final = h_distance(h, rho0, grid)
    lift = horizontal_lift(schrodinger_lift(h, canonical_purification(rho0, sigma), grid, sigma))
    length = curve_length(lift)
    rows = list(zip(grid.nodes.tolist(), values.tolist()))
    if args.trace:
        io.write_csv(args.trace, io.UNCERTAINTY_HEADER, rows)
    if args.format == "csv":
        _emit(args, header=io.UNCERTAINTY_HEADER, rows=rows)
    else:
        body = {
            "D_H": d_h,
            "L_horizontal_lift": length,
            "inequality_ok": bool(d_h >= length - 1e-6),
            "final_state": io.state_to_json(final),
            "grid": {"t_start": grid.t_start, "t_end": grid.t_end, "n_steps": grid.n_steps},
        }
        _emit(args, _envelope("lift", None, args, body))
    return EXIT_OK if d_h >= length - 1e-6 else EXIT_INVARIANT


def sweep_rows(sigma: Spectrum, n: int, samples: int, cfg: OptimizerConfig) -> list[list]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(samples):
        a, b, c = (random_isospectral(sigma, n, rng) for _ in range(3))
        d_ab, rep = dynamic_distance(a, b, cfg)
        d_bc = dynamic_distance(b, c, cfg)[0]
        d_ac = dynamic_distance(a, c, cfg)[0]
        d_ba = dynamic_distance(b, a, cfg)[0]
        b_ab, b_bc, b_ac = bures_distance(a, b), bures_distance(b, c), bures_distance(a, c)
        jensen_ok = all(all(jensen_check(sigma, xi)) for xi in jensen_samples(sigma, 8, rng))
        drift = rep.noether_drift / d_ab if d_ab > 0 else 0.0
        rows.append([
            i, d_ab, d_bc, d_ac, d_ba, b_ab, b_bc, b_ac, trace_distance(a, b), drift,
            abs(d_ab - d_ba) <= 2e-3,
            d_ac <= d_ab + d_bc + 2e-3,
            min(d_ab - b_ab, d_bc - b_bc, d_ac - b_ac) >= -2e-3,
            jensen_ok,
            drift <= 1e-4,
        ])
    return rows


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if args.sigma is None:
        raise UsageError("--sigma is required")
    sigma = Spectrum(tuple(float(v) for v in args.sigma.split(",")))
    n = args.n or sigma.k
    if n < sigma.k:
        raise UsageError(f"--n={n} is smaller than the rank {sigma.k}")
    if args.samples < 0:
        raise UsageError("--samples must be non-negative")
    rows = sweep_rows(sigma, n, args.samples, cfg)
    if args.format == "json":
        _emit(args, _envelope("sweep", cfg, args, {"rows": [dict(zip(SWEEP_HEADER, r)) for r in rows]}))
    else:
        _emit(args, header=SWEEP_HEADER, rows=rows)
    failed = any(not all(r[-5:]) for r in rows)
    return EXIT_INVARIANT if failed else EXIT_OK


def cmd_verify(args) -> int:
    try:
        results = run_checks(_seed(args), args.filter)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.format == "json":
        _emit(args, {"version": __version__, "seed": _seed(args), "checks": [asdict(r) for r in results]})
    else:
        width = max((len(r.name) for r in results), default=4)
        lines = [f"{'check':<{width}}  {'module':<9}  result  detail"]
        lines += [f"{r.name:<{width}}  {r.module:<9}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}" for r in results]
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (ISODIST_SEED overrides)")
    common.add_argument("--config", help="optimizer config JSON file")
    common.add_argument("--n-coarse", dest="n_coarse", type=int)
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("--rel-tol", dest="rel_tol", type=float)
    common.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    common.add_argument("--n-starts", dest="n_starts", type=int)
    common.add_argument("--format", choices=("json", "csv", "text"), help="output format (default depends on the command)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--trace", help="also write a CSV trace to this path")

    parser = argparse.ArgumentParser(prog="isodist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"isodist {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common], help="distances between two isospectral states")
    p.add_argument("--state-a", required=True)
    p.add_argument("--state-b", required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("example-qubit", parents=[common], help="rotated two-level example")
    p.add_argument("--p1", type=float, default=0.7)
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=cmd_example_qubit)

    p = sub.add_parser("lift", parents=[common], help="H-distance and horizontal lift for a constant H")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--state-a", "--state", dest="state_a", required=True)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--n", type=int, help="number of time steps (even, default 256)")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("sweep", parents=[common], help="random property sweep, one CSV row per triple")
    p.add_argument("--sigma", required=True, help="comma-separated spectrum, e.g. 0.7,0.3")
    p.add_argument("--n", type=int, help="Hilbert space dimension (default: rank)")
    p.add_argument("--samples", type=int, default=10)
    p.set_defaults(func=cmd_sweep, default_format="csv")

    p = sub.add_parser("verify", parents=[common], help="run every invariant check")
    p.add_argument("--filter", help="run only one module's checks")
    p.set_defaults(func=cmd_verify, default_format="text")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "json")
    try:
        return args.func(args)
    except NotIsospectralError as exc:
        log.error("%s", exc)
        return EXIT_ISOSPECTRAL
    except (InvalidStateError, UsageError, RetractionError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
