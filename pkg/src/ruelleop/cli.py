"""Command line driver: JSON-configured models in, deterministic reports out.

The config file is a JSON object; command line flags override its
top-level scalars.  Keys:

    space       {"kind": "uniform", "size": 2}
                {"kind": "finite", "weights": [..]}
                {"kind": "gauss-legendre", "count": 16, "a": 0.0, "b": 1.0}
    potential   {"kind": "constant", "value": 0.7}
                {"kind": "ising", "coupling": 1.0, "external_field": 0.0}
                {"kind": "xy", "coupling": 1.0}
                {"kind": "renewal", "payoffs": [..], "tail": "constant"
                 or {"limit": 0.0, "bound": 0.0}}
                {"kind": "table", "depth": 2, "values": [..], "var_bound": 0.0}
    beta        scalar multiplier applied to the potential (default 1;
                the scan command ignores it and sweeps the grid instead)
    grid        {"start": 0.0, "stop": 2.0, "count": 101}   (scan only)
    depth       working cylinder depth (default: potential depth - 1)
    tol         power iteration tolerance (default 1e-12)
    max_iters   power iteration cap (default 100000)
    n_max       bracket / entropy horizon (default 8)
    threads     scan worker threads (default 1)
    seed        seed for the perturbation controls in verify (default 0)
    cylinder_cap  override for the table-size guard

Exit codes: 0 success, 1 failed verification, 2 bad config, 3 resource
cap exceeded, 4 numeric failure.  Output contains no timestamps, so a
fixed config and environment reproduce reports byte for byte.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .config import set_cylinder_cap
from .errors import ConfigError, NumericError, ResourceCapError
from .measures import (
    CylinderMeasure,
    check_eigenmeasure,
    check_intertwine,
    check_invariance,
    equilibrium_measure,
    extend_eigenmeasure,
    extend_equilibrium,
    invariance_defect,
    variational_gap,
)
from .potential import (
    Potential,
    RenewalTail,
    builtin_constant,
    builtin_ising,
    builtin_renewal,
    builtin_xy,
    scale,
    truncate,
)
from .report import HUMAN_DIGITS, MACHINE_DIGITS, format_float
from .scan import pressure_curve
from .space import index_word, uniform_space, finite_space, gauss_legendre_space
from .spectral import perron_eigendata, pressure_bracket

COMMANDS = ("pressure", "spectral", "equilibrium", "entropy", "scan", "verify")

DEFAULTS = {
    "beta": 1.0,
    "depth": None,
    "tol": 1e-12,
    "max_iters": 100_000,
    "n_max": 8,
    "threads": 1,
    "seed": 0,
    "grid": {"start": 0.0, "stop": 2.0, "count": 101},
}

# names the table-row commands use for the cylinder label column
WORD_COL = "word"


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    _require(isinstance(cfg, dict), "config must be a JSON object")
    return cfg


def build_space(cfg):
    _require(isinstance(cfg, dict), "space config must be an object")
    kind = cfg.get("kind")
    try:
        if kind == "uniform":
            return uniform_space(int(cfg.get("size", 2)))
        if kind == "finite":
            _require("weights" in cfg, "finite space needs 'weights'")
            return finite_space(np.asarray(cfg["weights"], dtype=float))
        if kind == "gauss-legendre":
            return gauss_legendre_space(
                int(cfg.get("count", 16)),
                float(cfg.get("a", 0.0)),
                float(cfg.get("b", 1.0)),
            )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad space config: {exc}") from exc
    raise ConfigError(f"unknown space kind {kind!r}")


def build_potential(cfg, space):
    _require(isinstance(cfg, dict), "potential config must be an object")
    kind = cfg.get("kind")
    try:
        if kind == "constant":
            return builtin_constant(space, float(cfg.get("value", 0.0)))
        if kind == "ising":
            return builtin_ising(
                space,
                float(cfg.get("coupling", 1.0)),
                float(cfg.get("external_field", 0.0)),
            )
        if kind == "xy":
            return builtin_xy(space, float(cfg.get("coupling", 1.0)))
        if kind == "renewal":
            _require("payoffs" in cfg, "renewal potential needs 'payoffs'")
            tail = cfg.get("tail", "constant")
            if isinstance(tail, dict):
                tail = RenewalTail(
                    float(tail.get("limit", 0.0)), float(tail.get("bound", 0.0))
                )
            g = builtin_renewal(space, np.asarray(cfg["payoffs"], dtype=float), tail)
            return truncate(g, g.depth)
        if kind == "table":
            _require("values" in cfg, "table potential needs 'values'")
            return Potential(
                space,
                int(cfg.get("depth", 1)),
                np.asarray(cfg["values"], dtype=float),
                float(cfg.get("var_bound", 0.0)),
            )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad potential config: {exc}") from exc
    raise ConfigError(f"unknown potential kind {kind!r}")


def _merged_params(cfg, args):
    params = dict(DEFAULTS)
    for key in params:
        if key in cfg:
            params[key] = cfg[key]
    for key in ("beta", "depth", "tol", "max_iters", "n_max", "threads", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if "cylinder_cap" in cfg:
        set_cylinder_cap(int(cfg["cylinder_cap"]))
    try:
        params["beta"] = float(params["beta"])
        params["tol"] = float(params["tol"])
        params["max_iters"] = int(params["max_iters"])
        params["n_max"] = int(params["n_max"])
        params["threads"] = int(params["threads"])
        params["seed"] = int(params["seed"])
        if params["depth"] is not None:
            params["depth"] = int(params["depth"])
        grid = params["grid"]
        _require(isinstance(grid, dict), "'grid' must be an object")
        params["grid"] = {
            "start": float(grid.get("start", 0.0)),
            "stop": float(grid.get("stop", 2.0)),
            "count": int(grid.get("count", 101)),
        }
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad parameter value: {exc}") from exc
    _require(params["tol"] > 0, "'tol' must be positive")
    _require(params["max_iters"] >= 1, "'max_iters' must be at least 1")
    _require(params["n_max"] >= 1, "'n_max' must be at least 1")
    _require(params["grid"]["count"] >= 2, "grid needs at least two points")
    return params


def assemble(cfg, args):
    _require("space" in cfg, "config needs a 'space' entry")
    _require("potential" in cfg, "config needs a 'potential' entry")
    space = build_space(cfg["space"])
    f = build_potential(cfg["potential"], space)
    params = _merged_params(cfg, args)
    if params["depth"] is None:
        params["depth"] = max(f.depth - 1, 1)
    _require(params["depth"] >= 1, "'depth' must be at least 1")
    return space, f, params


def _word_label(idx, size, depth):
    return ".".join(str(s) for s in index_word(idx, size, depth))


def _digits(fmt):
    return MACHINE_DIGITS if fmt == "csv" else HUMAN_DIGITS


def _cell(v, digits):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format_float(v, digits)
    return str(v)


def _table_lines(header, rows, fmt):
    digits = _digits(fmt)
    cells = [[_cell(v, digits) for v in row] for row in rows]
    if fmt == "csv":
        return [",".join(header)] + [",".join(row) for row in cells]
    widths = [
        max(len(h), max((len(r[i]) for r in cells), default=0))
        for i, h in enumerate(header)
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.extend(
        "  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() for row in cells
    )
    return lines


def _scalar_lines(pairs, fmt):
    digits = _digits(fmt)
    if fmt == "csv":
        return [f"# {k} {_cell(v, MACHINE_DIGITS)}" for k, v in pairs]
    width = max(len(k) for k, _ in pairs)
    return [f"{k.ljust(width)}  {_cell(v, digits)}" for k, v in pairs]


def _header_lines(command, cfg, params):
    pot = json.dumps(cfg["potential"], sort_keys=True)
    spc = json.dumps(cfg["space"], sort_keys=True)
    return [
        f"# ruelleop {__version__} {command}",
        f"# backend {BACKEND}",
        f"# space {spc}",
        f"# potential {pot}",
        "# params beta={!r} depth={} tol={!r} max_iters={}".format(
            params["beta"],
            params["depth"],
            params["tol"],
            params["max_iters"],
        ),
    ]


def _scaled(f, params):
    beta = params["beta"]
    return f if beta == 1.0 else scale(f, beta)


def cmd_pressure(cfg, f, params, fmt):
    g = _scaled(f, params)
    est = pressure_bracket(g, params["depth"], params["n_max"])
    lines = _header_lines("pressure", cfg, params)
    rows = [
        (n + 1, float(est.p_inf[n]), float(est.p_sup[n]), float(est.p_sup[n] - est.p_inf[n]))
        for n in range(est.n_max)
    ]
    lines += _table_lines(("n", "p_inf", "p_sup", "width"), rows, fmt)
    lines += _scalar_lines(
        [
            ("estimate", est.estimate),
            ("width", est.width),
            ("trunc_bound", est.trunc_bound),
        ],
        fmt,
    )
    return lines


def _spectral_scalars(sd):
    return [
        ("lam", sd.lam),
        ("pressure", float(np.log(sd.lam))),
        ("converged", bool(sd.converged)),
        ("iterations", sd.iterations),
        ("residual_right", sd.residual_right),
        ("residual_left", sd.residual_left),
        ("mass_dev", sd.mass_dev),
        ("hnu_dev", sd.hnu_dev),
        ("work_depth", sd.work_depth),
        ("out_depth", sd.nu.depth),
        ("trunc_bound", sd.trunc_bound),
    ]


def cmd_spectral(cfg, f, params, fmt):
    g = _scaled(f, params)
    sd = perron_eigendata(g, params["depth"], params["tol"], params["max_iters"])
    lines = _header_lines("spectral", cfg, params)
    lines += _scalar_lines(_spectral_scalars(sd), fmt)
    n = g.space.size
    rows = [
        (_word_label(i, n, sd.nu.depth), float(sd.nu.weights[i]), float(sd.h.values[i]))
        for i in range(len(sd.nu.weights))
    ]
    lines += _table_lines((WORD_COL, "nu", "h"), rows, fmt)
    return lines


def cmd_equilibrium(cfg, f, params, fmt):
    g = _scaled(f, params)
    sd = perron_eigendata(g, params["depth"], params["tol"], params["max_iters"])
    mu = extend_equilibrium(sd, g, params["depth"])
    inv = check_invariance(equilibrium_measure(sd), g, sd.lam, sd.nu)
    lines = _header_lines("equilibrium", cfg, params)
    lines += _scalar_lines(
        _spectral_scalars(sd)
        + [
            ("invariance_residual", inv),
            ("invariance_defect", invariance_defect(mu)),
            ("mu_mass_dev", mu.mass_dev),
            ("mu_depth", mu.depth),
        ],
        fmt,
    )
    n = g.space.size
    rows = [
        (_word_label(i, n, mu.depth), float(mu.weights[i]))
        for i in range(len(mu.weights))
    ]
    lines += _table_lines((WORD_COL, "mu"), rows, fmt)
    return lines


def cmd_entropy(cfg, f, params, fmt):
    g = _scaled(f, params)
    sd = perron_eigendata(g, params["depth"], params["tol"], params["max_iters"])
    n_max = params["n_max"]
    mu = extend_equilibrium(sd, g, n_max + 1)
    rep = variational_gap(mu, g, sd, n_max)
    lines = _header_lines("entropy", cfg, params)
    lines += _scalar_lines(
        [
            ("lam", sd.lam),
            ("pressure", float(np.log(sd.lam))),
            ("integral", rep.integral),
            ("integral_err", rep.integral_err),
            ("invariance_defect", rep.flags["invariance_defect"]),
            ("gap", rep.gap),
        ],
        fmt,
    )
    rows = [
        (
            int(rep.n[j]),
            float(rep.H[j]),
            float(rep.entropy_rate[j]) if j < len(rep.entropy_rate) else float("nan"),
            float(rep.gaps[j]) if j < len(rep.gaps) else float("nan"),
        )
        for j in range(len(rep.n))
    ]
    lines += _table_lines(("n", "H", "rate", "gap"), rows, fmt)
    return lines


def cmd_scan(cfg, f, params, fmt):
    grid = params["grid"]
    betas = np.linspace(grid["start"], grid["stop"], grid["count"])
    curve = pressure_curve(
        f,
        betas,
        params["depth"],
        tol=params["tol"],
        max_iters=params["max_iters"],
        threads=params["threads"],
    )
    lines = _header_lines("scan", cfg, params)
    lines += _scalar_lines(
        [
            ("grid_start", grid["start"]),
            ("grid_stop", grid["stop"]),
            ("grid_count", grid["count"]),
            ("threads", params["threads"]),
            ("noise_floor", float(curve.noise_floor[1])),
            ("n_flagged", int(curve.kink_flags.sum())),
            ("n_nonconverged", int(np.sum(~curve.converged))),
        ],
        fmt,
    )
    rows = [
        (
            float(curve.betas[i]),
            float(curve.lams[i]),
            float(curve.pressures[i]),
            float(curve.mismatch[i]),
            bool(curve.kink_flags[i]),
            bool(curve.converged[i]),
            int(curve.iterations[i]),
        )
        for i in range(len(betas))
    ]
    lines += _table_lines(
        ("beta", "lam", "pressure", "mismatch", "kink", "converged", "iterations"),
        rows,
        fmt,
    )
    digits = _digits(fmt)
    lines += [
        f"# candidate {format_float(beta, digits)} {reason}"
        for beta, reason in curve.candidates
    ]
    return lines


def _verify_checks(f, params):
    """Run the internal consistency checklist; yield (name, ok, value, bound)."""
    tol = params["tol"]
    res_tol = max(100.0 * tol, 1e-12)
    checks = []

    sd = perron_eigendata(f, params["depth"], tol, params["max_iters"])
    checks.append(("power-iteration-converged", bool(sd.converged), float(sd.iterations), float(params["max_iters"])))
    checks.append(("residual-right", sd.residual_right <= res_tol, sd.residual_right, res_tol))
    checks.append(("residual-left", sd.residual_left <= res_tol, sd.residual_left, res_tol))
    checks.append(("mass-normalized", sd.mass_dev <= 1e-10, sd.mass_dev, 1e-10))
    checks.append(("pairing-normalized", sd.hnu_dev <= 1e-10, sd.hnu_dev, 1e-10))

    sup = f.sup_norm
    lo, hi = float(np.exp(-sup)), float(np.exp(sup))
    slack = 1e-12 * max(1.0, hi)
    in_band = (lo - slack <= sd.lam <= hi + slack)
    checks.append(("eigenvalue-band", in_band, sd.lam, hi))

    est = pressure_bracket(f, params["depth"], params["n_max"])
    p = float(np.log(sd.lam))
    pad = 1e-10 * max(1.0, abs(p))
    bracketed = (est.p_inf[-1] - pad <= p <= est.p_sup[-1] + pad)
    checks.append(("bracket-contains-pressure", bracketed, p, float(est.p_sup[-1])))

    adj = check_eigenmeasure(f, sd.lam, sd.nu, sd.nu.depth)
    checks.append(("eigenmeasure-fixed-point", adj <= res_tol, adj, res_tol))

    try:
        nu_ext = extend_eigenmeasure(f, sd.lam, sd.nu)
        checks.append(("extension-mass", nu_ext.mass_dev <= 1e-10, nu_ext.mass_dev, 1e-10))
    except NumericError:
        # the extension refused outright; that is a failed check, not a crash
        nu_ext = None
        checks.append(("extension-mass", False, float("nan"), 1e-10))

    eq_tol = max(1e-8, 100.0 * tol)
    try:
        mu = equilibrium_measure(sd, residual_tol=eq_tol)
    except NumericError:
        mu = None
    worst_res = max(sd.residual_right, sd.residual_left)
    checks.append(("equilibrium-accepted", mu is not None, worst_res, eq_tol))
    if mu is None:
        return checks, sd

    inv = check_invariance(mu, f, sd.lam, sd.nu)
    checks.append(("equilibrium-invariance", inv <= res_tol, inv, res_tol))

    h = sd.h.values
    if float(np.ptp(h)) <= 1e-8 * float(np.max(np.abs(h))):
        # constant eigenfunction: the eigenmeasure IS invariant, no control
        checks.append(("negative-control-eigenmeasure", True, 0.0, 0.0))
    else:
        bad = check_invariance(sd.nu, f, sd.lam, sd.nu)
        checks.append(("negative-control-eigenmeasure", bad > 1e-3, bad, 1e-3))

    rng = np.random.default_rng(params["seed"])
    seen = 0.0
    for _ in range(3):
        noise = 1.0 + 0.5 * rng.uniform(-1.0, 1.0, size=len(mu.weights))
        w = mu.weights * noise
        pert = CylinderMeasure(mu.space, mu.depth, w / w.sum())
        seen = max(seen, check_invariance(pert, f, sd.lam, sd.nu))
        if seen > 1e-3:
            break
    checks.append(("negative-control-perturbed", seen > 1e-3, seen, 1e-3))

    if nu_ext is not None:
        # words one level shallower than the stored measure, per the check
        worst = 0.0
        n_words = f.space.size ** (nu_ext.depth - 1)
        for i in range(min(n_words, 16)):
            word = tuple(index_word(i, f.space.size, nu_ext.depth - 1))
            worst = max(worst, check_intertwine(f, sd.lam, nu_ext, word))
        checks.append(("adjoint-intertwine", worst <= res_tol, worst, res_tol))

    try:
        n_gap = max(f.depth, 2)
        mu_deep = extend_equilibrium(sd, f, n_gap + 1)
        rep = variational_gap(mu_deep, f, sd, n_gap)
        gap_tol = max(1e-8, 1e4 * tol)
        checks.append(("variational-gap", abs(rep.gap) <= gap_tol, rep.gap, gap_tol))
    except NumericError:
        checks.append(("variational-gap", False, float("nan"), max(1e-8, 1e4 * tol)))
    return checks, sd


def cmd_verify(cfg, f, params, fmt):
    g = _scaled(f, params)
    checks, _ = _verify_checks(g, params)
    lines = _header_lines("verify", cfg, params)
    width = max(len(name) for name, _, _, _ in checks)
    for name, ok, value, bound in checks:
        status = "ok  " if ok else "FAIL"
        lines.append(
            f"{status} {name.ljust(width)}  value={format_float(value, HUMAN_DIGITS)}"
            f" bound={format_float(bound, HUMAN_DIGITS)}"
        )
    n_fail = sum(1 for _, ok, _, _ in checks if not ok)
    lines.append(f"# {len(checks) - n_fail} of {len(checks)} checks passed")
    return lines, n_fail == 0


def make_parser():
    parser = argparse.ArgumentParser(
        prog="ruelleop",
        description="transfer operator diagnostics on cylinder discretizations",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON config file")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("report", "csv"), default="report")
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--depth", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    parser.add_argument("--n-max", dest="n_max", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    return parser


def run(args):
    cfg = load_config(args.config)
    _, f, params = assemble(cfg, args)
    ok = True
    if args.command == "pressure":
        lines = cmd_pressure(cfg, f, params, args.format)
    elif args.command == "spectral":
        lines = cmd_spectral(cfg, f, params, args.format)
    elif args.command == "equilibrium":
        lines = cmd_equilibrium(cfg, f, params, args.format)
    elif args.command == "entropy":
        lines = cmd_entropy(cfg, f, params, args.format)
    elif args.command == "scan":
        lines = cmd_scan(cfg, f, params, args.format)
    else:
        lines, ok = cmd_verify(cfg, f, params, args.format)
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main(argv=sys.argv[1:]))
