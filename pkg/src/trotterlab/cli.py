"""Command line entry point: ``trotterlab <subcommand> [flags]``.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bounds as B
from .errors import ConfigError, NumericalError, TrotterLabError
from .experiments import (ExperimentConfig, build_model, build_state, detect_crossover, emit_results,
                          fit_rate, pre_crossover_window, read_curve, render, run_experiment,
                          truncation_check)
from .matcore import HermitianOperator, StateVector
from .models import fourier_decay_state, torus_laplacian
from .regularity import EnergyBudget, favard_probe, enorm_bruteforce, operator_E_norm

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors, so exit 1 rather than argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="experiment config (JSON)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel jobs over n values")
    return p


def _load_config(args, required=True):
    if not args.config:
        if required:
            raise ConfigError([("--config", "required for this subcommand")])
        return None
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        d = cfg.to_dict()
        d["seed"] = args.seed
        cfg = ExperimentConfig.from_dict(d, cfg.base_dir)
    return cfg


def _emit(obj, fmt, out):
    if out:
        emit_results(obj, fmt, out)
    else:
        sys.stdout.write(render(obj, fmt))


def cmd_sweep(args):
    cfg = _load_config(args)
    fmt = args.format or "csv"
    res = run_experiment(cfg, jobs=args.jobs)
    out = args.out or cfg.output
    if isinstance(res, list) and fmt == "csv":
        stem, ext = os.path.splitext(out) if out else (None, ".csv")
        for i, c in enumerate(res):
            if out:
                emit_results(c, "csv", f"{stem}_t{i}{ext or '.csv'}")
            else:
                sys.stdout.write(f"# t = {c.t!r}\n" + render(c, "csv"))
    else:
        _emit(res, fmt, out)
    return EXIT_OK


def cmd_fit(args):
    if args.curve:
        try:
            curve = read_curve(args.curve)
        except (OSError, ValueError) as exc:
            raise ConfigError([("--curve", str(exc))]) from exc
        window = args.window
    else:
        cfg = _load_config(args)
        curve = run_experiment(cfg, jobs=args.jobs)
        if isinstance(curve, list):
            curve = curve[0]
        window = args.window or cfg.fit_window
    if args.pre_crossover:
        window = pre_crossover_window(curve.ns)
    fit = fit_rate(curve, window)
    if args.sliding:
        cross, fits = detect_crossover(curve)
        doc = {"fit": fit.to_dict(), "crossover_n": cross, "sliding": [f.to_dict() for f in fits]}
        _emit(doc, "json", args.out)
    else:
        _emit(fit, "json", args.out)
    return EXIT_OK


def cmd_truncation(args):
    cfg = _load_config(args)
    rep = truncation_check(cfg, args.truncations, jobs=args.jobs)
    _emit(rep, "json", args.out)
    return EXIT_OK


def _parse_value(s):
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


_FORMULAS = {
    "perturbative_constants": ("a", "b", "a_prime", "b_prime"),
    "perturbative_bound": ("a", "b", "a_prime", "b_prime", "t", "n", "norm_x", "norm_Ax", "norm_A2x"),
    "favard_exponent": ("alpha", "beta", "gamma", "mode?"),
    "graph_norm_exponent": ("alpha", "beta", "eps?"),
    "coulomb_rate": ("a", "d", "gamma", "beta"),
    "many_body_rate": ("eps",),
    "schrodinger_constants": ("V2_sup", "V1_at_0"),
    "schrodinger_bound": ("nu", "gamma", "t", "n", "normNpsi"),
    "oscillator_bound": ("t", "n", "normNpsi"),
    "energy_limited_bound": ("t", "n", "M", "E", "E0", "omega", "E1", "energy_preserving?"),
    "dirac_constants": ("B0", "eps"),
}


def evaluate_formula(name, params):
    """Evaluate a bounds formula from a dict of named parameters, always as a BoundReport."""
    if name not in _FORMULAS:
        raise ConfigError([("formula", f"unknown formula {name!r}; choose from {sorted(_FORMULAS)}")])
    sig = _FORMULAS[name]
    need = [p for p in sig if not p.endswith("?")]
    allowed = {p.rstrip("?") for p in sig}
    problems = [(k, "missing parameter") for k in need if k not in params]
    problems += [(k, "unknown parameter") for k in sorted(set(params) - allowed)]
    if problems:
        raise ConfigError(problems)
    p = dict(params)
    if name == "perturbative_constants":
        c0, c1, c2 = B.perturbative_constants(p["a"], p["b"], p["a_prime"], p["b_prime"])
        return B.BoundReport(name, c2, dict(p, c0=c0, c1=c1, c2=c2))
    if name == "perturbative_bound":
        return B.perturbative_bound(p["a"], p["b"], p["a_prime"], p["b_prime"], p["t"], p["n"],
                                    p["norm_x"], p["norm_Ax"], p["norm_A2x"])
    if name == "schrodinger_constants":
        c = B.schrodinger_constants(p["V2_sup"], p["V1_at_0"])
        return B.BoundReport(name, c["nu"], dict(p, **c))
    if name == "dirac_constants":
        c = B.dirac_constants(p["B0"], p["eps"])
        return B.BoundReport(name, c["M"], dict(p, **c))
    if name == "energy_limited_bound":
        budget = EnergyBudget(p.pop("E"), p.pop("E0"), p.pop("omega"))
        return B.energy_limited_bound(p["t"], p["n"], p["M"], budget, p["E1"],
                                      bool(p.get("energy_preserving", False)))
    return getattr(B, name)(**p)


def cmd_bounds(args):
    params = {}
    for item in args.params:
        if "=" not in item:
            raise ConfigError([(item, "expected key=value")])
        k, v = item.split("=", 1)
        params[k] = _parse_value(v)
    _emit(evaluate_formula(args.formula, params), "json", args.out)
    return EXIT_OK


def _load_matrix(path, what):
    try:
        return np.asarray(np.load(path), dtype=np.complex128)
    except (OSError, ValueError) as exc:
        raise ConfigError([(what, f"cannot load {path}: {exc}")]) from exc


def cmd_enorm(args):
    A = _load_matrix(args.A, "--A")
    Gm = _load_matrix(args.G, "--G")
    try:
        G = HermitianOperator.from_upper(Gm)
        budget = EnergyBudget(args.E, G=G)
    except ValueError as exc:
        raise ConfigError([("--G", str(exc))]) from exc
    val, lam = operator_E_norm(A, budget, return_lambda=True)
    inputs = {"E": args.E, "lambda": lam, "dim": int(G.dim)}
    if args.bruteforce:
        seed = 0 if args.seed is None else args.seed
        inputs["bruteforce"] = enorm_bruteforce(A, budget, args.samples, seed=seed)
    _emit(B.BoundReport("operator_E_norm", val, inputs), "json", args.out)
    return EXIT_OK


def cmd_probe(args):
    if args.config:
        cfg = _load_config(args)
        model = build_model(cfg)
        K = model.H_A
        psi = build_state(cfg, model)
    else:
        if args.M is None or args.s is None:
            raise ConfigError([("--M/--s", "give --config or both --M and --s")])
        K = torus_laplacian(args.M)
        psi = StateVector(fourier_decay_state(args.M, args.s))
    est = favard_probe(K, psi, tuple(args.t_window) if args.t_window else None, args.grid, args.r)
    rep = B.BoundReport("favard_probe", est.fitted_slope,
                        {"r": est.r, "seminorm": est.seminorm, "t_window": list(est.t_window),
                         "grid_size": est.grid_size}, est.sane,
                        "" if est.sane else "fitted slope outside the sanity band [-0.5, 1.5]")
    _emit(rep, "json", args.out)
    return EXIT_OK


def build_parser():
    common = _common()
    p = _Parser(prog="trotterlab", description="Trotter product error experiments")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sweep", parents=[common], help="run an error sweep and write the curve")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", parents=[common], help="fit a log-log rate to a curve")
    s.add_argument("--curve", help="CSV/JSON curve written by sweep (instead of --config)")
    s.add_argument("--window", type=float, nargs=2, metavar=("N_LO", "N_HI"))
    s.add_argument("--pre-crossover", action="store_true", help="fit over the lowest decade of n")
    s.add_argument("--sliding", action="store_true", help="also report sliding-window slopes and crossover")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("truncation-check", parents=[common], help="compare sweeps across truncations")
    s.add_argument("--truncations", type=int, nargs="+", required=True)
    s.set_defaults(func=cmd_truncation)

    s = sub.add_parser("bounds", parents=[common], help="evaluate a closed-form bound or constant")
    s.add_argument("formula", choices=sorted(_FORMULAS))
    s.add_argument("params", nargs="*", metavar="KEY=VALUE")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("enorm", parents=[common], help="energy-constrained operator norm of A")
    s.add_argument("--A", required=True, help=".npy matrix A")
    s.add_argument("--G", required=True, help=".npy reference Hamiltonian G (PSD)")
    s.add_argument("--E", type=float, required=True)
    s.add_argument("--bruteforce", action="store_true", help="also run the sampling oracle")
    s.add_argument("--samples", type=int, default=100_000)
    s.set_defaults(func=cmd_enorm)

    s = sub.add_parser("probe", parents=[common], help="Favard probe of a state under the kinetic generator")
    s.add_argument("--M", type=int)
    s.add_argument("--s", type=float, help="coefficient decay |n|^-s")
    s.add_argument("--t-window", type=float, nargs=2, metavar=("T_MIN", "T_MAX"))
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--r", type=float, default=None)
    s.set_defaults(func=cmd_probe)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TrotterLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
