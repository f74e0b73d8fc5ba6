"""Command-line entry point: verify / eval / holonomy.

All I/O is JSON; rationals travel as "p/q" strings.  Reports from `verify`
are byte-deterministic across runs unless --timings is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import actions, cartan, suites
from .algebra import invariant_form
from .calculus import load_fields
from .cartan import CartanConnection


def _frac(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cartanforms",
        description="Exact verification of symmetric-space gravity actions")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run verification suites")
    p_verify.add_argument("--config", help="suite config JSON file")
    p_verify.add_argument("--seeds", help="seed range a..b (overrides config)")
    p_verify.add_argument("--out", help="report output path")
    p_verify.add_argument("--timings", action="store_true",
                          help="include wall_time_ms (breaks byte determinism)")

    p_eval = sub.add_parser("eval", help="evaluate an action on stored fields")
    p_eval.add_argument("--fields", required=True, help="field file (JSON)")
    p_eval.add_argument("--action", required=True,
                        choices=["cs", "palatini", "cs_omega_torsion", "tmg", "mm"])
    p_eval.add_argument("--c0", type=_frac, default=Fraction(1))
    p_eval.add_argument("--c1", type=_frac, default=Fraction(0))
    p_eval.add_argument("--mu", type=_frac)
    p_eval.add_argument("--gamma", type=_frac)
    p_eval.add_argument("--grid", type=_positive_int, default=32)
    p_eval.add_argument("--out", help="optional JSON output path")

    p_hol = sub.add_parser("holonomy", help="transport along a stored path")
    p_hol.add_argument("--model", required=True,
                       help="sphere | sphere_rolling | zero | mc_<algebra>")
    p_hol.add_argument("--path", required=True, help="path spec (JSON)")
    p_hol.add_argument("--steps", type=_positive_int, required=True)
    return parser


def _cmd_verify(args):
    cfg = suites.load_config(args.config) if args.config else suites.default_config()
    if args.seeds:
        lo, _, hi = args.seeds.partition("..")
        cfg.seed_start, cfg.seed_end = int(lo), int(hi or lo)
    if args.out:
        cfg.out = args.out
    try:
        results, ok = suites.run_suite(cfg)
    except suites.SuiteConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = suites.emit_report(results, cfg, timings=args.timings)
    if cfg.out:
        path = suites.write_report(text, cfg.out)
        print(f"report written to {path}")
    else:
        print(text, end="")
    if not ok:
        for r in results:
            if not r.passed:
                print(f"FAILED: {r.inputs_digest} residual={r.residual}",
                      file=sys.stderr)
        return 1
    return 0


def _eval_action(args, alg, forms):
    name = args.action
    if name == "cs":
        if "A" not in forms:
            raise KeyError("action cs needs a form named 'A'")
        form = invariant_form(alg, args.c0, args.c1)
        return actions.cs_action(forms["A"], form)
    if name in ("palatini", "cs_omega_torsion", "mm"):
        missing = [k for k in ("omega", "e") if k not in forms]
        if missing:
            raise KeyError(f"action {name} needs forms named 'omega' and 'e'")
        omega, e = forms["omega"], forms["e"]
        if name == "palatini":
            return actions.palatini_action(omega, e)
        if name == "cs_omega_torsion":
            return actions.cs_omega_torsion_action(omega, e)
        c0, c1 = args.c0, args.c1
        if args.gamma is not None:
            c0, c1 = Fraction(1), 1 / Fraction(args.gamma)
        form_h = invariant_form(alg, c0, c1)
        return actions.mm_action(CartanConnection(omega, e), form_h)
    # tmg
    if "e" not in forms:
        raise KeyError("action tmg needs a form named 'e'")
    if args.mu is None:
        raise KeyError("action tmg needs --mu")
    return actions.tmg_action(forms["e"], args.mu, grid=args.grid)


def _cmd_eval(args):
    try:
        alg, forms = load_fields(args.fields)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read field file: {exc}", file=sys.stderr)
        return 2
    try:
        value = _eval_action(args, alg, forms)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = {
        "action": args.action,
        "algebra": alg.name,
        "torus_dim": value.torus_dim,
        "mode": value.mode,
        "exact": None if value.exact is None else str(value.exact),
        "numeric": value.numeric,
        "quadrature_grid": value.quadrature_grid,
        "units": f"(2pi)^{value.torus_dim}",
    }
    print(value.render())
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        path = suites.write_report(text, args.out)
        print(f"written to {path}")
    else:
        print(text, end="")
    return 0


def _cmd_holonomy(args):
    try:
        model = cartan.get_model(args.model)
        path = cartan.load_path(args.path)
        result = cartan.holonomy(model, path, args.steps)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    with np.printoptions(formatter={"float_kind": lambda v: f"{v:.12g}"}):
        print(result.matrix)
    print(f"steps: {result.steps}")
    print(f"group drift: {result.drift:.3e}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "eval":
        return _cmd_eval(args)
    return _cmd_holonomy(args)


if __name__ == "__main__":
    sys.exit(main())
