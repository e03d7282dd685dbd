"""Command-line entry point.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from .collision import DEFAULT_RESOLUTION, ElasticHardSphere, Resolution
from .errors import AerokinError, ExtrapolationError, NonConvergenceError, QuadratureError, \
    ValidationError
from .hypotheses import (check_H1, check_H2, check_H3, check_H4_rate, check_H5,
                         h4_default_sequence)
from .io import write_csv, write_field, write_manifest
from .limits import (deflection_limit, deflection_sequence, friction_flux_limit, friction_limit,
                     kappa)
from .distributions import GaussianMixture, HydrodynamicFluctuation
from .gas import viscosity
from .scaling import ScalingTriple, admissible_sequence, nondimensionalize, power_sequence
from .simulation import DIAGNOSTIC_FIELDS, SimConfig, run

log = logging.getLogger("aerokin")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI file of [section] key = value lines")
    common.add_argument("--out", default=None, help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (default 0)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")
    common.add_argument("--model", choices=cfgmod.MODEL_NAMES, default=None)
    common.add_argument("--log-level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = _Parser(prog="aerokin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sub.add_parser("nondim", parents=[common], help="scaled parameters of a physical setup")

    p = sub.add_parser("coeffs", parents=[common], help="friction kappa and viscosity nu")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)

    p = sub.add_parser("verify-hypotheses", parents=[common], help="numerical H1-H5 checks")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--checks", default=None, help="comma list from H1,H2,H3,H4,H5 (default all)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)

    p = sub.add_parser("verify-limits", parents=[common], help="operator limit curves")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--limit", choices=("deflection", "friction", "flux"), default=None)
    p.add_argument("--sequence", default=None,
                   help="'default', 'powers:a,b,c[:nmin-nmax]' for (mu, eps, eta) = n^-(a, b, c), "
                        "or 'triples:eps,eta,mu;eps,eta,mu;...'")

    p = sub.add_parser("simulate", parents=[common], help="run the particle-Stokes solver")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    return parser


def parse_sequence(text: str | None, default):
    """Sequence grammar; returns (indices, triples)."""
    if text is None or text.strip() == "default":
        seq = default()
        return list(range(1, len(seq) + 1)), seq
    kind, _, body = text.partition(":")
    if kind == "powers":
        exps, _, span = body.partition(":")
        try:
            a, b, c = (float(x) for x in exps.split(","))
            n_min, n_max = (int(x) for x in span.split("-")) if span else (2, 6)
        except ValueError:
            raise ValidationError(f"malformed --sequence {text!r}") from None
        seq = power_sequence(a, b, c, n_min, n_max)
        return list(range(n_min, n_max + 1)), seq
    if kind == "triples":
        try:
            seq = [ScalingTriple(*(float(x) for x in part.split(",")))
                   for part in body.split(";") if part.strip()]
        except (TypeError, ValueError):
            raise ValidationError(f"malformed --sequence {text!r}") from None
        return list(range(1, len(seq) + 1)), seq
    raise ValidationError(f"unknown --sequence form {text!r}")


def _setting(cli_value, cfg, section, key, kind, default):
    return cli_value if cli_value is not None else cfg.get(section, key, kind, default)


def cmd_nondim(args, cfg, out: Path) -> None:
    system = nondimensionalize(cfgmod.physical_setup(cfg))
    t = system.triple
    rows = [("epsilon", t.epsilon), ("eta", t.eta), ("mu", t.mu),
            ("inv_eta", system.inv_eta), ("inv_mu", system.inv_mu),
            ("mu_over_eps2", system.mu_over_eps2), ("diluteness", system.diluteness),
            ("eta_over_eps2", t.eta_over_eps2), ("eps_over_mu2", t.eps_over_mu2),
            ("within_limit_constraints", t.within_limit_constraints)]
    write_csv(out / "nondim.csv", ("quantity", "value"), rows)


def cmd_coeffs(args, cfg, out: Path) -> None:
    model = cfgmod.build_model(cfg, args.model, args.beta)
    gas = cfgmod.build_gas(cfg, args.alpha)
    mom = model.moments()
    rows = [("model", model.name), ("kappa", kappa(mom)), ("nu", viscosity(gas)),
            ("Q0", float(mom.Q(0.0)))]
    if hasattr(model, "beta"):
        rows.insert(1, ("beta", model.beta))
    write_csv(out / "coeffs.csv", ("quantity", "value"), rows)


def cmd_verify_hypotheses(args, cfg, out: Path, seed: int) -> None:
    model = cfgmod.build_model(cfg, args.model, args.beta)
    checks = _setting(args.checks, cfg, "hypotheses", "checks", str, "H1,H2,H3,H4,H5")
    checks = [c.strip().upper() for c in checks.split(",") if c.strip()]
    unknown = set(checks) - {"H1", "H2", "H3", "H4", "H5"}
    if unknown:
        raise ValidationError(f"unknown hypothesis check(s): {', '.join(sorted(unknown))}")
    samples = _setting(args.samples, cfg, "hypotheses", "samples", int, 50)
    s = ScalingTriple(_setting(args.epsilon, cfg, "hypotheses", "epsilon", float, 1e-2),
                      _setting(args.eta, cfg, "hypotheses", "eta", float, 1e-4), 1.0)
    grid_list = [ScalingTriple(e, h, 1.0) for e in (1e-1, 1e-2, 1e-3) for h in (1e-1, 1e-2, 1e-3)]
    reports, rates = [], []
    for check in checks:
        log.info("running %s", check)
        if check == "H1":
            reports.append(check_H1(model, s, samples, seed,
                                    tol=cfg.get("hypotheses", "tol_h1", float, 1e-6)))
        elif check == "H2":
            reports.append(check_H2(model, s, samples, seed,
                                    tol=cfg.get("hypotheses", "tol_h2", float, 1e-5)))
        elif check == "H3":
            reports.append(check_H3(model, grid_list, samples, seed,
                                    tol=cfg.get("hypotheses", "tol_h3", float, 0.2)))
        elif check == "H4":
            # Phi is quadratic in the post-collision velocity and hard spheres
            # have constant sigma, so a modest sphere rule is already exact there
            hard = isinstance(model, ElasticHardSphere)
            res = Resolution(sphere_order=17) if hard else DEFAULT_RESOLUTION
            rates.extend(check_H4_rate(model, h4_default_sequence(), res=res))
        elif check == "H5":
            reports.append(check_H5(model, grid_list,
                                    tol=cfg.get("hypotheses", "tol_h5", float, 0.2)))
    header = ("hypothesis", "model", "n_samples", "max_rel_error", "fitted_C", "tolerance", "passed")
    write_csv(out / "hypotheses.csv", header,
              [(r.hypothesis, r.model, r.n_samples, r.max_rel_error, r.fitted_C, r.tolerance,
                r.passed) for r in reports])
    if rates:
        write_csv(out / "h4_rates.csv",
                  ("test_function", "abscissa", "error", "slope", "half_width", "monotone"),
                  [(f.label, x, e, f.slope, f.half_width, f.monotone)
                   for f in rates for x, e in zip(f.abscissae, f.errors)])


def cmd_verify_limits(args, cfg, out: Path) -> None:
    model = cfgmod.build_model(cfg, args.model, args.beta)
    limit = _setting(args.limit, cfg, "limits", "limit", str, "flux")
    text = _setting(args.sequence, cfg, "limits", "sequence", str, None)
    u = cfg.get("limits", "fluctuation_velocity", "vector", (0.0, 0.0, 0.0))
    g = HydrodynamicFluctuation(0.0, u, 0.0)
    F = GaussianMixture.single(cfg.get("limits", "particle_mean", "vector", (0.0, 0.0, 0.0)),
                               cfg.get("limits", "particle_sigma", float, 1.0))
    if limit == "deflection":
        indices, seq = parse_sequence(text, deflection_sequence)
        curve = deflection_limit(F, g, seq, model)
    elif limit == "friction":
        indices, seq = parse_sequence(text, lambda: admissible_sequence(6))
        if text is None or text == "default":
            indices = list(range(2, 7))
        curve = friction_limit(F, g, seq, model)
    else:
        indices, seq = parse_sequence(text, lambda: admissible_sequence(6))
        if text is None or text == "default":
            indices = list(range(2, 7))
        curve = friction_flux_limit(F, g, seq, model, cfgmod.build_gas(cfg, args.alpha))
    write_csv(out / f"limit_{limit}.csv", ("n", "epsilon", "eta", "mu", "error"),
              [(n, s.epsilon, s.eta, s.mu, e) for n, s, e in zip(indices, curve.triples,
                                                                 curve.errors)])


def sim_config(args, cfg, seed: int, threads: int) -> SimConfig:
    model = cfgmod.build_model(cfg, args.model, args.beta)
    kap = cfg.get("simulation", "kappa", float, None)
    nu = cfg.get("simulation", "nu", float, None)
    if kap is None:
        kap = kappa(model.moments())
    if nu is None:
        nu = viscosity(cfgmod.build_gas(cfg, args.alpha))
    defaults = SimConfig.__dataclass_fields__
    values = {}
    kinds = {"grid": int, "n_particles": int, "dt": float, "t_end": float,
             "deposition_order": int, "tol": float, "max_iter": int, "output_every": int,
             "coupling": bool, "corrector": bool, "frozen_velocity": "vector", "shift": str,
             "total_weight": float, "dump_fields": bool}
    for key, kind in kinds.items():
        value = cfg.get("simulation", key, kind, None)
        if value is not None:
            values[key] = value
    base = SimConfig()
    return SimConfig(kappa=kap, nu=nu, seed=seed, threads=threads,
                     position=cfgmod.mixture(cfg, "position", base.position),
                     velocity=cfgmod.mixture(cfg, "velocity", base.velocity),
                     **{k: v for k, v in values.items() if k in defaults})


def cmd_simulate(args, cfg, out: Path, seed: int, threads: int) -> None:
    config = sim_config(args, cfg, seed, threads)
    rows = []

    def on_output(state, row):
        rows.append(row)
        if config.dump_fields:
            write_field(out / f"field_{state.step:06d}.bin", state.fluid.velocity)

    try:
        run(config, out_dir=out, on_output=on_output)
    finally:
        # diagnostics up to the failure are still useful
        write_csv(out / "diagnostics.csv", DIAGNOSTIC_FIELDS, rows)


def parse_and_dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().rstrip())
        cfg = cfgmod.RunConfig.load(args.config)
        level = args.log_level or cfg.get("run", "log_level", str, "WARNING")
        logging.basicConfig(level=getattr(logging, str(level).upper(), logging.WARNING),
                            format="%(levelname)s %(name)s: %(message)s")
        seed = args.seed if args.seed is not None else cfg.get("run", "seed", int, 0)
        if not 0 <= seed < 2 ** 64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        threads = args.threads if args.threads is not None else cfg.get("run", "threads", int, 1)
        if threads < 1:
            raise ValidationError("threads must be at least 1")
        out = Path(args.out or cfg.get("run", "out", str, "."))
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(out, args.command, argv, seed, cfg.echo(),
                       {"threads": threads, "model": args.model})
        if args.command == "nondim":
            cmd_nondim(args, cfg, out)
        elif args.command == "coeffs":
            cmd_coeffs(args, cfg, out)
        elif args.command == "verify-hypotheses":
            cmd_verify_hypotheses(args, cfg, out, seed)
        elif args.command == "verify-limits":
            cmd_verify_limits(args, cfg, out)
        elif args.command == "simulate":
            cmd_simulate(args, cfg, out, seed, threads)
    except UsageError as exc:
        print(parser.format_usage() if "usage" not in str(exc) else "", end="", file=sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ExtrapolationError) as exc:
        print(f"aerokin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergenceError, QuadratureError) as exc:
        print(f"aerokin: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AerokinError as exc:
        print(f"aerokin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"aerokin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
