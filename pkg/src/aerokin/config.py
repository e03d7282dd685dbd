"""Run configuration: INI sections of key = value lines.

Recognised sections and keys are listed in SCHEMA; anything else is rejected
with a message naming the offending section and key.
"""

from __future__ import annotations

import configparser
import csv
from pathlib import Path

import numpy as np

from .collision import ElasticCutoff, ElasticHardSphere, InelasticDiffuse, SigmaTable
from .distributions import GaussianMixture
from .errors import ValidationError
from .gas import GasModel
from .scaling import PhysicalSetup

MODEL_NAMES = ("elastic-hard-sphere", "elastic-cutoff", "inelastic-diffuse")

SCHEMA = {
    "run": {"seed", "threads", "model", "out", "log_level"},
    "setup": set(PhysicalSetup.__dataclass_fields__),
    "model": {"name", "beta", "sigma", "b_star", "beta_star", "mu_nodes",
              "sigma_mu_nodes", "sigma_tables"},
    "gas": {"alpha", "alpha_table", "extrapolate"},
    "hypotheses": {"checks", "samples", "epsilon", "eta", "tol_h1", "tol_h2", "tol_h3", "tol_h5"},
    "limits": {"limit", "sequence", "fluctuation_velocity", "particle_mean", "particle_sigma"},
    "simulation": {"grid", "n_particles", "dt", "t_end", "kappa", "nu", "deposition_order",
                   "tol", "max_iter", "output_every", "coupling", "corrector",
                   "frozen_velocity", "shift", "total_weight", "dump_fields"},
    "particles": {"position_weights", "position_means", "position_sigmas",
                  "velocity_weights", "velocity_means", "velocity_sigmas"},
}


class RunConfig:
    """Validated view of a configuration file."""

    def __init__(self, parser: configparser.ConfigParser | None = None, base_dir: Path | None = None):
        self.parser = parser or _new_parser()
        self.base_dir = base_dir or Path.cwd()
        for section in self.parser.sections():
            if section not in SCHEMA:
                raise ValidationError(f"unknown config section [{section}]")
            for key in self.parser[section]:
                if key not in SCHEMA[section]:
                    raise ValidationError(f"unknown config key [{section}] {key}")

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        parser = _new_parser()
        if path is None:
            return cls(parser)
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"config file not found: {path}")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ValidationError(f"malformed config {path}: {exc}") from None
        return cls(parser, path.parent)

    def section(self, name: str) -> dict:
        return dict(self.parser[name]) if self.parser.has_section(name) else {}

    def echo(self) -> dict:
        return {name: self.section(name) for name in self.parser.sections()}

    def get(self, section: str, key: str, kind=str, default=None):
        raw = self.section(section).get(key)
        if raw is None:
            return default
        return convert(raw, kind, f"[{section}] {key}")

    def resolve(self, value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    return parser


def convert(raw: str, kind, where: str):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "vector":
            vals = tuple(float(x) for x in raw.split(","))
            if len(vals) != 3:
                raise ValueError(raw)
            return vals
        if kind == "floats":
            return tuple(float(x) for x in raw.split(","))
        if kind == "vectors":
            out = []
            for part in raw.split("|"):
                vec = tuple(float(x) for x in part.split(","))
                if len(vec) != 3:
                    raise ValueError(raw)
                out.append(vec)
            return tuple(out)
        return raw
    except ValueError:
        raise ValidationError(f"config value for {where} is invalid: {raw!r}") from None


def physical_setup(cfg: RunConfig) -> PhysicalSetup:
    values = {}
    for key in PhysicalSetup.__dataclass_fields__:
        value = cfg.get("setup", key, float)
        if value is None:
            raise ValidationError(f"missing config key [setup] {key}")
        values[key] = value
    return PhysicalSetup(**values)


def build_model(cfg: RunConfig, name: str | None = None, beta: float | None = None):
    """Collision model from [model], with command-line overrides for name and beta."""
    name = name or cfg.get("model", "name", default=None) or cfg.get("run", "model", default=None) \
        or "inelastic-diffuse"
    if name not in MODEL_NAMES:
        raise ValidationError(f"unknown model {name!r}; choose one of {', '.join(MODEL_NAMES)}")
    if name == "inelastic-diffuse":
        beta = beta if beta is not None else cfg.get("model", "beta", float, 1.0)
        return InelasticDiffuse(beta)
    b_star = cfg.get("model", "b_star", float, 2.0)
    beta_star = cfg.get("model", "beta_star", float, 1.0)
    if name == "elastic-hard-sphere":
        sigma = cfg.get("model", "sigma", float, None)
        kwargs = {} if sigma is None else {"sigma_const": sigma}
        return ElasticHardSphere(b_star=b_star, beta_star=beta_star, **kwargs)
    nodes = cfg.get("model", "sigma_mu_nodes", "floats")
    tables = cfg.get("model", "sigma_tables")
    if nodes is None or tables is None:
        raise ValidationError("elastic-cutoff needs [model] sigma_mu_nodes and sigma_tables")
    paths = [cfg.resolve(p.strip()) for p in tables.split(",")]
    table = SigmaTable.from_csv(nodes, paths)
    return ElasticCutoff(table, b_star=b_star, beta_star=beta_star,
                         mu_nodes=cfg.get("model", "mu_nodes", int, 32))


def build_gas(cfg: RunConfig, alpha: float | None = None) -> GasModel:
    table = cfg.get("gas", "alpha_table")
    extrapolate = cfg.get("gas", "extrapolate", bool, True)
    if table is not None and alpha is None:
        data = read_two_columns(cfg.resolve(table))
        return GasModel.from_table(data[:, 0], data[:, 1], extrapolate)
    return GasModel(alpha if alpha is not None else cfg.get("gas", "alpha", float, 1.0))


def read_two_columns(path: Path) -> np.ndarray:
    """(r, value) rows of a CSV file; '#' comments and one leading header row are skipped."""
    if not path.is_file():
        raise ValidationError(f"table file not found: {path}")
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if rows or line_no > 1:
                    raise ValidationError(f"bad row {line_no} in {path}: {row!r}") from None
    if not rows:
        raise ValidationError(f"no data rows in {path}")
    return np.asarray(rows)


def mixture(cfg: RunConfig, prefix: str, default: GaussianMixture) -> GaussianMixture:
    means = cfg.get("particles", f"{prefix}_means", "vectors")
    if means is None:
        return default
    sigmas = cfg.get("particles", f"{prefix}_sigmas", "floats", tuple(0.1 for _ in means))
    weights = cfg.get("particles", f"{prefix}_weights", "floats", tuple(1.0 for _ in means))
    return GaussianMixture(weights, means, sigmas)
