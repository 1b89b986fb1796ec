"""Command-line front end: ``verify``, ``curvature`` and ``sweep``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage,
configuration or domain errors.  Reports are JSON and sweeps are CSV; both
are byte-identical for identical configurations.

A ``--config`` JSON file holds any of the :class:`RunConfig` keys below and
overrides command-line flags.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import checks as ck
from . import gallery as ga
from . import sasaki as sa
from . import spherebundle as sb
from . import statmanifold as sm
from . import tmoracle as tm
from .diffengine import DerivativeConfig
from .errors import ConfigError, GeometryError

SWEEP_COLUMNS = ("structure", "seed", "point_index", "lambda", "r_eff", "H", "norm_h_sq",
                 "H2_minus_h2", "rho_tilde", "rho_tg", "ric_NN")


@dataclass
class RunConfig:
    """Everything a command needs; ``None`` tolerances mean the deriv-mode default."""

    structure: str = "euclid_trivial"
    dim: int = 3
    alpha: float = 1.0
    seed: int = 0
    deriv: str = "dual"
    fd_step: float = 1e-5
    fd_order: int = 4
    identity_tol: float | None = None
    oracle_tol: float | None = None
    points: int = 10
    r: float = 1.0
    halvings: int = 10
    lambda_min: float | None = None
    base_points: int = 4
    fiber_points: int = 4
    workers: int = 1
    checks: list[str] | None = None
    output: str | None = None
    format: str = "text"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.structure not in ga.IDS:
            raise ConfigError(f"unknown structure {self.structure!r}; choose from {', '.join(ga.IDS)}")
        if self.deriv not in ("dual", "fd"):
            raise ConfigError(f"deriv must be 'dual' or 'fd', got {self.deriv!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for name in ("points", "base_points", "fiber_points", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if not self.r > 0:
            raise ConfigError("radius r must be positive")
        if self.halvings < 0:
            raise ConfigError("halvings must be non-negative")
        if self.lambda_min is not None:
            if not 0 < self.lambda_min <= 1:
                raise ConfigError("lambda_min must lie in (0, 1]")
            h = round(-math.log2(self.lambda_min))
            if 2.0 ** -h != self.lambda_min:
                raise ConfigError("lambda_min must be a power of 1/2 on the halving grid")
        if self.format not in ("text", "json"):
            raise ConfigError(f"format must be 'text' or 'json', got {self.format!r}")
        if self.checks is not None:
            unknown = [c for c in self.checks if not any(i.startswith(c) for i in ck.CHECK_IDS)]
            if unknown:
                raise ConfigError(f"no check id starts with {unknown}")

    # ----------------------------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    # ----------------------------------------------------------------------
    @property
    def deriv_config(self) -> DerivativeConfig:
        try:
            return DerivativeConfig.parse(self.deriv, fd_step=self.fd_step, fd_order=self.fd_order)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def tolerances(self) -> ck.Tolerances:
        d = ck.Tolerances.default_for(self.deriv_config)
        return ck.Tolerances(d.identity if self.identity_tol is None else self.identity_tol,
                             d.oracle if self.oracle_tol is None else self.oracle_tol)

    @property
    def n_halvings(self) -> int:
        if self.lambda_min is None:
            return self.halvings
        return round(-math.log2(self.lambda_min))

    def entry(self) -> ga.GalleryEntry:
        return ga.make(self.structure, self.dim, self.alpha, self.deriv_config)


@dataclass
class Report:
    checks: list[ck.CheckResult]
    environment: dict
    structure: str = ""
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self) -> str:
        d = {"structure": self.structure, "passed": self.passed,
             "environment": self.environment, "config": self.config,
             "checks": [c.as_dict() for c in self.checks]}
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        lines = [f"{self.structure}: {sum(c.passed for c in self.checks)}/{len(self.checks)} checks pass"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  {mark} {c.id:<36} max {c.max_residual:.3e}  tol {c.tolerance:.1e}"
                         f"  ({c.points} pts)")
        return "\n".join(lines) + "\n"


def _environment(cfg: RunConfig) -> dict:
    return {"version": __version__, "seed": cfg.seed, "deriv": cfg.deriv,
            "numpy": np.__version__}


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> Report:
    e = cfg.entry()
    results = ck.run_suite(e.structure, e.known_flags, cfg.points, cfg.seed, cfg.tolerances,
                           r=cfg.r, select=cfg.checks)
    # where the artifact lands is not part of its content
    config = {k: v for k, v in cfg.to_dict().items() if k != "output"}
    return Report(results, _environment(cfg), e.structure.name, config)


def _parse_vec(text: str, n: int, name: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"{name} must be comma-separated numbers, got {text!r}") from exc
    if v.shape != (n,):
        raise ConfigError(f"{name} needs {n} components, got {v.size}")
    return v


def _pair(closed, oracle) -> dict:
    closed = np.asarray(closed, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    return {"closed_form": closed.tolist(), "oracle": oracle.tolist(),
            "max_delta": float(np.abs(closed - oracle).max()) if closed.size else 0.0}


def cmd_curvature(cfg: RunConfig, x, xi, what: str) -> dict:
    """Closed-form values next to an independent evaluation and their deltas.

    ``base`` compares coordinate curvatures with the (R^g, K) assembly;
    ``sasaki`` and ``sphere`` compare with the coordinate oracle on TM.
    """
    e = cfg.entry()
    s = e.structure
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    s.domain.require(x)
    out: dict = {"structure": s.name, "x": x.tolist(), "xi": xi.tolist(), "what": what}
    if what == "base":
        b = sm.bundle(s, x)
        out["curvature"] = _pair(b.Rt, sm.curvature_via_difference_tensor(s, x).components)
        out["ricci"] = _pair(sm.ricci_family(s, x).Ric.components,
                             np.einsum("aajk->jk", sm.curvature_via_statistical_derivative(
                                 s, x).components))
        rho, rho_g = sm.scalars(s, x)
        k2, t2 = sm.norms_K_tau(b)
        out["scalar_g"] = _pair(rho_g, rho + k2 - t2)
        out["scalar"] = rho
    elif what == "sasaki":
        tp = sa.TangentPoint(x, xi)
        out["curvature"] = _pair(sa.curvature_tg_array(s, tp), tm.adapted_curvature(s, tp.z))
        out["ricci"] = _pair(sa.ricci_tg_array(s, tp), tm.adapted_ricci(s, tp.z))
        out["scalar"] = _pair(sa.scalar_tg(s, tp), tm.tm_scalar(s, tp.z))
    elif what == "sphere":
        sp = sb.SpherePoint.on(s, x, xi, cfg.r)
        S = sb.shape_matrix_oracle(s, sp)
        t, to = sb.gauss_terms(s, sp), sb.gauss_terms_oracle(s, sp)
        out["r"] = cfg.r
        out["xi_projected"] = sp.xi.tolist()
        out["h"] = _pair(sb.h_matrix(s, sp), S)
        out["H"] = _pair(t.H, to.H)
        out["norm_h_sq"] = _pair(t.norm_h_sq, to.norm_h_sq)
        out["ric_NN"] = _pair(t.ric_NN, to.ric_NN)
        out["rho_tg"] = _pair(t.rho_tg, to.rho_tg)
        out["rho_tilde"] = _pair(t.rho_tilde, to.rho_tilde)
    else:
        raise ConfigError(f"what must be base, sasaki or sphere, got {what!r}")
    return out


def sweep_rows(cfg: RunConfig) -> list[sb.SweepRow]:
    s = cfg.entry().structure
    pts = sb.sample_sphere_points(s, cfg.r, cfg.base_points, cfg.fiber_points, cfg.seed)
    return sb.radius_sweep(s, pts, sb.halving_grid(cfg.n_halvings), workers=cfg.workers)


def _g17(v: float) -> str:
    return "%.17g" % v


def sweep_csv(cfg: RunConfig, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([cfg.structure, cfg.seed, row.point_index, _g17(row.lam), _g17(row.r_eff),
                    _g17(row.H), _g17(row.norm_h_sq), _g17(row.H2_minus_h2),
                    _g17(row.rho_tilde), _g17(row.rho_tg), _g17(row.ric_NN)])
    return buf.getvalue()


def cmd_sweep(cfg: RunConfig) -> str:
    return sweep_csv(cfg, sweep_rows(cfg))


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    d = RunConfig()
    p.add_argument("--config", help="JSON file of RunConfig keys; overrides flags")
    p.add_argument("--structure", default=d.structure, help=f"one of {', '.join(ga.IDS)}")
    p.add_argument("--dim", type=int, default=d.dim, help="base dimension where it applies (2-4)")
    p.add_argument("--alpha", type=float, default=d.alpha, help="alpha of gaussian_fisher")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--deriv", choices=("dual", "fd"), default=d.deriv)
    p.add_argument("--fd-step", type=float, default=d.fd_step)
    p.add_argument("--fd-order", type=int, choices=(2, 4), default=d.fd_order)
    p.add_argument("--identity-tol", type=float, default=None,
                   help="identity tolerance (default 1e-8 dual, 1e-4 fd)")
    p.add_argument("--oracle-tol", type=float, default=None,
                   help="oracle tolerance (default 1e-6 dual, 1e-3 fd)")
    p.add_argument("--r", type=float, default=d.r, help="sphere-bundle radius")
    p.add_argument("--output", default=None, help="write the artifact here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="statbundle",
                                description="Curvature of statistical structures lifted to TM.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the identity and oracle check suites")
    _common(v)
    v.add_argument("--points", type=int, default=RunConfig.points, help="points per suite")
    v.add_argument("--checks", nargs="+", default=None, help="check id prefixes to run")
    v.add_argument("--format", choices=("text", "json"), default="text",
                   help="stdout format; --output always receives JSON")

    c = sub.add_parser("curvature", help="closed-form and oracle values at one point")
    _common(c)
    c.add_argument("--x", required=True, help="base point, comma separated")
    c.add_argument("--xi", default=None, help="fiber vector, comma separated (default 0)")
    c.add_argument("--what", choices=("base", "sasaki", "sphere"), default="base")

    w = sub.add_parser("sweep", help="small-radius sweep of sphere-bundle curvatures (CSV)")
    _common(w)
    w.add_argument("--halvings", type=int, default=RunConfig.halvings,
                   help="grid 1, 1/2, ..., 2^-halvings")
    w.add_argument("--lambda-min", type=float, default=None,
                   help="smallest factor (a power of 1/2); overrides --halvings")
    w.add_argument("--base-points", type=int, default=RunConfig.base_points)
    w.add_argument("--fiber-points", type=int, default=RunConfig.fiber_points)
    w.add_argument("--workers", type=int, default=RunConfig.workers)
    return p


_CLI_ONLY = {"command", "config", "x", "xi", "what"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = {k: v for k, v in vars(ns).items() if k not in _CLI_ONLY}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        override = RunConfig.from_json(text).to_dict()
        given = json.loads(text)
        d.update({k: override[k] for k in given})
    return RunConfig.from_dict(d)


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = config_from_args(ns)
        if ns.command == "verify":
            rep = cmd_verify(cfg)
            if cfg.output is not None:
                _emit(rep.to_json(), cfg.output)
            sys.stdout.write(rep.to_json() if cfg.format == "json" else rep.summary())
            return rep.exit_code
        if ns.command == "curvature":
            n = cfg.entry().structure.n
            x = _parse_vec(ns.x, n, "--x")
            xi = np.zeros(n) if ns.xi is None else _parse_vec(ns.xi, n, "--xi")
            _emit(json.dumps(cmd_curvature(cfg, x, xi, ns.what), indent=2, sort_keys=True)
                  + "\n", cfg.output)
            return 0
        _emit(cmd_sweep(cfg), cfg.output)
        return 0
    except (ConfigError, GeometryError, ValueError) as exc:
        sys.stderr.write(f"statbundle: error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"statbundle: I/O error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
