"""Command line front end for the zonal-network experiments.

Every subcommand writes its artifact into ``--out`` together with a
``*.meta.json`` sidecar holding the resolved configuration. Runs are
deterministic: all randomness comes from the explicit seeds in the config.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .activation import (
    ActivationSpec,
    AdmissibilityError,
    coefficient_sequence,
    phi_hat_array,
    phi_hat_closed_form_magnitude,
)
from .kernels import Cutoff, default_smoothness, dphi, lowpass, tilted
from .network import (
    EvennessWarning,
    SampleSet,
    build_network,
    make_target_from_density,
    rate_study,
    rotation_check,
    sample_cloud,
    sup_grid,
)
from .orthopoly import NumericError, polynomial_space_dimension
from .quadrature import (
    InfeasibleOrderError,
    compute_weights,
    order_search,
    product_rule,
    regularity_estimate,
)
from .sphere import PointCloud, PointsFileError, Rotation, antipodal_closure, generate, load_points

log = logging.getLogger("zfnet")

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3, 4
THREAD_ENV = "OMP_NUM_THREADS"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    q: int = 2
    gamma: float = 0.0
    smoothness: int | None = None
    levels: list = field(default_factory=lambda: [1, 2, 3, 4])
    N: int = 8
    L: int = 60
    n: int = 64
    generator: str = "hemisphere-fibonacci"
    oversample: float = 1.2
    grid_size: int = 20000
    probe_count: int = 2000
    theta_points: int = 721
    trials: int = 5
    target: str = "cosh"
    seed: int = 12345
    grid_seed: int = 2024
    tol: float = 1e-6
    out: str = "out"

    def __post_init__(self):
        if self.smoothness is None:
            self.smoothness = default_smoothness(self.q)

    def validate(self) -> "ExperimentConfig":
        try:
            ActivationSpec(float(self.gamma), int(self.q))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if int(self.smoothness) <= self.q + 1:
            raise ConfigError(f"smoothness must exceed q + 1 = {self.q + 1}, got {self.smoothness}")
        for name in ("seed", "grid_seed"):
            if not isinstance(getattr(self, name), int):
                raise ConfigError(f"{name} must be an explicit integer")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.target not in TARGETS:
            raise ConfigError(f"unknown target {self.target!r}; choose from {sorted(TARGETS)}")
        if min(self.N, self.n, self.L) < 1 or not self.levels or min(self.levels) < 0:
            raise ConfigError("N, n, L must be positive and levels nonnegative")
        return self

    @property
    def spec(self) -> ActivationSpec:
        return ActivationSpec(float(self.gamma), int(self.q))

    @property
    def cutoff(self) -> Cutoff:
        return Cutoff(int(self.smoothness))

    def metadata(self) -> dict:
        return {
            "config": dataclasses.asdict(self),
            "threads": {THREAD_ENV: os.environ.get(THREAD_ENV)},
            "version": __version__,
        }


def _direction(q: int) -> np.ndarray:
    u = np.arange(1.0, q + 2.0)
    return u / np.linalg.norm(u)


def _target(name: str, q: int) -> Callable:
    u = _direction(q)
    return TARGETS[name](u)


# Even test functions; rate-study uses them as densities F.
TARGETS = {
    "constant": lambda u: (lambda x: np.ones(len(np.atleast_2d(x)))),
    "cosh": lambda u: (lambda x: np.cosh(np.atleast_2d(x) @ u)),
    "cubic": lambda u: (lambda x: 1.0 + np.abs(np.atleast_2d(x) @ u) ** 3),
    "quadratic": lambda u: (lambda x: (np.atleast_2d(x) @ u) ** 2),
}


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    return data


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags."""
    values = load_config(getattr(args, "config", None))
    for f in dataclasses.fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


# ---------------------------------------------------------------- writers

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _meta(cfg: ExperimentConfig, artifact: Path, extra: dict | None = None) -> None:
    m = cfg.metadata()
    if extra:
        m.update(extra)
    write_json(artifact.with_suffix(artifact.suffix + ".meta.json"), m)


# ---------------------------------------------------------------- commands

def local_slopes(values: np.ndarray) -> np.ndarray:
    """d log|v| / d log l by finite differences in log l; NaN at l = 0."""
    out = np.full(len(values), math.nan)
    if len(values) > 2:
        l = np.arange(1, len(values), dtype=float)
        out[1:] = np.gradient(np.log(np.abs(values[1:])), np.log(l))
    return out


def cmd_coeffs(cfg: ExperimentConfig, args) -> int:
    spec = cfg.spec
    hat = phi_hat_array(spec, cfg.L)
    mags = np.array([phi_hat_closed_form_magnitude(spec, l) for l in range(cfg.L + 1)])
    gap = np.abs(np.abs(hat) - mags) / mags
    slopes = local_slopes(hat)
    out = Path(cfg.out) / "coeffs.csv"
    write_csv(out, ["l", "phi_hat", "closed_form_magnitude", "rel_gap", "slope"],
              zip(range(cfg.L + 1), hat, mags, gap, slopes))
    _meta(cfg, out, {"max_rel_gap": float(gap.max()), "smoothness_exponent": spec.smoothness})
    print(f"wrote {out}; max rel gap {gap.max():.3e}")
    return EXIT_OK


def cmd_quadrature(cfg: ExperimentConfig, args) -> int:
    cloud = load_points(args.points)
    probes = args.probes
    if args.search:
        n = order_search(cloud, tol=cfg.tol, probe_count=probes, seed=cfg.seed)
    elif args.order is not None:
        n = args.order
    else:
        raise ConfigError("give --order or --search")
    rule = compute_weights(cloud, n, tol=cfg.tol, probe_count=probes, seed=cfg.seed)
    d = min(1.0, 1.0 / max(n, 1))
    reg = regularity_estimate(rule, d, seed=cfg.seed)
    report = rule.diagnostics()
    report.update({
        "weights": np.asarray(rule.weights),
        "feasible": bool(rule.residual < cfg.tol),
        "regularity": {"d": reg.d, "value": reg.value},
    })
    out = Path(cfg.out) / "quadrature.json"
    write_json(out, report)
    _meta(cfg, out, {"points_file": str(args.points)})
    if not rule.residual < cfg.tol:
        print(f"order {n} infeasible: residual {rule.residual:.3e} >= {cfg.tol:g}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"order {n}: residual {rule.residual:.3e}, weight sum {rule.weight_sum:.15g}")
    return EXIT_OK


def load_samples(path, q: int | None = None) -> SampleSet:
    """CSV rows of q+1 coordinates followed by the value."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#") or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise PointsFileError(f"{path}:{lineno}: cannot parse {row!r}") from exc
            if rows and len(vals) != len(rows[0]):
                raise PointsFileError(f"{path}:{lineno}: expected {len(rows[0])} fields, got {len(vals)}")
            if q is not None and len(vals) != q + 2:
                raise PointsFileError(f"{path}:{lineno}: expected {q + 2} fields for q={q}")
            if abs(math.hypot(*vals[:-1]) - 1.0) > 1e-6:
                raise PointsFileError(f"{path}:{lineno}: site is not a unit vector")
            rows.append(vals)
    if not rows:
        raise PointsFileError(f"{path}: no samples")
    a = np.array(rows)
    return SampleSet(PointCloud(a[:, :-1]), a[:, -1])


def _sites(cfg: ExperimentConfig, order: int) -> PointCloud:
    if cfg.generator == "hemisphere-fibonacci":
        if cfg.q != 2:
            raise ConfigError("hemisphere-fibonacci sites need q = 2")
        return sample_cloud(order, cfg.oversample)
    if cfg.generator == "tensor-design":
        return PointCloud(product_rule(cfg.q, order, probe_count=0).points)
    if cfg.generator == "uniform-random":
        M = int(math.ceil(cfg.oversample * polynomial_space_dimension(cfg.q, order)))
        return PointCloud(antipodal_closure(generate(cfg.q, "uniform-random", M, cfg.seed).points))
    raise ConfigError(f"unknown generator {cfg.generator!r}")


def cmd_build(cfg: ExperimentConfig, args) -> int:
    spec, N = cfg.spec, cfg.N
    order = 4 * N
    f = _target(cfg.target, cfg.q)
    if args.samples:
        raw = load_samples(args.samples, cfg.q)
    else:
        cloud = _sites(cfg, order)
        raw = SampleSet(cloud, f(cloud.points))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EvennessWarning)
        samples = raw.symmetrize()
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    mu = compute_weights(samples.cloud, order, tol=cfg.tol, probe_count=cfg.probe_count, seed=cfg.seed)
    if args.centers:
        nu = compute_weights(load_points(args.centers), order, tol=cfg.tol,
                             probe_count=cfg.probe_count, seed=cfg.seed)
    else:
        nu = product_rule(cfg.q, order)
    net = build_network(spec, mu, nu, samples, N, cfg.cutoff, cfg.tol)
    outdir = Path(cfg.out)
    nd = net.to_dict()
    nd["build"].update(cfg.metadata())
    write_json(outdir / "network.json", nd)
    if args.samples and not args.use_target:
        # grid = the sample sites, f = the recorded values
        x, fx = samples.cloud.points, samples.values
    else:
        x = sup_grid(cfg.q, cfg.grid_size, cfg.grid_seed)
        fx = f(x)
    gx = net(x)
    err = np.abs(fx - gx)
    write_csv(outdir / "errors.csv", ["index", "f", "G", "abs_error"], zip(range(len(x)), fx, gx, err))
    print(f"{len(net)} centers, max |f - G| = {err.max():.3e} over {len(x)} points")
    return EXIT_OK


def _rate_target(cfg: ExperimentConfig):
    spec = cfg.spec
    top = max(cfg.levels)
    # twice the top order: target nodes then differ from every center rule
    high = product_rule(cfg.q, 8 * 2**top)
    return make_target_from_density(spec, _target(cfg.target, cfg.q), high, max_N=2**top)


def cmd_rate_study(cfg: ExperimentConfig, args) -> int:
    target = _rate_target(cfg)
    report = rate_study(cfg.spec, target, list(cfg.levels), cfg.cutoff,
                        grid=sup_grid(cfg.q, cfg.grid_size, cfg.grid_seed),
                        sample_points=lambda order: _sites(cfg, order),
                        probe_count=cfg.probe_count, tol=cfg.tol)
    out = Path(cfg.out) / "rate.csv"
    write_csv(out, ["n", "error", "l1", "ratio"],
              ((r["n"], r["error"], r["l1"], r["ratio"]) for r in report.rows()))
    _meta(cfg, out, {
        "geometric_mean_ratio": report.geometric_mean_ratio,
        "grid_size": report.grid_size,
        "centers": report.network_sizes,
        "weighted_l1": report.weighted_l1,
        "mu_residuals": report.mu_residuals,
        "nu_residuals": report.nu_residuals,
        "skipped": report.skipped,
    })
    print(f"wrote {out}; geometric-mean ratio {report.geometric_mean_ratio:.4f}")
    if not report.levels:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_kernel_profile(cfg: ExperimentConfig, args) -> int:
    spec, n, h = cfg.spec, cfg.n, cfg.cutoff
    theta = np.linspace(0.0, math.pi, cfg.theta_points)
    t = np.cos(theta)
    seq = coefficient_sequence(spec, n)
    cols = [
        lowpass(cfg.q, h, n)(t),
        tilted(cfg.q, h.band, seq, n)(t),
        dphi(spec, h, n)(t),
    ]
    out = Path(cfg.out) / "profile.csv"
    write_csv(out, ["theta", "phi_n", "tilted_band", "dphi"], zip(theta, *cols))
    _meta(cfg, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_rotate_check(cfg: ExperimentConfig, args) -> int:
    spec, N = cfg.spec, cfg.N
    order = 4 * N
    f = _target(cfg.target, cfg.q)
    mu = compute_weights(_sites(cfg, order), order, tol=cfg.tol, probe_count=cfg.probe_count, seed=cfg.seed)
    nu = product_rule(cfg.q, order)
    test = sup_grid(cfg.q, 2000, cfg.grid_seed)
    rows = []
    for trial in range(cfg.trials):
        U = Rotation.random(cfg.q, cfg.seed + trial)
        rows.append((trial, rotation_check(spec, f, mu, nu, U, N, test, cfg.cutoff)))
    out = Path(cfg.out) / "rotation.csv"
    write_csv(out, ["trial", "deviation"], rows)
    _meta(cfg, out)
    print(f"wrote {out}; max deviation {max(r[1] for r in rows):.3e}")
    return EXIT_OK


COMMANDS = {
    "coeffs": cmd_coeffs,
    "quadrature": cmd_quadrature,
    "build": cmd_build,
    "rate-study": cmd_rate_study,
    "kernel-profile": cmd_kernel_profile,
    "rotate-check": cmd_rotate_check,
}


def _levels(s: str) -> list[int]:
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad level list {s!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    g = shared.add_argument_group("shared")
    g.add_argument("--config", help="JSON file of ExperimentConfig fields; flags override it")
    g.add_argument("--q", type=int)
    g.add_argument("--gamma", type=float)
    g.add_argument("--smoothness", type=int, help="cutoff smoothness S (default q + 5)")
    g.add_argument("--seed", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--out")
    g.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="zfnet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("coeffs", parents=[shared], help="activation coefficients vs the closed form")
    s.add_argument("--L", type=int)

    s = sub.add_parser("quadrature", parents=[shared], help="weights for a points file")
    s.add_argument("points")
    s.add_argument("--order", type=int)
    s.add_argument("--search", action="store_true")
    s.add_argument("--probes", type=int, default=None)

    s = sub.add_parser("build", parents=[shared], help="build a network and report grid errors")
    s.add_argument("--samples", help="CSV of sites and values; generated from --target if omitted")
    s.add_argument("--centers", help="points file for the centers; product Gauss nodes if omitted")
    s.add_argument("--N", type=int)
    s.add_argument("--target", choices=sorted(TARGETS))
    s.add_argument("--generator", choices=["hemisphere-fibonacci", "tensor-design", "uniform-random"])
    s.add_argument("--grid-size", dest="grid_size", type=int)
    s.add_argument("--use-target", action="store_true",
                   help="with --samples, measure errors against --target on the grid")

    s = sub.add_parser("rate-study", parents=[shared], help="error per dyadic level")
    s.add_argument("--levels", type=_levels)
    s.add_argument("--target", choices=sorted(TARGETS))
    s.add_argument("--generator", choices=["hemisphere-fibonacci", "tensor-design", "uniform-random"])
    s.add_argument("--grid-size", dest="grid_size", type=int)

    s = sub.add_parser("kernel-profile", parents=[shared], help="kernel values against theta")
    s.add_argument("--n", type=int)
    s.add_argument("--theta-points", dest="theta_points", type=int)

    s = sub.add_parser("rotate-check", parents=[shared], help="rotation equivariance trials")
    s.add_argument("--N", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--target", choices=sorted(TARGETS))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except InfeasibleOrderError as exc:
        extra = f" (residual {exc.residual:.3e})" if exc.residual is not None else ""
        print(f"infeasible: {exc}{extra}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, PointsFileError, AdmissibilityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
