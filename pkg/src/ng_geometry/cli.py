"""Command-line front end: ``ng <subcommand> [flags]``.

Exit codes: 0 success, 1 a verification report failed, 2 usage error,
3 numerical guard failure.
"""

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import fock, gaussian, metric, nongauss, perturb, verify
from .errors import BadSpec, NumericalGuardError

logger = logging.getLogger("ng_geometry")

DIM_ENV = "NG_GEOMETRY_DIM"
TOLERANCE_NAMES = ("theorem1", "theorem2", "second_order")


@dataclass
class RunConfig:
    dim: int = fock.DEFAULT_DIM
    seed: int = 42
    out: str = "-"
    log_level: str = "WARNING"
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 16:
            raise BadSpec(f"dim must be >= 16, got {self.dim}")
        if self.seed < 0:
            raise BadSpec(f"seed must be >= 0, got {self.seed}")
        unknown = set(self.tolerances) - set(TOLERANCE_NAMES)
        if unknown:
            raise BadSpec(f"unknown tolerance names {sorted(unknown)}; known: {TOLERANCE_NAMES}")


def format_value(value):
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(columns, rows, path):
    """Write a header and rows; floats carry 12 significant digits.

    ``path="-"`` writes to standard output.
    """
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    text = buffer.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror}") from exc


# --------------------------------------------------------------------------
# argument parsing


def float_list(text):
    """``"0.3,0.7"`` or ``"0..20"`` or ``"0.05..1:0.05"``."""
    values = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if ".." in chunk:
            lo, _, rest = chunk.partition("..")
            hi, _, step = rest.partition(":")
            lo, hi = float(lo), float(hi)
            step = float(step) if step else 1.0
            if step <= 0:
                raise argparse.ArgumentTypeError("range step must be positive")
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            values.extend(round(lo + i * step, 12) for i in range(count))
        elif chunk:
            values.append(float(chunk))
    if not values:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return values


def key_value(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return key.strip(), float(value)


def state_spec(text):
    """``thermal:4``, ``fock:1``, ``squeezed:0.3``, ``coherent:1+0.5j``."""
    kind, _, value = text.partition(":")
    if kind not in ("thermal", "fock", "squeezed", "coherent"):
        raise argparse.ArgumentTypeError(f"unknown state kind {kind!r}")
    try:
        number = complex(value) if kind in ("squeezed", "coherent") else float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad state value {value!r}") from None
    return kind, number


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise BadSpec(f"{path}: expected key=value, got {line!r}")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int,
                        help="minimum Fock truncation (default 200 or $NG_GEOMETRY_DIM); "
                             "grown automatically when a state needs a larger box")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--out", default="-", help="CSV output path, '-' for stdout")
    common.add_argument("--log-level", default="WARNING")
    common.add_argument("--tol", type=key_value, action="append", default=[],
                        metavar="NAME=VALUE", help=f"tolerance override, NAME in {TOLERANCE_NAMES}")
    common.add_argument("--jobs", type=int, default=1, help="parallel instances; results do not change")
    common.add_argument("--config", help="file of key=value defaults; flags win")

    parser = argparse.ArgumentParser(prog="ng", description="Non-Gaussianity of perturbed Gaussian states.")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("fig1", parents=[common], help="perturbation-family sweeps")
    p.add_argument("--panel", choices=verify.PANELS, required=True)
    p.add_argument("--nt", type=float, default=4.0)
    p.add_argument("--eps", type=float_list, default=[0.3, 0.7, 0.9])
    p.add_argument("--nmu", type=float_list, default=list(range(21)))

    p = sub.add_parser("theorem", parents=[common], help="theorem verification harnesses")
    p.add_argument("--which", choices=["1", "2", "second-order"], required=True)
    p.add_argument("--nt", type=float, default=4.0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--scale", type=float, default=1e-3)
    p.add_argument("--fix-energy", action="store_true")
    p.add_argument("--classical", action="store_true", help="theorem 2: eigenvalue perturbations")

    p = sub.add_parser("ng", parents=[common], help="non-Gaussianity of a described state")
    p.add_argument("--thermal", type=float, default=0.0, help="thermal occupancy of the core")
    p.add_argument("--fock", type=int, help="use the Fock state |n> instead of a Gaussian")
    p.add_argument("--xi", type=complex, default=0j, help="squeezing, e.g. 0.3 or 0.2+0.1j")
    p.add_argument("--alpha", type=complex, default=0j, help="displacement")
    p.add_argument("--target", help="mix with a target, KIND:N_MU (poisson, thermal, fock)")
    p.add_argument("--eps", type=float, default=0.0, help="weight of the target")

    p = sub.add_parser("search", parents=[common], help="maximal-nG target search")
    p.add_argument("--nt", type=float, default=4.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--nmu", type=float, default=4.0)
    p.add_argument("--support", type=int, default=30)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--iterations", type=int, default=300)

    p = sub.add_parser("fidelity", parents=[common], help="fidelity and Bures distance")
    p.add_argument("--a", type=state_spec, required=True, metavar="KIND:VALUE")
    p.add_argument("--b", type=state_spec, required=True, metavar="KIND:VALUE")
    return parser


def parse_args(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            defaults = read_config(known.config)
        except OSError as exc:
            parser.error(f"cannot read config {known.config}: {exc.strerror}")
        except BadSpec as exc:
            parser.error(str(exc))
        subparser = parser.subcommands.get(known.command)
        if subparser is not None:
            actions = {a.dest: a for a in subparser._actions}
            converted = {}
            for key, raw in defaults.items():
                action = actions.get(key)
                if action is None:
                    parser.error(f"config key {key!r} is not an option of {known.command}")
                if action.type is not None:
                    converted[key] = action.type(raw)
                elif action.const is True:
                    converted[key] = raw.lower() in ("1", "true", "yes")
                else:
                    converted[key] = raw
            subparser.set_defaults(**converted)
    return parser.parse_args(argv)


def run_config(args):
    dim = args.dim
    if dim is None:
        dim = int(os.environ.get(DIM_ENV, fock.DEFAULT_DIM))
    return RunConfig(dim=dim, seed=args.seed, out=args.out, log_level=args.log_level,
                     tolerances=dict(args.tol))


# --------------------------------------------------------------------------
# subcommands


def _box(config, minimum):
    return max(config.dim, minimum)


def cmd_fig1(args, config):
    if args.panel == "fock" and any(n != int(n) for n in args.nmu):
        raise BadSpec("Fock target requires integer n_mu")
    dim = _box(config, verify.fig1_dim(args.panel, args.nt, args.nmu))
    table = verify.sweep_fig1(args.panel, args.nt, args.eps, args.nmu, dim=dim)
    write_csv(table.columns, table.rows, config.out)
    return 0


def _apply_tolerance(report, config, name):
    if name in config.tolerances:
        report.tolerance = config.tolerances[name]
    return report


def cmd_theorem(args, config):
    common = dict(n_t=args.nt, count=args.count, scale=args.scale, seed=config.seed,
                  dim=_box(config, gaussian.thermal_min_dim(args.nt)), jobs=args.jobs)
    if args.which == "1":
        report = verify.verify_theorem1(fix_energy=args.fix_energy, **common)
        _apply_tolerance(report, config, "theorem1")
    elif args.which == "2":
        report = verify.verify_theorem2(classical=args.classical, **common)
        _apply_tolerance(report, config, "theorem2")
    else:
        report = verify.verify_second_order(**common)
        _apply_tolerance(report, config, "second_order")
    print(report.summary(), file=sys.stderr)
    names = list(report.details)
    rows = [
        (i, report.residuals[i], *(report.details[n][i] for n in names))
        for i in range(report.instances)
    ]
    write_csv(("instance", "residual", *names), rows, config.out)
    return 0 if report.passed else 1


def _target_probs(text, dim):
    kind, _, value = text.partition(":")
    try:
        n_mu = float(value)
    except ValueError:
        raise BadSpec(f"target must look like KIND:N_MU, got {text!r}") from None
    return perturb.target_distribution(perturb.TargetSpec(kind, n_mu=n_mu), dim).probs


def cmd_ng(args, config):
    params = gaussian.GaussianParams(args.thermal, args.xi, args.alpha)
    need = gaussian.gaussian_min_dim(params)
    if args.fock is not None:
        need = max(need, math.ceil((args.fock + 2) * 10 / 9))
    dim = _box(config, need)
    if args.fock is not None:
        rho = fock.fock_state(args.fock, dim)
        label = f"fock:{args.fock}"
    else:
        rho = gaussian.gaussian_state(params, dim)
        label = f"gaussian:n={args.thermal},xi={args.xi},alpha={args.alpha}"
    if args.target:
        if not 0 <= args.eps <= 1:
            raise BadSpec("--eps must lie in [0, 1]")
        if args.fock is not None or params.xi != 0 or params.alpha != 0:
            raise BadSpec("--target mixes into a thermal core only")
        mu = _target_probs(args.target, dim)
        rho = fock.diagonal_state(perturb.convex_combination(rho.diagonal, mu, args.eps).probs)
        label += f"+{args.eps}*{args.target}"
    cov = gaussian.covariance_of(rho)
    row = (label, rho.dim, fock.mean_photon_number(rho), cov.symplectic_eigenvalue,
           fock.von_neumann_entropy(rho), nongauss.non_gaussianity(rho))
    write_csv(("state", "dim", "mean_n", "sqrt_det_sigma", "entropy", "delta"), [row], config.out)
    return 0


def cmd_search(args, config):
    result = verify.search_max_ng(args.nt, args.eps, args.nmu, args.support, args.restarts,
                                  args.iterations, config.seed,
                                  dim=_box(config, gaussian.thermal_min_dim(args.nt)), jobs=args.jobs)
    print(
        f"search: delta={result.delta:.12g} support={list(result.support)} "
        f"fock={result.is_fock} tv_to_fock={result.tv_to_fock:.3e}",
        file=sys.stderr,
    )
    probs = result.target.probs[: args.support]
    rows = [(k, probs[k]) for k in range(args.support)]
    write_csv(("k", "mu"), rows, config.out)
    return 0


def _state_params(spec):
    kind, value = spec
    if kind == "thermal":
        return gaussian.GaussianParams(value, 0.0, 0.0)
    if kind == "squeezed":
        return gaussian.GaussianParams(0.0, value, 0.0)
    return gaussian.GaussianParams(0.0, 0.0, value)


def _min_dim(spec):
    kind, value = spec
    if kind == "fock":
        return math.ceil((int(value) + 2) * 10 / 9)
    return gaussian.gaussian_min_dim(_state_params(spec))


def _build_state(spec, dim):
    if spec[0] == "fock":
        return fock.fock_state(int(spec[1]), dim)
    return gaussian.gaussian_state(_state_params(spec), dim)


def cmd_fidelity(args, config):
    dim = _box(config, max(_min_dim(args.a), _min_dim(args.b)))
    rho1 = _build_state(args.a, dim)
    rho2 = _build_state(args.b, dim)
    f = metric.fidelity(rho1, rho2)
    write_csv(("fidelity", "bures_distance_sq"), [(f, 2.0 * (1.0 - f))], config.out)
    return 0


COMMANDS = {
    "fig1": cmd_fig1,
    "theorem": cmd_theorem,
    "ng": cmd_ng,
    "search": cmd_search,
    "fidelity": cmd_fidelity,
}


def run(argv=None):
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parse_args(parser, sys.argv[1:] if argv is None else list(argv))
        try:
            config = run_config(args)
        except (BadSpec, ValueError) as exc:
            parser.subcommands[args.command].error(str(exc))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=config.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, config)
    except BadSpec as exc:
        subparser = parser.subcommands[args.command]
        sys.stderr.write(subparser.format_usage())
        print(f"ng {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(exc.diagnostic(), file=sys.stderr)
        return 3


def main():
    sys.exit(run())
