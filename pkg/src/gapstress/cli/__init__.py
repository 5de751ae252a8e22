# Terminal application for bounding the effective moduli of densely packed composites
# gapstress bounds --config <path> [--eps <v>] [--j <1|2>] [--out <path>]: Upper and lower bound for one gap width and loading.
# gapstress sweep --config <path> [--eps <v> ...] [--out <path>]: Bounds over all gap widths, CSV rows and c/√eps fits.
# gapstress verify --config <path> [--eps <v>]: Flux and energy identities, stress residuals and kernel oracle.
# gapstress kernel-eval --config <path> --point <x,y> [--point <x,y> ...]: Kernel values at the given points.
# gapstress version: Print the installed version.

import argparse, importlib.metadata, logging, sys

import numpy as np
from halo import Halo

import gapstress
from gapstress.bounds import VerificationError, dual_lower, primal_upper
from gapstress.kernels import KernelContext, kelvin_matrix, singular_displacement, singular_stress
from gapstress.logs import cli_logger
from gapstress.pipeline import ConfigError, csv_text, make_row, sweep_and_fit, verify_suite, write_csv, load_config
from gapstress.quadrature import QuadratureError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_QUADRATURE = 3
EXIT_VERIFICATION = 4


def spinner(text):
    return Halo(text=text, spinner="dots2", stream=sys.stderr)


def emit(rows, out):
    if out:
        write_csv(rows, out)
    else:
        sys.stdout.write(csv_text(rows))


def bounds(cfg, j):
    eps = cfg.first_eps()
    geom = cfg.geometry(eps)
    with spinner(f"Computing upper bound (eps={eps:g}, j={j})") as s:
        try:
            upper = primal_upper(geom, cfg.material, j, cfg.cell_spec)
        except QuadratureError:
            s.fail("Upper bound failed")
            raise
        s.succeed(f"Upper bound {upper.value:.10g}")
    with spinner(f"Computing lower bound (eps={eps:g}, j={j})") as s:
        try:
            lower = dual_lower(geom, cfg.material, j, cfg.cell_spec, cfg.path_spec, seed=cfg.seed)
        except QuadratureError:
            s.fail("Lower bound failed")
            raise
        s.succeed(f"Lower bound {lower.value:.10g}")
    row = make_row(geom, cfg.material, upper, lower)
    name = "E*" if j == 1 else "mu*"
    print(f"eps            {row.eps:.6g}", file=sys.stderr)
    print(f"j              {row.j}", file=sys.stderr)
    print(f"upper          {row.upper:.12g}   (x sqrt(eps) = {row.upper_scaled:.8f})", file=sys.stderr)
    print(f"lower          {row.lower:.12g}   (x sqrt(eps) = {row.lower_scaled:.8f})", file=sys.stderr)
    print(f"m_j            {row.fk_constant:.8f}", file=sys.stderr)
    print(f"{name:<15}[{row.modulus.lower:.10g}, {row.modulus.upper:.10g}]", file=sys.stderr)
    print(f"quad_err       {row.quad_err:.3g}", file=sys.stderr)
    print(f"terms          " + ", ".join(f"{k}={v:.8g}" for k, v in row.terms.items()), file=sys.stderr)
    emit([row], cfg.out)


def sweep(cfg):
    with spinner(f"Sweeping {len(cfg.eps_list)} gap widths") as s:
        try:
            rows, fits = sweep_and_fit(cfg)
        except QuadratureError:
            s.fail("Sweep failed")
            raise
        s.succeed(f"Computed {len(rows)} rows")
    emit(rows, cfg.out)
    print("j  series  c1              c0              residual    target          rel_dev", file=sys.stderr)
    for (j, series), fit in fits.items():
        print(f"{j}  {series:<6}  {fit.c1:<14.10g}  {fit.c0:<14.8g}  {fit.residual:<10.3g}  {fit.target:<14.10g}  {fit.rel_dev:.3%}", file=sys.stderr)


def verify(cfg):
    eps = cfg.first_eps()
    with spinner(f"Running identity suite (eps={eps:g})") as s:
        report = verify_suite(cfg, eps)
        if report.passed:
            s.succeed(f"All {len(report.checks)} checks passed")
        else:
            s.fail(f"{len(report.failures())} of {len(report.checks)} checks failed")
    for c in report.checks:
        print(f"{'ok  ' if c.passed else 'FAIL'}  {c.name:<28} {c.value:<24.17g} expected {c.expected:.6g} +- {c.tolerance:.3g}")
    report.raise_for_failures()


def kernel_eval(cfg, points):
    geom = cfg.geometry(cfg.first_eps())
    ctx = KernelContext.from_geometry(geom, cfg.material)
    for x, y in points:
        p = np.array([x, y])
        G = kelvin_matrix(p, cfg.material)
        print(f"point ({x:.17g}, {y:.17g})")
        print(f"  kelvin   [[{G.g11:.17g}, {G.g12:.17g}], [{G.g21:.17g}, {G.g22:.17g}]]")
        for j in (1, 2):
            q = singular_displacement(ctx, j, p)
            s = singular_stress(ctx, j, p)
            print(f"  q{j}       ({q[0]:.17g}, {q[1]:.17g})")
            print(f"  sigma(q{j}) [[{s.a11:.17g}, {s.a12:.17g}], [{s.a12:.17g}, {s.a22:.17g}]]")


def point(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected a point 'x,y', got {text!r}")
    return x, y


def version():
    try:
        return importlib.metadata.version("gapstress")
    except importlib.metadata.PackageNotFoundError:
        return gapstress.__version__


def main(argv=None):
    parser = argparse.ArgumentParser(prog="gapstress", description="Bounds for the effective moduli of densely packed composites with hard inclusions")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def common(sub):
        sub.add_argument("-c", "--config", help="Path of the key = value run configuration", required=True)
        sub.add_argument("--log-file", help="Also write logs to this file")
        sub.add_argument("-v", "--verbose", help="Log quadrature statistics", action="store_true")

    bounds_parser = subparsers.add_parser("bounds", help="Upper and lower bound for one gap width and loading")
    common(bounds_parser)
    bounds_parser.add_argument("--eps", help="Gap width (default: first of eps_list)", type=float)
    bounds_parser.add_argument("--j", help="Loading index", type=int, choices=[1, 2], default=1)
    bounds_parser.add_argument("-o", "--out", help="CSV output path (default: config 'out', else stdout)")

    sweep_parser = subparsers.add_parser("sweep", help="Bounds over all gap widths with least-squares fits")
    common(sweep_parser)
    sweep_parser.add_argument("--eps", help="Gap widths replacing eps_list", type=float, nargs="+")
    sweep_parser.add_argument("-o", "--out", help="CSV output path (default: config 'out', else stdout)")

    verify_parser = subparsers.add_parser("verify", help="Run the identity suite")
    common(verify_parser)
    verify_parser.add_argument("--eps", help="Gap width (default: first of eps_list)", type=float)

    kernel_parser = subparsers.add_parser("kernel-eval", help="Print kernel values at points")
    common(kernel_parser)
    kernel_parser.add_argument("--eps", help="Gap width fixing p1, p2 (default: first of eps_list)", type=float)
    kernel_parser.add_argument("-p", "--point", help="Point 'x,y'; may be repeated", type=point, action="append", required=True)

    subparsers.add_parser("version", help="Print the installed version")

    args = parser.parse_args(argv)

    if args.command == "version":
        print(version())
        return EXIT_OK

    logger = cli_logger(logging.DEBUG if args.verbose else logging.INFO, args.log_file)
    try:
        cfg = load_config(args.config).with_overrides(eps=args.eps, out=getattr(args, "out", None))
        match args.command:
            case "bounds":
                bounds(cfg, args.j)
            case "sweep":
                sweep(cfg)
            case "verify":
                verify(cfg)
            case "kernel-eval":
                kernel_eval(cfg, args.point)
    except QuadratureError as e:
        logger.error(f"Quadrature failed: {e}")
        return EXIT_QUADRATURE
    except VerificationError as e:
        logger.error(str(e))
        return EXIT_VERIFICATION
    except (ConfigError, ValueError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
