"""Command line entry point: ``upwind-sbp <subcommand> [options]``.

Every subcommand writes CSV (with a header line) to stdout or to ``--out``.
``--config FILE`` reads ``key=value`` lines that preset options; flags given
on the command line take precedence.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import normal_mode as nm
from .errors import UpwindSbpError
from .sbp import build_grid, build_upwind_pair, export_pair, verify_sbp
from .weno import WenoOperator

log = logging.getLogger("upwind_sbp")


def _grids(text: str) -> list[int]:
    return [int(v) for v in text.replace(" ", "").split(",") if v]


def _number(text: str) -> float:
    """A float that may also be written as a fraction such as ``-4/3``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _bool(text: str) -> bool:
    return str(text).strip().lower() in {"1", "true", "yes", "on"}


def read_config(path: str | Path) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UpwindSbpError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _csv(stream) -> csv.writer:
    return csv.writer(stream, lineterminator="\n")


def cmd_verify_sbp(args, out) -> str:
    pair = build_upwind_pair(args.p, build_grid(args.n))
    report = verify_sbp(pair)
    orders = report.row_orders
    edge = 2 if args.p == 3 else 4
    w = _csv(out)
    w.writerow(["p", "n", "sbp_residual", "qm_min_eig", "boundary_row_order", "interior_row_order", "holds"])
    w.writerow(
        [
            args.p, args.n, repr(report.sbp_residual), repr(report.qm_min_eig),
            int(min(orders[:edge].min(), orders[-edge:].min())), int(orders[edge:-edge].min()),
            report.holds(),
        ]
    )
    if args.export:
        for path in export_pair(pair, args.export):
            log.info("wrote %s", path)
    return "p"


def cmd_normal_mode(args, out) -> str:
    w = _csv(out)
    w.writerow(["quantity", "value"])
    roots = nm.characteristic_roots(3, "inflow", 0.0)
    for k, adm, slow in zip(roots.roots, roots.admissible, roots.slow):
        kind = "slow" if slow else "fast"
        w.writerow([f"inflow_root_{'admissible' if adm else 'rejected'}_{kind}", repr(float(k.real))])
    theta = nm.characteristic_roots(3, "outflow", 0.0).pick(slow=False)
    w.writerow(["outflow_admissible_root", repr(float(theta.real))])
    w.writerow(["det_C3", repr(float(nm.boundary_determinant_scalar(args.tau).real))])
    w.writerow(["det_C3_closed_form", repr(nm.determinant_scalar_closed_form(args.tau))])
    sol = nm.sigma_scalar(args.tau)
    w.writerow(["sigma1", repr(float(sol.numerical[0]))])
    w.writerow(["sigma2", repr(float(sol.numerical[1]))])
    w.writerow(["sigma1_closed_form", repr(float(sol.closed_form[0]))])
    w.writerow(["predicted_rate_p3", 2.5 if abs(sol.closed_form[0]) < 1e-12 else 2.0])
    if args.alpha0 is not None:
        s2 = nm.sigma2_system(args.alpha0, args.tau1, args.tau2)
        w.writerow(["system_sigma2", repr(s2)])
        w.writerow(["system_det_Cs0", repr(float(np.linalg.det(nm.system_boundary_matrix_at_zero(args.alpha0, args.tau1, args.tau2))))])
        w.writerow(["system_predicted_rate_p3", 2.5 if abs(s2) < 1e-12 else 2.0])
    return "quantity"


def cmd_converge(args, out) -> str:
    params = {}
    if args.kind == "system":
        params.update(alpha0=args.alpha0 if args.alpha0 is not None else 0.5, alpha1=args.alpha1)
        params.update(tau1=args.tau1, tau2=args.tau2, tau3=args.tau3, tau4=args.tau4)
    else:
        params["tau"] = args.tau
    if args.kind == "weno":
        params.update(epsilon=args.epsilon, delta=args.delta)
    table = ex.run_convergence(args.kind, args.p, args.grids, cfl=args.cfl, **params)
    table.write_csv(out)
    return "loglog"


def cmd_four_shapes(args, out) -> str:
    result = ex.run_four_shapes(args.scheme, args.p, args.n, t_final=args.t_final, tau=args.tau, cfl=args.cfl)
    result.write_csv(out)
    out.write(f"# overshoot={result.overshoot!r} undershoot={result.undershoot!r} tv={result.total_variation!r}\n")
    out.write(f"# square_overshoot={result.local_overshoot('square')!r}\n")
    if result.stats is not None:
        s = result.stats
        out.write(
            f"# evaluations={s.evaluations} certified={s.certified} fallbacks={s.fallbacks} "
            f"min_scaled_eig={s.min_scaled_eig!r} max_abs_rs={s.max_correction!r}\n"
        )
    return "profile"


def cmd_stabilization_report(args, out) -> str:
    ex.stabilization_report(args.p, args.n, args.state).write_csv(out)
    return "p"


def cmd_weno_weights(args, out) -> str:
    grid = build_grid(args.n)
    WenoOperator(args.p, grid).write_debug_csv(ex.sample_state(args.state, grid), out)
    return "weights"


_GNUPLOT = {
    "loglog": "set datafile separator ','\nset logscale xy\nset key left\nset xlabel 'h'\nset ylabel 'error'\n"
    "plot '{csv}' every ::1 using 2:3 with linespoints title 'H-norm error'\n",
    "profile": "set datafile separator ','\nset xlabel 'x'\n"
    "plot '{csv}' every ::1 using 1:2 with lines title 'numerical', '' every ::1 using 1:3 with lines title 'exact'\n",
    "weights": "set datafile separator ','\nset xlabel 'flux location'\nset ylabel 'weight'\n"
    "plot '{csv}' every ::1 using 2:7 with lines title 'w1', '' every ::1 using 2:8 with lines title 'w2', "
    "'' every ::1 using 2:9 with lines title 'w3'\n",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--gnuplot", action="store_true", help="also write <out>.gp plotting the CSV")
    common.add_argument("--config", help="key=value file presetting options")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="upwind-sbp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-sbp", parents=[common], help="check the SBP identity and row accuracy")
    p.add_argument("--p", type=int, default=3, choices=(3, 4))
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--export", help="directory for Dm, Dp, H as row,col,value CSV")
    p.set_defaults(func=cmd_verify_sbp)

    p = sub.add_parser("normal-mode", parents=[common], help="roots, determinants and slow-mode coefficients")
    p.add_argument("--tau", type=_number, default=-1.0)
    p.add_argument("--alpha0", type=_number)
    p.add_argument("--tau1", type=_number, default=-4 / 3)
    p.add_argument("--tau2", type=_number, default=-1 / 3)
    p.set_defaults(func=cmd_normal_mode)

    p = sub.add_parser("converge", parents=[common], help="grid refinement study with a manufactured solution")
    p.add_argument("kind", choices=("advection", "system", "weno"))
    p.add_argument("--p", type=int, default=3, choices=(3, 4))
    p.add_argument("--tau", type=_number, default=-1.0)
    p.add_argument("--alpha0", type=_number)
    p.add_argument("--alpha1", type=_number, default=0.0)
    p.add_argument("--tau1", type=_number, default=-4 / 3)
    p.add_argument("--tau2", type=_number, default=-1 / 3)
    p.add_argument("--tau3", type=_number, default=0.0)
    p.add_argument("--tau4", type=_number, default=1.0)
    p.add_argument("--epsilon", type=_number, help="WENO epsilon (default h^2)")
    p.add_argument("--delta", type=_number, help="stabilization delta (default h^4)")
    p.add_argument("--grids", type=_grids, default=list(ex.DEFAULT_GRIDS))
    p.add_argument("--cfl", type=_number)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("four-shapes", parents=[common], help="discontinuous advection benchmark on [-1, 1]")
    p.add_argument("--scheme", choices=("weno", "linear"), default="weno")
    p.add_argument("--p", type=int, default=4, choices=(3, 4))
    p.add_argument("--n", type=int, default=401)
    p.add_argument("--tau", type=_number, default=-1.0)
    p.add_argument("--t-final", type=_number, default=1.9)
    p.add_argument("--cfl", type=_number)
    p.set_defaults(func=cmd_four_shapes)

    p = sub.add_parser("stabilization-report", parents=[common], help="PSD certificate at a sample state")
    p.add_argument("--p", type=int, default=4, choices=(3, 4))
    p.add_argument("--n", type=int, default=101)
    p.add_argument("--state", choices=("smooth", "step", "random"), default="step")
    p.set_defaults(func=cmd_stabilization_report)

    p = sub.add_parser("weno-weights", parents=[common], help="indicators and weights per flux point")
    p.add_argument("--p", type=int, default=4, choices=(3, 4))
    p.add_argument("--n", type=int, default=101)
    p.add_argument("--state", choices=("smooth", "step", "random"), default="step")
    p.set_defaults(func=cmd_weno_weights)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    target = subparsers.choices.get(known.command)
    if target is None:
        return
    dests = {a.dest: a for a in target._actions}
    defaults = {}
    for key, value in values.items():
        if key not in dests:
            raise UpwindSbpError(f"unknown config key {key!r} for {known.command}")
        action = dests[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = _bool(value)
        else:
            defaults[key] = action.type(value) if action.type else value
    target.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UpwindSbpError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    buffer = io.StringIO()
    try:
        plot = args.func(args, buffer)
    except UpwindSbpError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(buffer.getvalue())
        if args.gnuplot and plot in _GNUPLOT:
            gp = Path(args.out).with_suffix(".gp")
            gp.write_text(_GNUPLOT[plot].format(csv=Path(args.out).name))
    else:
        if args.gnuplot:
            print("warning: --gnuplot needs --out", file=sys.stderr)
        with contextlib.suppress(BrokenPipeError):
            sys.stdout.write(buffer.getvalue())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
