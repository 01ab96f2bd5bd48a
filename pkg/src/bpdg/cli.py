"""Command-line interface: run, check, dump-quadrature."""

import argparse
import sys

from .errors import BpdgError


def _add_run(sub):
    p = sub.add_parser("run", help="run a configured simulation")
    p.add_argument("--config", required=True, help="path to the JSON run config")
    p.add_argument("--out", default=".", help="output directory (default: cwd)")
    p.add_argument("--threads", type=int, default=1,
                   help="numba thread count (numba backend only; results are "
                        "identical for any value, reductions stay ordered)")


def _add_check(sub):
    p = sub.add_parser("check", help="validate a config and print the t=0 step bounds")
    p.add_argument("--config", required=True)


def _add_dump(sub):
    p = sub.add_parser("dump-quadrature", help="print a quadrature table as CSV")
    p.add_argument("--kind", required=True, choices=["gauss", "lobatto"])
    p.add_argument("--order", required=True, type=int)


def _set_threads(n):
    if n < 1:
        from .errors import ConfigError
        raise ConfigError("--threads must be >= 1")
    from . import kernels
    if kernels.active_backend() == "numba":
        import numba
        numba.set_num_threads(n)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="bpdg",
                                     description="Positivity-preserving DG solver "
                                                 "for 1D diode electron transport")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_check(sub)
    _add_dump(sub)
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            from .config import load_config
            from .driver import run
            _set_threads(args.threads)
            cfg = load_config(args.config)
            result = run(cfg, args.out)
            print(f"completed {result.steps} steps to t = {result.t:.6g}; "
                  f"outputs in {result.out_dir}")
            return 0
        if args.command == "check":
            from .config import load_config
            from .driver import Simulation
            cfg = load_config(args.config)
            sim = Simulation(cfg)
            ctl = sim.step_control()
            print("config ok")
            print(f"dt_x         = {ctl.dt_x:.17g}")
            print(f"dt_p         = {ctl.dt_p:.17g}")
            print(f"dt_mu        = {ctl.dt_mu:.17g}")
            print(f"dt_collision = {ctl.dt_collision:.17g}")
            print(f"alpha = {ctl.alpha:.17g}, s = ({ctl.s[0]:.17g}, "
                  f"{ctl.s[1]:.17g}, {ctl.s[2]:.17g})")
            print(f"dt_accepted  = {ctl.dt_accepted:.17g}")
            return 0
        if args.command == "dump-quadrature":
            from .quadrature import quad_rule
            rule = quad_rule(args.kind, args.order)
            print("index,node,weight")
            for n, (x, w) in enumerate(zip(rule.nodes, rule.weights)):
                print("%d,%.17g,%.17g" % (n, x, w))
            return 0
    except BpdgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
