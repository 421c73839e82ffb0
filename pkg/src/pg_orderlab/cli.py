"""Command-line interface.

Exit codes: 0 success, 1 usage or load error, 2 numerical failure,
3 a verify fact failed.
"""

import argparse
import sys
import warnings

import numpy as np

from . import instances, verify
from .analysis import InsufficientDataError, fit_rate_arrays, sample_landscape
from .bandit import InstanceError
from .conditions import predict
from .instances import InstanceFormatError
from .optim import RunConfig, StepSizeWarning, npg_direction, run

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

TRAJECTORY_COLUMNS = ["t", "value", "gap", "grad_norm"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    return format(float(x), ".17g")


def _vec(v):
    return " ".join(_num(x) for x in v)


def _short(v):
    return " ".join(format(float(x), ".10g") for x in v)


def _source(args):
    """NamedInstance from --example/--file."""
    if args.example:
        try:
            return instances.builtin(args.example)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    try:
        return instances.read(args.file)
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror or exc}") from None
    except (InstanceFormatError, InstanceError) as exc:
        raise UsageError(f"{args.file}: {exc}") from None


def _add_source(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--example", metavar="NAME", help=f"built-in instance ({', '.join(instances.names())})")
    g.add_argument("--file", metavar="PATH", help="instance file")


def cmd_check(args):
    ni = _source(args)
    inst = ni.instance
    rep = predict(inst)
    out = [f"instance: {ni.name} (K={inst.K}, d={inst.d})"]
    if rep.non_domination:
        out.append("non_domination: true")
    else:
        i, j = rep.violating_pair
        out.append(f"non_domination: false (violating pair {i + 1},{j + 1})")
    op = rep.order_preservation
    out.append(f"order_preservation: {op.status}")
    out.append(f"  margin: {op.margin:.10g}")
    if op.feasible:
        out.append(f"  witness: {_short(op.witness)}")
        out.append(f"  Xw: {_short(inst.X @ op.witness)}")
    out.append(f"r_hat: {_short(rep.r_hat)}")
    top = np.flatnonzero(np.isclose(rep.r_hat, rep.r_hat.max(), rtol=0, atol=1e-10)) + 1
    out.append(f"r_hat_argmax: {','.join(map(str, top))}")
    oap = {True: "true", False: "false", None: "undefined (tied optimum)"}[rep.optimal_action_preserved]
    out.append(f"optimal_action_preserved: {oap}")
    out.append(f"eps_approx: {rep.eps_approx:.10g}")
    out.append(f"pg_prediction: {rep.pg_prediction}")
    out.append(f"npg_prediction: {rep.npg_prediction}")
    print("\n".join(out))
    return EXIT_OK


def _write_trajectory(path, traj):
    d = traj.theta.shape[1]
    header = " ".join(TRAJECTORY_COLUMNS + [f"theta_{k}" for k in range(d)])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {header}\n")
        for t, th, v, g, gn in zip(traj.t, traj.theta, traj.value, traj.gap, traj.grad_norm):
            fh.write(f"{int(t)} {_num(v)} {_num(g)} {_num(gn)} {_vec(th)}\n")


def cmd_run(args):
    ni = _source(args)
    inst = ni.instance
    eta = args.eta if args.eta is not None else ni.canonical_eta
    theta1 = args.theta1 if args.theta1 is not None else ni.canonical_theta1
    if eta is None or theta1 is None:
        raise UsageError("--eta and --theta1 are required when the source gives no defaults")
    if len(theta1) != inst.d:
        raise UsageError(f"--theta1 needs {inst.d} numbers, got {len(theta1)}")
    try:
        cfg = RunConfig(args.alg, eta, np.array(theta1, dtype=float), args.max_iters, args.gap_tol,
                        args.stride, args.enforce_safe_eta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", StepSizeWarning)
        try:
            traj = run(inst, cfg)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.out:
        _write_trajectory(args.out, traj)

    print(f"algorithm: {args.alg}  eta: {eta:g}  theta1: {_short(theta1)}")
    print(f"terminal: {traj.terminal}")
    print(f"iterations: {traj.iterations}")
    print(f"final_value: {traj.final_value:.12g}")
    print(f"final_gap: {traj.final_gap:.6e}")
    print(f"final_theta: {_short(traj.final_theta)}")
    print(f"final_policy: {' '.join(format(p, '.6e') for p in traj.final_policy)}")
    limit = "none" if traj.limit_action is None else str(traj.limit_action + 1)
    print(f"limit_action: {limit} ({traj.support})")
    if args.alg == "npg":
        # Score differences move by eta * (r_hat(a) - r_hat(b)), so tied r_hat pairs keep their ratio.
        r_hat = npg_direction(inst).r_hat
        pi = traj.final_policy
        for a in range(inst.K):
            for b in range(a + 1, inst.K):
                if abs(r_hat[a] - r_hat[b]) <= 1e-10:
                    print(f"constant_ratio: pi({a + 1})/pi({b + 1}) = {pi[a] / pi[b]:.12g}")
    if args.out:
        print(f"wrote {len(traj.t)} rows to {args.out}")
    if traj.terminal == "numerical-failure":
        print("error: iterate left the representable range; last finite iterate reported above", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_landscape(args):
    ni = _source(args)
    inst = ni.instance
    if inst.d < 2:
        raise UsageError("landscape needs d >= 2")
    center = np.zeros(inst.d) if args.center is None else np.array(args.center, dtype=float)
    dims = tuple(args.dims)
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    try:
        grid = sample_landscape(inst, center, args.half_width, args.grid, dims)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    i, j = grid.dims
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# expected reward; first row: theta_{j} axis, first column: theta_{i} axis\n")
        fh.write(f"# center: {_vec(center)}\n")
        fh.write("nan " + _vec(grid.axis2) + "\n")
        for a, row in zip(grid.axis1, grid.values):
            fh.write(f"{_num(a)} {_vec(row)}\n")
    print(f"wrote {args.grid}x{args.grid} grid to {args.out}")
    print(f"value range: [{grid.values.min():.10g}, {grid.values.max():.10g}]")
    return EXIT_OK


def read_trajectory(path):
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read trajectory {path}: {exc}") from None
    if data.shape[1] < len(TRAJECTORY_COLUMNS):
        raise UsageError(f"{path}: expected columns {' '.join(TRAJECTORY_COLUMNS)} ...")
    return data[:, 0], data[:, 2]


def cmd_rate(args):
    t, gap = read_trajectory(args.trajectory)
    try:
        fit = fit_rate_arrays(t, gap, args.model, args.window)
    except InsufficientDataError as exc:
        raise UsageError(str(exc)) from None
    kind = "log gap vs t" if fit.model == "exp" else "log gap vs log t"
    print(f"model: {fit.model} ({kind})")
    print(f"slope: {fit.slope:.10g}")
    print(f"intercept: {fit.intercept:.10g}")
    print(f"r_squared: {fit.r_squared:.10g}")
    print(f"window: {fit.window[0]} {fit.window[1]} ({fit.n_points} points)")
    return EXIT_OK


def cmd_examples(args):
    if args.show:
        ni = _source(argparse.Namespace(example=args.show, file=None))
        sys.stdout.write(f"# {ni.name}\n")
        sys.stdout.write(instances.dumps(ni.instance, ni.canonical_theta1, ni.canonical_eta))
        return EXIT_OK
    for name in instances.names():
        ni = instances.builtin(name)
        inst = ni.instance
        note = "" if ni.eta_from_source else " (eta by convention)"
        print(f"{name:<9} K={inst.K} d={inst.d} r=({_short(inst.r)}) "
              f"theta1=({_short(ni.canonical_theta1)}) eta={ni.canonical_eta:g}{note}")
    return EXIT_OK


def cmd_verify(args):
    if args.only:
        try:
            chosen = [verify.fact_by_key(k.upper()) for k in args.only]
        except KeyError as exc:
            raise UsageError(f"unknown fact {exc.args[0]}; valid keys: {' '.join(f.key for f in verify.FACTS)}") from None
        facts = [verify.evaluate(f) for f in chosen]
    else:
        facts = verify.run_suite(fast=args.fast, threads=args.threads)
    for res in facts:
        print(verify.format_result(res))
    failed = [r.fact.key for r in facts if not r.passed]
    print(f"{len(facts) - len(failed)}/{len(facts)} facts passed" + (f"; failed: {' '.join(failed)}" if failed else ""))
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser():
    p = _Parser(prog="pg-orderlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="evaluate convergence conditions for an instance")
    _add_source(c)
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="run Softmax PG or NPG and write a trajectory")
    _add_source(r)
    r.add_argument("--alg", choices=["pg", "npg"], required=True)
    r.add_argument("--eta", type=float)
    r.add_argument("--theta1", type=float, nargs="+", metavar="X")
    r.add_argument("--max-iters", type=int, required=True)
    r.add_argument("--gap-tol", type=float, default=0.0)
    r.add_argument("--stride", type=int, help="record every n-th iterate (default: at most 10^4 rows)")
    r.add_argument("--enforce-safe-eta", action="store_true", help="refuse PG step sizes above the safe bound")
    r.add_argument("--out", metavar="PATH", help="trajectory output file")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("landscape", help="sample expected reward on a 2-D parameter grid")
    _add_source(g)
    g.add_argument("--center", type=float, nargs="+", metavar="X")
    g.add_argument("--half-width", type=float, default=12.0)
    g.add_argument("--grid", type=int, default=101)
    g.add_argument("--dims", type=int, nargs=2, default=[0, 1], metavar=("I", "J"))
    g.add_argument("--out", metavar="PATH", required=True)
    g.set_defaults(func=cmd_landscape)

    t = sub.add_parser("rate", help="fit a convergence rate to a trajectory file")
    t.add_argument("trajectory")
    t.add_argument("--model", choices=["exp", "power"], default="exp")
    t.add_argument("--window", type=float, default=0.5, help="tail fraction of samples to fit")
    t.set_defaults(func=cmd_rate)

    e = sub.add_parser("examples", help="list built-in instances")
    e.add_argument("--show", metavar="NAME", help="print one instance in file format")
    e.set_defaults(func=cmd_examples)

    v = sub.add_parser("verify", help="run the reproduction suite")
    v.add_argument("--fast", action="store_true", help="skip the long PG runs")
    v.add_argument("--only", nargs="+", metavar="KEY", help="run only these facts (e.g. C3 C4)")
    v.add_argument("--threads", type=int, help=f"worker threads (default: ${verify.THREADS_ENV} or CPU count)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
