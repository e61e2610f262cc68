"""Command-line interface: simulations, verifications, curves.

Subcommands: dist {pmf|sample}, queue, tandem, perc {simulate|identity},
tc, verify.  Common flags (--seed, --out, --format, --threads, --config)
are accepted by every subcommand; values from a --config JSON file fill
in any flag not given explicitly.  Exit codes: 0 success, 1 failed
verification, 2 usage or validation error.

Outputs are deterministic for a fixed argv and seed: floats print with
17 significant digits, JSON keys are sorted, and replica merging is by
replica index regardless of --threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import distributions as dist
from . import percolation as perc
from . import timeconstants as tc
from .queue_core import QueueParams, simulate, stationary_law, _condition_holds
from .streams import RandomStream
from .tandem import TandemConfig, simulate_tandem
from .verify import SUITES, run_suite

__all__ = ["main", "run"]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _write_out(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, default=None, help="PRNG seed (default 1)")
    sp.add_argument("--out", default=None, help="write the primary output to this file")
    sp.add_argument("--format", choices=("csv", "json"), default=None,
                    help="stdout format where both make sense")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads for replica-parallel commands (default: cores)")
    sp.add_argument("--config", default=None,
                    help="JSON file with defaults for any flag of this subcommand")


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not args.config:
        return
    with open(args.config) as fh:
        conf = json.load(fh)
    for key, val in conf.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            parser.error(f"unknown config key {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, val)


def _seed_of(args: argparse.Namespace) -> int:
    return 1 if args.seed is None else int(args.seed)


def _spec_from(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dist.DistSpec:
    try:
        return dist.DistSpec.from_json(args.spec)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        parser.error(f"bad --spec: {exc}")


def _queue_params(args, parser) -> QueueParams:
    missing = [k for k in ("p", "alpha", "q", "beta") if getattr(args, k) is None]
    if missing:
        parser.error(f"missing required flags: {', '.join('--' + m for m in missing)}")
    try:
        return QueueParams(p=args.p, alpha=args.alpha, q=args.q, beta=args.beta)
    except ValueError as exc:
        parser.error(str(exc))


def _parse_grid(text: str, parser) -> list[float]:
    """Either a comma list '1,2,3' or a range 'lo:hi:step'."""
    try:
        if ":" in text:
            lo, hi, step = (float(t) for t in text.split(":"))
            n = int(round((hi - lo) / step))
            return [lo + i * step for i in range(n + 1) if lo + i * step <= hi + 1e-12]
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        parser.error(f"bad grid {text!r}; use 'lo:hi:step' or a comma list")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="batchq",
                                     description="Batch queues, Burke-type checks, "
                                                 "and first-passage time constants")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("dist", help="distribution pmf tables and samples")
    dist_sub = p_dist.add_subparsers(dest="action", required=True)
    for action, hlp in (("pmf", "tabulate the pmf"), ("sample", "draw samples")):
        sp = dist_sub.add_parser(action, help=hlp)
        sp.add_argument("--spec", required=True, help='distribution JSON, e.g. '
                        '\'{"kind": "ber_geom", "p": 0.333, "alpha": 0.667}\'')
        if action == "pmf":
            sp.add_argument("--max-k", type=int, default=None, help="largest k (default 20)")
        else:
            sp.add_argument("--n", type=int, default=None, help="draw count (default 10)")
        _add_common(sp)

    sp = sub.add_parser("queue", help="simulate one queue; trace CSV plus summary JSON")
    for flag in ("p", "alpha", "q", "beta"):
        sp.add_argument(f"--{flag}", type=float, default=None)
    sp.add_argument("--slots", type=int, default=None, help="number of slots (default 100000)")
    sp.add_argument("--init-x", type=int, default=None)
    sp.add_argument("--burn-in", type=int, default=None)
    _add_common(sp)

    sp = sub.add_parser("tandem", help="simulate queues in series; trace CSV plus summary")
    for flag in ("p", "alpha", "q", "beta"):
        sp.add_argument(f"--{flag}", type=float, default=None)
    sp.add_argument("--stages", type=int, default=None, help="queue count R (default 2)")
    sp.add_argument("--slots", type=int, default=None)
    sp.add_argument("--burn-in", type=int, default=None)
    _add_common(sp)

    p_perc = sub.add_parser("perc", help="percolation estimates and the tandem identity")
    perc_sub = p_perc.add_subparsers(dest="action", required=True)
    sp = perc_sub.add_parser("simulate", help="Monte Carlo time-constant estimates")
    sp.add_argument("--weights", required=True, help="weight distribution JSON")
    sp.add_argument("--x", required=True, help="aspect ratio grid: comma list or lo:hi:step")
    sp.add_argument("--n", type=int, default=None, help="lattice size N (default 200)")
    sp.add_argument("--replicas", type=int, default=None, help="replica count (default 50)")
    _add_common(sp)
    sp = perc_sub.add_parser("identity", help="pathwise tandem-vs-percolation identity")
    for flag in ("p", "alpha", "q", "beta"):
        sp.add_argument(f"--{flag}", type=float, default=None)
    sp.add_argument("--stages", type=int, default=None)
    sp.add_argument("--window", type=int, default=None)
    sp.add_argument("--instances", type=int, default=None)
    _add_common(sp)

    sp = sub.add_parser("tc", help="time constants: single value or curve CSV")
    sp.add_argument("--variant", required=True, choices=tc.VARIANTS)
    sp.add_argument("--x", required=True, help="abscissa: single value, comma list, or lo:hi:step")
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--beta", type=float, default=None)
    _add_common(sp)

    sp = sub.add_parser("verify", help="run the verification suites; exit 0 iff all pass")
    sp.add_argument("--suite", default=None, choices=SUITES, help="default: all")
    _add_common(sp)
    return parser


def _cmd_dist(args, parser) -> int:
    spec = _spec_from(args, parser)
    fmt = args.format or "csv"
    if args.action == "pmf":
        if not spec.is_discrete:
            parser.error("pmf is a discrete-only operation")
        max_k = 20 if args.max_k is None else args.max_k
        rows = [(k, dist.pmf(spec, k)) for k in range(max_k + 1)]
        if fmt == "json":
            text = _json_dump({"spec": spec.to_dict(), "pmf": [v for _, v in rows]})
        else:
            text = "k,pmf\n" + "".join(f"{k},{_fmt(v)}\n" for k, v in rows)
    else:
        n = 10 if args.n is None else args.n
        draws = dist.sample_n(spec, RandomStream(_seed_of(args)), n)
        if fmt == "json":
            vals = [int(v) for v in draws] if spec.is_discrete else [float(v) for v in draws]
            text = _json_dump({"spec": spec.to_dict(), "seed": _seed_of(args), "samples": vals})
        else:
            col = (str(int(v)) if spec.is_discrete else _fmt(v) for v in draws)
            text = "value\n" + "".join(f"{v}\n" for v in col)
    _write_out(text, args.out)
    return 0


def _cmd_queue(args, parser) -> int:
    params = _queue_params(args, parser)
    slots = args.slots or 100_000
    burn = min(args.burn_in if args.burn_in is not None else 10_000, slots // 2)
    trace = simulate(params.arrival_spec, params.service_spec, slots,
                     init_x=args.init_x or 0, stream=RandomStream(_seed_of(args)))
    if args.out:
        trace.to_csv(args.out)
    summary = {
        "params": {"p": params.p, "alpha": params.alpha, "q": params.q, "beta": params.beta},
        "seed": _seed_of(args),
        "slots": slots,
        "burn_in": burn,
        "empirical": {
            "mean_x": float(trace.x[burn:].mean()),
            "mean_y": float(trace.y[burn:].mean()),
            "mean_d": float(trace.d[burn:].mean()),
        },
        "condition_residual": float(params.alpha / (1 - params.alpha) * params.p / (1 - params.p)
                                    - params.beta / (1 - params.beta) * params.q / (1 - params.q)),
    }
    if params.is_stable and _condition_holds(params):
        summary["stationary"] = stationary_law(params).to_dict()
    sys.stdout.write(_json_dump(summary))
    return 0


def _cmd_tandem(args, parser) -> int:
    params = _queue_params(args, parser)
    stages = args.stages or 2
    slots = args.slots or 100_000
    burn = min(args.burn_in if args.burn_in is not None else 10_000, slots // 2)
    config = TandemConfig.bergeom(params, stages)
    tt = simulate_tandem(config, slots, stream=RandomStream(_seed_of(args)))
    tt.check_feed_forward()
    if args.out:
        tt.to_csv(args.out)
    summary = {
        "params": {"p": params.p, "alpha": params.alpha, "q": params.q, "beta": params.beta},
        "stages": stages,
        "seed": _seed_of(args),
        "slots": slots,
        "burn_in": burn,
        "empirical_mean_x": [float(tr.x[burn:].mean()) for tr in tt.stages],
        "empirical_mean_d": [float(tr.d[burn:].mean()) for tr in tt.stages],
    }
    if params.is_stable and _condition_holds(params):
        summary["stationary_mean_x"] = stationary_law(params).mean_x
    sys.stdout.write(_json_dump(summary))
    return 0


def _cmd_perc(args, parser) -> int:
    if args.action == "simulate":
        spec = dist.DistSpec.from_json(args.weights)
        xs = _parse_grid(args.x, parser)
        if not xs:
            parser.error("empty --x grid")
        n = args.n or 200
        replicas = args.replicas or 50
        seed = _seed_of(args)
        threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
        lines = ["x,N,mean,ci_lo,ci_hi,replicas,seed"]
        stream = RandomStream(seed)
        for i, x in enumerate(xs):
            est = perc.estimate_time_constant(spec, float(x), n, replicas,
                                              stream.substream(i), threads=threads)
            lines.append(",".join([_fmt(x), str(n), _fmt(est.mean), _fmt(est.ci_lo),
                                   _fmt(est.ci_hi), str(replicas), str(seed)]))
        _write_out("\n".join(lines) + "\n", args.out)
        return 0
    # identity
    params = _queue_params(args, parser)
    stages = args.stages or 3
    window = args.window or 50
    instances = args.instances or 1000
    stream = RandomStream(_seed_of(args))
    failures = 0
    for i in range(instances):
        res = perc.tandem_identity_check(params.arrival_spec,
                                         [params.service_spec] * stages,
                                         window=window, stream=stream.substream(i))
        failures += 0 if res.equal else 1
    report = {"stages": stages, "window": window, "instances": instances,
              "failures": failures, "all_equal": failures == 0, "seed": _seed_of(args)}
    _write_out(_json_dump(report), args.out)
    return 0 if failures == 0 else 1


def _cmd_tc(args, parser) -> int:
    xs = _parse_grid(args.x, parser)
    if not xs:
        parser.error("empty --x grid")
    params = {}
    if args.q is not None:
        params["q"] = args.q
    if args.beta is not None:
        params["beta"] = args.beta
    try:
        result = tc.curve(args.variant, params, xs)
    except ValueError as exc:
        parser.error(str(exc))
    if len(xs) == 1 and not args.out and args.format != "csv":
        sys.stdout.write(f"{result.points[0].f!r}\n")
        return 0
    text = "variant,params,x,f,maximizer\n" + "\n".join(result.csv_rows()) + "\n"
    _write_out(text, args.out)
    return 0


def _cmd_verify(args, parser) -> int:
    suite = args.suite or "all"
    report = run_suite(suite, _seed_of(args))
    _write_out(_json_dump(report), args.out)
    if args.out:
        n_pass = sum(1 for c in report["checks"] if c["passed"])
        sys.stdout.write(f"{suite}: {n_pass}/{report['n_checks']} checks passed\n")
    return 0 if report["passed"] else 1


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, parser)
    handlers = {
        "dist": _cmd_dist,
        "queue": _cmd_queue,
        "tandem": _cmd_tandem,
        "perc": _cmd_perc,
        "tc": _cmd_tc,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args, parser)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
