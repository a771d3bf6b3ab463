"""Command-line front end.

Subcommands: gen, simulate, baseline, verify, audit, report. All outputs
are line-delimited ``record key=value ...`` text with rationals rendered
as ``num`` or ``num/den``; no floating point and no timestamps, so
identical inputs produce byte-identical outputs.

Exit codes: 0 success (verify: feasible, audit: all budgets hold),
1 invariant violation, 2 usage or input error.

Environment: FLOWSCHED_EPSILON supplies a default epsilon when neither
--epsilon nor the file header should win; FLOWSCHED_HORIZON overrides the
default baseline horizon.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import audit_rejections, compute_metrics, verify_duals
from .baselines import (HorizonTooShort, default_horizon, lp_cost,
                        preemptive_hdf, transport_opt)
from .core import InvalidInstance, JobNotRunnableOnMachine, ONE, Rational
from .dispatch import MultiTrace, run_multi
from .harness import (BadParameters, MalformedLine, MissingHeader, WorkloadModel,
                      format_trace, generate, parse_trace, serialize_trace)
from .scheduler import run

USAGE_ERROR = 2
VIOLATION = 1

_INPUT_ERRORS = (InvalidInstance, JobNotRunnableOnMachine, MalformedLine,
                 MissingHeader, BadParameters, HorizonTooShort, OSError,
                 ValueError, ZeroDivisionError)


def _rat(text: str) -> Rational:
    return Rational(text)


def _speed(text: str) -> Rational:
    # accept both "5/4" and the augmented form "1+1/4"
    if text.startswith("1+"):
        return ONE + Rational(text[2:])
    return Rational(text)


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value)


class _Writer:
    def __init__(self, out_path: str | None):
        self.lines: list[str] = []
        self.out_path = out_path

    def emit(self, record: str, **fields) -> None:
        parts = [record] + [f"{k}={_fmt(v)}" for k, v in fields.items()]
        self.lines.append(" ".join(parts))

    def flush(self) -> None:
        text = "\n".join(self.lines) + ("\n" if self.lines else "")
        if self.out_path:
            Path(self.out_path).write_text(text, encoding="ascii")
        else:
            sys.stdout.write(text)


def _load_instance(args) -> "Instance":
    instance = parse_trace(args.trace)
    epsilon = getattr(args, "epsilon", None)
    if epsilon is None and os.environ.get("FLOWSCHED_EPSILON"):
        epsilon = _rat(os.environ["FLOWSCHED_EPSILON"])
    if epsilon is not None:
        instance = replace(instance, epsilon=epsilon)
    machines = getattr(args, "machines", None)
    if machines is not None:
        instance = replace(instance, machines=machines)
    from .core import validate_instance
    return validate_instance(instance)


def _env_horizon() -> int | None:
    raw = os.environ.get("FLOWSCHED_HORIZON")
    return int(raw) if raw else None


def _run_instance(instance):
    if instance.machines == 1:
        return run(instance)
    return run_multi(instance)


def _each_trace(result):
    if isinstance(result, MultiTrace):
        return result.traces
    return [result]


# -- subcommands -----------------------------------------------------------


def cmd_gen(args) -> int:
    model = WorkloadModel(
        kind=args.model, n=args.n, seed=args.seed, L=args.L, scale=args.scale,
        rate=args.rate, shape=args.shape, max_release=args.max_release,
        max_size=args.max_size, max_weight=args.max_weight,
        machines=args.machines or 1, epsilon=args.epsilon or Rational(1, 4),
        speedup=args.speedup)
    instance = generate(model)
    serialize_trace(instance, args.out, seed=args.seed)
    writer = _Writer(None)
    fields = {"kind": model.kind, "jobs": len(instance.jobs), "out": args.out,
              "seed": args.seed}
    if model.kind == "adversarial_L":
        # the construction is integer-rescaled; record the factor used
        fields.update(L=model.L, scale=model.scale,
                      long_job_size=model.L * model.L * model.scale)
    writer.emit("generated", **fields)
    writer.flush()
    return 0


def cmd_simulate(args) -> int:
    instance = _load_instance(args)
    result = _run_instance(instance)
    metrics = compute_metrics(result, instance)
    writer = _Writer(args.out)
    writer.emit("header", m=instance.machines, epsilon=instance.epsilon,
                speedup=instance.speedup)
    if isinstance(result, MultiTrace):
        for decision in result.decisions:
            writer.emit("dispatch", job=decision.job, machine=decision.machine,
                        score=decision.score)
    for trace in _each_trace(result):
        writer.emit("machine", index=trace.machine,
                    arrivals=",".join(map(str, trace.arrivals)) or "-")
        for slot in trace.slots:
            writer.emit("slot", machine=trace.machine, t=slot.t, plan=slot.plan,
                        real=slot.real, idled=slot.idled)
        for event in trace.events:
            writer.emit("event", machine=trace.machine, t=event.time,
                        job=event.job, kind=event.kind)
        for jid in trace.arrivals:
            writer.emit("departure", machine=trace.machine, job=jid,
                        time=trace.departure[jid])
        for jid in trace.arrivals:
            impact = trace.impacts[jid]
            writer.emit("impact", machine=trace.machine, job=jid,
                        total=impact.total, plus=impact.plus, minus=impact.minus,
                        self_term=impact.self_term,
                        density_class=impact.density_class,
                        in_plus=impact.in_plus, in_minus=impact.in_minus)
        for jid in trace.arrivals:
            decision = trace.decisions[jid]
            writer.emit("decision", machine=trace.machine, job=jid,
                        reject=decision.reject, reason=decision.reason,
                        plus_ordinal=decision.plus_ordinal,
                        minus_ordinal=decision.minus_ordinal)
    writer.emit("metric", name="weighted_flow", value=metrics.weighted_flow)
    writer.emit("metric", name="fractional_flow_plan",
                value=metrics.fractional_flow_plan)
    writer.emit("metric", name="departure_objective",
                value=metrics.departure_objective)
    writer.emit("metric", name="rejected_weight_immediate",
                value=metrics.rejected_weight_immediate)
    writer.emit("metric", name="rejected_weight_delayed",
                value=metrics.rejected_weight_delayed)
    writer.emit("metric", name="total_weight", value=metrics.total_weight)
    writer.flush()
    return 0


def cmd_baseline(args) -> int:
    instance = _load_instance(args)
    if instance.machines != 1:
        raise BadParameters("baseline handles single-machine instances")
    speed = args.speed if args.speed is not None else ONE + instance.speedup
    horizon = args.horizon or _env_horizon()
    if horizon is None:
        horizon = default_horizon(instance.jobs, speed)
    opt = transport_opt(instance.jobs, speed=speed, horizon=horizon)
    hdf = lp_cost(preemptive_hdf(instance.jobs, speed=speed))
    writer = _Writer(args.out)
    writer.emit("baseline", speed=speed, horizon=horizon, transport_opt=opt,
                hdf_cost=hdf)
    writer.flush()
    return 0


def cmd_verify(args) -> int:
    instance = _load_instance(args)
    speedup = args.speedup if args.speedup is not None else instance.speedup
    result = _run_instance(instance)
    writer = _Writer(args.out)
    all_feasible = True
    for trace in _each_trace(result):
        cert = verify_duals(trace, instance, speedup)
        all_feasible &= cert.feasible
        writer.emit("certificate", machine=trace.machine, feasible=cert.feasible,
                    objective=cert.objective, speedup=cert.speedup,
                    alpha_total=sum(cert.alphas.values(), start=Rational(0)),
                    beta_total=sum(cert.betas, start=Rational(0)),
                    violations=len(cert.violations))
        for jid, t in cert.violations:
            writer.emit("violation", machine=trace.machine, job=jid, t=t)
    writer.flush()
    return 0 if all_feasible else VIOLATION


def cmd_audit(args) -> int:
    instance = _load_instance(args)
    result = _run_instance(instance)
    audit = audit_rejections(result, instance)
    writer = _Writer(args.out)
    for check in audit.checks:
        writer.emit("budget", name=check.name, value=check.value,
                    bound=check.bound, ok=check.ok)
    writer.emit("fraction", name="delayed", value=audit.delayed_fraction)
    writer.emit("fraction", name="immediate", value=audit.immediate_fraction)
    for trace in _each_trace(result):
        for bucket in trace.table_report:
            writer.emit("bucket", machine=trace.machine, table=bucket.table,
                        key=",".join(map(str, bucket.key)), count=bucket.count,
                        rejected=",".join(map(str, bucket.rejected_ordinals)) or "-",
                        weight_assigned=bucket.weight_assigned,
                        weight_rejected=bucket.weight_rejected)
    writer.flush()
    return 0 if audit.ok else VIOLATION


def _read_records(path: str) -> list[dict[str, str]]:
    records = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if not line.strip():
            continue
        head, *pairs = line.split()
        record = {"_record": head}
        for pair in pairs:
            key, _, value = pair.partition("=")
            record[key] = value
        records.append(record)
    return records


def cmd_report(args) -> int:
    metrics = {}
    for record in _read_records(args.sim):
        if record["_record"] == "metric":
            metrics[record["name"]] = Rational(record["value"])
    opt = None
    for record in _read_records(args.baseline):
        if record["_record"] == "baseline":
            opt = Rational(record["transport_opt"])
    if opt is None:
        raise BadParameters(f"no baseline record in {args.baseline}")
    total = metrics["total_weight"]
    writer = _Writer(args.out)
    writer.emit(
        "report",
        weighted_flow=metrics["weighted_flow"],
        transport_opt=opt,
        ratio=metrics["weighted_flow"] / opt if opt else None,
        departure_objective=metrics["departure_objective"],
        delayed_fraction=metrics["rejected_weight_delayed"] / total if total else None,
        immediate_fraction=metrics["rejected_weight_immediate"] / total if total else None,
    )
    if args.audit:
        for record in _read_records(args.audit):
            if record["_record"] == "budget":
                writer.emit("report_budget", name=record["name"], ok=record["ok"])
    writer.flush()
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowsched",
        description="online weighted flow-time scheduling with rejection")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a workload trace file")
    gen.add_argument("--model", required=True,
                     choices=("poisson_pareto", "uniform", "adversarial_L", "fixed"))
    gen.add_argument("--out", required=True)
    gen.add_argument("--n", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--L", type=int, default=10)
    gen.add_argument("--scale", type=int, default=1)
    gen.add_argument("--rate", type=float, default=0.5)
    gen.add_argument("--shape", type=float, default=1.8)
    gen.add_argument("--max-release", type=int, default=20, dest="max_release")
    gen.add_argument("--max-size", type=int, default=8, dest="max_size")
    gen.add_argument("--max-weight", type=int, default=12, dest="max_weight")
    gen.add_argument("--machines", type=int, default=1)
    gen.add_argument("--epsilon", type=_rat, default=None)
    gen.add_argument("--speedup", type=_rat, default=Rational(0))
    gen.set_defaults(func=cmd_gen)

    sim = sub.add_parser("simulate", help="run the online policy on a trace file")
    sim.add_argument("--trace", required=True)
    sim.add_argument("--epsilon", type=_rat, default=None)
    sim.add_argument("--machines", type=int, default=None)
    sim.add_argument("--out", default=None)
    sim.set_defaults(func=cmd_simulate)

    base = sub.add_parser("baseline", help="exact offline benchmark values")
    base.add_argument("--trace", required=True)
    base.add_argument("--speed", type=_speed, default=None,
                      help="benchmark speed, e.g. 1, 5/4 or 1+1/4")
    base.add_argument("--horizon", type=int, default=None)
    base.add_argument("--out", default=None)
    base.set_defaults(func=cmd_baseline)

    ver = sub.add_parser("verify", help="dual-fitting certificate; exit 0 iff feasible")
    ver.add_argument("--trace", required=True)
    ver.add_argument("--epsilon", type=_rat, default=None)
    ver.add_argument("--speedup", type=_rat, default=None)
    ver.add_argument("--out", default=None)
    ver.set_defaults(func=cmd_verify)

    aud = sub.add_parser("audit", help="rejection budgets; exit 0 iff all hold")
    aud.add_argument("--trace", required=True)
    aud.add_argument("--epsilon", type=_rat, default=None)
    aud.add_argument("--out", default=None)
    aud.set_defaults(func=cmd_audit)

    rep = sub.add_parser("report", help="join simulate/baseline outputs")
    rep.add_argument("--sim", required=True)
    rep.add_argument("--baseline", required=True)
    rep.add_argument("--audit", default=None)
    rep.add_argument("--out", default=None)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else USAGE_ERROR
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
