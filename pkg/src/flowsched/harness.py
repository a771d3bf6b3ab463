"""Workload generation, instance file round-trips, policy comparison.

The workload trace file is line oriented and purely textual:

    m=1 epsilon=1/2 speedup=0 seed=42
    0 0 1 4
    1 1 3/2 1

Header: machine count, epsilon, benchmark speedup, generator seed ("-"
when not applicable). One job per line: id, release, weight ("num" or
"num/den"), sizes as comma-separated integers with "-" for a machine that
cannot run the job. ``parse_trace(serialize_trace(x)) == x`` bit-exactly.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from math import ceil
from pathlib import Path

from .baselines import transport_opt
from .core import Instance, Job, ONE, Rational, ZERO, validate_instance
from .scheduler import run


class BadParameters(ValueError):
    pass


class MissingHeader(ValueError):
    pass


class MalformedLine(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


# -- generators ----------------------------------------------------------------

KINDS = ("poisson_pareto", "uniform", "adversarial_L", "fixed")


@dataclass(frozen=True)
class WorkloadModel:
    """Parameters for one generator; a fixed seed yields an identical job list."""

    kind: str
    n: int = 0
    seed: int = 0
    L: int = 10
    scale: int = 1
    rate: float = 0.5       # poisson arrival rate
    shape: float = 1.8      # pareto tail index
    size_cap: int = 25
    max_release: int = 20
    max_size: int = 8
    max_weight: int = 12
    machines: int = 1
    epsilon: Rational = Rational(1, 4)
    speedup: Rational = ZERO


def generate(model: WorkloadModel) -> Instance:
    if model.kind not in KINDS:
        raise BadParameters(f"unknown workload kind {model.kind!r}")
    if model.n < 0:
        raise BadParameters("n must be nonnegative")
    if model.kind == "adversarial_L":
        return _adversarial(model)
    if model.kind == "fixed":
        jobs = _fixed_jobs(model.n)
    elif model.kind == "uniform":
        jobs = _uniform_jobs(model)
    else:
        jobs = _poisson_pareto_jobs(model)
    return validate_instance(Instance(tuple(jobs), model.machines,
                                      model.epsilon, model.speedup))


def _adversarial(model: WorkloadModel) -> Instance:
    """Pile-up workload: a long unit-weight job, then L unit jobs.

    The construction is rescaled to integer slots: the long job has size
    L*L*scale so that a policy that refuses to abandon it strands the L
    followers for its whole run.
    """
    if model.L < 1 or model.scale < 1:
        raise BadParameters("adversarial_L needs L >= 1 and scale >= 1")
    jobs = [Job(0, 0, ONE, (model.L * model.L * model.scale,))]
    for i in range(1, model.L + 1):
        jobs.append(Job(i, i, ONE, (1,)))
    return validate_instance(Instance(tuple(jobs), 1, model.epsilon, model.speedup))


def _fixed_jobs(n: int) -> list[Job]:
    dens = (1, 2, 4)
    return [Job(i, (2 * i) // 3, Rational(1 + i % 5, dens[i % 3]), (1 + i % 4,))
            for i in range(n)]


def _rand_weight(rng: random.Random, max_weight: int) -> Rational:
    return Rational(rng.randint(1, max_weight), rng.choice((1, 2, 4)))


def _rand_sizes(rng: random.Random, machines: int, max_size: int) -> tuple[int | None, ...]:
    sizes: list[int | None] = [rng.randint(1, max_size) for _ in range(machines)]
    if machines > 1:
        for m in range(machines):
            if rng.random() < 0.15 and sum(s is not None for s in sizes) > 1:
                sizes[m] = None
    return tuple(sizes)


def _uniform_jobs(model: WorkloadModel) -> list[Job]:
    rng = random.Random(model.seed)
    raw = []
    for _ in range(model.n):
        raw.append((rng.randint(0, max(model.max_release, 0)),
                    _rand_weight(rng, model.max_weight),
                    _rand_sizes(rng, model.machines, model.max_size)))
    raw.sort(key=lambda r: r[0])
    return [Job(i, r, w, s) for i, (r, w, s) in enumerate(raw)]


def _poisson_pareto_jobs(model: WorkloadModel) -> list[Job]:
    rng = random.Random(model.seed)
    t = 0.0
    raw = []
    for _ in range(model.n):
        t += rng.expovariate(model.rate)
        size = min(model.size_cap, max(1, ceil(rng.paretovariate(model.shape))))
        sizes: list[int | None] = []
        for m in range(model.machines):
            stretch = 1 if model.machines == 1 else rng.choice((1, 1, 2, 3))
            sizes.append(min(model.size_cap, size * stretch))
        raw.append((int(t), _rand_weight(rng, model.max_weight), tuple(sizes)))
    raw.sort(key=lambda r: r[0])
    return [Job(i, r, w, s) for i, (r, w, s) in enumerate(raw)]


# -- trace file round-trips -------------------------------------------------------

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")
_HEADER_RE = re.compile(
    r"^m=(?P<m>\d+)\s+epsilon=(?P<eps>\S+)\s+speedup=(?P<spd>\S+)\s+seed=(?P<seed>\S+)$")


def _parse_rational(text: str) -> Rational:
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    return Rational(text)  # raises ZeroDivisionError on "n/0"


def serialize_trace(instance: Instance, path: str | Path,
                    seed: int | None = None) -> None:
    Path(path).write_text(format_trace(instance, seed), encoding="ascii")


def format_trace(instance: Instance, seed: int | None = None) -> str:
    lines = [f"m={instance.machines} epsilon={instance.epsilon} "
             f"speedup={instance.speedup} seed={'-' if seed is None else seed}"]
    for job in instance.jobs:
        sizes = ",".join("-" if s is None else str(s) for s in job.sizes)
        lines.append(f"{job.id} {job.release} {job.weight} {sizes}")
    return "\n".join(lines) + "\n"


def parse_trace(path: str | Path) -> Instance:
    return parse_trace_text(Path(path).read_text(encoding="ascii"))


def parse_trace_text(text: str) -> Instance:
    lines = text.splitlines()
    header = None
    jobs: list[Job] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            match = _HEADER_RE.match(line)
            if not match:
                raise MissingHeader(f"line {line_no} is not a valid header: {line!r}")
            try:
                header = (int(match["m"]), _parse_rational(match["eps"]),
                          _parse_rational(match["spd"]), match["seed"])
            except (ValueError, ZeroDivisionError) as exc:
                raise MissingHeader(f"bad header on line {line_no}: {exc}") from exc
            continue
        fields = line.split()
        if len(fields) != 4:
            raise MalformedLine(line_no, f"expected 4 fields, got {len(fields)}")
        try:
            jid = int(fields[0])
            release = int(fields[1])
            weight = _parse_rational(fields[2])
            sizes = tuple(None if tok == "-" else int(tok)
                          for tok in fields[3].split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedLine(line_no, str(exc)) from exc
        jobs.append(Job(jid, release, weight, sizes))
    if header is None:
        raise MissingHeader("no header line found")
    machines, epsilon, speedup, _ = header
    return validate_instance(Instance(tuple(jobs), machines, epsilon, speedup))


# -- policy comparison --------------------------------------------------------------


def greedy_nonpreemptive(jobs, machine: int = 0) -> tuple[Rational, dict[int, int]]:
    """No-rejection baseline: whenever the machine idles, start the densest
    released job and run it to completion."""
    pending = sorted(jobs, key=lambda j: (j.release, j.id))
    completions: dict[int, int] = {}
    flow = ZERO
    t = 0
    while pending:
        available = [j for j in pending if j.release <= t]
        if not available:
            t = min(j.release for j in pending)
            continue
        job = min(available, key=lambda j: (-j.density(machine), j.release, j.id))
        pending.remove(job)
        t += job.size_on(machine)
        completions[job.id] = t
        flow += job.weight * (t - job.release)
    return flow, completions


def compare_policies(instance: Instance) -> list[dict]:
    """Run the rejecting policy and the no-rejection greedy on a small
    single-machine instance and report both against the exact optimum."""
    inst = validate_instance(instance)
    if inst.machines != 1:
        raise BadParameters("compare_policies handles single-machine instances")
    if not inst.jobs:
        return []
    from .analysis import compute_metrics  # local import to avoid a cycle

    opt = transport_opt(inst.jobs, speed=ONE)
    trace = run(inst)
    metrics = compute_metrics(trace, inst)
    greedy_flow, _ = greedy_nonpreemptive(inst.jobs)
    rejected = metrics.rejected_weight_immediate + metrics.rejected_weight_delayed
    return [
        {"policy": "online_reject",
         "weighted_flow": metrics.weighted_flow,
         "ratio_to_opt": metrics.weighted_flow / opt if opt else None,
         "departure_objective": metrics.departure_objective,
         "rejected_fraction": rejected / metrics.total_weight},
        {"policy": "greedy_no_reject",
         "weighted_flow": greedy_flow,
         "ratio_to_opt": greedy_flow / opt if opt else None,
         "departure_objective": greedy_flow,
         "rejected_fraction": ZERO},
        {"policy": "transport_opt",
         "weighted_flow": opt,
         "ratio_to_opt": ONE if opt else None,
         "departure_objective": opt,
         "rejected_fraction": ZERO},
    ]
