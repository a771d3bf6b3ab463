"""Post-run analysis: metrics, rejection budgets, dual certificates.

Two accounting conventions coexist on purpose:

* the plan's fractional flow uses continuous (trapezoid within a slot)
  accounting, so a job processed without interruption from s accrues
  exactly ``w (s - r) + w p / 2``;
* the per-time dual variable beta_t is the total residual weight sampled
  at integer t, immediately after arrival processing. Residuals never
  increase within a slot, so ``sum_t beta_t >= fractional flow`` and the
  certified lower bound stays conservative.

Dual constraints are checked exactly for every (job, time) pair up to the
trace horizon; beyond it every beta is zero and the right-hand side only
grows, so finite sweeps certify all times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .baselines import transport_opt
from .core import HALF, Instance, Job, ONE, Rational, ZERO
from .dispatch import MultiTrace
from .scheduler import ScheduleTrace


class IncompleteTrace(ValueError):
    pass


class TooLargeForOracle(ValueError):
    pass


def _traces(run: ScheduleTrace | MultiTrace) -> list[ScheduleTrace]:
    return run.traces if isinstance(run, MultiTrace) else [run]


def _jobs_by_id(instance: Instance) -> dict[int, Job]:
    return {j.id: j for j in instance.jobs}


# -- metrics -----------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    weighted_flow: Rational            # real schedule, completed jobs only
    fractional_flow_plan: Rational     # continuous accounting over the plan
    departure_objective: Rational      # sum w_j (D_j - r_j) over all jobs
    rejected_weight_immediate: Rational
    rejected_weight_delayed: Rational
    total_weight: Rational


def fractional_flow_plan(trace: ScheduleTrace, instance: Instance) -> Rational:
    """Continuous fractional weighted flow of the plan on one machine.

    A unit processed in slot [s, s+1) contributes ``rho (s - r + 1/2)``:
    it waited s - r at full residual and drained linearly within the slot.
    """
    by_id = _jobs_by_id(instance)
    total = ZERO
    for jid, slots in trace.plan_slots().items():
        job = by_id[jid]
        rho = job.density(trace.machine)
        for s in slots:
            total += rho * (Rational(s - job.release) + HALF)
    return total


def compute_metrics(run: ScheduleTrace | MultiTrace, instance: Instance) -> Metrics:
    by_id = _jobs_by_id(instance)
    delivered: set[int] = set()
    weighted_flow = ZERO
    fractional = ZERO
    departure_objective = ZERO
    rejected_immediate = ZERO
    rejected_delayed = ZERO
    for trace in _traces(run):
        delivered.update(trace.arrivals)
        fractional += fractional_flow_plan(trace, instance)
        for jid, completion in trace.completion_real.items():
            job = by_id[jid]
            weighted_flow += job.weight * (completion - job.release)
        for jid, departure in trace.departure.items():
            job = by_id[jid]
            departure_objective += job.weight * (departure - job.release)
        for jid in trace.immediate_rejected:
            rejected_immediate += by_id[jid].weight
        for jid in trace.promoted_at:
            rejected_delayed += by_id[jid].weight
        missing = set(trace.arrivals) - set(trace.departure)
        if missing:
            raise IncompleteTrace(f"no departure recorded for jobs {sorted(missing)}")
    if delivered != set(by_id):
        raise IncompleteTrace("trace does not cover every job in the instance")
    total_weight = sum((j.weight for j in instance.jobs), start=ZERO)
    return Metrics(weighted_flow, fractional, departure_objective,
                   rejected_immediate, rejected_delayed, total_weight)


# -- residual reconstruction --------------------------------------------------


def beta_series(trace: ScheduleTrace, instance: Instance) -> list[Rational]:
    """Total residual weight at each integer time 0..horizon, sampled just
    after arrival processing (new arrivals count at full weight)."""
    by_id = _jobs_by_id(instance)
    horizon = trace.horizon()
    betas = [ZERO] * (horizon + 1)
    slots = trace.plan_slots()
    for jid in trace.kept:
        job = by_id[jid]
        rho = job.density(trace.machine)
        completion = trace.completion_plan[jid]
        my_slots = slots.get(jid, [])
        index = 0
        residual = Rational(job.size_on(trace.machine))
        for t in range(job.release, completion):
            while index < len(my_slots) and my_slots[index] < t:
                residual -= 1
                index += 1
            betas[t] += rho * residual
    return betas


def residual_size_at(trace: ScheduleTrace, instance: Instance, jid: int,
                     t: int) -> Rational:
    """Remaining size of a kept job at integer time t (post arrival)."""
    job = _jobs_by_id(instance)[jid]
    done = sum(1 for s in trace.plan_slots().get(jid, []) if s < t)
    return Rational(job.size_on(trace.machine) - done)


# -- rejection budgets ---------------------------------------------------------


@dataclass(frozen=True)
class BudgetCheck:
    name: str
    value: Rational
    bound: Rational
    ok: bool


@dataclass(frozen=True)
class RejectionAudit:
    checks: tuple[BudgetCheck, ...]
    delayed_fraction: Rational
    immediate_fraction: Rational
    total_weight: Rational

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def audit_rejections(run: ScheduleTrace | MultiTrace, instance: Instance) -> RejectionAudit:
    """Check the exact rejection-weight budgets of one run.

    (a) delayed-rejected weight <= eps * W;
    (b) minus-table rejected weight <= 4 eps * weight assigned to it;
    (c) plus-table rejected weight beyond each bucket's first job
        <= 2 eps * weight assigned to the plus table;
    (d) weight of first-in-bucket plus jobs <= 8 eps * W;
    (e) total rejected weight <= 15 eps * W.
    """
    by_id = _jobs_by_id(instance)
    eps = instance.epsilon
    total_weight = sum((j.weight for j in instance.jobs), start=ZERO)

    delayed = ZERO
    immediate = ZERO
    plus_assigned = minus_assigned = ZERO
    plus_rejected_first = plus_rejected_rest = ZERO
    minus_rejected = ZERO
    for trace in _traces(run):
        for jid in trace.promoted_at:
            delayed += by_id[jid].weight
        for jid in trace.immediate_rejected:
            immediate += by_id[jid].weight
        for bucket in trace.table_report:
            if bucket.table == "plus":
                plus_assigned += bucket.weight_assigned
                plus_rejected_first += bucket.weight_rejected_first
                plus_rejected_rest += bucket.weight_rejected - bucket.weight_rejected_first
            else:
                minus_assigned += bucket.weight_assigned
                minus_rejected += bucket.weight_rejected

    checks = (
        BudgetCheck("delayed_weight", delayed, eps * total_weight,
                    delayed <= eps * total_weight),
        BudgetCheck("minus_rejected", minus_rejected, 4 * eps * minus_assigned,
                    minus_rejected <= 4 * eps * minus_assigned),
        BudgetCheck("plus_rejected_nonfirst", plus_rejected_rest,
                    2 * eps * plus_assigned,
                    plus_rejected_rest <= 2 * eps * plus_assigned),
        BudgetCheck("plus_first_in_bucket", plus_rejected_first,
                    8 * eps * total_weight,
                    plus_rejected_first <= 8 * eps * total_weight),
        BudgetCheck("grand_total", immediate + delayed, 15 * eps * total_weight,
                    immediate + delayed <= 15 * eps * total_weight),
    )
    delayed_fraction = delayed / total_weight if total_weight else ZERO
    immediate_fraction = immediate / total_weight if total_weight else ZERO
    return RejectionAudit(checks, delayed_fraction, immediate_fraction, total_weight)


# -- dual certificate ----------------------------------------------------------


@dataclass(frozen=True)
class DualCertificate:
    machine: int
    alphas: dict[int, Rational]
    betas: tuple[Rational, ...]
    feasible: bool
    objective: Rational
    speedup: Rational
    violations: tuple[tuple[int, int], ...] = ()


def verify_duals(trace: ScheduleTrace, instance: Instance,
                 speedup: Rational = ZERO) -> DualCertificate:
    """Check every (job, time) dual constraint exactly and price the
    certificate ``sum alpha - (1 + speedup) sum beta``.

    The constraint is ``alpha_j / p_j - beta_t <= w_j (t - r_j)/p_j + w_j/2``
    for all t >= r_j. Infeasibility is reported, not raised.
    """
    by_id = _jobs_by_id(instance)
    betas = beta_series(trace, instance)
    horizon = len(betas) - 1
    alphas = {jid: trace.impacts[jid].total for jid in trace.arrivals}
    violations: list[tuple[int, int]] = []
    for jid in trace.arrivals:
        job = by_id[jid]
        size = job.size_on(trace.machine)
        rho = job.density(trace.machine)
        lhs_base = alphas[jid] / size
        rhs = job.weight * HALF
        for t in range(job.release, horizon + 1):
            if lhs_base - betas[t] > rhs:
                violations.append((jid, t))
            rhs += rho
    objective = sum(alphas.values(), start=ZERO) \
        - (ONE + Rational(speedup)) * sum(betas, start=ZERO)
    return DualCertificate(trace.machine, alphas, tuple(betas),
                           not violations, objective, Rational(speedup),
                           tuple(violations))


# -- oracle-backed lower bounds -------------------------------------------------


@dataclass(frozen=True)
class LowerBoundVerdict:
    oracle_value: Rational
    immediate_impact_total: Rational
    kept_impact_total: Rational
    slack: Rational                    # sum w_j p_j / eps
    plan_flow: Rational
    holds_oracle_bound: bool           # immediate impacts <= oracle + slack
    holds_plan_bound: bool             # plan flow <= kept impacts + slack

    @property
    def ok(self) -> bool:
        return self.holds_oracle_bound and self.holds_plan_bound


def lower_bound_check(run: ScheduleTrace | MultiTrace, instance: Instance,
                      limit: int = 12) -> LowerBoundVerdict:
    """Verify the two impact inequalities against the exact transport oracle.

    Only intended for small instances; raises :class:`TooLargeForOracle`
    beyond ``limit`` jobs.
    """
    if len(instance.jobs) > limit:
        raise TooLargeForOracle(
            f"instance has {len(instance.jobs)} jobs, limit is {limit}")
    by_id = _jobs_by_id(instance)
    traces = _traces(run)
    oracle = ZERO
    immediate = kept = ZERO
    slack = ZERO
    plan_flow = ZERO
    for trace in traces:
        machine_jobs = [by_id[jid] for jid in trace.arrivals]
        if machine_jobs:
            oracle += transport_opt(machine_jobs, speed=ONE, machine=trace.machine)
        rejected = trace.immediate_rejected
        for jid in trace.arrivals:
            total = trace.impacts[jid].total
            if jid in rejected:
                immediate += total
            else:
                kept += total
            job = by_id[jid]
            slack += job.weight * job.size_on(trace.machine) / instance.epsilon
        plan_flow += fractional_flow_plan(trace, instance)
    return LowerBoundVerdict(
        oracle_value=oracle,
        immediate_impact_total=immediate,
        kept_impact_total=kept,
        slack=slack,
        plan_flow=plan_flow,
        holds_oracle_bound=immediate <= oracle + slack,
        holds_plan_bound=plan_flow <= kept + slack,
    )


# -- density-class diagnostics ---------------------------------------------------


@dataclass(frozen=True)
class DensityProfile:
    peak_work: dict[int, Rational]      # per class: max_t residual size sum
    peak_weight: dict[int, Rational]    # per class: max_t residual weight sum
    plus_impact_total: Rational
    product_sum: Rational               # sum over classes of peak_work*peak_weight
    base_sum: Rational                  # sum w_j p_j + plus_impact_total
    ratio: Rational | None
    index_sets: dict[int, tuple[int, ...]] = field(default_factory=dict)


def density_profile(trace: ScheduleTrace, instance: Instance) -> DensityProfile:
    """Per-density-class residual peaks plus reporting-only diagnostics.

    ``index_sets[j]`` lists the classes theta below job j's class whose
    residual work at j's arrival was at least ``(3/2)**(delta-theta) *
    p_j / (8 eps)``, evaluated against the active set the arrival saw.
    """
    by_id = _jobs_by_id(instance)
    horizon = trace.horizon()
    slots = trace.plan_slots()
    kept = trace.kept

    peak_work: dict[int, Rational] = {}
    peak_weight: dict[int, Rational] = {}
    work_now: dict[int, Rational] = {}
    weight_now: dict[int, Rational] = {}
    residual: dict[int, Rational] = {}
    cursor: dict[int, int] = {jid: 0 for jid in kept}
    for t in range(horizon + 1):
        work_now.clear()
        weight_now.clear()
        for jid in kept:
            job = by_id[jid]
            if job.release > t or trace.completion_plan[jid] <= t:
                continue
            my_slots = slots.get(jid, [])
            if jid not in residual:
                residual[jid] = Rational(job.size_on(trace.machine))
            while cursor[jid] < len(my_slots) and my_slots[cursor[jid]] < t:
                residual[jid] -= 1
                cursor[jid] += 1
            klass = trace.impacts[jid].density_class
            work_now[klass] = work_now.get(klass, ZERO) + residual[jid]
            weight_now[klass] = weight_now.get(klass, ZERO) \
                + job.density(trace.machine) * residual[jid]
        for klass, value in work_now.items():
            if value > peak_work.get(klass, ZERO):
                peak_work[klass] = value
        for klass, value in weight_now.items():
            if value > peak_weight.get(klass, ZERO):
                peak_weight[klass] = value

    plus_total = sum((trace.impacts[jid].plus for jid in trace.arrivals), start=ZERO)
    product = sum((peak_work[k] * peak_weight[k] for k in peak_work), start=ZERO)
    base = plus_total + sum(
        (by_id[jid].weight * by_id[jid].size_on(trace.machine)
         for jid in trace.arrivals), start=ZERO)

    index_sets = _index_sets(trace, instance)
    return DensityProfile(peak_work, peak_weight, plus_total, product, base,
                          product / base if base else None, index_sets)


def _index_sets(trace: ScheduleTrace, instance: Instance) -> dict[int, tuple[int, ...]]:
    by_id = _jobs_by_id(instance)
    out: dict[int, tuple[int, ...]] = {}
    eps = trace.epsilon
    order = {jid: i for i, jid in enumerate(trace.arrivals)}
    for jid in trace.arrivals:
        decision = trace.decisions[jid]
        if decision.minus_key is None:
            continue
        job = by_id[jid]
        delta = trace.impacts[jid].density_class
        # residual work per class in the active set this arrival saw
        work: dict[int, Rational] = {}
        for other in trace.kept:
            if order[other] >= order[jid]:
                continue
            if trace.completion_plan[other] <= job.release:
                continue
            klass = trace.impacts[other].density_class
            if klass >= delta:
                continue
            work[klass] = work.get(klass, ZERO) + residual_size_at(
                trace, instance, other, job.release)
        size = job.size_on(trace.machine)
        chosen = [theta for theta, value in sorted(work.items())
                  if value >= Rational(3, 2) ** (delta - theta) * size / (8 * eps)]
        out[jid] = tuple(chosen)
    return out
