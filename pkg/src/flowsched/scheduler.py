"""Single-machine online engine.

The engine advances in unit slots and maintains two coupled schedules:

* the *plan*: picks a job every slot and eventually finishes every job it
  admits. A job that started running is never preempted unless it has been
  marked preemptible; marked jobs compete under plain HDF.
* the *real* schedule: mirrors the plan slot by slot, but idles whenever
  the plan runs a job that has been marked preemptible. Such jobs count as
  rejected at the moment they were marked (their departure time), so the
  real schedule is non-preemptive and rejection-only.

Per integer time t, in order: (1) each arrival is scored against the
active set and offered to the rejection tables; (2) after every arrival
the currently running job is checked for marking: it is marked once the
weight released since its run began exceeds weight/epsilon (strictly);
(3) a job is chosen for the slot [t, t+1): a mid-run unmarked job
continues, otherwise the densest active job wins (ties: earlier release,
then smaller id).

Simultaneous arrivals are handled in input order and steps (1)-(2) are
iterated per arrival, so a marking can fire mid-batch and later same-time
arrivals see it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .core import Instance, Job, Rational, ResidualJob, ZERO, validate_instance
from .impact import ArrivalImpact, arrival_impact
from .rejection import BucketReport, ImmediateDecision, RejectionTables

EVENT_IMMEDIATE_REJECT = "immediate_reject"
EVENT_PROMOTED = "promoted"
EVENT_DELAYED_REJECT = "delayed_reject"
EVENT_PLAN_COMPLETE = "plan_complete"
EVENT_REAL_COMPLETE = "real_complete"

TERMINAL_EVENTS = (EVENT_IMMEDIATE_REJECT, EVENT_DELAYED_REJECT, EVENT_REAL_COMPLETE)

ARRIVAL_REJECTED = "rejected"
ARRIVAL_ACTIVATED = "activated"


class ArrivalInPast(ValueError):
    """A job was delivered after the scheduler clock passed its release."""


@dataclass(frozen=True)
class Slot:
    """One busy slot [t, t+1): what the plan ran and what really ran."""
    t: int
    plan: int
    real: int | None
    idled: bool


@dataclass(frozen=True)
class Event:
    time: int
    job: int
    kind: str


@dataclass
class ScheduleTrace:
    """Complete, replayable record of one machine's run.

    ``departure[j]`` is the completion time for jobs the real schedule
    finishes, the release time for immediate rejections, and the marking
    time for delayed rejections. Every delivered job has exactly one
    terminal event.
    """

    machine: int
    epsilon: Rational
    arrivals: tuple[int, ...] = ()
    slots: list[Slot] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    departure: dict[int, int] = field(default_factory=dict)
    impacts: dict[int, ArrivalImpact] = field(default_factory=dict)
    decisions: dict[int, ImmediateDecision] = field(default_factory=dict)
    phi: dict[int, int] = field(default_factory=dict)
    promoted_at: dict[int, int] = field(default_factory=dict)
    completion_plan: dict[int, int] = field(default_factory=dict)
    completion_real: dict[int, int] = field(default_factory=dict)
    table_report: list[BucketReport] = field(default_factory=list)

    @property
    def immediate_rejected(self) -> set[int]:
        return {jid for jid, d in self.decisions.items() if d.reject}

    @property
    def kept(self) -> list[int]:
        return [jid for jid in self.arrivals if not self.decisions[jid].reject]

    def plan_slots(self) -> dict[int, list[int]]:
        """Slot start times the plan spent on each job, in order."""
        out: dict[int, list[int]] = {}
        for slot in self.slots:
            out.setdefault(slot.plan, []).append(slot.t)
        return out

    def horizon(self) -> int:
        """First time by which the machine is provably empty."""
        h = self.slots[-1].t + 1 if self.slots else 0
        for t in self.departure.values():
            h = max(h, t)
        return h


class MachineScheduler:
    """Mutable engine state for one machine. Single-threaded use only."""

    def __init__(self, epsilon: Rational, machine: int = 0):
        self.machine = machine
        self.epsilon = epsilon
        self.clock = 0
        self.active: dict[int, ResidualJob] = {}
        self.preemptible: set[int] = set()
        self.tables = RejectionTables(epsilon)
        # current uninterrupted run of an unmarked job
        self.run_job: int | None = None
        self.run_started = 0
        self.run_released: Rational = ZERO
        # job processed in [clock-1, clock), None after idling or a completion
        self.last_slot_job: int | None = None
        self._trace = ScheduleTrace(machine=machine, epsilon=epsilon)
        self._arrivals: list[int] = []

    # -- step 1: arrivals ------------------------------------------------

    def on_arrival(self, job: Job) -> str:
        """Score, admit or reject, and book-keep one arriving job."""
        if job.release < self.clock:
            raise ArrivalInPast(
                f"job {job.id} released at {job.release}, clock is {self.clock}")
        assert job.release == self.clock, "driver must deliver arrivals on time"
        tr = self._trace

        impact = arrival_impact(job, self.active.values(), self.epsilon, self.machine)
        decision = self.tables.admit(job, impact, self.machine)
        self._arrivals.append(job.id)
        tr.impacts[job.id] = impact
        tr.decisions[job.id] = decision

        if self.last_slot_job is not None and self.last_slot_job not in self.preemptible:
            tr.phi[job.id] = self.last_slot_job

        if decision.reject:
            tr.events.append(Event(self.clock, job.id, EVENT_IMMEDIATE_REJECT))
            tr.departure[job.id] = self.clock
            outcome = ARRIVAL_REJECTED
        else:
            self.active[job.id] = ResidualJob(
                job, Rational(job.size_on(self.machine)), self.machine)
            outcome = ARRIVAL_ACTIVATED

        # released weight counts toward the current run whether or not the
        # arrival survived; the marking budget charges all released weight
        if self.run_job is not None:
            self.run_released += job.weight
        self.promote_check()
        return outcome

    # -- step 2: marking -------------------------------------------------

    def promote_check(self) -> Event | None:
        """Mark the running job preemptible if its run accumulated enough
        released weight (strictly more than weight/epsilon)."""
        if self.run_job is None:
            return None
        runner = self.active[self.run_job]
        if self.run_released <= runner.job.weight / self.epsilon:
            return None
        jid = self.run_job
        tr = self._trace
        self.preemptible.add(jid)
        tr.promoted_at[jid] = self.clock
        event = Event(self.clock, jid, EVENT_PROMOTED)
        tr.events.append(event)
        # the real schedule gives up on the job right here
        tr.events.append(Event(self.clock, jid, EVENT_DELAYED_REJECT))
        tr.departure[jid] = self.clock
        self.run_job = None
        return event

    # -- step 3: slot selection -------------------------------------------

    def select_slot(self) -> int | None:
        """Run one slot [clock, clock+1); returns the job the plan ran."""
        t = self.clock
        if self.run_job is not None:
            chosen = self.run_job  # non-preemption: an unmarked run continues
        else:
            if not self.active:
                self.last_slot_job = None
                self.clock = t + 1
                return None
            best = min(self.active.values(),
                       key=lambda r: (-r.density, r.job.release, r.job.id))
            chosen = best.job.id
            if chosen not in self.preemptible:
                self.run_job = chosen
                self.run_started = t
                self.run_released = ZERO

        tr = self._trace
        mirrored = chosen not in self.preemptible
        tr.slots.append(Slot(t, chosen, chosen if mirrored else None, not mirrored))

        res = self.active[chosen]
        remaining = res.remaining - 1
        if remaining == 0:
            del self.active[chosen]
            tr.completion_plan[chosen] = t + 1
            tr.events.append(Event(t + 1, chosen, EVENT_PLAN_COMPLETE))
            if chosen not in self.preemptible:
                tr.completion_real[chosen] = t + 1
                tr.events.append(Event(t + 1, chosen, EVENT_REAL_COMPLETE))
                tr.departure[chosen] = t + 1
            if self.run_job == chosen:
                self.run_job = None
            # a finished job can no longer be marked or charged against
            self.last_slot_job = None
        else:
            self.active[chosen] = replace(res, remaining=remaining)
            self.last_slot_job = chosen
        self.clock = t + 1
        return chosen

    # -- driver helpers ----------------------------------------------------

    def skip_to(self, t: int) -> None:
        """Advance over an idle gap (no active jobs)."""
        assert not self.active and t >= self.clock
        self.clock = t
        self.last_slot_job = None

    def finish_trace(self) -> ScheduleTrace:
        tr = self._trace
        tr.arrivals = tuple(self._arrivals)
        tr.table_report = self.tables.audit()
        return tr


def run(instance: Instance, machine: int = 0) -> ScheduleTrace:
    """Drive the online engine over a (single-machine view of an) instance.

    Every job must be runnable on ``machine``. Deterministic for a fixed
    input order; the returned trace satisfies all structural invariants
    (mirror property, one terminal event per job, non-preemptive real
    schedule).
    """
    inst = validate_instance(instance)
    jobs = inst.jobs
    for job in jobs:
        job.size_on(machine)  # raises JobNotRunnableOnMachine early
    sched = MachineScheduler(inst.epsilon, machine)
    i, n = 0, len(jobs)
    while i < n or sched.active:
        if not sched.active and i < n and jobs[i].release > sched.clock:
            sched.skip_to(jobs[i].release)
        t = sched.clock
        while i < n and jobs[i].release == t:
            sched.on_arrival(jobs[i])
            i += 1
        sched.select_slot()
    return sched.finish_trace()
