"""Exact domain types shared by the whole simulator.

All times are integers (processing happens in unit slots ``[t, t+1)``) and
all weights are rationals, so every invariant downstream is checkable with
zero tolerance. ``Rational`` is ``fractions.Fraction``: stored in lowest
terms with a positive denominator, and compared exactly via
cross-multiplication. No floating point enters any persisted quantity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Rational = Fraction

ZERO = Rational(0)
ONE = Rational(1)
HALF = Rational(1, 2)


class InvalidInstance(ValueError):
    """Raised by :func:`validate_instance` when a type invariant fails."""


class NonIntegralEpsilonReciprocal(InvalidInstance):
    pass


class EpsilonTooLarge(InvalidInstance):
    pass


class DuplicateJobId(InvalidInstance):
    pass


class NonPositiveSizeOrWeight(InvalidInstance):
    pass


class MachineCountMismatch(InvalidInstance):
    pass


class JobNotRunnableOnMachine(ValueError):
    """The job has no size entry for the requested machine."""


@dataclass(frozen=True)
class Job:
    """One unit of work.

    ``sizes[i]`` is the integer processing time on machine ``i``; ``None``
    marks a machine that cannot run the job. Single-machine instances use
    a length-1 tuple. A job never migrates: once dispatched, only the size
    on its machine matters.
    """

    id: int
    release: int
    weight: Rational
    sizes: tuple[int | None, ...]

    def runnable_on(self, machine: int) -> bool:
        return 0 <= machine < len(self.sizes) and self.sizes[machine] is not None

    def size_on(self, machine: int) -> int:
        if not self.runnable_on(machine):
            raise JobNotRunnableOnMachine(
                f"job {self.id} has no size on machine {machine}")
        size = self.sizes[machine]
        assert size is not None
        return size

    def density(self, machine: int = 0) -> Rational:
        """Weight per unit of processing, the HDF priority key."""
        return self.weight / self.size_on(machine)


@dataclass(frozen=True)
class Instance:
    """A validated workload plus the run parameters.

    Invariants (enforced by :func:`validate_instance`):
      * ``1/epsilon`` is a positive integer and ``epsilon**2 <= 1/2``;
      * job ids are unique, jobs are sorted stably by release time;
      * every job is runnable somewhere, all sizes are >= 1, weights > 0.
    """

    jobs: tuple[Job, ...]
    machines: int = 1
    epsilon: Rational = Rational(1, 2)
    speedup: Rational = ZERO

    @property
    def cadence(self) -> int:
        """The rejection period 1/epsilon as an integer."""
        return self.epsilon.denominator


@dataclass(frozen=True)
class ResidualJob:
    """A job with its remaining processing time on one machine.

    The residual weight is recomputed from the (constant) density every
    time, never cached, so it cannot go stale as ``remaining`` shrinks.
    """

    job: Job
    remaining: Rational
    machine: int = 0

    @property
    def density(self) -> Rational:
        return self.job.density(self.machine)

    @property
    def residual_weight(self) -> Rational:
        return self.density * self.remaining


def validate_instance(raw: Instance) -> Instance:
    """Check every type invariant and return a canonical instance.

    Jobs are re-sorted stably by release time (input order breaks ties),
    weights are coerced to ``Rational`` and size lists to tuples, so two
    validated instances with equal content compare equal.
    """
    eps = Rational(raw.epsilon)
    if eps <= 0 or eps.numerator != 1:
        raise NonIntegralEpsilonReciprocal(
            f"1/epsilon must be a positive integer, got epsilon={eps}")
    if eps * eps > HALF:
        raise EpsilonTooLarge(f"epsilon^2 must be at most 1/2, got epsilon={eps}")
    speedup = Rational(raw.speedup)
    if speedup < 0:
        raise InvalidInstance(f"speedup must be nonnegative, got {speedup}")
    if raw.machines < 1:
        raise MachineCountMismatch(f"need at least one machine, got {raw.machines}")

    seen: set[int] = set()
    jobs: list[Job] = []
    for job in raw.jobs:
        if job.id in seen:
            raise DuplicateJobId(f"job id {job.id} appears twice")
        seen.add(job.id)
        if not isinstance(job.id, int) or job.id < 0:
            raise InvalidInstance(f"job id must be a nonnegative integer, got {job.id!r}")
        if not isinstance(job.release, int) or job.release < 0:
            raise InvalidInstance(
                f"job {job.id} release must be a nonnegative integer, got {job.release!r}")
        sizes = tuple(job.sizes)
        if len(sizes) != raw.machines:
            raise MachineCountMismatch(
                f"job {job.id} lists {len(sizes)} sizes for {raw.machines} machines")
        present = [s for s in sizes if s is not None]
        if not present:
            raise NonPositiveSizeOrWeight(f"job {job.id} is not runnable on any machine")
        if any(not isinstance(s, int) or s < 1 for s in present):
            raise NonPositiveSizeOrWeight(f"job {job.id} has a size below 1")
        weight = Rational(job.weight)
        if weight <= 0:
            raise NonPositiveSizeOrWeight(f"job {job.id} has nonpositive weight {weight}")
        jobs.append(Job(job.id, job.release, weight, sizes))

    jobs.sort(key=lambda j: j.release)  # stable sort keeps input order within a release
    return Instance(tuple(jobs), raw.machines, eps, speedup)
