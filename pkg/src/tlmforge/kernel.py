"""Deterministic discrete-event kernel with cooperative activities.

Activities are plain generators.  They suspend by yielding a request:

    yield Wait(delay_ps)   resume after the given simulated delay
    yield Join(task)       resume when another task finishes (receives its
                           return value)

Events fire in (time, insertion order); equal-time events are strictly
FIFO, so a run's dispatch sequence is a pure function of the initial
schedule.  There is no zero-time re-evaluation loop; components talk
through transport calls, not signals.  Activities must not share mutable
state except across these suspension points.

A configurable event-count limit turns a runaway model (an activity that
keeps rescheduling itself forever) into a diagnosable E-EVENT-LIMIT error.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any, Generator

from .simtime import check_time, time_add

DEFAULT_EVENT_LIMIT = 10_000_000

Activity = Generator[Any, Any, Any]


class SimulationError(RuntimeError):
    """Runtime failure inside a simulation, tagged with a stable code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Wait:
    """Suspend the yielding activity for ``delay`` picoseconds."""

    delay: int


@dataclass(frozen=True)
class Join:
    """Suspend until ``task`` finishes; resumes with its return value."""

    task: "Task"


class Task:
    """Handle for one scheduled activity."""

    __slots__ = ("name", "_gen", "done", "value", "_joiners")

    def __init__(self, gen: Activity, name: str | None):
        self.name = name
        self._gen = gen
        self.done = False
        self.value: Any = None
        self._joiners: list[Task] = []

    def __repr__(self) -> str:
        state = "done" if self.done else "pending"
        return f"<Task {self.name or hex(id(self))} {state}>"


class Scheduler:
    """Single-threaded event queue ordered by (time, insertion sequence)."""

    def __init__(self, event_limit: int = DEFAULT_EVENT_LIMIT):
        self._now = 0
        self._queue: list[tuple[int, int, Task, Any]] = []
        self._seq = 0
        self._dispatched = 0
        self.event_limit = event_limit

    @property
    def now(self) -> int:
        return self._now

    def schedule(self, activity: Activity, delay: int = 0, name: str | None = None) -> Task:
        """Queue a fresh activity to start after ``delay``; returns its task handle."""
        task = Task(activity, name)
        self._push(time_add(self._now, check_time(delay)), task, None)
        return task

    def _push(self, at: int, task: Task, send_value: Any) -> None:
        heapq.heappush(self._queue, (at, self._seq, task, send_value))
        self._seq += 1

    def run(self) -> int:
        """Dispatch until the queue drains; returns the final simulated time."""
        while self._queue:
            at, _seq, task, send_value = heapq.heappop(self._queue)
            self._dispatched += 1
            if self._dispatched > self.event_limit:
                raise SimulationError(
                    "E-EVENT-LIMIT",
                    f"exceeded {self.event_limit} dispatched events at {at} ps; "
                    "the model is likely non-terminating",
                )
            self._now = at
            try:
                request = task._gen.send(send_value)
            except StopIteration as stop:
                self._finish(task, stop.value)
                continue
            if isinstance(request, Wait):
                self._push(time_add(self._now, check_time(request.delay)), task, None)
            elif isinstance(request, Join):
                if request.task.done:
                    self._push(self._now, task, request.task.value)
                else:
                    request.task._joiners.append(task)
            else:
                raise TypeError(f"activity {task!r} yielded {request!r}; expected Wait or Join")
        return self._now

    def _finish(self, task: Task, value: Any) -> None:
        task.done = True
        task.value = value
        for joiner in task._joiners:
            self._push(self._now, joiner, value)
        task._joiners.clear()


class QuantumKeeper:
    """Temporal-decoupling ledger: how far an activity has run ahead of the kernel.

    The activity accrues local time with :meth:`advance`, asks
    :meth:`need_sync` whether its offset reached the global quantum, and
    gives the time back to the kernel with ``yield from keeper.sync()``.
    A zero quantum means "synchronize at every opportunity".
    """

    def __init__(self, global_quantum: int = 0):
        self.global_quantum = check_time(global_quantum)
        self.local_offset = 0

    def advance(self, t: int) -> "QuantumKeeper":
        self.local_offset = time_add(self.local_offset, check_time(t))
        return self

    def need_sync(self) -> bool:
        return self.local_offset >= self.global_quantum

    def sync(self) -> Activity:
        """Suspend the caller for the accrued offset, then reset it to zero."""
        yield Wait(self.local_offset)
        self.local_offset = 0
