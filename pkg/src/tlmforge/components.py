"""Component models: CPUs, buses, initiators, routers, targets.

Timing model
------------
Declared delays are nominal at 1 GHz; an instance's effective delay is
``round(nominal / cpu_frequency_ghz)`` (half away from zero, exact
rational arithmetic before rounding).  A module with a declared bandwidth
additionally serializes each transaction for ``ceil(bytes / bandwidth)``
(computed in picoseconds).  Instances sharing a CPU do not contend for
cycles; the frequency only scales their own delays.

An initiator charges its own effective delay plus transfer time before
issuing (compute, then send).  A 1-to-N socket binding or a router
broadcast deep-copies the payload per destination; all arms proceed
concurrently in simulated time and the transaction completes at the
slowest arm.  Statuses merge as: OK iff every arm is OK, otherwise the
first non-OK in ascending destination order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .kernel import Activity, QuantumKeeper, Scheduler, SimulationError
from .payload import Command, GenericPayload, ResponseStatus, deep_copy_payload, validate_payload
from .simtime import U64_MAX, TimeOverflowError, time_add
from .trace import TraceRecord
from .transport import DmiAccess, DmiDescriptor

# Extension slot the simulator uses to tag payloads with a transaction id.
TXN_ID_EXTENSION = "tlmforge.txn-id"

DEFAULT_HOP_LIMIT = 1000


# --------------------------------------------------------------------------
# Declarative specs

@dataclass
class CpuSpec:
    name: str
    frequency_ghz: Fraction


@dataclass
class BusSpec:
    """A connectivity relation among CPUs; instances bound across CPUs need one."""

    name: str
    cpus: tuple[str, ...]


@dataclass
class TransactionTemplate:
    command: Command
    address: int
    data: bytes
    socket: int = 0
    repeat: int = 1


@dataclass
class InitiatorSpec:
    name: str
    delay_ps: int
    socket_count: int
    workload: tuple[TransactionTemplate, ...] = ()
    bandwidth: Fraction | None = None  # bytes per nanosecond


@dataclass
class TargetSpec:
    name: str
    socket_delays_ps: tuple[int, ...]
    storage_base: int
    storage_size: int
    storage_fill: int = 0
    dmi_allowed: bool = False
    bandwidth: Fraction | None = None


@dataclass
class RouterSpec:
    name: str
    delay_ps: int
    in_socket_count: int
    out_socket_count: int
    connections: dict[int, tuple[int, ...]] = field(default_factory=dict)
    address_map: dict[int, tuple[int, int]] | None = None  # out -> [base, limit)
    bandwidth: Fraction | None = None


ModuleSpec = InitiatorSpec | TargetSpec | RouterSpec


@dataclass
class Instance:
    name: str
    module: str
    cpu: str


@dataclass
class Binding:
    """Connect one out-socket to one in-socket.  An out-socket may appear in
    several bindings (1-to-N); an in-socket accepts at most one."""

    from_instance: str
    from_socket: int
    to_instance: str
    to_socket: int


def out_socket_count(spec: ModuleSpec) -> int:
    if isinstance(spec, InitiatorSpec):
        return spec.socket_count
    if isinstance(spec, RouterSpec):
        return spec.out_socket_count
    return 0


def in_socket_count(spec: ModuleSpec) -> int:
    if isinstance(spec, TargetSpec):
        return len(spec.socket_delays_ps)
    if isinstance(spec, RouterSpec):
        return spec.in_socket_count
    return 0


# --------------------------------------------------------------------------
# Timing rules

def effective_delay(nominal_ps: int, frequency_ghz: Fraction | int) -> int:
    """Scale a nominal delay by CPU frequency: round(nominal / f), ties away from zero."""
    f = Fraction(frequency_ghz)
    if f <= 0:
        raise ValueError(f"frequency must be positive, got {f}")
    scaled = Fraction(nominal_ps) / f
    n, d = scaled.numerator, scaled.denominator
    result = (2 * n + d) // (2 * d)
    if result > U64_MAX:
        raise TimeOverflowError(f"scaled delay {result} ps exceeds the 64-bit range")
    return result


def transfer_time(length_bytes: int, bandwidth: Fraction | None) -> int:
    """Serialization latency: ceil(bytes / bandwidth), in picoseconds.

    ``bandwidth`` is bytes per nanosecond; absent means unlimited (0 ps).
    """
    if bandwidth is None:
        return 0
    b = Fraction(bandwidth)
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    ps = Fraction(length_bytes * 1000) / b
    result = -((-ps.numerator) // ps.denominator)
    if result > U64_MAX:
        raise TimeOverflowError(f"transfer time {result} ps exceeds the 64-bit range")
    return result


# --------------------------------------------------------------------------
# Target storage semantics

class Storage:
    """Byte-addressable backing store of a target, based at an absolute address."""

    def __init__(self, base: int, size: int, fill: int = 0):
        if size <= 0:
            raise ValueError("storage size must be positive")
        self.base = base
        self.data = bytearray([fill]) * size

    @property
    def size(self) -> int:
        return len(self.data)

    @property
    def end(self) -> int:
        """One past the last valid address."""
        return self.base + len(self.data)

    def contains(self, address: int) -> bool:
        return self.base <= address < self.end


def apply_write(storage: Storage, p: GenericPayload) -> ResponseStatus:
    """Write beats into storage per streaming width and byte enables.

    Beat i lands at ``address + (i mod streaming_width)``; later beats
    overwrite earlier ones at the same wrapped address.  Every beat's
    address is range-checked in order; the first miss stops the loop with
    ADDRESS_ERROR, leaving earlier beats applied.
    """
    enables = p.byte_enables
    for i in range(p.data_length):
        addr = p.address + (i % p.streaming_width)
        if not storage.contains(addr):
            return ResponseStatus.ADDRESS_ERROR
        if enables is None or enables[i % p.byte_enable_length] == 0xFF:
            storage.data[addr - storage.base] = p.data[i]
    return ResponseStatus.OK


def apply_read(storage: Storage, p: GenericPayload) -> ResponseStatus:
    """Mirror of :func:`apply_write` with bytes flowing storage -> payload.

    Disabled bytes in the payload are left unchanged.
    """
    enables = p.byte_enables
    for i in range(p.data_length):
        addr = p.address + (i % p.streaming_width)
        if not storage.contains(addr):
            return ResponseStatus.ADDRESS_ERROR
        if enables is None or enables[i % p.byte_enable_length] == 0xFF:
            p.data[i] = storage.data[addr - storage.base]
    return ResponseStatus.OK


# --------------------------------------------------------------------------
# Routing

class NoRouteError(Exception):
    """No out-socket's address range matched; surfaces as ADDRESS_ERROR."""

    code = "E-NO-ROUTE"


def route(spec: RouterSpec, in_socket: int, p: GenericPayload) -> list[int]:
    """Resolve the out-sockets a payload leaves through.

    With an address map the unique out whose range holds the address wins;
    without one, every connected out (broadcast, ascending socket order).
    """
    outs = spec.connections.get(in_socket)
    if outs is None:
        raise NoRouteError(f"in-socket {in_socket} of '{spec.name}' has no connection entry")
    ordered = sorted(set(outs))  # a repeated out-socket is still one destination
    if spec.address_map is None:
        return ordered
    for out in ordered:
        rng = spec.address_map.get(out)
        if rng is not None and rng[0] <= p.address < rng[1]:
            return [out]
    raise NoRouteError(
        f"address 0x{p.address:x} matches no range on in-socket {in_socket} of '{spec.name}'")


# --------------------------------------------------------------------------
# Executable models

@dataclass
class ModelContext:
    """Shared runtime state for every model of one elaborated system."""

    scheduler: Scheduler
    records: list[TraceRecord] = field(default_factory=list)
    hop_limit: int = DEFAULT_HOP_LIMIT
    txn_ids: Iterator[int] = field(default_factory=itertools.count)


Destination = tuple["TargetModel | RouterModel", int]


def _txn_id(p: GenericPayload) -> int:
    value = p.extensions.get(TXN_ID_EXTENSION, 0)
    return value if isinstance(value, int) else 0


def _merge_status(statuses: list[ResponseStatus]) -> ResponseStatus:
    for s in statuses:
        if s is not ResponseStatus.OK:
            return s
    return ResponseStatus.OK


def _status_for_invalid(code: str) -> ResponseStatus:
    if code in ("E-ENABLE-VALUE", "E-ENABLE-LEN"):
        return ResponseStatus.BYTE_ENABLE_ERROR
    if code in ("E-SW-DIVIDE", "E-SW-POSITIVE", "E-DATA-LEN"):
        return ResponseStatus.BURST_ERROR
    return ResponseStatus.GENERIC_ERROR


def deliver(destinations: list[Destination], p: GenericPayload, t: int, depth: int = 0) -> int:
    """Send a payload to every destination; returns the slowest arm's time.

    A single destination gets the original payload; with several, each arm
    gets a storage-disjoint deep copy and the merged status is written back
    into ``p``.  READ fan-out greater than one is rejected during
    description validation, so reads always see exactly one arm here.
    """
    if not destinations:
        raise SimulationError("E-NO-DEST", "transaction has no bound destination")
    if len(destinations) == 1:
        model, in_socket = destinations[0]
        return model.b_transport(in_socket, p, t, depth)
    if p.command is Command.READ:
        raise SimulationError(
            "E-READ-FANOUT", "READ reached a fan-out greater than one; "
            "the description validator should have rejected this (E004)")
    times: list[int] = []
    statuses: list[ResponseStatus] = []
    for model, in_socket in destinations:
        arm = deep_copy_payload(p)
        times.append(model.b_transport(in_socket, arm, t, depth))
        statuses.append(arm.response_status)
    p.response_status = _merge_status(statuses)
    return max(times)


class TargetModel:
    """A memory-mapped target: per-in-socket delays over byte storage."""

    def __init__(self, name: str, spec: TargetSpec, frequency_ghz: Fraction, ctx: ModelContext):
        self.name = name
        self.spec = spec
        self.frequency_ghz = frequency_ghz
        self.ctx = ctx
        self.storage = Storage(spec.storage_base, spec.storage_size, spec.storage_fill)
        self._activations = itertools.count()

    def b_transport(self, in_socket: int, p: GenericPayload, t: int, depth: int = 0) -> int:
        if depth > self.ctx.hop_limit:
            raise SimulationError(
                "E-HOP-LIMIT", f"transaction exceeded {self.ctx.hop_limit} hops; "
                "the binding graph is likely cyclic")
        arrival = time_add(self.ctx.scheduler.now, t)
        service = time_add(
            effective_delay(self.spec.socket_delays_ps[in_socket], self.frequency_ghz),
            transfer_time(p.data_length, self.spec.bandwidth))
        t = time_add(t, service)

        problems = validate_payload(p)
        if problems:
            p.response_status = _status_for_invalid(problems[0].code)
        elif p.command is Command.WRITE:
            p.response_status = apply_write(self.storage, p)
        elif p.command is Command.READ:
            p.response_status = apply_read(self.storage, p)
        else:
            p.response_status = ResponseStatus.OK
        p.dmi_allowed = self.spec.dmi_allowed

        self.ctx.records.append(TraceRecord(
            instance=self.name, activation=next(self._activations),
            start=arrival, end=time_add(self.ctx.scheduler.now, t),
            txn_id=_txn_id(p), status=p.response_status))
        return t

    def transport_dbg(self, p: GenericPayload) -> int:
        """Zero-time debug access; ignores delays, enables, and streaming."""
        if p.command not in (Command.READ, Command.WRITE):
            return 0
        if not self.storage.contains(p.address):
            return 0
        count = min(p.data_length, self.storage.end - p.address)
        offset = p.address - self.storage.base
        if p.command is Command.READ:
            p.data[0:count] = self.storage.data[offset:offset + count]
        else:
            self.storage.data[offset:offset + count] = p.data[0:count]
        return count

    def get_dmi(self, address: int) -> DmiDescriptor:
        """Grant direct access to the whole storage when allowed and in range."""
        beat = effective_delay(self.spec.socket_delays_ps[0], self.frequency_ghz)
        if self.spec.dmi_allowed and self.storage.contains(address):
            return DmiDescriptor(
                granted=True, start_address=self.storage.base,
                end_address=self.storage.end - 1, access=DmiAccess.READ_WRITE,
                read_latency_ps=beat, write_latency_ps=beat, storage=self.storage)
        return DmiDescriptor(
            granted=False, start_address=self.storage.base, end_address=self.storage.end - 1)


class RouterModel:
    """Forwards transactions from in-sockets to bound out-sockets."""

    def __init__(self, name: str, spec: RouterSpec, frequency_ghz: Fraction, ctx: ModelContext):
        self.name = name
        self.spec = spec
        self.frequency_ghz = frequency_ghz
        self.ctx = ctx
        # out-socket index -> ordered destination list, filled in at elaboration
        self.out_bindings: dict[int, list[Destination]] = {}
        self._activations = itertools.count()

    def b_transport(self, in_socket: int, p: GenericPayload, t: int, depth: int = 0) -> int:
        if depth > self.ctx.hop_limit:
            raise SimulationError(
                "E-HOP-LIMIT", f"transaction exceeded {self.ctx.hop_limit} hops; "
                "the binding graph is likely cyclic")
        arrival = time_add(self.ctx.scheduler.now, t)
        activation = next(self._activations)
        service = time_add(
            effective_delay(self.spec.delay_ps, self.frequency_ghz),
            transfer_time(p.data_length, self.spec.bandwidth))
        t = time_add(t, service)
        forwarded = time_add(self.ctx.scheduler.now, t)

        try:
            outs = route(self.spec, in_socket, p)
        except NoRouteError:
            p.response_status = ResponseStatus.ADDRESS_ERROR
            self.ctx.records.append(TraceRecord(
                instance=self.name, activation=activation, start=arrival, end=forwarded,
                txn_id=_txn_id(p), status=p.response_status))
            return t

        destinations = [dest for out in outs for dest in self.out_bindings.get(out, [])]
        t_done = deliver(destinations, p, t, depth + 1)
        self.ctx.records.append(TraceRecord(
            instance=self.name, activation=activation, start=arrival, end=forwarded,
            txn_id=_txn_id(p), status=p.response_status))
        return t_done


class InitiatorModel:
    """Drives the workload: compute for the module delay, then transport."""

    def __init__(self, name: str, spec: InitiatorSpec, frequency_ghz: Fraction,
                 ctx: ModelContext, quantum_ps: int = 0):
        self.name = name
        self.spec = spec
        self.frequency_ghz = frequency_ghz
        self.ctx = ctx
        self.quantum_keeper = QuantumKeeper(quantum_ps)
        # out-socket index -> ordered destination list, filled in at elaboration
        self.out_bindings: dict[int, list[Destination]] = {}
        self._activations = itertools.count()

    def activity(self) -> Activity:
        """Kernel activity running every workload template in order."""
        for template in self.spec.workload:
            for _ in range(template.repeat):
                yield from self.issue(template)

    def issue(self, template: TransactionTemplate) -> Activity:
        """One activation: wait own latency, transport, sync, record.

        Returns the completed activation's trace record.
        """
        qk = self.quantum_keeper
        sched = self.ctx.scheduler
        start = time_add(sched.now, qk.local_offset)

        own = time_add(
            effective_delay(self.spec.delay_ps, self.frequency_ghz),
            transfer_time(len(template.data), self.spec.bandwidth))
        qk.advance(own)
        if qk.need_sync():
            yield from qk.sync()

        txn = next(self.ctx.txn_ids)
        p = GenericPayload(
            command=template.command, address=template.address,
            data=bytearray(template.data),
            extensions={TXN_ID_EXTENSION: txn})
        destinations = self.out_bindings.get(template.socket)
        if not destinations:
            raise SimulationError(
                "E-UNBOUND", f"initiator '{self.name}' socket {template.socket} is unbound")
        t = deliver(destinations, p, qk.local_offset)

        qk.local_offset = t
        if qk.need_sync():
            yield from qk.sync()
        end = time_add(sched.now, qk.local_offset)

        record = TraceRecord(
            instance=self.name, activation=next(self._activations),
            start=start, end=end, txn_id=txn, status=p.response_status)
        self.ctx.records.append(record)
        return record


ComponentModel = InitiatorModel | TargetModel | RouterModel


class ExecutableModel:
    """An elaborated system: kernel, component models, and the shared trace."""

    def __init__(self, ctx: ModelContext, instances: dict[str, ComponentModel]):
        self.ctx = ctx
        self.instances = instances

    @property
    def scheduler(self) -> Scheduler:
        return self.ctx.scheduler

    @property
    def records(self) -> list[TraceRecord]:
        return self.ctx.records

    def instance(self, name: str) -> ComponentModel:
        return self.instances[name]

    def run(self) -> int:
        """Run to completion; returns the final kernel time in picoseconds."""
        return self.ctx.scheduler.run()
