"""Export a validated description as standard TLM-2.0 source text.

Emits one header per module spec and a top-level ``top.cpp`` that
instantiates and binds every instance, in the blocking-transport coding
style (generic payload, initiator/target sockets, b_transport).  Delays
in the emitted text are pre-scaled by each instance's CPU frequency, so
the generated system carries the same timing the simulator executes.

The bundle is text only; it is never compiled here.  Emission is
template-based and byte-deterministic: equal descriptions produce equal
bundles.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from .components import (
    InitiatorSpec,
    RouterSpec,
    TargetSpec,
    effective_delay,
    transfer_time,
)

_IDENT_CHARS = set(string.ascii_letters + string.digits + "_")

_COMMAND_NAMES = {
    "READ": "tlm::TLM_READ_COMMAND",
    "WRITE": "tlm::TLM_WRITE_COMMAND",
    "IGNORE": "tlm::TLM_IGNORE_COMMAND",
}


class CodegenError(ValueError):
    """Source emission failed; code E-NAME-UNSANITIZABLE for empty names."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class SourceBundle:
    """Ordered (file name, file text) pairs; names are unique."""

    files: tuple[tuple[str, str], ...]

    def names(self) -> list[str]:
        return [name for name, _ in self.files]

    def text_of(self, name: str) -> str:
        for file_name, text in self.files:
            if file_name == name:
                return text
        raise KeyError(name)


def sanitize_identifier(name: str) -> str:
    """Map a name into the C++ identifier grammar (invalid chars become '_')."""
    out = "".join(ch if ch in _IDENT_CHARS else "_" for ch in name)
    if not out:
        raise CodegenError("E-NAME-UNSANITIZABLE", f"name {name!r} sanitizes to nothing")
    if out[0] in string.digits:
        out = "_" + out
    return out


class _Namer:
    """Deterministic collision-avoiding identifier allocator for one scope."""

    def __init__(self, case_insensitive: bool = False):
        self._used: set[str] = set()
        self._fold = (lambda s: s.lower()) if case_insensitive else (lambda s: s)

    def unique(self, name: str) -> str:
        base = sanitize_identifier(name)
        candidate = base
        counter = 2
        while self._fold(candidate) in self._used:
            candidate = f"{base}_{counter}"
            counter += 1
        self._used.add(self._fold(candidate))
        return candidate


def _sc_time(ps: int) -> str:
    return f"sc_core::sc_time({ps}, sc_core::SC_PS)"


def _bw_add(spec) -> list[str]:
    """Runtime serialization-latency lines for a module with bandwidth set."""
    if spec.bandwidth is None:
        return []
    num, den = spec.bandwidth.numerator, spec.bandwidth.denominator
    expr = f"trans.get_data_length() * {1000 * den}ull"
    return [f"        t += sc_core::sc_time(({expr} + {num - 1}ull) / {num}ull, "
            "sc_core::SC_PS);  // bandwidth serialization"]


def _emit_initiator(spec: InitiatorSpec, cls: str, guard: str) -> str:
    sockets = [f"socket{i}" for i in range(spec.socket_count)]
    lines = [
        "// Generated by tlmforge 0.1.0. Blocking-transport coding style.",
        f"#ifndef {guard}",
        f"#define {guard}",
        "",
        "#include <cstring>",
        "#include <systemc>",
        "#include <tlm>",
        "#include <tlm_utils/multi_passthrough_initiator_socket.h>",
        "",
        f"// Initiator '{spec.name}': {spec.socket_count} out-socket(s), "
        f"nominal delay {spec.delay_ps} ps at 1 GHz.",
        f"SC_MODULE({cls}) {{",
    ]
    for s in sockets:
        lines.append(f"    tlm_utils::multi_passthrough_initiator_socket<{cls}> {s};")
    lines += [
        "",
        f"    SC_HAS_PROCESS({cls});",
        "",
        f"    {cls}(sc_core::sc_module_name name, sc_core::sc_time delay)",
        "        : sc_core::sc_module(name)",
    ]
    for s in sockets:
        lines.append(f'        , {s}("{s}")')
    lines += [
        "        , m_delay(delay)",
        "    {",
        "        SC_THREAD(run);",
        "    }",
        "",
        "    void run() {",
    ]
    if not spec.workload:
        lines.append("        // no workload declared")
    for k, t in enumerate(spec.workload):
        size = len(t.data)
        byte_list = ", ".join(f"0x{b:02x}" for b in t.data)
        wait_ps = transfer_time(size, spec.bandwidth)
        wait_expr = ("m_delay" if wait_ps == 0
                     else f"m_delay + {_sc_time(wait_ps)}")
        lines += [
            f"        // workload[{k}]: {t.command.value} {size} byte(s) at 0x{t.address:x} "
            f"via socket {t.socket}, repeat {t.repeat}",
            "        {",
            f"            static const unsigned char kData[{size}] = {{ {byte_list} }};",
            f"            for (unsigned rep = 0; rep < {t.repeat}u; ++rep) {{",
            f"                unsigned char data[{size}];",
            f"                std::memcpy(data, kData, {size});",
            "                tlm::tlm_generic_payload trans;",
            f"                trans.set_command({_COMMAND_NAMES[t.command.value]});",
            f"                trans.set_address(0x{t.address:x});",
            "                trans.set_data_ptr(data);",
            f"                trans.set_data_length({size});",
            f"                trans.set_streaming_width({size});",
            "                trans.set_byte_enable_ptr(0);",
            "                trans.set_dmi_allowed(false);",
            "                trans.set_response_status(tlm::TLM_INCOMPLETE_RESPONSE);",
            f"                wait({wait_expr});",
            "                sc_core::sc_time t = sc_core::SC_ZERO_TIME;",
            f"                socket{t.socket}->b_transport(trans, t);",
            "                wait(t);",
            "            }",
            "        }",
        ]
    lines += [
        "    }",
        "",
        "private:",
        "    sc_core::sc_time m_delay;",
        "};",
        "",
        f"#endif  // {guard}",
        "",
    ]
    return "\n".join(lines)


def _emit_target(spec: TargetSpec, cls: str, guard: str) -> str:
    n = len(spec.socket_delays_ps)
    sockets = [f"socket{i}" for i in range(n)]
    delay_params = ", ".join(f"sc_core::sc_time delay{i}" for i in range(n))
    lines = [
        "// Generated by tlmforge 0.1.0. Blocking-transport coding style.",
        f"#ifndef {guard}",
        f"#define {guard}",
        "",
        "#include <cstring>",
        "#include <systemc>",
        "#include <tlm>",
        "#include <tlm_utils/multi_passthrough_target_socket.h>",
        "",
        f"// Target '{spec.name}': {n} in-socket(s), {spec.storage_size}-byte "
        f"storage at 0x{spec.storage_base:x}.",
        f"SC_MODULE({cls}) {{",
    ]
    for s in sockets:
        lines.append(f"    tlm_utils::multi_passthrough_target_socket<{cls}> {s};")
    lines += [
        "",
        f"    {cls}(sc_core::sc_module_name name, {delay_params})",
        "        : sc_core::sc_module(name)",
    ]
    for s in sockets:
        lines.append(f'        , {s}("{s}")')
    for i in range(n):
        lines.append(f"        , m_delay{i}(delay{i})")
    lines.append("    {")
    for i, s in enumerate(sockets):
        lines.append(f"        {s}.register_b_transport(this, &{cls}::b_transport{i});")
    lines += [
        f"        std::memset(m_storage, 0x{spec.storage_fill:02x}, kSize);",
        "    }",
        "",
    ]
    for i in range(n):
        lines += [
            f"    void b_transport{i}(int, tlm::tlm_generic_payload& trans, "
            "sc_core::sc_time& t) {",
            f"        t += m_delay{i};",
        ]
        lines += _bw_add(spec)
        lines += [
            "        execute(trans);",
            "    }",
            "",
        ]
    lines += [
        "private:",
        f"    static const sc_dt::uint64 kBase = 0x{spec.storage_base:x};",
        f"    static const unsigned kSize = {spec.storage_size};",
        "",
        "    void execute(tlm::tlm_generic_payload& trans) {",
        "        const unsigned length = trans.get_data_length();",
        "        const unsigned width = trans.get_streaming_width();",
        "        unsigned char* data = trans.get_data_ptr();",
        "        const unsigned char* enables = trans.get_byte_enable_ptr();",
        "        const unsigned enable_length = trans.get_byte_enable_length();",
        "        if (trans.get_command() == tlm::TLM_IGNORE_COMMAND) {",
        "            trans.set_response_status(tlm::TLM_OK_RESPONSE);",
        "            return;",
        "        }",
        "        if (width == 0 || length % width != 0) {",
        "            trans.set_response_status(tlm::TLM_BURST_ERROR_RESPONSE);",
        "            return;",
        "        }",
        "        for (unsigned i = 0; i < length; ++i) {",
        "            const sc_dt::uint64 addr = trans.get_address() + (i % width);",
        "            if (addr < kBase || addr >= kBase + kSize) {",
        "                trans.set_response_status(tlm::TLM_ADDRESS_ERROR_RESPONSE);",
        "                return;",
        "            }",
        "            if (enables && enables[i % enable_length] != 0xff)",
        "                continue;",
        "            if (trans.is_write())",
        "                m_storage[addr - kBase] = data[i];",
        "            else",
        "                data[i] = m_storage[addr - kBase];",
        "        }",
        f"        trans.set_dmi_allowed({'true' if spec.dmi_allowed else 'false'});",
        "        trans.set_response_status(tlm::TLM_OK_RESPONSE);",
        "    }",
        "",
    ]
    for i in range(n):
        lines.append(f"    sc_core::sc_time m_delay{i};")
    lines += [
        f"    unsigned char m_storage[{spec.storage_size}];",
        "};",
        "",
        f"#endif  // {guard}",
        "",
    ]
    return "\n".join(lines)


def _emit_router(spec: RouterSpec, cls: str, guard: str) -> str:
    ins = [f"in{i}" for i in range(spec.in_socket_count)]
    outs = [f"out{i}" for i in range(spec.out_socket_count)]
    lines = [
        "// Generated by tlmforge 0.1.0. Blocking-transport coding style.",
        f"#ifndef {guard}",
        f"#define {guard}",
        "",
        "#include <vector>",
        "#include <systemc>",
        "#include <tlm>",
        "#include <tlm_utils/multi_passthrough_initiator_socket.h>",
        "#include <tlm_utils/multi_passthrough_target_socket.h>",
        "",
        f"// Router '{spec.name}': {spec.in_socket_count} in-socket(s), "
        f"{spec.out_socket_count} out-socket(s).",
        f"SC_MODULE({cls}) {{",
    ]
    for s in ins:
        lines.append(f"    tlm_utils::multi_passthrough_target_socket<{cls}> {s};")
    for s in outs:
        lines.append(f"    tlm_utils::multi_passthrough_initiator_socket<{cls}> {s};")
    lines += [
        "",
        f"    {cls}(sc_core::sc_module_name name, sc_core::sc_time delay)",
        "        : sc_core::sc_module(name)",
    ]
    for s in ins + outs:
        lines.append(f'        , {s}("{s}")')
    lines += [
        "        , m_delay(delay)",
        "    {",
    ]
    for i, s in enumerate(ins):
        lines.append(f"        {s}.register_b_transport(this, &{cls}::b_transport_in{i});")
    lines += [
        "    }",
        "",
    ]
    for i in range(spec.in_socket_count):
        lines += [
            f"    void b_transport_in{i}(int, tlm::tlm_generic_payload& trans, "
            "sc_core::sc_time& t) {",
            "        t += m_delay;",
        ]
        lines += _bw_add(spec)
        connected = spec.connections.get(i)
        if connected is None:
            lines.append("        // in-socket has no connection entry")
            lines.append("        trans.set_response_status(tlm::TLM_ADDRESS_ERROR_RESPONSE);")
        elif spec.address_map is not None:
            lines.append("        const sc_dt::uint64 addr = trans.get_address();")
            for out in sorted(set(connected)):
                rng = spec.address_map.get(out)
                if rng is None:
                    continue
                lines += [
                    f"        if (addr >= 0x{rng[0]:x} && addr < 0x{rng[1]:x}) {{",
                    f"            out{out}->b_transport(trans, t);",
                    "            return;",
                    "        }",
                ]
            lines.append("        trans.set_response_status(tlm::TLM_ADDRESS_ERROR_RESPONSE);")
        else:
            targets = sorted(set(connected))
            if len(targets) == 1:
                lines.append(f"        out{targets[0]}->b_transport(trans, t);")
            else:
                arm_list = ", ".join(f"out{o}" for o in targets)
                lines += [
                    f"        // connection: in{i} -> {arm_list} "
                    "(broadcast; join at the slowest arm)",
                    "        sc_core::sc_time done = t;",
                    "        tlm::tlm_response_status merged = tlm::TLM_OK_RESPONSE;",
                ]
                for out in targets:
                    lines.append(f"        forward(out{out}, trans, t, done, merged);")
                lines += [
                    "        trans.set_response_status(merged);",
                    "        t = done;",
                ]
        lines += [
            "    }",
            "",
        ]
    lines += [
        "private:",
        f"    void forward(tlm_utils::multi_passthrough_initiator_socket<{cls}>& out,",
        "                 tlm::tlm_generic_payload& trans,",
        "                 const sc_core::sc_time& base,",
        "                 sc_core::sc_time& done,",
        "                 tlm::tlm_response_status& merged) {",
        "        std::vector<unsigned char> buffer(",
        "            trans.get_data_ptr(), trans.get_data_ptr() + trans.get_data_length());",
        "        tlm::tlm_generic_payload copy;",
        "        copy.set_command(trans.get_command());",
        "        copy.set_address(trans.get_address());",
        "        copy.set_data_ptr(buffer.data());",
        "        copy.set_data_length(trans.get_data_length());",
        "        copy.set_streaming_width(trans.get_streaming_width());",
        "        copy.set_byte_enable_ptr(trans.get_byte_enable_ptr());",
        "        copy.set_byte_enable_length(trans.get_byte_enable_length());",
        "        copy.set_response_status(tlm::TLM_INCOMPLETE_RESPONSE);",
        "        sc_core::sc_time arm = base;",
        "        out->b_transport(copy, arm);",
        "        if (arm > done)",
        "            done = arm;",
        "        if (merged == tlm::TLM_OK_RESPONSE)",
        "            merged = copy.get_response_status();",
        "    }",
        "",
        "    sc_core::sc_time m_delay;",
        "};",
        "",
        f"#endif  // {guard}",
        "",
    ]
    return "\n".join(lines)


def export_tlm(description) -> SourceBundle:
    """Emit the source bundle for a validated description.

    One header per module spec plus ``top.cpp``; raises CodegenError when a
    name cannot be sanitized and ValueError when the description still has
    validation diagnostics.
    """
    from .sysdesc import validate_description  # local import avoids a cycle

    problems = validate_description(description)
    if problems:
        raise ValueError(
            f"description has {len(problems)} validation diagnostic(s); "
            "export requires a clean description")

    file_namer = _Namer(case_insensitive=True)
    class_namer = _Namer()
    classes: dict[str, str] = {}
    headers: list[tuple[str, str]] = []
    for spec in description.modules:
        cls = class_namer.unique(spec.name)
        classes[spec.name] = cls
        file_name = file_namer.unique(spec.name).lower() + ".h"
        guard = f"TLMFORGE_{cls.upper()}_H"
        if isinstance(spec, InitiatorSpec):
            text = _emit_initiator(spec, cls, guard)
        elif isinstance(spec, TargetSpec):
            text = _emit_target(spec, cls, guard)
        else:
            text = _emit_router(spec, cls, guard)
        headers.append((file_name, text))

    freqs = {c.name: c.frequency_ghz for c in description.cpus}
    specs = {m.name: m for m in description.modules}
    var_namer = _Namer()
    variables = {inst.name: var_namer.unique(inst.name) for inst in description.instances}

    top = [
        "// Generated by tlmforge 0.1.0. Instantiates and binds the described system.",
        "#include <systemc>",
        "#include <tlm>",
        "",
    ]
    for file_name, _ in headers:
        top.append(f'#include "{file_name}"')
    if headers:
        top.append("")
    top.append("int sc_main(int, char*[]) {")
    if description.cpus:
        listing = ", ".join(f"{c.name} @ {c.frequency_ghz} GHz" for c in description.cpus)
        top.append(f"    // CPUs: {listing}.")
        top.append("    // Delays below are pre-scaled by each instance's CPU frequency.")
    for inst in description.instances:
        spec = specs[inst.module]
        f = freqs[inst.cpu]
        if isinstance(spec, TargetSpec):
            args = ", ".join(_sc_time(effective_delay(p, f)) for p in spec.socket_delays_ps)
        else:
            args = _sc_time(effective_delay(spec.delay_ps, f))
        top.append(f'    {classes[inst.module]} {variables[inst.name]}("{inst.name}", {args});')
    if description.bindings:
        top.append("")
    for binding in description.bindings:
        from_spec = specs[
            next(i.module for i in description.instances if i.name == binding.from_instance)]
        to_spec = specs[
            next(i.module for i in description.instances if i.name == binding.to_instance)]
        from_sock = (f"out{binding.from_socket}" if isinstance(from_spec, RouterSpec)
                     else f"socket{binding.from_socket}")
        to_sock = (f"in{binding.to_socket}" if isinstance(to_spec, RouterSpec)
                   else f"socket{binding.to_socket}")
        top.append(f"    {variables[binding.from_instance]}.{from_sock}.bind("
                   f"{variables[binding.to_instance]}.{to_sock});")
    top += [
        "",
        "    sc_core::sc_start();",
        "    return 0;",
        "}",
        "",
    ]

    files = [("top.cpp", "\n".join(top))] + headers
    return SourceBundle(tuple(files))
