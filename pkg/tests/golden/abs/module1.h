// Generated by tlmforge 0.1.0. Blocking-transport coding style.
#ifndef TLMFORGE_MODULE1_H
#define TLMFORGE_MODULE1_H

#include <vector>
#include <systemc>
#include <tlm>
#include <tlm_utils/multi_passthrough_initiator_socket.h>
#include <tlm_utils/multi_passthrough_target_socket.h>

// Router 'Module1': 1 in-socket(s), 4 out-socket(s).
SC_MODULE(Module1) {
    tlm_utils::multi_passthrough_target_socket<Module1> in0;
    tlm_utils::multi_passthrough_initiator_socket<Module1> out0;
    tlm_utils::multi_passthrough_initiator_socket<Module1> out1;
    tlm_utils::multi_passthrough_initiator_socket<Module1> out2;
    tlm_utils::multi_passthrough_initiator_socket<Module1> out3;

    Module1(sc_core::sc_module_name name, sc_core::sc_time delay)
        : sc_core::sc_module(name)
        , in0("in0")
        , out0("out0")
        , out1("out1")
        , out2("out2")
        , out3("out3")
        , m_delay(delay)
    {
        in0.register_b_transport(this, &Module1::b_transport_in0);
    }

    void b_transport_in0(int, tlm::tlm_generic_payload& trans, sc_core::sc_time& t) {
        t += m_delay;
        // connection: in0 -> out0, out1, out2, out3 (broadcast; join at the slowest arm)
        sc_core::sc_time done = t;
        tlm::tlm_response_status merged = tlm::TLM_OK_RESPONSE;
        forward(out0, trans, t, done, merged);
        forward(out1, trans, t, done, merged);
        forward(out2, trans, t, done, merged);
        forward(out3, trans, t, done, merged);
        trans.set_response_status(merged);
        t = done;
    }

private:
    void forward(tlm_utils::multi_passthrough_initiator_socket<Module1>& out,
                 tlm::tlm_generic_payload& trans,
                 const sc_core::sc_time& base,
                 sc_core::sc_time& done,
                 tlm::tlm_response_status& merged) {
        std::vector<unsigned char> buffer(
            trans.get_data_ptr(), trans.get_data_ptr() + trans.get_data_length());
        tlm::tlm_generic_payload copy;
        copy.set_command(trans.get_command());
        copy.set_address(trans.get_address());
        copy.set_data_ptr(buffer.data());
        copy.set_data_length(trans.get_data_length());
        copy.set_streaming_width(trans.get_streaming_width());
        copy.set_byte_enable_ptr(trans.get_byte_enable_ptr());
        copy.set_byte_enable_length(trans.get_byte_enable_length());
        copy.set_response_status(tlm::TLM_INCOMPLETE_RESPONSE);
        sc_core::sc_time arm = base;
        out->b_transport(copy, arm);
        if (arm > done)
            done = arm;
        if (merged == tlm::TLM_OK_RESPONSE)
            merged = copy.get_response_status();
    }

    sc_core::sc_time m_delay;
};

#endif  // TLMFORGE_MODULE1_H
