#pragma once

// BiLSTM utterance encoder.
//
// A subword id sequence becomes per-position forward/backward hidden states;
// the utterance embedding is the backward state at the first position
// concatenated with the forward state at the last, size 2 * hidden_dim.

#include <cstddef>
#include <span>
#include <vector>

#include "nbestslu/autodiff.hpp"
#include "nbestslu/rng.hpp"

namespace nbest {

using nn::Param;
using nn::Tape;
using nn::Tensor;
using nn::Var;

struct LstmDirectionParams {
    // gate weights are [hidden x (embed + hidden)], applied to [x_t ; h_prev]
    Param w_input, w_forget, w_output, w_cell;
    Param b_input, b_forget, b_output, b_cell;

    void init(const std::string& prefix, std::size_t embed_dim, std::size_t hidden_dim,
              Rng& rng) {
        auto weight = [&](const char* gate) {
            Tensor t({hidden_dim, embed_dim + hidden_dim});
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform_range(rng, -0.1, 0.1);
            return Param(prefix + ".w_" + gate, std::move(t));
        };
        auto bias = [&](const char* gate, double value) {
            Tensor t({hidden_dim});
            t.fill(value);
            return Param(prefix + ".b_" + gate, std::move(t));
        };
        w_input = weight("input");
        w_forget = weight("forget");
        w_output = weight("output");
        w_cell = weight("cell");
        b_input = bias("input", 0.0);
        b_forget = bias("forget", 1.0); // forget gate starts open
        b_output = bias("output", 0.0);
        b_cell = bias("cell", 0.0);
    }

    std::vector<Param*> parameters() {
        return {&w_input, &w_forget, &w_output, &w_cell,
                &b_input, &b_forget, &b_output, &b_cell};
    }
};

struct EncoderParams {
    std::size_t vocab_size = 0;
    std::size_t embed_dim = 0;
    std::size_t hidden_dim = 0;
    Param embedding; // [vocab x embed_dim]
    LstmDirectionParams forward_dir, backward_dir;

    void init(std::size_t vocab, std::size_t d_e, std::size_t d_h, Rng& rng) {
        vocab_size = vocab;
        embed_dim = d_e;
        hidden_dim = d_h;
        Tensor emb({vocab, d_e});
        for (std::size_t i = 0; i < emb.size(); ++i) emb[i] = uniform_range(rng, -0.1, 0.1);
        embedding = Param("encoder.embedding", std::move(emb));
        forward_dir.init("encoder.fwd", d_e, d_h, rng);
        backward_dir.init("encoder.bwd", d_e, d_h, rng);
    }

    std::vector<Param*> parameters() {
        std::vector<Param*> out{&embedding};
        for (Param* p : forward_dir.parameters()) out.push_back(p);
        for (Param* p : backward_dir.parameters()) out.push_back(p);
        return out;
    }
};

struct LstmState {
    Var h, c;
};

// Standard gated update: sigmoid input/forget/output gates, tanh candidate,
// c_t = f * c_prev + i * g, h_t = o * tanh(c_t).
inline LstmState lstm_step(Tape& t, const LstmDirectionParams& p, Var x, LstmState prev) {
    Var xh = t.concat(x, prev.h);
    Var input_gate = t.sigmoid(t.affine(t.param(p.w_input), xh, t.param(p.b_input)));
    Var forget_gate = t.sigmoid(t.affine(t.param(p.w_forget), xh, t.param(p.b_forget)));
    Var output_gate = t.sigmoid(t.affine(t.param(p.w_output), xh, t.param(p.b_output)));
    Var candidate = t.tanh(t.affine(t.param(p.w_cell), xh, t.param(p.b_cell)));
    Var cell = t.add(t.mul(forget_gate, prev.c), t.mul(input_gate, candidate));
    Var hidden = t.mul(output_gate, t.tanh(cell));
    return {hidden, cell};
}

inline std::vector<Var> embed_ids(Tape& t, const EncoderParams& enc, std::span<const int> ids) {
    std::vector<Var> out;
    out.reserve(ids.size());
    for (int id : ids) {
        if (id < 0) throw Error(format_msg("negative subword id ", id));
        out.push_back(t.embed_row(enc.embedding, static_cast<std::size_t>(id)));
    }
    return out;
}

// Per-position hidden states, both directions, aligned with the input.
struct HiddenStateSequence {
    std::vector<Var> forward;
    std::vector<Var> backward;

    std::size_t length() const { return forward.size(); }
};

inline HiddenStateSequence bilstm_encode(Tape& t, const EncoderParams& enc,
                                         std::span<const int> ids) {
    if (ids.empty()) throw Error("bilstm_encode: empty input sequence");
    std::vector<Var> xs = embed_ids(t, enc, ids);
    const std::size_t m = xs.size();
    HiddenStateSequence states;
    states.forward.resize(m);
    states.backward.resize(m);

    LstmState fwd{t.zeros(enc.hidden_dim), t.zeros(enc.hidden_dim)};
    for (std::size_t i = 0; i < m; ++i) {
        fwd = lstm_step(t, enc.forward_dir, xs[i], fwd);
        states.forward[i] = fwd.h;
    }
    LstmState bwd{t.zeros(enc.hidden_dim), t.zeros(enc.hidden_dim)};
    for (std::size_t i = m; i-- > 0;) {
        bwd = lstm_step(t, enc.backward_dir, xs[i], bwd);
        states.backward[i] = bwd.h;
    }
    return states;
}

// [h_1 backward, h_m forward], the 2*hidden_dim utterance embedding.
inline Var utterance_output_vector(Tape& t, const HiddenStateSequence& states) {
    if (states.length() == 0) throw Error("utterance_output_vector: empty state sequence");
    return t.concat(states.backward.front(), states.forward.back());
}

} // namespace nbest
