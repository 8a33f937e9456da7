#pragma once

// Classification head and the bundled model: vocabulary, tag set, encoder
// parameters, and the affine+softmax output layer.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "nbestslu/bpe.hpp"
#include "nbestslu/encoder.hpp"
#include "nbestslu/nbest_list.hpp"
#include "nbestslu/optimizer.hpp"

namespace nbest {

class TagSet {
public:
    TagSet() = default;

    explicit TagSet(std::vector<std::string> names) : names_(std::move(names)) {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!index_.emplace(names_[i], static_cast<int>(i)).second) {
                throw Error(format_msg("duplicate tag '", names_[i], "'"));
            }
        }
    }

    // Sorted unique labels; the order is fixed here and persisted with the model.
    static TagSet from_labels(const std::vector<std::string>& labels) {
        std::set<std::string> uniq(labels.begin(), labels.end());
        return TagSet(std::vector<std::string>(uniq.begin(), uniq.end()));
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }
    bool contains(const std::string& tag) const { return index_.count(tag) > 0; }

    int index_of(const std::string& tag) const {
        auto it = index_.find(tag);
        if (it == index_.end()) throw Error(format_msg("unknown tag '", tag, "'"));
        return it->second;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

struct MlpParams {
    Param weight; // [tags x input]
    Param bias;   // [tags]
    std::optional<Param> hidden_weight; // [hidden x input] when a hidden layer is enabled
    std::optional<Param> hidden_bias;   // [hidden]

    void init(std::size_t input_dim, std::size_t num_tags, std::size_t hidden, Rng& rng) {
        auto uniform_tensor = [&](std::vector<std::size_t> shape) {
            Tensor t(std::move(shape));
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform_range(rng, -0.1, 0.1);
            return t;
        };
        std::size_t top_in = input_dim;
        if (hidden > 0) {
            hidden_weight = Param("mlp.hidden_weight", uniform_tensor({hidden, input_dim}));
            hidden_bias = Param("mlp.hidden_bias", uniform_tensor({hidden}));
            top_in = hidden;
        }
        weight = Param("mlp.weight", uniform_tensor({num_tags, top_in}));
        bias = Param("mlp.bias", uniform_tensor({num_tags}));
    }

    std::vector<Param*> parameters() {
        std::vector<Param*> out;
        if (hidden_weight) {
            out.push_back(&*hidden_weight);
            out.push_back(&*hidden_bias);
        }
        out.push_back(&weight);
        out.push_back(&bias);
        return out;
    }
};

// softmax(W v + b), optionally through one tanh hidden layer.
inline Var classify_embedding(Tape& t, const MlpParams& mlp, Var v) {
    Var x = v;
    if (mlp.hidden_weight) {
        x = t.tanh(t.affine(t.param(*mlp.hidden_weight), x, t.param(*mlp.hidden_bias)));
    }
    return t.softmax(t.affine(t.param(mlp.weight), x, t.param(mlp.bias)));
}

enum class Task { domain, intent };

inline const char* to_string(Task t) { return t == Task::domain ? "domain" : "intent"; }

inline Task task_from_string(const std::string& s) {
    if (s == "domain") return Task::domain;
    if (s == "intent") return Task::intent;
    throw Error(format_msg("unknown task '", s, "' (expected domain or intent)"));
}

struct Hyperparams {
    std::size_t embed_dim = 64;
    std::size_t hidden_dim = 128;
    std::size_t mlp_hidden = 0; // 0 = single affine layer
    std::size_t n = 5;          // hypothesis budget used in training
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    std::uint64_t seed = 1;
    std::size_t merges = 0; // informational: merge count of the attached vocabulary
};

struct Prediction {
    std::string tag;
    double confidence = 0.0;
    int selected_rank = 0; // 1-based rank chosen by rerank-oracle, else 0
};

struct Model {
    bpe::Vocabulary vocab;
    TagSet tags;
    EncoderParams encoder;
    MlpParams mlp;
    StrategyKind strategy = StrategyKind::baseline;
    Task task = Task::domain;
    std::string task_domain; // set for domain-scoped intent models
    Hyperparams hp;

    void init_params(Rng& rng) {
        encoder.init(vocab.size(), hp.embed_dim, hp.hidden_dim, rng);
        mlp.init(2 * hp.hidden_dim, tags.size(), hp.mlp_hidden, rng);
    }

    std::vector<Param*> parameters() {
        std::vector<Param*> out = encoder.parameters();
        for (Param* p : mlp.parameters()) out.push_back(p);
        return out;
    }

    std::vector<const Param*> parameters() const {
        auto mut = const_cast<Model*>(this)->parameters();
        return {mut.begin(), mut.end()};
    }
};

// Tag distribution for a single encoded sequence.
inline Var sequence_distribution(Tape& t, const Model& model, std::span<const int> ids) {
    HiddenStateSequence states = bilstm_encode(t, model.encoder, ids);
    Var v = utterance_output_vector(t, states);
    return classify_embedding(t, model.mlp, v);
}

inline Prediction distribution_argmax(const Tensor& dist, const TagSet& tags) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i) {
        if (dist[i] > dist[best]) best = i;
    }
    return {tags.name(best), dist[best], 0};
}

// The single-text classification mapping: encode, BiLSTM, output vector,
// affine+softmax; returns the argmax tag with its probability.
inline Prediction bm_predict(const Model& model, const std::string& text) {
    std::vector<int> ids = model.vocab.encode(text);
    if (ids.empty()) {
        throw Error(format_msg("text '", text, "' encodes to an empty sequence"));
    }
    Tape t;
    Var dist = sequence_distribution(t, model, ids);
    return distribution_argmax(t.value(dist), model.tags);
}

} // namespace nbest
