#pragma once

// Self-contained model checkpoint: one JSON document holding the tag set,
// the vocabulary (inline), strategy and hyperparameters, and every parameter
// tensor as shape + flat value array. Loading reconstructs a model whose
// predictions match the saved one bit for bit.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbestslu/classifier.hpp"
#include "nbestslu/error.hpp"

namespace nbest {

using json = nlohmann::json;

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "nbest-slu-checkpoint";

inline json checkpoint_to_json(const Model& model) {
    json params = json::array();
    for (const Param* p : model.parameters()) {
        require_finite(p->value, p->name.c_str());
        params.push_back(json{{"name", p->name},
                              {"shape", p->value.shape()},
                              {"data", p->value.values()}});
    }
    return json{
        {"format", kCheckpointFormat},
        {"version", kCheckpointVersion},
        {"strategy", to_string(model.strategy)},
        {"task", to_string(model.task)},
        {"task_domain", model.task_domain},
        {"tags", model.tags.names()},
        {"vocab", model.vocab.serialize()},
        {"hyperparams",
         {{"embed_dim", model.hp.embed_dim},
          {"hidden_dim", model.hp.hidden_dim},
          {"mlp_hidden", model.hp.mlp_hidden},
          {"n", model.hp.n},
          {"epochs", model.hp.epochs},
          {"batch_size", model.hp.batch_size},
          {"learning_rate", model.hp.learning_rate},
          {"optimizer", to_string(model.hp.optimizer)},
          {"seed", model.hp.seed},
          {"merges", model.hp.merges}}},
        {"params", std::move(params)},
    };
}

inline void save_checkpoint(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(format_msg("cannot write checkpoint ", path));
    out << checkpoint_to_json(model).dump(1) << '\n';
}

inline Model checkpoint_from_json(const json& j, const std::string& origin) {
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
        throw Error(format_msg(origin, ": not a checkpoint file"));
    }
    int version = j.value("version", -1);
    if (version != kCheckpointVersion) {
        throw Error(format_msg(origin, ": unsupported checkpoint version ", version,
                               " (expected ", kCheckpointVersion, ")"));
    }
    Model model;
    try {
        model.strategy = strategy_from_string(j.at("strategy").get<std::string>());
        model.task = task_from_string(j.at("task").get<std::string>());
        model.task_domain = j.value("task_domain", "");
        model.tags = TagSet(j.at("tags").get<std::vector<std::string>>());
        model.vocab = bpe::Vocabulary::deserialize(j.at("vocab").get<std::string>(), origin);
        const json& hp = j.at("hyperparams");
        model.hp.embed_dim = hp.at("embed_dim").get<std::size_t>();
        model.hp.hidden_dim = hp.at("hidden_dim").get<std::size_t>();
        model.hp.mlp_hidden = hp.at("mlp_hidden").get<std::size_t>();
        model.hp.n = hp.at("n").get<std::size_t>();
        model.hp.epochs = hp.at("epochs").get<std::size_t>();
        model.hp.batch_size = hp.at("batch_size").get<std::size_t>();
        model.hp.learning_rate = hp.at("learning_rate").get<double>();
        model.hp.optimizer = nn::optimizer_kind_from_string(hp.at("optimizer").get<std::string>());
        model.hp.seed = hp.at("seed").get<std::uint64_t>();
        model.hp.merges = hp.at("merges").get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(format_msg(origin, ": malformed checkpoint: ", e.what()));
    }

    // allocate parameter tensors, then overwrite from the stored arrays
    Rng rng(model.hp.seed);
    model.encoder.init(model.vocab.size(), model.hp.embed_dim, model.hp.hidden_dim, rng);
    model.mlp.init(2 * model.hp.hidden_dim, model.tags.size(), model.hp.mlp_hidden, rng);

    std::vector<Param*> params = model.parameters();
    const json& stored = j.at("params");
    if (!stored.is_array() || stored.size() != params.size()) {
        throw Error(format_msg(origin, ": checkpoint stores ", stored.size(),
                               " parameters, model needs ", params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const json& sp = stored[i];
        std::string name = sp.value("name", "");
        if (name != params[i]->name) {
            throw Error(format_msg(origin, ": parameter ", i, " is '", name, "', expected '",
                                   params[i]->name, "'"));
        }
        std::vector<std::size_t> shape;
        std::vector<double> data;
        try {
            shape = sp.at("shape").get<std::vector<std::size_t>>();
            data = sp.at("data").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw Error(format_msg(origin, ": malformed parameter '", name, "': ", e.what()));
        }
        Tensor t(shape, std::move(data));
        if (!t.same_shape(params[i]->value)) {
            throw Error(format_msg(origin, ": parameter '", name, "' has shape ", t.shape_str(),
                                   ", expected ", params[i]->value.shape_str()));
        }
        require_finite(t, name.c_str());
        params[i]->value = std::move(t);
        params[i]->grad = Tensor(params[i]->value.shape());
    }
    return model;
}

inline Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(format_msg("cannot read checkpoint ", path));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(format_msg(path, ": truncated or invalid checkpoint: ", e.what()));
    }
    return checkpoint_from_json(j, path);
}

// Every gold tag of the evaluation corpus must exist in the model's tag set.
inline void validate_corpus_tags(const Model& model, const std::vector<NBestList>& corpus) {
    for (const NBestList& r : corpus) {
        const std::string& tag = model.task == Task::domain ? r.domain : r.intent;
        if (!model.tags.contains(tag)) {
            throw Error(format_msg("utterance ", r.id, " carries ", to_string(model.task),
                                   " tag '", tag, "' unknown to the model checkpoint"));
        }
    }
}

} // namespace nbest
