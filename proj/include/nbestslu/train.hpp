#pragma once

// Mini-batch training. The strategy decides what one example looks like:
// the transcription for single-text models, the delimiter-joined n-best text
// for combined-sentence, or the per-hypothesis id lists for pooling.

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "nbestslu/integration.hpp"
#include "nbestslu/optimizer.hpp"
#include "nbestslu/rng.hpp"

namespace nbest {

struct PreparedExample {
    std::vector<std::vector<int>> hypothesis_ids; // pooling strategies
    std::vector<int> flat_ids;                    // everything else
    int label = -1;
};

inline const std::string& gold_label(const NBestList& r, Task task) {
    return task == Task::domain ? r.domain : r.intent;
}

inline PreparedExample prepare_example(const NBestList& record, const Model& model) {
    PreparedExample ex;
    ex.label = model.tags.index_of(gold_label(record, model.task));
    switch (model.strategy) {
        case StrategyKind::combined_sentence:
            ex.flat_ids = encode_or_unknown(
                model.vocab, build_combined_text(record, model.hp.n, model.vocab.delimiter()));
            break;
        case StrategyKind::pooling_avg:
        case StrategyKind::pooling_max:
            ex.hypothesis_ids = encode_hypotheses(model, record, model.hp.n);
            break;
        default: // single-text models train on the transcription
            ex.flat_ids = encode_or_unknown(model.vocab, record.transcription_or_throw());
            break;
    }
    return ex;
}

// Scalar cross-entropy of one example through the strategy's pipeline.
inline Var example_loss(Tape& t, const Model& model, const PreparedExample& ex) {
    Var dist;
    if (is_pooling(model.strategy)) {
        dist = pooling_distribution(t, model, ex.hypothesis_ids,
                                    pooling_mode_of(model.strategy), model.hp.n);
    } else {
        dist = sequence_distribution(t, model, ex.flat_ids);
    }
    return t.cross_entropy(dist, static_cast<std::size_t>(ex.label));
}

struct TrainResult {
    Model model;
    // loss_trace[e] is the full-corpus mean loss after e completed epochs;
    // entry 0 is the loss at initialization.
    std::vector<double> loss_trace;
};

inline double mean_corpus_loss(const Model& model, const std::vector<PreparedExample>& examples) {
    double total = 0.0;
    for (const PreparedExample& ex : examples) {
        Tape t;
        total += t.value(example_loss(t, model, ex))[0];
    }
    return examples.empty() ? 0.0 : total / static_cast<double>(examples.size());
}

// Deterministic given (corpus, hyperparameters, seed): initialization and the
// per-epoch shuffle both draw from the seeded stream, nothing else does.
inline TrainResult train_model(const std::vector<NBestList>& corpus, StrategyKind strategy,
                               Task task, const std::string& task_domain,
                               const bpe::Vocabulary& vocab, const Hyperparams& hp) {
    std::vector<const NBestList*> records;
    for (const NBestList& r : corpus) {
        if (task == Task::intent && !task_domain.empty() && r.domain != task_domain) continue;
        records.push_back(&r);
    }
    if (records.empty()) {
        throw Error(task == Task::intent && !task_domain.empty()
                        ? format_msg("no training records for domain '", task_domain, "'")
                        : std::string("training corpus is empty"));
    }

    TrainResult result;
    Model& model = result.model;
    model.vocab = vocab;
    model.strategy = strategy;
    model.task = task;
    model.task_domain = task == Task::intent ? task_domain : "";
    model.hp = hp;
    model.hp.merges = vocab.merges().size();

    std::vector<std::string> labels;
    labels.reserve(records.size());
    for (const NBestList* r : records) {
        if (gold_label(*r, task).empty()) {
            throw Error(format_msg("utterance ", r->id, " has an empty ", to_string(task),
                                   " label"));
        }
        labels.push_back(gold_label(*r, task));
    }
    model.tags = TagSet::from_labels(labels);

    Rng rng(hp.seed);
    model.init_params(rng);

    std::vector<PreparedExample> examples;
    examples.reserve(records.size());
    for (const NBestList* r : records) examples.push_back(prepare_example(*r, model));

    result.loss_trace.push_back(mean_corpus_loss(model, examples));

    nn::Optimizer optimizer(model.parameters(),
                            {hp.optimizer, hp.learning_rate});
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        shuffle_deterministic(order, rng);
        for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
            std::size_t end = std::min(order.size(), start + hp.batch_size);
            for (std::size_t k = start; k < end; ++k) {
                Tape t;
                Var loss = example_loss(t, model, examples[order[k]]);
                double value = t.value(loss)[0];
                if (!std::isfinite(value)) {
                    throw Error(format_msg("training diverged: non-finite loss in epoch ",
                                           epoch + 1));
                }
                t.backward(loss);
            }
            optimizer.step(1.0 / static_cast<double>(end - start));
        }
        result.loss_trace.push_back(mean_corpus_loss(model, examples));
    }
    return result;
}

} // namespace nbest
