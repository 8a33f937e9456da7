#pragma once

// Strategies over an utterance's n-best list: direct combination of
// per-hypothesis predictions, hypothesis text concatenation, and pooled
// hypothesis embeddings.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "nbestslu/classifier.hpp"
#include "nbestslu/edit_distance.hpp"

namespace nbest {

// Hypothesis text can be emptied by recognition noise; a single unknown
// token keeps the encoder total instead of erroring.
inline std::vector<int> encode_or_unknown(const bpe::Vocabulary& vocab, const std::string& text) {
    std::vector<int> ids = vocab.encode(text);
    if (ids.empty()) ids.push_back(vocab.unknown_id());
    return ids;
}

// ---- direct strategies ---------------------------------------------------

// Most frequent tag; ties go to the tag predicted by the highest-ranked
// (lowest index) hypothesis among the tied tags.
inline std::string majority_vote(const std::vector<Prediction>& predictions) {
    if (predictions.empty()) throw Error("majority_vote: no predictions");
    std::map<std::string, std::size_t> counts;
    for (const Prediction& p : predictions) ++counts[p.tag];
    std::size_t best_count = 0;
    for (const auto& [tag, c] : counts) best_count = std::max(best_count, c);
    for (const Prediction& p : predictions) {
        if (counts[p.tag] == best_count) return p.tag;
    }
    return predictions.front().tag; // unreachable
}

// Tag of the highest-confidence prediction; ties go to the lowest rank index.
inline std::string sort_by_score(const std::vector<Prediction>& predictions) {
    if (predictions.empty()) throw Error("sort_by_score: no predictions");
    std::size_t best = 0;
    for (std::size_t i = 1; i < predictions.size(); ++i) {
        if (predictions[i].confidence > predictions[best].confidence) best = i;
    }
    return predictions[best].tag;
}

struct RerankSelection {
    std::size_t rank = 0; // 1-based
    std::string text;
    std::size_t distance = 0;
};

// Hypothesis with the smallest edit distance to the transcription; ties go
// to the lowest rank.
inline RerankSelection rerank_oracle_select(const NBestList& utterance,
                                            EditGranularity granularity = EditGranularity::token,
                                            std::size_t budget = 0) {
    const std::string& truth = utterance.transcription_or_throw();
    if (utterance.hypotheses.empty()) {
        throw Error(format_msg("utterance ", utterance.id, " has no hypotheses"));
    }
    std::size_t limit = utterance.hypotheses.size();
    if (budget > 0) limit = std::min(limit, budget);
    RerankSelection sel{1, utterance.hypotheses[0].text,
                        edit_distance(utterance.hypotheses[0].text, truth, granularity)};
    for (std::size_t i = 1; i < limit; ++i) {
        std::size_t d = edit_distance(utterance.hypotheses[i].text, truth, granularity);
        if (d < sel.distance) sel = {i + 1, utterance.hypotheses[i].text, d};
    }
    return sel;
}

// ---- trained integration -------------------------------------------------

// Joins the top min(r, n) hypothesis texts in rank order, separated by the
// delimiter token; no leading or trailing delimiter.
inline std::string build_combined_text(const NBestList& utterance, std::size_t n,
                                       const std::string& delimiter) {
    if (utterance.hypotheses.empty()) {
        throw Error(format_msg("utterance ", utterance.id, " has no hypotheses"));
    }
    std::size_t take = std::min<std::size_t>(n, utterance.hypotheses.size());
    std::string out;
    for (std::size_t i = 0; i < take; ++i) {
        if (i) out += " " + delimiter + " ";
        out += utterance.hypotheses[i].text;
    }
    return out;
}

// Stack rule: with r < n rows the first row pads the stack up to n; with
// r >= n only the top n rows are kept.
template <typename Row>
std::vector<Row> stack_and_pad(const std::vector<Row>& rows, std::size_t n) {
    if (rows.empty()) throw Error("stack_and_pad: empty embedding list");
    if (n < 1) throw Error("stack_and_pad: n must be >= 1");
    std::vector<Row> out;
    out.reserve(n);
    for (std::size_t i = 0; i < std::min(rows.size(), n); ++i) out.push_back(rows[i]);
    while (out.size() < n) out.push_back(rows[0]);
    return out;
}

enum class PoolingMode { avg, max };

inline Var pool(Tape& t, const std::vector<Var>& stack, PoolingMode mode) {
    return mode == PoolingMode::avg ? t.mean_rows(stack) : t.max_rows(stack);
}

inline PoolingMode pooling_mode_of(StrategyKind kind) {
    if (kind == StrategyKind::pooling_avg) return PoolingMode::avg;
    if (kind == StrategyKind::pooling_max) return PoolingMode::max;
    throw Error(format_msg("strategy ", to_string(kind), " is not a pooling strategy"));
}

// Full pooled pipeline on the tape: per-hypothesis BiLSTM output vectors,
// stack-and-pad to n, coordinate-wise pooling, classification.
inline Var pooling_distribution(Tape& t, const Model& model,
                                const std::vector<std::vector<int>>& hypothesis_ids,
                                PoolingMode mode, std::size_t n) {
    if (hypothesis_ids.empty()) throw Error("pooling: no hypotheses");
    std::vector<Var> outputs;
    outputs.reserve(std::min(hypothesis_ids.size(), n));
    for (std::size_t i = 0; i < std::min(hypothesis_ids.size(), n); ++i) {
        HiddenStateSequence states = bilstm_encode(t, model.encoder, hypothesis_ids[i]);
        outputs.push_back(utterance_output_vector(t, states));
    }
    std::vector<Var> stacked = stack_and_pad(outputs, n);
    Var pooled = pool(t, stacked, mode);
    return classify_embedding(t, model.mlp, pooled);
}

inline std::vector<std::vector<int>> encode_hypotheses(const Model& model,
                                                       const NBestList& utterance,
                                                       std::size_t n) {
    std::vector<std::vector<int>> ids;
    std::size_t take = std::min<std::size_t>(n, utterance.hypotheses.size());
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        ids.push_back(encode_or_unknown(model.vocab, utterance.hypotheses[i].text));
    }
    return ids;
}

inline Prediction pooling_predict(const Model& model, const NBestList& utterance,
                                  PoolingMode mode, std::size_t n) {
    Tape t;
    Var dist = pooling_distribution(t, model, encode_hypotheses(model, utterance, n), mode, n);
    return distribution_argmax(t.value(dist), model.tags);
}

// ---- strategy dispatch -----------------------------------------------------

inline Prediction predict_text(const Model& model, const std::string& text) {
    Tape t;
    Var dist = sequence_distribution(t, model, encode_or_unknown(model.vocab, text));
    return distribution_argmax(t.value(dist), model.tags);
}

inline std::vector<Prediction> per_hypothesis_predictions(const Model& model,
                                                          const NBestList& utterance,
                                                          std::size_t n) {
    std::vector<Prediction> preds;
    std::size_t take = std::min<std::size_t>(n, utterance.hypotheses.size());
    for (std::size_t i = 0; i < take; ++i) {
        preds.push_back(predict_text(model, utterance.hypotheses[i].text));
    }
    return preds;
}

inline Prediction predict(const Model& model, const NBestList& utterance,
                          const StrategyConfig& cfg) {
    cfg.validate();
    switch (cfg.kind) {
        case StrategyKind::baseline:
            return predict_text(model, utterance.first_best());
        case StrategyKind::oracle:
            return predict_text(model, utterance.transcription_or_throw());
        case StrategyKind::majority_vote: {
            std::vector<Prediction> preds = per_hypothesis_predictions(model, utterance, cfg.n);
            std::string tag = majority_vote(preds);
            for (const Prediction& p : preds)
                if (p.tag == tag) return p;
            return preds.front(); // unreachable
        }
        case StrategyKind::sort_by_score: {
            std::vector<Prediction> preds = per_hypothesis_predictions(model, utterance, cfg.n);
            if (cfg.score_source == ScoreSource::asr) {
                for (std::size_t i = 0; i < preds.size(); ++i) {
                    const auto& score = utterance.hypotheses[i].score;
                    if (!score) {
                        throw Error(format_msg("utterance ", utterance.id,
                                               " has no ASR scores for sort-by-score"));
                    }
                    preds[i].confidence = *score;
                }
            }
            std::string tag = sort_by_score(preds);
            for (const Prediction& p : preds)
                if (p.tag == tag) return p;
            return preds.front(); // unreachable
        }
        case StrategyKind::rerank_oracle: {
            RerankSelection sel = rerank_oracle_select(utterance, cfg.granularity, cfg.n);
            Prediction p = predict_text(model, sel.text);
            p.selected_rank = static_cast<int>(sel.rank);
            return p;
        }
        case StrategyKind::combined_sentence:
            return predict_text(model,
                                build_combined_text(utterance, cfg.n, model.vocab.delimiter()));
        case StrategyKind::pooling_avg:
            return pooling_predict(model, utterance, PoolingMode::avg, cfg.n);
        case StrategyKind::pooling_max:
            return pooling_predict(model, utterance, PoolingMode::max, cfg.n);
    }
    throw Error("unknown strategy");
}

} // namespace nbest
