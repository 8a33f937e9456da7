#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nbestslu/edit_distance.hpp"
#include "nbestslu/error.hpp"

namespace nbest {

struct Hypothesis {
    std::string text;
    std::optional<double> score; // ASR confidence, non-increasing with rank
};

// One utterance: ranked recognition hypotheses plus gold annotations.
// Rank 1 is hypotheses.front().
struct NBestList {
    std::string id;
    std::optional<std::string> transcription; // absent for unannotated inference input
    std::string domain;
    std::string intent;
    std::vector<Hypothesis> hypotheses;

    std::size_t list_size() const { return hypotheses.size(); }

    const std::string& first_best() const {
        if (hypotheses.empty()) throw Error(format_msg("utterance ", id, " has no hypotheses"));
        return hypotheses.front().text;
    }

    const std::string& transcription_or_throw() const {
        if (!transcription) {
            throw Error(format_msg("utterance ", id, " has no transcription"));
        }
        return *transcription;
    }

    void validate() const {
        if (hypotheses.empty()) {
            throw Error(format_msg("utterance ", id, ": nbest list must be non-empty"));
        }
        bool any_score = false, all_score = true;
        for (const Hypothesis& h : hypotheses) {
            if (h.score) any_score = true;
            else all_score = false;
        }
        if (any_score && !all_score) {
            throw Error(format_msg("utterance ", id, ": either all or no hypotheses carry scores"));
        }
        if (any_score) {
            for (std::size_t i = 1; i < hypotheses.size(); ++i) {
                if (*hypotheses[i].score > *hypotheses[i - 1].score) {
                    throw Error(format_msg("utterance ", id, ": scores must be non-increasing (rank ",
                                           i + 1, " exceeds rank ", i, ")"));
                }
            }
        }
    }
};

enum class StrategyKind {
    baseline,
    oracle,
    majority_vote,
    sort_by_score,
    rerank_oracle,
    combined_sentence,
    pooling_avg,
    pooling_max,
};

inline const char* to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::baseline: return "baseline";
        case StrategyKind::oracle: return "oracle";
        case StrategyKind::majority_vote: return "majority-vote";
        case StrategyKind::sort_by_score: return "sort-by-score";
        case StrategyKind::rerank_oracle: return "rerank-oracle";
        case StrategyKind::combined_sentence: return "combined-sentence";
        case StrategyKind::pooling_avg: return "pooling-avg";
        case StrategyKind::pooling_max: return "pooling-max";
    }
    return "?";
}

inline StrategyKind strategy_from_string(const std::string& s) {
    for (StrategyKind k : {StrategyKind::baseline, StrategyKind::oracle,
                           StrategyKind::majority_vote, StrategyKind::sort_by_score,
                           StrategyKind::rerank_oracle, StrategyKind::combined_sentence,
                           StrategyKind::pooling_avg, StrategyKind::pooling_max}) {
        if (s == to_string(k)) return k;
    }
    throw Error(format_msg("unknown strategy '", s, "'"));
}

// Single-text strategies all run the same transcription-trained model; the
// three trained-integration strategies each need a matching training run.
inline bool uses_single_text_model(StrategyKind k) {
    switch (k) {
        case StrategyKind::baseline:
        case StrategyKind::oracle:
        case StrategyKind::majority_vote:
        case StrategyKind::sort_by_score:
        case StrategyKind::rerank_oracle: return true;
        default: return false;
    }
}

inline bool is_pooling(StrategyKind k) {
    return k == StrategyKind::pooling_avg || k == StrategyKind::pooling_max;
}

enum class ScoreSource { classifier, asr };

inline const char* to_string(ScoreSource s) {
    return s == ScoreSource::classifier ? "classifier" : "asr";
}

inline ScoreSource score_source_from_string(const std::string& s) {
    if (s == "classifier") return ScoreSource::classifier;
    if (s == "asr") return ScoreSource::asr;
    throw Error(format_msg("unknown score source '", s, "' (expected classifier or asr)"));
}

struct StrategyConfig {
    StrategyKind kind = StrategyKind::baseline;
    std::size_t n = 5; // hypothesis budget
    ScoreSource score_source = ScoreSource::classifier;
    EditGranularity granularity = EditGranularity::token;

    void validate() const {
        if (n < 1) throw Error("strategy: hypothesis budget n must be >= 1");
    }
};

} // namespace nbest
