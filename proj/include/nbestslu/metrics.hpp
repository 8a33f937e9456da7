#pragma once

// Evaluation: micro/macro F1, relative error reduction, recognition-quality
// statistics, agree/disagree subset analysis, and hypothesis-count sweeps.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbestslu/edit_distance.hpp"
#include "nbestslu/integration.hpp"
#include "nbestslu/nbest_list.hpp"

namespace nbest {

using json = nlohmann::json;

// Micro F1 equals accuracy for single-label multi-class data. Macro F1
// averages per-tag F1 over the tags that occur in gold or predictions; tags
// absent from both are excluded from the mean.
inline std::pair<double, double> micro_macro_f1(const std::vector<std::string>& gold,
                                                const std::vector<std::string>& predicted,
                                                const TagSet& tags) {
    if (gold.size() != predicted.size()) {
        throw Error(format_msg("micro_macro_f1: ", gold.size(), " gold labels vs ",
                               predicted.size(), " predictions"));
    }
    if (gold.empty()) throw Error("micro_macro_f1: empty evaluation set");
    std::size_t correct = 0;
    std::map<std::string, std::size_t> tp, fp, fn;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!tags.contains(gold[i])) throw Error(format_msg("gold tag '", gold[i], "' not in tag set"));
        if (!tags.contains(predicted[i])) {
            throw Error(format_msg("predicted tag '", predicted[i], "' not in tag set"));
        }
        if (gold[i] == predicted[i]) {
            ++correct;
            ++tp[gold[i]];
        } else {
            ++fn[gold[i]];
            ++fp[predicted[i]];
        }
    }
    double micro = static_cast<double>(correct) / static_cast<double>(gold.size());
    double macro_sum = 0.0;
    std::size_t macro_count = 0;
    for (const std::string& tag : tags.names()) {
        std::size_t t = tp.count(tag) ? tp[tag] : 0;
        std::size_t p = fp.count(tag) ? fp[tag] : 0;
        std::size_t n = fn.count(tag) ? fn[tag] : 0;
        if (t + p + n == 0) continue; // tag unseen in this evaluation
        double f1 = (2 * t + p + n) == 0 ? 0.0
                                         : 2.0 * static_cast<double>(t) /
                                               static_cast<double>(2 * t + p + n);
        macro_sum += f1;
        ++macro_count;
    }
    double macro = macro_count == 0 ? 0.0 : macro_sum / static_cast<double>(macro_count);
    return {micro, macro};
}

// Relative error reduction in percent, over micro-F1 percentages:
// 100 * ((100 - baseline) - (100 - model)) / (100 - baseline).
inline double relative_error_reduction(double baseline_micro_pct, double model_micro_pct) {
    if (baseline_micro_pct >= 100.0) {
        throw Error("relative error reduction undefined: baseline micro F1 is 100");
    }
    double baseline_err = 100.0 - baseline_micro_pct;
    double model_err = 100.0 - model_micro_pct;
    return 100.0 * (baseline_err - model_err) / baseline_err;
}

// Per-tag accuracy over records whose gold tag is that tag; tags absent from
// the gold labels are simply not reported.
inline std::map<std::string, double> per_domain_report(const std::vector<std::string>& gold,
                                                       const std::vector<std::string>& predicted,
                                                       const TagSet& tags) {
    if (gold.size() != predicted.size()) {
        throw Error(format_msg("per_domain_report: ", gold.size(), " gold labels vs ",
                               predicted.size(), " predictions"));
    }
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts; // tag -> (correct, total)
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!tags.contains(gold[i])) throw Error(format_msg("gold tag '", gold[i], "' not in tag set"));
        auto& [correct, total] = counts[gold[i]];
        ++total;
        if (gold[i] == predicted[i]) ++correct;
    }
    std::map<std::string, double> out;
    for (const auto& [tag, ct] : counts) {
        out[tag] = static_cast<double>(ct.first) / static_cast<double>(ct.second);
    }
    return out;
}

struct EvalReport {
    std::size_t records = 0;
    double micro_f1 = 0.0; // fractions in [0,1]
    double macro_f1 = 0.0;
    std::optional<double> rerr_pct; // percent, present when a baseline run is supplied
    std::map<std::string, double> per_tag_accuracy;
    std::map<std::string, std::map<std::string, std::size_t>> confusion; // gold -> predicted -> count
};

inline EvalReport make_report(const std::vector<std::string>& gold,
                              const std::vector<std::string>& predicted, const TagSet& tags,
                              const std::vector<std::string>* baseline_predicted = nullptr) {
    EvalReport rep;
    rep.records = gold.size();
    auto [micro, macro] = micro_macro_f1(gold, predicted, tags);
    rep.micro_f1 = micro;
    rep.macro_f1 = macro;
    rep.per_tag_accuracy = per_domain_report(gold, predicted, tags);
    for (std::size_t i = 0; i < gold.size(); ++i) ++rep.confusion[gold[i]][predicted[i]];
    if (baseline_predicted) {
        auto [bmicro, bmacro] = micro_macro_f1(gold, *baseline_predicted, tags);
        (void)bmacro;
        rep.rerr_pct = relative_error_reduction(100.0 * bmicro, 100.0 * micro);
    }
    return rep;
}

inline json report_to_json(const EvalReport& rep) {
    json j{{"records", rep.records},
           {"micro_f1", rep.micro_f1},
           {"macro_f1", rep.macro_f1},
           {"per_tag_accuracy", rep.per_tag_accuracy},
           {"confusion", rep.confusion},
           {"macro_convention", "tags absent from gold and predictions are excluded"}};
    j["rerr_pct"] = rep.rerr_pct ? json(*rep.rerr_pct) : json(nullptr);
    return j;
}

// ---- recognition quality statistics ----------------------------------------

// Match(k): among utterances whose transcription appears anywhere in the top
// n, the share whose earliest exact match sits at rank k. BetterThanFirst(k):
// among utterances with at least k hypotheses, the share where hypothesis k
// is strictly closer to the transcription than hypothesis 1.
struct QualityStats {
    std::size_t n = 0;
    std::size_t total_records = 0;
    std::size_t skipped_no_transcription = 0;
    std::size_t matched_records = 0;       // denominator for match percentages
    std::size_t match_rank1 = 0;           // matches at rank 1 (the remainder)
    std::vector<double> match_pct;         // index k, valid for k in 2..n
    std::vector<std::size_t> match_count;  // same indexing
    std::vector<double> better_pct;        // index k, valid for k in 2..n
    std::vector<std::size_t> better_count;
    std::vector<std::size_t> better_denominator;
};

inline QualityStats nbest_quality_stats(const std::vector<NBestList>& corpus, std::size_t n,
                                        EditGranularity granularity = EditGranularity::token) {
    if (n < 1) throw Error("nbest_quality_stats: n must be >= 1");
    QualityStats stats;
    stats.n = n;
    stats.total_records = corpus.size();
    stats.match_count.assign(n + 1, 0);
    stats.better_count.assign(n + 1, 0);
    stats.better_denominator.assign(n + 1, 0);
    for (const NBestList& r : corpus) {
        if (!r.transcription) {
            ++stats.skipped_no_transcription;
            continue;
        }
        const std::string& truth = *r.transcription;
        std::size_t limit = std::min<std::size_t>(n, r.hypotheses.size());
        std::size_t earliest_match = 0;
        for (std::size_t k = 1; k <= limit; ++k) {
            if (r.hypotheses[k - 1].text == truth) {
                earliest_match = k;
                break;
            }
        }
        if (earliest_match > 0) {
            ++stats.matched_records;
            if (earliest_match == 1) ++stats.match_rank1;
            else ++stats.match_count[earliest_match];
        }
        if (limit >= 1) {
            std::size_t first_dist = edit_distance(r.hypotheses[0].text, truth, granularity);
            for (std::size_t k = 2; k <= limit; ++k) {
                ++stats.better_denominator[k];
                if (edit_distance(r.hypotheses[k - 1].text, truth, granularity) < first_dist) {
                    ++stats.better_count[k];
                }
            }
        }
    }
    stats.match_pct.assign(n + 1, 0.0);
    stats.better_pct.assign(n + 1, 0.0);
    for (std::size_t k = 2; k <= n; ++k) {
        if (stats.matched_records > 0) {
            stats.match_pct[k] = 100.0 * static_cast<double>(stats.match_count[k]) /
                                 static_cast<double>(stats.matched_records);
        }
        if (stats.better_denominator[k] > 0) {
            stats.better_pct[k] = 100.0 * static_cast<double>(stats.better_count[k]) /
                                  static_cast<double>(stats.better_denominator[k]);
        }
    }
    return stats;
}

inline std::string quality_stats_csv(const QualityStats& stats) {
    std::ostringstream os;
    os << "rank,match_pct,better_than_first_pct,match_count,better_count,better_denominator\n";
    for (std::size_t k = 2; k <= stats.n; ++k) {
        os << k << ',' << stats.match_pct[k] << ',' << stats.better_pct[k] << ','
           << stats.match_count[k] << ',' << stats.better_count[k] << ','
           << stats.better_denominator[k] << '\n';
    }
    return os.str();
}

// ---- strategy runs and subset analysis --------------------------------------

inline std::vector<Prediction> run_strategy(const Model& model,
                                            const std::vector<NBestList>& corpus,
                                            const StrategyConfig& cfg) {
    std::vector<Prediction> preds;
    preds.reserve(corpus.size());
    for (const NBestList& r : corpus) preds.push_back(predict(model, r, cfg));
    return preds;
}

inline std::vector<std::string> gold_labels(const std::vector<NBestList>& corpus, Task task) {
    std::vector<std::string> out;
    out.reserve(corpus.size());
    for (const NBestList& r : corpus) out.push_back(task == Task::domain ? r.domain : r.intent);
    return out;
}

inline std::vector<std::string> predicted_tags(const std::vector<Prediction>& preds) {
    std::vector<std::string> out;
    out.reserve(preds.size());
    for (const Prediction& p : preds) out.push_back(p.tag);
    return out;
}

struct SubsetReports {
    EvalReport agree;
    EvalReport disagree;
    std::size_t agree_records = 0;
    std::size_t disagree_records = 0;
};

// Partition by exact equality of the first-best hypothesis with the
// transcription, then evaluate each side separately. The partition is
// disjoint and exhaustive over the corpus.
inline SubsetReports subset_split_eval(const std::vector<NBestList>& corpus,
                                       const std::vector<Prediction>& strategy_preds,
                                       const std::vector<Prediction>* baseline_preds,
                                       const TagSet& tags, Task task) {
    if (strategy_preds.size() != corpus.size() ||
        (baseline_preds && baseline_preds->size() != corpus.size())) {
        throw Error("subset_split_eval: prediction lists must align with the corpus");
    }
    std::vector<std::string> agree_gold, agree_pred, agree_base;
    std::vector<std::string> dis_gold, dis_pred, dis_base;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const NBestList& r = corpus[i];
        const std::string& truth = r.transcription_or_throw();
        const std::string& gold = task == Task::domain ? r.domain : r.intent;
        bool agree = r.first_best() == truth;
        auto& gold_side = agree ? agree_gold : dis_gold;
        auto& pred_side = agree ? agree_pred : dis_pred;
        auto& base_side = agree ? agree_base : dis_base;
        gold_side.push_back(gold);
        pred_side.push_back(strategy_preds[i].tag);
        if (baseline_preds) base_side.push_back((*baseline_preds)[i].tag);
    }
    SubsetReports out;
    out.agree_records = agree_gold.size();
    out.disagree_records = dis_gold.size();
    if (!agree_gold.empty()) {
        out.agree = make_report(agree_gold, agree_pred, tags,
                                baseline_preds ? &agree_base : nullptr);
    }
    if (!dis_gold.empty()) {
        out.disagree = make_report(dis_gold, dis_pred, tags,
                                   baseline_preds ? &dis_base : nullptr);
    }
    return out;
}

// ---- hypothesis-count sweep --------------------------------------------------

struct SweepRow {
    std::size_t n = 0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
};

// Re-evaluates one trained model with different evaluation budgets; each
// record uses min(n, its own list size) hypotheses.
inline std::vector<SweepRow> hypothesis_count_sweep(const Model& model,
                                                    const std::vector<NBestList>& corpus,
                                                    StrategyConfig cfg,
                                                    const std::vector<std::size_t>& n_values) {
    std::vector<SweepRow> rows;
    std::vector<std::string> gold = gold_labels(corpus, model.task);
    for (std::size_t n : n_values) {
        if (n < 1) throw Error("hypothesis_count_sweep: n values must be >= 1");
        cfg.n = n;
        std::vector<Prediction> preds = run_strategy(model, corpus, cfg);
        auto [micro, macro] = micro_macro_f1(gold, predicted_tags(preds), model.tags);
        rows.push_back({n, micro, macro});
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "n,micro_f1,macro_f1\n";
    for (const SweepRow& r : rows) os << r.n << ',' << r.micro_f1 << ',' << r.macro_f1 << '\n';
    return os.str();
}

} // namespace nbest
