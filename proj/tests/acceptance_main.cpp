// Acceptance suite: runs every acceptance check in order and prints one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nbestslu/nbestslu.hpp"

using namespace nbest;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename... Args>
void check(bool ok, const Args&... args) {
    if (!ok) throw Failure(format_msg(args...));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- shared end-to-end context (criteria 7, 8) ------------------------------

struct EndToEndContext {
    std::vector<NBestList> train_corpus;
    std::vector<NBestList> test_corpus;
    bpe::Vocabulary vocab;
    Model bm;       // transcription-trained single-text model
    Model combined; // combined-sentence model
    Model pool_avg;
    Model pool_max;
    double train_seconds = 0.0;
    bool ready = false;
};

EndToEndContext& e2e() {
    static EndToEndContext ctx;
    if (ctx.ready) return ctx;
    auto start = std::chrono::steady_clock::now();

    sim::TemplateSpec templates = sim::builtin_templates();
    sim::NoiseProfile profile;
    profile.substitution_rate = 0.12;
    profile.deletion_rate = 0.03;
    profile.insertion_rate = 0.05;
    profile.score_temperature = 1.0;

    profile.seed = 11;
    ctx.train_corpus = sim::generate_corpus(templates, 5000, 5, profile);
    profile.seed = 12;
    ctx.test_corpus = sim::generate_corpus(templates, 1000, 5, profile);

    std::vector<std::string> texts;
    for (const NBestList& r : ctx.train_corpus) texts.push_back(*r.transcription);
    ctx.vocab = bpe::Vocabulary::train(texts, 250);

    Hyperparams hp;
    hp.embed_dim = 16;
    hp.hidden_dim = 32;
    hp.n = 5;
    hp.epochs = 5;
    hp.batch_size = 32;
    hp.learning_rate = 1e-3;
    hp.seed = 1;

    std::printf("        [e2e] corpus 5000 train / 1000 test, vocab %zu, training 4 models...\n",
                ctx.vocab.size());
    std::fflush(stdout);
    auto trained = [&](StrategyKind kind) {
        auto t0 = std::chrono::steady_clock::now();
        Model m = train_model(ctx.train_corpus, kind, Task::domain, "", ctx.vocab, hp).model;
        std::printf("        [e2e] trained %s in %.1fs\n", to_string(kind), seconds_since(t0));
        std::fflush(stdout);
        return m;
    };
    ctx.bm = trained(StrategyKind::baseline);
    ctx.combined = trained(StrategyKind::combined_sentence);
    ctx.pool_avg = trained(StrategyKind::pooling_avg);
    ctx.pool_max = trained(StrategyKind::pooling_max);

    ctx.train_seconds = seconds_since(start);
    ctx.ready = true;
    return ctx;
}

double micro_pct(const std::vector<NBestList>& corpus, const std::vector<Prediction>& preds,
                 const TagSet& tags) {
    auto [micro, macro] =
        micro_macro_f1(gold_labels(corpus, Task::domain), predicted_tags(preds), tags);
    (void)macro;
    return 100.0 * micro;
}

// ---- criteria ---------------------------------------------------------------

void criterion_gradients() {
    auto start = std::chrono::steady_clock::now();
    Rng rng(2025);
    std::size_t configs = 0;
    auto run = [&](StrategyKind kind) {
        GradCheckConfig cfg;
        cfg.pipeline = kind;
        cfg.embed_dim = 2 + uniform_index(rng, 7);  // up to 8
        cfg.hidden_dim = 2 + uniform_index(rng, 7); // up to 8
        cfg.num_tags = 2 + uniform_index(rng, 3);
        cfg.vocab_size = 8 + uniform_index(rng, 6);
        cfg.num_hypotheses = 1 + uniform_index(rng, 4);
        cfg.budget_n = cfg.num_hypotheses + uniform_index(rng, 3); // exercises padding
        cfg.seq_len = 1 + uniform_index(rng, 4);
        cfg.seed = rng();
        GradCheckReport rep = gradient_check(cfg);
        check(rep.max_rel_error < 1e-3, "pipeline ", to_string(kind), " config ", configs,
              ": max relative error ", rep.max_rel_error, " at ", rep.worst_param, "[",
              rep.worst_index, "]");
        ++configs;
    };
    for (int i = 0; i < 8; ++i) run(StrategyKind::pooling_avg);
    for (int i = 0; i < 6; ++i) run(StrategyKind::pooling_max);
    for (int i = 0; i < 8; ++i) run(StrategyKind::combined_sentence);
    double elapsed = seconds_since(start);
    check(configs >= 20, "only ", configs, " configurations checked");
    check(elapsed < 30.0, "gradient checks took ", elapsed, "s (budget 30s)");
    std::printf("        %zu configurations, %.1fs\n", configs, elapsed);
}

void criterion_rerank_fixture() {
    auto row = [](std::string trans, std::vector<std::string> hyps) {
        NBestList r;
        r.id = "row";
        r.transcription = std::move(trans);
        r.domain = "D";
        r.intent = "I";
        for (auto& h : hyps) r.hypotheses.push_back({std::move(h), std::nullopt});
        return r;
    };
    NBestList r1 = row("play muse", {"play news", "play muse", "play mus"});
    NBestList r2 = row("track on bose", {"check on bowls", "check on bose", "track on bose"});
    NBestList r3 = row("harry porter", {"how porter", "how patter", "harry power"});

    RerankSelection s1 = rerank_oracle_select(r1, EditGranularity::token);
    RerankSelection s2 = rerank_oracle_select(r2, EditGranularity::token);
    RerankSelection s3 = rerank_oracle_select(r3, EditGranularity::token);
    check(s1.rank == 2, "row 1 selected rank ", s1.rank, ", expected 2");
    check(s2.rank == 3, "row 2 selected rank ", s2.rank, ", expected 3");
    // row 3: token distances are 1, 2, 1; the tie between ranks 1 and 3
    // resolves to the lowest rank
    std::size_t d1 = edit_distance(r3.hypotheses[0].text, *r3.transcription);
    std::size_t d3 = edit_distance(r3.hypotheses[2].text, *r3.transcription);
    check(d1 == 1 && d3 == 1, "row 3 distances changed: ", d1, ", ", d3);
    check(s3.rank == 1, "row 3 selected rank ", s3.rank,
          ", expected 1 (minimum distance, ties to lowest rank)");
    check(s3.distance == 1, "row 3 minimum distance ", s3.distance, ", expected 1");
}

Model degeneracy_model() {
    std::vector<std::string> texts{"play muse", "play news", "call alice", "weather in paris",
                                   "track my package"};
    Model model;
    model.vocab = bpe::Vocabulary::train(texts, 40);
    model.tags = TagSet({"Communication", "Music", "Shopping", "Weather"});
    model.strategy = StrategyKind::pooling_avg;
    model.hp.embed_dim = 8;
    model.hp.hidden_dim = 12;
    model.hp.n = 5;
    Rng rng(33);
    model.init_params(rng);
    return model;
}

void criterion_pooling_degeneracies() {
    Model model = degeneracy_model();

    // (a) identical hypotheses: both pooling modes equal the single-text path bitwise
    for (const std::string text : {"play muse", "weather in paris", "call alice"}) {
        NBestList r;
        r.id = "deg";
        r.transcription = text;
        r.domain = "Music";
        r.intent = "I";
        for (int i = 0; i < 5; ++i) r.hypotheses.push_back({text, std::nullopt});

        std::vector<int> ids = encode_or_unknown(model.vocab, text);
        Tape ts;
        Tensor single = ts.value(sequence_distribution(ts, model, ids));
        for (PoolingMode mode : {PoolingMode::avg, PoolingMode::max}) {
            Tape tp;
            Tensor pooled = tp.value(
                pooling_distribution(tp, model, encode_hypotheses(model, r, 5), mode, 5));
            check(pooled.values() == single.values(),
                  "identical hypotheses: ", mode == PoolingMode::avg ? "avg" : "max",
                  " pooling deviates from the single-hypothesis path on '", text, "'");
        }
    }

    // (b) budget n=1 equals baseline-on-first-best, record by record
    sim::NoiseProfile profile;
    profile.substitution_rate = 0.1;
    profile.insertion_rate = 0.04;
    profile.seed = 77;
    std::vector<NBestList> corpus = sim::generate_corpus(sim::builtin_templates(), 100, 5, profile);
    Model pool_model = degeneracy_model();
    pool_model.vocab = bpe::Vocabulary::train(
        [&] {
            std::vector<std::string> t;
            for (const auto& r : corpus) t.push_back(*r.transcription);
            return t;
        }(),
        80);
    pool_model.tags = TagSet({"Communication", "Knowledge", "Music", "Shopping", "Weather"});
    Rng rng(5);
    pool_model.init_params(rng);
    for (const NBestList& r : corpus) {
        for (PoolingMode mode : {PoolingMode::avg, PoolingMode::max}) {
            Prediction pooled = pooling_predict(pool_model, r, mode, 1);
            Prediction single = predict_text(pool_model, r.first_best());
            check(pooled.tag == single.tag, "n=1 sweep drifts from the first-best prediction on ",
                  r.id);
        }
    }
}

void criterion_padding_rule() {
    Model model = degeneracy_model();
    std::vector<std::string> hyps{"play muse", "play news", "call alice"};
    Tape t;
    std::vector<Var> rows;
    for (const std::string& h : hyps) {
        rows.push_back(utterance_output_vector(
            t, bilstm_encode(t, model.encoder, model.vocab.encode(h))));
    }
    std::vector<Var> stacked = stack_and_pad(rows, 5);
    check(stacked.size() == 5, "stack size ", stacked.size());
    std::vector<std::size_t> expected_sources{0, 1, 2, 0, 0};
    for (std::size_t i = 0; i < 5; ++i) {
        check(t.value(stacked[i]).values() == t.value(rows[expected_sources[i]]).values(),
              "stack row ", i, " is not an exact copy of source row ", expected_sources[i]);
    }
}

void criterion_edit_distance_oracle() {
    const std::vector<std::string> alphabet{"a", "b", "c"};
    std::vector<std::vector<std::string>> sequences{{}};
    std::size_t start = 0;
    for (int len = 1; len <= 4; ++len) {
        std::size_t end = sequences.size();
        for (std::size_t i = start; i < end; ++i) {
            for (const std::string& s : alphabet) {
                auto next = sequences[i];
                next.push_back(s);
                sequences.push_back(std::move(next));
            }
        }
        start = end;
    }
    check(sequences.size() == 121, "expected 121 sequences, got ", sequences.size());
    for (const auto& a : sequences) {
        for (const auto& b : sequences) {
            std::size_t dp = levenshtein(a, b);
            std::size_t brute = [&]() {
                // direct exponential recursion, independent of the DP
                std::function<std::size_t(std::size_t, std::size_t)> rec =
                    [&](std::size_t ia, std::size_t ib) -> std::size_t {
                    if (ia == a.size()) return b.size() - ib;
                    if (ib == b.size()) return a.size() - ia;
                    std::size_t best = rec(ia + 1, ib + 1) + (a[ia] == b[ib] ? 0 : 1);
                    best = std::min(best, rec(ia + 1, ib) + 1);
                    best = std::min(best, rec(ia, ib + 1) + 1);
                    return best;
                };
                return rec(0, 0);
            }();
            check(dp == brute, "distance mismatch: dp ", dp, " vs brute force ", brute);
        }
    }
}

void criterion_rerr_arithmetic() {
    double a = relative_error_reduction(90.0, 91.429);
    double b = relative_error_reduction(90.0, 92.704);
    check(std::abs(a - 14.29) <= 0.01, "RErr(90.0, 91.429) = ", a, ", expected 14.29 +/- 0.01");
    check(std::abs(b - 27.04) <= 0.01, "RErr(90.0, 92.704) = ", b, ", expected 27.04 +/- 0.01");
}

void criterion_end_to_end() {
    auto start = std::chrono::steady_clock::now();
    EndToEndContext& ctx = e2e();

    StrategyConfig cfg;
    cfg.n = 5;
    auto run = [&](const Model& model, StrategyKind kind) {
        StrategyConfig c = cfg;
        c.kind = kind;
        return run_strategy(model, ctx.test_corpus, c);
    };

    std::vector<Prediction> baseline = run(ctx.bm, StrategyKind::baseline);
    double baseline_micro = micro_pct(ctx.test_corpus, baseline, ctx.bm.tags);
    check(baseline_micro < 100.0,
          "degenerate corpus: baseline micro F1 is 100; regenerate with another seed");

    struct Row {
        const char* name;
        double rerr;
    };
    std::vector<Row> rows;
    auto rerr_of = [&](const char* name, const Model& model, StrategyKind kind) {
        double micro = micro_pct(ctx.test_corpus, run(model, kind), model.tags);
        double rerr = relative_error_reduction(baseline_micro, micro);
        rows.push_back({name, rerr});
        std::printf("        %-17s micro %6.2f%%  rerr %+7.2f%%\n", name, micro, rerr);
        std::fflush(stdout);
        return rerr;
    };

    std::printf("        %-17s micro %6.2f%%  rerr   +0.00%%\n", "baseline", baseline_micro);
    double rerr_oracle = rerr_of("oracle", ctx.bm, StrategyKind::oracle);
    double rerr_majority = rerr_of("majority-vote", ctx.bm, StrategyKind::majority_vote);
    double rerr_sort = rerr_of("sort-by-score", ctx.bm, StrategyKind::sort_by_score);
    double rerr_rerank = rerr_of("rerank-oracle", ctx.bm, StrategyKind::rerank_oracle);
    double rerr_combined = rerr_of("combined-sentence", ctx.combined,
                                   StrategyKind::combined_sentence);
    double rerr_avg = rerr_of("pooling-avg", ctx.pool_avg, StrategyKind::pooling_avg);
    double rerr_max = rerr_of("pooling-max", ctx.pool_max, StrategyKind::pooling_max);

    check(rerr_avg > 0.0, "pooling-avg RErr ", rerr_avg, " is not positive");
    check(rerr_max > 0.0, "pooling-max RErr ", rerr_max, " is not positive");
    check(rerr_combined > 0.0, "combined-sentence RErr ", rerr_combined, " is not positive");
    for (double other : {rerr_majority, rerr_sort, rerr_rerank, rerr_combined, rerr_avg,
                         rerr_max, 0.0}) {
        check(rerr_oracle >= other, "oracle RErr ", rerr_oracle,
              " is below another strategy's ", other);
    }

    // agree/disagree split for pooling-avg
    std::vector<Prediction> avg_preds = run(ctx.pool_avg, StrategyKind::pooling_avg);
    SubsetReports subsets =
        subset_split_eval(ctx.test_corpus, avg_preds, &baseline, ctx.pool_avg.tags, Task::domain);
    check(subsets.agree_records > 0 && subsets.disagree_records > 0,
          "first-best agreement split is degenerate: ", subsets.agree_records, " / ",
          subsets.disagree_records);
    check(subsets.agree.rerr_pct.has_value() && subsets.disagree.rerr_pct.has_value(),
          "subset reports are missing error reduction");
    std::printf("        pooling-avg subsets: agree %+0.2f%% (%zu), disagree %+0.2f%% (%zu)\n",
                *subsets.agree.rerr_pct, subsets.agree_records, *subsets.disagree.rerr_pct,
                subsets.disagree_records);
    check(*subsets.disagree.rerr_pct > *subsets.agree.rerr_pct,
          "disagree-subset RErr ", *subsets.disagree.rerr_pct,
          " does not exceed agree-subset RErr ", *subsets.agree.rerr_pct);

    // hypothesis budget direction for pooling-avg
    StrategyConfig sweep_cfg;
    sweep_cfg.kind = StrategyKind::pooling_avg;
    std::vector<SweepRow> sweep =
        hypothesis_count_sweep(ctx.pool_avg, ctx.test_corpus, sweep_cfg, {1, 5});
    std::printf("        pooling-avg sweep: F1(n=1) %.4f, F1(n=5) %.4f\n", sweep[0].micro_f1,
                sweep[1].micro_f1);
    check(sweep[1].micro_f1 >= sweep[0].micro_f1, "F1(n=5) ", sweep[1].micro_f1,
          " is below F1(n=1) ", sweep[0].micro_f1);

    double total = ctx.train_seconds + seconds_since(start);
    check(total < 1200.0, "end-to-end run took ", total, "s (budget 1200s)");
    std::printf("        total end-to-end time %.1fs\n", total);
}

void criterion_quality_stats_pipeline() {
    EndToEndContext& ctx = e2e();
    QualityStats stats = nbest_quality_stats(ctx.test_corpus, 5);
    check(stats.skipped_no_transcription == 0, "unexpected skipped records");
    double match_total = 0.0;
    for (std::size_t k = 2; k <= 5; ++k) match_total += stats.match_pct[k];
    check(match_total <= 100.0 + 1e-9, "match percentages over ranks 2..5 sum to ", match_total);
    bool any_better = false;
    for (std::size_t k = 2; k <= 5; ++k) any_better |= stats.better_pct[k] > 0.0;
    check(any_better, "no rank ever beats the first best despite nonzero noise");
    std::printf("        match%% 2..5:");
    for (std::size_t k = 2; k <= 5; ++k) std::printf(" %.1f", stats.match_pct[k]);
    std::printf("  better%% 2..5:");
    for (std::size_t k = 2; k <= 5; ++k) std::printf(" %.1f", stats.better_pct[k]);
    std::printf("\n");
}

void criterion_bpe_round_trip() {
    Rng corpus_rng(404);
    const std::string charset = "abcdefghijklmnopqrstuvwxyz";
    auto random_text = [&](Rng& rng) {
        std::string text;
        std::size_t words = 1 + uniform_index(rng, 5);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) text += ' ';
            std::size_t len = 1 + uniform_index(rng, 8);
            for (std::size_t i = 0; i < len; ++i)
                text += charset[uniform_index(rng, charset.size())];
        }
        return text;
    };
    std::vector<std::string> corpus;
    for (int i = 0; i < 60; ++i) corpus.push_back(random_text(corpus_rng));
    bpe::Vocabulary vocab = bpe::Vocabulary::train(corpus, 120);

    std::vector<int> sep = vocab.encode(vocab.delimiter());
    check(sep.size() == 1 && sep[0] == vocab.delimiter_id(),
          "the delimiter does not encode to exactly one id");

    Rng rng(405);
    for (int i = 0; i < 1000; ++i) {
        std::string text = random_text(rng);
        std::string back = vocab.decode(vocab.encode(text));
        check(back == text, "round trip failed: '", text, "' -> '", back, "'");
    }
}

void criterion_cli_determinism() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "nbest-slu-acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto path = [&](const char* name) { return (dir / name).string(); };

    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    auto run = [&](const std::string& args) {
        std::string cmd =
            std::string(NBEST_SLU_CLI_PATH) + " " + args + " > " + path("log.txt") + " 2>&1";
        int status = std::system(cmd.c_str());
        check(status != -1 && WEXITSTATUS(status) == 0, "command failed: ", cmd, "\n",
              slurp(path("log.txt")));
    };

    run("simulate --out " + path("train.jsonl") +
        " --count 250 --seed 21 --sub-rate 0.08 --del-rate 0.02 --ins-rate 0.03");
    run("bpe-train --corpus " + path("train.jsonl") + " --merges 60 --out " + path("v.bpe"));
    std::string train_flags = " --corpus " + path("train.jsonl") + " --vocab " + path("v.bpe") +
                              " --strategy pooling-avg --epochs 2 --embed-dim 8 --hidden-dim 8 "
                              "--batch-size 16 --seed 99 --out ";
    run("train" + train_flags + path("m1.json"));
    run("train" + train_flags + path("m2.json"));
    check(slurp(path("m1.json")) == slurp(path("m2.json")),
          "repeated training produced differing checkpoints");
    check(!slurp(path("m1.json")).empty(), "checkpoint is empty");

    std::string eval_flags = " --model " + path("m1.json") + " --corpus " + path("train.jsonl") +
                             " --report ";
    run("eval" + eval_flags + path("r1.json"));
    run("eval" + eval_flags + path("r2.json"));
    check(slurp(path("r1.json")) == slurp(path("r2.json")),
          "repeated evaluation produced differing reports");
    fs::remove_all(dir);
}

struct Criterion {
    int id;
    const char* name;
    std::function<void()> run;
};

} // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "gradients match central finite differences (pooling and combined pipelines)",
         criterion_gradients},
        {2, "rerank-oracle selects the expected ranks on the misrecognition fixture",
         criterion_rerank_fixture},
        {3, "pooling degeneracies match the single-hypothesis path exactly",
         criterion_pooling_degeneracies},
        {4, "stack-and-pad pads r=3 to n=5 with copies of the first row",
         criterion_padding_rule},
        {5, "edit distance equals brute force on all token sequences of length <= 4",
         criterion_edit_distance_oracle},
        {6, "relative error reduction arithmetic", criterion_rerr_arithmetic},
        {7, "end-to-end direction match on synthetic data", criterion_end_to_end},
        {8, "recognition quality statistics pipeline", criterion_quality_stats_pipeline},
        {9, "byte-pair round trip and delimiter atomicity", criterion_bpe_round_trip},
        {10, "byte-identical checkpoints and reports from repeated runs",
         criterion_cli_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        std::printf("[ RUN  ] %2d. %s\n", c.id, c.name);
        std::fflush(stdout);
        try {
            c.run();
            std::printf("[ PASS ] %2d. %s\n", c.id, c.name);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[ FAIL ] %2d. %s\n         %s\n", c.id, c.name, e.what());
        }
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    } else {
        std::printf("acceptance: %d of %zu criteria FAILED\n", failures, criteria.size());
    }
    return failures == 0 ? 0 : 1;
}
