// nbest-slu: train and evaluate n-best hypothesis integration strategies
// for domain/intent classification over JSONL corpora.
//
// Subcommands: bpe-train | simulate | train | eval | stats | sweep.
// Every subcommand is reproducible: inputs, flags, and --seed fully
// determine the outputs.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nbestslu/nbestslu.hpp"

namespace {

using namespace nbest;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(format_msg("cannot read file ", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(format_msg("cannot write file ", path));
    out << text;
}

// ---- config file application -------------------------------------------------
//
// Flat key=value files; keys mirror the long flag names without the dashes.
// A value from the file is applied only when the flag was not passed on the
// command line, so flags always win.

template <typename T>
T parse_config_value(const std::string& key, const std::string& value);

template <>
std::string parse_config_value<std::string>(const std::string&, const std::string& value) {
    return value;
}

template <>
std::size_t parse_config_value<std::size_t>(const std::string& key, const std::string& value) {
    try {
        return static_cast<std::size_t>(std::stoull(value));
    } catch (const std::exception&) {
        throw Error(format_msg("config key '", key, "': '", value, "' is not a count"));
    }
}

template <>
double parse_config_value<double>(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw Error(format_msg("config key '", key, "': '", value, "' is not a number"));
    }
}

struct ConfigKey {
    std::string key;
    CLI::Option* option; // skipped when already set on the command line
    std::function<void(const std::string&)> assign;
};

template <typename T>
ConfigKey bind_config(CLI::App& cmd, const std::string& flag, T& dst) {
    return {flag.substr(2), cmd.get_option(flag),
            [&dst, flag](const std::string& value) {
                dst = parse_config_value<T>(flag.substr(2), value);
            }};
}

void apply_config_file(const std::string& path, const std::vector<ConfigKey>& keys) {
    if (path.empty()) return;
    for (const auto& [key, value] : load_key_value_config(path)) {
        bool known = false;
        for (const ConfigKey& ck : keys) {
            if (ck.key != key) continue;
            known = true;
            if (ck.option == nullptr || ck.option->count() == 0) ck.assign(value);
            break;
        }
        if (!known) throw Error(format_msg(path, ": unknown config key '", key, "'"));
    }
}

// ---- bpe-train -------------------------------------------------------------

struct BpeTrainArgs {
    std::string corpus_path;
    std::string text_path;
    std::string out_path;
    std::size_t merges = 4000;
};

int run_bpe_train(const BpeTrainArgs& args) {
    std::vector<std::string> texts;
    if (!args.corpus_path.empty()) {
        for (const NBestList& r : load_corpus(args.corpus_path)) {
            if (r.transcription) texts.push_back(*r.transcription);
        }
    } else if (!args.text_path.empty()) {
        std::ifstream in(args.text_path);
        if (!in) throw Error(format_msg("cannot read file ", args.text_path));
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) texts.push_back(line);
        }
    } else {
        throw Error("bpe-train needs --corpus or --text");
    }
    bpe::Vocabulary vocab = bpe::Vocabulary::train(texts, args.merges);
    vocab.save(args.out_path);
    std::cout << "trained " << vocab.merges().size() << " merges over " << texts.size()
              << " texts; vocabulary size " << vocab.size() << "\n"
              << "wrote " << args.out_path << "\n";
    return 0;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string out_path;
    std::string templates_path; // empty = builtin
    std::size_t count = 1000;
    std::size_t n = 5;
    sim::NoiseProfile profile;
};

int run_simulate(const SimulateArgs& args) {
    sim::TemplateSpec spec = args.templates_path.empty()
                                 ? sim::builtin_templates()
                                 : sim::parse_template_spec(read_text_file(args.templates_path),
                                                            args.templates_path);
    std::vector<NBestList> corpus = sim::generate_corpus(spec, args.count, args.n, args.profile);
    save_corpus(corpus, args.out_path);
    std::cout << "wrote " << corpus.size() << " records to " << args.out_path << "\n";
    return 0;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
    std::string corpus_path;
    std::string vocab_path;
    std::string out_path;
    std::string strategy = "baseline";
    std::string task = "domain";
    std::string domain;
    std::string optimizer = "adam";
    Hyperparams hp;
};

int run_train(TrainArgs args) {
    args.hp.optimizer = nn::optimizer_kind_from_string(args.optimizer);
    std::vector<NBestList> corpus = load_corpus(args.corpus_path);
    bpe::Vocabulary vocab = bpe::Vocabulary::load(args.vocab_path);
    StrategyKind strategy = strategy_from_string(args.strategy);
    Task task = task_from_string(args.task);
    if (task == Task::intent && args.domain.empty()) {
        throw Error("intent training is domain-scoped: pass --domain");
    }
    TrainResult result = train_model(corpus, strategy, task, args.domain, vocab, args.hp);
    save_checkpoint(result.model, args.out_path);
    std::cout << "strategy " << to_string(strategy) << ", task " << to_string(task);
    if (task == Task::intent) std::cout << " (" << args.domain << ")";
    std::cout << ", " << result.model.tags.size() << " tags\n";
    std::cout.setf(std::ios::fixed);
    std::cout.precision(4);
    std::cout << "loss: initial " << result.loss_trace.front();
    for (std::size_t e = 1; e < result.loss_trace.size(); ++e) {
        std::cout << (e == 1 ? " | epochs " : " ") << result.loss_trace[e];
    }
    std::cout << "\nwrote " << args.out_path << "\n";
    return 0;
}

// ---- eval ---------------------------------------------------------------------

struct EvalArgs {
    std::string model_path;
    std::string corpus_path;
    std::string strategy; // empty = checkpoint's
    std::size_t n = 0;    // 0 = checkpoint's
    std::string baseline_model_path;
    std::string score_source = "classifier";
    std::string granularity = "token";
    std::string report_path;
    std::string predictions_path;
};

void check_strategy_compatible(const Model& model, StrategyKind requested) {
    if (uses_single_text_model(requested)) {
        if (!uses_single_text_model(model.strategy)) {
            throw Error(format_msg("strategy ", to_string(requested),
                                   " needs a transcription-trained checkpoint, but this one was "
                                   "trained as ",
                                   to_string(model.strategy)));
        }
        return;
    }
    if (model.strategy != requested) {
        throw Error(format_msg("strategy ", to_string(requested),
                               " needs a matching checkpoint, but this one was trained as ",
                               to_string(model.strategy)));
    }
}

std::vector<NBestList> scope_corpus_to_model(std::vector<NBestList> corpus, const Model& model) {
    if (model.task == Task::intent && !model.task_domain.empty()) {
        std::vector<NBestList> scoped;
        for (NBestList& r : corpus) {
            if (r.domain == model.task_domain) scoped.push_back(std::move(r));
        }
        if (scoped.empty()) {
            throw Error(format_msg("no records in domain '", model.task_domain,
                                   "' for the intent model"));
        }
        return scoped;
    }
    return corpus;
}

bool all_have_transcription(const std::vector<NBestList>& corpus) {
    for (const NBestList& r : corpus)
        if (!r.transcription) return false;
    return true;
}

void print_report_line(const char* label, const EvalReport& rep) {
    std::printf("%s: %zu records, micro-f1 %.4f, macro-f1 %.4f", label, rep.records,
                rep.micro_f1, rep.macro_f1);
    if (rep.rerr_pct) std::printf(", rerr %+.2f%%", *rep.rerr_pct);
    std::printf("\n");
}

int run_eval(const EvalArgs& args) {
    Model model = load_checkpoint(args.model_path);
    StrategyConfig cfg;
    cfg.kind = args.strategy.empty() ? model.strategy : strategy_from_string(args.strategy);
    cfg.n = args.n == 0 ? model.hp.n : args.n;
    cfg.score_source = score_source_from_string(args.score_source);
    cfg.granularity = granularity_from_string(args.granularity);
    check_strategy_compatible(model, cfg.kind);

    std::vector<NBestList> corpus = scope_corpus_to_model(load_corpus(args.corpus_path), model);
    if (corpus.empty()) throw Error("evaluation corpus is empty");
    validate_corpus_tags(model, corpus);

    std::vector<Prediction> preds = run_strategy(model, corpus, cfg);
    std::vector<std::string> gold = gold_labels(corpus, model.task);

    std::optional<std::vector<Prediction>> baseline_preds;
    if (!args.baseline_model_path.empty()) {
        Model baseline_model = load_checkpoint(args.baseline_model_path);
        check_strategy_compatible(baseline_model, StrategyKind::baseline);
        validate_corpus_tags(baseline_model, corpus);
        StrategyConfig base_cfg;
        base_cfg.kind = StrategyKind::baseline;
        base_cfg.n = cfg.n;
        baseline_preds = run_strategy(baseline_model, corpus, base_cfg);
    }

    std::vector<std::string> baseline_tags;
    if (baseline_preds) baseline_tags = predicted_tags(*baseline_preds);
    EvalReport report =
        make_report(gold, predicted_tags(preds), model.tags,
                    baseline_preds ? &baseline_tags : nullptr);

    json out = report_to_json(report);
    out["strategy"] = to_string(cfg.kind);
    out["n"] = cfg.n;
    out["task"] = to_string(model.task);
    if (model.task == Task::intent) out["task_domain"] = model.task_domain;

    std::printf("strategy %s (n=%zu, task %s)\n", to_string(cfg.kind), cfg.n,
                to_string(model.task));
    print_report_line("overall", report);

    if (all_have_transcription(corpus)) {
        SubsetReports subsets = subset_split_eval(
            corpus, preds, baseline_preds ? &*baseline_preds : nullptr, model.tags, model.task);
        json js;
        js["agree_records"] = subsets.agree_records;
        js["disagree_records"] = subsets.disagree_records;
        if (subsets.agree_records > 0) {
            js["agree"] = report_to_json(subsets.agree);
            print_report_line("agree subset", subsets.agree);
        }
        if (subsets.disagree_records > 0) {
            js["disagree"] = report_to_json(subsets.disagree);
            print_report_line("disagree subset", subsets.disagree);
        }
        out["subsets"] = std::move(js);
    }

    if (!args.report_path.empty()) {
        write_text_file(args.report_path, out.dump(1) + "\n");
        std::printf("wrote report %s\n", args.report_path.c_str());
    }
    if (!args.predictions_path.empty()) {
        std::ofstream pf(args.predictions_path, std::ios::binary);
        if (!pf) throw Error(format_msg("cannot write file ", args.predictions_path));
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            json line{{"id", corpus[i].id},
                      {"gold", gold[i]},
                      {"predicted", preds[i].tag},
                      {"confidence", preds[i].confidence}};
            if (preds[i].selected_rank > 0) line["selected_rank"] = preds[i].selected_rank;
            pf << line.dump() << '\n';
        }
        std::printf("wrote predictions %s\n", args.predictions_path.c_str());
    }
    return 0;
}

// ---- stats -----------------------------------------------------------------

struct StatsArgs {
    std::string corpus_path;
    std::size_t n = 5;
    std::string granularity = "token";
    std::string out_path;
};

int run_stats(const StatsArgs& args) {
    std::vector<NBestList> corpus = load_corpus(args.corpus_path);
    QualityStats stats =
        nbest_quality_stats(corpus, args.n, granularity_from_string(args.granularity));
    std::printf("recognition quality distribution over the top %zu hypotheses\n", stats.n);
    std::printf("%-6s %-10s %-18s %s\n", "rank", "match%", "better-than-1st%", "denominator");
    for (std::size_t k = 2; k <= stats.n; ++k) {
        std::printf("%-6zu %-10.2f %-18.2f %zu\n", k, stats.match_pct[k], stats.better_pct[k],
                    stats.better_denominator[k]);
    }
    double rank1_pct = stats.matched_records == 0
                           ? 0.0
                           : 100.0 * static_cast<double>(stats.match_rank1) /
                                 static_cast<double>(stats.matched_records);
    std::printf("matched records: %zu of %zu (match at rank 1: %.2f%%)\n", stats.matched_records,
                stats.total_records, rank1_pct);
    if (stats.skipped_no_transcription > 0) {
        std::printf("skipped %zu records without transcription\n",
                    stats.skipped_no_transcription);
    }
    if (!args.out_path.empty()) {
        write_text_file(args.out_path, quality_stats_csv(stats));
        std::printf("wrote %s\n", args.out_path.c_str());
    }
    return 0;
}

// ---- sweep -------------------------------------------------------------------

struct SweepArgs {
    std::string model_path;
    std::string corpus_path;
    std::string strategy; // empty = checkpoint's
    std::vector<std::size_t> ns{1, 2, 3, 4, 5};
    std::string out_path;
};

int run_sweep(const SweepArgs& args) {
    Model model = load_checkpoint(args.model_path);
    StrategyConfig cfg;
    cfg.kind = args.strategy.empty() ? model.strategy : strategy_from_string(args.strategy);
    check_strategy_compatible(model, cfg.kind);
    std::vector<NBestList> corpus = scope_corpus_to_model(load_corpus(args.corpus_path), model);
    if (corpus.empty()) throw Error("evaluation corpus is empty");
    validate_corpus_tags(model, corpus);
    std::vector<SweepRow> rows = hypothesis_count_sweep(model, corpus, cfg, args.ns);
    std::printf("strategy %s over %zu records\n", to_string(cfg.kind), corpus.size());
    std::printf("%-4s %-10s %s\n", "n", "micro-f1", "macro-f1");
    for (const SweepRow& r : rows) {
        std::printf("%-4zu %-10.4f %.4f\n", r.n, r.micro_f1, r.macro_f1);
    }
    if (!args.out_path.empty()) {
        write_text_file(args.out_path, sweep_csv(rows));
        std::printf("wrote %s\n", args.out_path.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"n-best hypothesis integration lab for spoken language understanding"};
    app.require_subcommand(1);

    BpeTrainArgs bpe_args;
    std::string bpe_config;
    CLI::App* bpe_cmd = app.add_subcommand("bpe-train", "train a byte-pair vocabulary");
    bpe_cmd->add_option("--corpus", bpe_args.corpus_path,
                        "JSONL corpus; trains on its transcriptions");
    bpe_cmd->add_option("--text", bpe_args.text_path, "plain text file, one utterance per line");
    bpe_cmd->add_option("--merges", bpe_args.merges, "number of merge rules to learn");
    bpe_cmd->add_option("--out", bpe_args.out_path, "output vocabulary file");
    bpe_cmd->add_option("--config", bpe_config, "key=value run configuration; flags win");
    std::vector<ConfigKey> bpe_keys{
        bind_config(*bpe_cmd, "--corpus", bpe_args.corpus_path),
        bind_config(*bpe_cmd, "--text", bpe_args.text_path),
        bind_config(*bpe_cmd, "--merges", bpe_args.merges),
        bind_config(*bpe_cmd, "--out", bpe_args.out_path),
    };

    SimulateArgs sim_args;
    std::string sim_config;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a synthetic labeled corpus");
    sim_cmd->add_option("--out", sim_args.out_path, "output JSONL corpus");
    sim_cmd->add_option("--count", sim_args.count, "number of utterances");
    sim_cmd->add_option("--n", sim_args.n, "hypotheses per utterance");
    sim_cmd->add_option("--templates", sim_args.templates_path,
                        "template spec file (default: built-in five-domain templates)");
    sim_cmd->add_option("--sub-rate", sim_args.profile.substitution_rate,
                        "per-character substitution rate");
    sim_cmd->add_option("--del-rate", sim_args.profile.deletion_rate,
                        "per-character deletion rate");
    sim_cmd->add_option("--ins-rate", sim_args.profile.insertion_rate,
                        "per-character insertion rate");
    sim_cmd->add_option("--temperature", sim_args.profile.score_temperature,
                        "softmax temperature for hypothesis scores");
    sim_cmd->add_option("--seed", sim_args.profile.seed, "random seed")
        ->envname("NBEST_SLU_SEED");
    sim_cmd->add_option("--config", sim_config, "key=value run configuration; flags win");
    std::vector<ConfigKey> sim_keys{
        bind_config(*sim_cmd, "--out", sim_args.out_path),
        bind_config(*sim_cmd, "--count", sim_args.count),
        bind_config(*sim_cmd, "--n", sim_args.n),
        bind_config(*sim_cmd, "--templates", sim_args.templates_path),
        bind_config(*sim_cmd, "--sub-rate", sim_args.profile.substitution_rate),
        bind_config(*sim_cmd, "--del-rate", sim_args.profile.deletion_rate),
        bind_config(*sim_cmd, "--ins-rate", sim_args.profile.insertion_rate),
        bind_config(*sim_cmd, "--temperature", sim_args.profile.score_temperature),
        bind_config(*sim_cmd, "--seed", sim_args.profile.seed),
    };

    TrainArgs train_args;
    std::string train_config;
    CLI::App* train_cmd = app.add_subcommand("train", "train a classification model");
    train_cmd->add_option("--corpus", train_args.corpus_path, "training JSONL corpus");
    train_cmd->add_option("--vocab", train_args.vocab_path, "byte-pair vocabulary file");
    train_cmd->add_option("--out", train_args.out_path, "output checkpoint path");
    train_cmd->add_option("--strategy", train_args.strategy,
                          "baseline|oracle|majority-vote|sort-by-score|rerank-oracle|"
                          "combined-sentence|pooling-avg|pooling-max");
    train_cmd->add_option("--task", train_args.task, "domain|intent");
    train_cmd->add_option("--domain", train_args.domain, "domain scope for intent models");
    train_cmd->add_option("--n", train_args.hp.n, "hypothesis budget");
    train_cmd->add_option("--embed-dim", train_args.hp.embed_dim, "subword embedding size");
    train_cmd->add_option("--hidden-dim", train_args.hp.hidden_dim, "LSTM hidden size");
    train_cmd->add_option("--mlp-hidden", train_args.hp.mlp_hidden,
                          "hidden layer size of the classifier head (0 = none)");
    train_cmd->add_option("--epochs", train_args.hp.epochs, "training epochs");
    train_cmd->add_option("--batch-size", train_args.hp.batch_size, "mini-batch size");
    train_cmd->add_option("--lr", train_args.hp.learning_rate, "learning rate");
    train_cmd->add_option("--optimizer", train_args.optimizer, "sgd|adam");
    train_cmd->add_option("--seed", train_args.hp.seed, "random seed")
        ->envname("NBEST_SLU_SEED");
    train_cmd->add_option("--config", train_config, "key=value run configuration; flags win");
    std::vector<ConfigKey> train_keys{
        bind_config(*train_cmd, "--corpus", train_args.corpus_path),
        bind_config(*train_cmd, "--vocab", train_args.vocab_path),
        bind_config(*train_cmd, "--out", train_args.out_path),
        bind_config(*train_cmd, "--strategy", train_args.strategy),
        bind_config(*train_cmd, "--task", train_args.task),
        bind_config(*train_cmd, "--domain", train_args.domain),
        bind_config(*train_cmd, "--n", train_args.hp.n),
        bind_config(*train_cmd, "--embed-dim", train_args.hp.embed_dim),
        bind_config(*train_cmd, "--hidden-dim", train_args.hp.hidden_dim),
        bind_config(*train_cmd, "--mlp-hidden", train_args.hp.mlp_hidden),
        bind_config(*train_cmd, "--epochs", train_args.hp.epochs),
        bind_config(*train_cmd, "--batch-size", train_args.hp.batch_size),
        bind_config(*train_cmd, "--lr", train_args.hp.learning_rate),
        bind_config(*train_cmd, "--optimizer", train_args.optimizer),
        bind_config(*train_cmd, "--seed", train_args.hp.seed),
    };

    EvalArgs eval_args;
    std::string eval_config;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
    eval_cmd->add_option("--model", eval_args.model_path, "model checkpoint");
    eval_cmd->add_option("--corpus", eval_args.corpus_path, "evaluation JSONL corpus");
    eval_cmd->add_option("--strategy", eval_args.strategy,
                         "evaluation strategy (default: the checkpoint's)");
    eval_cmd->add_option("--n", eval_args.n, "hypothesis budget (default: the checkpoint's)");
    eval_cmd->add_option("--baseline-model", eval_args.baseline_model_path,
                         "baseline checkpoint for relative error reduction");
    eval_cmd->add_option("--score-source", eval_args.score_source,
                         "classifier|asr confidence for sort-by-score");
    eval_cmd->add_option("--granularity", eval_args.granularity,
                         "token|character edit distance");
    eval_cmd->add_option("--report", eval_args.report_path, "write a JSON report here");
    eval_cmd->add_option("--predictions", eval_args.predictions_path,
                         "write per-record predictions (JSONL) here");
    eval_cmd->add_option("--config", eval_config, "key=value run configuration; flags win");
    std::vector<ConfigKey> eval_keys{
        bind_config(*eval_cmd, "--model", eval_args.model_path),
        bind_config(*eval_cmd, "--corpus", eval_args.corpus_path),
        bind_config(*eval_cmd, "--strategy", eval_args.strategy),
        bind_config(*eval_cmd, "--n", eval_args.n),
        bind_config(*eval_cmd, "--baseline-model", eval_args.baseline_model_path),
        bind_config(*eval_cmd, "--score-source", eval_args.score_source),
        bind_config(*eval_cmd, "--granularity", eval_args.granularity),
        bind_config(*eval_cmd, "--report", eval_args.report_path),
        bind_config(*eval_cmd, "--predictions", eval_args.predictions_path),
    };

    StatsArgs stats_args;
    std::string stats_config;
    CLI::App* stats_cmd =
        app.add_subcommand("stats", "n-best recognition quality statistics");
    stats_cmd->add_option("--corpus", stats_args.corpus_path, "JSONL corpus");
    stats_cmd->add_option("--n", stats_args.n, "rank positions to analyze");
    stats_cmd->add_option("--granularity", stats_args.granularity,
                          "token|character edit distance");
    stats_cmd->add_option("--out", stats_args.out_path, "write a CSV table here");
    stats_cmd->add_option("--config", stats_config, "key=value run configuration; flags win");
    std::vector<ConfigKey> stats_keys{
        bind_config(*stats_cmd, "--corpus", stats_args.corpus_path),
        bind_config(*stats_cmd, "--n", stats_args.n),
        bind_config(*stats_cmd, "--granularity", stats_args.granularity),
        bind_config(*stats_cmd, "--out", stats_args.out_path),
    };

    SweepArgs sweep_args;
    std::string sweep_config, sweep_ns;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "micro F1 as a function of the hypothesis budget");
    sweep_cmd->add_option("--model", sweep_args.model_path, "model checkpoint");
    sweep_cmd->add_option("--corpus", sweep_args.corpus_path, "evaluation JSONL corpus");
    sweep_cmd->add_option("--strategy", sweep_args.strategy,
                          "evaluation strategy (default: the checkpoint's)");
    sweep_cmd->add_option("--ns", sweep_ns, "comma-separated budgets, e.g. 1,2,3,4,5");
    sweep_cmd->add_option("--out", sweep_args.out_path, "write a CSV table here");
    sweep_cmd->add_option("--config", sweep_config, "key=value run configuration; flags win");
    std::vector<ConfigKey> sweep_keys{
        bind_config(*sweep_cmd, "--model", sweep_args.model_path),
        bind_config(*sweep_cmd, "--corpus", sweep_args.corpus_path),
        bind_config(*sweep_cmd, "--strategy", sweep_args.strategy),
        bind_config(*sweep_cmd, "--ns", sweep_ns),
        bind_config(*sweep_cmd, "--out", sweep_args.out_path),
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto require_path = [](const std::string& value, const char* flag) {
        if (value.empty()) throw Error(format_msg("missing required option ", flag));
    };

    try {
        if (bpe_cmd->parsed()) {
            apply_config_file(bpe_config, bpe_keys);
            require_path(bpe_args.out_path, "--out");
            return run_bpe_train(bpe_args);
        }
        if (sim_cmd->parsed()) {
            apply_config_file(sim_config, sim_keys);
            require_path(sim_args.out_path, "--out");
            return run_simulate(sim_args);
        }
        if (train_cmd->parsed()) {
            apply_config_file(train_config, train_keys);
            require_path(train_args.corpus_path, "--corpus");
            require_path(train_args.vocab_path, "--vocab");
            require_path(train_args.out_path, "--out");
            return run_train(train_args);
        }
        if (eval_cmd->parsed()) {
            apply_config_file(eval_config, eval_keys);
            require_path(eval_args.model_path, "--model");
            require_path(eval_args.corpus_path, "--corpus");
            return run_eval(eval_args);
        }
        if (stats_cmd->parsed()) {
            apply_config_file(stats_config, stats_keys);
            require_path(stats_args.corpus_path, "--corpus");
            return run_stats(stats_args);
        }
        if (sweep_cmd->parsed()) {
            apply_config_file(sweep_config, sweep_keys);
            require_path(sweep_args.model_path, "--model");
            require_path(sweep_args.corpus_path, "--corpus");
            if (!sweep_ns.empty()) {
                sweep_args.ns.clear();
                std::istringstream ss(sweep_ns);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    sweep_args.ns.push_back(
                        parse_config_value<std::size_t>("ns", item));
                }
                if (sweep_args.ns.empty()) throw Error("--ns lists no budgets");
            }
            return run_sweep(sweep_args);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
