#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>

#include "support/test_util.hpp"

using namespace nbest;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

// Runs the CLI binary, capturing stdout+stderr; returns the exit code.
// With raw=true, `args` is a complete shell command (for env-var prefixes).
int run_cli(const std::string& args, const testutil::TempDir& dir, std::string* output = nullptr,
            bool raw = false) {
    std::string log = dir.path("cli-log.txt");
    std::string cmd = raw ? args : std::string(NBEST_SLU_CLI_PATH) + " " + args;
    cmd += " > " + log + " 2>&1";
    int status = std::system(cmd.c_str());
    if (output) *output = slurp(log);
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::vector<NBestList> fixture_records() {
    using testutil::make_record;
    std::vector<NBestList> records{
        make_record("f0", "play muse", "Music", "PlayMusic",
                    {"play news", "play muse", "play mus"}),
        make_record("f1", "track on bose", "Music", "PlayMusic",
                    {"check on bowls", "check on bose", "track on bose"}),
        make_record("f2", "harry porter", "Knowledge", "AskFact",
                    {"how porter", "how patter", "harry power"}),
        make_record("f3", "who was darwin", "Knowledge", "AskFact", {"who was darwin"}),
        make_record("f4", "play queen", "Music", "PlayMusic", {"play queen"}),
        make_record("f5", "tell me about curie", "Knowledge", "AskFact",
                    {"tell me about curie"}),
        make_record("f6", "pause the music", "Music", "PauseMusic", {"pause the music"}),
        make_record("f7", "stop the song", "Music", "PauseMusic", {"stop the son"}),
    };
    return records;
}

} // namespace

TEST_CASE("corpus files", "[io]") {
    testutil::TempDir dir("corpus");

    SECTION("write/load round trip preserves every field") {
        std::vector<NBestList> corpus = fixture_records();
        corpus[0].hypotheses[0].score = 0.7;
        corpus[0].hypotheses[1].score = 0.2;
        corpus[0].hypotheses[2].score = 0.1;
        corpus[1].transcription.reset();
        save_corpus(corpus, dir.path("c.jsonl"));
        std::vector<NBestList> loaded = load_corpus(dir.path("c.jsonl"));
        REQUIRE(loaded.size() == corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            REQUIRE(loaded[i].id == corpus[i].id);
            REQUIRE(loaded[i].transcription == corpus[i].transcription);
            REQUIRE(loaded[i].domain == corpus[i].domain);
            REQUIRE(loaded[i].intent == corpus[i].intent);
            REQUIRE(loaded[i].hypotheses.size() == corpus[i].hypotheses.size());
            for (std::size_t k = 0; k < corpus[i].hypotheses.size(); ++k) {
                REQUIRE(loaded[i].hypotheses[k].text == corpus[i].hypotheses[k].text);
                REQUIRE(loaded[i].hypotheses[k].score == corpus[i].hypotheses[k].score);
            }
        }
    }
    SECTION("an empty file is a valid empty corpus") {
        spit(dir.path("empty.jsonl"), "");
        REQUIRE(load_corpus(dir.path("empty.jsonl")).empty());
    }
    SECTION("an empty nbest list is rejected with its line number") {
        spit(dir.path("bad.jsonl"),
             R"({"id":"a","transcription":"x","domain":"D","intent":"I","nbest":[{"text":"x"}]})"
             "\n"
             R"({"id":"b","transcription":"y","domain":"D","intent":"I","nbest":[]})"
             "\n");
        try {
            load_corpus(dir.path("bad.jsonl"));
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
    SECTION("invalid JSON carries the line number") {
        spit(dir.path("broken.jsonl"), "{\"id\": \"a\"\n");
        try {
            load_corpus(dir.path("broken.jsonl"));
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find(":1") != std::string::npos);
        }
    }
    SECTION("missing fields name the field") {
        spit(dir.path("minus.jsonl"), R"({"id":"a","domain":"D","nbest":[{"text":"x"}]})" "\n");
        try {
            load_corpus(dir.path("minus.jsonl"));
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()).find("intent") != std::string::npos);
        }
    }
    SECTION("increasing scores are rejected") {
        spit(dir.path("scores.jsonl"),
             R"({"id":"a","transcription":"x","domain":"D","intent":"I",)"
             R"("nbest":[{"text":"x","score":0.1},{"text":"y","score":0.9}]})" "\n");
        REQUIRE_THROWS_AS(load_corpus(dir.path("scores.jsonl")), ParseError);
    }
}

TEST_CASE("checkpoint files", "[io]") {
    testutil::TempDir dir("ckpt");
    testutil::ToyCorpus toy = testutil::toy_corpus();
    Hyperparams hp = testutil::toy_hyperparams(StrategyKind::baseline);
    hp.epochs = 4;
    Model model =
        train_model(toy.records, StrategyKind::baseline, Task::domain, "", toy.vocab, hp).model;

    SECTION("save, load, save again is byte-identical") {
        save_checkpoint(model, dir.path("m1.json"));
        Model loaded = load_checkpoint(dir.path("m1.json"));
        save_checkpoint(loaded, dir.path("m2.json"));
        REQUIRE(slurp(dir.path("m1.json")) == slurp(dir.path("m2.json")));
    }
    SECTION("predictions survive the round trip bit for bit") {
        save_checkpoint(model, dir.path("m.json"));
        Model loaded = load_checkpoint(dir.path("m.json"));
        for (const NBestList& r : toy.records) {
            Prediction a = bm_predict(model, *r.transcription);
            Prediction b = bm_predict(loaded, *r.transcription);
            REQUIRE(a.tag == b.tag);
            REQUIRE(a.confidence == b.confidence);
        }
    }
    SECTION("version mismatches are explicit errors") {
        save_checkpoint(model, dir.path("m.json"));
        json j = json::parse(slurp(dir.path("m.json")));
        j["version"] = 999;
        spit(dir.path("m.json"), j.dump());
        REQUIRE_THROWS_WITH(load_checkpoint(dir.path("m.json")),
                            Catch::Matchers::ContainsSubstring("version"));
    }
    SECTION("truncated files are errors") {
        save_checkpoint(model, dir.path("m.json"));
        std::string text = slurp(dir.path("m.json"));
        spit(dir.path("m.json"), text.substr(0, text.size() / 2));
        REQUIRE_THROWS_AS(load_checkpoint(dir.path("m.json")), Error);
    }
    SECTION("evaluation corpora with foreign tags are rejected") {
        std::vector<NBestList> corpus{testutil::make_record("x0", "play muse", "Sports",
                                                            "Play", {"play muse"})};
        REQUIRE_THROWS_WITH(validate_corpus_tags(model, corpus),
                            Catch::Matchers::ContainsSubstring("Sports"));
    }
}

TEST_CASE("key=value config files", "[io]") {
    testutil::TempDir dir("cfg");
    spit(dir.path("run.cfg"),
         "# comment line\n"
         "strategy = pooling-avg\n"
         "epochs=3\n"
         "  lr = 0.005  # trailing comment\n"
         "\n");
    auto kv = load_key_value_config(dir.path("run.cfg"));
    REQUIRE(kv.at("strategy") == "pooling-avg");
    REQUIRE(kv.at("epochs") == "3");
    REQUIRE(kv.at("lr") == "0.005");
    spit(dir.path("bad.cfg"), "just a bare line\n");
    REQUIRE_THROWS_AS(load_key_value_config(dir.path("bad.cfg")), ParseError);
}

TEST_CASE("cli wiring", "[cli]") {
    testutil::TempDir dir("cli");

    SECTION("unknown subcommands and flags exit 2 with usage text") {
        std::string out;
        REQUIRE(run_cli("frobnicate", dir, &out) == 2);
        REQUIRE(run_cli("stats --no-such-flag", dir, &out) == 2);
        REQUIRE(run_cli("--help", dir, &out) == 0);
        REQUIRE(out.find("bpe-train") != std::string::npos);
    }

    SECTION("malformed corpus files exit 1 with a line-numbered diagnostic") {
        spit(dir.path("bad.jsonl"), "not json\n");
        std::string out;
        REQUIRE(run_cli("stats --corpus " + dir.path("bad.jsonl"), dir, &out) == 1);
        REQUIRE(out.find(":1") != std::string::npos);
    }

    SECTION("full pipeline: simulate, bpe-train, train, eval, stats, sweep") {
        std::string out;
        // deterministic simulation
        REQUIRE(run_cli("simulate --out " + dir.path("a.jsonl") +
                            " --count 60 --seed 9 --sub-rate 0.08 --del-rate 0.02 "
                            "--ins-rate 0.03",
                        dir, &out) == 0);
        REQUIRE(run_cli("simulate --out " + dir.path("b.jsonl") +
                            " --count 60 --seed 9 --sub-rate 0.08 --del-rate 0.02 "
                            "--ins-rate 0.03",
                        dir, &out) == 0);
        REQUIRE(slurp(dir.path("a.jsonl")) == slurp(dir.path("b.jsonl")));

        REQUIRE(run_cli("bpe-train --corpus " + dir.path("a.jsonl") + " --merges 40 --out " +
                            dir.path("vocab.bpe"),
                        dir, &out) == 0);

        std::string train_flags = " --corpus " + dir.path("a.jsonl") + " --vocab " +
                                  dir.path("vocab.bpe") +
                                  " --strategy baseline --epochs 2 --embed-dim 6 "
                                  "--hidden-dim 6 --seed 3 --out ";
        REQUIRE(run_cli("train" + train_flags + dir.path("m1.json"), dir, &out) == 0);
        REQUIRE(run_cli("train" + train_flags + dir.path("m2.json"), dir, &out) == 0);
        REQUIRE(slurp(dir.path("m1.json")) == slurp(dir.path("m2.json")));

        REQUIRE(run_cli("eval --model " + dir.path("m1.json") + " --corpus " +
                            dir.path("a.jsonl") + " --report " + dir.path("r.json"),
                        dir, &out) == 0);
        json report = json::parse(slurp(dir.path("r.json")));
        REQUIRE(report.contains("micro_f1"));
        REQUIRE(report["records"] == 60);

        REQUIRE(run_cli("stats --corpus " + dir.path("a.jsonl") + " --n 5 --out " +
                            dir.path("stats.csv"),
                        dir, &out) == 0);
        REQUIRE(slurp(dir.path("stats.csv")).rfind("rank,", 0) == 0);

        // a budget sweep needs a matching integration model; baseline models decline
        REQUIRE(run_cli("sweep --model " + dir.path("m1.json") + " --corpus " +
                            dir.path("a.jsonl") + " --strategy pooling-avg",
                        dir, &out) == 1);
        REQUIRE(out.find("pooling-avg") != std::string::npos);
    }

    SECTION("rerank-oracle evaluation reports the selected hypothesis ranks") {
        save_corpus(fixture_records(), dir.path("fix.jsonl"));
        std::string out;
        REQUIRE(run_cli("bpe-train --corpus " + dir.path("fix.jsonl") +
                            " --merges 20 --out " + dir.path("v.bpe"),
                        dir, &out) == 0);
        REQUIRE(run_cli("train --corpus " + dir.path("fix.jsonl") + " --vocab " +
                            dir.path("v.bpe") +
                            " --strategy baseline --epochs 2 --embed-dim 6 --hidden-dim 6 "
                            "--out " +
                            dir.path("bm.json"),
                        dir, &out) == 0);
        REQUIRE(run_cli("eval --model " + dir.path("bm.json") + " --corpus " +
                            dir.path("fix.jsonl") +
                            " --strategy rerank-oracle --predictions " + dir.path("p.jsonl"),
                        dir, &out) == 0);
        std::istringstream preds(slurp(dir.path("p.jsonl")));
        std::map<std::string, int> ranks;
        std::string line;
        while (std::getline(preds, line)) {
            json j = json::parse(line);
            ranks[j["id"]] = j.value("selected_rank", 0);
        }
        REQUIRE(ranks.at("f0") == 2);
        REQUIRE(ranks.at("f1") == 3);
        REQUIRE(ranks.at("f2") == 1);
    }

    SECTION("the seed environment variable is a default that flags override") {
        save_corpus(fixture_records(), dir.path("fix.jsonl"));
        std::string out;
        REQUIRE(run_cli("bpe-train --corpus " + dir.path("fix.jsonl") +
                            " --merges 20 --out " + dir.path("v.bpe"),
                        dir, &out) == 0);
        std::string train_tail = " --corpus " + dir.path("fix.jsonl") + " --vocab " +
                                 dir.path("v.bpe") +
                                 " --strategy baseline --epochs 1 --embed-dim 6 "
                                 "--hidden-dim 6 --out ";
        REQUIRE(run_cli("NBEST_SLU_SEED=123 " + std::string(NBEST_SLU_CLI_PATH) +
                            " train" + train_tail + dir.path("e1.json"),
                        dir, &out, /*raw=*/true) == 0);
        json env_ckpt = json::parse(slurp(dir.path("e1.json")));
        REQUIRE(env_ckpt["hyperparams"]["seed"] == 123);
        REQUIRE(run_cli("NBEST_SLU_SEED=123 " + std::string(NBEST_SLU_CLI_PATH) +
                            " train --seed 5" + train_tail + dir.path("e2.json"),
                        dir, &out, /*raw=*/true) == 0);
        json flag_ckpt = json::parse(slurp(dir.path("e2.json")));
        REQUIRE(flag_ckpt["hyperparams"]["seed"] == 5);
    }

    SECTION("domain-scoped intent models train and evaluate") {
        save_corpus(fixture_records(), dir.path("fix.jsonl"));
        std::string out;
        REQUIRE(run_cli("bpe-train --corpus " + dir.path("fix.jsonl") +
                            " --merges 20 --out " + dir.path("v.bpe"),
                        dir, &out) == 0);
        REQUIRE(run_cli("train --corpus " + dir.path("fix.jsonl") + " --vocab " +
                            dir.path("v.bpe") +
                            " --strategy baseline --task intent --domain Music --epochs 2 "
                            "--embed-dim 6 --hidden-dim 6 --out " +
                            dir.path("im.json"),
                        dir, &out) == 0);
        json ckpt = json::parse(slurp(dir.path("im.json")));
        REQUIRE(ckpt["task"] == "intent");
        REQUIRE(ckpt["task_domain"] == "Music");
        REQUIRE(ckpt["tags"].size() == 2); // PlayMusic, PauseMusic
        REQUIRE(run_cli("eval --model " + dir.path("im.json") + " --corpus " +
                            dir.path("fix.jsonl") + " --report " + dir.path("ir.json"),
                        dir, &out) == 0);
        json report = json::parse(slurp(dir.path("ir.json")));
        REQUIRE(report["records"] == 5); // only the Music records
        // intent training without a domain scope is refused
        REQUIRE(run_cli("train --corpus " + dir.path("fix.jsonl") + " --vocab " +
                            dir.path("v.bpe") + " --task intent --epochs 1 --out " +
                            dir.path("nope.json"),
                        dir, &out) == 1);
    }

    SECTION("config files fill in unset flags and flags win") {
        save_corpus(fixture_records(), dir.path("fix.jsonl"));
        std::string out;
        REQUIRE(run_cli("bpe-train --corpus " + dir.path("fix.jsonl") +
                            " --merges 20 --out " + dir.path("v.bpe"),
                        dir, &out) == 0);
        spit(dir.path("run.cfg"),
             "strategy=baseline\nepochs=1\nembed-dim=6\nhidden-dim=6\nseed=4\n");
        REQUIRE(run_cli("train --config " + dir.path("run.cfg") + " --corpus " +
                            dir.path("fix.jsonl") + " --vocab " + dir.path("v.bpe") +
                            " --out " + dir.path("c1.json"),
                        dir, &out) == 0);
        // the same run with an overriding flag must differ (more epochs)
        REQUIRE(run_cli("train --config " + dir.path("run.cfg") + " --epochs 3 --corpus " +
                            dir.path("fix.jsonl") + " --vocab " + dir.path("v.bpe") +
                            " --out " + dir.path("c2.json"),
                        dir, &out) == 0);
        json c1 = json::parse(slurp(dir.path("c1.json")));
        json c2 = json::parse(slurp(dir.path("c2.json")));
        REQUIRE(c1["hyperparams"]["epochs"] == 1);
        REQUIRE(c2["hyperparams"]["epochs"] == 3);
    }
}
