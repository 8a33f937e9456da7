#pragma once

// JSONL corpus files: one record per line,
// {"id", "transcription", "domain", "intent", "nbest":[{"text","score"}...]}

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbestslu/error.hpp"
#include "nbestslu/nbest_list.hpp"

namespace nbest {

using json = nlohmann::json;

inline json record_to_json(const NBestList& r) {
    json hyps = json::array();
    for (const Hypothesis& h : r.hypotheses) {
        json o{{"text", h.text}};
        if (h.score) o["score"] = *h.score;
        hyps.push_back(std::move(o));
    }
    json out{{"id", r.id}, {"domain", r.domain}, {"intent", r.intent}, {"nbest", hyps}};
    if (r.transcription) out["transcription"] = *r.transcription;
    return out;
}

inline NBestList record_from_json(const json& j, const std::string& where) {
    auto require_string = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j.at(key).is_string()) {
            throw ParseError(format_msg(where, ": missing or non-string field '", key, "'"));
        }
        return j.at(key).get<std::string>();
    };
    NBestList r;
    r.id = require_string("id");
    r.domain = require_string("domain");
    r.intent = require_string("intent");
    if (j.contains("transcription") && !j.at("transcription").is_null()) {
        if (!j.at("transcription").is_string()) {
            throw ParseError(format_msg(where, ": field 'transcription' must be a string"));
        }
        r.transcription = j.at("transcription").get<std::string>();
    }
    if (!j.contains("nbest") || !j.at("nbest").is_array()) {
        throw ParseError(format_msg(where, ": missing or non-array field 'nbest'"));
    }
    for (const json& h : j.at("nbest")) {
        if (!h.is_object() || !h.contains("text") || !h.at("text").is_string()) {
            throw ParseError(format_msg(where, ": every nbest entry needs a string 'text'"));
        }
        Hypothesis hyp;
        hyp.text = h.at("text").get<std::string>();
        if (h.contains("score") && !h.at("score").is_null()) {
            if (!h.at("score").is_number()) {
                throw ParseError(format_msg(where, ": hypothesis 'score' must be a number"));
            }
            hyp.score = h.at("score").get<double>();
        }
        r.hypotheses.push_back(std::move(hyp));
    }
    try {
        r.validate();
    } catch (const Error& e) {
        throw ParseError(format_msg(where, ": ", e.what()));
    }
    return r;
}

// Strict load: every non-blank line must parse and validate, and failures
// carry the path and line number. Blank lines are permitted separators.
inline std::vector<NBestList> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(format_msg("cannot read corpus file ", path));
    std::vector<NBestList> corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string where = format_msg(path, ":", lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(format_msg(where, ": invalid JSON: ", e.what()));
        }
        corpus.push_back(record_from_json(j, where));
    }
    return corpus;
}

inline void save_corpus(const std::vector<NBestList>& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(format_msg("cannot write corpus file ", path));
    for (const NBestList& r : corpus) out << record_to_json(r).dump() << '\n';
}

} // namespace nbest
