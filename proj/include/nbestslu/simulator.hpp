#pragma once

// Synthetic corpus generation: template-sampled utterances with simulated
// recognition noise. Lower-ranked hypotheses receive proportionally more
// noise, so rank usually (but not always) tracks quality.

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nbestslu/error.hpp"
#include "nbestslu/nbest_list.hpp"
#include "nbestslu/rng.hpp"

namespace nbest::sim {

struct NoiseProfile {
    double substitution_rate = 0.0; // per character
    double deletion_rate = 0.0;
    double insertion_rate = 0.0;
    // weighted substitution alternatives per character; characters without an
    // entry substitute uniformly over the alphabet
    std::map<char, std::vector<std::pair<char, double>>> confusions;
    std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
    double score_temperature = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        for (double r : {substitution_rate, deletion_rate, insertion_rate}) {
            if (r < 0.0 || r > 1.0) throw Error("noise rates must lie in [0,1]");
        }
        if (substitution_rate + deletion_rate > 1.0) {
            throw Error("substitution and deletion rates must sum to at most 1");
        }
        if (score_temperature <= 0.0) throw Error("score temperature must be positive");
        if (alphabet.empty()) throw Error("noise alphabet must be non-empty");
    }
};

inline char sample_substitute(char original, const NoiseProfile& profile, Rng& rng) {
    auto it = profile.confusions.find(original);
    if (it != profile.confusions.end() && !it->second.empty()) {
        double total = 0.0;
        for (const auto& [c, w] : it->second) total += w;
        double pick = uniform01(rng) * total;
        for (const auto& [c, w] : it->second) {
            pick -= w;
            if (pick <= 0.0) return c;
        }
        return it->second.back().first;
    }
    // uniform over the alphabet, avoiding a no-op substitution when possible
    for (int attempt = 0; attempt < 8; ++attempt) {
        char c = profile.alphabet[uniform_index(rng, profile.alphabet.size())];
        if (c != original) return c;
    }
    return profile.alphabet[uniform_index(rng, profile.alphabet.size())];
}

// Per-character substitution/deletion/insertion with the given rate scale.
// Whitespace is copied verbatim so tokenization survives corruption.
inline std::string corrupt_text(const std::string& text, const NoiseProfile& profile, Rng& rng,
                                double rate_scale = 1.0) {
    profile.validate();
    std::string out;
    out.reserve(text.size() + 4);
    double sub = profile.substitution_rate * rate_scale;
    double del = profile.deletion_rate * rate_scale;
    double ins = profile.insertion_rate * rate_scale;
    for (char c : text) {
        bool whitespace = (c == ' ' || c == '\t' || c == '\n' || c == '\r');
        if (whitespace) {
            out += c;
        } else {
            double u = uniform01(rng);
            if (u < sub) {
                out += sample_substitute(c, profile, rng);
            } else if (u < sub + del) {
                // dropped
            } else {
                out += c;
            }
        }
        if (uniform01(rng) < ins) {
            out += profile.alphabet[uniform_index(rng, profile.alphabet.size())];
        }
    }
    return out;
}

// n candidates with rank-increasing expected noise (rank k scaled by k/n),
// deduplicated by text, scores softmax(-rank/temperature): strictly
// decreasing with rank. The list may come back shorter than n when noise is
// too low to produce n distinct texts.
inline std::vector<Hypothesis> simulate_nbest(const std::string& transcription, std::size_t n,
                                              const NoiseProfile& profile, Rng& rng) {
    if (n < 1) throw Error("simulate_nbest: n must be >= 1");
    profile.validate();
    std::vector<Hypothesis> list;
    std::set<std::string> seen;
    const std::size_t max_attempts = 6 * n;
    std::size_t attempts = 0;
    std::size_t rank = 1;
    while (list.size() < n && attempts < max_attempts) {
        double scale = static_cast<double>(rank) / static_cast<double>(n);
        std::string candidate = corrupt_text(transcription, profile, rng, scale);
        ++attempts;
        if (seen.insert(candidate).second) {
            list.push_back({candidate, std::nullopt});
            rank = list.size() + 1;
        } else if (rank < n) {
            ++rank; // retry with more noise to escape duplicates
        }
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < list.size(); ++k) {
        denom += std::exp(-static_cast<double>(k + 1) / profile.score_temperature);
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
        list[k].score = std::exp(-static_cast<double>(k + 1) / profile.score_temperature) / denom;
    }
    return list;
}

// ---- utterance templates ---------------------------------------------------

struct IntentTemplate {
    std::string name;
    std::vector<std::string> patterns; // "play <song>" style, slots in angle brackets
};

struct DomainTemplate {
    std::string name;
    std::vector<IntentTemplate> intents;
};

struct TemplateSpec {
    std::vector<DomainTemplate> domains;
    std::map<std::string, std::vector<std::string>> slots;

    void validate() const {
        if (domains.empty()) throw Error("template spec defines no domains");
        for (const DomainTemplate& d : domains) {
            if (d.intents.empty()) {
                throw Error(format_msg("domain '", d.name, "' defines no intents"));
            }
            for (const IntentTemplate& i : d.intents) {
                if (i.patterns.empty()) {
                    throw Error(format_msg("intent '", d.name, "/", i.name,
                                           "' defines no patterns"));
                }
            }
        }
    }
};

inline std::vector<std::string> pattern_slot_refs(const std::string& pattern) {
    std::vector<std::string> refs;
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        std::size_t open = pattern.find('<', pos);
        if (open == std::string::npos) break;
        std::size_t close = pattern.find('>', open);
        if (close == std::string::npos) break;
        refs.push_back(pattern.substr(open + 1, close - open - 1));
        pos = close + 1;
    }
    return refs;
}

// Line format:
//   slot <name> = <filler>, <filler>, ...
//   domain <Name>
//   intent <Name>
//   pattern <text with <slot> references>
// '#' starts a comment; blank lines are skipped. Slots must be declared
// before the first pattern that references them.
inline TemplateSpec parse_template_spec(const std::string& text,
                                        const std::string& origin = "<string>") {
    TemplateSpec spec;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    DomainTemplate* domain = nullptr;
    IntentTemplate* intent = nullptr;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line = line.substr(start);

        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        std::string rest;
        std::getline(ls, rest);
        if (!rest.empty() && rest.front() == ' ') rest.erase(0, rest.find_first_not_of(' '));

        if (keyword == "slot") {
            std::size_t eq = rest.find('=');
            if (eq == std::string::npos) {
                throw ParseError(format_msg(origin, ":", lineno, ": slot line needs '='"));
            }
            std::string name = rest.substr(0, eq);
            while (!name.empty() && name.back() == ' ') name.pop_back();
            std::vector<std::string> fillers;
            std::string filler;
            std::istringstream fs(rest.substr(eq + 1));
            while (std::getline(fs, filler, ',')) {
                std::size_t b = filler.find_first_not_of(' ');
                std::size_t e = filler.find_last_not_of(' ');
                if (b == std::string::npos) continue;
                fillers.push_back(filler.substr(b, e - b + 1));
            }
            if (name.empty() || fillers.empty()) {
                throw ParseError(format_msg(origin, ":", lineno, ": empty slot name or fillers"));
            }
            spec.slots[name] = std::move(fillers);
        } else if (keyword == "domain") {
            if (rest.empty()) throw ParseError(format_msg(origin, ":", lineno, ": domain needs a name"));
            spec.domains.push_back({rest, {}});
            domain = &spec.domains.back();
            intent = nullptr;
        } else if (keyword == "intent") {
            if (!domain) throw ParseError(format_msg(origin, ":", lineno, ": intent outside a domain"));
            if (rest.empty()) throw ParseError(format_msg(origin, ":", lineno, ": intent needs a name"));
            domain->intents.push_back({rest, {}});
            intent = &domain->intents.back();
        } else if (keyword == "pattern") {
            if (!intent) throw ParseError(format_msg(origin, ":", lineno, ": pattern outside an intent"));
            if (rest.empty()) throw ParseError(format_msg(origin, ":", lineno, ": empty pattern"));
            for (const std::string& ref : pattern_slot_refs(rest)) {
                if (!spec.slots.count(ref)) {
                    throw ParseError(format_msg(origin, ":", lineno, ": unknown slot <", ref,
                                                "> (slots must be declared first)"));
                }
            }
            intent->patterns.push_back(rest);
        } else {
            throw ParseError(format_msg(origin, ":", lineno, ": unknown keyword '", keyword, "'"));
        }
    }
    spec.validate();
    return spec;
}

inline std::string fill_pattern(const std::string& pattern, const TemplateSpec& spec, Rng& rng) {
    std::string out;
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        std::size_t open = pattern.find('<', pos);
        if (open == std::string::npos) {
            out += pattern.substr(pos);
            break;
        }
        std::size_t close = pattern.find('>', open);
        if (close == std::string::npos) {
            out += pattern.substr(pos);
            break;
        }
        out += pattern.substr(pos, open - pos);
        std::string slot = pattern.substr(open + 1, close - open - 1);
        auto it = spec.slots.find(slot);
        if (it == spec.slots.end()) {
            throw Error(format_msg("pattern references unknown slot <", slot, ">"));
        }
        out += it->second[uniform_index(rng, it->second.size())];
        pos = close + 1;
    }
    return out;
}

// Each utterance derives its own random stream from (seed, index), so a
// corpus regenerates identically regardless of record order or count.
inline std::vector<NBestList> generate_corpus(const TemplateSpec& spec, std::size_t count,
                                              std::size_t n, const NoiseProfile& profile) {
    spec.validate();
    profile.validate();
    std::vector<NBestList> corpus;
    corpus.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = derive_stream(profile.seed, i);
        const DomainTemplate& d = spec.domains[uniform_index(rng, spec.domains.size())];
        const IntentTemplate& t = d.intents[uniform_index(rng, d.intents.size())];
        const std::string& pattern = t.patterns[uniform_index(rng, t.patterns.size())];
        NBestList record;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "utt-%06zu", i);
        record.id = idbuf;
        record.transcription = fill_pattern(pattern, spec, rng);
        record.domain = d.name;
        record.intent = t.name;
        record.hypotheses = simulate_nbest(*record.transcription, n, profile, rng);
        record.validate();
        corpus.push_back(std::move(record));
    }
    return corpus;
}

// Five-domain voice-assistant templates shipped with the tool; enough lexical
// overlap between domains that character noise causes real confusions.
inline const char* builtin_template_text() {
    return R"(# built-in synthetic voice assistant templates
# elliptical one-word commands overlap across domains (a bare "queen" may
# ask for music or for history), so clean text carries irreducible ambiguity
slot song = thunder road, bohemian rhapsody, hotel california, purple rain, lose yourself, hey jude, rolling deep, viva forever
slot artist = muse, queen, adele, prince, mozart, coldplay
slot city = london, paris, seattle, boston, madrid, tokyo, austin, denver
slot item = batteries, coffee beans, paper towels, light bulbs, dog food, toothpaste, olive oil
slot person = alice, bob, carol, david, emma, frank, grace, darwin, curie
slot figure = einstein, cleopatra, queen, prince, mozart, darwin, curie
slot thing = gravity, photosynthesis, black holes, the roman empire, the eiffel tower
slot message = i am running late, see you soon, call me back, happy birthday

domain Music
intent PlayMusic
pattern play <song>
pattern play <song> by <artist>
pattern put on some <artist>
pattern play music by <artist>
pattern <artist>
intent PauseMusic
pattern pause the music
pattern stop the song
pattern turn off the music

domain Weather
intent GetWeather
pattern what is the weather in <city>
pattern weather forecast for <city>
pattern will it rain in <city> tomorrow
intent GetTemperature
pattern how cold is it in <city>
pattern temperature in <city> right now

domain Shopping
intent AddToCart
pattern add <item> to my cart
pattern order more <item>
pattern buy <item> again
intent OrderStatus
pattern where is my order
pattern track my package
pattern when will my <item> arrive

domain Knowledge
intent AskFact
pattern who was <figure>
pattern tell me about <figure>
pattern what is <thing>
pattern <figure>
intent Spell
pattern how do you spell <person>
pattern spell the word <item>

domain Communication
intent Call
pattern call <person>
pattern phone <person> now
pattern make a call to <person>
pattern <person>
intent SendMessage
pattern send a message to <person>
pattern text <person> saying <message>
pattern tell <person> <message>
)";
}

inline TemplateSpec builtin_templates() {
    return parse_template_spec(builtin_template_text(), "<builtin>");
}

} // namespace nbest::sim
