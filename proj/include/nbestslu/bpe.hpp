#pragma once

// Byte-pair encoding with reserved special tokens.
//
// Words are whitespace-delimited; the final character of each word carries an
// end-of-word marker so word-final units merge separately from word-internal
// ones. Reserved tokens (delimiter, padding, unknown) are atomic: they never
// participate in merges and always encode to a single id.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nbestslu/error.hpp"

namespace nbest::bpe {

struct MergeRule {
    std::string left;
    std::string right;
};

class Vocabulary {
public:
    static constexpr const char* kDefaultDelimiter = "<SEP>";
    static constexpr const char* kDefaultPadding = "<PAD>";
    static constexpr const char* kDefaultUnknown = "<UNK>";
    static constexpr const char* kEndOfWord = "</w>";

    Vocabulary() = default;

    // Greedy pair-merge training over whitespace-split words. Ties between
    // equally frequent pairs break lexicographically so training is
    // deterministic and independent of corpus order.
    static Vocabulary train(const std::vector<std::string>& corpus, std::size_t num_merges) {
        if (corpus.empty()) throw Error("bpe: training corpus is empty");
        Vocabulary vocab;
        vocab.register_reserved();

        // distinct word -> (unit sequence, count); map keys keep things ordered
        std::map<std::string, std::pair<std::vector<std::string>, std::size_t>> words;
        for (const std::string& text : corpus) {
            for (const Segment& seg : vocab.split_segments(text)) {
                if (seg.reserved) continue; // atomic, excluded from merge training
                for (const std::string& word : whitespace_split(seg.text)) {
                    auto it = words.find(word);
                    if (it == words.end()) {
                        words.emplace(word, std::make_pair(initial_units(word), std::size_t{1}));
                    } else {
                        ++it->second.second;
                    }
                }
            }
        }

        // alphabet: every initial unit, sorted for id determinism
        {
            std::map<std::string, bool> alphabet;
            for (const auto& [word, entry] : words) {
                for (const std::string& u : entry.first) alphabet[u] = true;
            }
            for (const auto& [unit, _] : alphabet) {
                vocab.alphabet_.push_back(unit);
                vocab.add_unit(unit);
            }
        }

        for (std::size_t m = 0; m < num_merges; ++m) {
            std::map<std::pair<std::string, std::string>, std::size_t> pair_counts;
            for (const auto& [word, entry] : words) {
                const auto& units = entry.first;
                for (std::size_t i = 0; i + 1 < units.size(); ++i) {
                    pair_counts[{units[i], units[i + 1]}] += entry.second;
                }
            }
            if (pair_counts.empty()) break;
            // max count, first (lexicographically smallest) pair on ties
            auto best = pair_counts.begin();
            for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
                if (it->second > best->second) best = it;
            }
            MergeRule rule{best->first.first, best->first.second};
            for (auto& [word, entry] : words) {
                apply_merge(entry.first, rule);
            }
            vocab.push_merge(rule);
        }
        return vocab;
    }

    // ---- encoding ------------------------------------------------------

    std::vector<int> encode(const std::string& text) const {
        std::vector<int> ids;
        for (const Segment& seg : split_segments(text)) {
            if (seg.reserved) {
                ids.push_back(seg.reserved_id);
                continue;
            }
            for (const std::string& word : whitespace_split(seg.text)) {
                std::vector<std::string> units = initial_units(word);
                merge_units(units);
                for (const std::string& u : units) {
                    auto it = unit_to_id_.find(u);
                    ids.push_back(it == unit_to_id_.end() ? unknown_id_ : it->second);
                }
            }
        }
        return ids;
    }

    std::string decode(const std::vector<int>& ids) const {
        std::vector<std::string> tokens;
        std::string current;
        auto close = [&]() {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
        };
        for (int id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= id_to_unit_.size()) {
                throw Error(format_msg("bpe: id ", id, " out of range (vocabulary size ",
                                       id_to_unit_.size(), ")"));
            }
            if (id == delimiter_id_ || id == padding_id_ || id == unknown_id_) {
                close();
                tokens.push_back(id_to_unit_[static_cast<std::size_t>(id)]);
                continue;
            }
            const std::string& unit = id_to_unit_[static_cast<std::size_t>(id)];
            if (ends_with(unit, kEndOfWord)) {
                current += unit.substr(0, unit.size() - std::char_traits<char>::length(kEndOfWord));
                close();
            } else {
                current += unit;
            }
        }
        close();
        std::string out;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) out += ' ';
            out += tokens[i];
        }
        return out;
    }

    // ---- accessors -------------------------------------------------------

    std::size_t size() const { return id_to_unit_.size(); }
    int delimiter_id() const { return delimiter_id_; }
    int padding_id() const { return padding_id_; }
    int unknown_id() const { return unknown_id_; }
    const std::string& delimiter() const { return id_to_unit_[static_cast<std::size_t>(delimiter_id_)]; }
    const std::string& unknown_glyph() const { return id_to_unit_[static_cast<std::size_t>(unknown_id_)]; }
    const std::vector<MergeRule>& merges() const { return merges_; }
    const std::string& unit(std::size_t id) const { return id_to_unit_.at(id); }

    bool trained() const { return !id_to_unit_.empty(); }

    // ---- persistence -----------------------------------------------------
    //
    // Line-oriented text: a header naming the reserved tokens and marker,
    // the single-character alphabet in id order, then one merge per line in
    // priority order.

    std::string serialize() const {
        std::ostringstream os;
        os << "nbest-bpe v1\n";
        os << "reserved " << id_to_unit_[0] << ' ' << id_to_unit_[1] << ' ' << id_to_unit_[2]
           << '\n';
        os << "eow " << kEndOfWord << '\n';
        os << "alphabet " << alphabet_.size() << '\n';
        for (const std::string& u : alphabet_) os << u << '\n';
        os << "merges " << merges_.size() << '\n';
        for (const MergeRule& m : merges_) os << m.left << ' ' << m.right << '\n';
        return os.str();
    }

    static Vocabulary deserialize(const std::string& text, const std::string& origin = "<string>") {
        std::istringstream is(text);
        std::string line;
        std::size_t lineno = 0;
        auto next_line = [&]() -> std::string& {
            if (!std::getline(is, line)) {
                throw ParseError(format_msg(origin, ":", lineno + 1, ": unexpected end of file"));
            }
            ++lineno;
            return line;
        };
        Vocabulary vocab;
        if (next_line() != "nbest-bpe v1") {
            throw ParseError(format_msg(origin, ":1: not a vocabulary file (bad magic)"));
        }
        std::istringstream reserved(next_line());
        std::string tag, sep, pad, unk;
        reserved >> tag >> sep >> pad >> unk;
        if (tag != "reserved" || sep.empty() || pad.empty() || unk.empty()) {
            throw ParseError(format_msg(origin, ":", lineno, ": malformed reserved-token line"));
        }
        vocab.register_reserved(sep, pad, unk);
        std::istringstream eow(next_line());
        std::string eow_tag, eow_marker;
        eow >> eow_tag >> eow_marker;
        if (eow_tag != "eow" || eow_marker != kEndOfWord) {
            throw ParseError(format_msg(origin, ":", lineno, ": unsupported end-of-word marker"));
        }
        std::size_t alphabet_count = parse_count(next_line(), "alphabet", origin, lineno);
        for (std::size_t i = 0; i < alphabet_count; ++i) {
            const std::string& u = next_line();
            if (u.empty()) throw ParseError(format_msg(origin, ":", lineno, ": empty alphabet unit"));
            vocab.alphabet_.push_back(u);
            vocab.add_unit(u);
        }
        std::size_t merge_count = parse_count(next_line(), "merges", origin, lineno);
        for (std::size_t i = 0; i < merge_count; ++i) {
            std::istringstream ms(next_line());
            MergeRule rule;
            if (!(ms >> rule.left >> rule.right)) {
                throw ParseError(format_msg(origin, ":", lineno, ": malformed merge rule"));
            }
            vocab.push_merge(rule);
        }
        return vocab;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(format_msg("cannot write vocabulary file ", path));
        out << serialize();
    }

    static Vocabulary load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(format_msg("cannot read vocabulary file ", path));
        std::ostringstream buf;
        buf << in.rdbuf();
        return deserialize(buf.str(), path);
    }

private:
    struct Segment {
        std::string text;
        bool reserved = false;
        int reserved_id = -1;
    };

    static bool ends_with(const std::string& s, const char* suffix) {
        std::size_t n = std::char_traits<char>::length(suffix);
        return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
    }

    static std::vector<std::string> whitespace_split(const std::string& text) {
        std::vector<std::string> words;
        std::string w;
        for (char c : text) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                if (!w.empty()) {
                    words.push_back(w);
                    w.clear();
                }
            } else {
                w += c;
            }
        }
        if (!w.empty()) words.push_back(w);
        return words;
    }

    static std::vector<std::string> initial_units(const std::string& word) {
        std::vector<std::string> units;
        units.reserve(word.size());
        for (char c : word) units.emplace_back(1, c);
        if (!units.empty()) units.back() += kEndOfWord;
        return units;
    }

    static std::size_t parse_count(const std::string& line, const char* tag,
                                   const std::string& origin, std::size_t lineno) {
        std::istringstream is(line);
        std::string got;
        long long count = -1;
        is >> got >> count;
        if (got != tag || count < 0) {
            throw ParseError(format_msg(origin, ":", lineno, ": expected '", tag, " <count>'"));
        }
        return static_cast<std::size_t>(count);
    }

    // Replaces every adjacent occurrence of the pair, scanning left to right.
    static void apply_merge(std::vector<std::string>& units, const MergeRule& rule) {
        std::vector<std::string> merged;
        merged.reserve(units.size());
        for (std::size_t i = 0; i < units.size();) {
            if (i + 1 < units.size() && units[i] == rule.left && units[i + 1] == rule.right) {
                merged.push_back(rule.left + rule.right);
                i += 2;
            } else {
                merged.push_back(std::move(units[i]));
                ++i;
            }
        }
        units = std::move(merged);
    }

    // Encode-time merging: repeatedly apply the highest-priority (earliest
    // trained) rule present anywhere in the word.
    void merge_units(std::vector<std::string>& units) const {
        while (units.size() >= 2) {
            std::size_t best_rank = merges_.size();
            for (std::size_t i = 0; i + 1 < units.size(); ++i) {
                auto it = merge_rank_.find(pair_key(units[i], units[i + 1]));
                if (it != merge_rank_.end() && it->second < best_rank) best_rank = it->second;
            }
            if (best_rank == merges_.size()) break;
            apply_merge(units, merges_[best_rank]);
        }
    }

    // Splits text around reserved-token substrings (delimiter first, then the
    // other glyphs); everything else is plain text to be word-split.
    std::vector<Segment> split_segments(const std::string& text) const {
        std::vector<Segment> segments;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t best_at = std::string::npos;
            int best_id = -1;
            std::size_t best_len = 0;
            for (int id : {delimiter_id_, padding_id_, unknown_id_}) {
                const std::string& glyph = id_to_unit_[static_cast<std::size_t>(id)];
                std::size_t at = text.find(glyph, pos);
                if (at == std::string::npos) continue;
                if (at < best_at || (at == best_at && glyph.size() > best_len)) {
                    best_at = at;
                    best_id = id;
                    best_len = glyph.size();
                }
            }
            if (best_at == std::string::npos) {
                segments.push_back({text.substr(pos), false, -1});
                break;
            }
            if (best_at > pos) segments.push_back({text.substr(pos, best_at - pos), false, -1});
            segments.push_back({text.substr(best_at, best_len), true, best_id});
            pos = best_at + best_len;
        }
        return segments;
    }

    static std::string pair_key(const std::string& a, const std::string& b) {
        return a + '\x01' + b;
    }

    void register_reserved(const std::string& sep = kDefaultDelimiter,
                           const std::string& pad = kDefaultPadding,
                           const std::string& unk = kDefaultUnknown) {
        delimiter_id_ = add_unit(sep);
        padding_id_ = add_unit(pad);
        unknown_id_ = add_unit(unk);
    }

    int add_unit(const std::string& unit) {
        auto it = unit_to_id_.find(unit);
        if (it != unit_to_id_.end()) return it->second;
        int id = static_cast<int>(id_to_unit_.size());
        id_to_unit_.push_back(unit);
        unit_to_id_.emplace(unit, id);
        return id;
    }

    void push_merge(const MergeRule& rule) {
        merge_rank_.emplace(pair_key(rule.left, rule.right), merges_.size());
        merges_.push_back(rule);
        add_unit(rule.left + rule.right);
    }

    std::vector<std::string> id_to_unit_;
    std::unordered_map<std::string, int> unit_to_id_;
    std::vector<std::string> alphabet_;
    std::vector<MergeRule> merges_;
    std::unordered_map<std::string, std::size_t> merge_rank_;
    int delimiter_id_ = -1;
    int padding_id_ = -1;
    int unknown_id_ = -1;
};

} // namespace nbest::bpe
