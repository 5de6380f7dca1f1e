#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "execfilter/blocks/program.hpp"
#include "execfilter/error.hpp"
#include "execfilter/retrieval.hpp"

namespace execfilter {

// One line of the lexicon: when the trigger phrase occurs contiguously in an
// utterance, its program tokens are expected in the target program.
struct LexiconRule {
    std::vector<std::string> trigger;
    std::uint64_t tokens = 0;
};

struct Lexicon {
    std::vector<LexiconRule> rules;

    // A(x): union of token sets whose trigger occurs in the utterance.
    std::uint64_t triggered_tokens(const std::vector<std::string>& utterance) const {
        std::vector<std::string> low;
        low.reserve(utterance.size());
        for (const auto& t : utterance) {
            std::string s = t;
            for (auto& c : s)
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            low.push_back(std::move(s));
        }
        std::uint64_t mask = 0;
        for (const auto& rule : rules) {
            if (rule.trigger.size() > low.size()) continue;
            for (std::size_t i = 0; i + rule.trigger.size() <= low.size(); ++i) {
                bool hit = true;
                for (std::size_t j = 0; j < rule.trigger.size(); ++j)
                    if (low[i + j] != rule.trigger[j]) {
                        hit = false;
                        break;
                    }
                if (hit) {
                    mask |= rule.tokens;
                    break;
                }
            }
        }
        return mask;
    }
};

// Line format: `trigger phrase TAB token1,token2,...`. Blank lines and #
// comments are skipped. Program tokens must name registry entries.
inline Lexicon parse_lexicon(std::istream& in, const std::string& origin = "lexicon") {
    Lexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto where = origin + ":" + std::to_string(lineno);
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError(where + ": expected TAB between trigger and tokens");
        LexiconRule rule;
        rule.trigger = tokenize(line.substr(0, tab));
        if (rule.trigger.empty())
            throw ParseError(where + ": empty trigger phrase");
        std::stringstream right(line.substr(tab + 1));
        std::string tok;
        bool any = false;
        while (std::getline(right, tok, ',')) {
            if (tok.empty()) continue;
            int id = blocks::token_id(tok);
            if (id < 0) throw ParseError(where + ": unknown program token '" + tok + "'");
            rule.tokens |= 1ULL << id;
            any = true;
        }
        if (!any) throw ParseError(where + ": no program tokens");
        lex.rules.push_back(std::move(rule));
    }
    return lex;
}

inline Lexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon: " + path);
    return parse_lexicon(in, path);
}

// R(A, z) = |A ∩ tokens(z)| / |A|, vacuously 1 when A is empty.
inline double lexicon_recall(std::uint64_t a_mask, std::uint64_t program_tokens) {
    if (a_mask == 0) return 1.0;
    return static_cast<double>(std::popcount(a_mask & program_tokens)) /
           static_cast<double>(std::popcount(a_mask));
}

inline double lexicon_recall(std::uint64_t a_mask, const blocks::BlocksProgram& z) {
    return lexicon_recall(a_mask, blocks::token_mask(z.root));
}

}  // namespace execfilter
