#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "execfilter/corpus.hpp"
#include "execfilter/error.hpp"

namespace execfilter {

// Lowercases and splits on whitespace and punctuation; punctuation is
// dropped, alphanumeric runs survive. Pre-tokenized corpus text passes
// through unchanged apart from case.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char raw : text) {
        auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace detail {

// Modified n-gram precision: candidate n-gram counts clipped by reference
// counts. Returns {clipped matches, candidate n-gram total}.
inline std::pair<std::size_t, std::size_t> clipped_ngram_counts(
    const std::vector<std::string>& candidate,
    const std::vector<std::string>& reference, std::size_t n) {
    auto grams = [n](const std::vector<std::string>& toks) {
        std::map<std::vector<std::string>, std::size_t> counts;
        if (toks.size() >= n)
            for (std::size_t i = 0; i + n <= toks.size(); ++i)
                counts[{toks.begin() + static_cast<std::ptrdiff_t>(i),
                        toks.begin() + static_cast<std::ptrdiff_t>(i + n)}]++;
        return counts;
    };
    auto cand = grams(candidate);
    auto ref = grams(reference);
    std::size_t matched = 0, total = 0;
    for (const auto& [gram, count] : cand) {
        total += count;
        auto it = ref.find(gram);
        if (it != ref.end()) matched += std::min(count, it->second);
    }
    return {matched, total};
}

}  // namespace detail

// Sentence BLEU with uniform quarter weights over n = 1..4. A zero unigram
// precision zeroes the whole score; higher-order zero precisions are floored
// at 1e-9 so near misses still rank. The brevity penalty only punishes
// candidates shorter than the reference.
inline double sentence_bleu(const std::vector<std::string>& candidate,
                            const std::vector<std::string>& reference) {
    if (candidate.empty()) throw EmptyInputError("sentence_bleu: empty candidate");
    constexpr double kEps = 1e-9;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        auto [matched, total] = detail::clipped_ngram_counts(candidate, reference, n);
        double p = total == 0 ? 0.0
                              : static_cast<double>(matched) / static_cast<double>(total);
        if (p == 0.0) {
            if (n == 1) return 0.0;
            p = kEps;
        }
        log_sum += 0.25 * std::log(p);
    }
    double bp = 1.0;
    if (candidate.size() < reference.size())
        bp = std::exp(1.0 - static_cast<double>(reference.size()) /
                                static_cast<double>(candidate.size()));
    double score = bp * std::exp(log_sum);
    return std::clamp(score, 0.0, 1.0);
}

// Searchable view of a training set: one entry per example, worlds attached.
struct IndexEntry {
    std::string example_id;
    std::vector<std::string> tokens;
    std::vector<WorldRef> worlds;
};

struct UtteranceIndex {
    std::vector<IndexEntry> entries;
};

inline UtteranceIndex build_index(const std::vector<Example>& corpus) {
    UtteranceIndex index;
    std::map<std::string, bool> seen;
    for (const auto& ex : corpus) {
        if (!seen.emplace(ex.id, true).second)
            throw ParseError("build_index: duplicate example id '" + ex.id + "'");
        index.entries.push_back(IndexEntry{ex.id, ex.utterance, ex.worlds});
    }
    return index;
}

// Worlds of the top_k_utterances most similar training utterances, in rank
// order. The retrieved utterance is the BLEU candidate and the query is the
// reference, so short retrieved utterances pay the brevity penalty. Ties
// break by example id, which makes result(k) a prefix of result(k+1).
inline std::vector<WorldRef> retrieve_worlds(const std::vector<std::string>& x,
                                             const UtteranceIndex& index,
                                             std::size_t top_k_utterances = 20,
                                             const std::string& exclude_id = "") {
    struct Ranked {
        double score;
        const IndexEntry* entry;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(index.entries.size());
    for (const auto& entry : index.entries) {
        if (!exclude_id.empty() && entry.example_id == exclude_id) continue;
        if (entry.tokens.empty()) continue;
        ranked.push_back(Ranked{sentence_bleu(entry.tokens, x), &entry});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entry->example_id < b.entry->example_id;
    });
    std::vector<WorldRef> worlds;
    std::size_t take = std::min(top_k_utterances, ranked.size());
    for (std::size_t i = 0; i < take; ++i)
        for (const auto& w : ranked[i].entry->worlds) worlds.push_back(w);
    return worlds;
}

inline std::vector<WorldRef> retrieve_worlds(const Example& query,
                                             const UtteranceIndex& index,
                                             std::size_t top_k_utterances = 20) {
    return retrieve_worlds(query.utterance, index, top_k_utterances, query.id);
}

}  // namespace execfilter
