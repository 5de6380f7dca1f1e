#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "execfilter/blocks/enumerate.hpp"
#include "execfilter/blocks/interp.hpp"
#include "execfilter/corpus.hpp"
#include "execfilter/error.hpp"
#include "execfilter/lexicon.hpp"

namespace execfilter {

// Stand-in for a learned decoder: given a beam size and the expected token
// set A(x), yields the beam-size best candidate programs.
using CandidateGenerator = std::function<std::vector<blocks::BlocksProgram>(
    std::size_t beam, std::uint64_t a_mask)>;

struct SearchConfig {
    std::size_t initial_beam = 64;
    int max_doublings = 5;
    int max_depth = 5;  // grammar depth for the default enumerator
    CandidateGenerator generator;  // empty: ranked enumeration over the grammar

    void validate() const {
        if (initial_beam < 1) throw ConfigError("initial_beam must be >= 1");
        if (max_doublings < 0) throw ConfigError("max_doublings must be >= 0");
        if (max_depth < 2) throw ConfigError("max_depth must be >= 2");
    }
};

// Deterministic candidate ranking: depth first, then how much of A(x) the
// program covers, then canonical text. The first b programs of this order
// play the role of a beam of size b, and the order is fixed per A(x), so a
// bigger beam is always a superset.
inline CandidateGenerator make_ranked_enumerator(int max_depth) {
    return [max_depth](std::size_t beam,
                       std::uint64_t a_mask) -> std::vector<blocks::BlocksProgram> {
        const auto& entries = blocks::cached_enumeration(max_depth);
        std::vector<std::uint32_t> order(entries.size());
        std::iota(order.begin(), order.end(), 0);
        auto covered = [&](std::uint32_t i) {
            return std::popcount(a_mask & entries[i].tokens);
        };
        auto better = [&](std::uint32_t x, std::uint32_t y) {
            if (entries[x].depth != entries[y].depth)
                return entries[x].depth < entries[y].depth;
            int cx = covered(x), cy = covered(y);
            if (cx != cy) return cx > cy;
            return entries[x].text < entries[y].text;
        };
        std::size_t take = std::min(beam, order.size());
        std::partial_sort(order.begin(),
                          order.begin() + static_cast<std::ptrdiff_t>(take),
                          order.end(), better);
        std::vector<blocks::BlocksProgram> out;
        out.reserve(take);
        for (std::size_t i = 0; i < take; ++i) {
            const auto& e = entries[order[i]];
            out.push_back(blocks::BlocksProgram{e.root, e.text});
        }
        return out;
    };
}

// Keeps the candidates that reproduce every denotation of the example, one
// pool entry per distinct text, weighted by lexicon recall against a_mask.
inline ProgramPool consistent_pool(const std::vector<blocks::BlocksProgram>& candidates,
                                   const Example& ex, std::uint64_t a_mask) {
    for (const auto& w : ex.worlds)
        if (w.kind != Domain::Blocks)
            throw DomainMismatchError("consistent_pool: non-blocks world '" +
                                      w.world_id + "'");
    if (ex.denotations.size() != ex.worlds.size())
        throw ConfigError("consistent_pool: denotation count mismatch on '" +
                          ex.id + "'");
    std::vector<blocks::ExecContext> contexts;
    contexts.reserve(ex.worlds.size());
    for (const auto& w : ex.worlds) contexts.emplace_back(*w.blocks_world);

    ProgramPool pool;
    pool.example_id = ex.id;
    std::set<std::string> seen;
    for (const auto& z : candidates) {
        if (!seen.insert(z.text).second) continue;
        bool ok = true;
        for (std::size_t j = 0; j < contexts.size() && ok; ++j)
            ok = denotation_equal(blocks::exec_blocks(z, contexts[j]),
                                  ex.denotations[j]);
        if (ok)
            pool.entries.push_back(PoolEntry{z.text, lexicon_recall(a_mask, z), {}});
    }
    return pool;
}

// Beam doubling: rebuild the consistent pool at beam sizes b, 2b, 4b, ...
// until some entry covers all of A(x) or the doubling budget runs out. The
// final pool is returned either way, possibly empty.
inline ProgramPool search_pool(const Example& ex, const SearchConfig& cfg,
                               const Lexicon& lexicon) {
    cfg.validate();
    CandidateGenerator gen =
        cfg.generator ? cfg.generator : make_ranked_enumerator(cfg.max_depth);
    const std::uint64_t a_mask = lexicon.triggered_tokens(ex.utterance);
    ProgramPool pool;
    for (int t = 0;; ++t) {
        std::size_t beam = cfg.initial_beam << t;
        pool = consistent_pool(gen(beam, a_mask), ex, a_mask);
        bool covered = std::any_of(pool.entries.begin(), pool.entries.end(),
                                   [](const PoolEntry& e) { return e.weight == 1.0; });
        if (covered || t == cfg.max_doublings) break;
    }
    return pool;
}

}  // namespace execfilter
