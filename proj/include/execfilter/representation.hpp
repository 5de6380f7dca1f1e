#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "execfilter/blocks/interp.hpp"
#include "execfilter/blocks/program.hpp"
#include "execfilter/corpus.hpp"
#include "execfilter/denotation.hpp"
#include "execfilter/error.hpp"
#include "execfilter/table/interp.hpp"
#include "execfilter/table/program.hpp"
#include "execfilter/table/replace.hpp"

namespace execfilter {

// A program parsed into whichever domain's grammar accepts it. The grammars
// share no head symbols, so at most one parse succeeds.
struct ParsedProgram {
    Domain domain = Domain::Blocks;
    std::variant<blocks::BlocksProgram, table::TableProgram> ast;
};

inline ParsedProgram parse_program(const std::string& text) {
    try {
        return ParsedProgram{Domain::Blocks, blocks::parse_blocks(text)};
    } catch (const Error&) {
    }
    return ParsedProgram{Domain::Table, table::parse_table_program(text)};
}

inline Denotation exec_on(const ParsedProgram& p, const WorldRef& w) {
    if (p.domain != w.kind)
        throw DomainMismatchError(
            std::string("program domain does not match world kind '") +
            to_string(w.kind) + "' for world '" + w.world_id + "'");
    if (p.domain == Domain::Blocks)
        return blocks::exec_blocks(std::get<blocks::BlocksProgram>(p.ast),
                                   *w.blocks_world);
    return table::exec_table(std::get<table::TableProgram>(p.ast), *w.table_world);
}

// Row i holds one program's execution results across all collected worlds,
// in world order. Error results are ordinary entries: they carry vote weight
// like any other value.
struct ProgramRepresentation {
    std::size_t index = 0;
    std::vector<Denotation> entries;
};

struct RepresentationMatrix {
    std::vector<WorldRef> worlds;
    std::vector<ProgramRepresentation> reps;
    std::vector<double> weights;

    std::size_t num_programs() const { return reps.size(); }
    std::size_t num_worlds() const { return worlds.size(); }
};

inline RepresentationMatrix build_matrix(const ProgramPool& pool,
                                         const std::vector<WorldRef>& worlds) {
    if (worlds.empty()) throw EmptyInputError("build_matrix: no worlds");
    if (pool.entries.empty()) throw EmptyInputError("build_matrix: empty pool");
    RepresentationMatrix m;
    m.worlds = worlds;
    m.reps.reserve(pool.entries.size());
    m.weights.reserve(pool.entries.size());
    for (std::size_t i = 0; i < pool.entries.size(); ++i) {
        ParsedProgram p = parse_program(pool.entries[i].program);
        ProgramRepresentation rep;
        rep.index = i;
        rep.entries.reserve(worlds.size());
        for (const auto& w : worlds) rep.entries.push_back(exec_on(p, w));
        m.reps.push_back(std::move(rep));
        m.weights.push_back(pool.entries[i].weight);
    }
    return m;
}

// Table variant: world j pairs the j-th collected table with the pool whose
// names were rewritten for it, so cell (i, j) executes the rewritten program
// i on table j. Weights still come from the original pool.
inline RepresentationMatrix build_matrix_collected(
    const ProgramPool& pool, const table::CollectResult& collected) {
    if (collected.collected.empty())
        throw EmptyInputError("build_matrix_collected: no collected tables");
    if (pool.entries.empty())
        throw EmptyInputError("build_matrix_collected: empty pool");
    RepresentationMatrix m;
    const std::size_t k = pool.entries.size();
    const std::size_t n = collected.collected.size();
    std::vector<std::vector<table::TableProgram>> parsed(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& ct = collected.collected[j];
        if (ct.pool.entries.size() != k)
            throw DomainMismatchError(
                "build_matrix_collected: rewritten pool size mismatch on table '" +
                ct.table->table_id + "'");
        m.worlds.push_back(WorldRef{ct.table->table_id, Domain::Table, nullptr,
                                    ct.table});
        parsed[j].reserve(k);
        for (const auto& e : ct.pool.entries)
            parsed[j].push_back(table::parse_table_program(e.program));
    }
    for (std::size_t i = 0; i < k; ++i) {
        ProgramRepresentation rep;
        rep.index = i;
        rep.entries.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            rep.entries.push_back(
                table::exec_table(parsed[j][i], *collected.collected[j].table));
        m.reps.push_back(std::move(rep));
        m.weights.push_back(pool.entries[i].weight);
    }
    return m;
}

}  // namespace execfilter
