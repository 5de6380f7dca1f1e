#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "execfilter/corpus.hpp"
#include "execfilter/error.hpp"
#include "execfilter/rng.hpp"
#include "execfilter/table/interp.hpp"
#include "execfilter/table/program.hpp"
#include "execfilter/table/table.hpp"

namespace execfilter::table {

// Counts per column type: the C_Z / C_w dictionaries and the S/T multisets
// of the table-ranking score.
struct TypeCount {
    int counts[3] = {0, 0, 0};

    int& operator[](CType c) { return counts[static_cast<int>(c)]; }
    int operator[](CType c) const { return counts[static_cast<int>(c)]; }
    int total() const { return counts[0] + counts[1] + counts[2]; }

    friend bool operator==(const TypeCount& a, const TypeCount& b) {
        return a.counts[0] == b.counts[0] && a.counts[1] == b.counts[1] &&
               a.counts[2] == b.counts[2];
    }
};

inline constexpr CType kAllCTypes[] = {CType::String, CType::Number, CType::Date};

// True when the table offers at least as many names of every type as the
// pool uses: a replacement map can exist.
inline bool qualifies(const TypeCount& c_z, const TypeCount& c_w) {
    for (CType c : kAllCTypes) {
        if (c_w[c] < c_z[c]) return false;
    }
    return true;
}

// Multiset overlap of S in T, normalized by |S|.
inline double table_score(const TypeCount& s, const TypeCount& t) {
    if (s.total() == 0) throw EmptyInputError("table score of an empty type multiset");
    int hit = 0;
    for (CType c : kAllCTypes) hit += std::min(s[c], t[c]);
    return static_cast<double>(hit) / static_cast<double>(s.total());
}

// Every distinct column and entity name occurring in a pool, with the column
// types inferred from how the programs use them.
struct NameSet {
    std::map<std::string, CType> columns;   // column name → inferred ctype
    std::map<std::string, CType> entities;  // canonical literal token → ctype

    TypeCount pooled_counts() const {  // C_Z
        TypeCount c;
        for (const auto& [name, ty] : columns) c[ty] += 1;
        for (const auto& [tok, ty] : entities) c[ty] += 1;
        return c;
    }

    TypeCount column_counts() const {  // the ranking multiset S
        TypeCount c;
        for (const auto& [name, ty] : columns) c[ty] += 1;
        return c;
    }
};

namespace detail {

inline CType lexical_ctype(const Literal& lit) {
    switch (lit.kind) {
        case Literal::Kind::Str: return CType::String;
        case Literal::Kind::Num: return CType::Number;
        case Literal::Kind::Date: return CType::Date;
    }
    return CType::String;
}

// Per-column inference state: a hard type from literal comparisons plus a
// soft orderedness demand from argmax/argmin, reconciled at the end.
struct ColumnConstraint {
    std::optional<CType> hard;
    bool needs_ordered = false;
    bool needs_number = false;  // aggregated via sum/max/min

    void set_hard(CType t, const std::string& name) {
        if (hard && *hard != t)
            throw TypeCheckError("column '" + name + "' used as both " +
                                 std::string(to_string(*hard)) + " and " + to_string(t));
        hard = t;
    }

    CType resolve(const std::string& name) const {
        if (needs_number) {
            if (hard && *hard != CType::Number)
                throw TypeCheckError("column '" + name + "' aggregated numerically but typed " +
                                     to_string(*hard));
            return CType::Number;
        }
        if (hard) {
            if (needs_ordered && *hard == CType::String)
                throw TypeCheckError("column '" + name + "' ordered but typed string");
            return *hard;
        }
        return needs_ordered ? CType::Number : CType::String;
    }
};

struct Extraction {
    std::map<std::string, ColumnConstraint> columns;
    // literal token → (lexical type, columns it tethers to)
    std::map<std::string, std::vector<std::string>> entity_columns;
    std::map<std::string, CType> entity_lexical;

    void walk(const TExpr& e, bool value_is_aggregated) {
        switch (e->kind) {
            case TNodeKind::AllRows: return;
            case TNodeKind::Filter: {
                auto& cc = columns[e->column];
                cc.set_hard(lexical_ctype(e->lit), e->column);
                if (e->fop != FilterOp::Eq) cc.needs_ordered = true;
                auto tok = e->lit.token();
                entity_columns[tok].push_back(e->column);
                auto it = entity_lexical.find(tok);
                if (it == entity_lexical.end())
                    entity_lexical.emplace(tok, lexical_ctype(e->lit));
                else if (it->second != lexical_ctype(e->lit))
                    throw TypeCheckError("entity '" + tok + "' used with two lexical types");
                walk(e->child, false);
                return;
            }
            case TNodeKind::Select: {
                auto& cc = columns[e->column];
                if (value_is_aggregated) cc.needs_number = true;
                walk(e->child, false);
                return;
            }
            case TNodeKind::Count: walk(e->child, false); return;
            case TNodeKind::Agg: walk(e->child, true); return;
            case TNodeKind::ArgMinMax: {
                columns[e->column].needs_ordered = true;
                walk(e->child, false);
                return;
            }
            case TNodeKind::FirstLast: walk(e->child, false); return;
        }
    }
};

}  // namespace detail

inline NameSet extract_names(const std::vector<TableProgram>& programs) {
    detail::Extraction ex;
    for (const auto& p : programs) ex.walk(p.root, false);
    NameSet out;
    for (const auto& [name, cc] : ex.columns) out.columns.emplace(name, cc.resolve(name));
    for (const auto& [tok, cols] : ex.entity_columns) {
        // an entity's type follows the column it is compared against
        CType resolved = out.columns.at(cols.front());
        for (const auto& c : cols) {
            if (out.columns.at(c) != resolved)
                throw TypeCheckError("entity '" + tok + "' tethered to columns of two types");
        }
        out.entities.emplace(tok, resolved);
    }
    return out;
}

inline std::vector<TableProgram> parse_pool_programs(const ProgramPool& pool) {
    std::vector<TableProgram> out;
    out.reserve(pool.entries.size());
    for (const auto& e : pool.entries) out.push_back(parse_table_program(e.program));
    return out;
}

inline NameSet extract_names(const ProgramPool& pool) {
    return extract_names(parse_pool_programs(pool));
}

// C_w: distinct column names plus distinct non-blank cell values, counted
// per type. Columns and cell values are separate namespaces.
inline TypeCount table_name_counts(const Table& t) {
    TypeCount c;
    for (const auto& col : t.columns) c[col.ctype] += 1;
    std::set<std::string> seen[3];
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& cell = row[i];
            if (cell.is_blank()) continue;
            CType ty = t.columns[i].ctype;
            std::string key;
            if (cell.is_str())
                key = cell.as_str();
            else if (cell.is_num())
                key = Literal::make_num(cell.as_num()).token();
            else
                key = cell.as_date().iso();
            seen[static_cast<int>(ty)].insert(std::move(key));
        }
    }
    for (CType ty : kAllCTypes) c[ty] += static_cast<int>(seen[static_cast<int>(ty)].size());
    return c;
}

namespace detail {

struct TargetNames {
    std::vector<std::string> columns[3];  // per ctype, sorted
    std::vector<Cell> values[3];          // distinct cells per ctype, sorted by token
};

inline std::string cell_token(const Cell& cell) {
    if (cell.is_str()) return Literal::make_str(cell.as_str()).token();
    if (cell.is_num()) return Literal::make_num(cell.as_num()).token();
    return Literal::make_date(cell.as_date()).token();
}

inline TargetNames target_names(const Table& t) {
    TargetNames out;
    for (const auto& col : t.columns)
        out.columns[static_cast<int>(col.ctype)].push_back(col.name);
    std::map<std::string, Cell> distinct[3];
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i].is_blank()) continue;
            distinct[static_cast<int>(t.columns[i].ctype)].emplace(cell_token(row[i]),
                                                                   row[i]);
        }
    }
    for (int k = 0; k < 3; ++k) {
        std::sort(out.columns[k].begin(), out.columns[k].end());
        for (auto& [tok, cell] : distinct[k]) out.values[k].push_back(cell);
    }
    return out;
}

// The pooled C_Z ≥ check can pass while one kind alone (columns or entities)
// outnumbers its target supply; such tables cannot host an injective map.
inline bool kinds_feasible(const NameSet& names, const TargetNames& target) {
    int need_cols[3] = {0, 0, 0}, need_ents[3] = {0, 0, 0};
    for (const auto& [n, ty] : names.columns) need_cols[static_cast<int>(ty)] += 1;
    for (const auto& [n, ty] : names.entities) need_ents[static_cast<int>(ty)] += 1;
    for (int k = 0; k < 3; ++k) {
        if (need_cols[k] > static_cast<int>(target.columns[k].size())) return false;
        if (need_ents[k] > static_cast<int>(target.values[k].size())) return false;
    }
    return true;
}

// Draw m distinct indices from [0, pool_size) in a deterministic order.
inline std::vector<std::size_t> sample_distinct(std::size_t pool_size, std::size_t m,
                                                Rng& rng) {
    std::vector<std::size_t> idx(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) idx[i] = i;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(pool_size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
}

struct ReplacementMap {
    std::map<std::string, std::string> column_map;  // source column → target column
    std::map<std::string, Literal> entity_map;      // source token → target literal
};

inline ReplacementMap sample_replacement(const NameSet& names, const TargetNames& target,
                                         Rng& rng) {
    ReplacementMap map;
    // fixed traversal order: ctype, then columns before entities, sources sorted
    for (CType ty : kAllCTypes) {
        int k = static_cast<int>(ty);
        std::vector<std::string> src_cols;
        for (const auto& [n, t] : names.columns) {
            if (t == ty) src_cols.push_back(n);
        }
        auto col_picks = sample_distinct(target.columns[k].size(), src_cols.size(), rng);
        for (std::size_t i = 0; i < src_cols.size(); ++i)
            map.column_map.emplace(src_cols[i], target.columns[k][col_picks[i]]);

        std::vector<std::string> src_ents;
        for (const auto& [n, t] : names.entities) {
            if (t == ty) src_ents.push_back(n);
        }
        auto val_picks = sample_distinct(target.values[k].size(), src_ents.size(), rng);
        for (std::size_t i = 0; i < src_ents.size(); ++i) {
            const Cell& cell = target.values[k][val_picks[i]];
            Literal lit;
            if (cell.is_str())
                lit = Literal::make_str(cell.as_str());
            else if (cell.is_num())
                lit = Literal::make_num(cell.as_num());
            else
                lit = Literal::make_date(cell.as_date());
            map.entity_map.emplace(src_ents[i], lit);
        }
    }
    return map;
}

inline TExpr apply_map(const TExpr& e, const ReplacementMap& map) {
    auto n = std::make_shared<TNode>(*e);
    if (e->kind == TNodeKind::Filter || e->kind == TNodeKind::Select ||
        e->kind == TNodeKind::ArgMinMax) {
        auto it = map.column_map.find(e->column);
        if (it != map.column_map.end()) n->column = it->second;
    }
    if (e->kind == TNodeKind::Filter) {
        auto it = map.entity_map.find(e->lit.token());
        if (it != map.entity_map.end()) n->lit = it->second;
    }
    if (e->child) n->child = apply_map(e->child, map);
    return n;
}

inline ProgramPool apply_replacement(const ProgramPool& pool,
                                     const std::vector<TableProgram>& programs,
                                     const ReplacementMap& map) {
    ProgramPool out;
    out.example_id = pool.example_id;
    out.entries = pool.entries;
    for (std::size_t i = 0; i < programs.size(); ++i) {
        TExpr replaced = apply_map(programs[i].root, map);
        out.entries[i].program = pretty_print(replaced);
    }
    return out;
}

}  // namespace detail

// Rewrite every program in the pool to speak the target table's vocabulary:
// one injective type-preserving name map, applied consistently everywhere.
inline ProgramPool replace_names(const ProgramPool& pool, const Table& target,
                                 std::uint64_t seed) {
    std::vector<TableProgram> programs = parse_pool_programs(pool);
    NameSet names = extract_names(programs);
    if (target.has_blanks())
        throw ReplacementInfeasibleError("target table " + target.table_id + " has blank cells");
    if (!qualifies(names.pooled_counts(), table_name_counts(target)))
        throw ReplacementInfeasibleError("target table " + target.table_id +
                                         " has fewer names than the pool needs");
    detail::TargetNames target_ns = detail::target_names(target);
    if (!detail::kinds_feasible(names, target_ns))
        throw ReplacementInfeasibleError("target table " + target.table_id +
                                         " cannot host an injective per-kind map");
    Rng rng(seed);
    return detail::apply_replacement(pool, programs,
                                     detail::sample_replacement(names, target_ns, rng));
}

struct CollectedTable {
    std::shared_ptr<const Table> table;
    ProgramPool pool;
    double score = 1.0;
    int attempts = 0;           // samples consumed for this table (1..max_resample+1)
    double err_fraction = 0.0;  // error rate of the accepted sample
};

struct CollectResult {
    std::vector<CollectedTable> collected;
    bool shortfall = false;
    // one entry per table the walk sampled on: (table_id, samples consumed,
    // accepted). Discarded tables consume max_resample+1 samples.
    struct Attempt {
        std::string table_id;
        int samples = 0;
        bool accepted = false;
    };
    std::vector<Attempt> attempts_log;
};

// §-style world collection for tables: rank qualifying tables, then walk the
// ranking sampling replacements until n tables pass the error-rate gate.
inline CollectResult collect_tables(const ProgramPool& pool, const std::vector<Table>& corpus,
                                    int n, int max_resample, double err_threshold,
                                    std::uint64_t seed) {
    if (n < 1) throw ConfigError("collect_tables needs n >= 1");
    if (max_resample < 0) throw ConfigError("max_resample must be nonnegative");
    if (err_threshold < 0 || err_threshold > 1)
        throw ConfigError("err_threshold must lie in [0,1]");

    std::vector<TableProgram> programs = parse_pool_programs(pool);
    NameSet names = extract_names(programs);
    TypeCount c_z = names.pooled_counts();
    TypeCount ranking_s = names.column_counts();

    struct Candidate {
        const Table* table;
        double score;
    };
    std::vector<Candidate> candidates;
    for (const auto& t : corpus) {
        if (t.has_blanks()) continue;
        if (!qualifies(c_z, table_name_counts(t))) continue;
        TypeCount t_cols;
        for (const auto& col : t.columns) t_cols[col.ctype] += 1;
        double score =
            ranking_s.total() == 0 ? 1.0 : table_score(ranking_s, t_cols);
        candidates.push_back(Candidate{&t, score});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.table->table_id < b.table->table_id;
                     });

    CollectResult result;
    Rng rng(seed);
    const double k = static_cast<double>(pool.entries.size());
    for (const auto& cand : candidates) {
        if (static_cast<int>(result.collected.size()) >= n) break;
        detail::TargetNames target_ns = detail::target_names(*cand.table);
        if (!detail::kinds_feasible(names, target_ns)) continue;  // no sample can exist
        CollectResult::Attempt log{cand.table->table_id, 0, false};
        for (int attempt = 1; attempt <= max_resample + 1; ++attempt) {
            log.samples = attempt;
            ProgramPool replaced = detail::apply_replacement(
                pool, programs, detail::sample_replacement(names, target_ns, rng));
            int errors = 0;
            for (const auto& entry : replaced.entries) {
                if (exec_table(parse_table_program(entry.program), *cand.table).is_error())
                    ++errors;
            }
            double err_fraction = k == 0 ? 0.0 : errors / k;
            if (err_fraction <= err_threshold) {
                log.accepted = true;
                CollectedTable ct;
                ct.table = std::make_shared<const Table>(*cand.table);
                ct.pool = std::move(replaced);
                ct.score = cand.score;
                ct.attempts = attempt;
                ct.err_fraction = err_fraction;
                result.collected.push_back(std::move(ct));
                break;
            }
        }
        result.attempts_log.push_back(std::move(log));
    }
    result.shortfall = static_cast<int>(result.collected.size()) < n;
    return result;
}

}  // namespace execfilter::table
