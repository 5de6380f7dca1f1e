#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "execfilter/corpus.hpp"
#include "execfilter/denotation.hpp"
#include "execfilter/error.hpp"
#include "execfilter/representation.hpp"

namespace execfilter {

enum class VoteType : std::uint8_t { Hard, Soft };
enum class WeightSource : std::uint8_t { Uniform, PoolWeights };

inline const char* to_string(VoteType v) {
    return v == VoteType::Hard ? "hard" : "soft";
}

struct VoteConfig {
    VoteType vote_type = VoteType::Hard;
    WeightSource weight_source = WeightSource::Uniform;
    double tau = 0.8;
    // when false, error denotations lose centroid eligibility unless a column
    // holds nothing else
    bool errors_in_centroid = true;

    void validate() const {
        if (!(tau >= 0.0 && tau <= 1.0))
            throw ConfigError("vote threshold must lie in [0, 1]");
    }
};

// Scores attached back to the pool they were computed from. Hard vote keeps
// entries whose raw agreement fraction reaches tau; soft vote keeps entries
// whose max-normalized score does. normalized_scores peaks at exactly 1 for
// both, so downstream consumers can rely on a common scale.
struct ScoredPool {
    ProgramPool pool;
    std::optional<ProgramRepresentation> centroid;  // hard vote only
    std::vector<double> raw_scores;
    std::vector<double> normalized_scores;
    std::vector<bool> kept;
};

namespace detail {

// Per-column agreement structure: rows grouped by denotation_equal, groups
// in first-occurrence order. best_weight/best_index identify the strongest
// single holder for argmax tie-breaking.
struct ValueGroup {
    const Denotation* repr;
    double mass = 0.0;
    double best_weight = 0.0;
    std::size_t best_index = 0;
};

struct ColumnGroups {
    std::vector<ValueGroup> groups;
    std::vector<std::size_t> assign;  // row -> group id
};

inline ColumnGroups group_column(const RepresentationMatrix& m, std::size_t j,
                                 const std::vector<double>& weights) {
    ColumnGroups cg;
    cg.assign.resize(m.reps.size());
    for (std::size_t i = 0; i < m.reps.size(); ++i) {
        const Denotation& d = m.reps[i].entries[j];
        std::size_t g = cg.groups.size();
        for (std::size_t x = 0; x < cg.groups.size(); ++x) {
            if (denotation_equal(*cg.groups[x].repr, d)) {
                g = x;
                break;
            }
        }
        if (g == cg.groups.size())
            cg.groups.push_back(ValueGroup{&d, 0.0, weights[i], i});
        cg.assign[i] = g;
        ValueGroup& vg = cg.groups[g];
        vg.mass += weights[i];
        if (weights[i] > vg.best_weight) {
            vg.best_weight = weights[i];
            vg.best_index = i;
        }
    }
    return cg;
}

inline std::vector<double> resolve_weights(const RepresentationMatrix& m,
                                           bool use_weights) {
    if (use_weights) return m.weights;
    return std::vector<double>(m.reps.size(), 1.0);
}

}  // namespace detail

// Column-wise weighted majority value. Ties go to the value held by the
// heaviest single program, then to the holder with the lowest index.
inline ProgramRepresentation hard_centroid(const RepresentationMatrix& m,
                                           bool use_weights,
                                           bool errors_in_centroid = true) {
    if (m.reps.empty()) throw EmptyInputError("hard_centroid: empty matrix");
    std::vector<double> weights = detail::resolve_weights(m, use_weights);
    ProgramRepresentation centroid;
    centroid.index = 0;
    for (std::size_t j = 0; j < m.num_worlds(); ++j) {
        detail::ColumnGroups cg = detail::group_column(m, j, weights);
        const detail::ValueGroup* best = nullptr;
        bool errors_eligible = errors_in_centroid;
        if (!errors_eligible) {
            bool any_value = false;
            for (const auto& g : cg.groups)
                if (!g.repr->is_error()) any_value = true;
            if (!any_value) errors_eligible = true;  // nothing else to elect
        }
        for (const auto& g : cg.groups) {
            if (!errors_eligible && g.repr->is_error()) continue;
            if (!best || g.mass > best->mass ||
                (g.mass == best->mass &&
                 (g.best_weight > best->best_weight ||
                  (g.best_weight == best->best_weight &&
                   g.best_index < best->best_index))))
                best = &g;
        }
        centroid.entries.push_back(*best->repr);
    }
    return centroid;
}

// Fraction of worlds on which a row matches the centroid.
inline std::vector<double> hard_scores(const RepresentationMatrix& m,
                                       const ProgramRepresentation& centroid) {
    if (centroid.entries.size() != m.num_worlds())
        throw EmptyInputError("hard_scores: centroid length mismatch");
    std::vector<double> scores;
    scores.reserve(m.reps.size());
    const double n = static_cast<double>(m.num_worlds());
    for (const auto& rep : m.reps) {
        std::size_t agree = 0;
        for (std::size_t j = 0; j < m.num_worlds(); ++j)
            if (denotation_equal(rep.entries[j], centroid.entries[j])) ++agree;
        scores.push_back(static_cast<double>(agree) / n);
    }
    return scores;
}

// Pairwise agreement mass summed over worlds, self-agreement included: each
// row collects the total weight of its value group in every column.
inline std::vector<double> soft_scores(const RepresentationMatrix& m,
                                       bool use_weights) {
    if (m.reps.empty()) throw EmptyInputError("soft_scores: empty matrix");
    std::vector<double> weights = detail::resolve_weights(m, use_weights);
    std::vector<double> scores(m.reps.size(), 0.0);
    for (std::size_t j = 0; j < m.num_worlds(); ++j) {
        detail::ColumnGroups cg = detail::group_column(m, j, weights);
        for (std::size_t i = 0; i < m.reps.size(); ++i)
            scores[i] += cg.groups[cg.assign[i]].mass;
    }
    return scores;
}

// Divides by the maximum and thresholds; the max scorer always survives
// because its normalized score is exactly 1.
inline std::pair<std::vector<double>, std::vector<bool>> normalize_and_filter(
    const std::vector<double>& raw, double tau) {
    if (raw.empty()) throw EmptyInputError("normalize_and_filter: no scores");
    double mx = *std::max_element(raw.begin(), raw.end());
    if (!(mx > 0.0))
        throw DegenerateScoresError("normalize_and_filter: max score is not positive");
    std::vector<double> normalized;
    std::vector<bool> kept;
    normalized.reserve(raw.size());
    kept.reserve(raw.size());
    for (double r : raw) {
        double s = r / mx;
        normalized.push_back(s);
        kept.push_back(s >= tau);
    }
    return {std::move(normalized), std::move(kept)};
}

// Full vote pipeline. Hard scores are agreement fractions already on [0, 1],
// so they face tau directly; when even the best row falls short, the top
// scorers are kept anyway so the pool never empties. Soft scores are
// max-normalized before thresholding.
inline ScoredPool filter_pool(const ProgramPool& pool, const RepresentationMatrix& m,
                              const VoteConfig& cfg) {
    cfg.validate();
    if (m.reps.size() != pool.entries.size())
        throw ConfigError("filter_pool: matrix was not built from this pool");
    if (pool.entries.empty()) throw EmptyInputError("filter_pool: empty pool");
    const bool use_weights = cfg.weight_source == WeightSource::PoolWeights;

    ScoredPool out;
    out.pool = pool;
    if (cfg.vote_type == VoteType::Hard) {
        out.centroid = hard_centroid(m, use_weights, cfg.errors_in_centroid);
        out.raw_scores = hard_scores(m, *out.centroid);
        double mx = *std::max_element(out.raw_scores.begin(), out.raw_scores.end());
        out.normalized_scores.reserve(out.raw_scores.size());
        out.kept.reserve(out.raw_scores.size());
        for (double r : out.raw_scores) {
            out.normalized_scores.push_back(mx > 0.0 ? r / mx : 1.0);
            out.kept.push_back(r >= cfg.tau);
        }
        if (std::none_of(out.kept.begin(), out.kept.end(), [](bool b) { return b; }))
            for (std::size_t i = 0; i < out.raw_scores.size(); ++i)
                if (out.raw_scores[i] == mx) out.kept[i] = true;
    } else {
        out.raw_scores = soft_scores(m, use_weights);
        auto [normalized, kept] = normalize_and_filter(out.raw_scores, cfg.tau);
        out.normalized_scores = std::move(normalized);
        out.kept = std::move(kept);
    }
    return out;
}

inline ProgramPool surviving_pool(const ScoredPool& sp) {
    ProgramPool out;
    out.example_id = sp.pool.example_id;
    for (std::size_t i = 0; i < sp.pool.entries.size(); ++i)
        if (sp.kept[i]) out.entries.push_back(sp.pool.entries[i]);
    return out;
}

// ---- JSONL I/O ----
//
// One line per entry: example_id, program, weight, raw_score,
// normalized_score, kept. Entry aux metadata rides along under "aux" so
// upstream annotations (e.g. ground-truth labels) survive filtering.

inline nlohmann::json scored_entry_json(const ScoredPool& sp, std::size_t i) {
    const PoolEntry& e = sp.pool.entries[i];
    nlohmann::json j{{"example_id", sp.pool.example_id},
                     {"program", e.program},
                     {"weight", e.weight},
                     {"raw_score", sp.raw_scores[i]},
                     {"normalized_score", sp.normalized_scores[i]},
                     {"kept", static_cast<bool>(sp.kept[i])}};
    if (!e.aux.is_null() && !(e.aux.is_object() && e.aux.empty())) j["aux"] = e.aux;
    return j;
}

inline void write_scored_pools(const std::string& path,
                               const std::vector<ScoredPool>& pools,
                               const std::string& header = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (!header.empty()) out << "# " << header << "\n";
    for (const auto& sp : pools)
        for (std::size_t i = 0; i < sp.pool.entries.size(); ++i)
            out << scored_entry_json(sp, i).dump() << "\n";
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<ScoredPool> read_scored_pools(const std::string& path) {
    std::vector<ScoredPool> pools;
    std::map<std::string, std::size_t> by_id;
    detail::for_each_jsonl_line(path, [&](const nlohmann::json& j) {
        try {
            std::string id = j.at("example_id").get<std::string>();
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                it = by_id.emplace(id, pools.size()).first;
                pools.push_back(ScoredPool{});
                pools.back().pool.example_id = id;
            }
            ScoredPool& sp = pools[it->second];
            PoolEntry e;
            e.program = j.at("program").get<std::string>();
            e.weight = j.value("weight", 1.0);
            if (j.contains("aux")) e.aux = j.at("aux");
            e.validate();
            sp.pool.entries.push_back(std::move(e));
            sp.raw_scores.push_back(j.at("raw_score").get<double>());
            sp.normalized_scores.push_back(j.at("normalized_score").get<double>());
            sp.kept.push_back(j.at("kept").get<bool>());
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(path + ": bad scored pool line: " + ex.what());
        }
    });
    return pools;
}

}  // namespace execfilter
