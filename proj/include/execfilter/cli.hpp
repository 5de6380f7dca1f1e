#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "execfilter/config.hpp"
#include "execfilter/corpus.hpp"
#include "execfilter/datagen.hpp"
#include "execfilter/error.hpp"
#include "execfilter/lexicon.hpp"
#include "execfilter/metrics.hpp"
#include "execfilter/parallel.hpp"
#include "execfilter/representation.hpp"
#include "execfilter/retrieval.hpp"
#include "execfilter/rng.hpp"
#include "execfilter/search.hpp"
#include "execfilter/table/replace.hpp"
#include "execfilter/vote.hpp"

namespace execfilter::cli {

namespace detail {

// keeps oracle probe worlds uncorrelated with the corpus sampler streams
constexpr std::uint64_t kOracleSeedSalt = 0x9e3779b97f4a7c15ull;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

inline std::string join_path(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
    if (!std::filesystem::is_directory(dir))
        throw IoError("not a directory: " + dir);
}

inline VoteConfig vote_config_from(const RunConfig& cfg) {
    VoteConfig v;
    v.vote_type = cfg.vote == "hard" ? VoteType::Hard : VoteType::Soft;
    v.weight_source = cfg.weights == "uniform" ? WeightSource::Uniform
                                               : WeightSource::PoolWeights;
    v.tau = cfg.tau;
    v.errors_in_centroid = cfg.errors_in_centroid;
    v.validate();
    return v;
}

inline SearchConfig search_config_from(const RunConfig& cfg) {
    SearchConfig s;
    s.initial_beam = static_cast<std::size_t>(cfg.initial_beam);
    s.max_doublings = cfg.max_doublings;
    s.max_depth = cfg.max_depth;
    s.validate();
    return s;
}

inline GenParams gen_params_from(const RunConfig& cfg) {
    GenParams p;
    p.seed = cfg.seed;
    p.num_examples = cfg.num_examples;
    p.worlds_per_example = cfg.worlds_per_example;
    p.min_boxes = cfg.min_boxes;
    p.max_boxes = cfg.max_boxes;
    p.max_objects_per_box = cfg.max_objects_per_box;
    p.min_gold_depth = cfg.min_gold_depth;
    p.max_gold_depth = cfg.max_gold_depth;
    p.validate();
    return p;
}

inline std::map<std::string, const ProgramPool*> pool_index(
    const std::vector<ProgramPool>& pools) {
    std::map<std::string, const ProgramPool*> by_id;
    for (const auto& p : pools) by_id[p.example_id] = &p;
    return by_id;
}

}  // namespace detail

// ---- generate: synthetic corpus, searched pools, oracle labels ----

inline void cmd_generate(const RunConfig& cfg, std::ostream& out,
                         std::ostream& err) {
    const std::string header = config_header(cfg);
    detail::ensure_dir(cfg.out_dir);

    std::vector<Example> corpus = generate_corpus(detail::gen_params_from(cfg));
    write_corpus(detail::join_path(cfg.out_dir, "corpus.jsonl"), corpus, header);

    {
        std::ofstream lex_out(detail::join_path(cfg.out_dir, "lexicon.tsv"));
        if (!lex_out) throw IoError("cannot write lexicon.tsv in " + cfg.out_dir);
        lex_out << "# " << header << "\n" << builtin_lexicon_text();
        if (!lex_out) throw IoError("failed writing lexicon.tsv");
    }

    const Lexicon lexicon = builtin_lexicon();
    const SearchConfig scfg = detail::search_config_from(cfg);

    struct GenResult {
        ProgramPool pool;
        std::vector<SpuriousLabel> labels;
        long long ms = 0;
    };
    std::vector<ProgramPool> pools;
    std::vector<std::pair<ProgramPool, std::vector<SpuriousLabel>>> labeled;
    parallel_for_ordered<GenResult>(
        corpus.size(), static_cast<unsigned>(cfg.threads),
        [&](std::size_t i) {
            detail::Timer timer;
            GenResult r;
            r.pool = search_pool(corpus[i], scfg, lexicon);
            auto gold = blocks::parse_blocks(corpus[i].gold_program);
            r.labels = oracle_label(
                r.pool, gold, cfg.probe_count,
                Rng::derive(cfg.seed ^ detail::kOracleSeedSalt, i));
            r.ms = timer.ms();
            return r;
        },
        [&](std::size_t i, GenResult&& r) {
            std::size_t spurious = 0;
            for (const auto& l : r.labels) spurious += l.spurious ? 1 : 0;
            err << "generate example=" << corpus[i].id
                << " pool=" << r.pool.entries.size() << " spurious=" << spurious
                << " ms=" << r.ms << "\n";
            pools.push_back(r.pool);
            labeled.emplace_back(std::move(r.pool), std::move(r.labels));
        });

    write_pools(detail::join_path(cfg.out_dir, "pools.jsonl"), pools, header);
    write_labels(detail::join_path(cfg.out_dir, "labels.jsonl"), labeled, header);
    out << "generate wrote " << corpus.size() << " examples to " << cfg.out_dir
        << "\n";
}

// ---- search: consistent pools for an existing corpus ----

inline void cmd_search(const RunConfig& cfg, std::ostream& out,
                       std::ostream& err) {
    if (cfg.corpus.empty()) throw ConfigError("search needs --corpus");
    if (cfg.lexicon.empty()) throw ConfigError("search needs --lexicon");
    if (cfg.domain != "blocks")
        throw ConfigError("search enumerates the blocks grammar only");

    const std::vector<Example> corpus = read_corpus(cfg.corpus);
    const Lexicon lexicon = load_lexicon(cfg.lexicon);
    const SearchConfig scfg = detail::search_config_from(cfg);
    const std::string header = config_header(cfg);
    detail::ensure_dir(cfg.out_dir);

    struct SearchResult {
        ProgramPool pool;
        long long ms = 0;
    };
    std::vector<ProgramPool> pools;
    parallel_for_ordered<SearchResult>(
        corpus.size(), static_cast<unsigned>(cfg.threads),
        [&](std::size_t i) {
            detail::Timer timer;
            SearchResult r;
            r.pool = search_pool(corpus[i], scfg, lexicon);
            r.ms = timer.ms();
            return r;
        },
        [&](std::size_t i, SearchResult&& r) {
            err << "search example=" << corpus[i].id
                << " pool=" << r.pool.entries.size() << " ms=" << r.ms << "\n";
            pools.push_back(std::move(r.pool));
        });

    write_pools(detail::join_path(cfg.out_dir, "pools.jsonl"), pools, header);
    out << "search wrote " << pools.size() << " pools to " << cfg.out_dir << "\n";
}

// ---- filter: collect worlds, vote, keep survivors ----

inline void cmd_filter(const RunConfig& cfg, std::ostream& out,
                       std::ostream& err) {
    if (cfg.corpus.empty()) throw ConfigError("filter needs --corpus");
    if (cfg.pools.empty() && !cfg.search)
        throw ConfigError("filter needs --pools or --search");
    if (cfg.domain == "table" && cfg.tables.empty())
        throw ConfigError("table filtering needs --tables");

    const std::vector<Example> corpus = read_corpus(cfg.corpus);
    const VoteConfig vcfg = detail::vote_config_from(cfg);
    const std::string header = config_header(cfg);
    detail::ensure_dir(cfg.out_dir);

    std::vector<ProgramPool> searched;
    if (cfg.pools.empty()) {
        if (cfg.lexicon.empty()) throw ConfigError("searching needs --lexicon");
        const Lexicon lexicon = load_lexicon(cfg.lexicon);
        const SearchConfig scfg = detail::search_config_from(cfg);
        searched = parallel_map<ProgramPool>(
            corpus.size(), static_cast<unsigned>(cfg.threads),
            [&](std::size_t i) { return search_pool(corpus[i], scfg, lexicon); });
    } else {
        searched = read_pools(cfg.pools);
    }
    const auto pools_by_id = detail::pool_index(searched);

    std::optional<UtteranceIndex> index;
    std::vector<table::Table> tables;
    if (cfg.domain == "blocks") {
        index = build_index(corpus);
    } else {
        tables = read_tables(cfg.tables);
    }

    struct FilterResult {
        std::optional<ScoredPool> scored;
        std::string log;
    };
    auto run_example = [&](std::size_t i) -> FilterResult {
        detail::Timer timer;
        const Example& ex = corpus[i];
        std::ostringstream log;
        log << "filter example=" << ex.id;
        FilterResult r;
        auto found = pools_by_id.find(ex.id);
        if (found == pools_by_id.end() || found->second->entries.empty()) {
            log << " skipped=no_pool ms=" << timer.ms();
            r.log = log.str();
            return r;
        }
        const ProgramPool& pool = *found->second;
        try {
            RepresentationMatrix matrix;
            if (cfg.domain == "blocks") {
                std::vector<WorldRef> worlds = retrieve_worlds(
                    ex, *index, static_cast<std::size_t>(cfg.top_k_utterances));
                if (worlds.size() > static_cast<std::size_t>(cfg.num_worlds))
                    worlds.resize(static_cast<std::size_t>(cfg.num_worlds));
                if (worlds.empty()) {
                    log << " skipped=no_worlds ms=" << timer.ms();
                    r.log = log.str();
                    return r;
                }
                log << " worlds=" << worlds.size();
                if (worlds.size() < static_cast<std::size_t>(cfg.num_worlds))
                    log << " shortfall=1";
                matrix = build_matrix(pool, worlds);
            } else {
                table::CollectResult collected = table::collect_tables(
                    pool, tables, cfg.num_worlds, cfg.max_resample,
                    cfg.err_threshold, Rng::derive(cfg.seed, i));
                if (collected.collected.empty()) {
                    log << " skipped=no_tables ms=" << timer.ms();
                    r.log = log.str();
                    return r;
                }
                log << " worlds=" << collected.collected.size();
                if (collected.shortfall) log << " shortfall=1";
                matrix = build_matrix_collected(pool, collected);
            }
            ScoredPool scored = filter_pool(pool, matrix, vcfg);
            std::size_t kept = 0;
            for (bool k : scored.kept) kept += k ? 1 : 0;
            log << " pool=" << pool.entries.size() << " kept=" << kept
                << " ms=" << timer.ms();
            r.scored = std::move(scored);
        } catch (const Error& e) {
            log << " error=\"" << e.what() << "\" ms=" << timer.ms();
        }
        r.log = log.str();
        return r;
    };

    std::vector<ScoredPool> emitted;
    parallel_for_ordered<FilterResult>(
        corpus.size(), static_cast<unsigned>(cfg.threads), run_example,
        [&](std::size_t, FilterResult&& r) {
            err << r.log << "\n";
            if (r.scored) emitted.push_back(std::move(*r.scored));
        });

    write_scored_pools(detail::join_path(cfg.out_dir, "scored.jsonl"), emitted,
                       header);
    out << "filter wrote " << emitted.size() << " scored pools to "
        << cfg.out_dir << "\n";
    if (cfg.report) {
        std::size_t programs = 0, kept = 0;
        for (const auto& sp : emitted) {
            programs += sp.pool.entries.size();
            for (bool k : sp.kept) kept += k ? 1 : 0;
        }
        double mean_pool =
            emitted.empty()
                ? 0.0
                : static_cast<double>(programs) / static_cast<double>(emitted.size());
        double filtered_fraction =
            programs == 0
                ? 0.0
                : 1.0 - static_cast<double>(kept) / static_cast<double>(programs);
        out << "report pools=" << emitted.size() << " mean_pool_size=" << mean_pool
            << " filtered_fraction=" << filtered_fraction << "\n";
    }
}

// ---- evaluate: join scores with labels, render the report ----

inline void cmd_evaluate(const RunConfig& cfg, std::ostream& out,
                         std::ostream& err) {
    if (cfg.scores.empty()) throw ConfigError("evaluate needs --scores");
    if (cfg.labels.empty()) throw ConfigError("evaluate needs --labels");

    const std::vector<ScoredPool> scored = read_scored_pools(cfg.scores);
    const LabelMap labels = read_labels(cfg.labels);

    std::vector<LabeledScores> examples;
    for (const auto& sp : scored) {
        auto by_example = labels.find(sp.pool.example_id);
        LabeledScores ls;
        std::size_t unmatched = 0;
        for (std::size_t i = 0; i < sp.pool.entries.size(); ++i) {
            const std::string& program = sp.pool.entries[i].program;
            if (by_example != labels.end()) {
                auto hit = by_example->second.find(program);
                if (hit != by_example->second.end()) {
                    ls.scores.push_back(sp.normalized_scores[i]);
                    ls.spurious.push_back(hit->second);
                    continue;
                }
            }
            ++unmatched;
        }
        if (unmatched > 0)
            err << "evaluate example=" << sp.pool.example_id
                << " unmatched=" << unmatched << "\n";
        if (ls.scores.empty()) {
            err << "evaluate example=" << sp.pool.example_id
                << " skipped=no_labels\n";
            continue;
        }
        examples.push_back(std::move(ls));
    }
    if (examples.empty())
        throw ConfigError("evaluate: no example had both scores and labels");

    std::vector<double> taus{0.8, 0.9, 1.0};
    for (double t : parse_tau_list(cfg.tau_list)) taus.push_back(t);
    DetectionReport report = build_report(examples, taus);

    out << report.to_text();
    detail::ensure_dir(cfg.out_dir);
    {
        nlohmann::json j = report.to_json();
        j["config_hash"] = config_hash(cfg);
        std::ofstream json_out(detail::join_path(cfg.out_dir, "report.json"));
        if (!json_out) throw IoError("cannot write report.json in " + cfg.out_dir);
        json_out << j.dump(2) << "\n";
        if (!json_out) throw IoError("failed writing report.json");
    }
    if (cfg.csv) {
        std::ofstream csv_out(detail::join_path(cfg.out_dir, "report.csv"));
        if (!csv_out) throw IoError("cannot write report.csv in " + cfg.out_dir);
        csv_out << "# " << config_header(cfg) << "\n" << report.to_csv();
        if (!csv_out) throw IoError("failed writing report.csv");
    }
    out << "evaluate wrote report.json to " << cfg.out_dir << "\n";
}

// ---- demo: the full pipeline on a small fixed setup ----

inline void cmd_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    // blocks leg: generate, filter with hard vote, evaluate against the oracle
    RunConfig blocks;
    blocks.domain = "blocks";
    blocks.out_dir = detail::join_path(cfg.out_dir, "blocks");
    blocks.seed = cfg.seed;
    blocks.threads = cfg.threads;
    blocks.num_examples = 12;
    blocks.worlds_per_example = 4;
    blocks.min_boxes = 2;
    blocks.max_boxes = 3;
    blocks.max_objects_per_box = 4;
    blocks.min_gold_depth = 2;
    blocks.max_gold_depth = 3;
    blocks.max_depth = 3;
    blocks.initial_beam = 64;
    blocks.max_doublings = 2;
    blocks.probe_count = 200;
    blocks.top_k_utterances = 4;
    blocks.num_worlds = 16;
    blocks.vote = "hard";
    blocks.weights = "pool";
    blocks = resolve_config(blocks);

    out << "demo: blocks pipeline under " << blocks.out_dir << "\n";
    cmd_generate(blocks, out, err);

    RunConfig bfilter = blocks;
    bfilter.corpus = detail::join_path(blocks.out_dir, "corpus.jsonl");
    bfilter.pools = detail::join_path(blocks.out_dir, "pools.jsonl");
    bfilter.report = true;
    bfilter = resolve_config(bfilter);
    cmd_filter(bfilter, out, err);

    RunConfig beval = bfilter;
    beval.scores = detail::join_path(blocks.out_dir, "scored.jsonl");
    beval.labels = detail::join_path(blocks.out_dir, "labels.jsonl");
    beval.csv = true;
    beval = resolve_config(beval);
    cmd_evaluate(beval, out, err);

    // table leg: filter shipped fixture pools across fixture tables
    RunConfig tbl;
    tbl.domain = "table";
    tbl.vote = "soft";
    tbl.out_dir = detail::join_path(cfg.out_dir, "table");
    tbl.seed = cfg.seed;
    tbl.threads = cfg.threads;
    tbl.corpus = detail::join_path(cfg.data_dir, "table_corpus.jsonl");
    tbl.pools = detail::join_path(cfg.data_dir, "table_pools.jsonl");
    tbl.tables = detail::join_path(cfg.data_dir, "tables.jsonl");
    tbl.report = true;
    tbl = resolve_config(tbl);

    out << "demo: table pipeline under " << tbl.out_dir << "\n";
    cmd_filter(tbl, out, err);
    out << "demo complete\n";
}

// ---- argument parsing ----

inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
    CLI::App app{"execution-agreement filtering for candidate program pools"};
    app.require_subcommand(1);

    struct Parsed {
        std::string config_path;
        std::map<std::string, std::string> overrides;
    } parsed;

    auto add_options = [&parsed](CLI::App* sub) {
        sub->add_option("--config", parsed.config_path,
                        "key=value config file; flags override it");
        for (const auto& f : execfilter::detail::config_fields()) {
            std::string flag = "--" + std::string(f.name);
            std::replace(flag.begin(), flag.end(), '_', '-');
            std::string name(f.name);
            if (f.is_flag) {
                sub->add_flag_function(
                    flag,
                    [&parsed, name](std::int64_t count) {
                        if (count > 0) parsed.overrides[name] = "true";
                    },
                    f.help);
            } else {
                sub->add_option_function<std::string>(
                    flag,
                    [&parsed, name](const std::string& v) {
                        parsed.overrides[name] = v;
                    },
                    f.help);
            }
        }
    };

    CLI::App* generate = app.add_subcommand(
        "generate", "synthesize a blocks corpus with pools and oracle labels");
    CLI::App* search = app.add_subcommand(
        "search", "enumerate consistent program pools for a corpus");
    CLI::App* filter = app.add_subcommand(
        "filter", "score pools by execution agreement and mark survivors");
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "score detection quality against spuriousness labels");
    CLI::App* demo = app.add_subcommand(
        "demo", "run the full pipeline on a small fixed setup");
    for (CLI::App* sub : {generate, search, filter, evaluate, demo})
        add_options(sub);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        RunConfig cfg;
        if (!parsed.config_path.empty())
            apply_config(cfg, load_config_file(parsed.config_path));
        apply_config(cfg, parsed.overrides);
        cfg = resolve_config(cfg);

        if (generate->parsed()) cmd_generate(cfg, out, err);
        else if (search->parsed()) cmd_search(cfg, out, err);
        else if (filter->parsed()) cmd_filter(cfg, out, err);
        else if (evaluate->parsed()) cmd_evaluate(cfg, out, err);
        else cmd_demo(cfg, out, err);
        return 0;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace execfilter::cli
