#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "execfilter/error.hpp"

namespace execfilter {

// One flat bag of settings for every subcommand. Fields a given subcommand
// does not use are ignored by it but still hashed, so a config file is a
// complete reproducibility record.
struct RunConfig {
    // domain and files
    std::string domain = "blocks";  // blocks | table
    std::string corpus;             // examples jsonl
    std::string lexicon;            // trigger lexicon tsv
    std::string tables;             // table corpus jsonl
    std::string pools;              // program pools jsonl
    std::string labels;             // spuriousness labels jsonl
    std::string scores;             // scored pools jsonl
    std::string out_dir = "out";
    std::string data_dir = "data";  // shipped fixtures for the demo

    // vote
    std::string vote = "hard";      // hard | soft
    double tau = -1.0;              // negative: 0.8 hard, 0.2 soft
    std::string weights = "pool";   // pool | uniform
    bool errors_in_centroid = true;

    // world collection
    int top_k_utterances = 20;
    int num_worlds = -1;            // negative: 80 blocks, 40 table
    double err_threshold = 0.10;
    int max_resample = 10;

    // search
    int initial_beam = 64;
    int max_doublings = 5;
    int max_depth = 4;

    // corpus generation
    int num_examples = 100;
    int worlds_per_example = 4;
    int min_boxes = 2;
    int max_boxes = 4;
    int max_objects_per_box = 5;
    int min_gold_depth = 2;
    int max_gold_depth = 4;
    int probe_count = 500;

    // run
    std::uint64_t seed = 0;
    int threads = 0;                // 0: hardware concurrency
    std::string tau_list;           // extra report thresholds, comma-separated
    bool search = false;            // filter may search instead of loading pools
    bool report = false;            // filter prints summary counts
    bool csv = false;               // evaluate also writes report.csv
};

namespace detail {

struct ConfigField {
    const char* name;
    const char* help;
    bool is_flag;  // exposed as a boolean flag rather than a value option
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline long long parse_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::string real_to_string(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline const std::vector<ConfigField>& config_fields() {
    auto str = [](const char* name, const char* help, std::string RunConfig::* f) {
        return ConfigField{
            name, help, false, [f](const RunConfig& c) { return c.*f; },
            [f](RunConfig& c, const std::string& v) { c.*f = v; }};
    };
    auto num = [](const char* name, const char* help, int RunConfig::* f) {
        return ConfigField{
            name, help, false,
            [f](const RunConfig& c) { return std::to_string(c.*f); },
            [name, f](RunConfig& c, const std::string& v) {
                c.*f = static_cast<int>(parse_int(name, v));
            }};
    };
    auto real = [](const char* name, const char* help, double RunConfig::* f) {
        return ConfigField{
            name, help, false,
            [f](const RunConfig& c) { return real_to_string(c.*f); },
            [name, f](RunConfig& c, const std::string& v) {
                c.*f = parse_real(name, v);
            }};
    };
    auto flag = [](const char* name, const char* help, bool RunConfig::* f) {
        return ConfigField{
            name, help, true,
            [f](const RunConfig& c) { return c.*f ? "true" : "false"; },
            [name, f](RunConfig& c, const std::string& v) {
                c.*f = parse_bool(name, v);
            }};
    };
    static const std::vector<ConfigField> fields = {
        str("domain", "blocks or table", &RunConfig::domain),
        str("corpus", "examples jsonl path", &RunConfig::corpus),
        str("lexicon", "trigger lexicon tsv path", &RunConfig::lexicon),
        str("tables", "table corpus jsonl path", &RunConfig::tables),
        str("pools", "program pools jsonl path", &RunConfig::pools),
        str("labels", "spuriousness labels jsonl path", &RunConfig::labels),
        str("scores", "scored pools jsonl path", &RunConfig::scores),
        str("out_dir", "output directory, created if missing", &RunConfig::out_dir),
        str("data_dir", "shipped fixture directory for the demo", &RunConfig::data_dir),
        str("vote", "hard or soft", &RunConfig::vote),
        real("tau", "score threshold; default 0.8 hard, 0.2 soft", &RunConfig::tau),
        str("weights", "pool or uniform program weights", &RunConfig::weights),
        flag("errors_in_centroid", "let error results compete in the centroid",
             &RunConfig::errors_in_centroid),
        num("top_k_utterances", "similar utterances whose worlds are borrowed",
            &RunConfig::top_k_utterances),
        num("num_worlds", "worlds per example; default 80 blocks, 40 table",
            &RunConfig::num_worlds),
        real("err_threshold", "max error fraction for an accepted table sample",
             &RunConfig::err_threshold),
        num("max_resample", "extra replacement samples per table",
            &RunConfig::max_resample),
        num("initial_beam", "starting search beam width", &RunConfig::initial_beam),
        num("max_doublings", "beam doubling budget", &RunConfig::max_doublings),
        num("max_depth", "program enumeration depth, 2 to 5", &RunConfig::max_depth),
        num("num_examples", "examples to generate", &RunConfig::num_examples),
        num("worlds_per_example", "worlds sampled per generated example",
            &RunConfig::worlds_per_example),
        num("min_boxes", "min boxes per generated world", &RunConfig::min_boxes),
        num("max_boxes", "max boxes per generated world", &RunConfig::max_boxes),
        num("max_objects_per_box", "object cap per generated box",
            &RunConfig::max_objects_per_box),
        num("min_gold_depth", "shallowest gold program depth",
            &RunConfig::min_gold_depth),
        num("max_gold_depth", "deepest gold program depth",
            &RunConfig::max_gold_depth),
        num("probe_count", "probe worlds used by the spuriousness oracle",
            &RunConfig::probe_count),
        ConfigField{"seed", "master random seed", false,
                    [](const RunConfig& c) { return std::to_string(c.seed); },
                    [](RunConfig& c, const std::string& v) {
                        long long s = parse_int("seed", v);
                        if (s < 0) throw ConfigError("seed must be nonnegative");
                        c.seed = static_cast<std::uint64_t>(s);
                    }},
        num("threads", "worker threads; 0 uses all hardware threads",
            &RunConfig::threads),
        str("tau_list", "extra report thresholds, comma-separated",
            &RunConfig::tau_list),
        flag("search", "search for pools instead of loading them",
             &RunConfig::search),
        flag("report", "print summary counts after filtering", &RunConfig::report),
        flag("csv", "also write report.csv", &RunConfig::csv),
    };
    return fields;
}

inline const ConfigField& field_by_name(const std::string& name) {
    for (const auto& f : config_fields())
        if (name == f.name) return f;
    throw ConfigError("unknown config key '" + name + "'");
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// key=value lines; blank lines and # comments skipped.
inline std::map<std::string, std::string> parse_config_text(
    std::istream& in, const std::string& origin = "config") {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + t + "'");
        std::string key = detail::trim(t.substr(0, eq));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key");
        out[key] = detail::trim(t.substr(eq + 1));
    }
    return out;
}

inline std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    return parse_config_text(in, path);
}

// Unknown keys are config errors, not typos to ignore.
inline void apply_config(RunConfig& cfg,
                         const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) detail::field_by_name(key).set(cfg, value);
}

inline std::vector<std::pair<std::string, std::string>> config_key_values(
    const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : detail::config_fields())
        out.emplace_back(f.name, f.get(cfg));
    return out;
}

// Fills domain- and vote-dependent defaults, then validates everything.
inline RunConfig resolve_config(RunConfig cfg) {
    if (cfg.domain != "blocks" && cfg.domain != "table")
        throw ConfigError("domain must be blocks or table");
    if (cfg.vote != "hard" && cfg.vote != "soft")
        throw ConfigError("vote must be hard or soft");
    if (cfg.weights != "pool" && cfg.weights != "uniform")
        throw ConfigError("weights must be pool or uniform");
    if (cfg.tau < 0) cfg.tau = cfg.vote == "hard" ? 0.8 : 0.2;
    if (cfg.tau > 1.0) throw ConfigError("tau must lie in [0,1]");
    if (cfg.num_worlds < 0) cfg.num_worlds = cfg.domain == "blocks" ? 80 : 40;
    if (cfg.num_worlds < 1) throw ConfigError("num_worlds must be >= 1");
    if (cfg.top_k_utterances < 1)
        throw ConfigError("top_k_utterances must be >= 1");
    if (cfg.err_threshold < 0 || cfg.err_threshold > 1)
        throw ConfigError("err_threshold must lie in [0,1]");
    if (cfg.max_resample < 0) throw ConfigError("max_resample must be >= 0");
    if (cfg.initial_beam < 1) throw ConfigError("initial_beam must be >= 1");
    if (cfg.max_doublings < 0) throw ConfigError("max_doublings must be >= 0");
    if (cfg.max_depth < 2 || cfg.max_depth > 5)
        throw ConfigError("max_depth must lie in [2,5]");
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
    if (cfg.num_examples < 0) throw ConfigError("num_examples must be >= 0");
    if (cfg.probe_count < 1) throw ConfigError("probe_count must be >= 1");
    for (const char* part : {"corpus", "lexicon", "tables", "pools", "labels",
                             "scores", "out_dir", "data_dir"}) {
        const std::string& v = detail::field_by_name(part).get(cfg);
        if (v.find('\n') != std::string::npos)
            throw ConfigError(std::string(part) + ": newline in path");
    }
    return cfg;
}

// FNV-1a over the sorted key=value serialization; stable across runs and
// field declaration order. The worker count is excluded: parallelism must
// never show up in output bytes, headers included.
inline std::string config_hash(const RunConfig& cfg) {
    auto kv = config_key_values(cfg);
    std::erase_if(kv, [](const auto& p) { return p.first == "threads"; });
    std::sort(kv.begin(), kv.end());
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : kv) {
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

// The line every output file carries (writers prefix "# " where the format
// allows comments).
inline std::string config_header(const RunConfig& cfg) {
    return "execfilter config_hash=" + config_hash(cfg);
}

inline std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& [k, v] : config_key_values(cfg)) os << k << "=" << v << "\n";
    return os.str();
}

// Extra thresholds for evaluation reports, e.g. "0.5,0.75".
inline std::vector<double> parse_tau_list(const std::string& s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        std::string tok = detail::trim(
            s.substr(start, comma == std::string::npos ? s.size() - start
                                                       : comma - start));
        if (!tok.empty()) out.push_back(detail::parse_real("tau_list", tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace execfilter
