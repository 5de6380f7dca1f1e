#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "execfilter/blocks/world.hpp"
#include "execfilter/denotation.hpp"
#include "execfilter/error.hpp"
#include "execfilter/table/table.hpp"

namespace execfilter {

enum class Domain : std::uint8_t { Blocks, Table };

inline const char* to_string(Domain d) { return d == Domain::Blocks ? "blocks" : "table"; }

// One world a program can execute against. Payloads are shared: retrieval
// concatenates world lists without copying scenes.
struct WorldRef {
    std::string world_id;
    Domain kind = Domain::Blocks;
    std::shared_ptr<const blocks::BlocksWorld> blocks_world;
    std::shared_ptr<const table::Table> table_world;

    static WorldRef make_blocks(std::string id, blocks::BlocksWorld w) {
        WorldRef r;
        r.world_id = std::move(id);
        r.kind = Domain::Blocks;
        r.blocks_world = std::make_shared<const blocks::BlocksWorld>(std::move(w));
        return r;
    }

    static WorldRef make_table(std::string id, table::Table t) {
        WorldRef r;
        r.world_id = std::move(id);
        r.kind = Domain::Table;
        r.table_world = std::make_shared<const table::Table>(std::move(t));
        return r;
    }

    nlohmann::json to_json() const {
        nlohmann::json j = kind == Domain::Blocks ? blocks_world->to_json()
                                                  : table_world->to_json();
        j["world_id"] = world_id;
        j["kind"] = to_string(kind);
        return j;
    }

    static WorldRef from_json(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        std::string id = j.at("world_id").get<std::string>();
        if (kind == "blocks")
            return make_blocks(std::move(id), blocks::BlocksWorld::from_json(j));
        if (kind == "table") {
            nlohmann::json payload = j;
            if (!payload.contains("table_id")) payload["table_id"] = id;
            return make_table(std::move(id), table::Table::from_json(payload));
        }
        throw ParseError("unknown world kind '" + kind + "'");
    }
};

struct Example {
    std::string id;
    std::vector<std::string> utterance;
    std::vector<WorldRef> worlds;
    std::vector<Denotation> denotations;
    std::string gold_program;  // empty when unknown (non-synthetic data)

    Domain domain() const { return worlds.empty() ? Domain::Blocks : worlds.front().kind; }

    void validate() const {
        if (worlds.empty()) throw ParseError("example " + id + " has no worlds");
        if (worlds.size() != denotations.size())
            throw ParseError("example " + id + ": worlds and denotations differ in length");
        for (const auto& w : worlds) {
            if (w.kind != worlds.front().kind)
                throw ParseError("example " + id + " mixes world domains");
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json jworlds = nlohmann::json::array();
        for (const auto& w : worlds) jworlds.push_back(w.to_json());
        nlohmann::json jdens = nlohmann::json::array();
        for (const auto& d : denotations) jdens.push_back(d.to_json());
        nlohmann::json j{{"id", id},
                         {"utterance", utterance},
                         {"worlds", std::move(jworlds)},
                         {"denotations", std::move(jdens)}};
        if (!gold_program.empty()) j["gold_program"] = gold_program;
        return j;
    }

    static Example from_json(const nlohmann::json& j) {
        Example e;
        e.id = j.at("id").get<std::string>();
        e.utterance = j.at("utterance").get<std::vector<std::string>>();
        for (const auto& jw : j.at("worlds")) e.worlds.push_back(WorldRef::from_json(jw));
        for (const auto& jd : j.at("denotations"))
            e.denotations.push_back(Denotation::from_json(jd));
        if (j.contains("gold_program")) e.gold_program = j.at("gold_program").get<std::string>();
        e.validate();
        return e;
    }
};

struct PoolEntry {
    std::string program;
    double weight = 1.0;
    nlohmann::json aux;  // optional passthrough metadata

    void validate() const {
        if (weight < 0) throw ParseError("pool entry weight must be nonnegative");
    }
};

struct ProgramPool {
    std::string example_id;
    std::vector<PoolEntry> entries;
};

// ---- line-oriented JSONL I/O ----
//
// Readers skip blank lines and '#' comment lines, so files may carry a
// config-hash header. Writers never emit headers themselves; the CLI does.

namespace detail {

inline void for_each_jsonl_line(const std::string& path,
                                const std::function<void(const nlohmann::json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        fn(j);
    }
}

}  // namespace detail

inline std::vector<Example> read_corpus(const std::string& path) {
    std::vector<Example> out;
    std::set<std::string> world_ids;
    detail::for_each_jsonl_line(path, [&](const nlohmann::json& j) {
        out.push_back(Example::from_json(j));
        for (const auto& w : out.back().worlds) {
            if (!world_ids.insert(w.world_id).second)
                throw ParseError("duplicate world id '" + w.world_id + "' in " + path);
        }
    });
    return out;
}

inline void write_corpus(const std::string& path, const std::vector<Example>& corpus,
                         const std::string& header = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    if (!header.empty()) out << "# " << header << "\n";
    for (const auto& e : corpus) out << e.to_json().dump() << "\n";
    if (!out) throw IoError("failed writing " + path);
}

// Pools are stored one entry per line; consecutive lines sharing example_id
// form one pool. Order within a pool is meaningful and preserved.
inline std::vector<ProgramPool> read_pools(const std::string& path) {
    std::vector<ProgramPool> out;
    std::map<std::string, std::size_t> index;
    detail::for_each_jsonl_line(path, [&](const nlohmann::json& j) {
        std::string example_id = j.at("example_id").get<std::string>();
        PoolEntry entry;
        entry.program = j.at("program").get<std::string>();
        if (j.contains("weight")) entry.weight = j.at("weight").get<double>();
        if (j.contains("aux")) entry.aux = j.at("aux");
        entry.validate();
        auto it = index.find(example_id);
        if (it == index.end()) {
            index.emplace(example_id, out.size());
            out.push_back(ProgramPool{std::move(example_id), {std::move(entry)}});
        } else {
            out[it->second].entries.push_back(std::move(entry));
        }
    });
    return out;
}

inline void write_pools(const std::string& path, const std::vector<ProgramPool>& pools,
                        const std::string& header = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    if (!header.empty()) out << "# " << header << "\n";
    for (const auto& pool : pools) {
        for (const auto& e : pool.entries) {
            nlohmann::json j{{"example_id", pool.example_id},
                             {"program", e.program},
                             {"weight", e.weight}};
            if (!e.aux.is_null()) j["aux"] = e.aux;
            out << j.dump() << "\n";
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

inline std::vector<table::Table> read_tables(const std::string& path) {
    std::vector<table::Table> out;
    std::set<std::string> ids;
    detail::for_each_jsonl_line(path, [&](const nlohmann::json& j) {
        out.push_back(table::Table::from_json(j));
        if (!ids.insert(out.back().table_id).second)
            throw ParseError("duplicate table id '" + out.back().table_id + "' in " + path);
    });
    return out;
}

inline void write_tables(const std::string& path, const std::vector<table::Table>& tables,
                         const std::string& header = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    if (!header.empty()) out << "# " << header << "\n";
    for (const auto& t : tables) out << t.to_json().dump() << "\n";
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace execfilter
