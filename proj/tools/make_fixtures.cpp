// Regenerates the shipped table-domain fixtures under data/. The output is
// deterministic, so rerunning after an intentional change keeps the files
// reviewable as plain diffs.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "execfilter/corpus.hpp"
#include "execfilter/datagen.hpp"
#include "execfilter/retrieval.hpp"
#include "execfilter/rng.hpp"
#include "execfilter/table/interp.hpp"
#include "execfilter/table/program.hpp"
#include "execfilter/table/table.hpp"

using namespace execfilter;

namespace {

const std::vector<std::string> kCountries = {
    "norway", "canada",  "austria", "germany", "france", "italy",
    "sweden", "finland", "china",   "japan",   "korea",  "spain"};
const std::vector<std::string> kCities = {
    "oslo",   "calgary", "vienna", "munich", "paris",  "turin",
    "lahti",  "sapporo", "harbin", "nagano", "seoul",  "granada"};
const std::vector<std::string> kAthletes = {
    "bjoern", "marit", "ole",  "petra", "lukas", "anna",
    "kenji",  "mei",   "sven", "ida",   "tomas", "elena"};
const std::vector<std::string> kTeams = {
    "eagles", "wolves", "bears",  "hawks",  "lions", "sharks",
    "owls",   "foxes",  "ravens", "otters", "elks",  "lynxes"};

std::string table_id(int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "t%02d", i);
    return buf;
}

// Country, City, Year, Wins; the workhorse schema most pools target.
table::Table games_table(int id, Rng& rng, int rows) {
    table::Table t;
    t.table_id = table_id(id);
    t.columns = {{"Country", table::CType::String},
                 {"City", table::CType::String},
                 {"Year", table::CType::Number},
                 {"Wins", table::CType::Number}};
    int year = 1992 + static_cast<int>(rng.below(6)) * 2;
    for (int r = 0; r < rows; ++r) {
        t.rows.push_back({table::Cell::str(rng.pick(kCountries)),
                          table::Cell::str(rng.pick(kCities)),
                          table::Cell::num(year),
                          table::Cell::num(static_cast<double>(rng.below(30)))});
        year += 2 + static_cast<int>(rng.below(2)) * 2;
    }
    t.validate();
    return t;
}

// Athlete, Golds, Year; a narrower all-purpose schema.
table::Table athlete_table(int id, Rng& rng, int rows) {
    table::Table t;
    t.table_id = table_id(id);
    t.columns = {{"Athlete", table::CType::String},
                 {"Golds", table::CType::Number},
                 {"Year", table::CType::Number}};
    for (int r = 0; r < rows; ++r) {
        t.rows.push_back({table::Cell::str(rng.pick(kAthletes)),
                          table::Cell::num(static_cast<double>(rng.below(12))),
                          table::Cell::num(1994 + static_cast<double>(rng.below(24)))});
    }
    t.validate();
    return t;
}

// Team, Season, Points, Opened; carries the only date column in the set.
table::Table season_table(int id, Rng& rng, int rows) {
    table::Table t;
    t.table_id = table_id(id);
    t.columns = {{"Team", table::CType::String},
                 {"Season", table::CType::Number},
                 {"Points", table::CType::Number},
                 {"Opened", table::CType::Date}};
    for (int r = 0; r < rows; ++r) {
        table::Date d{2000 + static_cast<int>(rng.below(20)),
                      1 + static_cast<int>(rng.below(12)),
                      1 + static_cast<int>(rng.below(28))};
        t.rows.push_back({table::Cell::str(rng.pick(kTeams)),
                          table::Cell::num(2001 + static_cast<double>(rng.below(18))),
                          table::Cell::num(static_cast<double>(rng.below(100))),
                          table::Cell::date(d)});
    }
    t.validate();
    return t;
}

std::vector<table::Table> build_tables() {
    Rng rng(20240915);
    std::vector<table::Table> tables;
    int id = 1;
    for (int i = 0; i < 12; ++i)
        tables.push_back(games_table(id++, rng, 3 + static_cast<int>(rng.below(6))));
    for (int i = 0; i < 8; ++i)
        tables.push_back(athlete_table(id++, rng, 3 + static_cast<int>(rng.below(5))));
    for (int i = 0; i < 6; ++i)
        tables.push_back(season_table(id++, rng, 3 + static_cast<int>(rng.below(5))));
    // single-row tables: argmax and argmin error out on them, so resampling
    // and discard accounting get exercised
    tables.push_back(games_table(id++, rng, 1));
    tables.push_back(athlete_table(id++, rng, 1));
    // blank-celled tables are skipped by collection outright
    {
        table::Table t = games_table(id++, rng, 4);
        t.rows[1][1] = table::Cell::blank();
        tables.push_back(t);
    }
    {
        table::Table t = athlete_table(id++, rng, 3);
        t.rows[0][1] = table::Cell::blank();
        tables.push_back(t);
    }
    return tables;
}

ProgramPool make_pool(const std::string& example_id,
                      const std::vector<std::string>& programs) {
    ProgramPool pool;
    pool.example_id = example_id;
    for (const auto& text : programs) {
        PoolEntry e;
        e.program = table::parse_table_program(text).text;  // canonical spelling
        pool.entries.push_back(std::move(e));
    }
    return pool;
}

Example make_example(const std::string& id, const std::string& question,
                     const table::Table& source, const ProgramPool& pool) {
    Example ex;
    ex.id = id;
    ex.utterance = tokenize(question);
    ex.worlds.push_back(WorldRef::make_table(source.table_id, source));
    ex.denotations.push_back(table::exec_table(
        table::parse_table_program(pool.entries.front().program), source));
    ex.validate();
    return ex;
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_dir = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(out_dir);
    auto path = [&out_dir](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    const std::string header = "execfilter shipped fixtures";

    std::vector<table::Table> tables = build_tables();
    write_tables(path("tables.jsonl"), tables, header);

    std::vector<ProgramPool> pools;
    std::vector<Example> corpus;

    pools.push_back(make_pool(
        "wtq-winner-2004",
        {"(select (argmax all_rows column:Wins) column:Country)",
         "(select (filter_eq all_rows column:Year 2004) column:Country)",
         "(select (first all_rows) column:Country)",
         "(select (argmin all_rows column:Year) column:Country)"}));
    corpus.push_back(make_example("wtq-winner-2004",
                                  "which country won the most in 2004",
                                  tables[0], pools.back()));

    pools.push_back(make_pool(
        "wtq-wins-after-2005",
        {"(count (filter_greater all_rows column:Year 2005))",
         "(sum (select (filter_greater all_rows column:Year 2005) column:Wins))",
         "(count (filter_less all_rows column:Year 2005))",
         "(max (select all_rows column:Wins))",
         "(count (argmax all_rows column:Wins))"}));
    corpus.push_back(make_example("wtq-wins-after-2005",
                                  "how many games were won after 2005",
                                  tables[1], pools.back()));

    pools.push_back(make_pool(
        "wtq-first-city",
        {"(select (first all_rows) column:City)",
         "(select (argmin all_rows column:Year) column:City)",
         "(select (last all_rows) column:City)"}));
    corpus.push_back(make_example("wtq-first-city", "which city hosted first",
                                  tables[2], pools.back()));

    pools.push_back(make_pool(
        "wtq-total-golds",
        {"(sum (select all_rows column:Golds))",
         "(count all_rows)",
         "(max (select all_rows column:Golds))",
         "(sum (select all_rows column:Year))"}));
    corpus.push_back(make_example("wtq-total-golds",
                                  "how many golds were won in total",
                                  tables[12], pools.back()));

    write_corpus(path("table_corpus.jsonl"), corpus, header);
    write_pools(path("table_pools.jsonl"), pools, header);

    {
        std::ofstream lex(path("blocks_lexicon.tsv"));
        lex << "# " << header << "\n" << builtin_lexicon_text();
    }

    std::cout << "wrote fixtures to " << out_dir << "\n";
    return 0;
}
