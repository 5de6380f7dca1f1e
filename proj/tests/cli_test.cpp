#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "execfilter/cli.hpp"
#include "execfilter/corpus.hpp"
#include "execfilter/datagen.hpp"
#include "execfilter/vote.hpp"

using namespace execfilter;
namespace fs = std::filesystem;

namespace {

struct RunOutcome {
    int code = 0;
    std::string out;
    std::string err;
};

RunOutcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    RunOutcome r;
    r.code = cli::run_cli(std::move(args), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "execfilter_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = body.str();
    }
    return files;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

// small and fast: depth-3 golds are always inside a 128-wide ranked beam
std::vector<std::string> small_generate_args(const fs::path& dir,
                                             const std::string& extra_seed = "5") {
    return {"generate",          "--out-dir",   dir.string(),
            "--seed",            extra_seed,    "--num-examples",
            "4",                 "--max-gold-depth", "3",
            "--max-depth",       "3",           "--initial-beam",
            "128",               "--max-doublings",  "0",
            "--probe-count",     "80",          "--threads",
            "2"};
}

}  // namespace

TEST_CASE("generate is deterministic and thread-count independent", "[cli]") {
    fs::path dir = fresh_dir("gen_det");
    RunOutcome first = run(small_generate_args(dir));
    REQUIRE(first.code == 0);
    auto snap1 = snapshot_tree(dir);
    REQUIRE(snap1.count("corpus.jsonl") == 1);
    REQUIRE(snap1.count("pools.jsonl") == 1);
    REQUIRE(snap1.count("labels.jsonl") == 1);
    REQUIRE(snap1.count("lexicon.tsv") == 1);

    auto args = small_generate_args(dir);
    args.back() = "1";  // different worker count must not change the bytes
    RunOutcome second = run(args);
    REQUIRE(second.code == 0);
    CHECK(snapshot_tree(dir) == snap1);

    auto corpus = read_corpus((dir / "corpus.jsonl").string());
    REQUIRE(corpus.size() == 4);
    CHECK(first_line(dir / "corpus.jsonl").rfind("# execfilter config_hash=", 0) ==
          0);
    CHECK(first.err.find("generate example=synth-0") != std::string::npos);
    CHECK(first.err.find("ms=") != std::string::npos);
}

TEST_CASE("different seeds change the generated corpus", "[cli]") {
    fs::path a = fresh_dir("gen_seed_a");
    fs::path b = fresh_dir("gen_seed_b");
    REQUIRE(run(small_generate_args(a, "5")).code == 0);
    REQUIRE(run(small_generate_args(b, "6")).code == 0);
    auto ca = read_corpus((a / "corpus.jsonl").string());
    auto cb = read_corpus((b / "corpus.jsonl").string());
    REQUIRE(ca.size() == cb.size());
    bool any_diff = false;
    for (std::size_t i = 0; i < ca.size(); ++i)
        any_diff = any_diff || ca[i].to_json() != cb[i].to_json();
    CHECK(any_diff);
}

TEST_CASE("zero examples is a legal vacuous run", "[cli]") {
    fs::path dir = fresh_dir("gen_zero");
    RunOutcome r = run({"generate", "--out-dir", dir.string(), "--num-examples",
                        "0"});
    REQUIRE(r.code == 0);
    CHECK(read_corpus((dir / "corpus.jsonl").string()).empty());
    CHECK(fs::exists(dir / "pools.jsonl"));
    CHECK(fs::exists(dir / "labels.jsonl"));
}

TEST_CASE("missing nested output directory is created", "[cli]") {
    fs::path base = fresh_dir("gen_nested");
    fs::path deep = base / "a" / "b" / "c";
    auto args = small_generate_args(deep);
    args[2] = deep.string();
    REQUIRE(run(args).code == 0);
    CHECK(fs::exists(deep / "corpus.jsonl"));
}

TEST_CASE("search writes the same pools generate embedded", "[cli]") {
    fs::path gen = fresh_dir("search_gen");
    REQUIRE(run(small_generate_args(gen)).code == 0);
    fs::path out = fresh_dir("search_out");
    RunOutcome r = run({"search", "--corpus", (gen / "corpus.jsonl").string(),
                        "--lexicon", (gen / "lexicon.tsv").string(), "--out-dir",
                        out.string(), "--max-depth", "3", "--initial-beam", "128",
                        "--max-doublings", "0"});
    REQUIRE(r.code == 0);
    auto searched = read_pools((out / "pools.jsonl").string());
    auto embedded = read_pools((gen / "pools.jsonl").string());
    REQUIRE(searched.size() == embedded.size());
    for (std::size_t i = 0; i < searched.size(); ++i) {
        CHECK(searched[i].example_id == embedded[i].example_id);
        REQUIRE(searched[i].entries.size() == embedded[i].entries.size());
        for (std::size_t j = 0; j < searched[i].entries.size(); ++j)
            CHECK(searched[i].entries[j].program == embedded[i].entries[j].program);
    }
}

TEST_CASE("filter keeps everything at tau zero and reports counts", "[cli]") {
    fs::path gen = fresh_dir("filter_gen");
    REQUIRE(run(small_generate_args(gen)).code == 0);

    fs::path strict = fresh_dir("filter_strict");
    RunOutcome r = run({"filter", "--corpus", (gen / "corpus.jsonl").string(),
                        "--pools", (gen / "pools.jsonl").string(), "--out-dir",
                        strict.string(), "--top-k-utterances", "3",
                        "--num-worlds", "9", "--report"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("report pools=4") != std::string::npos);
    auto scored = read_scored_pools((strict / "scored.jsonl").string());
    REQUIRE(scored.size() == 4);
    for (const auto& sp : scored) {
        std::size_t kept = 0;
        for (bool k : sp.kept) kept += k ? 1 : 0;
        CHECK(kept >= 1);  // survivor backstop: the argmax set always stays
    }
    CHECK(first_line(strict / "scored.jsonl")
              .rfind("# execfilter config_hash=", 0) == 0);

    fs::path loose = fresh_dir("filter_loose");
    r = run({"filter", "--corpus", (gen / "corpus.jsonl").string(), "--pools",
             (gen / "pools.jsonl").string(), "--out-dir", loose.string(),
             "--top-k-utterances", "3", "--num-worlds", "9", "--tau", "0"});
    REQUIRE(r.code == 0);
    for (const auto& sp : read_scored_pools((loose / "scored.jsonl").string()))
        for (bool k : sp.kept) CHECK(k);
}

TEST_CASE("filter can search its own pools", "[cli]") {
    fs::path gen = fresh_dir("filter_search_gen");
    REQUIRE(run(small_generate_args(gen)).code == 0);
    fs::path out = fresh_dir("filter_search_out");
    RunOutcome r = run({"filter", "--corpus", (gen / "corpus.jsonl").string(),
                        "--search", "--lexicon", (gen / "lexicon.tsv").string(),
                        "--out-dir", out.string(), "--max-depth", "3",
                        "--initial-beam", "128", "--max-doublings", "0",
                        "--top-k-utterances", "3", "--num-worlds", "9"});
    REQUIRE(r.code == 0);
    CHECK(read_scored_pools((out / "scored.jsonl").string()).size() == 4);
}

TEST_CASE("filter runs the table domain against fixture tables", "[cli]") {
    fs::path out = fresh_dir("filter_table");
    std::string data = EXECFILTER_DATA_DIR;
    RunOutcome r = run({"filter", "--domain", "table", "--vote", "soft",
                        "--corpus", data + "/table_corpus.jsonl", "--pools",
                        data + "/table_pools.jsonl", "--tables",
                        data + "/tables.jsonl", "--out-dir", out.string()});
    REQUIRE(r.code == 0);
    auto scored = read_scored_pools((out / "scored.jsonl").string());
    REQUIRE(scored.size() == 4);
    // the fixture corpus is smaller than the default 40-table request
    CHECK(r.err.find("shortfall=1") != std::string::npos);
    for (const auto& sp : scored)
        for (double s : sp.normalized_scores) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
}

TEST_CASE("evaluate reports detection rows and correlation", "[cli]") {
    fs::path gen = fresh_dir("eval_gen");
    REQUIRE(run(small_generate_args(gen)).code == 0);
    fs::path filt = fresh_dir("eval_filter");
    REQUIRE(run({"filter", "--corpus", (gen / "corpus.jsonl").string(),
                 "--pools", (gen / "pools.jsonl").string(), "--out-dir",
                 filt.string(), "--top-k-utterances", "3", "--num-worlds", "9"})
                .code == 0);

    fs::path eval = fresh_dir("eval_out");
    RunOutcome r = run({"evaluate", "--scores", (filt / "scored.jsonl").string(),
                        "--labels", (gen / "labels.jsonl").string(), "--out-dir",
                        eval.string(), "--csv", "--tau-list", "0.5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("precision") != std::string::npos);

    std::ifstream in(eval / "report.json");
    nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["detection"].size() == 4);  // 0.5 joins the three defaults
    CHECK(j["detection"][0]["tau"] == 0.5);
    CHECK(j.contains("config_hash"));
    CHECK(fs::exists(eval / "report.csv"));
    CHECK(first_line(eval / "report.csv").rfind("# execfilter config_hash=", 0) ==
          0);
}

TEST_CASE("evaluate notes single-class labels instead of failing", "[cli]") {
    fs::path gen = fresh_dir("eval_deg_gen");
    REQUIRE(run(small_generate_args(gen)).code == 0);
    fs::path filt = fresh_dir("eval_deg_filter");
    REQUIRE(run({"filter", "--corpus", (gen / "corpus.jsonl").string(),
                 "--pools", (gen / "pools.jsonl").string(), "--out-dir",
                 filt.string(), "--top-k-utterances", "3", "--num-worlds", "9"})
                .code == 0);

    // rewrite every label to not-spurious
    auto pools = read_pools((gen / "pools.jsonl").string());
    std::vector<std::pair<ProgramPool, std::vector<SpuriousLabel>>> labeled;
    for (auto& p : pools)
        labeled.emplace_back(p, std::vector<SpuriousLabel>(p.entries.size()));
    fs::path labels = fresh_dir("eval_deg_labels") / "labels.jsonl";
    write_labels(labels.string(), labeled, "all correct");

    fs::path eval = fresh_dir("eval_deg_out");
    RunOutcome r = run({"evaluate", "--scores", (filt / "scored.jsonl").string(),
                        "--labels", labels.string(), "--out-dir", eval.string()});
    REQUIRE(r.code == 0);
    std::ifstream in(eval / "report.json");
    nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["detection"].size() == 3);
    CHECK_FALSE(j.contains("correlation"));
    CHECK(j.contains("note"));
}

TEST_CASE("config file applies and flags override it", "[cli]") {
    fs::path dir = fresh_dir("config_file");
    fs::path cfg = dir / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "# base settings\n"
            << "num_examples=2\n"
            << "max_gold_depth=3\n"
            << "max_depth=3\n"
            << "initial_beam=128\n"
            << "max_doublings=0\n"
            << "probe_count=60\n";
    }
    fs::path a = dir / "a";
    REQUIRE(run({"generate", "--config", cfg.string(), "--out-dir",
                 a.string()})
                .code == 0);
    CHECK(read_corpus((a / "corpus.jsonl").string()).size() == 2);

    fs::path b = dir / "b";
    REQUIRE(run({"generate", "--config", cfg.string(), "--out-dir", b.string(),
                 "--num-examples", "5"})
                .code == 0);
    CHECK(read_corpus((b / "corpus.jsonl").string()).size() == 5);
}

TEST_CASE("config and usage errors exit with code 1", "[cli]") {
    CHECK(run({}).code == 1);
    CHECK(run({"conjure"}).code == 1);
    CHECK(run({"generate", "--no-such-flag"}).code == 1);
    CHECK(run({"generate", "--tau", "1.5"}).code == 1);
    CHECK(run({"generate", "--domain", "cubes"}).code == 1);
    CHECK(run({"filter", "--corpus", "x.jsonl"}).code == 1);  // no pools, no search
    CHECK(run({"search", "--corpus", "x.jsonl"}).code == 1);  // no lexicon

    fs::path dir = fresh_dir("bad_config");
    fs::path cfg = dir / "bad.cfg";
    {
        std::ofstream out(cfg);
        out << "tau 0.9\n";
    }
    CHECK(run({"generate", "--config", cfg.string()}).code == 1);
    {
        std::ofstream out(cfg);
        out << "no_such_key=1\n";
    }
    CHECK(run({"generate", "--config", cfg.string()}).code == 1);
}

TEST_CASE("missing input files exit with code 2", "[cli]") {
    fs::path dir = fresh_dir("io_err");
    RunOutcome r = run({"filter", "--corpus", (dir / "absent.jsonl").string(),
                        "--pools", (dir / "absent_pools.jsonl").string(),
                        "--out-dir", dir.string()});
    CHECK(r.code == 2);
    r = run({"generate", "--config", (dir / "absent.cfg").string()});
    CHECK(r.code == 2);
    r = run({"evaluate", "--scores", (dir / "none.jsonl").string(), "--labels",
             (dir / "none2.jsonl").string()});
    CHECK(r.code == 2);
}

TEST_CASE("help is a success exit", "[cli]") {
    RunOutcome r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("generate") != std::string::npos);
    r = run({"filter", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--tau") != std::string::npos);
}

TEST_CASE("demo reruns into the same directory byte-identically", "[cli]") {
    fs::path dir = fresh_dir("demo");
    std::string data = EXECFILTER_DATA_DIR;
    RunOutcome first =
        run({"demo", "--out-dir", dir.string(), "--data-dir", data});
    REQUIRE(first.code == 0);
    CHECK(first.out.find("demo complete") != std::string::npos);
    auto snap1 = snapshot_tree(dir);
    CHECK(snap1.count("blocks/report.json") == 1);
    CHECK(snap1.count("blocks/report.csv") == 1);
    CHECK(snap1.count("blocks/scored.jsonl") == 1);
    CHECK(snap1.count("table/scored.jsonl") == 1);

    RunOutcome second =
        run({"demo", "--out-dir", dir.string(), "--data-dir", data});
    REQUIRE(second.code == 0);
    CHECK(snapshot_tree(dir) == snap1);
    CHECK(second.out == first.out);
}
