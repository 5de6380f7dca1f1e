#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "execfilter/blocks/enumerate.hpp"
#include "execfilter/blocks/interp.hpp"
#include "execfilter/blocks/program.hpp"
#include "execfilter/blocks/world.hpp"
#include "execfilter/corpus.hpp"
#include "execfilter/error.hpp"
#include "execfilter/lexicon.hpp"
#include "execfilter/rng.hpp"

namespace execfilter {

struct GenParams {
    std::uint64_t seed = 0;
    int num_examples = 100;
    int worlds_per_example = 4;
    int min_boxes = 2;
    int max_boxes = 4;
    int max_objects_per_box = 5;
    // golds stay at depth <= 4 by default so a 4096-wide ranked beam is
    // guaranteed to reach them
    int min_gold_depth = 2;
    int max_gold_depth = 4;

    void validate() const {
        if (num_examples < 0) throw ConfigError("num_examples must be >= 0");
        if (worlds_per_example < 1)
            throw ConfigError("worlds_per_example must be >= 1");
        if (min_boxes < 1 || max_boxes < min_boxes || max_boxes > 4)
            throw ConfigError("box range must satisfy 1 <= min <= max <= 4");
        if (max_objects_per_box < 0 || max_boxes * max_objects_per_box > 32)
            throw ConfigError("world object capacity exceeds 32");
        if (min_gold_depth < 2 || max_gold_depth < min_gold_depth ||
            max_gold_depth > 5)
            throw ConfigError("gold depth range must satisfy 2 <= min <= max <= 5");
    }
};

inline blocks::BlocksWorld sample_world(Rng& rng, int min_boxes, int max_boxes,
                                        int max_objects_per_box) {
    static const std::vector<blocks::Color> colors = {
        blocks::Color::Black, blocks::Color::Blue, blocks::Color::Yellow};
    static const std::vector<blocks::Shape> shapes = {
        blocks::Shape::Square, blocks::Shape::Circle, blocks::Shape::Triangle};
    static const std::vector<blocks::Size> sizes = {
        blocks::Size::Small, blocks::Size::Medium, blocks::Size::Big};
    blocks::BlocksWorld w;
    w.boxes.resize(static_cast<std::size_t>(rng.range(min_boxes, max_boxes)));
    for (auto& box : w.boxes) {
        int count = rng.range(0, max_objects_per_box);
        for (int i = 0; i < count; ++i) {
            blocks::Obj o;
            o.color = rng.pick(colors);
            o.shape = rng.pick(shapes);
            o.size = rng.pick(sizes);
            o.touch_bottom = rng.coin();
            o.touch_top = rng.coin();
            o.touch_wall = rng.coin();
            box.push_back(o);
        }
    }
    w.validate();
    return w;
}

namespace detail {

// Trigger phrase per program token, aligned with the shipped lexicon. Each
// phrase contains a word no other phrase uses, so concatenations never
// trigger absent tokens.
inline const std::map<int, std::string>& token_phrases() {
    static const std::map<int, std::string> phrases = [] {
        std::map<int, std::string> m;
        auto put = [&](const char* token, const char* phrase) {
            m[blocks::token_id(token)] = phrase;
        };
        put("all_objects", "among everything");
        put("all_boxes", "across the boxes");
        put("black", "black");
        put("blue", "blue");
        put("yellow", "yellow");
        put("square", "square");
        put("circle", "circle");
        put("triangle", "triangle");
        put("small", "small");
        put("medium", "medium");
        put("big", "big");
        put("touch_bottom", "touching the floor");
        put("touch_top", "touching the ceiling");
        put("touch_wall", "touching the wall");
        put("bottom", "resting low");
        put("top", "resting high");
        put("object_exists", "there is");
        put("object_in_box", "inside some box");
        put("object_count_equals", "exactly");
        put("object_count_greater_equals", "at least");
        put("object_count_lesser_equals", "at most");
        put("box_filter", "boxes where");
        put("box_count_equals", "box tally of");
        put("box_count_greater_equals", "box tally reaching");
        const char* numerals[] = {"one", "two",   "three", "four", "five",
                                  "six", "seven", "eight", "nine"};
        for (int i = 1; i <= 9; ++i)
            m[blocks::token_id(std::to_string(i))] = numerals[i - 1];
        return m;
    }();
    return phrases;
}

// Reading order for the phrases; correctness only needs determinism.
inline const std::vector<int>& phrase_order() {
    static const std::vector<int> order = [] {
        std::vector<int> o;
        auto add = [&](const char* token) { o.push_back(blocks::token_id(token)); };
        add("object_exists");
        add("object_count_equals");
        add("object_count_greater_equals");
        add("object_count_lesser_equals");
        for (int i = 1; i <= 9; ++i) o.push_back(blocks::token_id(std::to_string(i)));
        add("black");
        add("blue");
        add("yellow");
        add("square");
        add("circle");
        add("triangle");
        add("small");
        add("medium");
        add("big");
        add("touch_bottom");
        add("touch_top");
        add("touch_wall");
        add("bottom");
        add("top");
        add("object_in_box");
        add("all_objects");
        add("box_count_equals");
        add("box_count_greater_equals");
        add("box_filter");
        add("all_boxes");
        return o;
    }();
    return order;
}

}  // namespace detail

// Deterministic utterance whose lexicon triggers are exactly the gold
// program's tokens.
inline std::vector<std::string> render_utterance(std::uint64_t gold_tokens) {
    std::vector<std::string> words;
    for (int id : detail::phrase_order()) {
        if (!(gold_tokens >> id & 1ULL)) continue;
        for (const auto& w : tokenize(detail::token_phrases().at(id)))
            words.push_back(w);
    }
    return words;
}

// The lexicon the templates are written against: one line per token.
inline Lexicon builtin_lexicon() {
    Lexicon lex;
    for (const auto& [id, phrase] : detail::token_phrases())
        lex.rules.push_back(LexiconRule{tokenize(phrase), 1ULL << id});
    return lex;
}

inline std::string builtin_lexicon_text() {
    std::string out;
    for (const auto& [id, phrase] : detail::token_phrases())
        out += phrase + "\t" + blocks::token_name(id) + "\n";
    return out;
}

namespace detail {

// A usable gold must attain both truth values with nonnegligible probability
// under the world sampler; a 64-world probe screens out near-constants.
inline bool viable_gold(const blocks::BlocksProgram& gold, const GenParams& p,
                        Rng& rng) {
    bool saw_true = false, saw_false = false;
    for (int i = 0; i < 64; ++i) {
        auto w = sample_world(rng, p.min_boxes, p.max_boxes, p.max_objects_per_box);
        bool v = denotation_equal(blocks::exec_blocks(gold, w),
                                  Denotation::boolean(true));
        (v ? saw_true : saw_false) = true;
        if (saw_true && saw_false) return true;
    }
    return false;
}

}  // namespace detail

inline std::vector<Example> generate_corpus(const GenParams& p) {
    p.validate();
    const auto& entries = blocks::cached_enumeration(p.max_gold_depth);
    std::vector<std::vector<std::size_t>> by_depth(
        static_cast<std::size_t>(p.max_gold_depth) + 1);
    for (std::size_t i = 0; i < entries.size(); ++i)
        by_depth[static_cast<std::size_t>(entries[i].depth)].push_back(i);

    std::vector<Example> corpus;
    corpus.reserve(static_cast<std::size_t>(p.num_examples));
    for (int e = 0; e < p.num_examples; ++e) {
        Rng rng(Rng::derive(p.seed, static_cast<std::uint64_t>(e)));

        blocks::BlocksProgram gold;
        bool found_gold = false;
        for (int attempt = 0; attempt < 1000 && !found_gold; ++attempt) {
            int depth = rng.range(p.min_gold_depth, p.max_gold_depth);
            const auto& bucket = by_depth[static_cast<std::size_t>(depth)];
            const auto& entry = entries[bucket[rng.below(bucket.size())]];
            gold = blocks::BlocksProgram{entry.root, entry.text};
            found_gold = detail::viable_gold(gold, p, rng);
        }
        if (!found_gold)
            throw GenerationExhaustedError(
                "no viable gold program after 1000 draws for example " +
                std::to_string(e));

        Example ex;
        ex.id = "synth-" + std::to_string(e);
        ex.gold_program = gold.text;
        ex.utterance = render_utterance(blocks::token_mask(gold.root));

        bool found_worlds = false;
        for (int attempt = 0; attempt < 1000 && !found_worlds; ++attempt) {
            std::vector<blocks::BlocksWorld> worlds;
            std::vector<Denotation> denos;
            bool saw_true = false, saw_false = false;
            for (int j = 0; j < p.worlds_per_example; ++j) {
                worlds.push_back(sample_world(rng, p.min_boxes, p.max_boxes,
                                              p.max_objects_per_box));
                denos.push_back(blocks::exec_blocks(gold, worlds.back()));
                (denotation_equal(denos.back(), Denotation::boolean(true))
                     ? saw_true
                     : saw_false) = true;
            }
            if (p.worlds_per_example >= 2 && !(saw_true && saw_false)) continue;
            found_worlds = true;
            ex.worlds.clear();
            ex.denotations = std::move(denos);
            for (std::size_t j = 0; j < worlds.size(); ++j)
                ex.worlds.push_back(WorldRef::make_blocks(
                    ex.id + "_w" + std::to_string(j), std::move(worlds[j])));
        }
        if (!found_worlds)
            throw GenerationExhaustedError(
                "no informative world set after 1000 draws for example " +
                ex.id);
        ex.validate();
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

// Ground-truth spuriousness: a program is spurious when some probe world
// separates it from gold. Probes come from a wider distribution than the
// corpus sampler so boundary behavior gets exercised.
struct SpuriousLabel {
    bool spurious = false;
    int separating_probe = -1;  // index of the first separating world
};

inline std::vector<SpuriousLabel> oracle_label(const ProgramPool& pool,
                                               const blocks::BlocksProgram& gold,
                                               int probe_count, std::uint64_t seed) {
    if (probe_count < 1) throw ConfigError("probe_count must be >= 1");
    Rng rng(seed);
    std::vector<blocks::ExecContext> probes;
    std::vector<Denotation> gold_results;
    probes.reserve(static_cast<std::size_t>(probe_count));
    for (int i = 0; i < probe_count; ++i) {
        auto w = sample_world(rng, 1, 4, 8);
        probes.emplace_back(w);
        gold_results.push_back(blocks::exec_blocks(gold, probes.back()));
    }
    std::vector<SpuriousLabel> labels;
    labels.reserve(pool.entries.size());
    for (const auto& entry : pool.entries) {
        auto z = blocks::parse_blocks(entry.program);
        SpuriousLabel label;
        for (int i = 0; i < probe_count; ++i) {
            if (!denotation_equal(blocks::exec_blocks(z, probes[static_cast<std::size_t>(i)]),
                                  gold_results[static_cast<std::size_t>(i)])) {
                label.spurious = true;
                label.separating_probe = i;
                break;
            }
        }
        labels.push_back(label);
    }
    return labels;
}

// ---- labels JSONL ----

inline void write_labels(
    const std::string& path,
    const std::vector<std::pair<ProgramPool, std::vector<SpuriousLabel>>>& labeled,
    const std::string& header = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (!header.empty()) out << "# " << header << "\n";
    for (const auto& [pool, labels] : labeled) {
        if (pool.entries.size() != labels.size())
            throw ConfigError("label count mismatch for '" + pool.example_id + "'");
        for (std::size_t i = 0; i < labels.size(); ++i) {
            nlohmann::json j{{"example_id", pool.example_id},
                             {"program", pool.entries[i].program},
                             {"spurious", labels[i].spurious},
                             {"separating_probe", labels[i].separating_probe}};
            out << j.dump() << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

// example id -> program text -> spurious
using LabelMap = std::map<std::string, std::map<std::string, bool>>;

inline LabelMap read_labels(const std::string& path) {
    LabelMap labels;
    detail::for_each_jsonl_line(path, [&](const nlohmann::json& j) {
        try {
            labels[j.at("example_id").get<std::string>()]
                  [j.at("program").get<std::string>()] =
                      j.at("spurious").get<bool>();
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(path + ": bad label line: " + ex.what());
        }
    });
    return labels;
}

}  // namespace execfilter
