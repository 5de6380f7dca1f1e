#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "execfilter/retrieval.hpp"
#include "execfilter/rng.hpp"
#include "helpers.hpp"

using namespace execfilter;

namespace {

std::vector<std::string> toks(const std::string& s) { return tokenize(s); }

Example make_example(const std::string& id, const std::string& utterance,
                     int num_worlds, Rng& rng) {
    Example ex;
    ex.id = id;
    ex.utterance = toks(utterance);
    for (int i = 0; i < num_worlds; ++i)
        ex.worlds.push_back(WorldRef::make_blocks(
            id + "_w" + std::to_string(i), test_helpers::random_world(rng)));
    ex.denotations.push_back(Denotation::boolean(true));
    return ex;
}

}  // namespace

TEST_CASE("tokenization lowercases and strips punctuation", "[retrieval]") {
    REQUIRE(toks("There is a black square.") ==
            std::vector<std::string>{"there", "is", "a", "black", "square"});
    REQUIRE(toks("two-tone;  BOXES!") ==
            std::vector<std::string>{"two", "tone", "boxes"});
    REQUIRE(toks("...") == std::vector<std::string>{});
    REQUIRE(toks("x") == std::vector<std::string>{"x"});
}

TEST_CASE("identical sentences score 1", "[retrieval]") {
    auto s = toks("there is exactly one yellow circle");
    REQUIRE(sentence_bleu(s, s) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("disjoint sentences score 0", "[retrieval]") {
    REQUIRE(sentence_bleu(toks("red circle above"), toks("the box holds nothing")) ==
            0.0);
}

TEST_CASE("one-word swap matches the hand-computed value", "[retrieval]") {
    // p1 = 4/5, p2 = 2/4, p3 = 1/3, p4 floored at 1e-9, no brevity penalty
    double expected = std::pow(0.8 * 0.5 * (1.0 / 3.0) * 1e-9, 0.25);
    double got = sentence_bleu(toks("there is a black square"),
                               toks("there is a blue square"));
    REQUIRE(got == Catch::Approx(expected).margin(1e-9));
}

TEST_CASE("only short candidates pay the brevity penalty", "[retrieval]") {
    // perfect sub-match, candidate one token short
    double got = sentence_bleu(toks("a b c d"), toks("a b c d e"));
    REQUIRE(got == Catch::Approx(std::exp(1.0 - 5.0 / 4.0)).margin(1e-12));

    // longer candidate: precisions dilute but no penalty
    got = sentence_bleu(toks("a b c d e"), toks("a b c d"));
    REQUIRE(got ==
            Catch::Approx(std::pow(0.8 * 0.75 * (2.0 / 3.0) * 0.5, 0.25)).margin(1e-12));
}

TEST_CASE("an empty candidate is rejected", "[retrieval]") {
    REQUIRE_THROWS_AS(sentence_bleu({}, toks("a b")), EmptyInputError);
}

TEST_CASE("scores always land in the unit interval", "[retrieval]") {
    Rng rng(77);
    std::vector<std::string> vocab = {"a", "b", "c", "box", "square", "blue"};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> cand, ref;
        int cn = rng.range(1, 8), rn = rng.range(0, 8);
        for (int i = 0; i < cn; ++i) cand.push_back(vocab[rng.below(vocab.size())]);
        for (int i = 0; i < rn; ++i) ref.push_back(vocab[rng.below(vocab.size())]);
        double s = sentence_bleu(cand, ref);
        REQUIRE(s >= 0.0);
        REQUIRE(s <= 1.0);
    }
}

TEST_CASE("an exact utterance match ranks first", "[retrieval]") {
    Rng rng(11);
    std::vector<Example> corpus = {
        make_example("far", "the box is empty", 2, rng),
        make_example("near", "there is a blue square", 2, rng),
        make_example("exact", "there is a black square", 2, rng),
    };
    UtteranceIndex index = build_index(corpus);
    auto worlds = retrieve_worlds(toks("there is a black square"), index, 3);
    REQUIRE(worlds.size() == 6);
    REQUIRE(worlds[0].world_id == "exact_w0");
    REQUIRE(worlds[1].world_id == "exact_w1");
    REQUIRE(worlds[2].world_id == "near_w0");
}

TEST_CASE("each rank contributes its full world set", "[retrieval]") {
    Rng rng(12);
    std::vector<Example> corpus = {
        make_example("a", "one black square touching the wall", 4, rng),
        make_example("b", "a tower of two blocks", 4, rng),
    };
    UtteranceIndex index = build_index(corpus);
    auto worlds = retrieve_worlds(toks("one black square touching the wall"), index, 1);
    REQUIRE(worlds.size() == 4);
    for (int i = 0; i < 4; ++i)
        REQUIRE(worlds[static_cast<std::size_t>(i)].world_id ==
                "a_w" + std::to_string(i));
}

TEST_CASE("the query's own entry is excluded", "[retrieval]") {
    Rng rng(13);
    std::vector<Example> corpus = {
        make_example("self", "there is a yellow circle", 2, rng),
        make_example("other", "there is a yellow triangle", 2, rng),
    };
    UtteranceIndex index = build_index(corpus);
    auto worlds = retrieve_worlds(corpus[0], index, 5);
    REQUIRE(worlds.size() == 2);
    REQUIRE(worlds[0].world_id == "other_w0");

    // excluding the only entry leaves nothing
    UtteranceIndex solo = build_index({corpus[0]});
    REQUIRE(retrieve_worlds(corpus[0], solo, 5).empty());
}

TEST_CASE("equal scores break ties by example id", "[retrieval]") {
    Rng rng(14);
    std::vector<Example> corpus = {
        make_example("zed", "a red circle sits alone", 1, rng),
        make_example("ant", "a red circle sits alone", 1, rng),
    };
    UtteranceIndex index = build_index(corpus);
    auto worlds = retrieve_worlds(toks("a red circle sits alone"), index, 2);
    REQUIRE(worlds.size() == 2);
    REQUIRE(worlds[0].world_id == "ant_w0");
    REQUIRE(worlds[1].world_id == "zed_w0");
}

TEST_CASE("growing the cutoff only appends worlds", "[retrieval]") {
    Rng rng(15);
    std::vector<Example> corpus = {
        make_example("e1", "there is a black square", 2, rng),
        make_example("e2", "there is a blue square", 2, rng),
        make_example("e3", "there is a black circle in the box", 2, rng),
        make_example("e4", "the tower has three blocks", 2, rng),
        make_example("e5", "a square", 2, rng),
        make_example("e6", "nothing here matches at all", 2, rng),
    };
    UtteranceIndex index = build_index(corpus);
    auto query = toks("there is a black square in the box");
    std::vector<WorldRef> prev;
    for (std::size_t k = 0; k <= corpus.size(); ++k) {
        auto cur = retrieve_worlds(query, index, k);
        REQUIRE(cur.size() >= prev.size());
        for (std::size_t i = 0; i < prev.size(); ++i)
            REQUIRE(cur[i].world_id == prev[i].world_id);
        prev = std::move(cur);
    }
    REQUIRE(prev.size() == 12);

    // determinism
    auto again = retrieve_worlds(query, index, 3);
    auto first = retrieve_worlds(query, index, 3);
    REQUIRE(again.size() == first.size());
    for (std::size_t i = 0; i < again.size(); ++i)
        REQUIRE(again[i].world_id == first[i].world_id);
}

TEST_CASE("duplicate example ids are rejected at indexing", "[retrieval]") {
    Rng rng(16);
    std::vector<Example> corpus = {
        make_example("dup", "a", 1, rng),
        make_example("dup", "b", 1, rng),
    };
    REQUIRE_THROWS_AS(build_index(corpus), ParseError);
}
