#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "streamlp/engine.hpp"
#include "streamlp/parser.hpp"

using namespace streamlp;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// remainder with the sign of the divisor, by counting
std::int64_t mod_by_steps(std::int64_t x, std::int64_t d) {
    while (x < 0) x += d;
    while (x >= d) x -= d;
    return x;
}

}  // namespace

TEST_CASE("#mod is a floor modulo") {
    for (std::int64_t d = 1; d <= 7; ++d)
        for (std::int64_t x = -16; x <= 16; ++x) {
            CAPTURE(x);
            CAPTURE(d);
            CHECK(floor_mod(x, d) == mod_by_steps(x, d));
        }
}

TEST_CASE("#mod through grounding") {
    Engine e(parse_program("#base. x(-16..16). r(X, X #mod 6) :- x(X)."), {});
    auto r = e.query(0);
    REQUIRE(r.sat);
    auto atoms = e.visible(r.models[0]);
    for (std::int64_t x = -16; x <= 16; ++x) {
        std::string a = "r(" + std::to_string(x) + "," + std::to_string(mod_by_steps(x, 6)) + ")";
        CHECK(std::find(atoms.begin(), atoms.end(), a) != atoms.end());
    }
}

TEST_CASE("printing and reparsing the corpus encodings is a fixpoint") {
    for (const auto& d : std::filesystem::directory_iterator(STREAMLP_SOURCE_DIR "/corpus")) {
        CAPTURE(d.path().string());
        Program p = parse_program(slurp(d.path() / "encoding.lp"));
        std::string once = to_string(p);
        std::string twice = to_string(parse_program(once));
        CHECK(once == twice);
        CHECK(p.parts.size() == parse_program(once).parts.size());
    }
}

TEST_CASE("stream events round-trip through their printed form") {
    for (const auto& d : std::filesystem::directory_iterator(STREAMLP_SOURCE_DIR "/corpus")) {
        CAPTURE(d.path().string());
        auto events = parse_stream(slurp(d.path() / "stream.str"));
        REQUIRE_FALSE(events.empty());
        std::string printed;
        for (const auto& e : events) printed += to_string(e);
        CHECK(parse_stream(printed) == events);
    }
}

TEST_CASE("online block directives") {
    auto e = parse_stream_block("#step 4 : 2. a. #volatile : 3. b. c. #volatile. d. #forget 1. #endstep.");
    CHECK(e.target_step == 4);
    CHECK(e.delta == 2);
    REQUIRE(e.blocks.size() == 3);
    CHECK_FALSE(e.blocks[0].life);
    CHECK(e.blocks[0].rules.size() == 1);
    CHECK(e.blocks[1].life == 3);
    CHECK(e.blocks[1].rules.size() == 2);
    CHECK(e.blocks[2].life == 1);
    CHECK(e.forget_upto == 1);

    auto open = parse_stream_block("#step 1.");
    CHECK_FALSE(open.delta);
    CHECK(open.blocks.empty());
}

TEST_CASE("malformed online blocks") {
    CHECK_THROWS_AS(parse_stream_block("a. #endstep."), ParseError);
    CHECK_THROWS_AS(parse_stream_block("#step 0. #endstep."), ParseError);
    CHECK_THROWS_AS(parse_stream_block("#step 2. a(X) :- b(X). #endstep."), ParseError);
    CHECK_THROWS_AS(parse_stream_block("#step 2. #volatile : 0. a. #endstep."), ParseError);
    CHECK_THROWS_AS(parse_stream_block("#step 2. #cumulative t. #endstep."), ParseError);
    CHECK_THROWS_AS(parse_stream_block("#step 2. #endstep.", 2), ParseError);
    CHECK_NOTHROW(parse_stream_block("#step 3. #endstep.", 2));
}

TEST_CASE("stream splitting") {
    auto blocks = split_stream_blocks("#step 1. a.\n#endstep.\n#step 2. b.\n#step 3.\nc.\n");
    REQUIRE(blocks.size() == 3);
    CHECK(parse_stream_block(blocks[0]).target_step == 1);
    CHECK(parse_stream_block(blocks[1]).target_step == 2);
    CHECK(parse_stream_block(blocks[2]).blocks.at(0).rules.size() == 1);
    CHECK(split_stream_blocks("  \n% only a comment\n").empty());
}

TEST_CASE("encoding errors carry positions") {
    try {
        parse_program("#base.\np(X) :- q(.\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.location().line == 2);
    }
    CHECK_THROWS_AS(parse_program("#base. p(t)."), ParseError);
    CHECK_THROWS_AS(parse_program("#cumulative t : 2. p(t)."), ParseError);
    CHECK_THROWS_AS(parse_program("#frobnicate."), ParseError);
}

TEST_CASE("random integer expressions print and reparse to the same value") {
    std::mt19937_64 rng(7);
    auto gen = [&](auto& self, int depth) -> std::string {
        if (depth == 0 || rng() % 3 == 0) return std::to_string(static_cast<std::int64_t>(rng() % 41) - 20);
        static const char* ops[] = {"+", "-", "*"};
        return "(" + self(self, depth - 1) + ops[rng() % 3] + self(self, depth - 1) + ")";
    };
    for (int i = 0; i < 100; ++i) {
        std::string expr = gen(gen, 3);
        Engine a(parse_program("#base. v(" + expr + ")."), {});
        Program p = parse_program("#base. v(" + expr + ").");
        Engine b(parse_program(to_string(p)), {});
        auto ra = a.query(0), rb = b.query(0);
        REQUIRE(ra.sat);
        REQUIRE(rb.sat);
        CHECK(a.visible(ra.models[0]) == b.visible(rb.models[0]));
    }
}
