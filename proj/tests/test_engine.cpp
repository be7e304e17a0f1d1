#include <doctest.h>

#include <algorithm>
#include <set>

#include "streamlp/engine.hpp"

using namespace streamlp;

namespace {

const char* kYale = R"(
#base.
{ loaded }.
live(0).
#cumulative t.
{ shoot(t+1) }.
ab(t) :- shoot(t), loaded.
live(t) :- live(t-1), not ab(t).
#volatile t.
:- live(t).
:- shoot(t+1).
)";

const char* kAccumulating = R"(
#iinit 0.
#cumulative t.
#external read(a,t+1).  #external read(b,t+1).
accept(t) :- read(a,t), read(a,t-1), not read(a;b,t+1).
)";

const char* kReplayed = R"(
#cumulative t.
#external read(a,t-1;t,t).  #external read(b,t-1;t,t).
accept(t) :- read(a,t-1,t), read(a,t,t).
)";

const char* kDecaying = R"(
#cumulative t.
#external read(a,t).  #external read(b,t).
accept(t) :- read(a,t-1), read(a,t).
)";

bool has(const std::vector<std::string>& atoms, const std::string& a) {
    return std::find(atoms.begin(), atoms.end(), a) != atoms.end();
}

std::vector<StreamEvent> events_of(const std::string& text) { return parse_stream(text); }

}  // namespace

TEST_CASE("yale composed program at step 2") {
    Engine e(parse_program(kYale));
    CHECK(e.step() == 0);
    CHECK(e.slices().size() == 1);
    e.advance_to(2);
    CHECK(e.step() == 2);
    auto gp = e.compose_active();
    CHECK(dump(gp) ==
          "{ loaded }.\n"
          "live(0).\n"
          "{ shoot(2) }.\n"
          "live(1) :- live(0).\n"
          "{ shoot(3) }.\n"
          "ab(2) :- shoot(2), loaded.\n"
          "live(2) :- live(1), not ab(2).\n"
          ":- live(2).\n"
          ":- shoot(3).\n");
    // one expired and one active volatile slice
    int expired = 0, active = 0;
    for (const auto& rec : e.slices())
        if (rec.slice.assumption) (rec.expired ? expired : active)++;
    CHECK(expired == 1);
    CHECK(active == 1);

    auto r = e.query(0);
    REQUIRE(r.sat);
    CHECK(r.step == 2);
    CHECK(e.visible(r.models[0]) == std::vector<std::string>{"ab(2)", "live(0)", "live(1)", "loaded", "shoot(2)"});
    // the one-shot solve of the composed program agrees
    auto ms = solve(gp, 0);
    REQUIRE(ms.size() == 1);
    CHECK(e.visible(ms[0]) == e.visible(r.models[0]));
}

TEST_CASE("yale query retries until satisfiable") {
    Engine e(parse_program(kYale));
    e.apply_event(events_of("#step 1. #endstep.").at(0));
    auto r = e.query(std::nullopt);
    CHECK(r.sat);
    CHECK(r.step == 2);
    CHECK(r.attempts == 2);
    Engine f(parse_program(kYale));
    f.apply_event(events_of("#step 1 : 0. #endstep.").at(0));
    auto u = f.query(0);
    CHECK_FALSE(u.sat);
    CHECK(u.step == 1);
    CHECK_FALSE(u.cap_reached);
}

TEST_CASE("advance to the current step is a no-op") {
    Engine e(parse_program(kYale));
    e.advance_to(2);
    auto n = e.slices().size();
    e.advance_to(2);
    e.advance_to(1);
    CHECK(e.slices().size() == n);
    CHECK(e.step() == 2);
}

TEST_CASE("accumulating matcher") {
    Engine e(parse_program(kAccumulating));
    CHECK(e.step() == -1);
    e.advance_to(0);
    auto r1 = e.atoms().find(GroundAtom{intern("read"), {Value::symbol("a"), Value::integer(1)}});
    REQUIRE(r1.has_value());
    CHECK(e.registry().external.count(*r1));
    auto evs = events_of("#step 1. read(a,1).\n#step 2. read(a,2).\n#step 3. read(b,3).\n");
    REQUIRE(evs.size() == 3);
    e.apply_event(evs[0]);
    auto q1 = e.query(0);
    REQUIRE(q1.sat);
    CHECK_FALSE(has(e.visible(q1.models[0]), "accept(1)"));
    e.apply_event(evs[1]);
    auto q2 = e.query(0);
    REQUIRE(q2.sat);
    CHECK(has(e.visible(q2.models[0]), "accept(2)"));
    e.apply_event(evs[2]);
    auto q3 = e.query(0);
    REQUIRE(q3.sat);
    CHECK_FALSE(has(e.visible(q3.models[0]), "accept(3)"));
    CHECK_FALSE(has(e.visible(q3.models[0]), "accept(2)"));
}

TEST_CASE("replayed matcher") {
    Engine e(parse_program(kReplayed));
    auto evs = events_of(
        "#step 1. #volatile. read(a,1,1).\n"
        "#step 2. #volatile. read(a,1,2). read(a,2,2).\n"
        "#step 3. #volatile. read(a,2,3). read(b,3,3).\n");
    std::vector<bool> accepted;
    for (const auto& ev : evs) {
        e.apply_event(ev);
        auto q = e.query(0);
        REQUIRE(q.sat);
        auto v = e.visible(q.models[0]);
        accepted.push_back(std::any_of(v.begin(), v.end(), [](const std::string& s) { return s.starts_with("accept"); }));
    }
    CHECK(accepted == std::vector<bool>{false, true, false});
}

TEST_CASE("decaying matcher expires online data") {
    Engine e(parse_program(kDecaying));
    auto evs = events_of(
        "#step 1. #volatile : 2. read(a,1).\n"
        "#step 2. #volatile : 2. read(a,2).\n"
        "#step 3. #volatile : 2. read(b,3).\n");
    auto active_reads = [&] {
        std::set<std::string> out;
        for (const auto& rec : e.slices())
            if (rec.online && !rec.expired)
                for (auto h : rec.slice.new_heads) out.insert(e.atoms().text(h));
        return out;
    };
    e.apply_event(evs[0]);
    CHECK(active_reads() == std::set<std::string>{"read(a,1)"});
    e.apply_event(evs[1]);
    CHECK(active_reads() == std::set<std::string>{"read(a,1)", "read(a,2)"});
    auto q2 = e.query(0);
    CHECK(has(e.visible(q2.models[0]), "accept(2)"));
    e.apply_event(evs[2]);
    CHECK(active_reads() == std::set<std::string>{"read(a,2)", "read(b,3)"});
    auto q3 = e.query(0);
    auto v3 = e.visible(q3.models[0]);
    CHECK_FALSE(has(v3, "accept(2)"));
    CHECK_FALSE(has(v3, "accept(3)"));
    // expired input reverts to an undefined external
    auto r1 = e.atoms().find(GroundAtom{intern("read"), {Value::symbol("a"), Value::integer(1)}});
    REQUIRE(r1.has_value());
    CHECK(e.registry().external.count(*r1));
    CHECK_FALSE(e.registry().defined.count(*r1));
}

TEST_CASE("expiration exactness on the decaying matcher") {
    // a single reading influences exactly the steps inside its life span
    for (std::int64_t life = 1; life <= 3; ++life) {
        Engine e(parse_program(kDecaying));
        e.apply_event(events_of("#step 2. #volatile : " + std::to_string(life) + ". read(a,1). read(a,2).").at(0));
        for (std::int64_t k = 2; k <= 6; ++k) {
            if (k > 2) e.apply_event(events_of("#step " + std::to_string(k) + ".").at(0));
            auto q = e.query(0);
            REQUIRE(q.sat);
            CHECK(has(e.visible(q.models[0]), "accept(2)") == (k <= 2 + life - 1));
        }
    }
}

TEST_CASE("online errors leave the state unchanged") {
    Engine e(parse_program(kDecaying));
    e.apply_event(events_of("#step 1. #volatile : 2. read(a,1).").at(0));
    auto n = e.slices().size();
    auto step = e.step();
    // undeclared input
    CHECK_THROWS_AS(e.apply_event(events_of("#step 4. #volatile. foo(1).").at(0)), StreamError);
    CHECK(e.slices().size() == n);
    CHECK(e.step() == step);
    // non-increasing step
    CHECK_THROWS_AS(e.apply_event(events_of("#step 1. read(b,1).").at(0)), StreamError);
    // forgetting an atom defined by active online data
    CHECK_THROWS_AS(e.apply_event(events_of("#step 2. #forget 1.").at(0)), StreamError);
    CHECK(e.step() == step);
    // redefinition of an active online atom
    CHECK_THROWS_AS(e.apply_event(events_of("#step 2. #volatile. read(a,1).").at(0)), ModularityError);
    CHECK(e.slices().size() == n);
    e.apply_event(events_of("#step 2. #volatile : 2. read(a,2).").at(0));
    auto q = e.query(0);
    CHECK(has(e.visible(q.models[0]), "accept(2)"));
}

TEST_CASE("redefinition after expiry is rejected") {
    Engine e(parse_program(kDecaying));
    e.apply_event(events_of("#step 1. #volatile. read(a,1).").at(0));
    e.apply_event(events_of("#step 2.").at(0));
    CHECK_THROWS_AS(e.apply_event(events_of("#step 3. #volatile. read(a,1).").at(0)), ModularityError);
}

TEST_CASE("forget disposes of undefined inputs") {
    Engine e(parse_program(kAccumulating));
    auto evs = events_of("#step 1. read(a,1).\n#step 2. read(a,2).\n#step 3. read(b,3). #forget 2.\n");
    for (const auto& ev : evs) e.apply_event(ev);
    auto find = [&](const char* c, int i) {
        return e.atoms().find(GroundAtom{intern("read"), {Value::symbol(c), Value::integer(i)}});
    };
    // read(b,1), read(b,2), read(a,3) were declared at steps 0..2
    for (auto [c, i] : std::vector<std::pair<const char*, int>>{{"b", 1}, {"b", 2}, {"a", 3}}) {
        auto id = find(c, i);
        REQUIRE(id.has_value());
        CHECK(e.registry().forgotten.count(*id));
        CHECK_FALSE(e.registry().external.count(*id));
    }
    CHECK(e.registry().external.count(*find("a", 4)));
    auto q = e.query(0);
    REQUIRE(q.sat);
    CHECK(e.visible(q.models[0]) == std::vector<std::string>{"read(a,1)", "read(a,2)", "read(b,3)"});
    // rules mentioning forgotten atoms were simplified
    for (const auto& r : e.compose_active().rules)
        for (const auto& l : r.body) CHECK_FALSE(e.registry().forgotten.count(l.atom));
    // a forgotten atom cannot be defined later
    CHECK_THROWS(e.apply_event(events_of("#step 4. read(a,3).").at(0)));
}

TEST_CASE("offline rule count stays bounded under a decaying window") {
    Engine e(parse_program(R"(
#cumulative t.
#external read(t).
#volatile t : 3.
seen(t) :- read(t).
seen(t) :- read(t-1).
)"));
    std::vector<std::size_t> counts;
    for (int k = 1; k <= 40; ++k) {
        e.apply_event(events_of("#step " + std::to_string(k) + ". #volatile : 2. read(" + std::to_string(k) + ").").at(0));
        e.query(0);
        counts.push_back(e.active_rule_count());
    }
    CHECK(*std::max_element(counts.begin() + 5, counts.end()) == *std::min_element(counts.begin() + 5, counts.end()));
}

TEST_CASE("incremental answers equal monolithic recomputation on the matchers") {
    struct Case {
        const char* encoding;
        const char* stream;
    };
    std::vector<Case> cases{
        {kAccumulating, "#step 1. read(a,1).\n#step 2. read(a,2).\n#step 3. read(b,3).\n#step 4. read(a,4).\n#step 5. read(a,5).\n"},
        {kReplayed,
         "#step 1. #volatile. read(a,1,1).\n#step 2. #volatile. read(a,1,2). read(a,2,2).\n"
         "#step 3. #volatile. read(a,2,3). read(b,3,3).\n#step 4. #volatile. read(b,3,4). read(a,4,4).\n"},
        {kDecaying,
         "#step 1. #volatile : 2. read(a,1).\n#step 2. #volatile : 2. read(a,2).\n#step 3. #volatile : 2. read(b,3).\n"
         "#step 5. #volatile : 2. read(a,5).\n#step 6. #volatile : 2. read(a,6).\n"},
        {kYale, "#step 1. #endstep.\n#step 4.\n"},
    };
    for (const auto& c : cases) {
        Program p = parse_program(c.encoding);
        Program resolved = resolve_consts(p, {});
        Engine e(p);
        auto evs = events_of(c.stream);
        std::vector<StreamEvent> seen;
        for (const auto& ev : evs) {
            std::int64_t start = std::max(e.step(), ev.target_step);
            e.apply_event(ev);
            seen.push_back(ev);
            auto inc = e.query(std::nullopt, 0);
            std::vector<std::vector<std::string>> mono_models;
            auto mono = monolithic_query(resolved, seen, start, ev.target_step + 100, 0, &mono_models);
            INFO(c.encoding << " at step " << ev.target_step);
            CHECK(inc.sat == mono.sat);
            CHECK(inc.step == mono.step);
            std::set<std::vector<std::string>> a(mono_models.begin(), mono_models.end()), b;
            for (const auto& m : inc.models) b.insert(e.visible(m));
            CHECK(a == b);
        }
    }
}
