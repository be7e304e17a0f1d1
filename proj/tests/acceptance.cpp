// Acceptance run: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "streamlp/controller.hpp"
#include "streamlp/engine.hpp"
#include "streamlp/ground.hpp"
#include "streamlp/parser.hpp"
#include "streamlp/solver.hpp"
#include "streamlp/workbench.hpp"
#include "support/random_program.hpp"

using namespace streamlp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

fs::path g_corpus = STREAMLP_SOURCE_DIR "/corpus";
fs::path g_out = "acceptance-out";

CorpusEntry entry(const std::string& name) {
    for (auto& e : load_corpus(g_corpus))
        if (e.name == name) return e;
    throw Error("missing corpus entry " + name);
}

/// Per event: query result and the visible atoms of every model.
struct Step {
    StreamEvent event;
    QueryResult result;
    std::vector<std::vector<std::string>> models;
};

std::vector<Step> run_incremental(const std::string& encoding, const std::string& stream, std::size_t max_models = 1) {
    Engine e(parse_program(encoding));
    std::vector<Step> out;
    for (const auto& ev : parse_stream(stream)) {
        e.apply_event(ev);
        Step s{ev, e.query(ev.delta, max_models), {}};
        for (const auto& m : s.result.models) s.models.push_back(e.visible(m));
        out.push_back(std::move(s));
    }
    return out;
}

bool has(const std::vector<std::string>& atoms, const std::string& a) {
    return std::find(atoms.begin(), atoms.end(), a) != atoms.end();
}

bool has_prefix(const std::vector<std::string>& atoms, const std::string& prefix) {
    return std::any_of(atoms.begin(), atoms.end(), [&](const std::string& a) { return a.rfind(prefix, 0) == 0; });
}

std::optional<std::int64_t> const_value(const Program& p, const std::string& name) {
    for (const auto& c : p.consts)
        if (c.name == name && c.value.kind == Term::Kind::Integer) return c.value.number;
    return std::nullopt;
}

const std::vector<std::string> kReferenceSchedule = {
    "jobstart(1,1,1)",  "jobstart(2,1,2)",   "jobstart(3,1,7)",   "jobstart(4,1,12)", "jobstart(5,1,17)",
    "jobstart(1,21,22)", "jobstart(2,21,27)", "jobstart(3,21,32)", "jobstart(4,21,37)"};

// ---------------------------------------------------------------- criteria

Outcome yale() {
    Outcome o;
    Engine e(parse_program(entry("yale").encoding));
    e.advance_to(2);
    const std::string expected =
        "{ loaded }.\n"
        "live(0).\n"
        "{ shoot(2) }.\n"
        "live(1) :- live(0).\n"
        "{ shoot(3) }.\n"
        "ab(2) :- shoot(2), loaded.\n"
        "live(2) :- live(1), not ab(2).\n"
        ":- live(2).\n"
        ":- shoot(3).\n";
    o.require(dump(e.compose_active()) == expected, "composed program differs:\n" + dump(e.compose_active()));
    auto r = e.query(0);
    o.require(r.sat && r.step == 2, "no answer set at step 2");
    if (r.sat)
        o.require(e.visible(r.models[0]) == std::vector<std::string>{"ab(2)", "live(0)", "live(1)", "loaded", "shoot(2)"},
                  "first answer set differs");
    return o;
}

Outcome matcher() {
    Outcome o;
    for (const char* name : {"matcher-decaying", "matcher-accumulating", "matcher-replayed"}) {
        auto c = entry(name);
        auto steps = run_incremental(c.encoding, c.stream);
        o.require(steps.size() == 3, std::string(name) + ": expected three events");
        if (steps.size() != 3) continue;
        const char* accept[] = {nullptr, "accept(2)", nullptr};
        for (int i = 0; i < 3; ++i) {
            const auto& s = steps[static_cast<std::size_t>(i)];
            std::string where = std::string(name) + " step " + std::to_string(i + 1);
            o.require(s.result.sat && s.result.step == i + 1, where + ": not SAT at its own step");
            if (!s.result.sat) continue;
            bool any = has_prefix(s.models[0], "accept(");
            o.require(accept[i] ? has(s.models[0], accept[i]) : !any, where + ": wrong accept verdict");
            o.require(!has(s.models[0], "accept(3)"), where + ": accept(3) derived");
        }
    }
    return o;
}

Outcome access_control() {
    Outcome o;
    const std::set<std::pair<std::string, std::int64_t>> expected{{"bob", 4}, {"claude", 5}, {"claude", 6}, {"alice", 8}};
    for (const char* name : {"access-static", "access-cumulative"}) {
        auto c = entry(name);
        auto steps = run_incremental(c.encoding, c.stream, 0);
        std::set<std::pair<std::string, std::int64_t>> got;
        for (const auto& s : steps) {
            o.require(s.result.sat && s.result.step == s.event.target_step,
                      std::string(name) + ": not SAT at step " + std::to_string(s.event.target_step));
            // every answer set must agree on the closures
            std::optional<std::set<std::string>> closed;
            for (const auto& m : s.models) {
                std::set<std::string> users;
                for (const auto& a : m)
                    if (a.rfind("account(", 0) == 0 && a.ends_with(",closed)")) users.insert(a.substr(8, a.find(',') - 8));
                if (closed) o.require(*closed == users, std::string(name) + ": answer sets disagree on closures");
                closed = users;
            }
            if (closed)
                for (const auto& u : *closed) got.insert({u, s.event.target_step});
        }
        o.require(got == expected, std::string(name) + ": closures differ");
    }
    return o;
}

Outcome overtaking() {
    Outcome o;
    auto completions = [](const std::vector<Step>& steps) {
        std::set<std::int64_t> at;
        for (const auto& s : steps)
            for (const auto& m : s.models)
                if (has_prefix(m, "state(infront,")) at.insert(s.result.step);
        return at;
    };
    auto good = run_incremental(entry("overtaking").encoding, entry("overtaking").stream, 0);
    for (const auto& s : good) o.require(s.result.sat, "overtaking: UNSAT at step " + std::to_string(s.event.target_step));
    o.require(completions(good) == std::set<std::int64_t>{4}, "overtaking: completion not exactly at step 4");

    auto mutant = run_incremental(entry("overtaking-mutant").encoding, entry("overtaking-mutant").stream, 0);
    bool spurious = false;
    for (const auto& s : mutant)
        if (s.result.step == 7)
            for (const auto& m : s.models) spurious = spurious || has(m, "state(infront,red,4)");
    o.require(spurious, "mutant: state(infront,red,4) not derived at step 7");
    return o;
}

Outcome jobs() {
    Outcome o;
    for (const char* name : {"jobs-static", "jobs-cumulative"}) {
        auto c = entry(name);
        Program p = resolve_consts(parse_program(c.encoding), {});
        auto modulo = std::string(name) == "jobs-static" ? const_value(p, "modulo") : std::nullopt;
        o.require(std::string(name) != "jobs-static" || modulo == 41, "unexpected modulo in the static encoding");
        auto max_step = const_value(p, "max_step").value_or(20);
        auto events = parse_stream(c.stream);
        for (const auto& s : run_incremental(c.encoding, c.stream)) {
            std::string where = std::string(name) + " step " + std::to_string(s.event.target_step);
            o.require(s.result.sat && s.result.step == s.event.target_step, where + ": not SAT");
            if (!s.result.sat) continue;
            auto v = check_schedule(active_jobs(events, s.result.step, max_step), s.models[0], max_step, modulo);
            o.require(v.ok, where + ": " + v.message);
        }
        // the reference assignment is admissible: pin it and solve
        std::string pin = "\n#volatile t.\n";
        for (const auto& a : kReferenceSchedule) pin += ":- t = 21, not " + a + ".\n";
        auto pinned = run_incremental(c.encoding + pin, c.stream);
        o.require(!pinned.empty() && pinned.back().result.sat && pinned.back().result.step == 21,
                  std::string(name) + ": reference schedule is not a model");
        auto v = check_schedule(active_jobs(events, 21, max_step), kReferenceSchedule, max_step, std::nullopt);
        o.require(v.ok, "reference schedule rejected by the checker: " + v.message);
    }
    auto over = entry("jobs-overload");
    auto steps = run_incremental(over.encoding, over.stream);
    o.require(steps.size() == 2 && steps[0].result.sat, "overload: step 1 not SAT");
    o.require(steps.size() == 2 && !steps[1].result.sat && steps[1].result.step == 21, "overload: step 21 not UNSAT");
    return o;
}

Outcome solver_oracle() {
    Outcome o;
    std::mt19937_64 rng(424242);
    int agree = 0;
    for (int i = 0; i < 200; ++i) {
        AtomTable table;
        GroundProgram gp = testing::random_program(rng, table);
        auto expected = brute_force(gp);
        auto got = solve(gp, 0);
        std::sort(got.begin(), got.end());
        if (got == expected) agree++;
        else o.require(false, "program " + std::to_string(i) + " disagrees with brute force");
    }
    o.detail = o.ok ? std::to_string(agree) + "/200 programs agree" : o.detail;
    return o;
}

Outcome relaunch() {
    Outcome o;
    int queries = 0;
    for (const auto& c : load_corpus(g_corpus)) {
        Program p = parse_program(c.encoding);
        SessionConfig inc, mono;
        mono.relaunch = true;
        Session a(p, inc), b(p, mono);
        for (const auto& block : split_stream_blocks(c.stream)) {
            a.handle_text(block);
            b.handle_text(block);
            const auto &ra = a.last_result(), &rb = b.last_result();
            queries++;
            o.require(ra.sat == rb.sat && ra.step == rb.step && ra.models.empty() == b.last_models().empty(),
                      c.name + ": incremental and from-scratch results differ at step " + std::to_string(ra.step));
        }
    }
    JobStreamParams jp;
    jp.num_events = 50;
    std::vector<BenchStream> streams;
    for (int n = 1; n <= 3; ++n) {
        jp.seed = 100 + static_cast<std::uint64_t>(n);
        streams.push_back({jp.name(n), gen_job_stream(jp)});
    }
    BenchConfig cfg;
    cfg.static_encoding = parse_program(entry("jobs-static").encoding);
    cfg.cumulative_encoding = parse_program(entry("jobs-cumulative").encoding);
    cfg.consts = jp.consts();
    cfg.max_step = jp.max_step;
    try {
        auto res = run_bench(streams, cfg);
        queries += static_cast<int>(res.records.size() / 3);
    } catch (const Error& e) {
        o.require(false, e.what());
    }
    if (o.ok) o.detail = std::to_string(queries) + " queries agree";
    return o;
}

Outcome bench_tables() {
    Outcome o;
    JobStreamParams jp;  // the 5x3x5_15 class, 200 events
    std::vector<BenchStream> streams;
    for (int n = 1; n <= 3; ++n) {
        jp.seed = static_cast<std::uint64_t>(n);
        streams.push_back({jp.name(n), gen_job_stream(jp)});
    }
    BenchConfig cfg;
    cfg.static_encoding = parse_program(entry("jobs-static").encoding);
    cfg.cumulative_encoding = parse_program(entry("jobs-cumulative").encoding);
    cfg.consts = jp.consts();
    cfg.max_step = jp.max_step;
    cfg.out_dir = g_out;
    BenchResult res;
    try {
        res = run_bench(streams, cfg);
    } catch (const Error& e) {
        o.require(false, e.what());
        return o;
    }
    auto lines = [](const fs::path& p) {
        std::ifstream in(p);
        std::size_t n = 0;
        std::string l;
        while (std::getline(in, l)) ++n;
        return n;
    };
    o.require(lines(g_out / "bench.csv") == 1 + 3 * 200 * 3, "bench.csv incomplete");
    o.require(lines(g_out / "plot.csv") == 1 + 200, "plot.csv incomplete");
    std::int64_t modulo = 2 * jp.max_step + 1;
    std::int64_t warm = 2 * modulo;
    std::ostringstream counts;
    for (const auto& s : streams) {
        auto [sat, unsat] = res.counts[s.name];
        counts << " " << s.name << " " << sat << "/" << unsat;
        o.require(sat + unsat == 200, s.name + ": SAT+UNSAT != 200");
        const auto& rules = res.static_rules[s.name];
        for (std::int64_t k = warm; k + modulo <= static_cast<std::int64_t>(rules.size()); ++k)
            o.require(rules[static_cast<std::size_t>(k - 1)] == rules[static_cast<std::size_t>(k + modulo - 1)],
                      s.name + ": static rule count changes between steps " + std::to_string(k) + " and " +
                          std::to_string(k + modulo));
        const auto& cum = res.cumulative_rules[s.name];
        o.require(cum.size() == 200 && cum.back() > cum[static_cast<std::size_t>(jp.max_step)],
                  s.name + ": cumulative rule count does not grow");
    }
    if (o.ok) o.detail = "SAT/UNSAT" + counts.str();
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    std::string corpus = g_corpus.string(), out = g_out.string();
    app.add_option("--only", only, "run these criteria only");
    app.add_option("--corpus", corpus, "corpus directory");
    app.add_option("--out", out, "directory for the benchmark tables");
    CLI11_PARSE(app, argc, argv);
    g_corpus = corpus;
    g_out = out;

    struct Criterion {
        int id;
        const char* name;
        double limit;  // seconds; 0 for none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "yale shooting", 1, yale},
        {2, "regex matcher", 1, matcher},
        {3, "access control", 2, access_control},
        {4, "overtaking", 2, overtaking},
        {5, "job scheduling", 10, jobs},
        {6, "solver oracle equivalence", 60, solver_oracle},
        {7, "relaunch equivalence", 300, relaunch},
        {8, "benchmark tables", 0, bench_tables},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.ok && c.limit > 0 && secs >= c.limit) o = {false, "took " + std::to_string(secs) + " s"};
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2fs", secs);
        std::cout << "criterion " << c.id << " " << (o.ok ? "PASS" : "FAIL") << " " << c.name << " (" << buf << ")"
                  << (o.detail.empty() ? "" : ": " + o.detail) << std::endl;
        if (!o.ok) failed++;
    }
    return failed ? 1 : 0;
}
