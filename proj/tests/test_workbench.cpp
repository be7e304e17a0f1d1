#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "streamlp/engine.hpp"
#include "streamlp/parser.hpp"
#include "streamlp/workbench.hpp"

using namespace streamlp;

namespace {

const std::vector<std::string> kReferenceSchedule = {
    "jobstart(1,1,1)",  "jobstart(2,1,2)",   "jobstart(3,1,7)",   "jobstart(4,1,12)", "jobstart(5,1,17)",
    "jobstart(1,21,22)", "jobstart(2,21,27)", "jobstart(3,21,32)", "jobstart(4,21,37)"};

CorpusEntry entry(const std::string& name) {
    for (auto& e : load_corpus(STREAMLP_SOURCE_DIR "/corpus"))
        if (e.name == name) return e;
    throw std::runtime_error("missing corpus entry " + name);
}

std::vector<std::string> with(std::vector<std::string> atoms, const std::string& from, const std::string& to) {
    for (auto& a : atoms)
        if (a == from) a = to;
    return atoms;
}

std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("job stream generator is deterministic and well formed") {
    JobStreamParams p;
    p.num_events = 60;
    p.seed = 11;
    std::string a = gen_job_stream(p);
    CHECK(a == gen_job_stream(p));
    p.seed = 12;
    CHECK(a != gen_job_stream(p));
    p.seed = 11;

    auto events = parse_stream(a);
    REQUIRE(events.size() == 60);
    std::set<std::int64_t> sizes;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        CHECK(e.target_step == static_cast<std::int64_t>(i) + 1);
        CHECK(e.delta == 0);
        CHECK(e.forget_upto == e.target_step - p.max_step - 1);
        // an event without jobs has no rules and hence no block
        REQUIRE(e.blocks.size() <= 1);
        if (!e.blocks.empty()) CHECK(e.blocks[0].life == p.max_step + 1);
        auto jobs = active_jobs(std::vector<StreamEvent>{e}, e.target_step, 0);
        sizes.insert(static_cast<std::int64_t>(jobs.size()));
        std::set<std::int64_t> ids;
        for (const auto& j : jobs) {
            CHECK(ids.insert(j.id).second);
            CHECK(j.id >= 1);
            CHECK(j.id <= p.max_jobid);
            CHECK(j.machine >= 1);
            CHECK(j.machine <= p.num_machines);
            CHECK(j.duration >= 1);
            CHECK(j.duration <= p.max_duration);
            CHECK(j.arrival == e.target_step);
        }
    }
    CHECK(sizes == std::set<std::int64_t>{0, 1, 2});
    CHECK(p.name(2) == "5x3x5_15_2");
}

TEST_CASE("the reference schedule passes the checker") {
    auto jobs = active_jobs(entry("jobs-static").stream, 21, 20);
    REQUIRE(jobs.size() == 9);
    CHECK(check_schedule(jobs, kReferenceSchedule, 20, std::nullopt).ok);
    CHECK(check_schedule(jobs, kReferenceSchedule, 20, 41).ok);

    CHECK_FALSE(check_schedule(jobs, with(kReferenceSchedule, "jobstart(2,1,2)", "jobstart(2,1,1)"), 20, std::nullopt).ok);
    CHECK_FALSE(check_schedule(jobs, with(kReferenceSchedule, "jobstart(5,1,17)", "jobstart(5,1,18)"), 20, std::nullopt).ok);
    CHECK_FALSE(check_schedule(jobs, with(kReferenceSchedule, "jobstart(1,21,22)", "jobstart(1,21,20)"), 20, std::nullopt).ok);
    auto missing = kReferenceSchedule;
    missing.pop_back();
    CHECK_FALSE(check_schedule(jobs, missing, 20, std::nullopt).ok);
    auto twice = kReferenceSchedule;
    twice.push_back("jobstart(4,21,38)");
    CHECK_FALSE(check_schedule(jobs, twice, 20, std::nullopt).ok);
}

TEST_CASE("the reference schedule is a model of both job encodings") {
    for (const char* name : {"jobs-static", "jobs-cumulative"}) {
        CAPTURE(name);
        auto e = entry(name);
        std::string pin = "\n#volatile t.\n";
        for (const auto& a : kReferenceSchedule) pin += ":- t = 21, not " + a + ".\n";
        Engine eng(parse_program(e.encoding + pin), {});
        auto events = parse_stream(e.stream);
        for (const auto& ev : events) {
            eng.apply_event(ev);
            auto r = eng.query(ev.delta);
            REQUIRE(r.sat);
            CHECK(r.step == ev.target_step);
        }
    }
}

TEST_CASE("checker accepts greedy schedules and rejects overlaps") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 200; ++round) {
        const std::int64_t max_step = 10;
        std::vector<Job> jobs;
        std::vector<std::string> atoms;
        std::map<std::int64_t, std::int64_t> free_from;  // machine -> first free time
        std::int64_t arrival = 1;
        int n = static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) {
            arrival += static_cast<std::int64_t>(rng() % 3);
            Job j{k + 1, static_cast<std::int64_t>(rng() % 2) + 1, static_cast<std::int64_t>(rng() % 3) + 1, arrival};
            std::int64_t start = std::max(arrival, free_from[j.machine]);
            if (start + j.duration - 1 > arrival + max_step) continue;
            free_from[j.machine] = start + j.duration;
            jobs.push_back(j);
            atoms.push_back("jobstart(" + std::to_string(j.id) + "," + std::to_string(j.arrival) + "," +
                            std::to_string(start) + ")");
        }
        CAPTURE(round);
        CHECK(check_schedule(jobs, atoms, max_step, std::nullopt).ok);
        // the same schedule written in slots of a cycle long enough to hold the window
        std::vector<std::string> slots;
        const std::int64_t modulo = 2 * max_step + 1;
        for (const auto& a : atoms) {
            std::int64_t i, t, s;
            std::sscanf(a.c_str(), "jobstart(%ld,%ld,%ld)", &i, &t, &s);
            slots.push_back("jobstart(" + std::to_string(i) + "," + std::to_string(floor_mod(t, modulo)) + "," +
                            std::to_string(floor_mod(s, modulo)) + ")");
        }
        CHECK(check_schedule(jobs, slots, max_step, modulo).ok);
        // moving one job onto another job's start on the same machine must fail
        for (std::size_t a = 0; a < jobs.size(); ++a)
            for (std::size_t b = 0; b < jobs.size(); ++b) {
                if (a == b || jobs[a].machine != jobs[b].machine) continue;
                std::int64_t sb, ignore;
                std::sscanf(atoms[b].c_str(), "jobstart(%ld,%ld,%ld)", &ignore, &ignore, &sb);
                auto moved = atoms;
                moved[a] = "jobstart(" + std::to_string(jobs[a].id) + "," + std::to_string(jobs[a].arrival) + "," +
                           std::to_string(sb) + ")";
                CHECK_FALSE(check_schedule(jobs, moved, max_step, std::nullopt).ok);
            }
    }
}

TEST_CASE("bench variants agree and write their tables") {
    JobStreamParams p;
    p.max_jobid = 3;
    p.max_duration = 2;
    p.num_machines = 2;
    p.max_step = 4;
    p.num_events = 12;
    p.max_jobs = 3;
    std::vector<BenchStream> streams;
    for (int n = 1; n <= 2; ++n) {
        p.seed = static_cast<std::uint64_t>(n);
        streams.push_back({p.name(n), gen_job_stream(p)});
    }
    BenchConfig cfg;
    cfg.static_encoding = parse_program(entry("jobs-static").encoding);
    cfg.cumulative_encoding = parse_program(entry("jobs-cumulative").encoding);
    cfg.consts = p.consts();
    cfg.max_step = p.max_step;
    cfg.out_dir = std::filesystem::temp_directory_path() / "streamlp-bench-test";
    std::filesystem::remove_all(cfg.out_dir);

    auto res = run_bench(streams, cfg);
    CHECK(res.records.size() == 2 * 12 * 3);
    int unsat = 0;
    for (const auto& s : streams) {
        auto [sat, un] = res.counts[s.name];
        CHECK(sat + un == 12);
        unsat += un;
    }
    CHECK(res.schedules_checked == 2 * (2 * 12 - unsat));
    CHECK(count_lines(cfg.out_dir / "bench.csv") == 1 + res.records.size());
    CHECK(count_lines(cfg.out_dir / "plot.csv") == 1 + 12);
    CHECK(count_lines(cfg.out_dir / ("plot_" + streams[1].name + ".csv")) == 1 + 12);
    std::filesystem::remove_all(cfg.out_dir);
}
