#include "streamlp/workbench.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "streamlp/engine.hpp"
#include "streamlp/parser.hpp"

namespace streamlp {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Uniform draw from [lo, hi] by rejection, independent of the standard library's distributions.
std::int64_t draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
}

}  // namespace

std::vector<CorpusEntry> load_corpus(const fs::path& root) {
    std::vector<CorpusEntry> out;
    std::vector<fs::path> dirs;
    for (const auto& d : fs::directory_iterator(root))
        if (d.is_directory()) dirs.push_back(d.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
        auto enc = read_file(d / "encoding.lp");
        auto str = read_file(d / "stream.str");
        if (!enc || !str) throw Error("corpus entry " + d.string() + " lacks encoding.lp or stream.str");
        out.push_back(CorpusEntry{d.filename().string(), d, *enc, *str, read_file(d / "expected.transcript"),
                                  read_file(d / "expected.verdicts")});
    }
    return out;
}

std::string JobStreamParams::name(int n) const {
    return std::to_string(max_jobid) + "x" + std::to_string(max_duration) + "x" + std::to_string(num_machines) + "_" +
           std::to_string(max_step) + "_" + std::to_string(n);
}

std::map<std::string, std::int64_t> JobStreamParams::consts() const {
    return {{"max_jobid", max_jobid}, {"max_duration", max_duration}, {"num_machines", num_machines}, {"max_step", max_step}};
}

std::string gen_job_stream(const JobStreamParams& p) {
    std::mt19937_64 rng(p.seed);
    std::ostringstream out;
    std::vector<std::int64_t> ids;
    for (std::int64_t i = 1; i <= p.num_events; ++i) {
        std::int64_t k = draw(rng, p.min_jobs, std::min(p.max_jobs, p.max_jobid));
        ids.clear();
        for (std::int64_t id = 1; id <= p.max_jobid; ++id) ids.push_back(id);
        for (std::int64_t j = 0; j < k; ++j)
            std::swap(ids[static_cast<std::size_t>(j)], ids[static_cast<std::size_t>(draw(rng, j, p.max_jobid - 1))]);
        std::sort(ids.begin(), ids.begin() + k);
        out << "#step " << i << " : 0. #volatile : " << p.max_step + 1 << ".\n";
        for (std::int64_t j = 0; j < k; ++j) {
            std::int64_t m = draw(rng, 1, p.num_machines);
            std::int64_t d = draw(rng, 1, p.max_duration);
            out << "job(" << ids[static_cast<std::size_t>(j)] << "," << m << "," << d << "," << i << ").\n";
        }
        out << "#forget " << i - p.max_step - 1 << ".\n#endstep.\n";
    }
    return out.str();
}

std::vector<Job> active_jobs(const std::string& stream_text, std::int64_t step, std::int64_t max_step) {
    return active_jobs(parse_stream(stream_text), step, max_step);
}

std::vector<Job> active_jobs(const std::vector<StreamEvent>& events, std::int64_t step, std::int64_t max_step) {
    std::vector<Job> jobs;
    for (const auto& ev : events) {
        if (ev.target_step > step || ev.target_step < step - max_step) continue;
        for (const auto& block : ev.blocks)
            for (const auto& r : block.rules) {
                Job j{};
                if (std::sscanf(to_string(r).c_str(), "job(%" SCNd64 ",%" SCNd64 ",%" SCNd64 ",%" SCNd64 ").", &j.id,
                                &j.machine, &j.duration, &j.arrival) == 4)
                    jobs.push_back(j);
            }
    }
    return jobs;
}

ScheduleVerdict check_schedule(const std::vector<Job>& jobs, const std::vector<std::string>& atoms, std::int64_t max_step,
                               std::optional<std::int64_t> modulo) {
    auto fail = [](std::string m) { return ScheduleVerdict{false, std::move(m)}; };
    std::vector<std::int64_t> start(jobs.size(), INT64_MIN);
    for (const auto& a : atoms) {
        std::int64_t i, t, s;
        if (std::sscanf(a.c_str(), "jobstart(%" SCNd64 ",%" SCNd64 ",%" SCNd64 ")", &i, &t, &s) != 3) continue;
        std::optional<std::size_t> match;
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            bool same_time = modulo ? floor_mod(jobs[k].arrival, *modulo) == t : jobs[k].arrival == t;
            if (jobs[k].id == i && same_time) {
                if (match) return fail(a + " matches two jobs");
                match = k;
            }
        }
        if (!match) return fail(a + " does not belong to an active job");
        if (start[*match] != INT64_MIN) return fail("job " + std::to_string(i) + " started twice");
        const Job& j = jobs[*match];
        start[*match] = modulo ? j.arrival + floor_mod(s - j.arrival, *modulo) : s;
    }
    struct Busy {
        std::int64_t machine, from, to;
        std::size_t job;
    };
    std::vector<Busy> busy;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const Job& j = jobs[k];
        std::string tag = "job(" + std::to_string(j.id) + "," + std::to_string(j.machine) + "," + std::to_string(j.duration) +
                          "," + std::to_string(j.arrival) + ")";
        if (start[k] == INT64_MIN) return fail(tag + " is not scheduled");
        if (start[k] < j.arrival) return fail(tag + " starts before its arrival");
        if (start[k] + j.duration - 1 > j.arrival + max_step) return fail(tag + " misses its deadline");
        busy.push_back({j.machine, start[k], start[k] + j.duration - 1, k});
    }
    std::sort(busy.begin(), busy.end(), [](const Busy& a, const Busy& b) {
        return std::tie(a.machine, a.from) < std::tie(b.machine, b.from);
    });
    for (std::size_t k = 1; k < busy.size(); ++k)
        if (busy[k].machine == busy[k - 1].machine && busy[k].from <= busy[k - 1].to)
            return fail("jobs overlap on machine " + std::to_string(busy[k].machine) + " at time " +
                        std::to_string(busy[k].from));
    return {};
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

BenchResult run_bench(const std::vector<BenchStream>& streams, const BenchConfig& cfg) {
    BenchResult res;
    Program cumulative = resolve_consts(cfg.cumulative_encoding, cfg.consts);
    std::optional<std::int64_t> modulo;
    {
        Program st = resolve_consts(cfg.static_encoding, cfg.consts);
        for (const auto& c : st.consts)
            if (c.name == "modulo" && c.value.kind == Term::Kind::Integer) modulo = c.value.number;
    }
    EngineOptions opts;
    opts.reuse_learned = cfg.reuse_learned;
    for (const auto& stream : streams) {
        auto events = parse_stream(stream.text);
        Engine st(cfg.static_encoding, cfg.consts, opts);
        Engine cu(cfg.cumulative_encoding, cfg.consts, opts);
        std::int64_t relaunch_step = 0;
        auto& counts = res.counts[stream.name];
        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto& ev = events[e];
            auto verify = [&](Engine& eng, const QueryResult& r, std::optional<std::int64_t> mod) {
                if (!cfg.check_schedules || !r.sat) return;
                auto v = check_schedule(active_jobs(events, r.step, cfg.max_step), eng.visible(r.models[0]),
                                        cfg.max_step, mod);
                if (!v.ok) throw Error("invalid schedule in " + stream.name + " at step " + std::to_string(r.step) + ": " + v.message);
                res.schedules_checked++;
            };

            auto t0 = std::chrono::steady_clock::now();
            st.apply_event(ev);
            auto rs = st.query(ev.delta);
            double ts = seconds_since(t0);
            verify(st, rs, modulo);

            t0 = std::chrono::steady_clock::now();
            cu.apply_event(ev);
            auto rc = cu.query(ev.delta);
            double tc = seconds_since(t0);
            verify(cu, rc, std::nullopt);

            // relaunch: fresh grounding of the cumulative encoding over the active window only
            t0 = std::chrono::steady_clock::now();
            std::int64_t start = std::max(relaunch_step, ev.target_step);
            std::int64_t first = std::max(cumulative.iinit_value(), start - cfg.max_step);
            Program window = cumulative;
            window.iinit = Term::integer(first);
            std::vector<StreamEvent> recent;
            for (std::size_t k = 0; k <= e; ++k)
                if (events[k].target_step >= first) recent.push_back(events[k]);
            std::int64_t limit = ev.target_step + (ev.delta ? *ev.delta : 100);
            auto rr = monolithic_query(window, recent, start, std::max(start, limit), 1);
            double tr = seconds_since(t0);
            relaunch_step = rr.step;

            if (rs.sat != rc.sat || rs.sat != rr.sat || rs.step != rc.step || rs.step != rr.step)
                throw Error("verdicts disagree in " + stream.name + " at step " + std::to_string(ev.target_step) +
                            ": static " + (rs.sat ? "SAT" : "UNSAT") + ", cumulative " + (rc.sat ? "SAT" : "UNSAT") +
                            ", relaunch " + (rr.sat ? "SAT" : "UNSAT"));
            (rs.sat ? counts.first : counts.second)++;
            res.records.push_back({stream.name, rs.step, rs.sat, "static", ts, rs.stats.conflicts});
            res.records.push_back({stream.name, rc.step, rc.sat, "cumulative", tc, rc.stats.conflicts});
            res.records.push_back({stream.name, rr.step, rr.sat, "relaunch", tr, rr.stats.conflicts});
            res.static_rules[stream.name].push_back(st.active_rule_count());
            res.cumulative_rules[stream.name].push_back(cu.active_rule_count());
        }
    }

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        std::ofstream bench(cfg.out_dir / "bench.csv");
        bench << "stream,step,verdict,variant,seconds,conflicts\n";
        for (const auto& r : res.records)
            bench << r.stream << "," << r.step << "," << (r.sat ? "SAT" : "UNSAT") << "," << r.variant << ","
                  << fixed(r.seconds) << "," << r.conflicts << "\n";
        auto write_plot = [&](const fs::path& path, const std::string& name) {
            std::ofstream plot(path);
            plot << "step,static_s,cumulative_s,relaunch_s,unsat\n";
            for (std::size_t i = 0; i + 2 < res.records.size(); i += 3) {
                const auto& a = res.records[i];
                if (a.stream != name) continue;
                plot << a.step << "," << fixed(a.seconds) << "," << fixed(res.records[i + 1].seconds) << ","
                     << fixed(res.records[i + 2].seconds) << "," << (a.sat ? 0 : 1) << "\n";
            }
        };
        if (!streams.empty()) write_plot(cfg.out_dir / "plot.csv", streams.front().name);
        for (const auto& s : streams) write_plot(cfg.out_dir / ("plot_" + s.name + ".csv"), s.name);
    }
    return res;
}

}  // namespace streamlp
