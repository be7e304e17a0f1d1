// Job scheduling benchmark over generated streams.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "streamlp/controller.hpp"
#include "streamlp/workbench.hpp"

using namespace streamlp;

int main(int argc, char** argv) {
    CLI::App app{"streamlp-bench: static, cumulative and relaunch variants on job request streams"};
    JobStreamParams p;
    int num_streams = 3;
    std::string static_path = "corpus/jobs-static/encoding.lp";
    std::string cumulative_path = "corpus/jobs-cumulative/encoding.lp";
    std::string out_dir = "bench-out";
    std::string dump_dir;
    bool no_reuse = false, no_check = false;
    app.add_option("--static", static_path, "static job encoding")->check(CLI::ExistingFile);
    app.add_option("--cumulative", cumulative_path, "cumulative job encoding")->check(CLI::ExistingFile);
    app.add_option("--streams", num_streams, "number of generated streams");
    app.add_option("--events", p.num_events, "online inputs per stream");
    app.add_option("--seed", p.seed, "seed of the first stream; stream n uses seed+n-1");
    app.add_option("--max-jobid", p.max_jobid);
    app.add_option("--max-duration", p.max_duration);
    app.add_option("--machines", p.num_machines);
    app.add_option("--max-step", p.max_step);
    app.add_option("--min-jobs", p.min_jobs, "fewest jobs per event");
    app.add_option("--max-jobs", p.max_jobs, "most jobs per event");
    app.add_option("--out", out_dir, "directory for bench.csv and plot.csv");
    app.add_option("--dump-streams", dump_dir, "also write the generated streams here");
    app.add_flag("--no-reuse", no_reuse, "drop learned nogoods between queries");
    app.add_flag("--no-check", no_check, "skip schedule validation");
    CLI11_PARSE(app, argc, argv);

    BenchConfig cfg;
    try {
        cfg.static_encoding = load_encodings({static_path});
        cfg.cumulative_encoding = load_encodings({cumulative_path});
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitEncoding;
    }
    cfg.consts = p.consts();
    cfg.max_step = p.max_step;
    cfg.reuse_learned = !no_reuse;
    cfg.check_schedules = !no_check;
    cfg.out_dir = out_dir;

    std::vector<BenchStream> streams;
    for (int n = 1; n <= num_streams; ++n) {
        JobStreamParams q = p;
        q.seed = p.seed + static_cast<std::uint64_t>(n - 1);
        streams.push_back({q.name(n), gen_job_stream(q)});
        if (!dump_dir.empty()) {
            std::filesystem::create_directories(dump_dir);
            std::ofstream(std::filesystem::path(dump_dir) / (q.name(n) + ".str")) << streams.back().text;
        }
    }

    BenchResult res;
    try {
        res = run_bench(streams, cfg);
    } catch (const Error& e) {
        std::cerr << "FAILED: " << e.what() << "\n";
        return 4;
    }
    std::printf("%-14s %5s %5s %10s %10s %10s\n", "stream", "#S", "#U", "static", "cumulative", "relaunch");
    for (const auto& s : streams) {
        double sum[3] = {0, 0, 0};
        int n = 0;
        for (std::size_t i = 0; i + 2 < res.records.size(); i += 3) {
            if (res.records[i].stream != s.name) continue;
            for (int v = 0; v < 3; ++v) sum[v] += res.records[i + v].seconds;
            n++;
        }
        auto [sat, unsat] = res.counts[s.name];
        std::printf("%-14s %5d %5d %10.4f %10.4f %10.4f\n", s.name.c_str(), sat, unsat, n ? sum[0] / n : 0.0,
                    n ? sum[1] / n : 0.0, n ? sum[2] / n : 0.0);
    }
    std::printf("schedules checked: %d\nwrote %s/bench.csv and %s/plot.csv\n", res.schedules_checked, out_dir.c_str(),
                out_dir.c_str());
    return 0;
}
