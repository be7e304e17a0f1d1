// Reactive stream reasoning front end.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "streamlp/controller.hpp"

using namespace streamlp;

int main(int argc, char** argv) {
    CLI::App app{"streamlp: incremental answer set solving over online streams"};
    SessionConfig cfg;
    std::vector<std::string> consts;
    std::string transcript_path;
    int port = -1;
    app.add_option("--encoding", cfg.encodings, "offline encoding file (repeatable)")->required()->check(CLI::ExistingFile);
    app.add_option("--stream", cfg.stream, "stream file, or - for standard input");
    app.add_option("--port", port, "serve one TCP connection on this port (0: any free port)");
    app.add_option("--const", consts, "constant override name=value (repeatable)");
    app.add_option("--models", cfg.max_models, "answer sets per query (0: all)");
    app.add_option("--cap", cfg.safety_cap, "retry horizon for unbounded steps");
    app.add_option("--transcript", transcript_path, "write the transcript here instead of standard output");
    app.add_flag("--verdicts-only", cfg.verdicts_only, "emit step,verdict CSV");
    app.add_flag("--stats", cfg.stats, "append solver statistics to each record");
    app.add_flag("--relaunch", cfg.relaunch, "recompute every query from scratch");
    app.add_flag("!--no-reuse", cfg.reuse_learned, "drop learned nogoods between queries");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    if ((port >= 0) == !cfg.stream.empty()) {
        std::cerr << "exactly one of --stream and --port is required\n";
        return kExitUsage;
    }
    for (const auto& c : consts) {
        auto eq = c.find('=');
        try {
            if (eq == std::string::npos) throw std::invalid_argument(c);
            std::size_t used = 0;
            std::string value = c.substr(eq + 1);
            cfg.consts[c.substr(0, eq)] = std::stoll(value, &used);
            if (used != value.size()) throw std::invalid_argument(c);
        } catch (const std::exception&) {
            std::cerr << "bad --const " << c << " (expected name=integer)\n";
            return kExitUsage;
        }
    }

    Program program;
    try {
        program = load_encodings(cfg.encodings);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitEncoding;
    }

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!transcript_path.empty()) {
        file.open(transcript_path);
        if (!file) {
            std::cerr << "cannot write " << transcript_path << "\n";
            return kExitUsage;
        }
        out = &file;
    }

    if (port >= 0) {
        try {
            return serve_tcp(program, cfg, port, [](int p) { std::cerr << "listening on port " << p << std::endl; }, out);
        } catch (const Error& e) {
            std::cerr << e.what() << "\n";
            return kExitEncoding;
        }
    }
    if (cfg.stream == "-") return run_session(program, cfg, std::cin, *out);
    std::ifstream in(cfg.stream);
    if (!in) {
        std::cerr << "cannot read stream " << cfg.stream << "\n";
        return kExitUsage;
    }
    return run_session(program, cfg, in, *out);
}
