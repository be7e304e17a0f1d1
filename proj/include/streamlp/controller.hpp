#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "streamlp/engine.hpp"

namespace streamlp {

struct SessionConfig {
    std::vector<std::string> encodings;             // file paths, concatenated in order
    std::string stream;                             // file path, "-" for stdin; empty with a port
    std::optional<int> port;
    std::map<std::string, std::int64_t> consts;
    std::size_t max_models = 1;                     // 0: all
    std::int64_t safety_cap = 100;
    bool verdicts_only = false;
    bool stats = false;                             // append solver statistics (not byte-stable)
    bool relaunch = false;                          // recompute each query from scratch
    bool reuse_learned = true;
};

/// Exit codes of the command line front end.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitEncoding = 2, kExitStream = 3 };

/// Reads and concatenates encoding files and parses them.
Program load_encodings(const std::vector<std::string>& paths);

/// Drives one engine (or the from-scratch baseline) event by event.
class Session {
public:
    Session(const Program& program, const SessionConfig& cfg);
    ~Session();

    /// Applies one event, queries, and returns the formatted record.
    /// Throws on protocol or modularity errors; the state is then unchanged.
    std::string handle(const StreamEvent& event);

    /// Parses a raw block and handles it.
    std::string handle_text(const std::string& block);

    /// CSV header for verdicts-only output ("" otherwise).
    std::string header() const;

    const QueryResult& last_result() const { return last_; }
    const std::vector<std::vector<std::string>>& last_models() const { return last_models_; }
    const Engine* engine() const { return engine_.get(); }

private:
    std::string format(const StreamEvent& event) const;

    SessionConfig cfg_;
    Program resolved_;
    std::unique_ptr<Engine> engine_;
    std::vector<StreamEvent> events_;  // relaunch mode
    std::int64_t relaunch_step_ = 0;
    QueryResult last_;
    std::vector<std::vector<std::string>> last_models_;
};

/// Formats an error record.
std::string error_record(const std::string& message);

/// Consumes a stream block by block, writing records to `out`. Stops at the
/// first error (after writing its record) and returns the exit code.
int run_session(const Program& program, const SessionConfig& cfg, std::istream& in, std::ostream& out);

/// Listens on `port` (0: ephemeral), serves exactly one connection and returns.
/// `on_listening` receives the bound port before accepting. Records are also
/// appended to `transcript` when given.
int serve_tcp(const Program& program, const SessionConfig& cfg, int port,
              const std::function<void(int)>& on_listening = nullptr, std::ostream* transcript = nullptr);

}  // namespace streamlp
