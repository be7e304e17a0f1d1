#include "streamlp/controller.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "streamlp/parser.hpp"

namespace streamlp {

Program load_encodings(const std::vector<std::string>& paths) {
    std::string text;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw Error("cannot read encoding " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text += ss.str();
        text += "\n";
    }
    return parse_program(text);
}

Session::Session(const Program& program, const SessionConfig& cfg) : cfg_(cfg) {
    resolved_ = resolve_consts(program, cfg.consts);
    if (cfg.relaunch) {
        relaunch_step_ = resolved_.iinit_value() - 1;
    } else {
        EngineOptions opts;
        opts.safety_cap = cfg.safety_cap;
        opts.reuse_learned = cfg.reuse_learned;
        engine_ = std::make_unique<Engine>(resolved_, std::map<std::string, std::int64_t>{}, opts);
    }
}

Session::~Session() = default;

std::string Session::handle(const StreamEvent& event) {
    if (engine_) {
        engine_->apply_event(event);
        last_ = engine_->query(event.delta, cfg_.max_models);
        last_models_.clear();
        for (const auto& m : last_.models) last_models_.push_back(engine_->visible(m));
    } else {
        if (!events_.empty() && event.target_step <= events_.back().target_step)
            throw StreamError("step " + std::to_string(event.target_step) + " is not greater than previous step " +
                              std::to_string(events_.back().target_step));
        events_.push_back(event);
        std::int64_t start = std::max(relaunch_step_, event.target_step);
        std::int64_t limit = event.target_step + (event.delta ? *event.delta : cfg_.safety_cap);
        try {
            last_ = monolithic_query(resolved_, events_, start, std::max(start, limit), cfg_.max_models, &last_models_);
        } catch (...) {
            events_.pop_back();
            throw;
        }
        last_.cap_reached = !last_.sat && !event.delta;
        relaunch_step_ = last_.step;
    }
    return format(event);
}

std::string Session::handle_text(const std::string& block) {
    std::optional<std::int64_t> prev;
    if (engine_) prev = engine_->last_event_step();
    else if (!events_.empty()) prev = events_.back().target_step;
    return handle(parse_stream_block(block, prev));
}

std::string Session::header() const { return cfg_.verdicts_only ? "step,verdict\n" : ""; }

std::string Session::format(const StreamEvent& event) const {
    std::ostringstream out;
    if (cfg_.verdicts_only) {
        out << last_.step << "," << (last_.sat ? "SAT" : "UNSAT") << "\n";
        return out.str();
    }
    out << "Step: " << event.target_step << " ";
    if (event.delta) out << *event.delta;
    else out << "inf";
    out << "\n";
    for (std::size_t i = 0; i < last_models_.size(); ++i) {
        out << "Answer: " << i + 1 << "\n";
        for (std::size_t j = 0; j < last_models_[i].size(); ++j) out << (j ? " " : "") << last_models_[i][j];
        out << "\n";
    }
    out << (last_.sat ? "SATISFIABLE " : "UNSATISFIABLE ") << last_.step << "\n";
    if (cfg_.stats)
        out << "Stats: attempts=" << last_.attempts << " conflicts=" << last_.stats.conflicts
            << " choices=" << last_.stats.choices << " cap=" << (last_.cap_reached ? 1 : 0)
            << " seconds=" << last_.stats.seconds << "\n";
    return out.str();
}

std::string error_record(const std::string& message) {
    std::string m = message;
    for (auto& c : m)
        if (c == '\n') c = ' ';
    return "ERROR " + m + "\n";
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const StreamError*>(&e) ||
        dynamic_cast<const ModularityError*>(&e))
        return kExitStream;
    return kExitEncoding;
}

/// Splits incoming lines into complete blocks.
class BlockReader {
public:
    /// Returns the blocks completed by this line.
    std::vector<std::string> feed(const std::string& line) {
        buf_ += line;
        buf_ += "\n";
        if (line.find("#endstep") == std::string::npos) return {};
        auto blocks = split_stream_blocks(buf_);
        buf_.clear();
        if (!blocks.empty() && trim(blocks.back()).find("#endstep") == std::string::npos) {
            buf_ = blocks.back();
            blocks.pop_back();
        }
        return blocks;
    }

    std::vector<std::string> finish() {
        auto blocks = split_stream_blocks(buf_);
        buf_.clear();
        return blocks;
    }

private:
    std::string buf_;
};

}  // namespace

int run_session(const Program& program, const SessionConfig& cfg, std::istream& in, std::ostream& out) {
    std::unique_ptr<Session> session;
    try {
        session = std::make_unique<Session>(program, cfg);
    } catch (const Error& e) {
        out << error_record(e.what());
        return kExitEncoding;
    }
    out << session->header();
    auto process = [&](const std::string& block) -> int {
        try {
            out << session->handle_text(block);
            out.flush();
            return kExitOk;
        } catch (const Error& e) {
            out << error_record(e.what());
            out.flush();
            return exit_code_for(e);
        }
    };
    BlockReader reader;
    std::string line;
    bool stopped = false;
    while (!stopped && std::getline(in, line)) {
        if (trim(line) == "#stop.") {
            stopped = true;
            break;
        }
        for (const auto& block : reader.feed(line))
            if (int rc = process(block)) return rc;
    }
    if (!stopped)
        for (const auto& block : reader.finish())
            if (int rc = process(block)) return rc;
    return kExitOk;
}

namespace {

bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

struct Fd {
    int fd = -1;
    ~Fd() {
        if (fd >= 0) ::close(fd);
    }
};

}  // namespace

int serve_tcp(const Program& program, const SessionConfig& cfg, int port, const std::function<void(int)>& on_listening,
              std::ostream* transcript) {
    Session session(program, cfg);
    Fd listener{::socket(AF_INET, SOCK_STREAM, 0)};
    if (listener.fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    int yes = 1;
    ::setsockopt(listener.fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listener.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0)
        throw Error("cannot bind port " + std::to_string(port) + ": " + std::strerror(errno));
    if (::listen(listener.fd, 1) < 0) throw Error(std::string("listen: ") + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(listener.fd, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_listening) on_listening(ntohs(addr.sin_port));

    Fd conn{::accept(listener.fd, nullptr, nullptr)};
    if (conn.fd < 0) throw Error(std::string("accept: ") + std::strerror(errno));
    if (transcript) *transcript << session.header();
    if (!send_all(conn.fd, session.header())) return kExitOk;

    BlockReader reader;
    std::string pending;
    char chunk[4096];
    while (true) {
        ssize_t n = ::recv(conn.fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        pending.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = pending.find('\n')) != std::string::npos) {
            std::string line = pending.substr(0, nl);
            pending.erase(0, nl + 1);
            if (trim(line) == "#stop.") {
                send_all(conn.fd, "READY\n");
                return kExitOk;
            }
            for (const auto& block : reader.feed(line)) {
                std::string reply;
                try {
                    reply = session.handle_text(block);
                } catch (const Error& e) {
                    reply = error_record(e.what());
                }
                if (transcript) *transcript << reply << std::flush;
                if (!send_all(conn.fd, reply + "READY\n")) return kExitOk;
            }
        }
    }
    return kExitOk;
}

}  // namespace streamlp
