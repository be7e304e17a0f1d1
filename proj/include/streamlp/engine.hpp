#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "streamlp/grounder.hpp"
#include "streamlp/parser.hpp"
#include "streamlp/program.hpp"
#include "streamlp/solver.hpp"

namespace streamlp {

struct EngineOptions {
    std::int64_t safety_cap = 100;  // retry horizon beyond the event step when delta is unbounded
    bool reuse_learned = true;
};

struct QueryResult {
    bool sat = false;
    std::int64_t step = 0;         // step at which the final answer was produced
    std::vector<Model> models;
    SolveStats stats;              // accumulated over all attempts
    int attempts = 0;
    bool cap_reached = false;      // UNSAT because the safety cap stopped an unbounded search
};

struct SliceRecord {
    GroundSlice slice;
    bool online = false;
    bool expired = false;
    std::unordered_map<AtomId, std::int64_t> declared;  // online heads: step their external was declared

    bool active_at(std::int64_t step) const {
        return !slice.life_span || (slice.birth_step <= step && step <= slice.birth_step + *slice.life_span - 1);
    }
};

/// Incremental grounding and solving driven by a stream of online events.
class Engine {
public:
    /// Resolves constants, grounds the base part and sets the step to iinit - 1.
    Engine(const Program& program, const std::map<std::string, std::int64_t>& overrides = {}, EngineOptions options = {});
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    std::int64_t step() const { return step_; }
    std::int64_t iinit() const { return iinit_; }
    const Program& program() const { return program_; }
    const AtomTable& atoms() const { return *table_; }
    const GroundingContext& registry() const { return ctx_; }
    const std::vector<SliceRecord>& slices() const { return slices_; }

    /// Grounds every cumulative and volatile part for each step up to `target`.
    /// On error the state is left unchanged.
    void advance_to(std::int64_t target);

    /// Incorporates one online event. On error the state is left unchanged.
    void apply_event(const StreamEvent& event);

    /// Solves at the current step; on UNSAT advances one step at a time while
    /// the step is below the last event's step plus `delta` (or the safety cap).
    QueryResult query(std::optional<std::int64_t> delta, std::size_t max_models = 1);

    /// Rules of all active slices; volatile rules carry their slice's assumption atom.
    GroundProgram compose_active() const;

    /// Number of rules in active slices (offline slices only unless requested).
    std::size_t active_rule_count(bool include_online = false) const;

    /// Visible atoms of a model in lexicographic order.
    std::vector<std::string> visible(const Model& m) const;

    /// Step of the last applied event (nullopt before the first).
    std::optional<std::int64_t> last_event_step() const { return last_event_; }

    Solver& solver() { return solver_; }

private:
    struct Pending;

    void stage_advance(std::int64_t target, Pending& p);
    void stage_slice(GroundSlice slice, bool online, Pending& p);
    void undo(Pending& p);
    void commit(Pending& p);
    void expire();
    void forget(const std::vector<AtomId>& atoms);

    Program program_;
    EngineOptions options_;
    std::unique_ptr<AtomTable> table_;
    GroundingContext ctx_;
    std::vector<PartGrounder> cumulative_, volatile_;
    std::vector<SliceRecord> slices_;
    Solver solver_;
    std::int64_t iinit_ = 1;
    std::int64_t step_ = 0;
    std::optional<std::int64_t> last_event_;
    std::unordered_map<AtomId, std::size_t> online_active_;  // atom -> slice index defining it
    std::unordered_set<AtomId> online_expired_;              // atoms once defined by expired online data
};

/// From-scratch recomputation for one query: grounds base, every cumulative
/// step up to k, the volatile slices and online blocks active at k, and solves
/// with a fresh solver. Inputs without active data are false. Retries at k+1
/// while UNSAT and k < `limit`. The result carries no models since their atoms
/// live in a temporary table; their visible atoms are returned instead.
QueryResult monolithic_query(const Program& resolved, const std::vector<StreamEvent>& events, std::int64_t start_step,
                             std::int64_t limit, std::size_t max_models,
                             std::vector<std::vector<std::string>>* visible_models = nullptr);

}  // namespace streamlp
