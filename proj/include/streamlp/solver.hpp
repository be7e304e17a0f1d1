#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "streamlp/ground.hpp"

namespace streamlp {

/// A stable model: the true atoms, sorted by id. Includes hidden assumption atoms.
struct Model {
    std::vector<AtomId> atoms;
    friend bool operator==(const Model&, const Model&) = default;
    friend auto operator<=>(const Model&, const Model&) = default;
};

struct SolveStats {
    std::uint64_t conflicts = 0;
    std::uint64_t choices = 0;
    std::uint64_t propagations = 0;
    std::uint64_t restarts = 0;
    std::uint64_t loop_nogoods = 0;
    double seconds = 0;
};

/// Persistent CDCL solver over a growing ground program.
///
/// Rules are added in slices. Every atom gets its completion when the slice
/// defining it is added; atoms without definition are inputs and default to
/// false unless an assumption says otherwise. A slice guard is appended to the
/// body of every rule of the slice; fixing the guard false retires the slice.
class Solver {
public:
    Solver();
    ~Solver();
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    /// Keep learned nogoods across solve calls (default on).
    void set_reuse_learned(bool reuse);

    /// Throws SolverError if a head was defined by an earlier call.
    void add_rules(const std::vector<GroundRule>& rules, std::optional<AtomId> guard = std::nullopt);

    /// Permanently fixes an atom (forgotten inputs, retired guards). Clauses
    /// satisfied by it are deleted; learned nogoods mentioning it are dropped.
    void fix(AtomId atom, bool value);

    bool is_defined(AtomId atom) const;

    /// Up to `max_models` stable models (0: all) under the given assumptions.
    std::vector<Model> solve(const std::vector<std::pair<AtomId, bool>>& assumptions, std::size_t max_models);

    const SolveStats& last_stats() const;
    std::size_t num_clauses() const;
    std::size_t num_learned() const;

    /// Learned nogoods that mention atoms only, as clauses over atom literals.
    std::vector<std::vector<GroundLiteral>> learned_atom_clauses() const;

    /// DIMACS-style dump of the clause database; comment lines map variables to atoms.
    std::string dimacs(const AtomTable& table) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot solving of a self-contained program.
std::vector<Model> solve(const GroundProgram& gp, std::size_t max_models, SolveStats* stats = nullptr);

/// Exhaustive reference enumeration (universe of at most 24 free atoms).
/// Models are returned in ascending order.
std::vector<Model> brute_force(const GroundProgram& gp);

/// Independent stable-model check based on the least fixpoint of the reduct.
bool is_stable(const GroundProgram& gp, const Model& candidate);

using LearnedConstraint = std::vector<GroundLiteral>;

/// Keeps the learned constraints all of whose atoms still occur in `next`.
std::vector<LearnedConstraint> learn_retain(const GroundProgram& prev, const GroundProgram& next,
                                            const std::vector<LearnedConstraint>& learned);

}  // namespace streamlp
