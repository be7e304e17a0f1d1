#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "streamlp/ground.hpp"
#include "streamlp/program.hpp"

namespace streamlp {

/// Append-only set of ground atoms of one predicate, with hash indices built
/// lazily per combination of bound argument positions.
class Relation {
public:
    explicit Relation(const AtomTable* table) : table_(table) {}

    std::size_t size() const { return atoms_.size(); }
    AtomId at(std::size_t pos) const { return atoms_[pos]; }
    void push(AtomId id) { atoms_.push_back(id); }
    void pop();

    /// Positions (ascending) whose arguments at `mask` equal `key`.
    const std::vector<std::uint32_t>* lookup(std::uint64_t mask, const std::vector<Value>& key) const;

private:
    struct VecHash {
        std::size_t operator()(const std::vector<Value>& v) const noexcept {
            std::size_t h = v.size();
            for (const auto& x : v) hash_combine(h, x.hash());
            return h;
        }
    };
    struct Index {
        std::uint64_t mask = 0;
        std::size_t indexed = 0;
        std::unordered_map<std::vector<Value>, std::vector<std::uint32_t>, VecHash> map;
    };

    std::vector<Value> key_of(std::size_t pos, std::uint64_t mask) const;
    Index& index_for(std::uint64_t mask) const;

    const AtomTable* table_;
    std::vector<AtomId> atoms_;
    mutable std::vector<std::unique_ptr<Index>> indices_;
};

/// The atoms that may be true: heads of committed slices and declared inputs.
class Domain {
public:
    explicit Domain(const AtomTable* table) : table_(table) {}

    bool contains(AtomId id) const { return id < member_.size() && member_[id]; }
    /// Returns false if the atom was already present.
    bool add(AtomId id);
    Relation* relation(const std::string* name, std::size_t arity) const;
    std::size_t size() const { return log_.size(); }

    std::size_t checkpoint() const { return log_.size(); }
    void rollback(std::size_t checkpoint);

private:
    struct SigHash {
        std::size_t operator()(const std::pair<const std::string*, std::size_t>& s) const noexcept {
            std::size_t h = std::hash<const void*>{}(s.first);
            hash_combine(h, s.second);
            return h;
        }
    };
    const AtomTable* table_;
    std::vector<char> member_;
    std::vector<AtomId> log_;
    std::unordered_map<std::pair<const std::string*, std::size_t>, std::unique_ptr<Relation>, SigHash> relations_;
};

/// Registry of atom status shared by all slices of one engine.
///
/// `defined`, `external` and `forgotten` are pairwise disjoint. `domain` holds
/// defined and external atoms (forgotten ones stay in it but are skipped).
struct GroundingContext {
    explicit GroundingContext(AtomTable* table) : atoms(table), domain(table) {}

    AtomTable* atoms;
    Domain domain;
    std::unordered_map<AtomId, std::int64_t> defined;    // atom -> step of the defining slice
    std::unordered_map<AtomId, std::int64_t> external;   // atom -> declaring step
    std::unordered_set<AtomId> forgotten;
    std::unordered_set<AtomId> facts;                    // unconditionally true
    std::uint64_t next_assumption = 0;

    bool possible(AtomId a) const { return domain.contains(a) && !forgotten.count(a); }

    /// Interns a fresh hidden assumption atom.
    AtomId fresh_assumption();
};

struct GroundSlice {
    std::int64_t birth_step = 0;
    std::optional<std::int64_t> life_span;  // nullopt: unbounded
    std::optional<AtomId> assumption;       // present iff life_span is bounded
    std::vector<GroundRule> rules;          // canonical (generation) order
    std::vector<AtomId> new_heads;
    std::vector<AtomId> new_externals;
    std::vector<AtomId> new_facts;
};

/// A program part compiled for repeated instantiation at different steps.
class PartGrounder {
public:
    explicit PartGrounder(const ProgramPart& part);
    ~PartGrounder();
    PartGrounder(PartGrounder&&) noexcept;
    PartGrounder& operator=(PartGrounder&&) noexcept;

    /// Instantiates the part for `step`. The registry in `ctx` is not modified;
    /// only the atom table, index caches and the assumption counter are.
    /// Throws ModularityError if a head is already defined or forgotten.
    GroundSlice ground(std::int64_t step, GroundingContext& ctx) const;

    const ProgramPart& part() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper compiling `part` on every call.
GroundSlice ground_part(const ProgramPart& part, std::int64_t step, GroundingContext& ctx);

/// Grounds all base parts of a resolved program as a single unbounded slice.
GroundSlice ground_base(const Program& program, GroundingContext& ctx);

/// Adds the slice's heads and externals to the registry (the engine's commit step).
void commit_slice(const GroundSlice& slice, GroundingContext& ctx);

}  // namespace streamlp
