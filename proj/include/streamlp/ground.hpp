#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "streamlp/value.hpp"

namespace streamlp {

using AtomId = std::uint32_t;

struct GroundAtom {
    const std::string* name = nullptr;  // interned predicate name
    std::vector<Value> args;

    friend bool operator==(const GroundAtom& a, const GroundAtom& b) { return a.name == b.name && a.args == b.args; }
};

struct GroundAtomHash {
    std::size_t operator()(const GroundAtom& a) const noexcept {
        std::size_t h = std::hash<const void*>{}(a.name);
        for (const auto& v : a.args) hash_combine(h, v.hash());
        return h;
    }
};

std::string to_string(const GroundAtom& a);

/// Interns ground atoms; ids are dense and assigned in creation order.
class AtomTable {
public:
    AtomId intern(const GroundAtom& atom);
    std::optional<AtomId> find(const GroundAtom& atom) const;
    const GroundAtom& atom(AtomId id) const { return atoms_[id]; }
    const std::string& text(AtomId id) const;
    std::size_t size() const { return atoms_.size(); }

    /// Hidden atoms (internal assumption literals) are never shown in answers.
    bool hidden(AtomId id) const { return atoms_[id].name->starts_with("__"); }

private:
    std::vector<GroundAtom> atoms_;
    mutable std::vector<std::string> text_;
    std::unordered_map<GroundAtom, AtomId, GroundAtomHash> index_;
};

struct GroundLiteral {
    AtomId atom = 0;
    bool negative = false;
    friend bool operator==(const GroundLiteral&, const GroundLiteral&) = default;
};

struct GroundChoiceElement {
    AtomId atom = 0;
    std::vector<GroundLiteral> condition;
    friend bool operator==(const GroundChoiceElement&, const GroundChoiceElement&) = default;
};

enum class GroundRuleKind { Normal, Choice, Constraint };

struct GroundRule {
    GroundRuleKind kind = GroundRuleKind::Normal;
    AtomId head = 0;                             // Normal
    std::vector<GroundChoiceElement> elements;   // Choice
    std::optional<std::int64_t> lower, upper;    // Choice
    std::vector<GroundLiteral> body;

    friend bool operator==(const GroundRule&, const GroundRule&) = default;
};

struct GroundRuleHash {
    std::size_t operator()(const GroundRule& r) const noexcept;
};

std::string to_string(const GroundRule& r, const AtomTable& atoms);

/// A self-contained propositional program over a subset of an atom table.
///
/// Assumption atoms have no defining rule; their truth value is fixed by
/// `assumptions` and they are not subject to the foundedness requirement.
struct GroundProgram {
    const AtomTable* table = nullptr;
    std::vector<AtomId> universe;   // every atom occurring in rules or assumptions, sorted
    std::vector<GroundRule> rules;
    std::vector<std::pair<AtomId, bool>> assumptions;

    /// Fills `universe` from rules and assumptions.
    void collect_universe();
};

/// One rule per line in canonical text. Hidden body atoms are omitted unless requested.
std::string dump(const GroundProgram& gp, bool show_hidden = false);

}  // namespace streamlp
