#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamlp/errors.hpp"
#include "streamlp/term.hpp"

namespace streamlp {

struct Atom {
    std::string name;
    std::vector<Term> args;

    std::size_t arity() const { return args.size(); }
    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class Comparison { Eq, Ne, Lt, Le, Gt, Ge };

/// Body literal: a (possibly default-negated) atom or a built-in comparison.
///
/// `V = term` with V unbound at grounding time acts as an assignment; with an
/// interval or pool on the right it enumerates the values.
struct Literal {
    enum class Kind { Atom, Comparison };

    Kind kind = Kind::Atom;
    bool negative = false;
    Atom atom;
    Comparison cmp = Comparison::Eq;
    Term lhs, rhs;

    static Literal positive(Atom a);
    static Literal negated(Atom a);
    static Literal comparison(Comparison c, Term l, Term r);

    friend bool operator==(const Literal&, const Literal&) = default;
};

struct ChoiceElement {
    Atom atom;
    std::vector<Literal> condition;
    friend bool operator==(const ChoiceElement&, const ChoiceElement&) = default;
};

enum class RuleKind { Normal, Choice, Constraint };

struct Rule {
    RuleKind kind = RuleKind::Normal;
    Atom head;                              // Normal
    std::vector<ChoiceElement> elements;    // Choice
    std::optional<Term> lower, upper;       // Choice bounds
    std::vector<Literal> body;
    Location loc;

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.kind == b.kind && a.head == b.head && a.elements == b.elements && a.lower == b.lower &&
               a.upper == b.upper && a.body == b.body;
    }
};

/// `#external atom [: condition].`
struct External {
    Atom atom;
    std::vector<Literal> condition;
    Location loc;
    friend bool operator==(const External& a, const External& b) { return a.atom == b.atom && a.condition == b.condition; }
};

enum class PartKind { Base, Cumulative, Volatile };

struct ProgramPart {
    PartKind kind = PartKind::Base;
    std::string param;                 // step parameter name; empty for base
    std::optional<Term> life_span;     // volatile only; absent means 1
    std::vector<Rule> rules;
    std::vector<External> externals;

    /// Resolved life span; nullopt means unbounded (base and cumulative parts).
    std::optional<std::int64_t> life() const;

    friend bool operator==(const ProgramPart&, const ProgramPart&) = default;
};

struct ConstDef {
    std::string name;
    Term value;
    friend bool operator==(const ConstDef&, const ConstDef&) = default;
};

struct Program {
    std::vector<ConstDef> consts;
    std::optional<Term> iinit;
    std::vector<ProgramPart> parts;

    /// Starting step for cumulative/volatile instantiation (default 1). Requires resolution.
    std::int64_t iinit_value() const;

    friend bool operator==(const Program&, const Program&) = default;
};

std::string to_string(const Atom& a);
std::string to_string(const Literal& l);
std::string to_string(const Rule& r);
std::string to_string(const ProgramPart& p);
std::string to_string(const Program& p);

/// Replaces placeholder constants by integers. Overrides take precedence over
/// the declared defaults and may introduce names that were not declared.
/// Throws ResolveError for undefined or cyclic definitions.
Program resolve_consts(const Program& program, const std::map<std::string, std::int64_t>& overrides);

/// Throws ParseError naming the first unsafe variable of the rule.
void check_safety(const Rule& rule);
void check_safety(const External& ext);

}  // namespace streamlp
