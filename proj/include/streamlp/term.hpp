#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamlp/value.hpp"

namespace streamlp {

enum class BinaryOp { Add, Sub, Mul, Mod };

/// Non-ground term of the input language.
///
/// Pools (`a;b`) and intervals (`lo..hi`) are multi-valued; everything else
/// evaluates to at most one Value.
struct Term {
    enum class Kind { Integer, Symbol, Constant, Variable, StepParam, Binary, Pool, Interval };

    Kind kind = Kind::Integer;
    std::int64_t number = 0;
    std::string name;          // Symbol, Constant, Variable, StepParam
    BinaryOp op = BinaryOp::Add;
    std::vector<Term> args;    // Binary: {lhs, rhs}; Pool: alternatives; Interval: {lo, hi}
    int slot = -1;             // Variable: binding slot assigned when a rule is compiled

    static Term integer(std::int64_t n);
    static Term symbol(std::string name);
    static Term constant(std::string name);
    static Term variable(std::string name);
    static Term step_param(std::string name);
    static Term binary(BinaryOp op, Term lhs, Term rhs);
    static Term pool(std::vector<Term> alternatives);
    static Term interval(Term lo, Term hi);

    bool is_ground() const;
    bool is_multi_valued() const;  // contains a pool or an interval
    void collect_variables(std::vector<std::string>& out) const;

    friend bool operator==(const Term& a, const Term& b);
};

std::string to_string(const Term& t);

/// Variable binding by slot; unbound slots are empty.
using SlotBinding = std::span<const std::optional<Value>>;

/// Evaluates a single-valued term.
///
/// `#mod` yields the representative in [0, d) for d > 0, also for negative dividends.
/// Throws EvalError on unbound variables, symbols in arithmetic, division by zero,
/// unresolved placeholder constants, and multi-valued terms.
Value eval_term(const Term& term, const std::map<std::string, Value>& binding, std::int64_t step);
Value eval_term(const Term& term, SlotBinding binding, std::int64_t step);

/// Evaluates any term, expanding pools and intervals into all their values (in order).
std::vector<Value> eval_term_values(const Term& term, SlotBinding binding, std::int64_t step);

/// True if every variable occurring in `term` has a bound slot.
bool is_evaluable(const Term& term, SlotBinding binding);

std::int64_t floor_mod(std::int64_t x, std::int64_t d);

}  // namespace streamlp
