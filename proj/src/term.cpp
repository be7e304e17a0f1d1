#include "streamlp/term.hpp"

#include <limits>

#include "streamlp/errors.hpp"

namespace streamlp {

Term Term::integer(std::int64_t n) {
    Term t;
    t.kind = Kind::Integer;
    t.number = n;
    return t;
}

Term Term::symbol(std::string name) {
    Term t;
    t.kind = Kind::Symbol;
    t.name = std::move(name);
    return t;
}

Term Term::constant(std::string name) {
    Term t;
    t.kind = Kind::Constant;
    t.name = std::move(name);
    return t;
}

Term Term::variable(std::string name) {
    Term t;
    t.kind = Kind::Variable;
    t.name = std::move(name);
    return t;
}

Term Term::step_param(std::string name) {
    Term t;
    t.kind = Kind::StepParam;
    t.name = std::move(name);
    return t;
}

Term Term::binary(BinaryOp op, Term lhs, Term rhs) {
    Term t;
    t.kind = Kind::Binary;
    t.op = op;
    t.args.push_back(std::move(lhs));
    t.args.push_back(std::move(rhs));
    return t;
}

Term Term::pool(std::vector<Term> alternatives) {
    Term t;
    t.kind = Kind::Pool;
    t.args = std::move(alternatives);
    return t;
}

Term Term::interval(Term lo, Term hi) {
    Term t;
    t.kind = Kind::Interval;
    t.args.push_back(std::move(lo));
    t.args.push_back(std::move(hi));
    return t;
}

bool Term::is_ground() const {
    switch (kind) {
        case Kind::Integer:
        case Kind::Symbol:
        case Kind::Constant: return true;
        case Kind::Variable:
        case Kind::StepParam:
        case Kind::Pool:
        case Kind::Interval: return false;
        case Kind::Binary: return args[0].is_ground() && args[1].is_ground();
    }
    return false;
}

bool Term::is_multi_valued() const {
    if (kind == Kind::Pool || kind == Kind::Interval) return true;
    for (const auto& a : args)
        if (a.is_multi_valued()) return true;
    return false;
}

void Term::collect_variables(std::vector<std::string>& out) const {
    if (kind == Kind::Variable) {
        out.push_back(name);
        return;
    }
    for (const auto& a : args) a.collect_variables(out);
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Term::Kind::Integer: return a.number == b.number;
        case Term::Kind::Symbol:
        case Term::Kind::Constant:
        case Term::Kind::Variable:
        case Term::Kind::StepParam: return a.name == b.name;
        case Term::Kind::Binary: return a.op == b.op && a.args == b.args;
        case Term::Kind::Pool:
        case Term::Kind::Interval: return a.args == b.args;
    }
    return false;
}

namespace {

const char* op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Mod: return " #mod ";
    }
    return "?";
}

std::string operand_text(const Term& t) {
    return t.kind == Term::Kind::Binary ? "(" + to_string(t) + ")" : to_string(t);
}

std::int64_t checked(__int128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw EvalError("integer overflow in arithmetic");
    return static_cast<std::int64_t>(v);
}

std::int64_t apply(BinaryOp op, std::int64_t a, std::int64_t b) {
    switch (op) {
        case BinaryOp::Add: return checked(static_cast<__int128>(a) + b);
        case BinaryOp::Sub: return checked(static_cast<__int128>(a) - b);
        case BinaryOp::Mul: return checked(static_cast<__int128>(a) * b);
        case BinaryOp::Mod:
            if (b == 0) throw EvalError("#mod by zero");
            return floor_mod(a, b);
    }
    return 0;
}

template <class Lookup>
Value eval_single(const Term& t, const Lookup& lookup, std::int64_t step) {
    switch (t.kind) {
        case Term::Kind::Integer: return Value::integer(t.number);
        case Term::Kind::Symbol: return Value::symbol(t.name);
        case Term::Kind::Constant: throw EvalError("unresolved constant '" + t.name + "'");
        case Term::Kind::StepParam: return Value::integer(step);
        case Term::Kind::Variable: {
            auto v = lookup(t);
            if (!v) throw EvalError("unbound variable " + t.name);
            return *v;
        }
        case Term::Kind::Binary: {
            Value l = eval_single(t.args[0], lookup, step);
            Value r = eval_single(t.args[1], lookup, step);
            if (!l.is_integer() || !r.is_integer())
                throw EvalError("symbol used in arithmetic: " + to_string(t));
            return Value::integer(apply(t.op, l.integer_value(), r.integer_value()));
        }
        case Term::Kind::Pool:
        case Term::Kind::Interval: throw EvalError("multi-valued term where a single value is required: " + to_string(t));
    }
    return {};
}

void eval_all(const Term& t, SlotBinding binding, std::int64_t step, std::vector<Value>& out) {
    auto lookup = [&](const Term& var) -> std::optional<Value> {
        if (var.slot < 0 || static_cast<std::size_t>(var.slot) >= binding.size()) return std::nullopt;
        return binding[var.slot];
    };
    switch (t.kind) {
        case Term::Kind::Pool:
            for (const auto& alt : t.args) eval_all(alt, binding, step, out);
            return;
        case Term::Kind::Interval: {
            Value lo = eval_single(t.args[0], lookup, step);
            Value hi = eval_single(t.args[1], lookup, step);
            if (!lo.is_integer() || !hi.is_integer()) throw EvalError("interval bounds must be integers: " + to_string(t));
            for (auto i = lo.integer_value(); i <= hi.integer_value(); ++i) out.push_back(Value::integer(i));
            return;
        }
        case Term::Kind::Binary:
            if (t.is_multi_valued()) {
                std::vector<Value> ls, rs;
                eval_all(t.args[0], binding, step, ls);
                eval_all(t.args[1], binding, step, rs);
                for (const auto& l : ls)
                    for (const auto& r : rs) {
                        if (!l.is_integer() || !r.is_integer()) throw EvalError("symbol used in arithmetic: " + to_string(t));
                        out.push_back(Value::integer(apply(t.op, l.integer_value(), r.integer_value())));
                    }
                return;
            }
            [[fallthrough]];
        default: out.push_back(eval_single(t, lookup, step));
    }
}

}  // namespace

std::int64_t floor_mod(std::int64_t x, std::int64_t d) {
    std::int64_t r = x % d;
    if (r != 0 && ((r < 0) != (d < 0))) r += d;
    return r;
}

std::string to_string(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Integer: return std::to_string(t.number);
        case Term::Kind::Symbol:
        case Term::Kind::Constant:
        case Term::Kind::Variable:
        case Term::Kind::StepParam: return t.name;
        case Term::Kind::Binary: return operand_text(t.args[0]) + op_text(t.op) + operand_text(t.args[1]);
        case Term::Kind::Pool: {
            std::string s;
            for (std::size_t i = 0; i < t.args.size(); ++i) {
                if (i) s += ";";
                s += to_string(t.args[i]);
            }
            return s;
        }
        case Term::Kind::Interval: return operand_text(t.args[0]) + ".." + operand_text(t.args[1]);
    }
    return {};
}

Value eval_term(const Term& term, const std::map<std::string, Value>& binding, std::int64_t step) {
    return eval_single(term, [&](const Term& var) -> std::optional<Value> {
        auto it = binding.find(var.name);
        if (it == binding.end()) return std::nullopt;
        return it->second;
    }, step);
}

Value eval_term(const Term& term, SlotBinding binding, std::int64_t step) {
    return eval_single(term, [&](const Term& var) -> std::optional<Value> {
        if (var.slot < 0 || static_cast<std::size_t>(var.slot) >= binding.size()) return std::nullopt;
        return binding[var.slot];
    }, step);
}

std::vector<Value> eval_term_values(const Term& term, SlotBinding binding, std::int64_t step) {
    std::vector<Value> out;
    eval_all(term, binding, step, out);
    return out;
}

bool is_evaluable(const Term& term, SlotBinding binding) {
    if (term.kind == Term::Kind::Variable)
        return term.slot >= 0 && static_cast<std::size_t>(term.slot) < binding.size() && binding[term.slot].has_value();
    for (const auto& a : term.args)
        if (!is_evaluable(a, binding)) return false;
    return true;
}

}  // namespace streamlp
