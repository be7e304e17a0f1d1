#include "streamlp/program.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace streamlp {

Literal Literal::positive(Atom a) {
    Literal l;
    l.atom = std::move(a);
    return l;
}

Literal Literal::negated(Atom a) {
    Literal l;
    l.negative = true;
    l.atom = std::move(a);
    return l;
}

Literal Literal::comparison(Comparison c, Term lhs, Term rhs) {
    Literal l;
    l.kind = Kind::Comparison;
    l.cmp = c;
    l.lhs = std::move(lhs);
    l.rhs = std::move(rhs);
    return l;
}

std::optional<std::int64_t> ProgramPart::life() const {
    if (kind != PartKind::Volatile) return std::nullopt;
    if (!life_span) return 1;
    if (life_span->kind != Term::Kind::Integer) throw ResolveError("life span not resolved: " + to_string(*life_span));
    return life_span->number;
}

std::int64_t Program::iinit_value() const {
    if (!iinit) return 1;
    if (iinit->kind != Term::Kind::Integer) throw ResolveError("#iinit not resolved: " + to_string(*iinit));
    return iinit->number;
}

namespace {

const char* cmp_text(Comparison c) {
    switch (c) {
        case Comparison::Eq: return "=";
        case Comparison::Ne: return "!=";
        case Comparison::Lt: return "<";
        case Comparison::Le: return "<=";
        case Comparison::Gt: return ">";
        case Comparison::Ge: return ">=";
    }
    return "?";
}

std::string join_literals(const std::vector<Literal>& lits) {
    std::string s;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (i) s += ", ";
        s += to_string(lits[i]);
    }
    return s;
}

}  // namespace

std::string to_string(const Atom& a) {
    if (a.args.empty()) return a.name;
    std::string s = a.name + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(a.args[i]);
    }
    return s + ")";
}

std::string to_string(const Literal& l) {
    if (l.kind == Literal::Kind::Comparison) return to_string(l.lhs) + cmp_text(l.cmp) + to_string(l.rhs);
    return (l.negative ? "not " : "") + to_string(l.atom);
}

std::string to_string(const Rule& r) {
    std::string s;
    switch (r.kind) {
        case RuleKind::Normal: s = to_string(r.head); break;
        case RuleKind::Constraint: break;
        case RuleKind::Choice: {
            if (r.lower) s += to_string(*r.lower) + " ";
            s += "{ ";
            for (std::size_t i = 0; i < r.elements.size(); ++i) {
                if (i) s += "; ";
                s += to_string(r.elements[i].atom);
                if (!r.elements[i].condition.empty()) s += " : " + join_literals(r.elements[i].condition);
            }
            s += " }";
            if (r.upper) s += " " + to_string(*r.upper);
            break;
        }
    }
    if (!r.body.empty() || r.kind == RuleKind::Constraint) s += (s.empty() ? ":- " : " :- ") + join_literals(r.body);
    return s + ".";
}

std::string to_string(const ProgramPart& p) {
    std::ostringstream out;
    switch (p.kind) {
        case PartKind::Base: out << "#base.\n"; break;
        case PartKind::Cumulative: out << "#cumulative " << p.param << ".\n"; break;
        case PartKind::Volatile:
            out << "#volatile " << p.param;
            if (p.life_span) out << " : " << to_string(*p.life_span);
            out << ".\n";
            break;
    }
    for (const auto& e : p.externals) {
        out << "#external " << to_string(e.atom);
        if (!e.condition.empty()) out << " : " << join_literals(e.condition);
        out << ".\n";
    }
    for (const auto& r : p.rules) out << to_string(r) << "\n";
    return out.str();
}

std::string to_string(const Program& p) {
    std::ostringstream out;
    for (const auto& c : p.consts) out << "#const " << c.name << "=" << to_string(c.value) << ".\n";
    if (p.iinit) out << "#iinit " << to_string(*p.iinit) << ".\n";
    for (const auto& part : p.parts) out << to_string(part);
    return out.str();
}

// ---------------------------------------------------------------------------
// constant resolution

namespace {

class ConstResolver {
public:
    ConstResolver(const Program& p, const std::map<std::string, std::int64_t>& overrides) : overrides_(overrides) {
        for (const auto& c : p.consts) defs_[c.name] = &c.value;
    }

    bool known(const std::string& name) const { return overrides_.count(name) || defs_.count(name); }

    std::int64_t value(const std::string& name) {
        if (auto it = overrides_.find(name); it != overrides_.end()) return it->second;
        if (auto it = cache_.find(name); it != cache_.end()) return it->second;
        auto def = defs_.find(name);
        if (def == defs_.end()) throw ResolveError("undefined constant '" + name + "'");
        if (!visiting_.insert(name).second) throw ResolveError("cyclic constant definition involving '" + name + "'");
        Term t = subst(*def->second);
        Value v;
        try {
            v = eval_term(t, std::map<std::string, Value>{}, 0);
        } catch (const EvalError& e) {
            throw ResolveError("cannot evaluate constant '" + name + "': " + e.what());
        }
        if (!v.is_integer()) throw ResolveError("constant '" + name + "' is not an integer");
        visiting_.erase(name);
        cache_[name] = v.integer_value();
        return v.integer_value();
    }

    Term subst(const Term& t) {
        if ((t.kind == Term::Kind::Constant || t.kind == Term::Kind::Symbol) && known(t.name))
            return Term::integer(value(t.name));
        if (t.kind == Term::Kind::Constant) throw ResolveError("undefined constant '" + t.name + "'");
        Term out = t;
        for (auto& a : out.args) a = subst(a);
        return out;
    }

    std::int64_t eval_int(const Term& t, const std::string& what) {
        Term s = subst(t);
        try {
            Value v = eval_term(s, std::map<std::string, Value>{}, 0);
            if (!v.is_integer()) throw ResolveError(what + " must be an integer");
            return v.integer_value();
        } catch (const EvalError& e) {
            throw ResolveError("cannot evaluate " + what + ": " + e.what());
        }
    }

    void apply(Atom& a) {
        for (auto& t : a.args) t = subst(t);
    }
    void apply(std::vector<Literal>& lits) {
        for (auto& l : lits) {
            if (l.kind == Literal::Kind::Atom) apply(l.atom);
            else {
                l.lhs = subst(l.lhs);
                l.rhs = subst(l.rhs);
            }
        }
    }

private:
    const std::map<std::string, std::int64_t>& overrides_;
    std::map<std::string, const Term*> defs_;
    std::map<std::string, std::int64_t> cache_;
    std::set<std::string> visiting_;
};

}  // namespace

Program resolve_consts(const Program& program, const std::map<std::string, std::int64_t>& overrides) {
    ConstResolver r(program, overrides);
    Program out = program;
    for (auto& c : out.consts) c.value = Term::integer(r.value(c.name));
    for (const auto& [name, v] : overrides) {
        auto it = std::find_if(out.consts.begin(), out.consts.end(), [&](const ConstDef& c) { return c.name == name; });
        if (it == out.consts.end()) out.consts.push_back({name, Term::integer(v)});
    }
    if (out.iinit) out.iinit = Term::integer(r.eval_int(*out.iinit, "#iinit"));
    for (auto& part : out.parts) {
        if (part.life_span) {
            auto l = r.eval_int(*part.life_span, "life span");
            if (l < 1) throw ResolveError("life span must be positive, got " + std::to_string(l));
            part.life_span = Term::integer(l);
        }
        for (auto& e : part.externals) {
            r.apply(e.atom);
            r.apply(e.condition);
        }
        for (auto& rule : part.rules) {
            if (rule.kind == RuleKind::Normal) r.apply(rule.head);
            for (auto& el : rule.elements) {
                r.apply(el.atom);
                r.apply(el.condition);
            }
            if (rule.lower) rule.lower = r.subst(*rule.lower);
            if (rule.upper) rule.upper = r.subst(*rule.upper);
            r.apply(rule.body);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// safety

namespace {

using VarSet = std::set<std::string>;

void vars_of(const Term& t, VarSet& out) {
    std::vector<std::string> v;
    t.collect_variables(v);
    out.insert(v.begin(), v.end());
}

void vars_of(const Atom& a, VarSet& out) {
    for (const auto& t : a.args) vars_of(t, out);
}

void vars_of(const Literal& l, VarSet& out) {
    if (l.kind == Literal::Kind::Atom) vars_of(l.atom, out);
    else {
        vars_of(l.lhs, out);
        vars_of(l.rhs, out);
    }
}

bool subset(const VarSet& a, const VarSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Extends `bound` with variables bound by positive atoms and assignments in `lits`.
void close_bindings(const std::vector<Literal>& lits, VarSet& bound) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& l : lits) {
            if (l.kind == Literal::Kind::Atom) {
                if (l.negative) continue;
                for (const auto& t : l.atom.args)
                    if (t.kind == Term::Kind::Variable && bound.insert(t.name).second) changed = true;
            } else if (l.cmp == Comparison::Eq) {
                VarSet side;
                if (l.lhs.kind == Term::Kind::Variable && !bound.count(l.lhs.name)) {
                    vars_of(l.rhs, side);
                    if (subset(side, bound)) {
                        bound.insert(l.lhs.name);
                        changed = true;
                    }
                } else if (l.rhs.kind == Term::Kind::Variable && !bound.count(l.rhs.name)) {
                    vars_of(l.lhs, side);
                    if (subset(side, bound)) {
                        bound.insert(l.rhs.name);
                        changed = true;
                    }
                }
            }
        }
    }
}

[[noreturn]] void unsafe(Location loc, const std::string& var, const std::string& text) {
    throw ParseError(loc, "unsafe variable " + var + " in: " + text);
}

void require(const VarSet& used, const VarSet& bound, Location loc, const std::string& text) {
    for (const auto& v : used)
        if (!bound.count(v)) unsafe(loc, v, text);
}

}  // namespace

void check_safety(const Rule& rule) {
    VarSet bound;
    close_bindings(rule.body, bound);
    VarSet used;
    for (const auto& l : rule.body) vars_of(l, used);
    if (rule.kind == RuleKind::Normal) vars_of(rule.head, used);
    if (rule.lower) vars_of(*rule.lower, used);
    if (rule.upper) vars_of(*rule.upper, used);
    require(used, bound, rule.loc, to_string(rule));
    for (const auto& el : rule.elements) {
        VarSet local = bound;
        close_bindings(el.condition, local);
        VarSet el_used;
        vars_of(el.atom, el_used);
        for (const auto& l : el.condition) vars_of(l, el_used);
        require(el_used, local, rule.loc, to_string(rule));
    }
}

void check_safety(const External& ext) {
    VarSet bound;
    close_bindings(ext.condition, bound);
    VarSet used;
    vars_of(ext.atom, used);
    for (const auto& l : ext.condition) vars_of(l, used);
    require(used, bound, ext.loc, "#external " + to_string(ext.atom));
}

}  // namespace streamlp
