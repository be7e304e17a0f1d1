#include "streamlp/grounder.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_set>

namespace streamlp {

// ---------------------------------------------------------------------------
// Relation / Domain

std::vector<Value> Relation::key_of(std::size_t pos, std::uint64_t mask) const {
    const auto& args = table_->atom(atoms_[pos]).args;
    std::vector<Value> key;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (mask >> i & 1) key.push_back(args[i]);
    return key;
}

Relation::Index& Relation::index_for(std::uint64_t mask) const {
    for (auto& idx : indices_)
        if (idx->mask == mask) return *idx;
    indices_.push_back(std::make_unique<Index>());
    indices_.back()->mask = mask;
    return *indices_.back();
}

const std::vector<std::uint32_t>* Relation::lookup(std::uint64_t mask, const std::vector<Value>& key) const {
    Index& idx = index_for(mask);
    for (; idx.indexed < atoms_.size(); ++idx.indexed)
        idx.map[key_of(idx.indexed, mask)].push_back(static_cast<std::uint32_t>(idx.indexed));
    auto it = idx.map.find(key);
    return it == idx.map.end() ? nullptr : &it->second;
}

void Relation::pop() {
    std::size_t pos = atoms_.size() - 1;
    for (auto& idx : indices_) {
        if (idx->indexed <= pos) continue;
        auto it = idx->map.find(key_of(pos, idx->mask));
        it->second.pop_back();
        if (it->second.empty()) idx->map.erase(it);
        idx->indexed = pos;
    }
    atoms_.pop_back();
}

bool Domain::add(AtomId id) {
    if (contains(id)) return false;
    if (member_.size() <= id) member_.resize(std::max<std::size_t>(id + 1, member_.size() * 2), 0);
    member_[id] = 1;
    log_.push_back(id);
    const auto& atom = table_->atom(id);
    auto& rel = relations_[{atom.name, atom.args.size()}];
    if (!rel) rel = std::make_unique<Relation>(table_);
    rel->push(id);
    return true;
}

Relation* Domain::relation(const std::string* name, std::size_t arity) const {
    auto it = relations_.find({name, arity});
    return it == relations_.end() ? nullptr : it->second.get();
}

void Domain::rollback(std::size_t checkpoint) {
    while (log_.size() > checkpoint) {
        AtomId id = log_.back();
        log_.pop_back();
        member_[id] = 0;
        const auto& atom = table_->atom(id);
        relations_.at({atom.name, atom.args.size()})->pop();
    }
}

AtomId GroundingContext::fresh_assumption() {
    static const std::string* name = intern("__a");
    return atoms->intern(GroundAtom{name, {Value::integer(static_cast<std::int64_t>(next_assumption++))}});
}

// ---------------------------------------------------------------------------
// Compilation

namespace {

struct CAtom {
    const std::string* name = nullptr;
    std::vector<Term> args;
};

struct CLit {
    bool is_cmp = false;
    bool negative = false;
    CAtom atom;
    Comparison cmp = Comparison::Eq;
    Term lhs, rhs;
};

enum class StepKind { Match, Filter, Assign };

struct PlanStep {
    StepKind kind = StepKind::Match;
    int lit = 0;
    // Match
    std::uint64_t key_mask = 0;
    std::vector<int> key_args;
    std::vector<std::pair<int, int>> binds;   // (argument position, slot)
    std::vector<std::pair<int, int>> checks;  // repeated variable inside the same atom
    // Assign
    int slot = -1;
    const Term* expr = nullptr;
};

using Plan = std::vector<PlanStep>;

PlanStep step_of(StepKind kind, int lit) {
    PlanStep s;
    s.kind = kind;
    s.lit = lit;
    return s;
}

std::vector<Atom> unpool(const Atom& atom) {
    std::vector<Atom> out{Atom{atom.name, {}}};
    for (const auto& arg : atom.args) {
        const std::vector<Term>* alts = nullptr;
        std::vector<Term> single;
        if (arg.kind == Term::Kind::Pool) {
            alts = &arg.args;
        } else {
            single.push_back(arg);
            alts = &single;
        }
        std::vector<Atom> next;
        for (const auto& partial : out)
            for (const auto& alt : *alts) {
                Atom a = partial;
                a.args.push_back(alt);
                next.push_back(std::move(a));
            }
        out = std::move(next);
    }
    return out;
}

class SlotMap {
public:
    int slot(const std::string& name) {
        auto [it, inserted] = slots_.try_emplace(name, static_cast<int>(slots_.size()));
        return it->second;
    }
    int size() const { return static_cast<int>(slots_.size()); }

    void assign(Term& t) {
        if (t.kind == Term::Kind::Variable) t.slot = slot(t.name);
        for (auto& a : t.args) assign(a);
    }

private:
    std::map<std::string, int> slots_;
};

CAtom compile_atom(const Atom& a, SlotMap& slots) {
    CAtom c{intern(a.name), a.args};
    for (auto& t : c.args) slots.assign(t);
    return c;
}

void compile_literals(const std::vector<Literal>& lits, SlotMap& slots, std::vector<CLit>& out) {
    for (const auto& l : lits) {
        if (l.kind == Literal::Kind::Comparison) {
            CLit c;
            c.is_cmp = true;
            c.cmp = l.cmp;
            c.lhs = l.lhs;
            c.rhs = l.rhs;
            slots.assign(c.lhs);
            slots.assign(c.rhs);
            out.push_back(std::move(c));
            continue;
        }
        for (const auto& a : unpool(l.atom)) {
            CLit c;
            c.negative = l.negative;
            c.atom = compile_atom(a, slots);
            if (!c.negative)
                for (const auto& t : c.atom.args)
                    if (t.is_multi_valued())
                        throw GroundingError("interval in positive body literal is not supported: " + to_string(l));
            out.push_back(std::move(c));
        }
    }
}

bool evaluable(const Term& t, const std::vector<char>& bound) {
    if (t.kind == Term::Kind::Variable) return bound[t.slot];
    for (const auto& a : t.args)
        if (!evaluable(a, bound)) return false;
    return true;
}

bool literal_bound(const CLit& l, const std::vector<char>& bound) {
    if (l.is_cmp) return evaluable(l.lhs, bound) && evaluable(l.rhs, bound);
    for (const auto& t : l.atom.args)
        if (!evaluable(t, bound)) return false;
    return true;
}

/// Greedy join order. `first` (if >= 0) is matched first when possible.
/// Negative literals are not part of the plan; they are evaluated after it.
Plan make_plan(const std::vector<CLit>& lits, std::vector<char>& bound, int first, const std::string& context) {
    Plan plan;
    std::vector<char> placed(lits.size(), 0);
    for (std::size_t i = 0; i < lits.size(); ++i)
        if (!lits[i].is_cmp && lits[i].negative) placed[i] = 1;

    auto eligible = [&](const CLit& l) {
        for (const auto& t : l.atom.args)
            if (t.kind != Term::Kind::Variable && !evaluable(t, bound)) return false;
        return true;
    };
    auto place_match = [&](int i) {
        PlanStep s;
        s.kind = StepKind::Match;
        s.lit = i;
        const auto& args = lits[i].atom.args;
        std::vector<char> local = bound;
        for (std::size_t k = 0; k < args.size(); ++k) {
            if (evaluable(args[k], bound)) {
                s.key_mask |= std::uint64_t{1} << k;
                s.key_args.push_back(static_cast<int>(k));
            } else if (local[args[k].slot]) {
                s.checks.push_back({static_cast<int>(k), args[k].slot});
            } else {
                s.binds.push_back({static_cast<int>(k), args[k].slot});
                local[args[k].slot] = 1;
            }
        }
        bound = std::move(local);
        placed[i] = 1;
        plan.push_back(std::move(s));
    };

    if (first >= 0 && eligible(lits[first])) place_match(first);

    while (true) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t i = 0; i < lits.size(); ++i) {
                if (placed[i] || !lits[i].is_cmp) continue;
                const auto& l = lits[i];
                if (literal_bound(l, bound)) {
                    plan.push_back(step_of(StepKind::Filter, static_cast<int>(i)));
                } else if (l.cmp == Comparison::Eq && l.lhs.kind == Term::Kind::Variable && !bound[l.lhs.slot] &&
                           evaluable(l.rhs, bound)) {
                    PlanStep s = step_of(StepKind::Assign, static_cast<int>(i));
                    s.slot = l.lhs.slot;
                    s.expr = &l.rhs;
                    bound[s.slot] = 1;
                    plan.push_back(std::move(s));
                } else if (l.cmp == Comparison::Eq && l.rhs.kind == Term::Kind::Variable && !bound[l.rhs.slot] &&
                           evaluable(l.lhs, bound)) {
                    PlanStep s = step_of(StepKind::Assign, static_cast<int>(i));
                    s.slot = l.rhs.slot;
                    s.expr = &l.lhs;
                    bound[s.slot] = 1;
                    plan.push_back(std::move(s));
                } else {
                    continue;
                }
                placed[i] = 1;
                progress = true;
            }
        }
        int best = -1, best_score = -1;
        bool pending = false;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (placed[i]) continue;
            pending = true;
            if (lits[i].is_cmp || !eligible(lits[i])) continue;
            int score = 0;
            for (const auto& t : lits[i].atom.args) score += evaluable(t, bound) ? 1 : 0;
            if (score > best_score) best = static_cast<int>(i), best_score = score;
        }
        if (!pending) break;
        if (best < 0) throw GroundingError("cannot instantiate (unsafe variables): " + context);
        place_match(best);
    }
    for (const auto& l : lits)
        if (!l.is_cmp && l.negative && !literal_bound(l, bound))
            throw GroundingError("cannot instantiate (unsafe variables): " + context);
    return plan;
}

/// Phase-one view of a rule: something that can make `head` possible.
struct HeadRule {
    std::vector<CLit> lits;
    CAtom head;
    int nslots = 0;
    bool fact = false;          // body has no atom literals
    Plan plan;                  // default order
    std::vector<Plan> delta;    // per literal index; empty for non-positive literals
};

struct CElement {
    CAtom atom;
    std::vector<CLit> condition;
    Plan plan;
};

struct CRule {
    RuleKind kind = RuleKind::Normal;
    CAtom head;
    std::vector<CElement> elements;
    std::optional<Term> lower, upper;
    std::vector<CLit> body;
    int nslots = 0;
    Plan plan;
    std::string text;
};

struct CExternal {
    CAtom atom;
    std::vector<CLit> condition;
    int nslots = 0;
    Plan plan;
};

}  // namespace

struct PartGrounder::Impl {
    ProgramPart part;
    std::vector<CExternal> externals;
    std::vector<HeadRule> head_rules;
    std::vector<CRule> rules;

    explicit Impl(const ProgramPart& p) : part(p) {
        for (const auto& e : part.externals) compile_external(e);
        for (const auto& r : part.rules) compile_rule(r);
    }

    void compile_external(const External& e) {
        std::string text = "#external " + to_string(e.atom) + ".";
        for (const auto& a : unpool(e.atom)) {
            CExternal c;
            SlotMap slots;
            compile_literals(e.condition, slots, c.condition);
            c.atom = compile_atom(a, slots);
            c.nslots = slots.size();
            std::vector<char> bound(c.nslots, 0);
            c.plan = make_plan(c.condition, bound, -1, text);
            externals.push_back(std::move(c));
        }
    }

    void add_head_rule(std::vector<CLit> lits, CAtom head, int nslots, const std::string& text) {
        HeadRule h;
        h.lits = std::move(lits);
        h.head = std::move(head);
        h.nslots = nslots;
        h.fact = std::none_of(h.lits.begin(), h.lits.end(), [](const CLit& l) { return !l.is_cmp; });
        std::vector<char> bound(nslots, 0);
        h.plan = make_plan(h.lits, bound, -1, text);
        h.delta.resize(h.lits.size());
        for (std::size_t i = 0; i < h.lits.size(); ++i) {
            if (h.lits[i].is_cmp || h.lits[i].negative) continue;
            std::vector<char> b(nslots, 0);
            h.delta[i] = make_plan(h.lits, b, static_cast<int>(i), text);
        }
        head_rules.push_back(std::move(h));
    }

    void compile_rule(const Rule& r) {
        std::string text = to_string(r);
        std::vector<Atom> heads{r.head};
        if (r.kind == RuleKind::Normal) heads = unpool(r.head);
        for (const auto& head_atom : heads) {
            CRule c;
            c.kind = r.kind;
            c.text = text;
            SlotMap slots;
            compile_literals(r.body, slots, c.body);
            if (r.kind == RuleKind::Normal) c.head = compile_atom(head_atom, slots);
            if (r.lower) {
                c.lower = *r.lower;
                slots.assign(*c.lower);
            }
            if (r.upper) {
                c.upper = *r.upper;
                slots.assign(*c.upper);
            }
            for (const auto& e : r.elements) {
                std::vector<CLit> cond;
                compile_literals(e.condition, slots, cond);
                for (const auto& a : unpool(e.atom)) {
                    CElement ce;
                    ce.atom = compile_atom(a, slots);
                    ce.condition = cond;
                    c.elements.push_back(std::move(ce));
                }
            }
            c.nslots = slots.size();
            std::vector<char> bound(c.nslots, 0);
            c.plan = make_plan(c.body, bound, -1, text);
            for (auto& e : c.elements) {
                std::vector<char> b = bound;
                e.plan = make_plan(e.condition, b, -1, text);
            }
            if (r.kind == RuleKind::Normal) add_head_rule(c.body, c.head, c.nslots, text);
            for (const auto& e : c.elements) {
                std::vector<CLit> lits = c.body;
                lits.insert(lits.end(), e.condition.begin(), e.condition.end());
                add_head_rule(std::move(lits), e.atom, c.nslots, text);
            }
            rules.push_back(std::move(c));
        }
    }
};

// ---------------------------------------------------------------------------
// Instantiation

namespace {

using Ranges = std::unordered_map<const Relation*, std::size_t>;

class Instantiator {
public:
    Instantiator(GroundingContext& ctx, std::int64_t step, int nslots)
        : ctx_(ctx), step_(step), bind_(static_cast<std::size_t>(nslots)), matched_() {}

    /// Enumerates all bindings of `plan` over `lits`. When `delta_lit` >= 0, that
    /// literal only matches atoms at positions at or after `delta_from`.
    void run(const Plan& plan, const std::vector<CLit>& lits, int delta_lit, const Ranges* delta_from,
             const std::function<void()>& f) {
        plan_ = &plan;
        lits_ = &lits;
        delta_lit_ = delta_lit;
        delta_from_ = delta_from;
        f_ = &f;
        matched_.assign(lits.size(), 0);
        go(0);
    }

    std::vector<std::optional<Value>>& binding() { return bind_; }
    const std::vector<AtomId>& matched() const { return matched_; }
    SlotBinding slots() const { return SlotBinding(bind_.data(), bind_.size()); }
    std::int64_t step() const { return step_; }

    GroundAtom eval_atom(const CAtom& a) const {
        GroundAtom g{a.name, {}};
        g.args.reserve(a.args.size());
        for (const auto& t : a.args) g.args.push_back(eval_term(t, slots(), step_));
        return g;
    }

    std::vector<GroundAtom> eval_atom_values(const CAtom& a) const {
        std::vector<GroundAtom> out{GroundAtom{a.name, {}}};
        for (const auto& t : a.args) {
            auto vals = eval_term_values(t, slots(), step_);
            std::vector<GroundAtom> next;
            next.reserve(out.size() * vals.size());
            for (const auto& g : out)
                for (const auto& v : vals) {
                    GroundAtom n = g;
                    n.args.push_back(v);
                    next.push_back(std::move(n));
                }
            out = std::move(next);
        }
        return out;
    }

private:
    bool compare(const CLit& l) const {
        auto lv = eval_term_values(l.lhs, slots(), step_);
        auto rv = eval_term_values(l.rhs, slots(), step_);
        for (const auto& a : lv)
            for (const auto& b : rv) {
                bool ok = false;
                switch (l.cmp) {
                    case Comparison::Eq: ok = a == b; break;
                    case Comparison::Ne: ok = a != b; break;
                    case Comparison::Lt: ok = a < b; break;
                    case Comparison::Le: ok = a <= b; break;
                    case Comparison::Gt: ok = a > b; break;
                    case Comparison::Ge: ok = a >= b; break;
                }
                if (ok) return true;
            }
        return false;
    }

    void go(std::size_t i) {
        if (i == plan_->size()) {
            (*f_)();
            return;
        }
        const PlanStep& s = (*plan_)[i];
        const CLit& l = (*lits_)[s.lit];
        switch (s.kind) {
            case StepKind::Filter:
                if (compare(l)) go(i + 1);
                return;
            case StepKind::Assign:
                for (const auto& v : eval_term_values(*s.expr, slots(), step_)) {
                    bind_[s.slot] = v;
                    go(i + 1);
                }
                bind_[s.slot].reset();
                return;
            case StepKind::Match: match(s, l, i);
        }
    }

    void match(const PlanStep& s, const CLit& l, std::size_t i) {
        const Relation* rel = ctx_.domain.relation(l.atom.name, l.atom.args.size());
        if (!rel) return;
        std::size_t lo = 0, hi = rel->size();
        if (s.lit == delta_lit_) {
            auto it = delta_from_->find(rel);
            lo = it == delta_from_->end() ? 0 : it->second;
        }
        if (lo >= hi) return;

        auto visit = [&](std::size_t pos) {
            AtomId id = rel->at(pos);
            if (ctx_.forgotten.count(id)) return;
            const auto& args = ctx_.atoms->atom(id).args;
            for (auto [k, slot] : s.binds) bind_[slot] = args[k];
            for (auto [k, slot] : s.checks)
                if (args[k] != *bind_[slot]) return;
            matched_[s.lit] = id;
            go(i + 1);
        };

        if (s.key_args.empty()) {
            for (std::size_t pos = lo; pos < hi; ++pos) visit(pos);
        } else {
            std::vector<Value> key;
            key.reserve(s.key_args.size());
            for (int k : s.key_args) key.push_back(eval_term(l.atom.args[k], slots(), step_));
            const auto* positions = rel->lookup(s.key_mask, key);
            if (!positions) return;
            auto it = std::lower_bound(positions->begin(), positions->end(), static_cast<std::uint32_t>(lo));
            // the vector may not grow while we iterate: the domain is frozen during a pass
            for (; it != positions->end() && *it < hi; ++it) visit(*it);
        }
        for (auto [k, slot] : s.binds) bind_[slot].reset();
    }

    GroundingContext& ctx_;
    std::int64_t step_;
    std::vector<std::optional<Value>> bind_;
    std::vector<AtomId> matched_;
    const Plan* plan_ = nullptr;
    const std::vector<CLit>* lits_ = nullptr;
    int delta_lit_ = -1;
    const Ranges* delta_from_ = nullptr;
    const std::function<void()>* f_ = nullptr;
};

class SliceBuilder {
public:
    SliceBuilder(const PartGrounder::Impl& impl, std::int64_t step, GroundingContext& ctx)
        : impl_(impl), step_(step), ctx_(ctx) {}

    GroundSlice build() {
        GroundSlice slice;
        slice.birth_step = step_;
        slice.life_span = impl_.part.life();
        std::size_t checkpoint = ctx_.domain.checkpoint();
        try {
            declare_externals(slice);
            expand_heads(slice);
            instantiate(slice);
        } catch (...) {
            ctx_.domain.rollback(checkpoint);
            throw;
        }
        ctx_.domain.rollback(checkpoint);
        if (slice.life_span) slice.assumption = ctx_.fresh_assumption();
        return slice;
    }

private:
    void declare_externals(GroundSlice& slice) {
        for (const auto& e : impl_.externals) {
            Instantiator inst(ctx_, step_, e.nslots);
            inst.run(e.plan, e.condition, -1, nullptr, [&] {
                if (!negatives_hold(inst, e.condition)) return;
                for (const auto& g : inst.eval_atom_values(e.atom)) {
                    AtomId id = ctx_.atoms->intern(g);
                    if (ctx_.defined.count(id) || ctx_.forgotten.count(id) || ctx_.external.count(id)) continue;
                    if (local_externals_.insert(id).second) slice.new_externals.push_back(id);
                }
            });
        }
        for (AtomId id : slice.new_externals) ctx_.domain.add(id);
    }

    // External conditions are evaluated over the current domain only; a
    // negative condition literal holds unless its atom is a known fact.
    bool negatives_hold(const Instantiator& inst, const std::vector<CLit>& lits) {
        for (const auto& l : lits) {
            if (l.is_cmp || !l.negative) continue;
            for (const auto& g : inst.eval_atom_values(l.atom)) {
                auto id = ctx_.atoms->find(g);
                if (id && ctx_.facts.count(*id)) return false;
            }
        }
        return true;
    }

    void add_head(AtomId id, bool fact, GroundSlice& slice, std::vector<AtomId>& fresh) {
        if (fact) local_facts_.insert(id);
        if (!local_heads_.insert(id).second) return;
        if (auto it = ctx_.defined.find(id); it != ctx_.defined.end())
            throw ModularityError("atom " + ctx_.atoms->text(id) + " defined at step " + std::to_string(it->second) +
                                  " is redefined at step " + std::to_string(step_));
        if (ctx_.forgotten.count(id))
            throw ModularityError("atom " + ctx_.atoms->text(id) + " was forgotten and cannot be defined at step " +
                                  std::to_string(step_));
        slice.new_heads.push_back(id);
        fresh.push_back(id);
    }

    void expand_heads(GroundSlice& slice) {
        Ranges delta_from;
        std::vector<AtomId> fresh;
        for (const auto& h : impl_.head_rules) {
            Instantiator inst(ctx_, step_, h.nslots);
            inst.run(h.plan, h.lits, -1, nullptr, [&] {
                for (const auto& g : inst.eval_atom_values(h.head)) add_head(ctx_.atoms->intern(g), h.fact, slice, fresh);
            });
        }
        while (!fresh.empty()) {
            delta_from.clear();
            std::unordered_set<const Relation*> changed;
            for (AtomId id : fresh) {
                const auto& a = ctx_.atoms->atom(id);
                const std::string* name = a.name;
                std::size_t arity = a.args.size();
                const Relation* rel = ctx_.domain.relation(name, arity);
                std::size_t before = rel ? rel->size() : 0;
                if (!ctx_.domain.add(id)) continue;
                rel = ctx_.domain.relation(name, arity);
                delta_from.try_emplace(rel, before);
                changed.insert(rel);
            }
            fresh.clear();
            for (const auto& h : impl_.head_rules) {
                for (std::size_t i = 0; i < h.lits.size(); ++i) {
                    const auto& l = h.lits[i];
                    if (l.is_cmp || l.negative) continue;
                    const Relation* rel = ctx_.domain.relation(l.atom.name, l.atom.args.size());
                    if (!rel || !changed.count(rel)) continue;
                    Instantiator inst(ctx_, step_, h.nslots);
                    inst.run(h.delta[i], h.lits, static_cast<int>(i), &delta_from, [&] {
                        for (const auto& g : inst.eval_atom_values(h.head))
                            add_head(ctx_.atoms->intern(g), h.fact, slice, fresh);
                    });
                }
            }
        }
        std::erase_if(slice.new_externals, [&](AtomId id) { return local_heads_.count(id) > 0; });
    }

    bool is_fact(AtomId id) const { return ctx_.facts.count(id) || local_facts_.count(id); }

    /// Appends the simplified ground literals for a literal list. Positive atoms
    /// come from the match; negative atoms that cannot become true are dropped.
    void ground_literals(const Instantiator& inst, const std::vector<CLit>& lits, bool drop_facts,
                         std::vector<GroundLiteral>& out) {
        for (std::size_t i = 0; i < lits.size(); ++i) {
            const auto& l = lits[i];
            if (l.is_cmp) continue;
            if (!l.negative) {
                AtomId id = inst.matched()[i];
                if (drop_facts && is_fact(id)) continue;
                out.push_back({id, false});
                continue;
            }
            for (const auto& g : inst.eval_atom_values(l.atom)) {
                auto id = ctx_.atoms->find(g);
                if (!id || !ctx_.possible(*id)) continue;
                out.push_back({*id, true});
            }
        }
        std::vector<GroundLiteral> unique;
        for (const auto& l : out)
            if (std::find(unique.begin(), unique.end(), l) == unique.end()) unique.push_back(l);
        out = std::move(unique);
    }

    void emit(GroundRule rule, GroundSlice& slice) {
        if (seen_.insert(rule).second) slice.rules.push_back(std::move(rule));
    }

    std::int64_t eval_bound(const Term& t, const Instantiator& inst, const CRule& r) {
        Value v = eval_term(t, inst.slots(), step_);
        if (!v.is_integer()) throw GroundingError("non-integer cardinality bound in: " + r.text);
        return v.integer_value();
    }

    void instantiate(GroundSlice& slice) {
        for (const auto& r : impl_.rules) {
            Instantiator inst(ctx_, step_, r.nslots);
            inst.run(r.plan, r.body, -1, nullptr, [&] {
                std::vector<GroundLiteral> body;
                ground_literals(inst, r.body, false, body);
                switch (r.kind) {
                    case RuleKind::Constraint: {
                        GroundRule g;
                        g.kind = GroundRuleKind::Constraint;
                        g.body = std::move(body);
                        emit(std::move(g), slice);
                        break;
                    }
                    case RuleKind::Normal:
                        for (const auto& h : inst.eval_atom_values(r.head)) {
                            GroundRule g;
                            g.kind = GroundRuleKind::Normal;
                            g.head = ctx_.atoms->intern(h);
                            g.body = body;
                            if (g.body.empty() && std::none_of(r.body.begin(), r.body.end(), [](const CLit& l) {
                                    return !l.is_cmp && l.negative;
                                }))
                                if (std::find(slice.new_facts.begin(), slice.new_facts.end(), g.head) ==
                                    slice.new_facts.end())
                                    slice.new_facts.push_back(g.head);
                            emit(std::move(g), slice);
                        }
                        break;
                    case RuleKind::Choice: {
                        GroundRule g;
                        g.kind = GroundRuleKind::Choice;
                        g.body = std::move(body);
                        if (r.lower) g.lower = eval_bound(*r.lower, inst, r);
                        if (r.upper) g.upper = eval_bound(*r.upper, inst, r);
                        for (const auto& e : r.elements) {
                            Instantiator sub(ctx_, step_, r.nslots);
                            sub.binding() = inst.binding();
                            sub.run(e.plan, e.condition, -1, nullptr, [&] {
                                std::vector<GroundLiteral> cond;
                                ground_literals(sub, e.condition, true, cond);
                                for (const auto& a : sub.eval_atom_values(e.atom)) {
                                    GroundChoiceElement ge{ctx_.atoms->intern(a), cond};
                                    if (std::find(g.elements.begin(), g.elements.end(), ge) == g.elements.end())
                                        g.elements.push_back(std::move(ge));
                                }
                            });
                        }
                        emit(std::move(g), slice);
                        break;
                    }
                }
            });
        }
    }

    const PartGrounder::Impl& impl_;
    std::int64_t step_;
    GroundingContext& ctx_;
    std::unordered_set<AtomId> local_externals_, local_heads_, local_facts_;
    std::unordered_set<GroundRule, GroundRuleHash> seen_;
};

}  // namespace

PartGrounder::PartGrounder(const ProgramPart& part) : impl_(std::make_unique<Impl>(part)) {}
PartGrounder::~PartGrounder() = default;
PartGrounder::PartGrounder(PartGrounder&&) noexcept = default;
PartGrounder& PartGrounder::operator=(PartGrounder&&) noexcept = default;

const ProgramPart& PartGrounder::part() const { return impl_->part; }

GroundSlice PartGrounder::ground(std::int64_t step, GroundingContext& ctx) const {
    return SliceBuilder(*impl_, step, ctx).build();
}

GroundSlice ground_part(const ProgramPart& part, std::int64_t step, GroundingContext& ctx) {
    return PartGrounder(part).ground(step, ctx);
}

GroundSlice ground_base(const Program& program, GroundingContext& ctx) {
    ProgramPart merged;
    merged.kind = PartKind::Base;
    for (const auto& p : program.parts) {
        if (p.kind != PartKind::Base) continue;
        merged.rules.insert(merged.rules.end(), p.rules.begin(), p.rules.end());
        merged.externals.insert(merged.externals.end(), p.externals.begin(), p.externals.end());
    }
    return ground_part(merged, 0, ctx);
}

void commit_slice(const GroundSlice& slice, GroundingContext& ctx) {
    for (AtomId e : slice.new_externals) {
        ctx.external.emplace(e, slice.birth_step);
        ctx.domain.add(e);
    }
    for (AtomId h : slice.new_heads) {
        ctx.external.erase(h);
        ctx.defined[h] = slice.birth_step;
        ctx.domain.add(h);
    }
    if (!slice.life_span)
        for (AtomId f : slice.new_facts) ctx.facts.insert(f);
}

}  // namespace streamlp
