#include "streamlp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "streamlp/errors.hpp"

namespace streamlp {

namespace {

using Lit = std::uint32_t;

inline Lit mk_lit(int var, bool negative) { return static_cast<Lit>(var) * 2 + (negative ? 1 : 0); }
inline int var_of(Lit l) { return static_cast<int>(l >> 1); }
inline bool is_neg(Lit l) { return l & 1; }
inline Lit negate(Lit l) { return l ^ 1; }

constexpr Lit kTrue = 0;  // variable 0 is fixed true at level 0
constexpr Lit kFalse = 1;

struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
    bool keep = false;  // loop nogoods and blocking clauses survive database reduction
    double activity = 0;
    std::uint64_t id = 0;
};

struct Watcher {
    Clause* clause;
    Lit blocker;
};

struct Support {
    Lit lit;
    std::vector<int> pos;  // positive body atoms in the same component
};

double luby(double y, int x) {
    int size = 1, seq = 0;
    for (; size < x + 1; seq++, size = 2 * size + 1) {}
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        seq--;
        x = x % size;
    }
    double r = 1;
    for (int i = 0; i < seq; ++i) r *= y;
    return r;
}

/// Max-heap on activity; ties go to the smaller variable.
class VarHeap {
public:
    explicit VarHeap(const std::vector<double>& act) : act_(act) {}

    bool empty() const { return heap_.empty(); }
    bool contains(int v) const { return v < static_cast<int>(pos_.size()) && pos_[v] >= 0; }

    void insert(int v) {
        if (static_cast<int>(pos_.size()) <= v) pos_.resize(v + 1, -1);
        if (pos_[v] >= 0) return;
        pos_[v] = static_cast<int>(heap_.size());
        heap_.push_back(v);
        up(pos_[v]);
    }

    void increased(int v) {
        if (contains(v)) up(pos_[v]);
    }

    int pop() {
        int v = heap_[0];
        heap_[0] = heap_.back();
        pos_[heap_[0]] = 0;
        heap_.pop_back();
        pos_[v] = -1;
        if (!heap_.empty()) down(0);
        return v;
    }

private:
    bool before(int a, int b) const { return act_[a] > act_[b] || (act_[a] == act_[b] && a < b); }

    void up(int i) {
        int v = heap_[i];
        while (i > 0) {
            int p = (i - 1) / 2;
            if (!before(v, heap_[p])) break;
            heap_[i] = heap_[p];
            pos_[heap_[i]] = i;
            i = p;
        }
        heap_[i] = v;
        pos_[v] = i;
    }

    void down(int i) {
        int v = heap_[i];
        int n = static_cast<int>(heap_.size());
        while (true) {
            int c = 2 * i + 1;
            if (c >= n) break;
            if (c + 1 < n && before(heap_[c + 1], heap_[c])) c++;
            if (!before(heap_[c], v)) break;
            heap_[i] = heap_[c];
            pos_[heap_[i]] = i;
            i = c;
        }
        heap_[i] = v;
        pos_[v] = i;
    }

    const std::vector<double>& act_;
    std::vector<int> heap_;
    std::vector<int> pos_;
};

struct LitVecHash {
    std::size_t operator()(const std::vector<Lit>& v) const noexcept {
        std::size_t h = v.size();
        for (Lit l : v) hash_combine(h, l);
        return h;
    }
};

}  // namespace

struct Solver::Impl {
    // assignment
    std::vector<std::int8_t> value_;  // per var: 1 true, -1 false, 0 unassigned
    std::vector<int> level_;
    std::vector<Clause*> reason_;
    std::vector<Lit> trail_;
    std::vector<std::size_t> trail_lim_;
    std::size_t qhead_ = 0;

    // clauses
    std::vector<std::unique_ptr<Clause>> clauses_, learnts_;
    std::vector<std::vector<Watcher>> watches_;  // indexed by literal; visited when it becomes false
    std::uint64_t next_clause_id_ = 0;
    double cla_inc_ = 1;
    double max_learnts_ = 0;

    // heuristic
    std::vector<double> activity_;
    VarHeap heap_{activity_};      // atom variables, decided first
    VarHeap aux_heap_{activity_};  // auxiliary variables
    int completion_blocked_ = -1;  // level at which completing by phases last failed
    std::vector<char> phase_;
    double var_inc_ = 1;

    // program structure
    std::unordered_map<AtomId, int> atom_var_;
    std::vector<std::int64_t> var_atom_;  // -1 for auxiliary variables
    std::vector<char> defined_;
    std::vector<int> undefined_;          // atom variables still without definition
    std::unordered_map<std::vector<Lit>, Lit, LitVecHash> bodies_;
    std::vector<int> scc_of_;
    std::vector<std::vector<int>> sccs_;
    std::unordered_map<int, std::vector<Support>> supports_;

    std::vector<char> seen_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t stamp_id_ = 0;

    bool ok_ = true;
    bool reuse_ = true;
    std::size_t simplified_trail_ = 0;
    SolveStats stats_;

    Impl() {
        int t = new_var(-1);
        enqueue(mk_lit(t, false), nullptr);
    }

    // ------------------------------------------------------------------ basics

    std::int8_t value(Lit l) const {
        std::int8_t v = value_[var_of(l)];
        return is_neg(l) ? static_cast<std::int8_t>(-v) : v;
    }
    int decision_level() const { return static_cast<int>(trail_lim_.size()); }

    int new_var(std::int64_t atom) {
        int v = static_cast<int>(value_.size());
        value_.push_back(0);
        level_.push_back(0);
        reason_.push_back(nullptr);
        activity_.push_back(0);
        phase_.push_back(0);
        var_atom_.push_back(atom);
        defined_.push_back(0);
        scc_of_.push_back(-1);
        seen_.push_back(0);
        stamp_.push_back(0);
        watches_.emplace_back();
        watches_.emplace_back();
        heap_of(v).insert(v);
        return v;
    }

    int atom_var(AtomId a) {
        auto [it, inserted] = atom_var_.try_emplace(a, 0);
        if (inserted) {
            it->second = new_var(a);
            undefined_.push_back(it->second);
        }
        return it->second;
    }

    void enqueue(Lit l, Clause* reason) {
        int v = var_of(l);
        value_[v] = is_neg(l) ? -1 : 1;
        level_[v] = decision_level();
        reason_[v] = reason;
        trail_.push_back(l);
    }

    void new_level() { trail_lim_.push_back(trail_.size()); }

    VarHeap& heap_of(int v) { return var_atom_[v] >= 0 ? heap_ : aux_heap_; }

    int pop_unassigned(VarHeap& h) {
        while (!h.empty()) {
            int v = h.pop();
            if (value_[v] == 0) return v;
        }
        return -1;
    }

    bool satisfied_by_phases(const std::vector<std::unique_ptr<Clause>>& cs) const {
        for (const auto& c : cs) {
            bool sat = false;
            for (Lit l : c->lits) {
                std::int8_t v = value(l);
                if (v > 0 || (v == 0 && (phase_[var_of(l)] != 0) != is_neg(l))) {
                    sat = true;
                    break;
                }
            }
            if (!sat) return false;
        }
        return true;
    }

    /// Once every atom is assigned, the remaining auxiliary variables are
    /// usually free counters. Assigns them all by phase in one level when
    /// that satisfies every clause.
    bool complete_by_phases() {
        if (completion_blocked_ >= 0) return false;
        if (!satisfied_by_phases(clauses_) || !satisfied_by_phases(learnts_)) {
            completion_blocked_ = decision_level();
            return false;
        }
        new_level();
        for (int v = 0; v < static_cast<int>(value_.size()); ++v)
            if (value_[v] == 0) enqueue(mk_lit(v, !phase_[v]), nullptr);
        qhead_ = trail_.size();
        return true;
    }

    void cancel_until(int level) {
        if (decision_level() <= level) return;
        for (std::size_t i = trail_.size(); i-- > trail_lim_[level];) {
            int v = var_of(trail_[i]);
            phase_[v] = value_[v] > 0;
            value_[v] = 0;
            reason_[v] = nullptr;
            heap_of(v).insert(v);
        }
        if (completion_blocked_ > level) completion_blocked_ = -1;
        trail_.resize(trail_lim_[level]);
        trail_lim_.resize(level);
        qhead_ = trail_.size();
    }

    void attach(Clause* c) {
        watches_[c->lits[0]].push_back({c, c->lits[1]});
        watches_[c->lits[1]].push_back({c, c->lits[0]});
    }

    void rebuild_watches() {
        for (auto& w : watches_) w.clear();
        for (auto& c : clauses_) attach(c.get());
        for (auto& c : learnts_) attach(c.get());
    }

    /// Adds a clause at decision level 0.
    void add_clause(std::vector<Lit> lits, bool learnt = false, bool keep = false) {
        if (!ok_) return;
        cancel_until(0);
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        std::vector<Lit> out;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (i + 1 < lits.size() && lits[i + 1] == negate(lits[i])) return;  // tautology
            auto v = value(lits[i]);
            if (v > 0) return;
            if (v == 0) out.push_back(lits[i]);
        }
        if (out.empty()) {
            ok_ = false;
            return;
        }
        if (out.size() == 1) {
            enqueue(out[0], nullptr);
            if (propagate()) ok_ = false;
            return;
        }
        auto c = std::make_unique<Clause>();
        c->lits = std::move(out);
        c->learnt = learnt;
        c->keep = keep;
        c->id = next_clause_id_++;
        attach(c.get());
        (learnt ? learnts_ : clauses_).push_back(std::move(c));
    }

    Clause* propagate() {
        Clause* conflict = nullptr;
        while (qhead_ < trail_.size()) {
            Lit p = trail_[qhead_++];
            Lit falsified = negate(p);
            auto& ws = watches_[falsified];
            std::size_t i = 0, j = 0, n = ws.size();
            stats_.propagations++;
            while (i < n) {
                Watcher w = ws[i++];
                if (value(w.blocker) > 0) {
                    ws[j++] = w;
                    continue;
                }
                Clause& c = *w.clause;
                if (c.lits[0] == falsified) std::swap(c.lits[0], c.lits[1]);
                Lit first = c.lits[0];
                if (first != w.blocker && value(first) > 0) {
                    ws[j++] = {w.clause, first};
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.lits.size(); ++k) {
                    if (value(c.lits[k]) >= 0) {
                        std::swap(c.lits[1], c.lits[k]);
                        watches_[c.lits[1]].push_back({w.clause, first});
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[j++] = {w.clause, first};
                if (value(first) < 0) {
                    conflict = w.clause;
                    qhead_ = trail_.size();
                    while (i < n) ws[j++] = ws[i++];
                } else {
                    enqueue(first, w.clause);
                }
            }
            ws.resize(j);
            if (conflict) break;
        }
        return conflict;
    }

    // -------------------------------------------------------------- learning

    void bump_var(int v) {
        if ((activity_[v] += var_inc_) > 1e100) {
            for (auto& a : activity_) a *= 1e-100;
            var_inc_ *= 1e-100;
        }
        heap_of(v).increased(v);
    }

    void bump_clause(Clause* c) {
        if ((c->activity += cla_inc_) > 1e20) {
            for (auto& l : learnts_) l->activity *= 1e-20;
            cla_inc_ *= 1e-20;
        }
    }

    std::pair<std::vector<Lit>, int> analyze(Clause* conflict) {
        std::vector<Lit> learnt{0};
        int path = 0;
        Lit p = 0;
        bool have_p = false;
        std::size_t idx = trail_.size();
        Clause* c = conflict;
        do {
            if (c->learnt) bump_clause(c);
            for (std::size_t k = have_p ? 1 : 0; k < c->lits.size(); ++k) {
                Lit q = c->lits[k];
                int v = var_of(q);
                if (seen_[v] || level_[v] == 0) continue;
                seen_[v] = 1;
                bump_var(v);
                if (level_[v] >= decision_level())
                    path++;
                else
                    learnt.push_back(q);
            }
            while (!seen_[var_of(trail_[--idx])]) {}
            p = trail_[idx];
            have_p = true;
            c = reason_[var_of(p)];
            seen_[var_of(p)] = 0;
            path--;
        } while (path > 0);
        learnt[0] = negate(p);

        // local minimization: drop literals implied by other literals of the clause
        std::vector<Lit> kept{learnt[0]};
        for (std::size_t k = 1; k < learnt.size(); ++k) {
            Clause* r = reason_[var_of(learnt[k])];
            bool redundant = r != nullptr;
            if (r)
                for (std::size_t m = 1; m < r->lits.size(); ++m) {
                    int v = var_of(r->lits[m]);
                    if (!seen_[v] && level_[v] > 0) {
                        redundant = false;
                        break;
                    }
                }
            if (!redundant) kept.push_back(learnt[k]);
        }
        for (Lit l : learnt) seen_[var_of(l)] = 0;
        learnt = std::move(kept);

        int bt = 0;
        if (learnt.size() > 1) {
            std::size_t max_i = 1;
            for (std::size_t k = 2; k < learnt.size(); ++k)
                if (level_[var_of(learnt[k])] > level_[var_of(learnt[max_i])]) max_i = k;
            std::swap(learnt[1], learnt[max_i]);
            bt = level_[var_of(learnt[1])];
        }
        return {std::move(learnt), bt};
    }

    bool locked(const Clause* c) const {
        return value(c->lits[0]) > 0 && reason_[var_of(c->lits[0])] == c;
    }

    void reduce_db() {
        std::vector<Clause*> order;
        for (auto& c : learnts_)
            if (!c->keep && c->lits.size() > 2 && !locked(c.get())) order.push_back(c.get());
        std::sort(order.begin(), order.end(), [](const Clause* a, const Clause* b) {
            return a->activity < b->activity || (a->activity == b->activity && a->id < b->id);
        });
        std::unordered_set<const Clause*> drop(order.begin(), order.begin() + order.size() / 2);
        if (drop.empty()) return;
        for (auto& ws : watches_)
            std::erase_if(ws, [&](const Watcher& w) { return drop.count(w.clause) > 0; });
        std::erase_if(learnts_, [&](const std::unique_ptr<Clause>& c) { return drop.count(c.get()) > 0; });
    }

    /// Level-0 cleanup: deletes satisfied clauses, strips false literals from
    /// problem clauses and drops learned clauses over fixed variables.
    void simplify() {
        if (!ok_ || trail_.size() == simplified_trail_) return;
        // a full pass costs a scan of every clause; wait for enough new facts
        if ((trail_.size() - simplified_trail_) * 20 < value_.size()) return;
        cancel_until(0);
        for (Lit l : trail_) reason_[var_of(l)] = nullptr;
        std::vector<Lit> units;
        std::erase_if(clauses_, [&](std::unique_ptr<Clause>& c) {
            bool sat = false;
            std::erase_if(c->lits, [&](Lit l) {
                auto v = value(l);
                if (v > 0) sat = true;
                return v < 0;
            });
            if (sat) return true;
            if (c->lits.size() < 2) {
                if (c->lits.empty()) ok_ = false;
                else units.push_back(c->lits[0]);
                return true;
            }
            return false;
        });
        std::erase_if(learnts_, [&](const std::unique_ptr<Clause>& c) {
            return std::any_of(c->lits.begin(), c->lits.end(), [&](Lit l) { return value(l) != 0; });
        });
        rebuild_watches();
        for (Lit u : units) add_clause({u});
        simplified_trail_ = trail_.size();
    }

    // ------------------------------------------------------------- encoding

    Lit lit_of(const GroundLiteral& l) { return mk_lit(atom_var(l.atom), l.negative); }

    /// A literal equivalent to the conjunction of `lits`.
    Lit conjunction(std::vector<Lit> lits) {
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        std::erase(lits, kTrue);
        for (std::size_t i = 0; i + 1 < lits.size(); ++i)
            if (lits[i + 1] == negate(lits[i])) return kFalse;
        if (std::find(lits.begin(), lits.end(), kFalse) != lits.end()) return kFalse;
        if (lits.empty()) return kTrue;
        if (lits.size() == 1) return lits[0];
        auto it = bodies_.find(lits);
        if (it != bodies_.end()) return it->second;
        Lit b = mk_lit(new_var(-1), false);
        bodies_.emplace(lits, b);
        std::vector<Lit> back{b};
        for (Lit l : lits) {
            add_clause({negate(b), l});
            back.push_back(negate(l));
        }
        add_clause(back);
        return b;
    }

    Lit disjunction(const std::vector<Lit>& lits) {
        if (lits.size() == 1) return lits[0];
        Lit x = mk_lit(new_var(-1), false);
        std::vector<Lit> forward{negate(x)};
        for (Lit l : lits) {
            add_clause({negate(l), x});
            forward.push_back(l);
        }
        add_clause(forward);
        return x;
    }

    /// Sequential counter: if `guard` holds, at most k of `xs` are true.
    void at_most(const std::vector<Lit>& xs, std::int64_t k, Lit guard) {
        std::size_t n = xs.size();
        if (k < 0) {
            add_clause({negate(guard)});
            return;
        }
        if (static_cast<std::size_t>(k) >= n) return;
        if (k == 0) {
            for (Lit x : xs) add_clause({negate(guard), negate(x)});
            return;
        }
        std::size_t kk = static_cast<std::size_t>(k);
        std::vector<std::vector<Lit>> s(n - 1, std::vector<Lit>(kk));
        for (auto& row : s)
            for (auto& l : row) l = mk_lit(new_var(-1), false);
        add_clause({negate(xs[0]), s[0][0]});
        for (std::size_t j = 1; j < kk; ++j) add_clause({negate(s[0][j])});
        for (std::size_t i = 1; i + 1 < n; ++i) {
            add_clause({negate(xs[i]), s[i][0]});
            add_clause({negate(s[i - 1][0]), s[i][0]});
            for (std::size_t j = 1; j < kk; ++j) {
                add_clause({negate(xs[i]), negate(s[i - 1][j - 1]), s[i][j]});
                add_clause({negate(s[i - 1][j]), s[i][j]});
            }
            add_clause({negate(guard), negate(xs[i]), negate(s[i - 1][kk - 1])});
        }
        add_clause({negate(guard), negate(xs[n - 1]), negate(s[n - 2][kk - 1])});
    }

    void add_rules(const std::vector<GroundRule>& rules, std::optional<AtomId> guard) {
        std::vector<int> heads;
        std::unordered_map<int, std::vector<Support>> sup;
        auto define = [&](int v) {
            if (defined_[v]) throw SolverError("atom defined by more than one slice: id " + std::to_string(var_atom_[v]));
            if (sup.try_emplace(v).second) heads.push_back(v);
        };
        for (const auto& r : rules) {
            if (r.kind == GroundRuleKind::Normal) define(atom_var(r.head));
            for (const auto& e : r.elements) define(atom_var(e.atom));
        }

        for (const auto& r : rules) {
            std::vector<Lit> body;
            std::vector<int> pos;
            for (const auto& l : r.body) {
                body.push_back(lit_of(l));
                if (!l.negative) pos.push_back(atom_var(l.atom));
            }
            if (guard) body.push_back(mk_lit(atom_var(*guard), false));

            if (r.kind == GroundRuleKind::Constraint) {
                std::vector<Lit> c;
                for (Lit l : body) c.push_back(negate(l));
                add_clause(c);
                continue;
            }
            if (r.kind == GroundRuleKind::Normal) {
                int h = atom_var(r.head);
                std::vector<Lit> c{mk_lit(h, false)};
                for (Lit l : body) c.push_back(negate(l));
                add_clause(c);
                sup[h].push_back({conjunction(body), pos});
                continue;
            }

            // choice rule
            std::vector<int> order;  // element atoms, first occurrence order
            std::unordered_map<int, std::vector<Lit>> counted;
            for (const auto& e : r.elements) {
                int h = atom_var(e.atom);
                std::vector<Lit> lits = body;
                std::vector<int> p = pos;
                std::vector<Lit> cond;
                for (const auto& l : e.condition) {
                    cond.push_back(lit_of(l));
                    if (!l.negative) p.push_back(atom_var(l.atom));
                }
                lits.insert(lits.end(), cond.begin(), cond.end());
                sup[h].push_back({conjunction(lits), p});
                if (r.lower || r.upper) {
                    cond.push_back(mk_lit(h, false));
                    if (!counted.count(h)) order.push_back(h);
                    counted[h].push_back(conjunction(cond));
                }
            }
            if (r.lower || r.upper) {
                Lit b = conjunction(body);
                std::vector<Lit> xs;
                for (int h : order) xs.push_back(disjunction(counted[h]));
                std::int64_t n = static_cast<std::int64_t>(xs.size());
                if (r.lower && *r.lower > 0) {
                    if (*r.lower > n) {
                        add_clause({negate(b)});
                    } else if (*r.lower == 1) {
                        std::vector<Lit> c{negate(b)};
                        c.insert(c.end(), xs.begin(), xs.end());
                        add_clause(c);
                    } else {
                        std::vector<Lit> neg;
                        for (Lit x : xs) neg.push_back(negate(x));
                        at_most(neg, n - *r.lower, b);
                    }
                }
                if (r.upper) at_most(xs, *r.upper, b);
            }
        }

        // completion
        for (int h : heads) {
            std::vector<Lit> c{mk_lit(h, true)};
            for (const auto& s : sup[h]) c.push_back(s.lit);
            add_clause(c);
            defined_[h] = 1;
        }
        components(heads, sup);
    }

    /// Tarjan over the positive dependencies among the new heads.
    void components(const std::vector<int>& heads, std::unordered_map<int, std::vector<Support>>& sup) {
        std::unordered_map<int, int> index, low;
        std::unordered_set<int> on_stack;
        std::vector<int> stack;
        int counter = 0;
        auto succ = [&](int v) {
            std::vector<int> out;
            for (const auto& s : sup[v])
                for (int p : s.pos)
                    if (sup.count(p)) out.push_back(p);
            return out;
        };
        for (int root : heads) {
            if (index.count(root)) continue;
            std::vector<std::pair<int, std::vector<int>>> call;
            std::vector<std::size_t> next;
            index[root] = low[root] = counter++;
            stack.push_back(root);
            on_stack.insert(root);
            call.push_back({root, succ(root)});
            next.push_back(0);
            while (!call.empty()) {
                int v = call.back().first;
                auto& ss = call.back().second;
                if (next.back() < ss.size()) {
                    int w = ss[next.back()++];
                    if (!index.count(w)) {
                        index[w] = low[w] = counter++;
                        stack.push_back(w);
                        on_stack.insert(w);
                        call.push_back({w, succ(w)});
                        next.push_back(0);
                    } else if (on_stack.count(w)) {
                        low[v] = std::min(low[v], index[w]);
                    }
                    continue;
                }
                if (low[v] == index[v]) {
                    std::vector<int> comp;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack.erase(w);
                        comp.push_back(w);
                    } while (w != v);
                    bool cyclic = comp.size() > 1;
                    if (!cyclic)
                        for (const auto& s : sup[v])
                            if (std::find(s.pos.begin(), s.pos.end(), v) != s.pos.end()) cyclic = true;
                    if (cyclic) register_component(std::move(comp), sup);
                }
                call.pop_back();
                next.pop_back();
                if (!call.empty()) {
                    int u = call.back().first;
                    low[u] = std::min(low[u], low[v]);
                }
            }
        }
    }

    void register_component(std::vector<int> comp, std::unordered_map<int, std::vector<Support>>& sup) {
        int id = static_cast<int>(sccs_.size());
        std::sort(comp.begin(), comp.end());
        for (int v : comp) scc_of_[v] = id;
        for (int v : comp) {
            auto& list = supports_[v];
            for (auto& s : sup[v]) {
                Support t{s.lit, {}};
                for (int p : s.pos)
                    if (scc_of_[p] == id) t.pos.push_back(p);
                list.push_back(std::move(t));
            }
        }
        sccs_.push_back(std::move(comp));
    }

    /// Returns a violated loop nogood, or an empty vector if the assignment is founded.
    std::vector<Lit> unfounded() {
        for (const auto& comp : sccs_) {
            if (std::none_of(comp.begin(), comp.end(), [&](int v) { return value_[v] > 0; })) continue;
            ++stamp_id_;
            bool changed = true;
            while (changed) {
                changed = false;
                for (int v : comp) {
                    if (value_[v] <= 0 || stamp_[v] == stamp_id_) continue;
                    for (const auto& s : supports_[v]) {
                        if (value(s.lit) <= 0) continue;
                        if (std::all_of(s.pos.begin(), s.pos.end(), [&](int p) { return stamp_[p] == stamp_id_; })) {
                            stamp_[v] = stamp_id_;
                            changed = true;
                            break;
                        }
                    }
                }
            }
            std::vector<int> u;
            for (int v : comp)
                if (value_[v] > 0 && stamp_[v] != stamp_id_) u.push_back(v);
            if (u.empty()) continue;
            std::unordered_set<int> in_u(u.begin(), u.end());
            std::vector<Lit> clause{mk_lit(u[0], true)};
            for (int v : u)
                for (const auto& s : supports_[v])
                    if (std::none_of(s.pos.begin(), s.pos.end(), [&](int p) { return in_u.count(p) > 0; }))
                        clause.push_back(s.lit);
            return clause;
        }
        return {};
    }

    // ---------------------------------------------------------------- search

    enum class Status { Sat, Unsat };

    Status search(const std::vector<Lit>& assumptions) {
        std::uint64_t restart_conflicts = 0;
        int restart_round = 0;
        double restart_limit = 100 * luby(2, restart_round);
        while (true) {
            if (!ok_) return Status::Unsat;
            if (decision_level() == 0) {
                if (propagate()) {
                    ok_ = false;
                    return Status::Unsat;
                }
                new_level();
                for (Lit a : assumptions) {
                    auto v = value(a);
                    if (v < 0) return Status::Unsat;
                    if (v == 0) enqueue(a, nullptr);
                }
            }
            Clause* conflict = propagate();
            if (conflict) {
                stats_.conflicts++;
                restart_conflicts++;
                if (decision_level() <= 1) return Status::Unsat;
                auto [learnt, bt] = analyze(conflict);
                cancel_until(bt);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], nullptr);
                } else {
                    auto c = std::make_unique<Clause>();
                    c->lits = std::move(learnt);
                    c->learnt = true;
                    c->id = next_clause_id_++;
                    attach(c.get());
                    bump_clause(c.get());
                    enqueue(c->lits[0], c.get());
                    learnts_.push_back(std::move(c));
                }
                var_inc_ /= 0.95;
                cla_inc_ /= 0.999;
                if (restart_conflicts >= restart_limit) {
                    restart_conflicts = 0;
                    restart_limit = 100 * luby(2, ++restart_round);
                    stats_.restarts++;
                    cancel_until(0);
                }
                if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= max_learnts_) {
                    reduce_db();
                    max_learnts_ *= 1.1;
                }
                continue;
            }
            int next = pop_unassigned(heap_);
            if (next < 0 && !complete_by_phases()) next = pop_unassigned(aux_heap_);
            if (next < 0) {
                auto loop = unfounded();
                if (loop.empty()) return Status::Sat;
                stats_.loop_nogoods++;
                add_clause(std::move(loop), true, true);
                continue;
            }
            stats_.choices++;
            new_level();
            enqueue(mk_lit(next, !phase_[next]), nullptr);
        }
    }

    std::vector<Model> solve(const std::vector<std::pair<AtomId, bool>>& assumptions, std::size_t max_models) {
        auto start = std::chrono::steady_clock::now();
        stats_ = {};
        std::vector<Model> models;
        cancel_until(0);
        if (!reuse_ && !learnts_.empty()) {
            learnts_.clear();
            rebuild_watches();
        }
        simplify();
        max_learnts_ = std::max(5000.0, static_cast<double>(clauses_.size()) / 3);

        std::vector<Lit> assume;
        std::unordered_set<int> given;
        for (auto [a, v] : assumptions) {
            int x = atom_var(a);
            given.insert(x);
            assume.push_back(mk_lit(x, !v));
        }
        std::erase_if(undefined_, [&](int v) { return defined_[v] || (value_[v] < 0 && level_[v] == 0); });
        for (int v : undefined_)
            if (!given.count(v)) assume.push_back(mk_lit(v, true));

        int block = -1;
        while (ok_ && (max_models == 0 || models.size() < max_models)) {
            if (search(assume) != Status::Sat) break;
            Model m;
            for (int v = 0; v < static_cast<int>(value_.size()); ++v)
                if (var_atom_[v] >= 0 && value_[v] > 0) m.atoms.push_back(static_cast<AtomId>(var_atom_[v]));
            std::sort(m.atoms.begin(), m.atoms.end());
            models.push_back(std::move(m));
            if (max_models != 0 && models.size() >= max_models) break;
            std::vector<Lit> blocking;
            for (int v = 1; v < static_cast<int>(value_.size()); ++v)
                if (var_atom_[v] >= 0 && level_[v] > 0 && value_[v] != 0) blocking.push_back(mk_lit(v, value_[v] > 0));
            cancel_until(0);
            if (block < 0) {
                block = new_var(-1);
                assume.push_back(mk_lit(block, false));
            }
            blocking.push_back(mk_lit(block, true));
            add_clause(std::move(blocking), true, true);
        }
        cancel_until(0);
        if (block >= 0 && ok_) add_clause({mk_lit(block, true)});
        stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return models;
    }
};

Solver::Solver() : impl_(std::make_unique<Impl>()) {}
Solver::~Solver() = default;

void Solver::set_reuse_learned(bool reuse) { impl_->reuse_ = reuse; }

void Solver::add_rules(const std::vector<GroundRule>& rules, std::optional<AtomId> guard) {
    impl_->cancel_until(0);
    impl_->add_rules(rules, guard);
}

void Solver::fix(AtomId atom, bool value) {
    int v = impl_->atom_var(atom);
    impl_->add_clause({mk_lit(v, !value)});
}

bool Solver::is_defined(AtomId atom) const {
    auto it = impl_->atom_var_.find(atom);
    return it != impl_->atom_var_.end() && impl_->defined_[it->second];
}

std::vector<Model> Solver::solve(const std::vector<std::pair<AtomId, bool>>& assumptions, std::size_t max_models) {
    return impl_->solve(assumptions, max_models);
}

const SolveStats& Solver::last_stats() const { return impl_->stats_; }
std::size_t Solver::num_clauses() const { return impl_->clauses_.size(); }
std::size_t Solver::num_learned() const { return impl_->learnts_.size(); }

std::vector<std::vector<GroundLiteral>> Solver::learned_atom_clauses() const {
    std::vector<std::vector<GroundLiteral>> out;
    for (const auto& c : impl_->learnts_) {
        std::vector<GroundLiteral> lits;
        bool atoms_only = true;
        for (Lit l : c->lits) {
            auto a = impl_->var_atom_[var_of(l)];
            if (a < 0) {
                atoms_only = false;
                break;
            }
            lits.push_back({static_cast<AtomId>(a), is_neg(l)});
        }
        if (atoms_only) out.push_back(std::move(lits));
    }
    return out;
}

std::string Solver::dimacs(const AtomTable& table) const {
    std::ostringstream out;
    const auto& s = *impl_;
    for (std::size_t v = 0; v < s.var_atom_.size(); ++v)
        if (s.var_atom_[v] >= 0) out << "c " << v + 1 << " " << table.text(static_cast<AtomId>(s.var_atom_[v])) << "\n";
    std::vector<std::vector<Lit>> all;
    for (std::size_t i = 0; i < s.trail_.size() && (s.trail_lim_.empty() || i < s.trail_lim_[0]); ++i)
        all.push_back({s.trail_[i]});
    for (const auto& c : s.clauses_) all.push_back(c->lits);
    out << "p cnf " << s.value_.size() << " " << all.size() << "\n";
    for (const auto& c : all) {
        for (Lit l : c) out << (is_neg(l) ? "-" : "") << var_of(l) + 1 << " ";
        out << "0\n";
    }
    return out.str();
}

// --------------------------------------------------------------------------
// one-shot interface and oracles

std::vector<Model> solve(const GroundProgram& gp, std::size_t max_models, SolveStats* stats) {
    Solver s;
    s.add_rules(gp.rules);
    auto models = s.solve(gp.assumptions, max_models);
    if (stats) *stats = s.last_stats();
    return models;
}

namespace {

class Truth {
public:
    Truth(const GroundProgram& gp, const Model& m) {
        std::size_t n = gp.table ? gp.table->size() : 0;
        for (AtomId a : gp.universe) n = std::max<std::size_t>(n, a + 1);
        for (AtomId a : m.atoms) n = std::max<std::size_t>(n, a + 1);
        in_.assign(n, 0);
        for (AtomId a : m.atoms) in_[a] = 1;
    }
    bool operator()(AtomId a) const { return a < in_.size() && in_[a]; }
    bool holds(const GroundLiteral& l) const { return (*this)(l.atom) != l.negative; }
    bool holds(const std::vector<GroundLiteral>& lits) const {
        return std::all_of(lits.begin(), lits.end(), [&](const GroundLiteral& l) { return holds(l); });
    }

private:
    std::vector<char> in_;
};

}  // namespace

bool is_stable(const GroundProgram& gp, const Model& candidate) {
    Truth m(gp, candidate);
    std::unordered_set<AtomId> fixed;
    for (auto [a, v] : gp.assumptions) {
        if (m(a) != v) return false;
        if (v) fixed.insert(a);
    }
    // the candidate is a model
    for (const auto& r : gp.rules) {
        if (!m.holds(r.body)) continue;
        switch (r.kind) {
            case GroundRuleKind::Constraint: return false;
            case GroundRuleKind::Normal:
                if (!m(r.head)) return false;
                break;
            case GroundRuleKind::Choice: {
                std::set<AtomId> chosen;
                for (const auto& e : r.elements)
                    if (m(e.atom) && m.holds(e.condition)) chosen.insert(e.atom);
                auto count = static_cast<std::int64_t>(chosen.size());
                if (r.lower && count < *r.lower) return false;
                if (r.upper && count > *r.upper) return false;
                break;
            }
        }
    }
    // every true atom is derivable from the reduct
    std::unordered_set<AtomId> founded(fixed.begin(), fixed.end());
    auto reduct_body = [&](const std::vector<GroundLiteral>& lits) {
        for (const auto& l : lits) {
            if (l.negative) {
                if (m(l.atom)) return false;
            } else if (!founded.count(l.atom)) {
                return false;
            }
        }
        return true;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : gp.rules) {
            if (r.kind == GroundRuleKind::Constraint || !reduct_body(r.body)) continue;
            if (r.kind == GroundRuleKind::Normal) {
                if (founded.insert(r.head).second) changed = true;
                continue;
            }
            for (const auto& e : r.elements)
                if (m(e.atom) && reduct_body(e.condition) && founded.insert(e.atom).second) changed = true;
        }
    }
    return std::all_of(candidate.atoms.begin(), candidate.atoms.end(), [&](AtomId a) { return founded.count(a) > 0; });
}

std::vector<Model> brute_force(const GroundProgram& gp) {
    GroundProgram p = gp;
    if (p.universe.empty()) p.collect_universe();
    std::map<AtomId, bool> fixed;
    for (auto [a, v] : p.assumptions) fixed[a] = v;
    std::vector<AtomId> free;
    for (AtomId a : p.universe)
        if (!fixed.count(a)) free.push_back(a);
    if (free.size() > 24) throw SolverError("brute_force refuses universes with more than 24 free atoms");
    std::vector<Model> out;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << free.size()); ++bits) {
        Model m;
        for (std::size_t i = 0; i < free.size(); ++i)
            if (bits >> i & 1) m.atoms.push_back(free[i]);
        for (auto [a, v] : fixed)
            if (v) m.atoms.push_back(a);
        std::sort(m.atoms.begin(), m.atoms.end());
        if (is_stable(p, m)) out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<LearnedConstraint> learn_retain(const GroundProgram& prev, const GroundProgram& next,
                                            const std::vector<LearnedConstraint>& learned) {
    std::unordered_set<AtomId> persist;
    std::unordered_set<AtomId> before(prev.universe.begin(), prev.universe.end());
    for (AtomId a : next.universe)
        if (before.empty() || before.count(a)) persist.insert(a);
    std::vector<LearnedConstraint> out;
    for (const auto& c : learned)
        if (std::all_of(c.begin(), c.end(), [&](const GroundLiteral& l) { return persist.count(l.atom) > 0; }))
            out.push_back(c);
    return out;
}

}  // namespace streamlp
