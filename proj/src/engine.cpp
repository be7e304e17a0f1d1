#include "streamlp/engine.hpp"

#include <algorithm>

namespace streamlp {

struct Engine::Pending {
    std::int64_t step = 0;
    std::size_t domain_checkpoint = 0;
    std::uint64_t next_assumption = 0;
    std::vector<AtomId> ext_added, def_added, facts_added;
    std::vector<std::pair<AtomId, std::int64_t>> ext_removed;
    std::vector<SliceRecord> slices;
};

namespace {

std::vector<PartGrounder> grounders(const Program& p, PartKind kind) {
    std::vector<PartGrounder> out;
    for (const auto& part : p.parts)
        if (part.kind == kind) out.emplace_back(part);
    return out;
}

ProgramPart online_part(const OnlineBlock& block) {
    ProgramPart part;
    part.kind = block.life ? PartKind::Volatile : PartKind::Cumulative;
    part.param = "t";
    if (block.life) part.life_span = Term::integer(*block.life);
    part.rules = block.rules;
    return part;
}

}  // namespace

Engine::Engine(const Program& program, const std::map<std::string, std::int64_t>& overrides, EngineOptions options)
    : program_(resolve_consts(program, overrides)),
      options_(options),
      table_(std::make_unique<AtomTable>()),
      ctx_(table_.get()),
      cumulative_(grounders(program_, PartKind::Cumulative)),
      volatile_(grounders(program_, PartKind::Volatile)) {
    solver_.set_reuse_learned(options.reuse_learned);
    iinit_ = program_.iinit_value();
    step_ = iinit_ - 1;
    Pending p;
    p.step = step_;
    p.domain_checkpoint = ctx_.domain.checkpoint();
    stage_slice(ground_base(program_, ctx_), false, p);
    commit(p);
}

Engine::~Engine() = default;

void Engine::stage_slice(GroundSlice slice, bool online, Pending& p) {
    SliceRecord rec;
    rec.online = online;
    for (AtomId h : slice.new_heads) {
        if (online_expired_.count(h))
            throw ModularityError("atom " + table_->text(h) + " was defined by expired online data and cannot be redefined");
        if (online) {
            auto it = ctx_.external.find(h);
            if (it == ctx_.external.end())
                throw StreamError("online atom " + table_->text(h) + " is not a declared input");
            rec.declared[h] = it->second;
        }
    }
    for (AtomId e : slice.new_externals) {
        if (ctx_.external.emplace(e, slice.birth_step).second) p.ext_added.push_back(e);
        ctx_.domain.add(e);
    }
    for (AtomId h : slice.new_heads) {
        if (auto it = ctx_.external.find(h); it != ctx_.external.end()) {
            p.ext_removed.push_back(*it);
            ctx_.external.erase(it);
        }
        if (ctx_.defined.emplace(h, slice.birth_step).second) p.def_added.push_back(h);
        ctx_.domain.add(h);
    }
    if (!slice.life_span)
        for (AtomId f : slice.new_facts)
            if (ctx_.facts.insert(f).second) p.facts_added.push_back(f);
    rec.slice = std::move(slice);
    p.slices.push_back(std::move(rec));
}

void Engine::stage_advance(std::int64_t target, Pending& p) {
    for (std::int64_t s = p.step + 1; s <= target; ++s) {
        for (const auto& g : cumulative_) stage_slice(g.ground(s, ctx_), false, p);
        for (const auto& g : volatile_) stage_slice(g.ground(s, ctx_), false, p);
        p.step = s;
    }
}

void Engine::undo(Pending& p) {
    for (AtomId f : p.facts_added) ctx_.facts.erase(f);
    for (AtomId h : p.def_added) ctx_.defined.erase(h);
    for (auto [a, s] : p.ext_removed) ctx_.external[a] = s;
    for (AtomId e : p.ext_added) ctx_.external.erase(e);
    ctx_.domain.rollback(p.domain_checkpoint);
    ctx_.next_assumption = p.next_assumption;
}

void Engine::commit(Pending& p) {
    for (auto& rec : p.slices) {
        solver_.add_rules(rec.slice.rules, rec.slice.assumption);
        if (rec.online)
            for (AtomId h : rec.slice.new_heads) online_active_[h] = slices_.size();
        slices_.push_back(std::move(rec));
    }
    step_ = p.step;
    expire();
}

void Engine::expire() {
    for (std::size_t i = 0; i < slices_.size(); ++i) {
        auto& rec = slices_[i];
        if (rec.expired || !rec.slice.life_span || rec.active_at(step_)) continue;
        if (rec.slice.birth_step > step_) continue;
        rec.expired = true;
        solver_.fix(*rec.slice.assumption, false);
        if (rec.online) {
            for (AtomId h : rec.slice.new_heads) {
                ctx_.defined.erase(h);
                ctx_.external[h] = rec.declared.at(h);
                online_active_.erase(h);
                online_expired_.insert(h);
            }
        }
        rec.slice.rules.clear();
        rec.slice.rules.shrink_to_fit();
    }
}

void Engine::advance_to(std::int64_t target) {
    if (target <= step_) return;
    Pending p;
    p.step = step_;
    p.domain_checkpoint = ctx_.domain.checkpoint();
    p.next_assumption = ctx_.next_assumption;
    try {
        stage_advance(target, p);
    } catch (...) {
        undo(p);
        throw;
    }
    commit(p);
}

void Engine::apply_event(const StreamEvent& event) {
    if (last_event_ && event.target_step <= *last_event_)
        throw StreamError("step " + std::to_string(event.target_step) + " is not greater than previous step " +
                          std::to_string(*last_event_));
    Pending p;
    p.step = step_;
    p.domain_checkpoint = ctx_.domain.checkpoint();
    p.next_assumption = ctx_.next_assumption;
    try {
        stage_advance(std::max(step_, event.target_step), p);
        for (const auto& block : event.blocks)
            stage_slice(PartGrounder(online_part(block)).ground(event.target_step, ctx_), true, p);
        if (event.forget_upto) {
            auto check = [&](const SliceRecord& rec) {
                if (!rec.online || !rec.slice.life_span || !rec.active_at(p.step) || rec.slice.birth_step > p.step) return;
                for (auto [h, declared] : rec.declared)
                    if (declared <= *event.forget_upto)
                        throw StreamError("cannot forget " + table_->text(h) + ": it is defined by active online data");
            };
            for (const auto& [h, idx] : online_active_) check(slices_[idx]);
            for (const auto& rec : p.slices) check(rec);
        }
    } catch (...) {
        undo(p);
        throw;
    }
    commit(p);
    last_event_ = event.target_step;
    if (event.forget_upto) {
        std::vector<AtomId> gone;
        for (const auto& [a, declared] : ctx_.external)
            if (declared <= *event.forget_upto) gone.push_back(a);
        std::sort(gone.begin(), gone.end());
        forget(gone);
    }
}

void Engine::forget(const std::vector<AtomId>& atoms) {
    if (atoms.empty()) return;
    for (AtomId a : atoms) {
        ctx_.external.erase(a);
        ctx_.forgotten.insert(a);
        solver_.fix(a, false);
    }
    std::unordered_set<AtomId> gone(atoms.begin(), atoms.end());
    auto positive_gone = [&](const std::vector<GroundLiteral>& lits) {
        return std::any_of(lits.begin(), lits.end(), [&](const GroundLiteral& l) { return !l.negative && gone.count(l.atom); });
    };
    auto strip = [&](std::vector<GroundLiteral>& lits) {
        std::erase_if(lits, [&](const GroundLiteral& l) { return l.negative && gone.count(l.atom); });
    };
    for (auto& rec : slices_) {
        if (rec.expired) continue;
        auto& rules = rec.slice.rules;
        std::erase_if(rules, [&](const GroundRule& r) { return positive_gone(r.body); });
        for (auto& r : rules) {
            strip(r.body);
            std::erase_if(r.elements, [&](const GroundChoiceElement& e) { return positive_gone(e.condition); });
            for (auto& e : r.elements) strip(e.condition);
        }
    }
}

QueryResult Engine::query(std::optional<std::int64_t> delta, std::size_t max_models) {
    std::int64_t base = last_event_.value_or(step_);
    std::int64_t limit = base + (delta ? *delta : options_.safety_cap);
    QueryResult r;
    while (true) {
        std::vector<std::pair<AtomId, bool>> assumptions;
        for (const auto& rec : slices_)
            if (!rec.expired && rec.slice.assumption) assumptions.push_back({*rec.slice.assumption, true});
        auto models = solver_.solve(assumptions, max_models);
        const auto& st = solver_.last_stats();
        r.stats.conflicts += st.conflicts;
        r.stats.choices += st.choices;
        r.stats.propagations += st.propagations;
        r.stats.restarts += st.restarts;
        r.stats.loop_nogoods += st.loop_nogoods;
        r.stats.seconds += st.seconds;
        r.attempts++;
        if (!models.empty()) {
            r.sat = true;
            r.models = std::move(models);
            break;
        }
        if (step_ >= limit) {
            r.cap_reached = !delta;
            break;
        }
        advance_to(step_ + 1);
    }
    r.step = step_;
    return r;
}

GroundProgram Engine::compose_active() const {
    GroundProgram gp;
    gp.table = table_.get();
    for (const auto& rec : slices_) {
        if (!rec.slice.assumption) {
            gp.rules.insert(gp.rules.end(), rec.slice.rules.begin(), rec.slice.rules.end());
            continue;
        }
        AtomId guard = *rec.slice.assumption;
        gp.assumptions.push_back({guard, !rec.expired});
        for (auto r : rec.slice.rules) {
            r.body.push_back({guard, false});
            gp.rules.push_back(std::move(r));
        }
    }
    gp.collect_universe();
    return gp;
}

std::size_t Engine::active_rule_count(bool include_online) const {
    std::size_t n = 0;
    for (const auto& rec : slices_)
        if (!rec.expired && (include_online || !rec.online)) n += rec.slice.rules.size();
    return n;
}

std::vector<std::string> Engine::visible(const Model& m) const {
    std::vector<std::string> out;
    for (AtomId a : m.atoms)
        if (!table_->hidden(a)) out.push_back(table_->text(a));
    std::sort(out.begin(), out.end());
    return out;
}

// --------------------------------------------------------------------------

QueryResult monolithic_query(const Program& resolved, const std::vector<StreamEvent>& events, std::int64_t start_step,
                             std::int64_t limit, std::size_t max_models, std::vector<std::vector<std::string>>* visible_models) {
    auto cumulative = grounders(resolved, PartKind::Cumulative);
    auto volatile_parts = grounders(resolved, PartKind::Volatile);
    std::int64_t iinit = resolved.iinit_value();
    QueryResult r;
    for (std::int64_t k = start_step;; ++k) {
        AtomTable table;
        GroundingContext ctx(&table);
        std::vector<GroundRule> rules;
        auto add = [&](GroundSlice slice) {
            commit_slice(slice, ctx);
            rules.insert(rules.end(), slice.rules.begin(), slice.rules.end());
        };
        add(ground_base(resolved, ctx));
        std::size_t next_event = 0;
        auto online_upto = [&](std::int64_t s) {
            for (; next_event < events.size() && events[next_event].target_step <= s; ++next_event) {
                const auto& ev = events[next_event];
                for (const auto& block : ev.blocks) {
                    if (block.life && ev.target_step + *block.life - 1 < k) continue;
                    add(PartGrounder(online_part(block)).ground(ev.target_step, ctx));
                }
            }
        };
        for (std::int64_t s = iinit; s <= k; ++s) {
            for (const auto& g : cumulative) add(g.ground(s, ctx));
            for (const auto& g : volatile_parts) {
                auto life = g.part().life();
                if (life && s + *life - 1 < k) continue;
                add(g.ground(s, ctx));
            }
            online_upto(s);
        }
        online_upto(k);

        GroundProgram gp;
        gp.table = &table;
        gp.rules = std::move(rules);
        SolveStats st;
        auto models = solve(gp, max_models, &st);
        r.stats.conflicts += st.conflicts;
        r.stats.choices += st.choices;
        r.stats.seconds += st.seconds;
        r.attempts++;
        r.step = k;
        if (!models.empty() || k >= limit) {
            r.sat = !models.empty();
            if (visible_models) {
                visible_models->clear();
                for (const auto& m : models) {
                    auto& out = visible_models->emplace_back();
                    for (AtomId a : m.atoms)
                        if (!table.hidden(a)) out.push_back(table.text(a));
                    std::sort(out.begin(), out.end());
                }
            }
            r.models.clear();
            return r;
        }
    }
}

}  // namespace streamlp
