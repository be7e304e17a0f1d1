#pragma once

#include <random>
#include <set>

#include "streamlp/ground.hpp"
#include "streamlp/value.hpp"

namespace streamlp::testing {

/// Random program over at most 12 atoms and 20 rules.
inline GroundProgram random_program(std::mt19937_64& rng, AtomTable& table) {
    auto pick = [&](std::uint64_t n) { return static_cast<std::uint64_t>(rng() % n); };
    int n_atoms = 1 + static_cast<int>(pick(12));
    std::vector<AtomId> atoms;
    for (int i = 0; i < n_atoms; ++i) atoms.push_back(table.intern(GroundAtom{intern("p"), {Value::integer(i)}}));
    auto lits = [&](int max_len) {
        std::vector<GroundLiteral> out;
        int len = static_cast<int>(pick(static_cast<std::uint64_t>(max_len) + 1));
        for (int i = 0; i < len; ++i) out.push_back({atoms[pick(atoms.size())], pick(3) == 0});
        return out;
    };
    GroundProgram gp;
    gp.table = &table;
    int n_rules = 1 + static_cast<int>(pick(20));
    for (int i = 0; i < n_rules; ++i) {
        GroundRule r;
        auto kind = pick(10);
        if (kind < 5) {
            r.kind = GroundRuleKind::Normal;
            r.head = atoms[pick(atoms.size())];
            r.body = lits(3);
        } else if (kind < 8) {
            r.kind = GroundRuleKind::Choice;
            std::set<AtomId> used;
            int k = 1 + static_cast<int>(pick(3));
            for (int j = 0; j < k; ++j) {
                AtomId a = atoms[pick(atoms.size())];
                if (!used.insert(a).second) continue;
                r.elements.push_back({a, pick(3) == 0 ? lits(1) : std::vector<GroundLiteral>{}});
            }
            if (pick(3) == 0) r.lower = static_cast<std::int64_t>(pick(3));
            if (pick(3) == 0) r.upper = static_cast<std::int64_t>(pick(3));
            r.body = lits(2);
        } else {
            r.kind = GroundRuleKind::Constraint;
            r.body = lits(3);
            if (r.body.empty()) r.body.push_back({atoms[pick(atoms.size())], false});
        }
        gp.rules.push_back(std::move(r));
    }
    gp.collect_universe();
    if (pick(4) == 0 && !gp.universe.empty()) {
        // an input atom fixed by assumption must not have rules; use a fresh one
        AtomId in = table.intern(GroundAtom{intern("in"), {}});
        gp.rules.push_back(GroundRule{GroundRuleKind::Normal, atoms[0], {}, {}, {}, {{in, false}}});
        gp.assumptions.push_back({in, pick(2) == 0});
        gp.collect_universe();
    }
    return gp;
}

}  // namespace streamlp::testing
