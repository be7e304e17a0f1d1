#include "streamlp/ground.hpp"

#include <algorithm>
#include <sstream>

namespace streamlp {

std::string to_string(const GroundAtom& a) {
    if (a.args.empty()) return *a.name;
    std::string s = *a.name + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(a.args[i]);
    }
    return s + ")";
}

AtomId AtomTable::intern(const GroundAtom& atom) {
    auto [it, inserted] = index_.try_emplace(atom, static_cast<AtomId>(atoms_.size()));
    if (inserted) atoms_.push_back(atom);
    return it->second;
}

std::optional<AtomId> AtomTable::find(const GroundAtom& atom) const {
    auto it = index_.find(atom);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& AtomTable::text(AtomId id) const {
    if (text_.size() < atoms_.size()) text_.resize(atoms_.size());
    if (text_[id].empty()) text_[id] = to_string(atoms_[id]);
    return text_[id];
}

std::size_t GroundRuleHash::operator()(const GroundRule& r) const noexcept {
    std::size_t h = static_cast<std::size_t>(r.kind);
    hash_combine(h, r.head);
    for (const auto& e : r.elements) {
        hash_combine(h, e.atom);
        for (const auto& l : e.condition) hash_combine(h, l.atom * 2 + l.negative);
    }
    hash_combine(h, r.lower ? static_cast<std::size_t>(*r.lower) : 0x5bd1e995);
    hash_combine(h, r.upper ? static_cast<std::size_t>(*r.upper) : 0x1b873593);
    for (const auto& l : r.body) hash_combine(h, l.atom * 2 + l.negative);
    return h;
}

namespace {

std::string lits_text(const std::vector<GroundLiteral>& lits, const AtomTable& atoms) {
    std::string s;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (i) s += ", ";
        if (lits[i].negative) s += "not ";
        s += atoms.text(lits[i].atom);
    }
    return s;
}

}  // namespace

std::string to_string(const GroundRule& r, const AtomTable& atoms) {
    std::string s;
    switch (r.kind) {
        case GroundRuleKind::Normal: s = atoms.text(r.head); break;
        case GroundRuleKind::Constraint: break;
        case GroundRuleKind::Choice:
            if (r.lower) s += std::to_string(*r.lower) + " ";
            s += "{ ";
            for (std::size_t i = 0; i < r.elements.size(); ++i) {
                if (i) s += "; ";
                s += atoms.text(r.elements[i].atom);
                if (!r.elements[i].condition.empty()) s += " : " + lits_text(r.elements[i].condition, atoms);
            }
            s += " }";
            if (r.upper) s += " " + std::to_string(*r.upper);
            break;
    }
    if (!r.body.empty() || r.kind == GroundRuleKind::Constraint) s += (s.empty() ? ":- " : " :- ") + lits_text(r.body, atoms);
    return s + ".";
}

void GroundProgram::collect_universe() {
    std::vector<AtomId> ids;
    for (const auto& r : rules) {
        if (r.kind == GroundRuleKind::Normal) ids.push_back(r.head);
        for (const auto& e : r.elements) {
            ids.push_back(e.atom);
            for (const auto& l : e.condition) ids.push_back(l.atom);
        }
        for (const auto& l : r.body) ids.push_back(l.atom);
    }
    for (const auto& [a, v] : assumptions) ids.push_back(a);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    universe = std::move(ids);
}

std::string dump(const GroundProgram& gp, bool show_hidden) {
    std::ostringstream out;
    for (const auto& r : gp.rules) {
        if (show_hidden) {
            out << to_string(r, *gp.table) << "\n";
            continue;
        }
        GroundRule shown = r;
        std::erase_if(shown.body, [&](const GroundLiteral& l) { return gp.table->hidden(l.atom); });
        out << to_string(shown, *gp.table) << "\n";
    }
    return out.str();
}

}  // namespace streamlp
