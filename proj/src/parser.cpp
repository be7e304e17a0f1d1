#include "streamlp/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace streamlp {

namespace {

enum class Tok {
    Ident, Var, Number, Directive,
    LParen, RParen, LBrace, RBrace,
    Comma, Semi, Dot, DotDot, Colon, If,
    Plus, Minus, Star, Mod,
    Eq, Ne, Lt, Le, Gt, Ge,
    Not, End
};

struct Token {
    Tok kind;
    std::string text;
    std::int64_t number = 0;
    Location loc;
    std::size_t begin = 0, end = 0;  // byte offsets
};

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, line_start = 0;
    auto loc_at = [&](std::size_t pos) { return Location{line, pos - line_start + 1}; };
    auto push = [&](Tok k, std::size_t b, std::size_t e, std::string text = {}) {
        out.push_back(Token{k, std::move(text), 0, loc_at(b), b, e});
    };
    while (i < s.size()) {
        char c = s[i];
        if (c == '\n') {
            ++line;
            line_start = ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '%') {
            while (i < s.size() && s[i] != '\n') ++i;
            continue;
        }
        std::size_t b = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            Token t{Tok::Number, std::string(s.substr(b, i - b)), 0, loc_at(b), b, i};
            try {
                t.number = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                throw ParseError(t.loc, "integer literal out of range: " + t.text);
            }
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            std::string word(s.substr(b, i - b));
            if (word == "not") push(Tok::Not, b, i, word);
            else if (std::isupper(static_cast<unsigned char>(word[0])) || word[0] == '_') push(Tok::Var, b, i, word);
            else push(Tok::Ident, b, i, word);
            continue;
        }
        if (c == '#') {
            ++i;
            while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
            std::string word(s.substr(b + 1, i - b - 1));
            if (word.empty()) throw ParseError(loc_at(b), "expected directive name after '#'");
            push(word == "mod" ? Tok::Mod : Tok::Directive, b, i, word);
            continue;
        }
        auto two = [&](char next) { return i + 1 < s.size() && s[i + 1] == next; };
        switch (c) {
            case '(': push(Tok::LParen, b, ++i); break;
            case ')': push(Tok::RParen, b, ++i); break;
            case '{': push(Tok::LBrace, b, ++i); break;
            case '}': push(Tok::RBrace, b, ++i); break;
            case ',': push(Tok::Comma, b, ++i); break;
            case ';': push(Tok::Semi, b, ++i); break;
            case '+': push(Tok::Plus, b, ++i); break;
            case '-': push(Tok::Minus, b, ++i); break;
            case '*': push(Tok::Star, b, ++i); break;
            case '.':
                if (two('.')) push(Tok::DotDot, b, i += 2);
                else push(Tok::Dot, b, ++i);
                break;
            case ':':
                if (two('-')) push(Tok::If, b, i += 2);
                else push(Tok::Colon, b, ++i);
                break;
            case '=':
                if (two('=')) push(Tok::Eq, b, i += 2);
                else push(Tok::Eq, b, ++i);
                break;
            case '!':
                if (!two('=')) throw ParseError(loc_at(b), "unexpected '!'");
                push(Tok::Ne, b, i += 2);
                break;
            case '<':
                if (two('=')) push(Tok::Le, b, i += 2);
                else push(Tok::Lt, b, ++i);
                break;
            case '>':
                if (two('=')) push(Tok::Ge, b, i += 2);
                else push(Tok::Gt, b, ++i);
                break;
            default: throw ParseError(loc_at(b), std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back(Token{Tok::End, "", 0, loc_at(i), i, i});
    return out;
}

bool is_comparison(Tok k) {
    return k == Tok::Eq || k == Tok::Ne || k == Tok::Lt || k == Tok::Le || k == Tok::Gt || k == Tok::Ge;
}

Comparison to_comparison(Tok k) {
    switch (k) {
        case Tok::Eq: return Comparison::Eq;
        case Tok::Ne: return Comparison::Ne;
        case Tok::Lt: return Comparison::Lt;
        case Tok::Le: return Comparison::Le;
        case Tok::Gt: return Comparison::Gt;
        default: return Comparison::Ge;
    }
}

std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    if (t.kind == Tok::Directive) return "'#" + t.text + "'";
    if (!t.text.empty()) return "'" + t.text + "'";
    switch (t.kind) {
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Comma: return "','";
        case Tok::Semi: return "';'";
        case Tok::Dot: return "'.'";
        case Tok::DotDot: return "'..'";
        case Tok::Colon: return "':'";
        case Tok::If: return "':-'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Mod: return "'#mod'";
        default: return "operator";
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    Program program() {
        Program prog;
        while (!at(Tok::End)) statement(prog);
        mark_constants(prog);
        for (auto& part : prog.parts) {
            for (const auto& r : part.rules) check_safety(r);
            for (const auto& e : part.externals) check_safety(e);
        }
        return prog;
    }

    StreamEvent event(std::optional<std::int64_t> previous) {
        StreamEvent ev;
        if (!(at(Tok::Directive) && peek().text == "step")) throw error("expected '#step' at start of online block");
        Location step_loc = peek().loc;
        next();
        ev.target_step = int_expr();
        if (accept(Tok::Colon)) {
            auto d = int_expr();
            if (d < 0) throw ParseError(step_loc, "step bound must be non-negative");
            ev.delta = d;
        }
        expect(Tok::Dot);
        if (ev.target_step < 1) throw ParseError(step_loc, "step must be positive");
        if (previous && ev.target_step <= *previous)
            throw ParseError(step_loc, "step " + std::to_string(ev.target_step) + " is not greater than previous step " +
                                           std::to_string(*previous));
        ev.blocks.push_back(OnlineBlock{});
        param_.clear();
        in_base_ = false;
        while (!at(Tok::End)) {
            if (at(Tok::Directive)) {
                const Token& d = peek();
                if (d.text == "endstep") {
                    next();
                    expect(Tok::Dot);
                    if (!at(Tok::End)) throw error("unexpected input after '#endstep.'");
                    break;
                }
                if (d.text == "volatile") {
                    next();
                    OnlineBlock b;
                    b.life = 1;
                    if (accept(Tok::Colon)) {
                        b.life = int_expr();
                        if (*b.life < 1) throw ParseError(d.loc, "life span must be positive");
                    }
                    expect(Tok::Dot);
                    ev.blocks.push_back(std::move(b));
                    continue;
                }
                if (d.text == "forget") {
                    next();
                    ev.forget_upto = int_expr();
                    expect(Tok::Dot);
                    continue;
                }
                throw ParseError(d.loc, "directive '#" + d.text + "' not allowed in online block");
            }
            Rule r = rule();
            std::vector<std::string> vars;
            for (const auto& l : r.body) {
                if (l.kind == Literal::Kind::Atom)
                    for (const auto& t : l.atom.args) t.collect_variables(vars);
                else {
                    l.lhs.collect_variables(vars);
                    l.rhs.collect_variables(vars);
                }
            }
            for (const auto& t : r.head.args) t.collect_variables(vars);
            for (const auto& e : r.elements) {
                for (const auto& t : e.atom.args) t.collect_variables(vars);
                for (const auto& l : e.condition)
                    for (const auto& t : l.atom.args) t.collect_variables(vars);
            }
            if (!vars.empty()) throw ParseError(r.loc, "online rule is not ground (variable " + vars.front() + ")");
            ev.blocks.back().rules.push_back(std::move(r));
        }
        std::erase_if(ev.blocks, [](const OnlineBlock& b) { return b.rules.empty(); });
        return ev;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::string param_;
    bool in_base_ = true;

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at(Tok k) const { return peek().kind == k; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    ParseError error(const std::string& msg) const { return ParseError(peek().loc, msg + ", found " + describe(peek())); }
    const Token& expect(Tok k) {
        if (!at(k)) {
            Token want{k, "", 0, {}, 0, 0};
            throw error("expected " + describe(want));
        }
        return next();
    }

    std::int64_t int_expr() {
        Location loc = peek().loc;
        Term t = term();
        try {
            Value v = eval_term(t, std::map<std::string, Value>{}, 0);
            if (!v.is_integer()) throw ParseError(loc, "expected an integer");
            return v.integer_value();
        } catch (const EvalError& e) {
            throw ParseError(loc, e.what());
        }
    }

    ProgramPart& current(Program& prog) {
        if (prog.parts.empty()) prog.parts.push_back(ProgramPart{});
        return prog.parts.back();
    }

    void statement(Program& prog) {
        if (at(Tok::Directive)) {
            const Token d = next();
            if (d.text == "base") {
                expect(Tok::Dot);
                prog.parts.push_back(ProgramPart{});
                param_.clear();
                in_base_ = true;
            } else if (d.text == "cumulative" || d.text == "volatile") {
                ProgramPart part;
                part.kind = d.text == "cumulative" ? PartKind::Cumulative : PartKind::Volatile;
                part.param = expect(Tok::Ident).text;
                if (accept(Tok::Colon)) {
                    if (part.kind == PartKind::Cumulative) throw ParseError(d.loc, "cumulative parts take no life span");
                    param_.clear();  // the life span is not step dependent
                    part.life_span = term();
                }
                expect(Tok::Dot);
                param_ = part.param;
                in_base_ = false;
                prog.parts.push_back(std::move(part));
            } else if (d.text == "external") {
                External e;
                e.loc = d.loc;
                e.atom = atom();
                if (accept(Tok::Colon)) e.condition = body();
                expect(Tok::Dot);
                current(prog).externals.push_back(std::move(e));
            } else if (d.text == "iinit") {
                prog.iinit = term();
                expect(Tok::Dot);
            } else if (d.text == "const") {
                ConstDef c;
                c.name = expect(Tok::Ident).text;
                expect(Tok::Eq);
                c.value = term();
                expect(Tok::Dot);
                prog.consts.push_back(std::move(c));
            } else {
                throw ParseError(d.loc, "unknown directive '#" + d.text + "'");
            }
            return;
        }
        current(prog).rules.push_back(rule());
    }

    // -- terms ---------------------------------------------------------------

    Term term() {
        Term lhs = product();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            BinaryOp op = next().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            lhs = Term::binary(op, std::move(lhs), product());
        }
        return lhs;
    }

    Term product() {
        Term lhs = unary();
        while (at(Tok::Star) || at(Tok::Mod)) {
            BinaryOp op = next().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Mod;
            lhs = Term::binary(op, std::move(lhs), unary());
        }
        return lhs;
    }

    Term unary() {
        if (accept(Tok::Minus)) {
            Term t = unary();
            if (t.kind == Term::Kind::Integer) return Term::integer(-t.number);
            return Term::binary(BinaryOp::Sub, Term::integer(0), std::move(t));
        }
        return primary();
    }

    Term primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number: next(); return Term::integer(t.number);
            case Tok::Var: next(); return Term::variable(t.text);
            case Tok::Ident: {
                next();
                if (at(Tok::LParen)) throw ParseError(t.loc, "function terms are not supported");
                if (!param_.empty() && t.text == param_) return Term::step_param(t.text);
                if (in_base_ && t.text == "t") throw ParseError(t.loc, "step parameter 't' used in a base part");
                return Term::symbol(t.text);
            }
            case Tok::LParen: {
                next();
                Term inner = term();
                expect(Tok::RParen);
                return inner;
            }
            default: throw error("expected a term");
        }
    }

    // term with optional interval / pool alternatives (argument position)
    Term arg() {
        std::vector<Term> alts;
        do {
            Term t = term();
            if (accept(Tok::DotDot)) t = Term::interval(std::move(t), term());
            alts.push_back(std::move(t));
        } while (accept(Tok::Semi));
        return alts.size() == 1 ? std::move(alts.front()) : Term::pool(std::move(alts));
    }

    // -- atoms, literals, rules --------------------------------------------------

    Atom atom() {
        const Token& name = expect(Tok::Ident);
        if (in_base_ && name.text == "t") throw ParseError(name.loc, "step parameter 't' used in a base part");
        Atom a;
        a.name = name.text;
        if (accept(Tok::LParen)) {
            if (!at(Tok::RParen)) {
                do a.args.push_back(arg());
                while (accept(Tok::Comma));
            }
            expect(Tok::RParen);
        }
        return a;
    }

    bool starts_atom() const {
        if (!at(Tok::Ident)) return false;
        Tok after = peek(1).kind;
        return after != Tok::Plus && after != Tok::Minus && after != Tok::Star && after != Tok::Mod &&
               !is_comparison(after) && after != Tok::DotDot;
    }

    Literal literal() {
        if (accept(Tok::Not)) return Literal::negated(atom());
        if (starts_atom()) {
            Atom a = atom();
            if (is_comparison(peek().kind)) throw error("atom used as a term in a comparison");
            return Literal::positive(std::move(a));
        }
        Term lhs = arg();
        if (!is_comparison(peek().kind)) throw error("expected a comparison operator");
        Comparison c = to_comparison(next().kind);
        return Literal::comparison(c, std::move(lhs), arg());
    }

    std::vector<Literal> body() {
        std::vector<Literal> lits;
        do lits.push_back(literal());
        while (accept(Tok::Comma));
        return lits;
    }

    bool choice_ahead() const {
        if (at(Tok::LBrace)) return true;
        if (at(Tok::Ident)) {
            Tok after = peek(1).kind;
            return after == Tok::LBrace || after == Tok::Plus || after == Tok::Minus || after == Tok::Star || after == Tok::Mod;
        }
        return at(Tok::Number) || at(Tok::Var) || at(Tok::Minus) || at(Tok::LParen);
    }

    Rule rule() {
        Rule r;
        r.loc = peek().loc;
        if (accept(Tok::If)) {
            r.kind = RuleKind::Constraint;
            r.body = body();
            expect(Tok::Dot);
            return r;
        }
        if (choice_ahead()) {
            r.kind = RuleKind::Choice;
            if (!at(Tok::LBrace)) r.lower = term();
            expect(Tok::LBrace);
            if (!at(Tok::RBrace)) {
                do {
                    ChoiceElement el;
                    el.atom = atom();
                    if (accept(Tok::Colon)) {
                        do el.condition.push_back(literal());
                        while (accept(Tok::Comma));
                    }
                    r.elements.push_back(std::move(el));
                } while (accept(Tok::Semi));
            }
            expect(Tok::RBrace);
            if (!at(Tok::If) && !at(Tok::Dot)) r.upper = term();
        } else {
            r.kind = RuleKind::Normal;
            r.head = atom();
        }
        if (accept(Tok::If)) r.body = body();
        expect(Tok::Dot);
        return r;
    }

    // symbols naming declared constants become placeholders
    static void mark(Term& t, const std::set<std::string>& names) {
        if (t.kind == Term::Kind::Symbol && names.count(t.name)) t.kind = Term::Kind::Constant;
        for (auto& a : t.args) mark(a, names);
    }
    static void mark(Atom& a, const std::set<std::string>& names) {
        for (auto& t : a.args) mark(t, names);
    }
    static void mark(std::vector<Literal>& lits, const std::set<std::string>& names) {
        for (auto& l : lits) {
            mark(l.atom, names);
            mark(l.lhs, names);
            mark(l.rhs, names);
        }
    }

    static void mark_constants(Program& prog) {
        std::set<std::string> names;
        for (const auto& c : prog.consts) names.insert(c.name);
        if (names.empty()) return;
        for (auto& c : prog.consts) mark(c.value, names);
        if (prog.iinit) mark(*prog.iinit, names);
        for (auto& part : prog.parts) {
            if (part.life_span) mark(*part.life_span, names);
            for (auto& e : part.externals) {
                mark(e.atom, names);
                mark(e.condition, names);
            }
            for (auto& r : part.rules) {
                mark(r.head, names);
                for (auto& el : r.elements) {
                    mark(el.atom, names);
                    mark(el.condition, names);
                }
                if (r.lower) mark(*r.lower, names);
                if (r.upper) mark(*r.upper, names);
                mark(r.body, names);
            }
        }
    }
};

}  // namespace

Program parse_program(std::string_view text) {
    return Parser(text).program();
}

StreamEvent parse_stream_block(std::string_view text, std::optional<std::int64_t> previous_step) {
    return Parser(text).event(previous_step);
}

std::vector<std::string> split_stream_blocks(std::string_view text) {
    auto toks = tokenize(text);
    std::vector<std::string> blocks;
    std::size_t start = 0;
    bool has_step = false;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        if (toks[i].kind != Tok::Directive) continue;
        if (toks[i].text == "endstep" && toks[i + 1].kind == Tok::Dot) {
            blocks.emplace_back(text.substr(start, toks[i + 1].end - start));
            start = toks[i + 1].end;
            has_step = false;
        } else if (toks[i].text == "step") {
            // a second #step also closes an unterminated block
            if (has_step) {
                blocks.emplace_back(text.substr(start, toks[i].begin - start));
                start = toks[i].begin;
            }
            has_step = true;
        }
    }
    // anything left that holds tokens is an unterminated block
    std::string_view rest = text.substr(start);
    if (tokenize(rest).size() > 1) blocks.emplace_back(rest);
    return blocks;
}

std::vector<StreamEvent> parse_stream(std::string_view text) {
    std::vector<StreamEvent> events;
    std::optional<std::int64_t> prev;
    for (const auto& block : split_stream_blocks(text)) {
        events.push_back(parse_stream_block(block, prev));
        prev = events.back().target_step;
    }
    return events;
}

std::string to_string(const StreamEvent& e) {
    std::ostringstream out;
    out << "#step " << e.target_step;
    if (e.delta) out << " : " << *e.delta;
    out << ".\n";
    for (const auto& b : e.blocks) {
        if (b.life) out << "#volatile : " << *b.life << ".\n";
        for (const auto& r : b.rules) out << to_string(r) << "\n";
    }
    if (e.forget_upto) out << "#forget " << *e.forget_upto << ".\n";
    out << "#endstep.\n";
    return out.str();
}

}  // namespace streamlp
