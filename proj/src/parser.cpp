#include "textilp/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace textilp {

namespace {

struct Token {
    enum Kind { Ident, LParen, RParen, Comma, Dot, Neck, End } kind;
    std::string text;
    int line;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_ws();
        if (pos_ >= text_.size()) return {Token::End, "", line_};
        char c = text_[pos_];
        if (c == '(') { ++pos_; return {Token::LParen, "(", line_}; }
        if (c == ')') { ++pos_; return {Token::RParen, ")", line_}; }
        if (c == ',') { ++pos_; return {Token::Comma, ",", line_}; }
        if (c == '.') { ++pos_; return {Token::Dot, ".", line_}; }
        if (c == ':' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
            pos_ += 2;
            return {Token::Neck, ":-", line_};
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                    text_[pos_] == '_'))
                ++pos_;
            return {Token::Ident, std::string(text_.substr(start, pos_ - start)), line_};
        }
        throw ParseError(line_, std::string("unexpected character '") + c + "'");
    }

    Token peek() {
        size_t p = pos_;
        int l = line_;
        Token t = next();
        pos_ = p;
        line_ = l;
        return t;
    }

    int line() const { return line_; }

private:
    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') { ++line_; ++pos_; }
            else if (std::isspace(static_cast<unsigned char>(c))) { ++pos_; }
            else if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
};

bool is_var_name(const std::string& s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

Term make_term(const std::string& name) {
    return is_var_name(name) ? Term::var(name) : Term::constant(name);
}

Token expect(Lexer& lex, Token::Kind kind, const char* what) {
    Token t = lex.next();
    if (t.kind != kind)
        throw ParseError(t.line, std::string("expected ") + what + ", got '" + t.text + "'");
    return t;
}

Atom parse_atom_tokens(Lexer& lex, const Token& name) {
    Atom a;
    a.pred = name.text;
    if (lex.peek().kind == Token::LParen) {
        lex.next();
        while (true) {
            Token t = expect(lex, Token::Ident, "term");
            a.args.push_back(make_term(t.text));
            Token sep = lex.next();
            if (sep.kind == Token::RParen) break;
            if (sep.kind != Token::Comma)
                throw ParseError(sep.line, "expected ',' or ')' in argument list");
        }
    }
    return a;
}

void check_arity(const Atom& a, const BiasSpec* bias, int line) {
    if (!bias) return;
    if (const PredicateSignature* sig = bias->find(a.pred)) {
        if (sig->arity != static_cast<int>(a.args.size()))
            throw ParseError(line, "arity clash for " + a.pred + ": declared " +
                                       std::to_string(sig->arity) + ", got " +
                                       std::to_string(a.args.size()));
    }
}

} // namespace

FactBase parse_facts(std::string_view text, const BiasSpec* bias) {
    FactBase fb;
    Lexer lex(text);
    while (true) {
        Token t = lex.next();
        if (t.kind == Token::End) break;
        if (t.kind != Token::Ident)
            throw ParseError(t.line, "expected atom, got '" + t.text + "'");

        bool is_pos = t.text == "pos";
        bool is_neg = t.text == "neg";
        Atom a;
        if (is_pos || is_neg) {
            expect(lex, Token::LParen, "'('");
            Token inner = expect(lex, Token::Ident, "example atom");
            a = parse_atom_tokens(lex, inner);
            expect(lex, Token::RParen, "')'");
        } else {
            a = parse_atom_tokens(lex, t);
        }
        Token dot = lex.next();
        if (dot.kind == Token::Neck)
            throw ParseError(dot.line, "clauses are not allowed in fact files");
        if (dot.kind != Token::Dot)
            throw ParseError(dot.line, "expected '.' after atom");

        if (!a.ground())
            throw ParseError(t.line, "fact is not ground: " + render(a));
        check_arity(a, bias, t.line);
        if (is_pos) fb.pos.insert(std::move(a));
        else if (is_neg) fb.neg.insert(std::move(a));
        else fb.background.insert(std::move(a));
    }
    for (const Atom& a : fb.pos)
        if (fb.neg.count(a))
            throw ParseError(1, "example is both pos and neg: " + render(a));
    return fb;
}

Atom parse_atom(std::string_view text) {
    Lexer lex(text);
    Token t = expect(lex, Token::Ident, "atom");
    Atom a = parse_atom_tokens(lex, t);
    Token end = lex.next();
    if (end.kind == Token::Dot) end = lex.next();
    if (end.kind != Token::End)
        throw ParseError(end.line, "trailing input after atom");
    return a;
}

Clause parse_clause(std::string_view text) {
    Lexer lex(text);
    Token t = expect(lex, Token::Ident, "clause head");
    Clause c;
    c.head = parse_atom_tokens(lex, t);
    Token sep = lex.next();
    if (sep.kind == Token::Neck) {
        while (true) {
            Token bt = expect(lex, Token::Ident, "body atom");
            c.body.push_back(parse_atom_tokens(lex, bt));
            Token s2 = lex.next();
            if (s2.kind == Token::Dot) break;
            if (s2.kind != Token::Comma)
                throw ParseError(s2.line, "expected ',' or '.' in clause body");
        }
    } else if (sep.kind != Token::Dot) {
        throw ParseError(sep.line, "expected ':-' or '.' after clause head");
    }
    return c;
}

Program parse_program(std::string_view text) {
    Program p;
    Lexer lex(text);
    while (lex.peek().kind != Token::End) {
        Token t = expect(lex, Token::Ident, "clause head");
        Clause c;
        c.head = parse_atom_tokens(lex, t);
        Token sep = lex.next();
        if (sep.kind == Token::Neck) {
            while (true) {
                Token bt = expect(lex, Token::Ident, "body atom");
                c.body.push_back(parse_atom_tokens(lex, bt));
                Token s2 = lex.next();
                if (s2.kind == Token::Dot) break;
                if (s2.kind != Token::Comma)
                    throw ParseError(s2.line, "expected ',' or '.' in clause body");
            }
        } else if (sep.kind != Token::Dot) {
            throw ParseError(sep.line, "expected ':-' or '.' after clause head");
        }
        p.add(c);
    }
    return p;
}

BiasSpec parse_bias(std::string_view text) {
    Lexer lex(text);

    struct Decl {
        int arity = -1;
        PredRole role = PredRole::Body;
        std::optional<std::vector<std::string>> types;
        std::optional<std::vector<ArgDir>> dirs;
        int line = 0;
        int order = 0;
    };
    std::map<std::string, Decl> decls;
    std::vector<std::string> decl_order;
    std::optional<std::string> head_name;
    std::optional<int> max_vars, max_body, max_clauses;

    auto parse_tuple = [&](int line) {
        expect(lex, Token::LParen, "'('");
        std::vector<std::string> items;
        while (true) {
            Token t = lex.next();
            if (t.kind == Token::RParen) break;  // allows trailing comma: (shoes,)
            if (t.kind != Token::Ident)
                throw ParseError(line, "expected tuple element");
            items.push_back(t.text);
            Token sep = lex.next();
            if (sep.kind == Token::RParen) break;
            if (sep.kind != Token::Comma)
                throw ParseError(line, "expected ',' or ')' in tuple");
        }
        return items;
    };

    auto require_ident = [&](const char* what) {
        return expect(lex, Token::Ident, what).text;
    };

    while (true) {
        Token t = lex.next();
        if (t.kind == Token::End) break;
        if (t.kind != Token::Ident)
            throw ParseError(t.line, "expected directive, got '" + t.text + "'");
        const std::string& directive = t.text;
        expect(lex, Token::LParen, "'('");

        if (directive == "head_pred" || directive == "body_pred") {
            std::string name = require_ident("predicate name");
            expect(lex, Token::Comma, "','");
            std::string arity_text = require_ident("arity");
            expect(lex, Token::RParen, "')'");
            int arity = 0;
            try {
                arity = std::stoi(arity_text);
            } catch (...) {
                throw ParseError(t.line, "bad arity '" + arity_text + "'");
            }
            if (arity < 1)
                throw ParseError(t.line, "arity must be >= 1 for " + name);
            if (is_var_name(name))
                throw ParseError(t.line, "predicate name must be lowercase: " + name);
            if (directive == "head_pred" && head_name)
                throw ParseError(t.line, "duplicate head declaration: " + name);
            auto [it, inserted] = decls.try_emplace(name);
            if (!inserted && it->second.arity >= 0)
                throw ParseError(t.line, "duplicate predicate declaration: " + name);
            it->second.arity = arity;
            it->second.line = t.line;
            it->second.order = static_cast<int>(decl_order.size());
            decl_order.push_back(name);
            if (directive == "head_pred") {
                it->second.role = PredRole::Head;
                head_name = name;
            }
        } else if (directive == "type") {
            std::string name = require_ident("predicate name");
            expect(lex, Token::Comma, "','");
            auto items = parse_tuple(t.line);
            expect(lex, Token::RParen, "')'");
            decls[name].types = items;
            if (decls[name].line == 0) decls[name].line = t.line;
        } else if (directive == "direction") {
            std::string name = require_ident("predicate name");
            expect(lex, Token::Comma, "','");
            auto items = parse_tuple(t.line);
            expect(lex, Token::RParen, "')'");
            std::vector<ArgDir> dirs;
            for (const auto& d : items) {
                if (d == "in") dirs.push_back(ArgDir::In);
                else if (d == "out") dirs.push_back(ArgDir::Out);
                else throw ParseError(t.line, "bad direction '" + d + "'");
            }
            decls[name].dirs = dirs;
            if (decls[name].line == 0) decls[name].line = t.line;
        } else if (directive == "max_vars" || directive == "max_body" ||
                   directive == "max_clauses") {
            std::string n_text = require_ident("count");
            expect(lex, Token::RParen, "')'");
            int n = 0;
            try {
                n = std::stoi(n_text);
            } catch (...) {
                throw ParseError(t.line, "bad count '" + n_text + "'");
            }
            if (n < 1) throw ParseError(t.line, directive + " must be >= 1");
            if (directive == "max_vars") max_vars = n;
            else if (directive == "max_body") max_body = n;
            else max_clauses = n;
        } else {
            throw ParseError(t.line, "unknown directive '" + directive + "'");
        }
        expect(lex, Token::Dot, "'.'");
    }

    if (!head_name)
        throw ParseError(lex.line(), "no head_pred declaration");

    BiasSpec bias;
    bias.max_vars = max_vars.value_or(kDefaultMaxVars);
    bias.max_body = max_body.value_or(kDefaultMaxBody);
    bias.max_clauses = max_clauses.value_or(kDefaultMaxClauses);

    for (const std::string& name : decl_order) {
        const Decl& d = decls.at(name);
        PredicateSignature sig;
        sig.name = name;
        sig.arity = d.arity;
        sig.role = d.role;
        if (!d.types)
            throw ParseError(d.line, "missing type declaration for " + name);
        if (static_cast<int>(d.types->size()) != d.arity)
            throw ParseError(d.line, "type tuple length " +
                                         std::to_string(d.types->size()) +
                                         " does not match arity " +
                                         std::to_string(d.arity) + " for " + name);
        sig.arg_types = *d.types;
        if (d.dirs) {
            if (static_cast<int>(d.dirs->size()) != d.arity)
                throw ParseError(d.line, "direction tuple length does not match arity for " + name);
            sig.directions = *d.dirs;
        } else if (d.role == PredRole::Head) {
            sig.directions.assign(d.arity, ArgDir::In);
        } else {
            throw ParseError(d.line, "missing direction declaration for " + name);
        }
        if (d.role == PredRole::Head) bias.head = sig;
        else bias.body.push_back(sig);
    }

    for (const auto& [name, d] : decls)
        if (d.arity < 0)
            throw ParseError(d.line, "type/direction given for undeclared predicate " + name);

    // Every head argument type must be covered by some body predicate.
    for (const std::string& t : bias.head.arg_types) {
        bool covered = false;
        for (const auto& sig : bias.body)
            if (std::find(sig.arg_types.begin(), sig.arg_types.end(), t) !=
                sig.arg_types.end()) {
                covered = true;
                break;
            }
        if (!covered)
            throw ParseError(1, "head argument type '" + t +
                                    "' is covered by no body predicate");
    }

    if (bias.max_vars < bias.head.arity)
        throw ParseError(1, "max_vars is smaller than the head arity");

    return bias;
}

} // namespace textilp
