#pragma once

#include <memory>
#include <string>
#include <vector>

#include "execfilter/error.hpp"

namespace execfilter {

// Minimal S-expression reader shared by the two program languages.
// An SExpr is either an atom (unparsed token text, quoted strings keep their
// quotes) or a list of SExprs.
struct SExpr {
    bool is_atom = false;
    std::string atom;             // valid when is_atom
    std::vector<SExpr> children;  // valid when !is_atom

    static SExpr make_atom(std::string text) {
        SExpr e;
        e.is_atom = true;
        e.atom = std::move(text);
        return e;
    }
};

namespace detail {

inline std::vector<std::string> sexpr_tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
        } else if (c == '(' || c == ')') {
            out.emplace_back(1, c);
            ++i;
        } else if (c == '"') {
            std::size_t start = i++;
            while (i < n && text[i] != '"') {
                if (text[i] == '\\' && i + 1 < n) ++i;
                ++i;
            }
            if (i >= n) throw ParseError("unterminated string literal");
            ++i;  // closing quote
            out.push_back(text.substr(start, i - start));
        } else {
            std::size_t start = i;
            while (i < n && text[i] != ' ' && text[i] != '\t' && text[i] != '\n' &&
                   text[i] != '\r' && text[i] != '(' && text[i] != ')') {
                ++i;
            }
            out.push_back(text.substr(start, i - start));
        }
    }
    return out;
}

inline SExpr sexpr_parse_at(const std::vector<std::string>& toks, std::size_t& pos) {
    if (pos >= toks.size()) throw ParseError("unexpected end of input");
    const std::string& t = toks[pos];
    if (t == "(") {
        ++pos;
        SExpr e;
        while (pos < toks.size() && toks[pos] != ")") {
            e.children.push_back(sexpr_parse_at(toks, pos));
        }
        if (pos >= toks.size()) throw ParseError("missing closing parenthesis");
        ++pos;  // ")"
        if (e.children.empty()) throw ParseError("empty list");
        return e;
    }
    if (t == ")") throw ParseError("unexpected ')'");
    ++pos;
    return SExpr::make_atom(t);
}

}  // namespace detail

inline SExpr parse_sexpr(const std::string& text) {
    auto toks = detail::sexpr_tokenize(text);
    if (toks.empty()) throw ParseError("empty program text");
    std::size_t pos = 0;
    SExpr e = detail::sexpr_parse_at(toks, pos);
    if (pos != toks.size()) throw ParseError("trailing tokens after expression");
    return e;
}

inline void print_sexpr(const SExpr& e, std::string& out) {
    if (e.is_atom) {
        out += e.atom;
        return;
    }
    out += '(';
    for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ' ';
        print_sexpr(e.children[i], out);
    }
    out += ')';
}

inline std::string print_sexpr(const SExpr& e) {
    std::string s;
    print_sexpr(e, s);
    return s;
}

}  // namespace execfilter
