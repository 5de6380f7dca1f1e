#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "execfilter/error.hpp"
#include "execfilter/sexpr.hpp"
#include "execfilter/table/table.hpp"

namespace execfilter::table {

// Literal entity appearing in a program. Its lexical kind comes from the
// token shape; the column it is compared against may refine it later.
struct Literal {
    enum class Kind : std::uint8_t { Str, Num, Date };
    Kind kind = Kind::Str;
    std::string str;
    double num = 0.0;
    Date date;

    static Literal make_str(std::string s) {
        Literal l;
        l.kind = Kind::Str;
        l.str = std::move(s);
        return l;
    }
    static Literal make_num(double x) {
        Literal l;
        l.kind = Kind::Num;
        l.num = x;
        return l;
    }
    static Literal make_date(Date d) {
        Literal l;
        l.kind = Kind::Date;
        l.date = d;
        return l;
    }

    // Canonical token text, also the entity's identity for replacement.
    std::string token() const {
        switch (kind) {
            case Kind::Str: return "\"" + str + "\"";
            case Kind::Num: {
                if (num == std::floor(num) && std::fabs(num) < 9.0e15)
                    return std::to_string(static_cast<long long>(num));
                return nlohmann::json(num).dump();
            }
            case Kind::Date: return "date:" + date.iso();
        }
        return "?";
    }

    friend bool operator==(const Literal& a, const Literal& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Kind::Str: return a.str == b.str;
            case Kind::Num: return num_equal(a.num, b.num);
            case Kind::Date: return a.date == b.date;
        }
        return false;
    }
};

enum class TNodeKind : std::uint8_t {
    AllRows,
    Filter,     // filter_eq / filter_greater / filter_less
    Select,
    Count,
    Agg,        // max / min / sum
    ArgMinMax,  // argmax / argmin
    FirstLast,  // first / last
};

enum class FilterOp : std::uint8_t { Eq, Greater, Less };
enum class AggOp : std::uint8_t { Max, Min, Sum };

struct TNode;
using TExpr = std::shared_ptr<const TNode>;

struct TNode {
    TNodeKind kind;
    FilterOp fop = FilterOp::Eq;
    AggOp agg = AggOp::Max;
    bool takes_max = false;   // ArgMinMax: argmax; FirstLast: first
    TExpr child;              // Rows or ValueList operand
    std::string column;       // Filter / Select / ArgMinMax
    Literal lit;              // Filter
};

// Result type of a full program. Rows is internal only.
enum class ResultTy : std::uint8_t { ValueList, Num };

struct TableProgram {
    TExpr root;
    std::string text;
    ResultTy result_ty = ResultTy::ValueList;
};

namespace detail {

inline const char* filter_name(FilterOp op) {
    switch (op) {
        case FilterOp::Eq: return "filter_eq";
        case FilterOp::Greater: return "filter_greater";
        case FilterOp::Less: return "filter_less";
    }
    return "?";
}

inline const char* agg_name(AggOp op) {
    switch (op) {
        case AggOp::Max: return "max";
        case AggOp::Min: return "min";
        case AggOp::Sum: return "sum";
    }
    return "?";
}

inline bool parse_number_token(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline std::string parse_column_token(const SExpr& e, const char* context) {
    if (!e.is_atom || e.atom.rfind("column:", 0) != 0)
        throw ParseError(std::string(context) + " expects a column:NAME reference");
    std::string name = e.atom.substr(7);
    if (name.empty()) throw ParseError("empty column name");
    return name;
}

inline Literal parse_literal(const SExpr& e, const char* context) {
    if (!e.is_atom) throw ParseError(std::string(context) + " expects a literal value");
    const std::string& t = e.atom;
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"')
        return Literal::make_str(t.substr(1, t.size() - 2));
    if (t.rfind("date:", 0) == 0) return Literal::make_date(Date::parse(t.substr(5)));
    if (t.rfind("column:", 0) == 0)
        throw ParseError(std::string(context) + " expects a value, got a column reference");
    double x = 0;
    if (parse_number_token(t, x)) return Literal::make_num(x);
    return Literal::make_str(t);  // bare word literal
}

}  // namespace detail

inline void pretty_print(const TExpr& e, std::string& out) {
    switch (e->kind) {
        case TNodeKind::AllRows: out += "all_rows"; return;
        case TNodeKind::Filter:
            out += '(';
            out += detail::filter_name(e->fop);
            out += ' ';
            pretty_print(e->child, out);
            out += " column:" + e->column + ' ' + e->lit.token() + ')';
            return;
        case TNodeKind::Select:
            out += "(select ";
            pretty_print(e->child, out);
            out += " column:" + e->column + ')';
            return;
        case TNodeKind::Count:
            out += "(count ";
            pretty_print(e->child, out);
            out += ')';
            return;
        case TNodeKind::Agg:
            out += '(';
            out += detail::agg_name(e->agg);
            out += ' ';
            pretty_print(e->child, out);
            out += ')';
            return;
        case TNodeKind::ArgMinMax:
            out += e->takes_max ? "(argmax " : "(argmin ";
            pretty_print(e->child, out);
            out += " column:" + e->column + ')';
            return;
        case TNodeKind::FirstLast:
            out += e->takes_max ? "(first " : "(last ";
            pretty_print(e->child, out);
            out += ')';
            return;
    }
}

inline std::string pretty_print(const TExpr& e) {
    std::string s;
    pretty_print(e, s);
    return s;
}

namespace detail {

// Internal value kind during parsing: Rows or ValueList.
enum class PTy { Rows, ValueList, Num };

inline TExpr build_texpr(const SExpr& e, PTy& ty);

inline TExpr build_rows(const SExpr& e, const char* context) {
    PTy ty;
    TExpr x = build_texpr(e, ty);
    if (ty != PTy::Rows) throw TypeCheckError(std::string(context) + " expects a row set");
    return x;
}

inline TExpr build_vlist(const SExpr& e, const char* context) {
    PTy ty;
    TExpr x = build_texpr(e, ty);
    if (ty != PTy::ValueList)
        throw TypeCheckError(std::string(context) + " expects a value list");
    return x;
}

inline TExpr build_texpr(const SExpr& e, PTy& ty) {
    if (e.is_atom) {
        if (e.atom == "all_rows") {
            auto n = std::make_shared<TNode>();
            n->kind = TNodeKind::AllRows;
            ty = PTy::Rows;
            return n;
        }
        throw UnknownNameError(e.atom);
    }
    const SExpr& head = e.children[0];
    if (!head.is_atom) throw ParseError("table operator expected at head position");
    const std::string& h = head.atom;
    auto n = std::make_shared<TNode>();
    if (h == "filter_eq" || h == "filter_greater" || h == "filter_less") {
        if (e.children.size() != 4) throw ParseError(h + " takes rows, a column and a value");
        n->kind = TNodeKind::Filter;
        n->fop = h == "filter_eq" ? FilterOp::Eq
                                  : (h == "filter_greater" ? FilterOp::Greater : FilterOp::Less);
        n->child = build_rows(e.children[1], h.c_str());
        n->column = parse_column_token(e.children[2], h.c_str());
        n->lit = parse_literal(e.children[3], h.c_str());
        ty = PTy::Rows;
        return n;
    }
    if (h == "select") {
        if (e.children.size() != 3) throw ParseError("select takes rows and a column");
        n->kind = TNodeKind::Select;
        n->child = build_rows(e.children[1], "select");
        n->column = parse_column_token(e.children[2], "select");
        ty = PTy::ValueList;
        return n;
    }
    if (h == "count") {
        if (e.children.size() != 2) throw ParseError("count takes a row set");
        n->kind = TNodeKind::Count;
        n->child = build_rows(e.children[1], "count");
        ty = PTy::Num;
        return n;
    }
    if (h == "max" || h == "min" || h == "sum") {
        if (e.children.size() != 2) throw ParseError(h + " takes a value list");
        n->kind = TNodeKind::Agg;
        n->agg = h == "max" ? AggOp::Max : (h == "min" ? AggOp::Min : AggOp::Sum);
        n->child = build_vlist(e.children[1], h.c_str());
        ty = PTy::Num;
        return n;
    }
    if (h == "argmax" || h == "argmin") {
        if (e.children.size() != 3) throw ParseError(h + " takes rows and a column");
        n->kind = TNodeKind::ArgMinMax;
        n->takes_max = (h == "argmax");
        n->child = build_rows(e.children[1], h.c_str());
        n->column = parse_column_token(e.children[2], h.c_str());
        ty = PTy::Rows;
        return n;
    }
    if (h == "first" || h == "last") {
        if (e.children.size() != 2) throw ParseError(h + " takes a row set");
        n->kind = TNodeKind::FirstLast;
        n->takes_max = (h == "first");
        n->child = build_rows(e.children[1], h.c_str());
        ty = PTy::Rows;
        return n;
    }
    throw UnknownNameError(h);
}

}  // namespace detail

// Parse program text. A full program must produce a value list or a number;
// a bare row set is not a denotable result.
inline TableProgram parse_table_program(const std::string& text) {
    detail::PTy ty;
    TExpr root = detail::build_texpr(parse_sexpr(text), ty);
    if (ty == detail::PTy::Rows)
        throw TypeCheckError("a full program must produce a value list or a number");
    TableProgram p;
    p.root = root;
    p.text = pretty_print(root);
    p.result_ty = (ty == detail::PTy::Num) ? ResultTy::Num : ResultTy::ValueList;
    return p;
}

}  // namespace execfilter::table
