#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "execfilter/denotation.hpp"
#include "execfilter/table/program.hpp"
#include "execfilter/table/table.hpp"

namespace execfilter::table {

namespace detail {

// Internal signal that unwinds to an in-band Error denotation at the
// exec_table boundary. Never escapes this header.
struct ExecSignal {
    ErrorKind kind;
    std::string msg;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string msg) {
    throw ExecSignal{kind, std::move(msg)};
}

inline int resolve_column(const Table& t, const std::string& name) {
    int idx = t.column_index(name);
    if (idx < 0) fail(ErrorKind::UnknownName, "column:" + name);
    return idx;
}

inline void require_nonempty(const std::vector<int>& rows, const char* op) {
    if (rows.empty()) fail(ErrorKind::EmptyInput, std::string(op) + " on empty row set");
}

inline bool literal_matches_ctype(const Literal& lit, CType ctype) {
    switch (lit.kind) {
        case Literal::Kind::Str: return ctype == CType::String;
        case Literal::Kind::Num: return ctype == CType::Number;
        case Literal::Kind::Date: return ctype == CType::Date;
    }
    return false;
}

inline bool cell_equals_literal(const Cell& cell, const Literal& lit) {
    switch (lit.kind) {
        case Literal::Kind::Str: return cell.as_str() == lit.str;
        case Literal::Kind::Num: return num_equal(cell.as_num(), lit.num);
        case Literal::Kind::Date: return cell.as_date() == lit.date;
    }
    return false;
}

// strict comparison: cell > literal (for filter_greater) or < (filter_less)
inline bool cell_orders_literal(const Cell& cell, const Literal& lit, bool greater) {
    if (lit.kind == Literal::Kind::Num) {
        if (num_equal(cell.as_num(), lit.num)) return false;
        return greater ? cell.as_num() > lit.num : cell.as_num() < lit.num;
    }
    const Date& a = cell.as_date();
    const Date& b = lit.date;
    return greater ? (b < a) : (a < b);
}

inline std::vector<int> eval_rows(const TExpr& e, const Table& t);

inline std::vector<int> eval_filter_node(const TNode& n, const Table& t) {
    std::vector<int> rows = eval_rows(n.child, t);
    require_nonempty(rows, filter_name(n.fop));
    int col = resolve_column(t, n.column);
    CType ctype = t.columns[col].ctype;
    if (!literal_matches_ctype(n.lit, ctype))
        fail(ErrorKind::TypeMismatch, std::string("comparing column:") + n.column + " (" +
                                          to_string(ctype) + ") with " + n.lit.token());
    if (n.fop != FilterOp::Eq && ctype == CType::String)
        fail(ErrorKind::TypeMismatch, "ordering comparison on string column:" + n.column);
    std::vector<int> out;
    for (int r : rows) {
        const Cell& cell = t.rows[r][col];
        if (cell.is_blank()) continue;  // blanks never match a comparison
        bool keep = n.fop == FilterOp::Eq
                        ? cell_equals_literal(cell, n.lit)
                        : cell_orders_literal(cell, n.lit, n.fop == FilterOp::Greater);
        if (keep) out.push_back(r);
    }
    return out;
}

inline std::vector<int> eval_argminmax(const TNode& n, const Table& t) {
    std::vector<int> rows = eval_rows(n.child, t);
    require_nonempty(rows, n.takes_max ? "argmax" : "argmin");
    if (rows.size() == 1)
        fail(ErrorKind::SingletonInput,
             std::string(n.takes_max ? "argmax" : "argmin") + " on a single row");
    int col = resolve_column(t, n.column);
    CType ctype = t.columns[col].ctype;
    if (ctype == CType::String)
        fail(ErrorKind::TypeMismatch, "argmax/argmin over string column:" + n.column);
    int best = -1;
    for (int r : rows) {
        const Cell& cell = t.rows[r][col];
        if (cell.is_blank())
            fail(ErrorKind::TypeMismatch, "blank cell in column:" + n.column);
        if (best < 0) {
            best = r;
            continue;
        }
        const Cell& champ = t.rows[best][col];
        bool better;
        if (ctype == CType::Number) {
            better = n.takes_max ? cell.as_num() > champ.as_num()
                                 : cell.as_num() < champ.as_num();
        } else {
            better = n.takes_max ? champ.as_date() < cell.as_date()
                                 : cell.as_date() < champ.as_date();
        }
        if (better) best = r;  // ties keep the earlier row
    }
    return {best};
}

inline std::vector<int> eval_rows(const TExpr& e, const Table& t) {
    switch (e->kind) {
        case TNodeKind::AllRows: {
            std::vector<int> all(t.rows.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
            return all;
        }
        case TNodeKind::Filter: return eval_filter_node(*e, t);
        case TNodeKind::ArgMinMax: return eval_argminmax(*e, t);
        case TNodeKind::FirstLast: {
            std::vector<int> rows = eval_rows(e->child, t);
            require_nonempty(rows, e->takes_max ? "first" : "last");
            return {e->takes_max ? rows.front() : rows.back()};
        }
        default: fail(ErrorKind::TypeMismatch, "expression does not produce rows");
    }
}

inline Denotation eval_value(const TExpr& e, const Table& t) {
    switch (e->kind) {
        case TNodeKind::Select: {
            std::vector<int> rows = eval_rows(e->child, t);
            require_nonempty(rows, "select");
            int col = resolve_column(t, e->column);
            std::vector<Denotation> items;
            for (int r : rows) {
                const Cell& cell = t.rows[r][col];
                if (cell.is_blank())
                    fail(ErrorKind::TypeMismatch, "blank cell in column:" + e->column);
                items.push_back(cell.denotation());
            }
            return Denotation::list(std::move(items));
        }
        case TNodeKind::Count: {
            std::vector<int> rows = eval_rows(e->child, t);
            require_nonempty(rows, "count");
            return Denotation::num(static_cast<double>(rows.size()));
        }
        case TNodeKind::Agg: {
            Denotation vl = eval_value(e->child, t);
            const auto& items = vl.as_list();
            if (items.empty()) fail(ErrorKind::EmptyInput, "aggregate over empty list");
            for (const auto& d : items) {
                if (d.tag() != Denotation::Tag::Num)
                    fail(ErrorKind::TypeMismatch, "aggregate over non-numeric list");
            }
            double acc = (e->agg == AggOp::Sum) ? 0.0 : items[0].as_num();
            for (const auto& d : items) {
                double x = d.as_num();
                if (e->agg == AggOp::Max)
                    acc = std::max(acc, x);
                else if (e->agg == AggOp::Min)
                    acc = std::min(acc, x);
                else
                    acc += x;
            }
            return Denotation::num(acc);
        }
        default: fail(ErrorKind::TypeMismatch, "expression does not produce a value");
    }
}

}  // namespace detail

// Execute a program on a table. Never throws: every failure mode is one of
// the closed set of error kinds, returned in-band.
inline Denotation exec_table(const TableProgram& p, const Table& t) {
    try {
        return detail::eval_value(p.root, t);
    } catch (const detail::ExecSignal& s) {
        return Denotation::error(s.kind, s.msg);
    }
}

}  // namespace execfilter::table
