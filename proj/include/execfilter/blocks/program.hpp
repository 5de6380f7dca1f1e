#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "execfilter/error.hpp"
#include "execfilter/sexpr.hpp"

namespace execfilter::blocks {

// Types of the blocks language. Function types cover exactly the shapes the
// grammar can produce: object-set transformers, object-set predicates, and
// the box-to-object projection.
enum class Ty : std::uint8_t {
    ObjSet,
    BoxSet,
    Bool,
    ObjFilter,  // ObjSet -> ObjSet
    ObjPred,    // ObjSet -> Bool
    BoxToObj,   // BoxSet -> ObjSet
};

enum class AtomId : std::uint8_t {
    AllObjects,
    AllBoxes,
    // object filters, in grammar order
    Black,
    Blue,
    Yellow,
    Square,
    Circle,
    Triangle,
    Small,
    Medium,
    Big,
    TouchBottom,
    TouchTop,
    TouchWall,
    Bottom,
    Top,
    //
    ObjectExists,
    ObjectInBox,
};

inline constexpr int kFirstFilterAtom = static_cast<int>(AtomId::Black);
inline constexpr int kLastFilterAtom = static_cast<int>(AtomId::Top);
inline constexpr int kNumFilterAtoms = kLastFilterAtom - kFirstFilterAtom + 1;
inline constexpr int kMaxCountLiteral = 9;

enum class NodeKind : std::uint8_t { Atom, CountPred, Compose, Apply, BoxFilter, BoxCount };
enum class CmpKind : std::uint8_t { Equals, GreaterEquals, LesserEquals };

struct Node;
using Expr = std::shared_ptr<const Node>;

// Immutable expression node. Children are shared; the enumerator reuses
// subtrees heavily.
struct Node {
    NodeKind kind;
    Ty ty;
    AtomId atom = AtomId::AllObjects;  // Atom
    CmpKind cmp = CmpKind::Equals;     // CountPred / BoxCount
    int count = 0;                     // CountPred / BoxCount
    Expr a;  // Compose: f, Apply: fn, BoxFilter: boxes, BoxCount: boxes
    Expr b;  // Compose: g, Apply: arg, BoxFilter: pred
};

namespace detail {

struct AtomInfo {
    const char* name;
    AtomId id;
    Ty ty;
};

inline const std::array<AtomInfo, 18>& atom_table() {
    static const std::array<AtomInfo, 18> table = {{
        {"all_objects", AtomId::AllObjects, Ty::ObjSet},
        {"all_boxes", AtomId::AllBoxes, Ty::BoxSet},
        {"black", AtomId::Black, Ty::ObjFilter},
        {"blue", AtomId::Blue, Ty::ObjFilter},
        {"yellow", AtomId::Yellow, Ty::ObjFilter},
        {"square", AtomId::Square, Ty::ObjFilter},
        {"circle", AtomId::Circle, Ty::ObjFilter},
        {"triangle", AtomId::Triangle, Ty::ObjFilter},
        {"small", AtomId::Small, Ty::ObjFilter},
        {"medium", AtomId::Medium, Ty::ObjFilter},
        {"big", AtomId::Big, Ty::ObjFilter},
        {"touch_bottom", AtomId::TouchBottom, Ty::ObjFilter},
        {"touch_top", AtomId::TouchTop, Ty::ObjFilter},
        {"touch_wall", AtomId::TouchWall, Ty::ObjFilter},
        {"bottom", AtomId::Bottom, Ty::ObjFilter},
        {"top", AtomId::Top, Ty::ObjFilter},
        {"object_exists", AtomId::ObjectExists, Ty::ObjPred},
        {"object_in_box", AtomId::ObjectInBox, Ty::BoxToObj},
    }};
    return table;
}

inline const AtomInfo* find_atom(const std::string& name) {
    for (const auto& a : atom_table()) {
        if (name == a.name) return &a;
    }
    return nullptr;
}

inline const char* atom_name(AtomId id) { return atom_table()[static_cast<int>(id)].name; }

inline bool is_numeral(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

inline const char* count_pred_name(CmpKind c) {
    switch (c) {
        case CmpKind::Equals: return "object_count_equals";
        case CmpKind::GreaterEquals: return "object_count_greater_equals";
        case CmpKind::LesserEquals: return "object_count_lesser_equals";
    }
    return "?";
}

inline const char* box_count_name(CmpKind c) {
    return c == CmpKind::Equals ? "box_count_equals" : "box_count_greater_equals";
}

}  // namespace detail

inline Expr make_atom(AtomId id) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Atom;
    n->ty = detail::atom_table()[static_cast<int>(id)].ty;
    n->atom = id;
    return n;
}

inline Expr make_count_pred(CmpKind cmp, int count) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::CountPred;
    n->ty = Ty::ObjPred;
    n->cmp = cmp;
    n->count = count;
    return n;
}

// (* f g) applies right to left: ((* f g) s) = (f (g s)). g must transform
// object sets; f may transform or test them.
inline Expr make_compose(Expr f, Expr g) {
    if (g->ty != Ty::ObjFilter)
        throw TypeCheckError("right operand of (*) must be an object filter");
    if (f->ty != Ty::ObjFilter && f->ty != Ty::ObjPred)
        throw TypeCheckError("left operand of (*) must be an object filter or predicate");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Compose;
    n->ty = f->ty;
    n->a = std::move(f);
    n->b = std::move(g);
    return n;
}

inline Expr make_apply(Expr fn, Expr arg) {
    Ty result;
    if (fn->ty == Ty::ObjFilter && arg->ty == Ty::ObjSet) {
        result = Ty::ObjSet;
    } else if (fn->ty == Ty::ObjPred && arg->ty == Ty::ObjSet) {
        result = Ty::Bool;
    } else if (fn->ty == Ty::BoxToObj && arg->ty == Ty::BoxSet) {
        result = Ty::ObjSet;
    } else {
        throw TypeCheckError("cannot apply expression to the given argument");
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Apply;
    n->ty = result;
    n->a = std::move(fn);
    n->b = std::move(arg);
    return n;
}

inline Expr make_box_filter(Expr boxes, Expr pred) {
    if (boxes->ty != Ty::BoxSet) throw TypeCheckError("box_filter expects a box set");
    if (pred->ty != Ty::ObjPred)
        throw TypeCheckError("box_filter expects an object-set predicate");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::BoxFilter;
    n->ty = Ty::BoxSet;
    n->a = std::move(boxes);
    n->b = std::move(pred);
    return n;
}

inline Expr make_box_count(CmpKind cmp, int count, Expr boxes) {
    if (boxes->ty != Ty::BoxSet) throw TypeCheckError("box count expects a box set");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::BoxCount;
    n->ty = Ty::Bool;
    n->cmp = cmp;
    n->count = count;
    n->a = std::move(boxes);
    return n;
}

inline void pretty_print(const Expr& e, std::string& out) {
    switch (e->kind) {
        case NodeKind::Atom:
            out += detail::atom_name(e->atom);
            return;
        case NodeKind::CountPred:
            out += '(';
            out += detail::count_pred_name(e->cmp);
            out += ' ';
            out += std::to_string(e->count);
            out += ')';
            return;
        case NodeKind::Compose:
            out += "(* ";
            pretty_print(e->a, out);
            out += ' ';
            pretty_print(e->b, out);
            out += ')';
            return;
        case NodeKind::Apply:
            out += '(';
            pretty_print(e->a, out);
            out += ' ';
            pretty_print(e->b, out);
            out += ')';
            return;
        case NodeKind::BoxFilter:
            out += "(box_filter ";
            pretty_print(e->a, out);
            out += ' ';
            pretty_print(e->b, out);
            out += ')';
            return;
        case NodeKind::BoxCount:
            out += '(';
            out += detail::box_count_name(e->cmp);
            out += ' ';
            out += std::to_string(e->count);
            out += ' ';
            pretty_print(e->a, out);
            out += ')';
            return;
    }
}

inline std::string pretty_print(const Expr& e) {
    std::string s;
    pretty_print(e, s);
    return s;
}

inline int depth(const Expr& e) {
    switch (e->kind) {
        case NodeKind::Atom: return 1;
        case NodeKind::CountPred: return 2;  // literal child counts as depth 1
        case NodeKind::Compose:
        case NodeKind::Apply:
        case NodeKind::BoxFilter: return 1 + std::max(depth(e->a), depth(e->b));
        case NodeKind::BoxCount: return 1 + std::max(1, depth(e->a));
    }
    return 1;
}

inline bool expr_equal(const Expr& x, const Expr& y) {
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case NodeKind::Atom: return x->atom == y->atom;
        case NodeKind::CountPred: return x->cmp == y->cmp && x->count == y->count;
        case NodeKind::Compose:
        case NodeKind::Apply:
        case NodeKind::BoxFilter: return expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
        case NodeKind::BoxCount:
            return x->cmp == y->cmp && x->count == y->count && expr_equal(x->a, y->a);
    }
    return false;
}

// A parsed, type-checked Bool program together with its canonical text.
struct BlocksProgram {
    Expr root;
    std::string text;
};

namespace detail {

inline int parse_count_literal(const SExpr& e, const char* context) {
    if (!e.is_atom || !is_numeral(e.atom))
        throw ParseError(std::string(context) + " expects an integer literal");
    if (e.atom.size() > 1 || e.atom[0] < '1')
        throw ParseError("integer literal out of range 1..9 in " + std::string(context));
    return e.atom[0] - '0';
}

inline Expr build_expr(const SExpr& e) {
    if (e.is_atom) {
        if (is_numeral(e.atom))
            throw TypeCheckError("integer literal is not an expression");
        if (const AtomInfo* a = find_atom(e.atom)) return make_atom(a->id);
        if (e.atom == "*" || e.atom == "box_filter" || e.atom == "object_count_equals" ||
            e.atom == "object_count_greater_equals" || e.atom == "object_count_lesser_equals" ||
            e.atom == "box_count_equals" || e.atom == "box_count_greater_equals") {
            throw TypeCheckError("'" + e.atom + "' requires arguments");
        }
        throw UnknownNameError(e.atom);
    }
    const SExpr& head = e.children[0];
    if (head.is_atom) {
        const std::string& h = head.atom;
        if (h == "*") {
            if (e.children.size() != 3) throw ParseError("(*) takes two operands");
            return make_compose(build_expr(e.children[1]), build_expr(e.children[2]));
        }
        if (h == "object_count_equals" || h == "object_count_greater_equals" ||
            h == "object_count_lesser_equals") {
            if (e.children.size() != 2) throw ParseError(h + " takes one literal");
            CmpKind cmp = h == "object_count_equals"
                              ? CmpKind::Equals
                              : (h == "object_count_greater_equals" ? CmpKind::GreaterEquals
                                                                    : CmpKind::LesserEquals);
            return make_count_pred(cmp, parse_count_literal(e.children[1], h.c_str()));
        }
        if (h == "box_filter") {
            if (e.children.size() != 3) throw ParseError("box_filter takes two operands");
            return make_box_filter(build_expr(e.children[1]), build_expr(e.children[2]));
        }
        if (h == "box_count_equals" || h == "box_count_greater_equals") {
            if (e.children.size() != 3) throw ParseError(h + " takes a literal and a box set");
            CmpKind cmp = h == "box_count_equals" ? CmpKind::Equals : CmpKind::GreaterEquals;
            return make_box_count(cmp, parse_count_literal(e.children[1], h.c_str()),
                                  build_expr(e.children[2]));
        }
    }
    if (e.children.size() != 2)
        throw ParseError("application takes exactly one argument");
    return make_apply(build_expr(e.children[0]), build_expr(e.children[1]));
}

}  // namespace detail

// Parse program text into a typed AST. The result pretty-prints to canonical
// single-space form; parse(pretty_print(p)) reproduces p.
inline BlocksProgram parse_blocks(const std::string& text) {
    Expr root = detail::build_expr(parse_sexpr(text));
    if (root->ty != Ty::Bool)
        throw TypeCheckError("a full program must have type Bool");
    return BlocksProgram{root, pretty_print(root)};
}

// ---- program tokens ----
//
// Tokens are the terminal and function names occurring in a program (plus
// count literals). They live in a fixed 33-slot registry so token sets fit
// in one 64-bit mask; lexicon recall is a popcount away.

inline constexpr int kNumTokens = 33;

namespace detail {

inline const std::vector<std::string>& token_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& a : atom_table()) v.push_back(a.name);  // 18
        v.push_back("object_count_equals");
        v.push_back("object_count_greater_equals");
        v.push_back("object_count_lesser_equals");
        v.push_back("box_filter");
        v.push_back("box_count_equals");
        v.push_back("box_count_greater_equals");
        for (int i = 1; i <= 9; ++i) v.push_back(std::to_string(i));
        return v;
    }();
    return names;
}

}  // namespace detail

inline int token_id(const std::string& name) {
    const auto& names = detail::token_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

inline const std::string& token_name(int id) { return detail::token_names()[id]; }

inline std::uint64_t token_mask(const Expr& e) {
    std::uint64_t m = 0;
    const std::uint64_t numeral_base = 24;  // ids 24..32 are literals 1..9
    switch (e->kind) {
        case NodeKind::Atom: return 1ULL << static_cast<int>(e->atom);
        case NodeKind::CountPred:
            m = 1ULL << (18 + static_cast<int>(e->cmp));
            m |= 1ULL << (numeral_base + e->count - 1);
            return m;
        case NodeKind::Compose:
        case NodeKind::Apply: return token_mask(e->a) | token_mask(e->b);
        case NodeKind::BoxFilter:
            return (1ULL << 21) | token_mask(e->a) | token_mask(e->b);
        case NodeKind::BoxCount:
            m = e->cmp == CmpKind::Equals ? (1ULL << 22) : (1ULL << 23);
            m |= 1ULL << (numeral_base + e->count - 1);
            return m | token_mask(e->a);
    }
    return 0;
}

}  // namespace execfilter::blocks
