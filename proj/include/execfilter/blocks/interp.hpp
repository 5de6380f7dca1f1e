#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "execfilter/blocks/program.hpp"
#include "execfilter/blocks/world.hpp"
#include "execfilter/denotation.hpp"

namespace execfilter::blocks {

// Execution context for one world. A world holds at most 4 * 8 = 32 objects,
// so object sets are 64-bit masks and every filter is one AND.
class ExecContext {
  public:
    explicit ExecContext(const BlocksWorld& world) {
        world.validate();
        num_boxes_ = static_cast<int>(world.boxes.size());
        int idx = 0;
        for (int b = 0; b < num_boxes_; ++b) {
            std::uint64_t box_mask = 0;
            for (const Obj& o : world.boxes[b]) {
                const std::uint64_t bit = 1ULL << idx;
                box_mask |= bit;
                attr(AtomId::Black, o.color == Color::Black, bit);
                attr(AtomId::Blue, o.color == Color::Blue, bit);
                attr(AtomId::Yellow, o.color == Color::Yellow, bit);
                attr(AtomId::Square, o.shape == Shape::Square, bit);
                attr(AtomId::Circle, o.shape == Shape::Circle, bit);
                attr(AtomId::Triangle, o.shape == Shape::Triangle, bit);
                attr(AtomId::Small, o.size == Size::Small, bit);
                attr(AtomId::Medium, o.size == Size::Medium, bit);
                attr(AtomId::Big, o.size == Size::Big, bit);
                attr(AtomId::TouchBottom, o.touch_bottom, bit);
                attr(AtomId::TouchTop, o.touch_top, bit);
                attr(AtomId::TouchWall, o.touch_wall, bit);
                // bottom/top are aliases for touching the box floor/ceiling
                attr(AtomId::Bottom, o.touch_bottom, bit);
                attr(AtomId::Top, o.touch_top, bit);
                ++idx;
            }
            box_masks_[b] = box_mask;
            all_mask_ |= box_mask;
        }
    }

    std::uint64_t all_objects() const { return all_mask_; }
    std::uint64_t box_objects(int b) const { return box_masks_[b]; }
    int num_boxes() const { return num_boxes_; }
    std::uint64_t filter_mask(AtomId id) const {
        return attr_masks_[static_cast<int>(id) - kFirstFilterAtom];
    }
    std::uint32_t all_boxes() const { return (1u << num_boxes_) - 1; }

  private:
    void attr(AtomId id, bool holds, std::uint64_t bit) {
        if (holds) attr_masks_[static_cast<int>(id) - kFirstFilterAtom] |= bit;
    }

    std::uint64_t all_mask_ = 0;
    std::uint64_t attr_masks_[kNumFilterAtoms] = {};
    std::uint64_t box_masks_[BlocksWorld::kMaxBoxes] = {};
    int num_boxes_ = 0;
};

namespace detail {

inline bool cmp_count(CmpKind cmp, int have, int want) {
    switch (cmp) {
        case CmpKind::Equals: return have == want;
        case CmpKind::GreaterEquals: return have >= want;
        case CmpKind::LesserEquals: return have <= want;
    }
    return false;
}

inline std::uint64_t eval_objset(const Expr& e, const ExecContext& ctx);
inline std::uint32_t eval_boxset(const Expr& e, const ExecContext& ctx);

inline std::uint64_t eval_filter(const Expr& f, std::uint64_t s, const ExecContext& ctx) {
    if (f->kind == NodeKind::Atom) return s & ctx.filter_mask(f->atom);
    // Compose of two filters: ((* f g) s) = (f (g s))
    return eval_filter(f->a, eval_filter(f->b, s, ctx), ctx);
}

inline bool eval_pred(const Expr& p, std::uint64_t s, const ExecContext& ctx) {
    switch (p->kind) {
        case NodeKind::Atom: return s != 0;  // object_exists
        case NodeKind::CountPred:
            return cmp_count(p->cmp, std::popcount(s), p->count);
        case NodeKind::Compose: return eval_pred(p->a, eval_filter(p->b, s, ctx), ctx);
        default: return false;
    }
}

inline std::uint32_t eval_boxset(const Expr& e, const ExecContext& ctx) {
    if (e->kind == NodeKind::Atom) return ctx.all_boxes();  // all_boxes
    // box_filter: keep boxes whose contents satisfy the predicate
    std::uint32_t in = eval_boxset(e->a, ctx);
    std::uint32_t out = 0;
    for (int b = 0; b < ctx.num_boxes(); ++b) {
        if ((in >> b) & 1u) {
            if (eval_pred(e->b, ctx.box_objects(b), ctx)) out |= 1u << b;
        }
    }
    return out;
}

inline std::uint64_t eval_objset(const Expr& e, const ExecContext& ctx) {
    if (e->kind == NodeKind::Atom) return ctx.all_objects();  // all_objects
    // Apply
    if (e->a->ty == Ty::BoxToObj) {
        std::uint32_t boxes = eval_boxset(e->b, ctx);
        std::uint64_t s = 0;
        for (int b = 0; b < ctx.num_boxes(); ++b) {
            if ((boxes >> b) & 1u) s |= ctx.box_objects(b);
        }
        return s;
    }
    return eval_filter(e->a, eval_objset(e->b, ctx), ctx);
}

inline bool eval_bool(const Expr& e, const ExecContext& ctx) {
    if (e->kind == NodeKind::BoxCount)
        return cmp_count(e->cmp, std::popcount(eval_boxset(e->a, ctx)), e->count);
    // Apply of a predicate to an object set
    return eval_pred(e->a, eval_objset(e->b, ctx), ctx);
}

}  // namespace detail

// Execute a Bool-typed program against one world. Total: a well-typed
// program cannot fail, every denotation is true or false.
inline Denotation exec_blocks(const BlocksProgram& program, const ExecContext& ctx) {
    return Denotation::boolean(detail::eval_bool(program.root, ctx));
}

inline Denotation exec_blocks(const BlocksProgram& program, const BlocksWorld& world) {
    return exec_blocks(program, ExecContext(world));
}

}  // namespace execfilter::blocks
