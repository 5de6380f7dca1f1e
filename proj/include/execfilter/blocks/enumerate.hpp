#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "execfilter/blocks/program.hpp"

namespace execfilter::blocks {

struct EnumEntry {
    Expr root;
    int depth;
    std::string text;
    std::uint64_t tokens;
};

namespace detail {

// Canonical program shapes emitted by the enumerator, all Bool-typed:
//
//   (P S)                                    predicate over an object source
//   (box_count_equals N BS)
//   (box_count_greater_equals N BS)
//
//   P  := object_exists | (object_count_* N) | (* P filter_atom)
//   S  := all_objects | (object_in_box BS)
//   BS := all_boxes | (box_filter all_boxes P)
//
// Compose chains nest on the left with an atomic filter on the right, so
// every semantic filter pipeline appears exactly once. The parser accepts a
// wider language; enumeration sticks to this canonical subset.
//
// Base order: depth ascending; within a depth, (P S) pairs first (P major,
// both operands in their own base order), then box_count_equals, then
// box_count_greater_equals, literals ascending.
class Enumerator {
  public:
    explicit Enumerator(int max_depth) : max_depth_(max_depth) {}

    std::vector<EnumEntry> take(std::size_t max_count) {
        std::vector<EnumEntry> out;
        if (max_depth_ < 2 || max_count == 0) return out;
        for (int d = 2; d <= max_depth_; ++d) {
            ensure_operands(d - 1);
            // (P S)
            for (int dp = 1; dp <= d - 1; ++dp) {
                for (const Expr& p : preds_[dp]) {
                    for (int ds = 1; ds <= d - 1; ++ds) {
                        if (std::max(dp, ds) != d - 1) continue;
                        for (const Expr& s : sources_[ds]) {
                            if (!emit(out, make_apply(p, s), d, max_count)) return out;
                        }
                    }
                }
            }
            // box counts
            for (CmpKind cmp : {CmpKind::Equals, CmpKind::GreaterEquals}) {
                for (int n = 1; n <= kMaxCountLiteral; ++n) {
                    for (const Expr& bs : boxsets_[d - 1]) {
                        if (!emit(out, make_box_count(cmp, n, bs), d, max_count)) return out;
                    }
                }
            }
        }
        return out;
    }

  private:
    static bool emit(std::vector<EnumEntry>& out, Expr e, int d, std::size_t max_count) {
        std::uint64_t mask = token_mask(e);
        std::string text = pretty_print(e);
        out.push_back(EnumEntry{std::move(e), d, std::move(text), mask});
        return out.size() < max_count;
    }

    void ensure_operands(int up_to) {
        while (built_ <= up_to) {
            int d = built_;
            std::vector<Expr> p, s, bs;
            if (d == 1) {
                p.push_back(make_atom(AtomId::ObjectExists));
                s.push_back(make_atom(AtomId::AllObjects));
                bs.push_back(make_atom(AtomId::AllBoxes));
            } else {
                if (d == 2) {
                    for (CmpKind cmp :
                         {CmpKind::Equals, CmpKind::GreaterEquals, CmpKind::LesserEquals}) {
                        for (int n = 1; n <= kMaxCountLiteral; ++n)
                            p.push_back(make_count_pred(cmp, n));
                    }
                }
                for (const Expr& prev : preds_[d - 1]) {
                    for (int f = kFirstFilterAtom; f <= kLastFilterAtom; ++f)
                        p.push_back(make_compose(prev, make_atom(static_cast<AtomId>(f))));
                }
                if (d == 2) {
                    s.push_back(make_apply(make_atom(AtomId::ObjectInBox),
                                           make_atom(AtomId::AllBoxes)));
                } else {
                    for (const Expr& b : boxsets_[d - 1])
                        s.push_back(make_apply(make_atom(AtomId::ObjectInBox), b));
                }
                for (const Expr& prev : preds_[d - 1])
                    bs.push_back(make_box_filter(make_atom(AtomId::AllBoxes), prev));
            }
            preds_.push_back(std::move(p));
            sources_.push_back(std::move(s));
            boxsets_.push_back(std::move(bs));
            ++built_;
        }
    }

    int max_depth_;
    int built_ = 1;  // lists are indexed by depth; slot 0 stays empty
    std::vector<std::vector<Expr>> preds_{1};
    std::vector<std::vector<Expr>> sources_{1};
    std::vector<std::vector<Expr>> boxsets_{1};
};

}  // namespace detail

// First max_count programs of the base order, depth-capped. The order is a
// pure function of max_depth: a longer prefix extends a shorter one.
inline std::vector<EnumEntry> enumerate_entries(
    int max_depth, std::size_t max_count = std::numeric_limits<std::size_t>::max()) {
    return detail::Enumerator(max_depth).take(max_count);
}

inline std::vector<BlocksProgram> enumerate_blocks(
    int max_depth, std::size_t max_count = std::numeric_limits<std::size_t>::max()) {
    std::vector<EnumEntry> entries = enumerate_entries(max_depth, max_count);
    std::vector<BlocksProgram> out;
    out.reserve(entries.size());
    for (auto& e : entries) out.push_back(BlocksProgram{std::move(e.root), std::move(e.text)});
    return out;
}

// Shared full-enumeration cache for the depths callers keep coming back to.
inline const std::vector<EnumEntry>& cached_enumeration(int max_depth) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<const std::vector<EnumEntry>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(max_depth);
    if (it == cache.end())
        it = cache
                 .emplace(max_depth, std::make_unique<const std::vector<EnumEntry>>(
                                         enumerate_entries(max_depth)))
                 .first;
    return *it->second;
}

}  // namespace execfilter::blocks
