#pragma once

#include "execfilter/blocks/world.hpp"
#include "execfilter/rng.hpp"

namespace test_helpers {

inline execfilter::blocks::Obj random_obj(execfilter::Rng& rng) {
    using namespace execfilter::blocks;
    Obj o;
    o.color = static_cast<Color>(rng.range(0, 2));
    o.shape = static_cast<Shape>(rng.range(0, 2));
    o.size = static_cast<Size>(rng.range(0, 2));
    o.touch_bottom = rng.coin();
    o.touch_top = rng.coin();
    o.touch_wall = rng.coin();
    return o;
}

inline execfilter::blocks::BlocksWorld random_world(execfilter::Rng& rng, int max_boxes = 4,
                                                    int max_objects = 8) {
    execfilter::blocks::BlocksWorld w;
    int nb = rng.range(1, max_boxes);
    for (int b = 0; b < nb; ++b) {
        std::vector<execfilter::blocks::Obj> box;
        int no = rng.range(0, max_objects);
        for (int i = 0; i < no; ++i) box.push_back(random_obj(rng));
        w.boxes.push_back(std::move(box));
    }
    return w;
}

}  // namespace test_helpers
