#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "execfilter/error.hpp"

namespace execfilter::blocks {

enum class Color : std::uint8_t { Black, Blue, Yellow };
enum class Shape : std::uint8_t { Square, Circle, Triangle };
enum class Size : std::uint8_t { Small, Medium, Big };

inline const char* to_string(Color c) {
    switch (c) {
        case Color::Black: return "black";
        case Color::Blue: return "blue";
        case Color::Yellow: return "yellow";
    }
    return "?";
}
inline const char* to_string(Shape s) {
    switch (s) {
        case Shape::Square: return "square";
        case Shape::Circle: return "circle";
        case Shape::Triangle: return "triangle";
    }
    return "?";
}
inline const char* to_string(Size s) {
    switch (s) {
        case Size::Small: return "small";
        case Size::Medium: return "medium";
        case Size::Big: return "big";
    }
    return "?";
}

struct Obj {
    Color color = Color::Black;
    Shape shape = Shape::Square;
    Size size = Size::Small;
    bool touch_bottom = false;
    bool touch_top = false;
    bool touch_wall = false;
};

// A scene: 1..4 boxes, each holding 0..8 objects. Positions are abstracted
// into the three touch flags.
struct BlocksWorld {
    std::vector<std::vector<Obj>> boxes;

    static constexpr int kMaxBoxes = 4;
    static constexpr int kMaxObjectsPerBox = 8;

    void validate() const {
        if (boxes.empty() || boxes.size() > kMaxBoxes)
            throw ParseError("blocks world must have 1..4 boxes");
        for (const auto& box : boxes) {
            if (box.size() > kMaxObjectsPerBox)
                throw ParseError("box holds more than 8 objects");
        }
    }

    std::size_t object_count() const {
        std::size_t n = 0;
        for (const auto& b : boxes) n += b.size();
        return n;
    }

    nlohmann::json to_json() const {
        nlohmann::json jboxes = nlohmann::json::array();
        for (const auto& box : boxes) {
            nlohmann::json jbox = nlohmann::json::array();
            for (const auto& o : box) {
                jbox.push_back({{"color", to_string(o.color)},
                                {"shape", to_string(o.shape)},
                                {"size", to_string(o.size)},
                                {"touch_bottom", o.touch_bottom},
                                {"touch_top", o.touch_top},
                                {"touch_wall", o.touch_wall}});
            }
            jboxes.push_back(std::move(jbox));
        }
        return {{"boxes", std::move(jboxes)}};
    }

    static BlocksWorld from_json(const nlohmann::json& j) {
        BlocksWorld w;
        for (const auto& jbox : j.at("boxes")) {
            std::vector<Obj> box;
            for (const auto& jo : jbox) {
                Obj o;
                o.color = color_from_string(jo.at("color").get<std::string>());
                o.shape = shape_from_string(jo.at("shape").get<std::string>());
                o.size = size_from_string(jo.at("size").get<std::string>());
                o.touch_bottom = jo.at("touch_bottom").get<bool>();
                o.touch_top = jo.at("touch_top").get<bool>();
                o.touch_wall = jo.at("touch_wall").get<bool>();
                box.push_back(o);
            }
            w.boxes.push_back(std::move(box));
        }
        w.validate();
        return w;
    }

    static Color color_from_string(const std::string& s) {
        if (s == "black") return Color::Black;
        if (s == "blue") return Color::Blue;
        if (s == "yellow") return Color::Yellow;
        throw ParseError("unknown color '" + s + "'");
    }
    static Shape shape_from_string(const std::string& s) {
        if (s == "square") return Shape::Square;
        if (s == "circle") return Shape::Circle;
        if (s == "triangle") return Shape::Triangle;
        throw ParseError("unknown shape '" + s + "'");
    }
    static Size size_from_string(const std::string& s) {
        if (s == "small") return Size::Small;
        if (s == "medium") return Size::Medium;
        if (s == "big") return Size::Big;
        throw ParseError("unknown size '" + s + "'");
    }
};

}  // namespace execfilter::blocks
