#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "execfilter/error.hpp"

namespace execfilter {

// Execution errors are first-class denotation outcomes: the table language
// yields them in-band and the vote treats them like any other value.
enum class ErrorKind {
    EmptyInput,
    SingletonInput,
    TypeMismatch,
    UnknownName,
    DivergentDepth,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::SingletonInput: return "SingletonInput";
        case ErrorKind::TypeMismatch: return "TypeMismatch";
        case ErrorKind::UnknownName: return "UnknownName";
        case ErrorKind::DivergentDepth: return "DivergentDepth";
    }
    return "?";
}

inline ErrorKind error_kind_from_string(const std::string& s) {
    if (s == "EmptyInput") return ErrorKind::EmptyInput;
    if (s == "SingletonInput") return ErrorKind::SingletonInput;
    if (s == "TypeMismatch") return ErrorKind::TypeMismatch;
    if (s == "UnknownName") return ErrorKind::UnknownName;
    if (s == "DivergentDepth") return ErrorKind::DivergentDepth;
    throw ParseError("unknown error kind '" + s + "'");
}

// Relative tolerance for numeric denotation equality (absolute below 1).
inline constexpr double kNumEpsilon = 1e-9;

inline bool num_equal(double a, double b) {
    double scale = std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
    return std::fabs(a - b) <= kNumEpsilon * scale;
}

// The value a program yields on one world: Bool | Num | Str | ValueList | Error.
// Immutable by convention; every field is set once at construction.
class Denotation {
  public:
    enum class Tag : std::uint8_t { Bool, Num, Str, List, Err };

    struct ErrorValue {
        ErrorKind kind;
        std::string message;
    };

    Denotation() : value_(false) {}

    static Denotation boolean(bool b) { return Denotation(Value(b)); }
    static Denotation num(double x) { return Denotation(Value(x)); }
    static Denotation str(std::string s) { return Denotation(Value(std::move(s))); }
    static Denotation error(ErrorKind k, std::string message = "") {
        return Denotation(Value(ErrorValue{k, std::move(message)}));
    }

    // Lists must be homogeneous and may not contain errors.
    static Denotation list(std::vector<Denotation> items) {
        for (const auto& d : items) {
            if (d.tag() == Tag::Err) throw TypeCheckError("error value inside list denotation");
            if (d.tag() != items.front().tag())
                throw TypeCheckError("heterogeneous list denotation");
            if (d.tag() == Tag::List) throw TypeCheckError("nested list denotation");
        }
        return Denotation(Value(std::move(items)));
    }

    Tag tag() const { return static_cast<Tag>(value_.index()); }
    bool is_error() const { return tag() == Tag::Err; }

    bool as_bool() const { return std::get<bool>(value_); }
    double as_num() const { return std::get<double>(value_); }
    const std::string& as_str() const { return std::get<std::string>(value_); }
    const std::vector<Denotation>& as_list() const {
        return std::get<std::vector<Denotation>>(value_);
    }
    const ErrorValue& as_error() const { return std::get<ErrorValue>(value_); }

    nlohmann::json to_json() const {
        using nlohmann::json;
        switch (tag()) {
            case Tag::Bool: return json{{"t", "bool"}, {"v", as_bool()}};
            case Tag::Num: return json{{"t", "num"}, {"v", as_num()}};
            case Tag::Str: return json{{"t", "str"}, {"v", as_str()}};
            case Tag::List: {
                json arr = json::array();
                for (const auto& d : as_list()) arr.push_back(d.to_json());
                return json{{"t", "list"}, {"v", std::move(arr)}};
            }
            case Tag::Err: {
                json j{{"t", "error"}, {"v", to_string(as_error().kind)}};
                if (!as_error().message.empty()) j["msg"] = as_error().message;
                return j;
            }
        }
        throw Error("unreachable denotation tag");
    }

    static Denotation from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("t"))
            throw ParseError("denotation object must carry a 't' tag");
        const std::string t = j.at("t").get<std::string>();
        if (t == "bool") return boolean(j.at("v").get<bool>());
        if (t == "num") return num(j.at("v").get<double>());
        if (t == "str") return str(j.at("v").get<std::string>());
        if (t == "list") {
            std::vector<Denotation> items;
            for (const auto& c : j.at("v")) items.push_back(from_json(c));
            return list(std::move(items));
        }
        if (t == "error") {
            std::string msg = j.contains("msg") ? j.at("msg").get<std::string>() : "";
            return error(error_kind_from_string(j.at("v").get<std::string>()), msg);
        }
        throw ParseError("unknown denotation tag '" + t + "'");
    }

  private:
    using Value = std::variant<bool, double, std::string, std::vector<Denotation>, ErrorValue>;
    explicit Denotation(Value v) : value_(std::move(v)) {}
    Value value_;
};

// Structural equality with numeric tolerance; two errors are equal iff their
// kinds match (messages are diagnostics, not identity).
inline bool denotation_equal(const Denotation& a, const Denotation& b) {
    if (a.tag() != b.tag()) return false;
    switch (a.tag()) {
        case Denotation::Tag::Bool: return a.as_bool() == b.as_bool();
        case Denotation::Tag::Num: return num_equal(a.as_num(), b.as_num());
        case Denotation::Tag::Str: return a.as_str() == b.as_str();
        case Denotation::Tag::List: {
            const auto& xs = a.as_list();
            const auto& ys = b.as_list();
            if (xs.size() != ys.size()) return false;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!denotation_equal(xs[i], ys[i])) return false;
            }
            return true;
        }
        case Denotation::Tag::Err: return a.as_error().kind == b.as_error().kind;
    }
    return false;
}

}  // namespace execfilter
