#pragma once

#include <stdexcept>
#include <string>

namespace execfilter {

// Base class for all exceptions thrown by this library. Execution errors of
// the table language are NOT exceptions; they travel in-band as Denotation
// error values (see denotation.hpp).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

struct TypeCheckError : Error {
    explicit TypeCheckError(const std::string& msg) : Error("type error: " + msg) {}
};

struct UnknownNameError : Error {
    explicit UnknownNameError(const std::string& msg) : Error("unknown name: " + msg) {}
};

struct DomainMismatchError : Error {
    explicit DomainMismatchError(const std::string& msg) : Error("domain mismatch: " + msg) {}
};

struct EmptyInputError : Error {
    explicit EmptyInputError(const std::string& msg) : Error("empty input: " + msg) {}
};

struct ReplacementInfeasibleError : Error {
    explicit ReplacementInfeasibleError(const std::string& msg)
        : Error("replacement infeasible: " + msg) {}
};

struct DegenerateScoresError : Error {
    explicit DegenerateScoresError(const std::string& msg)
        : Error("degenerate scores: " + msg) {}
};

struct DegenerateLabelsError : Error {
    explicit DegenerateLabelsError(const std::string& msg)
        : Error("degenerate labels: " + msg) {}
};

struct GenerationExhaustedError : Error {
    explicit GenerationExhaustedError(const std::string& msg)
        : Error("generation exhausted: " + msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("io error: " + msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

}  // namespace execfilter
