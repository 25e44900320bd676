#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace colweb {

// Base for everything the interpreter can throw.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    int line = 0;
    int column = 0;
    std::vector<std::string> expected;
    ParseError(const std::string& msg, int line_, int col_, std::vector<std::string> expected_ = {})
        : Error(msg), line(line_), column(col_), expected(std::move(expected_)) {}
};

struct ArityError : Error {
    std::string predicate;
    ArityError(const std::string& msg, std::string pred) : Error(msg), predicate(std::move(pred)) {}
};

struct UnboundVariable : Error {
    std::string var;
    UnboundVariable(const std::string& msg, std::string var_) : Error(msg), var(std::move(var_)) {}
};

struct UnsupportedPattern : Error {
    using Error::Error;
};

struct LoadError : Error {
    using Error::Error;
};

struct DuplicateAgent : LoadError {
    std::string path;
    DuplicateAgent(const std::string& msg, std::string path_) : LoadError(msg), path(std::move(path_)) {}
};

struct AbsentAgent : Error {
    std::string path;
    AbsentAgent(const std::string& msg, std::string path_) : Error(msg), path(std::move(path_)) {}
};

struct CycleError : Error {
    std::string path;
    CycleError(const std::string& msg, std::string path_) : Error(msg), path(std::move(path_)) {}
};

struct SolveFailure : Error {
    using Error::Error;
};

struct MissingArgument : Error {
    std::string var;
    MissingArgument(const std::string& msg, std::string var_) : Error(msg), var(std::move(var_)) {}
};

// Limit errors are distinct from plain failure.
struct DepthExceeded : Error {
    using Error::Error;
};

struct RoundsExceeded : Error {
    using Error::Error;
};

}  // namespace colweb
