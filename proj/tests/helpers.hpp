#pragma once

// Shared test plumbing: corpus access and the iterative fibonacci oracles the
// solver results are judged against. The oracles are deliberately independent
// of every interpreter data structure.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "colweb/ast.hpp"
#include "colweb/parse.hpp"
#include "colweb/registry.hpp"
#include "colweb/solver.hpp"

namespace testutil {

inline std::string programs_dir() {
    if (const char* p = std::getenv("COLWEB_PROGRAMS")) return p;
    return "programs";
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string program_text(const std::string& name) {
    return read_file(programs_dir() + "/" + name);
}

inline colweb::Registry load_program(const std::string& name) {
    return colweb::load(colweb::parse_program(program_text(name)));
}

// Base values at 0 and 1 (the fib_buq/fib_puq corpus).
inline std::uint64_t fib0(std::uint64_t n) {
    std::uint64_t a = 1, b = 1;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint64_t c = a + b;
        a = b;
        b = c;
    }
    return a;
}

// Base values at 1 and 2 (the fib_agents/fib_variation corpus).
inline std::uint64_t fib1(std::uint64_t n) {
    std::uint64_t a = 1, b = 1;
    for (std::uint64_t i = 1; i < n; ++i) {
        std::uint64_t c = a + b;
        a = b;
        b = c;
    }
    return a;
}

inline std::optional<std::uint64_t> witness(const colweb::Answer& ans, const std::string& name) {
    for (const auto& [n, v] : ans.witnesses)
        if (n == name) return v;
    return std::nullopt;
}

inline colweb::Atom atom(const std::string& text) {
    return colweb::parse_query(text).atom_value();
}

}  // namespace testutil
