#pragma once

// Validity checking: every declaration whose knowledge carries a context
// annotation must actually be derivable from exactly the declared agents.
// check_program works on a copy, so the registry it is given never changes.

#include <cstdint>
#include <string>
#include <vector>

#include "colweb/ast.hpp"
#include "colweb/registry.hpp"
#include "colweb/solver.hpp"

namespace colweb {

enum class Verdict { Valid, Invalid, Skipped };

struct CheckEntry {
    std::string path;
    Verdict verdict = Verdict::Skipped;
    std::string reason;           // failure reason or skip reason
    std::size_t trace_steps = 0;  // for Valid entries
};

struct CheckReport {
    std::vector<CheckEntry> entries;
    bool overall = true;  // true iff no entry is Invalid
    std::string to_text() const;
    std::string to_kv() const;  // line-oriented key=value records
};

// Checks one declaration against the given registry. Contexts named by the
// declaration are checked first (recursively; cycles come back Invalid).
// Unannotated knowledge is Skipped as axiomatic; running into the solver
// limits yields Invalid("inconclusive: ...") rather than a verdict.
// Materializes into r; pass a copy when isolation matters.
CheckEntry check_declaration(Registry& r, const Declaration& d, Limits limits = {});

// Checks every explicit declaration and, per class, its first class_sample
// unconsumed instances. Works on a copy of r.
CheckReport check_program(const Registry& r, std::uint64_t class_sample = 5, Limits limits = {});

}  // namespace colweb
